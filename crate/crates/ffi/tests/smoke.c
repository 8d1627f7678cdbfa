#include <math.h>
#include <stdio.h>
#include "tds_spectrum.h"

int main(void) {
    const double a[4] = {0, 1, -5, 10};
    const double b[4] = {0, 0, -3, -3};
    TdsSystem *sys = NULL;
    TdsReport *report = NULL;
    TdsComplex root;
    double residual;

    if (tds_system_new(2, a, b, 1.0, &sys) != TDS_STATUS_OK) return 1;
    if (tds_find_roots(sys, -4, 2, -1, 8, 0.05, 1e-10, &report) != TDS_STATUS_OK) return 2;
    if (tds_report_len(report) != 3) return 3;
    if (tds_report_root(report, 0, &root, &residual) != TDS_STATUS_OK) return 4;
    if (fabs(root.re - 0.8070) > 5e-4) return 5;
    if (tds_report_root(report, 9, &root, &residual) != TDS_STATUS_OUT_OF_RANGE) return 6;
    if (tds_last_error_message() == NULL) return 7;
    printf("%.4f\n", root.re);
    tds_report_free(report);
    tds_system_free(sys);
    return 0;
}
