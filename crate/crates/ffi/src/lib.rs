//! C ABI over `tds-spectrum`.
//!
//! Every fallible call returns a [`TdsStatus`]; on failure the message is
//! kept per thread and read with [`tds_last_error_message`]. Handles are
//! opaque and owned by the caller, who releases them with the matching
//! `*_free` function. Matrices cross the boundary row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use tds_spectrum as tds;
use tds_spectrum::lambert_dde::SolverOptions;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TdsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Domain = 3,
    Numeric = 4,
    Defective = 5,
    Refinement = 6,
    Contour = 7,
    Inconsistent = 8,
    Solver = 9,
    Inapplicable = 10,
    Parse = 11,
    Io = 12,
    Panic = 13,
    OutOfRange = 14,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TdsComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for TdsComplex {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<TdsComplex> for Complex64 {
    fn from(z: TdsComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

/// Time-delay system `x' = A x + B x(t - tau)`.
pub struct TdsSystem(tds::TdsSystem);

/// Roots found in a region, in dominance order.
pub struct TdsReport(tds::SpectrumReport);

/// Converged solution of the branch equation.
pub struct TdsSolution(tds::LambertSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &tds::Error) -> TdsStatus {
    use tds::Error as E;
    match err {
        E::InvalidInput(_) => TdsStatus::InvalidInput,
        E::Domain(_) => TdsStatus::Domain,
        E::DefectiveMatrix { .. } => TdsStatus::Defective,
        E::Numeric(_) | E::Resolution(_) | E::Pairing(_) => TdsStatus::Numeric,
        E::Refinement { .. } => TdsStatus::Refinement,
        E::Contour(_) => TdsStatus::Contour,
        E::Inconsistent { .. } => TdsStatus::Inconsistent,
        E::Solver { .. } => TdsStatus::Solver,
        E::Inapplicable(_) => TdsStatus::Inapplicable,
        E::Parse { .. } | E::Json(_) => TdsStatus::Parse,
        E::Io(_) => TdsStatus::Io,
    }
}

/// Runs `f`, recording its error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (TdsStatus, String)>) -> TdsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TdsStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TdsStatus::Panic
        }
    }
}

fn lift<T>(r: tds::Result<T>) -> Result<T, (TdsStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (TdsStatus, String) {
    (TdsStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (TdsStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), (TdsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

fn region(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<tds::Region, (TdsStatus, String)> {
    lift(tds::Region::new(re_min, re_max, im_min, im_max))
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tds_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a system from row-major `n×n` real matrices.
///
/// # Safety
/// `a` and `b` must point to `n*n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_system_new(
    n: usize,
    a: *const f64,
    b: *const f64,
    tau: f64,
    out: *mut *mut TdsSystem,
) -> TdsStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return Err(null("a/b"));
        }
        let len = n.checked_mul(n).ok_or_else(|| (TdsStatus::InvalidInput, "n is too large".into()))?;
        let to_matrix = |p: *const f64| {
            let data = std::slice::from_raw_parts(p, len).iter().map(|&x| Complex64::new(x, 0.0)).collect();
            tds::ComplexMatrix::new(n, data)
        };
        let sys = lift(tds::TdsSystem::new(lift(to_matrix(a))?, lift(to_matrix(b))?, tau))?;
        write_out(out, Box::into_raw(Box::new(TdsSystem(sys))), "out")
    })
}

/// Parses a system from JSON text with keys `A`, `B` and `tau`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_system_from_json(json: *const c_char, out: *mut *mut TdsSystem) -> TdsStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text =
            CStr::from_ptr(json).to_str().map_err(|_| (TdsStatus::Parse, "json is not valid UTF-8".to_string()))?;
        let sys = lift(tds::TdsSystem::from_json_str(text))?;
        write_out(out, Box::into_raw(Box::new(TdsSystem(sys))), "out")
    })
}

/// # Safety
/// `sys` must come from a `tds_system_*` constructor, or be null.
#[no_mangle]
pub unsafe extern "C" fn tds_system_free(sys: *mut TdsSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// # Safety
/// `sys` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tds_system_order(sys: *const TdsSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.0.order())
}

/// `h(s) = det(sI - A - B e^{-s tau})`.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_char_fn(sys: *const TdsSystem, s: TdsComplex, out: *mut TdsComplex) -> TdsStatus {
    guard(|| {
        let sys = as_ref(sys, "sys")?;
        write_out(out, tds::char_fn(&sys.0, s.into()).into(), "out")
    })
}

/// Grid search plus Newton refinement over a rectangle.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_find_roots(
    sys: *const TdsSystem,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    step: f64,
    tol: f64,
    out: *mut *mut TdsReport,
) -> TdsStatus {
    guard(|| {
        let sys = as_ref(sys, "sys")?;
        let grid = lift(tds::GridSpec::new(region(re_min, re_max, im_min, im_max)?, step))?;
        let report = lift(tds::find_roots(&sys.0, &grid, tol))?;
        write_out(out, Box::into_raw(Box::new(TdsReport(report))), "out")
    })
}

/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tds_report_len(report: *const TdsReport) -> usize {
    report.as_ref().map_or(0, |r| r.0.len())
}

/// Root `index` and its scaled residual.
///
/// # Safety
/// `report` must be a live handle; `root` and `residual` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_report_root(
    report: *const TdsReport,
    index: usize,
    root: *mut TdsComplex,
    residual: *mut f64,
) -> TdsStatus {
    guard(|| {
        let r = &as_ref(report, "report")?.0;
        if index >= r.len() {
            return Err((TdsStatus::OutOfRange, format!("index {index} out of range for {} roots", r.len())));
        }
        write_out(root, r.roots[index].into(), "root")?;
        write_out(residual, r.residuals[index], "residual")
    })
}

/// # Safety
/// `report` must come from [`tds_find_roots`], or be null.
#[no_mangle]
pub unsafe extern "C" fn tds_report_free(report: *mut TdsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Number of roots inside a rectangle by the argument principle.
///
/// # Safety
/// `sys` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_count_roots(
    sys: *const TdsSystem,
    re_min: f64,
    re_max: f64,
    im_min: f64,
    im_max: f64,
    samples_per_edge: usize,
    out: *mut usize,
) -> TdsStatus {
    guard(|| {
        let sys = as_ref(sys, "sys")?;
        let n = lift(tds::count_roots(&sys.0, &region(re_min, re_max, im_min, im_max)?, samples_per_edge))?;
        write_out(out, n, "out")
    })
}

/// `W_k(z)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_lambert_w(k: i64, z: TdsComplex, out: *mut TdsComplex) -> TdsStatus {
    guard(|| {
        let w = lift(tds::lambert_w(tds::BranchId(k), z.into()))?;
        write_out(out, w.into(), "out")
    })
}

/// Branch whose range contains `w`.
///
/// # Safety
/// `k` and `on_boundary` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_branch_of(w: TdsComplex, k: *mut i64, on_boundary: *mut bool) -> TdsStatus {
    guard(|| {
        let m = lift(tds::branch_of(w.into()))?;
        write_out(k, m.branch.0, "k")?;
        write_out(on_boundary, m.on_boundary, "on_boundary")
    })
}

/// Solves `W(tau B Q) e^{W(tau B Q) + A tau} = tau B` for `Q` with one
/// branch per eigenvalue, starting from the row-major `n×n` matrix `q0`.
///
/// # Safety
/// `sys` must be a live handle of order `n`; `branches` must point to `n`
/// values and `q0` to `n*n` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_solve_branch(
    sys: *const TdsSystem,
    branches: *const i64,
    q0: *const TdsComplex,
    tol: f64,
    max_iterations: usize,
    out: *mut *mut TdsSolution,
) -> TdsStatus {
    guard(|| {
        let sys = as_ref(sys, "sys")?;
        if branches.is_null() || q0.is_null() {
            return Err(null("branches/q0"));
        }
        let n = sys.0.order();
        let ks = std::slice::from_raw_parts(branches, n);
        let data = std::slice::from_raw_parts(q0, n * n).iter().map(|&z| z.into()).collect();
        let q0 = lift(tds::ComplexMatrix::new(n, data))?;
        let assign = tds::BranchAssignment::from_ints(ks);
        let opts = SolverOptions { tol, max_iterations };
        let sol = lift(tds::solve_branch(&sys.0, &assign, &q0, opts))?;
        write_out(out, Box::into_raw(Box::new(TdsSolution(sol))), "out")
    })
}

/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tds_solution_dim(sol: *const TdsSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.0.s.dim())
}

/// Final residual norm of the branch equation, or NaN for a null handle.
///
/// # Safety
/// `sol` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tds_solution_residual(sol: *const TdsSolution) -> f64 {
    sol.as_ref().map_or(f64::NAN, |s| s.0.solver_residual)
}

/// Eigenvalue `index` of `S`, i.e. a characteristic root.
///
/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tds_solution_eigenvalue(
    sol: *const TdsSolution,
    index: usize,
    out: *mut TdsComplex,
) -> TdsStatus {
    guard(|| {
        let s = &as_ref(sol, "sol")?.0;
        let z = s.eigenvalues.get(index).ok_or_else(|| {
            (TdsStatus::OutOfRange, format!("index {index} out of range for {} eigenvalues", s.eigenvalues.len()))
        })?;
        write_out(out, (*z).into(), "out")
    })
}

/// Copies `S` row-major into `out`, which must hold `dim*dim` values.
///
/// # Safety
/// `sol` must be a live handle; `out` must point to `dim*dim` writable values.
#[no_mangle]
pub unsafe extern "C" fn tds_solution_s(sol: *const TdsSolution, out: *mut TdsComplex) -> TdsStatus {
    guard(|| {
        let s = &as_ref(sol, "sol")?.0.s;
        if out.is_null() {
            return Err(null("out"));
        }
        for (i, &z) in s.as_slice().iter().enumerate() {
            out.add(i).write(z.into());
        }
        Ok(())
    })
}

/// # Safety
/// `sol` must come from [`tds_solve_branch`], or be null.
#[no_mangle]
pub unsafe extern "C" fn tds_solution_free(sol: *mut TdsSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}
