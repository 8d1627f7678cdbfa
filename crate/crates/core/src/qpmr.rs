//! Ground-truth root finder for the characteristic quasipolynomial.
//!
//! Roots are located on a rectangular grid as cells where both the zero
//! level set of `Re h` and that of `Im h` pass, then polished by Newton's
//! method. [`count_roots`] counts zeros inside a rectangle independently via
//! the argument principle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexScalar;
use crate::model::{char_fn, residual, Method, Region, SpectrumReport, TdsSystem};

pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SAMPLES_PER_EDGE: usize = 400;

const NEWTON_MAX_ITERATIONS: usize = 100;
const CONTOUR_MIN_RESIDUAL: f64 = 1e-6;
const MAX_BISECTION_DEPTH: u32 = 40;

/// Evaluation grid over a region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub region: Region,
    pub step: f64,
}

impl GridSpec {
    pub fn new(region: Region, step: f64) -> Result<Self> {
        let limit = region.width().min(region.height()) / 4.0;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidInput(format!("grid step must be > 0, got {step}")));
        }
        if step > limit {
            return Err(Error::InvalidInput(format!(
                "grid step {step} exceeds a quarter of the region's smaller side ({limit})"
            )));
        }
        Ok(Self { region, step })
    }

    fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let cells = ((hi - lo) / step).ceil().max(1.0) as usize;
        let dx = (hi - lo) / cells as f64;
        (0..=cells).map(|i| if i == cells { hi } else { lo + i as f64 * dx }).collect()
    }
}

/// Newton's method with a central-difference derivative, run until the
/// scaled residual drops to `tol`.
pub fn refine_root(sys: &TdsSystem, s0: ComplexScalar, tol: f64) -> Result<ComplexScalar> {
    if !s0.is_finite() {
        return Err(Error::InvalidInput(format!("starting point must be finite, got {s0}")));
    }
    let mut s = s0;
    let mut r = residual(sys, s);
    for _ in 0..NEWTON_MAX_ITERATIONS {
        if r <= tol {
            return Ok(s);
        }
        let step = newton_step(sys, s);
        if !step.is_finite() {
            break;
        }
        s -= step;
        r = residual(sys, s);
        if !r.is_finite() {
            break;
        }
    }
    if r <= tol {
        Ok(s)
    } else {
        Err(Error::Refinement { last: s, residual: r })
    }
}

fn newton_step(sys: &TdsSystem, s: Complex64) -> Complex64 {
    let h = char_fn(sys, s);
    let delta = 1e-7 * (1.0 + s.norm());
    let dh = (char_fn(sys, s + delta) - char_fn(sys, s - delta)) / (2.0 * delta);
    h / dh
}

/// A few extra Newton steps past the tolerance, kept only while the residual
/// keeps shrinking.
fn polish(sys: &TdsSystem, mut s: Complex64) -> (Complex64, f64) {
    let mut r = residual(sys, s);
    for _ in 0..3 {
        let cand = s - newton_step(sys, s);
        let rc = residual(sys, cand);
        if !(rc < r) {
            break;
        }
        s = cand;
        r = rc;
    }
    (s, r)
}

/// Real systems have real roots; a rounding-level imaginary part is dropped
/// when the residual stays within `tol`.
fn snap_real(sys: &TdsSystem, (s, r): (Complex64, f64), tol: f64) -> (Complex64, f64) {
    if s.im == 0.0 || s.im.abs() > 1e-10 * (1.0 + s.norm()) {
        return (s, r);
    }
    let real = Complex64::new(s.re, 0.0);
    let rr = residual(sys, real);
    if rr <= tol.max(r) {
        (real, rr)
    } else {
        (s, r)
    }
}

/// All roots of the characteristic function inside `grid.region`.
pub fn find_roots(sys: &TdsSystem, grid: &GridSpec, tol: f64) -> Result<SpectrumReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be > 0, got {tol}")));
    }
    let region = grid.region;
    let xs = GridSpec::axis(region.re_min, region.re_max, grid.step);
    let ys = GridSpec::axis(region.im_min, region.im_max, grid.step);

    // values[j][i] = h(xs[i] + i·ys[j])
    let values: Vec<Vec<Complex64>> =
        ys.par_iter().map(|&y| xs.iter().map(|&x| char_fn(sys, Complex64::new(x, y))).collect()).collect();

    let mut centers = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..xs.len() - 1 {
            let corners = [values[j][i], values[j][i + 1], values[j + 1][i + 1], values[j + 1][i]];
            if changes_sign(corners.map(|z| z.re)) && changes_sign(corners.map(|z| z.im)) {
                centers.push(Complex64::new(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])));
            }
        }
    }

    let mut found: Vec<(Complex64, f64)> = centers
        .par_iter()
        .filter_map(|&c| refine_root(sys, c, tol).ok())
        .map(|s| snap_real(sys, polish(sys, s), tol))
        .filter(|&(s, r)| r <= tol && region.contains(s))
        .collect();

    found.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.re.total_cmp(&b.0.re)).then(a.0.im.total_cmp(&b.0.im)));
    let radius = grid.step / 2.0;
    let mut kept: Vec<(Complex64, f64)> = Vec::new();
    for cand in found {
        if kept.iter().all(|k| (k.0 - cand.0).norm() >= radius) {
            kept.push(cand);
        }
    }
    Ok(SpectrumReport::new(kept, region, Method::Oracle))
}

/// True unless all four values share a strict sign.
fn changes_sign(v: [f64; 4]) -> bool {
    !(v.iter().all(|&x| x > 0.0) || v.iter().all(|&x| x < 0.0))
}

/// Number of zeros inside `region` from the winding number of `h` along its
/// boundary.
pub fn count_roots(sys: &TdsSystem, region: &Region, samples_per_edge: usize) -> Result<usize> {
    let samples = samples_per_edge.max(4);
    match winding_number(sys, region, samples) {
        Err(Error::Contour(_)) => {
            let half_step = 0.5 * region.width().max(region.height()) / samples as f64;
            winding_number(sys, &region.inflate(half_step), samples)
        }
        other => other,
    }
}

fn winding_number(sys: &TdsSystem, region: &Region, samples: usize) -> Result<usize> {
    let corners = [
        Complex64::new(region.re_min, region.im_min),
        Complex64::new(region.re_max, region.im_min),
        Complex64::new(region.re_max, region.im_max),
        Complex64::new(region.re_min, region.im_max),
    ];
    let mut points = Vec::with_capacity(4 * samples + 1);
    for e in 0..4 {
        let (a, b) = (corners[e], corners[(e + 1) % 4]);
        for i in 0..samples {
            points.push(a + (b - a) * (i as f64 / samples as f64));
        }
    }
    points.push(corners[0]);

    let values: Vec<Complex64> = points.iter().map(|&s| char_fn(sys, s)).collect();
    let closest = points.iter().map(|&s| residual(sys, s)).fold(f64::INFINITY, f64::min);
    if !(closest > CONTOUR_MIN_RESIDUAL) {
        return Err(Error::Contour(format!("scaled |h| drops to {closest:.3e} on the boundary of {region}")));
    }

    let mut total = 0.0;
    for i in 0..points.len() - 1 {
        total += phase_increment(sys, points[i], points[i + 1], values[i], values[i + 1], 0)?;
    }
    let turns = total / (2.0 * PI);
    let rounded = turns.round();
    if (turns - rounded).abs() > 0.25 || rounded < 0.0 {
        return Err(Error::Resolution(format!(
            "accumulated phase {turns:.3} turns on {region}; increase samples per edge"
        )));
    }
    Ok(rounded as usize)
}

fn phase_increment(
    sys: &TdsSystem,
    a: Complex64,
    b: Complex64,
    ha: Complex64,
    hb: Complex64,
    depth: u32,
) -> Result<f64> {
    let d = (hb / ha).arg();
    if d.abs() <= PI / 2.0 {
        return Ok(d);
    }
    if depth >= MAX_BISECTION_DEPTH {
        return Err(Error::Resolution(format!("phase jump near {a} did not resolve under bisection")));
    }
    let m = 0.5 * (a + b);
    let hm = char_fn(sys, m);
    if !(residual(sys, m) > CONTOUR_MIN_RESIDUAL) {
        return Err(Error::Contour(format!("root on the contour near {m}")));
    }
    Ok(phase_increment(sys, a, m, ha, hm, depth + 1)? + phase_increment(sys, m, b, hm, hb, depth + 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo::counterexample_system;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grid_validation() {
        let r = Region::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(GridSpec::new(r, 0.3).is_err());
        assert!(GridSpec::new(r, 0.0).is_err());
        assert!(GridSpec::new(r, 0.25).is_ok());
    }

    #[test]
    fn axis_covers_bounds() {
        let xs = GridSpec::axis(-4.0, 2.0, 0.05);
        assert_eq!(xs.len(), 121);
        assert_eq!(xs[0], -4.0);
        assert_eq!(*xs.last().unwrap(), 2.0);
    }

    #[test]
    fn refine_examples() {
        let sys = counterexample_system();
        let s = refine_root(&sys, c(0.8, 0.0), 1e-10).unwrap();
        assert!((s - 0.8070).norm() < 5e-4);
        let s = refine_root(&sys, c(-1.5, 6.6), 1e-10).unwrap();
        assert!((s - c(-1.4928, 6.6027)).norm() < 5e-4);
        let plain = sys.without_delay_term();
        let s = refine_root(&plain, c(9.5, 0.0), 1e-12).unwrap();
        assert!((s - (5.0 + 20f64.sqrt())).norm() < 1e-8);
    }

    #[test]
    fn refine_reports_nonconvergence() {
        let sys = counterexample_system();
        match refine_root(&sys, c(0.8, 0.0), 0.0) {
            Err(Error::Refinement { residual, .. }) => assert!(residual < 1e-10),
            other => panic!("expected refinement error, got {other:?}"),
        }
        assert!(refine_root(&sys, c(f64::NAN, 0.0), 1e-8).is_err());
    }

    #[test]
    fn counts_isolated_root() {
        let sys = counterexample_system();
        let r = Region::new(0.7, 0.9, -0.1, 0.1).unwrap();
        assert_eq!(count_roots(&sys, &r, 64).unwrap(), 1);
        let far = Region::new(10.0, 11.0, 5.0, 6.0).unwrap();
        assert_eq!(count_roots(&sys, &far, 64).unwrap(), 0);
    }

    #[test]
    fn empty_region_has_no_roots() {
        let sys = counterexample_system();
        let r = Region::new(10.0, 11.0, 5.0, 6.0).unwrap();
        let rep = find_roots(&sys, &GridSpec::new(r, 0.05).unwrap(), 1e-10).unwrap();
        assert!(rep.is_empty());
    }

    #[test]
    fn root_on_contour_is_retried() {
        // λ1 ≈ 0.807 sits exactly on the left edge before inflation
        let sys = counterexample_system();
        let s = refine_root(&sys, c(0.8, 0.0), 1e-14).unwrap();
        let r = Region::new(s.re, s.re + 1.0, -0.5, 0.5).unwrap();
        assert_eq!(count_roots(&sys, &r, 100).unwrap(), 1);
    }
}
