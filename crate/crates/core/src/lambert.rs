//! Scalar Lambert W on every integer branch.
//!
//! `W_k(z)` solves `w·e^w = z`. Branch `k = 0` is the principal branch
//! (real on `[-1/e, ∞)`), `k = -1` is real on `[-1/e, 0)` with values in
//! `(-∞, -1]`. Branch cuts and their closure follow the usual
//! counter-clockwise continuity convention: on a cut the value is the limit
//! taken from above.
//!
//! Range geometry: the images of the negative real axis are the curves
//! `x = -y·cot(y)` for `y ∈ (2jπ, (2j+1)π)` and their mirror images. Between
//! them lie the ranges of the individual branches. The real ray `(-∞, -1]`
//! belongs to branch -1; the upper curves (`y > 0`) belong to the branch on
//! their right, the lower curves to the branch on their left.

use std::f64::consts::{E, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexScalar;

const TWO_PI: f64 = 2.0 * PI;
/// 1/e as a double-double.
const INV_E_HI: f64 = 0.367_879_441_171_442_33;
const INV_E_LO: f64 = -1.242_875_367_278_836_3e-17;

const MAX_ITERATIONS: usize = 50;
const STEP_TOL: f64 = 1e-15;

/// Integer index of a Lambert W branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchId(pub i64);

impl BranchId {
    pub const PRINCIPAL: BranchId = BranchId(0);
    pub const LOWER: BranchId = BranchId(-1);

    #[inline]
    pub fn k(self) -> i64 {
        self.0
    }
}

impl From<i64> for BranchId {
    fn from(k: i64) -> Self {
        BranchId(k)
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Result of classifying a point of the w-plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchMembership {
    pub branch: BranchId,
    /// The point lies on (or numerically next to) the boundary between two
    /// branch ranges; `branch` then carries the closure convention.
    pub on_boundary: bool,
}

/// `W_k(z)`.
pub fn lambert_w(k: BranchId, z: ComplexScalar) -> Result<ComplexScalar> {
    let k = k.0;
    if !z.is_finite() {
        return Err(Error::InvalidInput(format!("Lambert W argument must be finite, got {z}")));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return if k == 0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(Error::Domain(format!("W_{k}(0) is -infinity")))
        };
    }
    // The double nearest -1/e is treated as the branch point itself.
    if z.im == 0.0 && (z.re + INV_E_HI).abs() <= 2.0 * f64::EPSILON * INV_E_HI && (k == 0 || k == -1) {
        return Ok(Complex64::new(-1.0, 0.0));
    }

    let primary = halley(z, initial_guess(z, k));
    if let Ok(w) = primary {
        if in_range_closure(k, w) {
            return Ok(w);
        }
    }
    // Rare: the iteration landed on a neighbouring branch. Try the other seeds.
    for seed in fallback_guesses(z, k) {
        if let Ok(w) = halley(z, seed) {
            if in_range_closure(k, w) {
                return Ok(w);
            }
        }
    }
    Err(match primary {
        Err(e) => e,
        Ok(w) => Error::Numeric(format!(
            "Lambert W iteration for branch {k} at z = {z} converged to {w} outside the branch range"
        )),
    })
}

/// `p = sqrt(2(e·z + 1))`, with `z + 1/e` formed in extended precision.
fn branch_point_p(z: Complex64) -> Complex64 {
    let shifted = Complex64::new((z.re + INV_E_HI) + INV_E_LO, z.im);
    (shifted * (2.0 * E)).sqrt()
}

/// Series of W about the branch point in powers of `p`.
fn branch_point_series(p: Complex64) -> Complex64 {
    const C: [f64; 7] = [-1.0, 1.0, -1.0 / 3.0, 11.0 / 72.0, -43.0 / 540.0, 769.0 / 17280.0, -221.0 / 8505.0];
    C.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * p + c)
}

fn asymptotic(z: Complex64, k: i64) -> Complex64 {
    let l1 = z.ln() + Complex64::new(0.0, TWO_PI * k as f64);
    let l2 = l1.ln();
    l1 - l2 + l2 / l1
}

fn near_branch_point(z: Complex64, k: i64) -> bool {
    (z + INV_E_HI).norm() < 0.3 && (k == 0 || (k == -1 && z.im >= 0.0) || (k == 1 && z.im < 0.0))
}

fn initial_guess(z: Complex64, k: i64) -> Complex64 {
    if near_branch_point(z, k) {
        let p = branch_point_p(z);
        return branch_point_series(if k == 0 { p } else { -p });
    }
    match k {
        0 if z.norm() <= 0.5 => z * (1.0 - z * (1.0 - 1.5 * z)),
        0 if z.norm() <= 3.0 => {
            // Winitzki's uniform approximation
            let l = (1.0 + z).ln();
            l * (1.0 - (1.0 + l).ln() / (2.0 + l))
        }
        -1 if z.im == 0.0 && z.re < 0.0 && z.re > -INV_E_HI => {
            let l1 = (-z.re).ln();
            let l2 = (-l1).ln();
            Complex64::new(l1 - l2 + l2 / l1, 0.0)
        }
        _ => asymptotic(z, k),
    }
}

fn fallback_guesses(z: Complex64, k: i64) -> Vec<Complex64> {
    let p = branch_point_p(z);
    let mut seeds = vec![asymptotic(z, k), branch_point_series(p), branch_point_series(-p)];
    // Nudge the asymptotic seed towards the middle of the branch strip.
    let a = asymptotic(z, k);
    seeds.push(Complex64::new(a.re, (2 * k) as f64 * PI - k.signum() as f64 * PI / 2.0));
    seeds
}

/// Halley iteration on `g(w) = w - z·e^{-w}`, which avoids overflow of `e^w`.
fn halley(z: Complex64, mut w: Complex64) -> Result<Complex64> {
    for _ in 0..MAX_ITERATIONS {
        let t = z * (-w).exp();
        let g = w - t;
        let g1 = 1.0 + t;
        let g2 = -t;
        let denom = 2.0 * g1 * g1 - g * g2;
        if denom.norm() == 0.0 || !denom.is_finite() {
            break;
        }
        let step = 2.0 * g * g1 / denom;
        if !step.is_finite() {
            break;
        }
        w -= step;
        if step.norm() <= STEP_TOL * w.norm() || step.norm() == 0.0 {
            return Ok(w);
        }
    }
    // Accept a stalled iterate only if it satisfies the defining relation.
    if w.is_finite() && (w * w.exp() - z).norm() <= 1e-12 * z.norm() {
        return Ok(w);
    }
    Err(Error::Numeric(format!("Lambert W iteration did not converge at z = {z}")))
}

/// Branch whose range contains `w`, from the analytic boundary curves.
///
/// Points exactly on a boundary are assigned by the closure convention
/// described in the module docs (the real ray `(-∞, -1)` goes to -1, the
/// point -1 to 0).
pub fn range_branch(w: ComplexScalar) -> BranchId {
    let (x, y) = (w.re, w.im);
    if y == 0.0 {
        return BranchId(if x >= -1.0 { 0 } else { -1 });
    }
    let ya = y.abs();
    let j = (ya / TWO_PI).floor();
    let frac = ya - j * TWO_PI;
    let j = j as i64;
    if frac < PI {
        let xb = -ya * frac.cos() / frac.sin();
        if y > 0.0 {
            BranchId(if x >= xb { j } else { j + 1 })
        } else {
            BranchId(if x > xb { -j } else { -(j + 1) })
        }
    } else if y > 0.0 {
        BranchId(j + 1)
    } else {
        BranchId(-(j + 1))
    }
}

/// Distance-like measure from `w` to the nearest range boundary, relative to
/// `1 + |w|`. Zero on a boundary.
fn boundary_gap(w: Complex64) -> f64 {
    let (x, y) = (w.re, w.im);
    let scale = 1.0 + w.norm();
    let mut gap = (w + 1.0).norm();
    if x <= -1.0 {
        gap = gap.min(y.abs());
    }
    let ya = y.abs();
    let frac = ya - (ya / TWO_PI).floor() * TWO_PI;
    if frac > 0.0 && frac < PI {
        let xb = -ya * frac.cos() / frac.sin();
        gap = gap.min((x - xb).abs());
    }
    gap / scale
}

fn in_range_closure(k: i64, w: Complex64) -> bool {
    if range_branch(w).0 == k {
        return true;
    }
    let delta = 1e-9 * (1.0 + w.norm());
    (0..8).any(|i| {
        let theta = i as f64 * PI / 4.0;
        range_branch(w + Complex64::from_polar(delta, theta)).0 == k
    })
}

/// Which branch produces `w`, decided by round trip:
/// the unique `k` with `W_k(w·e^w) = w`. Candidates are `k0, k0-1, k0+1`
/// with `k0 = round(Im(w) / 2π)`.
pub fn branch_of(w: ComplexScalar) -> Result<BranchMembership> {
    if !w.is_finite() {
        return Err(Error::InvalidInput(format!("branch_of needs a finite value, got {w}")));
    }
    if w.re == 0.0 && w.im == 0.0 {
        return Ok(BranchMembership { branch: BranchId::PRINCIPAL, on_boundary: false });
    }
    let z = w * w.exp();
    if !z.is_finite() || z.norm() == 0.0 {
        return Err(Error::Numeric(format!("w·e^w is not representable for w = {w}")));
    }
    let k0 = (w.im / TWO_PI).round() as i64;
    let mut matches: Vec<(i64, f64)> = [k0, k0 - 1, k0 + 1]
        .into_iter()
        .filter_map(|k| {
            let back = lambert_w(BranchId(k), z).ok()?;
            let err = (back - w).norm() / (1.0 + w.norm());
            (err <= 1e-6).then_some((k, err))
        })
        .collect();
    matches.sort_by(|a, b| a.1.total_cmp(&b.1));
    match matches.first() {
        None => Err(Error::Numeric(format!("no branch among {k0}±1 reproduces w = {w}"))),
        Some(&(k, _)) => {
            Ok(BranchMembership { branch: BranchId(k), on_boundary: matches.len() > 1 || boundary_gap(w) <= 1e-9 })
        }
    }
}

/// Whether `w` lies in the range of branch `k` (boundary points follow
/// [`branch_of`]).
pub fn branch_range_contains(k: BranchId, w: ComplexScalar) -> bool {
    branch_of(w).map(|m| m.branch == k).unwrap_or(false)
}
