//! Matrix functions: exponential, eigendecomposition, and the matrix
//! Lambert W with one branch per eigenvalue.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::{lambert_w, BranchId};
use crate::linalg::{ComplexMatrix, ComplexScalar, ONE, ZERO};

/// Eigenvector condition above which a matrix is treated as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e8;

/// Eigenvalues with modulus below `ZERO_EIGENVALUE_TOL·max(1, ‖M‖₁)` count
/// as zero for branch assignment.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-13;

// Higham (2005) backward-error bounds for the [m/m] Padé approximants.
const PADE_THETA: [(usize, f64); 5] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068e0),
    (13, 5.371_920_351_148_152e0),
];

/// Coefficients `b_j = (2m-j)!·m! / ((2m)!·j!·(m-j)!)` of the diagonal
/// Padé approximant to `e^x`.
fn pade_coefficients(m: usize) -> Vec<f64> {
    let mut b = vec![1.0; m + 1];
    for j in 1..=m {
        b[j] = b[j - 1] * (m + 1 - j) as f64 / (j * (2 * m + 1 - j)) as f64;
    }
    b
}

/// Matrix exponential by scaling and squaring with a diagonal Padé
/// approximant. The order is the smallest of 3, 5, 7, 9, 13 whose bound
/// covers `‖M‖₁`; beyond the order-13 bound the matrix is scaled by
/// `2^-s` with `s = ⌈log₂(‖M‖₁/θ₁₃)⌉`.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("expm argument has non-finite entries".into()));
    }
    let n = m.dim();
    if n == 1 {
        let e = m[(0, 0)].exp();
        return finite_or_overflow(ComplexMatrix::from_diag(&[e]));
    }
    let norm = m.norm1();
    let (order, squarings) = match PADE_THETA.iter().find(|(_, theta)| norm <= *theta) {
        Some(&(order, _)) => (order, 0),
        None => {
            let theta13 = PADE_THETA[4].1;
            (13, (norm / theta13).log2().ceil().max(0.0) as i32)
        }
    };
    let scaled = m.scale_real(0.5f64.powi(squarings));
    let b = pade_coefficients(order);

    let id = ComplexMatrix::identity(n);
    let mut powers = vec![id.clone()];
    for j in 1..=order {
        let next = &powers[j - 1] * &scaled;
        powers.push(next);
    }
    let mut u = ComplexMatrix::zeros(n);
    let mut v = ComplexMatrix::zeros(n);
    for (j, p) in powers.iter().enumerate() {
        let term = p.scale_real(b[j]);
        if j % 2 == 1 {
            u = &u + &term;
        } else {
            v = &v + &term;
        }
    }
    let denom = (&v - &u).lu();
    let numer = &v + &u;
    let mut r = ComplexMatrix::zeros(n);
    let mut col = vec![ZERO; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = numer[(i, j)];
        }
        let x = denom.solve(&col)?;
        for i in 0..n {
            r[(i, j)] = x[i];
        }
    }
    for _ in 0..squarings {
        r = &r * &r;
    }
    finite_or_overflow(r)
}

fn finite_or_overflow(m: ComplexMatrix) -> Result<ComplexMatrix> {
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::Numeric("matrix exponential overflowed".into()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenDecomposition {
    pub values: Vec<ComplexScalar>,
    /// Columns are unit-norm right eigenvectors, in the order of `values`.
    pub vectors: ComplexMatrix,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

impl EigenDecomposition {
    /// `V·diag(f(λ))·V⁻¹`.
    pub fn apply(&self, f: &[Complex64]) -> Result<ComplexMatrix> {
        let inv = self.vectors.inverse()?;
        let scaled = &self.vectors * &ComplexMatrix::from_diag(f);
        Ok(&scaled * &inv)
    }
}

/// Eigenvalue order: decreasing real part, then increasing imaginary part.
/// Real parts are compared on a grid of `1e-12·scale` so that conjugate
/// partners tie.
fn eigen_order(a: Complex64, b: Complex64, scale: f64) -> Ordering {
    let q = 1e-12 * scale;
    let qa = (a.re / q).round();
    let qb = (b.re / q).round();
    qb.total_cmp(&qa).then(a.im.total_cmp(&b.im))
}

/// Full eigendecomposition. 2×2 matrices use the closed-form quadratic;
/// larger ones the complex Schur form (Hessenberg QR) followed by
/// triangular back-substitution.
pub fn eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let (values, vectors) = sorted_eigenpairs(m)?;
    let condition = condition_number(&vectors);
    if !(condition <= DEFECTIVE_CONDITION) {
        return Err(Error::DefectiveMatrix { condition });
    }
    Ok(EigenDecomposition { values, vectors, condition })
}

/// Eigenvalues in the same order as [`eig`], without requiring a complete
/// set of eigenvectors.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    Ok(sorted_eigenpairs(m)?.0)
}

fn sorted_eigenpairs(m: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    if !m.is_finite() {
        return Err(Error::InvalidInput("eig argument has non-finite entries".into()));
    }
    let (values, vectors) = match m.dim() {
        1 => (vec![m[(0, 0)]], ComplexMatrix::identity(1)),
        2 => eig2(m),
        _ => eig_schur(m)?,
    };
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| eigen_order(values[i], values[j], scale));
    let n = m.dim();
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = ComplexMatrix::from_fn(n, |r, c| vectors[(r, order[c])]);
    Ok((sorted_values, sorted_vectors))
}

fn condition_number(v: &ComplexMatrix) -> f64 {
    let sv = v.to_nalgebra().singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin == 0.0 || !smin.is_finite() {
        f64::INFINITY
    } else {
        smax / smin
    }
}

fn eig2(m: &ComplexMatrix) -> (Vec<Complex64>, ComplexMatrix) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let values = if b == ZERO || c == ZERO {
        // triangular: exact
        [a, d]
    } else if m.is_real(0.0) {
        let (a, b, c, d) = (a.re, b.re, c.re, d.re);
        let half_tr = 0.5 * (a + d);
        let disc = 0.25 * (a - d) * (a - d) + b * c;
        if disc < 0.0 {
            let s = (-disc).sqrt();
            [Complex64::new(half_tr, s), Complex64::new(half_tr, -s)]
        } else {
            let s = disc.sqrt().copysign(half_tr);
            let l1 = half_tr + s;
            let l2 = if l1 == 0.0 { 0.0 } else { (a * d - b * c) / l1 };
            [Complex64::new(l1, 0.0), Complex64::new(l2, 0.0)]
        }
    } else {
        let half_tr = 0.5 * (a + d);
        let det = a * d - b * c;
        let mut s = (half_tr * half_tr - det).sqrt();
        if (s * half_tr.conj()).re < 0.0 {
            s = -s;
        }
        let l1 = half_tr + s;
        let l2 = if l1 == ZERO { ZERO } else { det / l1 };
        [l1, l2]
    };

    let mut v = ComplexMatrix::zeros(2);
    for (col, &lambda) in values.iter().enumerate() {
        let v1 = [b, lambda - a];
        let v2 = [lambda - d, c];
        let n1 = v1[0].norm_sqr() + v1[1].norm_sqr();
        let n2 = v2[0].norm_sqr() + v2[1].norm_sqr();
        let (vec, nrm) = if n1 >= n2 { (v1, n1) } else { (v2, n2) };
        if nrm == 0.0 {
            // M = λI: any basis works
            v[(col, col)] = ONE;
        } else {
            let nrm = nrm.sqrt();
            v[(0, col)] = vec[0] / nrm;
            v[(1, col)] = vec[1] / nrm;
        }
    }
    (values.to_vec(), v)
}

fn eig_schur(m: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let n = m.dim();
    let schur = m
        .to_nalgebra()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("QR iteration did not converge".into()))?;
    let (q, t): (DMatrix<Complex64>, DMatrix<Complex64>) = schur.unpack();
    let values: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let small = f64::EPSILON * m.norm1().max(f64::MIN_POSITIVE);

    // Eigenvectors of the triangular factor by back-substitution.
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        y[(i, i)] = ONE;
        for j in (0..i).rev() {
            let mut acc = ZERO;
            for l in (j + 1)..=i {
                acc += t[(j, l)] * y[(l, i)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(j, i)] = -acc / denom;
        }
    }
    let mut v = ComplexMatrix::from_nalgebra(&(q * y));
    for col in 0..n {
        let nrm = (0..n).map(|r| v[(r, col)].norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            for r in 0..n {
                v[(r, col)] /= nrm;
            }
        }
    }
    Ok((values, v))
}

/// One branch index per eigenvalue, paired with eigenvalues in [`eig`]
/// order (decreasing real part, then increasing imaginary part).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BranchAssignment {
    branches: Vec<BranchId>,
}

impl BranchAssignment {
    pub fn new(branches: Vec<BranchId>) -> Self {
        Self { branches }
    }

    pub fn from_ints(ks: &[i64]) -> Self {
        Self::new(ks.iter().map(|&k| BranchId(k)).collect())
    }

    /// Branch `k` everywhere except on zero eigenvalues, which only the
    /// principal branch can map.
    pub fn uniform(k: BranchId, eigenvalues: &[ComplexScalar], zero_tol: f64) -> Self {
        Self::new(eigenvalues.iter().map(|z| if z.norm() <= zero_tol { BranchId::PRINCIPAL } else { k }).collect())
    }

    /// [`BranchAssignment::uniform`] for the eigenvalues of `m`.
    pub fn uniform_for(k: BranchId, m: &ComplexMatrix) -> Result<Self> {
        let e = eig(m)?;
        Ok(Self::uniform(k, &e.values, zero_tolerance(m)))
    }

    pub fn branches(&self) -> &[BranchId] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }
}

pub(crate) fn zero_tolerance(m: &ComplexMatrix) -> f64 {
    ZERO_EIGENVALUE_TOL * m.norm1().max(1.0)
}

/// `V·diag(W_{k_i}(λ_i))·V⁻¹` for diagonalizable `m`.
pub fn matrix_lambert_w(assign: &BranchAssignment, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if assign.len() != m.dim() {
        return Err(Error::InvalidInput(format!(
            "branch assignment has {} entries for a {}x{} matrix",
            assign.len(),
            m.dim(),
            m.dim()
        )));
    }
    let e = eig(m)?;
    let tol = zero_tolerance(m);
    let mut w = Vec::with_capacity(m.dim());
    for (&lambda, &k) in e.values.iter().zip(assign.branches()) {
        if lambda.norm() <= tol {
            if k != BranchId::PRINCIPAL {
                return Err(Error::Domain(format!("zero eigenvalue assigned to branch {k}; only branch 0 maps 0")));
            }
            w.push(lambert_w(k, Complex64::new(0.0, 0.0))?);
        } else {
            w.push(lambert_w(k, lambda)?);
        }
    }
    e.apply(&w)
}

/// `W·e^W`, the defining map inverted by [`matrix_lambert_w`].
pub fn w_times_exp_w(w: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(w * &expm(w)?)
}
