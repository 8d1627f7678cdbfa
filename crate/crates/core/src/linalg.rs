//! Dense square complex matrices.
//!
//! [`ComplexMatrix`] is the workhorse type for companion matrices, matrix
//! Lambert W values and solver unknowns. Storage is row-major. The type keeps
//! only what the spectral code needs: products, LU with partial pivoting,
//! norms, and a pseudoinverse (SVD via `nalgebra`).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting non-square or
    /// non-finite input.
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be >= 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Real matrix from rows. Panics if the rows are ragged; use
    /// [`ComplexMatrix::try_from_real_rows`] for untrusted input.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        Self::try_from_real_rows(rows).expect("square matrix rows")
    }

    pub fn try_from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::InvalidInput(format!("row {i} has {} entries, expected {dim}", row.len())));
            }
            data.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::new(dim, data)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.diagonal().into_iter().sum()
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * k).collect() }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.dim).map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    /// True when every imaginary part is within `tol` of zero.
    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn lu(&self) -> Lu {
        Lu::factor(self)
    }

    pub fn det(&self) -> Complex64 {
        match self.dim {
            1 => self.data[0],
            2 => self.data[0] * self.data[3] - self.data[1] * self.data[2],
            _ => self.lu().det(),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu().inverse()
    }

    /// Moore-Penrose pseudoinverse. Singular values below
    /// `rel_cutoff * sigma_max` are treated as zero.
    pub fn pinv(&self, rel_cutoff: f64) -> Result<Self> {
        let svd = self.to_nalgebra().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        if smax == 0.0 {
            return Ok(Self::zeros(self.dim));
        }
        let eps = rel_cutoff * smax;
        let p = svd.pseudo_inverse(eps).map_err(|e| Error::Numeric(format!("pseudoinverse failed: {e}")))?;
        Ok(Self::from_nalgebra(&p))
    }

    /// Number of singular values above `rel_cutoff` times the largest.
    pub fn rank(&self, rel_cutoff: f64) -> usize {
        let sv = self.to_nalgebra().singular_values();
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|&&x| smax > 0.0 && x > rel_cutoff * smax).count()
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    /// Nested real/imaginary rows, used by the JSON emitters.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        self.rows().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
    }

    /// Real parts as nested rows.
    pub fn to_real_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.iter().map(|z| z.re).collect()).collect()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Complex64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, z) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                if z.im == 0.0 {
                    write!(f, "{}", z.re)?;
                } else {
                    write!(f, "{}{:+}i", z.re, z.im)?;
                }
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

/// LU factorization with partial pivoting, `P·A = L·U` packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    fn factor(a: &ComplexMatrix) -> Self {
        let n = a.dim;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) =
                (k..n).map(|i| (i, lu[(i, k)].norm())).fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let t = factor * lu[(k, j)];
                    lu[(i, j)] -= t;
                }
            }
        }
        Self { lu, perm, sign, singular }
    }

    pub fn det(&self) -> Complex64 {
        if self.singular {
            return ZERO;
        }
        self.lu.diagonal().into_iter().fold(Complex64::new(self.sign, 0.0), |acc, d| acc * d)
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A·x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.singular {
            return Err(Error::Numeric("singular matrix in LU solve".into()));
        }
        let n = self.lu.dim;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let t = self.lu[(i, k)] * x[k];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let t = self.lu[(i, k)] * x[k];
                x[i] -= t;
            }
            x[i] /= self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        let n = self.lu.dim;
        let mut inv = ComplexMatrix::zeros(n);
        let mut e = vec![ZERO; n];
        for j in 0..n {
            e.iter_mut().for_each(|z| *z = ZERO);
            e[j] = ONE;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        if !inv.is_finite() {
            return Err(Error::Numeric("matrix inverse overflowed".into()));
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_ragged_and_nonfinite() {
        assert!(ComplexMatrix::try_from_real_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(2, vec![ZERO; 3]).is_err());
    }

    #[test]
    fn lu_det_matches_cofactor_expansion() {
        let m = ComplexMatrix::new(
            3,
            vec![
                c(2.0, 1.0),
                c(0.0, 0.0),
                c(1.0, -1.0),
                c(0.0, 3.0),
                c(4.0, 0.0),
                c(1.0, 0.0),
                c(1.0, 0.0),
                c(-2.0, 0.5),
                c(0.0, 0.0),
            ],
        )
        .unwrap();
        let cof = m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
            - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
            + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]);
        assert!((m.det() - cof).norm() < 1e-12);
        let inv = m.inverse().unwrap();
        assert!((&m * &inv).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn singular_inverse_fails() {
        let m = ComplexMatrix::from_real_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(m.inverse().is_err());
        assert_eq!(m.det(), ZERO);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(ComplexMatrix::identity(3).rank(1e-12), 3);
        assert_eq!(ComplexMatrix::zeros(2).rank(1e-12), 0);
        assert_eq!(ComplexMatrix::from_real_rows(&[[0.0, 0.0], [-3.0, -3.0]]).rank(1e-12), 1);
    }

    #[test]
    fn pinv_of_rank_one() {
        let b = ComplexMatrix::from_real_rows(&[[0.0, 0.0], [-3.0, -3.0]]);
        let p = b.pinv(1e-12).unwrap();
        // B⁺ = Bᵀ / ‖B‖²_F for rank one
        let expect = b.transpose().scale_real(1.0 / 18.0);
        assert!(p.max_abs_diff(&expect) < 1e-14);
        assert!((&(&b * &p) * &b).max_abs_diff(&b) < 1e-14);
    }
}
