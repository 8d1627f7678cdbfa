//! System model `x'(t) = A x(t) + B x(t - tau)`, its characteristic
//! function, and the report types shared by the oracle and branch methods.

use std::cmp::Ordering;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexScalar};

/// Linear time-invariant system with a single discrete delay.
#[derive(Clone, Debug, PartialEq)]
pub struct TdsSystem {
    a: ComplexMatrix,
    b: ComplexMatrix,
    tau: f64,
}

impl TdsSystem {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix, tau: f64) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::InvalidInput(format!("A is {0}x{0} but B is {1}x{1}", a.dim(), b.dim())));
        }
        if !a.is_real(0.0) || !b.is_real(0.0) {
            return Err(Error::InvalidInput("A and B must be real".into()));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidInput(format!("tau must be finite and > 0, got {tau}")));
        }
        Ok(Self { a, b, tau })
    }

    pub fn from_real<R: AsRef<[f64]>>(a: &[R], b: &[R], tau: f64) -> Result<Self> {
        Self::new(ComplexMatrix::try_from_real_rows(a)?, ComplexMatrix::try_from_real_rows(b)?, tau)
    }

    /// Scalar system `x' = a x + b x(t - tau)`.
    pub fn scalar(a: f64, b: f64, tau: f64) -> Result<Self> {
        Self::from_real(&[[a]], &[[b]], tau)
    }

    /// Parses the system definition JSON: `{"A": [[..]], "B": [[..]], "tau": x}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::Parse { key: "<document>".into(), message: e.to_string() })?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse { key: "<document>".into(), message: "expected a JSON object".into() })?;
        let a = parse_real_matrix(obj.get("A"), "A")?;
        let b = parse_real_matrix(obj.get("B"), "B")?;
        if a.dim() != b.dim() {
            return Err(Error::Parse {
                key: "B".into(),
                message: format!("expected {0}x{0} to match A, got {1}x{1}", a.dim(), b.dim()),
            });
        }
        let tau = match obj.get("tau") {
            None => return Err(Error::Parse { key: "tau".into(), message: "missing key".into() }),
            Some(v) => v
                .as_f64()
                .ok_or_else(|| Error::Parse { key: "tau".into(), message: format!("expected a number, got {v}") })?,
        };
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::Parse { key: "tau".into(), message: format!("must be > 0, got {tau}") });
        }
        Self::new(a, b, tau)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "A": self.a.to_real_rows(),
            "B": self.b.to_real_rows(),
            "tau": self.tau,
        })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn b(&self) -> &ComplexMatrix {
        &self.b
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn order(&self) -> usize {
        self.a.dim()
    }

    /// Same `A` and `tau` with the delayed term removed.
    pub fn without_delay_term(&self) -> Self {
        Self { a: self.a.clone(), b: ComplexMatrix::zeros(self.order()), tau: self.tau }
    }

    pub fn has_delay_term(&self) -> bool {
        !self.b.is_zero()
    }
}

fn parse_real_matrix(v: Option<&Value>, key: &str) -> Result<ComplexMatrix> {
    let err = |message: String| Error::Parse { key: key.into(), message };
    let rows = v
        .ok_or_else(|| err("missing key".into()))?
        .as_array()
        .ok_or_else(|| err("expected an array of rows".into()))?;
    let n = rows.len();
    if n == 0 {
        return Err(err("matrix must have at least one row".into()));
    }
    let mut out = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| err(format!("row {i} is not an array")))?;
        if row.len() != n {
            return Err(err(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        let mut vals = Vec::with_capacity(n);
        for (j, x) in row.iter().enumerate() {
            let x = x.as_f64().ok_or_else(|| err(format!("entry ({i},{j}) is not a number")))?;
            if !x.is_finite() {
                return Err(err(format!("entry ({i},{j}) is not finite")));
            }
            vals.push(x);
        }
        out.push(vals);
    }
    ComplexMatrix::try_from_real_rows(&out).map_err(|e| err(e.to_string()))
}

/// Axis-aligned rectangle of the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Self { re_min, re_max, im_min, im_max };
        if ![re_min, re_max, im_min, im_max].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("region bounds must be finite".into()));
        }
        if re_min >= re_max {
            return Err(Error::InvalidInput(format!("region re_min {re_min} must be < re_max {re_max}")));
        }
        if im_min > im_max {
            return Err(Error::InvalidInput(format!("region im_min {im_min} must be <= im_max {im_max}")));
        }
        Ok(r)
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re >= self.re_min && s.re <= self.re_max && s.im >= self.im_min && s.im <= self.im_max
    }

    pub fn is_conjugate_symmetric(&self) -> bool {
        self.im_min == -self.im_max
    }

    pub fn inflate(&self, d: f64) -> Self {
        Self { re_min: self.re_min - d, re_max: self.re_max + d, im_min: self.im_min - d, im_max: self.im_max + d }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}] x [{}, {}]", self.re_min, self.re_max, self.im_min, self.im_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Oracle,
    LambertBranch,
}

/// Characteristic roots in a region, dominant (rightmost) first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub roots: Vec<ComplexScalar>,
    pub residuals: Vec<f64>,
    pub region: Region,
    pub method: Method,
}

impl SpectrumReport {
    /// Builds a report and sorts it by decreasing real part, ties broken by
    /// increasing `|Im|` and then by `Im`.
    pub fn new(mut entries: Vec<(ComplexScalar, f64)>, region: Region, method: Method) -> Self {
        entries.sort_by(|a, b| dominance_order(a.0, b.0));
        let (roots, residuals) = entries.into_iter().unzip();
        Self { roots, residuals, region, method }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn rightmost(&self) -> Option<ComplexScalar> {
        self.roots.first().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ComplexScalar, f64)> + '_ {
        self.roots.iter().copied().zip(self.residuals.iter().copied())
    }
}

/// Real parts closer than this are treated as ties when ordering roots.
const ORDER_RE_QUANTUM: f64 = 1e-9;

/// Total order on roots: decreasing real part (quantized so conjugate
/// partners tie), then increasing `|Im|`, then increasing `Im`.
pub fn dominance_order(a: ComplexScalar, b: ComplexScalar) -> Ordering {
    let qa = (a.re / ORDER_RE_QUANTUM).round();
    let qb = (b.re / ORDER_RE_QUANTUM).round();
    qb.total_cmp(&qa).then(a.im.abs().total_cmp(&b.im.abs())).then(a.im.total_cmp(&b.im))
}

/// `sI - A - B·exp(-s·tau)`.
pub fn char_matrix(sys: &TdsSystem, s: ComplexScalar) -> ComplexMatrix {
    let n = sys.order();
    let decay = (-s * sys.tau).exp();
    ComplexMatrix::from_fn(n, |i, j| {
        let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
        diag - sys.a[(i, j)] - sys.b[(i, j)] * decay
    })
}

/// Characteristic quasipolynomial `h(s) = det(sI - A - B·exp(-s·tau))`.
pub fn char_fn(sys: &TdsSystem, s: ComplexScalar) -> ComplexScalar {
    char_matrix(sys, s).det()
}

/// `|h(s)| / max(1, |s|^n)`.
pub fn residual(sys: &TdsSystem, s: ComplexScalar) -> f64 {
    char_fn(sys, s).norm() / residual_scale(sys.order(), s)
}

pub(crate) fn residual_scale(n: usize, s: ComplexScalar) -> f64 {
    s.norm().powi(n as i32).max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Stability from a root report. `rightmost_certified` asserts that no
/// characteristic root lies to the right of the report's region.
pub fn stability_verdict(report: &SpectrumReport, rightmost_certified: bool) -> Verdict {
    if report.is_empty() {
        return Verdict::Inconclusive;
    }
    if report.roots.iter().any(|s| s.re > 0.0) {
        Verdict::Unstable
    } else if rightmost_certified && report.roots.iter().all(|s| s.re < 0.0) {
        Verdict::Stable
    } else {
        Verdict::Inconclusive
    }
}
