//! Matrix Lambert W spectrum method.
//!
//! For `x' = Ax + Bx(t - tau)` the ansatz `S = W/tau + A` with
//! `W = W_k(tau·B·Q)` yields characteristic roots as eigenvalues of `S`
//! whenever `Q` solves `W·e^{W + A·tau} = tau·B`. This module covers both
//! directions:
//!
//! * forward: [`solve_branch`] iterates on `Q` for a chosen branch
//!   assignment;
//! * reverse: a known pair of roots is turned into a companion matrix `S`,
//!   then `W = tau(S - A)`, `M = W·e^W` and a minimum-norm `Q`, and the
//!   branches whose ranges contain the eigenvalues of `W` are identified
//!   ([`classify_pair`], [`branch_scan`]).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambert::{branch_of, BranchId, BranchMembership};
use crate::linalg::{ComplexMatrix, ComplexScalar, ZERO};
use crate::matrix_fn::{eig, eigenvalues, expm, matrix_lambert_w, w_times_exp_w, zero_tolerance, BranchAssignment};
use crate::model::{residual, SpectrumReport, TdsSystem};

pub const DEFAULT_SOLVER_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 200;

/// Relative singular-value cutoff used for pseudoinverses.
const PINV_CUTOFF: f64 = 1e-12;
/// Largest relative change of a nonzero eigenvalue of `tau·B·Q` per step.
const EIGEN_STEP_GUARD: f64 = 0.5;
const MIN_LINE_SEARCH_STEP: f64 = 1e-8;

/// One converged solve of the branch equation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LambertSolution {
    pub branch_assign: BranchAssignment,
    pub q: ComplexMatrix,
    pub m: ComplexMatrix,
    pub w: ComplexMatrix,
    pub s: ComplexMatrix,
    /// Eigenvalues of `S`, i.e. characteristic roots.
    pub eigenvalues: Vec<ComplexScalar>,
    /// Frobenius norm of `W·e^{W + A·tau} - tau·B`.
    pub solver_residual: f64,
    /// Scaled characteristic residual at each eigenvalue.
    pub char_residuals: Vec<f64>,
    pub iterations: usize,
    /// Set when the starting `Q` was moved off a zero eigenvalue of
    /// `tau·B·Q` that had a nonzero branch assigned.
    pub seed_lifted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_SOLVER_TOL, max_iterations: DEFAULT_MAX_ITERATIONS }
    }
}

/// Companion matrix `[[0, 1], [-λ1·λ2, λ1 + λ2]]` of a real or conjugate pair.
pub fn roots_to_companion(l1: ComplexScalar, l2: ComplexScalar) -> Result<ComplexMatrix> {
    let is_real = |z: Complex64| z.im.abs() <= 1e-9 * (1.0 + z.norm());
    if !(is_real(l1) && is_real(l2)) && (l2 - l1.conj()).norm() > 1e-9 * (1.0 + l1.norm()) {
        return Err(Error::Domain(format!("roots {l1} and {l2} are neither both real nor a conjugate pair")));
    }
    let prod = (l1 * l2).re;
    let sum = (l1 + l2).re;
    Ok(ComplexMatrix::from_real_rows(&[[0.0, 1.0], [-prod, sum]]))
}

/// `W = tau·(S - A)`.
pub fn s_to_w(sys: &TdsSystem, s: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dim(sys, s, "S")?;
    Ok((s - sys.a()).scale_real(sys.tau()))
}

/// `M = W·e^W`.
pub fn w_to_m(w: &ComplexMatrix) -> Result<ComplexMatrix> {
    w_times_exp_w(w)
}

/// Minimum-norm `Q` with `tau·B·Q = M`.
pub fn m_to_q(sys: &TdsSystem, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dim(sys, m, "M")?;
    let tb = sys.b().scale_real(sys.tau());
    let q = &tb.pinv(PINV_CUTOFF)? * m;
    let resid = (&(&tb * &q) - m).norm_fro();
    if resid > 1e-6 * (1.0 + m.norm_fro()) {
        return Err(Error::Inconsistent { residual: resid });
    }
    Ok(q)
}

fn check_dim(sys: &TdsSystem, m: &ComplexMatrix, name: &str) -> Result<()> {
    if m.dim() != sys.order() {
        return Err(Error::InvalidInput(format!(
            "{name} is {0}x{0} but the system has order {1}",
            m.dim(),
            sys.order()
        )));
    }
    Ok(())
}

/// A point well inside the range of branch `k`, used to lift degenerate
/// seeds. Branch -1 gets the real value -2 so that real systems stay real.
fn branch_interior_point(k: BranchId) -> Complex64 {
    let k = k.0;
    if k == -1 {
        Complex64::new(-2.0, 0.0)
    } else {
        Complex64::new(-2.0, (2 * k - k.signum()) as f64 * std::f64::consts::PI)
    }
}

struct BranchEquation<'a> {
    assign: &'a BranchAssignment,
    tau_b: ComplexMatrix,
    a_tau: ComplexMatrix,
}

impl BranchEquation<'_> {
    fn m(&self, q: &ComplexMatrix) -> ComplexMatrix {
        &self.tau_b * q
    }

    fn w(&self, q: &ComplexMatrix) -> Result<ComplexMatrix> {
        matrix_lambert_w(self.assign, &self.m(q))
    }

    fn residual(&self, q: &ComplexMatrix) -> Result<ComplexMatrix> {
        let w = self.w(q)?;
        let e = expm(&(&w + &self.a_tau))?;
        let r = &(&w * &e) - &self.tau_b;
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Numeric("branch residual is not finite".into()))
        }
    }

    /// Moves zero eigenvalues of `tau·B·Q0` that carry a nonzero branch to
    /// an interior point of that branch's range.
    fn lift_seed(&self, q0: &ComplexMatrix) -> Result<(ComplexMatrix, bool)> {
        let m0 = self.m(q0);
        let e = eig(&m0)?;
        let tol = zero_tolerance(&m0);
        let mut shift = vec![ZERO; m0.dim()];
        let mut lifted = false;
        for (i, (&lambda, &k)) in e.values.iter().zip(self.assign.branches()).enumerate() {
            if lambda.norm() <= tol && k != BranchId::PRINCIPAL {
                let w = branch_interior_point(k);
                shift[i] = w * w.exp() - lambda;
                lifted = true;
            }
        }
        if !lifted {
            return Ok((q0.clone(), false));
        }
        let delta = e.apply(&shift)?;
        let dq = &self.tau_b.pinv(PINV_CUTOFF)? * &delta;
        Ok((q0 + &dq, true))
    }

    fn nonzero_eigenvalues_close(&self, from: &[Complex64], q: &ComplexMatrix) -> bool {
        let m = self.m(q);
        let Ok(e) = eig(&m) else { return false };
        let tol = zero_tolerance(&m);
        from.iter()
            .zip(&e.values)
            .filter(|(a, _)| a.norm() > tol)
            .all(|(a, b)| (a - b).norm() <= EIGEN_STEP_GUARD * a.norm())
    }

    /// Central differences along real directions. The residual is
    /// holomorphic in `Q` off the branch cuts, so a real-direction quotient
    /// is the complex derivative; imaginary-direction steps would cross the
    /// cut that real eigenvalues sit on.
    fn jacobian(&self, q: &ComplexMatrix, r0: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n2 = q.dim() * q.dim();
        let mut jac = ComplexMatrix::zeros(n2);
        for col in 0..n2 {
            let x = q.as_slice()[col];
            let h = 1e-7 * (1.0 + x.norm());
            let mut qp = q.clone();
            qp.as_mut_slice()[col] = x + h;
            let mut qm = q.clone();
            qm.as_mut_slice()[col] = x - h;
            let deriv = match (self.residual(&qp), self.residual(&qm)) {
                (Ok(rp), Ok(rm)) => (&rp - &rm).scale_real(0.5 / h),
                (Ok(rp), Err(_)) => (&rp - r0).scale_real(1.0 / h),
                (Err(_), Ok(rm)) => (r0 - &rm).scale_real(1.0 / h),
                (Err(e), Err(_)) => return Err(e),
            };
            for (row, v) in deriv.as_slice().iter().enumerate() {
                jac[(row, col)] = *v;
            }
        }
        Ok(jac)
    }
}

fn mat_vec(m: &ComplexMatrix, v: &[Complex64]) -> Vec<Complex64> {
    m.rows().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Solves `W·e^{W + A·tau} = tau·B` with `W = W_assign(tau·B·Q)` for `Q`,
/// starting from `q0`.
///
/// Broyden's method over the entries of `Q`, seeded with a finite-difference
/// Jacobian that is recomputed whenever the line search stalls. Steps use the
/// pseudoinverse because `Q` is only determined modulo the null space of `B`,
/// and are damped so no nonzero eigenvalue of `tau·B·Q` moves by more than
/// half its modulus (the branches behave like logarithms near zero).
pub fn solve_branch(
    sys: &TdsSystem,
    assign: &BranchAssignment,
    q0: &ComplexMatrix,
    opts: SolverOptions,
) -> Result<LambertSolution> {
    if !sys.has_delay_term() {
        return Err(Error::Inapplicable("B = 0: the system has no delayed term".into()));
    }
    check_dim(sys, q0, "Q0")?;
    if assign.len() != sys.order() {
        return Err(Error::InvalidInput(format!(
            "branch assignment has {} entries, system order is {}",
            assign.len(),
            sys.order()
        )));
    }
    if !q0.is_finite() {
        return Err(Error::InvalidInput("Q0 has non-finite entries".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("solver tolerance must be > 0, got {}", opts.tol)));
    }
    // tau·B·Q has at least n - rank(B) zero eigenvalues, and only branch 0
    // maps zero.
    let rank = sys.b().rank(PINV_CUTOFF);
    let nonzero = assign.branches().iter().filter(|&&k| k != BranchId::PRINCIPAL).count();
    if nonzero > rank {
        return Err(Error::Domain(format!(
            "{nonzero} eigenvalues assigned to nonzero branches but rank(B) = {rank} leaves only {rank} nonzero eigenvalues of tau·B·Q"
        )));
    }

    let eq = BranchEquation { assign, tau_b: sys.b().scale_real(sys.tau()), a_tau: sys.a().scale_real(sys.tau()) };
    let (mut q, seed_lifted) = eq.lift_seed(q0)?;
    let mut r = eq.residual(&q)?;
    let mut norm = r.norm_fro();
    let mut jac = eq.jacobian(&q, &r)?;
    let mut fresh = true;
    let mut iterations = 0;

    // The branch residual equals tau·e^{S·tau} times the delay-equation
    // residual, so it can be small while S is still far off. Require both.
    let verified = |q: &ComplexMatrix, norm: f64| -> bool {
        norm <= opts.tol
            && eq
                .w(q)
                .ok()
                .and_then(|w| verify_solution(sys, &(&w.scale_real(1.0 / sys.tau()) + sys.a())).ok())
                .is_some_and(|v| v.matrix_residual <= opts.tol && v.char_residuals.iter().all(|&r| r <= opts.tol))
    };

    while !verified(&q, norm) {
        if iterations >= opts.max_iterations {
            return Err(Error::Solver { iterations, residual: norm });
        }
        iterations += 1;

        let f = r.as_slice().to_vec();
        let step: Vec<Complex64> = mat_vec(&jac.pinv(PINV_CUTOFF)?, &f).into_iter().map(|z| -z).collect();
        let eig_before = eig(&eq.m(&q))?.values;

        let mut t = 1.0;
        let mut accepted = None;
        while t >= MIN_LINE_SEARCH_STEP {
            let mut cand = q.clone();
            for (x, d) in cand.as_mut_slice().iter_mut().zip(&step) {
                *x += d * t;
            }
            if eq.nonzero_eigenvalues_close(&eig_before, &cand) {
                if let Ok(rc) = eq.residual(&cand) {
                    let nc = rc.norm_fro();
                    if nc < (1.0 - 1e-4 * t) * norm {
                        accepted = Some((cand, rc, nc));
                        break;
                    }
                }
            }
            t *= 0.5;
        }

        let Some((q_new, r_new, n_new)) = accepted else {
            if fresh {
                return Err(Error::Solver { iterations, residual: norm });
            }
            jac = eq.jacobian(&q, &r)?;
            fresh = true;
            continue;
        };

        // Broyden: J += (y - J·s)·sᴴ / (sᴴ·s)
        let s: Vec<Complex64> = q_new.as_slice().iter().zip(q.as_slice()).map(|(a, b)| a - b).collect();
        let y: Vec<Complex64> = r_new.as_slice().iter().zip(r.as_slice()).map(|(a, b)| a - b).collect();
        let js = mat_vec(&jac, &s);
        let ss: f64 = s.iter().map(|z| z.norm_sqr()).sum();
        if ss > 0.0 {
            let n2 = s.len();
            for i in 0..n2 {
                let u = (y[i] - js[i]) / ss;
                for j in 0..n2 {
                    jac[(i, j)] += u * s[j].conj();
                }
            }
        }
        fresh = false;
        q = q_new;
        r = r_new;
        norm = n_new;
    }

    let m = eq.m(&q);
    let w = eq.w(&q)?;
    let s = &w.scale_real(1.0 / sys.tau()) + sys.a();
    let eigenvalues = eig(&s)?.values;
    let char_residuals = eigenvalues.iter().map(|&l| residual(sys, l)).collect();
    Ok(LambertSolution {
        branch_assign: assign.clone(),
        q,
        m,
        w,
        s,
        eigenvalues,
        solver_residual: norm,
        char_residuals,
        iterations,
        seed_lifted,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// `‖S - A - B·e^{-S·tau}‖_F`.
    pub matrix_residual: f64,
    pub eigenvalues: Vec<ComplexScalar>,
    pub char_residuals: Vec<f64>,
}

/// Checks that `S` solves `S = A + B·e^{-S·tau}` and that its eigenvalues are
/// characteristic roots.
pub fn verify_solution(sys: &TdsSystem, s: &ComplexMatrix) -> Result<Verification> {
    check_dim(sys, s, "S")?;
    let delayed = sys.b() * &expm(&s.scale_real(-sys.tau()))?;
    let matrix_residual = (&(s - sys.a()) - &delayed).norm_fro();
    let eigenvalues = eigenvalues(s)?;
    let char_residuals = eigenvalues.iter().map(|&l| residual(sys, l)).collect();
    Ok(Verification { matrix_residual, eigenvalues, char_residuals })
}

/// Branch analysis of one root pair of a second-order system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairClassification {
    pub pair: (ComplexScalar, ComplexScalar),
    pub s: ComplexMatrix,
    pub w: ComplexMatrix,
    /// Bottom-right entry of `W`.
    pub w22: f64,
    /// `tau·(Re(λ1 + λ2) - a22)`, equal to `tau·(2·Re λ - a22)` for a
    /// conjugate pair.
    pub w22_formula: f64,
    /// Branch of the eigenvalue of `W` with the largest modulus (the nonzero
    /// one when the other vanishes).
    pub branch: BranchId,
    pub eigen_branches: Vec<(ComplexScalar, BranchMembership)>,
    pub includes_dominant: bool,
}

/// Builds `S` and `W` for a root pair and classifies the branch ranges that
/// contain the eigenvalues of `W`. `dominant` is the system's rightmost known
/// root, used for the `includes_dominant` flag.
pub fn classify_pair(
    sys: &TdsSystem,
    lambda: ComplexScalar,
    partner: ComplexScalar,
    dominant: Option<ComplexScalar>,
) -> Result<PairClassification> {
    if sys.order() != 2 {
        return Err(Error::Inapplicable(format!(
            "pair classification needs a second-order system, got order {}",
            sys.order()
        )));
    }
    let s = roots_to_companion(lambda, partner)?;
    let w = s_to_w(sys, &s)?;
    let w22 = w[(1, 1)].re;
    let w22_formula = sys.tau() * ((lambda + partner).re - sys.a()[(1, 1)].re);
    if (w22 - w22_formula).abs() > 1e-9 * (1.0 + w22.abs()) {
        return Err(Error::Numeric(format!("w22 {w22} disagrees with tau(Re(λ1+λ2) - a22) = {w22_formula}")));
    }
    let mut eigen_branches = Vec::with_capacity(2);
    for v in eigenvalues(&w)? {
        eigen_branches.push((v, branch_of(v)?));
    }
    let branch = eigen_branches
        .iter()
        .max_by(|a, b| a.0.norm().total_cmp(&b.0.norm()))
        .map(|x| x.1.branch)
        .unwrap_or(BranchId::PRINCIPAL);
    let matches = |d: Complex64, z: Complex64| (d - z).norm() <= 1e-6 * (1.0 + d.norm());
    let includes_dominant =
        dominant.is_some_and(|d| [lambda, partner].iter().any(|&z| matches(d, z) || matches(d, z.conj())));
    Ok(PairClassification {
        pair: (lambda, partner),
        s,
        w,
        w22,
        w22_formula,
        branch,
        eigen_branches,
        includes_dominant,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchScan {
    /// Ordered by decreasing `Re(λ1 + λ2)`.
    pub pairs: Vec<PairClassification>,
}

impl BranchScan {
    pub fn w22_sequence(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.w22).collect()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.w22_sequence().windows(2).all(|w| w[1] < w[0])
    }

    pub fn all_in_branch(&self, k: BranchId) -> bool {
        self.pairs.iter().all(|p| p.branch == k)
    }
}

/// Groups report roots into pairs: each complex root with its conjugate
/// (synthesized when the region holds only one half-plane), and the real
/// roots consecutively in dominance order.
pub fn pair_roots(roots: &[ComplexScalar]) -> Result<Vec<(ComplexScalar, ComplexScalar)>> {
    let is_real = |z: &Complex64| z.im.abs() <= 1e-9 * (1.0 + z.norm());
    let mut pairs = Vec::new();
    let reals: Vec<Complex64> = roots.iter().filter(|z| is_real(z)).map(|z| Complex64::new(z.re, 0.0)).collect();
    for z in roots.iter().filter(|z| !is_real(z)) {
        if z.im > 0.0 {
            pairs.push((*z, z.conj()));
        } else {
            let has_upper = roots.iter().any(|u| u.im > 0.0 && (u.conj() - z).norm() <= 1e-7 * (1.0 + z.norm()));
            if !has_upper {
                pairs.push((z.conj(), *z));
            }
        }
    }
    if reals.len() % 2 == 1 {
        return Err(Error::Pairing(format!("{} real roots cannot be paired; supply an explicit pairing", reals.len())));
    }
    for ch in reals.chunks(2) {
        pairs.push((ch[0], ch[1]));
    }
    Ok(pairs)
}

/// Classifies every root pair of `report`.
pub fn branch_scan(sys: &TdsSystem, report: &SpectrumReport) -> Result<BranchScan> {
    if !sys.has_delay_term() {
        return Err(Error::Inapplicable(
            "B = 0: no delayed dynamics, so no Lambert W branch produces these roots; \
             scan a system with a delayed term or pass explicit pairs"
                .into(),
        ));
    }
    let pairs = pair_roots(&report.roots)?;
    branch_scan_pairs(sys, &pairs, report.rightmost())
}

/// [`branch_scan`] with an explicit pairing.
pub fn branch_scan_pairs(
    sys: &TdsSystem,
    pairs: &[(ComplexScalar, ComplexScalar)],
    dominant: Option<ComplexScalar>,
) -> Result<BranchScan> {
    if !sys.has_delay_term() {
        return Err(Error::Inapplicable("B = 0: no delayed dynamics".into()));
    }
    let mut out = pairs.iter().map(|&(a, b)| classify_pair(sys, a, b, dominant)).collect::<Result<Vec<_>>>()?;
    out.sort_by(|x, y| (y.pair.0 + y.pair.1).re.total_cmp(&(x.pair.0 + x.pair.1).re));
    Ok(BranchScan { pairs: out })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo::counterexample_system;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(rows: &[[f64; 2]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows)
    }

    #[test]
    fn companion_examples() {
        let s = roots_to_companion(c(0.8070, 0.0), c(-2.1854, 0.0)).unwrap();
        assert!(s.max_abs_diff(&real(&[[0.0, 1.0], [1.7636, -1.3784]])) < 5e-4);
        let l = c(-1.4928, 6.6027);
        let s = roots_to_companion(l, l.conj()).unwrap();
        assert!(s.max_abs_diff(&real(&[[0.0, 1.0], [-45.8241, -2.9855]])) < 5e-4);
        assert_eq!(roots_to_companion(c(0.0, 0.0), c(0.0, 0.0)).unwrap(), real(&[[0.0, 1.0], [0.0, 0.0]]));
        assert!(matches!(roots_to_companion(c(1.0, 2.0), c(1.0, -3.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn s_to_w_examples() {
        let sys = counterexample_system();
        let w = s_to_w(&sys, &real(&[[0.0, 1.0], [1.7636, -1.3784]])).unwrap();
        assert!(w.max_abs_diff(&real(&[[0.0, 0.0], [6.7636, -11.3784]])) < 1e-12);
        let w = s_to_w(&sys, &real(&[[0.0, 1.0], [-45.8241, -2.9855]])).unwrap();
        assert!(w.max_abs_diff(&real(&[[0.0, 0.0], [-40.8241, -12.9855]])) < 1e-12);
        assert!(s_to_w(&sys, sys.a()).unwrap().is_zero());
        assert!(s_to_w(&sys, &ComplexMatrix::zeros(3)).is_err());
    }

    #[test]
    fn w_to_m_examples() {
        let m = w_to_m(&real(&[[0.0, 0.0], [6.7636, -11.3784]])).unwrap();
        assert!(m.max_abs_diff(&real(&[[0.0, 0.0], [7.737_516_4e-5, -1.301_681_89e-4]])) < 1e-12);
        assert!(w_to_m(&ComplexMatrix::zeros(2)).unwrap().is_zero());
        let d: f64 = -12.9855;
        let m = w_to_m(&real(&[[0.0, 0.0], [-40.8241, d]])).unwrap();
        let want = real(&[[0.0, 0.0], [-40.8241 * d.exp(), d * d.exp()]]);
        assert!(m.max_abs_diff(&want) < 1e-10);
    }

    #[test]
    fn m_to_q_examples() {
        let sys = counterexample_system();
        let m = w_to_m(&real(&[[0.0, 0.0], [6.7636, -11.3784]])).unwrap();
        let q = m_to_q(&sys, &m).unwrap();
        let tb = sys.b().scale_real(sys.tau());
        assert!((&tb * &q).max_abs_diff(&m) <= 1e-10);

        let id = TdsSystem::from_real(&[[1.0, 0.0], [0.0, 1.0]], &[[1.0, 0.0], [0.0, 1.0]], 1.0).unwrap();
        let any = real(&[[1.0, -2.0], [3.5, 0.25]]);
        assert!(m_to_q(&id, &any).unwrap().max_abs_diff(&any) < 1e-14);

        // The sample seed Q maps to zero, 2e-4 away from M.
        let q_seed = real(&[[2.0, 1.0], [-2.0, -1.0]]);
        let fwd = &tb * &q_seed;
        assert!(fwd.is_zero());
        assert!(fwd.max_abs_diff(&m) <= 2e-4);

        // M with a nonzero first row is outside the range of tau·B.
        assert!(matches!(m_to_q(&sys, &real(&[[1.0, 0.0], [0.0, 0.0]])), Err(Error::Inconsistent { .. })));
    }

    #[test]
    fn verify_examples() {
        let sys = counterexample_system();
        let v = verify_solution(&sys, &real(&[[0.0, 1.0], [1.7636, -1.3784]])).unwrap();
        assert!(v.matrix_residual <= 1e-3, "{}", v.matrix_residual);
        assert!(v.char_residuals.iter().all(|&r| r <= 1e-3), "{:?}", v.char_residuals);
        let v = verify_solution(&sys, &real(&[[0.0, 1.0], [-45.8241, -2.9855]])).unwrap();
        assert!(v.matrix_residual <= 1e-3, "{}", v.matrix_residual);
        let plain = sys.without_delay_term();
        assert_eq!(verify_solution(&plain, plain.a()).unwrap().matrix_residual, 0.0);
    }

    #[test]
    fn classify_examples() {
        let sys = counterexample_system();
        let p = classify_pair(&sys, c(0.8070, 0.0), c(-2.1854, 0.0), Some(c(0.8070, 0.0))).unwrap();
        assert!((p.w22 - -11.3784).abs() < 1e-9);
        assert_eq!(p.branch, BranchId(-1));
        assert!(p.includes_dominant);
        let l = c(-1.4928, 6.6027);
        let p = classify_pair(&sys, l, l.conj(), Some(c(0.8070, 0.0))).unwrap();
        assert!((p.w22 - -12.9856).abs() < 1e-9);
        assert_eq!(p.branch, BranchId(-1));
        assert!(!p.includes_dominant);

        let zero_a22 = TdsSystem::from_real(&[[0.0, 1.0], [-1.0, 0.0]], &[[0.0, 0.0], [1.0, 1.0]], 1.0).unwrap();
        let p = classify_pair(&zero_a22, c(0.0, 0.0), c(0.0, 0.0), None).unwrap();
        assert_eq!(p.w22, 0.0);
        assert_eq!(p.w22_formula, 0.0);
    }

    #[test]
    fn pairing() {
        let roots = [c(0.8, 0.0), c(-1.0, 2.0), c(-2.0, 0.0), c(-3.0, -4.0), c(-1.0, -2.0)];
        let pairs = pair_roots(&roots).unwrap();
        assert_eq!(
            pairs,
            vec![(c(-1.0, 2.0), c(-1.0, -2.0)), (c(-3.0, 4.0), c(-3.0, -4.0)), (c(0.8, 0.0), c(-2.0, 0.0))]
        );
        assert!(matches!(pair_roots(&[c(1.0, 0.0)]), Err(Error::Pairing(_))));
    }

    #[test]
    fn scan_rejects_delay_free_system() {
        let sys = counterexample_system().without_delay_term();
        let r = crate::model::Region::new(0.0, 10.0, -1.0, 1.0).unwrap();
        let rep = SpectrumReport::new(vec![(c(9.47, 0.0), 0.0), (c(0.53, 0.0), 0.0)], r, crate::model::Method::Oracle);
        match branch_scan(&sys, &rep) {
            Err(Error::Inapplicable(msg)) => assert!(msg.contains("explicit pairs")),
            other => panic!("expected inapplicable, got {other:?}"),
        }
    }

    #[test]
    fn solve_rejects_bad_input() {
        let sys = counterexample_system();
        let assign = BranchAssignment::from_ints(&[0, -1]);
        assert!(matches!(
            solve_branch(&sys.without_delay_term(), &assign, &ComplexMatrix::identity(2), SolverOptions::default()),
            Err(Error::Inapplicable(_))
        ));
        assert!(solve_branch(
            &sys,
            &BranchAssignment::from_ints(&[0]),
            &ComplexMatrix::identity(2),
            SolverOptions::default()
        )
        .is_err());
        assert!(solve_branch(&sys, &assign, &ComplexMatrix::identity(3), SolverOptions::default()).is_err());
    }

    #[test]
    fn solve_from_degenerate_seed() {
        let sys = counterexample_system();
        let q0 = real(&[[2.0, 1.0], [-2.0, -1.0]]);
        let sol = solve_branch(&sys, &BranchAssignment::from_ints(&[0, -1]), &q0, SolverOptions::default()).unwrap();
        assert!(sol.seed_lifted);
        assert!(sol.solver_residual <= 1e-9);
        assert!((sol.eigenvalues[0] - c(0.8070, 0.0)).norm() < 1e-3);
        assert!((sol.eigenvalues[1] - c(-2.1854, 0.0)).norm() < 1e-3);
        let check = verify_solution(&sys, &sol.s).unwrap();
        assert!(check.matrix_residual < 1e-8);
    }

    #[test]
    fn solve_from_second_pair_seed() {
        let sys = counterexample_system();
        let l = c(-1.4927726136019257, 6.602709694909766);
        let s = roots_to_companion(l, l.conj()).unwrap();
        let q0 = m_to_q(&sys, &w_to_m(&s_to_w(&sys, &s).unwrap()).unwrap()).unwrap();
        let sol = solve_branch(&sys, &BranchAssignment::from_ints(&[0, -1]), &q0, SolverOptions::default()).unwrap();
        assert!(!sol.seed_lifted);
        assert!(sol.iterations <= 3);
        assert!(sol.eigenvalues.iter().any(|&e| (e - l).norm() < 1e-8));
    }

    #[test]
    fn solve_rejects_infeasible_assignment() {
        // rank(B) = 1 leaves one zero eigenvalue of tau·B·Q
        let sys = counterexample_system();
        let r = solve_branch(
            &sys,
            &BranchAssignment::from_ints(&[-1, -1]),
            &ComplexMatrix::identity(2),
            SolverOptions::default(),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn solve_scalar_branches() {
        // x' = -x(t - 1): roots W_k(-1) for every branch k
        let sys = TdsSystem::scalar(0.0, -1.0, 1.0).unwrap();
        for k in [-2, -1, 0, 1, 2] {
            let sol = solve_branch(
                &sys,
                &BranchAssignment::from_ints(&[k]),
                &ComplexMatrix::from_real_rows(&[[1.0]]),
                SolverOptions::default(),
            )
            .unwrap();
            let want = crate::lambert::lambert_w(BranchId(k), c(-1.0, 0.0)).unwrap();
            assert!((sol.eigenvalues[0] - want).norm() < 1e-8, "k = {k}");
        }
    }
}
