//! Feasibility checks for the sufficient conditions, the closed-form optimal
//! `ε1`, spectral utilities for coupled networks, and settling-time bounds.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::control::StaticScalarGains;
use crate::delay::{asymptotics, Asymptotics, DelayProfile, RateFunction};
use crate::error::{invalid, Error, Result};
use crate::Norm;

const METZLER_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    Scalar2Norm,
    Scalar1Norm,
    ScalarInfNorm,
    NetworkPinning,
    NetworkFullNode,
}

impl TheoremId {
    pub fn label(&self) -> &'static str {
        match self {
            TheoremId::Scalar2Norm => "2-norm",
            TheoremId::Scalar1Norm => "1-norm",
            TheoremId::ScalarInfNorm => "inf-norm",
            TheoremId::NetworkPinning => "network-pinning",
            TheoremId::NetworkFullNode => "network-full-node",
        }
    }
}

/// Verdict for one sufficient condition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub theorem: TheoremId,
    /// Left-hand side of the decay condition at `eps1_used`.
    pub lhs: f64,
    pub feasible: bool,
    pub eps1_used: Option<f64>,
    pub eps1_optimal: Option<f64>,
    /// `-lhs`.
    pub margin: f64,
    /// Supremum of admissible `ε2` (the sign-gain margin); `<= 0` when the
    /// sign condition fails.
    pub epsilon2_max: f64,
    /// Value the sign gain (`c3` or `θ3`) must exceed.
    pub sign_threshold: f64,
    /// Value the linear gain `c4` must exceed at `eps1_used`, where it has a
    /// closed form.
    pub linear_threshold: Option<f64>,
}

impl ConditionReport {
    fn new(theorem: TheoremId, lhs: f64, eps: Option<(f64, f64)>, epsilon2_max: f64, sign_threshold: f64) -> Self {
        Self {
            theorem,
            lhs,
            feasible: lhs < 0.0 && epsilon2_max > 0.0,
            eps1_used: eps.map(|e| e.0),
            eps1_optimal: eps.map(|e| e.1),
            margin: -lhs,
            epsilon2_max,
            sign_threshold,
            linear_threshold: None,
        }
    }

    pub fn sign_condition_holds(&self) -> bool {
        self.epsilon2_max > 0.0
    }
}

/// Minimizer of `a ε + b / ε` over `ε > 0`: `(√(b/a), 2√(ab))`.
pub fn optimal_eps1(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) {
        return Err(invalid("a", format!("coefficient of eps1 must be positive, got {a}")));
    }
    if !(b > 0.0) {
        return Err(invalid("b", format!("coefficient of 1/eps1 must be positive, got {b}")));
    }
    Ok(((b / a).sqrt(), 2.0 * (a * b).sqrt()))
}

/// Options shared by the condition checkers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    /// Fixed `ε1`; `None` uses the optimum.
    pub eps1: Option<f64>,
    /// All delays equal: the count of asynchronous delay channels drops out.
    pub synchronous_delays: bool,
}

impl CheckOptions {
    pub fn with_eps1(eps1: f64) -> Self {
        Self { eps1: Some(eps1), ..Self::default() }
    }
}

/// `a ε + b / ε` at the chosen (or optimal) `ε`. Returns the value and
/// `(ε_used, ε_optimal)`, or `None` for ε when `a = b = 0`.
fn eps_tradeoff(a: f64, b: f64, eps1: Option<f64>) -> Result<(f64, Option<(f64, f64)>)> {
    if a == 0.0 && b == 0.0 {
        return Ok((0.0, None));
    }
    let (opt, min) = optimal_eps1(a, b)?;
    match eps1 {
        Some(e) if !(e > 0.0) => Err(invalid("eps1", format!("must be positive, got {e}"))),
        Some(e) => Ok((a * e + b / e, Some((e, opt)))),
        None => Ok((min, Some((opt, opt)))),
    }
}

/// Sufficient condition for the scalar system of dimension `m` under the
/// chosen norm.
pub fn check_scalar_theorem(
    gains: &StaticScalarGains,
    m: usize,
    asym: Asymptotics,
    norm: Norm,
    opts: CheckOptions,
) -> Result<ConditionReport> {
    if m == 0 {
        return Err(invalid("m", "dimension must be at least 1"));
    }
    let Asymptotics { beta, eta } = asym;
    if !(eta >= 0.0) {
        return Err(invalid("eta", format!("must be >= 0, got {eta}")));
    }
    let c2 = gains.c2.abs();
    let channels = if opts.synchronous_delays { 1.0 } else { m as f64 };
    let sign_margin = gains.c3 - c2;
    let report = match norm {
        Norm::Two => {
            let (trade, eps) = eps_tradeoff(c2, c2 * channels * (1.0 + eta), opts.eps1)?;
            let lhs = beta + 2.0 * (gains.c1 - gains.c4) + trade;
            let mut r = ConditionReport::new(TheoremId::Scalar2Norm, lhs, eps, sign_margin, c2);
            r.linear_threshold = Some(gains.c1 + (beta + trade) / 2.0);
            r
        }
        Norm::One => {
            let delayed = c2 * channels * (1.0 + eta);
            let lhs = beta + (gains.c1 - gains.c4) + delayed;
            let mut r = ConditionReport::new(TheoremId::Scalar1Norm, lhs, None, m as f64 * sign_margin, c2);
            r.linear_threshold = Some(gains.c1 + beta + delayed);
            r
        }
        Norm::Inf => {
            let delayed = c2 * (1.0 + eta);
            let lhs = beta + (gains.c1 - gains.c4) + delayed;
            let mut r = ConditionReport::new(TheoremId::ScalarInfNorm, lhs, None, sign_margin, c2);
            r.linear_threshold = Some(gains.c1 + beta + delayed);
            r
        }
    };
    Ok(report)
}

/// The scalar condition with `(β, η)` derived from a (delay, rate) pair:
/// power rates over proportional delays, exponential rates over constant
/// delays.
pub fn check_corollary(
    gains: &StaticScalarGains,
    m: usize,
    delay: &DelayProfile,
    rate: &RateFunction,
    opts: CheckOptions,
) -> Result<ConditionReport> {
    let asym = asymptotics(rate, delay)?;
    check_scalar_theorem(gains, m, asym, Norm::Two, opts)
}

fn check_square(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    Ok(())
}

/// Metzler with zero row sums, up to `1e-12` relative to the largest entry.
pub fn validate_coupling(a: &DMatrix<f64>) -> Result<()> {
    check_square(a)?;
    let scale = a.amax().max(1.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if i != j && a[(i, j)] < -METZLER_TOL * scale {
                return Err(Error::NotMetzler(format!("off-diagonal entry ({i}, {j}) = {} is negative", a[(i, j)])));
            }
        }
        let s: f64 = a.row(i).sum();
        if s.abs() > METZLER_TOL * scale * a.ncols() as f64 {
            return Err(Error::NotMetzler(format!("row {i} sums to {s}")));
        }
    }
    Ok(())
}

/// Positive left eigenvector of the zero eigenvalue, normalized to sum 1.
pub fn left_eigenvector(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    validate_coupling(a)?;
    let n = a.nrows();
    if n == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    // ξ^T A = 0 with the last equation replaced by Σ ξ = 1.
    let mut m = a.transpose();
    m.row_mut(n - 1).fill(1.0);
    let mut rhs = DVector::zeros(n);
    rhs[n - 1] = 1.0;
    let xi = m.lu().solve(&rhs).ok_or(Error::Reducible)?;
    if xi.iter().any(|&v| !(v > 1e-12)) {
        return Err(Error::Reducible);
    }
    Ok(xi)
}

/// Which symmetrized matrix to take the top eigenvalue of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralKind {
    /// `{Ξ (A - diag(σ, 0, ..., 0))}^s`
    Tilde,
    /// `{Ξ (θ1 A + θ4 I)}^s`
    Hat,
}

/// Largest eigenvalue of the symmetric part of `Ξ M` for the matrix `M`
/// selected by `which`.
pub fn lambda_max_sym(
    a: &DMatrix<f64>,
    xi: &DVector<f64>,
    sigma: f64,
    theta1: f64,
    theta4: f64,
    which: SpectralKind,
) -> Result<f64> {
    check_square(a)?;
    let n = a.nrows();
    if xi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: xi.len() });
    }
    let m = match which {
        SpectralKind::Tilde => {
            let mut t = a.clone();
            t[(0, 0)] -= sigma;
            t
        }
        SpectralKind::Hat => a * theta1 + DMatrix::identity(n, n) * theta4,
    };
    let xm = DMatrix::from_diagonal(xi) * m;
    let sym = (&xm + xm.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    Ok(eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
}

/// Inputs of the network conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConditionParams {
    pub lipschitz_f: f64,
    pub lipschitz_g: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub theta4: f64,
    pub sigma: f64,
    /// Node state dimension.
    pub n: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Left eigenvector of `a`; computed when absent.
    pub xi: Option<DVector<f64>>,
    pub asym: Asymptotics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkVariant {
    Pinning,
    FullNode,
}

/// Sufficient condition for finite-time outer synchronization of the error
/// network under pinning (`Pinning`) or full-node (`FullNode`) control.
///
/// The full-node controller contributes `-θ4 e_i`, so the closed-loop
/// coupling matrix entering the spectral term is `θ1 A - θ4 I`.
pub fn check_network_theorem(
    params: &NetworkConditionParams,
    variant: NetworkVariant,
    opts: CheckOptions,
) -> Result<ConditionReport> {
    let p = params;
    check_square(&p.a)?;
    let big_n = p.a.nrows();
    if p.b.nrows() != big_n || p.b.ncols() != big_n {
        return Err(Error::DimensionMismatch { expected: big_n, got: p.b.nrows() });
    }
    if p.n == 0 {
        return Err(invalid("n", "node dimension must be positive"));
    }
    let xi = match &p.xi {
        Some(x) => x.clone(),
        None => left_eigenvector(&p.a)?,
    };
    let min_xi = xi.iter().cloned().fold(f64::INFINITY, f64::min);
    let bmax = p.b.amax();
    let nf = big_n as f64;
    let spectral = match variant {
        NetworkVariant::Pinning => {
            if !(p.sigma > 0.0) {
                return Err(invalid("sigma", "pinning strength must be positive"));
            }
            2.0 * p.theta1 * lambda_max_sym(&p.a, &xi, p.sigma, 0.0, 0.0, SpectralKind::Tilde)?
        }
        NetworkVariant::FullNode => 2.0 * lambda_max_sym(&p.a, &xi, 0.0, p.theta1, -p.theta4, SpectralKind::Hat)?,
    };
    let channels = if opts.synchronous_delays { 1.0 } else { nf * nf };
    let a_coef = p.theta2 * bmax * nf;
    let b_coef = p.theta2 * bmax * channels * p.n as f64 * p.lipschitz_g.powi(2) / min_xi * (1.0 + p.asym.eta);
    let (trade, eps) = eps_tradeoff(a_coef, b_coef, opts.eps1)?;
    let lhs = p.asym.beta + 2.0 * p.lipschitz_f + spectral + trade;
    let sign_threshold = p.theta2 * bmax * nf * p.lipschitz_g;
    let theorem = match variant {
        NetworkVariant::Pinning => TheoremId::NetworkPinning,
        NetworkVariant::FullNode => TheoremId::NetworkFullNode,
    };
    Ok(ConditionReport::new(theorem, lhs, eps, p.theta3 - sign_threshold, sign_threshold))
}

/// `T2 = T1 + 1/ε2` with `ε2 = kappa * epsilon2_max`.
pub fn settling_bound(report: &ConditionReport, t1: f64, kappa: f64) -> Result<f64> {
    if !report.feasible {
        return Err(Error::Infeasible(format!(
            "{} condition does not hold (lhs = {}, sign margin = {})",
            report.theorem.label(),
            report.lhs,
            report.epsilon2_max
        )));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(invalid("kappa", format!("must lie in (0, 1), got {kappa}")));
    }
    if !t1.is_finite() {
        return Err(invalid("t1", "phase boundary must be finite"));
    }
    Ok(t1 + 1.0 / (kappa * report.epsilon2_max))
}

/// Settling bound of the adaptive rules:
/// `T4 = T3 + (1 + c3*²/(2 d1) + c4*²/(2 d3)) / ε2*`.
pub fn adaptive_settling_bound(eps2_star: f64, c3_star: f64, c4_star: f64, d1: f64, d3: f64, t3: f64) -> Result<f64> {
    if !(eps2_star > 0.0) {
        return Err(invalid("eps2_star", "must be positive"));
    }
    if !(d1 > 0.0 && d3 > 0.0) {
        return Err(invalid("d1", "rates must be positive"));
    }
    Ok(t3 + (1.0 + c3_star * c3_star / (2.0 * d1) + c4_star * c4_star / (2.0 * d3)) / eps2_star)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn example1_asym() -> Asymptotics {
        Asymptotics { beta: 0.0, eta: 2f64.powf(0.1) - 1.0 }
    }

    #[test]
    fn optimal_eps_examples() {
        assert_eq!(optimal_eps1(1.0, 1.0).unwrap(), (1.0, 2.0));
        let (e, v) = optimal_eps1(2.0, 8.0).unwrap();
        assert_relative_eq!(e, 2.0);
        assert_relative_eq!(v, 8.0);
        let (e, v) = optimal_eps1(2.0, 2.0 * 2f64.powf(0.1)).unwrap();
        assert_relative_eq!(e, 2f64.powf(0.05), max_relative = 1e-14);
        assert_relative_eq!(v, 4.0 * 2f64.powf(0.05), max_relative = 1e-14);
        assert!(optimal_eps1(0.0, 1.0).is_err());
        assert!(optimal_eps1(1.0, -1.0).is_err());
    }

    #[test]
    fn example1_threshold_and_feasibility() {
        let g = StaticScalarGains::new(1.0, 2.0, 2.1, 3.5).unwrap();
        let r =
            check_scalar_theorem(&g, 1, example1_asym(), Norm::Two, CheckOptions::with_eps1(2f64.powf(0.05))).unwrap();
        assert_relative_eq!(r.linear_threshold.unwrap(), 1.0 + 2f64.powf(1.05), epsilon = 1e-12);
        assert!(r.feasible);
        assert_relative_eq!(r.epsilon2_max, 0.1, epsilon = 1e-12);
        assert_relative_eq!(r.lhs, 2.0 * (1.0 - 3.5) + 4.0 * 2f64.powf(0.05), epsilon = 1e-12);
        assert!((r.lhs + 0.859).abs() < 1e-3);
        // eps1 = 2^0.05 is the optimum
        assert_relative_eq!(r.eps1_optimal.unwrap(), 2f64.powf(0.05), max_relative = 1e-14);
    }

    #[test]
    fn delay_free_degenerate_case() {
        let asym = Asymptotics::delay_free();
        for (c1, c3, c4, ok) in [(1.0, 0.5, 2.0, true), (1.0, 0.5, 0.5, false), (1.0, 0.0, 2.0, false)] {
            let g = StaticScalarGains::new(c1, 0.0, c3, c4).unwrap();
            let r = check_scalar_theorem(&g, 1, asym, Norm::Two, CheckOptions::default()).unwrap();
            assert_eq!(r.feasible, ok);
            assert_eq!(r.eps1_used, None);
        }
    }

    #[test]
    fn corollary_cases() {
        let g = StaticScalarGains::new(1.0, 2.0, 2.1, 3.5).unwrap();
        let prop = DelayProfile::proportional(0.5, 1).unwrap();
        let a = check_corollary(&g, 1, &prop, &RateFunction::Power { rho: 0.1 }, CheckOptions::default()).unwrap();
        let b = check_scalar_theorem(&g, 1, example1_asym(), Norm::Two, CheckOptions::default()).unwrap();
        assert_relative_eq!(a.lhs, b.lhs, epsilon = 1e-14);

        // π = 0, small ϖ: reduces to ϖ + 2(c1 - c4) + 2|c2| at the optimum
        let zero = DelayProfile::constant(0.0, 1).unwrap();
        let g0 = StaticScalarGains::new(1.0, 0.0, 0.5, 1.5).unwrap();
        let r = check_corollary(&g0, 1, &zero, &RateFunction::Exponential { varpi: 1e-9 }, CheckOptions::default())
            .unwrap();
        assert_relative_eq!(r.lhs, 1e-9 + 2.0 * (1.0 - 1.5), epsilon = 1e-15);

        let one = DelayProfile::constant(1.0, 1).unwrap();
        let g1 = StaticScalarGains::new(0.0, 1.0, 2.0, 3.0).unwrap();
        let r =
            check_corollary(&g1, 1, &one, &RateFunction::Exponential { varpi: 0.1 }, CheckOptions::default()).unwrap();
        assert_relative_eq!(r.lhs, 0.1 - 6.0 + 2.0 * 0.05f64.exp(), epsilon = 1e-12);

        assert!(check_corollary(&g1, 1, &one, &RateFunction::Power { rho: 0.1 }, CheckOptions::default()).is_err());
    }

    #[test]
    fn norm_variants() {
        let g = StaticScalarGains::new(1.0, 2.0, 2.5, 6.0).unwrap();
        let asym = Asymptotics { beta: 0.1, eta: 0.2 };
        let one = check_scalar_theorem(&g, 3, asym, Norm::One, CheckOptions::default()).unwrap();
        assert_relative_eq!(one.lhs, 0.1 + (1.0 - 6.0) + 2.0 * 3.0 * 1.2);
        assert_relative_eq!(one.epsilon2_max, 3.0 * 0.5);
        let inf = check_scalar_theorem(&g, 3, asym, Norm::Inf, CheckOptions::default()).unwrap();
        assert_relative_eq!(inf.lhs, 0.1 + (1.0 - 6.0) + 2.0 * 1.2);
        assert_relative_eq!(inf.epsilon2_max, 0.5);
    }

    #[test]
    fn left_eigenvector_examples() {
        let a = DMatrix::from_row_slice(3, 3, &[-5.0, 2.0, 3.0, 1.0, -4.0, 3.0, 1.0, 2.0, -3.0]);
        let xi = left_eigenvector(&a).unwrap();
        for (v, e) in xi.iter().zip([1.0 / 6.0, 1.0 / 3.0, 0.5]) {
            assert!((v - e).abs() < 1e-12);
        }
        let sym = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        let xi = left_eigenvector(&sym).unwrap();
        assert!((xi[0] - 0.5).abs() < 1e-15 && (xi[1] - 0.5).abs() < 1e-15);
        let ring = DMatrix::from_row_slice(3, 3, &[-1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 1.0, 0.0, -1.0]);
        let xi = left_eigenvector(&ring).unwrap();
        assert!(xi.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-14));
    }

    #[test]
    fn left_eigenvector_rejections() {
        let not_metzler = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, -1.0]);
        assert!(matches!(left_eigenvector(&not_metzler), Err(Error::NotMetzler(_))));
        let row_sum = DMatrix::from_row_slice(2, 2, &[-1.0, 2.0, 1.0, -1.0]);
        assert!(matches!(left_eigenvector(&row_sum), Err(Error::NotMetzler(_))));
        // node 2 never hears from node 1: reducible
        let reducible = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, 0.0]);
        assert!(matches!(left_eigenvector(&reducible), Err(Error::Reducible)));
    }

    #[test]
    fn spectral_examples() {
        let a = DMatrix::from_row_slice(3, 3, &[-5.0, 2.0, 3.0, 1.0, -4.0, 3.0, 1.0, 2.0, -3.0]);
        let xi = left_eigenvector(&a).unwrap();
        let l0 = lambda_max_sym(&a, &xi, 0.0, 0.0, 0.0, SpectralKind::Tilde).unwrap();
        assert!(l0.abs() < 1e-12);
        let l1 = lambda_max_sym(&a, &xi, 1.0, 0.0, 0.0, SpectralKind::Tilde).unwrap();
        assert!(l1 < 0.0);
        let hat = lambda_max_sym(&a, &xi, 0.0, 0.0, 1.0, SpectralKind::Hat).unwrap();
        assert_relative_eq!(hat, 0.5, epsilon = 1e-12);
        assert!(lambda_max_sym(&a, &DVector::from_element(2, 0.5), 1.0, 0.0, 0.0, SpectralKind::Tilde).is_err());
    }

    fn example2_params(theta3: f64) -> NetworkConditionParams {
        NetworkConditionParams {
            lipschitz_f: 1.0,
            lipschitz_g: 3.0,
            theta1: 0.1,
            theta2: 1.0,
            theta3,
            theta4: 0.0,
            sigma: 1.0,
            n: 3,
            a: DMatrix::from_row_slice(3, 3, &[-5.0, 2.0, 3.0, 1.0, -4.0, 3.0, 1.0, 2.0, -3.0]),
            b: DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0]),
            xi: None,
            asym: Asymptotics { beta: 0.0, eta: 2f64.powf(0.1) - 1.0 },
        }
    }

    #[test]
    fn network_sign_threshold_and_scaling() {
        let r = check_network_theorem(&example2_params(5.0), NetworkVariant::Pinning, CheckOptions::default()).unwrap();
        assert_relative_eq!(r.sign_threshold, 9.0);
        assert!(!r.sign_condition_holds());
        let r2 =
            check_network_theorem(&example2_params(10.0), NetworkVariant::Pinning, CheckOptions::default()).unwrap();
        let r4 =
            check_network_theorem(&example2_params(20.0), NetworkVariant::Pinning, CheckOptions::default()).unwrap();
        assert_eq!(r2.lhs, r4.lhs);
        assert_relative_eq!(r4.epsilon2_max - r2.epsilon2_max, 10.0);
    }

    #[test]
    fn network_without_delayed_coupling() {
        let mut p = example2_params(1.0);
        p.theta2 = 0.0;
        let r = check_network_theorem(&p, NetworkVariant::Pinning, CheckOptions::default()).unwrap();
        let xi = left_eigenvector(&p.a).unwrap();
        let lt = lambda_max_sym(&p.a, &xi, 1.0, 0.0, 0.0, SpectralKind::Tilde).unwrap();
        assert_relative_eq!(r.lhs, 2.0 + 2.0 * 0.1 * lt, epsilon = 1e-12);
        assert_eq!(r.feasible, r.lhs < 0.0);
        assert!(r.sign_condition_holds());
    }

    #[test]
    fn full_node_linear_gain_helps() {
        let mut p = example2_params(10.0);
        p.theta4 = 10.0;
        let weak = check_network_theorem(&p, NetworkVariant::FullNode, CheckOptions::default()).unwrap();
        p.theta4 = 2000.0;
        let strong = check_network_theorem(&p, NetworkVariant::FullNode, CheckOptions::default()).unwrap();
        assert!(strong.lhs < weak.lhs);
        assert!(strong.feasible);
    }

    #[test]
    fn settling_bound_cases() {
        let mut r = ConditionReport::new(TheoremId::Scalar2Norm, -1.0, None, 0.1, 2.0);
        assert_relative_eq!(settling_bound(&r, 5.0, 0.9).unwrap(), 5.0 + 1.0 / 0.09, epsilon = 1e-12);
        assert!((settling_bound(&r, 5.0, 0.9).unwrap() - 16.11).abs() < 5e-3);
        assert_relative_eq!(settling_bound(&r, 5.0, 1.0 - 1e-12).unwrap(), 15.0, epsilon = 1e-9);
        r = ConditionReport::new(TheoremId::Scalar2Norm, -1.0, None, 0.0, 2.0);
        assert!(matches!(settling_bound(&r, 5.0, 0.9), Err(Error::Infeasible(_))));
    }

    #[test]
    fn adaptive_bound_arithmetic() {
        let t = adaptive_settling_bound(0.5, 1.0, 2.0, 0.1, 0.1, 3.0).unwrap();
        assert_relative_eq!(t, 3.0 + (1.0 + 5.0 + 20.0) / 0.5);
    }
}
