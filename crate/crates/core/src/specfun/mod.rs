//! The special integral
//!
//! ```text
//! I(eps, beta) = int_0^inf e^{-t} / (1 + eps t) * exp(-beta / (1 + eps t)) dt
//! ```
//!
//! and its closed-form piecewise approximations `I_N`. `I` underflows double
//! precision long before its arguments become unreasonable (`ln I` is about
//! `-2 sqrt(beta/eps)` for large `beta`), so every routine has an `ln_` twin that
//! works in the log domain; detectors use those.

mod bessel;
mod legendre;
mod partitions;
pub mod quadrature;

use crate::error::{Error, Result};

pub use bessel::{bessel_k0, bessel_k0_scaled};
pub use legendre::{gauss_legendre_rule, QuadratureRule};

use bessel::k0_scaled_unchecked;
use quadrature::{integrate, integrate_pieces, integrate_to_infinity, Tolerance};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `|beta*eps - 1|` below this counts as the boundary `beta*eps = 1`.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Largest order accepted by [`integral_i_approx_n`].
pub const MAX_APPROX_ORDER: usize = partitions::MAX_ORDER;

/// Loosest tolerance accepted by [`integral_i_exact`].
pub const MAX_REL_TOL: f64 = 1e-3;

/// Arguments `(eps, beta)` of `I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralArgs {
    eps: f64,
    beta: f64,
}

impl IntegralArgs {
    /// Requires `eps > 0`, `beta >= 0`, both finite.
    pub fn new(eps: f64, beta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain {
                what: "eps",
                value: eps,
            });
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::Domain {
                what: "beta",
                value: beta,
            });
        }
        Ok(IntegralArgs { eps, beta })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// True when `beta*eps` is within [`BOUNDARY_TOL`] of 1.
    pub fn on_boundary(&self) -> bool {
        (self.beta * self.eps - 1.0).abs() < BOUNDARY_TOL
    }
}

/// Which branch of the piecewise approximation applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxCase {
    /// `beta*eps < 1` and `e^{1/eps}/eps > 1`: Taylor expansion around `E[t] = 1`.
    Taylor,
    /// `beta*eps < 1` and `e^{1/eps}/eps <= 1`: `K0 - Psi_N(beta, sqrt(beta/eps))`.
    BesselMinus,
    /// `beta*eps > 1`: `K0 + Psi_N(1/eps, sqrt(beta/eps))`.
    BesselPlus,
    /// `beta*eps = 1`: closed form `beta e^beta K0(2 beta)`.
    Boundary,
}

impl ApproxCase {
    pub fn select(args: IntegralArgs) -> Self {
        if args.on_boundary() {
            ApproxCase::Boundary
        } else if args.beta * args.eps > 1.0 {
            ApproxCase::BesselPlus
        } else if 1.0 / args.eps - args.eps.ln() > 0.0 {
            ApproxCase::Taylor
        } else {
            ApproxCase::BesselMinus
        }
    }
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 0.0 && rel_tol <= MAX_REL_TOL {
        Ok(())
    } else {
        Err(Error::Range {
            what: "rel_tol",
            value: rel_tol,
            range: "(0, 1e-3]",
        })
    }
}

/// `ln(beta e^beta K0(2 beta))`, the value of `I` on `beta*eps = 1`.
fn ln_boundary_value(beta: f64) -> f64 {
    beta.ln() - beta + k0_scaled_unchecked(2.0 * beta).ln()
}

/// `ln I(eps, beta)` by adaptive quadrature of the bounded integrand.
///
/// The integrand is rescaled by its peak value and split at the peak, so the
/// quadrature sees a function bounded by one and the scale is restored in the
/// log domain.
pub fn ln_integral_i_exact(args: IntegralArgs, rel_tol: f64) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    let IntegralArgs { eps, beta } = args;
    let phi = |t: f64| {
        let u = 1.0 + eps * t;
        -t - u.ln() - beta / u
    };
    // stationary point of phi in u = 1 + eps t: u^2 + eps u - beta eps = 0
    let u_star = 2.0 * beta * eps / (eps + (eps * eps + 4.0 * beta * eps).sqrt());
    let t_star = if u_star > 1.0 { (u_star - 1.0) / eps } else { 0.0 };
    let width = if t_star > 0.0 {
        let u = u_star;
        let curvature = (eps * eps / (u * u) - 2.0 * beta * eps * eps / (u * u * u)).abs();
        curvature.sqrt().recip()
    } else {
        1.0
    };
    let peak = phi(t_star);
    let f = |t: f64| (phi(t) - peak).exp();

    let tail = integrate_to_infinity(f, t_star, width, Tolerance::relative(rel_tol))
        .map_err(|e| rescale_failure(e, peak))?;
    let mut total = tail.value;
    if t_star > 0.0 {
        let far = (t_star - 20.0 * width).max(0.0);
        let near = (t_star - 5.0 * width).max(0.0);
        let tol = Tolerance::relative(rel_tol).with_abs(0.5 * rel_tol * tail.value);
        let head = integrate_pieces(f, &[0.0, far, near, t_star], tol)
            .map_err(|e| rescale_failure(e, peak))?;
        total += head.value;
    }
    Ok((peak + total.ln()).min(0.0))
}

fn rescale_failure(err: Error, ln_scale: f64) -> Error {
    match err {
        Error::Quadrature {
            estimate,
            error_bound,
        } => Error::Quadrature {
            estimate: estimate * ln_scale.exp(),
            error_bound: error_bound * ln_scale.exp(),
        },
        other => other,
    }
}

/// `I(eps, beta)` to relative accuracy `rel_tol` in `(0, 1e-3]`.
pub fn integral_i_exact(args: IntegralArgs, rel_tol: f64) -> Result<f64> {
    ln_integral_i_exact(args, rel_tol).map(f64::exp)
}

/// Exponent `x + c/x - 2 sqrt(c)` of the scaled Bessel-piece integrand, written
/// as a square to avoid cancellation near `x = sqrt(c)`.
fn psi_exponent(x: f64, root_c: f64) -> f64 {
    let d = x.sqrt() - root_c / x.sqrt();
    d * d
}

/// Shared prefix `1/eps - ln eps - 2 sqrt(beta/eps)` of the Bessel pieces, plus the
/// scaled `e^{x_K} K0(x_K)` and the integration limits.
struct BesselPiece {
    ln_prefix: f64,
    k0_scaled: f64,
    root_c: f64,
    lower: f64,
    plus: bool,
}

impl BesselPiece {
    fn new(args: IntegralArgs) -> Self {
        let IntegralArgs { eps, beta } = args;
        let root_c = (beta / eps).sqrt();
        let x_k = 2.0 * root_c;
        let plus = beta * eps > 1.0;
        BesselPiece {
            ln_prefix: 1.0 / eps - eps.ln() - x_k,
            k0_scaled: k0_scaled_unchecked(x_k),
            root_c,
            lower: if plus { 1.0 / eps } else { beta },
            plus,
        }
    }

    fn scaled_psi(&self, x: f64) -> f64 {
        (-psi_exponent(x, self.root_c)).exp() / x
    }

    fn ln_combine(&self, sub: f64) -> f64 {
        let bracket = if self.plus {
            self.k0_scaled + sub
        } else {
            self.k0_scaled - sub
        };
        self.ln_prefix + bracket.max(f64::MIN_POSITIVE).ln()
    }
}

/// `ln I` through the Bessel representation
/// `I = e^{1/eps}/eps [K0(2 sqrt(beta/eps)) -/+ int psi]`, with the
/// sub-integral evaluated by adaptive quadrature.
///
/// Independent of [`ln_integral_i_exact`]; used to cross-check it. Requires
/// `beta > 0`.
pub fn ln_integral_i_split(args: IntegralArgs, rel_tol: f64) -> Result<f64> {
    check_rel_tol(rel_tol)?;
    if args.beta == 0.0 {
        return Err(Error::Domain {
            what: "beta (Bessel form needs beta > 0)",
            value: 0.0,
        });
    }
    if args.on_boundary() {
        return Ok(ln_boundary_value(args.beta));
    }
    let piece = BesselPiece::new(args);
    let tol = Tolerance::relative(rel_tol).with_abs(rel_tol * 1e-3 * piece.k0_scaled);
    let sub = integrate(|x| piece.scaled_psi(x), piece.lower, piece.root_c, tol)?;
    Ok(piece.ln_combine(sub.value))
}

/// `e^x E1(x)` for `0 < x <= 1` by the ascending series.
fn exp_e1_small(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= -x / kf;
        let add = term / kf;
        sum += add;
        if add.abs() < f64::EPSILON * sum.abs() {
            break;
        }
    }
    (-EULER_GAMMA - x.ln() - sum) * x.exp()
}

fn ln_taylor_piece(args: IntegralArgs, n_max: usize) -> f64 {
    let IntegralArgs { eps, beta } = args;
    let tau = 1.0 / (eps + 1.0);
    let bt = beta * tau;
    let et = eps * tau;
    let mut bracket = 1.0;
    let mut et_pow = 1.0;
    for n in 1..=n_max {
        et_pow *= -et;
        if n == 1 {
            // first central moment vanishes
            continue;
        }
        let coef = partitions::coefficients(n);
        let mut inner = 0.0;
        for (parts, &c) in coef.iter().enumerate().skip(1) {
            if c != 0.0 {
                inner += c * (parts as f64 - bt) * (-bt).powi(parts as i32 - 1);
            }
        }
        bracket += et_pow * partitions::central_moment(n) * inner;
    }
    tau.ln() - bt + bracket.max(f64::MIN_POSITIVE).ln()
}

fn ln_gauss_piece(args: IntegralArgs, rule: &QuadratureRule) -> f64 {
    let piece = BesselPiece::new(args);
    if args.beta == 0.0 {
        // K0 and Psi_N both diverge as beta -> 0; use the common limit E1(1/eps)
        let x = 1.0 / args.eps;
        return exp_e1_small(x).ln() - args.eps.ln();
    }
    let sub = rule.integrate(|x| piece.scaled_psi(x), piece.lower, piece.root_c);
    piece.ln_combine(sub)
}

fn check_order(n: usize) -> Result<()> {
    if (1..=MAX_APPROX_ORDER).contains(&n) {
        Ok(())
    } else {
        Err(Error::Range {
            what: "approximation order N",
            value: n as f64,
            range: "1..=16",
        })
    }
}

/// `ln I_N(eps, beta)`. Errors on the boundary `beta*eps = 1`, where the
/// expansion is undefined.
pub fn ln_integral_i_approx_n(args: IntegralArgs, n: usize) -> Result<f64> {
    check_order(n)?;
    match ApproxCase::select(args) {
        ApproxCase::Boundary => Err(Error::BoundaryCase {
            eps: args.eps,
            beta: args.beta,
        }),
        ApproxCase::Taylor => Ok(ln_taylor_piece(args, n)),
        ApproxCase::BesselMinus | ApproxCase::BesselPlus => {
            Ok(ln_gauss_piece(args, gauss_legendre_rule(n)?))
        }
    }
}

/// `I_N(eps, beta)`, the N-th order piecewise approximation, `1 <= N <= 16`.
pub fn integral_i_approx_n(args: IntegralArgs, n: usize) -> Result<f64> {
    ln_integral_i_approx_n(args, n).map(f64::exp)
}

/// `ln I_2(eps, beta)`; on `beta*eps = 1` returns the exact closed form.
pub fn ln_integral_i_approx2(args: IntegralArgs) -> f64 {
    if args.on_boundary() {
        return ln_boundary_value(args.beta);
    }
    match ln_integral_i_approx_n(args, 2) {
        Ok(v) => v,
        Err(_) => unreachable!("order 2 is supported and the boundary is handled"),
    }
}

/// `I_2(eps, beta)`, the second-order piecewise approximation.
pub fn integral_i_approx2(args: IntegralArgs) -> f64 {
    ln_integral_i_approx2(args).exp()
}

/// `ln I(eps, beta)` by quadrature, extended to `eps = 0` where `I = e^{-beta}`.
pub fn ln_i_exact_at(eps: f64, beta: f64, rel_tol: f64) -> Result<f64> {
    if eps == 0.0 && beta >= 0.0 && beta.is_finite() {
        return Ok(-beta);
    }
    ln_integral_i_exact(IntegralArgs::new(eps, beta)?, rel_tol)
}

/// `ln I_2(eps, beta)`, extended to `eps = 0` where `I = e^{-beta}`.
pub fn ln_i_approx2_at(eps: f64, beta: f64) -> Result<f64> {
    if eps == 0.0 && beta >= 0.0 && beta.is_finite() {
        return Ok(-beta);
    }
    Ok(ln_integral_i_approx2(IntegralArgs::new(eps, beta)?))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn args(eps: f64, beta: f64) -> IntegralArgs {
        IntegralArgs::new(eps, beta).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // (eps, beta, ln I) from a 50-digit reference evaluation.
    const LN_I_REFERENCE: [(f64, f64, f64); 14] = [
        (1.0, 0.0, -0.51693195900204561087),
        (1.0, 1.0, -1.1724882049757099347),
        (0.1, 0.5, -0.54824277644400936936),
        (2.0, 3.0, -2.2830483360761081315),
        (1e-12, 2.0, -1.999999999999),
        (10.0, 100.0, -8.5488323144717255523),
        (0.1, 1e5, -1990.5789900879554178),
        (1e3, 1e-3, -5.0613686414051802085),
        (100.0, 1e-5, -3.1994404583048881267),
        (0.5, 2.0, -1.8023011664553888989),
        (3.0, 1.0 / 3.0, -1.1265788800304252676),
        (1e-12, 0.0, -9.999999999985e-13),
        (1e6, 1.0, -11.294455011986623885),
        (0.01, 50.0, -49.360037926410419001),
    ];

    #[test]
    fn exact_matches_reference() {
        for &(eps, beta, want) in &LN_I_REFERENCE {
            let got = ln_integral_i_exact(args(eps, beta), 1e-12).unwrap();
            let err = (got - want).abs() / want.abs().max(1.0);
            assert!(err < 1e-11, "ln I({eps}, {beta}) = {got}, want {want}");
        }
    }

    #[test]
    fn gompertz_constant() {
        let got = integral_i_exact(args(1.0, 0.0), 1e-12).unwrap();
        assert!(rel(got, 0.59634736232319407434) < 1e-12);
    }

    #[test]
    fn boundary_closed_form() {
        for &(eps, beta) in &[(1.0, 1.0), (0.5, 2.0), (3.0, 1.0 / 3.0), (0.01, 100.0)] {
            let exact = ln_integral_i_exact(args(eps, beta), 1e-12).unwrap();
            let closed = ln_boundary_value(beta);
            assert!((exact - closed).abs() < 1e-10 * closed.abs().max(1.0));
            assert_eq!(ln_integral_i_approx2(args(eps, beta)), closed);
        }
    }

    #[test]
    fn split_form_matches_direct_form() {
        // the Bessel form cancels catastrophically for tiny eps, so skip those rows
        for &(eps, beta, want) in &LN_I_REFERENCE {
            if beta == 0.0 || eps < 1e-3 {
                continue;
            }
            let got = ln_integral_i_split(args(eps, beta), 1e-12).unwrap();
            assert!(
                (got - want).abs() < 1e-8 * want.abs().max(1.0),
                "split ln I({eps}, {beta}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn taylor_piece_matches_printed_second_order_formula() {
        let (eps, beta) = (0.1, 0.5);
        let tau: f64 = 1.0 / (eps + 1.0);
        let e2 = eps * eps;
        let direct = tau
            * (-beta * tau).exp()
            * (1.0 + e2 * tau * tau - 2.0 * e2 * tau.powi(3) * beta
                + 0.5 * e2 * tau.powi(4) * beta * beta);
        let got = integral_i_approx2(args(eps, beta));
        assert!(rel(got, direct) < 1e-14);
        assert!(rel(got, 0.57795929336357819992) < 1e-14);
        assert_eq!(ApproxCase::select(args(eps, beta)), ApproxCase::Taylor);
    }

    #[test]
    fn approx2_is_order_two() {
        for &(eps, beta) in &[(0.1, 0.5), (3.0, 0.01), (2.0, 3.0), (1e-3, 1e5), (50.0, 0.0)] {
            let a = args(eps, beta);
            assert_eq!(
                integral_i_approx2(a).to_bits(),
                integral_i_approx_n(a, 2).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn approx_n_rejects_boundary_and_bad_orders() {
        assert!(matches!(
            integral_i_approx_n(args(1.0, 1.0), 2),
            Err(Error::BoundaryCase { .. })
        ));
        assert!(matches!(integral_i_approx_n(args(1.0, 2.0), 0), Err(Error::Range { .. })));
        assert!(matches!(integral_i_approx_n(args(1.0, 2.0), 17), Err(Error::Range { .. })));
    }

    #[test]
    fn degenerate_eps_limit() {
        let a = args(1e-12, 2.0);
        assert!(rel(integral_i_exact(a, 1e-12).unwrap(), (-2f64).exp()) < 1e-6);
        assert!(rel(integral_i_approx2(a), (-2f64).exp()) < 1e-6);
        assert!((integral_i_approx_n(args(1e-12, 0.0), 2).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn error_does_not_grow_with_order() {
        let a = args(2.0, 3.0);
        let exact = integral_i_exact(a, 1e-12).unwrap();
        let errs: Vec<f64> = [1, 2, 4]
            .iter()
            .map(|&n| rel(integral_i_approx_n(a, n).unwrap(), exact))
            .collect();
        assert!(errs[0] >= errs[1] && errs[1] >= errs[2], "{errs:?}");
    }

    #[test]
    fn zero_beta_in_bessel_branch_is_finite() {
        let a = args(10.0, 0.0);
        assert_eq!(ApproxCase::select(a), ApproxCase::BesselMinus);
        let exact = integral_i_exact(a, 1e-12).unwrap();
        assert!(rel(integral_i_approx2(a), exact) < 1e-12);
    }

    #[test]
    fn rel_tol_and_args_are_validated() {
        assert!(IntegralArgs::new(0.0, 1.0).is_err());
        assert!(IntegralArgs::new(1.0, -1.0).is_err());
        assert!(IntegralArgs::new(f64::INFINITY, 1.0).is_err());
        assert!(integral_i_exact(args(1.0, 1.0), 0.0).is_err());
        assert!(integral_i_exact(args(1.0, 1.0), 1e-2).is_err());
    }
}
