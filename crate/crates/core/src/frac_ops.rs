//! Riemann-Liouville operators used to check the derivation chain.
//!
//! Derivatives act term by term on power terms through the exact power
//! rule; only the fractional integral has a numerical (quadrature) route,
//! kept as an independent oracle for its series form.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::ml_core::RationalOrder;
use crate::quadrature::composite_gl16;
use crate::series::{Accumulator, SeriesValue, TruncationPolicy};
use crate::special_fn::{complex_exp, ensure_finite, gamma_ratio, principal_root, recip_gamma, ComplexScalar};
use crate::twofold::ComplexTwofold;

/// `coeff * x^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTerm {
    #[serde(skip)]
    pub coeff: ComplexScalar,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn new(coeff: ComplexScalar, exponent: f64) -> Self {
        Self { coeff, exponent }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff == ComplexScalar::new(0.0, 0.0)
    }

    pub fn eval(&self, x: f64) -> ComplexScalar {
        if self.is_zero() {
            return self.coeff;
        }
        self.coeff * x.powf(self.exponent)
    }
}

/// Distance (in units of the argument's magnitude) below which a gamma
/// argument is treated as sitting on a pole.
const POLE_SNAP: f64 = 16.0 * f64::EPSILON;

fn snap_to_pole(z: f64) -> f64 {
    let r = z.round();
    if r <= 0.0 && (z - r).abs() <= POLE_SNAP * (1.0 + z.abs()) {
        r
    } else {
        z
    }
}

/// Power rule `D^alpha x^beta = Gamma(beta+1)/Gamma(beta+1-alpha) x^{beta-alpha}`.
///
/// The coefficient is exactly zero when `beta + 1 - alpha` is a
/// non-positive integer; this is how the leading term `x^{alpha-1}` is
/// annihilated.
pub fn rl_deriv_power(term: PowerTerm, alpha: f64) -> Result<PowerTerm> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("derivative order must lie in (0, 1], got {alpha}"));
    }
    let beta = term.exponent;
    if !(beta > -1.0) {
        return domain(format!("power term exponent must exceed -1, got {beta}"));
    }
    let exponent = beta - alpha;
    if term.is_zero() {
        return Ok(PowerTerm::new(term.coeff, exponent));
    }
    let ratio = gamma_ratio(beta + 1.0, snap_to_pole(beta + 1.0 - alpha))?;
    Ok(PowerTerm::new(term.coeff * ratio, exponent))
}

/// Term `k` of the `h_{1/n}` series as a power term.
fn h_term(rho_pow: ComplexScalar, k: u64, n: u64) -> PowerTerm {
    let g = (k + 1) as f64 / n as f64;
    PowerTerm::new(rho_pow * recip_gamma(g), g - 1.0)
}

/// Applies the order-`1/n` derivative `times` times to every term of the
/// `h_{1/n}(x, rho)` series and sums the result.
fn derived_h_series(x: f64, rho: ComplexScalar, n: u32, times: u32, policy: &TruncationPolicy) -> Result<SeriesValue> {
    policy.validate()?;
    ensure_finite(rho, "rho")?;
    if n == 0 {
        return domain("n must be positive");
    }
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("derivative series requires finite x > 0, got {x}"));
    }
    let n64 = u64::from(n);
    let alpha = 1.0 / f64::from(n);
    let mut acc = Accumulator::new(policy);
    let mut rho_pow = ComplexScalar::new(1.0, 0.0);
    for k in 0..policy.max_terms as u64 {
        let mut term = h_term(rho_pow, k, n64);
        let original_nonzero = !term.is_zero();
        for j in 1..=u64::from(times) {
            if term.is_zero() {
                break;
            }
            term = rl_deriv_power(term, alpha)?;
            // keep the exponent on the exact rational grid
            term.exponent = (k + 1) as f64 / n as f64 - 1.0 - j as f64 / n as f64;
        }
        let stop = if original_nonzero && term.is_zero() {
            acc.push_structural_zero()
        } else {
            acc.push(term.eval(x))
        };
        if stop {
            break;
        }
        rho_pow *= rho;
    }
    acc.finish("derivative series")
}

/// Order-`1/n` derivative of `h_{1/n}(x, rho)` applied term by term.
pub fn termwise_deriv_h(x: f64, rho: ComplexScalar, n: u32, policy: &TruncationPolicy) -> Result<SeriesValue> {
    derived_h_series(x, rho, n, 1, policy)
}

/// Order-`m/n` derivative of `h_{1/n}(x, lambda^{1/m})`, realised as `m`
/// successive order-`1/n` derivatives.
///
/// A single Riemann-Liouville derivative of order `m/n` would leave the
/// terms `k < m - 1` alive; the sequential form annihilates the first `m`
/// terms and reproduces `lambda * h`.
pub fn sequential_deriv(
    x: f64,
    lambda: ComplexScalar,
    order: RationalOrder,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let rho = principal_root(lambda, order.m())?;
    derived_h_series(x, rho, order.n(), order.m(), policy)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        domain(format!("integral order must lie in (0, 1], got {alpha}"))
    }
}

/// Series form of `I^alpha_{x0}[e^{a t}](x)`:
///
/// ```text
/// e^{a x} / Gamma(alpha) * sum_m (-a)^m / m! * (x - x0)^{alpha + m} / (alpha + m)
/// ```
///
/// Exactly zero at `x = x0`.
pub fn rl_integral_exp(
    alpha: f64,
    a: ComplexScalar,
    x0: f64,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let (inner, _, prefactor) = rl_integral_exp_parts(alpha, a, x0, x, policy)?;
    let out = inner.scaled(prefactor);
    ensure_finite(out.value, "fractional integral")?;
    Ok(out)
}

/// The inner series (rounded and unrounded) and the prefactor
/// `e^{a x} / Gamma(alpha)` of [`rl_integral_exp`], kept apart so callers
/// can finish the product in extended precision.
pub(crate) fn rl_integral_exp_parts(
    alpha: f64,
    a: ComplexScalar,
    x0: f64,
    x: f64,
    policy: &TruncationPolicy,
) -> Result<(SeriesValue, ComplexTwofold, ComplexScalar)> {
    check_alpha(alpha)?;
    policy.validate()?;
    ensure_finite(a, "exponential rate")?;
    if !x0.is_finite() || !x.is_finite() {
        return domain("integral limits must be finite");
    }
    if x < x0 {
        return domain(format!("integral requires x >= x0, got x = {x}, x0 = {x0}"));
    }
    let zero = ComplexScalar::new(0.0, 0.0);
    if x == x0 {
        return Ok((SeriesValue::exact(zero), ComplexTwofold::ZERO, zero));
    }
    let d = x - x0;
    let d_alpha = d.powf(alpha);
    let step = -a * d;
    // p = (-a d)^m / m!
    let mut p = ComplexScalar::new(1.0, 0.0);
    let mut acc = Accumulator::new(policy);
    for m in 0..policy.max_terms {
        let term = p * (d_alpha / (alpha + m as f64));
        if acc.push(term) {
            break;
        }
        p *= step / (m as f64 + 1.0);
    }
    let sum = acc.sum();
    let inner = acc.finish("fractional integral series")?;
    let prefactor = complex_exp(a * x)? * recip_gamma(alpha);
    Ok((inner, sum, prefactor))
}

/// Quadrature form of `I^alpha_{x0}[e^{a t}](x)` with a fixed number of
/// 16-point Gauss-Legendre panels.
///
/// The substitution `u = (x - t)^alpha` absorbs the kernel singularity:
///
/// ```text
/// 1/Gamma(alpha) int_{x0}^{x} (x-t)^{alpha-1} e^{a t} dt
///   = 1/Gamma(alpha+1) int_0^{(x-x0)^alpha} e^{a (x - u^{1/alpha})} du
/// ```
pub fn rl_integral_quadrature(alpha: f64, a: ComplexScalar, x0: f64, x: f64, panels: usize) -> Result<ComplexScalar> {
    check_alpha(alpha)?;
    ensure_finite(a, "exponential rate")?;
    if !(x > x0) || !x.is_finite() || !x0.is_finite() {
        return domain(format!("quadrature requires x > x0, got x = {x}, x0 = {x0}"));
    }
    if panels == 0 {
        return domain("quadrature needs at least one panel");
    }
    let upper = (x - x0).powf(alpha);
    let inv_alpha = 1.0 / alpha;
    let integral = composite_gl16(|u| (a * (x - u.powf(inv_alpha))).exp(), 0.0, upper, panels);
    ensure_finite(integral * recip_gamma(alpha + 1.0), "quadrature result")
}

/// Relative agreement required between successive panel doublings.
pub const QUADRATURE_REL_TOL: f64 = 1e-10;
/// Upper bound on the panel count.
pub const QUADRATURE_MAX_PANELS: usize = 1 << 10;

/// Quadrature result with the panel count it settled on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureValue {
    pub value: ComplexScalar,
    pub panels: usize,
    pub converged: bool,
}

/// Doubles the panel count from one until two successive results agree to
/// [`QUADRATURE_REL_TOL`], up to [`QUADRATURE_MAX_PANELS`].
pub fn rl_integral_quadrature_auto(alpha: f64, a: ComplexScalar, x0: f64, x: f64) -> Result<QuadratureValue> {
    let mut panels = 1;
    let mut prev = rl_integral_quadrature(alpha, a, x0, x, panels)?;
    while panels < QUADRATURE_MAX_PANELS {
        panels *= 2;
        let next = rl_integral_quadrature(alpha, a, x0, x, panels)?;
        if (next - prev).norm() <= QUADRATURE_REL_TOL * next.norm() {
            return Ok(QuadratureValue {
                value: next,
                panels,
                converged: true,
            });
        }
        prev = next;
    }
    Ok(QuadratureValue {
        value: prev,
        panels,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml_core::h_series;
    use crate::special_fn::gamma;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn pol() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn power_rule_examples() {
        for alpha in [0.25, 0.5, 1.0 / 3.0, 1.0] {
            let d = rl_deriv_power(PowerTerm::new(c(1.0, 0.0), alpha), alpha).unwrap();
            assert_relative_eq!(d.coeff.re, gamma(alpha + 1.0).unwrap(), max_relative = 1e-14);
            assert!(d.exponent.abs() < 1e-15);

            let d = rl_deriv_power(PowerTerm::new(c(1.0, 0.0), alpha - 1.0), alpha).unwrap();
            assert_eq!(d.coeff, c(0.0, 0.0), "alpha {alpha}");
        }
        let d = rl_deriv_power(PowerTerm::new(c(1.0, 0.0), 0.5), 0.5).unwrap();
        assert_relative_eq!(d.coeff.re, 0.886_226_925_452_758, max_relative = 1e-15);
    }

    #[test]
    fn power_rule_domain() {
        let t = PowerTerm::new(c(1.0, 0.0), 0.5);
        assert!(rl_deriv_power(t, 0.0).is_err());
        assert!(rl_deriv_power(t, 1.5).is_err());
        assert!(rl_deriv_power(PowerTerm::new(c(1.0, 0.0), -1.0), 0.5).is_err());
    }

    #[test]
    fn termwise_examples() {
        let v = termwise_deriv_h(1.0, c(1.0, 0.0), 1, &pol()).unwrap();
        assert_relative_eq!(v.value.re, E, max_relative = 1e-14);
        for n in 1..=4 {
            let v = termwise_deriv_h(2.0, c(0.0, 0.0), n, &pol()).unwrap();
            assert_eq!(v.value, c(0.0, 0.0));
            assert!(v.converged);
        }
        let v = termwise_deriv_h(1.0, c(1.0, 0.0), 2, &pol()).unwrap();
        assert_relative_eq!(v.value.re, 5.573_169_664_310_039_8, max_relative = 1e-13);
    }

    #[test]
    fn index_shift_identity() {
        for n in 1..=5 {
            for rho in [c(0.5, 0.0), c(1.0, 0.0), c(1.0, 0.5)] {
                for x in [0.5, 1.0, 2.0] {
                    let d = termwise_deriv_h(x, rho, n, &pol()).unwrap();
                    let h = h_series(x, rho, n, &pol()).unwrap().value * rho;
                    let rel = (d.value - h).norm() / h.norm();
                    assert!(rel <= 5.0 * pol().rel_tol, "n={n} rho={rho} x={x}: {rel:e}");
                }
            }
        }
    }

    #[test]
    fn sequential_examples() {
        let o = RationalOrder::new(1, 3).unwrap();
        let a = sequential_deriv(1.5, c(0.7, 0.2), o, &pol()).unwrap();
        let b = termwise_deriv_h(1.5, c(0.7, 0.2), 3, &pol()).unwrap();
        assert_eq!(a.value, b.value);

        let v = sequential_deriv(1.0, c(1.0, 0.0), RationalOrder::new(1, 1).unwrap(), &pol()).unwrap();
        assert_relative_eq!(v.value.re, E, max_relative = 1e-14);

        let v = sequential_deriv(1.0, c(2.0, 0.0), RationalOrder::new(2, 3).unwrap(), &pol()).unwrap();
        let h = h_series(1.0, c(2.0_f64.sqrt(), 0.0), 3, &pol()).unwrap();
        assert!(v.converged);
        assert!((v.value - h.value * 2.0).norm() <= 1e-13 * 2.0 * h.value.norm());
    }

    #[test]
    fn sequential_does_not_stop_on_annihilated_terms() {
        // m = 3 kills three leading terms, as many as consecutive_below
        let o = RationalOrder::new(3, 4).unwrap();
        let v = sequential_deriv(1.0, c(1.0, 0.0), o, &pol()).unwrap();
        assert!(v.value.norm() > 1.0);
        assert!(v.converged);
    }

    #[test]
    fn integral_examples() {
        for alpha in [0.25, 0.5, 1.0] {
            let v = rl_integral_exp(alpha, c(0.0, 0.0), 0.5, 2.0, &pol()).unwrap();
            let want = 1.5_f64.powf(alpha) * recip_gamma(alpha + 1.0);
            assert_relative_eq!(v.value.re, want, max_relative = 1e-15);
        }
        for a in [c(1.0, 0.0), c(-2.0, 0.0), c(0.5, 1.0)] {
            let v = rl_integral_exp(1.0, a, 0.3, 1.7, &pol()).unwrap();
            let want = ((a * 1.7).exp() - (a * 0.3).exp()) / a;
            assert!((v.value - want).norm() <= 1e-14 * want.norm());
        }
        let v = rl_integral_exp(0.5, c(1.0, 0.0), 2.0, 2.0, &pol()).unwrap();
        assert_eq!(v.value, c(0.0, 0.0));
        assert!(rl_integral_exp(0.5, c(1.0, 0.0), 2.0, 1.0, &pol()).is_err());
        assert!(rl_integral_exp(0.0, c(1.0, 0.0), 1.0, 2.0, &pol()).is_err());
    }

    #[test]
    fn quadrature_examples() {
        for alpha in [0.25, 0.5, 0.75, 1.0] {
            let q = rl_integral_quadrature_auto(alpha, c(0.0, 0.0), 0.5, 2.0).unwrap();
            let want = 1.5_f64.powf(alpha) * recip_gamma(alpha + 1.0);
            assert!((q.value.re - want).abs() <= 1e-10);
        }
        let q = rl_integral_quadrature_auto(1.0, c(1.0, 0.0), 0.0, 1.0).unwrap();
        assert!((q.value.re - (E - 1.0)).abs() <= 1e-10);

        let q = rl_integral_quadrature_auto(0.5, c(1.0, 0.0), 0.5, 2.0).unwrap();
        let s = rl_integral_exp(0.5, c(1.0, 0.0), 0.5, 2.0, &pol()).unwrap();
        assert!(q.converged);
        assert!((q.value - s.value).norm() <= 1e-8 * s.value.norm());

        assert!(rl_integral_quadrature(0.5, c(1.0, 0.0), 1.0, 1.0, 4).is_err());
        assert!(rl_integral_quadrature(0.5, c(1.0, 0.0), 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn semigroup_at_zero_rate() {
        // I^alpha I^alpha 1 = I^{2 alpha} 1 = (x-x0)^{2 alpha} / Gamma(2 alpha + 1)
        for alpha in [0.25, 0.5] {
            let (x0, x) = (0.2, 1.9);
            let once = rl_integral_exp(2.0 * alpha, c(0.0, 0.0), x0, x, &pol()).unwrap();
            let twice = (x - x0).powf(2.0 * alpha) * recip_gamma(2.0 * alpha + 1.0);
            assert!((once.value.re - twice).abs() <= 1e-10);
        }
    }
}
