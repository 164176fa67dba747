//! Exponential-function representation of the shifted Mittag-Leffler
//! function.
//!
//! Each column sub-series is rebuilt from its fractional derivative
//! `D^{(s+1)/n} J_s = a e^{a x}` (with `a = rho^n`) by integrating from the
//! shift `x0` and adding the homogeneous term:
//!
//! ```text
//! J_s(x) = a e^{a x} / Gamma(b) * sum_k (-a)^k / k! * (x - x0)^{b+k} / (b+k)
//!        + e^{a x0} x^{b-1} / Gamma(b),                      b = (s+1)/n
//! h(x)   = sum_{s<n} rho^s J_s(x)
//! ```
//!
//! For `n = 1` this reproduces `e^{rho x}` exactly for every `x0`. For
//! `n > 1` it differs from the defining series by a term that vanishes as
//! `x0 -> 0`; see [`crate::analysis`].

use serde::Serialize;

use crate::error::{domain, Result};
use crate::frac_ops::rl_integral_exp_parts;
use crate::ml_core::RationalOrder;
use crate::series::{Accumulator, SeriesValue, TruncationPolicy};
use crate::special_fn::{complex_exp, ensure_finite, principal_pow, principal_root, recip_gamma, ComplexScalar};
use crate::twofold::ComplexTwofold;

/// Parameters of the `lambda` form of the representation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReprParams {
    pub x0: f64,
    pub order: RationalOrder,
    #[serde(skip)]
    pub lambda: ComplexScalar,
    pub policy: TruncationPolicy,
}

impl ReprParams {
    pub fn new(x0: f64, order: RationalOrder, lambda: ComplexScalar, policy: TruncationPolicy) -> Result<Self> {
        if !(x0 > 0.0) || !x0.is_finite() {
            return domain(format!("shift x0 must be positive, got {x0}"));
        }
        ensure_finite(lambda, "lambda")?;
        policy.validate()?;
        Ok(Self {
            x0,
            order,
            lambda,
            policy,
        })
    }

    pub fn evaluate(&self, x: f64) -> Result<SeriesValue> {
        h_exp_lambda(x, self.x0, self.lambda, self.order, &self.policy)
    }
}

fn check_index(s: u32, n: u32) -> Result<()> {
    if n == 0 {
        return domain("n must be positive");
    }
    if s >= n {
        return domain(format!("sub-series index s = {s} outside 0..{n}"));
    }
    Ok(())
}

fn check_limits(x: f64, x0: f64) -> Result<()> {
    if !(x0 > 0.0) || !x0.is_finite() {
        return domain(format!("shift x0 must be positive, got {x0}"));
    }
    if !(x >= x0) || !x.is_finite() {
        return domain(format!("representation requires x >= x0, got x = {x}, x0 = {x0}"));
    }
    Ok(())
}

fn sub_order(s: u32, n: u32) -> f64 {
    f64::from(s + 1) / f64::from(n)
}

/// Homogeneous term `e^{rho^n x0} x^{b-1} / Gamma(b)`, `b = (s+1)/n`.
pub fn homogeneous_term(s: u32, x: f64, x0: f64, rho: ComplexScalar, n: u32) -> Result<ComplexScalar> {
    check_index(s, n)?;
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("homogeneous term requires x > 0, got {x}"));
    }
    ensure_finite(rho, "rho")?;
    let b = sub_order(s, n);
    let a = ensure_finite(rho.powu(n), "rho^n")?;
    let shift = complex_exp(a * x0)?;
    ensure_finite(shift * (x.powf(b - 1.0) * recip_gamma(b)), "homogeneous term")
}

/// Exponential representation of `J_s(x, rho^n)`.
pub fn j_exp(s: u32, x: f64, x0: f64, rho: ComplexScalar, n: u32, policy: &TruncationPolicy) -> Result<SeriesValue> {
    let (mut out, sum) = j_exp_twofold(s, x, x0, rho, n, policy)?;
    out.value = ensure_finite(sum.to_complex(), "J_s representation")?;
    Ok(out)
}

/// `J_s` with the final `a * prefactor * inner + homogeneous` combination
/// done in twofold arithmetic, so exact identities survive rounding.
fn j_exp_twofold(
    s: u32,
    x: f64,
    x0: f64,
    rho: ComplexScalar,
    n: u32,
    policy: &TruncationPolicy,
) -> Result<(SeriesValue, ComplexTwofold)> {
    check_index(s, n)?;
    check_limits(x, x0)?;
    let homogeneous = homogeneous_term(s, x, x0, rho, n)?;
    let homogeneous_tf = ComplexTwofold::from_complex(homogeneous);
    let a = rho.powu(n);
    if x == x0 || a == ComplexScalar::new(0.0, 0.0) {
        return Ok((SeriesValue::exact(homogeneous), homogeneous_tf));
    }
    let (inner, sum, prefactor) = rl_integral_exp_parts(sub_order(s, n), a, x0, x, policy)?;
    let scale = ComplexTwofold::from_complex(prefactor) * ComplexTwofold::from_complex(a);
    let total = sum * scale + homogeneous_tf;
    let integral = inner.scaled(prefactor * a);
    let out = SeriesValue {
        value: ensure_finite(total.to_complex(), "J_s representation")?,
        ..integral
    };
    Ok((out, total))
}

/// Exponential representation of `h_{1/n}(x, rho)`.
pub fn h_exp(x: f64, x0: f64, rho: ComplexScalar, n: u32, policy: &TruncationPolicy) -> Result<SeriesValue> {
    if n == 0 {
        return domain("n must be positive");
    }
    check_limits(x, x0)?;
    ensure_finite(rho, "rho")?;
    let rho_tf = ComplexTwofold::from_complex(rho);
    let mut weight = ComplexTwofold::ONE;
    let mut total = ComplexTwofold::ZERO;
    let mut out = SeriesValue::exact(ComplexScalar::new(0.0, 0.0));
    for s in 0..n {
        let (v, sum) = j_exp_twofold(s, x, x0, rho, n, policy)?;
        total += weight * sum;
        out.terms_used = out.terms_used.max(v.terms_used);
        out.last_term_mag = out.last_term_mag.max(weight.norm() * v.last_term_mag);
        out.converged &= v.converged;
        weight = weight * rho_tf;
    }
    out.value = ensure_finite(total.to_complex(), "h representation")?;
    Ok(out)
}

/// Representation in terms of `lambda` for the derivative order `m/n`,
/// through `rho = lambda^{1/m}` (principal branch).
pub fn h_exp_lambda(
    x: f64,
    x0: f64,
    lambda: ComplexScalar,
    order: RationalOrder,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    let rho = principal_root(lambda, order.m())?;
    h_exp(x, x0, rho, order.n(), policy)
}

/// The `lambda` form written out with principal powers `lambda^{p/m}`
/// instead of powers of a precomputed root. Same formula as
/// [`h_exp_lambda`]; used to cross-check it.
pub fn h_exp_lambda_expanded(
    x: f64,
    x0: f64,
    lambda: ComplexScalar,
    order: RationalOrder,
    policy: &TruncationPolicy,
) -> Result<SeriesValue> {
    check_limits(x, x0)?;
    policy.validate()?;
    let (m, n) = (order.m(), order.n());
    let d = x - x0;
    let rate = principal_pow(lambda, n, m)?;
    let e_x = complex_exp(rate * x)?;
    let e_x0 = complex_exp(rate * x0)?;
    let mut out = SeriesValue::exact(ComplexScalar::new(0.0, 0.0));
    for s in 0..n {
        let b = sub_order(s, n);
        let rg = recip_gamma(b);
        out.value += principal_pow(lambda, s, m)? * e_x0 * (x.powf(b - 1.0) * rg);
        if d == 0.0 {
            continue;
        }
        let mut acc = Accumulator::new(policy);
        let mut inv_fact = 1.0;
        for k in 0..policy.max_terms as u32 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let term =
                principal_pow(lambda, n * k, m)? * (sign * inv_fact * d.powf(b + f64::from(k)) / (b + f64::from(k)));
            if acc.push(term) {
                break;
            }
            inv_fact /= f64::from(k + 1);
        }
        let inner = acc.finish("expanded representation series")?;
        let weight = principal_pow(lambda, s + n, m)? * e_x * rg;
        out.value += weight * inner.value;
        out.terms_used = out.terms_used.max(inner.terms_used);
        out.last_term_mag = out.last_term_mag.max(weight.norm() * inner.last_term_mag);
        out.converged &= inner.converged;
    }
    ensure_finite(out.value, "expanded representation")?;
    Ok(out)
}
