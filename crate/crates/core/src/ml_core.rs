//! Power-series evaluation of the shifted Mittag-Leffler function
//!
//! ```text
//! h_{1/n}(x, rho) = sum_k rho^k x^{(k+1)/n - 1} / Gamma((k+1)/n)
//! ```
//!
//! of its column sub-series
//!
//! ```text
//! J_s(x, a) = sum_k a^k x^{k + (s+1)/n - 1} / Gamma(k + (s+1)/n),  a = rho^n
//! ```
//!
//! and of the recombination `h = sum_{s<n} rho^s J_s(x, rho^n)`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::series::{Accumulator, SeriesValue, TruncationPolicy};
use crate::special_fn::{ensure_finite, log_gamma, recip_gamma, ComplexScalar};
use crate::twofold::ComplexTwofold;

/// Derivative order `m/n` in lowest terms with `1 <= m <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct RationalOrder {
    m: u32,
    n: u32,
}

impl RationalOrder {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        let invalid = |reason| Err(Error::InvalidOrder { m, n, reason });
        if m == 0 || n == 0 {
            return invalid("m and n must be positive");
        }
        if m > n {
            return invalid("m must not exceed n");
        }
        if gcd(m, n) != 1 {
            return invalid("m and n must be coprime");
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn as_f64(&self) -> f64 {
        f64::from(self.m) / f64::from(self.n)
    }
}

impl std::fmt::Display for RationalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.m, self.n)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Powers outside this window are folded into a log scale.
const POW_RESCALE_HI: f64 = 1e100;
const POW_RESCALE_LO: f64 = 1e-100;

/// Largest gamma argument evaluated directly rather than through logs.
const DIRECT_GAMMA_LIMIT: f64 = 160.0;

/// `x^{g-1} / Gamma(g)` as `(value, ln value)`; one of the two is used
/// depending on whether the caller carries a log scale.
fn power_over_gamma(x: f64, g: f64) -> Result<(f64, f64)> {
    let ln = (g - 1.0) * x.ln() - log_gamma(g)?;
    if g < DIRECT_GAMMA_LIMIT {
        let p = x.powf(g - 1.0);
        if p.is_normal() {
            return Ok((p * recip_gamma(g), ln));
        }
    }
    Ok((ln.exp(), ln))
}

/// `sum_k c^k x^{g_k - 1} / Gamma(g_k)` with `g_k = (base + k * step) / den`.
///
/// This is `x^{beta-1} E_{alpha,beta}(c x^alpha)` for `alpha = step/den`,
/// `beta = base/den`; both public series are instances of it. Powers of `c`
/// and the partial sums are carried in twofold precision; the unrounded sum
/// is returned alongside the diagnostics.
pub(crate) fn power_gamma_series(
    c: ComplexTwofold,
    x: f64,
    base: u64,
    step: u64,
    den: u64,
    policy: &TruncationPolicy,
) -> Result<(SeriesValue, ComplexTwofold)> {
    policy.validate()?;
    ensure_finite(c.to_complex(), "series parameter")?;
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("series requires finite x > 0, got {x}"));
    }
    let mut acc = Accumulator::new(policy);
    let mut pow = ComplexTwofold::ONE;
    let mut log_scale = 0.0_f64;
    for k in 0..policy.max_terms as u64 {
        let g = (base + k * step) as f64 / den as f64;
        let term = if pow.is_zero() {
            ComplexTwofold::ZERO
        } else {
            let (direct, ln) = power_over_gamma(x, g)?;
            if log_scale == 0.0 {
                pow.mul_f64(direct)
            } else {
                pow.mul_f64((log_scale + ln).exp())
            }
        };
        if acc.push_twofold(term) {
            break;
        }
        pow = pow * c;
        let mag = pow.norm();
        if mag > POW_RESCALE_HI || (mag < POW_RESCALE_LO && mag > 0.0) {
            // exact power-of-two rescaling keeps the low words meaningful
            let e = mag.log2().round();
            pow = pow.scale((-e).exp2());
            log_scale += e * std::f64::consts::LN_2;
        }
    }
    let sum = acc.sum();
    Ok((acc.finish("series sum")?, sum))
}

/// Direct evaluation of the defining series of `h_{1/n}(x, rho)`.
pub fn h_series(x: f64, rho: ComplexScalar, n: u32, policy: &TruncationPolicy) -> Result<SeriesValue> {
    if n == 0 {
        return domain("n must be positive");
    }
    ensure_finite(rho, "rho")?;
    let (v, _) = power_gamma_series(ComplexTwofold::from_complex(rho), x, 1, 1, u64::from(n), policy)?;
    Ok(v)
}

/// Column sub-series `J_s(x, a)`; `a` stands in for `rho^n`.
pub fn j_series(s: u32, x: f64, a: ComplexScalar, n: u32, policy: &TruncationPolicy) -> Result<SeriesValue> {
    if n == 0 {
        return domain("n must be positive");
    }
    if s >= n {
        return domain(format!("sub-series index s = {s} outside 0..{n}"));
    }
    ensure_finite(a, "a")?;
    let (v, _) = j_series_twofold(s, x, ComplexTwofold::from_complex(a), n, policy)?;
    Ok(v)
}

fn j_series_twofold(
    s: u32,
    x: f64,
    a: ComplexTwofold,
    n: u32,
    policy: &TruncationPolicy,
) -> Result<(SeriesValue, ComplexTwofold)> {
    let n = u64::from(n);
    power_gamma_series(a, x, u64::from(s) + 1, n, n, policy)
}

/// `h_{1/n}(x, rho)` as `sum_{s<n} rho^s J_s(x, rho^n)`.
pub fn h_via_decomposition(x: f64, rho: ComplexScalar, n: u32, policy: &TruncationPolicy) -> Result<SeriesValue> {
    if n == 0 {
        return domain("n must be positive");
    }
    ensure_finite(rho, "rho")?;
    ensure_finite(rho.powu(n), "rho^n")?;
    let rho_tf = ComplexTwofold::from_complex(rho);
    let a = rho_tf.powu(n);
    let mut total = ComplexTwofold::ZERO;
    let mut weight = ComplexTwofold::ONE;
    let mut out = SeriesValue::exact(ComplexScalar::new(0.0, 0.0));
    for s in 0..n {
        let (v, sum) = j_series_twofold(s, x, a, n, policy)?;
        total += weight * sum;
        out.terms_used = out.terms_used.max(v.terms_used);
        out.last_term_mag = out.last_term_mag.max(weight.norm() * v.last_term_mag);
        out.converged &= v.converged;
        weight = weight * rho_tf;
    }
    out.value = ensure_finite(total.to_complex(), "decomposition sum")?;
    Ok(out)
}
