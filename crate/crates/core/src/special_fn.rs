//! Real-argument gamma machinery and the handful of complex helpers the
//! series code needs.
//!
//! The reciprocal gamma function is the primitive used wherever a
//! factorial sits in a denominator: it is total, and vanishes exactly at
//! the non-positive integers, so `1/(-1)! = 0` needs no special casing
//! downstream.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Complex scalar used for every function value and for the parameters
/// `rho` and `lambda`.
pub type ComplexScalar = Complex64;

/// Largest argument for which `gamma` is finite in double precision.
pub const GAMMA_MAX_ARG: f64 = 171.0;

/// Largest real part accepted by [`complex_exp`].
pub const EXP_MAX_RE: f64 = 700.0;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_PI: f64 = 1.772_453_850_905_516;

fn is_nonpositive_integer(z: f64) -> bool {
    z <= 0.0 && z == z.floor()
}

/// sin(pi z) with argument reduction, exact zeros at integers.
fn sin_pi(z: f64) -> f64 {
    if z == z.floor() {
        return 0.0;
    }
    // reduce to [-1, 1]
    let mut r = z % 2.0;
    if r > 1.0 {
        r -= 2.0;
    } else if r < -1.0 {
        r += 2.0;
    }
    if r == 0.5 {
        1.0
    } else if r == -0.5 {
        -1.0
    } else {
        (PI * r).sin()
    }
}

/// Lanczos sum for `z >= 0.5`; returns `(t, w, x)` with `x = z - 1` and
/// `w = x + g + 1/2`.
fn lanczos_parts(z: f64) -> (f64, f64, f64) {
    let x = z - 1.0;
    let mut t = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        t += c / (x + i as f64);
    }
    (t, x + LANCZOS_G + 0.5, x)
}

/// Exact-ish fast paths: positive integers (factorial) and positive
/// half-integers (`sqrt(pi)` times a product).
fn gamma_special(z: f64) -> Option<f64> {
    if z <= 0.0 || z > GAMMA_MAX_ARG {
        return None;
    }
    if z == z.floor() {
        let mut acc = 1.0;
        let mut k = 2.0;
        while k < z {
            acc *= k;
            k += 1.0;
        }
        return Some(acc);
    }
    let twice = 2.0 * z;
    if twice == twice.floor() {
        let mut acc = SQRT_PI;
        let mut k = 0.5;
        while k < z {
            acc *= k;
            k += 1.0;
        }
        return Some(acc);
    }
    None
}

fn gamma_lanczos(z: f64) -> f64 {
    let (t, w, x) = lanczos_parts(z);
    // split the power so large arguments do not overflow before e^{-w}
    let half = w.powf(0.5 * (x + 0.5));
    (2.0 * PI).sqrt() * (half * (-w).exp()) * half * t
}

/// The gamma function for real arguments.
///
/// Positive integers and half-integers take exact product paths; other
/// arguments use a Lanczos approximation (g = 7, nine coefficients) with
/// reflection below 1/2.
pub fn gamma(z: f64) -> Result<f64> {
    if z.is_nan() {
        return domain("gamma of NaN");
    }
    if is_nonpositive_integer(z) {
        return Err(Error::Pole(z));
    }
    if z > GAMMA_MAX_ARG {
        return Err(Error::Overflow(format!("gamma({z}) exceeds double range")));
    }
    if let Some(v) = gamma_special(z) {
        return Ok(v);
    }
    if z < 0.5 {
        let s = sin_pi(z);
        let reflected = 1.0 - z;
        if reflected > GAMMA_MAX_ARG {
            // Gamma(1 - z) overflows, so Gamma(z) underflows towards zero
            let mag = (PI.ln() - s.abs().ln() - log_gamma(reflected)?).exp();
            return Ok(mag.copysign(s));
        }
        return Ok(PI / (s * gamma(reflected)?));
    }
    Ok(gamma_lanczos(z))
}

/// `1 / Gamma(z)`, defined everywhere.
///
/// Returns exactly `0.0` at the poles `0, -1, -2, ...`. Large positive
/// arguments underflow gracefully to zero. Below about `-171` the true value
/// exceeds the double range and the result is infinite.
pub fn recip_gamma(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if is_nonpositive_integer(z) {
        return 0.0;
    }
    if z > GAMMA_MAX_ARG {
        return match log_gamma(z) {
            Ok(lg) => (-lg).exp(),
            Err(_) => 0.0,
        };
    }
    if z < 0.5 && 1.0 - z > GAMMA_MAX_ARG {
        // 1/Gamma(z) = sin(pi z) Gamma(1 - z) / pi
        let s = sin_pi(z);
        let lg = log_gamma(1.0 - z).unwrap_or(f64::INFINITY);
        return (lg + s.abs().ln() - PI.ln()).exp().copysign(s);
    }
    match gamma(z) {
        Ok(g) => 1.0 / g,
        Err(_) => 0.0,
    }
}

/// Natural logarithm of `Gamma(z)` for `z > 0`.
pub fn log_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return domain(format!("log_gamma requires z > 0, got {z}"));
    }
    if z.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if z < 1e-300 {
        return Ok(-z.ln());
    }
    if z < 15.0 {
        return Ok(gamma(z)?.ln());
    }
    let (t, w, x) = lanczos_parts(z);
    Ok(LN_SQRT_2PI + (x + 0.5) * w.ln() - w + t.ln())
}

/// `Gamma(a) / Gamma(b)` without intermediate overflow.
///
/// Zero whenever `b` is a pole (the reciprocal-gamma convention).
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Ok(0.0);
    }
    if a == b {
        return Ok(1.0);
    }
    if a <= GAMMA_MAX_ARG && b <= GAMMA_MAX_ARG {
        return Ok(gamma(a)? * recip_gamma(b));
    }
    if a > 0.0 && b > 0.0 {
        let r = (log_gamma(a)? - log_gamma(b)?).exp();
        if r.is_infinite() {
            return Err(Error::Overflow(format!("Gamma({a})/Gamma({b})")));
        }
        return Ok(r);
    }
    let r = gamma(a)? * recip_gamma(b);
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::Overflow(format!("Gamma({a})/Gamma({b})")))
    }
}

/// Principal argument in `(-pi, pi]`; a negative zero imaginary part does
/// not flip the negative real axis to `-pi`.
pub fn principal_arg(z: ComplexScalar) -> f64 {
    if z.im == 0.0 {
        if z.re < 0.0 {
            PI
        } else {
            0.0
        }
    } else {
        z.im.atan2(z.re)
    }
}

fn real_root(r: f64, m: u32) -> f64 {
    match m {
        1 => r,
        2 => r.sqrt(),
        3 => r.cbrt(),
        _ => r.powf(1.0 / f64::from(m)),
    }
}

/// Principal `m`-th root: modulus `|lambda|^(1/m)`, argument `Arg(lambda)/m`.
pub fn principal_root(lambda: ComplexScalar, m: u32) -> Result<ComplexScalar> {
    if m == 0 {
        return domain("principal_root requires m >= 1");
    }
    ensure_finite(lambda, "principal_root argument")?;
    if lambda == ComplexScalar::new(0.0, 0.0) {
        return Ok(ComplexScalar::new(0.0, 0.0));
    }
    if m == 1 {
        return Ok(lambda);
    }
    let r = real_root(lambda.norm(), m);
    let theta = principal_arg(lambda) / f64::from(m);
    if theta == 0.0 {
        return Ok(ComplexScalar::new(r, 0.0));
    }
    Ok(ComplexScalar::from_polar(r, theta))
}

/// Principal power `lambda^(p/q) = exp((p/q) Log lambda)`, with `0^0 = 1`.
pub fn principal_pow(lambda: ComplexScalar, p: u32, q: u32) -> Result<ComplexScalar> {
    if q == 0 {
        return domain("principal_pow requires a positive denominator");
    }
    ensure_finite(lambda, "principal_pow argument")?;
    if p == 0 {
        return Ok(ComplexScalar::new(1.0, 0.0));
    }
    if lambda == ComplexScalar::new(0.0, 0.0) {
        return Ok(lambda);
    }
    let e = f64::from(p) / f64::from(q);
    let r = lambda.norm().powf(e);
    let theta = principal_arg(lambda) * e;
    let v = if theta == 0.0 {
        ComplexScalar::new(r, 0.0)
    } else {
        ComplexScalar::from_polar(r, theta)
    };
    ensure_finite(v, "principal_pow result")
}

/// `e^z` with an overflow guard on the real part.
pub fn complex_exp(z: ComplexScalar) -> Result<ComplexScalar> {
    ensure_finite(z, "complex_exp argument")?;
    if z.re > EXP_MAX_RE {
        return Err(Error::Overflow(format!("exp of real part {}", z.re)));
    }
    let mag = z.re.exp();
    if z.im == 0.0 {
        return Ok(ComplexScalar::new(mag, 0.0));
    }
    Ok(ComplexScalar::new(mag * z.im.cos(), mag * z.im.sin()))
}

/// Rejects NaN and infinite components.
pub fn ensure_finite(z: ComplexScalar, what: &str) -> Result<ComplexScalar> {
    if z.re.is_nan() || z.im.is_nan() {
        return domain(format!("{what} is NaN"));
    }
    if z.re.is_infinite() || z.im.is_infinite() {
        return Err(Error::Overflow(format!("{what} is infinite")));
    }
    Ok(z)
}
