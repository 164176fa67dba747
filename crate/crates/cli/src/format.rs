//! Number formatting shared by every output format.
//!
//! All numbers are written with Rust's shortest round-trip representation,
//! so parsing the printed text gives back the exact `f64`.

use mlexp::ComplexScalar;

/// Plain decimal for moderate magnitudes, scientific notation otherwise.
pub fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Real values print as a bare number; complex ones as `a+bi` / `a-bi`.
pub fn fmt_complex(z: ComplexScalar) -> String {
    if z.im == 0.0 {
        return fmt_num(z.re);
    }
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{sign}{}i", fmt_num(z.re), fmt_num(z.im.abs()))
}
