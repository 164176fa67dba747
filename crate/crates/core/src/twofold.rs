//! Double-double ("twofold") real and complex numbers.
//!
//! Only what the series code needs: error-free sums and products, used to
//! carry running powers and partial sums at about 32 significant digits.
//! Term magnitudes in the Mittag-Leffler series can exceed the final value
//! by several orders of magnitude, and plain double accumulation would
//! surface that cancellation in the result.

use std::ops::{Add, AddAssign, Mul, Neg};

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twofold {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Twofold {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        if !hi.is_finite() {
            return Self { hi, lo: 0.0 };
        }
        Self { hi, lo }
    }

    /// Multiplies by an exact power of two.
    pub fn scale(self, factor: f64) -> Self {
        Self {
            hi: self.hi * factor,
            lo: self.lo * factor,
        }
    }
}

impl Add for Twofold {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        if !hi.is_finite() {
            return Self { hi, lo: 0.0 };
        }
        Self { hi, lo }
    }
}

impl Neg for Twofold {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Mul for Twofold {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        if !hi.is_finite() {
            return Self { hi, lo: 0.0 };
        }
        Self { hi, lo }
    }
}

/// Complex number with twofold components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexTwofold {
    pub re: Twofold,
    pub im: Twofold,
}

impl ComplexTwofold {
    pub const ZERO: Self = Self {
        re: Twofold::ZERO,
        im: Twofold::ZERO,
    };
    pub const ONE: Self = Self {
        re: Twofold { hi: 1.0, lo: 0.0 },
        im: Twofold::ZERO,
    };

    pub fn from_complex(z: Complex64) -> Self {
        Self {
            re: Twofold::from_f64(z.re),
            im: Twofold::from_f64(z.im),
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.hi == 0.0 && self.im.hi == 0.0
    }

    /// Modulus of the leading parts.
    pub fn norm(&self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }

    pub fn mul_f64(self, b: f64) -> Self {
        Self {
            re: self.re.mul_f64(b),
            im: self.im.mul_f64(b),
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        Self {
            re: self.re.scale(factor),
            im: self.im.scale(factor),
        }
    }

    pub fn powu(self, n: u32) -> Self {
        let mut out = Self::ONE;
        for _ in 0..n {
            out = out * self;
        }
        out
    }
}

impl Add for ComplexTwofold {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        Self {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl AddAssign for ComplexTwofold {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl Mul for ComplexTwofold {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        Self {
            re: self.re * b.re + -(self.im * b.im),
            im: self.re * b.im + self.im * b.re,
        }
    }
}
