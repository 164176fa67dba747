//! Truncation policy and the shared stopping rule for every infinite series
//! in the crate.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::special_fn::{ensure_finite, ComplexScalar};
use crate::twofold::ComplexTwofold;

/// Tolerances and term caps applied to each series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_terms: usize,
    /// Number of successive small terms required before stopping.
    pub consecutive_below: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            abs_tol: 1e-300,
            max_terms: 600,
            consecutive_below: 3,
        }
    }
}

impl TruncationPolicy {
    pub fn new(rel_tol: f64, abs_tol: f64, max_terms: usize, consecutive_below: usize) -> Result<Self> {
        let p = Self {
            rel_tol,
            abs_tol,
            max_terms,
            consecutive_below,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Result<Self> {
        Self::new(rel_tol, self.abs_tol, self.max_terms, self.consecutive_below)
    }

    pub fn with_max_terms(self, max_terms: usize) -> Result<Self> {
        Self::new(self.rel_tol, self.abs_tol, max_terms, self.consecutive_below)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return domain(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.abs_tol >= 0.0) || !self.abs_tol.is_finite() {
            return domain(format!("abs_tol must be non-negative, got {}", self.abs_tol));
        }
        if self.max_terms < 10 {
            return domain(format!("max_terms must be at least 10, got {}", self.max_terms));
        }
        if self.consecutive_below < 1 {
            return domain("consecutive_below must be at least 1");
        }
        Ok(())
    }
}

/// A series value together with its convergence diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesValue {
    #[serde(serialize_with = "serialize_complex")]
    pub value: ComplexScalar,
    pub terms_used: usize,
    pub last_term_mag: f64,
    pub converged: bool,
}

impl SeriesValue {
    /// A value that needed no summation (closed form, empty series).
    pub fn exact(value: ComplexScalar) -> Self {
        Self {
            value,
            terms_used: 0,
            last_term_mag: 0.0,
            converged: true,
        }
    }

    /// Scale the value, keeping the diagnostics.
    pub fn scaled(self, factor: ComplexScalar) -> Self {
        Self {
            value: self.value * factor,
            last_term_mag: self.last_term_mag * factor.norm(),
            ..self
        }
    }
}

pub(crate) fn serialize_complex<S: serde::Serializer>(z: &ComplexScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

/// Running sum implementing the stopping rule: a term is small when
/// `|term| <= rel_tol * |sum| + abs_tol`, and the series is converged once
/// `consecutive_below` successive terms are small.
///
/// The running sum is kept in twofold precision.
#[derive(Debug)]
pub(crate) struct Accumulator {
    policy: TruncationPolicy,
    sum: ComplexTwofold,
    terms: usize,
    run: usize,
    last_mag: f64,
}

impl Accumulator {
    pub(crate) fn new(policy: &TruncationPolicy) -> Self {
        Self {
            policy: *policy,
            sum: ComplexTwofold::ZERO,
            terms: 0,
            run: 0,
            last_mag: f64::INFINITY,
        }
    }

    /// Adds a term; returns `true` once the series may stop.
    pub(crate) fn push(&mut self, term: ComplexScalar) -> bool {
        self.push_twofold(ComplexTwofold::from_complex(term))
    }

    pub(crate) fn push_twofold(&mut self, term: ComplexTwofold) -> bool {
        self.sum += term;
        self.terms += 1;
        self.last_mag = term.norm();
        if self.last_mag <= self.policy.rel_tol * self.sum.norm() + self.policy.abs_tol {
            self.run += 1;
        } else {
            self.run = 0;
        }
        self.done()
    }

    /// Counts a term that is zero by construction without letting it
    /// advance the stopping rule.
    pub(crate) fn push_structural_zero(&mut self) -> bool {
        self.terms += 1;
        self.terms >= self.policy.max_terms
    }

    pub(crate) fn done(&self) -> bool {
        self.converged() || self.terms >= self.policy.max_terms
    }

    pub(crate) fn converged(&self) -> bool {
        self.run >= self.policy.consecutive_below
    }

    /// The unrounded sum, for callers that keep combining.
    pub(crate) fn sum(&self) -> ComplexTwofold {
        self.sum
    }

    pub(crate) fn finish(self, what: &str) -> Result<SeriesValue> {
        let value = ensure_finite(self.sum.to_complex(), what)?;
        Ok(SeriesValue {
            value,
            terms_used: self.terms,
            last_term_mag: if self.terms == 0 { 0.0 } else { self.last_mag },
            converged: self.converged(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::default().validate().is_ok());
        assert!(TruncationPolicy::new(0.0, 0.0, 600, 3).is_err());
        assert!(TruncationPolicy::new(1e-10, 0.0, 9, 3).is_err());
        assert!(TruncationPolicy::new(1e-10, 0.0, 10, 0).is_err());
        assert!(TruncationPolicy::new(f64::NAN, 0.0, 10, 1).is_err());
    }

    #[test]
    fn geometric_series_stops() {
        let policy = TruncationPolicy::default();
        let mut acc = Accumulator::new(&policy);
        let mut t = 1.0;
        while !acc.push(ComplexScalar::new(t, 0.0)) {
            t *= 0.5;
        }
        let v = acc.finish("geometric").unwrap();
        assert!(v.converged);
        assert!((v.value.re - 2.0).abs() <= 4e-14);
        assert!(v.terms_used < 60);
    }

    #[test]
    fn cap_reached_is_flagged() {
        let policy = TruncationPolicy::new(1e-14, 0.0, 10, 3).unwrap();
        let mut acc = Accumulator::new(&policy);
        while !acc.push(ComplexScalar::new(1.0, 0.0)) {}
        let v = acc.finish("ones").unwrap();
        assert!(!v.converged);
        assert_eq!(v.terms_used, 10);
    }

    #[test]
    fn single_small_term_does_not_stop() {
        let policy = TruncationPolicy::default();
        let mut acc = Accumulator::new(&policy);
        assert!(!acc.push(ComplexScalar::new(1.0, 0.0)));
        assert!(!acc.push(ComplexScalar::new(0.0, 0.0)));
        assert!(!acc.push(ComplexScalar::new(0.0, 0.0)));
        assert!(!acc.push(ComplexScalar::new(5.0, 0.0)));
    }

    #[test]
    fn overflow_is_an_error() {
        let policy = TruncationPolicy::default();
        let mut acc = Accumulator::new(&policy);
        acc.push(ComplexScalar::new(f64::MAX, 0.0));
        acc.push(ComplexScalar::new(f64::MAX, 0.0));
        assert!(acc.finish("huge").is_err());
    }
}
