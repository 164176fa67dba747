//! Series-versus-representation comparisons.
//!
//! The defining series is treated as ground truth throughout; the
//! exponential representation is the object under test.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::exp_repr::{h_exp, h_exp_lambda};
use crate::frac_ops::sequential_deriv;
use crate::ml_core::{h_series, RationalOrder};
use crate::series::{serialize_complex, TruncationPolicy};
use crate::special_fn::{complex_exp, ComplexScalar};

/// Floor for relative-error denominators.
pub const TINY: f64 = 1e-300;

/// Rows whose error is below this multiple of the truncation tolerance
/// (relative to the series value) are left out of order estimates.
pub const NOISE_FACTOR: f64 = 100.0;

/// One `(x, x0)` comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscrepancyRow {
    pub x: f64,
    pub x0: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub series_value: ComplexScalar,
    #[serde(serialize_with = "serialize_complex")]
    pub repr_value: ComplexScalar,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Both evaluations converged.
    pub converged: bool,
    /// Set when the row could not be evaluated.
    pub error: Option<String>,
}

impl DiscrepancyRow {
    fn compare(x: f64, x0: f64, series_value: ComplexScalar, repr_value: ComplexScalar, converged: bool) -> Self {
        let abs_err = (series_value - repr_value).norm();
        Self {
            x,
            x0,
            series_value,
            repr_value,
            abs_err,
            rel_err: abs_err / series_value.norm().max(TINY),
            converged,
            error: None,
        }
    }

    fn failed(x: f64, x0: f64, msg: String) -> Self {
        let nan = ComplexScalar::new(f64::NAN, f64::NAN);
        Self {
            x,
            x0,
            series_value: nan,
            repr_value: nan,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            converged: false,
            error: Some(msg),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.converged
    }
}

fn evaluate_row(n: u32, rho: ComplexScalar, x: f64, x0: f64, policy: &TruncationPolicy) -> DiscrepancyRow {
    if !(x0 > 0.0) || !(x >= x0) {
        return DiscrepancyRow::failed(x, x0, format!("requires x >= x0 > 0, got x = {x}, x0 = {x0}"));
    }
    let series = h_series(x, rho, n, policy);
    let repr = h_exp(x, x0, rho, n, policy);
    match (series, repr) {
        (Ok(s), Ok(r)) => DiscrepancyRow::compare(x, x0, s.value, r.value, s.converged && r.converged),
        (Err(e), _) | (_, Err(e)) => DiscrepancyRow::failed(x, x0, e.to_string()),
    }
}

/// One row per `(x, x0)` pair comparing `h_series` with `h_exp`.
///
/// Rows follow `xs` in input order and, within each `x`, `x0` in
/// descending order. Pairs that cannot be evaluated are kept as flagged
/// rows. Rows are evaluated in parallel; the ordering does not depend on
/// scheduling.
pub fn discrepancy_table(
    n: u32,
    rho: ComplexScalar,
    xs: &[f64],
    x0s: &[f64],
    policy: &TruncationPolicy,
) -> Result<Vec<DiscrepancyRow>> {
    if n == 0 {
        return domain("n must be positive");
    }
    policy.validate()?;
    let mut sorted = x0s.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let pairs: Vec<(f64, f64)> = xs.iter().flat_map(|&x| sorted.iter().map(move |&x0| (x, x0))).collect();
    Ok(pairs
        .par_iter()
        .map(|&(x, x0)| evaluate_row(n, rho, x, x0, policy))
        .collect())
}

/// Least-squares slope of `ln(abs_err)` against `ln(x0)`.
///
/// Rows within [`NOISE_FACTOR`] times the default truncation tolerance of
/// the series value are dropped first; at least three rows must remain.
pub fn convergence_order(rows: &[DiscrepancyRow]) -> Result<f64> {
    if rows.len() < 3 {
        return domain(format!("need at least 3 rows, got {}", rows.len()));
    }
    let x = rows[0].x;
    for pair in rows.windows(2) {
        if pair[1].x != x {
            return domain("rows must share the same x");
        }
        if !(pair[1].x0 < pair[0].x0) {
            return domain("x0 must be strictly decreasing");
        }
    }
    if let Some(r) = rows.iter().find(|r| r.error.is_some()) {
        return domain(format!(
            "row at x0 = {} failed: {}",
            r.x0,
            r.error.as_deref().unwrap_or("")
        ));
    }
    if rows.iter().any(|r| !(r.abs_err > 0.0)) {
        return domain("zero discrepancy: order undefined");
    }
    let floor_rel = NOISE_FACTOR * TruncationPolicy::default().rel_tol;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_err >= floor_rel * r.series_value.norm())
        .map(|r| (r.x0.ln(), r.abs_err.ln()))
        .collect();
    if points.len() < 3 {
        return domain("fewer than 3 rows above the truncation noise floor");
    }
    let len = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / len;
    let my = points.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Rows of a single-`x` study plus the fitted decay order in `x0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub rows: Vec<DiscrepancyRow>,
    /// `None` when fewer than three usable rows exist.
    pub estimated_order: Option<f64>,
    /// `abs_err` strictly decreases as `x0` decreases.
    pub monotone: bool,
}

pub fn study(n: u32, rho: ComplexScalar, x: f64, x0s: &[f64], policy: &TruncationPolicy) -> Result<StudyReport> {
    let rows = discrepancy_table(n, rho, &[x], x0s, policy)?;
    let monotone = rows.iter().all(DiscrepancyRow::is_ok) && rows.windows(2).all(|w| w[1].abs_err < w[0].abs_err);
    let estimated_order = convergence_order(&rows).ok();
    Ok(StudyReport {
        rows,
        estimated_order,
        monotone,
    })
}

/// `|D^{m/n} h - lambda h| / |lambda h|` at `rho = lambda^{1/m}`.
pub fn eigen_residual(x: f64, lambda: ComplexScalar, order: RationalOrder, policy: &TruncationPolicy) -> Result<f64> {
    if lambda == ComplexScalar::new(0.0, 0.0) {
        return domain("eigen residual is undefined at lambda = 0");
    }
    let rho = crate::special_fn::principal_root(lambda, order.m())?;
    let derived = sequential_deriv(x, lambda, order, policy)?;
    let h = h_series(x, rho, order.n(), policy)?;
    let target = h.value * lambda;
    Ok((derived.value - target).norm() / target.norm().max(TINY))
}

/// `|h_exp_lambda(x, x0, lambda, 1/1) - e^{lambda x}| / |e^{lambda x}|`.
pub fn alpha_one_check(x: f64, x0: f64, lambda: ComplexScalar, policy: &TruncationPolicy) -> Result<f64> {
    let one = RationalOrder::new(1, 1)?;
    let repr = h_exp_lambda(x, x0, lambda, one, policy)?;
    let exact = complex_exp(lambda * x)?;
    Ok((repr.value - exact).norm() / exact.norm().max(TINY))
}
