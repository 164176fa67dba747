//! Library side of the `mlexp` command-line tool.
//!
//! [`parse_args`] turns an argument vector into a validated [`CliRequest`];
//! [`run`] executes it and returns the rendered output together with the
//! process exit code. The binary is a thin wrapper around [`run_argv`].

// `!(a > b)` comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod format;

use std::fmt::Write as _;

use mlexp::analysis::{study, StudyReport};
use mlexp::validation::{run_suite, CheckOutcome};
use mlexp::{h_exp, h_series, h_via_decomposition, ComplexScalar, SeriesValue};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub use args::{parse_args, CliRequest, CommandKind, Format, Grid, Method, Param, UsageError};
use format::{fmt_complex, fmt_num};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Column order of `eval` and `table` CSV output.
pub const CSV_HEADER: [&str; 11] = [
    "x",
    "x0",
    "n",
    "m",
    "lambda_re",
    "lambda_im",
    "method",
    "value_re",
    "value_im",
    "terms_used",
    "converged",
];

/// Column order of `study` CSV output.
pub const STUDY_CSV_HEADER: [&str; 13] = [
    "x",
    "x0",
    "n",
    "m",
    "lambda_re",
    "lambda_im",
    "series_re",
    "series_im",
    "repr_re",
    "repr_im",
    "abs_err",
    "rel_err",
    "converged",
];

/// Result of running a request: rendered output and exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    /// Main output; written to `--out` when given, otherwise to stdout.
    pub output: String,
    /// Diagnostics for stderr.
    pub messages: String,
}

impl Outcome {
    fn new(code: i32, output: String, messages: String) -> Self {
        Self { code, output, messages }
    }

    fn fail(messages: String) -> Self {
        Self::new(EXIT_FAILURE, String::new(), messages)
    }
}

/// Parses and runs `argv`, writing `--out` files as requested.
pub fn run_argv<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let req = match parse_args(argv) {
        Ok(r) => r,
        Err(UsageError::Info(text)) => return Outcome::new(EXIT_OK, text, String::new()),
        Err(e @ UsageError::Clap(_)) => return Outcome::new(EXIT_USAGE, String::new(), e.to_string()),
        Err(e) => return Outcome::new(EXIT_USAGE, String::new(), format!("error: {e}\n")),
    };
    let mut out = run(&req);
    if let Some(path) = &req.out {
        if let Err(e) = std::fs::write(path, &out.output) {
            out.messages
                .push_str(&format!("error: cannot write {}: {e}\n", path.display()));
            out.code = EXIT_FAILURE;
        }
        out.output.clear();
    }
    out
}

/// Executes a validated request.
pub fn run(req: &CliRequest) -> Outcome {
    match req.command {
        CommandKind::Eval => run_eval(req),
        CommandKind::Table => run_table(req),
        CommandKind::Validate => run_validate(req),
        CommandKind::Study => run_study(req),
    }
}

/// Evaluates `h` at `x` with the requested method.
pub fn evaluate(req: &CliRequest, x: f64) -> mlexp::Result<SeriesValue> {
    let n = req.order.n();
    match req.method {
        Method::Series => h_series(x, req.rho, n, &req.policy),
        Method::Decomposition => h_via_decomposition(x, req.rho, n, &req.policy),
        Method::Repr => {
            let x0 = req.x0.ok_or_else(|| mlexp::Error::Domain("repr needs x0".into()))?;
            h_exp(x, x0, req.rho, n, &req.policy)
        }
    }
}

fn params_json(req: &CliRequest) -> Value {
    let complex = |z: ComplexScalar| json!({ "re": z.re, "im": z.im });
    let command = match req.command {
        CommandKind::Eval => "eval",
        CommandKind::Table => "table",
        CommandKind::Validate => "validate",
        CommandKind::Study => "study",
    };
    let mut p = json!({
        "command": command,
        "n": req.order.n(),
        "m": req.order.m(),
        "lambda": complex(req.lambda),
        "rho": complex(req.rho),
        "method": req.method,
        "policy": req.policy,
    });
    if let Some(x0) = req.x0 {
        p["x0"] = json!(x0);
    }
    if let Some(g) = req.grid {
        p["grid"] = json!({ "start": g.start, "end": g.end, "points": g.points });
    }
    if !req.x0_seq.is_empty() {
        p["x0_seq"] = json!(req.x0_seq);
    }
    p
}

fn render_json(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// One evaluated point of `eval` or `table`.
#[derive(Debug, Clone, Serialize)]
struct PointRow {
    x: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<SeriesValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl PointRow {
    fn ok(&self) -> bool {
        self.value.is_some_and(|v| v.converged)
    }
}

fn point(req: &CliRequest, x: f64) -> PointRow {
    match evaluate(req, x) {
        Ok(v) => PointRow {
            x,
            value: Some(v),
            error: None,
        },
        Err(e) => PointRow {
            x,
            value: None,
            error: Some(e.to_string()),
        },
    }
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new())
}

fn csv_finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory CSV writer cannot fail");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

fn points_csv(req: &CliRequest, rows: &[PointRow]) -> String {
    let mut w = csv_writer();
    w.write_record(CSV_HEADER).expect("in-memory write");
    let x0 = req
        .x0
        .filter(|_| req.method == Method::Repr)
        .map(fmt_num)
        .unwrap_or_default();
    for r in rows {
        let (v, terms, conv) = match r.value {
            Some(v) => (v.value, v.terms_used, v.converged),
            None => (ComplexScalar::new(f64::NAN, f64::NAN), 0, false),
        };
        w.write_record([
            fmt_num(r.x),
            x0.clone(),
            req.order.n().to_string(),
            req.order.m().to_string(),
            fmt_num(req.lambda.re),
            fmt_num(req.lambda.im),
            req.method.name().to_string(),
            fmt_num(v.re),
            fmt_num(v.im),
            terms.to_string(),
            conv.to_string(),
        ])
        .expect("in-memory write");
    }
    csv_finish(w)
}

fn failure_messages(rows: &[PointRow]) -> String {
    let mut msg = String::new();
    for r in rows {
        match (&r.value, &r.error) {
            (_, Some(e)) => writeln!(msg, "error at x = {}: {e}", fmt_num(r.x)).unwrap(),
            (Some(v), None) if !v.converged => writeln!(
                msg,
                "error at x = {}: series did not converge within {} terms (last term {})",
                fmt_num(r.x),
                v.terms_used,
                fmt_num(v.last_term_mag)
            )
            .unwrap(),
            _ => {}
        }
    }
    msg
}

fn run_eval(req: &CliRequest) -> Outcome {
    let x = req.x.expect("validated by parse_args");
    let row = point(req, x);
    let code = if row.ok() { EXIT_OK } else { EXIT_FAILURE };
    let messages = failure_messages(std::slice::from_ref(&row));
    let output = match req.format {
        Format::Text => match &row.value {
            Some(v) => {
                let mut s = String::new();
                writeln!(s, "{}", fmt_complex(v.value)).unwrap();
                writeln!(s, "order: {}", req.order).unwrap();
                writeln!(s, "lambda: {}", fmt_complex(req.lambda)).unwrap();
                writeln!(s, "rho: {}", fmt_complex(req.rho)).unwrap();
                writeln!(s, "x: {}", fmt_num(x)).unwrap();
                if req.method == Method::Repr {
                    writeln!(s, "x0: {}", fmt_num(req.x0.unwrap_or(f64::NAN))).unwrap();
                }
                writeln!(s, "method: {}", req.method.name()).unwrap();
                writeln!(s, "terms_used: {}", v.terms_used).unwrap();
                writeln!(s, "last_term: {}", fmt_num(v.last_term_mag)).unwrap();
                writeln!(s, "converged: {}", v.converged).unwrap();
                s
            }
            None => String::new(),
        },
        Format::Csv => points_csv(req, std::slice::from_ref(&row)),
        Format::Json => render_json(&json!({
            "params": params_json(req),
            "rows": [row],
            "diagnostics": { "converged": row.ok() },
        })),
    };
    Outcome::new(code, output, messages)
}

fn run_table(req: &CliRequest) -> Outcome {
    let xs = req.grid.expect("validated by parse_args").values();
    let rows: Vec<PointRow> = xs.par_iter().map(|&x| point(req, x)).collect();
    let failed = rows.iter().filter(|r| !r.ok()).count();
    let code = if failed == 0 { EXIT_OK } else { EXIT_FAILURE };
    let output = match req.format {
        Format::Text => {
            let mut s = String::new();
            writeln!(
                s,
                "# order {} lambda {} method {}",
                req.order,
                fmt_complex(req.lambda),
                req.method.name()
            )
            .unwrap();
            writeln!(s, "{:>24} {:>48} {:>6} {:>9}", "x", "value", "terms", "converged").unwrap();
            for r in &rows {
                match (&r.value, &r.error) {
                    (Some(v), _) => writeln!(
                        s,
                        "{:>24} {:>48} {:>6} {:>9}",
                        fmt_num(r.x),
                        fmt_complex(v.value),
                        v.terms_used,
                        v.converged
                    )
                    .unwrap(),
                    (None, e) => writeln!(s, "{:>24} error: {}", fmt_num(r.x), e.as_deref().unwrap_or("")).unwrap(),
                }
            }
            s
        }
        Format::Csv => points_csv(req, &rows),
        Format::Json => render_json(&json!({
            "params": params_json(req),
            "rows": rows,
            "diagnostics": { "points": rows.len(), "failed": failed },
        })),
    };
    Outcome::new(code, output, failure_messages(&rows))
}

fn run_validate(req: &CliRequest) -> Outcome {
    let start = std::time::Instant::now();
    let outcomes = run_suite(req.suite, &req.policy);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let failed: Vec<&CheckOutcome> = outcomes.iter().filter(|o| !o.passed).collect();
    let code = if failed.is_empty() { EXIT_OK } else { EXIT_FAILURE };
    let mut messages = String::new();
    for o in &failed {
        writeln!(messages, "check failed: {}: {}", o.name, o.detail).unwrap();
    }
    let output = match req.format {
        Format::Text => {
            let mut s = String::new();
            for o in &outcomes {
                writeln!(
                    s,
                    "{} {:<14} worst {:<24} tol {:<8} cases {:<5} {:>9.1} ms  {}",
                    if o.passed { "PASS" } else { "FAIL" },
                    o.name,
                    fmt_num(o.worst),
                    fmt_num(o.tolerance),
                    o.cases,
                    o.elapsed_ms,
                    o.detail
                )
                .unwrap();
            }
            writeln!(
                s,
                "{} of {} checks passed",
                outcomes.len() - failed.len(),
                outcomes.len()
            )
            .unwrap();
            s
        }
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(["check", "passed", "cases", "worst", "tolerance", "elapsed_ms", "detail"])
                .expect("in-memory write");
            for o in &outcomes {
                w.write_record([
                    o.name.to_string(),
                    o.passed.to_string(),
                    o.cases.to_string(),
                    fmt_num(o.worst),
                    fmt_num(o.tolerance),
                    fmt_num(o.elapsed_ms),
                    o.detail.clone(),
                ])
                .expect("in-memory write");
            }
            csv_finish(w)
        }
        Format::Json => render_json(&json!({
            "params": { "command": "validate", "suite": suite_name(req), "policy": req.policy },
            "rows": outcomes,
            "diagnostics": {
                "passed": failed.is_empty(),
                "failed": failed.iter().map(|o| o.name).collect::<Vec<_>>(),
                "elapsed_ms": elapsed_ms,
            },
        })),
    };
    Outcome::new(code, output, messages)
}

fn suite_name(req: &CliRequest) -> String {
    match req.suite {
        mlexp::validation::Suite::All => "all".to_string(),
        mlexp::validation::Suite::One(c) => c.name().to_string(),
    }
}

fn run_study(req: &CliRequest) -> Outcome {
    let x = req.x.expect("validated by parse_args");
    let report: StudyReport = match study(req.order.n(), req.rho, x, &req.x0_seq, &req.policy) {
        Ok(r) => r,
        Err(e) => return Outcome::fail(format!("error: {e}\n")),
    };
    let mut messages = String::new();
    for r in report.rows.iter().filter(|r| !r.is_ok()) {
        let why = r.error.clone().unwrap_or_else(|| "series did not converge".to_string());
        writeln!(messages, "error at x0 = {}: {why}", fmt_num(r.x0)).unwrap();
    }
    let code = if messages.is_empty() { EXIT_OK } else { EXIT_FAILURE };
    let order_text = report.estimated_order.map(fmt_num).unwrap_or_else(|| "n/a".to_string());
    let output = match req.format {
        Format::Text => {
            let mut s = String::new();
            writeln!(
                s,
                "# order {} lambda {} x {}",
                req.order,
                fmt_complex(req.lambda),
                fmt_num(x)
            )
            .unwrap();
            writeln!(
                s,
                "{:>12} {:>26} {:>26} {:>12}",
                "x0", "abs_err", "rel_err", "converged"
            )
            .unwrap();
            for r in &report.rows {
                writeln!(
                    s,
                    "{:>12} {:>26} {:>26} {:>12}",
                    fmt_num(r.x0),
                    fmt_num(r.abs_err),
                    fmt_num(r.rel_err),
                    r.converged
                )
                .unwrap();
            }
            writeln!(s, "estimated order: {order_text}").unwrap();
            writeln!(s, "monotone: {}", report.monotone).unwrap();
            s
        }
        Format::Csv => {
            let mut w = csv_writer();
            w.write_record(STUDY_CSV_HEADER).expect("in-memory write");
            for r in &report.rows {
                w.write_record([
                    fmt_num(r.x),
                    fmt_num(r.x0),
                    req.order.n().to_string(),
                    req.order.m().to_string(),
                    fmt_num(req.lambda.re),
                    fmt_num(req.lambda.im),
                    fmt_num(r.series_value.re),
                    fmt_num(r.series_value.im),
                    fmt_num(r.repr_value.re),
                    fmt_num(r.repr_value.im),
                    fmt_num(r.abs_err),
                    fmt_num(r.rel_err),
                    r.converged.to_string(),
                ])
                .expect("in-memory write");
            }
            csv_finish(w)
        }
        Format::Json => render_json(&json!({
            "params": params_json(req),
            "rows": report.rows,
            "diagnostics": {
                "estimated_order": report.estimated_order,
                "monotone": report.monotone,
            },
        })),
    };
    Outcome::new(code, output, messages)
}
