//! Argument parsing and validation into a [`CliRequest`].

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mlexp::validation::Suite;
use mlexp::{principal_root, ComplexScalar, RationalOrder, TruncationPolicy};
use thiserror::Error;

/// Largest number of points accepted in a `--grid`.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum UsageError {
    /// `--help` or `--version` output; not an error for the exit code.
    #[error("{0}")]
    Info(String),
    /// Rendered clap error (unknown flag, missing value, ...).
    #[error("{0}")]
    Clap(String),
    #[error("{flag}: {reason}")]
    Invalid { flag: &'static str, reason: String },
}

impl UsageError {
    fn invalid(flag: &'static str, reason: impl Into<String>) -> Self {
        UsageError::Invalid {
            flag,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mlexp",
    version,
    about = "Shifted Mittag-Leffler functions of rational order"
)]
struct Cli {
    #[command(subcommand)]
    command: RawCommand,
}

#[derive(Debug, Subcommand)]
enum RawCommand {
    /// Evaluate h at a single point
    Eval(RawArgs),
    /// Evaluate h over an x grid
    Table(RawArgs),
    /// Run the built-in numerical checks
    Validate(RawArgs),
    /// Compare series and representation over a sequence of shifts x0
    Study(RawArgs),
}

#[derive(Debug, Args)]
struct RawArgs {
    /// Denominator n of the order m/n
    #[arg(long = "n", default_value_t = 1)]
    n: u32,
    /// Numerator m of the order m/n
    #[arg(long = "m", default_value_t = 1)]
    m: u32,
    /// Eigenvalue lambda ("a", "a+bi", "bi"); rho = lambda^(1/m)
    #[arg(long, allow_hyphen_values = true, conflicts_with = "rho")]
    lambda: Option<String>,
    /// Series parameter rho given directly; lambda = rho^m
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Evaluation point
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    /// Shift of the representation
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// Comma-separated shifts for `study`
    #[arg(long = "x0-seq", allow_hyphen_values = true)]
    x0_seq: Option<String>,
    /// Evaluation grid start:end:points
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value_t = Method::Series)]
    method: Method,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    #[arg(long = "max-terms")]
    max_terms: Option<usize>,
    /// Checks run by `validate`: all or a single check name
    #[arg(long, default_value = "all")]
    suite: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Decomposition,
    Repr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Decomposition => "decomposition",
            Method::Repr => "repr",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "series" => Some(Method::Series),
            "decomposition" => Some(Method::Decomposition),
            "repr" => Some(Method::Repr),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// The subcommand being run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Eval,
    Table,
    Validate,
    Study,
}

/// `start:end:points`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.end - self.start) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.end
                } else {
                    self.start + step * i as f64
                }
            })
            .collect()
    }
}

/// How the series parameter was specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Param {
    Lambda(ComplexScalar),
    Rho(ComplexScalar),
}

/// A validated invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct CliRequest {
    pub command: CommandKind,
    pub order: RationalOrder,
    pub param: Param,
    /// `lambda` and `rho = lambda^{1/m}` resolved from `param`.
    pub lambda: ComplexScalar,
    pub rho: ComplexScalar,
    pub x: Option<f64>,
    pub grid: Option<Grid>,
    pub x0: Option<f64>,
    pub x0_seq: Vec<f64>,
    pub method: Method,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub policy: TruncationPolicy,
    pub suite: Suite,
}

/// Parses a complex number written as `a`, `a+bi`, `a-bi`, `bi` or `i`.
pub fn parse_complex(s: &str) -> Result<ComplexScalar, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse '{s}' as a complex number (expected a, a+bi or bi)");
    if t.is_empty() {
        return Err(bad());
    }
    let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
    let z = if let Some(body) = t.strip_suffix('i').or_else(|| t.strip_suffix('j')) {
        // split at the last sign that is not an exponent sign
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        let unit = |v: &str| match v {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => num(other),
        };
        match split {
            Some(k) => ComplexScalar::new(num(&body[..k])?, unit(&body[k..])?),
            None => ComplexScalar::new(0.0, unit(body)?),
        }
    } else {
        ComplexScalar::new(num(&t)?, 0.0)
    };
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(bad());
    }
    Ok(z)
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:end:points, got '{s}'"));
    }
    let start: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| format!("bad grid start '{}'", parts[0]))?;
    let end: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| format!("bad grid end '{}'", parts[1]))?;
    let points: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("bad grid point count '{}'", parts[2]))?;
    if !start.is_finite() || !end.is_finite() || !(start < end) {
        return Err(format!("grid needs finite start < end, got {start}:{end}"));
    }
    if !(2..=MAX_GRID_POINTS).contains(&points) {
        return Err(format!("grid points must lie in 2..={MAX_GRID_POINTS}, got {points}"));
    }
    Ok(Grid { start, end, points })
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| {
            let v = v.trim();
            v.parse::<f64>()
                .ok()
                .filter(|f| f.is_finite())
                .ok_or_else(|| format!("bad number '{v}' in list"))
        })
        .collect()
}

/// Parses `argv` (including the program name) into a validated request.
pub fn parse_args<I, T>(argv: I) -> Result<CliRequest, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => UsageError::Info(e.render().to_string()),
        _ => UsageError::Clap(e.render().to_string()),
    })?;
    let (command, raw) = match cli.command {
        RawCommand::Eval(a) => (CommandKind::Eval, a),
        RawCommand::Table(a) => (CommandKind::Table, a),
        RawCommand::Validate(a) => (CommandKind::Validate, a),
        RawCommand::Study(a) => (CommandKind::Study, a),
    };
    build_request(command, raw)
}

fn build_request(command: CommandKind, raw: RawArgs) -> Result<CliRequest, UsageError> {
    let order = RationalOrder::new(raw.m, raw.n).map_err(|e| UsageError::invalid("--m/--n", e.to_string()))?;

    let param = match (&raw.lambda, &raw.rho) {
        (_, Some(r)) => Param::Rho(parse_complex(r).map_err(|e| UsageError::invalid("--rho", e))?),
        (Some(l), None) => Param::Lambda(parse_complex(l).map_err(|e| UsageError::invalid("--lambda", e))?),
        (None, None) => Param::Lambda(ComplexScalar::new(1.0, 0.0)),
    };
    let (lambda, rho) = match param {
        Param::Lambda(l) => {
            let rho = principal_root(l, order.m()).map_err(|e| UsageError::invalid("--lambda", e.to_string()))?;
            (l, rho)
        }
        Param::Rho(r) => {
            let l = r.powu(order.m());
            if !l.re.is_finite() || !l.im.is_finite() {
                return Err(UsageError::invalid("--rho", "rho^m overflows"));
            }
            (l, r)
        }
    };

    let mut policy = TruncationPolicy::default();
    if let Some(t) = raw.rel_tol {
        policy = policy
            .with_rel_tol(t)
            .map_err(|e| UsageError::invalid("--rel-tol", e.to_string()))?;
    }
    if let Some(k) = raw.max_terms {
        policy = policy
            .with_max_terms(k)
            .map_err(|e| UsageError::invalid("--max-terms", e.to_string()))?;
    }

    let grid = raw
        .grid
        .as_deref()
        .map(parse_grid)
        .transpose()
        .map_err(|e| UsageError::invalid("--grid", e))?;
    let x0_seq = raw
        .x0_seq
        .as_deref()
        .map(parse_list)
        .transpose()
        .map_err(|e| UsageError::invalid("--x0-seq", e))?
        .unwrap_or_default();
    let suite = raw
        .suite
        .parse::<Suite>()
        .map_err(|e| UsageError::invalid("--suite", e))?;

    if let Some(x) = raw.x {
        if !(x > 0.0) || !x.is_finite() {
            return Err(UsageError::invalid("--x", format!("x must be positive, got {x}")));
        }
    }
    if let Some(x0) = raw.x0 {
        if !(x0 > 0.0) || !x0.is_finite() {
            return Err(UsageError::invalid("--x0", format!("x0 must be positive, got {x0}")));
        }
    }
    if x0_seq.iter().any(|&v| !(v > 0.0)) {
        return Err(UsageError::invalid("--x0-seq", "every shift must be positive"));
    }

    match command {
        CommandKind::Eval => {
            let x = raw.x.ok_or_else(|| UsageError::invalid("--x", "eval requires --x"))?;
            if raw.method == Method::Repr {
                let x0 = raw
                    .x0
                    .ok_or_else(|| UsageError::invalid("--x0", "--method repr requires --x0"))?;
                if x < x0 {
                    return Err(UsageError::invalid("--x0", format!("x0 = {x0} exceeds x = {x}")));
                }
            }
        }
        CommandKind::Table => {
            let g = grid.ok_or_else(|| UsageError::invalid("--grid", "table requires --grid start:end:points"))?;
            if !(g.start > 0.0) {
                return Err(UsageError::invalid("--grid", "grid must lie in x > 0"));
            }
            if raw.method == Method::Repr {
                let x0 = raw
                    .x0
                    .ok_or_else(|| UsageError::invalid("--x0", "--method repr requires --x0"))?;
                if g.start < x0 {
                    return Err(UsageError::invalid(
                        "--x0",
                        format!("x0 = {x0} exceeds grid start {}", g.start),
                    ));
                }
            }
        }
        CommandKind::Study => {
            raw.x.ok_or_else(|| UsageError::invalid("--x", "study requires --x"))?;
            if x0_seq.is_empty() {
                return Err(UsageError::invalid("--x0-seq", "study requires --x0-seq"));
            }
        }
        CommandKind::Validate => {}
    }

    Ok(CliRequest {
        command,
        order,
        param,
        lambda,
        rho,
        x: raw.x,
        grid,
        x0: raw.x0,
        x0_seq,
        method: raw.method,
        format: raw.format,
        out: raw.out,
        policy,
        suite,
    })
}
