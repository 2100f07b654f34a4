//! The `sepdim` command line: table reproduction, witness and probe
//! certificates, decompositions, the G-invariant reduction and state
//! checks.

pub mod report;
pub mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use sepdim::decomp::{self, Decomposition};
use sepdim::dim::{self, ProbeConfig, DEFAULT_BOX, DEFAULT_TRIALS};
use sepdim::io::{self, AnyDecomposition, AnyState, JsonScalar};
use sepdim::tensor::{self, PSD_TOL};
use sepdim::{Error, HermitianOp, Scalar, SubsetMask, SystemShape};

use report::Row;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "sepdim", version, about = "Dimensions of sets of separable states, with certificates")]
pub struct Cli {
    /// Seed for probing and randomized steps.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Probing trials per (shape, r).
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Coordinates of random points lie in [-B, B].
    #[arg(long = "box", global = true, default_value_t = DEFAULT_BOX)]
    pub box_bound: i64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Relative tolerance for float PSD checks.
    #[arg(long, global = true, default_value_t = PSD_TOL)]
    pub tol: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    #[value(name = "2xN", alias = "2xn")]
    TwoByN,
    Realify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Psd,
    Ppt,
    Ginv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certified dim S'_r against the embedded table (all rows by default).
    Table1 {
        #[arg(long = "shape", value_parser = parse_shape_arg)]
        shapes: Vec<SystemShape>,
    },
    /// Certified lower bounds for dim S^G_r (all rows by default).
    Table2 {
        #[arg(long = "shape", value_parser = parse_shape_arg)]
        shapes: Vec<SystemShape>,
    },
    /// Exact Jacobian ranks at an explicit witness point: `2xN` (with --n)
    /// or `3x4`.
    Witness {
        name: String,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Randomized certified lower bound on a cone dimension.
    Probe {
        #[arg(long, value_parser = parse_shape_arg)]
        shape: SystemShape,
        #[arg(long)]
        r: usize,
        /// Restrict to real vectors.
        #[arg(long)]
        real: bool,
    },
    /// Recompute the rank stored in a certificate file.
    Verify { file: PathBuf },
    /// Jacobian ranks of C -> C^dagger C at the built-in points.
    Cholesky,
    /// Random separable state with its decomposition.
    Sample {
        #[arg(long, value_parser = parse_shape_arg)]
        shape: SystemShape,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        real: bool,
        /// Gaussian-rational entries instead of floats.
        #[arg(long)]
        exact: bool,
    },
    /// `2xN`: state file to rank-many real product terms. `realify`:
    /// decomposition file to real product terms.
    Decompose {
        file: PathBuf,
        #[arg(long, value_enum)]
        alg: Algorithm,
    },
    /// Embed a state into a G-invariant state on doubled dimensions.
    Reduce {
        file: PathBuf,
        /// Skip the PPT precondition.
        #[arg(long)]
        allow_npt: bool,
    },
    /// Inverse of `reduce`.
    Recover { file: PathBuf },
    /// Predicate checks on a state file.
    Check {
        #[arg(value_enum)]
        what: CheckKind,
        file: PathBuf,
    },
}

fn parse_shape_arg(s: &str) -> Result<SystemShape, String> {
    io::parse_shape(s).map_err(|e| e.to_string())
}

/// Failure of a command, with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable or malformed input (exit 2).
    Input(String),
    /// A mathematical precondition or check failed (exit 1).
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Contract(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Contract(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidShape(_)
            | Error::OutOfRange(_)
            | Error::DimensionMismatch { .. }
            | Error::Malformed(_)
            | Error::NotDoubled { .. } => CliError::Input(e.to_string()),
            other => CliError::Contract(other.to_string()),
        }
    }
}

/// Rendered output and exit code of a successful run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub body: String,
    pub code: i32,
}

impl Output {
    fn ok(body: String) -> Self {
        Self { body, code: 0 }
    }
}

/// Caps the global thread pool with `SEPDIM_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("SEPDIM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Reads a file; a `sample` bundle yields its `key` member.
fn read_part(path: &Path, key: &str) -> Result<String, CliError> {
    let text = read(path)?;
    if let Ok(Value::Object(obj)) = serde_json::from_str::<Value>(&text) {
        if let Some(part) = obj.get(key) {
            return Ok(part.to_string());
        }
    }
    Ok(text)
}

fn pretty(v: &Value) -> String {
    io::to_pretty(v)
}

fn probe_config(cli: &Cli) -> ProbeConfig {
    ProbeConfig {
        trials: cli.trials,
        box_bound: cli.box_bound,
        seed: cli.seed,
    }
}

fn render_rows(format: Format, table: &str, rows: &[Row]) -> String {
    match format {
        Format::Json => pretty(&report::rows_to_json(table, rows)),
        Format::Csv => report::rows_to_csv(rows),
        Format::Text => report::rows_to_text(rows),
    }
}

/// Runs one parsed command.
pub fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Table1 { shapes } => {
            let shapes: Vec<SystemShape> = if shapes.is_empty() {
                tables::TABLE1
                    .iter()
                    .map(|r| SystemShape::new(r.dims.to_vec()).expect("table shapes are valid"))
                    .collect()
            } else {
                shapes.clone()
            };
            let rows = report::table1_many(&shapes, probe_config(cli))?;
            let code = i32::from(report::has_hard_failure(&rows));
            Ok(Output {
                body: render_rows(cli.format, "1", &rows),
                code,
            })
        }
        Command::Table2 { shapes } => {
            let pairs: Vec<(usize, usize)> = if shapes.is_empty() {
                tables::TABLE2.iter().map(|r| (r.m, r.n)).collect()
            } else {
                shapes
                    .iter()
                    .map(|s| match s.dims() {
                        [m, n] => Ok((*m, *n)),
                        _ => Err(CliError::Input(format!("table2 needs a bipartite shape, got {s}"))),
                    })
                    .collect::<Result<_, _>>()?
            };
            let rows = report::table2_many(&pairs, probe_config(cli))?;
            let code = i32::from(report::has_hard_failure(&rows));
            Ok(Output {
                body: render_rows(cli.format, "2", &rows),
                code,
            })
        }
        Command::Witness { name, n } => witness(cli, name, *n),
        Command::Probe { shape, r, real } => {
            let cert = dim::probe_cone_dim(shape, *r, *real, probe_config(cli))?;
            let body = match cli.format {
                Format::Json => pretty(&io::certificate_to_value(&cert)),
                Format::Csv | Format::Text => {
                    let row = Row {
                        shape: cert.shape.clone(),
                        r: cert.r,
                        real: cert.real_restricted,
                        rank: cert.jacobian_rank,
                        bound: cert.upper_bound,
                        saturated: cert.saturated,
                        seed: cert.seed,
                        expected: None,
                        status: report::Status::NoExpectation,
                    };
                    render_rows(cli.format, "probe", &[row])
                }
            };
            Ok(Output::ok(body))
        }
        Command::Verify { file } => {
            let cert = io::parse_certificate(&read(file)?)?;
            let ok = cert.verify()?;
            let body = match cli.format {
                Format::Json => pretty(&json!({ "verified": ok, "jacobian_rank": cert.jacobian_rank })),
                _ => format!("{}\n", if ok { "verified" } else { "mismatch" }),
            };
            Ok(Output {
                body,
                code: i32::from(!ok),
            })
        }
        Command::Cholesky => {
            let mut items = Vec::new();
            let mut all_ok = true;
            for (n, r) in [(2, 3), (3, 3), (3, 4), (3, 5)] {
                let c = dim::cholesky_certificate(n, r)?;
                all_ok &= c.certified_dim().is_some();
                items.push(c);
            }
            let body = match cli.format {
                Format::Json => pretty(&Value::Array(
                    items
                        .iter()
                        .map(|c| {
                            json!({
                                "n": c.n, "r": c.r, "jacobian_rank": c.jacobian_rank,
                                "full_rank": c.full_rank, "ppt": c.ppt,
                                "certified_dim": c.certified_dim(),
                            })
                        })
                        .collect(),
                )),
                Format::Csv => {
                    let mut s = String::from("n,r,jacobian_rank,full_rank,ppt\n");
                    for c in &items {
                        s.push_str(&format!("{},{},{},{},{}\n", c.n, c.r, c.jacobian_rank, c.full_rank, c.ppt));
                    }
                    s
                }
                Format::Text => items
                    .iter()
                    .map(|c| {
                        format!(
                            "2x{} r={}: rank {} of {}, {}\n",
                            c.n,
                            c.r,
                            c.jacobian_rank,
                            c.full_rank,
                            if c.ppt { "PPT" } else { "NPT" }
                        )
                    })
                    .collect(),
            };
            Ok(Output {
                body,
                code: i32::from(!all_ok),
            })
        }
        Command::Sample { shape, r, real, exact } => {
            let v = if *exact {
                let (rho, dec) = decomp::sample_separable::<sepdim::GaussRat>(shape, *r, cli.seed, *real)?;
                sample_value(&rho, &dec)
            } else {
                let (rho, dec) = decomp::sample_separable::<Complex64>(shape, *r, cli.seed, *real)?;
                sample_value(&rho, &dec)
            };
            Ok(Output::ok(pretty(&v)))
        }
        Command::Decompose { file, alg } => {
            let v = match alg {
                Algorithm::TwoByN => match io::parse_state(&read_part(file, "state")?)? {
                    AnyState::Exact(rho) => io::decomposition_to_value(&decomp::decompose_2xn_g_invariant(&rho, cli.seed)?),
                    AnyState::Float(rho) => io::decomposition_to_value(&decomp::decompose_2xn_g_invariant(&rho, cli.seed)?),
                },
                Algorithm::Realify => match io::parse_decomposition(&read_part(file, "decomposition")?)? {
                    AnyDecomposition::Exact(d) => io::decomposition_to_value(&decomp::realify(&d)?),
                    AnyDecomposition::Float(d) => io::decomposition_to_value(&decomp::realify(&d)?),
                },
            };
            Ok(Output::ok(pretty(&v)))
        }
        Command::Reduce { file, allow_npt } => {
            let v = match io::parse_state(&read_part(file, "state")?)? {
                AnyState::Exact(rho) => io::state_to_value(&decomp::reduce_to_g_invariant(&rho, !allow_npt)?),
                AnyState::Float(rho) => io::state_to_value(&decomp::reduce_to_g_invariant(&rho, !allow_npt)?),
            };
            Ok(Output::ok(pretty(&v)))
        }
        Command::Recover { file } => {
            let v = match io::parse_state(&read_part(file, "state")?)? {
                AnyState::Exact(s) => io::state_to_value(&decomp::recover(&s)?),
                AnyState::Float(s) => io::state_to_value(&decomp::recover(&s)?),
            };
            Ok(Output::ok(pretty(&v)))
        }
        Command::Check { what, file } => {
            let state = io::parse_state(&read_part(file, "state")?)?;
            let result = match &state {
                AnyState::Exact(r) => check(*what, r, cli.tol),
                AnyState::Float(r) => check(*what, r, cli.tol),
            };
            let label = match (what, result) {
                (CheckKind::Psd, true) => "PSD",
                (CheckKind::Psd, false) => "not PSD",
                (CheckKind::Ppt, true) => "PPT",
                (CheckKind::Ppt, false) => "NPT",
                (CheckKind::Ginv, true) => "G-invariant",
                (CheckKind::Ginv, false) => "not G-invariant",
            };
            let body = match cli.format {
                Format::Json => pretty(&json!({ "check": format!("{what:?}").to_lowercase(), "result": result, "label": label })),
                _ => format!("{label}\n"),
            };
            Ok(Output::ok(body))
        }
    }
}

fn sample_value<S: JsonScalar>(rho: &HermitianOp<S>, dec: &Decomposition<S>) -> Value {
    json!({
        "state": io::state_to_value(rho),
        "decomposition": io::decomposition_to_value(dec),
    })
}

fn check<S: Scalar>(what: CheckKind, rho: &HermitianOp<S>, tol: f64) -> bool {
    match what {
        CheckKind::Psd => tensor::is_psd_with_tol(rho, tol),
        CheckKind::Ppt => SubsetMask::all(rho.shape().n())
            .all(|m| tensor::is_psd_with_tol(&tensor::partial_transpose(rho, m), tol)),
        CheckKind::Ginv => tensor::is_g_invariant(rho),
    }
}

fn witness(cli: &Cli, name: &str, n: Option<usize>) -> Result<Output, CliError> {
    let lower = name.to_ascii_lowercase();
    let (label, point, expected): (String, _, Vec<usize>) = if lower == "3x4" {
        let p = dim::witness_3x4();
        let shape = p.shape().clone();
        let exp = (1..=p.r()).map(|r| dim::cone_upper_bound(&shape, r)).collect();
        ("3x4".to_string(), p, exp)
    } else {
        let n = match (lower.as_str(), n) {
            ("2xn", Some(n)) => n,
            ("2xn", None) => return Err(CliError::Input("witness 2xN needs --n".into())),
            (other, _) => other
                .strip_prefix("2x")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| CliError::Input(format!("unknown witness {name:?}; use 2xN or 3x4")))?,
        };
        let p = dim::witness_2xn(n).map_err(|e| CliError::Input(e.to_string()))?;
        let exp = (1..=2 * n).map(|r| dim::witness_2xn_expected_rank(n, r)).collect();
        (format!("2x{n}"), p, exp)
    };
    let ranks = dim::jacobian_rank_profile(&point, false)?;
    let shape = point.shape().clone();
    let bounds: Vec<usize> = (1..=point.r()).map(|r| dim::cone_upper_bound(&shape, r)).collect();
    let matches = ranks == expected;
    let body = match cli.format {
        Format::Json => pretty(&json!({
            "witness": label,
            "shape": shape.dims(),
            "mode": "complex",
            "ranks": ranks,
            "bounds": bounds,
            "expected": expected,
            "matches": matches,
            "point": io::point_to_value(&point),
        })),
        Format::Csv | Format::Text => {
            let rows: Vec<Row> = ranks
                .iter()
                .enumerate()
                .map(|(k, &rank)| Row {
                    shape: shape.clone(),
                    r: k + 1,
                    real: false,
                    rank,
                    bound: bounds[k],
                    saturated: rank == bounds[k],
                    seed: 0,
                    expected: Some(expected[k].saturating_sub(1)),
                    status: if rank == expected[k] {
                        report::Status::Match
                    } else if rank < expected[k] {
                        report::Status::Unsaturated
                    } else {
                        report::Status::AboveTable
                    },
                })
                .collect();
            render_rows(cli.format, "witness", &rows)
        }
    };
    Ok(Output {
        body,
        code: i32::from(!matches),
    })
}

/// Writes the output to `--out` or stdout.
pub fn emit(cli: &Cli, out: &Output) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => fs::write(path, &out.body)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{}", out.body);
            Ok(())
        }
    }
}
