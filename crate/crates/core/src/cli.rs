//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed property or computation error, 2 file
//! access, 3 parse or validation, 4 dimension mismatch, 5 tensor cap.
//! Argument errors reported by the parser itself also exit with 2.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{chernoff_rate_experiment, RateEntry};
use crate::chernoff::chernoff_distance;
use crate::error::Error;
use crate::extended::ExtendedReal;
use crate::hoeffding::{critical_points, hoeffding_curve, stein_rate, CriticalPoints, ExponentPoint};
use crate::linalg::{CMatrix, C64};
use crate::mapping::ns_map;
use crate::states::{random_density, validate_density, DensityMatrix, Priors};
use crate::verify::{
    check_appendix, check_chain, check_convexity_concavity, check_tensor_counterexample,
    check_trace_inequality, VerificationReport, DEFAULT_TRIALS,
};

/// On-disk state: `{"dim": d, "matrix": [[[re, im], ...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            dim: m.nrows(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, CliError> {
        if self.matrix.len() != self.dim || self.matrix.iter().any(|row| row.len() != self.dim) {
            return Err(CliError::Parse(format!(
                "matrix is not {0}×{0} as declared by \"dim\"",
                self.dim
            )));
        }
        Ok(CMatrix::from_fn(self.dim, self.dim, |i, j| {
            let [re, im] = self.matrix[i][j];
            C64::new(re, im)
        }))
    }
}

#[derive(Debug)]
pub enum CliError {
    File(String),
    Parse(String),
    Dimension(String),
    Cap(String),
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failure(_) => 1,
            CliError::File(_) => 2,
            CliError::Parse(_) => 3,
            CliError::Dimension(_) => 4,
            CliError::Cap(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::File(m)
            | CliError::Parse(m)
            | CliError::Dimension(m)
            | CliError::Cap(m)
            | CliError::Failure(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::DimensionMismatch(..) => CliError::Dimension(msg),
            Error::DimensionCapExceeded { .. } => CliError::Cap(msg),
            _ => CliError::Failure(msg),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qht", version, about = "Quantum hypothesis testing: Chernoff distance, Hoeffding exponents, Stein rates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    TraceInequality,
    Chain,
    Appendix,
    TensorCounterexample,
    Convexity,
    All,
}

#[derive(Args, Debug)]
struct PairArgs {
    /// State file of the null hypothesis.
    #[arg(long)]
    rho: PathBuf,
    /// State file of the alternative hypothesis.
    #[arg(long)]
    sigma: PathBuf,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chernoff distance, minimizing s and the Q_s curve.
    Chernoff {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Quantum error-exponent curve e_Q(r) with its critical points.
    Hoeffding {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0.0)]
        r_min: f64,
        /// Defaults to 1.5 times the start of the plateau.
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact n-copy error probabilities with finite-n bounds.
    Simulate {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0.5)]
        pi0: f64,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Randomized inequality suites.
    Verify {
        #[arg(value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Comma-separated dimensions to sample from.
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        dims: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classical pair (p, q) of a state pair.
    Map {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Stein rate S(ρ‖σ).
    Stein {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Writes a seeded random state file.
    Random {
        #[arg(long)]
        dim: usize,
        /// Defaults to full rank.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-reads a state file, validates it and writes it back out.
    Dump {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

pub fn load_state(path: &Path) -> Result<DensityMatrix, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::File(format!("cannot read {}: {e}", path.display())))?;
    let file: StateFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    validate_density(file.to_matrix()?)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_pair(pair: &PairArgs) -> Result<(DensityMatrix, DensityMatrix), CliError> {
    Ok((load_state(&pair.rho)?, load_state(&pair.sigma)?))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::File(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::File(format!("cannot write output: {e}")))
        }
    }
}

/// Shortest round-trip decimal form, `inf` for infinity.
fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else {
        format!("{x:?}")
    }
}

fn ext(x: ExtendedReal) -> String {
    num(x.to_f64())
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn csv_text<F>(header: &[&str], fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Chernoff { pair, output } => cmd_chernoff(&pair, &output),
        Command::Hoeffding {
            pair,
            r_min,
            r_max,
            steps,
            output,
        } => cmd_hoeffding(&pair, r_min, r_max, steps, &output),
        Command::Simulate {
            pair,
            pi0,
            n_max,
            output,
        } => cmd_simulate(&pair, pi0, n_max, &output),
        Command::Verify {
            suite,
            trials,
            seed,
            dims,
            output,
        } => cmd_verify(suite, trials, seed, &dims, &output),
        Command::Map { pair, output } => cmd_map(&pair, &output),
        Command::Stein { pair, output } => cmd_stein(&pair, &output),
        Command::Random {
            dim,
            rank,
            seed,
            out,
        } => {
            let state = random_density(dim, rank.unwrap_or(dim), seed)?;
            emit(&out, &to_json(&StateFile::from_matrix(state.as_matrix())))?;
            Ok(0)
        }
        Command::Dump { rho, out } => {
            let state = load_state(&rho)?;
            emit(&out, &to_json(&StateFile::from_matrix(state.as_matrix())))?;
            Ok(0)
        }
    }
}

fn cmd_chernoff(pair: &PairArgs, output: &OutputArgs) -> Result<i32, CliError> {
    let (rho, sigma) = load_pair(pair)?;
    let res = chernoff_distance(&rho, &sigma)?;
    let text = match output.format.unwrap_or(Format::Table) {
        Format::Json => to_json(&res),
        Format::Csv => {
            let mut head = String::new();
            writeln!(head, "# q_star={}", num(res.q_star)).unwrap();
            writeln!(head, "# xi_qcb={}", ext(res.xi_qcb)).unwrap();
            writeln!(head, "# s_star={}", num(res.s_star)).unwrap();
            head + &csv_text(&["s", "q_s"], |w| {
                res.curve
                    .iter()
                    .try_for_each(|&(s, q)| w.write_record([num(s), num(q)]))
            })
        }
        Format::Table => {
            let mut t = String::new();
            writeln!(t, "q_star   {}", num(res.q_star)).unwrap();
            writeln!(t, "xi_qcb   {}", ext(res.xi_qcb)).unwrap();
            writeln!(t, "s_star   {}", num(res.s_star)).unwrap();
            t
        }
    };
    emit(&output.out, &text)?;
    Ok(0)
}

fn default_r_max(cps: &CriticalPoints) -> f64 {
    1.5 * cps.s_sigma_rho.max(-cps.psi1.ln()).max(0.1)
}

fn cmd_hoeffding(
    pair: &PairArgs,
    r_min: f64,
    r_max: Option<f64>,
    steps: usize,
    output: &OutputArgs,
) -> Result<i32, CliError> {
    let (rho, sigma) = load_pair(pair)?;
    let cps = critical_points(&rho, &sigma)?;
    let r_max = r_max.unwrap_or_else(|| default_r_max(&cps).max(r_min));
    let curve = hoeffding_curve(&rho, &sigma, r_min, r_max, steps)?;
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&json!({ "critical_points": cps, "curve": curve })),
        Format::Csv => {
            let mut head = String::new();
            writeln!(head, "# psi0={}", num(cps.psi0)).unwrap();
            writeln!(head, "# psi1={}", num(cps.psi1)).unwrap();
            writeln!(head, "# s_sigma_rho={}", num(cps.s_sigma_rho)).unwrap();
            writeln!(head, "# s_rho_sigma={}", num(cps.s_rho_sigma)).unwrap();
            head + &csv_text(&["r", "e_q", "s_achieving"], |w| {
                curve.iter().try_for_each(|p: &ExponentPoint| {
                    w.write_record([num(p.r), ext(p.value), opt(p.s_achieving)])
                })
            })
        }
        Format::Table => {
            let mut t = String::new();
            writeln!(t, "psi0 {}  psi1 {}", num(cps.psi0), num(cps.psi1)).unwrap();
            writeln!(
                t,
                "S_sigma(rho||sigma) {}  S_rho(sigma||rho) {}",
                num(cps.s_sigma_rho),
                num(cps.s_rho_sigma)
            )
            .unwrap();
            writeln!(t, "{:>24} {:>24} {:>24}", "r", "e_q", "s_achieving").unwrap();
            for p in &curve {
                writeln!(t, "{:>24} {:>24} {:>24}", num(p.r), ext(p.value), opt(p.s_achieving)).unwrap();
            }
            t
        }
    };
    emit(&output.out, &text)?;
    Ok(0)
}

fn cmd_simulate(pair: &PairArgs, pi0: f64, n_max: usize, output: &OutputArgs) -> Result<i32, CliError> {
    let (rho, sigma) = load_pair(pair)?;
    let priors = Priors::from_pi0(pi0)?;
    if n_max == 0 {
        return Err(CliError::Failure("--n-max must be at least 1".into()));
    }
    let (seq, chernoff) = chernoff_rate_experiment(&rho, &sigma, priors, n_max)?;
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&json!({ "entries": seq.entries, "chernoff": chernoff })),
        Format::Csv => csv_text(
            &["n", "p_e_n", "rate", "upper_bound", "lower_bound", "sandwich_ok"],
            |w| {
                seq.entries.iter().try_for_each(|e: &RateEntry| {
                    w.write_record([
                        e.n.to_string(),
                        num(e.value),
                        opt(e.rate),
                        num(e.upper_bound),
                        opt(e.lower_bound),
                        e.sandwich_ok.to_string(),
                    ])
                })
            },
        ),
        Format::Table => {
            let mut t = String::new();
            writeln!(t, "xi_qcb {}", ext(chernoff.xi_qcb)).unwrap();
            writeln!(
                t,
                "{:>3} {:>24} {:>24} {:>24} {:>24} {:>6}",
                "n", "p_e_n", "rate", "upper_bound", "lower_bound", "ok"
            )
            .unwrap();
            for e in &seq.entries {
                writeln!(
                    t,
                    "{:>3} {:>24} {:>24} {:>24} {:>24} {:>6}",
                    e.n,
                    num(e.value),
                    opt(e.rate),
                    num(e.upper_bound),
                    opt(e.lower_bound),
                    e.sandwich_ok
                )
                .unwrap();
            }
            t
        }
    };
    emit(&output.out, &text)?;
    Ok(if seq.entries.iter().all(|e| e.sandwich_ok) { 0 } else { 1 })
}

fn run_suites(suite: Suite, trials: usize, seed: u64, dims: &[usize]) -> Result<Vec<VerificationReport>, Error> {
    let all = suite == Suite::All;
    let mut reports = Vec::new();
    if all || suite == Suite::TraceInequality {
        reports.push(check_trace_inequality(trials, seed, dims)?);
    }
    if all || suite == Suite::Chain {
        reports.push(check_chain(trials, seed, dims)?);
    }
    if all || suite == Suite::Appendix {
        reports.push(check_appendix(trials, seed, dims)?);
    }
    if all || suite == Suite::TensorCounterexample {
        reports.push(check_tensor_counterexample()?);
    }
    if all || suite == Suite::Convexity {
        reports.push(check_convexity_concavity(trials, seed));
    }
    Ok(reports)
}

fn cmd_verify(suite: Suite, trials: usize, seed: u64, dims: &[usize], output: &OutputArgs) -> Result<i32, CliError> {
    let reports = run_suites(suite, trials, seed, dims)?;
    let text = match output.format.unwrap_or(Format::Table) {
        Format::Json => to_json(&reports),
        Format::Csv => csv_text(&["property_name", "trials", "worst_margin", "failures", "seed"], |w| {
            reports.iter().try_for_each(|r| {
                w.write_record([
                    r.property_name.clone(),
                    r.trials.to_string(),
                    num(r.worst_margin),
                    r.failures.to_string(),
                    r.seed.to_string(),
                ])
            })
        }),
        Format::Table => {
            let mut t = String::new();
            writeln!(t, "{:<24} {:>7} {:>24} {:>8}", "property", "trials", "worst_margin", "failures").unwrap();
            for r in &reports {
                writeln!(
                    t,
                    "{:<24} {:>7} {:>24} {:>8}",
                    r.property_name,
                    r.trials,
                    num(r.worst_margin),
                    r.failures
                )
                .unwrap();
            }
            t
        }
    };
    emit(&output.out, &text)?;
    Ok(if reports.iter().all(VerificationReport::passed) { 0 } else { 1 })
}

fn cmd_map(pair: &PairArgs, output: &OutputArgs) -> Result<i32, CliError> {
    let (rho, sigma) = load_pair(pair)?;
    let cp = ns_map(&rho, &sigma)?;
    let text = match output.format.unwrap_or(Format::Table) {
        Format::Json => to_json(&json!({ "outcomes": cp.outcomes, "p": cp.p, "q": cp.q })),
        Format::Csv | Format::Table => csv_text(&["i", "j", "p", "q"], |w| {
            cp.outcomes.iter().enumerate().try_for_each(|(k, &(i, j))| {
                w.write_record([i.to_string(), j.to_string(), num(cp.p[k]), num(cp.q[k])])
            })
        }),
    };
    emit(&output.out, &text)?;
    Ok(0)
}

fn cmd_stein(pair: &PairArgs, output: &OutputArgs) -> Result<i32, CliError> {
    let (rho, sigma) = load_pair(pair)?;
    let rate = stein_rate(&rho, &sigma)?;
    let text = match output.format.unwrap_or(Format::Table) {
        Format::Json => to_json(&json!({ "stein_rate": rate })),
        Format::Csv => csv_text(&["stein_rate"], |w| w.write_record([ext(rate)])),
        Format::Table => format!("{}\n", ext(rate)),
    };
    emit(&output.out, &text)?;
    Ok(0)
}
