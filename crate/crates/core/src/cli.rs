//! `qstbell` command line.
//!
//! Exit codes: `0` success, `2` usage error (including out-of-range
//! arguments), `3` numeric validation failure. Output is produced in full
//! before anything is written, so a failing command prints no partial table.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bell::{self, BellReport, SeesawResult, SweepRow};
use crate::error::Error;
use crate::game::{self, GameSummary, MaxControl};
use crate::lhv::{self, LhvResult};
use crate::linalg::{self, StateVector, Tolerances};
use crate::states::{self, TargetSet};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "QSTBELL_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qstbell",
    version,
    about = "Quantum state targeting and its Bell inequality"
)]
struct Cli {
    /// Worker threads for parallel evaluation (falls back to QSTBELL_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out_path: Option<PathBuf>,

    #[arg(long, global = true, value_name = "TOL")]
    tol_norm: Option<f64>,

    #[arg(long, global = true, value_name = "TOL")]
    tol_herm: Option<f64>,

    #[arg(long, global = true, value_name = "TOL")]
    tol_eig: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect bases, intermediate states and steering statistics.
    States {
        #[command(subcommand)]
        action: StatesCmd,
    },
    /// Monte-Carlo play of the targeting game.
    Game {
        #[command(subcommand)]
        action: GameCmd,
    },
    /// Bell sum, Bell operator, see-saw, local bound and dimension sweep.
    Bell {
        #[command(subcommand)]
        action: BellCmd,
    },
}

#[derive(Debug, Subcommand)]
enum StatesCmd {
    Show {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[command(flatten)]
        fmt: Format,
    },
}

#[derive(Debug, Subcommand)]
enum GameCmd {
    Simulate {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        fmt: Format,
    },
}

#[derive(Debug, Subcommand)]
enum BellCmd {
    /// Exact Bell sum for the maximally entangled state.
    Exact {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[command(flatten)]
        fmt: Format,
    },
    /// The Bell operator, or its spectrum with --eigs.
    Operator {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long)]
        eigs: bool,
        #[command(flatten)]
        fmt: Format,
    },
    /// See-saw ascent from random states.
    Seesaw {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        fmt: Format,
    },
    /// Local deterministic bound.
    Lhv {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, value_enum, default_value_t = LhvModeArg::Enumerate)]
        mode: LhvModeArg,
        #[command(flatten)]
        fmt: Format,
    },
    /// Quantum value, classical bound and ratio across dimensions.
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[command(flatten)]
        fmt: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LhvModeArg {
    Enumerate,
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct Format {
    /// Output format.
    #[arg(long = "out", value_enum)]
    out: Option<OutputFormat>,
    /// Shorthand for --out json.
    #[arg(long, conflicts_with = "out")]
    json: bool,
}

impl Format {
    fn resolve(&self) -> OutputFormat {
        match (self.json, self.out) {
            (true, _) => OutputFormat::Json,
            (false, Some(f)) => f,
            (false, None) => OutputFormat::Text,
        }
    }
}

/// Resolved arguments for one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub d: usize,
    pub seed: u64,
    pub rounds: u64,
    pub dims: Vec<usize>,
    pub tolerances: Tolerances,
    pub output: OutputFormat,
    pub out_path: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 3,
            seed: 0,
            rounds: 1,
            dims: Vec::new(),
            tolerances: Tolerances::default(),
            output: OutputFormat::Text,
            out_path: None,
            threads: None,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Dimension { .. }
            | Error::Index { .. }
            | Error::Invalid(_)
            | Error::TooLargeForEnumeration { .. } => CliError::Usage(e.to_string()),
            Error::Linalg(_) | Error::Degenerate => CliError::Validation(e.to_string()),
        }
    }
}

/// Parses `argv`, runs the command and prints its output. Returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match execute(argv) {
        Ok(Some((text, None))) => {
            print!("{text}");
            EXIT_OK
        }
        Ok(Some((text, Some(path)))) => match std::fs::write(&path, text) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                EXIT_USAGE
            }
        },
        Ok(None) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Output text and destination, or `None` when clap already printed help or
/// version information.
pub type Execution = Option<(String, Option<PathBuf>)>;

pub fn execute<I, T>(argv: I) -> Result<Execution, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(None);
            }
            let rendered = e.render().to_string();
            let msg = rendered
                .trim_end()
                .trim_start_matches("error: ")
                .to_string();
            return Err(CliError::Usage(msg));
        }
    };

    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                CliError::Usage(format!(
                    "{THREADS_ENV} must be a positive integer, got {v:?}"
                ))
            })?),
            Err(_) => None,
        },
    };
    if threads == Some(0) {
        return Err(CliError::Usage("thread count must be at least 1".into()));
    }

    let mut tolerances = Tolerances::default();
    if let Some(t) = cli.tol_norm {
        tolerances.normalization = t;
    }
    if let Some(t) = cli.tol_herm {
        tolerances.hermiticity = t;
    }
    if let Some(t) = cli.tol_eig {
        tolerances.eigen_residual = t;
    }
    let out_path = cli.out_path.clone();
    let cfg = RunConfig {
        tolerances,
        out_path: out_path.clone(),
        threads,
        ..RunConfig::default()
    };

    let work = move || {
        let mut cfg = cfg;
        run_command(&cli.command, &mut cfg)
    };
    let text = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    Ok(Some((text, out_path)))
}

fn run_command(command: &Command, cfg: &mut RunConfig) -> Result<String, CliError> {
    match command {
        Command::States {
            action: StatesCmd::Show { d, fmt },
        } => {
            cfg.d = *d;
            cfg.output = fmt.resolve();
            let report = states_report(cfg)?;
            render("states show", &report, cfg.output)
        }
        Command::Game {
            action:
                GameCmd::Simulate {
                    d,
                    rounds,
                    seed,
                    fmt,
                },
        } => {
            cfg.d = *d;
            cfg.rounds = *rounds;
            cfg.seed = *seed;
            cfg.output = fmt.resolve();
            let summary =
                game::simulate_with(cfg.d, cfg.rounds, cfg.seed, &MaxControl, cfg.threads)?;
            validate_summary(&summary)?;
            render("game simulate", &summary, cfg.output)
        }
        Command::Bell { action } => run_bell(action, cfg),
    }
}

fn run_bell(action: &BellCmd, cfg: &mut RunConfig) -> Result<String, CliError> {
    match action {
        BellCmd::Exact { d, fmt } => {
            cfg.d = *d;
            cfg.output = fmt.resolve();
            let report = bell::exact_report(cfg.d)?;
            validate_report(&report, &cfg.tolerances)?;
            render("bell exact", &report, cfg.output)
        }
        BellCmd::Operator { d, eigs, fmt } => {
            cfg.d = *d;
            cfg.output = fmt.resolve();
            let report = operator_report(cfg, *eigs)?;
            render("bell operator", &report, cfg.output)
        }
        BellCmd::Seesaw {
            d,
            trials,
            seed,
            fmt,
        } => {
            cfg.d = *d;
            cfg.seed = *seed;
            cfg.output = fmt.resolve();
            let result = bell::seesaw_verify(cfg.d, *trials, cfg.seed)?;
            if result.best_value > result.quantum_bound + 1e-6 {
                return Err(CliError::Validation(format!(
                    "see-saw value {} exceeds 2√d = {}",
                    result.best_value, result.quantum_bound
                )));
            }
            render("bell seesaw", &result, cfg.output)
        }
        BellCmd::Lhv { d, mode, fmt } => {
            cfg.d = *d;
            cfg.output = fmt.resolve();
            let result = match mode {
                LhvModeArg::Enumerate => lhv::enumerate_max(cfg.d)?,
                LhvModeArg::Analytic => lhv::analytic_max(cfg.d)?,
            };
            if result.max_value % 2 != 0
                || lhv::score_strategy(&result.argmax, cfg.d) != result.max_value
            {
                return Err(CliError::Validation("inconsistent local bound".into()));
            }
            render("bell lhv", &result, cfg.output)
        }
        BellCmd::Sweep { dims, fmt } => {
            cfg.dims = dims.clone();
            cfg.output = fmt.resolve();
            let rows = bell::dimension_sweep(&cfg.dims)?;
            for r in &rows {
                if (r.ratio - (r.d as f64).sqrt()).abs() > 1e-9 {
                    return Err(CliError::Validation(format!(
                        "ratio {} at d = {} differs from √d",
                        r.ratio, r.d
                    )));
                }
            }
            render("bell sweep", &Sweep { rows }, cfg.output)
        }
    }
}

fn validate_summary(s: &GameSummary) -> Result<(), CliError> {
    if let (Some(p), Some(q)) = (s.pass_rate_given_announce, s.fail_rate_given_announce) {
        if (p + q - 1.0).abs() > 1e-12 {
            return Err(CliError::Validation(format!("pass + fail = {}", p + q)));
        }
    }
    Ok(())
}

fn validate_report(r: &BellReport, tol: &Tolerances) -> Result<(), CliError> {
    if (r.recomputed_value() - r.quantum_value).abs() > 1e-12 {
        return Err(CliError::Validation(
            "Bell value does not match its table".into(),
        ));
    }
    let bad = r
        .table
        .iter()
        .flat_map(|row| &row.probabilities)
        .any(|&p| !(-tol.normalization..=1.0 + tol.normalization).contains(&p));
    if bad {
        return Err(CliError::Validation(
            "joint probability outside [0, 1]".into(),
        ));
    }
    Ok(())
}

// ── Report types ────────────────────────────────────────────────────────────

#[derive(Debug, Serialize)]
struct GridEntry {
    k: usize,
    l: usize,
    state: StateVector,
    steering: StateVector,
    /// `|⟨a_k|m_kl⟩|²`
    fidelity_a: f64,
    /// `|⟨a′_l|m_kl⟩|²`
    fidelity_a_prime: f64,
    fire_probability: f64,
    bob_fidelity: f64,
}

#[derive(Debug, Serialize)]
struct StatesReport {
    d: usize,
    computational: Vec<StateVector>,
    fourier: Vec<StateVector>,
    /// `max |⟨a_k|a′_l⟩|² − 1/d` over all pairs.
    mub_deviation: f64,
    normalizer: f64,
    grid: Vec<GridEntry>,
}

fn states_report(cfg: &RunConfig) -> Result<StatesReport, CliError> {
    let d = cfg.d;
    let computational = states::computational_basis(d)?;
    let fourier = states::fourier_basis(d)?;
    let shared = states::max_entangled(d)?;
    let mut mub_deviation: f64 = 0.0;
    for a in computational.vectors() {
        for f in fourier.vectors() {
            let dev = (linalg::fidelity(a, f).map_err(Error::from)? - 1.0 / d as f64).abs();
            mub_deviation = mub_deviation.max(dev);
        }
    }
    let grid = states::IntermediateGrid::new(d)?;
    let entries = grid
        .iter()
        .map(|(t, m)| grid_entry(d, t, m, &shared, &fourier))
        .collect::<Result<Vec<_>, Error>>()?;

    let tol = cfg.tolerances.normalization;
    if mub_deviation > tol {
        return Err(CliError::Validation(format!(
            "bases not unbiased: {mub_deviation:e}"
        )));
    }
    for e in &entries {
        if (e.fidelity_a - e.fidelity_a_prime).abs() > tol
            || (e.fire_probability - 1.0 / d as f64).abs() > tol
            || e.bob_fidelity < 1.0 - 1e-9
        {
            return Err(CliError::Validation(format!(
                "grid state ({}, {}) fails equidistance or steering",
                e.k, e.l
            )));
        }
    }
    Ok(StatesReport {
        d,
        computational: computational.vectors().to_vec(),
        fourier: fourier.vectors().to_vec(),
        mub_deviation,
        normalizer: grid.normalizer(),
        grid: entries,
    })
}

fn grid_entry(
    d: usize,
    t: TargetSet,
    m: &StateVector,
    shared: &StateVector,
    fourier: &states::OrthonormalBasis,
) -> Result<GridEntry, Error> {
    let steering = states::steering_vector(d, t)?;
    let bob = linalg::contract_alice(shared, &steering)?;
    let fire_probability = bob.norm_sqr();
    let bob_fidelity = linalg::fidelity(&bob.normalized()?, m)?;
    Ok(GridEntry {
        k: t.k,
        l: t.l,
        state: m.clone(),
        steering,
        fidelity_a: linalg::fidelity(&StateVector::basis(d, t.k), m)?,
        fidelity_a_prime: linalg::fidelity(fourier.vector(t.l), m)?,
        fire_probability,
        bob_fidelity,
    })
}

#[derive(Debug, Serialize)]
struct OperatorReport {
    d: usize,
    dim: usize,
    trace: f64,
    quantum_bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<linalg::HermitianOperator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<Spectrum>,
}

#[derive(Debug, Serialize)]
struct Spectrum {
    eigenvalues: Vec<f64>,
    top_eigenvalue: f64,
    /// `|⟨top|ψ_max⟩|²` against the maximally entangled state.
    top_fidelity_max_entangled: f64,
    max_residual: f64,
    max_orthonormality_error: f64,
    sweeps: usize,
}

fn operator_report(cfg: &RunConfig, eigs: bool) -> Result<OperatorReport, CliError> {
    let d = cfg.d;
    let b = bell::bell_operator(d)?;
    let trace = b.trace();
    let spectrum = if eigs {
        let eig = linalg::hermitian_eigs_with(&b, &cfg.tolerances);
        let max_residual = eig.max_residual(&b).map_err(Error::from)?;
        let ortho = eig.max_orthonormality_error();
        if max_residual > cfg.tolerances.eigen_residual || ortho > cfg.tolerances.eigen_residual {
            return Err(CliError::Validation(format!(
                "eigensolver residual {max_residual:e}, orthonormality {ortho:e}"
            )));
        }
        let (top, v) = eig.top();
        let fid = linalg::fidelity(v, &states::max_entangled(d)?).map_err(Error::from)?;
        Some(Spectrum {
            top_eigenvalue: top,
            top_fidelity_max_entangled: fid,
            max_residual,
            max_orthonormality_error: ortho,
            sweeps: eig.sweeps,
            eigenvalues: eig.eigenvalues,
        })
    } else {
        None
    };
    Ok(OperatorReport {
        d,
        dim: b.dim(),
        trace,
        quantum_bound: bell::quantum_bound(d),
        matrix: if eigs { None } else { Some(b) },
        spectrum,
    })
}

#[derive(Debug, Serialize)]
struct Sweep {
    rows: Vec<SweepRow>,
}

// ── Serialization ───────────────────────────────────────────────────────────

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    #[serde(flatten)]
    result: &'a T,
}

trait Render: Serialize {
    fn text(&self) -> String;

    fn csv(&self) -> Option<String> {
        None
    }
}

fn render<T: Render>(command: &str, value: &T, format: OutputFormat) -> Result<String, CliError> {
    match format {
        OutputFormat::Json => {
            let env = Envelope {
                schema: SCHEMA_VERSION,
                command,
                result: value,
            };
            let mut s = serde_json::to_string_pretty(&env)
                .map_err(|e| CliError::Validation(format!("serialization: {e}")))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Text => Ok(value.text()),
        OutputFormat::Csv => value
            .csv()
            .ok_or_else(|| CliError::Usage(format!("`{command}` has no CSV output"))),
    }
}

/// Seven significant digits, '.' decimal separator.
pub fn sig7(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (6 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn amp_text(v: &StateVector) -> String {
    let parts: Vec<String> = v
        .amps()
        .iter()
        .map(|a| format!("({:+.7},{:+.7})", a.re, a.im))
        .collect();
    parts.join(" ")
}

impl Render for StatesReport {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d = {}", self.d);
        let _ = writeln!(s, "basis A");
        for (i, v) in self.computational.iter().enumerate() {
            let _ = writeln!(s, "  a_{i}  {}", amp_text(v));
        }
        let _ = writeln!(s, "basis A'");
        for (i, v) in self.fourier.iter().enumerate() {
            let _ = writeln!(s, "  a'_{i} {}", amp_text(v));
        }
        let _ = writeln!(s, "mub deviation {:.3e}", self.mub_deviation);
        let _ = writeln!(s, "normalizer N  {:.7}", self.normalizer);
        let _ = writeln!(
            s,
            "grid          |<a_k|m>|^2  |<a'_l|m>|^2  p(fire)     bob fidelity"
        );
        for e in &self.grid {
            let _ = writeln!(
                s,
                "  m_{}{}         {:.7}    {:.7}     {:.7}   {:.10}",
                e.k, e.l, e.fidelity_a, e.fidelity_a_prime, e.fire_probability, e.bob_fidelity
            );
        }
        for e in &self.grid {
            let _ = writeln!(s, "  m_{}{} = {}", e.k, e.l, amp_text(&e.state));
        }
        s
    }
}

impl Render for GameSummary {
    fn text(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.7}"));
        let mut s = String::new();
        let _ = writeln!(s, "d          {}", self.d);
        let _ = writeln!(s, "seed       {}", self.seed);
        let _ = writeln!(s, "rounds     {}", self.rounds);
        let _ = writeln!(s, "announced  {}", self.announced);
        let _ = writeln!(s, "passed     {}", self.passed);
        let _ = writeln!(
            s,
            "fire rate  {:.7} ± {:.7}",
            self.fire_rate, self.std_err_fire
        );
        let _ = writeln!(
            s,
            "pass rate  {} ± {}",
            opt(self.pass_rate_given_announce),
            opt(self.std_err_pass)
        );
        let _ = writeln!(s, "fail rate  {}", opt(self.fail_rate_given_announce));
        s
    }
}

impl Render for BellReport {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d         {}", self.d);
        let _ = writeln!(s, "quantum   {:.7}", self.quantum_value);
        let _ = writeln!(s, "classical {}", self.classical_bound);
        let _ = writeln!(s, "ratio     {:.7}", self.violation_ratio);
        let _ = writeln!(s, "setting   bob  correlated  p(fire ∧ x), x = 0..d");
        for row in &self.table {
            let probs: Vec<String> = row
                .probabilities
                .iter()
                .map(|p| format!("{p:.7}"))
                .collect();
            let bob = match row.bob {
                game::BobBasis::A => "A ",
                game::BobBasis::APrime => "A'",
            };
            let _ = writeln!(
                s,
                "  m_{}{}    {bob}   {}           {}",
                row.alice.k,
                row.alice.l,
                row.correlated_index,
                probs.join("  ")
            );
        }
        s
    }
}

impl Render for OperatorReport {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d             {}", self.d);
        let _ = writeln!(s, "dim           {}", self.dim);
        let _ = writeln!(s, "trace         {:.7}", self.trace);
        let _ = writeln!(s, "2√d           {:.7}", self.quantum_bound);
        if let Some(sp) = &self.spectrum {
            let _ = writeln!(s, "top          {:.10}", sp.top_eigenvalue);
            let _ = writeln!(s, "top fidelity {:.10}", sp.top_fidelity_max_entangled);
            let _ = writeln!(s, "residual     {:.3e}", sp.max_residual);
            let _ = writeln!(s, "orthonormal  {:.3e}", sp.max_orthonormality_error);
            let _ = writeln!(s, "sweeps       {}", sp.sweeps);
            let vals: Vec<String> = sp.eigenvalues.iter().map(|x| format!("{x:.7}")).collect();
            let _ = writeln!(s, "eigenvalues  {}", vals.join(" "));
        }
        if let Some(m) = &self.matrix {
            for i in 0..m.dim() {
                let row: Vec<String> = (0..m.dim())
                    .map(|j| {
                        let z = m.get(i, j);
                        format!("({:+.7},{:+.7})", z.re, z.im)
                    })
                    .collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        s
    }
}

impl Render for SeesawResult {
    fn text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "d           {}", self.d);
        let _ = writeln!(s, "seed        {}", self.seed);
        let _ = writeln!(s, "best        {:.10}", self.best_value);
        let _ = writeln!(s, "2√d         {:.10}", self.quantum_bound);
        let _ = writeln!(s, "converged   {}", self.all_converged);
        for t in &self.trials {
            let flag = if t.converged { "" } else { "  (not converged)" };
            let _ = writeln!(
                s,
                "  trial  {:.10}  {} iterations{flag}",
                t.value, t.iterations
            );
        }
        s
    }
}

impl Render for LhvResult {
    fn text(&self) -> String {
        let mode = match self.mode {
            lhv::LhvMode::Exhaustive => "enumerate",
            lhv::LhvMode::Analytic => "analytic",
        };
        let mut s = String::new();
        let _ = writeln!(s, "d        {}", self.d);
        let _ = writeln!(s, "mode     {mode}");
        let _ = writeln!(s, "max      {}", self.max_value);
        let _ = writeln!(s, "scanned  {}", self.strategies_scanned);
        let _ = writeln!(
            s,
            "argmax   a = {}, a' = {}, fires = {}",
            self.argmax.a, self.argmax.a_prime, self.argmax.fires
        );
        s
    }
}

impl Render for Sweep {
    fn text(&self) -> String {
        let mut s = String::from("d  quantum    classical  ratio\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}  {:.7}  {}          {:.7}",
                r.d, r.quantum_value, r.classical_bound, r.ratio
            );
        }
        s
    }

    fn csv(&self) -> Option<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["d", "quantum", "classical", "ratio"])
            .ok()?;
        for r in &self.rows {
            w.write_record([
                r.d.to_string(),
                sig7(r.quantum_value),
                sig7(r.classical_bound),
                sig7(r.ratio),
            ])
            .ok()?;
        }
        String::from_utf8(w.into_inner().ok()?).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig7_formatting() {
        assert_eq!(sig7(3.4641016151377544), "3.464102");
        assert_eq!(sig7(2.0), "2.000000");
        assert_eq!(sig7(4.0), "4.000000");
        assert_eq!(sig7(12.345678), "12.34568");
        assert_eq!(sig7(0.0), "0");
    }

    #[test]
    fn format_flags() {
        let f = Format {
            out: None,
            json: true,
        };
        assert_eq!(f.resolve(), OutputFormat::Json);
        let f = Format {
            out: Some(OutputFormat::Csv),
            json: false,
        };
        assert_eq!(f.resolve(), OutputFormat::Csv);
        let f = Format {
            out: None,
            json: false,
        };
        assert_eq!(f.resolve(), OutputFormat::Text);
    }

    #[test]
    fn error_mapping() {
        let e: CliError = Error::Dimension {
            d: 9,
            min: 2,
            max: 6,
        }
        .into();
        assert_eq!(e.exit_code(), EXIT_USAGE);
        let e: CliError = Error::Degenerate.into();
        assert_eq!(e.exit_code(), EXIT_VALIDATION);
    }
}
