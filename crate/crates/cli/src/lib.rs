//! Command-line front end: graph generation, solving, numeric verification,
//! matching, and target-fraction sweeps.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use targetflow::graph::{generate_er, generate_sf, parse_edge_list, parse_target_set, write_edge_list};
use targetflow::mftp::{allocate_drivers, solve, verify_cover};
use targetflow::sweep::{run_sweep, SweepError};
use targetflow::verify::{
    kalman_target_rank, realize_system, steer, VerifyError, DEFAULT_SIMULATION_STEPS,
    OUTPUT_TOLERANCE,
};
use targetflow::{
    driver_count_mm, DiGraph, DriverAllocation, GraphError, LabelMap, SolveError, SweepResult,
    TargetSet,
};

/// Failure classes, each with its own exit status.
#[derive(Debug, PartialEq)]
pub enum CliError {
    /// Unreadable or malformed input. Exit 1.
    Parse(String),
    /// Well-formed input that violates a precondition. Exit 2.
    Invalid(String),
    /// Numerical breakdown during verification. Exit 3.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl From<GraphError> for CliError {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Parse { .. } => CliError::Parse(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Graph(g) => g.into(),
            SolveError::EmptyTarget => CliError::Invalid(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Solve(s) => s.into(),
            SweepError::RatioAboveOne { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<VerifyError> for CliError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::AttachmentOutOfRange { .. } | VerifyError::Dimension(_) => {
                CliError::Invalid(e.to_string())
            }
            VerifyError::InvalidHorizon(_) => CliError::Invalid(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Er,
    Sf,
}

#[derive(Debug, Parser)]
#[command(name = "targetflow", version, about = "Minimum drivers for target controllability")]
pub struct Cli {
    /// Random seed for generators, edge weights and target sampling.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Write the primary output here instead of stdout. For `verify` this is
    /// the output trajectory CSV.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random network as an edge list.
    Gen(GeneratorArgs),
    /// Minimum driver count and path/cycle cover for a target set.
    Solve {
        graph: PathBuf,
        /// One label per line; all nodes when omitted.
        targets: Option<PathBuf>,
    },
    /// Solve, realize random weights, and check target controllability.
    Verify {
        graph: PathBuf,
        targets: Option<PathBuf>,
        /// Control horizon.
        #[arg(long, default_value_t = 3.0)]
        tf: f64,
        /// Integration steps over the horizon.
        #[arg(long, default_value_t = DEFAULT_SIMULATION_STEPS)]
        steps: usize,
        /// Replace the computed allocation: attach driver `k` (default 0) to
        /// `label`. Repeatable.
        #[arg(long, value_name = "[K:]LABEL")]
        attach: Vec<String>,
    },
    /// Driver count needed for the whole network.
    Matching { graph: PathBuf },
    /// Mean target driver count across target fractions.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorArgs {
    #[arg(long, value_enum)]
    pub model: Model,
    #[arg(long)]
    pub n: usize,
    /// Mean total degree.
    #[arg(long)]
    pub mu: f64,
    /// Degree exponent (scale-free only).
    #[arg(long, default_value_t = 3.0)]
    pub gamma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Edge list to sweep over.
    #[arg(long, conflicts_with_all = ["model", "n", "mu"])]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, requires_all = ["n", "mu"])]
    pub model: Option<Model>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    pub gamma: f64,
    /// Comma-separated target fractions in (0, 1].
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"
    )]
    pub fractions: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    File(PathBuf),
    Generate {
        model: Model,
        n: usize,
        mu: f64,
        gamma: f64,
    },
}

/// Everything a sweep run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: GraphSource,
    pub seed: u64,
    pub fractions: Vec<f64>,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials == 0 {
            return Err(CliError::Invalid("trials must be >= 1".into()));
        }
        if self.fractions.is_empty() {
            return Err(CliError::Invalid("no fractions given".into()));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
            return Err(CliError::Invalid(format!("fraction {f} is outside (0, 1]")));
        }
        Ok(())
    }

    pub fn load_graph(&self) -> Result<DiGraph, CliError> {
        match &self.source {
            GraphSource::File(path) => Ok(read_graph(path)?.0),
            &GraphSource::Generate { model, n, mu, gamma } => {
                generate(model, n, mu, gamma, self.seed)
            }
        }
    }
}

/// Formats `x` with six significant digits, without trailing zeros.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = 5 - magnitude;
    let s = if decimals >= 0 {
        format!("{:.*}", decimals as usize, x)
    } else {
        let unit = 10f64.powi(-decimals);
        format!("{:.0}", (x / unit).round() * unit)
    };
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn round6(x: f64) -> f64 {
    sig6(x).parse().unwrap_or(x)
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<(DiGraph, LabelMap), CliError> {
    Ok(parse_edge_list(&read_text(path)?)?)
}

fn read_targets(path: Option<&Path>, labels: &LabelMap) -> Result<TargetSet, CliError> {
    match path {
        Some(p) => Ok(parse_target_set(&read_text(p)?, labels)?),
        None => Ok(TargetSet::all(labels.len())?),
    }
}

fn generate(model: Model, n: usize, mu: f64, gamma: f64, seed: u64) -> Result<DiGraph, CliError> {
    Ok(match model {
        Model::Er => generate_er(n, mu, seed)?,
        Model::Sf => generate_sf(n, mu, gamma, seed)?,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<String, CliError> {
    match out {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text.to_string()),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn labelled(seqs: &[Vec<usize>], labels: &LabelMap) -> Vec<Vec<u64>> {
    seqs.iter()
        .map(|s| s.iter().map(|&v| labels.label(v)).collect())
        .collect()
}

fn labelled_attachments(alloc: &DriverAllocation, labels: &LabelMap) -> Vec<(usize, u64)> {
    alloc
        .attachments
        .iter()
        .map(|&(d, v)| (d, labels.label(v)))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub min_drivers: usize,
    pub paths: Vec<Vec<u64>>,
    pub cycles: Vec<Vec<u64>>,
    /// `[driver, label]` pairs.
    pub attachments: Vec<(usize, u64)>,
    pub flow_value: u64,
}

pub fn cmd_solve(graph: &Path, targets: Option<&Path>) -> Result<SolveReport, CliError> {
    let (g, labels) = read_graph(graph)?;
    let s = read_targets(targets, &labels)?;
    let sol = solve(&g, &s)?;
    if !verify_cover(&g, &s, &sol.cover) {
        return Err(CliError::Numeric("solver returned an invalid cover".into()));
    }
    let alloc = allocate_drivers(&sol.cover);
    Ok(SolveReport {
        min_drivers: sol.min_drivers,
        paths: labelled(&sol.cover.paths, &labels),
        cycles: labelled(&sol.cover.cycles, &labels),
        attachments: labelled_attachments(&alloc, &labels),
        flow_value: sol.flow_value,
    })
}

fn solve_csv(r: &SolveReport) -> String {
    let join = |s: &[u64]| s.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let mut out = String::from("kind,index,nodes\n");
    for (k, p) in r.paths.iter().enumerate() {
        let _ = writeln!(out, "path,{k},{}", join(p));
    }
    for (k, c) in r.cycles.iter().enumerate() {
        let _ = writeln!(out, "cycle,{k},{}", join(c));
    }
    for (d, v) in &r.attachments {
        let _ = writeln!(out, "attach,{d},{v}");
    }
    out
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub target_size: usize,
    pub drivers: usize,
    pub attachments: Vec<(usize, u64)>,
    pub rank: usize,
    pub controllable: bool,
    pub t_f: f64,
    /// `‖y(t_f)‖` under the designed input; absent when not controllable.
    pub output_norm: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

/// Parses `k:label` or `label` (driver 0).
fn parse_attachment(spec: &str, labels: &LabelMap) -> Result<(usize, usize), CliError> {
    let (driver, label) = match spec.split_once(':') {
        Some((k, l)) => (k, l),
        None => ("0", spec),
    };
    let driver: usize = driver
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("bad driver index in '{spec}'")))?;
    let label: u64 = label
        .trim()
        .parse()
        .map_err(|_| CliError::Parse(format!("bad label in '{spec}'")))?;
    let node = labels
        .id(label)
        .ok_or_else(|| CliError::Invalid(format!("unknown label {label} in '{spec}'")))?;
    Ok((driver, node))
}

pub struct VerifyOutcome {
    pub report: VerifyReport,
    /// Output trajectory CSV when the designed input was simulated.
    pub trajectory: Option<String>,
}

pub fn cmd_verify(
    graph: &Path,
    targets: Option<&Path>,
    seed: u64,
    t_f: f64,
    steps: usize,
    attach: &[String],
) -> Result<VerifyOutcome, CliError> {
    let (g, labels) = read_graph(graph)?;
    let s = read_targets(targets, &labels)?;
    let alloc = if attach.is_empty() {
        allocate_drivers(&solve(&g, &s)?.cover)
    } else {
        let attachments = attach
            .iter()
            .map(|a| parse_attachment(a, &labels))
            .collect::<Result<Vec<_>, _>>()?;
        let driver_count = attachments.iter().map(|&(d, _)| d + 1).max().unwrap_or(1);
        DriverAllocation {
            driver_count,
            attachments,
        }
    };
    let sys = realize_system(&g, &s, &alloc, seed)?;
    let rank = kalman_target_rank(&sys);
    let controllable = rank == s.len();
    let mut report = VerifyReport {
        target_size: s.len(),
        drivers: alloc.driver_count,
        attachments: labelled_attachments(&alloc, &labels),
        rank,
        controllable,
        t_f,
        output_norm: None,
        tolerance: OUTPUT_TOLERANCE,
        pass: false,
    };
    if !controllable {
        return Ok(VerifyOutcome {
            report,
            trajectory: None,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut x0: Vec<f64> = (0..g.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = x0.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    x0.iter_mut().for_each(|x| *x /= norm);
    let (_, sim) = steer(&sys, &x0, t_f, steps)?;
    let y = sim.final_output_norm();
    report.output_norm = Some(y);
    report.pass = y <= OUTPUT_TOLERANCE;
    Ok(VerifyOutcome {
        report,
        trajectory: Some(sim.output_csv(&sys)),
    })
}

fn verify_csv(r: &VerifyReport) -> String {
    let norm = r.output_norm.map_or(String::new(), |y| format!("{y:e}"));
    format!(
        "target_size,drivers,rank,controllable,t_f,output_norm,tolerance,pass\n{},{},{},{},{},{},{:e},{}\n",
        r.target_size, r.drivers, r.rank, r.controllable, r.t_f, norm, r.tolerance, r.pass
    )
}

pub fn cmd_matching(graph: &Path) -> Result<usize, CliError> {
    let (g, _) = read_graph(graph)?;
    Ok(driver_count_mm(&g))
}

pub fn cmd_gen(spec: &GeneratorArgs, seed: u64) -> Result<String, CliError> {
    let g = generate(spec.model, spec.n, spec.mu, spec.gamma, seed)?;
    Ok(write_edge_list(&g, None))
}

pub fn cmd_sweep(config: &RunConfig) -> Result<SweepResult, CliError> {
    config.validate()?;
    let g = config.load_graph()?;
    Ok(run_sweep(&g, &config.fractions, config.trials, config.seed)?)
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from("f,trials,mean_nD,ratio,std\n");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            sig6(r.fraction),
            r.trials,
            sig6(r.mean_drivers),
            sig6(r.ratio),
            sig6(r.std)
        );
    }
    out
}

#[derive(Serialize)]
struct SweepJsonRow {
    f: f64,
    trials: usize,
    #[serde(rename = "mean_nD")]
    mean_nd: f64,
    ratio: f64,
    std: f64,
}

#[derive(Serialize)]
struct SweepJson {
    #[serde(rename = "N_D")]
    network_drivers: usize,
    rows: Vec<SweepJsonRow>,
}

pub fn sweep_json(result: &SweepResult) -> String {
    to_json(&SweepJson {
        network_drivers: result.network_drivers,
        rows: result
            .rows
            .iter()
            .map(|r| SweepJsonRow {
                f: round6(r.fraction),
                trials: r.trials,
                mean_nd: round6(r.mean_drivers),
                ratio: round6(r.ratio),
                std: round6(r.std),
            })
            .collect(),
    })
}

/// Runs one invocation and returns the text for stdout.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Gen(spec) => emit(out, &cmd_gen(spec, cli.seed)?),
        Command::Solve { graph, targets } => {
            let report = cmd_solve(graph, targets.as_deref())?;
            let text = match cli.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report),
                Format::Csv => solve_csv(&report),
            };
            emit(out, &text)
        }
        Command::Verify {
            graph,
            targets,
            tf,
            steps,
            attach,
        } => {
            let outcome = cmd_verify(graph, targets.as_deref(), cli.seed, *tf, *steps, attach)?;
            if let (Some(path), Some(csv)) = (out, &outcome.trajectory) {
                emit(Some(path), csv)?;
            }
            Ok(match cli.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&outcome.report),
                Format::Csv => verify_csv(&outcome.report),
            })
        }
        Command::Matching { graph } => {
            let nd = cmd_matching(graph)?;
            let text = match cli.format {
                None => format!("{nd}\n"),
                Some(Format::Csv) => format!("N_D\n{nd}\n"),
                Some(Format::Json) => format!("{{\"N_D\": {nd}}}\n"),
            };
            emit(out, &text)
        }
        Command::Sweep(args) => {
            let source = match (&args.graph, args.model) {
                (Some(path), _) => GraphSource::File(path.clone()),
                (None, Some(model)) => GraphSource::Generate {
                    model,
                    n: args.n.unwrap_or_default(),
                    mu: args.mu.unwrap_or_default(),
                    gamma: args.gamma,
                },
                (None, None) => {
                    return Err(CliError::Invalid("sweep needs --graph or --model".into()))
                }
            };
            let config = RunConfig {
                source,
                seed: cli.seed,
                fractions: args.fractions.clone(),
                trials: args.trials,
                out: cli.out.clone(),
                format: cli.format.unwrap_or(Format::Csv),
            };
            let result = cmd_sweep(&config)?;
            let text = match config.format {
                Format::Csv => sweep_csv(&result),
                Format::Json => sweep_json(&result),
            };
            emit(config.out.as_deref(), &text)
        }
    }
}

pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
