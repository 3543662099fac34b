//! Argument parsing and subcommand dispatch for the `hgsparse` binary.
//!
//! Exit codes: 0 on success, 1 on usage or I/O errors, 2 when a
//! verification or certification check fails.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use hgsparse::certify::{
    generate_random, group_contribution_check, measure_quality, Check, GeneratorKind, WeightLaw, DEFAULT_CUT_CAP,
};
use hgsparse::io::{read_hypergraph, read_mhg, read_tau, write_hgr, write_mhg, write_tau};
use hgsparse::overestimates::certify_overestimates;
use hgsparse::report::Report;
use hgsparse::{sparsify, HypergraphInput, LeverageMode, PipelineConfig, Schedule, SolverConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED_CHECK: i32 = 2;

pub const BENCH_HEADER: &str = "epsilon,r,constant,seed,n,m,k,kept,expected_kept,max_err_random,max_err_cuts,ms";

#[derive(Debug, Parser)]
#[command(name = "hgsparse", version, about = "Spectral sparsification of hypergraphs")]
pub struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a sparsifier of an .hgr or .mhg file.
    Sparsify(SparsifyArgs),
    /// Check overestimates (and optionally a sparsifier) against the input.
    Verify(VerifyArgs),
    /// Sweep epsilon, rank and constant over generated instances; print CSV.
    Bench(BenchArgs),
    /// Write a seeded random graphical hypergraph.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Leverage score backend: exact or sketched.
    #[arg(long = "solver", default_value = "exact", value_parser = parse_mode)]
    pub mode: LeverageMode,
    /// Sketch accuracy for the sketched backend, in (0, 1).
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    /// Reweighting rounds: `auto` or a positive integer.
    #[arg(long, default_value = "auto", value_parser = parse_iterations)]
    pub iterations: Iterations,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Iterations {
    Auto,
    Fixed(usize),
}

impl Iterations {
    fn get(self) -> Option<usize> {
        match self {
            Self::Auto => None,
            Self::Fixed(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SparsifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Compacted sparsifier (.mhg).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Group overestimates (.tau) for the unit input.
    #[arg(long)]
    pub tau: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, value_parser = parse_epsilon)]
    pub epsilon: f64,
    #[arg(long, default_value = "chaining", value_parser = parse_schedule)]
    pub schedule: Schedule,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    pub constant: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = DEFAULT_CUT_CAP)]
    pub cut_cap: usize,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    pub directions: u64,
    /// Skip certification and quality measurement.
    #[arg(long)]
    pub no_certify: bool,
    /// Largest row count for which overestimates are certified.
    #[arg(long, default_value_t = 2000)]
    pub certification_cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub tau: PathBuf,
    /// Sparsifier (.mhg) whose quality is measured against the input.
    #[arg(long)]
    pub sparsifier: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Accuracy the sparsifier must reach.
    #[arg(long, default_value_t = 0.5, value_parser = parse_epsilon)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CUT_CAP)]
    pub cut_cap: usize,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    pub directions: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "uniform-hypergraph", value_parser = parse_kind)]
    pub kind: GeneratorKind,
    #[arg(long, default_value = "constant", value_parser = parse_weights)]
    pub weights: WeightLaw,
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Comma-separated ranks.
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    pub r: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.25", value_parser = parse_epsilon)]
    pub epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = parse_positive)]
    pub constant: Vec<f64>,
    /// Comma-separated sampling seeds.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// Seed for the generated instances.
    #[arg(long, default_value_t = 0)]
    pub instance_seed: u64,
    #[arg(long, default_value = "chaining", value_parser = parse_schedule)]
    pub schedule: Schedule,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value_t = DEFAULT_CUT_CAP)]
    pub cut_cap: usize,
    #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
    pub directions: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value = "uniform-hypergraph", value_parser = parse_kind)]
    pub kind: GeneratorKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long, default_value = "constant", value_parser = parse_weights)]
    pub weights: WeightLaw,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Destination (.hgr); stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("epsilon must lie in (0, 1), got {s}"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn parse_iterations(s: &str) -> Result<Iterations, String> {
    if s == "auto" {
        return Ok(Iterations::Auto);
    }
    match s.parse::<usize>() {
        Ok(t) if t > 0 => Ok(Iterations::Fixed(t)),
        _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
    }
}

fn parse_mode(s: &str) -> Result<LeverageMode, String> {
    s.parse().map_err(|e: hgsparse::Error| e.to_string())
}

fn parse_schedule(s: &str) -> Result<Schedule, String> {
    s.parse().map_err(|e: hgsparse::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<GeneratorKind, String> {
    s.parse().map_err(|e: hgsparse::Error| e.to_string())
}

fn parse_weights(s: &str) -> Result<WeightLaw, String> {
    s.parse().map_err(|e: hgsparse::Error| e.to_string())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().context("cannot start worker threads")?;
    pool.install(|| match cli.command {
        Command::Sparsify(a) => run_sparsify(&a),
        Command::Verify(a) => run_verify(&a),
        Command::Bench(a) => run_bench(&a),
        Command::Generate(a) => run_generate(&a),
    })
}

/// Writes `contents` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write to {}", dir.display()))?;
    tmp.write_all(contents.as_bytes()).with_context(|| format!("cannot write {}", path.display()))?;
    tmp.persist(path).map_err(|e| e.error).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_input(path: &Path) -> anyhow::Result<HypergraphInput> {
    let text = read_text(path)?;
    let h = read_hypergraph(&text).with_context(|| format!("{}", path.display()))?;
    Ok(h.into())
}

fn solver_config(a: &SolverArgs) -> SolverConfig {
    SolverConfig { mode: a.mode, delta: a.delta, ..SolverConfig::default() }
}

fn run_sparsify(a: &SparsifyArgs) -> anyhow::Result<i32> {
    let input = read_input(&a.input)?;
    let cfg = PipelineConfig {
        solver: solver_config(&a.solver),
        schedule: a.schedule,
        constant: a.constant,
        seed: a.seed,
        iterations: a.solver.iterations.get(),
        certify: !a.no_certify,
        certification_cap: a.certification_cap,
        directions: a.directions as usize,
        cut_cap: a.cut_cap,
        ..PipelineConfig::default()
    };
    let s = sparsify(&input, a.epsilon, &cfg)?;
    if let Some(p) = &a.output {
        write_atomic(p, &write_mhg(&s.sparsifier()))?;
    }
    if let Some(p) = &a.tau {
        write_atomic(p, &write_tau(&s.overestimates))?;
    }
    let report = s.report();
    if let Some(p) = &a.report {
        write_atomic(p, &report.to_json())?;
    }
    let sizes = report.sizes.expect("pipeline reports sizes");
    eprintln!(
        "kept {} of {} groups (expected {:.1}), rho = {:.4}",
        sizes.kept, sizes.k, sizes.expected_kept, s.output.plan.rho
    );
    Ok(finish(&report))
}

fn finish(report: &Report) -> i32 {
    if report.overall {
        return EXIT_OK;
    }
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!("FAILED {}: {}", c.name, c.detail);
    }
    EXIT_FAILED_CHECK
}

fn run_verify(a: &VerifyArgs) -> anyhow::Result<i32> {
    let unit = read_input(&a.input)?.unit();
    let tau = read_tau(&read_text(&a.tau)?).with_context(|| format!("{}", a.tau.display()))?;
    let mut cert = certify_overestimates(&unit, &tau)?;
    cert.extend(group_contribution_check(&unit, &tau.tau, &tau.witness_weights, a.directions as usize, a.seed)?);
    let mut quality = None;
    if let Some(p) = &a.sparsifier {
        let h = read_mhg(&read_text(p)?).with_context(|| format!("{}", p.display()))?;
        let q = measure_quality(&unit, &h, a.epsilon, a.directions as usize, a.cut_cap, a.seed)?;
        let worst = q.max_rel_err_cuts.unwrap_or(0.0).max(q.max_rel_err_random);
        cert.push(Check::new(
            "quality_within_epsilon",
            worst <= a.epsilon,
            worst,
            format!("largest relative energy error {worst:.6} against epsilon {}", a.epsilon),
        ));
        quality = Some(q);
    }
    let mut report = Report::new(cert);
    report.quality = quality;
    if let Some(p) = &a.report {
        write_atomic(p, &report.to_json())?;
    }
    Ok(finish(&report))
}

fn run_bench(a: &BenchArgs) -> anyhow::Result<i32> {
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for &r in &a.r {
        let g = generate_random(a.kind, a.n, a.k, r, a.weights, a.instance_seed)?;
        let input = HypergraphInput::Graphical(g);
        let unit = input.unit();
        for &eps in &a.epsilon {
            for &constant in &a.constant {
                for &seed in &a.seeds {
                    let cfg = PipelineConfig {
                        solver: solver_config(&a.solver),
                        schedule: a.schedule,
                        constant,
                        seed,
                        iterations: a.solver.iterations.get(),
                        certify: false,
                        ..PipelineConfig::default()
                    };
                    let start = Instant::now();
                    let s = sparsify(&input, eps, &cfg)?;
                    let h = s.sparsifier();
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    let q = measure_quality(&unit, &h, eps, a.directions as usize, a.cut_cap, seed)?;
                    let cuts = q.max_rel_err_cuts.map(|v| v.to_string()).unwrap_or_default();
                    writeln!(
                        csv,
                        "{eps},{r},{constant},{seed},{},{},{},{},{},{},{cuts},{ms:.3}",
                        unit.n(),
                        unit.m(),
                        unit.k(),
                        s.output.kept_groups.len(),
                        s.output.expected_kept,
                        q.max_rel_err_random,
                    )
                    .unwrap();
                }
            }
        }
    }
    emit(a.output.as_deref(), &csv)?;
    Ok(EXIT_OK)
}

fn run_generate(a: &GenerateArgs) -> anyhow::Result<i32> {
    let g = generate_random(a.kind, a.n, a.k, a.r, a.weights, a.seed)?;
    emit(a.output.as_deref(), &write_hgr(&g))?;
    Ok(EXIT_OK)
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes()).context("cannot write to stdout")?;
            Ok(())
        }
    }
}
