//! Command-line driver for `regpan`.
//!
//! Every run is described by a [`RunConfig`]: a JSON file (or inline JSON)
//! given with `--config`, overridden field by field by the command-line
//! flags. The resolved config, including the seed actually used, can be
//! saved with `--save-config` and replayed later.
//!
//! Primary outputs go to `--output` (a file, or a directory for `pan` and
//! `pan-all`) or to stdout, and are byte-identical for identical config and
//! seed. Timings only ever go to stderr.

pub mod bench;
mod commands;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use regpan::panning::StopRule;
use regpan::rng::DEFAULT_SEED;
use regpan::sbm::SbmParams;
use regpan::solvers::{SolverConfig, SolverKind};
use regpan::{Error, ErrorClass, Result};
use serde::{Deserialize, Serialize};

pub use bench::{bench_csv, run_bench, BenchConfig, BenchRow};

#[derive(Debug, Parser)]
#[command(name = "regpan", version, about = "Regularity checks, QUBO solving and community panning")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Input file: graph, bipartite graph or QUBO JSON depending on the command.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output file, or output directory for `pan` and `pan-all`.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Integer seed, or `random` to draw one (it is reported on stderr).
    #[arg(long, global = true)]
    pub seed: Option<SeedArg>,
    #[arg(long, global = true)]
    pub solver: Option<SolverKind>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Run configuration: a JSON file, or inline JSON starting with `{`.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// URL of a remote solver.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    /// Write the resolved run configuration here.
    #[arg(long, global = true)]
    pub save_config: Option<PathBuf>,
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a stochastic block model graph with its labels.
    GenSbm(GenSbmArgs),
    /// Split a graph at random into a bipartite graph.
    Bipartize,
    /// Decide whether a bipartite graph is epsilon-regular.
    CheckRegularity,
    /// Minimize a QUBO given as JSON.
    SolveQubo,
    /// Extract one community by repeated min-deviation selection.
    Pan,
    /// Extract communities one after another.
    PanAll(PanAllArgs),
    /// Quantum existence test for an irregular subset pair.
    Qexist(QexistArgs),
    /// Time solvers across problem sizes.
    Bench(BenchArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenSbm(_) => "gen-sbm",
            Command::Bipartize => "bipartize",
            Command::CheckRegularity => "check-regularity",
            Command::SolveQubo => "solve-qubo",
            Command::Pan => "pan",
            Command::PanAll(_) => "pan-all",
            Command::Qexist(_) => "qexist",
            Command::Bench(_) => "bench",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenSbmArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Community probabilities, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub probs: Option<Vec<f64>>,
    /// Density matrix: rows separated by `;`, entries by `,`.
    #[arg(long)]
    pub densities: Option<String>,
    /// Label file; defaults to the output path with a `.labels` extension.
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PanAllArgs {
    /// Relative energy-per-node jump that ends the loop.
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long)]
    pub min_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct QexistArgs {
    /// Width of the phase register.
    #[arg(long)]
    pub phase_bits: Option<usize>,
    /// Simulate in the two-dimensional Grover plane.
    #[arg(long)]
    pub fast: bool,
    /// Decide from sampled measurements instead of exact probabilities.
    #[arg(long)]
    pub shots: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Total node counts `n1 + n2`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub solvers: Option<Vec<SolverKind>>,
    /// Edge probability of the benchmark graphs.
    #[arg(long)]
    pub density: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

impl FromStr for SeedArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "random" {
            return Ok(SeedArg::Random);
        }
        s.parse()
            .map(SeedArg::Fixed)
            .map_err(|_| format!("`{s}` is neither an integer nor `random`"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QexistConfig {
    pub phase_bits: Option<usize>,
    pub fast: bool,
    pub shots: Option<usize>,
}

/// Everything a run depends on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Informational; filled in when the config is saved.
    pub command: Option<String>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Label file written by `gen-sbm`.
    pub labels: Option<PathBuf>,
    pub seed: Option<u64>,
    pub solver: Option<SolverKind>,
    pub solver_config: SolverConfig,
    pub endpoint: Option<String>,
    pub epsilon: Option<f64>,
    pub sbm: Option<SbmParams>,
    pub stop: StopRule,
    pub qexist: QexistConfig,
    pub bench: BenchConfig,
}

impl RunConfig {
    /// Reads a config from a path, or parses it directly when `spec` is
    /// inline JSON.
    pub fn load(spec: &str) -> Result<Self> {
        let text = if spec.trim_start().starts_with('{') {
            spec.to_string()
        } else {
            fs::read_to_string(spec)?
        };
        Ok(serde_json::from_str(&text)?)
    }

    /// Applies command-line overrides and fixes the seed.
    pub fn resolve(mut self, cli: &Cli) -> Result<Self> {
        let c = &cli.common;
        self.command = Some(cli.command.name().to_string());
        if c.input.is_some() {
            self.input.clone_from(&c.input);
        }
        if c.output.is_some() {
            self.output.clone_from(&c.output);
        }
        match c.seed {
            Some(SeedArg::Fixed(s)) => self.seed = Some(s),
            Some(SeedArg::Random) => {
                let s: u64 = rand::random();
                eprintln!("seed: {s}");
                self.seed = Some(s);
            }
            None => {
                self.seed.get_or_insert(DEFAULT_SEED);
            }
        }
        self.solver_config.seed = self.seed.unwrap_or(DEFAULT_SEED);
        if c.solver.is_some() {
            self.solver = c.solver;
        }
        if c.endpoint.is_some() {
            self.endpoint.clone_from(&c.endpoint);
        }
        if c.epsilon.is_some() {
            self.epsilon = c.epsilon;
        }
        match &cli.command {
            Command::GenSbm(a) => self.apply_sbm(a)?,
            Command::PanAll(a) => {
                if let Some(g) = a.gap {
                    self.stop.gap_threshold = g;
                }
                if let Some(m) = a.min_size {
                    self.stop.min_size = m;
                }
            }
            Command::Qexist(a) => {
                if a.phase_bits.is_some() {
                    self.qexist.phase_bits = a.phase_bits;
                }
                self.qexist.fast |= a.fast;
                if a.shots.is_some() {
                    self.qexist.shots = a.shots;
                }
            }
            Command::Bench(a) => {
                if let Some(s) = &a.sizes {
                    self.bench.sizes.clone_from(s);
                }
                if let Some(s) = &a.solvers {
                    self.bench.solvers.clone_from(s);
                }
                if let Some(d) = a.density {
                    self.bench.density = d;
                }
            }
            _ => {}
        }
        Ok(self)
    }

    fn apply_sbm(&mut self, a: &GenSbmArgs) -> Result<()> {
        if a.labels.is_some() {
            self.labels.clone_from(&a.labels);
        }
        match (&a.probs, &a.densities) {
            (Some(p), Some(d)) => {
                let n = a.n.or(self.sbm.as_ref().map(|s| s.n)).ok_or_else(|| missing("--n"))?;
                self.sbm = Some(SbmParams::new(n, p.clone(), parse_matrix(d)?)?);
            }
            (None, None) => {
                if let (Some(n), Some(s)) = (a.n, self.sbm.as_mut()) {
                    s.n = n;
                }
            }
            _ => {
                return Err(Error::InvalidParameter(
                    "--probs and --densities must be given together".into(),
                ))
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn solver_kind(&self) -> SolverKind {
        self.solver.unwrap_or(SolverKind::Sa)
    }

    pub fn input(&self) -> Result<&Path> {
        self.input.as_deref().ok_or_else(|| missing("--input"))
    }

    /// Epsilon, required to be positive and finite.
    pub fn epsilon(&self) -> Result<f64> {
        let eps = self.epsilon.ok_or_else(|| missing("--epsilon"))?;
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {eps}")));
        }
        Ok(eps)
    }
}

fn missing(what: &str) -> Error {
    Error::InvalidParameter(format!("{what} is required"))
}

/// Parses `a,b;c,d` into rows.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("invalid matrix entry `{t}`")))
                })
                .collect()
        })
        .collect()
}

/// Process exit code for an error: 1 domain, 2 I/O, 3 guard.
pub fn exit_code(e: &Error) -> u8 {
    match e.class() {
        ErrorClass::Domain => 1,
        ErrorClass::Io => 2,
        ErrorClass::Guard => 3,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let base = match &cli.common.config {
        Some(spec) => RunConfig::load(spec)?,
        None => RunConfig::default(),
    };
    let cfg = base.resolve(cli)?;
    if let Some(path) = &cli.common.save_config {
        fs::write(path, serde_json::to_string_pretty(&cfg)? + "\n")?;
    }
    commands::dispatch(&cli.command, &cfg)
}
