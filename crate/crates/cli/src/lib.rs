//! Command-line front end for the `sublab` experiments.
//!
//! Each subcommand writes JSON (with a top-level `schema_version`) and,
//! where useful, CSV and SVG files into the output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sublab::orbit::{StartRegion, StopOn};

pub use config::{ExperimentConfig, Section};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "sublab", version, about = "Exact experiments with subtractive maps T_{a,b}")]
pub struct Cli {
    /// JSON config file; command-line flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory (default: $SUBLAB_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Significant digits of decimal renderings.
    #[arg(long, global = true)]
    pub digits: Option<usize>,

    /// Also write the effective configuration to this file.
    #[arg(long, global = true)]
    pub write_config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate one exact point.
    Orbit(OrbitArgs),
    /// Monte Carlo absorption into A and D, with Theta statistics.
    Absorb(AbsorbArgs),
    /// Simplicial cone recursion for the three-dimensional map.
    Cones(ConesArgs),
    /// Exact check of the conjugacy between T_{1,1} and S_{1,2}.
    Conjugacy(ConjugacyArgs),
    /// Invariance checks and orbit statistics for variants.
    Variant(VariantArgs),
    /// Run several sections and bundle them into one JSON file.
    Report(ReportArgs),
}

#[derive(Debug, Args, Default)]
pub struct MapArgs {
    /// Number of leading coordinates kept as they are.
    #[arg(long)]
    pub a: Option<usize>,
    /// Number of trailing coordinates that lose the subtracted one.
    #[arg(long)]
    pub b: Option<usize>,
    /// Subtract x_i instead of x_a (1 <= i <= a).
    #[arg(long)]
    pub variant_index: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct SampleArgs {
    /// Number of random samples (default 10000).
    #[arg(long)]
    pub samples: Option<u64>,
    /// Required by every stochastic command; sample k uses stream k.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fractional bits of sampled dyadic coordinates.
    #[arg(long)]
    pub bits: Option<u32>,
}

fn parse_stop_on(s: &str) -> Result<StopOn, String> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .map_err(|_| format!("expected one of limit, enter-a, enter-d; got {s:?}"))
}

fn parse_region(s: &str) -> Result<StartRegion, String> {
    match s {
        "ca" | "complement-a" | "complement_a" => Ok(StartRegion::ComplementA),
        "lambda" => Ok(StartRegion::Lambda),
        _ => Err(format!("expected complement-a or lambda; got {s:?}")),
    }
}

#[derive(Debug, Args, Default)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Comma-separated nondecreasing exact coordinates, e.g. 1/3,1/2,2.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    /// Stop once x_{a+1} < eps * x_{a+b} of the start (exact rational).
    #[arg(long)]
    pub eps: Option<String>,
    /// Largest number of steps (default 1000000).
    #[arg(long)]
    pub cap: Option<u64>,
    /// limit, enter-a or enter-d.
    #[arg(long, value_parser = parse_stop_on)]
    pub stop_on: Option<StopOn>,
    /// Write every visited point to orbit_trace.csv.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args, Default)]
pub struct AbsorbArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub sampling: SampleArgs,
    /// Step cap per orbit and per phase (default 100000).
    #[arg(long)]
    pub cap: Option<u64>,
    /// complement-a (default) or lambda.
    #[arg(long, value_parser = parse_region)]
    pub region: Option<StartRegion>,
    /// Samples for the Theta/Gamma measure estimate (0 skips it).
    #[arg(long)]
    pub alpha_samples: Option<u64>,
    /// Rerun a prefix of the samples with this larger cap.
    #[arg(long)]
    pub recheck_cap: Option<u64>,
    /// Prefix size for the recheck (default a tenth of the samples).
    #[arg(long)]
    pub recheck_samples: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct ConesArgs {
    /// Deepest recursion level, at most 12 (default 2).
    #[arg(long)]
    pub depth: Option<u32>,
    /// Deepest level rendered to SVG.
    #[arg(long)]
    pub svg_max_depth: Option<u32>,
    /// Deepest level whose cones are listed in cones_tree.json.
    #[arg(long)]
    pub tree_max_depth: Option<u32>,
}

#[derive(Debug, Args, Default)]
pub struct ConjugacyArgs {
    #[command(flatten)]
    pub sampling: SampleArgs,
    /// Steps compared per point (default 50).
    #[arg(long)]
    pub steps: Option<u64>,
    /// Largest denominator of the random rational points.
    #[arg(long)]
    pub max_den: Option<i64>,
}

#[derive(Debug, Args, Default)]
pub struct VariantArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub sampling: SampleArgs,
    #[arg(long)]
    pub cap: Option<u64>,
}

#[derive(Debug, Args, Default)]
pub struct ReportArgs {
    /// Sections to run, comma-separated.
    #[arg(long, value_delimiter = ',', value_enum)]
    pub sections: Vec<Section>,
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub sampling: SampleArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long)]
    pub depth: Option<u32>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub alpha_samples: Option<u64>,
}

impl MapArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        c.a = self.a;
        c.b = self.b;
        c.variant_index = self.variant_index;
    }
}

impl SampleArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        c.samples = self.samples;
        c.seed = self.seed;
        c.bits = self.bits;
    }
}

impl Cli {
    /// The configuration given on the command line alone.
    pub fn overrides(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig { out_dir: self.out_dir.clone(), digits: self.digits, ..Default::default() };
        match &self.command {
            Command::Orbit(o) => {
                o.map.apply(&mut c);
                c.point = o.point.clone();
                c.eps = o.eps.clone();
                c.cap = o.cap;
                c.stop_on = o.stop_on;
                c.trace = o.trace.then_some(true);
            }
            Command::Absorb(o) => {
                o.map.apply(&mut c);
                o.sampling.apply(&mut c);
                c.cap = o.cap;
                c.region = o.region;
                c.alpha_samples = o.alpha_samples;
                c.recheck_cap = o.recheck_cap;
                c.recheck_samples = o.recheck_samples;
            }
            Command::Cones(o) => {
                c.depth = o.depth;
                c.svg_max_depth = o.svg_max_depth;
                c.tree_max_depth = o.tree_max_depth;
            }
            Command::Conjugacy(o) => {
                o.sampling.apply(&mut c);
                c.steps = o.steps;
                c.max_den = o.max_den;
            }
            Command::Variant(o) => {
                o.map.apply(&mut c);
                o.sampling.apply(&mut c);
                c.cap = o.cap;
            }
            Command::Report(o) => {
                o.map.apply(&mut c);
                o.sampling.apply(&mut c);
                c.sections = (!o.sections.is_empty()).then(|| o.sections.clone());
                c.point = o.point.clone();
                c.eps = o.eps.clone();
                c.cap = o.cap;
                c.depth = o.depth;
                c.steps = o.steps;
                c.alpha_samples = o.alpha_samples;
            }
        }
        c
    }

    /// Config file overlaid with the command-line flags.
    pub fn effective_config(&self) -> CliResult<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        Ok(base.overlay(&self.overrides()))
    }
}

/// Runs a parsed command line; returns the files written.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let cfg = cli.effective_config()?;
    if let Some(path) = &cli.write_config {
        std::fs::write(path, cfg.to_json()? + "\n")?;
    }
    let mut out = output::Emitter::new(&cfg.resolve_out_dir())?;
    match &cli.command {
        Command::Orbit(_) => commands::orbit(&cfg, &mut out)?,
        Command::Absorb(_) => commands::absorb(&cfg, &mut out)?,
        Command::Cones(_) => commands::cones(&cfg, &mut out)?,
        Command::Conjugacy(_) => commands::conjugacy(&cfg, &mut out)?,
        Command::Variant(_) => commands::variant(&cfg, &mut out)?,
        Command::Report(_) => commands::report(&cfg, &mut out)?,
    }
    Ok(out.written().to_vec())
}

/// Parses `args` (including the program name) and runs them, returning the
/// process exit code. Messages go to stdout/stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { error::EXIT_USAGE } else { error::EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            error::EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
