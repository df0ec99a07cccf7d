use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod manifest;
mod settings;

use settings::{FileConfig, List};

#[derive(Debug, Parser)]
#[command(name = "gapfill", version, about = "Fill gaps in well logs and benchmark the regressors that fill them")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// JSON file mirroring the flags. A run manifest is accepted too.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory of LAS files [env: GAPFILL_CORPUS]
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; every random choice is derived from it (default 0)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON object of extra mnemonic aliases, e.g. {"SGR": "GR"}
    #[arg(long, global = true)]
    aliases: Option<PathBuf>,
    /// Force the coordinate system of every well
    #[arg(long, global = true, value_parser = ["projected", "geographic"])]
    coords: Option<String>,
}

#[derive(Debug, Args, Default)]
struct SelectArgs {
    /// nphi, gr, rhob, vp, all or a comma list
    #[arg(long)]
    target: Option<String>,
    /// lr, gb, nn, all or a comma list
    #[arg(long)]
    model: Option<String>,
}

#[derive(Debug, Args, Default)]
struct GapArgs {
    /// Mean injected gap size in meters
    #[arg(long)]
    mean: Option<f64>,
    /// Standard deviation of the gap size in meters
    #[arg(long)]
    std: Option<f64>,
    /// Injected gaps per km of logged extent
    #[arg(long)]
    per_km: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct FilterArgs {
    /// Minimum logged extent in meters
    #[arg(long)]
    min_depth: Option<f64>,
    /// Largest allowed real gap in meters
    #[arg(long)]
    max_gap: Option<f64>,
    /// Minimum complete-sample ratio
    #[arg(long)]
    min_ratio: Option<f64>,
    /// complete_over_total or complete_over_incomplete
    #[arg(long)]
    ratio_mode: Option<String>,
    /// Use every loaded well
    #[arg(long)]
    no_filter: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse LAS files and report problems
    Validate {
        /// Files or directories (defaults to the corpus)
        paths: Vec<PathBuf>,
    },
    /// Missingness statistics and gap coincidence histogram
    Stats,
    /// Apply the corpus filter
    Filter {
        #[command(flatten)]
        filter: FilterArgs,
    },
    /// Blank synthetic gaps and keep the ground truth
    Inject {
        /// A single LAS file instead of the corpus
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        gaps: GapArgs,
        /// Blank each property independently
        #[arg(long)]
        unaligned: bool,
    },
    /// Train models on the corpus and save them as JSON
    Train {
        #[command(flatten)]
        select: SelectArgs,
        /// Restrict training to these wells
        #[arg(long)]
        well: Vec<String>,
    },
    /// Fill the real gaps of a LAS file
    Complete {
        #[arg(long)]
        input: PathBuf,
        /// Saved model file, or train-local to fit on the input well
        #[arg(long, default_value = "train-local")]
        model: String,
        /// Model kind for train-local
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        target: Option<String>,
    },
    /// Score models on injected gaps
    Evaluate {
        #[command(flatten)]
        select: SelectArgs,
        /// local, global, neighbors:K or a comma list
        #[arg(long)]
        strategy: Option<String>,
        #[command(flatten)]
        gaps: GapArgs,
        #[command(flatten)]
        filter: FilterArgs,
        /// Number of test wells (default all eligible)
        #[arg(long)]
        test_wells: Option<usize>,
        /// Skip the SVG scatter plots
        #[arg(long)]
        no_plots: bool,
    },
    /// Score against the number of nearest neighbour wells
    Sweep {
        #[command(flatten)]
        select: SelectArgs,
        #[command(flatten)]
        gaps: GapArgs,
        #[command(flatten)]
        filter: FilterArgs,
        /// Test wells (default: chosen by seed)
        #[arg(long)]
        well: Vec<String>,
        #[arg(long)]
        test_wells: Option<usize>,
        /// Largest neighbour count to try, at most 10 (default 10)
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Correlation matrix of the four properties
    Correlate {
        /// per-well or global (default both)
        #[arg(long)]
        mode: Option<String>,
    },
    /// Generate a synthetic corpus
    Synth {
        /// standard, linear-exact, shared-law or distinct-law
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
        /// JSON generator spec
        #[arg(long)]
        spec: Option<PathBuf>,
        /// Override the number of wells
        #[arg(long)]
        wells: Option<usize>,
    },
    /// Draw log tracks of a LAS file
    Plot {
        #[arg(long)]
        input: PathBuf,
        /// Completion audit CSV whose filled values are overlaid
        #[arg(long)]
        audit: Option<PathBuf>,
        #[arg(long)]
        target: Option<String>,
    },
}

fn list(s: &Option<String>) -> Option<List> {
    s.clone().map(List::One)
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Stats => "stats",
            Command::Filter { .. } => "filter",
            Command::Inject { .. } => "inject",
            Command::Train { .. } => "train",
            Command::Complete { .. } => "complete",
            Command::Evaluate { .. } => "evaluate",
            Command::Sweep { .. } => "sweep",
            Command::Correlate { .. } => "correlate",
            Command::Synth { .. } => "synth",
            Command::Plot { .. } => "plot",
        }
    }

    /// Flags that mirror config keys.
    fn flag_config(&self) -> anyhow::Result<FileConfig> {
        let mut cfg = FileConfig::default();
        let apply_select = |cfg: &mut FileConfig, s: &SelectArgs| {
            cfg.target = list(&s.target);
            cfg.model = list(&s.model);
        };
        let apply_gaps = |cfg: &mut FileConfig, g: &GapArgs| {
            cfg.mean = g.mean;
            cfg.std = g.std;
            cfg.per_km = g.per_km;
        };
        let apply_filter = |cfg: &mut FileConfig, f: &FilterArgs| -> anyhow::Result<()> {
            cfg.min_depth = f.min_depth;
            cfg.max_gap = f.max_gap;
            cfg.min_ratio = f.min_ratio;
            if let Some(m) = &f.ratio_mode {
                cfg.ratio_mode = Some(serde_json::from_value(serde_json::Value::String(m.replace('-', "_")))
                    .map_err(|_| gapfill::Error::InvalidConfig(format!("unknown ratio mode {m:?}")))?);
            }
            if f.no_filter {
                cfg.no_filter = Some(true);
            }
            Ok(())
        };
        match self {
            Command::Filter { filter } => apply_filter(&mut cfg, filter)?,
            Command::Inject { gaps, .. } => apply_gaps(&mut cfg, gaps),
            Command::Train { select, .. } => apply_select(&mut cfg, select),
            Command::Evaluate { select, strategy, gaps, filter, test_wells, .. } => {
                apply_select(&mut cfg, select);
                cfg.strategy = list(strategy);
                apply_gaps(&mut cfg, gaps);
                apply_filter(&mut cfg, filter)?;
                cfg.test_wells = *test_wells;
            }
            Command::Sweep { select, gaps, filter, test_wells, k_max, .. } => {
                apply_select(&mut cfg, select);
                apply_gaps(&mut cfg, gaps);
                apply_filter(&mut cfg, filter)?;
                cfg.test_wells = *test_wells;
                cfg.k_max = *k_max;
            }
            _ => {}
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<commands::Outcome> {
    let g = &cli.global;
    let base = match &g.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut flags = cli.command.flag_config()?;
    flags.corpus = g.corpus.clone();
    flags.out = g.out.clone();
    flags.seed = g.seed;
    flags.jobs = g.jobs;
    let merged = base.overlay(flags);
    let seed_given = merged.seed.is_some();
    let settings = settings::Settings::resolve(merged)?;

    if let Some(n) = settings.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut parse = gapfill::las::ParseOptions::default();
    if let Some(path) = &g.aliases {
        let text = std::fs::read_to_string(path)
            .map_err(|e| gapfill::Error::Io { path: path.clone(), source: e })?;
        parse.aliases = gapfill::las::AliasTable::from_json(&text)?;
    }
    parse.coord_override = g.coords.as_deref().map(|c| match c {
        "geographic" => gapfill::well::CoordSystem::GeographicDegrees,
        _ => gapfill::well::CoordSystem::ProjectedMeters,
    });
    let ctx = commands::Context { name: cli.command.name(), settings, parse, seed_given };

    match cli.command {
        Command::Validate { paths } => commands::validate(&ctx, &paths),
        Command::Stats => commands::stats(&ctx),
        Command::Filter { .. } => commands::filter(&ctx),
        Command::Inject { input, unaligned, .. } => commands::inject(&ctx, input.as_deref(), !unaligned),
        Command::Train { well, .. } => commands::train(&ctx, &well),
        Command::Complete { input, model, kind, target } => {
            commands::complete(&ctx, &input, &model, kind.as_deref(), target.as_deref())
        }
        Command::Evaluate { no_plots, .. } => commands::evaluate(&ctx, !no_plots),
        Command::Sweep { well, .. } => commands::sweep(&ctx, &well),
        Command::Correlate { mode } => commands::correlate(&ctx, mode.as_deref()),
        Command::Synth { preset, spec, wells } => commands::synth(&ctx, preset.as_deref(), spec.as_deref(), wells),
        Command::Plot { input, audit, target } => commands::plot(&ctx, &input, audit.as_deref(), target.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
