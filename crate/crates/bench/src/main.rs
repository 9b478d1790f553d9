use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use gridswarm::{parse_world, MoveMode, ParticleKind, Strategy};
use gridswarm_bench::experiment::write_report_json;
use gridswarm_bench::{
    emit_frames, emit_state_frames, generate_world, load_corpus, ratio_summary, run_collect,
    run_experiment, sticky_states, write_csv, write_reports, Algorithm, GeneratorSpec, Placement,
    RunOptions,
};

#[derive(Debug, Parser)]
#[command(name = "gridswarm", version, about = "Collect particle swarms with global moves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Budgets {
    /// Node budget for the optimal search.
    #[arg(long, default_value_t = gridswarm::optimal::DEFAULT_NODE_BUDGET)]
    node_budget: u64,
    /// Multiplier on the greedy n^3 command bound.
    #[arg(long, default_value_t = 1.0)]
    bound_factor: f64,
    /// Multiplier on the sticky m*D command bound.
    #[arg(long, default_value_t = 2.0)]
    budget_factor: f64,
    /// Record wall-clock time in reports (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one collection algorithm on a map file.
    Collect {
        #[arg(long)]
        world: PathBuf,
        /// optimal, greedy or sticky (greedy:<strategy> is also accepted).
        #[arg(long)]
        algorithm: Algorithm,
        /// Pair strategy for greedy: closest, furthest, first, firstlast, random.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long, default_value_t = MoveMode::Discrete)]
        mode: MoveMode,
        /// Particle kind; defaults to large for sticky and small otherwise.
        #[arg(long)]
        kind: Option<ParticleKind>,
        /// Seed for the random pair strategy.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for one SVG frame per state.
        #[arg(long)]
        frames: Option<PathBuf>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        budgets: Budgets,
    },
    /// Generate a map file.
    Generate {
        /// rectangle:WxH, polyomino:WxH:N or vascular:WxH:N
        #[arg(long)]
        spec: GeneratorSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// all, none, or a particle count placed at random.
        #[arg(long, default_value = "all")]
        particles: String,
        /// Size of a contiguous target region.
        #[arg(long, default_value_t = 0)]
        targets: usize,
    },
    /// Run algorithms over a directory of map files and write a CSV.
    Bench {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated algorithm list.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "optimal,greedy:closest,greedy:furthest,greedy:first"
        )]
        algorithms: Vec<Algorithm>,
        /// Directory for one JSON report per run.
        #[arg(long)]
        reports: Option<PathBuf>,
        #[arg(long, default_value_t = MoveMode::Discrete)]
        mode: MoveMode,
        #[command(flatten)]
        budgets: Budgets,
    },
}

fn run_options(mode: MoveMode, b: &Budgets) -> RunOptions {
    RunOptions {
        mode,
        node_budget: b.node_budget,
        bound_factor: b.bound_factor,
        sticky_budget_factor: b.budget_factor,
        timing: b.timing,
    }
}

fn resolve_algorithm(alg: Algorithm, strategy: Option<&str>, seed: Option<u64>) -> Result<Algorithm> {
    let Algorithm::Greedy(mut s) = alg else {
        if strategy.is_some() {
            bail!("--strategy only applies to greedy");
        }
        return Ok(alg);
    };
    if let Some(token) = strategy {
        s = match (token, seed) {
            ("random", seed) => Strategy::Random { seed: seed.unwrap_or(0) },
            (token, _) => token.parse().map_err(anyhow::Error::msg)?,
        };
    }
    if let (Strategy::Random { .. }, Some(seed)) = (s, seed) {
        s = Strategy::Random { seed };
    }
    Ok(Algorithm::Greedy(s))
}

fn world_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "world".into())
}

#[allow(clippy::too_many_arguments)]
fn collect(
    world: &Path,
    alg: Algorithm,
    mode: MoveMode,
    kind: Option<ParticleKind>,
    frames: Option<&Path>,
    json: Option<&Path>,
    opts: &RunOptions,
) -> Result<i32> {
    let text = fs::read_to_string(world).with_context(|| format!("reading {}", world.display()))?;
    let kind = kind.unwrap_or(alg.default_kind());
    let (w, c) = parse_world(&text, kind).with_context(|| format!("parsing {}", world.display()))?;
    let report = run_collect(&world_id(world), &w, &c, alg, opts);

    if let Some(dir) = frames {
        let seq = report.sequence();
        if alg == Algorithm::Sticky {
            let states = sticky_states(&w, &c, &seq)?;
            emit_state_frames(&w, &states, dir)?;
        } else {
            emit_frames(&w, &c, &seq, mode, dir)?;
        }
    }
    match json {
        Some(path) => write_report_json(&report, path)?,
        None => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    if let Some(e) = &report.error {
        eprintln!("gridswarm: {}: {e}", report.status.as_str());
    }
    Ok(report.status.exit_code())
}

fn generate(spec: GeneratorSpec, seed: u64, out: &Path, particles: &str, targets: usize) -> Result<()> {
    let placement = match particles {
        "all" => Placement::EveryFreeCell,
        "none" => Placement::Nothing,
        n => Placement::Random(n.parse().with_context(|| format!("bad --particles {n:?}"))?),
    };
    let spec = GeneratorSpec { seed, ..spec }.with_particles(placement).with_targets(targets);
    let world = generate_world(&spec)?;
    fs::write(out, world.to_map()).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn bench(corpus: &Path, out: &Path, algorithms: &[Algorithm], reports: Option<&Path>, opts: &RunOptions) -> Result<()> {
    let entries = load_corpus(corpus).with_context(|| format!("reading corpus {}", corpus.display()))?;
    let runs = run_experiment(&entries, algorithms, opts);
    let file = fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&runs, io::BufWriter::new(file))?;
    if let Some(dir) = reports {
        write_reports(&runs, dir)?;
    }
    for (label, (mean, n)) in ratio_summary(&runs) {
        eprintln!("{label}: mean ratio to optimal {mean:.3} over {n} worlds");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Collect {
            world,
            algorithm,
            strategy,
            mode,
            kind,
            seed,
            frames,
            json,
            budgets,
        } => {
            let alg = resolve_algorithm(algorithm, strategy.as_deref(), seed)?;
            let opts = run_options(mode, &budgets);
            collect(&world, alg, mode, kind, frames.as_deref(), json.as_deref(), &opts)
        }
        Command::Generate {
            spec,
            seed,
            out,
            particles,
            targets,
        } => generate(spec, seed, &out, &particles, targets).map(|()| 0),
        Command::Bench {
            corpus,
            out,
            algorithms,
            reports,
            mode,
            budgets,
        } => {
            let opts = run_options(mode, &budgets);
            bench(&corpus, &out, &algorithms, reports.as_deref(), &opts).map(|()| 0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { 1 } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("gridswarm: {e:#}");
            ExitCode::from(1)
        }
    }
}
