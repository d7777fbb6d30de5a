use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use resistnet::drk::{self, DrkOptions, Variant};
use resistnet::experiment::{
    compare, metric, run_scenario, Algorithm, ConvergenceTrace, GraphSpec, Init, Precision, Scenario, ScenarioReport,
};
use resistnet::graph::{barbell, small_world, Graph};
use resistnet::spectral::{
    check_conjecture, effective_resistances, rate_rho_norm_proportional, rate_rho_normalized, spectral,
    ResistanceTable,
};

#[derive(Parser)]
#[command(name = "resistnet", version, about = "Effective resistances, decentralized Kaczmarz and gossip experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph as a 1-based edge list.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Write to this file instead of standard output.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Dense spectral quantities of a graph.
    Oracle {
        #[arg(long)]
        graph: String,
        /// Write the resistance table as `i,j,R` CSV (`-` for standard output).
        #[arg(long)]
        resistances: Option<PathBuf>,
    },
    /// Decentralized randomized Kaczmarz for the Laplacian pseudoinverse.
    Drk(DrkArgs),
    /// Randomized gossip averaging.
    Gossip(GossipArgs),
    /// Run a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Events each trace needs to reach a relative error.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Relative error level.
        #[arg(long)]
        threshold: f64,
    },
}

#[derive(Subcommand)]
enum GenKind {
    SmallWorld {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    Barbell {
        /// Nodes per clique.
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Edge-list file, `small-world:N:M:SEED` or `barbell:N`.
    #[arg(long)]
    graph: String,
    #[arg(long, default_value_t = 10_000)]
    events: u64,
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    /// Seed of the first sample path.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Relative error reported as events-to-threshold.
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    #[arg(long, value_enum, default_value_t = Prec::F64)]
    precision: Prec,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DrkArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = VariantArg::Standard)]
    variant: VariantArg,
    /// Run cyclically through the nodes instead of sampling them.
    #[arg(long)]
    cyclic: bool,
    /// Write resistances estimated from the first path's final iterate.
    #[arg(long)]
    resistances: Option<PathBuf>,
}

#[derive(Args)]
struct GossipArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = SchemeArg::Classic)]
    scheme: SchemeArg,
    /// `barbell-normal` or a file of initial values, one per line.
    #[arg(long, default_value = "barbell-normal")]
    init: String,
    /// Resistance table (`i,j,R` CSV) for the effres scheme; computed
    /// exactly when omitted.
    #[arg(long)]
    resistances: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Prec {
    F32,
    F64,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Standard,
    Normalized,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Classic,
    Effres,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { kind, out } => {
            let g: Graph<f64> = match kind {
                GenKind::SmallWorld { n, m, seed } => small_world(n, m, seed)?,
                GenKind::Barbell { n } => barbell(n)?,
            };
            match out {
                Some(p) => g.write_edge_list(&p).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{}", g.to_edge_list()),
            }
        }
        Command::Oracle { graph, resistances } => oracle(&graph, resistances.as_deref())?,
        Command::Drk(args) => {
            let algorithm = match (args.cyclic, args.variant) {
                (true, _) => Algorithm::CyclicKaczmarz,
                (false, VariantArg::Standard) => Algorithm::DrkStandard,
                (false, VariantArg::Normalized) => Algorithm::DrkNormalized,
            };
            let s = scenario(&args.common, algorithm)?;
            let report = run_scenario(&s).with_context(|| format!("{} on {}", s.algorithm, s.graph))?;
            print!("{report}");
            if let Some(path) = &args.resistances {
                let variant = match args.variant {
                    VariantArg::Standard => Variant::Standard,
                    VariantArg::Normalized => Variant::Normalized,
                };
                drk_resistances(&s, variant, args.cyclic, path)?;
                println!("estimated resistances written to {}", path.display());
            }
        }
        Command::Gossip(args) => {
            let algorithm = match args.scheme {
                SchemeArg::Classic => Algorithm::GossipClassic,
                SchemeArg::Effres => Algorithm::GossipEffres,
            };
            let mut s = scenario(&args.common, algorithm)?;
            s.init = match args.init.as_str() {
                "barbell-normal" => Init::BarbellNormal,
                other => Init::File(PathBuf::from(other.strip_prefix("file:").unwrap_or(other))),
            };
            s.resistances = args.resistances;
            print!("{}", run_scenario(&s).with_context(|| format!("{} on {}", s.algorithm, s.graph))?);
        }
        Command::Run { scenario } => {
            let s = Scenario::load(&scenario).with_context(|| format!("loading {}", scenario.display()))?;
            let report: ScenarioReport = run_scenario(&s)?;
            print!("{report}");
            if let Some(out) = &s.out {
                println!("trace written to {}", out.display());
            }
        }
        Command::Compare { a, b, threshold } => {
            if !(threshold > 0.0) {
                bail!("threshold must be a positive relative error");
            }
            let ta = read_trace(&a)?;
            let tb = read_trace(&b)?;
            let c = compare(&ta, &tb, metric(threshold))?;
            println!("a: {}", a.display());
            println!("b: {}", b.display());
            println!("threshold (relative error): {threshold:e}");
            println!("{c}");
        }
    }
    Ok(())
}

fn scenario(c: &Common, algorithm: Algorithm) -> Result<Scenario> {
    let mut s = Scenario::new(c.graph.parse::<GraphSpec>()?, algorithm);
    s.events = c.events;
    s.seeds = c.seeds;
    s.seed = c.seed;
    s.stride = c.stride;
    s.threshold = c.threshold;
    s.precision = match c.precision {
        Prec::F32 => Precision::F32,
        Prec::F64 => Precision::F64,
    };
    s.out = Some(c.out.clone());
    Ok(s)
}

fn read_trace(path: &Path) -> Result<ConvergenceTrace> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ConvergenceTrace::from_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

fn oracle(spec: &str, resistances: Option<&Path>) -> Result<()> {
    let (g, _) = spec.parse::<GraphSpec>()?.build::<f64>().with_context(|| format!("loading graph {spec}"))?;
    let sd = spectral(&g)?;
    let rho = rate_rho_norm_proportional(&g)?;
    let rho_s = rate_rho_normalized(&g)?;
    let c = check_conjecture(&g)?;
    println!("nodes: {}", g.node_count());
    println!("edges: {}", g.edge_count());
    println!("lambda_min_plus: {}", sd.lambda_min_plus);
    println!("rho: {rho}");
    println!("rho_S: {rho_s}");
    println!(
        "conjecture: {} (lhs {} vs rhs {})",
        if c.holds { "holds" } else { "violated" },
        c.lhs,
        c.rhs
    );
    if let Some(path) = resistances {
        let csv = effective_resistances(&sd, &g)?.to_csv();
        if path == Path::new("-") {
            print!("{csv}");
        } else {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

/// Replays the first sample path and turns its final iterate into a
/// resistance table.
fn drk_resistances(s: &Scenario, variant: Variant, cyclic: bool, path: &Path) -> Result<()> {
    let (g, _) = s.graph.build::<f64>()?;
    let reference = spectral(&g)?.pinv;
    let opts = DrkOptions { stride: usize::MAX, ..Default::default() };
    let run = if cyclic {
        drk::run_cyclic(&g, &reference, s.events, &opts)?
    } else {
        drk::run(&g, variant, &reference, s.seed, s.events, &opts)?
    };
    let table = ResistanceTable::from_pinv(&run.state.assemble(), &g)?;
    fs::write(path, table.to_csv()).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
