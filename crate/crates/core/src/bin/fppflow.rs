use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fppflow::error::exit;
use fppflow::experiment::store::OUTPUT_ENV;
use fppflow::experiment::{export, run, Artifact, ExperimentConfig, Format, Kind, ResultStore};
use fppflow::{Error, Result};

#[derive(Parser)]
#[command(name = "fppflow", version, about = "Maximal flows and minimal cutsets in first-passage percolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal flow per (n, replicate).
    Maxflow(RunArgs),
    /// Minimal cutsets per (n, replicate).
    Mincut(RunArgs),
    /// Flow-constant estimates from cylinder flows.
    Nu(RunArgs),
    /// Law of large numbers for the rescaled maximal flow.
    Lln(RunArgs),
    /// Convergence of cut regions towards a reference set.
    Cutconv(RunArgs),
    /// Discrete divergence identity regression.
    Divergence(RunArgs),
    /// Geometry files recomputed from a stored run.
    Export {
        /// Result directory of a completed run.
        #[arg(long)]
        out: PathBuf,
        /// cutset-plaquettes, stream-field or regions.
        #[arg(long)]
        what: String,
        /// csv or json.
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn execute(kind: Kind, args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    cfg.kind = kind;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.threads.is_some() {
        cfg.threads = args.threads;
    }
    cfg.validate()?;
    let out = args
        .out
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(|root| PathBuf::from(root).join(kind.name())))
        .unwrap_or_else(|| PathBuf::from("results").join(kind.name()));
    let store = ResultStore::create(&out)?;
    let summary = run(&cfg, &store)?;
    for f in summary.files {
        println!("{}", store.path(&f).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Maxflow(a) => execute(Kind::Maxflow, a),
        Command::Mincut(a) => execute(Kind::Mincut, a),
        Command::Nu(a) => execute(Kind::Nu, a),
        Command::Lln(a) => execute(Kind::Lln, a),
        Command::Cutconv(a) => execute(Kind::Cutconv, a),
        Command::Divergence(a) => execute(Kind::Divergence, a),
        Command::Export { out, what, format, threads } => (|| {
            let what: Artifact = what.parse()?;
            let format: Format = format.parse()?;
            let store = ResultStore::open(&out)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            for f in pool.install(|| export(&store, what, format))? {
                println!("{}", store.path(&f).display());
            }
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("fppflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
