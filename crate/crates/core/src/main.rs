use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::de::DeserializeOwned;

use diversinet::error::{Error, Result};
use diversinet::experiment::{
    aggregate, run_points, sweep_points, write_csv, Axis, ExperimentConfig, NetworkSource,
    RunOptions, SweepPoint, Topology, DEFAULT_SEED,
};
use diversinet::graph::{derive_degree_rank_subgraph, read_edge_list};
use diversinet::Scheme;

const SEED_ENV: &str = "DIVERSINET_SEED";

#[derive(Parser)]
#[command(name = "diversinet", version, about = "Software-diversity network adaptation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run n_r repetitions of a single configuration
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every value of one parameter axis
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// One of rho, pa, ns, p, k, l, gamma
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<String>,
    },
    /// Write an Erdos-Renyi edge list
    GenEr {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract the subgraph induced by a window of degree ranks
    Derive {
        #[arg(long)]
        input: PathBuf,
        /// First rank (1 = highest degree)
        #[arg(long)]
        lo: usize,
        /// Last rank, inclusive
        #[arg(long)]
        hi: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List scheme tokens
    Schemes,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed (falls back to $DIVERSINET_SEED, then 42)
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Node count of a generated ER network
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability of a generated ER network
    #[arg(long)]
    p: Option<f64>,
    /// Use an edge-list file as the network
    #[arg(long, conflicts_with_all = ["n", "p"])]
    graph: Option<PathBuf>,
    #[arg(long)]
    ns: Option<usize>,
    #[arg(long)]
    pa: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    n_r: Option<usize>,
    /// on | off
    #[arg(long)]
    fp_mode: Option<String>,
    /// override | literal
    #[arg(long)]
    pv_k1_mode: Option<String>,
    /// prose | literal
    #[arg(long)]
    eab_base: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Raw per-run CSV (stdout for `run` when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aggregate CSV (stdout for `sweep` when absent)
    #[arg(long)]
    agg_out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Fill the ms column with wall time
    #[arg(long)]
    timing: bool,
}

fn token<T: DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::Config(format!("unknown {what} {s:?}")))
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

impl ConfigArgs {
    fn build(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                serde_json::from_str(&text)?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        } else if let Some(seed) = env_seed()? {
            cfg.base_seed = seed;
        }
        if let Some(path) = &self.graph {
            cfg.network = NetworkSource::File { path: path.clone() };
        }
        if self.n.is_some() || self.p.is_some() {
            let (n0, p0) = match cfg.network {
                NetworkSource::Er { n, p } => (n, p),
                _ => (1000, 0.025),
            };
            cfg.network = NetworkSource::Er {
                n: self.n.unwrap_or(n0),
                p: self.p.unwrap_or(p0),
            };
        }
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { cfg.$field = v; })* };
        }
        set!(scheme, rho, ns, pa, gamma, k, l, n_r);
        if let Some(s) = &self.fp_mode {
            cfg.fp_mode = token("fp_mode", s)?;
        }
        if let Some(s) = &self.pv_k1_mode {
            cfg.pv_k1_mode = token("pv_k1_mode", s)?;
        }
        if let Some(s) = &self.eab_base {
            cfg.eab_base = token("eab_base", s)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut w = open_out(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|source| Error::Io {
            path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
            source,
        })
}

fn emit(points: &[SweepPoint], output: &OutputArgs, raw_default: bool) -> Result<()> {
    let opts = RunOptions {
        jobs: output.jobs.max(1),
        timing: output.timing,
    };
    let rows = run_points(points, opts)?;
    if output.out.is_some() || raw_default {
        write_csv(open_out(output.out.as_deref())?, &rows)?;
    }
    if output.agg_out.is_some() || !raw_default {
        write_csv(open_out(output.agg_out.as_deref())?, &aggregate(&rows))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { cfg, output } => {
            let point = SweepPoint {
                axis: "none".into(),
                axis_value: String::new(),
                config: cfg.build()?,
            };
            emit(&[point], &output, true)
        }
        Command::Sweep { cfg, output, axis, values } => {
            let axis: Axis = axis.parse()?;
            let points = sweep_points(&cfg.build()?, axis, &values)?;
            emit(&points, &output, false)
        }
        Command::GenEr { n, p, seed, out } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("p = {p} is outside [0, 1]")));
            }
            let seed = match seed {
                Some(s) => s,
                None => env_seed()?.unwrap_or(DEFAULT_SEED),
            };
            let topology = Topology::Er { n, p };
            write_text(out.as_deref(), &topology.graph_for(seed).to_edge_list())
        }
        Command::Derive { input, lo, hi, out } => {
            let full = read_edge_list(&input)?.graph;
            let sub = derive_degree_rank_subgraph(&full, lo, hi)?;
            eprintln!("{} nodes, {} edges", sub.node_count(), sub.edge_count());
            write_text(out.as_deref(), &sub.to_edge_list())
        }
        Command::Schemes => {
            let list: String = Scheme::ALL.iter().map(|s| format!("{s}\n")).collect();
            write_text(None, &list)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Rho(_) | Error::Axis(_) | Error::Json(_) | Error::Catalog(_) => {
                    eprintln!("\n{}", Cli::command().render_usage());
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}
