//! Monte Carlo experiment harness.
//!
//! One run builds (or loads) a network, assigns packages, applies an
//! adaptation scheme, seeds attackers, runs the epidemic and scores the
//! result. Every stage draws from its own ChaCha stream keyed by
//! `base_seed ^ run_index`, so changing one stage never shifts another's
//! random numbers.

use std::borrow::Cow;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adaptation::{no_a, random_a, random_graph_c, sda, EabBase, Scheme, SdaParams};
use crate::epidemic::{run_epidemic, FpMode};
use crate::error::{Error, Result};
use crate::graph::{derive_degree_rank_subgraph, generate_er, read_edge_list, Graph};
use crate::metrics::{metric_dc, metric_pc, metric_sg, MetricReport};
use crate::node::{assign_packages, initial_states, seed_attackers, SoftwareCatalog, DEFAULT_SV};
use crate::paths::{diversity_vector, mean_software_diversity, PvK1Mode};

pub const DEFAULT_SEED: u64 = 42;

const STREAM_ASSIGN: u64 = 0;
const STREAM_SCHEME: u64 = 1;
const STREAM_SEEDING: u64 = 2;
const STREAM_EPIDEMIC: u64 = 3;
const STREAM_TOPOLOGY: u64 = 4;

/// Where a run's network comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkSource {
    /// A fresh `G(n, p)` per run.
    Er { n: usize, p: f64 },
    File { path: PathBuf },
    /// Degree-rank window `lo..=hi` of an edge-list file.
    Derived { path: PathBuf, lo: usize, hi: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkSource,
    pub ns: usize,
    pub sv: Vec<f64>,
    pub pa: f64,
    pub gamma: f64,
    pub k: usize,
    pub l: usize,
    pub rho: f64,
    pub scheme: Scheme,
    pub n_r: usize,
    pub base_seed: u64,
    pub fp_mode: FpMode,
    pub pv_k1_mode: PvK1Mode,
    pub eab_base: EabBase,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            network: NetworkSource::Er { n: 1000, p: 0.025 },
            ns: 5,
            sv: DEFAULT_SV.to_vec(),
            pa: 0.1,
            gamma: 0.95,
            k: 1,
            l: 1,
            rho: -0.6,
            scheme: Scheme::Sda,
            n_r: 100,
            base_seed: DEFAULT_SEED,
            fp_mode: FpMode::On,
            pv_k1_mode: PvK1Mode::Override,
            eab_base: EabBase::Prose,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} = {v} is outside [0, 1]")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        unit("pa", self.pa)?;
        unit("gamma", self.gamma)?;
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::Rho(self.rho));
        }
        if self.n_r == 0 {
            return Err(Error::Config("n_r must be at least 1".into()));
        }
        if self.k == 0 || self.l == 0 {
            return Err(Error::Config("k and l must be at least 1".into()));
        }
        if self.ns == 0 || self.sv.len() < self.ns {
            return Err(Error::Config(format!(
                "ns = {} needs 1..={} vulnerabilities",
                self.ns,
                self.sv.len()
            )));
        }
        match &self.network {
            NetworkSource::Er { n, p } => {
                unit("p", *p)?;
                if *n == 0 {
                    return Err(Error::Config("ER network needs n >= 1".into()));
                }
            }
            NetworkSource::Derived { lo, hi, .. } if *lo == 0 || lo > hi => {
                return Err(Error::Config(format!("bad degree rank window {lo}..={hi}")));
            }
            _ => {}
        }
        self.catalog().map(|_| ())
    }

    pub fn catalog(&self) -> Result<SoftwareCatalog> {
        SoftwareCatalog::new(self.sv[..self.ns.min(self.sv.len())].to_vec())
    }

    /// Scheme token, with `rho` attached for SDA.
    pub fn scheme_label(&self) -> String {
        match self.scheme {
            Scheme::Sda => format!("sda({})", self.rho),
            other => other.token().to_string(),
        }
    }
}

/// A network ready for repeated runs; files are read once.
#[derive(Debug, Clone)]
pub enum Topology {
    Fixed(Arc<Graph>),
    Er { n: usize, p: f64 },
}

impl Topology {
    pub fn prepare(source: &NetworkSource) -> Result<Self> {
        Ok(match source {
            NetworkSource::Er { n, p } => Topology::Er { n: *n, p: *p },
            NetworkSource::File { path } => Topology::Fixed(Arc::new(read_edge_list(path)?.graph)),
            NetworkSource::Derived { path, lo, hi } => {
                let full = read_edge_list(path)?.graph;
                Topology::Fixed(Arc::new(derive_degree_rank_subgraph(&full, *lo, *hi)?))
            }
        })
    }

    /// The network for a run with this seed.
    pub fn graph_for(&self, seed: u64) -> Cow<'_, Graph> {
        match self {
            Topology::Fixed(g) => Cow::Borrowed(g.as_ref()),
            Topology::Er { n, p } => {
                Cow::Owned(generate_er(*n, *p, &mut stream(seed, STREAM_TOPOLOGY)))
            }
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn run_seed(base_seed: u64, run_index: usize) -> u64 {
    base_seed ^ run_index as u64
}

/// Metrics of one simulated run.
pub fn simulate(cfg: &ExperimentConfig, topology: &Topology, seed: u64) -> Result<MetricReport> {
    let cat = cfg.catalog()?;
    let original = topology.graph_for(seed);
    let n = original.node_count();
    let pkgs = assign_packages(n, &cat, &mut stream(seed, STREAM_ASSIGN));

    let mut scheme_rng = stream(seed, STREAM_SCHEME);
    let (adapted, pkgs, shuffled) = match cfg.scheme {
        Scheme::NoA => (no_a(&original), pkgs, 0),
        Scheme::RandomA => (random_a(&original, &pkgs, &mut scheme_rng), pkgs, 0),
        Scheme::RandomGraphC => {
            let (next, shuffled) = random_graph_c(&pkgs, &original, &cat);
            (original.as_ref().clone(), next, shuffled)
        }
        Scheme::Sda => {
            let params = SdaParams {
                k: cfg.k,
                l: cfg.l,
                rho: cfg.rho,
                pv_k1_mode: cfg.pv_k1_mode,
                eab_base: cfg.eab_base,
            };
            (sda(&original, &pkgs, &cat, &params)?, pkgs, 0)
        }
    };

    let mut states = initial_states(&pkgs);
    seed_attackers(&mut states, cfg.pa, &mut stream(seed, STREAM_SEEDING));
    let mut outcome = run_epidemic(
        &adapted,
        &states,
        &cat,
        cfg.gamma,
        cfg.fp_mode,
        &mut stream(seed, STREAM_EPIDEMIC),
    );

    let sd_vec = diversity_vector(&outcome.final_graph, cfg.k, cfg.l, &pkgs, &cat);
    for (state, sd) in outcome.final_states.iter_mut().zip(&sd_vec) {
        state.diversity = *sd;
    }
    Ok(MetricReport {
        sd: mean_software_diversity(&sd_vec)?,
        sg: metric_sg(&outcome.final_graph, &outcome.final_states),
        pc: metric_pc(&outcome.final_states),
        dc: metric_dc(&original, &outcome.final_graph, shuffled)?,
    })
}

/// One line of the raw CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scheme: String,
    pub axis: String,
    pub axis_value: String,
    pub run: usize,
    pub seed: u64,
    pub pc: f64,
    pub sg: f64,
    pub sd: f64,
    pub dc: f64,
    pub ms: u64,
}

/// One line of the aggregate CSV: mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub scheme: String,
    pub axis: String,
    pub axis_value: String,
    pub n: usize,
    pub pc_mean: f64,
    pub pc_sd: f64,
    pub sg_mean: f64,
    pub sg_sd: f64,
    pub sd_mean: f64,
    pub sd_sd: f64,
    pub dc_mean: f64,
    pub dc_sd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub jobs: usize,
    /// Record wall time per run; otherwise `ms` is 0 and output is reproducible.
    pub timing: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            jobs: 1,
            timing: false,
        }
    }
}

pub fn run_once(cfg: &ExperimentConfig, run_index: usize) -> Result<ResultRow> {
    cfg.validate()?;
    let topology = Topology::prepare(&cfg.network)?;
    run_point_once(cfg, &topology, "none", "", run_index, false)
}

fn run_point_once(
    cfg: &ExperimentConfig,
    topology: &Topology,
    axis: &str,
    axis_value: &str,
    run: usize,
    timing: bool,
) -> Result<ResultRow> {
    let seed = run_seed(cfg.base_seed, run);
    let start = Instant::now();
    let m = simulate(cfg, topology, seed)?;
    Ok(ResultRow {
        scheme: cfg.scheme_label(),
        axis: axis.to_string(),
        axis_value: axis_value.to_string(),
        run,
        seed,
        pc: m.pc,
        sg: m.sg,
        sd: m.sd,
        dc: m.dc,
        ms: if timing { start.elapsed().as_millis() as u64 } else { 0 },
    })
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Rho,
    Pa,
    Ns,
    P,
    K,
    L,
    Gamma,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Rho => "rho",
            Axis::Pa => "pa",
            Axis::Ns => "ns",
            Axis::P => "p",
            Axis::K => "k",
            Axis::L => "l",
            Axis::Gamma => "gamma",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &ExperimentConfig, value: &str) -> Result<ExperimentConfig> {
        let bad = || Error::Config(format!("bad value {value:?} for axis {}", self.name()));
        let real = || value.trim().parse::<f64>().map_err(|_| bad());
        let count = || value.trim().parse::<usize>().map_err(|_| bad());
        let mut out = cfg.clone();
        match self {
            Axis::Rho => out.rho = real()?,
            Axis::Pa => out.pa = real()?,
            Axis::Gamma => out.gamma = real()?,
            Axis::Ns => out.ns = count()?,
            Axis::K => out.k = count()?,
            Axis::L => out.l = count()?,
            Axis::P => match &mut out.network {
                NetworkSource::Er { p, .. } => *p = real()?,
                _ => return Err(Error::Config("axis p needs an ER network".into())),
            },
        }
        out.validate()?;
        Ok(out)
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Axis::Rho, Axis::Pa, Axis::Ns, Axis::P, Axis::K, Axis::L, Axis::Gamma]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Axis(s.to_string()))
    }
}

/// A configuration point with its sweep coordinates.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub axis: String,
    pub axis_value: String,
    pub config: ExperimentConfig,
}

/// Runs `n_r` repetitions of every point. Rows come back ordered by point,
/// then run index, whatever `jobs` is.
pub fn run_points(points: &[SweepPoint], opts: RunOptions) -> Result<Vec<ResultRow>> {
    let mut tasks = Vec::new();
    for point in points {
        point.config.validate()?;
        let topology = Arc::new(Topology::prepare(&point.config.network)?);
        for run in 0..point.config.n_r {
            tasks.push((point, Arc::clone(&topology), run));
        }
    }
    let exec = |(point, topology, run): &(&SweepPoint, Arc<Topology>, usize)| {
        run_point_once(
            &point.config,
            topology,
            &point.axis,
            &point.axis_value,
            *run,
            opts.timing,
        )
    };
    if opts.jobs <= 1 {
        return tasks.iter().map(exec).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| tasks.par_iter().map(exec).collect())
}

pub fn sweep_points(cfg: &ExperimentConfig, axis: Axis, values: &[String]) -> Result<Vec<SweepPoint>> {
    values
        .iter()
        .map(|v| {
            Ok(SweepPoint {
                axis: axis.name().to_string(),
                axis_value: v.trim().to_string(),
                config: axis.apply(cfg, v)?,
            })
        })
        .collect()
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    axis: Axis,
    values: &[String],
    opts: RunOptions,
) -> Result<(Vec<ResultRow>, Vec<AggregateRow>)> {
    let rows = run_points(&sweep_points(cfg, axis, values)?, opts)?;
    let agg = aggregate(&rows);
    Ok((rows, agg))
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Groups consecutive rows sharing `(scheme, axis, axis_value)`.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for group in rows.chunk_by(|a, b| {
        (&a.scheme, &a.axis, &a.axis_value) == (&b.scheme, &b.axis, &b.axis_value)
    }) {
        let col = |f: fn(&ResultRow) -> f64| mean_and_sd(&group.iter().map(f).collect::<Vec<_>>());
        let (pc_mean, pc_sd) = col(|r| r.pc);
        let (sg_mean, sg_sd) = col(|r| r.sg);
        let (sd_mean, sd_sd) = col(|r| r.sd);
        let (dc_mean, dc_sd) = col(|r| r.dc);
        let first = &group[0];
        out.push(AggregateRow {
            scheme: first.scheme.clone(),
            axis: first.axis.clone(),
            axis_value: first.axis_value.clone(),
            n: group.len(),
            pc_mean,
            pc_sd,
            sg_mean,
            sg_sd,
            sd_mean,
            sd_sd,
            dc_mean,
            dc_sd,
        });
    }
    out
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    Ok(())
}
