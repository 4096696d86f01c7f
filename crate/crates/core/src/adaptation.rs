//! Topology adaptation schemes.
//!
//! SDA first drops every edge whose endpoints share a package, then adds
//! (`rho > 0`) or removes (`rho < 0`) edges ranked by their expected effect on
//! software diversity, under a global budget and per-node budgets that pull
//! degrees toward the expected mean. Random-A, Random-Graph-C and No-A are
//! the comparison baselines.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{reach_mask, Graph, ReachMask};
use crate::node::{PackageId, SoftwareCatalog};
use crate::paths::{diversity_vector, gen_pv, PvK1Mode};

/// Guard for the removal gain's `1 / (1 - sv * pv)`.
pub const GAIN_EPSILON: f64 = 1e-9;

/// Tolerance applied before flooring budget products such as `0.29 * 100`.
const FLOOR_SLACK: f64 = 1e-9;

/// Edges removed per node by the same-package pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovedEdgeLedger {
    pub dn: Vec<usize>,
}

impl RemovedEdgeLedger {
    pub fn removed_edges(&self) -> usize {
        self.dn.iter().sum::<usize>() / 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdaptBudget {
    pub t_global: usize,
    pub t_local: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCandidate {
    pub i: usize,
    pub j: usize,
    pub sd_diff_sum: f64,
}

/// Base of the edge budget when `rho < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EabBase {
    /// A fraction of the edges left after the same-package pass.
    #[default]
    Prose,
    /// A fraction of the edges removed by the same-package pass, for either sign.
    Literal,
}

/// Removes every edge joining two nodes with the same package.
pub fn sdba(g: &Graph, pkgs: &[PackageId]) -> (Graph, RemovedEdgeLedger) {
    let mut out = g.clone();
    let mut dn = vec![0; g.node_count()];
    for (u, v) in g.edges() {
        if pkgs[u] == pkgs[v] {
            out.remove_edge(u, v);
            dn[u] += 1;
            dn[v] += 1;
        }
    }
    (out, RemovedEdgeLedger { dn })
}

fn check_rho(rho: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::Rho(rho))
    }
}

/// Global and per-node edge budgets for the second SDA step on `g`, the
/// graph left by [`sdba`].
pub fn set_eab(
    ledger: &RemovedEdgeLedger,
    g: &Graph,
    rho: f64,
    base: EabBase,
) -> Result<AdaptBudget> {
    check_rho(rho)?;
    let n = g.node_count();
    let mut t_local = vec![0; n];
    if rho == 0.0 || n == 0 {
        return Ok(AdaptBudget { t_global: 0, t_local });
    }

    let edges = g.edge_count();
    let pool = if rho > 0.0 || base == EabBase::Literal {
        ledger.removed_edges()
    } else {
        edges
    };
    let t_global = (rho.abs() * pool as f64 + FLOOR_SLACK).floor() as usize;

    let kappa = (2 * edges + t_global) as f64 / n as f64;
    let mut surplus = -(t_global as f64);
    for (i, slot) in t_local.iter_mut().enumerate() {
        let deg = g.degree(i) as f64;
        let (room, opposite) = if rho > 0.0 {
            (kappa - deg, deg - kappa)
        } else {
            (deg - kappa, kappa - deg)
        };
        *slot = (room.max(0.0) + FLOOR_SLACK).floor() as usize;
        surplus += opposite.max(0.0);
    }

    while surplus > 0.0 && t_local.iter().any(|&t| t > 0) {
        for t in t_local.iter_mut() {
            if *t > 0 && surplus > 0.0 {
                *t -= 1;
                surplus -= 1.0;
            }
        }
    }
    Ok(AdaptBudget { t_global, t_local })
}

fn sort_candidates(cands: &mut [EdgeCandidate], ascending: bool) {
    cands.sort_by(|a, b| {
        let by_score = if ascending {
            a.sd_diff_sum.total_cmp(&b.sd_diff_sum)
        } else {
            b.sd_diff_sum.total_cmp(&a.sd_diff_sum)
        };
        by_score.then_with(|| (a.i, a.j).cmp(&(b.i, b.j)))
    });
}

/// Edge-addition candidates: absent pairs inside `mask` whose endpoints run
/// different packages, ranked by the diversity they would cost (least first).
pub fn geac(
    g: &Graph,
    mask: &ReachMask,
    sd: &[f64],
    pv: &[f64],
    pkgs: &[PackageId],
    cat: &SoftwareCatalog,
) -> Vec<EdgeCandidate> {
    let mut out = Vec::new();
    for i in 0..g.node_count() {
        let sv_i = cat.sv(pkgs[i]);
        for j in mask.row(i).filter(|&j| j > i) {
            if g.has_edge(i, j) || pkgs[i] == pkgs[j] {
                continue;
            }
            let sv_j = cat.sv(pkgs[j]);
            let loss_i = sd[i] - sd[i] * (1.0 - sv_i * pv[j]);
            let loss_j = sd[j] - sd[j] * (1.0 - sv_j * pv[i]);
            out.push(EdgeCandidate {
                i,
                j,
                sd_diff_sum: loss_i + loss_j,
            });
        }
    }
    sort_candidates(&mut out, true);
    out
}

fn removal_gain(sd: f64, exposure: f64) -> f64 {
    let denom = 1.0 - exposure;
    if denom <= GAIN_EPSILON {
        (sd * (1.0 / GAIN_EPSILON - 1.0)).min(1.0)
    } else {
        sd / denom - sd
    }
}

/// Edge-removal candidates: every existing edge, ranked by the diversity its
/// removal would restore (most first).
pub fn gerc(
    g: &Graph,
    sd: &[f64],
    pv: &[f64],
    pkgs: &[PackageId],
    cat: &SoftwareCatalog,
) -> Vec<EdgeCandidate> {
    let mut out: Vec<EdgeCandidate> = g
        .edges()
        .map(|(i, j)| {
            let gain_i = removal_gain(sd[i], cat.sv(pkgs[i]) * pv[j]);
            let gain_j = removal_gain(sd[j], cat.sv(pkgs[j]) * pv[i]);
            EdgeCandidate {
                i,
                j,
                sd_diff_sum: gain_i + gain_j,
            }
        })
        .collect();
    sort_candidates(&mut out, false);
    out
}

/// Edges touched by each pass of [`adapt_nt`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdaptLog {
    pub pass1: Vec<(usize, usize)>,
    pub pass2: Vec<(usize, usize)>,
}

impl AdaptLog {
    pub fn actions(&self) -> usize {
        self.pass1.len() + self.pass2.len()
    }
}

/// Applies ranked candidates: first where both endpoints still have local
/// budget, then in rank order until the global budget is spent.
pub fn adapt_nt(
    g: &Graph,
    candidates: &[EdgeCandidate],
    budget: &AdaptBudget,
    rho: f64,
) -> (Graph, AdaptLog) {
    let mut out = g.clone();
    let mut log = AdaptLog::default();
    if rho == 0.0 {
        return (out, log);
    }
    let add = rho > 0.0;
    let apply = |g: &mut Graph, c: &EdgeCandidate| {
        if add {
            g.add_edge(c.i, c.j)
        } else {
            g.remove_edge(c.i, c.j)
        }
    };

    let mut t_local = budget.t_local.clone();
    let mut t_global = budget.t_global;

    for c in candidates {
        if t_global == 0 {
            break;
        }
        if t_local[c.i] > 0 && t_local[c.j] > 0 && apply(&mut out, c) {
            t_local[c.i] -= 1;
            t_local[c.j] -= 1;
            t_global -= 1;
            log.pass1.push((c.i, c.j));
        }
    }
    for c in candidates {
        if t_global == 0 {
            break;
        }
        if apply(&mut out, c) {
            t_global -= 1;
            log.pass2.push((c.i, c.j));
        }
    }
    (out, log)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdaParams {
    pub k: usize,
    pub l: usize,
    pub rho: f64,
    pub pv_k1_mode: PvK1Mode,
    pub eab_base: EabBase,
}

impl SdaParams {
    pub fn new(k: usize, l: usize, rho: f64) -> Self {
        Self {
            k,
            l,
            rho,
            pv_k1_mode: PvK1Mode::default(),
            eab_base: EabBase::default(),
        }
    }
}

/// Software-diversity based adaptation.
pub fn sda(
    g: &Graph,
    pkgs: &[PackageId],
    cat: &SoftwareCatalog,
    params: &SdaParams,
) -> Result<Graph> {
    check_rho(params.rho)?;
    let (pruned, ledger) = sdba(g, pkgs);
    if params.rho == 0.0 {
        return Ok(pruned);
    }
    let budget = set_eab(&ledger, &pruned, params.rho, params.eab_base)?;
    let sd = diversity_vector(&pruned, params.k, params.l, pkgs, cat);
    let pv = gen_pv(&pruned, pkgs, cat, params.k, params.pv_k1_mode);
    let candidates = if params.rho > 0.0 {
        let mask = reach_mask(&pruned, params.k);
        geac(&pruned, &mask, &sd, &pv, pkgs, cat)
    } else {
        gerc(&pruned, &sd, &pv, pkgs, cat)
    };
    Ok(adapt_nt(&pruned, &candidates, &budget, params.rho).0)
}

/// Same-package pass, then random replacement edges between nodes with
/// different packages that both lost edges.
pub fn random_a<R: Rng + ?Sized>(g: &Graph, pkgs: &[PackageId], rng: &mut R) -> Graph {
    let (mut out, ledger) = sdba(g, pkgs);
    let mut dn = ledger.dn;
    let n = out.node_count();
    for i in 0..n {
        if dn[i] == 0 {
            continue;
        }
        let mut partners: Vec<usize> = (0..n)
            .filter(|&j| j != i && dn[j] > 0 && pkgs[i] != pkgs[j] && !out.has_edge(i, j))
            .collect();
        while dn[i] > 0 && !partners.is_empty() {
            let j = partners.swap_remove(rng.gen_range(0..partners.len()));
            if dn[j] > 0 {
                out.add_edge(i, j);
                dn[i] -= 1;
                dn[j] -= 1;
            }
        }
    }
    out
}

fn least_common(counts: &[usize]) -> PackageId {
    let (idx, _) = counts
        .iter()
        .enumerate()
        .min_by_key(|&(p, &c)| (c, p))
        .expect("catalog is non-empty");
    PackageId(idx as u8)
}

/// Every node switches to the package least used among its neighbours
/// (isolated nodes: least used overall), from one synchronous snapshot.
/// Returns the new assignment and how many nodes changed package.
pub fn random_graph_c(
    pkgs: &[PackageId],
    g: &Graph,
    cat: &SoftwareCatalog,
) -> (Vec<PackageId>, usize) {
    let ns = cat.ns();
    let mut global = vec![0usize; ns];
    for p in pkgs {
        global[p.index()] += 1;
    }
    let mut local = vec![0usize; ns];
    let next: Vec<PackageId> = (0..g.node_count())
        .map(|i| {
            if g.degree(i) == 0 {
                return least_common(&global);
            }
            local.iter_mut().for_each(|c| *c = 0);
            for j in g.neighbors(i) {
                local[pkgs[j].index()] += 1;
            }
            least_common(&local)
        })
        .collect();
    let shuffled = next.iter().zip(pkgs).filter(|(a, b)| a != b).count();
    (next, shuffled)
}

pub fn no_a(g: &Graph) -> Graph {
    g.clone()
}

/// Adaptation scheme selector, with its CLI token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    #[serde(rename = "no-a")]
    NoA,
    #[serde(rename = "random-a")]
    RandomA,
    #[serde(rename = "random-graph-c")]
    RandomGraphC,
    #[serde(rename = "sda")]
    Sda,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::NoA, Scheme::RandomA, Scheme::RandomGraphC, Scheme::Sda];

    pub fn token(self) -> &'static str {
        match self {
            Scheme::NoA => "no-a",
            Scheme::RandomA => "random-a",
            Scheme::RandomGraphC => "random-graph-c",
            Scheme::Sda => "sda",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.token() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}
