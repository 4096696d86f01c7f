//! Attack paths and the software-diversity metric.
//!
//! A node's diversity is the probability that it survives its `l` most
//! vulnerable attack paths, where paths are node-disjoint, at most `k` hops,
//! and found shortest-first.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::node::{hop_vulnerability, PackageId, SoftwareCatalog};

/// Maximum number of disjoint paths collected per target.
pub const PATH_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct AttackPath {
    /// Entry node first, target last.
    pub nodes: Vec<usize>,
    pub vulnerability: f64,
}

impl AttackPath {
    pub fn entry(&self) -> usize {
        self.nodes[0]
    }

    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// How path vulnerabilities are scored when the hop budget `k - 1` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PvK1Mode {
    /// Score single-hop compromise into each node.
    #[default]
    Override,
    /// No hops allowed, so every `pv` is zero.
    Literal,
}

/// Product of per-hop compromise probabilities along `path`; the entry node
/// is the attacker and contributes no factor.
pub fn path_vulnerability(path: &[usize], pkgs: &[PackageId], cat: &SoftwareCatalog) -> f64 {
    path.windows(2)
        .map(|hop| hop_vulnerability(pkgs[hop[0]], pkgs[hop[1]], cat, None))
        .product()
}

/// Greedy node-disjoint attack paths into `target`.
///
/// Each round takes the shortest path to `target` through nodes not yet used
/// (lexicographically smallest entry-to-target sequence among equals) and
/// retires its entry and interior nodes. Stops after `cap` paths or when
/// nothing within `k` hops remains.
///
/// Any longer path must leave `target` through an unused neighbour, and that
/// neighbour is itself a one-hop entry, so the search never gets past the
/// first breadth-first layer: the result is the one-hop paths from the
/// smallest `cap` neighbours.
pub fn enumerate_disjoint_paths(
    g: &Graph,
    target: usize,
    k: usize,
    cap: usize,
    pkgs: &[PackageId],
    cat: &SoftwareCatalog,
) -> Vec<AttackPath> {
    if k == 0 {
        return Vec::new();
    }
    g.neighbors(target)
        .take(cap)
        .map(|entry| {
            let nodes = vec![entry, target];
            let vulnerability = path_vulnerability(&nodes, pkgs, cat);
            AttackPath {
                nodes,
                vulnerability,
            }
        })
        .collect()
}

/// Most vulnerable first; shorter, then lexicographically smaller, on ties.
fn by_threat(a: &AttackPath, b: &AttackPath) -> Ordering {
    b.vulnerability
        .total_cmp(&a.vulnerability)
        .then_with(|| a.nodes.len().cmp(&b.nodes.len()))
        .then_with(|| a.nodes.cmp(&b.nodes))
}

/// Probability that node `i` resists its `l` most vulnerable attack paths of
/// at most `k` hops. Isolated nodes score 1.
pub fn software_diversity(
    g: &Graph,
    i: usize,
    k: usize,
    l: usize,
    pkgs: &[PackageId],
    cat: &SoftwareCatalog,
) -> f64 {
    let mut paths = enumerate_disjoint_paths(g, i, k, PATH_CAP, pkgs, cat);
    paths.sort_by(by_threat);
    paths
        .iter()
        .take(l)
        .map(|p| 1.0 - p.vulnerability)
        .product()
}

/// [`software_diversity`] for every node.
pub fn diversity_vector(
    g: &Graph,
    k: usize,
    l: usize,
    pkgs: &[PackageId],
    cat: &SoftwareCatalog,
) -> Vec<f64> {
    (0..g.node_count())
        .map(|i| software_diversity(g, i, k, l, pkgs, cat))
        .collect()
}

/// Maximum path vulnerability into each node over paths of at most `k - 1`
/// hops; zero when a node has no such path.
pub fn gen_pv(
    g: &Graph,
    pkgs: &[PackageId],
    cat: &SoftwareCatalog,
    k: usize,
    mode: PvK1Mode,
) -> Vec<f64> {
    assert!(k >= 1, "hop distance must be at least 1");
    let hops = match (k - 1, mode) {
        (0, PvK1Mode::Literal) => return vec![0.0; g.node_count()],
        (0, PvK1Mode::Override) => 1,
        (h, _) => h,
    };
    (0..g.node_count())
        .map(|i| {
            enumerate_disjoint_paths(g, i, hops, PATH_CAP, pkgs, cat)
                .iter()
                .map(|p| p.vulnerability)
                .fold(0.0, f64::max)
        })
        .collect()
}

pub fn mean_software_diversity(sd: &[f64]) -> Result<f64> {
    if sd.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    Ok(sd.iter().sum::<f64>() / sd.len() as f64)
}
