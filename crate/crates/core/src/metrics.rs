//! Evaluation metrics: mean software diversity, giant component size,
//! compromised fraction, and defense cost.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{giant_component, Graph};
use crate::node::{NodeState, PackageId, SoftwareCatalog};
use crate::paths::{diversity_vector, mean_software_diversity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub sd: f64,
    pub sg: f64,
    pub pc: f64,
    pub dc: f64,
}

/// Fraction of all nodes in the largest connected group of active,
/// uncompromised nodes.
pub fn metric_sg(g: &Graph, states: &[NodeState]) -> f64 {
    let n = states.len();
    if n == 0 {
        return 0.0;
    }
    let healthy: Vec<bool> = states.iter().map(|s| s.active && !s.compromised).collect();
    giant_component(g, &healthy).len() as f64 / n as f64
}

/// Fraction of nodes ever compromised, detected or not.
pub fn metric_pc(states: &[NodeState]) -> f64 {
    if states.is_empty() {
        return 0.0;
    }
    states.iter().filter(|s| s.compromised).count() as f64 / states.len() as f64
}

/// Normalized edge change between `original` and `adjusted`, plus the
/// fraction of nodes whose package was shuffled.
pub fn metric_dc(original: &Graph, adjusted: &Graph, shuffled: usize) -> Result<f64> {
    let n = original.node_count();
    if n != adjusted.node_count() {
        return Err(Error::NodeCountMismatch(n, adjusted.node_count()));
    }
    if n == 0 {
        return Ok(0.0);
    }
    // both sums run over ordered pairs, so the factor 2 cancels
    let changed = original.symmetric_difference_count(adjusted);
    let total = original.edge_count() + adjusted.edge_count();
    let edge_term = if total == 0 {
        0.0
    } else {
        changed as f64 / total as f64
    };
    Ok(edge_term + shuffled as f64 / n as f64)
}

/// Mean software diversity of `g` under the given assignment.
pub fn metric_sd(
    g: &Graph,
    pkgs: &[PackageId],
    cat: &SoftwareCatalog,
    k: usize,
    l: usize,
) -> Result<f64> {
    mean_software_diversity(&diversity_vector(g, k, l, pkgs, cat))
}
