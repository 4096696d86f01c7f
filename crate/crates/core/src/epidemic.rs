//! SIR-style epidemic attacks against an IDS.
//!
//! Each round scans nodes in index order. An active attacker either evades
//! detection and spreads to its healthy neighbours (at most twice), or is
//! caught and cut off from the network. With false positives enabled, a
//! healthy node can be cut off by the IDS as well.
//!
//! A newly compromised node starts out knowing everything its infector knew.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::node::{NodeState, SoftwareCatalog};

/// Number of spreading attempts each attacker gets.
pub const MAX_SPREADS: u8 = 2;

/// Whether the IDS also disconnects healthy nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FpMode {
    #[default]
    On,
    Off,
}

#[derive(Debug, Clone)]
pub struct EpidemicOutcome {
    pub final_states: Vec<NodeState>,
    pub final_graph: Graph,
    pub rounds: usize,
    pub spread_counts: Vec<u8>,
}

impl EpidemicOutcome {
    pub fn compromised_count(&self) -> usize {
        self.final_states.iter().filter(|s| s.compromised).count()
    }
}

fn has_pending_attacker(states: &[NodeState], spread: &[u8]) -> bool {
    states
        .iter()
        .zip(spread)
        .any(|(s, &c)| s.active && s.compromised && c < MAX_SPREADS)
}

/// Runs the attack to completion on private copies of `g` and `states`.
///
/// `gamma` is the detection probability: a draw `r` in `(0, 1]` lets an
/// attacker act only when `r > gamma`. Compromise attempts take effect
/// immediately, so nodes later in the same scan already see them.
pub fn run_epidemic<R: Rng + ?Sized>(
    g: &Graph,
    states: &[NodeState],
    cat: &SoftwareCatalog,
    gamma: f64,
    fp_mode: FpMode,
    rng: &mut R,
) -> EpidemicOutcome {
    assert!((0.0..=1.0).contains(&gamma), "detection probability {gamma} outside [0, 1]");
    let mut graph = g.clone();
    let mut states = states.to_vec();
    let mut spread = vec![0u8; states.len()];
    let mut rounds = 0;
    let mut targets = Vec::new();

    while has_pending_attacker(&states, &spread) {
        rounds += 1;
        for i in 0..states.len() {
            if !states[i].active {
                continue;
            }
            let r1 = 1.0 - rng.gen::<f64>();
            if states[i].compromised {
                if r1 > gamma && spread[i] < MAX_SPREADS {
                    spread[i] += 1;
                    targets.clear();
                    targets.extend(
                        graph
                            .neighbors(i)
                            .filter(|&j| states[j].active && !states[j].compromised),
                    );
                    for &j in &targets {
                        let pkg = states[j].package;
                        let known = states[i].learned.contains(pkg);
                        if known || rng.gen::<f64>() < cat.sv(pkg) {
                            states[i].learned.insert(pkg);
                            let inherited = states[i].learned;
                            states[j].compromise_from(inherited);
                        }
                    }
                } else {
                    states[i].active = false;
                    graph.isolate(i);
                }
            } else if fp_mode == FpMode::On && r1 > gamma {
                states[i].active = false;
                graph.isolate(i);
            }
        }
    }

    EpidemicOutcome {
        final_states: states,
        final_graph: graph,
        rounds,
        spread_counts: spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::{initial_states, PackageId, PackageSet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cat() -> SoftwareCatalog {
        SoftwareCatalog::default_with(5).unwrap()
    }

    fn ring(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
    }

    fn mixed_states(n: usize) -> Vec<NodeState> {
        initial_states(&(0..n).map(|i| PackageId((i % 5) as u8)).collect::<Vec<_>>())
    }

    #[test]
    fn certain_detection_stops_everything() {
        let g = ring(30);
        let mut states = mixed_states(30);
        for i in [0, 7, 19] {
            states[i].compromise();
        }
        let out = run_epidemic(&g, &states, &cat(), 1.0, FpMode::On, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(out.compromised_count(), 3);
        assert_eq!(out.rounds, 1);
        for i in [0, 7, 19] {
            assert!(!out.final_states[i].active);
            assert_eq!(out.final_graph.degree(i), 0);
        }
        assert!(out.final_states.iter().filter(|s| !s.compromised).all(|s| s.active));
    }

    #[test]
    fn informed_attacker_takes_connected_graph() {
        let g = ring(25);
        let mut states = mixed_states(25);
        states[12].compromise();
        states[12].learned = PackageSet::all(5);
        let out = run_epidemic(&g, &states, &cat(), 0.0, FpMode::Off, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out.compromised_count(), 25);
        assert!(out.final_states.iter().all(|s| s.learned == PackageSet::all(5)));
    }

    #[test]
    fn knowledge_passes_to_new_attackers() {
        // 0 -> 1 -> 2 along a path; 0 knows package 3, which node 2 runs
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]);
        let mut states = initial_states(&[PackageId(0), PackageId(0), PackageId(2)]);
        states[0].compromise();
        states[0].learned.insert(PackageId(2));
        let out = run_epidemic(&g, &states, &cat(), 0.0, FpMode::Off, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(out.compromised_count(), 3);
    }

    #[test]
    fn no_attackers_no_rounds() {
        let out = run_epidemic(&ring(5), &mixed_states(5), &cat(), 0.5, FpMode::On, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(out.rounds, 0);
        assert_eq!(out.compromised_count(), 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = ring(40);
        let mut states = mixed_states(40);
        states[3].compromise();
        states[30].compromise();
        let run = |seed| {
            let out = run_epidemic(&g, &states, &cat(), 0.3, FpMode::On, &mut ChaCha8Rng::seed_from_u64(seed));
            (out.final_states, out.final_graph, out.rounds)
        };
        assert_eq!(run(8), run(8));
    }

    #[test]
    fn invariants_hold_on_random_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..40 {
            let g = crate::graph::generate_er(60, 0.08, &mut rng);
            let mut states = mixed_states(60);
            for i in (0..60).step_by(9) {
                states[i].compromise();
            }
            let gamma = (seed % 5) as f64 * 0.25;
            let out = run_epidemic(&g, &states, &cat(), gamma, FpMode::On, &mut ChaCha8Rng::seed_from_u64(seed));
            assert!(out.spread_counts.iter().all(|&c| c <= MAX_SPREADS));
            assert!(out.rounds <= 3 * 60);
            for (i, s) in out.final_states.iter().enumerate() {
                if !s.active {
                    assert_eq!(out.final_graph.degree(i), 0);
                }
                if s.compromised {
                    assert!(s.learned.contains(s.package));
                }
            }
            assert!(out.compromised_count() >= 7);
        }
    }
}
