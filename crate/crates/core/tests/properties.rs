use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use diversinet::adaptation::{random_a, random_graph_c, sda, sdba, SdaParams};
use diversinet::experiment::{run_once, ExperimentConfig, NetworkSource};
use diversinet::graph::{generate_er, khop_neighborhood, load_edge_list, reach_mask, Graph};
use diversinet::node::{PackageId, SoftwareCatalog};
use diversinet::paths::{diversity_vector, software_diversity};
use diversinet::Scheme;

fn instance() -> impl Strategy<Value = (Graph, Vec<PackageId>, usize)> {
    (1usize..40, 0.0f64..0.4, 1usize..=7, any::<u64>()).prop_flat_map(|(n, p, ns, seed)| {
        let g = generate_er(n, p, &mut ChaCha8Rng::seed_from_u64(seed));
        prop::collection::vec(0..ns as u8, n)
            .prop_map(move |raw| (g.clone(), raw.into_iter().map(PackageId).collect(), ns))
    })
}

proptest! {
    #[test]
    fn reach_mask_matches_bfs((g, _, _) in instance(), k in 1usize..4) {
        let mask = reach_mask(&g, k);
        for i in 0..g.node_count() {
            let row: Vec<usize> = mask.row(i).collect();
            prop_assert_eq!(row, khop_neighborhood(&g, i, 2 * k));
        }
    }

    #[test]
    fn edge_list_round_trip((g, _, _) in instance()) {
        let restored = |text: &str| {
            let loaded = load_edge_list(text).unwrap();
            let mut edges: Vec<(usize, usize)> = loaded
                .graph
                .edges()
                .map(|(u, v)| {
                    let (a, b) = (loaded.original_ids[u] as usize, loaded.original_ids[v] as usize);
                    (a.min(b), a.max(b))
                })
                .collect();
            edges.sort_unstable();
            edges
        };
        let text = g.to_edge_list();
        prop_assert_eq!(restored(&text), g.edges().collect::<Vec<_>>());
        let reloaded = load_edge_list(&text).unwrap().graph;
        let again = load_edge_list(&reloaded.to_edge_list()).unwrap().graph;
        prop_assert_eq!((again.node_count(), again.edge_count()), (reloaded.node_count(), reloaded.edge_count()));
    }

    #[test]
    fn sda_without_budget_is_sdba((g, pkgs, ns) in instance()) {
        let cat = SoftwareCatalog::default_with(ns).unwrap();
        let adapted = sda(&g, &pkgs, &cat, &SdaParams::new(1, 1, 0.0)).unwrap();
        prop_assert_eq!(adapted, sdba(&g, &pkgs).0);
    }

    #[test]
    fn sda_respects_package_rule((g, pkgs, ns) in instance(), rho in -1.0f64..=1.0, k in 1usize..3) {
        let cat = SoftwareCatalog::default_with(ns).unwrap();
        let (pruned, ledger) = sdba(&g, &pkgs);
        let adapted = sda(&g, &pkgs, &cat, &SdaParams::new(k, 1, rho)).unwrap();
        prop_assert!(adapted.edges().all(|(u, v)| pkgs[u] != pkgs[v]));
        if rho < 0.0 {
            prop_assert!(adapted.edges().all(|(u, v)| pruned.has_edge(u, v)));
        } else {
            prop_assert!(pruned.edges().all(|(u, v)| adapted.has_edge(u, v)));
            prop_assert!(adapted.edge_count() <= pruned.edge_count() + ledger.removed_edges());
        }
    }

    #[test]
    fn random_a_keeps_cross_package_edges((g, pkgs, _) in instance(), seed in any::<u64>()) {
        let pruned = sdba(&g, &pkgs).0;
        let out = random_a(&g, &pkgs, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(pruned.edges().all(|(u, v)| out.has_edge(u, v)));
        prop_assert!(out.edges().all(|(u, v)| pkgs[u] != pkgs[v]));
        prop_assert!(out.edge_count() <= g.edge_count());
    }

    #[test]
    fn graph_coloring_counts_changes((g, pkgs, ns) in instance()) {
        let cat = SoftwareCatalog::default_with(ns).unwrap();
        let (next, shuffled) = random_graph_c(&pkgs, &g, &cat);
        prop_assert_eq!(next.len(), pkgs.len());
        prop_assert_eq!(shuffled, next.iter().zip(&pkgs).filter(|(a, b)| a != b).count());
        prop_assert!(next.iter().all(|p| (p.0 as usize) < ns));
    }

    #[test]
    fn diversity_in_range((g, pkgs, ns) in instance(), k in 1usize..4, l in 1usize..4) {
        let cat = SoftwareCatalog::default_with(ns).unwrap();
        for (i, sd) in diversity_vector(&g, k, l, &pkgs, &cat).into_iter().enumerate() {
            prop_assert!((0.0..=1.0).contains(&sd));
            if g.degree(i) == 0 {
                prop_assert_eq!(sd, 1.0);
            }
        }
    }

    #[test]
    fn adding_an_edge_never_raises_diversity((g, pkgs, ns) in instance(), u in 0usize..40, v in 0usize..40) {
        let n = g.node_count();
        let (u, v) = (u % n, v % n);
        prop_assume!(u != v && !g.has_edge(u, v));
        let cat = SoftwareCatalog::default_with(ns).unwrap();
        let mut bigger = g.clone();
        bigger.add_edge(u, v);
        for i in 0..n {
            let before = software_diversity(&g, i, 2, 3, &pkgs, &cat);
            let after = software_diversity(&bigger, i, 2, 3, &pkgs, &cat);
            prop_assert!(after <= before + 1e-15);
        }
    }
}

#[test]
fn er_edge_count_is_binomial() {
    // n = 100, p = 0.1: mean 495, sd about 21
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let m = generate_er(100, 0.1, &mut rng).edge_count() as f64;
        assert!((m - 495.0).abs() < 3.0 * (4950.0f64 * 0.1 * 0.9).sqrt(), "{m}");
    }
}

#[test]
fn metrics_stay_in_range_for_every_scheme() {
    for scheme in Scheme::ALL {
        for rho in [-1.0, -0.4, 0.0, 0.5, 1.0] {
            let cfg = ExperimentConfig {
                network: NetworkSource::Er { n: 120, p: 0.06 },
                scheme,
                rho,
                ..ExperimentConfig::default()
            };
            for run in 0..3 {
                let r = run_once(&cfg, run).unwrap();
                for v in [r.pc, r.sg, r.sd] {
                    assert!((0.0..=1.0).contains(&v), "{scheme} {rho}: {r:?}");
                }
                assert!((0.0..=2.0).contains(&r.dc), "{scheme} {rho}: {r:?}");
                assert!(r.pc >= 12.0 / 120.0);
            }
        }
    }
}

#[test]
fn more_attackers_compromise_more() {
    let mean_pc = |pa: f64| {
        let cfg = ExperimentConfig {
            network: NetworkSource::Er { n: 300, p: 0.03 },
            scheme: Scheme::NoA,
            pa,
            ..ExperimentConfig::default()
        };
        (0..20).map(|run| run_once(&cfg, run).unwrap().pc).sum::<f64>() / 20.0
    };
    let pcs: Vec<f64> = [0.05, 0.15, 0.3].into_iter().map(mean_pc).collect();
    assert!(pcs.windows(2).all(|w| w[0] < w[1]), "{pcs:?}");
}
