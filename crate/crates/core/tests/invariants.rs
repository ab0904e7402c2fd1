use std::collections::BTreeSet;

use aklt_core::metropolis::acceptance_probability;
use aklt_core::oracle::{count_even_subgraphs, count_loop_sets, DomainSubgraph};
use aklt_core::percolation::{curve_from_critical, dilute, uniform_grid, DilutionMode, DilutionSpec};
use aklt_core::reduction::RewritableGraph;
use aklt_core::rng::stream;
use aklt_core::stats::{compute_stats, fit_largest_domain};
use aklt_core::{build_graph, label_domains, log2_weight, Boundary, GraphState, Lattice, LatticeKind, Outcome, OutcomeConfig};
use proptest::prelude::*;

fn outcome() -> impl Strategy<Value = Outcome> {
    (0u8..3).prop_map(Outcome::from_index)
}

/// A honeycomb lattice together with a configuration on it.
fn honeycomb_with_config() -> impl Strategy<Value = (Lattice, OutcomeConfig)> {
    (1usize..5, any::<bool>()).prop_flat_map(|(half, periodic)| {
        let (size, boundary) = if periodic { (2 * half, Boundary::Periodic) } else { (half + 1, Boundary::Open) };
        let lattice = Lattice::build(LatticeKind::Honeycomb, size, boundary).unwrap();
        let n = lattice.num_sites();
        (Just(lattice), prop::collection::vec(outcome(), n).prop_map(OutcomeConfig))
    })
}

fn components(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

fn assert_simple(g: &GraphState) {
    for v in 0..g.num_vertices() {
        let nb = g.neighbors(v);
        assert!(!nb.contains(&v), "self-loop at {v}");
        assert_eq!(nb.iter().collect::<BTreeSet<_>>().len(), nb.len(), "multi-edge at {v}");
        assert!(nb.iter().all(|&u| g.neighbors(u).contains(&v)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honeycomb_lattices_are_trivalent_and_bipartite(size in 2usize..14, periodic in any::<bool>()) {
        let (size, boundary) = if periodic { (size & !1, Boundary::Periodic) } else { (size, Boundary::Open) };
        let lattice = Lattice::build(LatticeKind::Honeycomb, size, boundary).unwrap();
        let degrees: usize = (0..lattice.num_sites()).map(|s| lattice.degree(s)).sum();
        prop_assert_eq!(degrees, 2 * lattice.num_edges());
        for s in 0..lattice.num_sites() {
            prop_assert_eq!(lattice.degree(s) + lattice.terminators(s), 3);
        }
        if periodic {
            prop_assert_eq!(2 * lattice.num_edges(), 3 * lattice.num_sites());
        }
        for e in lattice.edges() {
            prop_assert_ne!(lattice.sublattice(e.a), lattice.sublattice(e.b));
        }
    }

    #[test]
    fn relabelling_outcomes_preserves_the_domain_graph(
        (lattice, config) in honeycomb_with_config(),
        perm in Just([Outcome::X, Outcome::Y, Outcome::Z]).prop_shuffle(),
    ) {
        let a = label_domains(&lattice, &config).unwrap();
        let b = label_domains(&lattice, &config.permuted(perm)).unwrap();
        prop_assert_eq!(a.num_domains(), b.num_domains());
        prop_assert_eq!(a.inter_domain_edges(), b.inter_domain_edges());
        prop_assert_eq!(a.log2_weight(), b.log2_weight());
        prop_assert_eq!(build_graph(&lattice, &a).edges(), build_graph(&lattice, &b).edges());
    }

    #[test]
    fn domains_partition_the_sites((lattice, config) in honeycomb_with_config()) {
        let d = label_domains(&lattice, &config).unwrap();
        let merged: usize = (0..d.num_domains()).map(|i| d.size(i) - 1).sum();
        prop_assert_eq!(merged, lattice.num_sites() - d.num_domains());
        for s in 0..lattice.num_sites() {
            prop_assert!(d.members(d.domain_of(s)).contains(&s));
            prop_assert_eq!(d.label(d.domain_of(s)), config.labels()[s]);
        }
        let internal: usize = (0..d.num_domains()).map(|i| d.internal_edges(i)).sum();
        prop_assert_eq!(internal + d.inter_domain_edges(), lattice.num_edges());
        let graph = build_graph(&lattice, &d);
        assert_simple(&graph);
        // odd multiplicities survive the mod-2 reduction
        let odd = d.multiplicities().values().filter(|&&m| m % 2 == 1).count();
        prop_assert_eq!(graph.num_edges(), odd);
    }

    #[test]
    fn betti_number_matches_an_independent_forest_count((lattice, config) in honeycomb_with_config()) {
        let d = label_domains(&lattice, &config).unwrap();
        let graph = build_graph(&lattice, &d);
        let stats = compute_stats(&graph, &d, &lattice).unwrap();
        let c = components(graph.num_vertices(), &graph.edges());
        prop_assert_eq!(stats.components, c);
        prop_assert_eq!(stats.betti + graph.num_vertices(), graph.num_edges() + c);
        prop_assert!((stats.mean_degree - 2.0 * stats.edges as f64 / stats.vertices as f64).abs() < 1e-12);
    }

    #[test]
    fn single_flips_satisfy_detailed_balance(
        (lattice, config) in honeycomb_with_config(),
        site_seed in any::<u64>(),
        shift in 1u8..3,
    ) {
        let site = (site_seed % lattice.num_sites() as u64) as usize;
        let mut flipped = config.clone();
        flipped.0[site] = Outcome::from_index((config.labels()[site].index() as u8 + shift) % 3);
        let w = log2_weight(&lattice, &config).unwrap().exponent().unwrap();
        let w2 = log2_weight(&lattice, &flipped).unwrap().exponent().unwrap();
        // both directions are proposed with probability 1 / (2 N)
        let forward = (w as f64).exp2() * acceptance_probability(w2 - w);
        let backward = (w2 as f64).exp2() * acceptance_probability(w - w2);
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn rewrites_keep_the_graph_simple_and_log_each_vertex_once(
        n in 3usize..12,
        edge_bits in prop::collection::vec(any::<bool>(), 66),
        ops in prop::collection::vec((0u8..3, any::<usize>()), 1..12),
    ) {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let edges: Vec<(usize, usize)> = pairs.iter().zip(&edge_bits).filter(|(_, &k)| k).map(|(&e, _)| e).collect();
        let mut g = RewritableGraph::from_edges(n, &edges);
        for (kind, pick) in ops {
            let present: Vec<usize> = g.present_vertices().collect();
            if present.is_empty() {
                break;
            }
            let v = present[pick % present.len()];
            match kind {
                0 => g.measure_z(v).unwrap(),
                1 => g.measure_y(v).unwrap(),
                _ => {
                    if let Some(&left) = g.neighbors(v).iter().next() {
                        if g.degree(v) == 2 {
                            g.measure_x_pair(left, v).unwrap();
                        }
                    }
                }
            }
            for u in g.present_vertices() {
                prop_assert!(!g.neighbors(u).contains(&u));
                for &w in g.neighbors(u) {
                    prop_assert!(g.is_present(w) && g.has_edge(w, u));
                }
            }
        }
        let logged: Vec<usize> = g.log().iter().map(|m| m.vertex).collect();
        let unique: BTreeSet<usize> = logged.iter().copied().collect();
        prop_assert_eq!(unique.len(), logged.len());
        prop_assert_eq!(unique.len() + g.num_present(), n);
        prop_assert!(unique.iter().all(|&v| !g.is_present(v)));
    }

    #[test]
    fn even_subgraphs_of_a_connected_domain_number_two_to_the_cycle_rank(
        n in 1usize..10,
        extra in prop::collection::vec((any::<usize>(), any::<usize>()), 0..12),
        tree in prop::collection::vec(any::<usize>(), 9),
    ) {
        // random spanning tree plus extra edges; parallel edges are allowed
        let mut edges: Vec<(usize, usize)> = (1..n).map(|v| (tree[v - 1] % v, v)).collect();
        for (a, b) in extra {
            let (a, b) = (a % n, b % n);
            if a != b && edges.len() < 20 {
                edges.push((a.min(b), a.max(b)));
            }
        }
        let expected = 1u64 << (edges.len() + 1 - n);
        prop_assert_eq!(count_even_subgraphs(n, &edges), expected);
        prop_assert_eq!(count_loop_sets(&DomainSubgraph::new(n, edges)).unwrap().sets, expected);
    }

    #[test]
    fn spanning_curves_never_increase(critical in prop::collection::vec(prop_oneof![Just(-1.0), 0.0..1.0f64], 1..60)) {
        let curve = curve_from_critical(&critical, &uniform_grid(20), 10, DilutionMode::Site).unwrap();
        for w in curve.points.windows(2) {
            prop_assert!(w[1].p_cluster <= w[0].p_cluster);
        }
    }
}

#[test]
fn y_then_z_on_a_path_isolates_the_far_end() {
    let mut g = RewritableGraph::from_edges(3, &[(0, 1), (1, 2)]);
    g.measure_y(1).unwrap();
    assert!(g.has_edge(0, 2));
    g.measure_z(2).unwrap();
    assert_eq!(g.degree(0), 0);
    assert_eq!(g.num_present(), 1);
}

#[test]
fn bond_dilution_keeps_the_expected_fraction_of_edges() {
    let lattice = Lattice::build(LatticeKind::Honeycomb, 40, Boundary::Periodic).unwrap();
    let config = OutcomeConfig::random(lattice.num_sites(), &mut stream(1, &[0]));
    let graph = build_graph(&lattice, &label_domains(&lattice, &config).unwrap());
    let mut rng = stream(1, &[1]);
    for p in [0.2, 0.5, 0.8] {
        let spec = DilutionSpec { mode: DilutionMode::Bond, p_delete: p, replicates: 1, seed: 1 };
        let (mut kept, mut total) = (0, 0);
        for _ in 0..20 {
            kept += dilute(&graph, &spec, &mut rng).unwrap().num_edges();
            total += graph.num_edges();
        }
        let frac = kept as f64 / total as f64;
        let sigma = (p * (1.0 - p) / total as f64).sqrt();
        assert!((frac - (1.0 - p)).abs() < 4.0 * sigma, "p = {p}: kept {frac}");
    }
}

#[test]
fn constant_largest_domains_fit_a_flat_line() {
    let fit = fit_largest_domain(&[(100, 7.0), (400, 7.0), (1600, 7.0), (6400, 7.0)]).unwrap();
    assert!(fit.slope.abs() < 1e-12);
    assert!((fit.intercept - 7.0).abs() < 1e-12);
}
