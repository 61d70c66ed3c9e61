mod common;

use opinion_core::dynamics::{drive, EventStream};
use opinion_core::edge_process::CoupledSimulator;
use opinion_core::graph::{chromatic_number_exact, max_clique, parse_edge_list, CliqueMode};
use opinion_core::statics::{brute_force_index, clique_upper_bound, index_lower_bound, PeelChoice};
use opinion_core::urn::{play_random, UrnState};
use opinion_core::{
    count_opinions, is_absorbing, random_initial, simulate, Graph, OpinionConfig, SimParams,
    Simulator, StopCondition,
};
use proptest::prelude::*;

fn connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n, 0.0..0.7f64, any::<u64>())
        .prop_map(|(n, extra, seed)| common::random_connected(n, extra, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn handshake(g in connected_graph(14)) {
        let degrees: usize = (0..g.n_vertices()).map(|v| g.degree(v)).sum();
        prop_assert_eq!(degrees, 2 * g.n_edges());
    }

    #[test]
    fn bipartite_iff_two_colorable(g in connected_graph(10)) {
        let chi = chromatic_number_exact(&g, 16).unwrap().n_colors();
        prop_assert_eq!(g.is_bipartite(), chi <= 2);
    }

    #[test]
    fn clique_at_most_chromatic(g in connected_graph(11)) {
        let omega = max_clique(&g, CliqueMode::Exact).unwrap().len();
        let chi = chromatic_number_exact(&g, 16).unwrap().n_colors();
        prop_assert!(omega <= chi);
    }

    #[test]
    fn edge_list_round_trip(g in connected_graph(20)) {
        prop_assert_eq!(parse_edge_list(&g.to_edge_list()).unwrap(), g);
    }

    #[test]
    fn statics_sandwich(g in connected_graph(7), eps in 0.0..1.0f64) {
        let lower = index_lower_bound(&g, eps).unwrap();
        let exact = brute_force_index(&g, eps).unwrap();
        let upper = clique_upper_bound(&g, eps, PeelChoice::Enumerate).unwrap();
        let greedy = clique_upper_bound(&g, eps, PeelChoice::Greedy).unwrap();
        prop_assert!(lower.value <= exact && exact <= upper && upper <= greedy);
        prop_assert!(is_absorbing(&g, &lower.witness, eps));
        prop_assert_eq!(count_opinions(&lower.witness), lower.value);
    }

    #[test]
    fn index_nonincreasing_in_threshold(g in connected_graph(6), a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(brute_force_index(&g, hi).unwrap() <= brute_force_index(&g, lo).unwrap());
    }

    #[test]
    fn dynamics_invariants(g in connected_graph(12), eps in 0.0..=1.0f64, seed in any::<u64>()) {
        let init = random_initial(&g, seed);
        let initial: std::collections::HashSet<u64> = init.values().iter().map(|x| x.to_bits()).collect();
        let mut sim = Simulator::new(&g, &init, eps).unwrap();
        let mut last = sim.distinct_opinions();
        let mut ok = true;
        let report = drive(&mut sim, &StopCondition::to_absorption(), &mut EventStream::new(seed), |s, _, u| {
            let now = s.distinct_opinions();
            ok &= now <= last && s.opinions()[u.target] == s.opinions()[u.source];
            last = now;
        }).unwrap();
        prop_assert!(ok);
        prop_assert!(report.absorbed);
        prop_assert!(is_absorbing(&g, &report.final_opinions, eps));
        prop_assert!(report.final_opinions.values().iter().all(|x| initial.contains(&x.to_bits())));
        prop_assert!(report.opinion_trace.windows(2).all(|w| w[0].0 <= w[1].0 && w[1].1 <= w[0].1));
    }

    #[test]
    fn tree_inequality(n in 2usize..30, eps in 0.01..=1.0f64, seed in any::<u64>()) {
        let g = common::random_tree(n, seed);
        let init = random_initial(&g, seed);
        let mut c = CoupledSimulator::new(&g, &init, eps).unwrap();
        let mut stream = EventStream::new(seed);
        loop {
            prop_assert!(c.simulator().distinct_opinions() + c.weights().empty_count() <= n);
            if c.step(&mut stream).unwrap().is_none() { break; }
        }
    }

    #[test]
    fn path_empty_edges_never_decrease(n in 2usize..60, eps in 0.01..=1.0f64, seed in any::<u64>()) {
        let g = Graph::path(n).unwrap();
        let init = random_initial(&g, seed);
        let mut c = CoupledSimulator::new(&g, &init, eps).unwrap();
        let mut stream = EventStream::new(seed);
        let mut last = c.weights().empty_count();
        while c.step(&mut stream).unwrap().is_some() {
            let now = c.weights().empty_count();
            prop_assert!(now >= last);
            last = now;
        }
    }

    #[test]
    fn urn_conserves_balls(counts in prop::collection::vec(0u64..8, 2..8), seed in any::<u64>()) {
        let start = UrnState::new(counts).unwrap();
        let (end, steps) = play_random(&start, seed);
        prop_assert_eq!(end.total(), start.total());
        prop_assert_eq!(end.counts[1], 0);
        prop_assert!(end.counts[0] >= start.counts[0] + steps);
    }

    #[test]
    fn opinion_csv_round_trip(values in prop::collection::vec(0.0..=1.0f64, 0..50)) {
        let c = OpinionConfig::new(values).unwrap();
        prop_assert_eq!(OpinionConfig::from_csv(&c.to_csv()).unwrap(), c);
    }
}

#[test]
fn simulate_is_reproducible_across_calls() {
    let g = Graph::torus(6, 7).unwrap();
    let init = random_initial(&g, 4);
    let p = SimParams::new(0.3, StopCondition::until(50.0), 4);
    let a = simulate(&g, &init, &p).unwrap();
    let b = simulate(&g, &init, &p).unwrap();
    assert_eq!(a.to_json(), b.to_json());
    assert!(a.time <= 50.0);
}
