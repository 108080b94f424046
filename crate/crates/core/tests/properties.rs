use proptest::prelude::*;
use tadpole_core::engine::{cost_energy, cost_time, run_seeded, StaticOracle};
use tadpole_core::geometry::cycle_geometry_at;
use tadpole_core::harness::{
    claimed_bound, cmd_sweep, first_visits_within_twice_distance, static_oracle, worst_case, InstanceClass,
    InstanceParams, Model, SweepConfig,
};
use tadpole_core::offline::{
    opt_bruteforce, opt_cycle, opt_single_agent_ntadpole, opt_structured, opt_tadpole_k3plus,
    two_agent_lower_bound,
};
use tadpole_core::strategies::PolicyId;
use tadpole_core::{build_cycle, build_n_tadpole, cycle_geometry, Midpoint, Rational, WeightedGraph};

fn weights(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    (1..=3i128).prop_flat_map(move |b| {
        prop::collection::vec(1..=6i128, 3..=max_len)
            .prop_map(move |ws| ws.into_iter().map(|w| Rational::new(w, b)).collect())
    })
}

fn cycle() -> impl Strategy<Value = WeightedGraph> {
    weights(8).prop_map(|ws| build_cycle(&ws).unwrap())
}

/// Tadpoles (one tail) or n-tadpoles with up to `max_tails` tails, random start.
fn tadpoles(max_tails: usize, max_nodes: usize) -> impl Strategy<Value = WeightedGraph> {
    let tail = (0usize..6, prop::collection::vec(1..=5i128, 1..=3));
    (weights(5), prop::collection::vec(tail, 1..=max_tails), any::<prop::sample::Index>())
        .prop_filter_map("too many nodes", move |(cycle, tails, start)| {
            let m = cycle.len();
            let tails: Vec<(usize, Vec<Rational>)> = tails
                .into_iter()
                .map(|(a, ws)| (a % m, ws.into_iter().map(Rational::integer).collect()))
                .collect();
            let g = build_n_tadpole(&cycle, &tails, "c0").ok()?;
            if g.node_count() > max_nodes {
                return None;
            }
            let label = g.labels()[start.index(g.node_count())].clone();
            g.with_start(&label).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn arcs_add_up_to_cycle_length(g in cycle(), r in any::<prop::sample::Index>()) {
        let geo = cycle_geometry_at(&g, r.index(g.cycle_len()));
        prop_assert_eq!(geo.d_short + geo.d_long + geo.e_mid_length, g.cycle_length());
        prop_assert!(geo.d_short <= geo.d_long);
        if let Midpoint::Node(_) = geo.midpoint {
            prop_assert_eq!(geo.e_mid_length, Rational::ZERO);
        }
    }

    #[test]
    fn geometry_is_rotation_invariant(ws in weights(8), shift in 0usize..8) {
        let g = build_cycle(&ws).unwrap();
        let mut rotated = ws.clone();
        rotated.rotate_left(shift % ws.len());
        let h = build_cycle(&rotated).unwrap();
        let a = cycle_geometry_at(&g, shift % ws.len());
        let b = cycle_geometry_at(&h, 0);
        prop_assert_eq!((a.d_long, a.d_short, a.e_mid_length), (b.d_long, b.d_short, b.e_mid_length));
        prop_assert_eq!(g.edge(a.e_max).weight, h.edge(b.e_max).weight);
    }

    #[test]
    fn eccentricity_matches_geometry(g in tadpoles(1, 12)) {
        let geo = cycle_geometry(&g);
        let ecc = g.distances_from(g.start()).into_iter().max().unwrap();
        let expected = if g.is_cycle_node(g.start()) {
            (geo.d_i + geo.d_t).max(geo.d_long)
        } else {
            geo.d_t.max(geo.d_i + geo.d_long)
        };
        prop_assert_eq!(ecc, expected);
    }

    #[test]
    fn text_round_trip(g in tadpoles(3, 16)) {
        prop_assert_eq!(WeightedGraph::parse(&g.to_text()).unwrap(), g.clone());
        prop_assert_eq!(WeightedGraph::parse(&g.to_line()).unwrap(), g);
    }

    #[test]
    fn closed_forms_agree_with_brute_force(c in cycle(), t in tadpoles(1, 10), n in tadpoles(2, 10)) {
        prop_assert_eq!(opt_cycle(&c).unwrap(), opt_bruteforce(&c, 2).unwrap().makespan);
        prop_assert_eq!(opt_tadpole_k3plus(&t).unwrap(), opt_bruteforce(&t, 3).unwrap().makespan);
        for g in [&c, &t, &n] {
            prop_assert_eq!(opt_single_agent_ntadpole(g), opt_bruteforce(g, 1).unwrap().makespan);
        }
    }

    #[test]
    fn structured_agrees_with_brute_force(g in tadpoles(2, 10), k in 1usize..=4) {
        let brute = opt_bruteforce(&g, k).unwrap();
        let structured = opt_structured(&g, k).unwrap();
        prop_assert_eq!(brute.makespan, structured.makespan);
        prop_assert!(brute.validate(&g).is_ok());
        prop_assert!(structured.validate(&g).is_ok());
    }

    #[test]
    fn optimum_non_increasing_in_agents(g in tadpoles(2, 10)) {
        let values: Vec<Rational> = (1..=4).map(|k| opt_bruteforce(&g, k).unwrap().makespan).collect();
        prop_assert!(values.windows(2).all(|w| w[1] <= w[0]), "{:?}", values);
    }

    #[test]
    fn single_agent_within_four_times_two_agent_bound(g in tadpoles(4, 40)) {
        prop_assert!(opt_single_agent_ntadpole(&g) <= Rational::integer(4) * two_agent_lower_bound(&g));
    }

    #[test]
    fn amp_cycle_energy_optimal_and_avoids_mid_edge(g in cycle(), r in any::<prop::sample::Index>()) {
        let g = g.with_start(&format!("c{}", r.index(g.cycle_len()))).unwrap();
        let mut p = PolicyId::AmpCycle2.build(2).unwrap();
        let run = run_seeded(p.as_mut(), &mut StaticOracle::new(g.clone()), 2, 0).unwrap();
        let opt = opt_cycle(&g).unwrap();
        prop_assert_eq!(cost_energy(&run.trace), opt);
        prop_assert!(cost_time(&run.trace) <= Rational::new(3, 2) * opt);
        let geo = cycle_geometry(&g);
        if let Some(e) = geo.e_mid() {
            let edge = g.edge(e);
            let mut pair = (g.label(edge.a).to_string(), g.label(edge.b).to_string());
            if pair.0 > pair.1 {
                pair = (pair.1, pair.0);
            }
            prop_assert!(!run.trace.traversed_edges().contains(&pair));
        }
    }

    #[test]
    fn policies_meet_their_bounds(t in tadpoles(1, 10), n in tadpoles(2, 10)) {
        for (id, k, g) in [
            (PolicyId::AmpTadpole2Random, 2, &t),
            (PolicyId::AmpTadpole3, 3, &t),
            (PolicyId::AmpTadpole4, 4, &t),
            (PolicyId::NTadpoleNPlus2, 4, &n),
            (PolicyId::NTadpoleExp, 8, &n),
        ] {
            let k = if id == PolicyId::NTadpoleNPlus2 { g.tails().len() + 2 } else if id == PolicyId::NTadpoleExp { 1 << (g.tails().len() + 1) } else { k };
            let w = worst_case(id, k, &static_oracle(g)).unwrap();
            for model in [Model::Time, Model::Energy] {
                if let Some(bound) = claimed_bound(id, model, g.tails().len()) {
                    prop_assert!(w.get(model).ratio(model) <= bound, "{} {} {}", id.name(), model, g.to_line());
                }
            }
        }
        for (k, bound) in [(3, 3), (4, 2)] {
            let w = worst_case(PolicyId::AleTadpole, k, &static_oracle(&t)).unwrap();
            prop_assert!(w.get(Model::Time).ratio(Model::Time) <= Rational::integer(bound));
        }
    }

    #[test]
    fn four_agents_reach_nodes_early(g in tadpoles(1, 14)) {
        let mut p = PolicyId::AmpTadpole4.build(4).unwrap();
        let run = run_seeded(p.as_mut(), &mut StaticOracle::new(g.clone()), 4, 0).unwrap();
        prop_assert!(first_visits_within_twice_distance(&g, &run));
    }

    #[test]
    fn runs_are_deterministic(g in tadpoles(1, 12), seed in 0u64..1000) {
        let trace = |s| {
            let mut p = PolicyId::AmpTadpole2Random.build(2).unwrap();
            run_seeded(p.as_mut(), &mut StaticOracle::new(g.clone()), 2, s).unwrap().trace.to_csv()
        };
        prop_assert_eq!(trace(seed), trace(seed));
    }
}

#[test]
fn sweeps_are_reproducible() {
    let config = SweepConfig {
        class: InstanceClass::Tadpole,
        params: InstanceParams::default(),
        trials: 20,
        seed: 7,
        policy: PolicyId::AmpTadpole2Random,
        k: 2,
        model: Model::Time,
        all_starts: false,
    };
    let a = cmd_sweep(&config).unwrap();
    let b = cmd_sweep(&config).unwrap();
    assert_eq!(a.to_csv_row(), b.to_csv_row());
    let rows = |s: &tadpole_core::harness::SweepSummary| s.reports.iter().map(|r| r.to_csv_row()).collect::<Vec<_>>();
    assert_eq!(rows(&a), rows(&b));
    assert!(a.satisfied());
}
