mod common;

use std::collections::BTreeMap;

use common::{brute_force_min_temporal_cut, random_instance, with_single_label, Params};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use tempflow::temporal_flow::{buffer_trajectories, max_temporal_flow_value};
use tempflow::{
    decompose_into_journeys, flow_value, min_temporal_cut, parse_network, solve_mtf, verify_flow,
    Amount, TimeEdge,
};

fn int(n: u64) -> Amount {
    Amount::from_integer(n.into())
}

#[test]
fn late_link_value_and_cut() {
    let g = parse_network(include_str!("data/late-link.net")).unwrap();
    assert_eq!(solve_mtf(&g, 8).unwrap().value, 2);
    let cut = min_temporal_cut(&g, 8).unwrap();
    assert_eq!(
        cut.time_edges.into_iter().collect::<Vec<_>>(),
        [TimeEdge::new("vt", 8)]
    );
    assert_eq!(cut.capacity, 2);
}

#[test]
fn fractional_flows_verify() {
    let g = parse_network("source s\nsink t\nedge a s v 1 1\nedge b v t 1 2\n").unwrap();
    let half = Amount::new(1.into(), 2.into());
    let tf = buffer_trajectories(
        &g,
        BTreeMap::from([
            (TimeEdge::new("a", 1), half.clone()),
            (TimeEdge::new("b", 2), half.clone()),
        ]),
    );
    assert_eq!(verify_flow(&g, &tf), Ok(()));
    assert_eq!(flow_value(&g, &tf), half);
    let parts = decompose_into_journeys(&g, &tf).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].amount, half);
}

#[test]
fn violations_are_reported() {
    let g =
        parse_network("source s\nsink t\nbuffer v 1\nedge a s v 3 1\nedge b v t 3 2\n").unwrap();
    let tf = buffer_trajectories(
        &g,
        BTreeMap::from([
            (TimeEdge::new("a", 1), int(2)),
            (TimeEdge::new("b", 3), int(1)),
        ]),
    );
    let v = verify_flow(&g, &tf).unwrap_err();
    let text: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    assert!(
        text.iter().any(|t| t.starts_with("availability")),
        "{text:?}"
    );
    assert!(
        text.iter().any(|t| t.starts_with("buffer bounds")),
        "{text:?}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn value_equals_brute_force_cut(seed in any::<u64>(), d in 1u32..7) {
        let g = random_instance(seed, Params::SMALL);
        let sol = solve_mtf(&g, d).unwrap();
        prop_assert_eq!(sol.value, brute_force_min_temporal_cut(&g, d));
        let cut = min_temporal_cut(&g, d).unwrap();
        prop_assert_eq!(cut.capacity, sol.value);
        prop_assert_eq!(max_temporal_flow_value(&g, d).unwrap(), sol.value);
    }

    #[test]
    fn solutions_are_feasible_and_decompose(seed in any::<u64>(), bounded in any::<bool>()) {
        let p = if bounded { Params::SMALL_BOUNDED } else { Params::SMALL };
        let g = random_instance(seed, p);
        let sol = solve_mtf(&g, g.l_max()).unwrap();
        prop_assert_eq!(verify_flow(&g, &sol.flow), Ok(()));
        prop_assert_eq!(flow_value(&g, &sol.flow), int(sol.value));

        let parts = decompose_into_journeys(&g, &sol.flow).unwrap();
        prop_assert!(parts.len() <= g.time_edge_count());
        let total: Amount = parts.iter().map(|p| p.amount.clone()).sum();
        prop_assert_eq!(total, int(sol.value));
        let mut usage: BTreeMap<TimeEdge, Amount> = BTreeMap::new();
        for part in &parts {
            prop_assert!(part.amount.is_positive());
            let tes = part.journey.time_edges();
            prop_assert!(tes.windows(2).all(|w| w[0].label < w[1].label));
            for te in tes {
                *usage.entry(te.clone()).or_insert_with(Amount::zero) += &part.amount;
            }
        }
        for (te, used) in usage {
            prop_assert!(used <= sol.flow.amount(&te));
        }
    }

    #[test]
    fn nothing_arrives_early(seed in any::<u64>(), label in 1u32..7) {
        let g = random_instance(seed, Params::SMALL);
        match g.temporal_distance("s", "t") {
            Some(dist) => prop_assert_eq!(solve_mtf(&g, dist - 1).unwrap().value, 0),
            None => prop_assert_eq!(solve_mtf(&g, g.l_max()).unwrap().value, 0),
        }
        // on a single day only direct edges carry anything
        let flat = with_single_label(&g, label);
        let direct: u64 = g.out_edges("s").filter(|e| e.head == "t").map(|e| e.capacity).sum();
        prop_assert_eq!(solve_mtf(&flat, label).unwrap().value, direct);
    }
}
