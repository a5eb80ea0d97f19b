mod common;

use common::{random_instance, Params};
use proptest::prelude::*;
use tempflow::lp_oracle::{build_lp, solve_lp};
use tempflow::{flow_value, solve_mtf, verify_flow, Amount};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn optimum_matches_solver(seed in any::<u64>(), bounded in any::<bool>(), d in 1u32..7) {
        let p = if bounded { Params::SMALL_BOUNDED } else { Params::SMALL };
        let g = random_instance(seed, p);
        let lp = build_lp(&g, d);
        let sol = solve_lp(&lp).unwrap();
        prop_assert!(sol.satisfies(&lp));
        prop_assert_eq!(&sol.optimum, &Amount::from_integer(solve_mtf(&g, d).unwrap().value.into()));

        let restricted = g.restrict_to_deadline(d);
        let tf = sol.temporal_flow(&lp, &restricted);
        prop_assert_eq!(verify_flow(&restricted, &tf), Ok(()));
        prop_assert_eq!(flow_value(&restricted, &tf), sol.optimum);
    }
}
