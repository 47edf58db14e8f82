mod common;

use proptest::prelude::*;
use trijunction::Error;
use trijunction::multiplicity::{assign_multiplicities, drop_vanishing, weighted_measure, CycleStatus};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn random_planar_networks_carry_cycles(seed in any::<u64>()) {
        let net = common::random_planar_network(seed);
        let a = assign_multiplicities(&net).unwrap();
        prop_assert_eq!(&a.status, &CycleStatus::Cycle);
        prop_assert_eq!(a.regions.euler_defect(&net), 0);
        // every bounded face is distinct from the unbounded one
        prop_assert!(a.regions.count >= 1);
    }

    #[test]
    fn dropping_vanishing_edges_keeps_weighted_measure(seed in any::<u64>()) {
        let net = common::random_planar_network(seed);
        let a = assign_multiplicities(&net).unwrap();
        let dropped = match drop_vanishing(&net, &a) {
            Ok(d) => d,
            // survivors with valence outside {1, 3} are not flow input and must be refused
            Err(Error::InvalidNetwork(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let b = assign_multiplicities(&dropped).unwrap();
        prop_assert!(b.vanishing.is_empty());
        prop_assert_eq!(&b.status, &CycleStatus::Cycle);
        let phi = |p: &trijunction::geometry::Point<f64>| 1.0 + p[0] * p[0] + 0.5 * p[1];
        let before = weighted_measure(&net, &a, phi);
        let after = weighted_measure(&dropped, &b, phi);
        prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0), "{} vs {}", before, after);
    }
}

