//! Structural properties of censuses that no formula is needed to state.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use stdet_core::census::{
    census_dp, census_dp_with, character_sum, check_invariants, zero_count_profile, CensusOptions, CountVector,
};
use stdet_core::formula::{chi_minus_one, ist_ring, zero_fiber_identity};
use stdet_core::ring::Ring;

#[test]
fn even_q_fields_are_uniform_on_units() {
    for desc in ["F(2)", "F(2^2)", "F(2^3)", "F(2^4)"] {
        let ring = Ring::parse(desc).unwrap();
        for n in 1..=6 {
            let cv = census_dp(&ring, n).unwrap();
            let values: BTreeSet<_> = ring.units().into_iter().map(|u| cv.get(u).clone()).collect();
            assert_eq!(values.len(), 1, "{desc} n={n}: {values:?}");
        }
    }
}

#[test]
fn character_sum_recurrence_between_censuses() {
    for desc in ["F(3)", "F(5)", "F(7)", "F(3^2)", "F(11)", "F(13)"] {
        let ring = Ring::parse(desc).unwrap();
        let q = ring.q();
        let factor = BigInt::from(q * q * (q - 1)) * chi_minus_one(q);
        let sums: Vec<BigInt> = (1..=8).map(|n| character_sum(&census_dp(&ring, n).unwrap(), &ring).unwrap()).collect();
        for n in 3..=8 {
            assert_eq!(sums[n - 1], &factor * &sums[n - 3], "{desc} n={n}");
        }
        assert!(sums.iter().step_by(2).all(|s| *s == BigInt::from(0)), "{desc}: odd n");
    }
}

#[test]
fn invariants_and_zero_fiber_on_chain_rings() {
    for desc in ["Z(2^2)", "Z(2^3)", "Z(3^2)", "Z(3^3)", "Z(5^2)", "FU(2,2)", "FU(3,3)", "GR(2^2,2)"] {
        let ring = Ring::parse(desc).unwrap();
        for n in 1..=4 {
            let cv = census_dp(&ring, n).unwrap();
            let report = check_invariants(&cv, &ring).unwrap();
            assert!(report.holds(), "{desc} n={n}: {report:?}");
            let zc = zero_count_profile(&ring, n, |r| census_dp(r, n)).unwrap();
            let ist = ist_ring(ring.q(), ring.e(), n).unwrap();
            assert_eq!(zero_fiber_identity(ring.q(), ring.e(), n, &zc, &ist).unwrap(), BigInt::from(0));
        }
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let ring = Ring::parse("Z(3^3)").unwrap();
    let runs: Vec<CountVector> = [1, 2, 5]
        .into_iter()
        .map(|t| {
            let opts = CensusOptions {
                threads: Some(t),
                ..CensusOptions::default()
            };
            census_dp_with(&ring, 5, &opts).unwrap()
        })
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn count_vector_serde_round_trip() {
    let ring = Ring::parse("F(5)").unwrap();
    let cv = census_dp(&ring, 10).unwrap();
    let text = serde_json::to_string(&cv).unwrap();
    let back: CountVector = serde_json::from_str(&text).unwrap();
    assert_eq!(cv, back);
}
