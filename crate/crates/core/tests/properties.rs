//! Property suites; every suite runs at least 1000 cases.

mod common;

use proptest::prelude::*;

use ree_core::hasse::binom_mod3;
use ree_core::FieldContext;

use common::CASES;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x5eed),
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn field_axioms(m in 1u32..=63, a in any::<u128>(), b in any::<u128>(), c in any::<u128>()) {
        let f = FieldContext::shared(m).unwrap();
        let (a, b, c) = (f.from_index(a), f.from_index(b), f.from_index(c));
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), f.zero());
        prop_assert_eq!(f.mul(a, f.one()), a);
        prop_assert_eq!(f.add(a, f.add(a, a)), f.zero());
        prop_assert_eq!(f.cube(f.add(a, b)), f.add(f.cube(a), f.cube(b)));
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), f.one());
        }
        prop_assert_eq!(f.frobenius_power(a, m as u64), a);
    }

    #[test]
    fn lucas_matches_pascal(n in 0u64..2000, k in 0u64..2000) {
        prop_assert_eq!(binom_mod3(n, k), common::pascal(n, k));
    }
}

#[test]
fn seeded_field_axioms() {
    common::field_axioms(CASES).unwrap();
}

#[test]
fn seeded_lucas() {
    common::lucas(CASES).unwrap();
}

#[test]
fn leibniz_rule() {
    common::leibniz(CASES).unwrap();
}

#[test]
fn composition_rule() {
    common::composition(CASES).unwrap();
}

#[test]
fn p_power_rule() {
    common::p_power(CASES).unwrap();
}

#[test]
fn reduce_is_idempotent() {
    common::reduce_idempotent(CASES).unwrap();
}

#[test]
fn backends_agree_on_random_triples() {
    common::cross_backend(CASES).unwrap();
}
