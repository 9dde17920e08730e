use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;
use stackshift::indexcalc::*;

fn budget() -> StepBudget {
    StepBudget::default()
}

/// Plain u64 stepper: drop one unit at the least index, add a copy of the
/// old configuration shifted by that index.
fn naive_step(u: &BTreeMap<u64, u64>) -> BTreeMap<u64, u64> {
    let (&j0, _) = u.iter().next().unwrap();
    let mut next = u.clone();
    *next.get_mut(&j0).unwrap() -= 1;
    if next[&j0] == 0 {
        next.remove(&j0);
    }
    for (&j, &c) in u {
        *next.entry(j + j0).or_insert(0) += c;
    }
    next
}

#[test]
fn agrees_with_naive_stepper() {
    let mut naive = BTreeMap::from([(1u64, 2u64)]);
    let states = trajectory(40, budget()).unwrap();
    for (m, s) in states.iter().enumerate() {
        let got: BTreeMap<u64, u64> = s
            .entries()
            .iter()
            .map(|(&j, c)| (j, c.to_u64().unwrap()))
            .collect();
        assert_eq!(got, naive, "m = {m}");
        naive = naive_step(&naive);
    }
}

#[test]
fn table_rows() {
    let rows = [
        "(1,2)",
        "(1,1) (2,2)",
        "(2,3) (3,2)",
        "(2,2) (3,2) (4,3) (5,2)",
        "(2,1) (3,2) (4,5) (5,4) (6,3) (7,2)",
        "(3,2) (4,6) (5,6) (6,8) (7,6) (8,3) (9,2)",
        "(3,1) (4,6) (5,6) (6,10) (7,12) (8,9) (9,10) (10,6) (11,3) (12,2)",
    ];
    let states = trajectory(6, budget()).unwrap();
    for (s, want) in states.iter().zip(rows) {
        assert_eq!(s.row(), want);
    }
}

#[test]
fn block_sequences() {
    let t = sequences(4, budget()).unwrap();
    assert_eq!(t.r(), [2, 3, 2, 6]);
    assert_eq!(t.big_r(), [2, 5, 7, 13]);
    assert_eq!(t.zeta(), [3, 9, 15, 39]);
    assert_eq!(t.exponent_at(1), BigUint::from(8u32));
    assert_eq!(t.exponent_at(0), BigUint::one());
}

#[test]
fn constants_match_printed_values() {
    let c: Vec<BigUint> = (0..=3)
        .map(|m| BigUint::one() << constant_exponent(m, budget()).unwrap().to_usize().unwrap())
        .collect();
    let want = [2u64, 8, 256, 16_777_216].map(BigUint::from);
    assert_eq!(c, want);
}

#[test]
fn index_sets_are_intervals() {
    let t = sequences(5, budget()).unwrap();
    let states = trajectory(t.big_r_at(5), budget()).unwrap();
    for k in 1..=5u64 {
        let r0 = t.big_r_at(k - 1);
        let rk = t.block(k).unwrap().r;
        for h in 1..=rk {
            let m = r0 + h;
            let keys: Vec<u64> = states[m as usize].entries().keys().copied().collect();
            let want: Vec<u64> = if h == rk {
                (k + 1..=t.zeta_at(k)).collect()
            } else {
                (k..=t.zeta_at(k - 1) + h * k).collect()
            };
            assert_eq!(keys, want, "k = {k}, h = {h}");
        }
        // the least index is used up exactly at the block end
        assert!(states[t.big_r_at(k) as usize].count(k).is_none());
    }
}

#[test]
fn stack_relation_within_block() {
    let t = sequences(5, budget()).unwrap();
    let states = trajectory(t.big_r_at(5), budget()).unwrap();
    let c = |m: u64, j: u64| states[m as usize].count(j).cloned().unwrap_or_default();
    for k in 2..=5u64 {
        let r0 = t.big_r_at(k - 1);
        let rk = t.block(k).unwrap().r;
        for h in 1..=rk {
            let m = r0 + h;
            assert_eq!(c(m, k) + BigUint::from(h), c(r0, k));
            for j in k + 1..2 * k {
                assert_eq!(c(m, j), c(r0, j), "k = {k}, h = {h}, j = {j}");
            }
            let gain: u64 = (rk - h + 1..=rk).sum();
            for j in 2 * k..=t.zeta_at(k - 1) {
                assert!(c(m, j) >= c(r0, j) + BigUint::from(gain), "k = {k}, h = {h}, j = {j}");
            }
        }
    }
}

#[test]
fn gamma_invariant_to_sixty() {
    for (m, s) in trajectory(60, budget()).unwrap().iter().enumerate() {
        assert_eq!(s.gamma(), (BigUint::one() << m) + 1u32, "m = {m}");
    }
}

#[test]
fn growth_claims_hold_within_budget() {
    let t = sequences_within(budget()).unwrap();
    assert!(t.len() >= 10);
    let rep = growth_checks(&t, 0.5).unwrap();
    for claim in [
        GrowthClaim::Minrn,
        GrowthClaim::Est0,
        GrowthClaim::BlockConstant,
        GrowthClaim::Rz1Raw,
        GrowthClaim::Rz2Raw,
        GrowthClaim::IndexInterval,
        GrowthClaim::DyadicLowerBound,
    ] {
        assert!(rep.all_hold(claim), "{}", claim.name());
    }
    assert!(rep.rho_empirical > 1.0);
}

#[test]
fn budget_limits() {
    let small = StepBudget(5);
    assert!(iterate_to(5, small).is_ok());
    assert_eq!(
        iterate_to(6, small).unwrap_err(),
        IndexError::BudgetExceeded { requested: 6, limit: 5 }
    );
    assert!(sequences(4, small).is_err());
}

#[test]
fn shift_multiset_sizes() {
    for m in 0..=4 {
        let ms = shift_multiset(m, budget()).unwrap();
        let hist = scale_histogram(&ms);
        let copies: BigUint = hist.values().sum();
        assert_eq!(copies, BigUint::one() << m);
        let ex = ms.expand();
        assert_eq!(ex.total(), ms.cardinality());
        assert_eq!(ms.cardinality(), num_traits::pow(BigUint::from(3u32), 1 << m));
        // symmetric about zero
        for (n, c) in &ex.counts {
            assert_eq!(ex.counts.get(&-n), Some(c));
        }
        assert!(!ex.counts.values().any(Zero::is_zero));
    }
}

fn brute_exp_sum(ex: &DyadicMultiset, x: f64) -> f64 {
    ex.counts
        .iter()
        .map(|(&n, c)| c.to_f64().unwrap() * (ex.offset_f64(n) * x).cos())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exp_sum_matches_expansion(m in 0u64..=3, x in -40.0f64..40.0) {
        let ms = shift_multiset(m, budget()).unwrap();
        let fast = exp_sum(&ms, x).value();
        let slow = brute_exp_sum(&ms.expand(), x);
        let scale = ms.cardinality().to_f64().unwrap();
        prop_assert!((fast - slow).abs() <= 1e-12 * scale.max(slow.abs()), "{fast} vs {slow}");
    }

    #[test]
    fn degree_minus_exponent_is_power_of_two(m in 0u64..200) {
        let d = weighted_degree(m, budget()).unwrap();
        let e = constant_exponent(m, budget()).unwrap();
        prop_assert_eq!(d, e + (BigUint::one() << m as usize));
    }

    #[test]
    fn gamma_doubles_minus_one(m in 1u64..300) {
        let s = iterate_to(m, budget()).unwrap();
        prop_assert_eq!(s.gamma(), (BigUint::one() << m as usize) + 1u32);
        prop_assert_eq!(s.scale_history().len() as u64, m);
    }
}
