use num_bigint::BigUint;
use num_traits::{FromPrimitive, ToPrimitive};
use serde::Serialize;

use super::{IndexError, SequenceTable};

/// Growth statement being checked on one block (or one pair of blocks).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClaim {
    /// `min_{2k <= n <= ζ_{k-1}} r_n >= r_k²/2`, always including `n = 2k`.
    Minrn,
    /// `r_{2^j} >= (3/2)^{2^{j-1}}`.
    DyadicLowerBound,
    /// `Σ_{block k} max J_m = r_k ζ_{k-1} + k r_k (r_k + 1) / 2`.
    Est0,
    /// `e_{R_k} = 2^{r_k} e_{R_{k-1}} + k r_k 2^{R_k - 1}`.
    BlockConstant,
    /// `e_{R_k} <= 2ζ_k² + 2^{r_k} e_{R_{k-1}}`.
    Recrk,
    /// `γ_k >= (r_k²/2)(ζ_{k-1} - 2k)`.
    Rz1Raw,
    /// `γ_k >= ((1-ε)/2) r_k² ζ_{k-1}`.
    Rz1,
    /// `d_k >= (r_k²/4)(ζ_{k-1}² - 4k²)`.
    Rz2Raw,
    /// `d_k >= ((1-ε)/4) r_k² ζ_{k-1}²`.
    Rz2,
    /// `J_m` is the integer interval `{k, ..., ζ_{k-1} + (m - R_{k-1})k}` inside
    /// the block and `{k+1, ..., ζ_k}` at its end.
    IndexInterval,
}

impl GrowthClaim {
    pub fn name(self) -> &'static str {
        match self {
            GrowthClaim::Minrn => "minrn",
            GrowthClaim::DyadicLowerBound => "r2j",
            GrowthClaim::Est0 => "est0",
            GrowthClaim::BlockConstant => "block-constant",
            GrowthClaim::Recrk => "recrk",
            GrowthClaim::Rz1Raw => "rz1-raw",
            GrowthClaim::Rz1 => "rz1",
            GrowthClaim::Rz2Raw => "rz2-raw",
            GrowthClaim::Rz2 => "rz2",
            GrowthClaim::IndexInterval => "index-interval",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthEntry {
    pub claim: GrowthClaim,
    pub k: u64,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub k_max: u64,
    pub epsilon: f64,
    pub entries: Vec<GrowthEntry>,
    /// Smallest `k0` such that `Rz1` holds for every `k0 <= k <= K`.
    pub rz1_from: Option<u64>,
    pub rz2_from: Option<u64>,
    /// `min_n r_n^{1/n}` over all computed `n`.
    pub rho_empirical: f64,
}

impl GrowthReport {
    pub fn entries_for(&self, claim: GrowthClaim) -> impl Iterator<Item = &GrowthEntry> {
        self.entries.iter().filter(move |e| e.claim == claim)
    }

    pub fn all_hold(&self, claim: GrowthClaim) -> bool {
        self.entries_for(claim).all(|e| e.holds)
    }
}

fn entry(claim: GrowthClaim, k: u64, lhs: impl ToString, rhs: impl ToString, holds: bool) -> GrowthEntry {
    GrowthEntry {
        claim,
        k,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        holds,
    }
}

/// `big >= ceil(bound)` for a non-negative real bound.
fn big_at_least(big: &BigUint, bound: f64) -> bool {
    if bound <= 0.0 {
        return true;
    }
    match BigUint::from_f64(bound.ceil()) {
        Some(b) => *big >= b,
        None => false,
    }
}

fn suffix_start(flags: &[(u64, bool)]) -> Option<u64> {
    let mut start = None;
    for &(k, ok) in flags.iter().rev() {
        if ok {
            start = Some(k);
        } else {
            break;
        }
    }
    start
}

/// Evaluates the block-growth statements on a computed [`SequenceTable`].
pub fn growth_checks(table: &SequenceTable, epsilon: f64) -> Result<GrowthReport, IndexError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(IndexError::InvalidArgument(format!(
            "epsilon must lie in (0,1), got {epsilon}"
        )));
    }
    let k_max = table.len() as u64;
    let r = table.r_extended();
    let r_at = |n: u64| r.get(n as usize - 1).copied();
    let mut entries = Vec::new();

    for k in 1..=k_max {
        let rk = r_at(k).expect("complete block");
        if let Some(r2k) = r_at(2 * k) {
            let upper = table.zeta_at(k - 1).max(2 * k);
            let min_r = (2 * k..=upper)
                .filter_map(r_at)
                .min()
                .expect("n = 2k present");
            let lhs = 2 * u128::from(min_r);
            let rhs = u128::from(rk) * u128::from(rk);
            entries.push(entry(
                GrowthClaim::Minrn,
                k,
                format!("2*min r_n = {lhs} (r_2k = {r2k})"),
                format!("r_k^2 = {rhs}"),
                lhs >= rhs,
            ));
        }
    }

    let mut j = 1u32;
    while let Some(rj) = 1u64.checked_shl(j).and_then(r_at) {
        let half = 1usize << (j - 1);
        let lhs = BigUint::from(rj) << half;
        let rhs = num_traits::pow(BigUint::from(3u32), half);
        let holds = lhs >= rhs;
        entries.push(entry(
            GrowthClaim::DyadicLowerBound,
            1 << j,
            format!("r * 2^{half} = {lhs}"),
            format!("3^{half}"),
            holds,
        ));
        j += 1;
    }

    let mut rz1 = Vec::new();
    let mut rz2 = Vec::new();
    for b in &table.blocks {
        let k = b.k;
        let rk = u128::from(b.r);
        let zeta_prev = u128::from(table.zeta_at(k - 1));
        let kk = u128::from(k);

        let est0 = rk * zeta_prev + kk * rk * (rk + 1) / 2;
        entries.push(entry(
            GrowthClaim::Est0,
            k,
            b.max_index_sum,
            est0,
            u128::from(b.max_index_sum) == est0,
        ));

        let prev_e = table.exponent_at(k - 1);
        let r_shift = usize::try_from(b.r).expect("r fits usize");
        let scaled = &prev_e << r_shift;
        let expected = &scaled + ((BigUint::from(b.r) * BigUint::from(k)) << (b.big_r - 1) as usize);
        entries.push(entry(
            GrowthClaim::BlockConstant,
            k,
            &b.exponent,
            &expected,
            b.exponent == expected,
        ));
        let zeta = BigUint::from(b.zeta);
        let bound = ((&zeta * &zeta) << 1u32) + &scaled;
        entries.push(entry(
            GrowthClaim::Recrk,
            k,
            &b.exponent,
            &bound,
            b.exponent <= bound,
        ));

        let rk2 = BigUint::from(rk * rk);
        let raw1_ok = if zeta_prev <= 2 * kk {
            true
        } else {
            (&b.gamma << 1u32) >= &rk2 * BigUint::from(zeta_prev - 2 * kk)
        };
        entries.push(entry(
            GrowthClaim::Rz1Raw,
            k,
            &b.gamma,
            format!("r_k^2/2*(zeta_(k-1)-2k), zeta_(k-1)={zeta_prev}"),
            raw1_ok,
        ));
        let bound1 = (1.0 - epsilon) / 2.0 * (rk * rk) as f64 * zeta_prev as f64;
        let ok1 = big_at_least(&b.gamma, bound1);
        rz1.push((k, ok1));
        entries.push(entry(GrowthClaim::Rz1, k, &b.gamma, bound1, ok1));

        let raw2_ok = if zeta_prev <= 2 * kk {
            true
        } else {
            (&b.degree << 2u32) >= &rk2 * BigUint::from(zeta_prev * zeta_prev - 4 * kk * kk)
        };
        entries.push(entry(
            GrowthClaim::Rz2Raw,
            k,
            &b.degree,
            format!("r_k^2/4*(zeta_(k-1)^2-4k^2), zeta_(k-1)={zeta_prev}"),
            raw2_ok,
        ));
        let bound2 = (1.0 - epsilon) / 4.0 * (rk * rk) as f64 * (zeta_prev * zeta_prev) as f64;
        let ok2 = big_at_least(&b.degree, bound2);
        rz2.push((k, ok2));
        entries.push(entry(GrowthClaim::Rz2, k, &b.degree, bound2, ok2));

        let interval_ok = b.min_index_at_end == k + 1
            && b.interior_min.is_none_or(|a| a == k)
            && b.zeta == table.zeta_at(k - 1) + b.r * k;
        entries.push(entry(
            GrowthClaim::IndexInterval,
            k,
            format!("{{{}..{}}}", b.min_index_at_end, b.zeta),
            format!("{{{}..{}}}", k + 1, table.zeta_at(k - 1) + b.r * k),
            interval_ok,
        ));
    }

    let rho_empirical = r
        .iter()
        .enumerate()
        .map(|(i, &rn)| (rn as f64).powf(1.0 / (i + 1) as f64))
        .fold(f64::INFINITY, f64::min);

    Ok(GrowthReport {
        k_max,
        epsilon,
        entries,
        rz1_from: suffix_start(&rz1),
        rz2_from: suffix_start(&rz2),
        rho_empirical,
    })
}

/// `C_{R_K}` bound exponent `2^{(1+ε) r_K}` compared in log space with a
/// combined constant `log2_constant`.
pub fn doubly_exponential_headroom(log2_constant: f64, r_k: u64, epsilon: f64) -> (f64, bool) {
    let target = ((1.0 + epsilon) * r_k as f64).exp2();
    (target, log2_constant <= target)
}

/// `log2` of a big integer, usable beyond the `f64` range.
pub fn log2_big(v: &BigUint) -> f64 {
    if v.bits() < 1000 {
        return v.to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = v.bits() - 64;
    let head = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    head.log2() + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexcalc::{sequences, StepBudget};

    #[test]
    fn first_blocks_satisfy_minrn() {
        let t = sequences(4, StepBudget::default()).unwrap();
        let rep = growth_checks(&t, 0.5).unwrap();
        let minrn: Vec<_> = rep.entries_for(GrowthClaim::Minrn).collect();
        assert_eq!(minrn.len(), 2);
        assert!(minrn.iter().all(|e| e.holds));
    }

    #[test]
    fn est0_block_two() {
        let t = sequences(2, StepBudget::default()).unwrap();
        assert_eq!(t.blocks[1].max_index_sum, 21);
        let rep = growth_checks(&t, 0.5).unwrap();
        assert!(rep.all_hold(GrowthClaim::Est0));
    }

    #[test]
    fn rz1_first_block() {
        let t = sequences(1, StepBudget::default()).unwrap();
        let rep = growth_checks(&t, 0.5).unwrap();
        let e = rep.entries_for(GrowthClaim::Rz1).next().unwrap();
        assert!(e.holds);
        assert_eq!(e.lhs, "5");
        assert_eq!(rep.rz1_from, Some(1));
    }

    #[test]
    fn recrk_bound_breaks_at_block_four() {
        let t = sequences(4, StepBudget::default()).unwrap();
        let rep = growth_checks(&t, 0.5).unwrap();
        let holds: Vec<bool> = rep.entries_for(GrowthClaim::Recrk).map(|e| e.holds).collect();
        assert_eq!(holds, vec![true, true, true, false]);
        assert!(rep.all_hold(GrowthClaim::BlockConstant));
    }

    #[test]
    fn epsilon_range() {
        let t = sequences(1, StepBudget::default()).unwrap();
        assert!(growth_checks(&t, 0.0).is_err());
        assert!(growth_checks(&t, 1.0).is_err());
    }

    #[test]
    fn log2_big_large() {
        let v = (BigUint::from(1u32) << 5000usize) * BigUint::from(3u32);
        assert!((log2_big(&v) - (5000.0 + 3f64.log2())).abs() < 1e-9);
    }
}
