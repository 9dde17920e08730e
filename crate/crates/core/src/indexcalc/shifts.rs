use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::{scale_exponents, IndexError, StepBudget};

/// Shift multiset `I_m`, built from the triple `I = {-1/2, 0, 1/2}` by
/// `I_m = I_{m-1} + 2^{-k(m)} I_{m-1}` (multiset sum, repetitions counted).
///
/// Only the scale exponents are stored; the multiset itself has `3^{2^m}`
/// elements and is materialised on demand in collapsed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftMultiset {
    scale_exponents: Vec<u64>,
}

impl ShiftMultiset {
    pub fn new(scale_exponents: Vec<u64>) -> Self {
        ShiftMultiset { scale_exponents }
    }

    /// The triple `I` itself.
    pub fn base() -> Self {
        ShiftMultiset::new(Vec::new())
    }

    pub fn scale_exponents(&self) -> &[u64] {
        &self.scale_exponents
    }

    pub fn m(&self) -> u64 {
        self.scale_exponents.len() as u64
    }

    /// Number of scaled copies of `I` in the sum, `2^m`.
    pub fn copies(&self) -> BigUint {
        BigUint::one() << self.scale_exponents.len()
    }

    /// Multiset cardinality `3^{2^m}`.
    pub fn cardinality(&self) -> BigUint {
        let copies = self.copies().to_u32().expect("cardinality only for small m");
        num_traits::pow(BigUint::from(3u32), copies as usize)
    }

    pub fn cardinality_log2(&self) -> f64 {
        (self.scale_exponents.len() as f64).exp2() * 3f64.log2()
    }

    /// Collapses the multiset to distinct dyadic offsets with multiplicities.
    pub fn expand(&self) -> DyadicMultiset {
        let hist = scale_histogram(self);
        let top = hist.keys().next_back().copied().unwrap_or(0);
        let log2_denom = u32::try_from(top + 1).expect("scale exponent fits u32");
        let mut counts: BTreeMap<i64, BigUint> = BTreeMap::new();
        counts.insert(0, BigUint::one());
        for (&e, n) in &hist {
            let step = 1i64 << (top - e);
            let n = n.to_u64().expect("copy count fits u64");
            for _ in 0..n {
                let mut next: BTreeMap<i64, BigUint> = BTreeMap::new();
                for (&offset, c) in &counts {
                    for delta in [-step, 0, step] {
                        *next.entry(offset + delta).or_insert_with(BigUint::zero) += c;
                    }
                }
                counts = next;
            }
        }
        DyadicMultiset { log2_denom, counts }
    }
}

/// Finite multiset of offsets `n / 2^{log2_denom}` keyed by numerator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicMultiset {
    pub log2_denom: u32,
    pub counts: BTreeMap<i64, BigUint>,
}

impl DyadicMultiset {
    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn offset_f64(&self, numerator: i64) -> f64 {
        numerator as f64 / (self.log2_denom as f64).exp2()
    }
}

pub fn shift_multiset(m: u64, budget: StepBudget) -> Result<ShiftMultiset, IndexError> {
    Ok(ShiftMultiset::new(scale_exponents(m, budget)?))
}

/// `N(e)`: number of subsets of the scale exponents summing to `e`, i.e. the
/// coefficients of `Π (1 + z^{k(i)})`.
pub fn scale_histogram(ms: &ShiftMultiset) -> BTreeMap<u64, BigUint> {
    let total: u64 = ms.scale_exponents.iter().sum();
    let mut coeffs = vec![BigUint::zero(); total as usize + 1];
    coeffs[0] = BigUint::one();
    let mut reach = 0usize;
    for &k in &ms.scale_exponents {
        let k = k as usize;
        for e in (0..=reach).rev() {
            if !coeffs[e].is_zero() {
                let c = coeffs[e].clone();
                coeffs[e + k] += c;
            }
        }
        reach += k;
    }
    coeffs
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (e as u64, c))
        .collect()
}

/// Real-valued exponential sum in log-magnitude form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpSum {
    /// `ln |E|`; `-inf` when `zero` is set.
    pub log_abs: f64,
    pub negative: bool,
    pub zero: bool,
}

impl ExpSum {
    pub fn value(&self) -> f64 {
        if self.zero {
            return 0.0;
        }
        let v = self.log_abs.exp();
        if self.negative {
            -v
        } else {
            v
        }
    }

    pub fn abs_value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.log_abs.exp()
        }
    }
}

/// Factored exponential sum over a collapsed scale histogram.
#[derive(Debug, Clone)]
pub struct ExpSumEvaluator {
    factors: Vec<(f64, f64, bool)>,
}

impl ExpSumEvaluator {
    pub fn new(ms: &ShiftMultiset) -> Self {
        let factors = scale_histogram(ms)
            .into_iter()
            .map(|(e, n)| {
                let odd = n.is_odd();
                let n = n.to_f64().unwrap_or(f64::INFINITY);
                (0.5 * (-(e as f64)).exp2(), n, odd)
            })
            .collect();
        ExpSumEvaluator { factors }
    }

    /// `E(x) = Σ_{ρ∈I_m} e^{-iρx} = Π_e (1 + 2cos(2^{-e} x / 2))^{N(e)}`.
    pub fn eval(&self, x: f64) -> ExpSum {
        let mut log_abs = 0.0;
        let mut negative = false;
        for &(scale, n, odd) in &self.factors {
            let f = 1.0 + 2.0 * (scale * x).cos();
            if f == 0.0 {
                return ExpSum {
                    log_abs: f64::NEG_INFINITY,
                    negative: false,
                    zero: true,
                };
            }
            log_abs += n * f.abs().ln();
            if f < 0.0 && odd {
                negative = !negative;
            }
        }
        ExpSum {
            log_abs,
            negative,
            zero: false,
        }
    }

    /// Points in `[0, limit]` where some factor vanishes.
    pub fn zeros_up_to(&self, limit: f64, cap: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let tau = std::f64::consts::TAU;
        for &(scale, _, _) in &self.factors {
            let mut n = 0.0;
            loop {
                let a = (n * tau + tau / 3.0) / scale;
                let b = (n * tau + 2.0 * tau / 3.0) / scale;
                if a > limit || out.len() >= cap {
                    break;
                }
                out.push(a);
                if b <= limit {
                    out.push(b);
                }
                n += 1.0;
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

pub fn exp_sum(ms: &ShiftMultiset, x: f64) -> ExpSum {
    ExpSumEvaluator::new(ms).eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(exps: &[u64]) -> Vec<(u64, u64)> {
        scale_histogram(&ShiftMultiset::new(exps.to_vec()))
            .into_iter()
            .map(|(e, c)| (e, c.to_u64().unwrap()))
            .collect()
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(hist(&[1, 1]), vec![(0, 1), (1, 2), (2, 1)]);
        assert_eq!(hist(&[]), vec![(0, 1)]);
        // (1+z)^2 (1+z^2)^3 expanded by hand
        assert_eq!(
            hist(&[1, 1, 2, 2, 2]),
            vec![
                (0, 1),
                (1, 2),
                (2, 4),
                (3, 6),
                (4, 6),
                (5, 6),
                (6, 4),
                (7, 2),
                (8, 1)
            ]
        );
    }

    #[test]
    fn shift_multiset_exponents() {
        let b = StepBudget::default();
        assert_eq!(shift_multiset(2, b).unwrap().scale_exponents(), &[1, 1]);
        assert_eq!(
            shift_multiset(5, b).unwrap().scale_exponents(),
            &[1, 1, 2, 2, 2]
        );
        assert!(shift_multiset(0, b).unwrap().scale_exponents().is_empty());
    }

    #[test]
    fn exp_sum_at_zero_and_two_pi() {
        let ms = ShiftMultiset::new(vec![1, 1, 2]);
        let e = exp_sum(&ms, 0.0);
        assert!(!e.negative);
        assert!((e.log_abs - 8.0 * 3f64.ln()).abs() < 1e-12);
        let e0 = exp_sum(&ShiftMultiset::base(), std::f64::consts::TAU);
        assert!((e0.value() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn expand_collapses_to_full_count() {
        let ms = ShiftMultiset::new(vec![1, 1]);
        let d = ms.expand();
        assert_eq!(d.total(), BigUint::from(81u32));
        assert_eq!(d.log2_denom, 3);
        // symmetric about zero
        for (&n, c) in &d.counts {
            assert_eq!(d.counts.get(&-n), Some(c));
        }
        assert_eq!(ms.cardinality(), BigUint::from(81u32));
    }

    #[test]
    fn zero_flag() {
        let ev = ExpSumEvaluator::new(&ShiftMultiset::base());
        let zeros = ev.zeros_up_to(10.0, 100);
        assert!(!zeros.is_empty());
        let at = ev.eval(zeros[0]);
        assert!(at.zero || at.abs_value() < 1e-12);
    }
}
