use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::{IndexError, StepBudget};

/// Steps the transform while keeping only the low end of the configuration.
///
/// Counts at index `j` only ever receive contributions from smaller indices,
/// so truncating the configuration at `window` leaves every `c_j` with
/// `j <= window` exact. The aggregates (`γ`, `d`, `e`, largest index) follow
/// closed recurrences and are tracked exactly for the full configuration.
#[derive(Debug, Clone)]
pub(crate) struct WindowedStepper {
    window: u64,
    low: BTreeMap<u64, BigUint>,
    m: u64,
    gamma: BigUint,
    degree: BigUint,
    exponent: BigUint,
    max_index: u64,
}

impl WindowedStepper {
    pub(crate) fn new(window: u64) -> Self {
        let mut low = BTreeMap::new();
        low.insert(1, BigUint::from(2u32));
        WindowedStepper {
            window: window.max(1),
            low,
            m: 0,
            gamma: BigUint::from(2u32),
            degree: BigUint::from(2u32),
            exponent: BigUint::one(),
            max_index: 1,
        }
    }

    /// Least index of the full configuration, if it lies inside the window.
    pub(crate) fn min_index(&self) -> Option<u64> {
        self.low.keys().next().copied()
    }

    pub(crate) fn count(&self, j: u64) -> Option<&BigUint> {
        debug_assert!(j <= self.window);
        self.low.get(&j)
    }

    /// Performs one step and returns the consumed index, or `None` when the
    /// least index has moved past the window.
    pub(crate) fn step(&mut self) -> Option<u64> {
        let j0 = self.min_index()?;
        let mut next = self.low.clone();
        {
            let c0 = next.get_mut(&j0).expect("min index present");
            if c0.is_one() {
                next.remove(&j0);
            } else {
                *c0 -= 1u32;
            }
        }
        for (&j, c) in &self.low {
            let target = j + j0;
            if target > self.window {
                break;
            }
            *next.entry(target).or_insert_with(BigUint::zero) += c;
        }
        self.low = next;

        let lifted = (&self.gamma - 1u32) * BigUint::from(j0);
        self.exponent = &lifted + (&self.exponent << 1u32);
        self.degree = &lifted + (&self.degree << 1u32);
        self.gamma = (&self.gamma << 1u32) - 1u32;
        self.max_index += j0;
        self.m += 1;
        Some(j0)
    }
}

/// Per-block data at the block boundary `m = R_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockRecord {
    pub k: u64,
    /// Stack height of index `k` on entering the block.
    pub r: u64,
    /// `R_k = r_1 + ... + r_k`.
    pub big_r: u64,
    /// `ζ_k`, the largest index at `m = R_k`.
    pub zeta: u64,
    /// `γ_k`, total multiplicity at `m = R_k`.
    #[serde(serialize_with = "big_as_string")]
    pub gamma: BigUint,
    /// `d_k`, weighted degree at `m = R_k`.
    #[serde(serialize_with = "big_as_string")]
    pub degree: BigUint,
    /// `e_{R_k}` with `C_{R_k} = 2^{e_{R_k}}`.
    #[serde(serialize_with = "big_as_string")]
    pub exponent: BigUint,
    /// Least index at `m = R_k`.
    pub min_index_at_end: u64,
    /// Sum of the largest index of `J_m` over the block.
    pub max_index_sum: u64,
    /// Sum of `#J_m` over the block.
    pub size_sum: u64,
    /// Least index seen strictly inside the block (before its last step).
    pub interior_min: Option<u64>,
}

fn big_as_string<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Block-level sequences `r_k`, `R_k`, `ζ_k`, `γ_k`, `d_k` and `e_{R_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SequenceTable {
    pub blocks: Vec<BlockRecord>,
    /// `r_{K+1}`, already determined at `m = R_K`.
    #[serde(serialize_with = "opt_big_as_string")]
    pub r_next: Option<BigUint>,
}

fn opt_big_as_string<S: serde::Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

impl SequenceTable {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block(&self, k: u64) -> Option<&BlockRecord> {
        if k == 0 {
            return None;
        }
        self.blocks.get(k as usize - 1)
    }

    pub fn r(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.r).collect()
    }

    pub fn big_r(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.big_r).collect()
    }

    pub fn zeta(&self) -> Vec<u64> {
        self.blocks.iter().map(|b| b.zeta).collect()
    }

    /// `R_k` with `R_0 = 0`.
    pub fn big_r_at(&self, k: u64) -> u64 {
        self.block(k).map_or(0, |b| b.big_r)
    }

    /// `ζ_k` with `ζ_0 = 1`.
    pub fn zeta_at(&self, k: u64) -> u64 {
        self.block(k).map_or(1, |b| b.zeta)
    }

    /// `e_{R_k}` with `e_{R_0} = e_0 = 1`.
    pub fn exponent_at(&self, k: u64) -> BigUint {
        self.block(k).map_or_else(BigUint::one, |b| b.exponent.clone())
    }

    /// Stack heights `r_1..r_K` followed by `r_{K+1}` when it fits a `u64`.
    pub fn r_extended(&self) -> Vec<u64> {
        let mut r = self.r();
        if let Some(next) = self.r_next.as_ref().and_then(|v| v.to_u64()) {
            r.push(next);
        }
        r
    }

    pub const TSV_HEADER: &'static str = "k\tr\tR\tzeta\tgamma_k\td_k\te_Rk";

    /// Columns `k, r, R, zeta, gamma_k, d_k, e_Rk`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(Self::TSV_HEADER);
        out.push('\n');
        for b in &self.blocks {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                b.k, b.r, b.big_r, b.zeta, b.gamma, b.degree, b.exponent
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Reached,
    Budget,
    Window,
}

fn run_blocks(
    window: u64,
    k_max: Option<u64>,
    budget: StepBudget,
) -> Result<(SequenceTable, Stop), IndexError> {
    let mut stepper = WindowedStepper::new(window);
    let mut blocks = Vec::new();
    let mut k = 1u64;
    let stop = loop {
        if k_max.is_some_and(|kmax| k > kmax) {
            break Stop::Reached;
        }
        if k + 1 > window {
            break Stop::Window;
        }
        match stepper.min_index() {
            Some(j) if j == k => {}
            other => {
                return Err(IndexError::InvalidState(format!(
                    "block {k} opened with least index {other:?}"
                )))
            }
        }
        let r = stepper.count(k).expect("present").clone();
        let Some(r) = r.to_u64().filter(|&r| stepper.m.saturating_add(r) <= budget.0) else {
            if k_max.is_some() {
                return Err(IndexError::BudgetExceeded {
                    requested: stepper.m.saturating_add(r.to_u64().unwrap_or(u64::MAX)),
                    limit: budget.0,
                });
            }
            break Stop::Budget;
        };
        let mut max_index_sum = 0u64;
        let mut size_sum = 0u64;
        let mut interior_min = None;
        for h in 1..=r {
            let j0 = stepper.step().expect("window holds block index");
            debug_assert_eq!(j0, k);
            let a = stepper.min_index().ok_or_else(|| {
                IndexError::InvalidState(format!("window {window} exhausted in block {k}"))
            })?;
            let b = stepper.max_index;
            max_index_sum += b;
            size_sum += b - a + 1;
            if h < r {
                interior_min = Some(interior_min.map_or(a, |v: u64| v.min(a)));
            }
        }
        blocks.push(BlockRecord {
            k,
            r,
            big_r: stepper.m,
            zeta: stepper.max_index,
            gamma: stepper.gamma.clone(),
            degree: stepper.degree.clone(),
            exponent: stepper.exponent.clone(),
            min_index_at_end: stepper.min_index().expect("checked above"),
            max_index_sum,
            size_sum,
            interior_min,
        });
        k += 1;
    };
    let r_next = blocks
        .last()
        .and_then(|b: &BlockRecord| stepper.count(b.k + 1).cloned());
    Ok((SequenceTable { blocks, r_next }, stop))
}

/// Sequences for blocks `1..=k_max`; requires `R_{k_max}` within budget.
pub fn sequences(k_max: u64, budget: StepBudget) -> Result<SequenceTable, IndexError> {
    if k_max == 0 {
        return Err(IndexError::InvalidArgument("kmax must be positive".into()));
    }
    let (table, stop) = run_blocks(k_max + 1, Some(k_max), budget)?;
    debug_assert_eq!(stop, Stop::Reached);
    Ok(table)
}

/// Every block that completes within the step budget.
pub fn sequences_within(budget: StepBudget) -> Result<SequenceTable, IndexError> {
    let mut window = 16;
    loop {
        let (table, stop) = run_blocks(window, None, budget)?;
        if stop != Stop::Window {
            return Ok(table);
        }
        window *= 2;
    }
}

/// Walks `m` steps and returns the consumed index of each step together with
/// the final stepper.
fn walk(m: u64, budget: StepBudget) -> Result<(Vec<u64>, WindowedStepper), IndexError> {
    budget.check(m)?;
    let mut window = 16;
    'retry: loop {
        let mut stepper = WindowedStepper::new(window);
        let mut history = Vec::with_capacity(m as usize);
        for _ in 0..m {
            match stepper.step() {
                Some(j0) => history.push(j0),
                None => {
                    window *= 2;
                    continue 'retry;
                }
            }
        }
        return Ok((history, stepper));
    }
}

/// Scale exponents `k(1), ..., k(m)`: the block index of every step.
pub fn scale_exponents(m: u64, budget: StepBudget) -> Result<Vec<u64>, IndexError> {
    walk(m, budget).map(|(h, _)| h)
}

/// `e_m` with `C_m = 2^{e_m}`, from `e_0 = 1`, `e_m = k(m)·(γ_{m-1} - 1) + 2e_{m-1}`.
pub fn constant_exponent(m: u64, budget: StepBudget) -> Result<BigUint, IndexError> {
    walk(m, budget).map(|(_, s)| s.exponent)
}

/// Weighted degree `d_m` of `U_m` without materialising the configuration.
pub fn weighted_degree(m: u64, budget: StepBudget) -> Result<BigUint, IndexError> {
    walk(m, budget).map(|(_, s)| s.degree)
}
