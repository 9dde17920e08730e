use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::IndexError;

/// Default number of stack-and-shift steps any single computation may take.
pub const DEFAULT_STEP_BUDGET: u64 = 20_000;

/// Environment variable that overrides [`DEFAULT_STEP_BUDGET`].
pub const STEP_BUDGET_ENV: &str = "STACKSHIFT_STEP_BUDGET";

/// Upper bound on the number of steps a computation may perform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StepBudget(pub u64);

impl Default for StepBudget {
    fn default() -> Self {
        StepBudget(DEFAULT_STEP_BUDGET)
    }
}

impl StepBudget {
    /// Reads [`STEP_BUDGET_ENV`], falling back to the default when unset.
    pub fn from_env() -> Result<Self, IndexError> {
        match std::env::var(STEP_BUDGET_ENV) {
            Ok(raw) => raw
                .trim()
                .parse::<u64>()
                .map(StepBudget)
                .map_err(|_| IndexError::InvalidBudget(raw)),
            Err(_) => Ok(StepBudget::default()),
        }
    }

    pub fn check(self, steps: u64) -> Result<(), IndexError> {
        if steps > self.0 {
            Err(IndexError::BudgetExceeded {
                requested: steps,
                limit: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// The configuration `U_m = {(j, c_j)}` reached after `m` stack-and-shift steps.
///
/// `entries` maps each index `j` to its stack height `c_j`. The scale history
/// records the consumed minimal index of every completed step, which is also
/// the dyadic scale exponent used by the shift multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StackState {
    m: u64,
    entries: BTreeMap<u64, BigUint>,
    scale_history: Vec<u64>,
}

impl StackState {
    /// The basic configuration `{(1, 2)}`.
    pub fn initial() -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(1, BigUint::from(2u32));
        StackState {
            m: 0,
            entries,
            scale_history: Vec::new(),
        }
    }

    pub fn from_entries(
        m: u64,
        entries: BTreeMap<u64, BigUint>,
        scale_history: Vec<u64>,
    ) -> Result<Self, IndexError> {
        if entries.is_empty() {
            return Err(IndexError::InvalidState("empty configuration".into()));
        }
        if entries.keys().any(|&j| j == 0) {
            return Err(IndexError::InvalidState("indices must be positive".into()));
        }
        if entries.values().any(|c| c.is_zero()) {
            return Err(IndexError::InvalidState("counts must be positive".into()));
        }
        if scale_history.len() as u64 != m {
            return Err(IndexError::InvalidState(format!(
                "scale history has {} entries for m={m}",
                scale_history.len()
            )));
        }
        if scale_history.windows(2).any(|w| w[0] > w[1]) {
            return Err(IndexError::InvalidState(
                "scale history must be non-decreasing".into(),
            ));
        }
        Ok(StackState {
            m,
            entries,
            scale_history,
        })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn entries(&self) -> &BTreeMap<u64, BigUint> {
        &self.entries
    }

    pub fn scale_history(&self) -> &[u64] {
        &self.scale_history
    }

    /// Block index `k` of the last completed step, `0` before any step.
    pub fn block(&self) -> u64 {
        self.scale_history.last().copied().unwrap_or(0)
    }

    pub fn count(&self, j: u64) -> Option<&BigUint> {
        self.entries.get(&j)
    }

    pub fn min_index(&self) -> u64 {
        *self.entries.keys().next().expect("non-empty configuration")
    }

    pub fn max_index(&self) -> u64 {
        *self.entries.keys().next_back().expect("non-empty configuration")
    }

    /// Total multiplicity `γ = Σ c_j`, the number of convolution factors.
    pub fn gamma(&self) -> BigUint {
        self.entries.values().sum()
    }

    /// Weighted degree `d = Σ j·c_j`.
    pub fn weighted_degree(&self) -> BigUint {
        self.entries
            .iter()
            .map(|(&j, c)| c * BigUint::from(j))
            .sum()
    }

    pub fn is_interval(&self) -> bool {
        let len = self.entries.len() as u64;
        self.max_index() - self.min_index() + 1 == len
    }

    /// One application of the stack-and-shift transform.
    ///
    /// With `j0` the least index: one unit of `c_{j0}` is consumed, then the
    /// whole pre-step configuration shifted by `+j0` is superposed.
    pub fn step(&self) -> StackState {
        let j0 = self.min_index();
        let mut next = self.entries.clone();
        {
            let c0 = next.get_mut(&j0).expect("min index present");
            if c0.is_one() {
                next.remove(&j0);
            } else {
                *c0 -= 1u32;
            }
        }
        for (&j, c) in &self.entries {
            *next.entry(j + j0).or_insert_with(BigUint::zero) += c;
        }
        let mut scale_history = self.scale_history.clone();
        scale_history.push(j0);
        StackState {
            m: self.m + 1,
            entries: next,
            scale_history,
        }
    }

    /// State dump: header `m=<m> k=<k>` then one `j<TAB>c_j` line per entry.
    pub fn dump(&self) -> String {
        let mut out = format!("m={} k={}\n", self.m, self.block());
        for (j, c) in &self.entries {
            out.push_str(&format!("{j}\t{c}\n"));
        }
        out
    }

    /// Row in the `(j,c) (j,c) ...` table notation.
    pub fn row(&self) -> String {
        self.entries
            .iter()
            .map(|(j, c)| format!("({j},{c})"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Counts as machine integers, when they all fit.
    pub fn small_entries(&self) -> Option<Vec<(u64, u64)>> {
        self.entries
            .iter()
            .map(|(&j, c)| c.to_u64().map(|c| (j, c)))
            .collect()
    }
}

impl fmt::Display for StackState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.row())
    }
}

pub fn initial_state() -> StackState {
    StackState::initial()
}

pub fn step(state: &StackState) -> StackState {
    state.step()
}

/// Applies `m` steps to the initial configuration.
pub fn iterate_to(m: u64, budget: StepBudget) -> Result<StackState, IndexError> {
    budget.check(m)?;
    let mut state = StackState::initial();
    for _ in 0..m {
        state = state.step();
    }
    Ok(state)
}

/// All states `U_0, U_1, ..., U_m`.
pub fn trajectory(m: u64, budget: StepBudget) -> Result<Vec<StackState>, IndexError> {
    budget.check(m)?;
    let mut out = Vec::with_capacity(m as usize + 1);
    let mut state = StackState::initial();
    out.push(state.clone());
    for _ in 0..m {
        state = state.step();
        out.push(state.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_of(pairs: &[(u64, u64)]) -> BTreeMap<u64, BigUint> {
        pairs.iter().map(|&(j, c)| (j, BigUint::from(c))).collect()
    }

    #[test]
    fn initial_is_basic_set() {
        let s = initial_state();
        assert_eq!(s.entries(), &state_of(&[(1, 2)]));
        assert_eq!(s.m(), 0);
        assert_eq!(s.block(), 0);
        assert_eq!(s.gamma(), BigUint::from(2u32));
        assert!(s.scale_history().is_empty());
    }

    #[test]
    fn first_steps_match_table() {
        let s1 = step(&initial_state());
        assert_eq!(s1.entries(), &state_of(&[(1, 1), (2, 2)]));
        let s2 = step(&s1);
        assert_eq!(s2.entries(), &state_of(&[(2, 3), (3, 2)]));
        assert_eq!(s2.scale_history(), &[1, 1]);
    }

    #[test]
    fn row_five_to_six() {
        let five = StackState::from_entries(
            5,
            state_of(&[(3, 2), (4, 6), (5, 6), (6, 8), (7, 6), (8, 3), (9, 2)]),
            vec![1, 1, 2, 2, 2],
        )
        .unwrap();
        let six = five.step();
        assert_eq!(
            six.entries(),
            &state_of(&[
                (3, 1),
                (4, 6),
                (5, 6),
                (6, 10),
                (7, 12),
                (8, 9),
                (9, 10),
                (10, 6),
                (11, 3),
                (12, 2)
            ])
        );
        assert_eq!(six.block(), 3);
    }

    #[test]
    fn iterate_to_four_and_zero() {
        let s4 = iterate_to(4, StepBudget::default()).unwrap();
        assert_eq!(
            s4.entries(),
            &state_of(&[(2, 1), (3, 2), (4, 5), (5, 4), (6, 3), (7, 2)])
        );
        assert_eq!(iterate_to(0, StepBudget::default()).unwrap(), initial_state());
        assert_eq!(
            iterate_to(5, StepBudget::default()).unwrap().gamma(),
            BigUint::from(33u32)
        );
    }

    #[test]
    fn budget_is_enforced() {
        let err = iterate_to(11, StepBudget(10)).unwrap_err();
        assert_eq!(
            err,
            IndexError::BudgetExceeded {
                requested: 11,
                limit: 10
            }
        );
    }

    #[test]
    fn dump_format() {
        let s = iterate_to(2, StepBudget::default()).unwrap();
        assert_eq!(s.dump(), "m=2 k=1\n2\t3\n3\t2\n");
        assert_eq!(s.row(), "(2,3) (3,2)");
    }

    #[test]
    fn rejects_malformed_states() {
        assert!(StackState::from_entries(0, BTreeMap::new(), vec![]).is_err());
        assert!(StackState::from_entries(0, state_of(&[(1, 0)]), vec![]).is_err());
        assert!(StackState::from_entries(2, state_of(&[(1, 1)]), vec![2, 1]).is_err());
    }
}
