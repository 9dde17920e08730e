//! Exact integer engine for the stack-and-shift iteration.
//!
//! A configuration `U_m = {(j, c_j)}` is advanced by consuming one unit of the
//! least stack and superposing a copy of the whole configuration shifted by
//! that index. Everything downstream (block sequences `r_k`, `R_k`, `ζ_k`,
//! the constants `C_m = 2^{e_m}` and the shift multisets `I_m`) is derived
//! from this iteration in exact arithmetic.

mod growth;
mod sequences;
mod shifts;
mod state;

pub use growth::{
    doubly_exponential_headroom, growth_checks, log2_big, GrowthClaim, GrowthEntry, GrowthReport,
};
pub use sequences::{
    constant_exponent, scale_exponents, sequences, sequences_within, weighted_degree, BlockRecord,
    SequenceTable,
};
pub use shifts::{
    exp_sum, scale_histogram, shift_multiset, DyadicMultiset, ExpSum, ExpSumEvaluator,
    ShiftMultiset,
};
pub use state::{
    initial_state, iterate_to, step, trajectory, StackState, StepBudget, DEFAULT_STEP_BUDGET,
    STEP_BUDGET_ENV,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("step budget exceeded: {requested} steps requested, limit is {limit}")]
    BudgetExceeded { requested: u64, limit: u64 },
    #[error("invalid step budget {0:?}")]
    InvalidBudget(String),
    #[error("invalid configuration: {0}")]
    InvalidState(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
