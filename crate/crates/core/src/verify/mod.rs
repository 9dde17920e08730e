//! Inequality checks over the exact and numeric engines, the id-keyed check
//! registry, and the suite runner.

mod checks;
mod registry;
mod report;

use thiserror::Error;

use crate::indexcalc::IndexError;
use crate::measures::MeasureError;
use crate::polyexact::PolyError;

pub use checks::*;
pub use registry::{
    run_suite, Check, CheckParams, Context, FnCheck, Registry, SuiteConfig, DEFAULT_EPSILON,
};
pub use report::{
    overall, real_string, reports_to_json, reports_to_tsv, Status, VerificationReport, TSV_HEADER,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("unknown check id {0:?}")]
    UnknownCheck(String),
    #[error("{0}")]
    Usage(String),
    #[error("construction violated: {0}")]
    Construction(String),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

impl VerifyError {
    /// Budget exhaustion, as opposed to a malformed request.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            VerifyError::Index(IndexError::BudgetExceeded { .. })
                | VerifyError::Poly(PolyError::Index(IndexError::BudgetExceeded { .. }))
                | VerifyError::Poly(PolyError::Budget(_))
                | VerifyError::Measure(MeasureError::Index(IndexError::BudgetExceeded { .. }))
        )
    }
}
