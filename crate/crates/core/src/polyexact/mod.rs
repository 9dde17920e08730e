//! Exact rational algebra of compactly supported piecewise polynomials and the
//! kernel inequalities built from them.

mod kernels;
mod piecewise;
mod poly;
mod sturm;

pub use kernels::{
    certify_le, check_convel, check_convelem, check_kappaj, check_kt, dyadic_box, dyadic_product,
    dyadic_shifts, elementary_density, fejer, fejer_power, fejer_t, gj_bound, gj_bound_inductive,
    indicator, unit_box, verify_conv01, verify_p5, ExactOutcome, P5Mode, P5Outcome, P5Parts,
    P5_EXACT_MAX, P5_SAMPLED_MAX,
};
pub use piecewise::{
    parse_rational, rational_string, FloatPiecewise, PiecewiseJson, PiecewisePoly, MAX_CONV_POWER,
};
pub use poly::{int, pow2, rat, Poly, Rational};
pub use sturm::{nonneg_certificate, Certificate, SturmChain};

use thiserror::Error;

use crate::indexcalc::IndexError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("expected a positive value: {0}")]
    NonPositive(String),
    #[error("list must be ascending")]
    Unsorted,
    #[error("invalid breakpoints: {0}")]
    InvalidBreakpoints(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}
