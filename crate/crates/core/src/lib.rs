//! Stack-and-shift multiset transforms, exact convolution calculus of
//! indicator kernels, and numerical checks of the resulting Fourier-transform
//! mean-value inequalities.
//!
//! * [`indexcalc`]: the integer iteration `U_m`, its block sequences and the
//!   dyadic shift multisets.
//! * [`polyexact`]: compactly supported piecewise polynomials over the
//!   rationals with exact nonnegativity certificates.
//! * [`measures`]: a closed catalog of measures with non-negative Fourier
//!   transform and an adaptive quadrature engine.
//! * [`verify`]: inequality checks, the check registry and the suite runner.
//! * [`cli`]: the `stackshift` command-line front end.

pub mod cli;
pub mod indexcalc;
pub mod measures;
pub mod polyexact;
pub mod verify;
