//! Closed catalog of finite measures with non-negative Fourier transform,
//! together with the quadrature used to integrate against them.
//!
//! Transforms follow `ν̂(t) = ∫ e^{itx} ν(dx)`.

mod moments;
mod quad;

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::indexcalc::IndexError;
use crate::polyexact::{fejer_power, FloatPiecewise};

pub use moments::{
    fhat_window_integral, log_abs_sinc, p6_rhs, parseval_check, sinc, sinc_moment, P6Rhs,
    P6Setup, ParsevalResult, FHAT_REL_TOL, MOMENT_REL_TOL, PARSEVAL_REL_TOL,
};
pub use quad::{integrate, integrate_even, Neumaier, QuadOptions, QuadratureResult};

/// Largest B-spline order accepted by the catalog.
pub const MAX_BSPLINE_ORDER: u32 = 8;
/// Gaussian densities are integrated on `[-GAUSS_CUTOFF·σ, GAUSS_CUTOFF·σ]`.
pub const GAUSS_CUTOFF: f64 = 9.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("quadrature did not converge: error {achieved:e}, requested {requested:e}")]
    Accuracy { achieved: f64, requested: f64 },
    #[error("invalid measure specification {0:?}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Index(#[from] IndexError),
}

/// Catalog entry. Every kind has `ν ≥ 0` and `ν̂ ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureSpec {
    /// `δ_0`, `ν̂ ≡ 1`.
    Dirac,
    /// `δ_{-a} + 2δ_0 + δ_a`, `ν̂(t) = 2 + 2cos(at)`.
    Atoms { a: f64 },
    /// Centred normal density, `ν̂(t) = exp(-σ²t²/2)`.
    Gaussian { sigma: f64 },
    /// Density `K(x) = (1 - |x|)^+`, `ν̂(t) = sinc²(t/2)`.
    Triangle,
    /// Density `K^{*J}`, `ν̂(t) = sinc^{2J}(t/2)`.
    BSpline { j: u32 },
}

impl MeasureSpec {
    /// The default catalog, one entry per kind.
    pub fn catalog() -> Vec<MeasureSpec> {
        vec![
            MeasureSpec::Dirac,
            MeasureSpec::Atoms { a: 1.0 },
            MeasureSpec::Gaussian { sigma: 1.0 },
            MeasureSpec::Triangle,
            MeasureSpec::BSpline { j: 3 },
        ]
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MeasureSpec::Dirac => "dirac",
            MeasureSpec::Atoms { .. } => "atoms",
            MeasureSpec::Gaussian { .. } => "gaussian",
            MeasureSpec::Triangle => "triangle",
            MeasureSpec::BSpline { .. } => "bspline",
        }
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            MeasureSpec::Atoms { .. } => 4.0,
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        let ok = match *self {
            MeasureSpec::Atoms { a } => a.is_finite() && a > 0.0,
            MeasureSpec::Gaussian { sigma } => sigma.is_finite() && sigma > 0.0,
            MeasureSpec::BSpline { j } => (1..=MAX_BSPLINE_ORDER).contains(&j),
            MeasureSpec::Dirac | MeasureSpec::Triangle => true,
        };
        if ok {
            Ok(())
        } else {
            Err(MeasureError::Parse(self.to_string()))
        }
    }

    /// `ν̂(t)`.
    pub fn fhat(&self, t: f64) -> f64 {
        match *self {
            MeasureSpec::Dirac => 1.0,
            MeasureSpec::Atoms { a } => 2.0 + 2.0 * (a * t).cos(),
            MeasureSpec::Gaussian { sigma } => (-0.5 * sigma * sigma * t * t).exp(),
            MeasureSpec::Triangle => sinc(0.5 * t).powi(2),
            MeasureSpec::BSpline { j } => sinc(0.5 * t).powi(2 * j as i32),
        }
    }

    /// Atomic part as `(position, weight)`.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match *self {
            MeasureSpec::Dirac => vec![(0.0, 1.0)],
            MeasureSpec::Atoms { a } => vec![(-a, 1.0), (0.0, 2.0), (a, 1.0)],
            _ => Vec::new(),
        }
    }

    /// Absolutely continuous part, if any.
    pub fn density(&self) -> Option<Density> {
        match *self {
            MeasureSpec::Dirac | MeasureSpec::Atoms { .. } => None,
            MeasureSpec::Gaussian { sigma } => Some(Density::Gaussian { sigma }),
            MeasureSpec::Triangle => Some(Density::spline(1)),
            MeasureSpec::BSpline { j } => Some(Density::spline(j)),
        }
    }

    /// `∫ φ dν`. `phi_sup` bounds `|φ|` and is used for truncation bounds;
    /// `knots` are extra break points of `φ`; `even` declares `φ` even.
    pub fn integrate(
        &self,
        phi: &dyn Fn(f64) -> f64,
        phi_sup: f64,
        knots: &[f64],
        even: bool,
        opts: &QuadOptions,
    ) -> Result<QuadratureResult, MeasureError> {
        let mut atomic = Neumaier::default();
        for (x, w) in self.atoms() {
            atomic.add(w * phi(x));
        }
        let mut out = QuadratureResult::exact(atomic.value());
        if let Some(dens) = self.density() {
            out = out.plus(dens.integrate(phi, phi_sup, knots, even, opts)?);
        }
        Ok(out)
    }
}

/// Density of a catalog measure.
#[derive(Debug, Clone)]
pub enum Density {
    Gaussian { sigma: f64 },
    Spline { order: u32, eval: FloatPiecewise },
}

impl Density {
    fn spline(order: u32) -> Density {
        let eval = fejer_power(order)
            .expect("order within conv power limit")
            .to_float();
        Density::Spline { order, eval }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Density::Gaussian { sigma } => {
                let z = x / sigma;
                (-0.5 * z * z).exp() / (sigma * std::f64::consts::TAU.sqrt())
            }
            Density::Spline { eval, .. } => eval.eval(x),
        }
    }

    /// Half-width of the integration range.
    pub fn range(&self) -> f64 {
        match self {
            Density::Gaussian { sigma } => GAUSS_CUTOFF * sigma,
            Density::Spline { order, .. } => f64::from(*order),
        }
    }

    /// Mass outside `[-range, range]`.
    pub fn tail_mass(&self) -> f64 {
        match self {
            Density::Gaussian { .. } => {
                // Mills ratio: P(|Z| > z) ≤ 2φ(z)/z
                let z = GAUSS_CUTOFF;
                2.0 * (-0.5 * z * z).exp() / (std::f64::consts::TAU.sqrt() * z)
            }
            Density::Spline { .. } => 0.0,
        }
    }

    fn knots(&self) -> Vec<f64> {
        match self {
            Density::Gaussian { .. } => Vec::new(),
            Density::Spline { order, .. } => {
                let j = *order as i64;
                (-j..=j).map(|i| i as f64).collect()
            }
        }
    }

    fn integrate(
        &self,
        phi: &dyn Fn(f64) -> f64,
        phi_sup: f64,
        knots: &[f64],
        even: bool,
        opts: &QuadOptions,
    ) -> Result<QuadratureResult, MeasureError> {
        let x = self.range();
        let mut all = self.knots();
        all.extend_from_slice(knots);
        let f = |u: f64| {
            let d = self.eval(u);
            if d == 0.0 {
                0.0
            } else {
                phi(u) * d
            }
        };
        let mut r = if even {
            integrate_even(&f, x, &all, opts)?
        } else {
            integrate(&f, -x, x, &all, opts)?
        };
        r.truncation_bound = self.tail_mass() * phi_sup;
        Ok(r)
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureSpec::Dirac => f.write_str("dirac"),
            MeasureSpec::Atoms { a } => write!(f, "atoms:a={a:?}"),
            MeasureSpec::Gaussian { sigma } => write!(f, "gaussian:sigma={sigma:?}"),
            MeasureSpec::Triangle => f.write_str("triangle"),
            MeasureSpec::BSpline { j } => write!(f, "bspline:J={j}"),
        }
    }
}

impl FromStr for MeasureSpec {
    type Err = MeasureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MeasureError::Parse(s.to_string());
        let (kind, rest) = match s.trim().split_once(':') {
            Some((k, r)) => (k.trim(), Some(r.trim())),
            None => (s.trim(), None),
        };
        let param = |name: &str| -> Result<Option<f64>, MeasureError> {
            let Some(rest) = rest else { return Ok(None) };
            let (key, value) = rest.split_once('=').ok_or_else(bad)?;
            if !key.trim().eq_ignore_ascii_case(name) {
                return Err(bad());
            }
            value.trim().parse::<f64>().map(Some).map_err(|_| bad())
        };
        let spec = match kind.to_ascii_lowercase().as_str() {
            "dirac" if rest.is_none() => MeasureSpec::Dirac,
            "triangle" if rest.is_none() => MeasureSpec::Triangle,
            "atoms" => MeasureSpec::Atoms {
                a: param("a")?.unwrap_or(1.0),
            },
            "gaussian" => MeasureSpec::Gaussian {
                sigma: param("sigma")?.unwrap_or(1.0),
            },
            "bspline" => {
                let j = param("J")?.unwrap_or(3.0);
                if j.fract() != 0.0 {
                    return Err(bad());
                }
                MeasureSpec::BSpline {
                    j: j.to_u32().ok_or_else(bad)?,
                }
            }
            _ => return Err(bad()),
        };
        spec.validate().map_err(|_| bad())?;
        Ok(spec)
    }
}
