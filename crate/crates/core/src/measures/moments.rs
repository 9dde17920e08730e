use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::Serialize;

use super::quad::{integrate, QuadOptions, QuadratureResult};
use super::{MeasureError, MeasureSpec};
use crate::indexcalc::{
    constant_exponent, iterate_to, sequences, shift_multiset, ExpSumEvaluator, ShiftMultiset, StepBudget,
};
use crate::polyexact::fejer_power;

pub const FHAT_REL_TOL: f64 = 1e-10;
pub const MOMENT_REL_TOL: f64 = 1e-8;
pub const PARSEVAL_REL_TOL: f64 = 1e-6;
const MAX_KNOTS: usize = 50_000;

/// `sin u / u`, `1` at `0`.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// `(ln |sinc u|, sinc u < 0)`, or `None` at a zero.
pub fn log_abs_sinc(u: f64) -> Option<(f64, bool)> {
    let s = sinc(u);
    if s == 0.0 {
        None
    } else {
        Some((s.abs().ln(), s < 0.0))
    }
}

/// Multiples `n·step`, `n ≥ 1`, up to `limit`.
fn lattice(step: f64, limit: f64, out: &mut Vec<f64>) {
    if !(step > 0.0) || !step.is_finite() {
        return;
    }
    let mut n = 1.0;
    while n * step < limit && out.len() < MAX_KNOTS {
        out.push(n * step);
        n += 1.0;
    }
}

/// `∫_{-W}^{W} ν̂`.
pub fn fhat_window_integral(nu: &MeasureSpec, w: f64) -> Result<QuadratureResult, MeasureError> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(MeasureError::InvalidArgument(format!("window {w}")));
    }
    nu.validate()?;
    match *nu {
        MeasureSpec::Dirac => Ok(QuadratureResult::exact(2.0 * w)),
        MeasureSpec::Atoms { a } => Ok(QuadratureResult::exact(4.0 * w + 4.0 * (a * w).sin() / a)),
        MeasureSpec::Gaussian { .. } | MeasureSpec::Triangle | MeasureSpec::BSpline { .. } => {
            let mut knots = Vec::new();
            if !matches!(nu, MeasureSpec::Gaussian { .. }) {
                lattice(2.0 * PI, w, &mut knots);
            }
            let f = |t: f64| nu.fhat(t);
            integrate(&f, 0.0, w, &knots, &QuadOptions::relative(FHAT_REL_TOL)).map(|r| r.scaled(2.0))
        }
    }
}

/// `∫ |sinc(xT)|^n ν(dx)`, powers taken in log space.
pub fn sinc_moment(nu: &MeasureSpec, t: f64, n: u64) -> Result<QuadratureResult, MeasureError> {
    if !(t > 0.0) || !t.is_finite() || n == 0 {
        return Err(MeasureError::InvalidArgument(format!("T = {t}, n = {n}")));
    }
    nu.validate()?;
    let nf = n as f64;
    let phi = |x: f64| match log_abs_sinc(x * t) {
        None => 0.0,
        Some((l, _)) => (nf * l).exp(),
    };
    let mut knots = Vec::new();
    if let Some(d) = nu.density() {
        lattice(PI / t, d.range(), &mut knots);
    }
    nu.integrate(&phi, 1.0, &knots, true, &QuadOptions::relative(MOMENT_REL_TOL))
}

/// Block data entering the p6 right side, taken at `m = R_k`.
#[derive(Debug, Clone)]
pub struct P6Setup {
    pub k: u64,
    /// `R_k`.
    pub m: u64,
    pub r_k: u64,
    pub zeta: u64,
    /// `(j, c_j)` of `U_{R_k}`.
    pub entries: Vec<(u64, u64)>,
    pub gamma: BigUint,
    /// `d_k = Σ j c_j`.
    pub degree: BigUint,
    /// `e_{R_k}`.
    pub exponent: BigUint,
    scale_exponents: Vec<u64>,
    evaluator: ExpSumEvaluator,
}

impl P6Setup {
    pub fn new(k: u64, budget: StepBudget) -> Result<Self, MeasureError> {
        let table = sequences(k, budget)?;
        let block = table.block(k).expect("block computed");
        let m = block.big_r;
        let state = iterate_to(m, budget)?;
        let ms = shift_multiset(m, budget)?;
        let entries = state
            .entries()
            .iter()
            .map(|(&j, c)| (j, c.to_u64().expect("multiplicity fits u64")))
            .collect();
        Ok(P6Setup {
            k,
            m,
            r_k: block.r,
            zeta: block.zeta,
            entries,
            gamma: state.gamma(),
            degree: state.weighted_degree(),
            exponent: constant_exponent(m, budget)?,
            scale_exponents: ms.scale_exponents().to_vec(),
            evaluator: ExpSumEvaluator::new(&ms),
        })
    }

    /// `e_{R_k} - d_k + 1`.
    pub fn dyadic_exponent(&self) -> BigInt {
        BigInt::from(self.exponent.clone()) - BigInt::from(self.degree.clone()) + 1
    }

    /// `#I_{R_k} = 3^{2^{R_k}}` as a float.
    pub fn cardinality(&self) -> f64 {
        let ms = ShiftMultiset::new(self.scale_exponents.clone());
        ms.cardinality().to_f64().unwrap_or(f64::INFINITY)
    }

    /// `log2 #I_{R_k} = 2^{R_k} log2 3`.
    pub fn cardinality_log2(&self) -> f64 {
        (self.m as f64).exp2() * 3f64.log2()
    }

    /// `Π sinc(y/2^j)^{c_j} · |E(y)| / #I_{R_k}`.
    pub fn normalized_integrand(&self, y: f64) -> f64 {
        if y == 0.0 {
            return 1.0;
        }
        let mut log = 0.0;
        let mut negative = false;
        for &(j, c) in &self.entries {
            match log_abs_sinc(y / (j as f64).exp2()) {
                None => return 0.0,
                Some((l, neg)) => {
                    log += c as f64 * l;
                    if neg && c % 2 == 1 {
                        negative = !negative;
                    }
                }
            }
        }
        let e = self.evaluator.eval(y);
        if e.zero {
            return 0.0;
        }
        log += e.log_abs - self.cardinality_log2() * std::f64::consts::LN_2;
        let v = log.exp();
        if negative {
            -v
        } else {
            v
        }
    }

    /// Break points of the integrand in `y ∈ [0, limit]`.
    pub fn knots(&self, limit: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for &(j, _) in &self.entries {
            lattice(PI * (j as f64).exp2(), limit, &mut out);
        }
        out.extend(self.evaluator.zeros_up_to(limit, MAX_KNOTS));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out.truncate(MAX_KNOTS);
        out
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct P6Rhs {
    /// `∫ Π sinc · |E| / #I dν`.
    pub integral: QuadratureResult,
    /// `log2` of `2^{e_{R_k} - d_k + 1 + offset} · #I_{R_k}`.
    pub log2_prefactor: f64,
    pub value: f64,
    pub error: f64,
}

/// `2^{e_{R_k} - d_k + 1} ∫ Π_{U_{R_k}} sinc(2Wx/2^j)^{c_j} |Σ_{ρ∈I_{R_k}} e^{-iρ2Wx}| ν(dx)`.
///
/// `exponent_offset` is added to `e_{R_k}`; it exists for mutation tests.
pub fn p6_rhs(
    nu: &MeasureSpec,
    setup: &P6Setup,
    w: f64,
    exponent_offset: i64,
) -> Result<P6Rhs, MeasureError> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(MeasureError::InvalidArgument(format!("window {w}")));
    }
    nu.validate()?;
    let phi = |x: f64| setup.normalized_integrand(2.0 * w * x);
    for i in 1..=16 {
        let x = 0.37 * i as f64;
        let (a, b) = (phi(x), phi(-x));
        if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            return Err(MeasureError::InvalidArgument(format!(
                "integrand not even at x = {x}: {a} vs {b}"
            )));
        }
    }
    let knots: Vec<f64> = match nu.density() {
        Some(d) => setup
            .knots(2.0 * w * d.range())
            .into_iter()
            .map(|y| y / (2.0 * w))
            .collect(),
        None => Vec::new(),
    };
    let integral = nu.integrate(&phi, 1.0, &knots, true, &QuadOptions::relative(MOMENT_REL_TOL))?;
    let dyadic = setup.dyadic_exponent().to_f64().unwrap_or(f64::INFINITY) + exponent_offset as f64;
    let log2_prefactor = dyadic + setup.cardinality_log2();
    let scale = dyadic.exp2() * setup.cardinality();
    Ok(P6Rhs {
        integral,
        log2_prefactor,
        value: scale * integral.value,
        error: scale * integral.error(),
    })
}

/// Both sides of the Fubini identity
/// `∫ sinc^{2κ}(T(u-γ)/2) e^{iSu} ν(du) = (1/T)∫ e^{-iγ(y-S)} K^{*κ}((y-S)/T) ν̂(y) dy`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ParsevalResult {
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    pub lhs_error: f64,
    pub rhs_error: f64,
    /// `|lhs - rhs|`.
    pub difference: f64,
    /// `PARSEVAL_REL_TOL·max(|lhs|, |rhs|) + lhs_error + rhs_error`.
    pub allowed: f64,
    pub agrees: bool,
}

pub fn parseval_check(
    nu: &MeasureSpec,
    s: f64,
    gamma: f64,
    t: f64,
    kappa: u32,
) -> Result<ParsevalResult, MeasureError> {
    if !(t > 0.0) || !t.is_finite() || !(1..=4).contains(&kappa) {
        return Err(MeasureError::InvalidArgument(format!("T = {t}, kappa = {kappa}")));
    }
    nu.validate()?;
    let floor = 1e-12 * nu.total_mass();
    let opts = QuadOptions {
        rel_tol: 1e-10,
        abs_tol: floor,
        max_evals: 2_000_000,
    };
    let two_k = 2 * kappa as i32;
    let weight = |u: f64| sinc(0.5 * t * (u - gamma)).powi(two_k);
    let mut lknots = Vec::new();
    if let Some(d) = nu.density() {
        let x = d.range();
        let step = 2.0 * PI / t;
        let mut n = ((-x - gamma) / step).ceil();
        while gamma + n * step < x && lknots.len() < MAX_KNOTS {
            lknots.push(gamma + n * step);
            n += 1.0;
        }
    }
    let lre = nu.integrate(&|u| weight(u) * (s * u).cos(), 1.0, &lknots, false, &opts)?;
    let lim = nu.integrate(&|u| weight(u) * (s * u).sin(), 1.0, &lknots, false, &opts)?;

    let kk = fejer_power(kappa)
        .map_err(|e| MeasureError::InvalidArgument(e.to_string()))?
        .to_float();
    let kf = f64::from(kappa);
    let vknots: Vec<f64> = (-(kappa as i64)..=kappa as i64).map(|i| i as f64).collect();
    let base = |v: f64| kk.eval(v) * nu.fhat(s + t * v);
    let rre = integrate(&|v| base(v) * (gamma * t * v).cos(), -kf, kf, &vknots, &opts)?;
    let rim = integrate(&|v| -base(v) * (gamma * t * v).sin(), -kf, kf, &vknots, &opts)?;

    let lhs = (lre.value, lim.value);
    let rhs = (rre.value, rim.value);
    let difference = (lhs.0 - rhs.0).hypot(lhs.1 - rhs.1);
    let lhs_error = lre.error() + lim.error();
    let rhs_error = rre.error() + rim.error();
    let scale = lhs.0.hypot(lhs.1).max(rhs.0.hypot(rhs.1));
    let allowed = PARSEVAL_REL_TOL * scale + lhs_error + rhs_error;
    Ok(ParsevalResult {
        lhs,
        rhs,
        lhs_error,
        rhs_error,
        difference,
        allowed,
        agrees: difference <= allowed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_integrals_closed_forms() {
        let r = fhat_window_integral(&MeasureSpec::Dirac, 1.0).unwrap();
        assert_eq!(r.value, 2.0);
        let r = fhat_window_integral(&MeasureSpec::Atoms { a: 1.0 }, PI).unwrap();
        assert!((r.value - 4.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn window_integral_gaussian_limit() {
        // ∫ exp(-t²/2) = √(2π)
        let r = fhat_window_integral(&MeasureSpec::Gaussian { sigma: 1.0 }, 40.0).unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn sinc_moment_atoms() {
        let a = PI / 2.0;
        let r = sinc_moment(&MeasureSpec::Atoms { a }, 2.0, 1).unwrap();
        assert!((r.value - 2.0).abs() < 1e-15);
        assert_eq!(sinc_moment(&MeasureSpec::Dirac, 3.0, 7).unwrap().value, 1.0);
    }

    #[test]
    fn p6_dirac_block_one() {
        let setup = P6Setup::new(1, StepBudget::default()).unwrap();
        let r = p6_rhs(&MeasureSpec::Dirac, &setup, 1.0, 0).unwrap();
        assert_eq!(r.value, 81.0 / 8.0);
        let m = p6_rhs(&MeasureSpec::Dirac, &setup, 1.0, -4).unwrap();
        assert_eq!(m.value, 81.0 / 128.0);
    }

    #[test]
    fn parseval_dirac_trivial() {
        let r = parseval_check(&MeasureSpec::Dirac, 0.0, 0.0, 1.0, 1).unwrap();
        assert!(r.agrees);
        assert!((r.lhs.0 - 1.0).abs() < 1e-14 && (r.rhs.0 - 1.0).abs() < 1e-12);
    }
}
