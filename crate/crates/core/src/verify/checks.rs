use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::report::{real_string, VerificationReport};
use super::VerifyError;
use crate::indexcalc::{
    doubly_exponential_headroom, growth_checks, log2_big, sequences_within, GrowthClaim,
    SequenceTable, StepBudget,
};
use crate::measures::{
    fhat_window_integral, p6_rhs, parseval_check, sinc_moment, MeasureError, MeasureSpec,
    P6Setup, QuadratureResult,
};
use crate::polyexact::{
    self, rational_string, ExactOutcome, P5Mode, Rational, P5_SAMPLED_MAX,
};

/// Relative slack granted to every numeric inequality on top of the
/// quadrature error estimates.
pub const NUMERIC_REL_SLACK: f64 = 1e-6;
/// Largest block index accepted by the p6 and theorem checks.
pub const MAX_BLOCK: u64 = 3;
/// Relative tolerance of the sine test.
pub const SINE_REL_TOL: f64 = 1e-12;

type Inputs = BTreeMap<String, String>;

fn inputs(pairs: &[(&str, String)]) -> Inputs {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn budget_for(rhs: f64, errors: f64) -> f64 {
    NUMERIC_REL_SLACK * rhs.abs() + errors
}

fn rat_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn positive(name: &str, x: f64) -> Result<(), VerifyError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(VerifyError::Usage(format!("{name} must be positive and finite, got {x}")))
    }
}

/// Either the quadratures, or an inconclusive report on accuracy failure.
macro_rules! quad_or_inconclusive {
    ($id:expr, $inputs:expr, $e:expr) => {
        match $e {
            Ok(v) => v,
            Err(MeasureError::Accuracy { achieved, requested }) => {
                return Ok(vec![VerificationReport::inconclusive(
                    $id,
                    $inputs,
                    format!("quadrature error {achieved:e} above {requested:e}"),
                )])
            }
            Err(e) => return Err(e.into()),
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Eq21Side {
    Lower,
    Upper,
}

/// `|∫sinc²(Tu/2)dν| ≤ (1/T)∫_{-T}^{T}ν̂ ≤ 3∫sinc²(Tu/2)dν`, one report per side.
pub fn check_eq21(
    nu: &MeasureSpec,
    t: f64,
    side: Option<Eq21Side>,
) -> Result<Vec<VerificationReport>, VerifyError> {
    positive("T", t)?;
    let base = inputs(&[("measure", nu.to_string()), ("T", t.to_string())]);
    let (moment, window) = quad_or_inconclusive!(
        "eq21",
        base.clone(),
        sinc_moment(nu, t / 2.0, 2).and_then(|m| Ok((m, fhat_window_integral(nu, t)?)))
    );
    let mid = window.value / t;
    let mid_err = window.error() / t;
    let mut out = Vec::new();
    if side != Some(Eq21Side::Upper) {
        let mut inp = base.clone();
        inp.insert("side".into(), "lower".into());
        let lhs = moment.value.abs();
        out.push(VerificationReport::numeric(
            "eq21",
            inp,
            lhs,
            mid,
            budget_for(mid, moment.error() + mid_err),
        ));
    }
    if side != Some(Eq21Side::Lower) {
        let mut inp = base;
        inp.insert("side".into(), "upper".into());
        let rhs = 3.0 * moment.value;
        out.push(VerificationReport::numeric(
            "eq21",
            inp,
            mid,
            rhs,
            budget_for(rhs, 3.0 * moment.error() + mid_err),
        ));
    }
    Ok(out)
}

/// `|∫sinc^{2κ}(Tu/2)dν| ≤ (1/T)∫_{-κT}^{κT}|ν̂|`.
pub fn check_eq21nu(nu: &MeasureSpec, t: f64, kappa: u32) -> Result<Vec<VerificationReport>, VerifyError> {
    positive("T", t)?;
    if kappa == 0 {
        return Err(VerifyError::Usage("kappa must be at least 1".into()));
    }
    let inp = inputs(&[
        ("measure", nu.to_string()),
        ("T", t.to_string()),
        ("kappa", kappa.to_string()),
    ]);
    let kf = f64::from(kappa);
    let (moment, window) = quad_or_inconclusive!(
        "eq21nu",
        inp.clone(),
        sinc_moment(nu, t / 2.0, 2 * u64::from(kappa))
            .and_then(|m| Ok((m, fhat_window_integral(nu, kf * t)?)))
    );
    let lhs = moment.value.abs();
    let rhs = window.value / t;
    Ok(vec![VerificationReport::numeric(
        "eq21nu",
        inp,
        lhs,
        rhs,
        budget_for(rhs, moment.error() + window.error() / t),
    )])
}

/// Fubini identity between the sinc-power moment and the `K^{*κ}`-windowed
/// transform integral.
pub fn check_kt1(
    nu: &MeasureSpec,
    s: f64,
    gamma: f64,
    t: f64,
    kappa: u32,
) -> Result<Vec<VerificationReport>, VerifyError> {
    positive("T", t)?;
    let inp = inputs(&[
        ("measure", nu.to_string()),
        ("S", s.to_string()),
        ("gamma", gamma.to_string()),
        ("T", t.to_string()),
        ("kappa", kappa.to_string()),
    ]);
    let r = quad_or_inconclusive!("kt1", inp.clone(), parseval_check(nu, s, gamma, t, kappa));
    // margin = allowed - |lhs - rhs|
    let rep = VerificationReport::numeric("kt1", inp, r.difference, r.allowed, 0.0)
        .with_diagnostic(format!(
            "lhs = {} + {}i, rhs = {} + {}i",
            real_string(r.lhs.0),
            real_string(r.lhs.1),
            real_string(r.rhs.0),
            real_string(r.rhs.1)
        ));
    Ok(vec![rep])
}

fn exact_report(id: &str, inp: Inputs, o: &ExactOutcome) -> VerificationReport {
    let mut r = VerificationReport::exact(id, inp, rat_f64(&o.lhs), rat_f64(&o.rhs), o.holds)
        .with_diagnostic(format!(
            "certified on all of R; lhs/rhs shown at x = {}",
            rational_string(&o.probe)
        ));
    if let Some(w) = &o.witness {
        r = r.with_diagnostic(format!("witness x = {}", rational_string(w)));
    }
    for n in &o.notes {
        r = r.with_diagnostic(n.clone());
    }
    r
}

/// `χ_{|t-H|≤T} ≤ K_T(t-H) + K_T(t-H+T) + K_T(t-H-T)`.
pub fn check_kt(h: &Rational, t: &Rational) -> Result<Vec<VerificationReport>, VerifyError> {
    let o = polyexact::check_kt(h, t)?;
    let inp = inputs(&[("H", rational_string(h)), ("T", rational_string(t))]);
    Ok(vec![exact_report("kt", inp, &o)])
}

pub fn check_convel(a: &Rational, b: &Rational) -> Result<Vec<VerificationReport>, VerifyError> {
    let o = polyexact::check_convel(a, b)?;
    let inp = inputs(&[("A", rational_string(a)), ("B", rational_string(b))]);
    Ok(vec![exact_report("convel", inp, &o)])
}

pub fn check_convelem(a: &[Rational]) -> Result<Vec<VerificationReport>, VerifyError> {
    let o = polyexact::check_convelem(a)?;
    let list = a.iter().map(rational_string).collect::<Vec<_>>().join(",");
    Ok(vec![exact_report("convelem", inputs(&[("A", list)]), &o)])
}

pub fn check_kappaj(j: u32) -> Result<Vec<VerificationReport>, VerifyError> {
    let o = polyexact::check_kappaj(j)?;
    Ok(vec![exact_report("kappaj", inputs(&[("J", j.to_string())]), &o)])
}

pub fn check_conv01() -> Vec<VerificationReport> {
    vec![exact_report("conv01", Inputs::new(), &polyexact::verify_conv01())]
}

pub fn check_p5(m: u64, mode: P5Mode, budget: StepBudget) -> Result<Vec<VerificationReport>, VerifyError> {
    let o = polyexact::verify_p5(m, mode, budget)?;
    let mode_s = match mode {
        P5Mode::Exact => "exact".to_string(),
        P5Mode::Sampled { points } => format!("sampled:{points}"),
    };
    let inp = inputs(&[("m", m.to_string()), ("mode", mode_s)]);
    let facts = format!(
        "C_m = 2^{}, {} pieces of degree <= {}, {} distinct shifts",
        o.exponent, o.pieces, o.degree, o.distinct_shifts
    );
    let mut r = match mode {
        P5Mode::Exact => VerificationReport::exact("p5", inp, o.lhs, o.rhs, o.holds)
            .with_diagnostic("certified on all of R; lhs/rhs shown at x = 0"),
        P5Mode::Sampled { .. } => {
            let margin = o.min_margin.unwrap_or(f64::NAN);
            let mut r = VerificationReport::numeric("p5", inp, 0.0, margin, o.error_bound)
                .with_diagnostic("sampled on a grid over [-0.6, 0.6]; not a certificate");
            r.diagnostics.push(format!("rhs(0) = {}", real_string(o.rhs)));
            r
        }
    };
    r = r.with_diagnostic(facts);
    if let Some(w) = &o.witness {
        r = r.with_diagnostic(format!("witness x = {}", rational_string(w)));
    }
    Ok(vec![r])
}

fn check_block(k: u64) -> Result<(), VerifyError> {
    if k == 0 || k > MAX_BLOCK {
        return Err(VerifyError::Usage(format!("block index must lie in 1..={MAX_BLOCK}, got {k}")));
    }
    Ok(())
}

/// `(1/2W)∫_{-W}^{W}ν̂ ≤ 2^{e_{R_k}-d_k+1}∫Π sinc(2Wx/2^j)^{c_j}|E(2Wx)|dν`.
pub fn check_p6(
    nu: &MeasureSpec,
    k: u64,
    w: f64,
    budget: StepBudget,
    exponent_offset: i64,
) -> Result<Vec<VerificationReport>, VerifyError> {
    check_block(k)?;
    positive("W", w)?;
    let mut inp = inputs(&[
        ("measure", nu.to_string()),
        ("k", k.to_string()),
        ("W", w.to_string()),
    ]);
    if exponent_offset != 0 {
        inp.insert("exponent_offset".into(), exponent_offset.to_string());
    }
    let setup = P6Setup::new(k, budget)?;
    let (window, rhs) = quad_or_inconclusive!(
        "p6",
        inp.clone(),
        fhat_window_integral(nu, w).and_then(|win| Ok((win, p6_rhs(nu, &setup, w, exponent_offset)?)))
    );
    let lhs = window.value / (2.0 * w);
    let errors = window.error() / (2.0 * w) + rhs.error;
    let rep = VerificationReport::numeric("p6", inp, lhs, rhs.value, budget_for(rhs.value, errors))
        .with_diagnostic(format!(
            "R_k = {}, e_R - d_k + 1 = {}, log2 prefactor = {}",
            setup.m,
            setup.dyadic_exponent() + exponent_offset,
            real_string(rhs.log2_prefactor)
        ));
    Ok(vec![rep])
}

/// Proof-form chain with `W = 2^{ζ_k}T`:
/// `(1/T)∫_{-W}^{W}ν̂ ≤ 2·2^{ζ_k}·2^{e_{R_k}-d_k+1}·#I_{R_k}·∫|sinc(xT)|^{r_k²}dν`.
pub fn check_theorem_final(
    nu: &MeasureSpec,
    t: f64,
    k: u64,
    epsilon: f64,
    budget: StepBudget,
    exponent_offset: i64,
) -> Result<Vec<VerificationReport>, VerifyError> {
    check_block(k)?;
    positive("T", t)?;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(VerifyError::Usage(format!("epsilon must lie in (0,1), got {epsilon}")));
    }
    let setup = P6Setup::new(k, budget)?;
    let n = setup.r_k * setup.r_k;
    if setup.gamma < BigUint::from(n) {
        return Err(VerifyError::Construction(format!(
            "gamma_k = {} is below r_k^2 = {n}",
            setup.gamma
        )));
    }
    let mut inp = inputs(&[
        ("measure", nu.to_string()),
        ("T", t.to_string()),
        ("k", k.to_string()),
        ("epsilon", epsilon.to_string()),
    ]);
    if exponent_offset != 0 {
        inp.insert("exponent_offset".into(), exponent_offset.to_string());
    }
    let w = (setup.zeta as f64).exp2() * t;
    let (window, moment): (QuadratureResult, QuadratureResult) = quad_or_inconclusive!(
        "theorem-final",
        inp.clone(),
        fhat_window_integral(nu, w).and_then(|win| Ok((win, sinc_moment(nu, t, n)?)))
    );
    let dyadic = setup.dyadic_exponent().to_f64().unwrap_or(f64::INFINITY) + exponent_offset as f64;
    let log2_const = 1.0 + setup.zeta as f64 + dyadic + setup.cardinality_log2();
    let constant = (1.0 + setup.zeta as f64 + dyadic).exp2() * setup.cardinality();
    let lhs = window.value / t;
    let rhs = constant * moment.value;
    let errors = window.error() / t + constant * moment.error();
    let (target, within) = doubly_exponential_headroom(log2_const, setup.r_k, epsilon);
    let rep = VerificationReport::numeric("theorem-final", inp, lhs, rhs, budget_for(rhs, errors))
        .with_diagnostic(format!(
            "W = 2^{} T, sinc exponent r_k^2 = {n} (gamma_k = {})",
            setup.zeta, setup.gamma
        ))
        .with_diagnostic(format!(
            "log2 constant = {}; 2^(2^((1+eps) r_k)) has log2 {}: {}",
            real_string(log2_const),
            real_string(target),
            if within { "within" } else { "exceeds" }
        ))
        .with_diagnostic(format!(
            "#I_R exact = 3^(2^{}) (log2 {}), printed form 3^R = 3^{}",
            setup.m,
            real_string(setup.cardinality_log2()),
            setup.m
        ))
        .with_diagnostic("exponent sequence n_k taken as r_k");
    Ok(vec![rep])
}

/// `|sin nx| ≤ n|sin x|` on random pairs `1 ≤ n ≤ 64`.
pub fn check_sine_subadditivity(pairs: usize, seed: u64) -> Vec<VerificationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = (0u32, 0.0f64);
    let mut violations = 0usize;
    for _ in 0..pairs {
        let n: u32 = rng.gen_range(1..=64);
        let x: f64 = rng.gen_range(-10.0..10.0);
        let lhs = (f64::from(n) * x).sin().abs();
        let rhs = f64::from(n) * x.sin().abs();
        let scale = rhs.max(f64::MIN_POSITIVE);
        let excess = (lhs - rhs) / scale;
        if lhs > rhs * (1.0 + SINE_REL_TOL) + 4.0 * f64::EPSILON {
            violations += 1;
        }
        if excess > worst {
            worst = excess;
            worst_at = (n, x);
        }
    }
    let inp = inputs(&[("pairs", pairs.to_string()), ("seed", seed.to_string())]);
    let mut r = VerificationReport::numeric("sine-subadditivity", inp, worst, 0.0, SINE_REL_TOL)
        .with_diagnostic(format!(
            "largest relative excess at n = {}, x = {}",
            worst_at.0,
            real_string(worst_at.1)
        ));
    if violations > 0 {
        r.status = super::Status::Fail;
        r = r.with_diagnostic(format!("{violations} violations"));
    }
    vec![r]
}

pub fn growth_table(budget: StepBudget) -> Result<SequenceTable, VerifyError> {
    Ok(sequences_within(budget)?)
}

/// Block-growth statements over every block completed within the budget.
pub fn check_growth(
    id: &str,
    budget: StepBudget,
    epsilon: f64,
) -> Result<Vec<VerificationReport>, VerifyError> {
    let table = growth_table(budget)?;
    let rep = growth_checks(&table, epsilon)?;
    let blocks = &table.blocks;
    let r = table.r_extended();
    let mut out = Vec::new();
    let base = |k: u64| {
        inputs(&[
            ("k", k.to_string()),
            ("budget", budget.0.to_string()),
        ])
    };
    match id {
        "minrn" => {
            for e in rep.entries_for(GrowthClaim::Minrn) {
                let k = e.k;
                let rk = r[k as usize - 1] as f64;
                let upper = table.zeta_at(k - 1).max(2 * k);
                let min_r = (2 * k..=upper)
                    .filter_map(|n| r.get(n as usize - 1).copied())
                    .min()
                    .unwrap_or(0) as f64;
                out.push(
                    VerificationReport::exact("minrn", base(k), rk * rk / 2.0, min_r, e.holds)
                        .with_diagnostic(format!("{} >= {}", e.lhs, e.rhs)),
                );
            }
        }
        "est0" => {
            for e in rep.entries_for(GrowthClaim::Est0) {
                let l: f64 = e.lhs.parse().unwrap_or(f64::NAN);
                let rr: f64 = e.rhs.parse().unwrap_or(f64::NAN);
                out.push(
                    VerificationReport::exact("est0", base(e.k), l, rr, e.holds)
                        .with_diagnostic(format!(
                            "sum of max J_m over the block = {}, r_k zeta_(k-1) + k r_k (r_k+1)/2 = {}",
                            e.lhs, e.rhs
                        )),
                );
            }
            for e in rep.entries_for(GrowthClaim::BlockConstant) {
                out.push(
                    VerificationReport::exact(
                        "est0",
                        {
                            let mut i = base(e.k);
                            i.insert("claim".into(), "block-constant".into());
                            i
                        },
                        0.0,
                        0.0,
                        e.holds,
                    )
                    .with_diagnostic("e_R_k = 2^r_k e_R_(k-1) + k r_k 2^(R_k - 1)"),
                );
            }
        }
        "roestim" => {
            let mut inp = inputs(&[("budget", budget.0.to_string()), ("n_max", r.len().to_string())]);
            inp.insert("claim".into(), "rho".into());
            out.push(
                VerificationReport::exact("roestim", inp, 1.0, rep.rho_empirical, rep.rho_empirical > 1.0)
                    .with_diagnostic("rhs = min_n r_n^(1/n) over computed n"),
            );
            for e in rep.entries_for(GrowthClaim::DyadicLowerBound) {
                let mut inp = base(e.k);
                inp.insert("claim".into(), "r_2^j >= (3/2)^(2^(j-1))".into());
                out.push(
                    VerificationReport::exact("roestim", inp, 0.0, 0.0, e.holds)
                        .with_diagnostic(format!("{} >= {}", e.lhs, e.rhs)),
                );
            }
        }
        "rz1" | "rz2" => {
            let (raw, eps_claim) = if id == "rz1" {
                (GrowthClaim::Rz1Raw, GrowthClaim::Rz1)
            } else {
                (GrowthClaim::Rz2Raw, GrowthClaim::Rz2)
            };
            let eps_ok: BTreeMap<u64, bool> =
                rep.entries_for(eps_claim).map(|e| (e.k, e.holds)).collect();
            for e in rep.entries_for(raw) {
                let b = &blocks[e.k as usize - 1];
                let rk = b.r as f64;
                let zp = table.zeta_at(e.k - 1) as f64;
                let kk = e.k as f64;
                let (bound, value) = if id == "rz1" {
                    (rk * rk / 2.0 * (zp - 2.0 * kk), &b.gamma)
                } else {
                    (rk * rk / 4.0 * (zp * zp - 4.0 * kk * kk), &b.degree)
                };
                let lhs = if bound > 0.0 { bound.log2() } else { f64::NEG_INFINITY };
                let rhs = if value.is_zero() { f64::NEG_INFINITY } else { log2_big(value) };
                let from = if id == "rz1" { rep.rz1_from } else { rep.rz2_from };
                out.push(
                    VerificationReport::exact(id, base(e.k), lhs, rhs, e.holds)
                        .with_diagnostic("lhs, rhs in log2")
                        .with_diagnostic(format!(
                            "epsilon = {epsilon} form {}; holds for all k >= {}",
                            if eps_ok.get(&e.k).copied().unwrap_or(false) { "holds" } else { "fails" },
                            from.map_or("none".to_string(), |k| k.to_string())
                        )),
                );
            }
        }
        other => return Err(VerifyError::UnknownCheck(other.to_string())),
    }
    Ok(out)
}

/// Sorted positive rational lists `A_1 ≤ … ≤ A_J`, `J ≤ max_len`.
pub fn random_a_lists(count: usize, max_len: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let len = rng.gen_range(1..=max_len);
            let mut v: Vec<Rational> = (0..len)
                .map(|_| polyexact::rat(rng.gen_range(1..=12), rng.gen_range(1..=6)))
                .collect();
            v.sort();
            v
        })
        .collect()
}

pub fn p5_mode(mode: &str, points: usize) -> Result<P5Mode, VerifyError> {
    match mode {
        "exact" => Ok(P5Mode::Exact),
        "sampled" => Ok(P5Mode::Sampled { points }),
        other => Err(VerifyError::Usage(format!(
            "mode must be exact or sampled (m <= {P5_SAMPLED_MAX}), got {other:?}"
        ))),
    }
}
