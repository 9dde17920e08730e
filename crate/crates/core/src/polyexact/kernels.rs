use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::piecewise::PiecewisePoly;
use super::poly::{int, pow2, rat, Poly, Rational};
use super::sturm::{nonneg_certificate, Certificate};
use super::PolyError;
use crate::indexcalc::{
    constant_exponent, iterate_to, shift_multiset, DyadicMultiset, StackState, StepBudget,
};

/// Largest `m` accepted by [`verify_p5`] in exact mode.
pub const P5_EXACT_MAX: u64 = 3;
/// Largest `m` accepted by [`verify_p5`] in sampled mode.
pub const P5_SAMPLED_MAX: u64 = 6;

/// `χ_[-A, A]`.
pub fn indicator(halfwidth: &Rational) -> Result<PiecewisePoly, PolyError> {
    if !halfwidth.is_positive() {
        return Err(PolyError::NonPositive(format!("halfwidth {halfwidth}")));
    }
    PiecewisePoly::constant_on(-halfwidth.clone(), halfwidth.clone(), Rational::one())
}

/// `g = χ_[-1/2, 1/2]`.
pub fn unit_box() -> PiecewisePoly {
    indicator(&rat(1, 2)).expect("positive halfwidth")
}

/// `g_k = T_{2^{-k}} g = χ_[-2^{-k-1}, 2^{-k-1}]`.
pub fn dyadic_box(k: u64) -> PiecewisePoly {
    let h = pow2(-(k as i64) - 1);
    indicator(&h).expect("positive halfwidth")
}

/// Fejér kernel `K(t) = (1 - |t|)^+ = g * g`.
pub fn fejer() -> PiecewisePoly {
    PiecewisePoly::from_global(
        vec![int(-1), int(0), int(1)],
        vec![Poly::new(vec![int(1), int(1)]), Poly::new(vec![int(1), int(-1)])],
    )
    .expect("valid triangle")
}

/// `K_T(t) = (1 - |t|/T)^+`.
pub fn fejer_t(t: &Rational) -> Result<PiecewisePoly, PolyError> {
    fejer().dilate(t)
}

/// `K^{*J}`.
pub fn fejer_power(j: u32) -> Result<PiecewisePoly, PolyError> {
    fejer().conv_power(j)
}

/// Density of `μ_{A_1} * ... * μ_{A_J}`.
pub fn elementary_density(a: &[Rational]) -> Result<PiecewisePoly, PolyError> {
    let mut it = a.iter();
    let first = it
        .next()
        .ok_or_else(|| PolyError::NonPositive("empty list".into()))?;
    let mut acc = indicator(first)?;
    for ai in it {
        acc = acc.convolve(&indicator(ai)?);
    }
    Ok(acc)
}

fn check_sorted_positive(a: &[Rational]) -> Result<(), PolyError> {
    if a.is_empty() {
        return Err(PolyError::NonPositive("empty list".into()));
    }
    if a.iter().any(|x| !x.is_positive()) {
        return Err(PolyError::NonPositive("entries must be positive".into()));
    }
    if a.windows(2).any(|w| w[0] > w[1]) {
        return Err(PolyError::Unsorted);
    }
    Ok(())
}

fn gj_product(a: &[Rational]) -> Rational {
    let mut prod = a[0].clone();
    let mut prefix = &a[0] + a.get(1).cloned().unwrap_or_else(Rational::zero);
    for ai in a.iter().skip(2) {
        prod *= if &prefix < ai { prefix.clone() } else { ai.clone() };
        prefix += ai;
    }
    prod
}

/// `G_J = 2^J·A_1·((A_1+A_2)∧A_3)···((A_1+…+A_{J-1})∧A_J)` as printed.
pub fn gj_bound(a: &[Rational]) -> Result<Rational, PolyError> {
    check_sorted_positive(a)?;
    Ok(pow2(a.len() as i64) * gj_product(a))
}

/// The bound the induction actually yields: one factor `2A_1` for the first
/// pair and a factor `2((A_1+…+A_{i-1})∧A_i)` per later term, i.e.
/// `2^{J-1}·A_1·Π`. Equals `1` for a single box.
pub fn gj_bound_inductive(a: &[Rational]) -> Result<Rational, PolyError> {
    check_sorted_positive(a)?;
    if a.len() == 1 {
        return Ok(Rational::one());
    }
    Ok(pow2(a.len() as i64 - 1) * gj_product(a))
}

/// Result of an exact piecewise inequality check.
#[derive(Debug, Clone)]
pub struct ExactOutcome {
    pub holds: bool,
    /// Left side at the probe point.
    pub lhs: Rational,
    /// Right side at the probe point.
    pub rhs: Rational,
    pub probe: Rational,
    pub witness: Option<Rational>,
    pub notes: Vec<String>,
}

impl ExactOutcome {
    fn from_certificates(
        lhs: &PiecewisePoly,
        rhs: &PiecewisePoly,
        probe: Rational,
        certs: &[(&str, Certificate)],
    ) -> Self {
        let mut notes = Vec::new();
        let mut witness = None;
        let mut holds = true;
        for (what, c) in certs {
            if let Certificate::Negative { witness: w, value } = c {
                holds = false;
                notes.push(format!("{what} fails at x={w} (value {value})"));
                witness.get_or_insert_with(|| w.clone());
            }
        }
        ExactOutcome {
            holds,
            lhs: lhs.eval(&probe),
            rhs: rhs.eval(&probe),
            probe,
            witness,
            notes,
        }
    }

    fn fail(&mut self, note: String) {
        self.holds = false;
        self.notes.push(note);
    }
}

/// `lhs ≤ rhs` on ℝ, certified.
pub fn certify_le(lhs: &PiecewisePoly, rhs: &PiecewisePoly, probe: Rational) -> ExactOutcome {
    let cert = nonneg_certificate(&rhs.sub(lhs));
    ExactOutcome::from_certificates(lhs, rhs, probe, &[("rhs - lhs >= 0", cert)])
}

/// Elementary two-box convolution, `0 < A ≤ B`: density equals
/// `λ([-B, B] ∩ [x-A, x+A])` and is at most `2A`.
pub fn check_convel(a: &Rational, b: &Rational) -> Result<ExactOutcome, PolyError> {
    check_sorted_positive(&[a.clone(), b.clone()])?;
    let density = indicator(a)?.convolve(&indicator(b)?);
    let s = a + b;
    let d = b - a;
    let two_a = a * int(2);
    let overlap = if d.is_zero() {
        PiecewisePoly::from_global(
            vec![-s.clone(), int(0), s.clone()],
            vec![
                Poly::new(vec![s.clone(), int(1)]),
                Poly::new(vec![s.clone(), int(-1)]),
            ],
        )?
    } else {
        PiecewisePoly::from_global(
            vec![-s.clone(), -d.clone(), d.clone(), s.clone()],
            vec![
                Poly::new(vec![s.clone(), int(1)]),
                Poly::constant(two_a.clone()),
                Poly::new(vec![s.clone(), int(-1)]),
            ],
        )?
    };
    let bound = PiecewisePoly::constant_on(-s.clone(), s.clone(), two_a.clone())?;
    let mut out = certify_le(&density, &bound, int(0));
    if density != overlap {
        out.fail("density differs from the interval-overlap length".into());
    }
    let printed = PiecewisePoly::from_global(
        vec![-s.clone(), int(0), s.clone()],
        vec![
            Poly::new(vec![two_a.clone(), &two_a / &s]),
            Poly::new(vec![two_a.clone(), -(&two_a / &s)]),
        ],
    )?;
    out.notes.push(format!(
        "triangle form 2A(1-|x|/(A+B)) {} the density",
        if printed == density { "equals" } else { "differs from" }
    ));
    Ok(out)
}

/// Convolution of boxes `μ_{A_1} * … * μ_{A_J}` is supported on `[-ΣA, ΣA]`,
/// non-negative, and bounded by the inductive `G_J`.
pub fn check_convelem(a: &[Rational]) -> Result<ExactOutcome, PolyError> {
    check_sorted_positive(a)?;
    let density = elementary_density(a)?;
    let total: Rational = a.iter().sum();
    let g_ind = gj_bound_inductive(a)?;
    let g_printed = gj_bound(a)?;
    let bound = PiecewisePoly::constant_on(-total.clone(), total.clone(), g_ind.clone())?;
    let lower = nonneg_certificate(&density);
    let upper = nonneg_certificate(&bound.sub(&density));
    let mut out = ExactOutcome::from_certificates(
        &density,
        &bound,
        int(0),
        &[("density >= 0", lower), ("G_J - density >= 0", upper)],
    );
    if density.support() != Some((&-total.clone(), &total)) {
        out.fail(format!("support is not [-{total}, {total}]"));
    }
    out.notes.push(format!("G_J inductive {g_ind}, printed {g_printed}"));
    Ok(out)
}

/// `0 ≤ K^{*J} ≤ χ_[-J, J]`.
pub fn check_kappaj(j: u32) -> Result<ExactOutcome, PolyError> {
    let kj = fejer_power(j)?;
    let jr = int(i64::from(j));
    let chi = PiecewisePoly::constant_on(-jr.clone(), jr.clone(), Rational::one())?;
    let lower = nonneg_certificate(&kj);
    let upper = nonneg_certificate(&chi.sub(&kj));
    let mut out = ExactOutcome::from_certificates(
        &kj,
        &chi,
        int(0),
        &[("K^J >= 0", lower), ("1 - K^J >= 0", upper)],
    );
    if kj.support() != Some((&-jr.clone(), &jr)) {
        out.fail(format!("support is not [-{j}, {j}]"));
    }
    let halves = vec![rat(1, 2); 2 * j as usize];
    let g = gj_bound_inductive(&halves)?;
    if !g.is_one() {
        out.fail(format!("G_2J = {g}, expected 1"));
    }
    Ok(out)
}

/// `χ_{|t-H| ≤ T} ≤ K_T(t-H) + K_T(t-H+T) + K_T(t-H-T)`, with equality on
/// `[H-T, H+T]`.
pub fn check_kt(h: &Rational, t: &Rational) -> Result<ExactOutcome, PolyError> {
    let kt = fejer_t(t)?.translate(&-h.clone());
    let shifts = [
        (Rational::zero(), BigUint::one()),
        (t.clone(), BigUint::one()),
        (-t.clone(), BigUint::one()),
    ];
    let rhs = kt.shift_sum(&shifts);
    let lhs = PiecewisePoly::constant_on(h - t, h + t, Rational::one())?;
    let mut out = certify_le(&lhs, &rhs, h.clone());
    if !rhs.sub(&lhs).restrict(&(h - t), &(h + t)).is_zero() {
        out.fail("partition of unity fails on [H-T, H+T]".into());
    }
    Ok(out)
}

/// `g(x) ≤ g^{*2}(2x) + g^{*2}(2x+1) + g^{*2}(2x-1)`.
pub fn verify_conv01() -> ExactOutcome {
    let g = unit_box();
    let k_half = fejer().dilate(&rat(1, 2)).expect("positive factor");
    let half = rat(1, 2);
    let rhs = k_half.shift_sum(&[
        (Rational::zero(), BigUint::one()),
        (half.clone(), BigUint::one()),
        (-half, BigUint::one()),
    ]);
    certify_le(&g, &rhs, int(0))
}

/// `Π* g_j^{*c_j}` over the entries of a configuration.
pub fn dyadic_product(state: &StackState) -> PiecewisePoly {
    let mut acc: Option<PiecewisePoly> = None;
    for (&j, c) in state.entries() {
        let gj = dyadic_box(j);
        let c = c.to_u64().expect("multiplicity fits u64");
        for _ in 0..c {
            acc = Some(match acc {
                None => gj.clone(),
                Some(a) => a.convolve(&gj),
            });
        }
    }
    acc.unwrap_or_else(PiecewisePoly::zero)
}

pub fn dyadic_shifts(ms: &DyadicMultiset) -> Vec<(Rational, BigUint)> {
    let denom = BigInt::one() << ms.log2_denom;
    ms.counts
        .iter()
        .map(|(&n, c)| (Rational::new(BigInt::from(n), denom.clone()), c.clone()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum P5Mode {
    Exact,
    Sampled { points: usize },
}

#[derive(Debug, Clone)]
pub struct P5Outcome {
    pub m: u64,
    pub mode: P5Mode,
    pub holds: bool,
    /// `e_m` with `C_m = 2^{e_m}`.
    pub exponent: BigUint,
    /// `g(0)`.
    pub lhs: f64,
    /// Right side at `0`.
    pub rhs: f64,
    /// Smallest `rhs - g` over the grid (sampled mode only).
    pub min_margin: Option<f64>,
    /// Floating-point error bound on `min_margin`; zero in exact mode.
    pub error_bound: f64,
    pub witness: Option<Rational>,
    pub pieces: usize,
    pub degree: usize,
    pub distinct_shifts: usize,
}

/// Ingredients of `C_m Σ[Π* g_j^{*c_j} : I_m]`.
pub struct P5Parts {
    pub product: PiecewisePoly,
    pub shifts: Vec<(Rational, BigUint)>,
    pub exponent: BigUint,
}

impl P5Parts {
    pub fn new(m: u64, budget: StepBudget) -> Result<Self, PolyError> {
        let state = iterate_to(m, budget)?;
        let ms = shift_multiset(m, budget)?.expand();
        Ok(P5Parts {
            product: dyadic_product(&state),
            shifts: dyadic_shifts(&ms),
            exponent: constant_exponent(m, budget)?,
        })
    }

    pub fn constant(&self) -> Rational {
        let e = self.exponent.to_usize().expect("exponent fits usize");
        Rational::from_integer(BigInt::one() << e)
    }

    /// The exact right side as a piecewise polynomial.
    pub fn rhs(&self) -> PiecewisePoly {
        self.product.shift_sum(&self.shifts).scale(&self.constant())
    }
}

fn p5_sampled(parts: &P5Parts, points: usize) -> (f64, f64, f64, Option<Rational>) {
    let fl = parts.product.to_float();
    let c = parts.constant().to_f64().unwrap_or(f64::INFINITY);
    let shifts: Vec<(f64, f64)> = parts
        .shifts
        .iter()
        .map(|(r, n)| (r.to_f64().unwrap_or(f64::NAN), n.to_f64().unwrap_or(f64::NAN)))
        .collect();
    let rhs_at = |x: f64| {
        let mut v = 0.0;
        let mut err = 0.0;
        for &(rho, n) in &shifts {
            let (p, e) = fl.eval_with_error(x + rho);
            v += n * p;
            err += n * (e + p.abs() * 4.0 * f64::EPSILON);
        }
        let sum_err = shifts.len() as f64 * f64::EPSILON * v.abs();
        (c * v, c * (err + sum_err))
    };
    let g = |x: f64| if x.abs() <= 0.5 { 1.0 } else { 0.0 };
    let mut min = f64::INFINITY;
    let mut min_err = 0.0;
    let mut arg = 0.0;
    for i in 0..points {
        let x = if points == 1 {
            0.0
        } else {
            -0.6 + 1.2 * i as f64 / (points - 1) as f64
        };
        let (v, e) = rhs_at(x);
        let margin = v - g(x);
        if margin < min {
            min = margin;
            min_err = e;
            arg = x;
        }
    }
    let witness = (min < -min_err).then(|| Rational::from_float(arg).unwrap_or_default());
    (rhs_at(0.0).0, min, min_err, witness)
}

/// `g(x) ≤ C_m Σ[Π*_{U_m} g_j^{*c_j}(x) : I_m]`.
///
/// Exact mode certifies the difference on ℝ. Sampled mode keeps the exact
/// product but evaluates the shift sum in floating point at `points` grid
/// points over `[-0.6, 0.6]`, with a rounding-error bound; it is not a proof.
pub fn verify_p5(m: u64, mode: P5Mode, budget: StepBudget) -> Result<P5Outcome, PolyError> {
    let (limit, name) = match mode {
        P5Mode::Exact => (P5_EXACT_MAX, "exact-mode"),
        P5Mode::Sampled { .. } => (P5_SAMPLED_MAX, "sampled-mode"),
    };
    if m > limit {
        return Err(PolyError::Budget(format!("m = {m} exceeds the {name} limit {limit}")));
    }
    let parts = P5Parts::new(m, budget)?;
    let g = unit_box();
    let distinct_shifts = parts.shifts.len();
    let exponent = parts.exponent.clone();
    match mode {
        P5Mode::Exact => {
            let rhs = parts.rhs();
            let cert = nonneg_certificate(&rhs.sub(&g));
            Ok(P5Outcome {
                m,
                mode,
                holds: cert.holds(),
                exponent,
                lhs: 1.0,
                rhs: rhs.eval(&Rational::zero()).to_f64().unwrap_or(f64::INFINITY),
                min_margin: None,
                error_bound: 0.0,
                witness: cert.witness().cloned(),
                pieces: rhs.len(),
                degree: rhs.max_degree(),
                distinct_shifts,
            })
        }
        P5Mode::Sampled { points } => {
            let (rhs0, min, err, witness) = p5_sampled(&parts, points);
            Ok(P5Outcome {
                m,
                mode,
                holds: witness.is_none(),
                exponent,
                lhs: 1.0,
                rhs: rhs0,
                min_margin: (points > 0).then_some(min),
                error_bound: err,
                witness,
                pieces: parts.product.len(),
                degree: parts.product.max_degree(),
                distinct_shifts,
            })
        }
    }
}
