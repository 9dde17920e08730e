use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{add_assign, Poly, Rational};
use super::PolyError;

/// Largest convolution power [`PiecewisePoly::conv_power`] accepts.
pub const MAX_CONV_POWER: u32 = 64;

/// Compactly supported piecewise polynomial with rational breakpoints.
///
/// Piece `i` lives on `[b_i, b_{i+1}]` and is stored as a polynomial in the
/// local variable `x - b_i`. Point values at interior breakpoints are taken
/// from the piece on the right; the last breakpoint belongs to the last piece,
/// so an indicator built from one piece is the closed-interval indicator.
///
/// Values are always canonical: no zero pieces at either end, and adjacent
/// pieces that continue the same polynomial are merged. Equality is therefore
/// structural equality of functions up to point values at breakpoints.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PiecewisePoly {
    breakpoints: Vec<Rational>,
    pieces: Vec<Poly>,
}

/// Accumulates polynomial contributions `(lo, hi, p(x - lo))` on a common grid.
#[derive(Default)]
pub(crate) struct Overlay {
    contribs: Vec<(Rational, Rational, Poly)>,
}

impl Overlay {
    pub(crate) fn push(&mut self, lo: Rational, hi: Rational, p: Poly) {
        if lo < hi && !p.is_zero() {
            self.contribs.push((lo, hi, p));
        }
    }

    pub(crate) fn build(self) -> PiecewisePoly {
        if self.contribs.is_empty() {
            return PiecewisePoly::zero();
        }
        let mut grid: Vec<Rational> = Vec::with_capacity(self.contribs.len() * 2);
        for (lo, hi, _) in &self.contribs {
            grid.push(lo.clone());
            grid.push(hi.clone());
        }
        grid.sort();
        grid.dedup();
        let mut acc: Vec<Vec<Rational>> = vec![Vec::new(); grid.len() - 1];
        for (lo, hi, p) in &self.contribs {
            let mut idx = grid.binary_search(lo).expect("endpoint on grid");
            while grid[idx] < *hi {
                let shift = &grid[idx] - lo;
                if shift.is_zero() {
                    add_assign(&mut acc[idx], p);
                } else {
                    add_assign(&mut acc[idx], &p.taylor_shift(&shift));
                }
                idx += 1;
            }
        }
        let pieces = acc.into_iter().map(Poly::new).collect();
        PiecewisePoly::canonical(grid, pieces)
    }
}

impl PiecewisePoly {
    pub fn zero() -> Self {
        PiecewisePoly::default()
    }

    /// Builds from local-coordinate pieces; validates and canonicalises.
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<Poly>) -> Result<Self, PolyError> {
        if breakpoints.is_empty() && pieces.is_empty() {
            return Ok(PiecewisePoly::zero());
        }
        if breakpoints.len() != pieces.len() + 1 {
            return Err(PolyError::InvalidBreakpoints(format!(
                "{} breakpoints for {} pieces",
                breakpoints.len(),
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PolyError::InvalidBreakpoints(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(PiecewisePoly::canonical(breakpoints, pieces))
    }

    /// Builds from pieces written as polynomials in the global variable `x`.
    pub fn from_global(breakpoints: Vec<Rational>, global: Vec<Poly>) -> Result<Self, PolyError> {
        if breakpoints.len() != global.len() + 1 {
            return Self::new(breakpoints, global);
        }
        let pieces = global
            .iter()
            .zip(&breakpoints)
            .map(|(p, b)| p.taylor_shift(b))
            .collect();
        Self::new(breakpoints, pieces)
    }

    /// `value` on `[lo, hi]`, zero elsewhere.
    pub fn constant_on(lo: Rational, hi: Rational, value: Rational) -> Result<Self, PolyError> {
        if lo >= hi {
            return Err(PolyError::NonPositive(format!("empty interval [{lo}, {hi}]")));
        }
        Self::new(vec![lo, hi], vec![Poly::constant(value)])
    }

    fn canonical(mut breakpoints: Vec<Rational>, mut pieces: Vec<Poly>) -> Self {
        let first = pieces.iter().position(|p| !p.is_zero());
        let Some(first) = first else {
            return PiecewisePoly::zero();
        };
        let last = pieces.iter().rposition(|p| !p.is_zero()).expect("non-zero piece");
        pieces.truncate(last + 1);
        breakpoints.truncate(last + 2);
        pieces.drain(..first);
        breakpoints.drain(..first);

        let mut out_b = Vec::with_capacity(breakpoints.len());
        let mut out_p: Vec<Poly> = Vec::with_capacity(pieces.len());
        let mut it = breakpoints.into_iter();
        out_b.push(it.next().expect("non-empty"));
        for (p, hi) in pieces.into_iter().zip(it) {
            if let Some(prev) = out_p.last() {
                let lo = out_b.last().expect("non-empty");
                if continues(prev, &out_b[out_b.len() - 2], lo, &p) {
                    *out_b.last_mut().expect("non-empty") = hi;
                    continue;
                }
            }
            out_p.push(p);
            out_b.push(hi);
        }
        PiecewisePoly {
            breakpoints: out_b,
            pieces: out_p,
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Poly] {
        &self.pieces
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// `[first, last]` breakpoint, or `None` for the zero function.
    pub fn support(&self) -> Option<(&Rational, &Rational)> {
        Some((self.breakpoints.first()?, self.breakpoints.last()?))
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().filter_map(Poly::degree).max().unwrap_or(0)
    }

    /// Iterates `(lo, hi, local polynomial)`.
    pub fn iter_pieces(&self) -> impl Iterator<Item = (&Rational, &Rational, &Poly)> {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (&self.breakpoints[i], &self.breakpoints[i + 1], p))
    }

    fn piece_index(&self, x: &Rational) -> Option<usize> {
        let (lo, hi) = self.support()?;
        if x < lo || x > hi {
            return None;
        }
        let idx = self.breakpoints.partition_point(|b| b <= x);
        Some((idx - 1).min(self.pieces.len() - 1))
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        match self.piece_index(x) {
            Some(i) => self.pieces[i].eval(&(x - &self.breakpoints[i])),
            None => Rational::zero(),
        }
    }

    /// Exact `∫_ℝ f`.
    pub fn integral(&self) -> Rational {
        self.iter_pieces()
            .map(|(lo, hi, p)| p.integral_over(&(hi - lo)))
            .sum()
    }

    pub fn scale(&self, c: &Rational) -> PiecewisePoly {
        if c.is_zero() {
            return PiecewisePoly::zero();
        }
        PiecewisePoly {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(c)).collect(),
        }
    }

    pub fn neg(&self) -> PiecewisePoly {
        self.scale(&-Rational::one())
    }

    fn push_into(&self, overlay: &mut Overlay, offset: &Rational, c: &Rational) {
        for (lo, hi, p) in self.iter_pieces() {
            overlay.push(lo + offset, hi + offset, p.scale(c));
        }
    }

    pub fn add(&self, other: &PiecewisePoly) -> PiecewisePoly {
        let mut ov = Overlay::default();
        let zero = Rational::zero();
        let one = Rational::one();
        self.push_into(&mut ov, &zero, &one);
        other.push_into(&mut ov, &zero, &one);
        ov.build()
    }

    pub fn sub(&self, other: &PiecewisePoly) -> PiecewisePoly {
        self.add(&other.neg())
    }

    /// `x ↦ f(x + rho)`.
    pub fn translate(&self, rho: &Rational) -> PiecewisePoly {
        PiecewisePoly {
            breakpoints: self.breakpoints.iter().map(|b| b - rho).collect(),
            pieces: self.pieces.clone(),
        }
    }

    /// Dilation `T_a f(x) = f(x / a)`.
    pub fn dilate(&self, a: &Rational) -> Result<PiecewisePoly, PolyError> {
        if !a.is_positive() {
            return Err(PolyError::NonPositive(format!("dilation factor {a}")));
        }
        let inv = a.recip();
        Ok(PiecewisePoly {
            breakpoints: self.breakpoints.iter().map(|b| b * a).collect(),
            pieces: self.pieces.iter().map(|p| p.compose_scale(&inv)).collect(),
        })
    }

    /// Weighted translate sum `Σ count·f(x + rho)` over a finite multiset.
    pub fn shift_sum(&self, shifts: &[(Rational, BigUint)]) -> PiecewisePoly {
        let mut ov = Overlay::default();
        for (rho, count) in shifts {
            if count.is_zero() {
                continue;
            }
            let c = Rational::from_integer(BigInt::from(count.clone()));
            self.push_into(&mut ov, &-rho, &c);
        }
        ov.build()
    }

    /// Returns `(lo, hi, value)` when `self` is a single constant piece.
    fn as_box(&self) -> Option<(&Rational, &Rational, &Rational)> {
        if self.pieces.len() == 1 && self.pieces[0].degree() == Some(0) {
            Some((&self.breakpoints[0], &self.breakpoints[1], &self.pieces[0].coeffs()[0]))
        } else {
            None
        }
    }

    /// `f * (value·χ_[lo,hi])(x) = value·(F(x - lo) - F(x - hi))` with `F` the
    /// running integral of `f`.
    fn convolve_box(&self, lo: &Rational, hi: &Rational, value: &Rational) -> PiecewisePoly {
        let mut ov = Overlay::default();
        let mut mass = Rational::zero();
        for (b0, b1, p) in self.iter_pieces() {
            let anti = p.antiderivative();
            let running = &Poly::constant(mass.clone()) + &anti;
            ov.push(b0 + lo, b1 + lo, running.scale(value));
            ov.push(b0 + hi, b1 + hi, running.scale(&-value));
            mass += anti.eval(&(b1 - b0));
        }
        if let Some((_, end)) = self.support() {
            ov.push(end + lo, end + hi, Poly::constant(mass * value));
        }
        ov.build()
    }

    pub fn convolve(&self, other: &PiecewisePoly) -> PiecewisePoly {
        if self.is_zero() || other.is_zero() {
            return PiecewisePoly::zero();
        }
        if let Some((lo, hi, v)) = other.as_box() {
            return self.convolve_box(lo, hi, v);
        }
        if let Some((lo, hi, v)) = self.as_box() {
            return other.convolve_box(lo, hi, v);
        }
        let mut ov = Overlay::default();
        for (a0, a1, p) in self.iter_pieces() {
            let alpha = a1 - a0;
            for (c0, c1, q) in other.iter_pieces() {
                let beta = c1 - c0;
                let origin = a0 + c0;
                for (s0, s1, poly) in pair_convolution(p, &alpha, q, &beta) {
                    ov.push(&origin + &s0, &origin + &s1, poly);
                }
            }
        }
        ov.build()
    }

    /// `n`-fold convolution power.
    pub fn conv_power(&self, n: u32) -> Result<PiecewisePoly, PolyError> {
        if n == 0 {
            return Err(PolyError::NonPositive("convolution power 0".into()));
        }
        if n > MAX_CONV_POWER {
            return Err(PolyError::Budget(format!(
                "convolution power {n} exceeds {MAX_CONV_POWER}"
            )));
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.convolve(self);
        }
        Ok(acc)
    }

    /// Restriction to `[lo, hi]`.
    pub fn restrict(&self, lo: &Rational, hi: &Rational) -> PiecewisePoly {
        let mut ov = Overlay::default();
        for (a, b, p) in self.iter_pieces() {
            let l = if a > lo { a } else { lo };
            let h = if b < hi { b } else { hi };
            if l < h {
                ov.push(l.clone(), h.clone(), p.taylor_shift(&(l - a)));
            }
        }
        ov.build()
    }

    pub fn to_float(&self) -> FloatPiecewise {
        FloatPiecewise {
            breakpoints: self
                .breakpoints
                .iter()
                .map(|b| b.to_f64().unwrap_or(f64::NAN))
                .collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.coeffs().iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
                .collect(),
        }
    }

    pub fn to_json(&self) -> PiecewiseJson {
        PiecewiseJson {
            breakpoints: self.breakpoints.iter().map(rational_string).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.coeffs().iter().map(rational_string).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &PiecewiseJson) -> Result<Self, PolyError> {
        let breakpoints = json
            .breakpoints
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>, _>>()?;
        let pieces = json
            .pieces
            .iter()
            .map(|cs| {
                cs.iter()
                    .map(|s| parse_rational(s))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Poly::new)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(breakpoints, pieces)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("plain strings serialise")
    }

    pub fn from_json_str(s: &str) -> Result<Self, PolyError> {
        let json: PiecewiseJson =
            serde_json::from_str(s).map_err(|e| PolyError::Parse(e.to_string()))?;
        Self::from_json(&json)
    }
}

/// `next` on `[lo, ...]` continues `prev` from `[prev_lo, lo]`.
fn continues(prev: &Poly, prev_lo: &Rational, lo: &Rational, next: &Poly) -> bool {
    if prev.degree() != next.degree() || prev.leading() != next.leading() {
        return false;
    }
    if prev.eval(&(lo - prev_lo)) != *next.coeffs().first().unwrap_or(&Rational::zero()) {
        return false;
    }
    prev.taylor_shift(&(lo - prev_lo)) == *next
}

fn binomial_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for k in 1..=n {
        let next = &row[k - 1] * BigInt::from(n - k + 1) / BigInt::from(k);
        row.push(next);
    }
    row
}

/// Convolution of `p(u)` on `[0, α]` with `q(v)` on `[0, β]`, returned as
/// pieces `(s0, s1, P(s - s0))` over `s ∈ [0, α+β]`.
fn pair_convolution(
    p: &Poly,
    alpha: &Rational,
    q: &Poly,
    beta: &Rational,
) -> Vec<(Rational, Rational, Poly)> {
    let dq = q.degree().unwrap_or(0);
    // q(s - u) = Σ_i s^i A_i(u)
    let mut a: Vec<Vec<Rational>> = vec![vec![Rational::zero(); dq + 1]; dq + 1];
    for (n, qn) in q.coeffs().iter().enumerate() {
        if qn.is_zero() {
            continue;
        }
        let binom = binomial_row(n);
        for i in 0..=n {
            let sign = if (n - i) % 2 == 0 { 1 } else { -1 };
            a[i][n - i] += qn * Rational::from_integer(&binom[i] * BigInt::from(sign));
        }
    }
    let s_polys: Vec<Poly> = a
        .into_iter()
        .map(|ai| (&Poly::new(ai) * p).antiderivative())
        .collect();

    let at_const = |c: &Rational| Poly::new(s_polys.iter().map(|si| si.eval(c)).collect());
    let at_s = || {
        let mut acc: Vec<Rational> = Vec::new();
        for (i, si) in s_polys.iter().enumerate() {
            let mut shifted = vec![Rational::zero(); i];
            shifted.extend_from_slice(si.coeffs());
            add_assign(&mut acc, &Poly::new(shifted));
        }
        Poly::new(acc)
    };
    let at_s_minus_beta = || {
        let mb = -beta;
        let mut acc: Vec<Rational> = Vec::new();
        for (i, si) in s_polys.iter().enumerate() {
            let mut shifted = vec![Rational::zero(); i];
            shifted.extend_from_slice(si.taylor_shift(&mb).coeffs());
            add_assign(&mut acc, &Poly::new(shifted));
        }
        Poly::new(acc)
    };

    let (m1, m2) = if alpha <= beta {
        (alpha.clone(), beta.clone())
    } else {
        (beta.clone(), alpha.clone())
    };
    let total = alpha + beta;
    let fs = at_s();
    let fsb = at_s_minus_beta();
    let fa = at_const(alpha);

    let mut out = Vec::with_capacity(3);
    let zero = Rational::zero();
    out.push((zero.clone(), m1.clone(), fs.clone()));
    if m1 < m2 {
        let mid = if alpha <= beta { fa.clone() } else { &fs - &fsb };
        out.push((m1.clone(), m2.clone(), mid));
    }
    out.push((m2, total, &fa - &fsb));
    out.into_iter()
        .map(|(s0, s1, poly)| {
            let local = poly.taylor_shift(&s0);
            (s0, s1, local)
        })
        .collect()
}

/// Floating-point evaluator for a [`PiecewisePoly`], local coordinates kept.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPiecewise {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<f64>>,
}

impl FloatPiecewise {
    /// Value together with a rounding-error bound covering coefficient
    /// conversion, the local offset and Horner evaluation.
    pub fn eval_with_error(&self, x: f64) -> (f64, f64) {
        let (Some(&lo), Some(&hi)) = (self.breakpoints.first(), self.breakpoints.last()) else {
            return (0.0, 0.0);
        };
        if !(lo..=hi).contains(&x) {
            return (0.0, 0.0);
        }
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= x)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        let t = x - self.breakpoints[idx];
        let at = t.abs() * (1.0 + f64::EPSILON);
        let coeffs = &self.pieces[idx];
        let mut value = 0.0;
        let mut mag = 0.0;
        for c in coeffs.iter().rev() {
            value = value * t + c;
            mag = mag * at + c.abs();
        }
        let n = coeffs.len() as f64;
        (value, (4.0 * n + 4.0) * f64::EPSILON * mag)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (Some(&lo), Some(&hi)) = (self.breakpoints.first(), self.breakpoints.last()) else {
            return 0.0;
        };
        if !(lo..=hi).contains(&x) {
            return 0.0;
        }
        let idx = self
            .breakpoints
            .partition_point(|&b| b <= x)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        let t = x - self.breakpoints[idx];
        self.pieces[idx].iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        Some((*self.breakpoints.first()?, *self.breakpoints.last()?))
    }
}

/// JSON form: exact `"num/den"` strings, coefficients in powers of
/// `x - breakpoints[i]` for piece `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiecewiseJson {
    pub breakpoints: Vec<String>,
    pub pieces: Vec<Vec<String>>,
}

pub fn rational_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, PolyError> {
    let s = s.trim();
    let bad = || PolyError::Parse(format!("not a rational: {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::super::poly::{int, rat};
    use super::*;

    fn boxf(a: Rational) -> PiecewisePoly {
        PiecewisePoly::constant_on(-a.clone(), a, int(1)).unwrap()
    }

    #[test]
    fn box_times_box_is_triangle() {
        let g = boxf(rat(1, 2));
        let k = g.convolve(&g);
        let tri = PiecewisePoly::from_global(
            vec![int(-1), int(0), int(1)],
            vec![
                Poly::new(vec![int(1), int(1)]),
                Poly::new(vec![int(1), int(-1)]),
            ],
        )
        .unwrap();
        assert_eq!(k, tri);
        assert_eq!(k.integral(), int(1));
    }

    #[test]
    fn general_path_matches_box_path() {
        let g = boxf(rat(1, 2));
        let k = g.convolve(&g);
        // K * K through the pairwise route, then via two box convolutions
        let kk = k.convolve(&k);
        let via_boxes = k.convolve(&g).convolve(&g);
        assert_eq!(kk, via_boxes);
        assert_eq!(kk.eval(&int(0)), rat(2, 3));
    }

    #[test]
    fn canonical_merges_and_trims() {
        let f = PiecewisePoly::new(
            vec![int(0), int(1), int(2), int(3), int(4)],
            vec![Poly::zero(), Poly::constant(int(2)), Poly::constant(int(2)), Poly::zero()],
        )
        .unwrap();
        assert_eq!(f.breakpoints(), &[int(1), int(3)]);
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn eval_closed_indicator() {
        let g = boxf(int(1));
        assert_eq!(g.eval(&int(0)), int(1));
        assert_eq!(g.eval(&int(1)), int(1));
        assert_eq!(g.eval(&int(-1)), int(1));
        assert_eq!(g.eval(&int(2)), int(0));
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(PiecewisePoly::new(vec![int(1), int(0)], vec![Poly::constant(int(1))]).is_err());
        assert!(PiecewisePoly::new(vec![int(0)], vec![Poly::constant(int(1))]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = boxf(rat(1, 3));
        let k = g.convolve(&boxf(rat(1, 5)));
        let s = k.to_json_string();
        assert!(s.contains("\"-8/15\""));
        assert_eq!(PiecewisePoly::from_json_str(&s).unwrap(), k);
        assert!(PiecewisePoly::from_json_str(r#"{"breakpoints":["1/0"],"pieces":[]}"#).is_err());
    }

    #[test]
    fn float_eval_agrees() {
        let g = boxf(rat(1, 2));
        let k3 = g.conv_power(3).unwrap();
        let fl = k3.to_float();
        for x in [-1.4, -0.3, 0.0, 0.77, 1.5] {
            let exact = k3.eval(&Rational::from_float(x).unwrap()).to_f64().unwrap();
            assert!((fl.eval(x) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn restrict_keeps_window() {
        let k = boxf(rat(1, 2)).conv_power(2).unwrap();
        let r = k.restrict(&int(0), &int(5));
        assert_eq!(r.support().unwrap(), (&int(0), &int(1)));
        assert_eq!(r.integral(), rat(1, 2));
    }
}
