use num_traits::{Signed, Zero};

use super::piecewise::PiecewisePoly;
use super::poly::{rat, Poly, Rational};

/// Outcome of [`nonneg_certificate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// `f ≥ 0` on all of ℝ, proved piece by piece.
    NonNegative { pieces: usize },
    /// `f(witness) = value < 0`.
    Negative { witness: Rational, value: Rational },
}

impl Certificate {
    pub fn holds(&self) -> bool {
        matches!(self, Certificate::NonNegative { .. })
    }

    pub fn witness(&self) -> Option<&Rational> {
        match self {
            Certificate::NonNegative { .. } => None,
            Certificate::Negative { witness, .. } => Some(witness),
        }
    }
}

/// Proves `f ≥ 0` on ℝ or returns a rational point where `f < 0`.
///
/// Each piece is checked on its closed interval: endpoint signs, then Sturm
/// root counting of the square-free part with bisection until every cell
/// either has no interior root (midpoint sign decides) or a single interior
/// root flanked by positive endpoint values.
pub fn nonneg_certificate(f: &PiecewisePoly) -> Certificate {
    for (lo, hi, p) in f.iter_pieces() {
        let len = hi - lo;
        if let Some((t, v)) = piece_negative_point(p, &len) {
            let (t, v) = interior_witness(p, &len, t, v);
            return Certificate::Negative {
                witness: lo + t,
                value: v,
            };
        }
    }
    Certificate::NonNegative { pieces: f.len() }
}

/// Sturm chain `q, q', -rem(q, q'), ...`, scaled by positive constants.
pub struct SturmChain {
    chain: Vec<Poly>,
}

impl SturmChain {
    pub fn new(q: &Poly) -> Self {
        let mut chain = vec![q.normalized()];
        let d = q.derivative().normalized();
        if !d.is_zero() {
            chain.push(d);
        }
        while chain.len() >= 2 {
            let n = chain.len();
            let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push((-&r).normalized());
        }
        SturmChain { chain }
    }

    /// Sign changes at `x`, zeros skipped.
    pub fn variations(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last: Option<bool> = None;
        for p in &self.chain {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let pos = v.is_positive();
            if last.is_some_and(|l| l != pos) {
                count += 1;
            }
            last = Some(pos);
        }
        count
    }

    /// Distinct roots in the open interval `(a, b)`.
    pub fn roots_between(&self, a: &Rational, b: &Rational) -> usize {
        let at_b = usize::from(self.chain[0].eval(b).is_zero());
        (self.variations(a) - self.variations(b)).saturating_sub(at_b)
    }
}

/// A negative endpoint value is a one-sided limit; moves it strictly inside
/// the piece so the witness also holds for the right-continuous evaluation.
fn interior_witness(p: &Poly, len: &Rational, t: Rational, v: Rational) -> (Rational, Rational) {
    if !t.is_zero() && t != *len {
        return (t, v);
    }
    let mut step = len * rat(1, 2);
    for _ in 0..256 {
        let inner = if t.is_zero() { step.clone() } else { len - &step };
        let w = p.eval(&inner);
        if w.is_negative() {
            return (inner, w);
        }
        step *= rat(1, 2);
    }
    (t, v)
}

fn piece_negative_point(p: &Poly, len: &Rational) -> Option<(Rational, Rational)> {
    if p.is_zero() {
        return None;
    }
    let zero = Rational::zero();
    for t in [&zero, len] {
        let v = p.eval(t);
        if v.is_negative() {
            return Some((t.clone(), v));
        }
    }
    if p.degree() == Some(0) {
        return None;
    }
    let q = p.square_free();
    let sturm = SturmChain::new(&q);
    let half = rat(1, 2);
    let mut stack = vec![(zero, len.clone())];
    while let Some((l, u)) = stack.pop() {
        let c = sturm.roots_between(&l, &u);
        let ql = q.eval(&l);
        let qu = q.eval(&u);
        let mid = (&l + &u) * &half;
        match c {
            0 => {
                let v = p.eval(&mid);
                if v.is_negative() {
                    return Some((mid, v));
                }
            }
            1 if !ql.is_zero() && !qu.is_zero() => {
                for t in [&l, &u] {
                    let v = p.eval(t);
                    if v.is_negative() {
                        return Some((t.clone(), v));
                    }
                }
            }
            _ => {
                let v = p.eval(&mid);
                if v.is_negative() {
                    return Some((mid, v));
                }
                stack.push((mid.clone(), u));
                stack.push((l, mid));
            }
        }
    }
    None
}
