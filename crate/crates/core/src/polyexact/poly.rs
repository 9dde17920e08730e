use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^e` for any integer `e`.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Dense univariate polynomial over the rationals, coefficients in
/// increasing degree. The zero polynomial has no coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly::new(vec![c])
    }

    /// `x`.
    pub fn identity() -> Self {
        Poly::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// `p(x + h)`, by repeated synthetic division.
    pub fn taylor_shift(&self, h: &Rational) -> Poly {
        if h.is_zero() || self.coeffs.len() <= 1 {
            return self.clone();
        }
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = &a[j + 1] * h;
                a[j] += t;
            }
        }
        Poly::new(a)
    }

    /// `p(s·x)`.
    pub fn compose_scale(&self, s: &Rational) -> Poly {
        let mut pw = Rational::one();
        let mut out = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            out.push(c * &pw);
            pw *= s;
        }
        Poly::new(out)
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(Rational::zero());
        for (i, c) in self.coeffs.iter().enumerate() {
            out.push(c / BigInt::from(i + 1));
        }
        Poly::new(out)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// `∫_0^len p`.
    pub fn integral_over(&self, len: &Rational) -> Rational {
        self.antiderivative().eval(len)
    }

    /// Euclidean division, `self = q·d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let lead = d.leading().expect("non-zero").clone();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Rational::zero(); rem.len().saturating_sub(dd)];
        while rem.len() > dd && !rem.is_empty() {
            let shift = rem.len() - 1 - dd;
            let f = rem.last().expect("non-empty") / &lead;
            for (i, c) in d.coeffs.iter().enumerate() {
                let t = &f * c;
                rem[shift + i] -= t;
            }
            quot[shift] = f;
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Positive multiple with unit leading coefficient magnitude.
    pub fn normalized(&self) -> Poly {
        match self.leading() {
            None => Poly::zero(),
            Some(l) => self.scale(&l.abs().recip()),
        }
    }

    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = self.normalized();
        let mut b = other.normalized();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.normalized();
        }
        a.normalized()
    }

    /// Square-free part `p / gcd(p, p')`.
    pub fn square_free(&self) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return self.normalized();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.normalized();
        }
        self.div_rem(&g).0.normalized()
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{i}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                (Some(a), Some(b)) => a + b,
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            });
        }
        Poly::new(out)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

/// In-place `acc += p`.
pub(crate) fn add_assign(acc: &mut Vec<Rational>, p: &Poly) {
    if acc.len() < p.coeffs.len() {
        acc.resize(p.coeffs.len(), Rational::zero());
    }
    for (a, c) in acc.iter_mut().zip(&p.coeffs) {
        *a += c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let q = p(&[1, -3, 0, 2]);
        let h = rat(3, 7);
        let s = q.taylor_shift(&h);
        for x in [-2, 0, 1, 5] {
            let x = int(x);
            assert_eq!(s.eval(&x), q.eval(&(&x + &h)));
        }
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[5, 0, -2, 1, 4]);
        let d = p(&[1, 1]);
        let (q, r) = a.div_rem(&d);
        assert_eq!(&(&q * &d) + &r, a);
        assert!(r.degree().unwrap_or(0) < 1);
    }

    #[test]
    fn square_free_strips_repeated_roots() {
        let x1 = p(&[-1, 1]);
        let x2 = p(&[2, 1]);
        let f = &(&(&x1 * &x1) * &x1) * &x2;
        let sf = f.square_free();
        assert_eq!(sf.degree(), Some(2));
        assert!(sf.eval(&int(1)).is_zero());
        assert!(sf.eval(&int(-2)).is_zero());
    }

    #[test]
    fn antiderivative_and_integral() {
        let q = p(&[0, 0, 3]);
        assert_eq!(q.integral_over(&int(2)), int(8));
        assert_eq!(q.antiderivative().derivative(), q);
    }

    #[test]
    fn pow2_negative() {
        assert_eq!(pow2(-3), rat(1, 8));
        assert_eq!(pow2(4), int(16));
    }
}
