use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

/// Sparse polynomial with rational coefficients in `s₁, …, s_p, t`.
///
/// Exponent vectors have length `p + 1`; the last entry is the power of `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexPolynomial {
    p: usize,
    terms: BTreeMap<Vec<u32>, Rational64>,
}

impl SimplexPolynomial {
    pub fn zero(p: usize) -> Self {
        Self {
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(p: usize, c: Rational64) -> Self {
        let mut out = Self::zero(p);
        if !c.is_zero() {
            out.terms.insert(vec![0; p + 1], c);
        }
        out
    }

    /// `s_i` for `i ∈ 1..=p`.
    pub fn s(p: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= p, "variable s{i} out of range");
        let mut e = vec![0; p + 1];
        e[i - 1] = 1;
        let mut out = Self::zero(p);
        out.terms.insert(e, Rational64::one());
        out
    }

    pub fn t(p: usize) -> Self {
        let mut e = vec![0; p + 1];
        e[p] = 1;
        let mut out = Self::zero(p);
        out.terms.insert(e, Rational64::one());
        out
    }

    /// Number of `s` variables.
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Monomials `(exponents, coefficient)` in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &Rational64)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational64) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(Rational64::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-Rational64::one()))
    }

    pub fn scale(&self, c: Rational64) -> Self {
        let mut out = Self::zero(self.p);
        if c.is_zero() {
            return out;
        }
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), *v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        let mut out = Self::zero(self.p);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, *c1 * *c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::constant(self.p, Rational64::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Value at `(s, t)`.
    pub fn eval(&self, s: &[f64], t: f64) -> f64 {
        assert_eq!(s.len(), self.p);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut v = *c.numer() as f64 / *c.denom() as f64;
                for (x, &k) in s.iter().zip(e) {
                    v *= x.powi(k as i32);
                }
                v * t.powi(e[self.p] as i32)
            })
            .sum()
    }

    /// Splits by powers of `t`: entry `a` is the coefficient polynomial of `t^a`
    /// (with zero `t` exponent), for `a = 0..=deg_t`.
    pub fn by_powers_of_t(&self) -> Vec<Self> {
        let max_a = self.terms.keys().map(|e| e[self.p]).max().unwrap_or(0) as usize;
        let mut out = vec![Self::zero(self.p); max_a + 1];
        for (e, c) in &self.terms {
            let a = e[self.p] as usize;
            let mut e2 = e.clone();
            e2[self.p] = 0;
            out[a].add_term(e2, *c);
        }
        out
    }

    /// Leading coefficient in exponent order (the first nonzero term), if any.
    pub fn leading_coefficient(&self) -> Option<Rational64> {
        self.terms.values().next().copied()
    }
}

impl fmt::Display for SimplexPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree first, then by powers of t, s_p, …, s₁.
        let mut terms: Vec<(&Vec<u32>, &Rational64)> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.iter().rev().cmp(a.0.iter().rev()))
        });
        for (idx, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let power = |name: String, k: u32| if k == 1 { name } else { format!("{name}^{k}") };
            let mut factors = Vec::new();
            if e[self.p] > 0 {
                factors.push(power("t".into(), e[self.p]));
            }
            for (i, &k) in e[..self.p].iter().enumerate() {
                if k > 0 {
                    factors.push(power(format!("s{}", i + 1), k));
                }
            }
            let coef = if abs.is_integer() {
                abs.numer().to_string()
            } else {
                format!("{}/{}", abs.numer(), abs.denom())
            };
            if factors.is_empty() {
                write!(f, "{coef}")?;
            } else if abs.is_one() {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{coef}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn arithmetic() {
        let s1 = SimplexPolynomial::s(2, 1);
        let s2 = SimplexPolynomial::s(2, 2);
        let t = SimplexPolynomial::t(2);
        let f = t.sub(&s2).mul(&s2.sub(&s1));
        assert_eq!(f.degree(), Some(2));
        assert_eq!(f.eval(&[0.5, 1.0], 3.0), 2.0 * 0.5);
        let g = f.sub(&f);
        assert!(g.is_zero());
        assert_eq!(s1.add(&s1), s1.scale(r(2, 1)));
        assert_eq!(s1.pow(0), SimplexPolynomial::constant(2, r(1, 1)));
    }

    #[test]
    fn display() {
        let s1 = SimplexPolynomial::s(2, 1);
        let s2 = SimplexPolynomial::s(2, 2);
        let t = SimplexPolynomial::t(2);
        let f = t.sub(&s2).mul(&s2.sub(&s1));
        assert_eq!(f.to_string(), "t*s2 - t*s1 - s2^2 + s1*s2");
        assert_eq!(SimplexPolynomial::zero(0).to_string(), "0");
        let half = t.pow(2).scale(r(1, 2));
        assert_eq!(half.to_string(), "1/2*t^2");
    }

    #[test]
    fn split_by_t() {
        let s1 = SimplexPolynomial::s(1, 1);
        let t = SimplexPolynomial::t(1);
        let f = t.sub(&s1).pow(2);
        let parts = f.by_powers_of_t();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0], s1.pow(2));
        assert_eq!(parts[1], s1.scale(r(-2, 1)));
        assert_eq!(parts[2], SimplexPolynomial::constant(1, r(1, 1)));
    }
}
