//! Permutation statistics, Strichartz coefficients, the Itô–Stratonovich
//! multi-indices `𝒥ₙᵐ`, simplex polynomials `f_α` and the contraction operators
//! `F̂ₙ^{σ,α}`.
//!
//! Permutations are written one-based, as the image sequence `(σ(1), …, σ(n))`.

mod contraction;
mod poly;

pub use contraction::{
    contraction_operator, contraction_operator_with, ContractionOperator, ContractionOptions,
};
pub use poly::SimplexPolynomial;

use num_rational::Rational64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Checks that `sigma` is a permutation of `1..=n`.
pub fn check_permutation(sigma: &[usize]) -> Result<()> {
    let n = sigma.len();
    let mut seen = vec![false; n];
    for &s in sigma {
        if s == 0 || s > n || seen[s - 1] {
            return Err(Error::Argument(format!("{sigma:?} is not a permutation of 1..={n}")));
        }
        seen[s - 1] = true;
    }
    Ok(())
}

/// All permutations of `1..=n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (1..=n).collect();
    let mut out = vec![cur.clone()];
    if n < 2 {
        return out;
    }
    loop {
        let Some(i) = (0..n - 1).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
        out.push(cur.clone());
    }
}

/// `e(σ) = #{j < n : σ(j) > σ(j+1)}`.
pub fn errors(sigma: &[usize]) -> Result<usize> {
    check_permutation(sigma)?;
    Ok(sigma.windows(2).filter(|w| w[0] > w[1]).count())
}

fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i64 / (i + 1) as i64;
    }
    acc
}

/// `c_n^σ = (−1)^{e(σ)} / (n² · C(n−1, e(σ)))`.
pub fn strichartz_coefficient(sigma: &[usize]) -> Result<Rational64> {
    let e = errors(sigma)?;
    let n = sigma.len();
    if n == 0 {
        return Err(Error::Argument("empty permutation".into()));
    }
    let sign = if e % 2 == 0 { 1 } else { -1 };
    Ok(Rational64::new(sign, (n * n) as i64 * binomial(n - 1, e)))
}

/// A tuple `α ∈ {1,2}^m`: `α_i = 1` is a Brownian slot, `α_i = 2` a paired slot.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlphaIndex {
    alpha: Vec<u8>,
}

impl AlphaIndex {
    pub fn new(alpha: Vec<u8>) -> Result<Self> {
        if alpha.is_empty() || alpha.iter().any(|&a| a != 1 && a != 2) {
            return Err(Error::Argument(format!("invalid multi-index {alpha:?}")));
        }
        Ok(Self { alpha })
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.alpha
    }

    /// `m`, the number of slots.
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `n = Σ α_i`.
    pub fn n(&self) -> usize {
        self.alpha.iter().map(|&a| a as usize).sum()
    }

    /// `p_α`, the number of ones.
    pub fn p(&self) -> usize {
        self.alpha.iter().filter(|&&a| a == 1).count()
    }

    /// `q_α`, the number of twos.
    pub fn q(&self) -> usize {
        self.alpha.iter().filter(|&&a| a == 2).count()
    }
}

impl std::fmt::Display for AlphaIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.alpha.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `𝒥ₙᵐ` in lexicographic order; empty unless `⌈n/2⌉ ≤ m ≤ n`.
pub fn multi_index_set(n: usize, m: usize) -> Vec<AlphaIndex> {
    if n == 0 || m > n || 2 * m < n {
        return Vec::new();
    }
    let twos = n - m;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(m: usize, twos: usize, cur: &mut Vec<u8>, out: &mut Vec<AlphaIndex>) {
        let used: usize = cur.iter().filter(|&&a| a == 2).count();
        if cur.len() == m {
            if used == twos {
                out.push(AlphaIndex { alpha: cur.clone() });
            }
            return;
        }
        let left = m - cur.len();
        for a in [1u8, 2] {
            let u = used + (a == 2) as usize;
            if u <= twos && twos - u <= left - 1 {
                cur.push(a);
                rec(m, twos, cur, out);
                cur.pop();
            }
        }
    }
    rec(m, twos, &mut cur, &mut out);
    out
}

/// `𝒥ₙ = ⋃_{m=⌈n/2⌉}^{n} 𝒥ₙᵐ`, ordered by `m` then lexicographically.
pub fn multi_indices(n: usize) -> Vec<AlphaIndex> {
    (n.div_ceil(2)..=n).flat_map(|m| multi_index_set(n, m)).collect()
}

/// The simplex polynomial of a multi-index and its split by powers of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FAlpha {
    pub alpha: AlphaIndex,
    /// `f_α(s₁, …, s_p, t)`.
    pub poly: SimplexPolynomial,
    /// Entry `a` is `(b^a_α, f̃_{α,a})` with `f̃` normalized so that its leading
    /// coefficient is one, or `(0, 0)` when `t^a` does not occur. `a = 0..=q_α`.
    pub decomposition: Vec<(Rational64, SimplexPolynomial)>,
}

impl FAlpha {
    /// `Σ_a b^a t^a f̃_{α,a}(s)`.
    pub fn recompose(&self) -> SimplexPolynomial {
        let p = self.alpha.p();
        let t = SimplexPolynomial::t(p);
        let mut acc = SimplexPolynomial::zero(p);
        for (a, (b, f)) in self.decomposition.iter().enumerate() {
            acc = acc.add(&f.mul(&t.pow(a as u32)).scale(*b));
        }
        acc
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// `f_α`: the volume of the paired time variables between consecutive Brownian
/// times, with Brownian times renamed `s₁ < … < s_p`.
///
/// A run of `c` consecutive twos between lower bound `L` (the previous Brownian
/// time, or 0) and upper bound `U` (the next Brownian time, or `t`) contributes
/// `(U − L)^c / c!`.
pub fn f_alpha(alpha: &AlphaIndex) -> FAlpha {
    let p = alpha.p();
    let q = alpha.q();
    let mut poly = SimplexPolynomial::constant(p, Rational64::one());
    let mut lower = SimplexPolynomial::zero(p);
    let mut run = 0usize;
    let mut seen_ones = 0usize;
    let close = |poly: &mut SimplexPolynomial, lower: &SimplexPolynomial, upper: &SimplexPolynomial, run: usize| {
        if run > 0 {
            *poly = poly
                .mul(&upper.sub(lower).pow(run as u32))
                .scale(Rational64::new(1, factorial(run)));
        }
    };
    for &a in alpha.as_slice() {
        if a == 2 {
            run += 1;
        } else {
            seen_ones += 1;
            let upper = SimplexPolynomial::s(p, seen_ones);
            close(&mut poly, &lower, &upper, run);
            run = 0;
            lower = upper;
        }
    }
    close(&mut poly, &lower, &SimplexPolynomial::t(p), run);

    let mut parts = poly.by_powers_of_t();
    parts.resize(q + 1, SimplexPolynomial::zero(p));
    let decomposition = parts
        .into_iter()
        .map(|part| match part.leading_coefficient() {
            Some(b) => (b, part.scale(Rational64::one() / b)),
            None => (Rational64::zero(), part),
        })
        .collect();
    FAlpha {
        alpha: alpha.clone(),
        poly,
        decomposition,
    }
}

/// The slot map `τ` from natural expanded positions to canonical ones.
///
/// Expanding `α` gives `n` positions: one per `α_i = 1` and two adjacent ones per
/// `α_i = 2`. Canonical order puts the Brownian slots first (in order) and the
/// pairs after them (in order). Returned one-based: `τ[i−1]` is the canonical
/// position of natural position `i`.
pub fn tau(alpha: &AlphaIndex) -> Vec<usize> {
    let p = alpha.p();
    let mut out = Vec::with_capacity(alpha.n());
    let (mut b, mut pair) = (0, 0);
    for &a in alpha.as_slice() {
        if a == 1 {
            b += 1;
            out.push(b);
        } else {
            out.push(p + 2 * pair + 1);
            out.push(p + 2 * pair + 2);
            pair += 1;
        }
    }
    out
}

/// `σ′` with `F_n^σ(natural tensor) = F_n^{σ′}(canonical tensor)`, namely `σ′ = τ∘σ`.
pub fn sigma_prime(sigma: &[usize], alpha: &AlphaIndex) -> Result<Vec<usize>> {
    check_permutation(sigma)?;
    if sigma.len() != alpha.n() {
        return Err(Error::Argument(format!(
            "permutation of {} letters does not match multi-index {alpha} of weight {}",
            sigma.len(),
            alpha.n()
        )));
    }
    let t = tau(alpha);
    Ok(sigma.iter().map(|&s| t[s - 1]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn al(v: &[u8]) -> AlphaIndex {
        AlphaIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn permutation_enumeration() {
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(3)[1], vec![1, 3, 2]);
        assert_eq!(permutations(5).len(), 120);
    }

    #[test]
    fn error_counts() {
        assert_eq!(errors(&[1, 2, 3, 4]).unwrap(), 0);
        assert_eq!(errors(&[2, 1, 3]).unwrap(), 1);
        assert_eq!(errors(&[5, 4, 3, 2, 1]).unwrap(), 4);
        assert!(errors(&[1, 1]).is_err());
        assert!(errors(&[0, 1]).is_err());
    }

    #[test]
    fn coefficients() {
        assert_eq!(strichartz_coefficient(&[1]).unwrap(), Rational64::one());
        assert_eq!(strichartz_coefficient(&[1, 2]).unwrap(), Rational64::new(1, 4));
        assert_eq!(strichartz_coefficient(&[2, 1]).unwrap(), Rational64::new(-1, 4));
        assert_eq!(strichartz_coefficient(&[2, 1, 3]).unwrap(), Rational64::new(-1, 18));
        assert!(strichartz_coefficient(&[2, 2]).is_err());
    }

    #[test]
    fn multi_index_examples() {
        assert_eq!(multi_index_set(3, 2), vec![al(&[1, 2]), al(&[2, 1])]);
        assert_eq!(multi_index_set(4, 4), vec![al(&[1, 1, 1, 1])]);
        assert!(multi_index_set(4, 1).is_empty());
        assert!(multi_index_set(3, 4).is_empty());
        let a = al(&[1, 2, 1, 2]);
        assert!(multi_index_set(6, 4).contains(&a));
        assert_eq!((a.p(), a.q()), (2, 2));
        assert_eq!(multi_indices(3).len(), 3);
    }

    #[test]
    fn f_alpha_examples() {
        let f = f_alpha(&al(&[1, 2, 1, 2]));
        let (s1, s2, t) = (
            SimplexPolynomial::s(2, 1),
            SimplexPolynomial::s(2, 2),
            SimplexPolynomial::t(2),
        );
        assert_eq!(f.poly, t.sub(&s2).mul(&s2.sub(&s1)));
        assert_eq!(f.recompose(), f.poly);

        let ones = f_alpha(&al(&[1, 1, 1]));
        assert_eq!(ones.poly, SimplexPolynomial::constant(3, Rational64::one()));

        let two = f_alpha(&al(&[2]));
        assert_eq!(two.poly, SimplexPolynomial::t(0));
        assert_eq!(two.decomposition[1].0, Rational64::one());

        let run = f_alpha(&al(&[2, 2, 1]));
        let s = SimplexPolynomial::s(1, 1);
        assert_eq!(run.poly, s.pow(2).scale(Rational64::new(1, 2)));
    }

    #[test]
    fn tau_and_sigma_prime() {
        assert_eq!(tau(&al(&[1, 2, 1])), vec![1, 3, 4, 2]);
        assert_eq!(sigma_prime(&[1, 2, 3], &al(&[1, 1, 1])).unwrap(), vec![1, 2, 3]);
        assert_eq!(sigma_prime(&[2, 1, 3], &al(&[1, 1, 1])).unwrap(), vec![2, 1, 3]);
        assert_eq!(sigma_prime(&[1, 2], &al(&[2])).unwrap(), vec![1, 2]);
        assert_eq!(
            sigma_prime(&[1, 2, 3, 4], &al(&[1, 2, 1])).unwrap(),
            vec![1, 3, 4, 2]
        );
        assert!(sigma_prime(&[1, 2], &al(&[1, 2])).is_err());
    }
}
