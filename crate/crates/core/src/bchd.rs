//! Group law on a nilpotent Lie algebra in exponential coordinates.
//!
//! For step `r`,
//!
//! ```text
//! g·h = g + h + Σ_{k=1}^{r−1} Σ_{(n,m)∈ℐ_k} a^k_{n,m} ad_g^{n₁} ad_h^{m₁} ⋯ ad_g^{n_k} ad_h^{m_k} g,
//! a^k_{n,m} = (−1)^k / ((k+1)·m!·n!·(|n|+1)),
//! ```
//!
//! where `ℐ_k` collects pairs of multi-indices with `n_i + m_i > 0` and terms with
//! `|n| + |m| ≥ r` vanish. The coefficients are kept as exact rationals; the
//! terms are merged into distinct ad-words and evaluated from a trie so that
//! shared suffixes are bracketed once.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{LieAlgebra, Vector};
use crate::error::{conform, Error, Result};

/// Letter of an ad-word: `ad_g` or `ad_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AdOp {
    G,
    H,
}

/// One summand `a^k_{n,m} ad_g^{n₁} ad_h^{m₁} ⋯ ad_g^{n_k} ad_h^{m_k} g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BchdTerm {
    pub k: usize,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub coefficient: Rational64,
}

impl BchdTerm {
    /// The operator word, leftmost operator first.
    pub fn word(&self) -> Vec<AdOp> {
        let mut w = Vec::with_capacity(self.degree());
        for (&a, &b) in self.n.iter().zip(&self.m) {
            w.extend(std::iter::repeat_n(AdOp::G, a));
            w.extend(std::iter::repeat_n(AdOp::H, b));
        }
        w
    }

    /// `|n| + |m|`.
    pub fn degree(&self) -> usize {
        self.n.iter().sum::<usize>() + self.m.iter().sum::<usize>()
    }
}

fn factorial(n: usize) -> i64 {
    (1..=n as i64).product()
}

/// All tuples in `ℤ₊^k` with sum at most `total`, in lexicographic order.
fn bounded_tuples(k: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, total: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == k {
            out.push(prefix.clone());
            return;
        }
        for v in 0..=total {
            prefix.push(v);
            rec(k, total - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, total, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Every term with `|n| + |m| ≤ r − 1`, ordered by `k`, then `n`, then `m`.
pub fn bchd_terms(step: usize) -> Vec<BchdTerm> {
    let mut out = Vec::new();
    if step < 2 {
        return out;
    }
    let max = step - 1;
    for k in 1..=max {
        for n in bounded_tuples(k, max) {
            let n_abs: usize = n.iter().sum();
            for m in bounded_tuples(k, max - n_abs) {
                if n.iter().zip(&m).any(|(a, b)| a + b == 0) {
                    continue;
                }
                let m_fact: i64 = m.iter().map(|&x| factorial(x)).product();
                let n_fact: i64 = n.iter().map(|&x| factorial(x)).product();
                let sign = if k % 2 == 0 { 1 } else { -1 };
                let denom = (k as i64 + 1) * m_fact * n_fact * (n_abs as i64 + 1);
                out.push(BchdTerm {
                    k,
                    n: n.clone(),
                    m,
                    coefficient: Rational64::new(sign, denom),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
struct TrieNode {
    coef: f64,
    children: [Option<usize>; 2],
}

/// The compiled group law for algebras of step at most `r`.
#[derive(Debug, Clone)]
pub struct BchdLaw {
    step: usize,
    terms: Vec<BchdTerm>,
    words: Vec<(Vec<AdOp>, Rational64)>,
    /// Trie over reversed words; node 0 is the root (the bare `g`, coefficient 0).
    nodes: Vec<TrieNode>,
    /// `d_a`: coefficient of `ad_g^a ad_h g`, for the left-translation differential.
    linear: Vec<f64>,
}

impl BchdLaw {
    pub fn new(step: usize) -> Result<Self> {
        if step == 0 {
            return Err(Error::Argument("step must be >= 1".into()));
        }
        let terms = bchd_terms(step);
        let mut merged: BTreeMap<Vec<AdOp>, Rational64> = BTreeMap::new();
        for t in &terms {
            let w = t.word();
            // ad_g g = 0
            if w.last() == Some(&AdOp::G) {
                continue;
            }
            *merged.entry(w).or_insert_with(Rational64::zero) += t.coefficient;
        }
        let words: Vec<(Vec<AdOp>, Rational64)> =
            merged.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        let mut nodes = vec![TrieNode {
            coef: 0.0,
            children: [None, None],
        }];
        let mut linear = vec![0.0; step];
        for (w, c) in &words {
            let cf = c.to_f64().expect("small rational");
            let mut cur = 0;
            for op in w.iter().rev() {
                let slot = *op as usize;
                cur = match nodes[cur].children[slot] {
                    Some(n) => n,
                    None => {
                        nodes.push(TrieNode {
                            coef: 0.0,
                            children: [None, None],
                        });
                        let id = nodes.len() - 1;
                        nodes[cur].children[slot] = Some(id);
                        id
                    }
                };
            }
            nodes[cur].coef += cf;
            if w.iter().filter(|&&o| o == AdOp::H).count() == 1 {
                linear[w.len() - 1] += cf;
            }
        }
        Ok(Self {
            step,
            terms,
            words,
            nodes,
            linear,
        })
    }

    /// Law matching the declared step of `alg`.
    pub fn for_algebra(alg: &LieAlgebra) -> Result<Self> {
        Self::new(alg.step())
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn terms(&self) -> &[BchdTerm] {
        &self.terms
    }

    /// Distinct nonvanishing ad-words with merged coefficients, leftmost operator first.
    pub fn words(&self) -> &[(Vec<AdOp>, Rational64)] {
        &self.words
    }

    fn check(&self, alg: &LieAlgebra) -> Result<()> {
        if alg.step() > self.step {
            return Err(Error::Argument(format!(
                "law of step {} cannot multiply in an algebra of step {}",
                self.step,
                alg.step()
            )));
        }
        Ok(())
    }

    /// `g·h`.
    pub fn multiply(&self, alg: &LieAlgebra, g: &[f64], h: &[f64]) -> Result<Vector> {
        self.check(alg)?;
        conform("group element", alg.dim(), g.len())?;
        conform("group element", alg.dim(), h.len())?;
        let mut out = vec![0.0; alg.dim()];
        let mut scratch = BchdScratch::new(alg.dim(), self.step);
        self.multiply_into(alg, g, h, &mut out, &mut scratch);
        Ok(out)
    }

    /// Unchecked `out = g·h`.
    pub(crate) fn multiply_into(
        &self,
        alg: &LieAlgebra,
        g: &[f64],
        h: &[f64],
        out: &mut [f64],
        scratch: &mut BchdScratch,
    ) {
        for ((o, a), b) in out.iter_mut().zip(g).zip(h) {
            *o = a + b;
        }
        if self.nodes.len() == 1 || alg.is_abelian() {
            return;
        }
        scratch.levels[0].copy_from_slice(g);
        self.visit(alg, 0, 0, g, h, out, scratch);
    }

    #[allow(clippy::too_many_arguments)]
    fn visit(
        &self,
        alg: &LieAlgebra,
        node: usize,
        depth: usize,
        g: &[f64],
        h: &[f64],
        out: &mut [f64],
        scratch: &mut BchdScratch,
    ) {
        for (slot, child) in self.nodes[node].children.iter().enumerate() {
            let Some(child) = *child else { continue };
            let (lo, hi) = scratch.levels.split_at_mut(depth + 1);
            let x = if slot == AdOp::G as usize { g } else { h };
            alg.bracket_into(x, &lo[depth], &mut hi[0]);
            if hi[0].iter().all(|v| *v == 0.0) {
                continue;
            }
            let c = self.nodes[child].coef;
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(&hi[0]) {
                    *o += c * v;
                }
            }
            self.visit(alg, child, depth + 1, g, h, out, scratch);
        }
    }

    /// `d/dε g·(εv)` at `ε = 0`, the left translation `L_{g*} v`.
    pub fn left_translation_differential(
        &self,
        alg: &LieAlgebra,
        g: &[f64],
        v: &[f64],
    ) -> Result<Vector> {
        self.check(alg)?;
        conform("group element", alg.dim(), g.len())?;
        conform("tangent vector", alg.dim(), v.len())?;
        let mut out = v.to_vec();
        let mut cur = alg.bracket(v, g)?;
        let mut tmp = alg.zero();
        for &d in &self.linear {
            if cur.iter().all(|x| *x == 0.0) {
                break;
            }
            for (o, c) in out.iter_mut().zip(&cur) {
                *o += d * c;
            }
            alg.bracket_into(g, &cur, &mut tmp);
            std::mem::swap(&mut cur, &mut tmp);
        }
        Ok(out)
    }
}

/// Per-call buffers for [`BchdLaw::multiply_into`].
#[derive(Debug, Clone)]
pub(crate) struct BchdScratch {
    levels: Vec<Vector>,
}

impl BchdScratch {
    pub(crate) fn new(dim: usize, step: usize) -> Self {
        Self {
            levels: vec![vec![0.0; dim]; step + 1],
        }
    }
}

/// A point of the group, stored in exponential coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    coords: Vector,
}

impl GroupElement {
    pub fn new(alg: &LieAlgebra, coords: Vector) -> Result<Self> {
        conform("group element", alg.dim(), coords.len())?;
        Ok(Self { coords })
    }

    pub fn identity(alg: &LieAlgebra) -> Self {
        Self { coords: alg.zero() }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vector {
        self.coords
    }

    /// `g⁻¹ = −g`.
    pub fn inverse(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, law: &BchdLaw, alg: &LieAlgebra, other: &GroupElement) -> Result<Self> {
        Ok(Self {
            coords: law.multiply(alg, &self.coords, &other.coords)?,
        })
    }
}

/// `−g`.
pub fn inverse(g: &[f64]) -> Vector {
    g.iter().map(|x| -x).collect()
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order.max(1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// Coefficients `c_ℓ = (−1)^ℓ/(ℓ+1)!`, `ℓ = 1..r−1`, of the left logarithmic
/// derivative `L_{φ⁻¹*} φ′ = φ′ + Σ c_ℓ ad_φ^ℓ φ′` in exponential coordinates.
pub fn left_log_derivative_coefficients(step: usize) -> Vec<Rational64> {
    (1..step)
        .map(|l| {
            let sign = if l % 2 == 0 { 1 } else { -1 };
            Rational64::new(sign, factorial(l + 1))
        })
        .collect()
}

fn left_coefficients(alg: &LieAlgebra) -> Vec<f64> {
    left_log_derivative_coefficients(alg.step())
        .iter()
        .map(|c| c.to_f64().expect("small rational"))
        .collect()
}

/// `‖φ′ + Σ c_ℓ ad_φ^ℓ φ′‖`, the speed of a curve measured by the left-invariant metric.
fn left_speed(alg: &LieAlgebra, coeffs: &[f64], phi: &[f64], vel: &[f64], buf: &mut [Vector; 3]) -> f64 {
    let [acc, cur, tmp] = buf;
    acc.copy_from_slice(vel);
    cur.copy_from_slice(vel);
    for &c in coeffs {
        alg.bracket_into(phi, cur, tmp);
        std::mem::swap(cur, tmp);
        for (a, x) in acc.iter_mut().zip(cur.iter()) {
            *a += c * x;
        }
    }
    crate::algebra::norm(acc)
}

/// Length of the piecewise-linear path (in exponential coordinates) through `knots`,
/// with `order` Gauss–Legendre nodes per segment.
pub fn path_length_with(alg: &LieAlgebra, knots: &[Vector], order: usize) -> Result<f64> {
    if knots.len() < 2 {
        return Err(Error::Argument("a path needs at least two knots".into()));
    }
    if order == 0 {
        return Err(Error::Argument("quadrature order must be positive".into()));
    }
    for k in knots {
        conform("path knot", alg.dim(), k.len())?;
    }
    let coeffs = left_coefficients(alg);
    let (nodes, weights) = gauss_legendre(order);
    let d = alg.dim();
    let mut phi = vec![0.0; d];
    let mut vel = vec![0.0; d];
    let mut buf = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    let mut total = 0.0;
    for seg in knots.windows(2) {
        for ((v, a), b) in vel.iter_mut().zip(&seg[0]).zip(&seg[1]) {
            *v = b - a;
        }
        if vel.iter().all(|v| *v == 0.0) {
            continue;
        }
        for (&s, &w) in nodes.iter().zip(&weights) {
            for ((p, a), v) in phi.iter_mut().zip(&seg[0]).zip(&vel) {
                *p = a + s * v;
            }
            total += w * left_speed(alg, &coeffs, &phi, &vel, &mut buf);
        }
    }
    Ok(total)
}

/// Length of a smooth curve on `[0, 1]` given by `curve(s) = (φ(s), φ′(s))`, using
/// `segments` equal pieces with `order` Gauss–Legendre nodes each.
pub fn curve_length<F>(alg: &LieAlgebra, curve: F, segments: usize, order: usize) -> Result<f64>
where
    F: Fn(f64) -> (Vector, Vector),
{
    if segments == 0 || order == 0 {
        return Err(Error::Argument("segments and order must be positive".into()));
    }
    let coeffs = left_coefficients(alg);
    let (nodes, weights) = gauss_legendre(order);
    let d = alg.dim();
    let mut buf = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];
    let width = 1.0 / segments as f64;
    let mut total = 0.0;
    for j in 0..segments {
        for (&s, &w) in nodes.iter().zip(&weights) {
            let (phi, vel) = curve((j as f64 + s) * width);
            conform("curve point", d, phi.len())?;
            conform("curve velocity", d, vel.len())?;
            total += w * width * left_speed(alg, &coeffs, &phi, &vel, &mut buf);
        }
    }
    Ok(total)
}

/// [`path_length_with`] at the default 16 nodes per segment.
pub fn path_length(alg: &LieAlgebra, knots: &[Vector]) -> Result<f64> {
    path_length_with(alg, knots, 16)
}

/// Settings of the coordinate-descent distance estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceConfig {
    pub interior_knots: usize,
    pub iterations: usize,
    pub seed: u64,
    pub quadrature_order: usize,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            interior_knots: 6,
            iterations: 200,
            seed: 0,
            quadrature_order: 16,
        }
    }
}

/// Upper bound on the Riemannian distance `d(e, h)`.
///
/// Returns `min(‖h‖, L)` where `L` is the shortest piecewise-linear path found by
/// seeded coordinate descent over the interior knots. Every candidate is a path
/// from `e` to `h`, so the result is always an upper bound.
pub fn distance_upper(alg: &LieAlgebra, h: &[f64], cfg: &DistanceConfig) -> Result<f64> {
    conform("group element", alg.dim(), h.len())?;
    let straight = crate::algebra::norm(h);
    if straight == 0.0 || alg.is_abelian() || cfg.interior_knots == 0 || cfg.iterations == 0 {
        return Ok(straight);
    }
    let d = alg.dim();
    let k = cfg.interior_knots;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let amp = 0.1 * straight;
    let mut x: Vec<f64> = (0..k * d)
        .map(|i| {
            let frac = (i / d + 1) as f64 / (k + 1) as f64;
            frac * h[i % d] + amp * (2.0 * rng.random::<f64>() - 1.0)
        })
        .collect();
    let eval = |x: &[f64]| -> Result<f64> {
        let mut knots = Vec::with_capacity(k + 2);
        knots.push(alg.zero());
        knots.extend(x.chunks(d).map(|c| c.to_vec()));
        knots.push(h.to_vec());
        path_length_with(alg, &knots, cfg.quadrature_order)
    };
    let mut best = eval(&x)?;
    let mut step = 0.25 * straight;
    let floor = 1e-9 * straight;
    for _ in 0..cfg.iterations {
        let mut improved = false;
        for i in 0..x.len() {
            let base = x[i];
            for delta in [step, -step] {
                x[i] = base + delta;
                let v = eval(&x)?;
                if v < best {
                    best = v;
                    improved = true;
                    break;
                }
                x[i] = base;
            }
        }
        if !improved {
            step *= 0.5;
            if step < floor {
                break;
            }
        }
    }
    Ok(best.min(straight))
}

/// Sign-aware rational formatting used by tables: `(numerator, denominator)` with a
/// positive denominator.
pub fn rational_parts(r: &Rational64) -> (i64, i64) {
    let (n, d) = (*r.numer(), *r.denom());
    if d.is_negative() {
        (-n, -d)
    } else {
        (n, d)
    }
}

impl Default for BchdLaw {
    fn default() -> Self {
        Self::new(1).expect("step 1 law")
    }
}
