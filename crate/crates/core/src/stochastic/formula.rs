use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::Zero;

use super::signature::{PatternTrie, DEFAULT_SIGNATURE_LIMIT};
use super::BrownianPath;
use crate::algebra::{LieAlgebra, Vector};
use crate::bchd::{rational_parts, BchdLaw, BchdScratch, GroupElement};
use crate::combinatorics::{
    contraction_operator_with, f_alpha, multi_indices, permutations, strichartz_coefficient,
    AlphaIndex, ContractionOperator, ContractionOptions, FAlpha,
};
use crate::error::{conform, Error, Result};

fn to_f64(r: &Rational64) -> f64 {
    let (n, d) = rational_parts(r);
    n as f64 / d as f64
}

/// One `(n, σ, α)` summand of the Brownian motion expansion.
#[derive(Debug, Clone)]
pub struct IntegralTermSpec {
    pub n: usize,
    pub sigma: Vec<usize>,
    pub alpha: AlphaIndex,
    /// `c_n^σ / 2^{n−m}` with `m = |α|`.
    pub prefactor: Rational64,
    pub f_alpha: FAlpha,
    pub operator: ContractionOperator,
    /// The operator vanishes identically.
    pub skippable: bool,
}

/// All summands for `n = 1..=step`, `σ ∈ 𝒮ₙ`, `α ∈ 𝒥ₙ`.
#[derive(Debug, Clone)]
pub struct TermTable {
    dim: usize,
    step: usize,
    terms: Vec<IntegralTermSpec>,
}

impl TermTable {
    pub fn new(alg: &LieAlgebra) -> Result<Self> {
        Self::with_options(alg, &ContractionOptions::default())
    }

    pub fn with_options(alg: &LieAlgebra, opts: &ContractionOptions) -> Result<Self> {
        let step = alg.step().max(1);
        let mut terms = Vec::new();
        for n in 1..=step {
            let alphas: Vec<(AlphaIndex, FAlpha)> = multi_indices(n)
                .into_iter()
                .map(|a| {
                    let f = f_alpha(&a);
                    (a, f)
                })
                .collect();
            for sigma in permutations(n) {
                let c = strichartz_coefficient(&sigma)?;
                for (alpha, fa) in &alphas {
                    let shift = n - alpha.len();
                    let prefactor = c / Rational64::from_integer(1i64 << shift);
                    let operator = contraction_operator_with(alg, &sigma, alpha, opts)?;
                    let skippable = operator.is_zero();
                    terms.push(IntegralTermSpec {
                        n,
                        sigma: sigma.clone(),
                        alpha: alpha.clone(),
                        prefactor,
                        f_alpha: fa.clone(),
                        operator,
                        skippable,
                    });
                }
            }
        }
        Ok(Self {
            dim: alg.dim(),
            step,
            terms,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn terms(&self) -> &[IntegralTermSpec] {
        &self.terms
    }

    pub fn active_terms(&self) -> impl Iterator<Item = &IntegralTermSpec> {
        self.terms.iter().filter(|t| !t.skippable)
    }
}

/// All operators sharing a weight pattern `d` and a power `t^a`, summed.
#[derive(Debug, Clone)]
struct Group {
    pattern: usize,
    power: u32,
    /// Sum of the dense operators, row-major `dim^p × dim`.
    dense: Option<Vec<f64>>,
    /// `(weight, term)` pairs for lazily stored operators.
    lazy: Vec<(f64, usize)>,
}

/// The expansion compiled for repeated evaluation on paths.
///
/// Each summand is split into monomials `t^a s₁^{d₁}⋯s_p^{d_p}` of
/// `b^a_α t^a f̃_{α,a}`; operators are merged per `(d, a)` so that a path costs
/// one weighted signature per distinct pattern `d` and one contraction per group.
#[derive(Debug, Clone)]
pub struct BmFormula {
    table: TermTable,
    patterns: Vec<Vec<u32>>,
    groups: Vec<Group>,
    trie: PatternTrie,
}

impl BmFormula {
    pub fn new(alg: &LieAlgebra) -> Result<Self> {
        Self::with_options(alg, &ContractionOptions::default())
    }

    /// Checks the signature memory guard before the term table is built.
    pub fn with_options(alg: &LieAlgebra, opts: &ContractionOptions) -> Result<Self> {
        let depth = if alg.is_abelian() { 1 } else { alg.step() };
        if alg
            .dim()
            .checked_pow(depth as u32)
            .is_none_or(|s| s > DEFAULT_SIGNATURE_LIMIT)
        {
            return Err(Error::Resource(format!(
                "signature level {depth} in dimension {} exceeds {DEFAULT_SIGNATURE_LIMIT} entries",
                alg.dim()
            )));
        }
        Self::from_table(TermTable::with_options(alg, opts)?)
    }

    pub fn from_table(table: TermTable) -> Result<Self> {
        let mut index: BTreeMap<(Vec<u32>, u32), usize> = BTreeMap::new();
        let mut patterns: Vec<Vec<u32>> = Vec::new();
        let mut groups: Vec<Group> = Vec::new();
        for (ti, term) in table.terms.iter().enumerate() {
            if term.skippable {
                continue;
            }
            let p = term.alpha.p();
            for (a, (b, ftilde)) in term.f_alpha.decomposition.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                for (e, coef) in ftilde.terms() {
                    let w = to_f64(&(term.prefactor * *b * *coef));
                    let pattern = e[..p].to_vec();
                    let key = (pattern.clone(), a as u32);
                    let gi = *index.entry(key).or_insert_with(|| {
                        let pi = match patterns.iter().position(|x| *x == pattern) {
                            Some(i) => i,
                            None => {
                                patterns.push(pattern.clone());
                                patterns.len() - 1
                            }
                        };
                        groups.push(Group {
                            pattern: pi,
                            power: a as u32,
                            dense: None,
                            lazy: Vec::new(),
                        });
                        groups.len() - 1
                    });
                    let g = &mut groups[gi];
                    match term.operator.dense() {
                        Some(src) => {
                            let dst = g.dense.get_or_insert_with(|| vec![0.0; src.len()]);
                            for (d, s) in dst.iter_mut().zip(src) {
                                *d += w * s;
                            }
                        }
                        None => g.lazy.push((w, ti)),
                    }
                }
            }
        }
        let trie = PatternTrie::new(table.dim, &patterns, DEFAULT_SIGNATURE_LIMIT)?;
        Ok(Self {
            table,
            patterns,
            groups,
            trie,
        })
    }

    /// Overrides the signature memory guard (entries per tensor).
    pub fn with_signature_limit(mut self, limit: usize) -> Result<Self> {
        self.trie = PatternTrie::new(self.table.dim, &self.patterns, limit)?;
        Ok(self)
    }

    pub fn table(&self) -> &TermTable {
        &self.table
    }

    /// Distinct signature weight patterns the formula consumes.
    pub fn patterns(&self) -> &[Vec<u32>] {
        &self.patterns
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// `g_{t_end}` in exponential coordinates.
    pub fn evaluate(&self, path: &BrownianPath) -> Result<Vector> {
        conform("path dimension", self.table.dim, path.dim())?;
        let dim = self.table.dim;
        let trie = &self.trie;
        let mut state = trie.zero_state();
        trie.run(path, &mut state);
        let t = path.t_end();
        let mut out = vec![0.0; dim];
        let mut tmp = vec![0.0; dim];
        for g in &self.groups {
            let w = &state[trie.leaf(g.pattern)];
            let scale = t.powi(g.power as i32);
            if let Some(data) = &g.dense {
                for (row, &x) in data.chunks_exact(dim).zip(w) {
                    let c = scale * x;
                    if c != 0.0 {
                        for (o, r) in out.iter_mut().zip(row) {
                            *o += c * r;
                        }
                    }
                }
            }
            for &(wt, ti) in &g.lazy {
                self.table.terms[ti].operator.contract(w, &mut tmp)?;
                for (o, v) in out.iter_mut().zip(&tmp) {
                    *o += scale * wt * v;
                }
            }
        }
        Ok(out)
    }
}

/// Brownian motion on the group at `t_end` from the iterated-integral expansion.
pub fn group_bm_formula(alg: &LieAlgebra, path: &BrownianPath) -> Result<GroupElement> {
    let coords = BmFormula::new(alg)?.evaluate(path)?;
    GroupElement::new(alg, coords)
}

/// Product of the increments `exp(ΔB₁)⋯exp(ΔB_N)` under the group law.
#[derive(Debug, Clone)]
pub struct EulerScheme {
    alg: LieAlgebra,
    law: BchdLaw,
}

impl EulerScheme {
    pub fn new(alg: &LieAlgebra) -> Result<Self> {
        Ok(Self {
            alg: alg.clone(),
            law: BchdLaw::for_algebra(alg)?,
        })
    }

    pub fn evaluate(&self, path: &BrownianPath) -> Result<Vector> {
        let dim = self.alg.dim();
        conform("path dimension", dim, path.dim())?;
        let mut g = vec![0.0; dim];
        let mut next = vec![0.0; dim];
        let mut scratch = BchdScratch::new(dim, self.law.step());
        for j in 0..path.steps() {
            self.law
                .multiply_into(&self.alg, &g, path.increment(j), &mut next, &mut scratch);
            std::mem::swap(&mut g, &mut next);
        }
        Ok(g)
    }
}

pub fn group_bm_euler(alg: &LieAlgebra, path: &BrownianPath) -> Result<GroupElement> {
    let coords = EulerScheme::new(alg)?.evaluate(path)?;
    GroupElement::new(alg, coords)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Solution at time 1 of `ġ = L_{g*} Ḃ` for the piecewise-linear driver with the
/// given segment increments (equal durations).
///
/// Each `n`-fold simplex integral is a finite sum over nondecreasing assignments
/// of `s₁ < … < s_n` to segments; `c` variables in one segment contribute
/// `1/c!` times the segment increments (durations cancel).
pub fn strichartz_smooth(alg: &LieAlgebra, segments: &[Vector]) -> Result<GroupElement> {
    let dim = alg.dim();
    for s in segments {
        conform("segment increment", dim, s.len())?;
    }
    let mut g = alg.zero();
    if segments.is_empty() {
        return GroupElement::new(alg, g);
    }
    let k = segments.len();
    let opts = ContractionOptions::default();
    for n in 1..=alg.step().max(1) {
        let ones = AlphaIndex::new(vec![1; n])?;
        let ops: Vec<(f64, ContractionOperator)> = permutations(n)
            .into_iter()
            .map(|sigma| {
                let c = strichartz_coefficient(&sigma)?;
                let op = contraction_operator_with(alg, &sigma, &ones, &opts)?;
                Ok((to_f64(&c), op))
            })
            .collect::<Result<_>>()?;
        if ops.iter().all(|(_, op)| op.is_zero()) {
            continue;
        }
        for assign in nondecreasing_tuples(n, k) {
            let mut weight = 1.0;
            let mut run = 1;
            for i in 1..=n {
                if i < n && assign[i] == assign[i - 1] {
                    run += 1;
                } else {
                    weight /= factorial(run);
                    run = 1;
                }
            }
            let args: Vec<&[f64]> = assign.iter().map(|&j| segments[j].as_slice()).collect();
            for (c, op) in &ops {
                if op.is_zero() {
                    continue;
                }
                let v = op.apply(&args)?;
                for (o, x) in g.iter_mut().zip(&v) {
                    *o += c * weight * x;
                }
            }
        }
    }
    GroupElement::new(alg, g)
}

/// All nondecreasing `n`-tuples over `0..k`, lexicographically.
fn nondecreasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    loop {
        out.push(cur.clone());
        let Some(i) = (0..n).rev().find(|&i| cur[i] + 1 < k) else {
            return out;
        };
        let v = cur[i] + 1;
        cur[i..].iter_mut().for_each(|x| *x = v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{
        abelian, heisenberg3, make_free_nilpotent, make_heisenberg_like, make_random_hs,
        standard_symplectic,
    };
    use crate::stochastic::{sample_path, sample_path_stream};

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn abelian_is_endpoint() {
        let alg = abelian(3).unwrap();
        let p = sample_path(3, 2.0, 50, 1).unwrap();
        let g = group_bm_formula(&alg, &p).unwrap();
        assert!(max_diff(g.coords(), &p.endpoint()) < 1e-14);
        let e = group_bm_euler(&alg, &p).unwrap();
        assert!(max_diff(e.coords(), &p.endpoint()) < 1e-14);
    }

    #[test]
    fn heisenberg_matches_euler_and_levy_area() {
        let alg = heisenberg3();
        let f = BmFormula::new(&alg).unwrap();
        let euler = EulerScheme::new(&alg).unwrap();
        for seed in 0..5 {
            let p = sample_path(3, 1.0, 256, seed).unwrap();
            let g = f.evaluate(&p).unwrap();
            let e = euler.evaluate(&p).unwrap();
            assert!(max_diff(&g, &e) < 1e-12);
            let mut area = 0.0;
            let (mut x, mut y) = (0.0, 0.0);
            for j in 0..p.steps() {
                let d = p.increment(j);
                area += x * d[1] - y * d[0];
                x += d[0];
                y += d[1];
            }
            assert!((g[2] - p.endpoint()[2] - 0.5 * area).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_increments_give_identity() {
        let alg = make_free_nilpotent(2, 4).unwrap();
        let p = BrownianPath::from_increments(alg.dim(), 1.0, vec![0.0; alg.dim() * 16]).unwrap();
        let g = group_bm_formula(&alg, &p).unwrap();
        assert!(g.coords().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn paired_terms_vanish_at_step_two() {
        let omega = standard_symplectic(4).unwrap();
        let alg = make_heisenberg_like(4, 1, &omega).unwrap();
        let table = TermTable::new(&alg).unwrap();
        assert_eq!(table.terms().len(), 1 + 2 * 2);
        for t in table.terms() {
            if t.alpha.q() >= 1 {
                assert!(t.skippable, "{} {:?}", t.alpha, t.sigma);
            }
        }
        assert_eq!(table.active_terms().count(), 3);
    }

    #[test]
    fn table_size_and_prefactors() {
        let alg = make_free_nilpotent(2, 3).unwrap();
        let table = TermTable::new(&alg).unwrap();
        // Σ n!·|𝒥ₙ| for n = 1, 2, 3 with |𝒥ₙ| = 1, 2, 3.
        assert_eq!(table.terms().len(), 1 + 4 + 18);
        let t = &table.terms()[0];
        assert_eq!(t.prefactor, Rational64::from_integer(1));
        for t in table.terms() {
            let c = strichartz_coefficient(&t.sigma).unwrap();
            let shift = t.n - t.alpha.len();
            assert_eq!(t.prefactor * Rational64::from_integer(1 << shift), c);
        }
    }

    #[test]
    fn smooth_single_segment() {
        let alg = make_free_nilpotent(2, 3).unwrap();
        let v = vec![0.3, -1.2, 0.5, 0.1, 0.7];
        let g = strichartz_smooth(&alg, &[v.clone()]).unwrap();
        assert!(max_diff(g.coords(), &v) < 1e-15);
        let id = strichartz_smooth(&alg, &[]).unwrap();
        assert_eq!(id.coords(), &[0.0; 5]);
    }

    #[test]
    fn smooth_heisenberg_two_segments() {
        let alg = heisenberg3();
        let g = strichartz_smooth(&alg, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!(max_diff(g.coords(), &[1.0, 1.0, 0.5]) < 1e-10);
    }

    #[test]
    fn smooth_matches_product_of_exponentials() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for alg in [
            make_free_nilpotent(2, 3).unwrap(),
            make_free_nilpotent(2, 4).unwrap(),
            make_random_hs(8, 4, 1.0, 3).unwrap(),
        ] {
            let law = BchdLaw::for_algebra(&alg).unwrap();
            let segs: Vec<Vector> = (0..3)
                .map(|_| {
                    let mut v = alg.zero();
                    for x in v.iter_mut() {
                        *x = rng.random_range(-1.0..1.0);
                    }
                    v
                })
                .collect();
            let mut prod = alg.zero();
            for s in &segs {
                prod = law.multiply(&alg, &prod, s).unwrap();
            }
            let g = strichartz_smooth(&alg, &segs).unwrap();
            assert!(max_diff(g.coords(), &prod) < 1e-8, "{}", alg.label());
        }
    }

    #[test]
    fn rotation_equivariance_at_step_two() {
        let omega = standard_symplectic(2).unwrap();
        let alg = make_heisenberg_like(2, 1, &omega).unwrap();
        let f = BmFormula::new(&alg).unwrap();
        let p = sample_path(3, 1.0, 64, 11).unwrap();
        let (c, s) = (0.6f64, 0.8f64);
        let rotated: Vec<f64> = p
            .increments()
            .chunks_exact(3)
            .flat_map(|r| [c * r[0] - s * r[1], s * r[0] + c * r[1], r[2]])
            .collect();
        let q = BrownianPath::from_increments(3, 1.0, rotated).unwrap();
        let a = f.evaluate(&p).unwrap();
        let b = f.evaluate(&q).unwrap();
        assert!((a[2] - b[2]).abs() < 1e-10);
    }

    #[test]
    fn step_three_converges_to_euler() {
        let alg = make_free_nilpotent(2, 3).unwrap();
        let f = BmFormula::new(&alg).unwrap();
        let euler = EulerScheme::new(&alg).unwrap();
        let mse = |steps: usize| {
            let paths = 200;
            (0..paths)
                .map(|k| {
                    let p = sample_path_stream(5, 1.0, steps, 21, k).unwrap();
                    let d = max_diff(&f.evaluate(&p).unwrap(), &euler.evaluate(&p).unwrap());
                    d * d
                })
                .sum::<f64>()
                / paths as f64
        };
        let coarse = mse(16);
        let fine = mse(256);
        assert!(fine < coarse / 4.0, "{coarse} {fine}");
    }

    #[test]
    fn lazy_operators_agree_with_dense() {
        let alg = make_random_hs(6, 3, 1.0, 2).unwrap();
        let dense = BmFormula::new(&alg).unwrap();
        let lazy = BmFormula::with_options(
            &alg,
            &ContractionOptions {
                dense_limit: 40,
                allow_lazy: true,
            },
        )
        .unwrap();
        let p = sample_path(6, 1.0, 32, 3).unwrap();
        let a = dense.evaluate(&p).unwrap();
        let b = lazy.evaluate(&p).unwrap();
        assert!(max_diff(&a, &b) < 1e-12);
    }
}
