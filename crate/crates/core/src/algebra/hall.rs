//! Hall basis of the free nilpotent Lie algebra.
//!
//! Hall elements are generated degree by degree. Generators are ordered with
//! `e_1` largest among degree-one elements, higher degrees are larger than lower
//! ones, and within a degree the order is creation order. A bracket `[u, v]` is
//! a Hall element iff `u > v` and, when `u = [x, y]`, `y ≤ v`. With this order
//! the degree-two elements are `[e_i, e_j]` for `i < j` and the degree-three
//! elements on two generators are `[[e_1, e_2], e_1]` and `[[e_1, e_2], e_2]`.
//!
//! Each Hall element is expanded in the tensor algebra (`[a, b] = ab − ba`) with
//! exact rational coefficients; brackets of basis elements are re-expressed in
//! the basis by exact Gauss–Jordan elimination per degree.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

type Word = Vec<u16>;
type LiePoly = BTreeMap<Word, Rational64>;

/// One element of the Hall set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HallElement {
    Generator(usize),
    /// `[left, right]`, indices into the basis.
    Bracket(usize, usize),
}

/// Hall basis of the free nilpotent Lie algebra on `generators` letters truncated at `step`.
#[derive(Debug, Clone)]
pub struct HallBasis {
    pub generators: usize,
    pub step: usize,
    pub elements: Vec<HallElement>,
    pub degrees: Vec<usize>,
    expansions: Vec<LiePoly>,
}

impl HallBasis {
    pub fn new(generators: usize, step: usize) -> Result<Self> {
        if generators == 0 || step == 0 {
            return Err(Error::Argument(
                "free nilpotent algebra needs at least one generator and step >= 1".into(),
            ));
        }
        if generators > u16::MAX as usize {
            return Err(Error::Argument("too many generators".into()));
        }
        let mut elements = Vec::new();
        let mut degrees = Vec::new();
        let mut expansions: Vec<LiePoly> = Vec::new();
        // rank[idx]: position in the Hall order.
        let mut rank: Vec<usize> = Vec::new();
        for g in 0..generators {
            elements.push(HallElement::Generator(g));
            degrees.push(1);
            let mut p = LiePoly::new();
            p.insert(vec![g as u16], Rational64::one());
            expansions.push(p);
            rank.push(generators - 1 - g);
        }
        let mut next_rank = generators;
        for deg in 2..=step {
            let count_before = elements.len();
            let mut created = Vec::new();
            for u in 0..count_before {
                for v in 0..count_before {
                    if degrees[u] + degrees[v] != deg || rank[u] <= rank[v] {
                        continue;
                    }
                    if let HallElement::Bracket(_, y) = elements[u] {
                        if rank[y] > rank[v] {
                            continue;
                        }
                    }
                    created.push((u, v));
                }
            }
            // Creation order: by index of u, then index of v.
            created.sort();
            for (u, v) in created {
                let p = commutator(&expansions[u], &expansions[v]);
                elements.push(HallElement::Bracket(u, v));
                degrees.push(deg);
                expansions.push(p);
                rank.push(next_rank);
                next_rank += 1;
            }
        }
        Ok(Self {
            generators,
            step,
            elements,
            degrees,
            expansions,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Human-readable bracket expression of element `idx` with 1-based generators.
    pub fn describe(&self, idx: usize) -> String {
        match self.elements[idx] {
            HallElement::Generator(g) => format!("e{}", g + 1),
            HallElement::Bracket(u, v) => format!("[{},{}]", self.describe(u), self.describe(v)),
        }
    }

    /// Exact structure constants `[b_i, b_j] = Σ_k c_{ijk} b_k` over the Hall basis.
    pub fn structure_constants(&self) -> Result<Vec<(usize, usize, usize, Rational64)>> {
        let n = self.len();
        let mut solvers: BTreeMap<usize, DegreeSolver> = BTreeMap::new();
        for deg in 2..=self.step {
            let idx: Vec<usize> = (0..n).filter(|&i| self.degrees[i] == deg).collect();
            if !idx.is_empty() {
                solvers.insert(deg, DegreeSolver::new(&idx, &self.expansions)?);
            }
        }
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let deg = self.degrees[i] + self.degrees[j];
                if i == j || deg > self.step {
                    continue;
                }
                let p = commutator(&self.expansions[i], &self.expansions[j]);
                if p.is_empty() {
                    continue;
                }
                let solver = &solvers[&deg];
                for (k, c) in solver.solve(&p)? {
                    out.push((i, j, k, c));
                }
            }
        }
        Ok(out)
    }
}

fn commutator(a: &LiePoly, b: &LiePoly) -> LiePoly {
    let mut out = LiePoly::new();
    for (wa, ca) in a {
        for (wb, cb) in b {
            let c = *ca * *cb;
            let mut ab = wa.clone();
            ab.extend_from_slice(wb);
            *out.entry(ab).or_insert_with(Rational64::zero) += c;
            let mut ba = wb.clone();
            ba.extend_from_slice(wa);
            *out.entry(ba).or_insert_with(Rational64::zero) -= c;
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Expresses homogeneous Lie polynomials of one degree in the Hall elements of that degree.
struct DegreeSolver {
    basis: Vec<usize>,
    pivot_words: Vec<Word>,
    // inverse of the square matrix [expansion_b(pivot_word_r)]
    inverse: Vec<Vec<Rational64>>,
    expansions: Vec<LiePoly>,
}

impl DegreeSolver {
    fn new(basis: &[usize], expansions: &[LiePoly]) -> Result<Self> {
        let m = basis.len();
        let words: Vec<Word> = {
            let mut all: Vec<Word> = basis
                .iter()
                .flat_map(|&b| expansions[b].keys().cloned())
                .collect();
            all.sort();
            all.dedup();
            all
        };
        // rows = words, cols = basis elements
        let mut a: Vec<Vec<Rational64>> = words
            .iter()
            .map(|w| {
                basis
                    .iter()
                    .map(|&b| expansions[b].get(w).copied().unwrap_or_else(Rational64::zero))
                    .collect()
            })
            .collect();
        // Row echelon on the transpose to pick m independent rows (words).
        let mut pivot_rows = Vec::with_capacity(m);
        let mut work = a.clone();
        let mut col = 0;
        let mut used = vec![false; words.len()];
        while col < m {
            let pick = (0..words.len()).find(|&r| !used[r] && !work[r][col].is_zero());
            let r = pick.ok_or_else(|| {
                Error::Construction("Hall elements are linearly dependent".into())
            })?;
            used[r] = true;
            pivot_rows.push(r);
            let pivot = work[r][col];
            for rr in 0..words.len() {
                if rr != r && !work[rr][col].is_zero() {
                    let f = work[rr][col] / pivot;
                    for cc in col..m {
                        let v = work[r][cc];
                        work[rr][cc] -= f * v;
                    }
                }
            }
            col += 1;
        }
        let square: Vec<Vec<Rational64>> = pivot_rows.iter().map(|&r| a[r].clone()).collect();
        let inverse = invert(square)?;
        a.clear();
        Ok(Self {
            basis: basis.to_vec(),
            pivot_words: pivot_rows.iter().map(|&r| words[r].clone()).collect(),
            inverse,
            expansions: basis.iter().map(|&b| expansions[b].clone()).collect(),
        })
    }

    fn solve(&self, p: &LiePoly) -> Result<Vec<(usize, Rational64)>> {
        let m = self.basis.len();
        let rhs: Vec<Rational64> = self
            .pivot_words
            .iter()
            .map(|w| p.get(w).copied().unwrap_or_else(Rational64::zero))
            .collect();
        let coeffs: Vec<Rational64> = (0..m)
            .map(|i| {
                (0..m).fold(Rational64::zero(), |acc, j| acc + self.inverse[i][j] * rhs[j])
            })
            .collect();
        // Exact reconstruction check.
        let mut recon = LiePoly::new();
        for (c, e) in coeffs.iter().zip(&self.expansions) {
            if c.is_zero() {
                continue;
            }
            for (w, v) in e {
                *recon.entry(w.clone()).or_insert_with(Rational64::zero) += *c * *v;
            }
        }
        recon.retain(|_, c| !c.is_zero());
        if &recon != p {
            return Err(Error::Construction(
                "bracket is not in the span of the Hall elements".into(),
            ));
        }
        Ok(coeffs
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.basis[i], c))
            .collect())
    }
}

fn invert(mut a: Vec<Vec<Rational64>>) -> Result<Vec<Vec<Rational64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<Rational64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational64::one() } else { Rational64::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .max_by_key(|&r| a[r][col].abs())
            .ok_or_else(|| Error::Construction("singular Hall coordinate matrix".into()))?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in 0..n {
                    let (x, y) = (a[col][j], inv[col][j]);
                    a[r][j] -= f * x;
                    inv[r][j] -= f * y;
                }
            }
        }
    }
    Ok(inv)
}

fn mobius(mut n: usize) -> i64 {
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Dimension of the free nilpotent Lie algebra by Witt's formula,
/// `Σ_{m ≤ r} (1/m) Σ_{e | m} μ(e) d^{m/e}`.
pub fn witt_dimension(generators: usize, step: usize) -> usize {
    let d = generators as i128;
    let mut total: i128 = 0;
    for m in 1..=step {
        let mut s: i128 = 0;
        for e in 1..=m {
            if m % e == 0 {
                s += mobius(e) as i128 * d.pow((m / e) as u32);
            }
        }
        total += s / m as i128;
    }
    total as usize
}
