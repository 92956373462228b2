//! Finite-dimensional nilpotent Lie algebras with an orthonormal basis.
//!
//! An algebra is stored as a list of structure-constant triplets
//! `(i, j, k, c)` meaning `[e_i, e_j]` has component `c` along `e_k`, together
//! with a dense `dim³` cache used by the hot bracket loops. Both orderings
//! `(i, j)` and `(j, i)` are stored explicitly so that non-antisymmetric input
//! can be represented (and rejected by [`validate`](LieAlgebra::validate)).

mod construct;
mod hall;
mod io;
mod subalgebra;
mod validate;

pub use construct::{
    abelian, heisenberg3, make_beta_extension, make_free_nilpotent, make_heisenberg_like,
    make_random_hs, standard_symplectic, RANDOM_HS_WORK_LIMIT,
};
pub use hall::{witt_dimension, HallBasis, HallElement};
pub use io::AlgebraDocument;
pub use subalgebra::{generated_subalgebra, Subalgebra};
pub use validate::Diagnostics;

use crate::error::{conform, Error, Result};

/// Dense coordinate vector in the orthonormal basis of an algebra.
pub type Vector = Vec<f64>;

/// A finite-dimensional Lie algebra with inner product given by the dot product
/// in its declared orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebra {
    label: String,
    dim: usize,
    step: usize,
    triplets: Vec<(usize, usize, usize, f64)>,
    dense: Vec<f64>,
}

impl LieAlgebra {
    /// Builds an algebra from raw structure constants without checking any axiom.
    ///
    /// Duplicate `(i, j, k)` entries are summed; exact zeros are dropped. Use
    /// [`validate`](Self::validate) to check the result.
    pub fn from_triplets(
        label: impl Into<String>,
        dim: usize,
        step: usize,
        triplets: impl IntoIterator<Item = (usize, usize, usize, f64)>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("algebra dimension must be positive".into()));
        }
        let mut dense = vec![0.0; dim * dim * dim];
        for (i, j, k, c) in triplets {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Conformance(format!(
                    "triplet index ({i}, {j}, {k}) out of range for dim {dim}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::Argument(format!(
                    "non-finite structure constant at ({i}, {j}, {k})"
                )));
            }
            dense[(i * dim + j) * dim + k] += c;
        }
        Ok(Self::from_dense(label.into(), dim, step, dense))
    }

    pub(crate) fn from_dense(label: String, dim: usize, step: usize, dense: Vec<f64>) -> Self {
        debug_assert_eq!(dense.len(), dim * dim * dim);
        let mut triplets = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let c = dense[(i * dim + j) * dim + k];
                    if c != 0.0 {
                        triplets.push((i, j, k, c));
                    }
                }
            }
        }
        Self {
            label,
            dim,
            step,
            triplets,
            dense,
        }
    }

    /// True when every bracket vanishes.
    pub fn is_abelian(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared nilpotency step `r`.
    pub fn step(&self) -> usize {
        self.step
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn with_step(mut self, step: usize) -> Self {
        self.step = step;
        self
    }

    /// Nonzero structure constants `(i, j, k, C[i][j][k])`, ordered by `(i, j, k)`.
    pub fn triplets(&self) -> &[(usize, usize, usize, f64)] {
        &self.triplets
    }

    /// `C[i][j][k]`.
    #[inline]
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.dense[(i * self.dim + j) * self.dim + k]
    }

    /// Coordinates of `[e_i, e_j]`.
    #[inline]
    pub fn basis_bracket(&self, i: usize, j: usize) -> &[f64] {
        let start = (i * self.dim + j) * self.dim;
        &self.dense[start..start + self.dim]
    }

    pub fn basis_vector(&self, i: usize) -> Vector {
        let mut v = vec![0.0; self.dim];
        v[i] = 1.0;
        v
    }

    pub fn zero(&self) -> Vector {
        vec![0.0; self.dim]
    }

    /// `[x, y] = Σ_{i,j} x_i y_j C[i][j][·]`.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vector> {
        conform("bracket lhs", self.dim, x.len())?;
        conform("bracket rhs", self.dim, y.len())?;
        let mut out = vec![0.0; self.dim];
        self.bracket_into(x, y, &mut out);
        Ok(out)
    }

    /// Unchecked bracket accumulating into `out` (which is overwritten).
    pub(crate) fn bracket_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        self.bracket_add(x, y, 1.0, out);
    }

    /// `out += scale · [x, y]`.
    pub(crate) fn bracket_add(&self, x: &[f64], y: &[f64], scale: f64, out: &mut [f64]) {
        for &(i, j, k, c) in &self.triplets {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            let yj = y[j];
            if yj != 0.0 {
                out[k] += scale * c * xi * yj;
            }
        }
    }

    /// `[v, e_j]` accumulated into `out` (overwritten).
    pub(crate) fn bracket_with_basis_right(&self, v: &[f64], j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let d = self.dim;
        for (a, &va) in v.iter().enumerate() {
            if va == 0.0 {
                continue;
            }
            let row = &self.dense[(a * d + j) * d..(a * d + j + 1) * d];
            for (o, &c) in out.iter_mut().zip(row) {
                *o += va * c;
            }
        }
    }

    /// Left-nested bracket `[[…[k₁, k₂], …], k_n]`; a single vector is returned as is.
    pub fn iterated_bracket(&self, vectors: &[Vector]) -> Result<Vector> {
        let (first, rest) = vectors
            .split_first()
            .ok_or_else(|| Error::Argument("iterated bracket of an empty list".into()))?;
        conform("iterated bracket", self.dim, first.len())?;
        let mut acc = first.clone();
        let mut tmp = vec![0.0; self.dim];
        for v in rest {
            conform("iterated bracket", self.dim, v.len())?;
            self.bracket_into(&acc, v, &mut tmp);
            std::mem::swap(&mut acc, &mut tmp);
        }
        Ok(acc)
    }

    /// Matrix of `ad_x` as a row-major `dim × dim` array: `(ad_x)[k][j] = Σ_i x_i C[i][j][k]`.
    pub fn ad_matrix(&self, x: &[f64]) -> Result<Vec<f64>> {
        conform("ad", self.dim, x.len())?;
        let d = self.dim;
        let mut m = vec![0.0; d * d];
        for &(i, j, k, c) in &self.triplets {
            m[k * d + j] += x[i] * c;
        }
        Ok(m)
    }

    /// `‖[·,·]‖₂² = Σ_{i,j} ‖[e_i, e_j]‖²`.
    pub fn hs_norm_sq(&self) -> f64 {
        self.dense.iter().map(|c| c * c).sum()
    }

    /// `‖F_n‖₂²`, the squared Hilbert–Schmidt norm of the `n`-fold left-nested
    /// bracket, by enumeration of basis `n`-tuples.
    ///
    /// Valid for `2 ≤ n ≤ step + 1`; the value at `n = step + 1` is zero for a
    /// correctly declared step.
    pub fn iterated_bracket_hs_norm_sq(&self, n: usize) -> Result<f64> {
        if n < 2 || n > self.step + 1 {
            return Err(Error::Argument(format!(
                "iterated bracket order {n} outside 2..={}",
                self.step + 1
            )));
        }
        let d = self.dim;
        // Level-by-level image of all basis tuples: layer holds d^ℓ vectors.
        let mut layer: Vec<Vector> = (0..d).map(|i| self.basis_vector(i)).collect();
        let mut tmp = vec![0.0; d];
        for _ in 1..n {
            let mut next = Vec::with_capacity(layer.len() * d);
            for v in &layer {
                for j in 0..d {
                    self.bracket_with_basis_right(v, j, &mut tmp);
                    next.push(tmp.clone());
                }
            }
            layer = next;
        }
        Ok(layer.iter().flatten().map(|c| c * c).sum())
    }

    /// The quotient by the span of the trailing coordinates `e_l, …, e_{dim−1}`,
    /// in the first `l` coordinates.
    ///
    /// Requires that span to be an ideal, i.e. no bracket with a trailing basis
    /// vector has a component below `l`.
    pub fn leading_quotient(&self, l: usize) -> Result<Self> {
        if l == 0 || l > self.dim {
            return Err(Error::Argument(format!(
                "quotient rank {l} outside 1..={}",
                self.dim
            )));
        }
        if l == self.dim {
            return Ok(self.clone());
        }
        for &(i, j, k, c) in &self.triplets {
            if (i >= l || j >= l) && k < l && c != 0.0 {
                return Err(Error::Validation(format!(
                    "trailing span from {l} is not an ideal: [e{i}, e{j}] has an e{k} component"
                )));
            }
        }
        let kept = self
            .triplets
            .iter()
            .copied()
            .filter(|&(i, j, k, _)| i < l && j < l && k < l);
        let alg = Self::from_triplets(format!("{}/{l}", self.label), l, self.step, kept)?;
        let step = alg.detect_step().unwrap_or(self.step).max(1);
        Ok(alg.with_step(step))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
