use super::{sigma_prime, AlphaIndex};
use crate::algebra::{LieAlgebra, Vector};
use crate::error::{conform, Error, Result};

/// Storage policy for [`ContractionOperator`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionOptions {
    /// Largest dense array (in `f64` entries, `dim^{p+1}`) that is materialized.
    pub dense_limit: usize,
    /// Fall back to on-the-fly evaluation above `dense_limit` instead of failing.
    pub allow_lazy: bool,
}

impl Default for ContractionOptions {
    fn default() -> Self {
        Self {
            dense_limit: 1 << 22,
            allow_lazy: true,
        }
    }
}

#[derive(Debug, Clone)]
enum Storage {
    Zero,
    /// Row-major `dim^p × dim`.
    Dense(Vec<f64>),
    Lazy(LieAlgebra),
}

/// `F̂ₙ^{σ,α}(k₁ ⊗ … ⊗ k_p) = Σ_{j₁…j_q} F_n^{σ′}(k₁ ⊗ … ⊗ k_p ⊗ h_{j₁} ⊗ h_{j₁} ⊗ …)`.
#[derive(Debug, Clone)]
pub struct ContractionOperator {
    dim: usize,
    n: usize,
    p: usize,
    q: usize,
    sigma_prime: Vec<usize>,
    hs_norm_sq: f64,
    storage: Storage,
}

/// Left-nested bracket of basis vectors `e_{slots[σ′(1)]}, …, e_{slots[σ′(n)]}`
/// accumulated into `out` with weight `w`.
fn add_basis_word(
    alg: &LieAlgebra,
    sp: &[usize],
    slots: &[usize],
    w: f64,
    buf: &mut [Vector; 2],
    out: &mut [f64],
) {
    let [v, tmp] = buf;
    v.iter_mut().for_each(|x| *x = 0.0);
    v[slots[sp[0] - 1]] = 1.0;
    for &s in &sp[1..] {
        alg.bracket_with_basis_right(v, slots[s - 1], tmp);
        std::mem::swap(v, tmp);
        if v.iter().all(|x| *x == 0.0) {
            return;
        }
    }
    for (o, x) in out.iter_mut().zip(v.iter()) {
        *o += w * x;
    }
}

/// Advances a mixed-radix counter; false once it wraps.
fn next_tuple(idx: &mut [usize], base: usize) -> bool {
    for x in idx.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

impl ContractionOperator {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of free (Brownian) arguments.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Number of contracted pairs.
    pub fn q(&self) -> usize {
        self.q
    }

    pub fn sigma_prime(&self) -> &[usize] {
        &self.sigma_prime
    }

    pub fn hs_norm(&self) -> f64 {
        self.hs_norm_sq.sqrt()
    }

    pub fn hs_norm_sq(&self) -> f64 {
        self.hs_norm_sq
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.storage, Storage::Zero) || self.hs_norm_sq == 0.0
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// The dense `dim^p × dim` array, if materialized.
    pub fn dense(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Dense(d) => Some(d),
            _ => None,
        }
    }

    /// `F̂(e_{i₁} ⊗ … ⊗ e_{i_p})` evaluated directly from the bracket.
    fn eval_basis(&self, alg: &LieAlgebra, free: &[usize], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let d = self.dim;
        let mut slots = vec![0usize; self.n];
        slots[..self.p].copy_from_slice(free);
        let mut pairs = vec![0usize; self.q];
        let mut buf = [vec![0.0; d], vec![0.0; d]];
        loop {
            for (j, &h) in pairs.iter().enumerate() {
                slots[self.p + 2 * j] = h;
                slots[self.p + 2 * j + 1] = h;
            }
            add_basis_word(alg, &self.sigma_prime, &slots, 1.0, &mut buf, out);
            if !next_tuple(&mut pairs, d) {
                break;
            }
        }
    }

    /// `Σ_I T[I] F̂(e_I)` for a tensor `T` of length `dim^p` (row-major), written to `out`.
    pub fn contract(&self, tensor: &[f64], out: &mut [f64]) -> Result<()> {
        let rows = self.dim.pow(self.p as u32);
        conform("contraction tensor", rows, tensor.len())?;
        conform("contraction output", self.dim, out.len())?;
        out.iter_mut().for_each(|x| *x = 0.0);
        match &self.storage {
            Storage::Zero => {}
            Storage::Dense(data) => {
                for (row, &w) in data.chunks_exact(self.dim).zip(tensor) {
                    if w != 0.0 {
                        for (o, x) in out.iter_mut().zip(row) {
                            *o += w * x;
                        }
                    }
                }
            }
            Storage::Lazy(alg) => {
                let mut idx = vec![0usize; self.p];
                let mut tmp = vec![0.0; self.dim];
                for &w in tensor {
                    if w != 0.0 {
                        self.eval_basis(alg, &idx, &mut tmp);
                        for (o, x) in out.iter_mut().zip(&tmp) {
                            *o += w * x;
                        }
                    }
                    next_tuple(&mut idx, self.dim);
                }
            }
        }
        Ok(())
    }

    /// `F̂(k₁ ⊗ … ⊗ k_p)`.
    pub fn apply(&self, ks: &[&[f64]]) -> Result<Vector> {
        conform("contraction arguments", self.p, ks.len())?;
        let mut tensor = vec![1.0];
        for k in ks {
            conform("contraction argument", self.dim, k.len())?;
            tensor = tensor
                .iter()
                .flat_map(|a| k.iter().map(move |b| a * b))
                .collect();
        }
        let mut out = vec![0.0; self.dim];
        self.contract(&tensor, &mut out)?;
        Ok(out)
    }
}

/// [`contraction_operator_with`] under the default storage policy.
pub fn contraction_operator(
    alg: &LieAlgebra,
    sigma: &[usize],
    alpha: &AlphaIndex,
) -> Result<ContractionOperator> {
    contraction_operator_with(alg, sigma, alpha, &ContractionOptions::default())
}

/// Builds `F̂ₙ^{σ,α}` for `n = |σ|` by summing the `q_α` paired basis indices.
///
/// For `n` above the step the operator is identically zero. Arrays above
/// `dense_limit` entries are evaluated lazily, or rejected with a resource error
/// when lazy evaluation is disabled.
pub fn contraction_operator_with(
    alg: &LieAlgebra,
    sigma: &[usize],
    alpha: &AlphaIndex,
    opts: &ContractionOptions,
) -> Result<ContractionOperator> {
    let sp = sigma_prime(sigma, alpha)?;
    let (n, p, q, d) = (alpha.n(), alpha.p(), alpha.q(), alg.dim());
    let mut op = ContractionOperator {
        dim: d,
        n,
        p,
        q,
        sigma_prime: sp,
        hs_norm_sq: 0.0,
        storage: Storage::Zero,
    };
    if n > alg.step() || (n > 1 && alg.is_abelian()) {
        return Ok(op);
    }
    let entries = d
        .checked_pow(p as u32 + 1)
        .filter(|&e| e <= opts.dense_limit);
    let rows = d.checked_pow(p as u32).ok_or_else(|| {
        Error::Resource(format!("dim^{p} overflows for dim {d}"))
    })?;
    let mut tmp = vec![0.0; d];
    let mut idx = vec![0usize; p];
    match entries {
        Some(total) => {
            let mut data = vec![0.0; total];
            for r in 0..rows {
                op.eval_basis(alg, &idx, &mut tmp);
                data[r * d..(r + 1) * d].copy_from_slice(&tmp);
                next_tuple(&mut idx, d);
            }
            op.hs_norm_sq = data.iter().map(|x| x * x).sum();
            op.storage = Storage::Dense(data);
        }
        None if opts.allow_lazy => {
            let mut hs = 0.0;
            for _ in 0..rows {
                op.eval_basis(alg, &idx, &mut tmp);
                hs += tmp.iter().map(|x| x * x).sum::<f64>();
                next_tuple(&mut idx, d);
            }
            op.hs_norm_sq = hs;
            op.storage = Storage::Lazy(alg.clone());
        }
        None => {
            return Err(Error::Resource(format!(
                "dense contraction operator needs {d}^{} entries, above the limit of {}",
                p + 1,
                opts.dense_limit
            )))
        }
    }
    if op.hs_norm_sq == 0.0 {
        op.storage = Storage::Zero;
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{heisenberg3, make_free_nilpotent, make_random_hs};

    fn al(v: &[u8]) -> AlphaIndex {
        AlphaIndex::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unpaired_operator_is_iterated_bracket() {
        let alg = make_free_nilpotent(2, 3).unwrap();
        for n in 2..=3 {
            let sigma: Vec<usize> = (1..=n).collect();
            let alpha = AlphaIndex::new(vec![1; n]).unwrap();
            let op = contraction_operator(&alg, &sigma, &alpha).unwrap();
            let expect = alg.iterated_bracket_hs_norm_sq(n).unwrap();
            assert!((op.hs_norm_sq() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn heisenberg_single_pair_vanishes() {
        let h = heisenberg3();
        let op = contraction_operator(&h, &[1, 2], &al(&[2])).unwrap();
        assert!(op.is_zero());
        assert_eq!(op.p(), 0);
        assert_eq!(op.apply(&[]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn one_pair_matches_double_loop() {
        let alg = make_free_nilpotent(2, 3).unwrap();
        let op = contraction_operator(&alg, &[1, 2, 3], &al(&[1, 2])).unwrap();
        let k = alg.basis_vector(0);
        let got = op.apply(&[&k]).unwrap();
        let mut expect = alg.zero();
        for j in 0..alg.dim() {
            let h = alg.basis_vector(j);
            let v = alg.iterated_bracket(&[k.clone(), h.clone(), h]).unwrap();
            for (e, x) in expect.iter_mut().zip(&v) {
                *e += x;
            }
        }
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn above_step_is_zero() {
        let h = heisenberg3();
        let op = contraction_operator(&h, &[1, 2, 3], &al(&[1, 1, 1])).unwrap();
        assert!(op.is_zero());
    }

    #[test]
    fn lazy_matches_dense() {
        let alg = make_random_hs(8, 3, 1.0, 3).unwrap();
        let alpha = al(&[1, 1, 1]);
        let dense = contraction_operator(&alg, &[2, 3, 1], &alpha).unwrap();
        let lazy = contraction_operator_with(
            &alg,
            &[2, 3, 1],
            &alpha,
            &ContractionOptions {
                dense_limit: 10,
                allow_lazy: true,
            },
        )
        .unwrap();
        assert!(dense.is_dense() && !lazy.is_dense());
        assert!((dense.hs_norm_sq() - lazy.hs_norm_sq()).abs() < 1e-15);
        let k: Vec<Vec<f64>> = (0..3)
            .map(|s| (0..8).map(|i| ((i * 3 + s) as f64).sin()).collect())
            .collect();
        let a = dense.apply(&[&k[0], &k[1], &k[2]]).unwrap();
        let b = lazy.apply(&[&k[0], &k[1], &k[2]]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn memory_guard() {
        let alg = make_random_hs(8, 3, 1.0, 3).unwrap();
        let res = contraction_operator_with(
            &alg,
            &[1, 2, 3],
            &al(&[1, 1, 1]),
            &ContractionOptions {
                dense_limit: 100,
                allow_lazy: false,
            },
        );
        assert!(matches!(res, Err(Error::Resource(_))));
    }
}
