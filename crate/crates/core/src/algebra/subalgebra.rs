use super::{dot, LieAlgebra, Vector};
use crate::error::{conform, Error, Result};

const RANK_TOL: f64 = 1e-10;

/// A subalgebra together with the orthonormal frame that embeds it.
#[derive(Debug, Clone)]
pub struct Subalgebra {
    /// The subalgebra in its own orthonormal coordinates, with the induced bracket.
    pub algebra: LieAlgebra,
    /// `embedding[a]` is the ambient coordinate vector of the `a`-th basis vector.
    pub embedding: Vec<Vector>,
}

impl Subalgebra {
    /// Ambient vector with the given subalgebra coordinates.
    pub fn embed(&self, coords: &[f64]) -> Result<Vector> {
        conform("subalgebra coordinates", self.embedding.len(), coords.len())?;
        let n = self.embedding.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for (c, q) in coords.iter().zip(&self.embedding) {
            for (o, x) in out.iter_mut().zip(q) {
                *o += c * x;
            }
        }
        Ok(out)
    }

    /// Orthogonal projection of an ambient vector onto subalgebra coordinates.
    pub fn project(&self, v: &[f64]) -> Result<Vector> {
        let n = self.embedding.first().map_or(0, Vec::len);
        conform("ambient vector", n, v.len())?;
        Ok(self.embedding.iter().map(|q| dot(q, v)).collect())
    }
}

/// Subtracts the projection onto `basis` twice and normalizes; `None` if what
/// remains is below the rank tolerance relative to `scale`.
fn orthonormal_residual(basis: &[Vector], v: &[f64], scale: f64) -> Option<Vector> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &r);
            for (x, y) in r.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
    let n = dot(&r, &r).sqrt();
    if n <= RANK_TOL * scale.max(1.0) {
        return None;
    }
    r.iter_mut().for_each(|x| *x /= n);
    Some(r)
}

/// Lie subalgebra generated by a linearly independent family.
///
/// The span is closed under brackets (the process terminates by nilpotency),
/// orthonormalized by Gram–Schmidt, and given the induced bracket
/// `C′_abc = ⟨[q_a, q_b], q_c⟩`.
pub fn generated_subalgebra(alg: &LieAlgebra, generators: &[Vector]) -> Result<Subalgebra> {
    if generators.is_empty() {
        return Err(Error::Argument("no generators".into()));
    }
    let mut basis: Vec<Vector> = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        conform("generator", alg.dim(), g.len())?;
        let scale = dot(g, g).sqrt();
        match orthonormal_residual(&basis, g, scale) {
            Some(q) => basis.push(q),
            None => {
                return Err(Error::Rank(format!(
                    "generator {i} is linearly dependent on the previous ones"
                )))
            }
        }
    }
    let mut frontier = 0;
    let mut tmp = vec![0.0; alg.dim()];
    while frontier < basis.len() {
        let end = basis.len();
        for a in 0..end {
            for b in frontier.max(a + 1)..end {
                alg.bracket_into(&basis[a], &basis[b], &mut tmp);
                let scale = dot(&tmp, &tmp).sqrt();
                if scale == 0.0 {
                    continue;
                }
                if let Some(q) = orthonormal_residual(&basis, &tmp, 1.0) {
                    basis.push(q);
                }
            }
        }
        frontier = end;
        if basis.len() > alg.dim() {
            return Err(Error::Numeric("subalgebra closure exceeded ambient dimension".into()));
        }
    }
    let m = basis.len();
    let mut dense = vec![0.0; m * m * m];
    for a in 0..m {
        for b in 0..m {
            alg.bracket_into(&basis[a], &basis[b], &mut tmp);
            for c in 0..m {
                dense[(a * m + b) * m + c] = dot(&tmp, &basis[c]);
            }
        }
    }
    let sub = LieAlgebra::from_dense(format!("{}-sub{m}", alg.label()), m, 1, dense);
    let step = sub.detect_step().unwrap_or(alg.step());
    Ok(Subalgebra {
        algebra: sub.with_step(step),
        embedding: basis,
    })
}
