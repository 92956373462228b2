//! Ricci curvature of the left-invariant metric, its lower bound, and gradients
//! of polynomial functions on the group.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::{generated_subalgebra, LieAlgebra, Subalgebra, Vector};
use crate::bchd::BchdLaw;
use crate::error::{conform, Error, Result};

/// `(Σ_m ad_{e_m}ᵀ ad_{e_m}, Σ_m ad_{e_m} ad_{e_m}ᵀ)`.
fn ad_gram(alg: &LieAlgebra) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = alg.dim();
    let mut q = DMatrix::<f64>::zeros(d, d);
    let mut p = DMatrix::<f64>::zeros(d, d);
    for m in 0..d {
        // Column j of ad_{e_m} is [e_m, e_j].
        let ad = DMatrix::from_fn(d, d, |k, j| alg.basis_bracket(m, j)[k]);
        q += ad.transpose() * &ad;
        p += &ad * ad.transpose();
    }
    (q, p)
}

/// Matrix of `X ↦ ⟨Ric X, X⟩ = ¼Σ_Y ‖ad*_Y X‖² − ½Σ_Y ‖ad_Y X‖²` in the
/// orthonormal basis, row-major.
pub fn ricci_matrix(alg: &LieAlgebra) -> Vec<f64> {
    let (q, p) = ad_gram(alg);
    let ric = p * 0.25 - q * 0.5;
    let d = alg.dim();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = 0.5 * (ric[(i, j)] + ric[(j, i)]);
        }
    }
    out
}

/// Ascending eigenvalues of a symmetric row-major matrix.
pub fn symmetric_eigenvalues(m: &[f64], d: usize) -> Result<Vec<f64>> {
    conform("symmetric matrix", d * d, m.len())?;
    let mat = DMatrix::from_row_slice(d, d, m);
    let eig = SymmetricEigen::try_new(mat, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `−½ λ_max(Q)` with `Q = Σ_m ad_{e_m}ᵀ ad_{e_m}` and the residual `‖Qv − λv‖`.
fn lower_bound_with_residual(alg: &LieAlgebra) -> Result<(f64, f64, f64)> {
    let d = alg.dim();
    if d == 0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let (q, _) = ad_gram(alg);
    let eig = SymmetricEigen::try_new(q.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("symmetric eigensolver did not converge".into()))?;
    let (imax, lambda) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty spectrum");
    let v = eig.eigenvectors.column(imax);
    let residual = (&q * v - v * lambda).norm();
    Ok((-0.5 * lambda, lambda, residual))
}

/// `k_π` for a subalgebra with its induced bracket and inner product.
pub fn k_pi(sub: &Subalgebra) -> Result<f64> {
    Ok(lower_bound_with_residual(&sub.algebra)?.0)
}

/// Value of `k_π` for one sampled subalgebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubalgebraWitness {
    pub generators: usize,
    pub dim: usize,
    pub k_pi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RicciReport {
    pub dim: usize,
    /// Row-major `dim × dim`.
    pub ricci_matrix: Vec<f64>,
    pub ricci_eigenvalues: Vec<f64>,
    pub k: f64,
    /// `λ_max` of `Σ_m ad_{e_m}ᵀ ad_{e_m}`.
    pub k_operator_eigen: f64,
    /// `‖Qv − λv‖` for the returned eigenpair.
    pub eigen_residual: f64,
    /// `−½‖[·,·]‖₂²`.
    pub hs_bound: f64,
    pub witnesses: Vec<SubalgebraWitness>,
}

impl RicciReport {
    /// `hs_bound ≤ k ≤ k_π ≤ 0` for every witness and `Ric ≥ k`, within `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        let min_ric = self.ricci_eigenvalues.first().copied().unwrap_or(0.0);
        self.hs_bound <= self.k + tol
            && self.k <= tol
            && min_ric >= self.k - tol
            && self
                .witnesses
                .iter()
                .all(|w| self.k <= w.k_pi + tol && w.k_pi <= tol)
    }
}

/// Ricci data for `alg` and `k_π` on `subsamples` random generated subalgebras.
///
/// Subalgebra `i` is generated by `1 + i mod min(3, dim)` Gaussian vectors drawn
/// from stream `i` of `seed`.
pub fn ricci_lower_bound(alg: &LieAlgebra, subsamples: usize, seed: u64) -> Result<RicciReport> {
    let d = alg.dim();
    let ricci = ricci_matrix(alg);
    let ricci_eigenvalues = symmetric_eigenvalues(&ricci, d)?;
    let (k, lambda, residual) = lower_bound_with_residual(alg)?;
    let mut witnesses = Vec::with_capacity(subsamples);
    let max_gens = d.min(3);
    for i in 0..subsamples {
        if max_gens == 0 {
            break;
        }
        let gens = 1 + i % max_gens;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let vs: Vec<Vector> = (0..gens)
            .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let sub = generated_subalgebra(alg, &vs)?;
        witnesses.push(SubalgebraWitness {
            generators: gens,
            dim: sub.algebra.dim(),
            k_pi: k_pi(&sub)?,
        });
    }
    Ok(RicciReport {
        dim: d,
        ricci_matrix: ricci,
        ricci_eigenvalues,
        k,
        k_operator_eigen: lambda,
        eigen_residual: residual,
        hs_bound: -0.5 * alg.hs_norm_sq(),
        witnesses,
    })
}

/// Polynomial in the exponential coordinates of the group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderPolynomial {
    dim: usize,
    /// `(exponents, coefficient)`, exponents of length `dim`.
    terms: Vec<(Vec<u32>, f64)>,
}

impl CylinderPolynomial {
    pub fn new(dim: usize, terms: Vec<(Vec<u32>, f64)>) -> Result<Self> {
        for (e, _) in &terms {
            conform("monomial exponents", dim, e.len())?;
        }
        Ok(Self { dim, terms })
    }

    /// `Σ_i c_i x_i`.
    pub fn linear(coeffs: &[f64]) -> Self {
        let d = coeffs.len();
        let terms = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut e = vec![0; d];
                e[i] = 1;
                (e, c)
            })
            .collect();
        Self { dim: d, terms }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Vec<u32>, f64)] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|(e, _)| e.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(*c, |acc, (&k, &v)| acc * v.powi(k as i32))
            })
            .sum()
    }

    /// Euclidean gradient `(∂_k F)(x)` in the coordinates.
    pub fn coordinate_gradient(&self, x: &[f64]) -> Vector {
        let mut out = vec![0.0; self.dim];
        for (e, c) in &self.terms {
            for k in 0..self.dim {
                if e[k] == 0 {
                    continue;
                }
                let mut v = *c * e[k] as f64;
                for (i, (&p, &xi)) in e.iter().zip(x).enumerate() {
                    let p = if i == k { p - 1 } else { p };
                    v *= xi.powi(p as i32);
                }
                out[k] += v;
            }
        }
        out
    }
}

/// `∇f(g)` with components `d/dε f(g·εe_i)` at `ε = 0`.
///
/// The curve `ε ↦ g·εe_i` is polynomial with velocity `L_{g*}e_i` at zero, so the
/// component is `⟨∇_x F(g), L_{g*}e_i⟩`, evaluated exactly.
pub fn cylinder_gradient(alg: &LieAlgebra, f: &CylinderPolynomial, g: &[f64]) -> Result<Vector> {
    cylinder_gradient_with(alg, &BchdLaw::for_algebra(alg)?, f, g)
}

/// [`cylinder_gradient`] with a prebuilt group law.
pub fn cylinder_gradient_with(
    alg: &LieAlgebra,
    law: &BchdLaw,
    f: &CylinderPolynomial,
    g: &[f64],
) -> Result<Vector> {
    conform("polynomial dimension", alg.dim(), f.dim())?;
    conform("group element", alg.dim(), g.len())?;
    let grad = f.coordinate_gradient(g);
    (0..alg.dim())
        .map(|i| {
            let v = law.left_translation_differential(alg, g, &alg.basis_vector(i))?;
            Ok(grad.iter().zip(&v).map(|(a, b)| a * b).sum())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{abelian, heisenberg3, make_free_nilpotent, make_random_hs};

    fn spectrum(alg: &LieAlgebra) -> Vec<f64> {
        symmetric_eigenvalues(&ricci_matrix(alg), alg.dim()).unwrap()
    }

    #[test]
    fn heisenberg_ricci() {
        let alg = heisenberg3();
        let r = ricci_matrix(&alg);
        let expected = [-0.5, 0.0, 0.0, 0.0, -0.5, 0.0, 0.0, 0.0, 0.5];
        for (a, b) in r.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        let rep = ricci_lower_bound(&alg, 5, 1).unwrap();
        assert!((rep.k + 0.5).abs() < 1e-14);
        assert!(rep.eigen_residual < 1e-12);
        assert!(rep.chain_holds(1e-10));
    }

    #[test]
    fn free_two_two_is_heisenberg() {
        let s = spectrum(&make_free_nilpotent(2, 2).unwrap());
        for (a, b) in s.iter().zip([-0.5, -0.5, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn abelian_is_flat() {
        let alg = abelian(4).unwrap();
        assert!(ricci_matrix(&alg).iter().all(|x| *x == 0.0));
        let rep = ricci_lower_bound(&alg, 3, 0).unwrap();
        assert_eq!(rep.k, 0.0);
    }

    #[test]
    fn subalgebra_chain_on_random_algebras() {
        for seed in 0..4 {
            let alg = make_random_hs(10, 3, 1.0, seed).unwrap();
            let rep = ricci_lower_bound(&alg, 20, seed).unwrap();
            assert_eq!(rep.witnesses.len(), 20);
            assert!(rep.chain_holds(1e-10), "{rep:?}");
            assert!(rep.k < 0.0);
            let sym = rep
                .ricci_matrix
                .iter()
                .enumerate()
                .all(|(idx, v)| (v - rep.ricci_matrix[(idx % 10) * 10 + idx / 10]).abs() < 1e-12);
            assert!(sym);
        }
    }

    #[test]
    fn k_pi_of_line_is_zero() {
        let alg = heisenberg3();
        let sub = generated_subalgebra(&alg, &[vec![1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(k_pi(&sub).unwrap(), 0.0);
        let full = generated_subalgebra(&alg, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        assert!((k_pi(&full).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_central_gradient() {
        let alg = heisenberg3();
        let f = CylinderPolynomial::linear(&[0.0, 0.0, 1.0]);
        let (a, b, c) = (0.7, -1.3, 2.0);
        let g = cylinder_gradient(&alg, &f, &[a, b, c]).unwrap();
        for (x, y) in g.iter().zip([-b / 2.0, a / 2.0, 1.0]) {
            assert!((x - y).abs() < 1e-15);
        }
        let lin = CylinderPolynomial::linear(&[1.0, 2.0, 3.0]);
        assert_eq!(cylinder_gradient(&alg, &lin, &[0.0; 3]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn polynomial_gradient() {
        let f = CylinderPolynomial::new(2, vec![(vec![2, 1], 3.0), (vec![0, 0], 1.0)]).unwrap();
        assert_eq!(f.eval(&[2.0, 5.0]), 61.0);
        assert_eq!(f.coordinate_gradient(&[2.0, 5.0]), vec![60.0, 12.0]);
        assert_eq!(f.degree(), 3);
    }
}
