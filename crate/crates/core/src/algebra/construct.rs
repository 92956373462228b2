use nalgebra::DMatrix;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::hall::{witt_dimension, HallBasis};
use super::LieAlgebra;
use crate::error::{Error, Result};

/// Abelian algebra of the given dimension (step 1).
pub fn abelian(dim: usize) -> Result<LieAlgebra> {
    LieAlgebra::from_triplets(format!("abelian-{dim}"), dim, 1, std::iter::empty())
}

/// The three-dimensional Heisenberg algebra `[X, Y] = Z`.
pub fn heisenberg3() -> LieAlgebra {
    let mut omega = vec![0.0; 4];
    omega[1] = 1.0;
    omega[2] = -1.0;
    make_heisenberg_like(2, 1, &omega)
        .expect("canonical symplectic form is antisymmetric")
        .with_label("heisenberg-3")
}

/// Standard symplectic form on `R^{d1}` (`d1` even) with values in `R^1`:
/// `ω(e_{2a}, e_{2a+1}) = 1`. Returned in the `d1 × d1 × 1` layout of
/// [`make_heisenberg_like`].
pub fn standard_symplectic(d1: usize) -> Result<Vec<f64>> {
    if d1 % 2 != 0 {
        return Err(Error::Argument("symplectic form needs an even dimension".into()));
    }
    let mut omega = vec![0.0; d1 * d1];
    for a in (0..d1).step_by(2) {
        omega[a * d1 + a + 1] = 1.0;
        omega[(a + 1) * d1 + a] = -1.0;
    }
    Ok(omega)
}

/// Heisenberg-like algebra on `R^{d1} ⊕ R^{d2}` with
/// `[(h₁, h₂), (h₁′, h₂′)] = (0, ω(h₁, h₁′))`.
///
/// `omega` is row-major `d1 × d1 × d2`: entry `(a, b, c)` is the `c`-th component
/// of `ω(e_a, e_b)`.
pub fn make_heisenberg_like(d1: usize, d2: usize, omega: &[f64]) -> Result<LieAlgebra> {
    if d1 == 0 && d2 == 0 {
        return Err(Error::Argument("empty algebra".into()));
    }
    if omega.len() != d1 * d1 * d2 {
        return Err(Error::Conformance(format!(
            "omega has {} entries, expected {}",
            omega.len(),
            d1 * d1 * d2
        )));
    }
    let at = |a: usize, b: usize, c: usize| omega[(a * d1 + b) * d2 + c];
    let mut triplets = Vec::new();
    for a in 0..d1 {
        for b in 0..d1 {
            for c in 0..d2 {
                let v = at(a, b, c);
                if (v + at(b, a, c)).abs() > crate::ALGEBRA_TOL {
                    return Err(Error::Validation(format!(
                        "omega is not antisymmetric at ({a}, {b}, {c})"
                    )));
                }
                if v != 0.0 {
                    triplets.push((a, b, d1 + c, v));
                }
            }
        }
    }
    let step = if triplets.is_empty() { 1 } else { 2 };
    LieAlgebra::from_triplets(format!("heisenberg-like-{d1}-{d2}"), d1 + d2, step, triplets)
}

/// Free nilpotent Lie algebra on `generators` letters of step `step`, in its Hall basis.
pub fn make_free_nilpotent(generators: usize, step: usize) -> Result<LieAlgebra> {
    let hall = HallBasis::new(generators, step)?;
    let dim = hall.len();
    if dim != witt_dimension(generators, step) {
        return Err(Error::Construction(format!(
            "Hall basis has {dim} elements but Witt's formula gives {}",
            witt_dimension(generators, step)
        )));
    }
    let triplets = hall
        .structure_constants()?
        .into_iter()
        .map(|(i, j, k, c)| {
            let v = c
                .to_f64()
                .ok_or_else(|| Error::Numeric("structure constant overflow".into()))?;
            Ok((i, j, k, v))
        })
        .collect::<Result<Vec<_>>>()?;
    // d = 1 collapses to the abelian line regardless of the requested step.
    let actual_step = hall.degrees.iter().copied().max().unwrap_or(1);
    LieAlgebra::from_triplets(
        format!("free-nilpotent-{generators}-{step}"),
        dim,
        actual_step,
        triplets,
    )
}

/// Extension of `R^{dH}` over `base` driven by a linear map `β: R^{dH} → base`:
/// `[(X, V), (Y, U)] = (0, [βX, βY] + [βX, U] − [βY, V] + [V, U])`.
///
/// `beta` is row-major `dH × dim(base)`; row `i` is `β(e_i)`.
pub fn make_beta_extension(base: &LieAlgebra, dh: usize, beta: &[f64]) -> Result<LieAlgebra> {
    let dv = base.dim();
    if beta.len() != dh * dv {
        return Err(Error::Conformance(format!(
            "beta has {} entries, expected {dh} x {dv}",
            beta.len()
        )));
    }
    let diag = base.validate();
    if !diag.pass {
        return Err(Error::Validation(format!(
            "base algebra '{}' does not validate",
            base.label()
        )));
    }
    let dim = dh + dv;
    let image = |a: usize| -> Vec<f64> {
        if a < dh {
            beta[a * dv..(a + 1) * dv].to_vec()
        } else {
            let mut v = vec![0.0; dv];
            v[a - dh] = 1.0;
            v
        }
    };
    let images: Vec<Vec<f64>> = (0..dim).map(image).collect();
    let mut dense = vec![0.0; dim * dim * dim];
    let mut tmp = vec![0.0; dv];
    for a in 0..dim {
        for b in 0..dim {
            base.bracket_into(&images[a], &images[b], &mut tmp);
            for (k, &c) in tmp.iter().enumerate() {
                dense[(a * dim + b) * dim + dh + k] = c;
            }
        }
    }
    let alg = LieAlgebra::from_dense(format!("beta-extension-{dh}-{}", base.label()), dim, 1, dense);
    let step = alg.detect_step().unwrap_or(base.step());
    Ok(alg.with_step(step))
}

/// Layer of basis index `k` in the graded random construction.
fn random_layer(k: usize, step: usize) -> usize {
    if k < 2 || step == 1 {
        1
    } else {
        let l = 2 + (k - 2) % step;
        if l == step + 1 {
            1
        } else {
            l
        }
    }
}

/// Random graded nilpotent algebra with decaying structure constants.
///
/// Basis vectors are added one at a time. Indices `0, 1` are generators; later
/// indices cycle through layers `2, …, r, 1`. When index `k` of layer `ℓ ≥ 2` is
/// added, the column `C[·][·][k]` is a graded 2-cocycle of the algebra spanned by
/// the earlier indices: a Gaussian target weighted by `((i+1)(j+1)(k+1))^{−γ}`
/// projected orthogonally onto the cocycle space. This makes the result a
/// central extension at every stage, so the Jacobi identity holds exactly up to
/// rounding, and every prefix of the basis spans a quotient algebra. The
/// randomness for index `k` depends only on `(seed, k)`, so the `D′`-dimensional
/// instance is the restriction of the `D`-dimensional one.
pub fn make_random_hs(dim: usize, step: usize, gamma: f64, seed: u64) -> Result<LieAlgebra> {
    if dim < 2 {
        return Err(Error::Argument("random HS algebra needs dim >= 2".into()));
    }
    if step == 0 {
        return Err(Error::Argument("step must be >= 1".into()));
    }
    if !(gamma > 0.0) {
        return Err(Error::Argument("decay rate must be positive".into()));
    }
    if step >= 2 && dim < step + 1 {
        return Err(Error::Construction(format!(
            "graded layering needs dim >= {} for step {step}, got {dim}",
            step + 1
        )));
    }
    let layers: Vec<usize> = (0..dim).map(|k| random_layer(k, step)).collect();
    let work = random_hs_work(&layers);
    if work > RANDOM_HS_WORK_LIMIT {
        return Err(Error::Resource(format!(
            "random HS construction of dim {dim} needs about {work:.1e} flops (limit {RANDOM_HS_WORK_LIMIT:.0e})"
        )));
    }
    let mut dense = vec![0.0; dim * dim * dim];
    let idx = |i: usize, j: usize, k: usize| (i * dim + j) * dim + k;
    for k in 2..dim {
        let level = layers[k];
        if level < 2 {
            continue;
        }
        let pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .filter(|&(i, j)| layers[i] + layers[j] == level)
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let pair_pos = |a: usize, b: usize| -> Option<(usize, f64)> {
            let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
            pairs.iter().position(|&p| p == (lo, hi)).map(|p| (p, sign))
        };
        // Cocycle condition Σ_cyc ω([e_a, e_b], e_c) = 0 over triples of total degree `level`.
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                for c in b + 1..k {
                    if layers[a] + layers[b] + layers[c] != level {
                        continue;
                    }
                    let mut row = vec![0.0; pairs.len()];
                    for (x, y, z) in [(a, b, c), (b, c, a), (c, a, b)] {
                        for m in 0..k {
                            let coef = dense[idx(x, y, m)];
                            if coef == 0.0 || m == z {
                                continue;
                            }
                            if let Some((p, s)) = pair_pos(m, z) {
                                row[p] += coef * s;
                            }
                        }
                    }
                    if row.iter().any(|v| *v != 0.0) {
                        rows.push(row);
                    }
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let target: Vec<f64> = pairs
            .iter()
            .map(|&(i, j)| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z * (((i + 1) * (j + 1) * (k + 1)) as f64).powf(-gamma)
            })
            .collect();
        let column = project_onto_kernel(&rows, &target)?;
        for (&(i, j), &w) in pairs.iter().zip(&column) {
            dense[idx(i, j, k)] = w;
            dense[idx(j, i, k)] = -w;
        }
    }
    let alg = LieAlgebra::from_dense(
        format!("random-hs-{dim}-{step}-{gamma}-{seed}"),
        dim,
        step,
        dense,
    );
    let detected = alg.detect_step().ok_or_else(|| {
        Error::Construction("random construction produced a non-nilpotent tensor".into())
    })?;
    if detected != step {
        return Err(Error::Construction(format!(
            "random construction reached step {detected}, requested {step}"
        )));
    }
    Ok(alg)
}

/// Budget for [`make_random_hs`], in estimated floating-point operations.
pub const RANDOM_HS_WORK_LIMIT: f64 = 5e10;

/// `Σ_k max(triples, pairs)·pairs²`: the SVD cost of every cocycle projection.
fn random_hs_work(layers: &[usize]) -> f64 {
    let mut total = 0.0;
    for k in 2..layers.len() {
        let level = layers[k];
        if level < 2 {
            continue;
        }
        // Counts of earlier indices per layer.
        let mut count = vec![0f64; level + 1];
        for &l in &layers[..k] {
            if l < level {
                count[l] += 1.0;
            }
        }
        let mut pairs = 0.0;
        let mut triples = 0.0;
        for a in 1..level {
            let b = level - a;
            if a < b {
                pairs += count[a] * count[b];
            } else if a == b {
                pairs += count[a] * (count[a] - 1.0) / 2.0;
            }
            for c in 1..level {
                if a + c < level {
                    triples += count[a] * count[c] * count[level - a - c];
                }
            }
        }
        triples /= 6.0;
        total += triples.max(pairs) * pairs * pairs;
    }
    total
}

/// Orthogonal projection of `target` onto the null space of the constraint rows.
fn project_onto_kernel(rows: &[Vec<f64>], target: &[f64]) -> Result<Vec<f64>> {
    let n = target.len();
    if rows.is_empty() {
        return Ok(target.to_vec());
    }
    let m = rows.len().max(n);
    let mut a = DMatrix::<f64>::zeros(m, n);
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            a[(r, c)] = v;
        }
    }
    let svd = a.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD did not return right singular vectors".into()))?;
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-10 * smax.max(1e-300);
    let mut out = vec![0.0; n];
    for (r, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            continue;
        }
        let v = vt.row(r);
        let coef: f64 = (0..n).map(|c| v[c] * target[c]).sum();
        for c in 0..n {
            out[c] += coef * v[c];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_hs_work_guard() {
        let work = |d: usize, r: usize| random_hs_work(&(0..d).map(|k| random_layer(k, r)).collect::<Vec<_>>());
        assert!(work(100, 4) <= RANDOM_HS_WORK_LIMIT);
        assert!(work(130, 4) > RANDOM_HS_WORK_LIMIT);
        assert!(matches!(make_random_hs(200, 4, 1.0, 0), Err(Error::Resource(_))));
    }

    #[test]
    fn heisenberg_like_classical() {
        let omega = vec![0.0, 1.0, -1.0, 0.0];
        let alg = make_heisenberg_like(2, 1, &omega).unwrap();
        assert_eq!(alg.dim(), 3);
        assert_eq!(alg.step(), 2);
        assert_eq!(alg.basis_bracket(0, 1), &[0.0, 0.0, 1.0]);
        assert!(alg.validate().pass);
    }

    #[test]
    fn heisenberg_like_zero_is_abelian() {
        let alg = make_heisenberg_like(3, 2, &vec![0.0; 18]).unwrap();
        assert!(alg.is_abelian());
        assert_eq!(alg.step(), 1);
        assert!(alg.validate().pass);
    }

    #[test]
    fn heisenberg_like_rejects_symmetric_omega() {
        let omega = vec![0.0, 1.0, 1.0, 0.0];
        assert!(matches!(
            make_heisenberg_like(2, 1, &omega),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn heisenberg_five() {
        let omega = standard_symplectic(4).unwrap();
        let alg = make_heisenberg_like(4, 1, &omega).unwrap();
        assert_eq!(alg.dim(), 5);
        let d = alg.validate();
        assert!(d.pass, "{d:?}");
        assert_eq!(d.detected_step, Some(2));
    }

    #[test]
    fn free_nilpotent_dimensions() {
        assert_eq!(make_free_nilpotent(2, 2).unwrap().dim(), 3);
        assert_eq!(make_free_nilpotent(2, 3).unwrap().dim(), 5);
        assert_eq!(make_free_nilpotent(3, 2).unwrap().dim(), 6);
        for r in 1..5 {
            let a = make_free_nilpotent(1, r).unwrap();
            assert_eq!(a.dim(), 1);
            assert!(a.is_abelian());
        }
    }

    #[test]
    fn free_nilpotent_validates() {
        for (d, r) in [(2, 2), (2, 3), (3, 2), (2, 4), (3, 3)] {
            let a = make_free_nilpotent(d, r).unwrap();
            let diag = a.validate();
            assert!(diag.pass, "free ({d},{r}): {diag:?}");
            assert_eq!(diag.detected_step, Some(r));
        }
    }

    #[test]
    fn free_two_three_hall_bracket() {
        let a = make_free_nilpotent(2, 3).unwrap();
        let (e1, e2) = (a.basis_vector(0), a.basis_vector(1));
        let v = a.iterated_bracket(&[e1.clone(), e2, e1]).unwrap();
        assert_eq!(v, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn beta_zero_is_direct_sum() {
        let base = heisenberg3();
        let alg = make_beta_extension(&base, 2, &vec![0.0; 6]).unwrap();
        assert_eq!(alg.dim(), 5);
        for &(i, j, _, _) in alg.triplets() {
            assert!(i >= 2 && j >= 2);
        }
        assert_eq!(alg.basis_bracket(2, 3), &[0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn beta_extension_of_heisenberg() {
        let base = heisenberg3();
        let beta = vec![0.4, -1.3, 0.2, 0.9, 0.5, -0.7];
        let alg = make_beta_extension(&base, 2, &beta).unwrap();
        let d = alg.validate();
        assert!(d.pass, "{d:?}");
        assert_eq!(alg.step(), 2);
        assert!(d.max_jacobi_violation <= 1e-12);
    }

    #[test]
    fn beta_extension_of_abelian_is_abelian() {
        let base = abelian(3).unwrap();
        let alg = make_beta_extension(&base, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(alg.is_abelian());
    }

    #[test]
    fn beta_shape_mismatch() {
        let base = heisenberg3();
        assert!(matches!(
            make_beta_extension(&base, 2, &[1.0; 5]),
            Err(Error::Conformance(_))
        ));
    }

    #[test]
    fn random_hs_is_deterministic() {
        let a = make_random_hs(12, 3, 1.0, 42).unwrap();
        let b = make_random_hs(12, 3, 1.0, 42).unwrap();
        assert_eq!(a, b);
        let c = make_random_hs(12, 3, 1.0, 43).unwrap();
        assert_ne!(a.triplets(), c.triplets());
    }

    #[test]
    fn random_hs_validates_with_declared_step() {
        for (dim, r) in [(4, 3), (8, 2), (10, 3), (12, 3), (10, 4), (16, 3)] {
            let a = make_random_hs(dim, r, 1.0, 7).unwrap();
            let d = a.validate();
            assert!(d.pass, "dim {dim} step {r}: {d:?}");
            assert_eq!(d.detected_step, Some(r));
        }
    }

    #[test]
    fn random_hs_infeasible_layering() {
        assert!(matches!(
            make_random_hs(3, 3, 1.0, 1),
            Err(Error::Construction(_))
        ));
        assert!(matches!(make_random_hs(1, 1, 1.0, 1), Err(Error::Argument(_))));
    }

    #[test]
    fn random_hs_nesting() {
        let big = make_random_hs(16, 3, 1.0, 5).unwrap();
        let small = make_random_hs(8, 3, 1.0, 5).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    assert_eq!(
                        big.structure_constant(i, j, k),
                        small.structure_constant(i, j, k)
                    );
                }
            }
        }
        let restricted: f64 = (0..8)
            .flat_map(|i| (0..8).flat_map(move |j| (0..8).map(move |k| (i, j, k))))
            .map(|(i, j, k)| big.structure_constant(i, j, k).powi(2))
            .sum();
        assert_eq!(restricted, small.hs_norm_sq());
    }
}
