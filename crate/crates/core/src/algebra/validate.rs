use nalgebra::DMatrix;
use serde::Serialize;

use super::LieAlgebra;
use crate::ALGEBRA_TOL;

/// Outcome of [`LieAlgebra::validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    pub max_antisymmetry_violation: f64,
    pub max_jacobi_violation: f64,
    /// Length of the lower central series, `None` if it does not terminate.
    pub detected_step: Option<usize>,
    pub declared_step: usize,
    /// `‖[·,·]‖₂²`.
    pub hs_norm_sq: f64,
    pub step_consistent: bool,
    pub pass: bool,
}

impl LieAlgebra {
    /// Checks antisymmetry, the Jacobi identity on all basis triples, and nilpotency.
    ///
    /// `pass` holds when both violations are at most `1e-12` and the lower central
    /// series terminates. A mismatch between the detected and declared step is
    /// reported in `step_consistent`.
    pub fn validate(&self) -> Diagnostics {
        let d = self.dim();
        let mut anti: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let a = self.basis_bracket(i, j);
                let b = self.basis_bracket(j, i);
                for k in 0..d {
                    anti = anti.max((a[k] + b[k]).abs());
                }
            }
        }
        // Once antisymmetry holds, the Jacobiator is alternating, so i < j < k suffices;
        // otherwise every ordered triple is checked.
        let all_triples = anti > ALGEBRA_TOL;
        let mut jac: f64 = 0.0;
        let mut t1 = vec![0.0; d];
        let mut t2 = vec![0.0; d];
        let mut t3 = vec![0.0; d];
        for i in 0..d {
            let j0 = if all_triples { 0 } else { i + 1 };
            for j in j0..d {
                let k0 = if all_triples { 0 } else { j + 1 };
                for k in k0..d {
                    self.bracket_with_basis_right(self.basis_bracket(i, j), k, &mut t1);
                    self.bracket_with_basis_right(self.basis_bracket(j, k), i, &mut t2);
                    self.bracket_with_basis_right(self.basis_bracket(k, i), j, &mut t3);
                    for m in 0..d {
                        jac = jac.max((t1[m] + t2[m] + t3[m]).abs());
                    }
                }
            }
        }
        let detected_step = self.detect_step();
        let pass = anti <= ALGEBRA_TOL && jac <= ALGEBRA_TOL && detected_step.is_some();
        Diagnostics {
            max_antisymmetry_violation: anti,
            max_jacobi_violation: jac,
            detected_step,
            declared_step: self.step(),
            hs_norm_sq: self.hs_norm_sq(),
            step_consistent: detected_step == Some(self.step()),
            pass,
        }
    }

    /// Length of the lower central series `𝔤 ⊋ [𝔤,𝔤] ⊋ … ⊋ 0`, computed from numerical
    /// ranks. `None` if the series stalls above zero.
    pub(crate) fn detect_step(&self) -> Option<usize> {
        let d = self.dim();
        let scale = self.hs_norm_sq().sqrt().max(1.0);
        let tol = ALGEBRA_TOL * scale;
        // Orthonormal basis of the current term, stored as columns.
        let mut current = DMatrix::<f64>::identity(d, d);
        let mut rank = d;
        let mut step = 0;
        let mut tmp = vec![0.0; d];
        while rank > 0 {
            step += 1;
            if step > d + 1 {
                return None;
            }
            let cols = current.ncols();
            let mut next = DMatrix::<f64>::zeros(d, (d * cols).max(d));
            for c in 0..cols {
                let v: Vec<f64> = current.column(c).iter().copied().collect();
                for i in 0..d {
                    // [e_i, v] = −[v, e_i]
                    self.bracket_with_basis_right(&v, i, &mut tmp);
                    for (k, &x) in tmp.iter().enumerate() {
                        next[(k, c * d + i)] = -x;
                    }
                }
            }
            let svd = next.svd(true, false);
            let u = svd.u.expect("left singular vectors requested");
            let keep: Vec<usize> = svd
                .singular_values
                .iter()
                .enumerate()
                .filter(|(_, &s)| s > tol)
                .map(|(i, _)| i)
                .collect();
            if keep.len() >= rank {
                return None;
            }
            rank = keep.len();
            current = DMatrix::from_fn(d, rank, |r, c| u[(r, keep[c])]);
        }
        Some(step)
    }
}
