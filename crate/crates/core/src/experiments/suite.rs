use crate::algebra::{LieAlgebra, Vector};
use crate::bchd::BchdLaw;
use crate::error::{Error, Result};
use crate::geometry::{cylinder_gradient_with, CylinderPolynomial};

use super::gaussian_expectation;

/// Identifiers of the Harnack test functions, in report order.
pub const HARNACK_SUITE: [&str; 3] = ["cos", "bump", "poly"];
/// Identifiers of the log-Sobolev cylinder polynomials, in report order.
pub const LOGSOB_SUITE: [&str; 4] = ["const", "linear", "quadratic", "cubic"];

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `2 + cos⟨x, u⟩`.
    Cosine(Vector),
    /// `exp(−Σ_{i<m} x_i²)`.
    Bump(usize),
    Polynomial(CylinderPolynomial),
}

/// A function of the exponential coordinates from the fixed suite.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub id: String,
    kind: Kind,
}

fn monomial(dim: usize, factors: &[usize], coef: f64) -> (Vec<u32>, f64) {
    let mut e = vec![0u32; dim];
    for &i in factors {
        e[i] += 1;
    }
    (e, coef)
}

fn polynomial(dim: usize, terms: &[(&[usize], f64)]) -> CylinderPolynomial {
    let terms = terms.iter().map(|(f, c)| monomial(dim, f, *c)).collect();
    CylinderPolynomial::new(dim, terms).expect("exponents sized to dim")
}

impl TestFunction {
    pub fn harnack(id: &str, dim: usize) -> Result<Self> {
        let last = dim - 1;
        let kind = match id {
            "cos" => Kind::Cosine((0..dim).map(|i| 1.0 / (i + 1) as f64).collect()),
            "bump" => Kind::Bump(dim.min(2)),
            "poly" => Kind::Polynomial(polynomial(
                dim,
                &[(&[], 1.0), (&[0, 0], 1.0), (&[last, last], 0.5)],
            )),
            _ => return Err(Error::Argument(format!("unknown Harnack test function {id:?}"))),
        };
        Ok(Self { id: id.into(), kind })
    }

    pub fn logsob(id: &str, dim: usize) -> Result<Self> {
        let last = dim - 1;
        let second = 1.min(last);
        let poly = match id {
            "const" => polynomial(dim, &[(&[], 1.0)]),
            "linear" => polynomial(dim, &[(&[], 1.0), (&[0], 0.1)]),
            "quadratic" => polynomial(
                dim,
                &[(&[], 1.0), (&[0, second], 0.25), (&[last], 1.0)],
            ),
            "cubic" => polynomial(
                dim,
                &[(&[], 2.0), (&[0], 0.5), (&[0, second, last], 1.0 / 6.0)],
            ),
            _ => return Err(Error::Argument(format!("unknown log-Sobolev polynomial {id:?}"))),
        };
        Ok(Self {
            id: id.into(),
            kind: Kind::Polynomial(poly),
        })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Cosine(u) => 2.0 + x.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().cos(),
            Kind::Bump(m) => (-x[..*m].iter().map(|v| v * v).sum::<f64>()).exp(),
            Kind::Polynomial(p) => p.eval(x),
        }
    }

    pub fn polynomial(&self) -> Option<&CylinderPolynomial> {
        match &self.kind {
            Kind::Polynomial(p) => Some(p),
            _ => None,
        }
    }

    /// Group gradient; defined for the polynomial members only.
    pub fn gradient(&self, alg: &LieAlgebra, law: &BchdLaw, g: &[f64]) -> Result<Vector> {
        match &self.kind {
            Kind::Polynomial(p) => cylinder_gradient_with(alg, law, p, g),
            _ => Err(Error::Argument(format!("{} has no polynomial gradient", self.id))),
        }
    }

    /// `(E f(B_t + h), E f(B_t)²)` for `B_t ~ N(0, tI)`, when known in closed form.
    pub fn gaussian_moments(&self, h: &[f64], t: f64) -> Option<(f64, f64)> {
        let d = h.len();
        match &self.kind {
            Kind::Cosine(u) => {
                let uu: f64 = u.iter().map(|x| x * x).sum();
                let hu: f64 = h.iter().zip(u).map(|(a, b)| a * b).sum();
                let e1 = (-0.5 * t * uu).exp();
                let mean = 2.0 + hu.cos() * e1;
                let second = 4.0 + 4.0 * e1 + 0.5 + 0.5 * (-2.0 * t * uu).exp();
                Some((mean, second))
            }
            Kind::Bump(m) => {
                let mean = h[..*m]
                    .iter()
                    .map(|hi| (-hi * hi / (1.0 + 2.0 * t)).exp() / (1.0 + 2.0 * t).sqrt())
                    .product();
                let second = (1.0 + 4.0 * t).powf(-(*m as f64) / 2.0);
                Some((mean, second))
            }
            Kind::Polynomial(_) if self.id == "poly" => {
                if d == 1 {
                    Some((
                        1.0 + 1.5 * (h[0] * h[0] + t),
                        1.0 + 3.0 * t + 6.75 * t * t,
                    ))
                } else {
                    let l = d - 1;
                    Some((
                        1.0 + (h[0] * h[0] + t) + 0.5 * (h[l] * h[l] + t),
                        1.0 + 3.0 * t + 4.75 * t * t,
                    ))
                }
            }
            _ => None,
        }
    }

    /// `(Ent(f²), 2t·E‖∇f‖²)` under `N(0, tI)` for the constant and linear
    /// log-Sobolev polynomials.
    pub fn gaussian_entropy(&self, t: f64) -> Option<(f64, f64)> {
        match self.id.as_str() {
            "const" => Some((0.0, 0.0)),
            "linear" => {
                let eps = 0.1;
                let m = 1.0 + eps * eps * t;
                let a = gaussian_expectation(
                    |x| {
                        let f2 = (1.0 + eps * x).powi(2);
                        if f2 > 0.0 {
                            f2 * f2.ln()
                        } else {
                            0.0
                        }
                    },
                    0.0,
                    t,
                );
                Some((a - m * m.ln(), 2.0 * t * eps * eps))
            }
            _ => None,
        }
    }
}

fn select(requested: &[String], all: &[&str]) -> Vec<String> {
    if requested.is_empty() {
        all.iter().map(|s| s.to_string()).collect()
    } else {
        requested.to_vec()
    }
}

pub fn harnack_suite(requested: &[String], dim: usize) -> Result<Vec<TestFunction>> {
    select(requested, &HARNACK_SUITE)
        .iter()
        .map(|id| TestFunction::harnack(id, dim))
        .collect()
}

pub fn logsob_suite(requested: &[String], dim: usize) -> Result<Vec<TestFunction>> {
    select(requested, &LOGSOB_SUITE)
        .iter()
        .map(|id| TestFunction::logsob(id, dim))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_against_quadrature() {
        // One-dimensional checks of the moment formulas.
        let t = 0.7;
        let h = [0.4];
        for id in HARNACK_SUITE {
            let f = TestFunction::harnack(id, 1).unwrap();
            let (mean, second) = f.gaussian_moments(&h, t).unwrap();
            let q_mean = gaussian_expectation(|x| f.eval(&[x]), h[0], t);
            let q_second = gaussian_expectation(|x| f.eval(&[x]).powi(2), 0.0, t);
            assert!((mean - q_mean).abs() < 1e-10, "{id}");
            assert!((second - q_second).abs() < 1e-10, "{id}");
        }
    }

    #[test]
    fn suite_shapes() {
        assert_eq!(harnack_suite(&[], 3).unwrap().len(), 3);
        assert_eq!(logsob_suite(&[], 3).unwrap().len(), 4);
        assert!(harnack_suite(&["nope".into()], 3).is_err());
        let q = TestFunction::logsob("quadratic", 3).unwrap();
        assert_eq!(q.eval(&[2.0, 4.0, 1.0]), 1.0 + 2.0 + 1.0);
        let c = TestFunction::logsob("cubic", 1).unwrap();
        assert_eq!(c.polynomial().unwrap().degree(), 3);
    }
}
