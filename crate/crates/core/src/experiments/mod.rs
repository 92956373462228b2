//! Monte Carlo checks of the Harnack and log-Sobolev inequalities, projection
//! convergence and closed-form moments, with reproducible reports.

mod report;
mod runs;
mod suite;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{
    abelian, heisenberg3, make_free_nilpotent, make_random_hs, LieAlgebra,
};
use crate::error::{Error, Result};

pub use report::{CaseResult, ExperimentReport, Verdict};
pub use runs::{run_convergence, run_harnack, run_logsob, run_moments, RunOptions};
pub use suite::{harnack_suite, logsob_suite, TestFunction, HARNACK_SUITE, LOGSOB_SUITE};

/// Fewest paths for which a pass/fail verdict is issued.
pub const MIN_VERDICT_PATHS: usize = 1000;

/// `c(x) = x/(eˣ − 1)` with `c(0) = 1`.
pub fn c_function(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        // 1 − x/2 + x²/12 − x⁴/720
        let x2 = x * x;
        1.0 - 0.5 * x + x2 / 12.0 - x2 * x2 / 720.0
    } else {
        x / x.exp_m1()
    }
}

/// `(1 − e^{−kt})/k`, equal to `t` at `k = 0`.
pub fn logsob_factor(k: f64, t: f64) -> f64 {
    let x = k * t;
    if x.abs() < 1e-8 {
        t * (1.0 - 0.5 * x)
    } else {
        -(-x).exp_m1() / k
    }
}

/// Exponent `c(kt)(q − 1)/(2t)` multiplying `d(e,h)²` in the Harnack bound.
pub fn harnack_exponent(k: f64, t: f64, q: f64) -> f64 {
    c_function(k * t) * (q - 1.0) / (2.0 * t)
}

/// The same exponent in the form `k(q − 1)/(2(e^{kt} − 1))`.
pub fn harnack_exponent_alt(k: f64, t: f64, q: f64) -> f64 {
    if k == 0.0 {
        (q - 1.0) / (2.0 * t)
    } else {
        k * (q - 1.0) / (2.0 * (k * t).exp_m1())
    }
}

/// Scientific parameters of a run; everything here enters the config hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in name (see [`algebra_from_spec`]) or path to an algebra JSON file.
    pub algebra: String,
    pub t: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    /// Harnack exponent `q ≥ 1`; `q′ = q/(q − 1)`.
    pub q: f64,
    /// Test-function identifiers; empty selects the whole suite.
    pub suite: Vec<String>,
    /// Translation elements `h`; empty selects a default list of four.
    pub translations: Vec<Vec<f64>>,
    /// Projection ranks for the convergence study; empty selects powers of two and `dim`.
    pub ladder: Vec<usize>,
    /// Coordinate-descent sweeps for the distance upper bound.
    pub distance_iterations: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algebra: "heisenberg-3".into(),
            t: 1.0,
            steps: 128,
            paths: 100_000,
            seed: 42,
            q: 2.0,
            suite: Vec::new(),
            translations: Vec::new(),
            ladder: Vec::new(),
            distance_iterations: 200,
        }
    }
}

impl ExperimentConfig {
    pub fn check(&self) -> Result<()> {
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::Argument("t must be positive and finite".into()));
        }
        if self.steps == 0 || self.paths == 0 {
            return Err(Error::Argument("steps and paths must be positive".into()));
        }
        if !(self.q >= 1.0) {
            return Err(Error::Argument("q must be at least 1".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        config_hash(self)
    }

    pub fn load_algebra(&self) -> Result<LieAlgebra> {
        algebra_from_spec(&self.algebra)
    }
}

/// Hex SHA-256 of the compact JSON serialization of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    use sha2::{Digest, Sha256};
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

fn parse_fields<const N: usize>(rest: &str, spec: &str) -> Result<[usize; N]> {
    let parts: Vec<&str> = rest.split('-').collect();
    if parts.len() != N {
        return Err(Error::Parse(format!("malformed algebra spec {spec:?}")));
    }
    let mut out = [0usize; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p
            .parse()
            .map_err(|_| Error::Parse(format!("malformed algebra spec {spec:?}")))?;
    }
    Ok(out)
}

/// Resolves an algebra by name or file.
///
/// Built-ins: `heisenberg-3`, `abelian-D`, `free-G-R`, `random-hs-D-R` and
/// `random-hs-D-R-GAMMA-SEED`. Anything else is read as an algebra JSON file and
/// must validate.
pub fn algebra_from_spec(spec: &str) -> Result<LieAlgebra> {
    let spec = spec.trim();
    if spec == "heisenberg-3" || spec == "heisenberg3" {
        return Ok(heisenberg3());
    }
    if let Some(rest) = spec.strip_prefix("abelian-") {
        let [d] = parse_fields::<1>(rest, spec)?;
        return abelian(d);
    }
    if let Some(rest) = spec.strip_prefix("free-") {
        let [g, r] = parse_fields::<2>(rest, spec)?;
        return make_free_nilpotent(g, r);
    }
    if let Some(rest) = spec.strip_prefix("random-hs-") {
        let parts: Vec<&str> = rest.split('-').collect();
        let bad = || Error::Parse(format!("malformed algebra spec {spec:?}"));
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
        return match parts.as_slice() {
            [d, r] => make_random_hs(num(d)?, num(r)?, 1.0, 0),
            [d, r, g, s] => make_random_hs(
                num(d)?,
                num(r)?,
                g.parse().map_err(|_| bad())?,
                s.parse().map_err(|_| bad())?,
            ),
            _ => Err(bad()),
        };
    }
    let path = Path::new(spec);
    if !path.is_file() {
        return Err(Error::Parse(format!(
            "unknown algebra {spec:?}: not a built-in name or an existing file"
        )));
    }
    let alg = LieAlgebra::load(path)?;
    let diag = alg.validate();
    if !diag.pass {
        return Err(Error::Validation(format!(
            "{spec}: antisymmetry {:.3e}, Jacobi {:.3e}, step {:?}",
            diag.max_antisymmetry_violation, diag.max_jacobi_violation, diag.detected_step
        )));
    }
    Ok(alg)
}

/// `E[φ(X)]` for `X ~ N(mean, var)` by the trapezoid rule on `mean ± 12σ`.
///
/// Exponentially accurate for smooth integrands of moderate growth.
pub fn gaussian_expectation(phi: impl Fn(f64) -> f64, mean: f64, var: f64) -> f64 {
    if var == 0.0 {
        return phi(mean);
    }
    let sd = var.sqrt();
    let n = 4000;
    let h = 24.0 / n as f64;
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    (0..=n)
        .map(|i| {
            let z = -12.0 + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * phi(mean + sd * z) * (-0.5 * z * z).exp()
        })
        .sum::<f64>()
        * h
        * norm
}
