use std::path::Path;

use serde::{Deserialize, Serialize};

use super::LieAlgebra;
use crate::error::Result;

/// Serialized form of an algebra: `{label, dim, step, triplets: [[i, j, k, value], …]}`.
///
/// Values are written in the shortest decimal form that parses back to the same
/// `f64`, so save/load round trips are bit-exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDocument {
    pub label: String,
    pub dim: usize,
    pub step: usize,
    pub triplets: Vec<(usize, usize, usize, f64)>,
}

impl From<&LieAlgebra> for AlgebraDocument {
    fn from(alg: &LieAlgebra) -> Self {
        Self {
            label: alg.label().to_string(),
            dim: alg.dim(),
            step: alg.step(),
            triplets: alg.triplets().to_vec(),
        }
    }
}

impl AlgebraDocument {
    /// Builds the algebra without validating it.
    pub fn into_algebra(self) -> Result<LieAlgebra> {
        LieAlgebra::from_triplets(self.label, self.dim, self.step, self.triplets)
    }
}

impl LieAlgebra {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&AlgebraDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<AlgebraDocument>(text)?.into_algebra()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// Loads an algebra document. The result is not validated.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let alg = make_random_hs(12, 3, 1.0, 17).unwrap();
        let back = LieAlgebra::from_json(&alg.to_json().unwrap()).unwrap();
        assert!(alg == back);
        for (a, b) in alg.triplets().iter().zip(back.triplets()) {
            assert_eq!(a.3.to_bits(), b.3.to_bits());
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("nilheat-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("h.json");
        let h = heisenberg3();
        h.save(&path).unwrap();
        assert_eq!(LieAlgebra::load(&path).unwrap(), h);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn malformed_document() {
        assert!(LieAlgebra::from_json("{\"label\": 1}").is_err());
        let bad = r#"{"label":"x","dim":2,"step":1,"triplets":[[0,1,5,1.0]]}"#;
        assert!(matches!(
            LieAlgebra::from_json(bad),
            Err(crate::Error::Conformance(_))
        ));
    }
}
