//! Brownian paths, discrete Itô signatures and Brownian motion on the group.

mod formula;
mod path;
mod signature;

pub use formula::{
    group_bm_euler, group_bm_formula, strichartz_smooth, BmFormula, EulerScheme,
    IntegralTermSpec, TermTable,
};
pub use path::{
    path_rng, project_path, sample_path, sample_path_stream, truncate_path, BrownianPath,
};
pub use signature::{
    signature, signature_with_limit, weighted_signature, weighted_signature_with_limit,
    Signature, WeightedSignature, DEFAULT_SIGNATURE_LIMIT,
};
