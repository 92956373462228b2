use super::BrownianPath;
use crate::error::{Error, Result};

/// Largest tensor (in entries) a signature level may occupy by default.
pub const DEFAULT_SIGNATURE_LIMIT: usize = 10_000_000;

/// Truncated discrete Itô signature: `levels[ℓ]` has `dim^ℓ` entries, `levels[0] = [1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signature {
    dim: usize,
    levels: Vec<Vec<f64>>,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, l: usize) -> &[f64] {
        &self.levels[l]
    }

    /// Entry at zero-based multi-index `idx` of level `idx.len()`.
    pub fn entry(&self, idx: &[usize]) -> f64 {
        let flat = idx.iter().fold(0, |acc, &i| acc * self.dim + i);
        self.levels[idx.len()][flat]
    }

    /// Truncated tensor-algebra product `self ⊗ other`.
    pub fn chen_product(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim || self.depth() != other.depth() {
            return Err(Error::Argument("signatures differ in shape".into()));
        }
        let depth = self.depth();
        let mut levels = Vec::with_capacity(depth + 1);
        for l in 0..=depth {
            let mut out = vec![0.0; self.dim.pow(l as u32)];
            for i in 0..=l {
                let a = &self.levels[i];
                let b = &other.levels[l - i];
                for (x, &u) in a.iter().enumerate() {
                    if u == 0.0 {
                        continue;
                    }
                    let row = &mut out[x * b.len()..(x + 1) * b.len()];
                    for (o, &v) in row.iter_mut().zip(b) {
                        *o += u * v;
                    }
                }
            }
            levels.push(out);
        }
        Ok(Self {
            dim: self.dim,
            levels,
        })
    }
}

/// Iterated sums `Σ_{j₁<…<j_p} t_{j₁}^{d₁}⋯t_{j_p}^{d_p} ΔB_{j₁} ⊗ … ⊗ ΔB_{j_p}`
/// for each requested exponent pattern `d`, with `t_j` the left grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSignature {
    patterns: Vec<Vec<u32>>,
    values: Vec<Vec<f64>>,
}

impl WeightedSignature {
    pub fn patterns(&self) -> &[Vec<u32>] {
        &self.patterns
    }

    /// Tensor for `patterns()[i]`, length `dim^p`.
    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn get(&self, pattern: &[u32]) -> Option<&[f64]> {
        self.patterns
            .iter()
            .position(|p| p == pattern)
            .map(|i| self.values[i].as_slice())
    }
}

#[derive(Debug, Clone)]
struct Node {
    parent: usize,
    exponent: u32,
    level: usize,
}

/// Prefix trie of exponent patterns; node 0 is the empty pattern.
#[derive(Debug, Clone)]
pub(crate) struct PatternTrie {
    nodes: Vec<Node>,
    /// Update order: deepest level first, so parents still hold their old values.
    order: Vec<usize>,
    leaves: Vec<usize>,
    dim: usize,
}

impl PatternTrie {
    pub(crate) fn new(dim: usize, patterns: &[Vec<u32>], limit: usize) -> Result<Self> {
        let mut nodes = vec![Node {
            parent: 0,
            exponent: 0,
            level: 0,
        }];
        let mut children: Vec<Vec<(u32, usize)>> = vec![Vec::new()];
        let mut leaves = Vec::with_capacity(patterns.len());
        for pat in patterns {
            let size = dim.checked_pow(pat.len() as u32).filter(|&s| s <= limit);
            if size.is_none() {
                return Err(Error::Resource(format!(
                    "signature level {} in dimension {dim} exceeds {limit} entries",
                    pat.len()
                )));
            }
            let mut cur = 0;
            for &e in pat {
                cur = match children[cur].iter().find(|(x, _)| *x == e) {
                    Some(&(_, c)) => c,
                    None => {
                        let id = nodes.len();
                        nodes.push(Node {
                            parent: cur,
                            exponent: e,
                            level: nodes[cur].level + 1,
                        });
                        children.push(Vec::new());
                        children[cur].push((e, id));
                        id
                    }
                };
            }
            leaves.push(cur);
        }
        let mut order: Vec<usize> = (1..nodes.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(nodes[i].level));
        Ok(Self {
            nodes,
            order,
            leaves,
            dim,
        })
    }

    pub(crate) fn zero_state(&self) -> Vec<Vec<f64>> {
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let mut v = vec![0.0; self.dim.pow(n.level as u32)];
                if i == 0 {
                    v[0] = 1.0;
                }
                v
            })
            .collect()
    }

    /// Runs the recursion over `path` into `state` (reset first).
    pub(crate) fn run(&self, path: &BrownianPath, state: &mut [Vec<f64>]) {
        for (i, s) in state.iter_mut().enumerate() {
            s.iter_mut().for_each(|x| *x = 0.0);
            if i == 0 {
                s[0] = 1.0;
            }
        }
        let d = self.dim;
        let dt = path.dt();
        for j in 0..path.steps() {
            let t = j as f64 * dt;
            let db = path.increment(j);
            for &node in &self.order {
                let n = &self.nodes[node];
                let w = if n.exponent == 0 {
                    1.0
                } else {
                    t.powi(n.exponent as i32)
                };
                if w == 0.0 {
                    continue;
                }
                let (lo, hi) = state.split_at_mut(node);
                let parent = &lo[n.parent];
                let target = &mut hi[0];
                for (a, &pv) in parent.iter().enumerate() {
                    let c = w * pv;
                    if c == 0.0 {
                        continue;
                    }
                    for (o, &b) in target[a * d..(a + 1) * d].iter_mut().zip(db) {
                        *o += c * b;
                    }
                }
            }
        }
    }

    pub(crate) fn leaf(&self, i: usize) -> usize {
        self.leaves[i]
    }
}

/// Weighted discrete Itô signature for the given exponent patterns.
pub fn weighted_signature(path: &BrownianPath, patterns: &[Vec<u32>]) -> Result<WeightedSignature> {
    weighted_signature_with_limit(path, patterns, DEFAULT_SIGNATURE_LIMIT)
}

pub fn weighted_signature_with_limit(
    path: &BrownianPath,
    patterns: &[Vec<u32>],
    limit: usize,
) -> Result<WeightedSignature> {
    let trie = PatternTrie::new(path.dim(), patterns, limit)?;
    let mut state = trie.zero_state();
    trie.run(path, &mut state);
    let values = (0..patterns.len())
        .map(|i| state[trie.leaf(i)].clone())
        .collect();
    Ok(WeightedSignature {
        patterns: patterns.to_vec(),
        values,
    })
}

/// Unweighted signature through level `depth`.
pub fn signature(path: &BrownianPath, depth: usize) -> Result<Signature> {
    signature_with_limit(path, depth, DEFAULT_SIGNATURE_LIMIT)
}

pub fn signature_with_limit(path: &BrownianPath, depth: usize, limit: usize) -> Result<Signature> {
    let patterns: Vec<Vec<u32>> = (0..=depth).map(|l| vec![0; l]).collect();
    let ws = weighted_signature_with_limit(path, &patterns, limit)?;
    Ok(Signature {
        dim: path.dim(),
        levels: ws.values,
    })
}
