use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Brownian increments on a uniform grid of `[0, t_end]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    dim: usize,
    t_end: f64,
    steps: usize,
    seed: u64,
    stream: u64,
    /// Row-major `steps × dim`.
    increments: Vec<f64>,
}

/// RNG for path `stream` of the run seeded by `seed`. Streams are independent and
/// the assignment does not depend on how paths are spread over workers.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl BrownianPath {
    /// Builds a path from explicit increments (row-major `steps × dim`).
    pub fn from_increments(dim: usize, t_end: f64, increments: Vec<f64>) -> Result<Self> {
        if dim == 0 || increments.is_empty() || increments.len() % dim != 0 {
            return Err(Error::Argument(format!(
                "{} increments do not form whole rows of dimension {dim}",
                increments.len()
            )));
        }
        if !(t_end > 0.0) {
            return Err(Error::Argument("t_end must be positive".into()));
        }
        Ok(Self {
            dim,
            t_end,
            steps: increments.len() / dim,
            seed: 0,
            stream: 0,
            increments,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    pub fn increment(&self, j: usize) -> &[f64] {
        &self.increments[j * self.dim..(j + 1) * self.dim]
    }

    /// `B_{t_end}`.
    pub fn endpoint(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.dim];
        for row in self.increments.chunks_exact(self.dim) {
            for (x, d) in b.iter_mut().zip(row) {
                *x += d;
            }
        }
        b
    }

    /// Path on the sub-grid `steps[range]`, with its own horizon.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.steps {
            return Err(Error::Argument(format!(
                "invalid step range {start}..{end} of {}",
                self.steps
            )));
        }
        Ok(Self {
            dim: self.dim,
            t_end: self.dt() * (end - start) as f64,
            steps: end - start,
            seed: self.seed,
            stream: self.stream,
            increments: self.increments[start * self.dim..end * self.dim].to_vec(),
        })
    }

    /// Sums consecutive pairs of increments (requires an even step count).
    pub fn coarsen(&self) -> Result<Self> {
        if self.steps % 2 != 0 {
            return Err(Error::Argument("cannot coarsen an odd grid".into()));
        }
        let d = self.dim;
        let mut inc = Vec::with_capacity(self.increments.len() / 2);
        for pair in self.increments.chunks_exact(2 * d) {
            for i in 0..d {
                inc.push(pair[i] + pair[d + i]);
            }
        }
        Ok(Self {
            steps: self.steps / 2,
            increments: inc,
            ..self.clone()
        })
    }
}

/// [`sample_path_stream`] on stream 0.
pub fn sample_path(dim: usize, t_end: f64, steps: usize, seed: u64) -> Result<BrownianPath> {
    sample_path_stream(dim, t_end, steps, seed, 0)
}

/// Samples a path by dyadic refinement.
///
/// Write `steps = odd · 2^k`. First `odd` increments of variance `t_end/odd` are
/// drawn; each of `k` refinement rounds then splits every increment `D` of
/// duration `h` into `D/2 + (√h/2)Z` and `D − (D/2 + (√h/2)Z)`. Draws are
/// consumed in a fixed order, so the path with `2N` steps refines the path with
/// `N` steps: summing its increments pairwise gives back the coarse path, up to
/// rounding in the last bit.
pub fn sample_path_stream(
    dim: usize,
    t_end: f64,
    steps: usize,
    seed: u64,
    stream: u64,
) -> Result<BrownianPath> {
    if dim == 0 {
        return Err(Error::Argument("path dimension must be positive".into()));
    }
    if steps == 0 {
        return Err(Error::Argument("steps must be >= 1".into()));
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Argument("t_end must be positive and finite".into()));
    }
    let rounds = steps.trailing_zeros();
    let odd = steps >> rounds;
    let mut rng = path_rng(seed, stream);
    let mut h = t_end / odd as f64;
    let sd = h.sqrt();
    let mut inc: Vec<f64> = (0..odd * dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect();
    for _ in 0..rounds {
        let half_sd = 0.5 * h.sqrt();
        let mut next = Vec::with_capacity(inc.len() * 2);
        for row in inc.chunks_exact(dim) {
            let first: Vec<f64> = row
                .iter()
                .map(|&d| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    0.5 * d + half_sd * z
                })
                .collect();
            next.extend_from_slice(&first);
            next.extend(row.iter().zip(&first).map(|(d, f)| d - f));
        }
        inc = next;
        h *= 0.5;
    }
    Ok(BrownianPath {
        dim,
        t_end,
        steps,
        seed,
        stream,
        increments: inc,
    })
}

/// Orthogonal projection onto the first `keep` coordinates; the grid and the
/// randomness are shared with `path`.
pub fn project_path(path: &BrownianPath, keep: usize) -> Result<BrownianPath> {
    if keep == 0 || keep > path.dim {
        return Err(Error::Argument(format!(
            "projection rank {keep} outside 1..={}",
            path.dim
        )));
    }
    let mut out = path.clone();
    for row in out.increments.chunks_exact_mut(path.dim) {
        row[keep..].iter_mut().for_each(|x| *x = 0.0);
    }
    Ok(out)
}

/// The first `keep` coordinates of `path` as a path of dimension `keep`.
pub fn truncate_path(path: &BrownianPath, keep: usize) -> Result<BrownianPath> {
    if keep == 0 || keep > path.dim {
        return Err(Error::Argument(format!(
            "truncation rank {keep} outside 1..={}",
            path.dim
        )));
    }
    let increments = path
        .increments
        .chunks_exact(path.dim)
        .flat_map(|row| row[..keep].iter().copied())
        .collect();
    Ok(BrownianPath {
        dim: keep,
        increments,
        ..path.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_in_seed() {
        let a = sample_path(3, 1.0, 64, 9).unwrap();
        let b = sample_path(3, 1.0, 64, 9).unwrap();
        assert_eq!(a, b);
        let c = sample_path_stream(3, 1.0, 64, 9, 1).unwrap();
        assert_ne!(a.increments(), c.increments());
    }

    #[test]
    fn dyadic_refinement() {
        for base in [1usize, 3, 5] {
            let coarse = sample_path(2, 0.7, base * 8, 4).unwrap();
            let fine = sample_path(2, 0.7, base * 16, 4).unwrap();
            let summed = fine.coarsen().unwrap();
            for (a, b) in summed.increments().iter().zip(coarse.increments()) {
                assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn endpoint_variance() {
        let t = 0.8;
        let n = 20_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for k in 0..n {
            let p = sample_path_stream(1, t, 4, 1, k).unwrap();
            let b = p.endpoint()[0];
            s += b;
            s2 += b * b;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        // SE of a sample variance of N(0, t) is about t·√(2/n).
        assert!((var - t).abs() < 3.0 * t * (2.0 / n as f64).sqrt(), "{var}");
    }

    #[test]
    fn projection() {
        let p = sample_path(4, 1.0, 8, 2).unwrap();
        assert_eq!(project_path(&p, 4).unwrap(), p);
        let one = project_path(&p, 1).unwrap();
        for j in 0..8 {
            assert_eq!(one.increment(j)[0], p.increment(j)[0]);
            assert!(one.increment(j)[1..].iter().all(|x| *x == 0.0));
        }
        assert!(project_path(&p, 0).is_err());
        assert!(project_path(&p, 5).is_err());
        assert_eq!(truncate_path(&p, 2).unwrap().dim(), 2);
    }

    #[test]
    fn argument_errors() {
        assert!(sample_path(2, 1.0, 0, 1).is_err());
        assert!(sample_path(2, 0.0, 4, 1).is_err());
        assert!(sample_path(0, 1.0, 4, 1).is_err());
    }
}
