use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A family `(A_i, α_i)` of subsets of `{0, …, j−1}` with positive weights such
/// that `Σ_i α_i [l ∈ A_i] = 1` for every `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformCover {
    j: usize,
    sets: Vec<Vec<usize>>,
    alphas: Vec<f64>,
}

/// Wire format with 1-based indices: `{"j": int, "sets": [[int, …], …], "alphas": [float, …]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverFile {
    pub j: usize,
    pub sets: Vec<Vec<usize>>,
    pub alphas: Vec<f64>,
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidCover(msg.into()))
}

impl UniformCover {
    /// Build and validate a cover with 0-based indices.
    pub fn new(j: usize, sets: Vec<Vec<usize>>, alphas: Vec<f64>) -> Result<Self> {
        if j == 0 {
            return bad("ground set must be nonempty");
        }
        if sets.is_empty() {
            return bad("cover has no sets");
        }
        if sets.len() != alphas.len() {
            return bad(format!("{} sets but {} weights", sets.len(), alphas.len()));
        }
        let mut coverage = vec![0.0; j];
        for (i, (set, &a)) in sets.iter().zip(&alphas).enumerate() {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("weight {a} of set {} is not positive", i + 1));
            }
            if set.is_empty() {
                return bad(format!("set {} is empty but has positive weight", i + 1));
            }
            let mut seen = vec![false; j];
            for &l in set {
                if l >= j {
                    return bad(format!("index {} in set {} is outside 1..={j}", l + 1, i + 1));
                }
                if seen[l] {
                    return bad(format!("index {} repeated in set {}", l + 1, i + 1));
                }
                seen[l] = true;
                coverage[l] += a;
            }
        }
        for (l, c) in coverage.iter().enumerate() {
            if (c - 1.0).abs() > 1e-12 {
                return bad(format!("index {} is covered with total weight {c}, not 1", l + 1));
            }
        }
        Ok(Self { j, sets, alphas })
    }

    /// `A_i = {0..j} \ {i}` with `α_i = 1/(j−1)`.
    pub fn leave_one_out(j: usize) -> Result<Self> {
        if j < 2 {
            return bad("leave-one-out cover needs j ≥ 2");
        }
        let sets = (0..j).map(|i| (0..j).filter(|&l| l != i).collect()).collect();
        Self::new(j, sets, vec![1.0 / (j - 1) as f64; j])
    }

    /// `A_i = {i}` with `α_i = 1`.
    pub fn singletons(j: usize) -> Result<Self> {
        Self::new(j, (0..j).map(|i| vec![i]).collect(), vec![1.0; j])
    }

    /// A partition of `{0..j}` into blocks, each with weight 1.
    pub fn partition(j: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = blocks.len();
        Self::new(j, blocks, vec![1.0; n])
    }

    pub fn ground_size(&self) -> usize {
        self.j
    }

    /// The sets `A_i`, 0-based.
    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn to_file(&self) -> CoverFile {
        CoverFile {
            j: self.j,
            sets: self.sets.iter().map(|s| s.iter().map(|&l| l + 1).collect()).collect(),
            alphas: self.alphas.clone(),
        }
    }
}

/// Validate a cover read from its wire format.
pub fn validate_cover(raw: &CoverFile) -> Result<UniformCover> {
    let mut sets = Vec::with_capacity(raw.sets.len());
    for (i, s) in raw.sets.iter().enumerate() {
        let mut set = Vec::with_capacity(s.len());
        for &l in s {
            if l == 0 {
                return bad(format!("set {} contains index 0; indices are 1-based", i + 1));
            }
            set.push(l - 1);
        }
        sets.push(set);
    }
    UniformCover::new(raw.j, sets, raw.alphas.clone())
}
