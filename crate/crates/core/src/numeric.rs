//! Small numerical helpers: compensated sums, log-space ball volumes,
//! combinatorial enumeration and deterministic parallel block reductions.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln Γ(k/2 + 1)`-based log volume of the unit ball in `R^k` (`ω_0 = 1`).
pub fn ln_ball_volume(k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let half = k as f64 / 2.0;
    half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)
}

/// Volume `ω_k` of the unit ball in `R^k`.
pub fn ball_volume(k: usize) -> f64 {
    if k > 256 {
        return ln_ball_volume(k).exp();
    }
    // ω_k = 2π/k · ω_{k−2}
    let mut w = if k.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut i = k % 2;
    while i < k {
        i += 2;
        w *= 2.0 * std::f64::consts::PI / i as f64;
    }
    w
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `n!` as a float (exact up to 22!).
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Product of the given counts, saturating at `u128::MAX`.
pub fn saturating_product(counts: impl IntoIterator<Item = usize>) -> u128 {
    counts
        .into_iter()
        .try_fold(1u128, |acc, n| acc.checked_mul(n as u128))
        .unwrap_or(u128::MAX)
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_combination(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut next = 0;
    for slot in 0..k {
        let mut c = next;
        loop {
            let remaining = binomial(n - c - 1, k - slot - 1);
            if rank < remaining {
                break;
            }
            rank -= remaining;
            c += 1;
        }
        out.push(c);
        next = c + 1;
    }
    out
}

/// Advance `comb` to the next `k`-subset of `0..n`; false when exhausted.
pub fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for m in i + 1..k {
                comb[m] = comb[m - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Decode `index` into mixed-radix digits with the given radices (last digit fastest).
pub fn unrank_tuple(radices: &[usize], mut index: u128) -> Vec<usize> {
    let mut digits = vec![0; radices.len()];
    for (slot, &r) in radices.iter().enumerate().rev() {
        digits[slot] = (index % r as u128) as usize;
        index /= r as u128;
    }
    digits
}

/// Advance mixed-radix digits; false on wraparound.
pub fn next_tuple(digits: &mut [usize], radices: &[usize]) -> bool {
    for slot in (0..digits.len()).rev() {
        digits[slot] += 1;
        if digits[slot] < radices[slot] {
            return true;
        }
        digits[slot] = 0;
    }
    false
}

/// All permutations of `0..n` (Heap's algorithm).
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut out = vec![perm.clone()];
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Block size used by every parallel enumeration and sampler.
pub const BLOCK: u64 = 1 << 14;

/// Run `f` over the fixed blocks `[start, end)` covering `0..total` in
/// parallel, returning per-block results in block order.
pub fn block_map<T, F>(total: u64, block: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, u64, u64) -> T + Sync + Send,
{
    let blocks = total.div_ceil(block);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * block;
            let end = (start + block).min(total);
            f(b, start, end)
        })
        .collect()
}
