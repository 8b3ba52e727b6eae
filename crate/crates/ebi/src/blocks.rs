//! Interleaved block schedules and their pair sets.
//!
//! A trajectory index range `1..n` (1-based in the notation below; storage is
//! 0-based) is cut into `2m` consecutive blocks of length `τ`, with
//! `m = floor(n / 2τ)`, alternating between a *first* and a *second* sequence:
//!
//! ```text
//! I_k  = {2(k−1)τ+1, …, (2k−1)τ}      k = 1..m   (first sequence)
//! I'_k = {(2k−1)τ+1, …, 2kτ}          k = 1..m   (second sequence)
//! ```
//!
//! Trailing indices that do not complete a block pair are dropped
//! (`n_dropped < 2τ`). Two pair sets drive all variance proxies:
//!
//! ```text
//! S_τ  = ∪_k (I_k × I_k) ∪ (I'_k × I'_k)          |S_τ|  = 2mτ²
//! S̃_τ = ∪_{k≠l} (I_k × I_l) ∪ (I'_k × I'_l)      |S̃_τ| = 2m(m−1)τ²
//! ```
//!
//! Every pair in `S_τ` has `|t−s| ≤ τ−1`; every pair in `S̃_τ` joins distinct
//! same-sequence blocks, which are separated by an interposed block of the
//! other sequence, so `|t−s| ≥ τ`.
//!
//! For large `n` the pair sets are never materialized: the summation helpers
//! in [`crate::correlations`] walk them block-by-block. The explicit
//! enumerators here exist for test sizes and produce pairs in the canonical
//! order those helpers use (ascending block index, first sequence before
//! second, row-major within a block), so sums over enumerated pairs can be
//! compared bit-for-bit against the block-wise computation.

use std::ops::Range;

use crate::error::{Error, Result};

/// An interleaved block schedule for trajectory length `n` and block size `τ`.
///
/// Immutable after construction; all index ranges are 0-based half-open.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSchedule {
    tau: usize,
    m: usize,
    n_effective: usize,
    n_dropped: usize,
    first: Vec<Range<usize>>,
    second: Vec<Range<usize>>,
}

impl BlockSchedule {
    /// Builds the schedule with `m = floor(n / 2τ)` block pairs.
    ///
    /// Errors with [`Error::InfeasibleSchedule`] if `τ = 0` or `n < 2τ`
    /// (no full block pair fits).
    pub fn new(n: usize, tau: usize) -> Result<Self> {
        if tau == 0 {
            return Err(Error::InfeasibleSchedule("block length τ must be ≥ 1".into()));
        }
        if n < 2 * tau {
            return Err(Error::InfeasibleSchedule(format!(
                "trajectory length {n} is shorter than one block pair 2τ = {}",
                2 * tau
            )));
        }
        let m = n / (2 * tau);
        let n_effective = 2 * m * tau;
        let mut first = Vec::with_capacity(m);
        let mut second = Vec::with_capacity(m);
        for k in 0..m {
            let start = 2 * k * tau;
            first.push(start..start + tau);
            second.push(start + tau..start + 2 * tau);
        }
        Ok(Self { tau, m, n_effective, n_dropped: n - n_effective, first, second })
    }

    /// Block length τ.
    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Number of blocks per sequence.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of scheduled indices, `2mτ`.
    pub fn n_effective(&self) -> usize {
        self.n_effective
    }

    /// Trailing indices dropped because `n` was not a multiple of `2τ`.
    pub fn n_dropped(&self) -> usize {
        self.n_dropped
    }

    /// The first-sequence blocks `I_1..I_m` as 0-based ranges.
    pub fn first_blocks(&self) -> &[Range<usize>] {
        &self.first
    }

    /// The second-sequence blocks `I'_1..I'_m` as 0-based ranges.
    pub fn second_blocks(&self) -> &[Range<usize>] {
        &self.second
    }

    /// `(|S_τ|, |S̃_τ|) = (2mτ², 2m(m−1)τ²)`, the normalizers of the
    /// biased and unbiased variance proxies.
    pub fn pair_set_sizes(&self) -> (usize, usize) {
        let within = 2 * self.m * self.tau * self.tau;
        let cross = 2 * self.m * (self.m - 1) * self.tau * self.tau;
        (within, cross)
    }

    /// Explicitly enumerates `S_τ` in canonical order: for each `k`, all of
    /// `I_k × I_k` row-major, then all of `I'_k × I'_k` row-major.
    ///
    /// Materializes `2mτ²` pairs — intended for test sizes (`n ≤ 200`); the
    /// proxy computations never call this.
    pub fn enumerate_within_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::with_capacity(self.pair_set_sizes().0);
        for k in 0..self.m {
            for blk in [&self.first[k], &self.second[k]] {
                for t in blk.clone() {
                    for s in blk.clone() {
                        pairs.push((t, s));
                    }
                }
            }
        }
        pairs
    }

    /// Explicitly enumerates `S̃_τ` in canonical order: first sequence block
    /// pairs `(k,l)` with `k≠l` in lexicographic order (row-major within each
    /// `I_k × I_l`), then the second sequence likewise.
    ///
    /// Materializes `2m(m−1)τ²` pairs — intended for test sizes only.
    pub fn enumerate_cross_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::with_capacity(self.pair_set_sizes().1);
        for seq in [&self.first, &self.second] {
            for k in 0..self.m {
                for l in 0..self.m {
                    if l == k {
                        continue;
                    }
                    for t in seq[k].clone() {
                        for s in seq[l].clone() {
                            pairs.push((t, s));
                        }
                    }
                }
            }
        }
        pairs
    }

    /// Per-block sums `W̄_k = Σ_{i∈I_k} w_i` and `W̄'_k = Σ_{i∈I'_k} w_i`
    /// (sums, not means). Values beyond `n_effective` are ignored.
    ///
    /// Errors with [`Error::Dimension`] if fewer than `n_effective` values
    /// are supplied.
    pub fn block_sums(&self, values: &[f64]) -> Result<BlockSums> {
        if values.len() < self.n_effective {
            return Err(Error::Dimension(format!(
                "need at least n_effective = {} values, got {}",
                self.n_effective,
                values.len()
            )));
        }
        let sum_range = |r: &Range<usize>| crate::ksum::sum(values[r.clone()].iter().copied());
        Ok(BlockSums {
            first: self.first.iter().map(sum_range).collect(),
            second: self.second.iter().map(sum_range).collect(),
        })
    }
}

/// Block sums of a scalar sequence under a schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSums {
    /// `W̄_1..W̄_m` over the first sequence.
    pub first: Vec<f64>,
    /// `W̄'_1..W̄'_m` over the second sequence.
    pub second: Vec<f64>,
}
