//! Variance proxies: correlation sums over the block pair sets.
//!
//! The concentration bounds are driven by three data-dependent quantities,
//! all sums of Gram entries over the pair sets of a [`BlockSchedule`]:
//!
//! * **biased proxy** `V̂⁺ = (1/|S_τ|) Σ_{(t,s)∈S_τ} G_ts` — the within-block
//!   correlation average; never negative on a PSD Gram.
//! * **unbiased proxy** `Ṽ = V̂⁺ − (1/(m−1)) (1/|S_τ|) Σ_{(t,s)∈S̃_τ} G_ts` —
//!   subtracts a cross-block U-statistic that compensates the mean‑squared
//!   inflation of the biased proxy; needs `m ≥ 2` and may legitimately come
//!   out negative (callers floor it where a bound requires nonnegativity).
//! * **block variance** `V̄_τ = (1/(m(m−1)τ²)) Σ_{i<j} [(W̄_i−W̄_j)² +
//!   (W̄'_i−W̄'_j)²]` — a U-statistic of scalar block sums `W̄_i` (first
//!   sequence) and `W̄'_i` (second sequence); needs `m ≥ 2`.
//!
//! # Determinism and exact reproducibility
//!
//! Every sum is accumulated by a single compensated (Neumaier) accumulator
//! fed in the canonical pair order defined by
//! [`BlockSchedule::enumerate_within_pairs`] and
//! [`BlockSchedule::enumerate_cross_pairs`]. Recomputing a sum from those
//! enumerated pair lists with [`ksum::NeumaierSum`] therefore reproduces the
//! block-wise result *bitwise*, not just approximately. Derived quantities
//! fix their expression trees as documented on each function, so identities
//! such as `biased − unbiased = cross_term` hold exactly when both sides are
//! evaluated from the same [`PairSums`].
//!
//! [`ksum::NeumaierSum`]: crate::ksum::NeumaierSum

use crate::blocks::BlockSchedule;
use crate::error::{Error, Result};
use crate::kernels::GramSource;
use crate::ksum::NeumaierSum;

/// Raw compensated correlation sums over `S_τ` (within) and `S̃_τ` (cross),
/// with the pair-set sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSums {
    /// `Σ_{(t,s)∈S_τ} G_ts`.
    pub within: f64,
    /// `Σ_{(t,s)∈S̃_τ} G_ts`.
    pub cross: f64,
    /// `|S_τ| = 2mτ²`.
    pub within_count: usize,
    /// `|S̃_τ| = 2m(m−1)τ²`.
    pub cross_count: usize,
}

/// Which empirical variance proxy to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxyKind {
    Biased,
    Unbiased,
}

impl ProxyKind {
    /// Parses `biased` or `unbiased`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "biased" => Ok(ProxyKind::Biased),
            "unbiased" => Ok(ProxyKind::Unbiased),
            other => Err(Error::Kind(format!(
                "unknown proxy kind `{other}` (expected biased, unbiased)"
            ))),
        }
    }
}

/// A computed variance proxy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceProxy {
    pub kind: ProxyKind,
    pub value: f64,
}

impl VarianceProxy {
    /// Computes the requested proxy from a Gram source and schedule.
    pub fn compute<G: GramSource + ?Sized>(
        kind: ProxyKind,
        gram: &G,
        schedule: &BlockSchedule,
    ) -> Result<Self> {
        let value = match kind {
            ProxyKind::Biased => corr_biased(gram, schedule)?,
            ProxyKind::Unbiased => corr_unbiased(gram, schedule)?,
        };
        Ok(VarianceProxy { kind, value })
    }
}

fn check_gram<G: GramSource + ?Sized>(gram: &G, schedule: &BlockSchedule) -> Result<()> {
    if gram.len() < schedule.n_effective() {
        return Err(Error::Dimension(format!(
            "gram serves {} indices but the schedule needs {}",
            gram.len(),
            schedule.n_effective()
        )));
    }
    Ok(())
}

/// Both raw correlation sums in one pass, in canonical pair order.
pub fn corr_pair_sums<G: GramSource + ?Sized>(
    gram: &G,
    schedule: &BlockSchedule,
) -> Result<PairSums> {
    check_gram(gram, schedule)?;
    let (within_count, cross_count) = schedule.pair_set_sizes();

    // Within: for each k, I_k × I_k row-major, then I'_k × I'_k row-major.
    let mut within = NeumaierSum::new();
    for k in 0..schedule.m() {
        for blocks in [schedule.first_blocks(), schedule.second_blocks()] {
            let range = blocks[k].clone();
            for t in range.clone() {
                for s in range.clone() {
                    within.add(gram.entry(t, s));
                }
            }
        }
    }

    // Cross: all ordered (k, l), k ≠ l, lexicographic, first sequence in full
    // before the second; each product set row-major.
    let mut cross = NeumaierSum::new();
    for blocks in [schedule.first_blocks(), schedule.second_blocks()] {
        for k in 0..schedule.m() {
            for l in 0..schedule.m() {
                if l == k {
                    continue;
                }
                for t in blocks[k].clone() {
                    for s in blocks[l].clone() {
                        cross.add(gram.entry(t, s));
                    }
                }
            }
        }
    }

    Ok(PairSums {
        within: within.value(),
        cross: cross.value(),
        within_count,
        cross_count,
    })
}

/// Biased variance proxy `V̂⁺ = within / |S_τ|`.
///
/// On a PSD Gram this is nonnegative; when all Gram entries are nonnegative
/// it is additionally bounded below by `min_t G_tt / τ`.
pub fn corr_biased<G: GramSource + ?Sized>(gram: &G, schedule: &BlockSchedule) -> Result<f64> {
    let sums = corr_pair_sums(gram, schedule)?;
    Ok(biased_from_sums(&sums))
}

/// Unbiased variance proxy `Ṽ = V̂⁺ − cross_term`, with
/// `cross_term = (cross / (m−1)) / |S_τ|`. Requires `m ≥ 2`; the result may
/// be negative (that is data, not an error).
pub fn corr_unbiased<G: GramSource + ?Sized>(gram: &G, schedule: &BlockSchedule) -> Result<f64> {
    if schedule.m() < 2 {
        return Err(Error::UndefinedUStatistic(format!(
            "unbiased proxy needs m ≥ 2 block pairs, got m = {}",
            schedule.m()
        )));
    }
    let sums = corr_pair_sums(gram, schedule)?;
    Ok(biased_from_sums(&sums) - cross_term_from_sums(&sums, schedule.m()))
}

/// `V̂⁺` from raw sums: literally `within / |S_τ|`.
pub fn biased_from_sums(sums: &PairSums) -> f64 {
    sums.within / sums.within_count as f64
}

/// The U-statistic correction from raw sums: literally
/// `(cross / (m−1)) / |S_τ|`, the expression `corr_unbiased` subtracts.
pub fn cross_term_from_sums(sums: &PairSums, m: usize) -> f64 {
    (sums.cross / (m - 1) as f64) / sums.within_count as f64
}

/// Population variance proxy for a weakly stationary process with centered
/// autocovariance function `covfn(gap)`:
///
/// ```text
/// V_τ = (1/|S_τ|) Σ_{(t,s)∈S_τ} covfn(|t−s|)
///     = [τ·covfn(0) + 2 Σ_{d=1}^{τ−1} (τ−d)·covfn(d)] / τ²
/// ```
///
/// The block count `m` cancels: every block contributes the same gap profile
/// (`τ` ordered pairs at gap 0 and `2(τ−d)` at gap `d ≥ 1`).
pub fn corr_population(covfn: impl Fn(usize) -> f64, tau: usize) -> Result<f64> {
    if tau == 0 {
        return Err(Error::InfeasibleSchedule("population proxy needs τ ≥ 1".into()));
    }
    let mut acc = NeumaierSum::new();
    acc.add(tau as f64 * covfn(0));
    for d in 1..tau {
        acc.add(2.0 * (tau - d) as f64 * covfn(d));
    }
    Ok(acc.value() / (tau * tau) as f64)
}

/// Scalar block variance `V̄_τ` of a value series: a U-statistic over the
/// pairwise squared differences of block sums, first sequence then second,
/// pairs `(i, j)` with `i < j` in lexicographic order:
///
/// ```text
/// V̄_τ = (1/(m(m−1)τ²)) [ Σ_{i<j} (W̄_i−W̄_j)² + Σ_{i<j} (W̄'_i−W̄'_j)² ]
/// ```
///
/// where `W̄_i` is the sum of `values` over block `I_i` (and `W̄'_i` over
/// `I'_i`). Requires `m ≥ 2`.
pub fn block_variance(values: &[f64], schedule: &BlockSchedule) -> Result<f64> {
    let m = schedule.m();
    if m < 2 {
        return Err(Error::UndefinedUStatistic(format!(
            "block variance needs m ≥ 2 block pairs, got m = {m}"
        )));
    }
    let sums = schedule.block_sums(values)?;
    let mut acc = NeumaierSum::new();
    for seq in [&sums.first, &sums.second] {
        for i in 0..m {
            for j in i + 1..m {
                let d = seq[i] - seq[j];
                acc.add(d * d);
            }
        }
    }
    let tau = schedule.tau();
    Ok(acc.value() / ((m * (m - 1) * tau * tau) as f64))
}
