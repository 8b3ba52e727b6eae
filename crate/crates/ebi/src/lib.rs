//! Empirical Bernstein concentration bounds for dependent, Hilbert-space-valued
//! time series.
//!
//! The library is organized around the interleaved block method for β-mixing
//! processes: a trajectory of length `n` is cut into `2m` contiguous blocks of
//! length `τ`, alternating between two sequences, so that same-sequence blocks
//! are at least `τ` steps apart and behave almost independently at a total
//! mixing cost of `2(m−1)β(τ)` on the confidence level.
//!
//! Main ingredients:
//!
//! * [`blocks`] — block schedules and the within-block / cross-block pair sets
//!   `S_τ` and `S̃_τ` over which variance proxies are summed.
//! * [`mixing`] — β-mixing decay models and the adjusted failure probability
//!   `δ(τ) = δ − 2(m−1)β(τ)`.
//! * [`kernels`] — Gaussian/linear kernels, Gram matrices, and the entrywise
//!   transforms that lift a base Gram to the Gram of rank-one covariance
//!   (`φ⊗φ`) and cross-covariance (`φ(x_t)⊗φ(x_{t+1})`) operators.
//! * [`correlations`] — the population, biased, and unbiased (u-statistic)
//!   variance proxies plus the scalar block variance.
//! * [`bounds`] — every concentration / risk bound as a pure scalar function
//!   with a per-term breakdown ([`bounds::BoundReport`]).
//! * [`processes`] — seeded simulators (Ornstein–Uhlenbeck, noisy cyclic
//!   chain) and the true covariance-error estimator for Gaussian kernels.
//! * [`regression`] — finite-dimensional reduced-rank operator regression,
//!   empirical risk, forecasting, and bound-driven model selection.
//! * [`covariance`] — end-to-end helpers tying kernels, proxies, and bounds
//!   together for covariance-operator targets (also used by the CLI).

pub mod blocks;
pub mod bounds;
pub mod correlations;
pub mod covariance;
pub mod error;
pub mod kernels;
pub mod ksum;
pub mod mixing;
pub mod processes;
pub mod regression;

pub use blocks::BlockSchedule;
pub use bounds::BoundReport;
pub use correlations::{ProxyKind, VarianceProxy};
pub use covariance::{CovarianceAnalysis, CovarianceMethod, CovarianceOptions};
pub use error::{Error, Result};
pub use kernels::{GramKind, GramMatrix, GramSource, Kernel};
pub use mixing::{MixingModel, TauSearch};
pub use processes::Trajectory;
pub use regression::{FeatureData, OperatorModel};
