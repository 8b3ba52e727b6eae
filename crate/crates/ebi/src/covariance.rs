//! End-to-end covariance-operator analysis: trajectory (or Gram) in, bound
//! report out, plus the Monte-Carlo coverage harness that validates the
//! whole chain on the Ornstein–Uhlenbeck reference process.
//!
//! The estimation target is the covariance operator `C = E[φ(X) ⊗ φ(X)]`,
//! estimated by the empirical mean `Ĉ` of the rank-one features over the
//! effective sample. All deviation bounds therefore run on the *squared*
//! Gram (`G_ts = k(x_t, x_s)²`), whose entries are the Hilbert–Schmidt inner
//! products of those features.
//!
//! [`covariance_bound`] dispatches between five methods: the three
//! block-mean deviation bounds (population / biased / unbiased proxy) and
//! the two block-count covariance bounds (basic / Bernstein slow term).
//! When no block length is given, the smallest feasible `τ` for the mixing
//! model is used.

use rayon::prelude::*;

use crate::blocks::BlockSchedule;
use crate::bounds::{
    bound_covariance_basic, bound_covariance_bernstein, bound_dependent_biased,
    bound_dependent_population, bound_dependent_unbiased, BoundReport,
};
use crate::correlations::{corr_population, ProxyKind, VarianceProxy};
use crate::error::{Error, Result};
use crate::kernels::{GramKind, GramSource, Kernel, LazyGram};
use crate::mixing::MixingModel;
use crate::processes::{
    ou_gaussian_feature_covariance, ou_mixing_model, sample_ou, true_cov_error_sq, Trajectory,
};

/// Which bound to apply to the covariance-operator deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovarianceMethod {
    /// Population-proxy deviation bound; the proxy `V_τ` is supplied (e.g.
    /// from a closed form).
    Population { v_tau: f64 },
    /// Deviation bound with the biased empirical proxy `V̂⁺`.
    Biased,
    /// Deviation bound with the unbiased empirical proxy `Ṽ`.
    Unbiased,
    /// Block-count bound with both terms linear in the log level.
    Basic,
    /// Block-count bound with a Bernstein-type slow term.
    Bernstein,
}

/// Shared options for a covariance-bound evaluation.
#[derive(Debug, Clone)]
pub struct CovarianceOptions {
    pub delta: f64,
    pub mixing: MixingModel,
    /// Block length; `None` picks the smallest feasible `τ`.
    pub tau: Option<usize>,
}

/// A fully resolved covariance-bound evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceAnalysis {
    pub tau: usize,
    pub m: usize,
    pub n_effective: usize,
    pub n_dropped: usize,
    /// Norm cap on the rank-one features (`max_t G_tt^{1/2}` of the squared
    /// Gram, i.e. `max_t k(x_t, x_t)`).
    pub c: f64,
    /// The empirical proxy, for the methods that use one.
    pub proxy: Option<VarianceProxy>,
    pub report: BoundReport,
}

/// Evaluates a covariance bound on an already-transformed (squared-kind)
/// Gram with feature norm cap `c`.
pub fn covariance_bound<G: GramSource + ?Sized>(
    gram: &G,
    c: f64,
    method: CovarianceMethod,
    options: &CovarianceOptions,
) -> Result<CovarianceAnalysis> {
    let n = gram.len();
    let tau = resolve_tau(n, options)?;
    let schedule = BlockSchedule::new(n, tau)?;
    let (proxy, report) = match method {
        CovarianceMethod::Population { v_tau } => (
            None,
            bound_dependent_population(n, tau, options.delta, &options.mixing, v_tau, c)?,
        ),
        CovarianceMethod::Biased => {
            let proxy = VarianceProxy::compute(ProxyKind::Biased, gram, &schedule)?;
            let report =
                bound_dependent_biased(n, tau, options.delta, &options.mixing, proxy.value, c)?;
            (Some(proxy), report)
        }
        CovarianceMethod::Unbiased => {
            let proxy = VarianceProxy::compute(ProxyKind::Unbiased, gram, &schedule)?;
            let report =
                bound_dependent_unbiased(n, tau, options.delta, &options.mixing, proxy.value, c)?;
            (Some(proxy), report)
        }
        CovarianceMethod::Basic => {
            (None, bound_covariance_basic(n, tau, options.delta, &options.mixing, c)?)
        }
        CovarianceMethod::Bernstein => {
            (None, bound_covariance_bernstein(n, tau, options.delta, &options.mixing, c)?)
        }
    };
    Ok(CovarianceAnalysis {
        tau,
        m: schedule.m(),
        n_effective: schedule.n_effective(),
        n_dropped: schedule.n_dropped(),
        c,
        proxy,
        report,
    })
}

/// Evaluates a covariance bound straight from points under a kernel: builds
/// the squared-kind Gram lazily and takes `c = max_t k(x_t, x_t)`.
pub fn covariance_bound_for_points(
    points: &crate::kernels::Points,
    kernel: Kernel,
    method: CovarianceMethod,
    options: &CovarianceOptions,
) -> Result<CovarianceAnalysis> {
    let gram = LazyGram::new(kernel, GramKind::Squared, points)?;
    let c = gram.c_bound();
    covariance_bound(&gram, c, method, options)
}

/// Evaluates the bound at every `τ` in `taus`, infeasible ones included.
pub fn covariance_tau_sweep<G: GramSource + ?Sized>(
    gram: &G,
    c: f64,
    method: CovarianceMethod,
    options: &CovarianceOptions,
    taus: &[usize],
) -> Result<Vec<CovarianceAnalysis>> {
    taus.iter()
        .map(|&tau| {
            let options = CovarianceOptions { tau: Some(tau), ..options.clone() };
            covariance_bound(gram, c, method, &options)
        })
        .collect()
}

/// Population variance proxy of the OU chain under a Gaussian kernel: the
/// closed-form feature covariance averaged over the within-block pair set.
pub fn ou_population_proxy(length_scale: f64, tau: usize) -> Result<f64> {
    let covfn = |d: usize| {
        ou_gaussian_feature_covariance(length_scale, d).expect("length scale validated below")
    };
    // Validate the length scale before the closure is ever called.
    ou_gaussian_feature_covariance(length_scale, 0)?;
    corr_population(covfn, tau)
}

fn resolve_tau(n: usize, options: &CovarianceOptions) -> Result<usize> {
    match options.tau {
        Some(tau) => Ok(tau),
        None => match options.mixing.min_feasible_tau(options.delta, n, false)? {
            crate::mixing::TauSearch::Feasible { tau, .. } => Ok(tau),
            crate::mixing::TauSearch::Infeasible { best } => Err(Error::InfeasibleSchedule(format!(
                "no feasible τ for n = {n}: best adjusted level {:?}",
                best
            ))),
        },
    }
}

/// Options for the OU coverage experiment.
#[derive(Debug, Clone)]
pub struct CoverageOptions {
    /// Number of independent replications.
    pub replications: usize,
    /// Trajectory length per replication.
    pub n: usize,
    /// Gaussian kernel length scale.
    pub length_scale: f64,
    pub delta: f64,
    /// Block length; `None` picks the smallest feasible `τ` per replication.
    pub tau: Option<usize>,
    pub method: CovarianceMethod,
    /// Base seed; replication `r` uses `seed + r` (trajectory on stream 0,
    /// fresh error batches on streams 1..).
    pub seed: u64,
    /// Fresh trajectories for the true-error cross term.
    pub error_batches: usize,
    /// Length of each fresh trajectory.
    pub error_batch_len: usize,
}

/// One replication of the coverage experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageRecord {
    pub seed: u64,
    /// Bound on `‖Ĉ − C‖` (`+∞` when infeasible).
    pub bound: f64,
    /// Monte-Carlo estimate of the true error `‖Ĉ − C‖` (square root of the
    /// estimated squared error, floored at 0).
    pub error: f64,
    /// Standard error of the *squared*-error estimate.
    pub error_se: f64,
    pub feasible: bool,
    pub covered: bool,
}

/// Aggregated coverage outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageOutcome {
    pub records: Vec<CoverageRecord>,
    pub covered: usize,
    pub total: usize,
    pub infeasible: usize,
    /// 95% Wilson score interval for the coverage probability.
    pub wilson_low: f64,
    pub wilson_high: f64,
}

/// Runs the OU covariance coverage experiment: per replication, simulate a
/// trajectory, evaluate the bound, estimate the true error on fresh data,
/// and check `bound ≥ error`. Replications run in parallel (deterministic:
/// each depends only on its own derived seed).
pub fn ou_coverage(options: &CoverageOptions) -> Result<CoverageOutcome> {
    if options.replications == 0 {
        return Err(Error::Input("coverage needs at least one replication".into()));
    }
    let kernel = Kernel::gaussian(options.length_scale)?;
    let bound_options = CovarianceOptions {
        delta: options.delta,
        mixing: ou_mixing_model(),
        tau: options.tau,
    };
    let records: Vec<CoverageRecord> = (0..options.replications)
        .into_par_iter()
        .map(|r| -> Result<CoverageRecord> {
            let seed = options.seed.wrapping_add(r as u64);
            let trajectory = sample_ou(options.n, seed)?;
            let points = trajectory.to_points()?;
            let analysis = covariance_bound_for_points(
                &points,
                kernel,
                options.method,
                &bound_options,
            )?;
            let Trajectory::Scalar(xs) = &trajectory else { unreachable!() };
            let true_err = true_cov_error_sq(
                xs,
                options.length_scale,
                options.error_batches,
                options.error_batch_len,
                seed,
            )?;
            let error = true_err.estimate.max(0.0).sqrt();
            let bound = analysis.report.value;
            Ok(CoverageRecord {
                seed,
                bound,
                error,
                error_se: true_err.std_error,
                feasible: analysis.report.feasible,
                covered: bound >= error,
            })
        })
        .collect::<Result<_>>()?;

    let covered = records.iter().filter(|r| r.covered).count();
    let infeasible = records.iter().filter(|r| !r.feasible).count();
    let (wilson_low, wilson_high) = wilson_interval(covered, records.len());
    Ok(CoverageOutcome {
        covered,
        total: records.len(),
        infeasible,
        wilson_low,
        wilson_high,
        records,
    })
}

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, total: usize) -> (f64, f64) {
    assert!(total > 0, "Wilson interval needs at least one trial");
    assert!(successes <= total);
    let z = 1.959963984540054f64; // 97.5% normal quantile
    let n = total as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
