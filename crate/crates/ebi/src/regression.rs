//! Reduced-rank operator regression on explicit feature maps.
//!
//! The forecasting target is the one-step conditional mean in feature space:
//! find a rank-`r` operator `G` such that `φ(x_{t+1}) ≈ Gᵀ φ(x_t)`. With
//! empirical (cross-)covariances over the `n` consecutive training pairs
//!
//! ```text
//! Ĉ = (1/n) Σ φ(x_t)φ(x_t)ᵀ,   T̂ = (1/n) Σ φ(x_t)φ(x_{t+1})ᵀ,
//! D̂ = (1/n) Σ φ(x_{t+1})φ(x_{t+1})ᵀ,
//! ```
//!
//! the ridge-regularized reduced-rank estimator whitens by `Ĉ_γ = Ĉ + γI`,
//! truncates the whitened cross-covariance `M = Ĉ_γ^{−1/2} T̂` to its top `r`
//! singular triplets, and maps back: `Ĝ = Ĉ_γ^{−1/2} · svd_r(M)`. The
//! empirical risk has an exactly equivalent trace form,
//!
//! ```text
//! (1/n) Σ ‖φ(x_{t+1}) − Gᵀφ(x_t)‖²  =  tr(D̂) + tr(GGᵀĈ) − 2 tr(GᵀT̂),
//! ```
//!
//! which [`empirical_risk`] uses; [`empirical_risk_direct`] evaluates the
//! left-hand side for cross-checking.
//!
//! [`model_select`] ranks a grid of `(length scale, γ, rank)` candidates by
//! the value of the shrinkage-form risk bound — infeasible candidates last —
//! and reports a held-out one-step RMSE per candidate through a linear
//! decoder (`x ≈ wᵀφ(x)`) fitted on the training prefix only. Splits are
//! contiguous: time order is never shuffled.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::blocks::BlockSchedule;
use crate::bounds::{bound_regression_tikhonov, BoundReport, RegressionBoundInputs};
use crate::correlations::{block_variance, corr_biased};
use crate::error::{Error, Result};
use crate::kernels::{c_bound, GramKind, Kernel, LazyGram, Points};
use crate::mixing::MixingModel;

/// Flag added to model-selection reports: variance proxies were computed on
/// the training split only.
pub const FLAG_TRAIN_PROXIES: &str = "proxies_from_training_split";

/// A scalar-input Gaussian feature map `φ(x) = (k(x, c_1), …, k(x, c_p))`
/// over a fixed grid of centers.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    centers: Vec<f64>,
    length_scale: f64,
}

impl FeatureMap {
    /// Evenly spaced centers on `[lo, hi]` (inclusive endpoints; a single
    /// center sits at the midpoint).
    pub fn gaussian_grid(num_centers: usize, lo: f64, hi: f64, length_scale: f64) -> Result<Self> {
        if num_centers == 0 {
            return Err(Error::Input("feature map needs at least one center".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Input(format!("center range [{lo}, {hi}] must be finite and nonempty")));
        }
        if !length_scale.is_finite() || length_scale <= 0.0 {
            return Err(Error::Domain(format!("feature length scale must be > 0, got {length_scale}")));
        }
        let centers = if num_centers == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..num_centers)
                .map(|j| lo + (hi - lo) * j as f64 / (num_centers - 1) as f64)
                .collect()
        };
        Ok(FeatureMap { centers, length_scale })
    }

    /// Feature dimension `p`.
    pub fn dim(&self) -> usize {
        self.centers.len()
    }

    /// Evaluates `φ(x)`.
    pub fn apply(&self, x: f64) -> Vec<f64> {
        let two_l_sq = 2.0 * self.length_scale * self.length_scale;
        self.centers.iter().map(|c| (-(x - c) * (x - c) / two_l_sq).exp()).collect()
    }

    /// Applies the map to a whole series, returning the features as points.
    pub fn apply_series(&self, xs: &[f64]) -> Result<Points> {
        let p = self.dim();
        let mut flat = Vec::with_capacity(xs.len() * p);
        for &x in xs {
            flat.extend(self.apply(x));
        }
        Points::from_flat(p, flat)
    }
}

/// Consecutive feature pairs `(φ(x_t), φ(x_{t+1}))` as column matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureData {
    /// `p × n` matrix of input features (column `t` is `φ(x_t)`).
    pub x: DMatrix<f64>,
    /// `p × n` matrix of response features (column `t` is `φ(x_{t+1})`).
    pub y: DMatrix<f64>,
}

impl FeatureData {
    /// Builds pairs from consecutive points of a feature sequence of length
    /// ≥ 2 (yields `len − 1` pairs).
    pub fn from_points(features: &Points) -> Result<Self> {
        let n = features.len();
        if n < 2 {
            return Err(Error::Input(format!("need ≥ 2 feature points for pairs, got {n}")));
        }
        let p = features.dim();
        let x = DMatrix::from_fn(p, n - 1, |i, t| features.point(t)[i]);
        let y = DMatrix::from_fn(p, n - 1, |i, t| features.point(t + 1)[i]);
        Ok(FeatureData { x, y })
    }

    /// Maps a scalar series through a feature map and pairs it up.
    pub fn from_scalar_series(xs: &[f64], map: &FeatureMap) -> Result<Self> {
        Self::from_points(&map.apply_series(xs)?)
    }

    /// Number of pairs.
    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    /// True when there are no pairs (cannot occur for a constructed value).
    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }

    /// Feature dimension `p`.
    pub fn dim(&self) -> usize {
        self.x.nrows()
    }
}

/// The three empirical covariance matrices of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariances {
    /// Input covariance `Ĉ` (`p × p`).
    pub c: DMatrix<f64>,
    /// Cross covariance `T̂ = (1/n) Σ φ(x_t)φ(x_{t+1})ᵀ`.
    pub t: DMatrix<f64>,
    /// Response covariance `D̂`.
    pub d: DMatrix<f64>,
}

/// Assembles `Ĉ`, `T̂`, `D̂` from feature pairs.
pub fn assemble_covariances(data: &FeatureData) -> Covariances {
    let n = data.len() as f64;
    Covariances {
        c: &data.x * data.x.transpose() / n,
        t: &data.x * data.y.transpose() / n,
        d: &data.y * data.y.transpose() / n,
    }
}

/// A fitted reduced-rank forecasting operator.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorModel {
    g: DMatrix<f64>,
    /// Requested rank.
    pub rank: usize,
    /// Ridge parameter used in the whitening.
    pub gamma: f64,
    /// Singular values of the whitened cross-covariance, descending.
    pub singular_values: Vec<f64>,
    /// True when the singular values at the truncation cut were tied (the
    /// first `rank` triplets were kept).
    pub tied_cut: bool,
}

impl OperatorModel {
    /// The operator matrix `Ĝ` (`p × p`; prediction is `Ĝᵀ v`).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    /// One-step forecast in feature space: `Ĝᵀ v`.
    pub fn forecast(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.g.nrows() {
            return Err(Error::Dimension(format!(
                "feature vector has dimension {}, model expects {}",
                features.len(),
                self.g.nrows()
            )));
        }
        let v = DVector::from_column_slice(features);
        Ok((self.g.transpose() * v).iter().copied().collect())
    }
}

/// Fits the reduced-rank operator by whitened truncated SVD.
///
/// `Ĉ_γ = Ĉ + γI` is eigendecomposed with eigenvalues floored at `γ`; the
/// floor must stay positive, so `γ = 0` requires a strictly positive-definite
/// `Ĉ`. Singular values tied at the cut (relative gap below `1e−12`) keep
/// the first `rank` triplets and set [`OperatorModel::tied_cut`].
pub fn fit_rrr(cov: &Covariances, gamma: f64, rank: usize) -> Result<OperatorModel> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Domain(format!("ridge parameter must be finite and ≥ 0, got {gamma}")));
    }
    if rank < 1 {
        return Err(Error::Domain("rank must be ≥ 1".into()));
    }
    let p = cov.c.nrows();
    let c_gamma = &cov.c + DMatrix::identity(p, p) * gamma;
    let eigen = c_gamma.symmetric_eigen();
    let mut floored = eigen.eigenvalues.clone();
    for v in floored.iter_mut() {
        *v = v.max(gamma);
    }
    if floored.iter().any(|&v| v <= 0.0) {
        return Err(Error::Domain(
            "regularized covariance is singular; use γ > 0 or richer data".into(),
        ));
    }
    let inv_sqrt_diag = DMatrix::from_diagonal(&floored.map(|v| 1.0 / v.sqrt()));
    let inv_sqrt = &eigen.eigenvectors * inv_sqrt_diag * eigen.eigenvectors.transpose();

    let m = &inv_sqrt * &cov.t;
    let (m_rows, m_cols) = (m.nrows(), m.ncols());
    let svd = m.svd(true, true);
    let u = svd.u.as_ref().expect("SVD with u requested");
    let v_t = svd.v_t.as_ref().expect("SVD with v_t requested");

    // Stable descending order of singular triplets.
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .expect("singular values are finite")
    });
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();

    let keep = rank.min(singular_values.len());
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let tied_cut = keep < singular_values.len()
        && (singular_values[keep - 1] - singular_values[keep]).abs() <= 1e-12 * sigma_max.max(1.0);

    let mut m_r = DMatrix::zeros(m_rows, m_cols);
    for &i in order.iter().take(keep) {
        let ui = u.column(i);
        let vi = v_t.row(i);
        m_r += svd.singular_values[i] * ui * vi;
    }
    let g = &inv_sqrt * m_r;

    Ok(OperatorModel { g, rank, gamma, singular_values, tied_cut })
}

/// Empirical risk in trace form: `tr(D̂) + tr(GGᵀĈ) − 2 tr(GᵀT̂)`.
pub fn empirical_risk(model: &OperatorModel, cov: &Covariances) -> f64 {
    let g = &model.g;
    cov.d.trace() + (g * g.transpose() * &cov.c).trace() - 2.0 * (g.transpose() * &cov.t).trace()
}

/// Empirical risk by direct evaluation: `(1/n) Σ ‖φ(x_{t+1}) − Ĝᵀφ(x_t)‖²`.
pub fn empirical_risk_direct(model: &OperatorModel, data: &FeatureData) -> f64 {
    let residual = &data.y - model.g.transpose() * &data.x;
    residual.iter().map(|v| v * v).sum::<f64>() / data.len() as f64
}

/// A linear readout that decodes the scalar state back out of feature space:
/// `x ≈ wᵀφ(x)`, fitted by ridge-stabilized least squares.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    w: DVector<f64>,
}

impl Decoder {
    /// Fits the readout on a training series (the same data the model saw).
    pub fn fit(map: &FeatureMap, xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::Input("decoder needs a nonempty training series".into()));
        }
        let p = map.dim();
        let phi = {
            let feats = map.apply_series(xs)?;
            DMatrix::from_fn(p, xs.len(), |i, t| feats.point(t)[i])
        };
        let target = DVector::from_column_slice(xs);
        let gram = &phi * phi.transpose();
        // Tiny relative jitter keeps the normal equations well posed without
        // visibly biasing the readout.
        let jitter = 1e-10 * (gram.trace() / p as f64).max(1e-30);
        let lhs = gram + DMatrix::identity(p, p) * jitter;
        let rhs = &phi * target;
        let w = lhs
            .cholesky()
            .ok_or_else(|| Error::Domain("decoder normal equations are not positive definite".into()))?
            .solve(&rhs);
        Ok(Decoder { w })
    }

    /// Decodes a feature vector to a scalar.
    pub fn apply(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.w.len() {
            return Err(Error::Dimension(format!(
                "feature vector has dimension {}, decoder expects {}",
                features.len(),
                self.w.len()
            )));
        }
        Ok(features.iter().zip(self.w.iter()).map(|(a, b)| a * b).sum())
    }
}

/// One grid point of the model-selection search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub length_scale: f64,
    pub gamma: f64,
    pub rank: usize,
}

/// Options shared by every candidate in a model-selection run.
#[derive(Debug, Clone)]
pub struct SelectOptions {
    pub delta: f64,
    pub tau: usize,
    pub mixing: MixingModel,
    /// Fraction of the series used as the contiguous training prefix.
    pub train_fraction: f64,
    /// Feature-map grid shared by all candidates (the length scale varies).
    pub num_centers: usize,
    pub center_lo: f64,
    pub center_hi: f64,
}

/// The outcome for one grid candidate.
#[derive(Debug, Clone)]
pub struct Candidate {
    /// Position in the input grid (ranking is stable with respect to it).
    pub grid_index: usize,
    pub config: GridConfig,
    /// The risk-bound report; `None` when fitting or bounding errored.
    pub report: Option<BoundReport>,
    /// Human-readable reason when `report` is `None` or the config failed.
    pub error: Option<String>,
    /// Fitted operator norm `‖Ĝ‖` fed to the bound as the shrinkage factor.
    pub shrinkage: Option<f64>,
    /// Held-out one-step RMSE through the decoder readout.
    pub holdout_rmse: Option<f64>,
}

impl Candidate {
    fn rank_class(&self) -> u8 {
        match &self.report {
            Some(r) if r.feasible => 0,
            Some(_) => 1,
            None => 2,
        }
    }

    fn rank_value(&self) -> f64 {
        self.report.as_ref().map_or(f64::INFINITY, |r| r.value)
    }
}

/// A ranked model-selection result.
#[derive(Debug, Clone)]
pub struct Selection {
    /// Candidates sorted best-first: feasible by bound value, then
    /// infeasible, then failed; ties keep grid order.
    pub candidates: Vec<Candidate>,
    pub n_train: usize,
    pub n_holdout: usize,
}

impl Selection {
    /// The winning candidate, if any config produced a feasible bound.
    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first().filter(|c| c.rank_class() == 0)
    }
}

/// Ranks a grid of `(length scale, γ, rank)` configurations on a scalar
/// series by the value of the shrinkage-form risk bound.
///
/// For each candidate: fit on the contiguous training prefix, compute the
/// variance proxies on that prefix (reports carry [`FLAG_TRAIN_PROXIES`]),
/// evaluate the bound a posteriori at the fitted norm `g = ‖Ĝ‖`, and measure
/// a held-out one-step RMSE through the decoder. Candidates whose bound is
/// infeasible sort after every feasible one; outright failures — including
/// heavy regularization that shrinks `‖Ĝ‖` below 1, where the bound does not
/// apply — sort last. The grid order breaks ties, so the ranking is
/// deterministic.
pub fn model_select(xs: &[f64], grid: &[GridConfig], options: &SelectOptions) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::Input("model selection needs a nonempty grid".into()));
    }
    if !(options.train_fraction > 0.0 && options.train_fraction < 1.0) {
        return Err(Error::Domain(format!(
            "train fraction must lie in (0, 1), got {}",
            options.train_fraction
        )));
    }
    let n = xs.len();
    let n_train = (options.train_fraction * n as f64).floor() as usize;
    let n_holdout = n - n_train;
    if n_train < 2 * options.tau + 1 {
        return Err(Error::InfeasibleSchedule(format!(
            "training prefix of {n_train} points cannot host a τ = {} schedule",
            options.tau
        )));
    }
    if n_holdout < 2 {
        return Err(Error::Input(format!(
            "hold-out suffix needs ≥ 2 points for one-step evaluation, got {n_holdout}"
        )));
    }
    let train = &xs[..n_train];
    let holdout = &xs[n_train..];
    let n_pairs = n_train - 1;
    let schedule = BlockSchedule::new(n_pairs, options.tau)?;

    // Candidates are independent, so the grid evaluates in parallel; the
    // ordered collect keeps the result deterministic.
    let mut candidates: Vec<Candidate> = grid
        .par_iter()
        .enumerate()
        .map(|(grid_index, &config)| {
            match evaluate_candidate(train, holdout, &schedule, config, options) {
                Ok((report, shrinkage, rmse)) => Candidate {
                    grid_index,
                    config,
                    report: Some(report),
                    error: None,
                    shrinkage: Some(shrinkage),
                    holdout_rmse: rmse,
                },
                Err(e) => Candidate {
                    grid_index,
                    config,
                    report: None,
                    error: Some(e.to_string()),
                    shrinkage: None,
                    holdout_rmse: None,
                },
            }
        })
        .collect();

    candidates.sort_by(|a, b| {
        a.rank_class()
            .cmp(&b.rank_class())
            .then_with(|| a.rank_value().partial_cmp(&b.rank_value()).expect("no NaN rank values"))
            .then_with(|| a.grid_index.cmp(&b.grid_index))
    });

    Ok(Selection { candidates, n_train, n_holdout })
}

fn evaluate_candidate(
    train: &[f64],
    holdout: &[f64],
    schedule: &BlockSchedule,
    config: GridConfig,
    options: &SelectOptions,
) -> Result<(BoundReport, f64, Option<f64>)> {
    let map = FeatureMap::gaussian_grid(
        options.num_centers,
        options.center_lo,
        options.center_hi,
        config.length_scale,
    )?;
    let features = map.apply_series(train)?;
    let data = FeatureData::from_points(&features)?;
    let cov = assemble_covariances(&data);
    let model = fit_rrr(&cov, config.gamma, config.rank)?;

    // Variance proxies over the training prefix. The feature kernel is the
    // plain inner product of the explicit features.
    let y_gram = LazyGram::new(Kernel::linear(), GramKind::Squared, &features)?;
    let z_gram = LazyGram::new(Kernel::linear(), GramKind::LagProduct, &features)?;
    let v_y = corr_biased(&y_gram, schedule)?;
    let v_z = corr_biased(&z_gram, schedule)?;
    let w_series: Vec<f64> = (0..data.len())
        .map(|t| {
            let y = features.point(t + 1);
            y.iter().map(|v| v * v).sum()
        })
        .collect();
    let v_w = block_variance(&w_series, schedule)?;
    let c_h = c_bound(Kernel::linear(), GramKind::Squared, &features)?;

    // The risk bound is evaluated a posteriori at the fitted operator norm.
    let shrinkage = model.matrix().norm();
    let inputs = RegressionBoundInputs { c_h, rank: config.rank, v_y, v_z, v_w };
    let mut report = bound_regression_tikhonov(
        train.len() - 1,
        options.tau,
        options.delta,
        &options.mixing,
        shrinkage,
        &inputs,
    )?;
    report.flags.push(FLAG_TRAIN_PROXIES.into());

    let rmse = holdout_rmse(&map, &model, train, holdout)?;
    Ok((report, shrinkage, rmse))
}

fn holdout_rmse(
    map: &FeatureMap,
    model: &OperatorModel,
    train: &[f64],
    holdout: &[f64],
) -> Result<Option<f64>> {
    if holdout.len() < 2 {
        return Ok(None);
    }
    let decoder = Decoder::fit(map, train)?;
    let mut sq_sum = 0.0;
    for w in holdout.windows(2) {
        let predicted_features = model.forecast(&map.apply(w[0]))?;
        let predicted = decoder.apply(&predicted_features)?;
        let err = predicted - w[1];
        sq_sum += err * err;
    }
    Ok(Some((sq_sum / (holdout.len() - 1) as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::{ou_mixing_model, sample_ou, Trajectory};

    fn toy_map() -> FeatureMap {
        FeatureMap::gaussian_grid(5, -2.0, 2.0, 0.8).unwrap()
    }

    #[test]
    fn feature_map_grid_and_values() {
        let map = toy_map();
        assert_eq!(map.dim(), 5);
        let phi = map.apply(0.5);
        for (j, c) in [-2.0f64, -1.0, 0.0, 1.0, 2.0].into_iter().enumerate() {
            let want = (-(0.5 - c) * (0.5 - c) / (2.0 * 0.64)).exp();
            assert!((phi[j] - want).abs() < 1e-15);
        }
        let single = FeatureMap::gaussian_grid(1, -1.0, 3.0, 1.0).unwrap();
        assert_eq!(single.apply(1.0), vec![1.0], "single center sits at the midpoint");
        assert!(FeatureMap::gaussian_grid(0, 0.0, 1.0, 1.0).is_err());
        assert!(FeatureMap::gaussian_grid(3, 1.0, 1.0, 1.0).is_err());
        assert!(FeatureMap::gaussian_grid(3, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn feature_data_pairs_up_consecutive_points() {
        let map = toy_map();
        let xs = [0.1, -0.4, 0.9, 1.5];
        let data = FeatureData::from_scalar_series(&xs, &map).unwrap();
        assert_eq!((data.dim(), data.len()), (5, 3));
        for t in 0..3 {
            let phi_x = map.apply(xs[t]);
            let phi_y = map.apply(xs[t + 1]);
            for i in 0..5 {
                assert_eq!(data.x[(i, t)], phi_x[i]);
                assert_eq!(data.y[(i, t)], phi_y[i]);
            }
        }
        assert!(FeatureData::from_scalar_series(&[0.5], &map).is_err());
    }

    #[test]
    fn covariance_assembly_by_hand() {
        // p = 2, two pairs: x-columns (1,0), (0,2); y-columns (1,1), (2,0).
        let data = FeatureData {
            x: DMatrix::from_columns(&[
                DVector::from_column_slice(&[1.0, 0.0]),
                DVector::from_column_slice(&[0.0, 2.0]),
            ]),
            y: DMatrix::from_columns(&[
                DVector::from_column_slice(&[1.0, 1.0]),
                DVector::from_column_slice(&[2.0, 0.0]),
            ]),
        };
        let cov = assemble_covariances(&data);
        assert_eq!(cov.c, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 2.0]));
        assert_eq!(cov.t, DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 2.0, 0.0]));
        assert_eq!(cov.d, DMatrix::from_row_slice(2, 2, &[2.5, 0.5, 0.5, 0.5]));
    }

    /// Deterministic pseudo-random matrix entries in [−1, 1].
    fn lcg_entries(rows: usize, cols: usize, mut state: u64) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn fit_recovers_an_exact_low_rank_relation() {
        // y = Aᵀx with rank-2 A; enough spread makes Ĉ well conditioned, so
        // the rank-2 fit must recover A and reach (near) zero risk.
        let p = 4;
        let n = 60;
        let x = lcg_entries(p, n, 9);
        let a = {
            let u = lcg_entries(p, 2, 5);
            let v = lcg_entries(p, 2, 17);
            u * v.transpose() // p × p, rank 2
        };
        let y = a.transpose() * &x;
        let data = FeatureData { x, y };
        let cov = assemble_covariances(&data);
        let model = fit_rrr(&cov, 1e-10, 2).unwrap();
        let risk = empirical_risk(&model, &cov);
        assert!(risk.abs() < 1e-8, "risk {risk} should vanish");
        let diff = (model.matrix() - &a).norm() / a.norm();
        assert!(diff < 1e-4, "operator mismatch {diff}");
    }

    #[test]
    fn risk_is_monotone_in_rank_and_trace_form_matches_direct() {
        let p = 5;
        let n = 80;
        let x = lcg_entries(p, n, 3);
        let y = lcg_entries(p, n, 4);
        let data = FeatureData { x, y };
        let cov = assemble_covariances(&data);
        let mut prev = f64::INFINITY;
        for rank in 1..=p {
            let model = fit_rrr(&cov, 1e-6, rank).unwrap();
            let trace_form = empirical_risk(&model, &cov);
            let direct = empirical_risk_direct(&model, &data);
            let scale = trace_form.abs().max(1.0);
            assert!(
                (trace_form - direct).abs() <= 1e-10 * scale,
                "rank {rank}: trace {trace_form} vs direct {direct}"
            );
            assert!(trace_form <= prev + 1e-12, "risk must not grow with rank");
            prev = trace_form;
        }
    }

    #[test]
    fn gamma_zero_needs_positive_definite_covariance() {
        // A rank-deficient Ĉ (single repeated column) cannot be whitened
        // with γ = 0.
        let x = DMatrix::from_fn(3, 10, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let y = lcg_entries(3, 10, 8);
        let cov = assemble_covariances(&FeatureData { x, y });
        assert!(matches!(fit_rrr(&cov, 0.0, 1), Err(Error::Domain(_))));
        assert!(fit_rrr(&cov, 1e-6, 1).is_ok());
    }

    #[test]
    fn tied_singular_values_keep_first_and_flag() {
        // Ĉ = I and T̂ = I/2 give M = I/2 (γ floor at 0 leaves eigenvalues 1):
        // both singular values are exactly 0.5.
        let cov = Covariances {
            c: DMatrix::identity(2, 2),
            t: DMatrix::identity(2, 2) * 0.5,
            d: DMatrix::identity(2, 2) * 0.5,
        };
        let model = fit_rrr(&cov, 0.0, 1).unwrap();
        assert!(model.tied_cut, "σ₁ = σ₂ at the cut must be flagged");
        assert_eq!(model.singular_values, vec![0.5, 0.5]);
        let g = model.matrix();
        // Exactly one direction survives with weight 0.5.
        assert!((g.norm() - 0.5).abs() < 1e-12);
        let full = fit_rrr(&cov, 0.0, 2).unwrap();
        assert!(!full.tied_cut, "no cut when every triplet is kept");
        assert!((full.matrix() - DMatrix::identity(2, 2) * 0.5).norm() < 1e-12);
    }

    #[test]
    fn forecast_applies_transposed_operator() {
        let cov = Covariances {
            c: DMatrix::identity(2, 2),
            t: DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]),
            d: DMatrix::identity(2, 2),
        };
        let model = fit_rrr(&cov, 0.0, 2).unwrap();
        let out = model.forecast(&[2.0, 4.0]).unwrap();
        assert!((out[0] - 1.0).abs() < 1e-12);
        assert!((out[1] - 1.0).abs() < 1e-12);
        assert!(model.forecast(&[1.0]).is_err(), "dimension mismatch must error");
    }

    #[test]
    fn decoder_reconstructs_scalars_in_range() {
        let map = FeatureMap::gaussian_grid(9, -3.0, 3.0, 0.8).unwrap();
        let train: Vec<f64> = (0..200).map(|i| -2.5 + 5.0 * i as f64 / 199.0).collect();
        let decoder = Decoder::fit(&map, &train).unwrap();
        for x in [-2.0, -0.7, 0.0, 1.3, 2.4] {
            let decoded = decoder.apply(&map.apply(x)).unwrap();
            assert!((decoded - x).abs() < 0.02, "decode({x}) = {decoded}");
        }
    }

    fn ou_series(n: usize, seed: u64) -> Vec<f64> {
        let Trajectory::Scalar(xs) = sample_ou(n, seed).unwrap() else { unreachable!() };
        xs
    }

    fn select_options(tau: usize) -> SelectOptions {
        SelectOptions {
            delta: 0.1,
            tau,
            mixing: ou_mixing_model(),
            train_fraction: 0.8,
            num_centers: 7,
            center_lo: -3.0,
            center_hi: 3.0,
        }
    }

    #[test]
    fn model_select_ranks_feasible_before_failed_and_is_stable() {
        let xs = ou_series(1500, 31);
        let grid = vec![
            GridConfig { length_scale: 0.7, gamma: 1e6, rank: 3 }, // γ ≫ c_H shrinks ‖Ĝ‖ below 1 → error
            GridConfig { length_scale: 0.7, gamma: 1e-3, rank: 3 },
            GridConfig { length_scale: 0.7, gamma: 1e-3, rank: 3 }, // duplicate: tie on value
        ];
        // At γ = 1e−3 the fitted ‖Ĝ‖ is a little above 1, so the effective
        // level is near δ/2 and the mixing penalty at τ = 20 (≈ 1.8e−4) is
        // comfortably below it.
        let sel = model_select(&xs, &grid, &select_options(20)).unwrap();
        assert_eq!(sel.candidates.len(), 3);
        let best = sel.best().expect("a feasible candidate exists");
        assert_eq!(best.grid_index, 1, "duplicates tie; grid order breaks the tie");
        assert_eq!(sel.candidates[1].grid_index, 2);
        assert_eq!(sel.candidates[2].grid_index, 0, "failed config sorts last");
        assert!(sel.candidates[2].error.as_deref().unwrap_or("").contains("shrinkage"));
        let report = best.report.as_ref().unwrap();
        assert!(report.feasible);
        assert!(report.flags.iter().any(|f| f == FLAG_TRAIN_PROXIES));
        assert!(best.shrinkage.unwrap() > 1.0);
        let rmse = best.holdout_rmse.unwrap();
        // One-step OU forecasting cannot beat the innovation noise √(1−e⁻²)
        // ≈ 0.93 and a sane model should not be much worse.
        assert!(rmse > 0.6 && rmse < 1.4, "held-out RMSE {rmse}");
    }

    #[test]
    fn model_select_reports_all_infeasible_grids() {
        let xs = ou_series(600, 7);
        // Force infeasibility through a τ whose mixing penalty exhausts δ.
        let mut options = select_options(2);
        options.delta = 0.01;
        let grid = vec![GridConfig { length_scale: 0.7, gamma: 1e-3, rank: 3 }];
        let sel = model_select(&xs, &grid, &options).unwrap();
        assert!(sel.best().is_none());
        let report = sel.candidates[0].report.as_ref().unwrap();
        assert!(!report.feasible);
    }

    #[test]
    fn model_select_validates_inputs() {
        let xs = ou_series(100, 1);
        let grid = vec![GridConfig { length_scale: 0.7, gamma: 1e-3, rank: 3 }];
        assert!(model_select(&xs, &[], &select_options(4)).is_err());
        let mut bad = select_options(4);
        bad.train_fraction = 1.5;
        assert!(model_select(&xs, &grid, &bad).is_err());
        let mut bad = select_options(60);
        bad.train_fraction = 0.9;
        assert!(model_select(&xs, &grid, &bad).is_err(), "τ too large for the prefix");
    }

    #[test]
    fn train_split_is_a_contiguous_prefix() {
        // Selection must depend only on the prefix: appending hold-out data
        // cannot change the fitted ranking when the prefix stays identical.
        let xs = ou_series(1000, 12);
        let options = SelectOptions { train_fraction: 0.5, ..select_options(10) };
        let grid = vec![
            GridConfig { length_scale: 0.5, gamma: 1e-3, rank: 3 },
            GridConfig { length_scale: 1.0, gamma: 1e-2, rank: 3 },
        ];
        let sel_a = model_select(&xs, &grid, &options).unwrap();
        let mut tweaked = xs.clone();
        for v in tweaked[500..].iter_mut() {
            *v = -*v; // perturb only the hold-out suffix
        }
        let sel_b = model_select(&tweaked, &grid, &options).unwrap();
        let values_a: Vec<f64> =
            sel_a.candidates.iter().map(|c| c.report.as_ref().unwrap().value).collect();
        let values_b: Vec<f64> =
            sel_b.candidates.iter().map(|c| c.report.as_ref().unwrap().value).collect();
        assert_eq!(values_a, values_b, "bound values must come from the prefix only");
        assert_eq!(
            sel_a.candidates.iter().map(|c| c.grid_index).collect::<Vec<_>>(),
            sel_b.candidates.iter().map(|c| c.grid_index).collect::<Vec<_>>()
        );
    }
}
