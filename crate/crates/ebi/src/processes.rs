//! Seeded process simulators and ground-truth helpers for validation.
//!
//! Two β-mixing reference processes exercise the bounds end to end:
//!
//! * **Ornstein–Uhlenbeck chain** — the stationary Gaussian AR(1) recursion
//!   `X_t = e^{−1}·X_{t−1} + √(1−e^{−2})·ε_t`, `X_0 ~ N(0,1)`, `ε_t ~ N(0,1)`
//!   i.i.d. Marginals are exactly `N(0,1)` and the lag-`d` autocorrelation is
//!   `e^{−d}`; the mixing coefficients decay exponentially with rate
//!   `1 − 1/e` (one minus the contraction factor).
//! * **Noisy cyclic chain** — a Markov chain on `{0, …, K−1}` that steps to
//!   the successor `i+1 (mod K)` with probability exactly `1−η` and otherwise
//!   lands uniformly on one of the `K−1` non-successor states (including
//!   staying put). The invariant law is uniform and the mixing coefficients
//!   decay exponentially with rate `η`.
//!
//! Sampling is fully deterministic given a seed (ChaCha8 streams), so every
//! experiment in the test suites and the CLI is reproducible bit for bit.
//!
//! For the OU chain under a Gaussian kernel the covariance-operator target
//! has closed forms ([`gaussian_tr_c_sq`], [`ou_gaussian_feature_covariance`])
//! that anchor the population-side checks, and [`true_cov_error_sq`]
//! estimates the actual squared estimation error `‖Ĉ − C‖²` of an empirical
//! covariance operator by Monte Carlo over fresh trajectories.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::kernels::{Kernel, Points};
use crate::ksum::NeumaierSum;
use crate::mixing::MixingModel;

/// A simulated trajectory: scalar-valued or finite-state.
#[derive(Debug, Clone, PartialEq)]
pub enum Trajectory {
    /// A real-valued series.
    Scalar(Vec<f64>),
    /// A finite-state series over `{0, …, num_states−1}`.
    States { states: Vec<usize>, num_states: usize },
}

impl Trajectory {
    /// Number of time steps.
    pub fn len(&self) -> usize {
        match self {
            Trajectory::Scalar(xs) => xs.len(),
            Trajectory::States { states, .. } => states.len(),
        }
    }

    /// True when the trajectory has no steps.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The scalar series, if this is a scalar trajectory.
    pub fn as_scalars(&self) -> Option<&[f64]> {
        match self {
            Trajectory::Scalar(xs) => Some(xs),
            Trajectory::States { .. } => None,
        }
    }

    /// Embeds the trajectory as kernel-ready points: scalars become
    /// 1-dimensional points, states become one-hot vectors in `ℝ^K`.
    pub fn to_points(&self) -> Result<Points> {
        match self {
            Trajectory::Scalar(xs) => Points::from_scalars(xs),
            Trajectory::States { states, num_states } => {
                let k = *num_states;
                let mut flat = vec![0.0; states.len() * k];
                for (t, &s) in states.iter().enumerate() {
                    flat[t * k + s] = 1.0;
                }
                Points::from_flat(k, flat)
            }
        }
    }

    /// Writes the trajectory as CSV: a `# kind=…` header line, then one
    /// value per line (floats carry full round-trip precision).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    /// The CSV text written by [`Trajectory::write_csv`]: a `# kind=…`
    /// header followed by one value per line.
    pub fn to_csv_string(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        match self {
            Trajectory::Scalar(xs) => {
                out.push_str("# kind=scalar\n");
                for x in xs {
                    writeln!(out, "{x:.17e}").expect("string write");
                }
            }
            Trajectory::States { states, num_states } => {
                writeln!(out, "# kind=states num_states={num_states}").expect("string write");
                for s in states {
                    writeln!(out, "{s}").expect("string write");
                }
            }
        }
        out
    }

    /// Reads a trajectory written by [`Trajectory::write_csv`]. A file
    /// without a `# kind=…` header is read as a scalar series.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut num_states: Option<usize> = None;
        let mut body = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if rest == "kind=scalar" {
                    num_states = None;
                } else if let Some(k) = rest.strip_prefix("kind=states num_states=") {
                    let k: usize = k.trim().parse().map_err(|_| {
                        Error::Parse(format!("{}:{}: bad num_states", path.display(), lineno + 1))
                    })?;
                    num_states = Some(k);
                }
                continue;
            }
            body.push((lineno + 1, line.to_string()));
        }
        if body.is_empty() {
            return Err(Error::Input(format!("{}: empty trajectory", path.display())));
        }
        match num_states {
            Some(k) => {
                let mut states = Vec::with_capacity(body.len());
                for (lineno, tok) in body {
                    let s: usize = tok.parse().map_err(|_| {
                        Error::Parse(format!("{}:{lineno}: bad state `{tok}`", path.display()))
                    })?;
                    if s >= k {
                        return Err(Error::OutOfRange(format!(
                            "{}:{lineno}: state {s} outside 0..{k}",
                            path.display()
                        )));
                    }
                    states.push(s);
                }
                Ok(Trajectory::States { states, num_states: k })
            }
            None => {
                let mut xs = Vec::with_capacity(body.len());
                for (lineno, tok) in body {
                    xs.push(tok.parse().map_err(|_| {
                        Error::Parse(format!("{}:{lineno}: bad value `{tok}`", path.display()))
                    })?);
                }
                Ok(Trajectory::Scalar(xs))
            }
        }
    }
}

/// Samples `n` steps of the stationary Ornstein–Uhlenbeck chain.
pub fn sample_ou(n: usize, seed: u64) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::Input("trajectory length must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Trajectory::Scalar(sample_ou_with(&mut rng, n)))
}

fn sample_ou_with(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let phi = (-1.0f64).exp();
    let sigma = (1.0 - (-2.0f64).exp()).sqrt();
    let mut xs = Vec::with_capacity(n);
    let mut x: f64 = rng.sample(StandardNormal);
    xs.push(x);
    for _ in 1..n {
        let eps: f64 = rng.sample(StandardNormal);
        x = phi * x + sigma * eps;
        xs.push(x);
    }
    xs
}

/// Samples `n` steps of the noisy cyclic chain on `num_states ≥ 2` states
/// with failure probability `η ∈ [0, 1]`, started from the uniform invariant
/// law.
pub fn sample_noisy_cycle(n: usize, num_states: usize, eta: f64, seed: u64) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::Input("trajectory length must be ≥ 1".into()));
    }
    if num_states < 2 {
        return Err(Error::Input(format!("cyclic chain needs ≥ 2 states, got {num_states}")));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("η must lie in [0, 1], got {eta}")));
    }
    let k = num_states;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(n);
    let mut state = rng.random_range(0..k);
    states.push(state);
    for _ in 1..n {
        state = if rng.random::<f64>() < 1.0 - eta {
            (state + 1) % k
        } else {
            // Uniform over the K−1 non-successor states (the current state
            // included): i+2, i+3, …, i+K ≡ everything except i+1.
            let u = rng.random_range(0..k - 1);
            (state + 2 + u) % k
        };
        states.push(state);
    }
    Ok(Trajectory::States { states, num_states: k })
}

/// Exponential mixing model of the Ornstein–Uhlenbeck chain (rate `1 − 1/e`).
pub fn ou_mixing_model() -> MixingModel {
    MixingModel::exponential(1.0 - (-1.0f64).exp()).expect("rate is a fixed positive constant")
}

/// Exponential mixing model of the noisy cyclic chain (rate `η`); the
/// deterministic cycle `η = 0` never mixes.
pub fn noisy_cycle_mixing_model(eta: f64) -> Result<MixingModel> {
    MixingModel::exponential(eta)
        .map_err(|_| Error::Domain(format!("the cyclic chain mixes only for η > 0, got {eta}")))
}

/// Autocovariance `E[X_0 X_d] = e^{−d}` of the stationary OU chain.
pub fn ou_autocovariance(lag: usize) -> f64 {
    (-(lag as f64)).exp()
}

/// `tr(C²) = ‖C‖²_HS = E[k(X, X')²]` for the covariance operator `C` of the
/// stationary OU chain under a Gaussian kernel with length scale `l`, where
/// `X, X'` are independent `N(0,1)`:
///
/// ```text
/// tr(C²) = 1 / √(1 + 4/l²)
/// ```
pub fn gaussian_tr_c_sq(length_scale: f64) -> Result<f64> {
    let l = check_length_scale(length_scale)?;
    Ok(1.0 / (1.0 + 4.0 / (l * l)).sqrt())
}

/// Centered autocovariance of the rank-one covariance features
/// `Φ_t = φ(X_t) ⊗ φ(X_t)` of the stationary OU chain under a Gaussian
/// kernel: with `ρ = e^{−d}` the joint law of `(X_0, X_d)` is bivariate
/// normal and
///
/// ```text
/// E⟨Φ_0, Φ_d⟩ − ‖E Φ‖² = 1/√(1 + 4(1−ρ)/l²) − 1/√(1 + 4/l²)
/// ```
///
/// This is the gap-dependent covariance function the population variance
/// proxy averages over the within-block pair set.
pub fn ou_gaussian_feature_covariance(length_scale: f64, lag: usize) -> Result<f64> {
    let l = check_length_scale(length_scale)?;
    let rho = (-(lag as f64)).exp();
    let uncentered = 1.0 / (1.0 + 4.0 * (1.0 - rho) / (l * l)).sqrt();
    Ok(uncentered - 1.0 / (1.0 + 4.0 / (l * l)).sqrt())
}

fn check_length_scale(l: f64) -> Result<f64> {
    if !l.is_finite() || l <= 0.0 {
        return Err(Error::Domain(format!("Gaussian length scale must be > 0, got {l}")));
    }
    Ok(l)
}

/// Monte-Carlo estimate of a squared covariance-operator error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrueCovError {
    /// Estimate of `‖Ĉ − C‖²_HS`.
    pub estimate: f64,
    /// Resampling standard error of the estimate.
    pub std_error: f64,
}

/// Estimates the squared Hilbert–Schmidt error `‖Ĉ − C‖²` of the empirical
/// covariance operator `Ĉ = (1/n) Σ_t φ(x_t) ⊗ φ(x_t)` built from a scalar
/// OU trajectory under a Gaussian kernel with length scale `l`.
///
/// Expanding the square,
///
/// ```text
/// ‖Ĉ − C‖² = tr(Ĉ²) + tr(C²) − 2 tr(ĈC),
/// ```
///
/// `tr(Ĉ²) = (1/n²) Σ_{t,s} k(x_t, x_s)²` is computed exactly from the
/// sample, `tr(C²)` in closed form, and the cross term
/// `tr(ĈC) = E[(1/n) Σ_t k(x_t, X)²]` by Monte Carlo over `batches` fresh
/// OU trajectories of length `batch_len` (independent ChaCha8 streams
/// derived from `seed`). With ≥ 2 batches the reported standard error is
/// `2·sd(batch means)/√batches` — honest under dependence, since batches
/// are mutually independent. With a single batch it falls back to
/// `2·sd(per-point values)/√batch_len`, which ignores the serial dependence
/// inside the batch and is therefore optimistic; prefer several batches.
pub fn true_cov_error_sq(
    points: &[f64],
    length_scale: f64,
    batches: usize,
    batch_len: usize,
    seed: u64,
) -> Result<TrueCovError> {
    let l = check_length_scale(length_scale)?;
    if points.is_empty() {
        return Err(Error::Input("need at least one training point".into()));
    }
    if batches == 0 {
        return Err(Error::Input("need at least one fresh batch".into()));
    }
    if batches == 1 && batch_len < 2 {
        return Err(Error::Input(
            "a single batch needs length ≥ 2 for a standard error".into(),
        ));
    }
    if batch_len == 0 {
        return Err(Error::Input("fresh batches must be nonempty".into()));
    }
    let kernel = Kernel::gaussian(l)?;
    let n = points.len();

    let mut tr_chat_sq = NeumaierSum::new();
    for t in 0..n {
        for s in 0..n {
            let k = kernel.eval(&points[t..=t], &points[s..=s]);
            tr_chat_sq.add(k * k);
        }
    }
    let tr_chat_sq = tr_chat_sq.value() / (n * n) as f64;
    let tr_c_sq = gaussian_tr_c_sq(l)?;

    // Per-point value of the cross-term integrand at a fresh draw x:
    // y(x) = (1/n) Σ_t k(x_t, x)².
    let point_value = |x: &f64| {
        let mut acc = NeumaierSum::new();
        for t in 0..n {
            let k = kernel.eval(&points[t..=t], std::slice::from_ref(x));
            acc.add(k * k);
        }
        acc.value() / n as f64
    };

    let (cross, se_cross) = if batches == 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let fresh = sample_ou_with(&mut rng, batch_len);
        let values: Vec<f64> = fresh.iter().map(point_value).collect();
        let mean = values.iter().sum::<f64>() / batch_len as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (batch_len - 1) as f64;
        (mean, (var / batch_len as f64).sqrt())
    } else {
        let mut batch_means = Vec::with_capacity(batches);
        for b in 0..batches {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64 + 1);
            let fresh = sample_ou_with(&mut rng, batch_len);
            let mut acc = NeumaierSum::new();
            for x in &fresh {
                for t in 0..n {
                    let k = kernel.eval(&points[t..=t], std::slice::from_ref(x));
                    acc.add(k * k);
                }
            }
            batch_means.push(acc.value() / (n * batch_len) as f64);
        }
        let mean = batch_means.iter().sum::<f64>() / batches as f64;
        let var = batch_means.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (batches - 1) as f64;
        (mean, (var / batches as f64).sqrt())
    };

    Ok(TrueCovError {
        estimate: tr_chat_sq + tr_c_sq - 2.0 * cross,
        std_error: 2.0 * se_cross,
    })
}
