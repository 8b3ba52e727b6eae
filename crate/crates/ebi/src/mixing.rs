//! β-mixing decay models and mixing-adjusted failure probabilities.
//!
//! The block method treats same-sequence blocks as independent at a cost: with
//! `m = floor(n / 2τ)` blocks per sequence, a nominal failure probability `δ`
//! becomes
//!
//! ```text
//! δ(τ)  = δ − 2(m−1)·β(τ)        (within-block constructions)
//! δ'(τ) = δ − 2(m−1)·β(τ−1)      (lagged pairs: blocks only τ−1 apart)
//! ```
//!
//! where `β(τ)` is the process's β-mixing coefficient at lag `τ`. A bound is
//! feasible only while the adjusted probability stays positive; `δ(τ)` is
//! non-decreasing in `τ` (larger blocks → fewer of them and smaller `β`), so
//! the smallest feasible `τ` is found by a forward scan.
//!
//! Mixing coefficients are prior knowledge, not estimated from data. Supported
//! decay models: exponential `β(τ) = e^{−pτ}`, algebraic `β(τ) = τ^{−p}`, a
//! tabulated step function (conservative: holds each value until the next
//! tabulated lag, never extrapolates below the smallest lag), and `none`
//! (`β ≡ 0`, independent data).

use std::path::Path;

use crate::error::{Error, Result};

/// A β-mixing decay model.
#[derive(Debug, Clone, PartialEq)]
pub enum MixingModel {
    /// `β(τ) = exp(−p·τ)`, `p > 0`.
    Exponential { rate: f64 },
    /// `β(τ) = τ^(−p)`, `p > 0`.
    Algebraic { exponent: f64 },
    /// Step function through tabulated `(τ, β)` pairs; `β(τ)` is the value at
    /// the largest tabulated lag `≤ τ`. Lags below the smallest entry are an
    /// error (no extrapolation toward 0).
    Table { taus: Vec<usize>, betas: Vec<f64> },
    /// `β ≡ 0` (independent data).
    None,
}

/// Result of the smallest-feasible-τ search.
#[derive(Debug, Clone, PartialEq)]
pub enum TauSearch {
    /// Smallest `τ` with `δ(τ) > 0` (and, if requested, `δ'(τ) > 0`).
    Feasible { tau: usize, delta_effective: f64 },
    /// No `τ` in `1..=n/2` is feasible; carries the largest `δ(τ)` seen.
    Infeasible { best: Option<(usize, f64)> },
}

impl TauSearch {
    /// The feasible τ, if any.
    pub fn tau(&self) -> Option<usize> {
        match self {
            TauSearch::Feasible { tau, .. } => Some(*tau),
            TauSearch::Infeasible { .. } => None,
        }
    }
}

impl MixingModel {
    /// Exponential decay `β(τ) = e^{−p·τ}`. Requires finite `p > 0`.
    pub fn exponential(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::Domain(format!("exponential mixing rate must be > 0, got {rate}")));
        }
        Ok(MixingModel::Exponential { rate })
    }

    /// Algebraic decay `β(τ) = τ^(−p)`. Requires finite `p > 0`.
    pub fn algebraic(exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent <= 0.0 {
            return Err(Error::Domain(format!("algebraic mixing exponent must be > 0, got {exponent}")));
        }
        Ok(MixingModel::Algebraic { exponent })
    }

    /// Tabulated decay from `(τ, β)` pairs.
    ///
    /// Validates: nonempty, lags strictly increasing and ≥ 1, values in
    /// `[0, 1]` and non-increasing.
    pub fn table(pairs: &[(usize, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Input("mixing table must have at least one (τ, β) entry".into()));
        }
        for window in pairs.windows(2) {
            if window[1].0 <= window[0].0 {
                return Err(Error::Input(format!(
                    "mixing table lags must be strictly increasing, got {} after {}",
                    window[1].0, window[0].0
                )));
            }
            if window[1].1 > window[0].1 {
                return Err(Error::Input(format!(
                    "mixing table values must be non-increasing, got {} after {}",
                    window[1].1, window[0].1
                )));
            }
        }
        for &(tau, beta) in pairs {
            if tau == 0 {
                return Err(Error::Input("mixing table lags must be ≥ 1".into()));
            }
            if !(0.0..=1.0).contains(&beta) {
                return Err(Error::Input(format!("mixing table value β({tau}) = {beta} outside [0, 1]")));
            }
        }
        Ok(MixingModel::Table {
            taus: pairs.iter().map(|p| p.0).collect(),
            betas: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// `β ≡ 0`.
    pub fn none() -> Self {
        MixingModel::None
    }

    /// Parses a model spec string: `exponential:<p>`, `algebraic:<p>`,
    /// `table:<path>` (two-column CSV `tau,beta`), or `none`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "none" {
            return Ok(MixingModel::None);
        }
        let (variant, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("mixing spec `{spec}` is not `variant:arg` or `none`")))?;
        match variant {
            "exponential" => {
                let p: f64 = arg
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponential rate `{arg}`")))?;
                Self::exponential(p)
            }
            "algebraic" => {
                let p: f64 = arg
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad algebraic exponent `{arg}`")))?;
                Self::algebraic(p)
            }
            "table" => Self::table_from_csv(Path::new(arg)),
            other => Err(Error::Parse(format!(
                "unknown mixing variant `{other}` (expected exponential, algebraic, table, none)"
            ))),
        }
    }

    /// Loads a tabulated model from a two-column CSV file (`tau,beta`).
    /// Blank lines and `#` comments are ignored.
    pub fn table_from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (tau_s, beta_s) = line.split_once(',').ok_or_else(|| {
                Error::Parse(format!("{}:{}: expected `tau,beta`", path.display(), lineno + 1))
            })?;
            let tau: usize = tau_s.trim().parse().map_err(|_| {
                Error::Parse(format!("{}:{}: bad lag `{tau_s}`", path.display(), lineno + 1))
            })?;
            let beta: f64 = beta_s.trim().parse().map_err(|_| {
                Error::Parse(format!("{}:{}: bad β `{beta_s}`", path.display(), lineno + 1))
            })?;
            pairs.push((tau, beta));
        }
        Self::table(&pairs)
    }

    /// `β(τ)` for `τ ≥ 1`, clamped to `[0, 1]`.
    ///
    /// Errors: `τ = 0` → [`Error::OutOfRange`]; table variant queried below
    /// its smallest tabulated lag → [`Error::OutOfRange`].
    pub fn beta(&self, tau: usize) -> Result<f64> {
        if tau == 0 {
            return Err(Error::OutOfRange("mixing coefficient requires lag τ ≥ 1".into()));
        }
        let raw = match self {
            MixingModel::Exponential { rate } => (-rate * tau as f64).exp(),
            MixingModel::Algebraic { exponent } => (tau as f64).powf(-exponent),
            MixingModel::Table { taus, betas } => {
                // Largest tabulated lag ≤ τ (step function, conservative).
                match taus.partition_point(|&t| t <= tau) {
                    0 => {
                        return Err(Error::OutOfRange(format!(
                            "lag {tau} below smallest tabulated lag {} (no extrapolation)",
                            taus[0]
                        )))
                    }
                    idx => betas[idx - 1],
                }
            }
            MixingModel::None => 0.0,
        };
        Ok(raw.clamp(0.0, 1.0))
    }

    /// Mixing-adjusted failure probability `δ(τ) = δ − 2(m−1)·β(τ)` with
    /// `m = floor(n / 2τ)`. May be ≤ 0; callers check feasibility.
    ///
    /// With `m = 1` the penalty vanishes identically, so `β(τ)` is not
    /// evaluated (a tabulated model cannot fail there).
    pub fn adjusted_delta(&self, delta: f64, n: usize, tau: usize) -> Result<f64> {
        let m = check_schedule(delta, n, tau)?;
        if m <= 1 {
            return Ok(delta);
        }
        Ok(delta - 2.0 * (m - 1) as f64 * self.beta(tau)?)
    }

    /// Lagged variant `δ'(τ) = δ − 2(m−1)·β(τ−1)`, used by terms built from
    /// lagged pairs whose blocks are only `τ−1` steps apart. Requires `τ ≥ 2`.
    pub fn adjusted_delta_lagged(&self, delta: f64, n: usize, tau: usize) -> Result<f64> {
        if tau < 2 {
            return Err(Error::InfeasibleSchedule(
                "lagged adjustment needs τ ≥ 2 (lagged pairs leave zero separation at τ = 1)".into(),
            ));
        }
        let m = check_schedule(delta, n, tau)?;
        if m <= 1 {
            return Ok(delta);
        }
        Ok(delta - 2.0 * (m - 1) as f64 * self.beta(tau - 1)?)
    }

    /// Smallest `τ ∈ 1..=n/2` with `δ(τ) > 0`, or an infeasibility result
    /// carrying the largest `δ(τ)` found.
    ///
    /// With `require_lagged`, `δ'(τ) > 0` is required as well (which excludes
    /// `τ = 1`). Lags where a tabulated model is undefined are treated as
    /// infeasible and skipped: a positive `δ(τ)` cannot be certified without
    /// a value for `β(τ)`.
    pub fn min_feasible_tau(&self, delta: f64, n: usize, require_lagged: bool) -> Result<TauSearch> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        let mut best: Option<(usize, f64)> = None;
        for tau in 1..=n / 2 {
            let dt = match self.adjusted_delta(delta, n, tau) {
                Ok(v) => v,
                Err(_) => continue,
            };
            if best.is_none_or(|(_, b)| dt > b) {
                best = Some((tau, dt));
            }
            if dt <= 0.0 {
                continue;
            }
            if require_lagged {
                match self.adjusted_delta_lagged(delta, n, tau) {
                    Ok(lagged) if lagged > 0.0 => {}
                    _ => continue,
                }
            }
            return Ok(TauSearch::Feasible { tau, delta_effective: dt });
        }
        Ok(TauSearch::Infeasible { best })
    }
}

fn check_schedule(delta: f64, n: usize, tau: usize) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if tau == 0 || n < 2 * tau {
        return Err(Error::InfeasibleSchedule(format!(
            "no full block pair fits (n = {n}, τ = {tau})"
        )));
    }
    Ok(n / (2 * tau))
}
