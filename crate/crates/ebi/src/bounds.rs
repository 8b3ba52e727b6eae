//! Concentration and risk bounds as pure scalar functions.
//!
//! Every bound takes plain numbers (sample size, block length, confidence
//! level, variance proxies, norm caps) and returns a [`BoundReport`] with the
//! total and a per-term breakdown. No randomness, no Gram access: upstream
//! code computes proxies once and these functions stay trivially testable.
//!
//! Conventions shared by all bounds:
//!
//! * `n` in the formulas is always the *effective* length `2mτ` of the block
//!   schedule; the trailing remainder of the trajectory is ignored.
//! * Confidence levels are mixing-adjusted before use: `δ(τ) = δ − 2(m−1)β(τ)`
//!   and, for terms built from lagged pairs, `δ'(τ) = δ − 2(m−1)β(τ−1)`.
//!   A non-positive adjusted level makes the bound *infeasible*: that is data,
//!   not an error, and yields a report with `feasible = false` and value `+∞`.
//! * Each bound splits into a **slow term** (decays like `1/√n` or `1/√m`)
//!   and a **fast term** (decays like `1/n` or `1/m`). Multi-term bounds list
//!   every addend in `extra_terms`, names suffixed `_slow`/`_fast`, and the
//!   headline `slow_term`/`fast_term` are the sums of the two groups.
//! * Constants are kept exactly as derived — no algebraic rearrangement —
//!   so printed terms can be checked against the formulas digit for digit.
//!
//! The two regression bounds cover the two classical regularization styles:
//! [`bound_regression_ivanov`] for a hard norm constraint `‖·‖ ≤ γ` and
//! [`bound_regression_tikhonov`] for ridge shrinkage with eigenvalue floor
//! factor `g ≥ 1`, whose effective level is `δ̂ = δ/(2g) − 2(m−1)β(τ)`.

use crate::blocks::BlockSchedule;
use crate::error::{Error, Result};
use crate::mixing::MixingModel;

/// Flag set when a negative unbiased proxy was floored at zero.
pub const FLAG_PROXY_FLOORED: &str = "unbiased_proxy_floored";
/// Flag set on infeasible reports (adjusted confidence level ≤ 0).
pub const FLAG_INFEASIBLE: &str = "mixing_penalty_exhausts_delta";

/// A fully evaluated bound: total, per-term breakdown, and feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Stable identifier of the bound family (e.g. `dependent_biased`).
    pub name: String,
    /// False when the mixing-adjusted confidence level is ≤ 0.
    pub feasible: bool,
    /// The bound. `+∞` when infeasible. For two-term bounds this is exactly
    /// `slow_term + fast_term`; for multi-term bounds it is the left-to-right
    /// sum of `extra_terms`.
    pub value: f64,
    /// The adjusted confidence level actually used (`δ(τ)`, `δ`, or `δ̂`).
    pub delta_effective: f64,
    /// The lagged level `δ'(τ)` for bounds that use one.
    pub delta_effective_lagged: Option<f64>,
    /// Sum of the `1/√n`-type terms (NaN when infeasible).
    pub slow_term: f64,
    /// Sum of the `1/n`-type terms (NaN when infeasible).
    pub fast_term: f64,
    /// Every addend of a multi-term bound, in summation order; empty for
    /// two-term bounds.
    pub extra_terms: Vec<(String, f64)>,
    /// Diagnostics such as [`FLAG_PROXY_FLOORED`] or [`FLAG_INFEASIBLE`].
    pub flags: Vec<String>,
}

impl BoundReport {
    fn two_term(name: &str, delta_effective: f64, slow: f64, fast: f64) -> Self {
        BoundReport {
            name: name.into(),
            feasible: true,
            value: slow + fast,
            delta_effective,
            delta_effective_lagged: None,
            slow_term: slow,
            fast_term: fast,
            extra_terms: Vec::new(),
            flags: Vec::new(),
        }
    }

    fn multi_term(
        name: &str,
        delta_effective: f64,
        delta_effective_lagged: Option<f64>,
        terms: Vec<(&'static str, f64)>,
    ) -> Self {
        let value = terms.iter().fold(0.0, |acc, (_, v)| acc + v);
        let sum_group = |suffix: &str| {
            terms
                .iter()
                .filter(|(n, _)| n.ends_with(suffix))
                .fold(0.0, |acc, (_, v)| acc + v)
        };
        BoundReport {
            name: name.into(),
            feasible: true,
            value,
            delta_effective,
            delta_effective_lagged,
            slow_term: sum_group("_slow"),
            fast_term: sum_group("_fast"),
            extra_terms: terms.into_iter().map(|(n, v)| (n.to_string(), v)).collect(),
            flags: Vec::new(),
        }
    }

    fn infeasible(name: &str, delta_effective: f64, delta_effective_lagged: Option<f64>) -> Self {
        BoundReport {
            name: name.into(),
            feasible: false,
            value: f64::INFINITY,
            delta_effective,
            delta_effective_lagged,
            slow_term: f64::NAN,
            fast_term: f64::NAN,
            extra_terms: Vec::new(),
            flags: vec![FLAG_INFEASIBLE.into()],
        }
    }

    /// Serializes to a single-line JSON object. Finite numbers carry 17
    /// significant digits (lossless for `f64`); non-finite values become
    /// `null`.
    pub fn to_json(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("{\"name\":");
        push_json_string(&mut out, &self.name);
        write!(
            out,
            ",\"feasible\":{},\"value\":{},\"delta_effective\":{}",
            self.feasible,
            json_number(self.value),
            json_number(self.delta_effective)
        )
        .expect("string write");
        out.push_str(",\"delta_effective_lagged\":");
        match self.delta_effective_lagged {
            Some(v) => out.push_str(&json_number(v)),
            None => out.push_str("null"),
        }
        write!(
            out,
            ",\"slow_term\":{},\"fast_term\":{},\"extra_terms\":[",
            json_number(self.slow_term),
            json_number(self.fast_term)
        )
        .expect("string write");
        for (i, (name, v)) in self.extra_terms.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push('[');
            push_json_string(&mut out, name);
            out.push(',');
            out.push_str(&json_number(*v));
            out.push(']');
        }
        out.push_str("],\"flags\":[");
        for (i, flag) in self.flags.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_json_string(&mut out, flag);
        }
        out.push_str("]}");
        out
    }

    /// Parses a report serialized by [`BoundReport::to_json`]. A `null` value
    /// maps back to `+∞`, `null` terms to NaN.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("bad report JSON: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("report JSON must be an object".into()))?;
        let field = |key: &str| {
            obj.get(key)
                .ok_or_else(|| Error::Parse(format!("report JSON missing `{key}`")))
        };
        let num = |key: &str, missing_as: f64| -> Result<f64> {
            let v = field(key)?;
            if v.is_null() {
                return Ok(missing_as);
            }
            v.as_f64()
                .ok_or_else(|| Error::Parse(format!("report field `{key}` is not a number")))
        };
        let name = field("name")?
            .as_str()
            .ok_or_else(|| Error::Parse("report field `name` is not a string".into()))?
            .to_string();
        let feasible = field("feasible")?
            .as_bool()
            .ok_or_else(|| Error::Parse("report field `feasible` is not a bool".into()))?;
        let lagged = match field("delta_effective_lagged")? {
            serde_json::Value::Null => None,
            other => Some(
                other
                    .as_f64()
                    .ok_or_else(|| Error::Parse("bad `delta_effective_lagged`".into()))?,
            ),
        };
        let mut extra_terms = Vec::new();
        for entry in field("extra_terms")?
            .as_array()
            .ok_or_else(|| Error::Parse("`extra_terms` is not an array".into()))?
        {
            let pair = entry
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| Error::Parse("each extra term must be a [name, value] pair".into()))?;
            let term_name = pair[0]
                .as_str()
                .ok_or_else(|| Error::Parse("extra term name is not a string".into()))?;
            let term_value = if pair[1].is_null() {
                f64::NAN
            } else {
                pair[1]
                    .as_f64()
                    .ok_or_else(|| Error::Parse("extra term value is not a number".into()))?
            };
            extra_terms.push((term_name.to_string(), term_value));
        }
        let mut flags = Vec::new();
        for flag in field("flags")?
            .as_array()
            .ok_or_else(|| Error::Parse("`flags` is not an array".into()))?
        {
            flags.push(
                flag.as_str()
                    .ok_or_else(|| Error::Parse("flag is not a string".into()))?
                    .to_string(),
            );
        }
        Ok(BoundReport {
            name,
            feasible,
            value: num("value", f64::INFINITY)?,
            delta_effective: num("delta_effective", f64::NAN)?,
            delta_effective_lagged: lagged,
            slow_term: num("slow_term", f64::NAN)?,
            fast_term: num("fast_term", f64::NAN)?,
            extra_terms,
            flags,
        })
    }
}

/// Formats a float as a JSON number with 17 significant digits (round-trip
/// exact for `f64`); non-finite values become `null`.
pub fn json_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

fn push_json_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain(format!("{name} must be a finite positive number, got {v}")));
    }
    Ok(())
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Domain(format!("{name} must be finite and ≥ 0, got {v}")));
    }
    Ok(())
}

fn check_delta_open_unit(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

fn check_delta_below_two_over_e(delta: f64) -> Result<f64> {
    let cap = 2.0 / std::f64::consts::E;
    if !(delta > 0.0 && delta < cap) {
        return Err(Error::Domain(format!("delta must lie in (0, 2/e ≈ {cap:.4}), got {delta}")));
    }
    Ok(cap)
}

/// Schedule-dependent context every dependent bound needs.
fn dependent_context(
    n: usize,
    tau: usize,
    delta: f64,
    model: &MixingModel,
) -> Result<(BlockSchedule, f64)> {
    let schedule = BlockSchedule::new(n, tau)?;
    let delta_tau = model.adjusted_delta(delta, n, tau)?;
    Ok((schedule, delta_tau))
}

/// Deviation bound for the block-sum mean of a dependent, norm-bounded
/// Hilbert-space series, driven by the *population* variance proxy `V_τ`:
///
/// ```text
/// √((2τ·V_τ/n)(1 + 2 ln(2/δ(τ)))) + (8τc/(3n)) ln(2/δ(τ))
/// ```
pub fn bound_dependent_population(
    n: usize,
    tau: usize,
    delta: f64,
    model: &MixingModel,
    v_tau: f64,
    c: f64,
) -> Result<BoundReport> {
    const NAME: &str = "dependent_population";
    check_nonnegative("population proxy", v_tau)?;
    check_positive("norm cap c", c)?;
    let (schedule, delta_tau) = dependent_context(n, tau, delta, model)?;
    if delta_tau <= 0.0 {
        return Ok(BoundReport::infeasible(NAME, delta_tau, None));
    }
    let n = schedule.n_effective() as f64;
    let tau = tau as f64;
    let log = (2.0 / delta_tau).ln();
    let slow = ((2.0 * tau * v_tau / n) * (1.0 + 2.0 * log)).sqrt();
    let fast = (8.0 * tau * c / (3.0 * n)) * log;
    Ok(BoundReport::two_term(NAME, delta_tau, slow, fast))
}

/// Fully empirical deviation bound driven by the biased variance proxy `V̂⁺`:
///
/// ```text
/// √((2τ·V̂⁺/n)(1 + 2 ln(4/δ(τ)))) + (32τc/(3n)) ln(4/δ(τ))
/// ```
pub fn bound_dependent_biased(
    n: usize,
    tau: usize,
    delta: f64,
    model: &MixingModel,
    v_hat: f64,
    c: f64,
) -> Result<BoundReport> {
    const NAME: &str = "dependent_biased";
    check_nonnegative("biased proxy", v_hat)?;
    check_positive("norm cap c", c)?;
    let (schedule, delta_tau) = dependent_context(n, tau, delta, model)?;
    if delta_tau <= 0.0 {
        return Ok(BoundReport::infeasible(NAME, delta_tau, None));
    }
    let n = schedule.n_effective() as f64;
    let tau = tau as f64;
    let log = (4.0 / delta_tau).ln();
    let slow = ((2.0 * tau * v_hat / n) * (1.0 + 2.0 * log)).sqrt();
    let fast = (32.0 * tau * c / (3.0 * n)) * log;
    Ok(BoundReport::two_term(NAME, delta_tau, slow, fast))
}

/// Fully empirical deviation bound driven by the unbiased proxy `Ṽ`, which
/// removes the mean-squared inflation of `V̂⁺` at the price of a larger fast
/// constant and the stricter requirements `δ < 2/e` and `m ≥ 2`:
///
/// ```text
/// √((2τ·max(Ṽ, 0)/n)(1 + 2 ln(4/δ(τ)))) + (22τc/n) ln(4/δ(τ))
/// ```
///
/// A negative `Ṽ` (possible for a U-statistic) is floored at zero and the
/// report is flagged [`FLAG_PROXY_FLOORED`].
pub fn bound_dependent_unbiased(
    n: usize,
    tau: usize,
    delta: f64,
    model: &MixingModel,
    v_tilde: f64,
    c: f64,
) -> Result<BoundReport> {
    const NAME: &str = "dependent_unbiased";
    if !v_tilde.is_finite() {
        return Err(Error::Domain(format!("unbiased proxy must be finite, got {v_tilde}")));
    }
    check_positive("norm cap c", c)?;
    check_delta_below_two_over_e(delta)?;
    let (schedule, delta_tau) = dependent_context(n, tau, delta, model)?;
    if schedule.m() < 2 {
        return Err(Error::UndefinedUStatistic(format!(
            "unbiased-proxy bound needs m ≥ 2 block pairs, got m = {}",
            schedule.m()
        )));
    }
    if delta_tau <= 0.0 {
        return Ok(BoundReport::infeasible(NAME, delta_tau, None));
    }
    let n = schedule.n_effective() as f64;
    let tau_f = tau as f64;
    let log = (4.0 / delta_tau).ln();
    let floored = v_tilde < 0.0;
    let v = if floored { 0.0 } else { v_tilde };
    let slow = ((2.0 * tau_f * v / n) * (1.0 + 2.0 * log)).sqrt();
    let fast = (22.0 * tau_f * c / n) * log;
    let mut report = BoundReport::two_term(NAME, delta_tau, slow, fast);
    if floored {
        report.flags.push(FLAG_PROXY_FLOORED.into());
    }
    Ok(report)
}

/// Deviation bound for the *un-normalized* sum of independent, norm-bounded
/// Hilbert-space observations, driven by the biased empirical second moment
/// `Σ_i ‖X_i‖²`:
///
/// ```text
/// √(Σ_i ‖X_i‖²) (1 + √(2 ln(2/δ))) + (16c/3) ln(2/δ)
/// ```
pub fn bound_iid_biased(sum_sq_norms: f64, c: f64, delta: f64) -> Result<BoundReport> {
    check_nonnegative("sum of squared norms", sum_sq_norms)?;
    check_positive("norm cap c", c)?;
    check_delta_open_unit(delta)?;
    let log = (2.0 / delta).ln();
    let slow = sum_sq_norms.sqrt() * (1.0 + (2.0 * log).sqrt());
    let fast = (16.0 * c / 3.0) * log;
    Ok(BoundReport::two_term("iid_biased", delta, slow, fast))
}

/// Independent-data analogue of the unbiased-proxy bound, driven by the
/// pairwise squared distances `Σ_{i≠j} ‖X_i − X_j‖²` over `count` points
/// (ordered pairs), for the un-normalized sum:
///
/// ```text
/// √(Σ_{i≠j} ‖X_i−X_j‖² / (2(count−1))) (1 + √(2 ln(2/δ))) + 11c ln(2/δ)
/// ```
///
/// Requires `count ≥ 2` and `δ < 2/e`.
pub fn bound_iid_unbiased(
    pairwise_sq_sum: f64,
    count: usize,
    c: f64,
    delta: f64,
) -> Result<BoundReport> {
    check_nonnegative("pairwise squared-distance sum", pairwise_sq_sum)?;
    check_positive("norm cap c", c)?;
    check_delta_below_two_over_e(delta)?;
    if count < 2 {
        return Err(Error::UndefinedUStatistic(format!(
            "pairwise second moment needs at least 2 points, got {count}"
        )));
    }
    let log = (2.0 / delta).ln();
    let slow = (pairwise_sq_sum / (2.0 * (count - 1) as f64)).sqrt() * (1.0 + (2.0 * log).sqrt());
    let fast = 11.0 * c * log;
    Ok(BoundReport::two_term("iid_unbiased", delta, slow, fast))
}

/// Covariance-operator estimation error bound with both terms linear in the
/// log level (worst-case in the variance):
///
/// ```text
/// (4c_H/m) ln(4/δ(τ)) + (2c_H/√m) ln(4/δ(τ))
/// ```
pub fn bound_covariance_basic(
    n: usize,
    tau: usize,
    delta: f64,
    model: &MixingModel,
    c_h: f64,
) -> Result<BoundReport> {
    const NAME: &str = "covariance_basic";
    check_positive("feature norm cap c_H", c_h)?;
    let (schedule, delta_tau) = dependent_context(n, tau, delta, model)?;
    if delta_tau <= 0.0 {
        return Ok(BoundReport::infeasible(NAME, delta_tau, None));
    }
    let m = schedule.m() as f64;
    let log = (4.0 / delta_tau).ln();
    let slow = (2.0 * c_h / m.sqrt()) * log;
    let fast = (4.0 * c_h / m) * log;
    Ok(BoundReport::two_term(NAME, delta_tau, slow, fast))
}

/// Covariance-operator estimation error bound with a Bernstein-type slow
/// term (square root of the log level):
///
/// ```text
/// (4c_H/(3m)) ln(2/δ(τ)) + √((2c_H²/m)(1 + 2 ln(2/δ(τ))))
/// ```
pub fn bound_covariance_bernstein(
    n: usize,
    tau: usize,
    delta: f64,
    model: &MixingModel,
    c_h: f64,
) -> Result<BoundReport> {
    const NAME: &str = "covariance_bernstein";
    check_positive("feature norm cap c_H", c_h)?;
    let (schedule, delta_tau) = dependent_context(n, tau, delta, model)?;
    if delta_tau <= 0.0 {
        return Ok(BoundReport::infeasible(NAME, delta_tau, None));
    }
    let m = schedule.m() as f64;
    let log = (2.0 / delta_tau).ln();
    let slow = ((2.0 * c_h * c_h / m) * (1.0 + 2.0 * log)).sqrt();
    let fast = (4.0 * c_h / (3.0 * m)) * log;
    Ok(BoundReport::two_term(NAME, delta_tau, slow, fast))
}

/// Scale inputs shared by the regression risk bounds: the feature norm cap,
/// the target rank, and the three empirical variance proxies (squared-feature
/// terms `Y`, lagged cross terms `Z`, and the scalar block variance `W`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionBoundInputs {
    pub c_h: f64,
    pub rank: usize,
    pub v_y: f64,
    pub v_z: f64,
    pub v_w: f64,
}

impl RegressionBoundInputs {
    fn validate(&self) -> Result<()> {
        check_positive("feature norm cap c_H", self.c_h)?;
        if self.rank < 1 {
            return Err(Error::Domain("rank must be ≥ 1".into()));
        }
        check_nonnegative("proxy v_y", self.v_y)?;
        check_nonnegative("proxy v_z", self.v_z)?;
        check_nonnegative("proxy v_w", self.v_w)?;
        Ok(())
    }
}

/// Excess-risk bound for reduced-rank regression under a hard constraint
/// `‖coefficients‖ ≤ γ` (Ivanov regularization). Six terms; the cross terms
/// use the lagged level `δ'(τ)`, so `τ ≥ 2` and `m ≥ 2` are required:
///
/// ```text
/// (32γ²c_Hτ/(3n)) ln(12/δ(τ))          y_fast
/// (64√r·γc_Hτ/(3n)) ln(12/δ'(τ))       z_fast
/// (7c_Hτ/(3(m−1))) ln(12/δ(τ))         w_fast
/// √((2γ⁴·v_y·τ/n)(1+2 ln(12/δ(τ))))    y_slow
/// √((2r·γ²·v_z·τ/n)(1+2 ln(12/δ'(τ)))) z_slow
/// √((2·v_w·τ/n) ln(12/δ(τ)))           w_slow
/// ```
pub fn bound_regression_ivanov(
    n: usize,
    tau: usize,
    delta: f64,
    model: &MixingModel,
    gamma: f64,
    inputs: &RegressionBoundInputs,
) -> Result<BoundReport> {
    const NAME: &str = "regression_ivanov";
    check_nonnegative("constraint radius gamma", gamma)?;
    inputs.validate()?;
    let (schedule, delta_tau) = dependent_context(n, tau, delta, model)?;
    let delta_lagged = model.adjusted_delta_lagged(delta, n, tau)?;
    if schedule.m() < 2 {
        return Err(Error::UndefinedUStatistic(format!(
            "regression bound needs m ≥ 2 block pairs, got m = {}",
            schedule.m()
        )));
    }
    if delta_tau <= 0.0 || delta_lagged <= 0.0 {
        return Ok(BoundReport::infeasible(NAME, delta_tau, Some(delta_lagged)));
    }
    let nf = schedule.n_effective() as f64;
    let tau_f = tau as f64;
    let m = schedule.m() as f64;
    let r = inputs.rank as f64;
    let ch = inputs.c_h;
    let log = (12.0 / delta_tau).ln();
    let log_lagged = (12.0 / delta_lagged).ln();
    let terms = vec![
        ("y_fast", (32.0 * gamma * gamma * ch * tau_f / (3.0 * nf)) * log),
        ("z_fast", (64.0 * r.sqrt() * gamma * ch * tau_f / (3.0 * nf)) * log_lagged),
        ("w_fast", (7.0 * ch * tau_f / (3.0 * (m - 1.0))) * log),
        ("y_slow", ((2.0 * gamma.powi(4) * inputs.v_y * tau_f / nf) * (1.0 + 2.0 * log)).sqrt()),
        (
            "z_slow",
            ((2.0 * r * gamma * gamma * inputs.v_z * tau_f / nf) * (1.0 + 2.0 * log_lagged)).sqrt(),
        ),
        ("w_slow", ((2.0 * inputs.v_w * tau_f / nf) * log).sqrt()),
    ];
    Ok(BoundReport::multi_term(NAME, delta_tau, Some(delta_lagged), terms))
}

/// Excess-risk bound for reduced-rank regression with ridge shrinkage
/// (Tikhonov regularization), where `g ≥ 1` caps the eigenvalue inflation of
/// the regularized inverse. Every log uses the shrinkage-adjusted level
/// `δ̂ = δ/(2g) − 2(m−1)β(τ)`:
///
/// ```text
/// (128c_Hτ·g(√r+g)/(3n)) ln(12/δ̂)      yz_fast
/// (14c_Hτ²/(3n−2τ)) ln(12/δ̂)           tail_fast
/// √((32g⁴·v_y·τ/n)(1+2 ln(12/δ̂)))      y_slow
/// √((2·v_w·τ/n) ln(12/δ̂))              w_slow
/// √((8r·g²·v_z·τ/n)(1+2 ln(12/δ̂)))     z_slow
/// ```
pub fn bound_regression_tikhonov(
    n: usize,
    tau: usize,
    delta: f64,
    model: &MixingModel,
    shrinkage: f64,
    inputs: &RegressionBoundInputs,
) -> Result<BoundReport> {
    const NAME: &str = "regression_tikhonov";
    if !shrinkage.is_finite() || shrinkage < 1.0 {
        return Err(Error::Domain(format!(
            "shrinkage factor g must be finite and ≥ 1, got {shrinkage}"
        )));
    }
    inputs.validate()?;
    check_delta_open_unit(delta)?;
    let schedule = BlockSchedule::new(n, tau)?;
    let m = schedule.m();
    let base = 0.5 * delta / shrinkage;
    let delta_hat = if m <= 1 {
        base
    } else {
        base - 2.0 * (m - 1) as f64 * model.beta(tau)?
    };
    if delta_hat <= 0.0 {
        return Ok(BoundReport::infeasible(NAME, delta_hat, None));
    }
    let nf = schedule.n_effective() as f64;
    let tau_f = tau as f64;
    let g = shrinkage;
    let r = inputs.rank as f64;
    let ch = inputs.c_h;
    let log = (12.0 / delta_hat).ln();
    let terms = vec![
        ("yz_fast", (128.0 * ch * tau_f * g * (r.sqrt() + g) / (3.0 * nf)) * log),
        ("tail_fast", (14.0 * ch * tau_f * tau_f / (3.0 * nf - 2.0 * tau_f)) * log),
        ("y_slow", ((32.0 * g.powi(4) * inputs.v_y * tau_f / nf) * (1.0 + 2.0 * log)).sqrt()),
        ("w_slow", ((2.0 * inputs.v_w * tau_f / nf) * log).sqrt()),
        ("z_slow", ((8.0 * r * g * g * inputs.v_z * tau_f / nf) * (1.0 + 2.0 * log)).sqrt()),
    ];
    Ok(BoundReport::multi_term(NAME, delta_hat, None, terms))
}
