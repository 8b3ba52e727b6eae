//! The five subcommands: `simulate`, `bound`, `coverage`, `model-select`,
//! and `true-error`.
//!
//! Each command resolves its parameters (flags over config file, defaults
//! last), validates them up front — failures there exit with code 2 — and
//! then executes, where failures exit with code 3. Outputs embed the
//! effective configuration (see [`crate::output`]) and are deterministic
//! given that configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;

use ebi::bounds::json_number;
use ebi::covariance::{
    covariance_bound, ou_coverage, ou_population_proxy, CovarianceAnalysis, CovarianceMethod,
    CovarianceOptions, CoverageOptions,
};
use ebi::kernels::{GramKind, GramSource, Kernel, LazyGram};
use ebi::mixing::{MixingModel, TauSearch};
use ebi::processes::{
    gaussian_tr_c_sq, ou_mixing_model, sample_noisy_cycle, sample_ou, true_cov_error_sq, Trajectory,
};
use ebi::regression::{model_select, GridConfig, SelectOptions};
use ebi::ProxyKind;

use crate::config::{
    config_err, parse_list, required, resolve, runtime_err, CliError, ConfigMap,
};
use crate::output::{
    csv_config_header, fmt_float, fmt_float_list, json_config_fields, push_json_string,
    write_output, ConfigEcho,
};

// ---------------------------------------------------------------------------
// simulate

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Process to simulate: `ou` or `cycle`.
    #[arg(long)]
    process: Option<String>,
    /// Number of steps.
    #[arg(long)]
    n: Option<usize>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of states of the cyclic chain.
    #[arg(long = "K")]
    num_states: Option<usize>,
    /// Per-step probability that the cyclic chain leaves its cycle.
    #[arg(long)]
    eta: Option<f64>,
    /// Output file (stdout when omitted).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

pub fn run_simulate(args: SimulateArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.check_known(&["process", "n", "seed", "K", "eta", "output"])?;
    let process: String = required(resolve(args.process, cfg, "process")?, "process")?;
    let n: usize = required(resolve(args.n, cfg, "n")?, "n")?;
    let seed: u64 = resolve(args.seed, cfg, "seed")?.unwrap_or(0);
    let num_states = resolve(args.num_states, cfg, "K")?;
    let eta = resolve(args.eta, cfg, "eta")?;
    let output = resolve(args.output, cfg, "output")?;

    let mut echo: ConfigEcho = vec![("process", String::new()), ("n", n.to_string()), ("seed", seed.to_string())];
    let trajectory = match process.as_str() {
        "ou" => {
            if num_states.is_some() || eta.is_some() {
                return Err(CliError::Config(
                    "`K` and `eta` apply only to the cyclic chain".into(),
                ));
            }
            echo[0].1 = "ou".into();
            sample_ou(n, seed).map_err(config_err)?
        }
        "cycle" | "noisy_cycle" => {
            let k = required(num_states, "K")?;
            let eta = required(eta, "eta")?;
            echo[0].1 = "cycle".into();
            echo.push(("K", k.to_string()));
            echo.push(("eta", fmt_float(eta)));
            sample_noisy_cycle(n, k, eta, seed).map_err(config_err)?
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown process `{other}` (expected ou or cycle)"
            )))
        }
    };
    let text = format!("{}{}", csv_config_header("simulate", &echo), trajectory.to_csv_string());
    write_output(output.as_deref(), &text)
}

// ---------------------------------------------------------------------------
// bound

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// Input trajectory CSV.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Kernel: `gaussian` (needs --length-scale) or `linear`.
    #[arg(long)]
    kernel: Option<String>,
    /// Gaussian kernel length scale.
    #[arg(long)]
    length_scale: Option<f64>,
    /// Gram transform: `base`, `squared`, or `lag_product`.
    #[arg(long)]
    gram: Option<String>,
    /// Bound: `population`, `biased`, `unbiased`, `basic`, or `bernstein`.
    #[arg(long)]
    bound: Option<String>,
    /// Variance proxy value, required by `--bound population`.
    #[arg(long)]
    v_tau: Option<f64>,
    /// Target failure probability δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Mixing spec: `exponential:RATE`, `algebraic:EXPONENT`, `table:FILE`,
    /// or `none`.
    #[arg(long)]
    mixing: Option<String>,
    /// Block length τ; without this and without --tau-sweep, the smallest
    /// feasible τ is used.
    #[arg(long)]
    tau: Option<usize>,
    /// Comma-separated block lengths to sweep (infeasible entries are
    /// reported, not errors).
    #[arg(long)]
    tau_sweep: Option<String>,
    /// Make the automatic τ search also require the stricter lagged level
    /// δ − 2(m−1)β(τ−1) to stay positive (excludes τ = 1).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    require_lagged: Option<bool>,
    /// Output file (stdout when omitted).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

/// Bound selector shared by `bound` and `coverage`. `population` carries no
/// proxy value here; the caller supplies it.
fn parse_bound_name(name: &str) -> Result<&'static str, CliError> {
    match name {
        "population" => Ok("population"),
        "biased" => Ok("biased"),
        "unbiased" => Ok("unbiased"),
        "basic" => Ok("basic"),
        "bernstein" => Ok("bernstein"),
        other => Err(CliError::Config(format!(
            "unknown bound `{other}` (expected population, biased, unbiased, basic, bernstein)"
        ))),
    }
}

fn method_for(bound: &str, v_tau: Option<f64>) -> Result<CovarianceMethod, CliError> {
    match bound {
        "population" => {
            let v = required(v_tau, "v-tau")?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(CliError::Config(format!(
                    "`v-tau` must be a finite nonnegative proxy value, got {v}"
                )));
            }
            Ok(CovarianceMethod::Population { v_tau: v })
        }
        other => {
            if v_tau.is_some() {
                return Err(CliError::Config(
                    "`v-tau` applies only to the population bound".into(),
                ));
            }
            Ok(match other {
                "biased" => CovarianceMethod::Biased,
                "unbiased" => CovarianceMethod::Unbiased,
                "basic" => CovarianceMethod::Basic,
                _ => CovarianceMethod::Bernstein,
            })
        }
    }
}

fn resolve_kernel(
    kernel: Option<String>,
    length_scale: Option<f64>,
    echo: &mut ConfigEcho,
) -> Result<Kernel, CliError> {
    let name = kernel.unwrap_or_else(|| "gaussian".into());
    match name.as_str() {
        "gaussian" => {
            let l = required(length_scale, "length-scale")?;
            let k = Kernel::gaussian(l).map_err(config_err)?;
            echo.push(("kernel", "gaussian".into()));
            echo.push(("length-scale", fmt_float(l)));
            Ok(k)
        }
        "linear" => {
            if length_scale.is_some() {
                return Err(CliError::Config(
                    "`length-scale` applies only to the gaussian kernel".into(),
                ));
            }
            echo.push(("kernel", "linear".into()));
            Ok(Kernel::linear())
        }
        other => Err(CliError::Config(format!(
            "unknown kernel `{other}` (expected gaussian or linear)"
        ))),
    }
}

pub fn run_bound(args: BoundArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.check_known(&[
        "input", "kernel", "length-scale", "gram", "bound", "v-tau", "delta", "mixing", "tau",
        "tau-sweep", "require-lagged", "output",
    ])?;
    let input: PathBuf = required(resolve(args.input, cfg, "input")?, "input")?;
    let mut echo: ConfigEcho = vec![("input", input.display().to_string())];
    let kernel = resolve_kernel(
        resolve(args.kernel, cfg, "kernel")?,
        resolve(args.length_scale, cfg, "length-scale")?,
        &mut echo,
    )?;
    let gram_name =
        resolve(args.gram, cfg, "gram")?.unwrap_or_else(|| "squared".into());
    let kind = GramKind::parse(&gram_name).map_err(config_err)?;
    echo.push(("gram", gram_name.clone()));
    let bound_name: String = required(resolve(args.bound, cfg, "bound")?, "bound")?;
    let bound = parse_bound_name(&bound_name)?;
    let method = method_for(bound, resolve(args.v_tau, cfg, "v-tau")?)?;
    echo.push(("bound", bound.into()));
    if let CovarianceMethod::Population { v_tau } = method {
        echo.push(("v-tau", fmt_float(v_tau)));
    }
    let delta: f64 = required(resolve(args.delta, cfg, "delta")?, "delta")?;
    echo.push(("delta", fmt_float(delta)));
    let mixing_spec: String = required(resolve(args.mixing, cfg, "mixing")?, "mixing")?;
    let mixing = MixingModel::parse_spec(&mixing_spec).map_err(config_err)?;
    echo.push(("mixing", mixing_spec.clone()));

    // `tau` and `tau-sweep` are mutually exclusive; a flag for either one
    // overrides both config keys.
    let (tau, sweep) = match (args.tau, args.tau_sweep) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("--tau and --tau-sweep are mutually exclusive".into()))
        }
        (Some(t), None) => (Some(t), None),
        (None, Some(s)) => (None, Some(s)),
        (None, None) => {
            let t = cfg.get::<usize>("tau")?;
            let s = cfg.get::<String>("tau-sweep")?;
            if t.is_some() && s.is_some() {
                return Err(CliError::Config(
                    "config sets both `tau` and `tau-sweep`; keep one".into(),
                ));
            }
            (t, s)
        }
    };
    let sweep: Option<Vec<usize>> =
        sweep.map(|s| parse_list::<usize>(&s, "tau-sweep")).transpose()?;
    if let Some(taus) = &sweep {
        if taus.contains(&0) {
            return Err(CliError::Config("block lengths must be ≥ 1".into()));
        }
    }
    let require_lagged: bool =
        resolve(args.require_lagged, cfg, "require-lagged")?.unwrap_or(false);
    if require_lagged && (tau.is_some() || sweep.is_some()) {
        return Err(CliError::Config(
            "`require-lagged` applies only to the automatic τ search; drop `tau`/`tau-sweep`"
                .into(),
        ));
    }

    // Configuration accepted; everything below is a runtime/data concern.
    let trajectory = Trajectory::read_csv(&input).map_err(runtime_err)?;
    let points = trajectory.to_points().map_err(runtime_err)?;
    let gram = LazyGram::new(kernel, kind, &points).map_err(runtime_err)?;
    let c = gram.c_bound();

    let taus: Vec<usize> = match (tau, sweep) {
        (Some(t), _) => vec![t],
        (None, Some(list)) => list,
        (None, None) => {
            // The covariance bounds themselves need only δ(τ) > 0; the
            // stricter lagged level is opt-in for callers that will reuse
            // the schedule with lagged pairs.
            let search = mixing
                .min_feasible_tau(delta, gram.len(), require_lagged)
                .map_err(runtime_err)?;
            match search {
                TauSearch::Feasible { tau, .. } => vec![tau],
                TauSearch::Infeasible { .. } => {
                    return Err(CliError::Runtime(format!(
                        "no feasible block length for n = {} at δ = {delta} under `{mixing_spec}`",
                        gram.len()
                    )))
                }
            }
        }
    };
    if taus.len() == 1 {
        if require_lagged {
            echo.push(("require-lagged", "true".into()));
        }
        echo.push(("tau", taus[0].to_string()));
    } else {
        let joined = taus.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
        echo.push(("tau-sweep", joined));
    }

    let mut records = Vec::with_capacity(taus.len());
    for &t in &taus {
        let options = CovarianceOptions { delta, mixing: mixing.clone(), tau: Some(t) };
        records.push(covariance_bound(&gram, c, method, &options).map_err(runtime_err)?);
    }

    let mut out = String::from("{");
    out.push_str(&json_config_fields("bound", &echo));
    write!(
        out,
        ",\"n\":{},\"gram_len\":{},\"c\":{},\"records\":[",
        points.len(),
        gram.len(),
        json_number(c)
    )
    .expect("string write");
    for (i, analysis) in records.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_analysis_json(&mut out, analysis);
    }
    out.push_str("]}\n");
    write_output(resolve(args.output, cfg, "output")?.as_deref(), &out)
}

fn push_analysis_json(out: &mut String, a: &CovarianceAnalysis) {
    write!(
        out,
        "{{\"tau\":{},\"m\":{},\"n_effective\":{},\"n_dropped\":{},",
        a.tau, a.m, a.n_effective, a.n_dropped
    )
    .expect("string write");
    match &a.proxy {
        Some(p) => {
            out.push_str("\"proxy_kind\":");
            push_json_string(
                out,
                match p.kind {
                    ProxyKind::Biased => "biased",
                    ProxyKind::Unbiased => "unbiased",
                },
            );
            write!(out, ",\"proxy\":{},", json_number(p.value)).expect("string write");
        }
        None => out.push_str("\"proxy_kind\":null,\"proxy\":null,"),
    }
    out.push_str("\"report\":");
    out.push_str(&a.report.to_json());
    out.push('}');
}

// ---------------------------------------------------------------------------
// coverage

#[derive(Args, Debug)]
pub struct CoverageArgs {
    /// Number of independent replications (≥ 10).
    #[arg(long)]
    replications: Option<usize>,
    /// Trajectory length per replication.
    #[arg(long)]
    n: Option<usize>,
    /// Gaussian kernel length scale.
    #[arg(long)]
    length_scale: Option<f64>,
    /// Target failure probability δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Block length τ (smallest feasible when omitted).
    #[arg(long)]
    tau: Option<usize>,
    /// Bound under test: `population`, `biased`, `unbiased`, `basic`, or
    /// `bernstein`.
    #[arg(long)]
    bound: Option<String>,
    /// Base seed; replication r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    /// Fresh trajectories per replication for the true-error estimate.
    #[arg(long)]
    error_batches: Option<usize>,
    /// Length of each fresh trajectory (defaults to n).
    #[arg(long)]
    error_batch_len: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

pub fn run_coverage(args: CoverageArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.check_known(&[
        "replications", "n", "length-scale", "delta", "tau", "bound", "seed", "error-batches",
        "error-batch-len", "output",
    ])?;
    let replications: usize =
        required(resolve(args.replications, cfg, "replications")?, "replications")?;
    if replications < 10 {
        return Err(CliError::Config(format!(
            "coverage needs ≥ 10 replications for a meaningful rate, got {replications}"
        )));
    }
    let n: usize = required(resolve(args.n, cfg, "n")?, "n")?;
    let length_scale: f64 =
        required(resolve(args.length_scale, cfg, "length-scale")?, "length-scale")?;
    let delta: f64 = required(resolve(args.delta, cfg, "delta")?, "delta")?;
    let bound_name =
        resolve(args.bound, cfg, "bound")?.unwrap_or_else(|| "biased".into());
    let bound = parse_bound_name(&bound_name)?;
    let seed: u64 = resolve(args.seed, cfg, "seed")?.unwrap_or(0);
    let error_batches: usize = resolve(args.error_batches, cfg, "error-batches")?.unwrap_or(6);
    let error_batch_len: usize =
        resolve(args.error_batch_len, cfg, "error-batch-len")?.unwrap_or(n);

    // The harness is pinned to the OU process, so the mixing model is the
    // known exponential decay; resolve τ once up front (it depends only on
    // n and δ) and echo the resolved value.
    let mixing = ou_mixing_model();
    let tau = match resolve(args.tau, cfg, "tau")? {
        Some(t) if t > 0 => t,
        Some(_) => return Err(CliError::Config("block length must be ≥ 1".into())),
        None => match mixing.min_feasible_tau(delta, n, false).map_err(config_err)? {
            TauSearch::Feasible { tau, .. } => tau,
            TauSearch::Infeasible { .. } => {
                return Err(CliError::Config(format!(
                    "no feasible block length for n = {n} at δ = {delta} under OU mixing"
                )))
            }
        },
    };
    let method = match bound {
        "population" => {
            // The closed-form OU proxy plays the role of --v-tau.
            let v = ou_population_proxy(length_scale, tau).map_err(config_err)?;
            CovarianceMethod::Population { v_tau: v }
        }
        _ => method_for(bound, None)?,
    };

    let mixing_echo = match mixing {
        MixingModel::Exponential { rate } => format!("exponential:{}", fmt_float(rate)),
        _ => unreachable!("the OU mixing model is exponential"),
    };
    let echo: ConfigEcho = vec![
        ("replications", replications.to_string()),
        ("n", n.to_string()),
        ("length-scale", fmt_float(length_scale)),
        ("delta", fmt_float(delta)),
        ("tau", tau.to_string()),
        ("bound", bound.into()),
        ("seed", seed.to_string()),
        ("error-batches", error_batches.to_string()),
        ("error-batch-len", error_batch_len.to_string()),
        ("mixing", mixing_echo),
    ];

    let outcome = ou_coverage(&CoverageOptions {
        replications,
        n,
        length_scale,
        delta,
        tau: Some(tau),
        method,
        seed,
        error_batches,
        error_batch_len,
    })
    .map_err(runtime_err)?;

    let failure_rate = (outcome.total - outcome.covered) as f64 / outcome.total as f64;
    let coverage_rate = outcome.covered as f64 / outcome.total as f64;
    let mut out = String::from("{");
    out.push_str(&json_config_fields("coverage", &echo));
    write!(
        out,
        ",\"covered\":{},\"total\":{},\"infeasible\":{},\"coverage_rate\":{},\"failure_rate\":{},\"wilson_low\":{},\"wilson_high\":{},\"records\":[",
        outcome.covered,
        outcome.total,
        outcome.infeasible,
        json_number(coverage_rate),
        json_number(failure_rate),
        json_number(outcome.wilson_low),
        json_number(outcome.wilson_high)
    )
    .expect("string write");
    for (i, r) in outcome.records.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(
            out,
            "{{\"seed\":{},\"bound\":{},\"error\":{},\"error_se\":{},\"feasible\":{},\"covered\":{}}}",
            r.seed,
            json_number(r.bound),
            json_number(r.error),
            json_number(r.error_se),
            r.feasible,
            r.covered
        )
        .expect("string write");
    }
    out.push_str("]}\n");
    write_output(resolve(args.output, cfg, "output")?.as_deref(), &out)
}

// ---------------------------------------------------------------------------
// model-select

#[derive(Args, Debug)]
pub struct ModelSelectArgs {
    /// Input trajectory CSV (scalar).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Comma-separated kernel length scales.
    #[arg(long)]
    length_scales: Option<String>,
    /// Comma-separated regularization weights γ.
    #[arg(long)]
    gammas: Option<String>,
    /// Reduced rank r shared by every config.
    #[arg(long)]
    rank: Option<usize>,
    /// Target failure probability δ.
    #[arg(long)]
    delta: Option<f64>,
    /// Block length τ on the training prefix.
    #[arg(long)]
    tau: Option<usize>,
    /// Mixing spec (see `bound`).
    #[arg(long)]
    mixing: Option<String>,
    /// Fraction of the series kept as the contiguous training prefix.
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Number of Gaussian feature centers.
    #[arg(long)]
    num_centers: Option<usize>,
    /// Leftmost feature center.
    #[arg(long, allow_negative_numbers = true)]
    center_lo: Option<f64>,
    /// Rightmost feature center.
    #[arg(long, allow_negative_numbers = true)]
    center_hi: Option<f64>,
    /// Ranked-table output file (stdout when omitted; the winning config is
    /// then printed to stderr instead of stdout).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

pub fn run_model_select(args: ModelSelectArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.check_known(&[
        "input", "length-scales", "gammas", "rank", "delta", "tau", "mixing", "train-fraction",
        "num-centers", "center-lo", "center-hi", "output",
    ])?;
    let input: PathBuf = required(resolve(args.input, cfg, "input")?, "input")?;
    let scales_text: String =
        required(resolve(args.length_scales, cfg, "length-scales")?, "length-scales")?;
    let length_scales = parse_list::<f64>(&scales_text, "length-scales")?;
    let gammas_text: String = required(resolve(args.gammas, cfg, "gammas")?, "gammas")?;
    let gammas = parse_list::<f64>(&gammas_text, "gammas")?;
    let rank: usize = required(resolve(args.rank, cfg, "rank")?, "rank")?;
    let delta: f64 = required(resolve(args.delta, cfg, "delta")?, "delta")?;
    let tau: usize = required(resolve(args.tau, cfg, "tau")?, "tau")?;
    let mixing_spec: String = required(resolve(args.mixing, cfg, "mixing")?, "mixing")?;
    let mixing = MixingModel::parse_spec(&mixing_spec).map_err(config_err)?;
    let train_fraction: f64 = resolve(args.train_fraction, cfg, "train-fraction")?.unwrap_or(0.7);
    let num_centers: usize = resolve(args.num_centers, cfg, "num-centers")?.unwrap_or(7);
    let center_lo: f64 = resolve(args.center_lo, cfg, "center-lo")?.unwrap_or(-3.0);
    let center_hi: f64 = resolve(args.center_hi, cfg, "center-hi")?.unwrap_or(3.0);
    let output = resolve(args.output, cfg, "output")?;

    let echo: ConfigEcho = vec![
        ("input", input.display().to_string()),
        ("length-scales", fmt_float_list(&length_scales)),
        ("gammas", fmt_float_list(&gammas)),
        ("rank", rank.to_string()),
        ("delta", fmt_float(delta)),
        ("tau", tau.to_string()),
        ("mixing", mixing_spec),
        ("train-fraction", fmt_float(train_fraction)),
        ("num-centers", num_centers.to_string()),
        ("center-lo", fmt_float(center_lo)),
        ("center-hi", fmt_float(center_hi)),
    ];

    // Grid order: length scale major, γ minor; ties in the ranking fall
    // back to this order.
    let grid: Vec<GridConfig> = length_scales
        .iter()
        .flat_map(|&length_scale| {
            gammas.iter().map(move |&gamma| GridConfig { length_scale, gamma, rank })
        })
        .collect();

    let trajectory = Trajectory::read_csv(&input).map_err(runtime_err)?;
    let xs = trajectory
        .as_scalars()
        .ok_or_else(|| CliError::Runtime("model selection needs a scalar trajectory".into()))?;
    let options = SelectOptions {
        delta,
        tau,
        mixing,
        train_fraction,
        num_centers,
        center_lo,
        center_hi,
    };
    let selection = model_select(xs, &grid, &options).map_err(runtime_err)?;

    let mut table = csv_config_header("model-select", &echo);
    writeln!(table, "# n={} n-train={} n-holdout={}", xs.len(), selection.n_train, selection.n_holdout)
        .expect("string write");
    table.push_str("position,grid_index,length_scale,gamma,rank,status,bound,shrinkage,holdout_rmse,note\n");
    for (position, c) in selection.candidates.iter().enumerate() {
        let status = match &c.report {
            Some(r) if r.feasible => "feasible",
            Some(_) => "infeasible",
            None => "error",
        };
        let bound = c.report.as_ref().map_or_else(|| "nan".into(), |r| fmt_float(r.value));
        let shrinkage = c.shrinkage.map_or_else(|| "nan".into(), fmt_float);
        let rmse = c.holdout_rmse.map_or_else(|| "nan".into(), fmt_float);
        let note = c
            .error
            .as_deref()
            .unwrap_or("")
            .replace([',', '\n'], ";");
        writeln!(
            table,
            "{position},{},{},{},{},{status},{bound},{shrinkage},{rmse},{note}",
            c.grid_index,
            fmt_float(c.config.length_scale),
            fmt_float(c.config.gamma),
            c.config.rank
        )
        .expect("string write");
    }

    let best = selection.best().map(|b| {
        format!(
            "best: grid-index={} length-scale={} gamma={} rank={} bound={} holdout-rmse={}",
            b.grid_index,
            fmt_float(b.config.length_scale),
            fmt_float(b.config.gamma),
            b.config.rank,
            b.report.as_ref().map_or_else(|| "nan".into(), |r| fmt_float(r.value)),
            b.holdout_rmse.map_or_else(|| "nan".into(), fmt_float),
        )
    });

    match &output {
        Some(path) => {
            write_output(Some(path), &table)?;
            if let Some(line) = &best {
                println!("{line}");
            }
        }
        None => {
            write_output(None, &table)?;
            if let Some(line) = &best {
                eprintln!("{line}");
            }
        }
    }
    if best.is_none() {
        return Err(CliError::Runtime(
            "no feasible configuration in the grid (see the ranked table for per-config reasons)"
                .into(),
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// true-error

#[derive(Args, Debug)]
pub struct TrueErrorArgs {
    /// Input trajectory CSV (scalar).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Kernel; the analytic reduction exists for `gaussian` only.
    #[arg(long)]
    kernel: Option<String>,
    /// Gaussian kernel length scale.
    #[arg(long)]
    length_scale: Option<f64>,
    /// Fresh Monte-Carlo batches for the cross term (default 100).
    #[arg(long)]
    batches: Option<usize>,
    /// Length of each fresh batch (default 10000).
    #[arg(long)]
    batch_len: Option<usize>,
    /// RNG seed for the fresh batches.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

pub fn run_true_error(args: TrueErrorArgs, cfg: &ConfigMap) -> Result<(), CliError> {
    cfg.check_known(&[
        "input", "kernel", "length-scale", "batches", "batch-len", "seed", "output",
    ])?;
    let input: PathBuf = required(resolve(args.input, cfg, "input")?, "input")?;
    let kernel = resolve(args.kernel, cfg, "kernel")?.unwrap_or_else(|| "gaussian".into());
    if kernel != "gaussian" {
        return Err(CliError::Config(format!(
            "unsupported kernel `{kernel}`: the true-error estimator needs the gaussian closed form"
        )));
    }
    let length_scale: f64 =
        required(resolve(args.length_scale, cfg, "length-scale")?, "length-scale")?;
    let batches: usize = resolve(args.batches, cfg, "batches")?.unwrap_or(100);
    if batches == 0 {
        return Err(CliError::Config("`batches` must be ≥ 1".into()));
    }
    let batch_len: usize = resolve(args.batch_len, cfg, "batch-len")?.unwrap_or(10_000);
    let seed: u64 = resolve(args.seed, cfg, "seed")?.unwrap_or(0);
    let tr_c_sq = gaussian_tr_c_sq(length_scale).map_err(config_err)?;

    let trajectory = Trajectory::read_csv(&input).map_err(runtime_err)?;
    let xs = trajectory
        .as_scalars()
        .ok_or_else(|| CliError::Runtime("the true-error estimator needs a scalar trajectory".into()))?;
    let result = true_cov_error_sq(xs, length_scale, batches, batch_len, seed)
        .map_err(runtime_err)?;

    let echo: ConfigEcho = vec![
        ("input", input.display().to_string()),
        ("kernel", "gaussian".into()),
        ("length-scale", fmt_float(length_scale)),
        ("batches", batches.to_string()),
        ("batch-len", batch_len.to_string()),
        ("seed", seed.to_string()),
    ];
    let mut out = String::from("{");
    out.push_str(&json_config_fields("true-error", &echo));
    write!(
        out,
        ",\"n\":{},\"estimate\":{},\"std_error\":{},\"tr_c_sq\":{}}}",
        xs.len(),
        json_number(result.estimate),
        json_number(result.std_error),
        json_number(tr_c_sq)
    )
    .expect("string write");
    out.push('\n');
    write_output(resolve(args.output, cfg, "output")?.as_deref(), &out)
}
