//! Acceptance suite: ten end-to-end checks of the library's combinatorial,
//! analytic, and statistical guarantees, each at a pinned tolerance. Every
//! test prints a single `criterion NN: PASS` line (visible with
//! `--nocapture`); a failure panics with the offending numbers.

use ebi::blocks::BlockSchedule;
use ebi::bounds::{bound_covariance_basic, bound_dependent_biased, bound_dependent_unbiased};
use ebi::correlations::{
    biased_from_sums, corr_biased, corr_pair_sums, corr_unbiased, cross_term_from_sums,
};
use ebi::covariance::{
    covariance_tau_sweep, ou_coverage, CovarianceMethod, CovarianceOptions, CoverageOptions,
};
use ebi::kernels::{GramKind, GramSource, Kernel, LazyGram, Points};
use ebi::ksum::NeumaierSum;
use ebi::mixing::TauSearch;
use ebi::processes::{gaussian_tr_c_sq, ou_mixing_model, sample_ou, Trajectory};
use ebi::regression::{
    assemble_covariances, empirical_risk, empirical_risk_direct, fit_rrr, model_select,
    FeatureData, GridConfig, SelectOptions,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Gram defined by an arbitrary symmetric function, for exactness checks.
struct FnGram<F: Fn(usize, usize) -> f64> {
    n: usize,
    f: F,
}

impl<F: Fn(usize, usize) -> f64> GramSource for FnGram<F> {
    fn len(&self) -> usize {
        self.n
    }

    fn entry(&self, t: usize, s: usize) -> f64 {
        (self.f)(t, s)
    }
}

fn ou_scalars(n: usize, seed: u64) -> Vec<f64> {
    let Trajectory::Scalar(xs) = sample_ou(n, seed).unwrap() else { unreachable!() };
    xs
}

fn min_feasible(delta: f64, n: usize) -> usize {
    match ou_mixing_model().min_feasible_tau(delta, n, false).unwrap() {
        TauSearch::Feasible { tau, .. } => tau,
        TauSearch::Infeasible { .. } => panic!("no feasible block length for n = {n}"),
    }
}

// ---------------------------------------------------------------------------

#[test]
fn criterion_01_pair_set_combinatorics() {
    for m in 1usize..=5 {
        for tau in 1usize..=5 {
            let n = 2 * m * tau;
            let schedule = BlockSchedule::new(n, tau).unwrap();
            assert_eq!(schedule.m(), m);
            assert_eq!(schedule.n_dropped(), 0);

            let (within_size, cross_size) = schedule.pair_set_sizes();
            assert_eq!(within_size, 2 * m * tau * tau, "within size at m={m} tau={tau}");
            assert_eq!(cross_size, 2 * m * (m - 1) * tau * tau, "cross size at m={m} tau={tau}");
            assert_eq!(schedule.enumerate_within_pairs().len(), within_size);
            assert_eq!(schedule.enumerate_cross_pairs().len(), cross_size);

            // Block-wise pair sums must equal a flat re-summation over the
            // enumerated pairs bit for bit, not merely approximately.
            let gram = FnGram {
                n,
                f: |t, s| 0.7 * ((t as f64) * (s as f64) * 0.37).cos() + 1.0 / (1 + t.abs_diff(s)) as f64,
            };
            let sums = corr_pair_sums(&gram, &schedule).unwrap();
            assert_eq!(sums.within_count, within_size);
            assert_eq!(sums.cross_count, cross_size);

            let mut within = NeumaierSum::new();
            for (t, s) in schedule.enumerate_within_pairs() {
                within.add(gram.entry(t, s));
            }
            let mut cross = NeumaierSum::new();
            for (t, s) in schedule.enumerate_cross_pairs() {
                cross.add(gram.entry(t, s));
            }
            assert_eq!(within.value().to_bits(), sums.within.to_bits(), "m={m} tau={tau}");
            assert_eq!(cross.value().to_bits(), sums.cross.to_bits(), "m={m} tau={tau}");
        }
    }
    println!("criterion 01: PASS — pair-set sizes and sums exact for all (m, τ) in 1..=5 × 1..=5");
}

#[test]
fn criterion_02_extreme_gram_cases() {
    let n = 48;
    let tol = 1e-12;
    for tau in [2usize, 3, 4] {
        let schedule = BlockSchedule::new(n, tau).unwrap();

        // Same-block membership map for the aligned block-diagonal Gram.
        let mut block_id = vec![0usize; n];
        for (k, range) in schedule.first_blocks().iter().enumerate() {
            for t in range.clone() {
                block_id[t] = 2 * k;
            }
        }
        for (k, range) in schedule.second_blocks().iter().enumerate() {
            for t in range.clone() {
                block_id[t] = 2 * k + 1;
            }
        }

        let identity = FnGram { n, f: |t, s| if t == s { 1.0 } else { 0.0 } };
        let block_ids = &block_id;
        let aligned =
            FnGram { n, f: move |t, s| if block_ids[t] == block_ids[s] { 1.0 } else { 0.0 } };
        let ones = FnGram { n, f: |_, _| 1.0 };

        let inv_tau = 1.0 / tau as f64;
        for (name, gram, expect_biased, expect_unbiased) in [
            ("identity", &identity as &dyn GramSource, inv_tau, inv_tau),
            ("aligned block-diagonal", &aligned, 1.0, 1.0),
            ("all-ones", &ones, 1.0, 0.0),
        ] {
            let biased = corr_biased(gram, &schedule).unwrap();
            let unbiased = corr_unbiased(gram, &schedule).unwrap();
            assert!(
                (biased - expect_biased).abs() <= tol,
                "{name} biased proxy at τ={tau}: {biased} vs {expect_biased}"
            );
            assert!(
                (unbiased - expect_unbiased).abs() <= tol,
                "{name} unbiased proxy at τ={tau}: {unbiased} vs {expect_unbiased}"
            );
        }
    }
    println!("criterion 02: PASS — identity/aligned/all-ones proxies exact to 1e-12 (n=48, τ∈{{2,3,4}})");
}

#[test]
fn criterion_03_trace_closed_form_vs_quadrature() {
    // tr(C²) = E[k(X,Y)²] for X, Y independent standard normals; check the
    // closed form against 2-D Simpson quadrature on [−8, 8]² (h = 0.004,
    // composite error ≪ 1e-6 even at l = 0.2; the truncated tails are
    // below 1e-14).
    let intervals = 4000usize;
    let h = 16.0 / intervals as f64;
    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    let weighted_pdf: Vec<f64> = (0..=intervals)
        .map(|i| {
            let w = if i == 0 || i == intervals {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let x = -8.0 + i as f64 * h;
            w * (-0.5 * x * x).exp() / sqrt_2pi
        })
        .collect();

    for l in [0.2f64, 1.0, 2.0, 10.0] {
        // The grid is uniform, so k(x_i, x_j)² depends only on |i − j|.
        let ksq: Vec<f64> = (0..=intervals)
            .map(|d| {
                let diff = d as f64 * h;
                (-diff * diff / (l * l)).exp()
            })
            .collect();
        let mut acc = 0.0;
        for i in 0..=intervals {
            let ui = weighted_pdf[i];
            let mut row = 0.0;
            for (j, uj) in weighted_pdf.iter().enumerate() {
                row += uj * ksq[i.abs_diff(j)];
            }
            acc += ui * row;
        }
        let quadrature = acc * (h / 3.0) * (h / 3.0);
        let closed = gaussian_tr_c_sq(l).unwrap();
        assert!(
            (closed - quadrature).abs() < 1e-6,
            "l={l}: closed form {closed} vs quadrature {quadrature}"
        );
    }
    println!("criterion 03: PASS — tr(C²) closed form matches 2-D quadrature to 1e-6 for l∈{{0.2,1,2,10}}");
}

#[test]
fn criterion_04_coverage_at_scale() {
    // 500 independent trajectories; the biased-proxy deviation bound at
    // δ = 0.05 must exceed the estimated true Hilbert–Schmidt error in at
    // least 95% of them (in practice: all of them — it is conservative).
    let outcome = ou_coverage(&CoverageOptions {
        replications: 500,
        n: 1024,
        length_scale: 1.0,
        delta: 0.05,
        tau: None, // smallest feasible τ under the OU mixing model
        method: CovarianceMethod::Biased,
        seed: 20_240,
        error_batches: 6,
        error_batch_len: 512,
    })
    .unwrap();
    assert_eq!(outcome.total, 500);
    assert_eq!(outcome.infeasible, 0, "every replication must have a feasible bound");
    assert!(
        outcome.covered >= 475,
        "coverage {}/500 fell below the 95% requirement",
        outcome.covered
    );
    println!(
        "criterion 04: PASS — bound covered the true error in {}/500 runs (need ≥ 475), Wilson 95% CI [{:.4}, {:.4}]",
        outcome.covered, outcome.wilson_low, outcome.wilson_high
    );
}

#[test]
fn criterion_05_rate_comparison_across_n() {
    // Averaged over 30 seeds: both empirical-variance deviation bounds must
    // sit strictly below the square-root-rate block-count bound at every n,
    // and their log-log slope from n = 2000 to n = 20000 must be steeper
    // than −0.5 while the block-count bound stays at −0.5 ± 0.1.
    let delta = 0.05;
    let mixing = ou_mixing_model();
    let kernel = Kernel::gaussian(0.5).unwrap();
    let ns = [2000usize, 5000, 10_000, 20_000];
    let seeds: Vec<u64> = (0..30).collect();

    let mut avg_biased = Vec::new();
    let mut avg_unbiased = Vec::new();
    let mut basics = Vec::new();
    for (ni, &n) in ns.iter().enumerate() {
        let tau = min_feasible(delta, n);
        let schedule = BlockSchedule::new(n, tau).unwrap();
        let basic = bound_covariance_basic(n, tau, delta, &mixing, 1.0).unwrap();
        assert!(basic.feasible);

        let values: Vec<(f64, f64)> = seeds
            .par_iter()
            .map(|&s| {
                let trajectory = sample_ou(n, (ni as u64 + 1) * 10_000 + s).unwrap();
                let points = trajectory.to_points().unwrap();
                let gram = LazyGram::new(kernel, GramKind::Squared, &points).unwrap();
                let c = gram.c_bound();
                let sums = corr_pair_sums(&gram, &schedule).unwrap();
                let v_plus = biased_from_sums(&sums);
                let v_tilde = v_plus - cross_term_from_sums(&sums, schedule.m());
                let biased = bound_dependent_biased(n, tau, delta, &mixing, v_plus, c).unwrap();
                let unbiased =
                    bound_dependent_unbiased(n, tau, delta, &mixing, v_tilde, c).unwrap();
                assert!(biased.feasible && unbiased.feasible, "n={n} τ={tau} seed={s}");
                (biased.value, unbiased.value)
            })
            .collect();
        let k = values.len() as f64;
        let mean_biased = values.iter().map(|v| v.0).sum::<f64>() / k;
        let mean_unbiased = values.iter().map(|v| v.1).sum::<f64>() / k;
        assert!(
            mean_biased < basic.value && mean_unbiased < basic.value,
            "n={n}: biased {mean_biased} / unbiased {mean_unbiased} vs block-count {}",
            basic.value
        );
        avg_biased.push(mean_biased);
        avg_unbiased.push(mean_unbiased);
        basics.push(basic.value);
    }

    let slope = |v: &[f64]| (v[3] / v[0]).ln() / ((ns[3] as f64) / (ns[0] as f64)).ln();
    let slope_biased = slope(&avg_biased);
    let slope_unbiased = slope(&avg_unbiased);
    let slope_basic = slope(&basics);
    assert!(slope_biased < -0.5, "biased-bound slope {slope_biased} is not steeper than −0.5");
    assert!(slope_unbiased < -0.5, "unbiased-bound slope {slope_unbiased} is not steeper than −0.5");
    assert!(
        (slope_basic + 0.5).abs() <= 0.1,
        "block-count bound slope {slope_basic} left the band −0.5 ± 0.1"
    );
    println!(
        "criterion 05: PASS — slopes: biased {slope_biased:.3}, unbiased {slope_unbiased:.3}, block-count {slope_basic:.3}; ordering strict at every n"
    );
}

#[test]
fn criterion_06_unbiased_proxy_is_unbiased() {
    // For i.i.d. standard normals under the linear kernel the population
    // block proxy is exactly 1/τ; the u-statistic estimate must match it
    // in mean to within 3 Monte-Carlo standard errors over 10⁴ runs.
    let reps = 10_000usize;
    let n = 64;
    let tau = 4;
    let target = 1.0 / tau as f64;
    let schedule = BlockSchedule::new(n, tau).unwrap();

    let values: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(60_000 + r);
            let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let points = Points::from_scalars(&xs).unwrap();
            let gram = LazyGram::new(Kernel::linear(), GramKind::Base, &points).unwrap();
            corr_unbiased(&gram, &schedule).unwrap()
        })
        .collect();

    let mean = values.iter().sum::<f64>() / reps as f64;
    let var =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (reps - 1) as f64;
    let se = (var / reps as f64).sqrt();
    assert!(
        (mean - target).abs() <= 3.0 * se,
        "mean {mean} deviates from {target} by more than 3 standard errors ({se})"
    );
    println!(
        "criterion 06: PASS — u-statistic mean {mean:.6} vs 0.25, |Δ| = {:.2} SE (limit 3)",
        (mean - target).abs() / se
    );
}

/// Deterministic random regression instance: n points in d dimensions plus
/// a ridge weight and a target rank.
fn random_instance(i: u64) -> (FeatureData, f64, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(7_000 + i);
    let d = 2 + (i as usize % 7); // ≤ 8
    let n = 10 + (i as usize * 7) % 55; // ≤ 64
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let points = Points::from_rows(&rows).unwrap();
    let data = FeatureData::from_points(&points).unwrap();
    let gamma = 10f64.powf(-3.0 * rand::Rng::random::<f64>(&mut rng));
    let rank = 1 + (i as usize % d);
    (data, gamma, rank)
}

#[test]
fn criterion_07_risk_trace_identity() {
    for i in 0..100u64 {
        let (data, gamma, rank) = random_instance(i);
        let cov = assemble_covariances(&data);
        let model = fit_rrr(&cov, gamma, rank).unwrap();
        let trace_form = empirical_risk(&model, &cov);
        let direct = empirical_risk_direct(&model, &data);
        let scale = trace_form.abs().max(direct.abs());
        assert!(
            (trace_form - direct).abs() <= 1e-10 * scale,
            "instance {i}: trace {trace_form} vs direct {direct}"
        );
    }
    println!("criterion 07: PASS — trace-form risk equals direct-form risk to 1e-10 relative on 100 instances");
}

#[test]
fn criterion_08_reduced_rank_structure() {
    for i in 0..100u64 {
        let (data, gamma, rank) = random_instance(i);
        let cov = assemble_covariances(&data);
        let model = fit_rrr(&cov, gamma, rank).unwrap();
        let g = model.matrix().clone();
        let p = g.nrows();

        // Numerical rank of Ĝ never exceeds the requested rank.
        let g_svd = g.clone().svd(false, false);
        let sigma_max = g_svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let numerical_rank = g_svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-10 * sigma_max.max(1.0))
            .count();
        assert!(numerical_rank <= rank, "instance {i}: rank {numerical_rank} > {rank}");

        // Independent reconstruction: Ĉ_γ^{1/2} Ĝ must equal the truncated
        // SVD of Ĉ_γ^{−1/2} T̂, rebuilt here from scratch.
        let c_gamma = &cov.c + DMatrix::identity(p, p) * gamma;
        let eigen = c_gamma.symmetric_eigen();
        let sqrt_c = &eigen.eigenvectors
            * DMatrix::from_diagonal(&eigen.eigenvalues.map(|v| v.sqrt()))
            * eigen.eigenvectors.transpose();
        let inv_sqrt_c = &eigen.eigenvectors
            * DMatrix::from_diagonal(&eigen.eigenvalues.map(|v| 1.0 / v.sqrt()))
            * eigen.eigenvectors.transpose();
        let whitened = &inv_sqrt_c * &cov.t;
        let svd = whitened.clone().svd(true, true);
        let u = svd.u.as_ref().unwrap();
        let v_t = svd.v_t.as_ref().unwrap();
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| {
            svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap()
        });
        let mut truncated = DMatrix::zeros(whitened.nrows(), whitened.ncols());
        for &idx in order.iter().take(rank.min(order.len())) {
            truncated += svd.singular_values[idx] * u.column(idx) * v_t.row(idx);
        }

        let lifted = &sqrt_c * &g;
        let diff = (&lifted - &truncated).norm();
        let scale = truncated.norm().max(1e-300);
        assert!(
            diff <= 1e-8 * scale,
            "instance {i}: ‖Ĉ_γ^½Ĝ − SVD_r‖ = {diff} vs scale {scale}"
        );
    }
    println!("criterion 08: PASS — rank cap and whitened-SVD factorization verified to 1e-8 relative on 100 instances");
}

#[test]
fn criterion_09_bound_driven_model_selection() {
    // 16-config grid (4 length scales × 4 ridge weights, rank 3) on an OU
    // trajectory of 4096 steps; over seeds 0..=9 the bound-selected config's
    // held-out one-step RMSE must be within 1.5× of the grid-best RMSE in
    // at least 8 of 10 runs.
    let length_scales = [0.3, 0.5, 0.7, 1.0];
    let gammas = [1e-3, 3e-3, 1e-2, 3e-2];
    let grid: Vec<GridConfig> = length_scales
        .iter()
        .flat_map(|&length_scale| {
            gammas.iter().map(move |&gamma| GridConfig { length_scale, gamma, rank: 3 })
        })
        .collect();
    let options = SelectOptions {
        delta: 0.05,
        tau: 20,
        mixing: ou_mixing_model(),
        train_fraction: 0.7,
        num_centers: 7,
        center_lo: -3.0,
        center_hi: 3.0,
    };

    let mut wins = 0;
    let mut ratios = Vec::new();
    for seed in 0..10u64 {
        let xs = ou_scalars(4096, seed);
        let selection = model_select(&xs, &grid, &options).unwrap();
        let oracle = selection
            .candidates
            .iter()
            .filter_map(|c| c.holdout_rmse)
            .fold(f64::INFINITY, f64::min);
        let Some(best) = selection.best() else {
            ratios.push(f64::INFINITY);
            continue;
        };
        let Some(best_rmse) = best.holdout_rmse else {
            ratios.push(f64::INFINITY);
            continue;
        };
        let ratio = best_rmse / oracle;
        ratios.push(ratio);
        if ratio <= 1.5 {
            wins += 1;
        }
    }
    assert!(wins >= 8, "only {wins}/10 seeds selected a config within 1.5× of the best RMSE: {ratios:?}");
    println!(
        "criterion 09: PASS — bound-selected config within 1.5× of grid-best RMSE on {wins}/10 seeds (worst ratio {:.4})",
        ratios.iter().cloned().fold(0.0f64, f64::max)
    );
}

#[test]
fn criterion_10_tau_monotonicity_report() {
    // Observational: sweep τ over a grid on one OU trajectory (n = 10⁴,
    // δ = 0.05) and report how often the bound fails to increase with τ.
    // The trend is expected but not guaranteed, so only completeness and
    // feasibility are asserted.
    let n = 10_000;
    let trajectory = sample_ou(n, 424_242).unwrap();
    let points = trajectory.to_points().unwrap();
    let kernel = Kernel::gaussian(0.5).unwrap();
    let gram = LazyGram::new(kernel, GramKind::Squared, &points).unwrap();
    let taus: Vec<usize> = (16..=40).step_by(2).collect();
    let options =
        CovarianceOptions { delta: 0.05, mixing: ou_mixing_model(), tau: None };
    let sweep =
        covariance_tau_sweep(&gram, gram.c_bound(), CovarianceMethod::Biased, &options, &taus)
            .unwrap();

    assert_eq!(sweep.len(), taus.len(), "the sweep must produce every requested τ");
    for analysis in &sweep {
        assert!(analysis.report.feasible, "τ = {} should be feasible at n = 10⁴", analysis.tau);
        println!("  tau={:2}  bound={:.6}", analysis.tau, analysis.report.value);
    }
    let violations = sweep
        .windows(2)
        .filter(|w| w[1].report.value < w[0].report.value)
        .count();
    println!(
        "criterion 10: PASS — τ-sweep table produced ({} rows); non-monotone steps: {violations}",
        sweep.len()
    );
}
