//! Module invariants as self-contained checks. Each returns a description
//! of the first violation found.

use coopsense::analytic::{moments, node_snrs, perf, pe_scalar, q_function, var1_expanded};
use coopsense::asymptotics::{pe_upper_bound, AsymptoticModel};
use coopsense::channel::{draw_fading, draw_link_statistics, LinkStatistics, MobilityModel};
use coopsense::harness::{
    count_errors, fit_line, mobility_average_pe, run_experiment, Detector, ExperimentKind, ExperimentSpec,
    GainPolicy,
};
use coopsense::phy::{Allocation, Chance, Hypothesis, Perturbation, Scheme};
use coopsense::rng::tag;
use coopsense::scheduler::{
    constant_gain_allocation, dual_descent, fa_margin, optimal_threshold, pareto_sweep, power_constraint_lhs,
    SolverOptions,
};
use coopsense::scheduler::objective::search_margin;
use coopsense::{Moments64, Stream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{reference_mobility, reference_scenario};

pub type Outcome = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_stats(rng: &mut ChaCha8Rng, k: usize) -> LinkStatistics<f64> {
    LinkStatistics::new(
        (0..k).map(|_| 10f64.powf(rng.random_range(-2.0..1.0))).collect(),
        (0..k).map(|_| 10f64.powf(rng.random_range(-2.0..1.0))).collect(),
    )
    .unwrap()
}

// channel-stats

pub fn channel_reproducible() -> Outcome {
    for seed in 0..20 {
        let a = draw_link_statistics(&reference_mobility(), 12, Stream::new(seed)).unwrap();
        let b = draw_link_statistics(&reference_mobility(), 12, Stream::new(seed)).unwrap();
        ensure(a == b, || format!("statistics differ for seed {seed}"))?;
        let fa = draw_fading(&a, Stream::new(seed).at(1));
        let fb = draw_fading(&b, Stream::new(seed).at(1));
        ensure(fa.h_r == fb.h_r && fa.h_s == fb.h_s, || format!("fading differs for seed {seed}"))?;
    }
    Ok(())
}

pub fn channel_rayleigh_fourth_moment() -> Outcome {
    let v = 2.5;
    let stats = LinkStatistics::uniform(1, v, v).unwrap();
    let n = 400_000;
    let (mut m2, mut m4) = (0.0, 0.0);
    for i in 0..n {
        let h = draw_fading(&stats, Stream::new(7).at(i)).h_r[0].norm_sqr();
        m2 += h;
        m4 += h * h;
    }
    let (m2, m4) = (m2 / n as f64, m4 / n as f64);
    // Var|h|⁴ = 24v⁴ − 4v⁴
    let se = (20.0f64).sqrt() * v * v / (n as f64).sqrt();
    ensure((m4 - 2.0 * m2 * m2).abs() <= 4.0 * se, || {
        format!("E|h|^4 = {m4}, 2(E|h|^2)^2 = {}", 2.0 * m2 * m2)
    })
}

pub fn channel_nonnegative_samples() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..300 {
        let lr = 10f64.powf(rng.random_range(-12.0..3.0));
        let ls = 10f64.powf(rng.random_range(-12.0..3.0));
        let cv = 10f64.powf(rng.random_range(-4.0..4.0));
        let model = MobilityModel::new(lr, cv * lr * lr, ls, cv * ls * ls).unwrap();
        let s = draw_link_statistics(&model, 16, Stream::new(i)).unwrap();
        ensure(
            s.report_var.iter().chain(&s.sense_var).all(|x| *x > 0.0 && x.is_finite()),
            || format!("non-positive statistic for {model:?}"),
        )?;
    }
    Ok(())
}

// phy-sim

/// Monte Carlo error rates at `K = 20` against the closed forms.
pub fn phy_clt_convergence() -> Outcome {
    let sc = reference_scenario(20, 1.0);
    let mut worst = 0f64;
    for seed in [21, 22, 23] {
        let stats = draw_link_statistics(&reference_mobility(), 20, Stream::new(seed)).unwrap();
        let alloc = constant_gain_allocation(&sc, &stats).unwrap();
        let a = perf(&moments(&stats, &alloc.gains, sc.p_pu).unwrap(), alloc.threshold);
        let c = count_errors(
            &[Detector::Fused(alloc)],
            &sc,
            &stats,
            100_000,
            Stream::new(seed).at(1),
            &Perturbation::default(),
        )[0];
        let n = c.trials as f64;
        for (hat, p) in [(c.md as f64 / n, a.p_md), (c.fa as f64 / n, a.p_fa)] {
            let se = (hat * (1.0 - hat) / n).sqrt().max(1e-12);
            worst = worst.max((hat - p).abs() / se);
        }
    }
    ensure(worst <= 3.0, || format!("largest deviation {worst:.1} standard errors"))
}

pub fn phy_threshold_monotone_counts() -> Outcome {
    let sc = reference_scenario(10, 1.0);
    let stats = draw_link_statistics(&reference_mobility(), 10, Stream::new(31)).unwrap();
    let gains = constant_gain_allocation(&sc, &stats).unwrap().gains;
    let dets: Vec<Detector<f64>> = (0..40)
        .map(|i| {
            Detector::Fused(Allocation {
                gains: gains.clone(),
                threshold: -1.0 + 0.25 * i as f64,
            })
        })
        .collect();
    let c = count_errors(&dets, &sc, &stats, 3_000, Stream::new(32), &Perturbation::default());
    for w in c.windows(2) {
        ensure(w[1].md >= w[0].md && w[1].fa <= w[0].fa, || format!("{:?} then {:?}", w[0], w[1]))?;
    }
    Ok(())
}

pub fn phy_zero_gain_tail() -> Outcome {
    let k = 5;
    let t0 = 0.2;
    let sc = reference_scenario(k, 1.0);
    let stats = draw_link_statistics(&reference_mobility(), k, Stream::new(41)).unwrap();
    let det = Detector::Fused(Allocation {
        gains: vec![0.0; k],
        threshold: t0,
    });
    let n = 40_000;
    let c = count_errors(&[det], &sc, &stats, n, Stream::new(42), &Perturbation::default())[0];
    let p = q_function(k as f64 * t0);
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let fa = c.fa as f64 / n as f64;
    let present_active = 1.0 - c.md as f64 / n as f64;
    ensure((fa - p).abs() <= 3.0 * se && (present_active - p).abs() <= 3.0 * se, || {
        format!("Pr(present) {fa} and {present_active}, Q(K T0) = {p}")
    })
}

pub fn phy_active_dominates_idle() -> Outcome {
    let sc = reference_scenario(8, 1.0);
    let stats = draw_link_statistics(&reference_mobility(), 8, Stream::new(51)).unwrap();
    let gains = constant_gain_allocation(&sc, &stats).unwrap().gains;
    let (mut c0, mut c1) = (Chance::default(), Chance::default());
    for i in 0..5_000 {
        let s = Stream::new(52).sub(tag::TRIAL, &[i]);
        c0.draw(&sc, &stats, Hypothesis::Idle, &Perturbation::default(), &mut s.rng());
        c1.draw(&sc, &stats, Hypothesis::Active, &Perturbation::default(), &mut s.rng());
        ensure(c1.fused(&gains) >= c0.fused(&gains), || format!("trial {i}: active below idle"))?;
    }
    Ok(())
}

// analytic-core

pub fn analytic_perf_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..100 {
        let stats = random_stats(&mut rng, 6);
        let m = moments(&stats, &[1.0; 6], 1.0).unwrap();
        let mut last = perf(&m, m.mu0 - 8.0 * m.sigma0());
        for i in 1..=400 {
            let t = m.mu0 - 8.0 * m.sigma0() + i as f64 * (m.mu1 - m.mu0 + 16.0 * m.sigma1()) / 400.0;
            let p = perf(&m, t);
            ensure(p.p_md >= last.p_md && p.p_fa <= last.p_fa, || format!("non-monotone at T0 = {t}"))?;
            last = p;
        }
    }
    Ok(())
}

pub fn analytic_variance_forms_agree() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..500 {
        let k = rng.random_range(1..40);
        let stats = random_stats(&mut rng, k);
        let gains: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..5.0)).collect();
        let (r, s) = node_snrs(&stats, &gains, rng.random_range(0.1..100.0)).unwrap();
        let m = coopsense::analytic::moments_from_snrs(&r, &s).unwrap();
        let e = var1_expanded(&r, &s).unwrap();
        ensure((m.var1 - e).abs() <= 8.0 * f64::EPSILON * e, || format!("{} vs {e}", m.var1))?;
    }
    Ok(())
}

pub fn analytic_homogeneity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..300 {
        let k = rng.random_range(1..20);
        let stats = random_stats(&mut rng, k);
        let gains: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..5.0)).collect();
        let c: f64 = rng.random_range(0.05..20.0);
        let p = rng.random_range(0.1..10.0);
        let m = moments(&stats, &gains, p).unwrap();
        let scaled: Vec<f64> = gains.iter().map(|g| g * c * c).collect();
        let n = moments(&stats, &scaled, p).unwrap();
        let noise = 1.0 / (k * k) as f64;
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(noise);
        ensure(close(n.mu0, c * m.mu0) && close(n.mu1, c * m.mu1), || "means not degree one".into())?;
        ensure(
            close(n.var0 - noise, c * c * (m.var0 - noise)) && close(n.var1 - noise, c * c * (m.var1 - noise)),
            || "signal variances not degree two".into(),
        )?;
    }
    Ok(())
}

pub fn analytic_q_decreasing_with_density_slope() -> Outcome {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut last = 1.0;
    for i in 0..=3200 {
        let x = -8.0 + i as f64 * 0.005;
        let q = q_function(x);
        // below x = -5, 1 - Q sits within a few ulps of 1 and can round equal
        let strict = x >= -5.0;
        ensure(q < last || (!strict && q <= last), || format!("Q not decreasing at {x}"))?;
        last = q;
        let h = 1e-5;
        let d = (q_function(x + h) - q_function(x - h)) / (2.0 * h);
        ensure((d + phi(x)).abs() <= 1e-6, || format!("Q'({x}) = {d}, -phi = {}", -phi(x)))?;
    }
    Ok(())
}

// power-scheduler

pub fn scheduler_weak_duality_trace() -> Outcome {
    let opts = SolverOptions {
        record_trace: true,
        ..SolverOptions::default()
    };
    for (k, seed, beta) in [(4, 71, 1.0), (8, 72, 0.3), (12, 73, 3.0)] {
        let stats = draw_link_statistics(&reference_mobility(), k, Stream::new(seed)).unwrap();
        let sol = dual_descent(&stats, &reference_scenario(k, beta), &opts).unwrap();
        let f = sol.state.primal_value;
        let tol = 1e-9 * f.abs().max(1.0);
        for (i, (g, _)) in sol.state.trace.iter().enumerate() {
            ensure(*g >= f - tol, || format!("K={k}: iterate {i} dual {g} below primal {f}"))?;
        }
    }
    Ok(())
}

pub fn scheduler_first_order_residual() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(74);
    for _ in 0..2000 {
        let m = Moments64 {
            mu0: rng.random_range(-5.0..5.0),
            var0: 10f64.powf(rng.random_range(-2.0..2.0)),
            mu1: 0.0,
            var1: 10f64.powf(rng.random_range(-2.0..2.0)),
        };
        let m = Moments64 {
            mu1: m.mu0 + rng.random_range(0.0..10.0),
            ..m
        };
        let beta = 10f64.powf(rng.random_range(-2.0..2.0));
        if let Ok(t) = optimal_threshold(&m, beta) {
            let (s0, s1) = (m.sigma0(), m.sigma1());
            let r = ((t - m.mu0) / s0).powi(2) - ((m.mu1 - t) / s1).powi(2) - 2.0 * (beta * s1 / s0).ln();
            ensure(r.abs() <= 1e-9, || format!("residual {r:e} for {m:?}, beta {beta}"))?;
        }
    }
    Ok(())
}

/// Step index maximizing `margin` and step index minimizing
/// `P_MD + βP_FA` at the optimal threshold, on a ray of allocations.
fn ray_extremes(seed: u64, beta: f64, margin: impl Fn(&Moments64) -> Option<f64>) -> (usize, usize) {
    let k = 10;
    let sc = reference_scenario(k, beta);
    let stats = draw_link_statistics(&reference_mobility(), k, Stream::new(seed)).unwrap();
    let base = constant_gain_allocation(&sc, &stats).unwrap().gains;
    let (mut best_g, mut arg_g) = (f64::NEG_INFINITY, 0);
    let (mut best_pe, mut arg_pe) = (f64::INFINITY, 0);
    for i in 1..=200 {
        let t = (i as f64 / 200.0).powi(2);
        let gains: Vec<f64> = base.iter().map(|a| a * t).collect();
        let m = moments(&stats, &gains, sc.p_pu).unwrap();
        let (Some(g), Ok(t0)) = (margin(&m), optimal_threshold(&m, beta)) else {
            continue;
        };
        let pe = pe_scalar(&perf(&m, t0), beta);
        if g > best_g {
            (best_g, arg_g) = (g, i);
        }
        if pe < best_pe {
            (best_pe, arg_pe) = (pe, i);
        }
    }
    (arg_g, arg_pe)
}

/// On a ray of allocations, the gain maximizing `(T_0* − μ_0)/σ_0` also
/// minimizes `P_MD + βP_FA` at the optimal threshold.
pub fn scheduler_monotone_transform() -> Outcome {
    for (seed, beta) in [(81, 1.0), (82, 0.5), (83, 2.0)] {
        let (g, e) = ray_extremes(seed, beta, |m| fa_margin(m, beta).ok());
        ensure(g == e, || format!("seed {seed}: margin peaks at step {g}, error at {e}"))?;
    }
    Ok(())
}

/// As above for the margin the optimizer maximizes, whose threshold is
/// capped at `μ_1`.
pub fn scheduler_capped_monotone_transform() -> Outcome {
    for (seed, beta) in [(81, 1.0), (82, 0.5), (83, 2.0)] {
        let (g, e) = ray_extremes(seed, beta, |m| {
            Some(search_margin(m.mu1 - m.mu0, m.var0, m.var1, beta))
        });
        ensure(g == e, || format!("seed {seed}: margin peaks at step {g}, error at {e}"))?;
    }
    Ok(())
}

pub fn scheduler_feasible() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(84);
    for i in 0..30 {
        let k = rng.random_range(1..=12);
        let sc = reference_scenario(k, 10f64.powf(rng.random_range(-1.0..1.0)));
        let stats = draw_link_statistics(&reference_mobility(), k, Stream::new(840 + i)).unwrap();
        let sol = dual_descent(&stats, &sc, &SolverOptions::default()).unwrap();
        for (j, a) in sol.allocation.gains.iter().enumerate() {
            let used = power_constraint_lhs(*a, stats.report_var[j], stats.sense_var[j], sc.p_pu);
            let p = sc.power_budget[j];
            ensure(*a >= 0.0 && (p - used) / p >= -1e-9, || format!("case {i}, node {j}: {used} > {p}"))?;
        }
    }
    Ok(())
}

pub fn scheduler_doubling_budget_never_worse() -> Outcome {
    for (k, seed) in [(3, 85), (6, 86), (10, 87)] {
        let stats = draw_link_statistics(&reference_mobility(), k, Stream::new(seed)).unwrap();
        let sc = reference_scenario(k, 1.0);
        let mut doubled = sc.clone();
        doubled.power_budget.iter_mut().for_each(|p| *p *= 2.0);
        let opts = SolverOptions::default();
        let a = dual_descent(&stats, &sc, &opts).unwrap().state.primal_value;
        let b = dual_descent(&stats, &doubled, &opts).unwrap().state.primal_value;
        ensure(b >= a - 1e-9 * a.abs().max(1.0), || format!("K={k}: {b} < {a}"))?;
    }
    Ok(())
}

pub fn scheduler_pareto_nondominated() -> Outcome {
    let betas = [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0];
    for seed in [88, 89] {
        let stats = draw_link_statistics(&reference_mobility(), 8, Stream::new(seed)).unwrap();
        let pts = pareto_sweep(&stats, &reference_scenario(8, 1.0), &betas, &SolverOptions::default()).unwrap();
        for p in &pts {
            for q in &pts {
                ensure(!p.perf.dominates(&q.perf), || {
                    format!("beta {} dominates beta {}", p.beta, q.beta)
                })?;
            }
        }
    }
    Ok(())
}

// asymptotics

pub fn asymptotics_monotone() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(91);
    for _ in 0..500 {
        let m = AsymptoticModel::new(
            10f64.powf(rng.random_range(-2.0..1.0)),
            10f64.powf(rng.random_range(-3.0..1.0)),
            10f64.powf(rng.random_range(-2.0..1.0)),
            10f64.powf(rng.random_range(-3.0..1.0)),
            10f64.powf(rng.random_range(-1.0..1.0)),
        )
        .unwrap();
        let k = rng.random_range(1..100);
        let b = pe_upper_bound(k, &m);
        let with = |f: &dyn Fn(&mut AsymptoticModel<f64>)| {
            let mut n = m;
            f(&mut n);
            pe_upper_bound(k, &n)
        };
        ensure(pe_upper_bound(k + 1, &m) < b, || "not decreasing in K".into())?;
        ensure(with(&|n| n.rho_s *= 1.1) < b, || "not decreasing in rho_s".into())?;
        ensure(with(&|n| n.sigma_s2 *= 1.1) > b, || "not increasing in Sigma_s".into())?;
        ensure(with(&|n| n.sigma_r2 *= 1.1) > b, || "not increasing in Sigma_r/rho_r^2".into())?;
    }
    Ok(())
}

pub fn asymptotics_log_linear() -> Outcome {
    let m = AsymptoticModel::new(0.3, 0.05, 0.7, 0.4, 1.0).unwrap();
    let k: Vec<f64> = (1..=80).map(|k| k as f64).collect();
    let y: Vec<f64> = (1..=80).map(|k| pe_upper_bound::<f64>(k, &m).ln()).collect();
    let fit = fit_line(&k, &y);
    let worst = k
        .iter()
        .zip(&y)
        .map(|(k, y)| (y - fit.intercept - fit.slope * k).abs())
        .fold(0.0, f64::max);
    ensure(worst <= 1e-12, || format!("affine residual {worst:e}"))
}

pub fn asymptotics_bound_dominates_average() -> Outcome {
    let mob = reference_mobility();
    for k in [20, 40, 60] {
        let sc = reference_scenario(k, 1.0);
        let avg = mobility_average_pe(
            &mob,
            &sc,
            1000,
            Stream::new(92),
            GainPolicy::Constant,
            &SolverOptions::default(),
        )
        .unwrap();
        let bound = pe_upper_bound(k, &AsymptoticModel::from_mobility(&mob, 1.0, sc.p_pu, 1.0).unwrap());
        ensure(avg <= bound, || format!("K={k}: average {avg} above bound {bound}"))?;
    }
    Ok(())
}

pub fn asymptotics_low_snr_slopes() -> Outcome {
    for (kind, grid) in [
        (ExperimentKind::ReportLinkEffect, vec![0.1, 0.07, 0.05, 0.035, 0.025]),
        (ExperimentKind::SenseLinkEffect, vec![0.1, 0.07, 0.05, 0.035]),
    ] {
        let mut spec = ExperimentSpec::new(kind, reference_scenario(10, 1.0), reference_mobility(), grid);
        spec.static_periods = 30;
        spec.seed = 93;
        let t = run_experiment(&spec).unwrap();
        let x: Vec<f64> = t.rows.iter().map(|r| t.get(r, "regressor").ln()).collect();
        let y: Vec<f64> = t.rows.iter().map(|r| t.get(r, "required_nodes").ln()).collect();
        let fit = fit_line(&x, &y);
        ensure((fit.slope - 1.0).abs() <= 0.1, || format!("{}: slope {}", kind.name(), fit.slope))?;
    }
    Ok(())
}

// mc-harness

/// Coverage of the 95% interval around a probability known in closed form.
pub fn harness_interval_calibration() -> Outcome {
    let k = 4;
    let t0 = 0.3;
    let sc = reference_scenario(k, 1.0);
    let stats = draw_link_statistics(&reference_mobility(), k, Stream::new(101)).unwrap();
    let alloc = Allocation {
        gains: vec![0.0; k],
        threshold: t0,
    };
    let p = q_function(k as f64 * t0);
    let reps = 200;
    let mut covered = 0;
    for r in 0..reps {
        let e = coopsense::harness::estimate(Scheme::Proposed, &sc, &stats, &alloc, 1_000, Stream::new(1000 + r))
            .unwrap();
        covered += ((e.p_fa_hat - p).abs() <= e.ci_fa()) as usize;
    }
    let rate = covered as f64 / reps as f64;
    ensure(rate >= 0.92, || format!("coverage {rate}"))
}

/// `proposed ≤ constant gain ≤ {local, majority, OR}` at `β = 1`, reversals
/// of three standard errors or more counted as violations.
pub fn harness_baseline_ordering() -> Outcome {
    let mut spec = ExperimentSpec::new(ExperimentKind::Tradeoff, reference_scenario(20, 1.0), reference_mobility(), vec![1.0]);
    spec.trials = 100_000;
    spec.static_periods = 10;
    spec.seed = 102;
    let t = run_experiment(&spec).unwrap();
    let get = |s: &str| {
        let r = t.filter("scheme", s)[0];
        (t.get(r, "pe"), t.get(r, "se_pe"))
    };
    let mut bad = Vec::new();
    for (a, b) in [
        ("proposed", "constant_gain"),
        ("constant_gain", "local"),
        ("constant_gain", "polled_majority"),
        ("constant_gain", "or_rule"),
    ] {
        let ((pa, sa), (pb, sb)) = (get(a), get(b));
        if pa - pb > 3.0 * (sa * sa + sb * sb).sqrt() {
            bad.push(format!("{a} {pa:.4} > {b} {pb:.4}"));
        }
    }
    ensure(bad.is_empty(), || bad.join("; "))
}

pub fn harness_order_independent() -> Outcome {
    let sc = reference_scenario(6, 1.0);
    let stats = draw_link_statistics(&reference_mobility(), 6, Stream::new(111)).unwrap();
    let alloc = constant_gain_allocation(&sc, &stats).unwrap();
    let stream = Stream::new(112);
    let n = 2_000u64;
    let want = count_errors(
        &[Detector::Fused(alloc.clone())],
        &sc,
        &stats,
        n,
        stream,
        &Perturbation::default(),
    )[0];
    let mut order: Vec<(u64, u64)> = (0..2).flat_map(|h| (0..n).map(move |i| (h, i))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(113);
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    let (mut md, mut fa) = (0, 0);
    let mut c = Chance::default();
    for (h, i) in order {
        let theta = if h == 0 { Hypothesis::Idle } else { Hypothesis::Active };
        c.draw(&sc, &stats, theta, &Perturbation::default(), &mut stream.sub(tag::TRIAL, &[h, i]).rng());
        let present = c.fused(&alloc.gains) >= alloc.threshold;
        match theta {
            Hypothesis::Idle => fa += present as u64,
            Hypothesis::Active => md += !present as u64,
        }
    }
    ensure(want.md == md && want.fa == fa, || format!("{want:?} vs shuffled ({md}, {fa})"))
}

pub fn harness_null_perturbation_matches_tradeoff() -> Outcome {
    let mut spec = ExperimentSpec::new(ExperimentKind::Tradeoff, reference_scenario(6, 1.0), reference_mobility(), vec![0.5, 2.0]);
    spec.trials = 4_000;
    spec.static_periods = 4;
    let a = run_experiment(&spec).unwrap();
    spec.kind = ExperimentKind::Uncertainty;
    let b = run_experiment(&spec).unwrap();
    ensure(a.rows == b.rows, || "rows differ".into())
}

pub type Check = (&'static str, fn() -> Outcome);

pub const ALL: &[Check] = &[
    ("channel: reproducible draws", channel_reproducible),
    ("channel: Rayleigh fourth moment", channel_rayleigh_fourth_moment),
    ("channel: non-negative statistics", channel_nonnegative_samples),
    ("phy: closed forms match simulation at K=20", phy_clt_convergence),
    ("phy: error counts monotone in threshold", phy_threshold_monotone_counts),
    ("phy: zero-gain Gaussian tail", phy_zero_gain_tail),
    ("phy: active dominates idle", phy_active_dominates_idle),
    ("analytic: perf monotone in threshold", analytic_perf_monotone),
    ("analytic: variance forms agree", analytic_variance_forms_agree),
    ("analytic: homogeneity in gain", analytic_homogeneity),
    ("analytic: Q decreasing with slope -phi", analytic_q_decreasing_with_density_slope),
    ("scheduler: weak duality along descent", scheduler_weak_duality_trace),
    ("scheduler: first-order residual", scheduler_first_order_residual),
    ("scheduler: margin and error agree on a ray", scheduler_monotone_transform),
    ("scheduler: capped margin and error agree on a ray", scheduler_capped_monotone_transform),
    ("scheduler: feasibility", scheduler_feasible),
    ("scheduler: doubling budgets never worse", scheduler_doubling_budget_never_worse),
    ("scheduler: Pareto non-domination", scheduler_pareto_nondominated),
    ("asymptotics: bound monotonicity", asymptotics_monotone),
    ("asymptotics: log bound affine in K", asymptotics_log_linear),
    ("asymptotics: bound above mobility average", asymptotics_bound_dominates_average),
    ("asymptotics: low-SNR regression slopes", asymptotics_low_snr_slopes),
    ("harness: interval calibration", harness_interval_calibration),
    ("harness: baseline ordering at beta 1", harness_baseline_ordering),
    ("harness: order independence", harness_order_independent),
    ("harness: null perturbation equals tradeoff", harness_null_perturbation_matches_tradeoff),
];
