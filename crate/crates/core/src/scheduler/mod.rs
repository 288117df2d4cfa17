//! Detection threshold and AF power allocation.
//!
//! The allocation maximizes the false-alarm margin `(T_0* − μ_0)/σ_0` under
//! per-node average power budgets. Budgets are dualized with multipliers
//! `Γ ⪰ 0`; the dual function is evaluated by maximizing the Lagrangian over
//! a box with spectral projected gradient, and minimized by projected
//! subgradient steps. A primal estimate recovered from every dual iterate
//! gives the duality gap used as the stopping rule.
//!
//! Internally gains are parametrized by `w_k = √(α_k / cap_k)`, where
//! `cap_k` is the gain that exhausts node `k`'s budget, so the budget
//! constraints become `w_k ≤ 1`.

pub mod objective;
pub mod spg;

use serde::{Deserialize, Serialize};

use crate::analytic::{moments_general, perf, Moments, MeasurementModel, PerfPoint};
use crate::channel::LinkStatistics;
use crate::error::{invalid, Error, Result};
use crate::phy::{Allocation, Scenario};
use crate::scalar::Scalar;

use objective::Problem;
pub use spg::SpgOptions;

/// Larger root of the first-order condition
/// `((T−μ_0)/σ_0)² − ((μ_1−T)/σ_1)² = 2 ln(βσ_1/σ_0)`.
///
/// Evaluated as `μ_0 + σ_0 (Δ² + 2σ_1²L)/(σ_1√R + σ_0Δ)` with `Δ = μ_1 − μ_0`,
/// `L = ln(βσ_1/σ_0)` and discriminant `R = Δ² + 2(σ_1² − σ_0²)L`. This is
/// the usual quadratic-formula root multiplied through by its conjugate; it
/// has no singularity at `σ_0 = σ_1`, where it equals
/// `(μ_0+μ_1)/2 + σ² ln β / Δ`.
pub fn optimal_threshold<F: Scalar>(m: &Moments<F>, beta: F) -> Result<F> {
    m.validate()?;
    if !(beta > F::zero()) {
        return Err(invalid("beta", "must be positive"));
    }
    let (s0, s1) = (m.sigma0(), m.sigma1());
    let delta = m.mu1 - m.mu0;
    let l = (beta * s1 / s0).ln();
    let two = F::lit(2.0);
    let disc = delta * delta + two * (m.var1 - m.var0) * l;
    if disc < F::zero() {
        return Err(Error::NoInteriorStationaryPoint {
            discriminant: disc.as_f64(),
        });
    }
    let num = delta * delta + two * m.var1 * l;
    let den = s1 * disc.sqrt() + s0 * delta;
    if den > F::zero() {
        return Ok(m.mu0 + s0 * num / den);
    }
    // den = 0 only when Δ = 0 and R = 0.
    if m.var1 > m.var0 {
        Ok((m.mu1 * m.var0 - m.mu0 * m.var1) / (m.var0 - m.var1))
    } else {
        Err(Error::NoInteriorStationaryPoint {
            discriminant: disc.as_f64(),
        })
    }
}

/// `(T_0* − μ_0)/σ_0` with `T_0*` from [`optimal_threshold`].
pub fn fa_margin<F: Scalar>(m: &Moments<F>, beta: F) -> Result<F> {
    Ok((optimal_threshold(m, beta)? - m.mu0) / m.sigma0())
}

/// Threshold minimizing `P_MD + β P_FA` among the stationary point and the
/// two degenerate rules "always present" (error `β`) and "always idle"
/// (error 1). The degenerate rules are returned as `∓F::max_value()`.
pub fn best_threshold<F: Scalar>(m: &Moments<F>, beta: F) -> F {
    let always_present = (-F::max_value(), beta);
    let always_idle = (F::max_value(), F::one());
    let mut best = if beta < F::one() {
        always_present
    } else {
        always_idle
    };
    if let Ok(t) = optimal_threshold(m, beta) {
        let p = perf(m, t);
        let pe = p.p_md + beta * p.p_fa;
        if pe <= best.1 {
            best = (t, pe);
        }
    }
    best.0
}

/// Average transmit power `E[|h_r|² |x|⁴ α]` of one node, evaluated under
/// the active hypothesis with single-sample split sensing.
pub fn power_constraint_lhs<F: Scalar>(alpha: F, report_var: F, sense_var: F, p_pu: F) -> F {
    power_moment(alpha, report_var, p_pu * sense_var, 1, MeasurementModel::Split)
}

/// Average transmit power for `T`-sample sensing under `model`.
pub fn power_moment<F: Scalar>(alpha: F, report_var: F, snr_s: F, samples: u32, model: MeasurementModel) -> F {
    alpha * report_var * model.energy_second_moment(snr_s, samples)
}

fn scenario_moments<F: Scalar>(stats: &LinkStatistics<F>, gains: &[F], scenario: &Scenario<F>) -> Result<Moments<F>> {
    let (snr_r, snr_s) = crate::analytic::node_snrs(stats, gains, scenario.p_pu)?;
    moments_general(&snr_r, &snr_s, scenario.samples, scenario.measurement)
}

/// `L(a, Γ) = (T_0* − μ_0)/σ_0 − Σ_k γ_k (E[|h_k^r|²|x_k|⁴α_k] − P_k)`.
pub fn lagrangian<F: Scalar>(
    gains: &[F],
    gamma: &[F],
    stats: &LinkStatistics<F>,
    scenario: &Scenario<F>,
) -> Result<F> {
    scenario.check_stats(stats)?;
    if gamma.len() != stats.count() {
        return Err(Error::LengthMismatch {
            what: "gamma",
            got: gamma.len(),
            expected: stats.count(),
        });
    }
    if gamma.iter().any(|g| !(*g >= F::zero())) {
        return Err(invalid("gamma", "multipliers must be non-negative"));
    }
    let m = scenario_moments(stats, gains, scenario)?;
    let mut value = fa_margin(&m, scenario.beta)?;
    for k in 0..gains.len() {
        let p = power_moment(
            gains[k],
            stats.report_var[k],
            scenario.p_pu * stats.sense_var[k],
            scenario.samples,
            scenario.measurement,
        );
        value -= gamma[k] * (p - scenario.power_budget[k]);
    }
    Ok(value)
}

/// Solver settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverOptions<F> {
    /// Relative duality gap at which descent stops.
    pub tol: F,
    pub max_iter: usize,
    /// The Lagrangian is maximized over `α_k ≤ box_factor · cap_k`.
    pub box_factor: F,
    /// Projected-gradient iterations used to polish each recovered primal.
    pub polish_iter: usize,
    /// Keep `(dual value, best primal value)` of every iterate.
    pub record_trace: bool,
    pub inner: SpgOptions<F>,
}

impl<F: Scalar> Default for SolverOptions<F> {
    fn default() -> Self {
        Self {
            tol: F::lit(1e-3),
            max_iter: 1000,
            box_factor: F::lit(4.0),
            polish_iter: 60,
            record_trace: false,
            inner: SpgOptions::default(),
        }
    }
}

/// Dual iterate summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState<F> {
    /// Multipliers `γ_k` of the power constraints in their original units.
    pub gamma: Vec<F>,
    /// Smallest dual value seen.
    pub dual_value: F,
    /// Best feasible objective found.
    pub primal_value: F,
    pub gap: F,
    pub iterations: usize,
    pub converged: bool,
    /// The optimal threshold of the returned allocation lies below `μ_0`.
    pub below_idle_mean: bool,
    /// `(g(Γ_i), best primal after i)` per iterate when requested.
    pub trace: Vec<(F, F)>,
}

/// Slack level attained by an inner solve.
///
/// `slack` is `G`, the margin at the returned gains. At that point the
/// margin constraint `(T_0* − μ_0)/σ_0 ≥ G` is equivalent to
/// `Ψ = (Δ − σ_0G)² + σ_1²(2L − G²) ≥ 0` together with `Δ − σ_0G ≥ 0`;
/// both residuals are reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerProblem<F> {
    pub slack: F,
    pub constraint_residual: F,
    pub cap_residual: F,
}

impl<F: Scalar> InnerProblem<F> {
    fn at(delta: F, var0: F, var1: F, ln_beta: F, g: F) -> Self {
        let s0 = var0.sqrt();
        let l = ln_beta + F::lit(0.5) * (var1 / var0).ln();
        let e = delta - s0 * g;
        Self {
            slack: g,
            constraint_residual: e * e + var1 * (F::lit(2.0) * l - g * g),
            cap_residual: e,
        }
    }
}

/// Result of maximizing the Lagrangian for fixed multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution<F> {
    pub gains: Vec<F>,
    pub inner: InnerProblem<F>,
    /// `g(Γ)`.
    pub value: F,
}

struct Inner<F> {
    w: Vec<F>,
    value: F,
    margin: F,
}

fn lagrangian_max<F: Scalar>(
    prob: &Problem<F>,
    lambda: &[F],
    starts: &[&[F]],
    ub: &[F],
    opts: &SpgOptions<F>,
) -> Inner<F> {
    let two = F::lit(2.0);
    let obj = |w: &[F]| {
        let e = prob.eval(w);
        let mut v = e.value;
        let mut g = e.grad;
        for k in 0..w.len() {
            v -= lambda[k] * (w[k] * w[k] - F::one());
            g[k] -= two * lambda[k] * w[k];
        }
        (v, g)
    };
    let mut best: Option<Inner<F>> = None;
    for s in starts {
        let r = spg::maximize(obj, s, ub, opts);
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            let margin = prob.value(&r.x);
            best = Some(Inner {
                w: r.x,
                value: r.value,
                margin,
            });
        }
    }
    best.expect("at least one start")
}

fn check_solver_inputs<F: Scalar>(stats: &LinkStatistics<F>, scenario: &Scenario<F>) -> Result<()> {
    scenario.check_stats(stats)?;
    if stats.is_empty() {
        return Err(invalid("K", "at least one node required"));
    }
    Ok(())
}

/// Maximizes `L(a, Γ)` over `0 ≤ α_k ≤ box_factor · cap_k`.
pub fn inner_solve<F: Scalar>(
    gamma: &[F],
    stats: &LinkStatistics<F>,
    scenario: &Scenario<F>,
    opts: &SolverOptions<F>,
) -> Result<InnerSolution<F>> {
    check_solver_inputs(stats, scenario)?;
    if gamma.len() != stats.count() || gamma.iter().any(|g| !(*g >= F::zero())) {
        return Err(invalid("gamma", "one non-negative multiplier per node required"));
    }
    let prob = Problem::new(stats, scenario);
    let n = prob.len();
    let lambda: Vec<F> = gamma.iter().zip(&scenario.power_budget).map(|(&g, &p)| g * p).collect();
    let top = opts.box_factor.sqrt();
    let ub = vec![top; n];
    let ones = vec![F::one(); n];
    let half = vec![F::lit(0.5); n];
    let inner = lagrangian_max(&prob, &lambda, &[&ones, &half, &ub], &ub, &opts.inner);
    if !inner.value.is_finite() {
        return Err(Error::BracketNotFound {
            lo: 0.0,
            hi: top.as_f64(),
        });
    }
    let (d, a, b) = prob.moments(&inner.w);
    Ok(InnerSolution {
        gains: prob.gains(&inner.w),
        inner: InnerProblem::at(d, a, b, prob.ln_beta, inner.margin),
        value: inner.value,
    })
}

/// Optimized allocation with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<F> {
    pub allocation: Allocation<F>,
    pub state: DualState<F>,
    pub moments: Moments<F>,
    pub perf: PerfPoint<F>,
    pub inner: InnerProblem<F>,
}

/// Projected subgradient descent on the dual with primal recovery.
pub fn dual_descent<F: Scalar>(
    stats: &LinkStatistics<F>,
    scenario: &Scenario<F>,
    opts: &SolverOptions<F>,
) -> Result<Solution<F>> {
    check_solver_inputs(stats, scenario)?;
    let prob = Problem::new(stats, scenario);
    let n = prob.len();
    let one = F::one();
    let two = F::lit(2.0);
    let ones = vec![one; n];
    let top = vec![opts.box_factor.sqrt(); n];
    let polish = SpgOptions {
        max_iter: opts.polish_iter,
        ..opts.inner
    };
    let primal = |w: &[F]| {
        let e = prob.eval(w);
        (e.value, e.grad)
    };

    // Primal start: the better of full power and a polished full-power point.
    let mut w_best = ones.clone();
    let mut f_best = prob.value(&ones);
    let r = spg::maximize(primal, &ones, &ones, &opts.inner);
    if r.value > f_best {
        w_best = r.x;
        f_best = r.value;
    }

    // Multipliers from stationarity at the primal start.
    let grad = prob.eval(&w_best).grad;
    let mut lambda: Vec<F> = (0..n)
        .map(|k| {
            if w_best[k] >= one - F::lit(1e-6) {
                (grad[k] / (two * w_best[k])).max(F::zero())
            } else {
                F::zero()
            }
        })
        .collect();

    let mut g_best = F::infinity();
    let mut lambda_best = lambda.clone();
    let mut w_inner = ones.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut scale = one;
    let mut stall = 0usize;

    for it in 0..opts.max_iter {
        iterations = it + 1;
        let inner = lagrangian_max(&prob, &lambda, &[&w_inner, &w_best], &top, &opts.inner);
        w_inner = inner.w;
        if inner.value < g_best {
            g_best = inner.value;
            lambda_best = lambda.clone();
            stall = 0;
        } else {
            stall += 1;
            if stall >= 10 {
                scale = scale * F::lit(0.5);
                stall = 0;
            }
        }

        // Primal recovery: clip to the budgets, then polish.
        let clipped: Vec<F> = w_inner.iter().map(|&w| w.min(one)).collect();
        let r = spg::maximize(primal, &clipped, &ones, &polish);
        if r.value > f_best {
            f_best = r.value;
            w_best = r.x;
        }
        if opts.record_trace {
            trace.push((inner.value, f_best));
        }

        let gap = g_best - f_best;
        if gap <= opts.tol * f_best.abs().max(F::lit(1e-12)) {
            converged = true;
            break;
        }

        let sub: Vec<F> = w_inner.iter().map(|&w| one - w * w).collect();
        let norm2: F = sub.iter().map(|&s| s * s).sum();
        if norm2 <= F::epsilon() {
            continue;
        }
        let polyak = (inner.value - f_best).max(F::zero()) / norm2;
        let diminishing = (g_best - f_best).abs() / (norm2.sqrt() * F::count(it + 1).sqrt());
        let step = scale * polyak.max(diminishing * F::lit(1e-3));
        for k in 0..n {
            lambda[k] = (lambda[k] - step * sub[k]).max(F::zero());
        }
    }

    let gains = prob.gains(&w_best);
    let (d, a, b) = prob.moments(&w_best);
    let m = scenario_moments(stats, &gains, scenario)?;
    let threshold = best_threshold(&m, scenario.beta);
    let gamma = lambda_best
        .iter()
        .zip(&scenario.power_budget)
        .map(|(&l, &p)| l / p)
        .collect();
    Ok(Solution {
        allocation: Allocation { gains, threshold },
        state: DualState {
            gamma,
            dual_value: g_best,
            primal_value: f_best,
            gap: g_best - f_best,
            iterations,
            converged,
            below_idle_mean: f_best < F::zero(),
            trace,
        },
        moments: m,
        perf: perf(&m, threshold),
        inner: InnerProblem::at(d, a, b, prob.ln_beta, f_best),
    })
}

/// Largest common gain every node can afford, with the best threshold.
pub fn constant_gain_allocation<F: Scalar>(scenario: &Scenario<F>, stats: &LinkStatistics<F>) -> Result<Allocation<F>> {
    check_solver_inputs(stats, scenario)?;
    let prob = Problem::new(stats, scenario);
    let alpha = prob.cap.iter().copied().fold(F::infinity(), F::min);
    let gains = vec![alpha; stats.count()];
    let m = scenario_moments(stats, &gains, scenario)?;
    Ok(Allocation {
        threshold: best_threshold(&m, scenario.beta),
        gains,
    })
}

/// One point of a tradeoff curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint<F> {
    pub beta: F,
    pub perf: PerfPoint<F>,
    pub allocation: Allocation<F>,
    pub state: DualState<F>,
}

/// Solves once per weight; output sorted by `β`.
pub fn pareto_sweep<F: Scalar>(
    stats: &LinkStatistics<F>,
    scenario: &Scenario<F>,
    betas: &[F],
    opts: &SolverOptions<F>,
) -> Result<Vec<ParetoPoint<F>>> {
    if betas.is_empty() || betas.iter().any(|b| !(*b > F::zero())) {
        return Err(invalid("beta_list", "must be non-empty and positive"));
    }
    let mut sorted = betas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite betas"));
    sorted
        .into_iter()
        .map(|beta| {
            let sol = dual_descent(stats, &scenario.with_beta(beta), opts)?;
            Ok(ParetoPoint {
                beta,
                perf: sol.perf,
                allocation: sol.allocation,
                state: sol.state,
            })
        })
        .collect()
}
