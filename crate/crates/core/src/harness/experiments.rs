//! Experiment families: tradeoff curves, robustness to mismatched operating
//! conditions, error versus node count, and node count versus link quality.

use serde::{Deserialize, Serialize};

use super::{count_errors, Counts, Detector, McEstimate};
use crate::analytic::{moments_general, perf, pe_scalar, threshold_for_false_alarm, Moments, PerfPoint};
use crate::asymptotics::{nodes_required, pe_upper_bound, AsymptoticModel};
use crate::channel::{draw_link_statistics, LinkStatistics, MobilityModel};
use crate::error::{invalid, Error, Result};
use crate::phy::{local_thresholds, Perturbation, Scenario, Scheme};
use crate::rng::{tag, Stream};
use crate::scalar::Scalar;
use crate::scheduler::{constant_gain_allocation, dual_descent, SolverOptions};
use crate::table::{ResultTable, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Error pairs of every scheme over a grid of weights `β`.
    Tradeoff,
    /// As `Tradeoff`, with `P_pu` and noise variances perturbed per chance.
    Uncertainty,
    /// `P_MD + βP_FA` over a grid of node counts.
    NodeScaling,
    /// Nodes needed for the target over a grid of mean reporting SNRs.
    ReportLinkEffect,
    /// Nodes needed for the target over a grid of mean sensing SNRs.
    SenseLinkEffect,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Tradeoff => "tradeoff",
            Self::Uncertainty => "uncertainty",
            Self::NodeScaling => "node_scaling",
            Self::ReportLinkEffect => "report_link_effect",
            Self::SenseLinkEffect => "sense_link_effect",
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec<F> {
    pub kind: ExperimentKind,
    /// Base scenario. Its first budget entry is used when the node count
    /// changes along the grid.
    pub scenario: Scenario<F>,
    pub mobility: MobilityModel<F>,
    /// `β` values, node counts, or mean SNRs depending on `kind`.
    pub grid: Vec<F>,
    /// Chances per hypothesis per grid point, split across static periods.
    pub trials: u64,
    pub static_periods: usize,
    pub seed: u64,
    pub perturbation: Perturbation<F>,
    /// Error targets of the link-quality experiments.
    pub target: PerfPoint<F>,
    /// Reporting SNR variance held fixed while the mean reporting SNR varies.
    pub report_snr_var: F,
    /// Squared coefficient of variation of the sensing SNR while its mean
    /// varies.
    pub sense_snr_cv2: F,
    pub solver: SolverOptions<F>,
    /// Observation chances per static period.
    pub chances_per_period: u32,
    /// Duration of one observation chance in milliseconds.
    pub chance_ms: F,
}

impl<F: Scalar> ExperimentSpec<F> {
    pub fn new(kind: ExperimentKind, scenario: Scenario<F>, mobility: MobilityModel<F>, grid: Vec<F>) -> Self {
        Self {
            kind,
            scenario,
            mobility,
            grid,
            trials: 100_000,
            static_periods: 50,
            seed: 1,
            perturbation: Perturbation::default(),
            target: PerfPoint {
                p_md: F::lit(0.1),
                p_fa: F::lit(0.1),
            },
            report_snr_var: F::lit(0.1),
            sense_snr_cv2: F::lit(10f64.powf(0.5)),
            solver: SolverOptions::default(),
            chances_per_period: 10,
            chance_ms: F::lit(2.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.mobility.validate()?;
        if self.grid.is_empty() {
            return Err(invalid("grid", "must not be empty"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.static_periods == 0 {
            return Err(invalid("static_periods", "must be at least 1"));
        }
        Ok(())
    }

    fn root(&self) -> Stream {
        Stream::new(self.seed)
    }

    fn period_stream(&self, m: usize) -> Stream {
        self.root().sub(tag::PERIOD, &[m as u64])
    }

    fn trials_per_period(&self) -> u64 {
        self.trials.div_ceil(self.static_periods as u64)
    }

    fn scenario_with_nodes(&self, k: usize) -> Scenario<F> {
        Scenario {
            nodes: k,
            power_budget: vec![self.scenario.power_budget[0]; k],
            ..self.scenario.clone()
        }
    }
}

/// How the AF gains are chosen when averaging over static periods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GainPolicy {
    Constant,
    Optimized,
}

/// Least-squares line with coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    LineFit {
        slope,
        intercept,
        r2: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
    }
}

fn f<F: Scalar>(x: F) -> Value {
    Value::Float(x.as_f64())
}

fn analytic_moments<F: Scalar>(stats: &LinkStatistics<F>, gains: &[F], scenario: &Scenario<F>) -> Result<Moments<F>> {
    let (r, s) = crate::analytic::node_snrs(stats, gains, scenario.p_pu)?;
    moments_general(&r, &s, scenario.samples, scenario.measurement)
}

/// Closed-form `P_MD + βP_FA` averaged over `periods` static periods.
pub fn mobility_average_pe<F: Scalar>(
    mobility: &MobilityModel<F>,
    scenario: &Scenario<F>,
    periods: usize,
    stream: Stream,
    policy: GainPolicy,
    solver: &SolverOptions<F>,
) -> Result<F> {
    let mut acc = F::zero();
    for m in 0..periods {
        let stats = draw_link_statistics(mobility, scenario.nodes, stream.sub(tag::PERIOD, &[m as u64]))?;
        let p = match policy {
            GainPolicy::Constant => {
                let a = constant_gain_allocation(scenario, &stats)?;
                perf(&analytic_moments(&stats, &a.gains, scenario)?, a.threshold)
            }
            GainPolicy::Optimized => dual_descent(&stats, scenario, solver)?.perf,
        };
        acc += pe_scalar(&p, scenario.beta);
    }
    Ok(acc / F::count(periods))
}

/// Smallest `K` whose closed-form mis-detection probability, averaged over
/// `periods` static periods, is at most `target.p_md` when each period's
/// threshold is set for false-alarm probability `target.p_fa`.
///
/// `snr_model` describes SNRs directly: unit AF gain and unit primary power.
/// Node `k` of a period is the same for every `K`, so the search compares
/// nested populations.
pub fn required_nodes<F: Scalar>(
    snr_model: &MobilityModel<F>,
    target: &PerfPoint<F>,
    periods: usize,
    stream: Stream,
    max_nodes: usize,
) -> Result<usize> {
    snr_model.validate()?;
    let v0 = F::lit(3.0);
    let (two, three) = (F::lit(2.0), F::lit(3.0));
    // Prefix sums per period of Σr, Σr(s+1), Σr²·3, Σr²(3s²+2s+3).
    let mut prefix: Vec<Vec<[F; 4]>> = vec![vec![[F::zero(); 4]]; periods];
    let streams: Vec<Stream> = (0..periods).map(|m| stream.sub(tag::PERIOD, &[m as u64])).collect();
    let mut md_at = |k: usize| -> F {
        let mut acc = F::zero();
        for (m, pre) in prefix.iter_mut().enumerate() {
            while pre.len() <= k {
                let i = pre.len() - 1;
                let (r, s) = snr_model.draw_node(streams[m], i);
                let last = pre[i];
                pre.push([
                    last[0] + r,
                    last[1] + r * (s + F::one()),
                    last[2] + r * r * v0,
                    last[3] + r * r * (three * s * s + two * s + three),
                ]);
            }
            let p = pre[k];
            let kk = F::count(k);
            let mm = Moments {
                mu0: p[0] / kk,
                mu1: p[1] / kk,
                var0: (p[2] + F::one()) / (kk * kk),
                var1: (p[3] + F::one()) / (kk * kk),
            };
            let t = threshold_for_false_alarm(&mm, target.p_fa);
            acc += perf(&mm, t).p_md;
        }
        acc / F::count(periods)
    };
    let mut hi = 1usize;
    while md_at(hi) > target.p_md {
        if hi >= max_nodes {
            return Err(Error::TargetUnreachable(format!(
                "mis-detection target not met with {max_nodes} nodes"
            )));
        }
        hi = (hi * 2).min(max_nodes);
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(hi);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if md_at(mid) <= target.p_md {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Runs the experiment and returns one row per grid point and scheme.
pub fn run_experiment<F: Scalar>(spec: &ExperimentSpec<F>) -> Result<ResultTable> {
    spec.validate()?;
    let mut table = match spec.kind {
        ExperimentKind::Tradeoff | ExperimentKind::Uncertainty => tradeoff(spec)?,
        ExperimentKind::NodeScaling => node_scaling(spec)?,
        ExperimentKind::ReportLinkEffect | ExperimentKind::SenseLinkEffect => link_effect(spec)?,
    };
    table.note("experiment", spec.kind.name());
    table.note("seed", spec.seed);
    table.note("static_periods", spec.static_periods);
    table.note("chances_per_period", spec.chances_per_period);
    table.note("chance_ms", spec.chance_ms);
    table.note("link_statistics_family", "gamma");
    table.note("measurement_model", format!("{:?}", spec.scenario.measurement).to_lowercase());
    table.note("scalar", F::NAME);
    Ok(table)
}

fn tradeoff<F: Scalar>(spec: &ExperimentSpec<F>) -> Result<ResultTable> {
    let perturb = if spec.kind == ExperimentKind::Uncertainty {
        spec.perturbation
    } else {
        Perturbation::default()
    };
    let sc = &spec.scenario;
    let nb = spec.grid.len();
    let per = spec.trials_per_period();
    // counts[b][0] proposed, counts[b][1] constant gain; hard[j] baselines.
    let mut fused = vec![[Counts::default(); 2]; nb];
    let hard_schemes = [Scheme::Local, Scheme::PolledMajority, Scheme::OrRule];
    let mut hard = [Counts::default(); 3];
    let mut nonconverged = 0usize;
    let mut below = 0usize;
    for m in 0..spec.static_periods {
        let ps = spec.period_stream(m);
        let stats = draw_link_statistics(&spec.mobility, sc.nodes, ps)?;
        let mut dets = Vec::with_capacity(2 * nb + 3);
        for &beta in &spec.grid {
            let scb = sc.with_beta(beta);
            let sol = dual_descent(&stats, &scb, &spec.solver)?;
            nonconverged += (!sol.state.converged) as usize;
            below += sol.state.below_idle_mean as usize;
            dets.push(Detector::Fused(sol.allocation));
            dets.push(Detector::Fused(constant_gain_allocation(&scb, &stats)?));
        }
        let local = local_thresholds(sc, &stats);
        for s in hard_schemes {
            dets.push(Detector::Hard {
                scheme: s,
                local: local.clone(),
            });
        }
        let c = count_errors(&dets, sc, &stats, per, ps, &perturb);
        for b in 0..nb {
            fused[b][0] += c[2 * b];
            fused[b][1] += c[2 * b + 1];
        }
        for j in 0..3 {
            hard[j] += c[2 * nb + j];
        }
    }
    let mut t = ResultTable::new(&[
        "beta", "scheme", "p_md", "p_fa", "ci", "pe", "se_pe", "trials", "md_errors", "fa_errors",
    ]);
    let seed = spec.root().key();
    for (b, &beta) in spec.grid.iter().enumerate() {
        let rows = [
            (Scheme::Proposed, fused[b][0]),
            (Scheme::ConstantGain, fused[b][1]),
            (Scheme::Local, hard[0]),
            (Scheme::PolledMajority, hard[1]),
            (Scheme::OrRule, hard[2]),
        ];
        for (s, c) in rows {
            let e = McEstimate::<F>::from_counts(c, seed);
            t.push(vec![
                f(beta),
                s.name().into(),
                f(e.p_md_hat),
                f(e.p_fa_hat),
                f(e.ci_halfwidth),
                f(e.pe(beta)),
                f(e.se_pe(beta)),
                e.trials.into(),
                e.md_errors.into(),
                e.fa_errors.into(),
            ]);
        }
    }
    t.note("nodes", sc.nodes);
    t.note("nonconverged_solves", nonconverged);
    t.note("threshold_below_idle_mean", below);
    t.note("p_pu_spread_db", perturb.p_pu_spread_db);
    t.note("noise_spread_db", perturb.noise_spread_db);
    Ok(t)
}

fn node_scaling<F: Scalar>(spec: &ExperimentSpec<F>) -> Result<ResultTable> {
    let per = spec.trials_per_period();
    let beta = spec.scenario.beta;
    let mut t = ResultTable::new(&[
        "nodes",
        "scheme",
        "p_md",
        "p_fa",
        "pe",
        "se_pe",
        "analytic_pe",
        "bound",
        "trials",
    ]);
    // The bound depends on the reporting statistics only through Σ_r/ρ_r²,
    // which a common gain leaves unchanged.
    let model = AsymptoticModel::from_mobility(&spec.mobility, F::one(), spec.scenario.p_pu, beta)?;
    let mut nonconverged = 0usize;
    for &kf in &spec.grid {
        let k = kf
            .round()
            .to_usize()
            .filter(|&k| k >= 1)
            .ok_or_else(|| invalid("grid", "node counts must be positive integers"))?;
        let sc = spec.scenario_with_nodes(k);
        let mut counts = [Counts::default(); 2];
        let mut analytic = [F::zero(); 2];
        for m in 0..spec.static_periods {
            let ps = spec.period_stream(m);
            let stats = draw_link_statistics(&spec.mobility, k, ps)?;
            let sol = dual_descent(&stats, &sc, &spec.solver)?;
            nonconverged += (!sol.state.converged) as usize;
            let cg = constant_gain_allocation(&sc, &stats)?;
            analytic[0] += pe_scalar(&sol.perf, beta);
            analytic[1] += pe_scalar(&perf(&analytic_moments(&stats, &cg.gains, &sc)?, cg.threshold), beta);
            let dets = [Detector::Fused(sol.allocation), Detector::Fused(cg)];
            let c = count_errors(&dets, &sc, &stats, per, ps, &Perturbation::default());
            counts[0] += c[0];
            counts[1] += c[1];
        }
        let bound = pe_upper_bound(k, &model);
        for (i, s) in [Scheme::Proposed, Scheme::ConstantGain].into_iter().enumerate() {
            let e = McEstimate::<F>::from_counts(counts[i], spec.root().key());
            t.push(vec![
                k.into(),
                s.name().into(),
                f(e.p_md_hat),
                f(e.p_fa_hat),
                f(e.pe(beta)),
                f(e.se_pe(beta)),
                f(analytic[i] / F::count(spec.static_periods)),
                f(bound),
                e.trials.into(),
            ]);
        }
    }
    t.note("beta", beta);
    t.note("nonconverged_solves", nonconverged);
    Ok(t)
}

fn link_effect<F: Scalar>(spec: &ExperimentSpec<F>) -> Result<ResultTable> {
    let mob = &spec.mobility;
    let p = spec.scenario.p_pu;
    let report = spec.kind == ExperimentKind::ReportLinkEffect;
    let mut t = ResultTable::new(&["rho", "snr_var", "regressor", "required_nodes", "bound_nodes"]);
    for (i, &rho) in spec.grid.iter().enumerate() {
        if !(rho > F::zero()) {
            return Err(invalid("grid", "mean SNRs must be positive"));
        }
        let snr = if report {
            MobilityModel::new(rho, spec.report_snr_var, p * mob.mean_sense_gain, p * p * mob.var_sense)?
        } else {
            let cv2_r = mob.var_report / (mob.mean_report_gain * mob.mean_report_gain);
            MobilityModel::new(F::one(), cv2_r, rho, spec.sense_snr_cv2 * rho * rho)?
        };
        let (var, regressor) = if report {
            (snr.var_report, snr.var_report / (rho * rho))
        } else {
            let s = snr.var_sense;
            let a = F::one() + (F::one() + s).sqrt();
            (s, a * a / (rho * rho))
        };
        let stream = spec.root().sub(tag::SCENARIO, &[i as u64]);
        let k = required_nodes(&snr, &spec.target, spec.static_periods, stream, 1 << 24)?;
        let am = AsymptoticModel::new(
            snr.mean_report_gain,
            snr.var_report,
            snr.mean_sense_gain,
            snr.var_sense,
            F::one(),
        )?;
        let kb = nodes_required(spec.target.p_md + spec.target.p_fa, &am)?;
        t.push(vec![f(rho), f(var), f(regressor), k.into(), kb.into()]);
    }
    t.note("target_p_md", spec.target.p_md);
    t.note("target_p_fa", spec.target.p_fa);
    Ok(t)
}
