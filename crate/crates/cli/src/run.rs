//! Command dispatch: builds core inputs from a resolved config and runs them.

use std::str::FromStr;

use coopsense::analytic::{moments_general, node_snrs, perf, pe_scalar, PerfPoint};
use coopsense::asymptotics::{gamma_term, pe_upper_bound, AsymptoticModel};
use coopsense::channel::{draw_link_statistics, LinkStatistics, MobilityModel};
use coopsense::harness::{
    estimate_with, quiet_period_gain, run_experiment, ExperimentKind, ExperimentSpec, QuietPeriodOptions,
};
use coopsense::phy::{Allocation, Perturbation, Scenario, Scheme};
use coopsense::rng::tag;
use coopsense::scheduler::{constant_gain_allocation, dual_descent, power_moment, SolverOptions};
use coopsense::table::{ResultTable, Value};
use coopsense::{Error, Stream};

use crate::config::{Command, RunConfig, Scaling};

/// How a completed run should be reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// At least one solve stopped before its duality gap closed.
    NonConverged(usize),
    /// An error target was not met within the search range.
    Unreachable(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::NonConverged(_) => "nonconverged",
            Status::Unreachable(_) => "unreachable",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NonConverged(_) => 2,
            Status::Unreachable(_) => 3,
        }
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub table: ResultTable,
    pub status: Status,
}

impl RunConfig {
    pub fn scenario(&self) -> coopsense::Result<Scenario<f64>> {
        let mut s = Scenario::uniform(self.nodes, self.p_pu, self.budget, self.beta)?;
        s.samples = self.samples;
        s.measurement = self.measurement;
        s.validate()?;
        Ok(s)
    }

    pub fn mobility(&self) -> coopsense::Result<MobilityModel<f64>> {
        MobilityModel::new(self.lambda_r, self.sigma_r, self.lambda_s, self.sigma_s)
    }

    pub fn solver(&self) -> SolverOptions<f64> {
        SolverOptions {
            tol: self.solver_tol,
            max_iter: self.solver_max_iter,
            ..SolverOptions::default()
        }
    }

    fn target(&self) -> PerfPoint<f64> {
        PerfPoint {
            p_md: self.target_p_md,
            p_fa: self.target_p_fa,
        }
    }

    /// Link statistics of static period `m`.
    fn period(&self, m: usize) -> coopsense::Result<LinkStatistics<f64>> {
        draw_link_statistics(&self.mobility()?, self.nodes, Stream::new(self.seed).sub(tag::PERIOD, &[m as u64]))
    }

    fn spec(&self, kind: ExperimentKind, grid: Vec<f64>) -> coopsense::Result<ExperimentSpec<f64>> {
        let mut spec = ExperimentSpec::new(kind, self.scenario()?, self.mobility()?, grid);
        spec.trials = self.trials;
        spec.static_periods = self.static_periods;
        spec.seed = self.seed;
        spec.solver = self.solver();
        spec.target = self.target();
        spec.report_snr_var = self.report_snr_var;
        spec.sense_snr_cv2 = self.sense_snr_cv2;
        if kind == ExperimentKind::Uncertainty {
            spec.perturbation = Perturbation {
                p_pu_spread_db: self.p_pu_spread_db,
                noise_spread_db: self.noise_spread_db,
            };
        }
        Ok(spec)
    }
}

fn nonconverged(table: &ResultTable) -> Status {
    match table.meta_value("nonconverged_solves").and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n > 0 => Status::NonConverged(n),
        _ => Status::Ok,
    }
}

/// Runs `command`. Errors are configuration or solver failures that leave
/// no result; flagged results come back with a non-`Ok` status.
pub fn execute(command: Command, cfg: &RunConfig) -> coopsense::Result<Outcome> {
    match command {
        Command::Optimize => optimize(cfg),
        Command::Tradeoff => {
            let kind = if cfg.perturb {
                ExperimentKind::Uncertainty
            } else {
                ExperimentKind::Tradeoff
            };
            let table = run_experiment(&cfg.spec(kind, cfg.betas.clone())?)?;
            let status = nonconverged(&table);
            Ok(Outcome { table, status })
        }
        Command::Mc => monte_carlo(cfg),
        Command::Bound => bound(cfg),
        Command::Scaling => scaling(cfg),
        Command::QuietPeriod => quiet(cfg),
    }
}

fn optimize(cfg: &RunConfig) -> coopsense::Result<Outcome> {
    let sc = cfg.scenario()?;
    let stats = cfg.period(0)?;
    let sol = dual_descent(&stats, &sc, &cfg.solver())?;
    let mut t = ResultTable::new(&[
        "node",
        "report_var",
        "sense_var",
        "gain",
        "power",
        "budget",
        "threshold",
        "p_md",
        "p_fa",
        "gap",
    ]);
    for k in 0..stats.count() {
        let power = power_moment(
            sol.allocation.gains[k],
            stats.report_var[k],
            sc.p_pu * stats.sense_var[k],
            sc.samples,
            sc.measurement,
        );
        t.push(vec![
            k.into(),
            stats.report_var[k].into(),
            stats.sense_var[k].into(),
            sol.allocation.gains[k].into(),
            power.into(),
            sc.power_budget[k].into(),
            sol.allocation.threshold.into(),
            sol.perf.p_md.into(),
            sol.perf.p_fa.into(),
            sol.state.gap.into(),
        ]);
    }
    t.note("dual_value", sol.state.dual_value);
    t.note("primal_value", sol.state.primal_value);
    t.note("iterations", sol.state.iterations);
    t.note("converged", sol.state.converged);
    let status = if sol.state.converged {
        Status::Ok
    } else {
        Status::NonConverged(1)
    };
    Ok(Outcome { table: t, status })
}

fn monte_carlo(cfg: &RunConfig) -> coopsense::Result<Outcome> {
    let sc = cfg.scenario()?;
    let stats = cfg.period(0)?;
    let sol = dual_descent(&stats, &sc, &cfg.solver())?;
    let perturb = if cfg.perturb {
        Perturbation {
            p_pu_spread_db: cfg.p_pu_spread_db,
            noise_spread_db: cfg.noise_spread_db,
        }
    } else {
        Perturbation::default()
    };
    let mut t = ResultTable::new(&[
        "scheme",
        "p_md",
        "p_fa",
        "ci_md",
        "ci_fa",
        "pe",
        "se_pe",
        "analytic_p_md",
        "analytic_p_fa",
        "trials",
    ]);
    let root = Stream::new(cfg.seed).sub(tag::TRIAL, &[]);
    for name in &cfg.schemes {
        let scheme = Scheme::from_str(name)?;
        let alloc: Option<Allocation<f64>> = match scheme {
            Scheme::Proposed => Some(sol.allocation.clone()),
            Scheme::ConstantGain => Some(constant_gain_allocation(&sc, &stats)?),
            _ => None,
        };
        let analytic = match &alloc {
            Some(a) => {
                let (r, s) = node_snrs(&stats, &a.gains, sc.p_pu)?;
                let m = moments_general(&r, &s, sc.samples, sc.measurement)?;
                let p = perf(&m, a.threshold);
                [Value::from(p.p_md), Value::from(p.p_fa)]
            }
            None => [Value::from(""), Value::from("")],
        };
        let a = alloc.unwrap_or_else(|| sol.allocation.clone());
        // Matched seeds: every scheme sees the same chances.
        let e = estimate_with(scheme, &sc, &stats, &a, cfg.trials, root, &perturb)?;
        let [am, af] = analytic;
        t.push(vec![
            scheme.name().into(),
            e.p_md_hat.into(),
            e.p_fa_hat.into(),
            e.ci_md().into(),
            e.ci_fa().into(),
            e.pe(sc.beta).into(),
            e.se_pe(sc.beta).into(),
            am,
            af,
            e.trials.into(),
        ]);
    }
    t.note("beta", sc.beta);
    t.note("optimized_pe_analytic", pe_scalar(&sol.perf, sc.beta));
    let status = if sol.state.converged {
        Status::Ok
    } else {
        Status::NonConverged(1)
    };
    Ok(Outcome { table: t, status })
}

fn bound(cfg: &RunConfig) -> coopsense::Result<Outcome> {
    let model = AsymptoticModel::from_mobility(&cfg.mobility()?, cfg.af_gain, cfg.p_pu, cfg.beta)?;
    let k = cfg.nodes;
    let mut t = ResultTable::new(&[
        "nodes",
        "beta",
        "rho_r",
        "sigma_r2",
        "rho_s",
        "sigma_s2",
        "gamma",
        "exponent_per_node",
        "pe_bound",
    ]);
    t.push(vec![
        k.into(),
        model.beta.into(),
        model.rho_r.into(),
        model.sigma_r2.into(),
        model.rho_s.into(),
        model.sigma_s2.into(),
        gamma_term(k, &model).into(),
        model.exponent_per_node().into(),
        pe_upper_bound(k, &model).into(),
    ]);
    Ok(Outcome {
        table: t,
        status: Status::Ok,
    })
}

/// Low-SNR grids used when `snr_grid` is not given.
fn default_snr_grid(scaling: Scaling) -> Vec<f64> {
    match scaling {
        Scaling::Sense => vec![0.1, 0.075, 0.05, 0.035],
        _ => vec![0.1, 0.075, 0.05, 0.035, 0.025],
    }
}

fn scaling(cfg: &RunConfig) -> coopsense::Result<Outcome> {
    let (kind, grid) = match cfg.scaling {
        Scaling::Nodes => (
            ExperimentKind::NodeScaling,
            cfg.node_grid.iter().map(|&k| k as f64).collect(),
        ),
        Scaling::Report => (
            ExperimentKind::ReportLinkEffect,
            cfg.snr_grid.clone().unwrap_or_else(|| default_snr_grid(cfg.scaling)),
        ),
        Scaling::Sense => (
            ExperimentKind::SenseLinkEffect,
            cfg.snr_grid.clone().unwrap_or_else(|| default_snr_grid(cfg.scaling)),
        ),
    };
    match run_experiment(&cfg.spec(kind, grid)?) {
        Ok(table) => {
            let status = nonconverged(&table);
            Ok(Outcome { table, status })
        }
        Err(Error::TargetUnreachable(why)) => {
            let mut table = ResultTable::new(&["experiment", "reason"]);
            table.push(vec![kind.name().into(), why.clone().into()]);
            Ok(Outcome {
                table,
                status: Status::Unreachable(why),
            })
        }
        Err(e) => Err(e),
    }
}

fn quiet(cfg: &RunConfig) -> coopsense::Result<Outcome> {
    let sc = cfg.scenario()?;
    let periods = (0..cfg.static_periods)
        .map(|m| cfg.period(m))
        .collect::<coopsense::Result<Vec<_>>>()?;
    let opts = QuietPeriodOptions {
        trials: cfg.quiet_trials,
        max_samples: cfg.max_samples,
        seed: cfg.seed,
        solver: cfg.solver(),
    };
    let (cand, refr) = (Scheme::Proposed, Scheme::PolledMajority);
    let q = quiet_period_gain(&cfg.target(), &sc, &periods, cand, refr, &opts)?;
    let opt = |x: Option<u32>| x.map_or(Value::from(""), Value::from);
    let mut t = ResultTable::new(&[
        "candidate",
        "reference",
        "target_p_md",
        "target_p_fa",
        "candidate_samples",
        "reference_samples",
        "reduction",
        "candidate_p_md_at_max",
        "candidate_p_fa_at_max",
        "reference_p_md_at_max",
        "reference_p_fa_at_max",
    ]);
    t.push(vec![
        cand.name().into(),
        refr.name().into(),
        cfg.target_p_md.into(),
        cfg.target_p_fa.into(),
        opt(q.candidate_samples),
        opt(q.reference_samples),
        q.reduction.map_or(Value::from(""), Value::from),
        q.candidate_at_max.p_md.into(),
        q.candidate_at_max.p_fa.into(),
        q.reference_at_max.p_md.into(),
        q.reference_at_max.p_fa.into(),
    ]);
    t.note("nodes", sc.nodes);
    t.note("max_samples", cfg.max_samples);
    let status = if q.is_flagged() {
        let who: Vec<&str> = [(q.candidate_samples, cand), (q.reference_samples, refr)]
            .into_iter()
            .filter(|(s, _)| s.is_none())
            .map(|(_, s)| s.name())
            .collect();
        Status::Unreachable(format!(
            "{} cannot reach the target within {} samples",
            who.join(" and "),
            cfg.max_samples
        ))
    } else {
        Status::Ok
    };
    Ok(Outcome { table: t, status })
}
