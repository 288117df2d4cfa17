//! Sensing duration needed to meet a pair of error targets.

use serde::{Deserialize, Serialize};

use super::{count_errors, Counts, Detector, McEstimate};
use crate::analytic::{moments_general, node_snrs, threshold_for_false_alarm, PerfPoint};
use crate::channel::LinkStatistics;
use crate::error::{invalid, Result};
use crate::phy::{local_thresholds, Allocation, Perturbation, Scenario, Scheme};
use crate::rng::{tag, Stream};
use crate::scalar::Scalar;
use crate::scheduler::{constant_gain_allocation, dual_descent, SolverOptions};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct QuietPeriodOptions<F> {
    /// Chances per hypothesis per static period at each candidate duration.
    pub trials: u64,
    /// Longest sensing duration tried, in samples.
    pub max_samples: u32,
    pub seed: u64,
    pub solver: SolverOptions<F>,
}

impl<F: Scalar> Default for QuietPeriodOptions<F> {
    fn default() -> Self {
        Self {
            trials: 4_000,
            max_samples: 1024,
            seed: 1,
            solver: SolverOptions::default(),
        }
    }
}

/// Minimal sensing durations and the relative saving of the candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuietPeriod<F> {
    pub candidate_samples: Option<u32>,
    pub reference_samples: Option<u32>,
    /// `1 − T_candidate / T_reference`; `None` when either target is
    /// unreachable within the search range.
    pub reduction: Option<F>,
    /// Pooled error estimates at the longest duration tried.
    pub candidate_at_max: PerfPoint<F>,
    pub reference_at_max: PerfPoint<F>,
}

impl<F: Scalar> QuietPeriod<F> {
    pub fn is_flagged(&self) -> bool {
        self.reduction.is_none()
    }
}

fn detector<F: Scalar>(
    scheme: Scheme,
    scenario: &Scenario<F>,
    stats: &LinkStatistics<F>,
    target: &PerfPoint<F>,
    solver: &SolverOptions<F>,
) -> Result<Detector<F>> {
    let fused = |gains: Vec<F>| -> Result<Detector<F>> {
        let (r, s) = node_snrs(stats, &gains, scenario.p_pu)?;
        let m = moments_general(&r, &s, scenario.samples, scenario.measurement)?;
        Ok(Detector::Fused(Allocation {
            threshold: threshold_for_false_alarm(&m, target.p_fa),
            gains,
        }))
    };
    match scheme {
        Scheme::Proposed => fused(dual_descent(stats, scenario, solver)?.allocation.gains),
        Scheme::ConstantGain => fused(constant_gain_allocation(scenario, stats)?.gains),
        s => Ok(Detector::Hard {
            scheme: s,
            local: local_thresholds(scenario, stats),
        }),
    }
}

fn pooled<F: Scalar>(
    scheme: Scheme,
    samples: u32,
    target: &PerfPoint<F>,
    scenario: &Scenario<F>,
    periods: &[LinkStatistics<F>],
    opts: &QuietPeriodOptions<F>,
) -> Result<PerfPoint<F>> {
    let sc = scenario.with_samples(samples);
    let root = Stream::new(opts.seed);
    let mut total = Counts::default();
    for (m, stats) in periods.iter().enumerate() {
        let d = detector(scheme, &sc, stats, target, &opts.solver)?;
        let stream = root.sub(tag::PERIOD, &[m as u64, samples as u64]);
        total += count_errors(&[d], &sc, stats, opts.trials, stream, &Perturbation::default())[0];
    }
    let e = McEstimate::<F>::from_counts(total, root.key());
    Ok(PerfPoint {
        p_md: e.p_md_hat,
        p_fa: e.p_fa_hat,
    })
}

fn meets<F: Scalar>(p: &PerfPoint<F>, target: &PerfPoint<F>) -> bool {
    p.p_md <= target.p_md && p.p_fa <= target.p_fa
}

/// Smallest duration meeting the target, assuming errors shrink with `T`,
/// plus the pooled errors at the longest duration tried.
fn minimal_samples<F: Scalar>(
    scheme: Scheme,
    target: &PerfPoint<F>,
    scenario: &Scenario<F>,
    periods: &[LinkStatistics<F>],
    opts: &QuietPeriodOptions<F>,
) -> Result<(Option<u32>, PerfPoint<F>)> {
    let mut hi = 1u32;
    let mut last;
    loop {
        last = pooled(scheme, hi, target, scenario, periods, opts)?;
        if meets(&last, target) {
            break;
        }
        if hi >= opts.max_samples {
            return Ok((None, last));
        }
        hi = (hi * 2).min(opts.max_samples);
    }
    let at_hi = last;
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if meets(&pooled(scheme, mid, target, scenario, periods, opts)?, target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((Some(hi), at_hi))
}

/// Sensing-duration saving of `candidate` over `reference` for the given
/// error targets, pooled over the listed static periods. Fused schemes set
/// their threshold for the target false-alarm probability.
pub fn quiet_period_gain<F: Scalar>(
    target: &PerfPoint<F>,
    scenario: &Scenario<F>,
    periods: &[LinkStatistics<F>],
    candidate: Scheme,
    reference: Scheme,
    opts: &QuietPeriodOptions<F>,
) -> Result<QuietPeriod<F>> {
    if periods.is_empty() {
        return Err(invalid("periods", "at least one static period required"));
    }
    for s in periods {
        scenario.check_stats(s)?;
    }
    let (tc, pc) = minimal_samples(candidate, target, scenario, periods, opts)?;
    let (tr, pr) = if candidate == reference {
        (tc, pc)
    } else {
        minimal_samples(reference, target, scenario, periods, opts)?
    };
    let reduction = match (tc, tr) {
        (Some(c), Some(r)) => Some(F::one() - F::from_u32(c).unwrap() / F::from_u32(r).unwrap()),
        _ => None,
    };
    Ok(QuietPeriod {
        candidate_samples: tc,
        reference_samples: tr,
        reduction,
        candidate_at_max: pc,
        reference_at_max: pr,
    })
}
