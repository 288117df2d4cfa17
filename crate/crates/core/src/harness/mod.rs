//! Seeded Monte Carlo estimation of error probabilities and the experiment
//! families built on it.
//!
//! Trial `i` under hypothesis `θ` draws from its own substream keyed by
//! `(θ, i)`, and all detectors evaluated together see the same draws.
//! Results are integer error counts, so they do not depend on the order in
//! which trials are executed.

mod experiments;
mod quiet;

pub use experiments::{
    fit_line, mobility_average_pe, required_nodes, run_experiment, ExperimentKind, ExperimentSpec, GainPolicy,
    LineFit,
};
pub use quiet::{quiet_period_gain, QuietPeriod, QuietPeriodOptions};

use serde::{Deserialize, Serialize};

use crate::channel::LinkStatistics;
use crate::error::{invalid, Result};
use crate::phy::{detect, local_thresholds, Allocation, Chance, Hypothesis, Perturbation, Scenario, Scheme};
use crate::rng::{tag, Stream};
use crate::scalar::Scalar;
use crate::scheduler::constant_gain_allocation;

/// Empirical error probabilities with 95% normal-approximation intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate<F> {
    pub p_md_hat: F,
    pub p_fa_hat: F,
    /// Larger of the two 95% half-widths.
    pub ci_halfwidth: F,
    /// Observation chances per hypothesis.
    pub trials: u64,
    /// Key of the root substream.
    pub seed: u64,
    pub md_errors: u64,
    pub fa_errors: u64,
}

fn half_width<F: Scalar>(p: F, n: u64) -> F {
    F::lit(1.96) * standard_error(p, n)
}

fn standard_error<F: Scalar>(p: F, n: u64) -> F {
    (p * (F::one() - p) / F::from_u64(n).unwrap()).sqrt()
}

impl<F: Scalar> McEstimate<F> {
    pub fn from_counts(counts: Counts, seed: u64) -> Self {
        let n = F::from_u64(counts.trials.max(1)).unwrap();
        let p_md = F::from_u64(counts.md).unwrap() / n;
        let p_fa = F::from_u64(counts.fa).unwrap() / n;
        Self {
            p_md_hat: p_md,
            p_fa_hat: p_fa,
            ci_halfwidth: half_width(p_md, counts.trials).max(half_width(p_fa, counts.trials)),
            trials: counts.trials,
            seed,
            md_errors: counts.md,
            fa_errors: counts.fa,
        }
    }

    pub fn ci_md(&self) -> F {
        half_width(self.p_md_hat, self.trials)
    }

    pub fn ci_fa(&self) -> F {
        half_width(self.p_fa_hat, self.trials)
    }

    pub fn se_md(&self) -> F {
        standard_error(self.p_md_hat, self.trials)
    }

    pub fn se_fa(&self) -> F {
        standard_error(self.p_fa_hat, self.trials)
    }

    /// `P̂_MD + β P̂_FA`.
    pub fn pe(&self, beta: F) -> F {
        self.p_md_hat + beta * self.p_fa_hat
    }

    /// Standard error of [`Self::pe`], hypotheses sampled independently.
    pub fn se_pe(&self, beta: F) -> F {
        let (a, b) = (self.se_md(), beta * self.se_fa());
        (a * a + b * b).sqrt()
    }
}

/// Error counts per hypothesis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub md: u64,
    pub fa: u64,
    pub trials: u64,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, o: Self) {
        self.md += o.md;
        self.fa += o.fa;
        self.trials += o.trials;
    }
}

/// A complete decision rule for one observation chance.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector<F> {
    /// AF fusion with these gains and threshold.
    Fused(Allocation<F>),
    /// Hard-decision scheme with per-node local thresholds.
    Hard { scheme: Scheme, local: Vec<F> },
}

impl<F: Scalar> Detector<F> {
    #[inline]
    fn decide(&self, c: &Chance<F>) -> bool {
        match self {
            Detector::Fused(a) => detect(c.fused(&a.gains), a.threshold),
            Detector::Hard { scheme, local } => c.hard_decision(*scheme, local),
        }
    }

    /// Detector for a named scheme. `proposed` takes `alloc`; the others
    /// build their own rule from the scenario.
    pub fn for_scheme(
        scheme: Scheme,
        scenario: &Scenario<F>,
        stats: &LinkStatistics<F>,
        alloc: &Allocation<F>,
    ) -> Result<Self> {
        Ok(match scheme {
            Scheme::Proposed => Detector::Fused(alloc.clone()),
            Scheme::ConstantGain => Detector::Fused(constant_gain_allocation(scenario, stats)?),
            s => Detector::Hard {
                scheme: s,
                local: local_thresholds(scenario, stats),
            },
        })
    }
}

/// Runs `trials` chances per hypothesis and counts each detector's errors.
pub fn count_errors<F: Scalar>(
    detectors: &[Detector<F>],
    scenario: &Scenario<F>,
    stats: &LinkStatistics<F>,
    trials: u64,
    stream: Stream,
    perturb: &Perturbation<F>,
) -> Vec<Counts> {
    let mut counts = vec![
        Counts {
            trials,
            ..Counts::default()
        };
        detectors.len()
    ];
    let mut chance = Chance::default();
    for (h, theta) in [Hypothesis::Idle, Hypothesis::Active].into_iter().enumerate() {
        for i in 0..trials {
            let mut rng = stream.sub(tag::TRIAL, &[h as u64, i]).rng();
            chance.draw(scenario, stats, theta, perturb, &mut rng);
            for (d, c) in detectors.iter().zip(counts.iter_mut()) {
                let present = d.decide(&chance);
                match theta {
                    Hypothesis::Idle => c.fa += present as u64,
                    Hypothesis::Active => c.md += (!present) as u64,
                }
            }
        }
    }
    counts
}

/// Error probabilities of `scheme` over `trials` chances per hypothesis.
pub fn estimate<F: Scalar>(
    scheme: Scheme,
    scenario: &Scenario<F>,
    stats: &LinkStatistics<F>,
    alloc: &Allocation<F>,
    trials: u64,
    stream: Stream,
) -> Result<McEstimate<F>> {
    estimate_with(scheme, scenario, stats, alloc, trials, stream, &Perturbation::default())
}

/// [`estimate`] under perturbed operating conditions.
pub fn estimate_with<F: Scalar>(
    scheme: Scheme,
    scenario: &Scenario<F>,
    stats: &LinkStatistics<F>,
    alloc: &Allocation<F>,
    trials: u64,
    stream: Stream,
    perturb: &Perturbation<F>,
) -> Result<McEstimate<F>> {
    scenario.check_stats(stats)?;
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    if scheme == Scheme::Proposed && alloc.gains.len() != stats.count() {
        return Err(invalid("alloc", "one gain per node required"));
    }
    let det = Detector::for_scheme(scheme, scenario, stats, alloc)?;
    let c = count_errors(&[det], scenario, stats, trials, stream, perturb)[0];
    Ok(McEstimate::from_counts(c, stream.key()))
}
