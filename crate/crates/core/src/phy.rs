//! One observation chance: local energy sensing, AF reporting, over-the-air
//! combining at the base station, and threshold detection. Also the local
//! hard-decision detectors used by the reference schemes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::MeasurementModel;
use crate::channel::{complex_gaussian, LinkStatistics};
use crate::error::{invalid, Error, Result};
use crate::rng::Stream;
use crate::scalar::Scalar;

/// Primary-user state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    Idle,
    Active,
}

impl Hypothesis {
    pub fn is_active(self) -> bool {
        self == Self::Active
    }
}

/// System configuration for one static period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<F> {
    /// Number of sensor nodes `K`.
    pub nodes: usize,
    /// Primary transmit power relative to unit noise.
    pub p_pu: F,
    /// Sensing samples per observation chance `T`.
    pub samples: u32,
    /// Per-node average transmit power budget `P_k`.
    pub power_budget: Vec<F>,
    /// Weight of the false-alarm term in `P_MD + β P_FA`.
    pub beta: F,
    pub measurement: MeasurementModel,
}

impl<F: Scalar> Scenario<F> {
    /// `K` nodes sharing one budget, single-sample split measurement.
    pub fn uniform(nodes: usize, p_pu: F, budget: F, beta: F) -> Result<Self> {
        let s = Self {
            nodes,
            p_pu,
            samples: 1,
            power_budget: vec![budget; nodes],
            beta,
            measurement: MeasurementModel::Split,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_beta(&self, beta: F) -> Self {
        Self { beta, ..self.clone() }
    }

    pub fn with_samples(&self, samples: u32) -> Self {
        Self {
            samples,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes == 0 {
            return Err(invalid("nodes", "at least one node required"));
        }
        if !(self.p_pu >= F::zero() && self.p_pu.is_finite()) {
            return Err(invalid("p_pu", "must be non-negative and finite"));
        }
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if self.power_budget.len() != self.nodes {
            return Err(Error::LengthMismatch {
                what: "power_budget",
                got: self.power_budget.len(),
                expected: self.nodes,
            });
        }
        if self.power_budget.iter().any(|p| !(*p > F::zero() && p.is_finite())) {
            return Err(invalid("power_budget", "entries must be positive and finite"));
        }
        if !(self.beta > F::zero() && self.beta.is_finite()) {
            return Err(invalid("beta", "must be positive and finite"));
        }
        Ok(())
    }

    pub fn check_stats(&self, stats: &LinkStatistics<F>) -> Result<()> {
        self.validate()?;
        if stats.count() != self.nodes {
            return Err(Error::LengthMismatch {
                what: "link statistics",
                got: stats.count(),
                expected: self.nodes,
            });
        }
        Ok(())
    }
}

/// Time-averaged received power at each sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement<F> {
    pub energy: Vec<F>,
}

/// Real-valued statistic at the base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusedObservation<F> {
    pub x: F,
}

/// AF gains and detection threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation<F> {
    pub gains: Vec<F>,
    pub threshold: F,
}

/// Local energy with the literal `T`-sample average and unit noise.
pub fn sense_local<F: Scalar>(h_s: Complex<F>, theta: Hypothesis, p_pu: F, samples: u32, stream: Stream) -> F {
    let mut rng = stream.rng();
    sense_energy(
        h_s.norm_sqr(),
        theta,
        p_pu,
        samples,
        MeasurementModel::SampleAverage,
        F::one(),
        &mut rng,
    )
}

/// Local energy given the sensing power gain `|h_s|²`.
///
/// `noise_var` is the per-sample noise power (1 when nominal).
pub fn sense_energy<F: Scalar, R: Rng + ?Sized>(
    gain_s: F,
    theta: Hypothesis,
    p_pu: F,
    samples: u32,
    model: MeasurementModel,
    noise_var: F,
    rng: &mut R,
) -> F {
    let signal = if theta.is_active() { gain_s * p_pu } else { F::zero() };
    let t = F::from_u32(samples).unwrap();
    match model {
        MeasurementModel::Split => {
            let mut e = F::zero();
            for _ in 0..samples {
                e += F::exp1(rng);
            }
            signal + noise_var * e / t
        }
        MeasurementModel::SampleAverage => {
            let a = signal.sqrt();
            let mut e = F::zero();
            for _ in 0..samples {
                let n = complex_gaussian(noise_var, rng);
                e += (n + Complex::new(a, F::zero())).norm_sqr();
            }
            e / t
        }
    }
}

/// Combined statistic for a given BS noise real part (no randomness).
pub fn fuse<F: Scalar>(energy: &[F], report_gain: &[F], gains: &[F], noise_re: F) -> F {
    let k = F::count(energy.len());
    let mut acc = noise_re;
    for ((&e, &g), &a) in energy.iter().zip(report_gain).zip(gains) {
        acc += g * e * a.sqrt();
    }
    acc / k
}

/// Pre-equalized AF reporting with over-the-air combining.
///
/// The BS noise has unit variance per quadrature, so its real part, the
/// only part the detector sees, is standard normal.
pub fn report_and_fuse<F: Scalar>(
    meas: &Measurement<F>,
    h_r: &[Complex<F>],
    alloc: &Allocation<F>,
    stream: Stream,
) -> Result<FusedObservation<F>> {
    let k = meas.energy.len();
    if h_r.len() != k {
        return Err(Error::LengthMismatch {
            what: "h_r",
            got: h_r.len(),
            expected: k,
        });
    }
    if alloc.gains.len() != k {
        return Err(Error::LengthMismatch {
            what: "gains",
            got: alloc.gains.len(),
            expected: k,
        });
    }
    if k == 0 {
        return Err(invalid("K", "at least one node required"));
    }
    let mut rng = stream.rng();
    let noise = F::std_normal(&mut rng);
    let gain: Vec<F> = h_r.iter().map(|h| h.norm_sqr()).collect();
    Ok(FusedObservation {
        x: fuse(&meas.energy, &gain, &alloc.gains, noise),
    })
}

/// Declares the primary present iff `x ≥ t0`.
#[inline]
pub fn detect<F: Scalar>(x: F, t0: F) -> bool {
    x >= t0
}

/// Local threshold equalizing the single-sensor false-alarm and
/// mis-detection probabilities under a Gaussian fit of the local energy.
pub fn local_threshold<F: Scalar>(snr_s: F, samples: u32, model: MeasurementModel) -> F {
    let var = |s: F| {
        let m = s + F::one();
        (model.energy_second_moment(s, samples) - m * m).max(F::zero())
    };
    let sa = var(F::zero()).sqrt();
    let sb = var(snr_s).sqrt();
    if sa + sb <= F::zero() {
        return F::one() + snr_s * F::lit(0.5);
    }
    F::one() + snr_s * sa / (sa + sb)
}

/// Majority vote, ties resolved toward "present".
pub fn majority(decisions: impl IntoIterator<Item = bool>) -> bool {
    let (mut ones, mut n) = (0usize, 0usize);
    for d in decisions {
        ones += d as usize;
        n += 1;
    }
    2 * ones >= n && n > 0
}

/// Logical OR of local decisions.
pub fn or_rule(decisions: impl IntoIterator<Item = bool>) -> bool {
    decisions.into_iter().any(|d| d)
}

/// Detection schemes compared throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// AF fusion with optimized per-node gains.
    Proposed,
    /// Single sensor with its own local threshold.
    Local,
    /// Local hard decisions over ideal links, majority at the BS.
    PolledMajority,
    /// Local hard decisions over ideal links, OR at the BS.
    OrRule,
    /// AF fusion with one common gain.
    ConstantGain,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Proposed,
        Scheme::ConstantGain,
        Scheme::Local,
        Scheme::PolledMajority,
        Scheme::OrRule,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::Local => "local",
            Self::PolledMajority => "polled_majority",
            Self::OrRule => "or_rule",
            Self::ConstantGain => "constant_gain",
        }
    }

    /// Uses local hard decisions rather than AF fusion.
    pub fn is_hard_decision(self) -> bool {
        matches!(self, Self::Local | Self::PolledMajority | Self::OrRule)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::UnknownScheme(s.to_string()))
    }
}

/// Operating conditions that may differ from the nominal values the
/// detectors were designed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation<F> {
    /// Half-width in dB of the uniform spread applied to `P_pu` per chance.
    pub p_pu_spread_db: F,
    /// Half-width in dB of the uniform spread applied to each noise variance.
    pub noise_spread_db: F,
}

impl<F: Scalar> Default for Perturbation<F> {
    fn default() -> Self {
        Self {
            p_pu_spread_db: F::zero(),
            noise_spread_db: F::zero(),
        }
    }
}

impl<F: Scalar> Perturbation<F> {
    pub fn is_null(&self) -> bool {
        self.p_pu_spread_db == F::zero() && self.noise_spread_db == F::zero()
    }
}

fn db_spread<F: Scalar, R: Rng + ?Sized>(half_width: F, rng: &mut R) -> F {
    if half_width == F::zero() {
        return F::one();
    }
    let u = F::unit_uniform(rng) * F::lit(2.0) - F::one();
    F::lit(10.0).powf(u * half_width / F::lit(10.0))
}

/// Raw ingredients of one observation chance, shared by every scheme so
/// that comparisons run on common random numbers.
#[derive(Debug, Clone, Default)]
pub struct Chance<F> {
    /// Local energies `|x_k|²`.
    pub energy: Vec<F>,
    /// Reporting power gains `|h_k^r|²`.
    pub report_gain: Vec<F>,
    /// Real part of the BS noise.
    pub bs_noise: F,
    /// Sensor consulted by the single-sensor detector.
    pub pick: usize,
}

impl<F: Scalar> Chance<F> {
    /// Draws a fresh observation chance in place.
    pub fn draw<R: Rng + ?Sized>(
        &mut self,
        scenario: &Scenario<F>,
        stats: &LinkStatistics<F>,
        theta: Hypothesis,
        perturb: &Perturbation<F>,
        rng: &mut R,
    ) {
        let k = stats.count();
        self.energy.clear();
        self.report_gain.clear();
        let p_pu = scenario.p_pu * db_spread(perturb.p_pu_spread_db, rng);
        for i in 0..k {
            let g_s = stats.sense_var[i] * F::exp1(rng);
            let g_r = stats.report_var[i] * F::exp1(rng);
            let nv = db_spread(perturb.noise_spread_db, rng);
            let e = sense_energy(g_s, theta, p_pu, scenario.samples, scenario.measurement, nv, rng);
            self.energy.push(e);
            self.report_gain.push(g_r);
        }
        let bs_var = db_spread(perturb.noise_spread_db, rng);
        self.bs_noise = bs_var.sqrt() * F::std_normal(rng);
        self.pick = if k > 0 { rng.random_range(0..k) } else { 0 };
    }

    /// AF-fused statistic for the given gains.
    pub fn fused(&self, gains: &[F]) -> F {
        fuse(&self.energy, &self.report_gain, gains, self.bs_noise)
    }

    /// Decision of a hard-decision scheme with per-node local thresholds.
    pub fn hard_decision(&self, scheme: Scheme, local: &[F]) -> bool {
        let dec = self.energy.iter().zip(local).map(|(&e, &t)| detect(e, t));
        match scheme {
            Scheme::Local => detect(self.energy[self.pick], local[self.pick]),
            Scheme::PolledMajority => majority(dec),
            Scheme::OrRule => or_rule(dec),
            _ => unreachable!("AF schemes are decided by the fused statistic"),
        }
    }
}

/// Local thresholds of every node under nominal conditions.
pub fn local_thresholds<F: Scalar>(scenario: &Scenario<F>, stats: &LinkStatistics<F>) -> Vec<F> {
    stats
        .sense_var
        .iter()
        .map(|&s| local_threshold(scenario.p_pu * s, scenario.samples, scenario.measurement))
        .collect()
}

/// One observation chance of a reference scheme. The constant-gain scheme
/// uses the largest common gain every node can afford and the optimal
/// threshold for the scenario's `β`.
pub fn run_baseline<F: Scalar>(
    scheme: Scheme,
    scenario: &Scenario<F>,
    stats: &LinkStatistics<F>,
    theta: Hypothesis,
    stream: Stream,
) -> Result<bool> {
    scenario.check_stats(stats)?;
    let mut rng = stream.rng();
    let mut chance = Chance::default();
    chance.draw(scenario, stats, theta, &Perturbation::default(), &mut rng);
    match scheme {
        Scheme::ConstantGain => {
            let alloc = crate::scheduler::constant_gain_allocation(scenario, stats)?;
            Ok(detect(chance.fused(&alloc.gains), alloc.threshold))
        }
        Scheme::Proposed => Err(Error::UnknownScheme(
            "proposed is not a reference scheme".to_string(),
        )),
        s => Ok(chance.hard_decision(s, &local_thresholds(scenario, stats))),
    }
}
