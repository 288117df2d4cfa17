//! Closed-form detection performance of the fused AF observation.
//!
//! Under the Gaussian approximation of the fused statistic `X`, its mean and
//! variance under each hypothesis determine both error probabilities. The
//! per-node SNRs are `SNR_k^r = √α_k Σ_k^r` and `SNR_k^s = P_pu Σ_k^s`.

use serde::{Deserialize, Serialize};

use crate::channel::LinkStatistics;
use crate::error::{invalid, Error, Result};
pub use crate::qfunc::{erfc, gaussian_pdf, q_function, q_inverse};
use crate::scalar::Scalar;

/// How the local energy `|x_k|²` is formed from `T` samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementModel {
    /// Signal energy `|h_s|²θP_pu` plus the average energy of `T` unit noise
    /// samples, with the signal/noise cross term removed. With `T = 1` the
    /// closed-form moments are exact.
    #[default]
    Split,
    /// Literal average `(1/T)Σ|h_s θ √P_pu + n_t|²`, cross term included.
    SampleAverage,
}

impl MeasurementModel {
    /// `E[|x_k|⁴]` given `SNR_k^s = s`, averaged over the sensing fading.
    pub fn energy_second_moment<F: Scalar>(self, s: F, samples: u32) -> F {
        let two = F::lit(2.0);
        let inv_t = F::one() / F::from_u32(samples.max(1)).unwrap();
        let base = two * s * s + two * s + F::one();
        match self {
            Self::Split => base + inv_t,
            Self::SampleAverage => base + (two * s + F::one()) * inv_t,
        }
    }

    /// Variance factor `v` such that the node's contribution to `K²σ²` is
    /// `SNR_r² · v`.
    pub fn variance_factor<F: Scalar>(self, s: F, samples: u32) -> F {
        let m = s + F::one();
        F::lit(2.0) * self.energy_second_moment(s, samples) - m * m
    }
}

/// Mean and variance of the fused observation under both hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments<F> {
    pub mu0: F,
    pub var0: F,
    pub mu1: F,
    pub var1: F,
}

impl<F: Scalar> Moments<F> {
    pub fn sigma0(&self) -> F {
        self.var0.sqrt()
    }

    pub fn sigma1(&self) -> F {
        self.var1.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.var0 > F::zero()
            && self.var1 > F::zero()
            && self.mu0.is_finite()
            && self.mu1.is_finite()
            && self.var0.is_finite()
            && self.var1.is_finite();
        if ok {
            Ok(())
        } else {
            Err(invalid("moments", "variances must be positive, all values finite"))
        }
    }
}

/// Mis-detection and false-alarm probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfPoint<F> {
    pub p_md: F,
    pub p_fa: F,
}

impl<F: Scalar> PerfPoint<F> {
    /// `self` is at least as good in both coordinates and better in one.
    pub fn dominates(&self, other: &Self) -> bool {
        self.p_md <= other.p_md
            && self.p_fa <= other.p_fa
            && (self.p_md < other.p_md || self.p_fa < other.p_fa)
    }
}

fn check_lengths<F>(snr_r: &[F], snr_s: &[F]) -> Result<usize> {
    if snr_r.len() != snr_s.len() {
        return Err(Error::LengthMismatch {
            what: "snr_s",
            got: snr_s.len(),
            expected: snr_r.len(),
        });
    }
    if snr_r.is_empty() {
        return Err(invalid("K", "at least one node required"));
    }
    Ok(snr_r.len())
}

/// Moments in terms of per-node SNRs, single-sample split measurement.
///
/// `σ_1²` is summed in the factored form `3(s² + 2s/3 + 1)`.
pub fn moments_from_snrs<F: Scalar>(snr_r: &[F], snr_s: &[F]) -> Result<Moments<F>> {
    let k = F::count(check_lengths(snr_r, snr_s)?);
    let three = F::lit(3.0);
    let two_thirds = F::lit(2.0) / three;
    let mut sr = F::zero();
    let mut srs = F::zero();
    let mut sr2 = F::zero();
    let mut sr2s = F::zero();
    for (&r, &s) in snr_r.iter().zip(snr_s) {
        sr += r;
        srs += r * (s + F::one());
        sr2 += r * r;
        sr2s += r * r * (s * s + two_thirds * s + F::one());
    }
    Ok(Moments {
        mu0: sr / k,
        var0: (three * sr2 + F::one()) / (k * k),
        mu1: srs / k,
        var1: (three * sr2s + F::one()) / (k * k),
    })
}

/// `σ_1²` summed in the expanded form `3s² + 2s + 3`.
pub fn var1_expanded<F: Scalar>(snr_r: &[F], snr_s: &[F]) -> Result<F> {
    let k = F::count(check_lengths(snr_r, snr_s)?);
    let (two, three) = (F::lit(2.0), F::lit(3.0));
    let sum: F = snr_r
        .iter()
        .zip(snr_s)
        .map(|(&r, &s)| r * r * (three * s * s + two * s + three))
        .sum();
    Ok((sum + F::one()) / (k * k))
}

/// Moments for `T`-sample sensing under the chosen measurement model.
/// Reduces to [`moments_from_snrs`] for `Split` with `T = 1`.
pub fn moments_general<F: Scalar>(
    snr_r: &[F],
    snr_s: &[F],
    samples: u32,
    model: MeasurementModel,
) -> Result<Moments<F>> {
    let k = F::count(check_lengths(snr_r, snr_s)?);
    let v0 = model.variance_factor(F::zero(), samples);
    let mut m = Moments {
        mu0: F::zero(),
        var0: F::one(),
        mu1: F::zero(),
        var1: F::one(),
    };
    for (&r, &s) in snr_r.iter().zip(snr_s) {
        m.mu0 += r;
        m.mu1 += r * (s + F::one());
        m.var0 += r * r * v0;
        m.var1 += r * r * model.variance_factor(s, samples);
    }
    m.mu0 /= k;
    m.mu1 /= k;
    m.var0 /= k * k;
    m.var1 /= k * k;
    Ok(m)
}

/// Per-node SNR vectors `(√α_k Σ_k^r, P_pu Σ_k^s)`.
pub fn node_snrs<F: Scalar>(stats: &LinkStatistics<F>, gains: &[F], p_pu: F) -> Result<(Vec<F>, Vec<F>)> {
    if gains.len() != stats.count() {
        return Err(Error::LengthMismatch {
            what: "gains",
            got: gains.len(),
            expected: stats.count(),
        });
    }
    if gains.iter().any(|a| !(*a >= F::zero())) {
        return Err(invalid("gains", "must be non-negative"));
    }
    let snr_r = stats
        .report_var
        .iter()
        .zip(gains)
        .map(|(&r, &a)| a.sqrt() * r)
        .collect();
    let snr_s = stats.sense_var.iter().map(|&s| p_pu * s).collect();
    Ok((snr_r, snr_s))
}

/// Moments of the fused observation from raw link variances and AF gains.
pub fn moments<F: Scalar>(stats: &LinkStatistics<F>, gains: &[F], p_pu: F) -> Result<Moments<F>> {
    let (snr_r, snr_s) = node_snrs(stats, gains, p_pu)?;
    moments_from_snrs(&snr_r, &snr_s)
}

/// Error probabilities for threshold `t0`.
pub fn perf<F: Scalar>(m: &Moments<F>, t0: F) -> PerfPoint<F> {
    PerfPoint {
        p_md: q_function((m.mu1 - t0) / m.sigma1()),
        p_fa: q_function((t0 - m.mu0) / m.sigma0()),
    }
}

/// Equal-margin threshold `μ_0 + σ_0(μ_1 − μ_0)/(σ_0 + σ_1)`.
pub fn approx_threshold<F: Scalar>(m: &Moments<F>) -> F {
    let (s0, s1) = (m.sigma0(), m.sigma1());
    m.mu0 + s0 * (m.mu1 - m.mu0) / (s0 + s1)
}

/// Threshold with false-alarm probability exactly `p_fa`.
pub fn threshold_for_false_alarm<F: Scalar>(m: &Moments<F>, p_fa: F) -> F {
    m.mu0 + m.sigma0() * q_inverse(p_fa)
}

/// Weighted error `P_MD + β P_FA`.
pub fn pe_scalar<F: Scalar>(p: &PerfPoint<F>, beta: F) -> F {
    p.p_md + beta * p.p_fa
}
