//! Link statistics driven by node mobility, and Rayleigh fading draws.
//!
//! A static period is described by one [`LinkStatistics`] value: the
//! variance of every sensing and reporting coefficient. Those variances are
//! themselves random across static periods; they are drawn from a Gamma law
//! matched to the mean and variance in [`MobilityModel`].

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng::{tag, Stream};
use crate::scalar::Scalar;

/// Mean and variance of the per-node link gains across static periods.
///
/// All values are linear. The variances refer to the link gains `Σ_k^r`
/// and `Σ_k^s`; the induced SNR variances follow by scaling with `α` and
/// `P_pu²` respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityModel<F> {
    /// Mean reporting-link gain `Λ_r`.
    pub mean_report_gain: F,
    /// Variance of the reporting-link gain.
    pub var_report: F,
    /// Mean sensing-link gain `Λ_s`.
    pub mean_sense_gain: F,
    /// Variance of the sensing-link gain.
    pub var_sense: F,
}

impl<F: Scalar> MobilityModel<F> {
    pub fn new(mean_report_gain: F, var_report: F, mean_sense_gain: F, var_sense: F) -> Result<Self> {
        let m = Self {
            mean_report_gain,
            var_report,
            mean_sense_gain,
            var_sense,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_report_gain > F::zero() && self.mean_report_gain.is_finite()) {
            return Err(invalid("mean_report_gain", "must be positive and finite"));
        }
        if !(self.mean_sense_gain > F::zero() && self.mean_sense_gain.is_finite()) {
            return Err(invalid("mean_sense_gain", "must be positive and finite"));
        }
        if !(self.var_report >= F::zero() && self.var_report.is_finite()) {
            return Err(invalid("var_report", "must be non-negative and finite"));
        }
        if !(self.var_sense >= F::zero() && self.var_sense.is_finite()) {
            return Err(invalid("var_sense", "must be non-negative and finite"));
        }
        Ok(())
    }

    /// Statistics of node `k` only. Node draws are keyed by index, so the
    /// first `K` nodes are the same for every population size `≥ K`.
    pub fn draw_node(&self, stream: Stream, k: usize) -> (F, F) {
        let mut rng = stream.sub(tag::LINKS, &[k as u64]).rng();
        let r = gamma_matched(self.mean_report_gain, self.var_report, &mut rng);
        let s = gamma_matched(self.mean_sense_gain, self.var_sense, &mut rng);
        (r, s)
    }
}

/// Gamma draw with the given mean and variance; the mean itself when the
/// variance is zero. Never returns zero or a negative value.
pub fn gamma_matched<F: Scalar, R: Rng + ?Sized>(mean: F, var: F, rng: &mut R) -> F {
    if var <= F::zero() {
        return mean;
    }
    let shape = mean * mean / var;
    let scale = var / mean;
    F::gamma(shape, scale, rng).max(F::min_positive_value())
}

/// Per-node link variances for one static period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStatistics<F> {
    /// `Σ_k^r`: variance of the reporting coefficient of node `k`.
    pub report_var: Vec<F>,
    /// `Σ_k^s`: variance of the sensing coefficient of node `k`.
    pub sense_var: Vec<F>,
}

impl<F: Scalar> LinkStatistics<F> {
    pub fn new(report_var: Vec<F>, sense_var: Vec<F>) -> Result<Self> {
        if report_var.len() != sense_var.len() {
            return Err(Error::LengthMismatch {
                what: "sense_var",
                got: sense_var.len(),
                expected: report_var.len(),
            });
        }
        if report_var
            .iter()
            .chain(sense_var.iter())
            .any(|v| !(*v > F::zero() && v.is_finite()))
        {
            return Err(invalid("link statistics", "entries must be positive and finite"));
        }
        Ok(Self {
            report_var,
            sense_var,
        })
    }

    /// Every node with the same pair of variances.
    pub fn uniform(k: usize, report_var: F, sense_var: F) -> Result<Self> {
        Self::new(vec![report_var; k], vec![sense_var; k])
    }

    pub fn count(&self) -> usize {
        self.report_var.len()
    }

    pub fn is_empty(&self) -> bool {
        self.report_var.is_empty()
    }

    /// The first `k` nodes.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            report_var: self.report_var[..k].to_vec(),
            sense_var: self.sense_var[..k].to_vec(),
        }
    }
}

/// Instantaneous coefficients for one observation chance.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingDraw<F> {
    pub h_r: Vec<Complex<F>>,
    pub h_s: Vec<Complex<F>>,
}

/// Draws `K` nodes' link statistics for the static period keyed by `stream`.
pub fn draw_link_statistics<F: Scalar>(
    model: &MobilityModel<F>,
    k: usize,
    stream: Stream,
) -> Result<LinkStatistics<F>> {
    model.validate()?;
    let (report_var, sense_var) = (0..k).map(|i| model.draw_node(stream, i)).unzip();
    Ok(LinkStatistics {
        report_var,
        sense_var,
    })
}

/// Circularly-symmetric complex Gaussian with the given variance.
#[inline]
pub fn complex_gaussian<F: Scalar, R: Rng + ?Sized>(var: F, rng: &mut R) -> Complex<F> {
    if var <= F::zero() {
        return Complex::new(F::zero(), F::zero());
    }
    let s = (var * F::lit(0.5)).sqrt();
    Complex::new(s * F::std_normal(rng), s * F::std_normal(rng))
}

/// Draws every sensing and reporting coefficient of one observation chance.
pub fn draw_fading<F: Scalar>(stats: &LinkStatistics<F>, stream: Stream) -> FadingDraw<F> {
    let mut rng = stream.sub(tag::FADING, &[]).rng();
    let mut h_r = Vec::with_capacity(stats.count());
    let mut h_s = Vec::with_capacity(stats.count());
    for (r, s) in stats.report_var.iter().zip(&stats.sense_var) {
        h_r.push(complex_gaussian(*r, &mut rng));
        h_s.push(complex_gaussian(*s, &mut rng));
    }
    FadingDraw { h_r, h_s }
}
