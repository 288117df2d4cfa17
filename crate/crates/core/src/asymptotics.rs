//! Large-`K` behaviour under a constant AF gain: the exponential error
//! bound, its exponent, and the node count needed to reach a target error.

use serde::{Deserialize, Serialize};

use crate::channel::{LinkStatistics, MobilityModel};
use crate::error::{invalid, Result};
use crate::scalar::Scalar;
use crate::scheduler::power_constraint_lhs;

/// Mean and variance of the reporting and sensing SNRs across static periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticModel<F> {
    /// Mean reporting SNR `√α Λ_r`.
    pub rho_r: F,
    /// Variance of the reporting SNR.
    pub sigma_r2: F,
    /// Mean sensing SNR `P_pu Λ_s`.
    pub rho_s: F,
    /// Variance of the sensing SNR.
    pub sigma_s2: F,
    pub beta: F,
}

impl<F: Scalar> AsymptoticModel<F> {
    pub fn new(rho_r: F, sigma_r2: F, rho_s: F, sigma_s2: F, beta: F) -> Result<Self> {
        let m = Self {
            rho_r,
            sigma_r2,
            rho_s,
            sigma_s2,
            beta,
        };
        if !(rho_r > F::zero() && rho_s > F::zero()) {
            return Err(invalid("rho", "mean SNRs must be positive"));
        }
        if !(sigma_r2 >= F::zero() && sigma_s2 >= F::zero()) {
            return Err(invalid("sigma", "SNR variances must be non-negative"));
        }
        if !(beta > F::zero()) {
            return Err(invalid("beta", "must be positive"));
        }
        Ok(m)
    }

    /// SNR statistics induced by link-gain statistics, a common AF gain `α`
    /// and primary power `P_pu`.
    pub fn from_mobility(model: &MobilityModel<F>, alpha: F, p_pu: F, beta: F) -> Result<Self> {
        Self::new(
            alpha.sqrt() * model.mean_report_gain,
            alpha * model.var_report,
            p_pu * model.mean_sense_gain,
            p_pu * p_pu * model.var_sense,
            beta,
        )
    }

    /// Normalized reporting spread `Σ_r / ρ_r²`.
    pub fn report_spread(&self) -> F {
        self.sigma_r2 / (self.rho_r * self.rho_r)
    }

    /// `ρ_s / (1 + √(ρ_s² + Σ_s + 2ρ_s/3 + 1))`.
    pub fn sensing_factor(&self) -> F {
        let r = self.rho_s;
        r / (F::one() + (r * r + self.sigma_s2 + F::lit(2.0) * r / F::lit(3.0) + F::one()).sqrt())
    }

    /// Decay rate of the bound per node.
    pub fn exponent_per_node(&self) -> F {
        let b = self.sensing_factor();
        b * b / (F::lit(3.0) * (F::one() + self.report_spread()))
    }
}

/// Common gain at which the most demanding node just meets budget `p`.
pub fn constant_af_gain<F: Scalar>(p: F, stats: &LinkStatistics<F>, p_pu: F) -> Result<F> {
    if !(p > F::zero()) {
        return Err(invalid("P", "must be positive"));
    }
    if stats.is_empty() {
        return Err(invalid("K", "at least one node required"));
    }
    let worst = stats
        .report_var
        .iter()
        .zip(&stats.sense_var)
        .map(|(&r, &s)| power_constraint_lhs(F::one(), r, s, p_pu))
        .fold(F::zero(), F::max);
    Ok(p / worst)
}

/// Upper bound on the mobility-averaged `P_MD + β P_FA` with `K` nodes.
pub fn pe_upper_bound<F: Scalar>(k: usize, model: &AsymptoticModel<F>) -> F {
    let half = (F::one() + model.beta) * F::lit(0.5);
    half * (-F::count(k) * model.exponent_per_node()).exp()
}

/// `γ = √(K / (3(1 + Σ_r/ρ_r²))) · ρ_s / (1 + √(ρ_s² + Σ_s + 2ρ_s/3 + 1))`.
pub fn gamma_term<F: Scalar>(k: usize, model: &AsymptoticModel<F>) -> F {
    (F::count(k) / (F::lit(3.0) * (F::one() + model.report_spread()))).sqrt() * model.sensing_factor()
}

/// Smallest `K ≥ 1` with `pe_upper_bound(K) ≤ eps`.
pub fn nodes_required<F: Scalar>(eps: F, model: &AsymptoticModel<F>) -> Result<usize> {
    if !(eps > F::zero()) {
        return Err(invalid("eps", "target must be positive"));
    }
    let half = (F::one() + model.beta) * F::lit(0.5);
    if eps >= half {
        return Ok(1);
    }
    let rate = model.exponent_per_node();
    let guess = ((half / eps).ln() / rate).ceil();
    let Some(mut k) = guess.to_usize() else {
        return Err(invalid("eps", "required node count not representable"));
    };
    k = k.max(1);
    while k > 1 && pe_upper_bound(k - 1, model) <= eps {
        k -= 1;
    }
    while pe_upper_bound(k, model) > eps {
        k += 1;
    }
    Ok(k)
}
