//! False-alarm margin `(T_0* − μ_0)/σ_0` as a differentiable function of
//! the normalized amplitudes `w_k = √(α_k / cap_k)`.

use std::ops::{Add, Div, Mul, Sub};

use crate::analytic::MeasurementModel;
use crate::channel::LinkStatistics;
use crate::phy::Scenario;
use crate::scalar::Scalar;

/// Value with partial derivatives with respect to `(Δ, S_0, S_1)`.
#[derive(Debug, Clone, Copy)]
struct D3<F> {
    v: F,
    d: [F; 3],
}

impl<F: Scalar> D3<F> {
    fn var(v: F, i: usize) -> Self {
        let mut d = [F::zero(); 3];
        d[i] = F::one();
        Self { v, d }
    }

    fn cst(v: F) -> Self {
        Self { v, d: [F::zero(); 3] }
    }

    fn map(self, v: F, slope: F) -> Self {
        Self {
            v,
            d: [self.d[0] * slope, self.d[1] * slope, self.d[2] * slope],
        }
    }

    fn sqrt(self) -> Self {
        if self.v <= F::zero() {
            return Self::cst(F::zero());
        }
        let r = self.v.sqrt();
        self.map(r, F::lit(0.5) / r)
    }

    fn ln(self) -> Self {
        self.map(self.v.ln(), self.v.recip())
    }

    fn scale(self, c: F) -> Self {
        self.map(self.v * c, c)
    }
}

impl<F: Scalar> Add for D3<F> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            v: self.v + o.v,
            d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]],
        }
    }
}

impl<F: Scalar> Sub for D3<F> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            v: self.v - o.v,
            d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]],
        }
    }
}

impl<F: Scalar> Mul for D3<F> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            v: self.v * o.v,
            d: [
                self.d[0] * o.v + self.v * o.d[0],
                self.d[1] * o.v + self.v * o.d[1],
                self.d[2] * o.v + self.v * o.d[2],
            ],
        }
    }
}

impl<F: Scalar> Div for D3<F> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.v.recip();
        let q = self.v * inv;
        Self {
            v: q,
            d: [
                (self.d[0] - q * o.d[0]) * inv,
                (self.d[1] - q * o.d[1]) * inv,
                (self.d[2] - q * o.d[2]) * inv,
            ],
        }
    }
}

/// Margin and its gradient in `(Δ, S_0, S_1)`.
///
/// The threshold is the larger root of the first-order condition, written
/// in a rationalized form that stays regular when `S_0 = S_1`. It is capped
/// at `μ_1`, and a negative discriminant is clamped to zero.
fn margin_d3<F: Scalar>(delta: F, s0: F, s1: F, ln_beta: F) -> D3<F> {
    let dl = D3::var(delta, 0);
    let a = D3::var(s0, 1);
    let b = D3::var(s1, 2);
    let (sa, sb) = (a.sqrt(), b.sqrt());
    let two = F::lit(2.0);
    let l = D3::cst(ln_beta) + (b.ln() - a.ln()).scale(F::lit(0.5));
    let disc = dl * dl + (b - a) * l.scale(two);
    let root = disc.sqrt();
    let num = dl * dl + b * l.scale(two);
    let den = sb * root + sa * dl;
    let cap = dl / sa;
    if den.v <= F::zero() {
        return cap;
    }
    let f = num / den;
    if f.v <= cap.v {
        f
    } else {
        cap
    }
}

/// Margin from moments, with the same conventions as the optimizer.
pub fn search_margin<F: Scalar>(delta: F, var0: F, var1: F, beta: F) -> F {
    margin_d3(delta, var0, var1, beta.ln()).v
}

/// Per-node constants of the allocation problem in normalized form.
#[derive(Debug, Clone)]
pub struct Problem<F> {
    /// `√cap_k · Σ_k^r`: reporting SNR at full budget.
    pub rho: Vec<F>,
    /// `P_pu Σ_k^s`.
    pub snr_s: Vec<F>,
    /// Per-node variance factor under the active hypothesis.
    pub v1: Vec<F>,
    /// Variance factor under the idle hypothesis.
    pub v0: F,
    /// Largest affordable gain `P_k / (Σ_k^r E|x_k|⁴)`.
    pub cap: Vec<F>,
    pub ln_beta: F,
    k: F,
}

/// Objective value, gradient, and the moment ingredients at a point.
#[derive(Debug, Clone)]
pub struct Eval<F> {
    pub value: F,
    pub grad: Vec<F>,
    pub delta: F,
    pub var0: F,
    pub var1: F,
}

impl<F: Scalar> Problem<F> {
    pub fn new(stats: &LinkStatistics<F>, scenario: &Scenario<F>) -> Self {
        Self::with_model(stats, scenario, scenario.samples, scenario.measurement)
    }

    pub fn with_model(
        stats: &LinkStatistics<F>,
        scenario: &Scenario<F>,
        samples: u32,
        model: MeasurementModel,
    ) -> Self {
        let n = stats.count();
        let mut rho = Vec::with_capacity(n);
        let mut snr_s = Vec::with_capacity(n);
        let mut v1 = Vec::with_capacity(n);
        let mut cap = Vec::with_capacity(n);
        for i in 0..n {
            let s = scenario.p_pu * stats.sense_var[i];
            let r = stats.report_var[i];
            let c = r * model.energy_second_moment(s, samples);
            let cp = scenario.power_budget[i] / c;
            cap.push(cp);
            rho.push(cp.sqrt() * r);
            snr_s.push(s);
            v1.push(model.variance_factor(s, samples));
        }
        Self {
            rho,
            snr_s,
            v1,
            v0: model.variance_factor(F::zero(), samples),
            cap,
            ln_beta: scenario.beta.ln(),
            k: F::count(n),
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// `(Δ, σ_0², σ_1²)` at `w`.
    pub fn moments(&self, w: &[F]) -> (F, F, F) {
        let mut d = F::zero();
        let mut a = F::zero();
        let mut b = F::zero();
        for i in 0..w.len() {
            let x = self.rho[i] * w[i];
            d += x * self.snr_s[i];
            a += x * x * self.v0;
            b += x * x * self.v1[i];
        }
        let k2 = self.k * self.k;
        (d / self.k, (a + F::one()) / k2, (b + F::one()) / k2)
    }

    pub fn value(&self, w: &[F]) -> F {
        let (d, a, b) = self.moments(w);
        margin_d3(d, a, b, self.ln_beta).v
    }

    pub fn eval(&self, w: &[F]) -> Eval<F> {
        let (d, a, b) = self.moments(w);
        let m = margin_d3(d, a, b, self.ln_beta);
        let two = F::lit(2.0);
        let k2 = self.k * self.k;
        let grad = (0..w.len())
            .map(|i| {
                let rho = self.rho[i];
                let x2 = two * rho * rho * w[i] / k2;
                m.d[0] * rho * self.snr_s[i] / self.k + m.d[1] * x2 * self.v0 + m.d[2] * x2 * self.v1[i]
            })
            .collect();
        Eval {
            value: m.v,
            grad,
            delta: d,
            var0: a,
            var1: b,
        }
    }

    /// AF gains `α_k = cap_k w_k²`.
    pub fn gains(&self, w: &[F]) -> Vec<F> {
        w.iter().zip(&self.cap).map(|(&x, &c)| c * x * x).collect()
    }

    /// Normalized amplitudes of the given gains.
    pub fn amplitudes(&self, gains: &[F]) -> Vec<F> {
        gains.iter().zip(&self.cap).map(|(&a, &c)| (a / c).sqrt()).collect()
    }
}
