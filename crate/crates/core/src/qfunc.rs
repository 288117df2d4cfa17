//! Gaussian tail function.
//!
//! `Q(x) = erfc(x/√2)/2`. For `z = x/√2 < 2` the positive-term series
//! `erf(z) = 2/√π · e^{-z²} · Σ 2ⁿ z^{2n+1} / (2n+1)!!` is summed; beyond
//! that the Laplace continued fraction for `erfc` is evaluated with the
//! modified Lentz method. Both branches keep full relative accuracy in the
//! upper tail.

use crate::scalar::Scalar;

const SERIES_LIMIT: f64 = 2.0;
const MAX_TERMS: usize = 500;

fn erf_series<F: Scalar>(z: F) -> F {
    let two = F::lit(2.0);
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut n = 0usize;
    while n < MAX_TERMS {
        n += 1;
        term = term * two * z2 / F::count(2 * n + 1);
        sum += term;
        if term <= sum * F::epsilon() {
            break;
        }
    }
    two / F::PI().sqrt() * (-z2).exp() * sum
}

fn erfc_fraction<F: Scalar>(z: F) -> F {
    // erfc(z) = e^{-z²}/√π · 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    let tiny = F::min_positive_value() / F::epsilon();
    let half = F::lit(0.5);
    let mut f = z;
    let mut c = z;
    let mut d = F::zero();
    for n in 1..MAX_TERMS {
        let a = F::count(n) * half;
        d = z + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f *= delta;
        if (delta - F::one()).abs() <= F::epsilon() {
            break;
        }
    }
    (-z * z).exp() / (F::PI().sqrt() * f)
}

/// Complementary error function.
pub fn erfc<F: Scalar>(z: F) -> F {
    if z.is_nan() {
        return z;
    }
    if z < F::zero() {
        return F::lit(2.0) - erfc(-z);
    }
    if z < F::lit(SERIES_LIMIT) {
        F::one() - erf_series(z)
    } else if z.is_infinite() {
        F::zero()
    } else {
        erfc_fraction(z)
    }
}

/// Standard Gaussian complementary CDF.
pub fn q_function<F: Scalar>(x: F) -> F {
    F::lit(0.5) * erfc(x / F::SQRT_2())
}

/// Standard Gaussian density.
pub fn gaussian_pdf<F: Scalar>(x: F) -> F {
    (-F::lit(0.5) * x * x).exp() / (F::TAU()).sqrt()
}

/// Inverse of [`q_function`] on `(0, 1)`.
///
/// Newton iterations on `Q(x) - p` safeguarded by a shrinking bracket.
pub fn q_inverse<F: Scalar>(p: F) -> F {
    if p <= F::zero() {
        return F::infinity();
    }
    if p >= F::one() {
        return F::neg_infinity();
    }
    let (mut lo, mut hi) = (F::lit(-40.0), F::lit(40.0));
    let mut x = F::zero();
    for _ in 0..200 {
        let r = q_function(x) - p;
        if r > F::zero() {
            lo = x;
        } else {
            hi = x;
        }
        let dens = gaussian_pdf(x);
        let mut next = x + r / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = F::lit(0.5) * (lo + hi);
        }
        if (next - x).abs() <= F::epsilon() * (F::one() + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}
