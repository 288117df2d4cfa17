#![allow(dead_code)]

pub mod invariants;

use coopsense::channel::MobilityModel;
use coopsense::phy::Scenario;

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

/// Mean gains of -80 dB (reporting) and -30 dB (sensing), each with a
/// 5 dB spread relative to the squared mean.
pub fn reference_mobility() -> MobilityModel<f64> {
    let (lr, ls) = (db(-80.0), db(-30.0));
    MobilityModel::new(lr, db(5.0) * lr * lr, ls, db(5.0) * ls * ls).unwrap()
}

/// Primary power 30 dB, per-node budget 90 dB.
pub fn reference_scenario(k: usize, beta: f64) -> Scenario<f64> {
    Scenario::uniform(k, db(30.0), db(90.0), beta).unwrap()
}

/// Standard normal upper tail by composite Gauss-Legendre quadrature of
/// the density, independent of the library's erfc.
pub fn q_quadrature(x: f64) -> f64 {
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let (sign, a) = if x < 0.0 { (-1.0, -x) } else { (1.0, x) };
    // integrate the density over [a, a + 40] in small panels
    let n = 8000;
    let h = 40.0 / n as f64;
    let mut s = 0.0;
    for i in 0..n {
        let mid = a + (i as f64 + 0.5) * h;
        for (z, w) in NODES {
            s += w * phi(mid + 0.5 * h * z);
        }
    }
    let tail = 0.5 * h * s;
    if sign > 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// Closed-form fused moments written out directly from per-node SNRs.
pub fn closed_form_moments(snr_r: &[f64], snr_s: &[f64]) -> (f64, f64, f64, f64) {
    let k = snr_r.len() as f64;
    let mu0 = snr_r.iter().sum::<f64>() / k;
    let mu1 = snr_r.iter().zip(snr_s).map(|(r, s)| r * (s + 1.0)).sum::<f64>() / k;
    let var0 = (snr_r.iter().map(|r| 3.0 * r * r).sum::<f64>() + 1.0) / (k * k);
    let var1 = (snr_r
        .iter()
        .zip(snr_s)
        .map(|(r, s)| 3.0 * r * r * (s * s + 2.0 * s / 3.0 + 1.0))
        .sum::<f64>()
        + 1.0)
        / (k * k);
    (mu0, var0, mu1, var1)
}

pub fn pe(m: (f64, f64, f64, f64), t: f64, beta: f64) -> f64 {
    let (mu0, var0, mu1, var1) = m;
    q_quadrature((mu1 - t) / var1.sqrt()) + beta * q_quadrature((t - mu0) / var0.sqrt())
}
