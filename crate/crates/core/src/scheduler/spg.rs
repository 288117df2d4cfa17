//! Spectral projected gradient ascent on a box `[0, ub]`.
//!
//! Barzilai-Borwein steps with a nonmonotone Armijo safeguard.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpgOptions<F> {
    pub max_iter: usize,
    /// Stop when the projected gradient step has sup-norm below this.
    pub tol: F,
    /// Length of the nonmonotone reference window.
    pub memory: usize,
}

impl<F: Scalar> Default for SpgOptions<F> {
    fn default() -> Self {
        Self {
            max_iter: 400,
            tol: F::lit(1e-10),
            memory: 8,
        }
    }
}

#[derive(Debug, Clone)]
#[allow(dead_code)]
pub struct SpgResult<F> {
    pub x: Vec<F>,
    pub value: F,
    pub iterations: usize,
    pub converged: bool,
}

fn project<F: Scalar>(x: &mut [F], ub: &[F]) {
    for (xi, &u) in x.iter_mut().zip(ub) {
        *xi = xi.max(F::zero()).min(u);
    }
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Maximizes `obj` over the box. `obj` returns the value and gradient.
pub fn maximize<F: Scalar>(
    mut obj: impl FnMut(&[F]) -> (F, Vec<F>),
    start: &[F],
    ub: &[F],
    opts: &SpgOptions<F>,
) -> SpgResult<F> {
    let n = start.len();
    let mut x = start.to_vec();
    project(&mut x, ub);
    let (mut f, mut g) = obj(&x);
    let mut hist = vec![f];
    let t_min = F::lit(1e-12);
    let t_max = F::lit(1e12);
    let mut t = F::one();
    let mut trial = vec![F::zero(); n];
    let mut dir = vec![F::zero(); n];
    let sigma = F::lit(1e-4);

    for it in 0..opts.max_iter {
        let mut pg = F::zero();
        for i in 0..n {
            let p = (x[i] + g[i]).max(F::zero()).min(ub[i]);
            pg = pg.max((p - x[i]).abs());
        }
        if pg <= opts.tol {
            return SpgResult {
                x,
                value: f,
                iterations: it,
                converged: true,
            };
        }
        for i in 0..n {
            dir[i] = (x[i] + t * g[i]).max(F::zero()).min(ub[i]) - x[i];
        }
        let gd = dot(&g, &dir);
        let f_ref = hist.iter().copied().fold(F::infinity(), F::min);
        let mut theta = F::one();
        let accepted = loop {
            for i in 0..n {
                trial[i] = x[i] + theta * dir[i];
            }
            project(&mut trial, ub);
            let (ft, gt) = obj(&trial);
            if ft.is_finite() && ft >= f_ref + sigma * theta * gd {
                break Some((ft, gt));
            }
            theta = theta * F::lit(0.5);
            if theta < F::lit(1e-14) {
                break None;
            }
        };
        let Some((ft, gt)) = accepted else {
            return SpgResult {
                x,
                value: f,
                iterations: it,
                converged: false,
            };
        };
        let mut ss = F::zero();
        let mut sy = F::zero();
        for i in 0..n {
            let s = trial[i] - x[i];
            let y = g[i] - gt[i];
            ss += s * s;
            sy += s * y;
        }
        t = if sy > F::zero() {
            (ss / sy).max(t_min).min(t_max)
        } else {
            t_max
        };
        x.copy_from_slice(&trial);
        f = ft;
        g = gt;
        hist.push(f);
        if hist.len() > opts.memory {
            hist.remove(0);
        }
    }
    SpgResult {
        x,
        value: f,
        iterations: opts.max_iter,
        converged: false,
    }
}
