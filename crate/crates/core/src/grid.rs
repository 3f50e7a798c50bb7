//! Batch evaluation of oscillatory sums `Σ c_n e^{-i t λ_n}` on uniform
//! grids `t_j = t0 + j h`.
//!
//! Each chunk of the grid seeds its phasors `e^{-i t λ_n}` exactly and then
//! advances them by repeated multiplication with `e^{-i h λ_n}`; this replaces
//! a `sin_cos` per term and point by one complex multiply. Chunks are short
//! enough that the accumulated rotation error stays near machine precision.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

/// Grid points per independently seeded chunk.
pub const CHUNK: usize = 256;

/// `e^{-i t λ}` with the phase reduced modulo 2π before the trig call.
#[inline]
pub fn phasor(t: f64, lambda: f64) -> Complex64 {
    let phase = (t * lambda).rem_euclid(TAU);
    let (s, c) = phase.sin_cos();
    Complex64::new(c, -s)
}

/// A finite sum `Σ c_n e^{-i t λ_n}` with real coefficients.
#[derive(Debug, Clone, Default)]
pub struct PhasorSum {
    coefs: Vec<f64>,
    lambdas: Vec<f64>,
}

impl PhasorSum {
    pub fn new(coefs: Vec<f64>, lambdas: Vec<f64>) -> Self {
        assert_eq!(coefs.len(), lambdas.len(), "coefficient/frequency length mismatch");
        PhasorSum { coefs, lambdas }
    }

    pub fn len(&self) -> usize {
        self.coefs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefs.is_empty()
    }

    pub fn coefs(&self) -> &[f64] {
        &self.coefs
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Pointwise evaluation, summed in storage order.
    pub fn eval(&self, t: f64) -> Complex64 {
        self.coefs
            .iter()
            .zip(&self.lambdas)
            .map(|(&c, &l)| phasor(t, l) * c)
            .sum()
    }

    /// Values at `t0 + j h` for `j < count`.
    pub fn eval_grid(&self, t0: f64, h: f64, count: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); count];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, block)| {
            let start = t0 + (ci * CHUNK) as f64 * h;
            let mut z: Vec<Complex64> = self
                .coefs
                .iter()
                .zip(&self.lambdas)
                .map(|(&c, &l)| phasor(start, l) * c)
                .collect();
            let w: Vec<Complex64> = self.lambdas.iter().map(|&l| phasor(h, l)).collect();
            for slot in block.iter_mut() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (zn, wn) in z.iter_mut().zip(&w) {
                    acc += *zn;
                    *zn *= *wn;
                }
                *slot = acc;
            }
        });
        out
    }
}

/// Map `f` over the grid points in parallel, keeping order.
pub fn map_grid<T, F>(t0: f64, h: f64, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(|j| f(t0 + j as f64 * h)).collect()
}

/// Worker count for the global pool, honoring `HZETA_WORKERS` once.
pub fn configure_workers(workers: Option<usize>) {
    let n = workers.or_else(|| std::env::var("HZETA_WORKERS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = n {
        // a second initialization is harmless and ignored
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_matches_pointwise() {
        let lambdas: Vec<f64> = (1..60).map(|n| (n as f64).ln()).collect();
        let coefs: Vec<f64> = (1..60).map(|n| 1.0 / (n as f64).sqrt()).collect();
        let s = PhasorSum::new(coefs, lambdas);
        let (t0, h) = (123_456.789, 0.0173);
        let vals = s.eval_grid(t0, h, 1000);
        for j in (0..1000).step_by(37) {
            let direct = s.eval(t0 + j as f64 * h);
            assert!((vals[j] - direct).norm() < 1e-9, "j={j}");
        }
    }

    #[test]
    fn empty_sum_is_zero() {
        let s = PhasorSum::default();
        assert!(s.eval_grid(0.0, 1.0, 10).iter().all(|z| z.norm() == 0.0));
    }
}
