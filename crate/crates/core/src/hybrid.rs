//! The hybrid factorization `ζ(1/2+it) ≈ P_X(1/2+it) Z_X(1/2+it)`.
//!
//! `Z_X` has two evaluation paths: the quotient `ζ / P_X`, which is exact up
//! to the `1 + O(1/log X)` factor being measured, and the direct sum over
//! zeros near `t`, which needs a window and reports an estimate of what the
//! window leaves out.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::arith::sieve_primes;
use crate::error::{domain, Error, Result};
use crate::grid::PhasorSum;
use crate::special::{big_u, SmoothingKernel};
use crate::zeta::{zeta_critical, ZeroTable};

/// Default half-width of the zero window for the direct path.
pub const DEFAULT_WINDOW: f64 = 50.0;
/// Residuals within this distance of an ordinate are excluded.
pub const ZERO_EXCLUSION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Part {
    Full,
    Real,
    Imag,
}

impl Part {
    pub fn select(self, z: Complex64) -> Complex64 {
        match self {
            Part::Full => z,
            Part::Real => Complex64::new(z.re, 0.0),
            Part::Imag => Complex64::new(0.0, z.im),
        }
    }

    /// Magnitude of the selected part.
    pub fn magnitude(self, z: Complex64) -> f64 {
        match self {
            Part::Full => z.norm(),
            Part::Real => z.re.abs(),
            Part::Imag => z.im.abs(),
        }
    }
}

/// `Σ_{n≤X} Λ(n) / (n^{1/2+it} log n)` as a sum over prime powers,
/// each term `p^{-m/2}/m · e^{-itm log p}`.
#[derive(Debug, Clone)]
pub struct PrimeSum {
    x: f64,
    terms: PhasorSum,
}

impl PrimeSum {
    pub fn new(x: f64) -> Result<Self> {
        if !(x >= 2.0) || !x.is_finite() {
            return domain(format!("prime sum needs X >= 2, got {x}"));
        }
        let table = sieve_primes(x.floor() as u64)?;
        let mut coefs = Vec::new();
        let mut lambdas = Vec::new();
        for (q, _, m) in table.prime_powers() {
            coefs.push(1.0 / ((q as f64).sqrt() * m as f64));
            lambdas.push((q as f64).ln());
        }
        Ok(PrimeSum {
            x,
            terms: PhasorSum::new(coefs, lambdas),
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms.eval(t)
    }

    pub fn eval_grid(&self, t0: f64, h: f64, count: usize) -> Vec<Complex64> {
        self.terms.eval_grid(t0, h, count)
    }
}

/// Convenience wrapper around [`PrimeSum`] for a single point.
pub fn prime_sum(t: f64, x: f64, part: Part) -> Result<Complex64> {
    Ok(part.select(PrimeSum::new(x)?.eval(t)))
}

/// A complex number kept as `exp(log_abs + i arg)` so large powers of
/// `P_X` never overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogComplex {
    pub log_abs: f64,
    pub arg: f64,
}

impl LogComplex {
    pub fn from_log(w: Complex64) -> Self {
        LogComplex {
            log_abs: w.re,
            arg: w.im,
        }
    }

    /// The value itself; may overflow to infinity.
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_abs.exp(), self.arg)
    }

    pub fn abs(&self) -> f64 {
        self.log_abs.exp()
    }
}

/// `P_X(1/2+it)^k = exp(k · prime_sum)`.
pub fn euler_product_p(t: f64, x: f64, k: f64) -> Result<LogComplex> {
    let s = PrimeSum::new(x)?.eval(t);
    Ok(LogComplex::from_log(s * k))
}

/// `ζ(1/2+it) / P_X(1/2+it)`.
pub fn hadamard_z_quotient(t: f64, x: f64) -> Result<Complex64> {
    let s = PrimeSum::new(x)?.eval(t);
    Ok(zeta_critical(t)? * (-s).exp())
}

/// Direct evaluation of `Z_X` from zeros in a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZDirect {
    pub value: Complex64,
    /// Zeros (including reflections) that entered the sum.
    pub zeros_used: usize,
    /// Heuristic size of the omitted `Σ U` beyond the window.
    pub tail_estimate: f64,
}

/// Kernel and window shared by many direct evaluations at the same `X`.
#[derive(Debug, Clone)]
pub struct ZDirectEvaluator {
    x: f64,
    log_x: f64,
    kernel: SmoothingKernel,
    window: f64,
}

impl ZDirectEvaluator {
    pub fn new(x: f64, window: f64) -> Result<Self> {
        if !(x >= 2.0) {
            return domain(format!("Z_X needs X >= 2, got {x}"));
        }
        if !(window > 0.0) {
            return domain(format!("window must be positive, got {window}"));
        }
        Ok(ZDirectEvaluator {
            x,
            log_x: x.ln(),
            kernel: SmoothingKernel::new(x)?,
            window,
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// `U(iy log X)`.
    pub fn u_term(&self, y: f64) -> Result<Complex64> {
        big_u(Complex64::new(0.0, y * self.log_x), &self.kernel)
    }

    /// Density of zeros times the `1/(|y| log X (1-1/X))` decay of `U`,
    /// integrated over `window < |y| < t`, plus the beyond-`t` shell
    /// (zeros up to `2t`, same majorant).
    pub fn tail_estimate(&self, t: f64) -> f64 {
        let t = t.abs().max(2.0 * PI + 1.0);
        let density = (t / (2.0 * PI)).ln() / (2.0 * PI);
        let scale = 1.0 / ((1.0 - 1.0 / self.x) * self.log_x);
        let inner = if t > self.window { 2.0 * density * (t / self.window).ln() * scale } else { 0.0 };
        let shell = 2.0 * density * 2f64.ln() * scale;
        inner + shell
    }

    pub fn eval(&self, t: f64, zeros: &ZeroTable) -> Result<ZDirect> {
        let tt = t.abs();
        let lo = (tt - self.window).max(0.0);
        let hi = tt + self.window;
        zeros.require(lo, hi)?;
        let mut sum = Complex64::new(0.0, 0.0);
        let mut used = 0;
        for &g in zeros.in_range(lo, hi) {
            sum += self.u_term(tt - g)?;
            used += 1;
        }
        // reflected ordinates -γ within the window
        if tt < self.window {
            for &g in zeros.in_range(0.0, self.window - tt) {
                sum += self.u_term(tt + g)?;
                used += 1;
            }
        }
        let value = (-sum).exp();
        Ok(ZDirect {
            value: if t < 0.0 { value.conj() } else { value },
            zeros_used: used,
            tail_estimate: self.tail_estimate(tt),
        })
    }
}

/// `exp(-Σ_{|γ-t|≤window} U(i(t-γ) log X))`, reflections included.
pub fn hadamard_z_direct(t: f64, x: f64, zeros: &ZeroTable, window: f64) -> Result<ZDirect> {
    ZDirectEvaluator::new(x, window)?.eval(t, zeros)
}

/// What to do when `X > t^{1/3}`, outside the range where the hybrid formula
/// is stated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum RangePolicy {
    #[default]
    Enforce,
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub t: f64,
    pub value: f64,
    pub in_range: bool,
    pub tail_estimate: f64,
}

/// `|ζ / (P_X · Z_X^direct) - 1|` at one ordinate away from zeros.
pub fn hybrid_residual(
    t: f64,
    x: f64,
    zeros: &ZeroTable,
    window: f64,
    policy: RangePolicy,
) -> Result<Residual> {
    let ev = ZDirectEvaluator::new(x, window)?;
    let ps = PrimeSum::new(x)?;
    residual_with(&ev, &ps, t, zeros, policy)
}

fn residual_with(
    ev: &ZDirectEvaluator,
    ps: &PrimeSum,
    t: f64,
    zeros: &ZeroTable,
    policy: RangePolicy,
) -> Result<Residual> {
    let in_range = ev.x <= t.abs().cbrt();
    if !in_range && policy == RangePolicy::Enforce {
        return Err(Error::UnsupportedRange(format!(
            "X = {} exceeds t^(1/3) = {:.4} at t = {t}",
            ev.x,
            t.abs().cbrt()
        )));
    }
    let tt = t.abs();
    zeros.require((tt - ZERO_EXCLUSION).max(zeros.covered().0), tt + ZERO_EXCLUSION)?;
    if let Some(g) = zeros.in_range(tt - ZERO_EXCLUSION, tt + ZERO_EXCLUSION).first() {
        return domain(format!("t = {t} lies within {ZERO_EXCLUSION} of the zero {g}"));
    }
    let zd = ev.eval(tt, zeros)?;
    let z = zeta_critical(tt)?;
    let s = ps.eval(tt);
    let ratio = z * (-s).exp() / zd.value;
    Ok(Residual {
        t,
        value: (ratio - 1.0).norm(),
        in_range,
        tail_estimate: zd.tail_estimate,
    })
}

/// Residuals on `t0 + j h`, skipping points near zeros.
pub fn residual_scan(
    t0: f64,
    t1: f64,
    h: f64,
    x: f64,
    zeros: &ZeroTable,
    window: f64,
    policy: RangePolicy,
) -> Result<Vec<Residual>> {
    if !(h > 0.0) || !(t1 > t0) {
        return domain("residual scan needs t1 > t0 and h > 0");
    }
    let ev = ZDirectEvaluator::new(x, window)?;
    let ps = PrimeSum::new(x)?;
    let n = ((t1 - t0) / h).floor() as usize + 1;
    let pts: Vec<f64> = (0..n)
        .map(|j| t0 + j as f64 * h)
        .filter(|&t| zeros.in_range(t - ZERO_EXCLUSION, t + ZERO_EXCLUSION).is_empty())
        .collect();
    pts.par_iter().map(|&t| residual_with(&ev, &ps, t, zeros, policy)).collect()
}

/// All hybrid quantities at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridPoint {
    pub t: f64,
    pub x: f64,
    pub p_value: LogComplex,
    pub z_quotient: Complex64,
    pub z_direct: Option<ZDirect>,
    pub zeta: Complex64,
}

pub fn hybrid_point(t: f64, x: f64, zeros: Option<&ZeroTable>, window: f64) -> Result<HybridPoint> {
    let s = PrimeSum::new(x)?.eval(t);
    let zeta = zeta_critical(t)?;
    let z_direct = match zeros {
        Some(z) => Some(hadamard_z_direct(t, x, z, window)?),
        None => None,
    };
    Ok(HybridPoint {
        t,
        x,
        p_value: LogComplex::from_log(s),
        z_quotient: zeta * (-s).exp(),
        z_direct,
        zeta,
    })
}

/// Median of a sample (average of the middle pair for even length).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::find_zeros;

    #[test]
    fn prime_sum_examples() {
        let s = prime_sum(0.0, 3.0, Part::Full).unwrap();
        assert!((s.re - (0.5f64.sqrt() + (1.0f64 / 3.0).sqrt())).abs() < 1e-14);
        assert!((s.re - 1.28446).abs() < 1e-5);
        let t = 17.3;
        let s2 = prime_sum(t, 2.0, Part::Full).unwrap();
        let direct = Complex64::from_polar(2f64.powf(-0.5), -t * 2f64.ln());
        assert!((s2 - direct).norm() < 1e-14);
        // prime powers 4 and 8 carry weights 1/2 and 1/3
        let s8 = prime_sum(0.0, 8.0, Part::Full).unwrap().re;
        let want = 2f64.powf(-0.5) + 3f64.powf(-0.5) + 0.25 + 5f64.powf(-0.5) + 7f64.powf(-0.5) + 8f64.powf(-0.5) / 3.0;
        assert!((s8 - want).abs() < 1e-14);
        assert!(prime_sum(1.0, 1.5, Part::Real).is_err());
    }

    #[test]
    fn euler_product_examples() {
        let p0 = euler_product_p(5.0, 30.0, 0.0).unwrap().value();
        assert!((p0 - 1.0).norm() < 1e-15);
        let p = euler_product_p(0.0, 3.0, 1.0).unwrap().value();
        assert!((p.re - 1.28446f64.exp()).abs() < 1e-4 && (p.re - 3.6127).abs() < 1e-3);
        for &t in &[3.3, 77.0, 1234.5] {
            let a = euler_product_p(t, 50.0, 1.0).unwrap();
            let b = euler_product_p(t, 50.0, 2.0).unwrap();
            assert!((b.abs() - a.abs().powi(2)).abs() < 1e-10 * b.abs());
            let s = prime_sum(t, 50.0, Part::Real).unwrap().re;
            assert!((b.log_abs - 2.0 * s).abs() < 1e-12);
        }
        // huge k stays finite in log form
        let big = euler_product_p(0.0, 1000.0, 500.0).unwrap();
        assert!(big.log_abs.is_finite() && big.value().re.is_infinite());
    }

    #[test]
    fn quotient_examples() {
        let t = 100.0;
        let q = hadamard_z_quotient(t, 2.0).unwrap();
        let want = zeta_critical(t).unwrap() * (-Complex64::from_polar(2f64.powf(-0.5), -t * 2f64.ln())).exp();
        assert!((q - want).norm() < 1e-12);
        let q30 = hadamard_z_quotient(t, 30.0).unwrap();
        assert!(q30.norm() > 0.0 && q30.is_finite());
        let g1 = 14.134725141734693;
        assert!(hadamard_z_quotient(g1, 10.0).unwrap().norm() < 1e-4);
    }

    #[test]
    fn direct_path_basics() {
        let zeros = find_zeros(0.0, 200.0).unwrap();
        // no zero within a tiny window around t = 100
        let empty = hadamard_z_direct(100.0, 10.0, &zeros, 0.2).unwrap();
        assert_eq!(empty.zeros_used, 0);
        assert_eq!(empty.value, Complex64::new(1.0, 0.0));
        // shrinking toward the first zero
        let g1 = zeros.ordinates()[0];
        let far = hadamard_z_direct(g1 + 0.3, 30.0, &zeros, 20.0).unwrap().value.norm();
        let near = hadamard_z_direct(g1 + 0.01, 30.0, &zeros, 20.0).unwrap().value.norm();
        assert!(near < far && near < 0.2, "near {near} far {far}");
        // conjugate symmetry
        let a = hadamard_z_direct(60.0, 10.0, &zeros, 20.0).unwrap().value;
        let b = hadamard_z_direct(-60.0, 10.0, &zeros, 20.0).unwrap().value;
        assert!((a - b.conj()).norm() < 1e-14);
        assert!(matches!(
            hadamard_z_direct(190.0, 10.0, &zeros, 50.0),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn residual_range_policy() {
        let zeros = find_zeros(0.0, 200.0).unwrap();
        // 100^(1/3) < 10
        let t = 101.0;
        assert!(hybrid_residual(t, 10.0, &zeros, 50.0, RangePolicy::Enforce).is_err());
        let r = hybrid_residual(t, 10.0, &zeros, 50.0, RangePolicy::Flag).unwrap();
        assert!(!r.in_range && r.value.is_finite());
        let ok = hybrid_residual(t, 4.0, &zeros, 50.0, RangePolicy::Enforce).unwrap();
        assert!(ok.in_range);
        let g = zeros.ordinates()[20];
        assert!(hybrid_residual(g + 0.01, 4.0, &zeros, 50.0, RangePolicy::Enforce).is_err());
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
