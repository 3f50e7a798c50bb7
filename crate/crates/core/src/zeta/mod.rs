//! ζ on the critical line, the Hardy `Z` function, zero location and `S(t)`.
//!
//! Below `t = 50` we use Euler–Maclaurin summation with Bernoulli terms up to
//! `B_30`; above, the Riemann–Siegel main sum with the corrections `C0..C4`.
//! With four corrections the remainder is `O(t^{-11/4})`, i.e. below `1e-6`
//! already at `t = 50` and far below it at the heights used in practice.

mod rs_coeffs;
mod zeros;

pub use zeros::{
    find_zeros, read_zeros, s_of_t, write_zeros, ZeroSource, ZeroTable, GRID_STEP, REFINE_WIDTH,
};

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::grid::{phasor, CHUNK};
use crate::special::theta;

/// Largest supported height.
pub const T_MAX: f64 = 1e7;

/// Switch from Euler–Maclaurin to Riemann–Siegel.
pub const RS_CROSSOVER: f64 = 50.0;

const BERNOULLI: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174_611.0 / 330.0,
    854_513.0 / 138.0,
    -236_364_091.0 / 2730.0,
    8_553_103.0 / 6.0,
    -23_749_461_029.0 / 870.0,
    8_615_841_276_005.0 / 14322.0,
];

fn check_range(t: f64) -> Result<()> {
    if !t.is_finite() || t.abs() > T_MAX {
        return Err(Error::UnsupportedRange(format!(
            "critical-line evaluation supports |t| <= {T_MAX:e}, got {t}"
        )));
    }
    Ok(())
}

/// ζ(1/2 + it) by Euler–Maclaurin summation.
pub fn zeta_euler_maclaurin(t: f64) -> Complex64 {
    let s = Complex64::new(0.5, t);
    let n = (0.5 * t.abs()).ceil() as usize + 20;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..n {
        let lk = (k as f64).ln();
        sum += phasor(t, lk) / (k as f64).sqrt();
    }
    let nf = n as f64;
    let n_s = phasor(t, nf.ln()) / nf.sqrt(); // N^{-s}
    sum += n_s * nf / (s - 1.0) + n_s * 0.5;
    // Σ B_{2j}/(2j)! s(s+1)...(s+2j-2) N^{-s-2j+1}
    let mut poch = s; // s (s+1) ... (s+2j-2)
    let mut npow = n_s / nf; // N^{-s-1}
    let mut fact = 2.0; // (2j)!
    for (j, b) in BERNOULLI.iter().enumerate() {
        let term = poch * npow * (b / fact);
        sum += term;
        let jj = (j + 1) as f64;
        poch *= (s + (2.0 * jj - 1.0)) * (s + 2.0 * jj);
        npow /= nf * nf;
        fact *= (2.0 * jj + 1.0) * (2.0 * jj + 2.0);
    }
    sum
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Riemann–Siegel remainder `(-1)^{N-1} a^{1/2} Σ_k C_k(p) a^k`, `a = (2π/t)^{1/2}`.
fn rs_remainder(t: f64, n: usize, p: f64) -> f64 {
    use rs_coeffs::{C0, C1, C2, C3, C4};
    let a = (TAU / t).sqrt();
    let x = p - 0.5;
    let series = horner(&C0, x)
        + a * (horner(&C1, x) + a * (horner(&C2, x) + a * (horner(&C3, x) + a * horner(&C4, x))));
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    sign * a.sqrt() * series
}

/// Riemann–Siegel evaluation of `Z(t)` for `t >= 2π`.
fn hardy_z_rs(t: f64) -> f64 {
    let tau = (t / TAU).sqrt();
    let n = tau.floor() as usize;
    let th = theta(t);
    let mut main = 0.0;
    for k in 1..=n {
        let lk = (k as f64).ln();
        main += (th - t * lk).rem_euclid(TAU).cos() / (k as f64).sqrt();
    }
    2.0 * main + rs_remainder(t, n, tau - n as f64)
}

/// `Z(t) = e^{iθ(t)} ζ(1/2 + it)`, real for real `t`; `Z` is even.
pub fn hardy_z(t: f64) -> Result<f64> {
    check_range(t)?;
    Ok(hardy_z_unchecked(t.abs()))
}

pub(crate) fn hardy_z_unchecked(t: f64) -> f64 {
    if t < RS_CROSSOVER {
        (Complex64::from_polar(1.0, theta(t)) * zeta_euler_maclaurin(t)).re
    } else {
        hardy_z_rs(t)
    }
}

/// ζ(1/2 + it) for `|t| <= 1e7`; negative `t` by conjugate symmetry.
pub fn zeta_critical(t: f64) -> Result<Complex64> {
    check_range(t)?;
    if t < 0.0 {
        return Ok(zeta_critical(-t)?.conj());
    }
    Ok(zeta_unchecked(t))
}

fn zeta_unchecked(t: f64) -> Complex64 {
    if t < RS_CROSSOVER {
        zeta_euler_maclaurin(t)
    } else {
        Complex64::from_polar(1.0, -theta(t)) * hardy_z_rs(t)
    }
}

/// `Z(t0 + j h)` for `j < count`, using phasor rotation for the main sum.
pub fn hardy_z_grid(t0: f64, h: f64, count: usize) -> Result<Vec<f64>> {
    let vals = grid_impl(t0, h, count)?;
    Ok(vals.into_iter().map(|(z, _)| z).collect())
}

/// ζ(1/2 + i(t0 + j h)) for `j < count`.
pub fn zeta_grid(t0: f64, h: f64, count: usize) -> Result<Vec<Complex64>> {
    let vals = grid_impl(t0, h, count)?;
    Ok(vals
        .into_iter()
        .map(|(z, th)| Complex64::from_polar(1.0, -th) * z)
        .collect())
}

/// `(Z(t), θ(t))` pairs on a grid with `t0 >= 0`.
fn grid_impl(t0: f64, h: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(h > 0.0) || !(t0 >= 0.0) {
        return Err(Error::Domain(format!("grid needs t0 >= 0 and h > 0, got t0={t0}, h={h}")));
    }
    check_range(t0 + (count - 1) as f64 * h)?;
    let mut out = vec![(0.0, 0.0); count];
    out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, block)| {
        let first = ci * CHUNK;
        let start = t0 + first as f64 * h;
        let end = t0 + (first + block.len() - 1) as f64 * h;
        if end < RS_CROSSOVER {
            for (j, slot) in block.iter_mut().enumerate() {
                let t = t0 + (first + j) as f64 * h;
                *slot = (hardy_z_unchecked(t), theta(t));
            }
            return;
        }
        let n_max = (end / TAU).sqrt().floor() as usize;
        let mut z: Vec<Complex64> = (1..=n_max)
            .map(|k| phasor(start, (k as f64).ln()) / (k as f64).sqrt())
            .collect();
        let w: Vec<Complex64> = (1..=n_max).map(|k| phasor(h, (k as f64).ln())).collect();
        for (j, slot) in block.iter_mut().enumerate() {
            let t = t0 + (first + j) as f64 * h;
            let th = theta(t);
            if t < RS_CROSSOVER {
                *slot = (hardy_z_unchecked(t), th);
            } else {
                let tau = (t / TAU).sqrt();
                let n = (tau.floor() as usize).min(n_max);
                let partial: Complex64 = z[..n].iter().sum();
                let zval = 2.0 * (Complex64::from_polar(1.0, th) * partial).re
                    + rs_remainder(t, n, tau - n as f64);
                *slot = (zval, th);
            }
            for (zk, wk) in z.iter_mut().zip(&w) {
                *zk *= *wk;
            }
        }
    });
    Ok(out)
}

/// `θ(t)/π + 1`, the smooth part of the zero-counting function.
pub fn smooth_count(t: f64) -> f64 {
    theta(t) / PI + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    // ζ(1/2+it) reference values computed with mpmath (30 digits)
    const REF: &[(f64, f64, f64)] = &[
        (0.0, -1.46035450880958681, 0.0),
        (10.0, 1.54489522029675277, -0.115336465271273375),
        (30.0, -0.1206422875900437, -0.583691214763706289),
        (50.0, -0.081712108320979975, 0.330792194038661296),
        (100.0, 2.69261988568132409, -0.0203860296025981618),
        (137.5, -0.143379220187063402, -2.38349299054667217),
        (1000.0, 0.356334367194396055, 0.931997831232993665),
        (1e4, -0.339373802638834458, -0.0370915059732060315),
        (1e5, 1.07303201485775313, 5.78084854436350398),
        (1e6, 0.0760890697382271, 2.80510210101929896),
    ];

    #[test]
    fn matches_reference_values() {
        for &(t, re, im) in REF {
            let z = zeta_critical(t).unwrap();
            let err = (z - Complex64::new(re, im)).norm();
            assert!(err < 1e-6, "t={t} got {z} err {err:e}");
        }
    }

    #[test]
    fn euler_maclaurin_and_rs_agree_near_crossover() {
        for i in 0..200 {
            let t = 50.0 + i as f64 * 0.75;
            let em = zeta_euler_maclaurin(t);
            let rs = zeta_unchecked(t);
            assert!((em - rs).norm() < 1e-5, "t={t} diff {:e}", (em - rs).norm());
        }
    }

    #[test]
    fn conjugate_symmetry_and_range() {
        let a = zeta_critical(77.7).unwrap();
        let b = zeta_critical(-77.7).unwrap();
        assert_eq!(a, b.conj());
        assert!(zeta_critical(2e7).is_err());
        assert!(hardy_z(f64::NAN).is_err());
    }

    #[test]
    fn hardy_z_is_real_rotation() {
        for i in 0..60 {
            let t = 3.0 + i as f64 * 4.1;
            let z = hardy_z(t).unwrap();
            let zeta = zeta_critical(t).unwrap();
            assert!((z * z - zeta.norm_sqr()).abs() < 1e-8, "t={t}");
            let rotated = Complex64::from_polar(1.0, theta(t)) * zeta;
            assert!(rotated.im.abs() < 1e-8 * (1.0 + rotated.re.abs()), "t={t}");
        }
        let z0 = hardy_z(0.0).unwrap();
        assert!((z0 + 1.46035450880958681).abs() < 1e-10);
        assert!(hardy_z(14.0).unwrap() * hardy_z(14.2).unwrap() < 0.0);
    }

    #[test]
    fn grid_matches_pointwise() {
        for &(t0, h) in &[(0.0, 0.37), (40.0, 0.05), (99_990.0, 0.013)] {
            let g = zeta_grid(t0, h, 700).unwrap();
            let zg = hardy_z_grid(t0, h, 700).unwrap();
            for j in (0..700).step_by(29) {
                let t = t0 + j as f64 * h;
                let direct = zeta_critical(t).unwrap();
                assert!((g[j] - direct).norm() < 1e-9, "t={t}");
                assert!((zg[j] - hardy_z(t).unwrap()).abs() < 1e-9, "t={t}");
            }
        }
    }
}
