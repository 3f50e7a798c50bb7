//! The prime sum as a convolution of `S(t)`, and the size of the prime sum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::GridSpec;
use crate::error::{domain, Result};
use crate::hybrid::PrimeSum;
use crate::special::theta;
use crate::zeta::ZeroTable;

const PIECE: f64 = 0.25;

// 16-point Gauss–Legendre on [-1, 1], nodes and weights for the positive half
const GL_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_095,
];

fn gauss_legendre<F: Fn(f64) -> Complex64>(a: f64, b: f64, f: F) -> Complex64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = Complex64::new(0.0, 0.0);
    for (x, w) in GL_X.iter().zip(GL_W) {
        s += w * (f(c - h * x) + f(c + h * x));
    }
    s * h
}

/// `(1 - X^{-iu}) / u`, continuous at `u = 0` with value `i log X`.
pub fn st_kernel(u: f64, log_x: f64) -> Complex64 {
    if u == 0.0 {
        return Complex64::new(0.0, log_x);
    }
    let h = u * log_x;
    if h.abs() < 1e-8 {
        return Complex64::new(0.5 * h * log_x, log_x);
    }
    let s = (0.5 * h).sin();
    Complex64::new(2.0 * s * s, h.sin()) / u
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StIdentity {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub diff: f64,
    pub error_budget: f64,
    /// Implied constants used in the error budget.
    pub constants: (f64, f64),
}

/// `X^{1/2}(log X + log₃T/log X)/Y + (log T/log₂T)(Y^{-1/2} + X^{C/log₂T}/Y · 1_{X>(log T)^A})`
/// with every implied constant (and `C`, `A`) equal to 1.
pub fn st_error_budget(x: f64, y: f64, t: f64) -> f64 {
    let lx = x.ln();
    let l1 = t.ln();
    let l2 = l1.ln();
    let l3 = l2.max(1.0).ln();
    let indicator = if x > l1 { 1.0 } else { 0.0 };
    x.sqrt() * (lx + l3 / lx) / y + (l1 / l2) * (y.powf(-0.5) + x.powf(1.0 / l2) / y * indicator)
}

/// Compare the prime sum at `t` with `∫_{t-Y}^{t+Y} S(y)(1 - X^{-i(t-y)})/(t-y) dy`.
///
/// `S` is smooth between ordinates, so the integral is split at every zero
/// and at `y = t`, then into pieces of length at most 1/4.
pub fn st_identity_check(t: f64, x: f64, y: f64, zeros: &ZeroTable) -> Result<StIdentity> {
    if !(x >= 2.0) {
        return domain(format!("X must be at least 2, got {x}"));
    }
    if !(y > 0.0) || y > t / 2.0 {
        return domain(format!("need 0 < Y <= t/2, got Y = {y}, t = {t}"));
    }
    let (lo, hi) = (t - y, t + y);
    zeros.require(lo, hi)?;
    let log_x = x.ln();

    let mut cuts = vec![lo];
    cuts.extend(zeros.in_range(lo, hi).iter().copied().filter(|&g| g > lo && g < hi));
    cuts.push(t);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut rhs = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        // N is constant on the open interval
        let n = zeros.count_below(0.5 * (a + b)) as f64;
        let s = |v: f64| n - theta(v) / PI - 1.0;
        let pieces = ((b - a) / PIECE).ceil().max(1.0) as usize;
        let h = (b - a) / pieces as f64;
        for i in 0..pieces {
            let (pa, pb) = (a + i as f64 * h, if i + 1 == pieces { b } else { a + (i + 1) as f64 * h });
            rhs += gauss_legendre(pa, pb, |v| s(v) * st_kernel(t - v, log_x));
        }
    }
    let lhs = PrimeSum::new(x)?.eval(t);
    Ok(StIdentity {
        t,
        x,
        y,
        lhs,
        rhs,
        diff: (lhs - rhs).norm(),
        error_budget: st_error_budget(x, y, t),
        constants: (1.0, 1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeSumMax {
    pub x: f64,
    pub t: f64,
    pub empirical_max_re: f64,
    pub empirical_max_im: f64,
    /// `(1/2)(log(X^{1/2}/log T) + 4 log log X) log T / log log T`.
    pub rh_bound: f64,
    /// Same with the factor `1/π` in place of `1/2`.
    pub rh_bound_im: f64,
    /// `2 X^{1/2} / log X`.
    pub v_max: f64,
    /// Whether `X >= 2 (log T)^2`.
    pub in_hypothesis: bool,
    pub n_points: usize,
}

/// Maxima of `|Re|` and `|Im|` of the prime sum over a grid, next to the
/// conditional bound (with `T = t_start`) and the trivial bound.
pub fn prime_sum_max_scan(grid: &GridSpec, x: f64) -> Result<PrimeSumMax> {
    let t = grid.t_start;
    if !(t > std::f64::consts::E.powf(std::f64::consts::E)) {
        return domain(format!("T must exceed e^e for the bound, got {t}"));
    }
    let vals = PrimeSum::new(x)?.eval_grid(grid.first_point(), grid.step, grid.cells());
    let vals = super::apply_mask(vals, grid);
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for z in &vals {
        re = re.max(z.re.abs());
        im = im.max(z.im.abs());
    }
    let lt = t.ln();
    let shape = ((x.sqrt() / lt).ln() + 4.0 * x.ln().ln()) * lt / lt.ln();
    Ok(PrimeSumMax {
        x,
        t,
        empirical_max_re: re,
        empirical_max_im: im,
        rh_bound: 0.5 * shape,
        rh_bound_im: shape / PI,
        v_max: 2.0 * x.sqrt() / x.ln(),
        in_hypothesis: x >= 2.0 * lt * lt,
        n_points: vals.len(),
    })
}
