//! Special functions: the exponential integral `E1`, the smoothing kernel `u`
//! and its transform `U(z)`, the Riemann–Siegel theta function, Barnes `G` at
//! positive integers and the random-matrix constant `g(k)`.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `E1(z) = ∫_z^∞ e^{-w}/w dw`, principal branch with the cut on the negative
/// real axis.
pub fn exp_integral_e1(z: Complex64) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return domain("E1 has a logarithmic singularity at z = 0");
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return domain("E1 argument must be finite");
    }
    let r = z.norm();
    let near_negative_axis = z.re < 0.0 && z.im.abs() <= 0.5 * z.re.abs();
    Ok(if r <= 4.0 || near_negative_axis {
        e1_series(z)
    } else {
        e1_continued_fraction(z)
    })
}

/// `-γ - log z - Σ_{n>=1} (-z)^n / (n n!)`.
fn e1_series(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    let neg = -z;
    for n in 1..1000 {
        term *= neg / n as f64;
        let add = term / n as f64;
        sum += add;
        if add.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// Modified Lentz evaluation of `e^{-z} / (z+1- 1/(z+3- 4/(z+5- ...)))`.
fn e1_continued_fraction(z: Complex64) -> Complex64 {
    let tiny = Complex64::new(1e-300, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut b = z + 1.0;
    // complex division by `tiny` would underflow its squared norm
    let huge = Complex64::new(1e300, 0.0);
    let mut c = huge;
    let mut d = one / b;
    let mut f = d;
    for i in 1..100_000u64 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = one / (b + a * d);
        if d.norm() == 0.0 || !d.is_finite() {
            d = huge;
        }
        c = b + a / c;
        if c.norm() == 0.0 {
            c = tiny;
        }
        let delta = c * d;
        f *= delta;
        if (delta - one).norm() < 1e-15 {
            break;
        }
    }
    f * (-z).exp()
}

/// Complex `log Γ(z)` for `Re z > 0` (analytic branch, continuous in `Im z`).
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    // shift into the Stirling region
    let shift = 12usize;
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..shift {
        acc += w.ln();
        w += 1.0;
    }
    // Stirling series with Bernoulli coefficients B_{2n}/(2n(2n-1))
    const COEF: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for c in COEF {
        series += pow * c;
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - acc
}

/// Riemann–Siegel theta for any `t >= 0`.
///
/// Uses the asymptotic series for `t >= 10` and complex `log Γ` below.
pub(crate) fn theta(t: f64) -> f64 {
    if t.abs() < 10.0 {
        let lg = ln_gamma_complex(Complex64::new(0.25, 0.5 * t));
        return lg.im - 0.5 * t * PI.ln();
    }
    let inv = 1.0 / t;
    let inv2 = inv * inv;
    0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0
        + inv
            * (1.0 / 48.0
                + inv2
                    * (7.0 / 5760.0
                        + inv2 * (31.0 / 80640.0 + inv2 * (127.0 / 430_080.0 + inv2 * (511.0 / 1_216_512.0)))))
}

/// Derivative of the Riemann–Siegel theta function from the asymptotic series.
pub fn theta_prime(t: f64) -> f64 {
    let inv2 = 1.0 / (t * t);
    0.5 * (t / (2.0 * PI)).ln() - inv2 * (1.0 / 48.0 + inv2 * (7.0 / 1920.0 + inv2 * (31.0 / 16128.0)))
}

/// `θ(t) = Im log Γ(1/4 + it/2) - (t/2) log π`.
pub fn riemann_siegel_theta(t: f64) -> Result<f64> {
    if !(t >= 1.0) {
        return Err(Error::UnsupportedRange(format!(
            "Riemann-Siegel theta is supported for t >= 1, got {t}"
        )));
    }
    Ok(theta(t))
}

/// `G(n)` for positive integers as an exact integer, when it fits in `u128`.
pub fn barnes_g_exact(n: u32) -> Option<u128> {
    if n == 0 {
        return None;
    }
    // G(n) = Π_{j=1}^{n-2} j!
    let mut g: u128 = 1;
    let mut fact: u128 = 1;
    for j in 1..n.saturating_sub(1) {
        fact = fact.checked_mul(j as u128)?;
        g = g.checked_mul(fact)?;
    }
    Some(g)
}

fn ln_barnes_g(n: u32) -> f64 {
    let mut ln_fact = 0.0;
    let mut acc = 0.0;
    for j in 1..n.saturating_sub(1) {
        ln_fact += (j as f64).ln();
        acc += ln_fact;
    }
    acc
}

/// Barnes `G(n)` at a positive integer via `G(1) = 1`, `G(z+1) = Γ(z)G(z)`.
pub fn barnes_g(n: i64) -> Result<f64> {
    if n <= 0 {
        return domain(format!("Barnes G is only provided at positive integers, got {n}"));
    }
    let n = u32::try_from(n).map_err(|_| Error::Domain("argument too large".into()))?;
    Ok(match barnes_g_exact(n) {
        Some(g) => g as f64,
        None => {
            // direct product stays accurate until it overflows
            let mut g = 1.0f64;
            let mut fact = 1.0f64;
            for j in 1..n.saturating_sub(1) {
                fact *= j as f64;
                g *= fact;
            }
            if g.is_finite() {
                g
            } else {
                ln_barnes_g(n).exp()
            }
        }
    })
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// `g(k) = G(k+1)^2 / G(2k+1)` as a reduced fraction, when representable.
pub fn rmt_factor_g_exact(k: u32) -> Option<(u128, u128)> {
    let num = barnes_g_exact(k + 1)?;
    let den = barnes_g_exact(2 * k + 1)?;
    // num^2 / den, cancelling one factor of num at a time to avoid overflow
    let g1 = gcd_u128(num, den);
    let den = den / g1;
    let g2 = gcd_u128(num, den);
    let num2 = (num / g1).checked_mul(num / g2)?;
    let den2 = den / g2;
    let g3 = gcd_u128(num2, den2);
    Some((num2 / g3, den2 / g3))
}

/// The random-matrix factor `g(k) = G(k+1)^2/G(2k+1)`.
pub fn rmt_factor_g(k: i64) -> Result<f64> {
    if k < 0 {
        return domain(format!("g(k) requires k >= 0, got {k}"));
    }
    let k = u32::try_from(k).map_err(|_| Error::Domain("argument too large".into()))?;
    Ok(match rmt_factor_g_exact(k) {
        Some((num, den)) => num as f64 / den as f64,
        None => (2.0 * ln_barnes_g(k + 1) - ln_barnes_g(2 * k + 1)).exp(),
    })
}

/// Smooth bump `u(x) = C exp(-1/(1-y^2))` with `y` the affine image of
/// `log x ∈ [1-1/X, 1]` on `[-1, 1]`; mass one on `[e^{1-1/X}, e]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingKernel {
    x_param: f64,
    norm: f64,
}

fn bump(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - y * y)).exp()
    }
}

/// Trapezoid rule on `[-1, 1]` with interval doubling until two successive
/// estimates agree. Integrands vanish to all orders at `±1`.
fn flat_trapezoid<F>(f: F, min_intervals: usize, rel_tol: f64, abs_tol: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let mut n = min_intervals.max(8).next_power_of_two();
    let mut h = 2.0 / n as f64;
    let mut sum: Complex64 = (1..n).map(|j| f(-1.0 + j as f64 * h)).sum();
    let mut est = sum * h;
    loop {
        // add midpoints
        let mids: Complex64 = (0..n).map(|j| f(-1.0 + (j as f64 + 0.5) * h)).sum();
        sum += mids;
        n *= 2;
        h *= 0.5;
        let next = sum * h;
        let diff = (next - est).norm();
        est = next;
        if diff <= abs_tol + rel_tol * est.norm() || n >= 1 << 22 {
            return est;
        }
    }
}

impl SmoothingKernel {
    pub fn new(x_param: f64) -> Result<Self> {
        if !(x_param >= 1.0 + 1e-12) || !x_param.is_finite() {
            return domain(format!("kernel parameter X must exceed 1, got {x_param}"));
        }
        let mut k = SmoothingKernel { x_param, norm: 1.0 };
        let mass = flat_trapezoid(|y| Complex64::new(bump(y) * k.log_x(y).exp(), 0.0), 64, 1e-15, 0.0).re
            / (2.0 * x_param);
        k.norm = 1.0 / mass;
        Ok(k)
    }

    pub fn x_param(&self) -> f64 {
        self.x_param
    }

    /// Support `[e^{1-1/X}, e]`.
    pub fn support(&self) -> (f64, f64) {
        ((1.0 - 1.0 / self.x_param).exp(), 1f64.exp())
    }

    pub fn normalization(&self) -> f64 {
        self.norm
    }

    fn log_x(&self, y: f64) -> f64 {
        1.0 - (1.0 - y) / (2.0 * self.x_param)
    }

    /// Kernel value `u(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let y = 2.0 * self.x_param * (x.ln() - 1.0) + 1.0;
        self.norm * bump(y)
    }

    /// `∫ u(x) f(log x) dx` computed in the `y` variable.
    pub fn integrate<F>(&self, f: F, min_intervals: usize) -> Complex64
    where
        F: Fn(f64) -> Complex64,
    {
        let scale = self.norm / (2.0 * self.x_param);
        flat_trapezoid(
            |y| {
                let v = self.log_x(y);
                f(v) * (bump(y) * v.exp())
            },
            min_intervals,
            1e-13,
            1e-15,
        ) * scale
    }
}

/// `U(z) = ∫ u(x) E1(z log x) dx`.
pub fn big_u(z: Complex64, kernel: &SmoothingKernel) -> Result<Complex64> {
    if z == Complex64::new(0.0, 0.0) {
        return domain("U(z) has a logarithmic singularity at z = 0");
    }
    // phase change of E1(z v) across the support is about |z|/X
    let min_intervals = 32 + (4.0 * z.norm() / kernel.x_param) as usize;
    Ok(kernel.integrate(
        |v| exp_integral_e1(z * v).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        min_intervals,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Reference values computed with mpmath at 30 digits.
    const E1_REFERENCE: &[(f64, f64, f64, f64)] = &[
        (1.0, 0.0, 0.219_383_934_395_520_27, 0.0),
        (10.0, 0.0, 4.156_968_929_685_324_3e-6, 0.0),
        (0.001, 0.0, 6.331_539_364_136_149_3, 0.0),
        (0.0, 1.0, -0.337_403_922_900_968_13, -0.624_713_256_427_713_6),
        (2.0, 3.0, -0.024_826_207_944_199_363, 0.020_316_674_911_044_623),
        (-3.0, 0.5, -9.383_603_509_330_943_4, 0.129_212_970_084_629_77),
        (-10.0, 12.0, -106.612_320_114_721_43, -1_461.732_825_557_849),
        (0.0, 40.0, -0.019_020_007_896_208_767, 0.016_188_792_559_887_888),
        (-20.0, 1.0, -14_940_241.028_177_593, 20_762_891.660_880_79),
        (-5.0, 1e-3, -40.185_263_482_751_18, -3.111_910_025_133_309_4),
        (30.0, -7.0, 1.739_771_941_439_906e-15, 2.378_603_298_857_992_5e-15),
        (1e-8, 0.0, 17.843_465_089_050_833, 0.0),
        (-45.0, 5.0, -1.369_071_295_663_376_5e17, -7.773_302_588_947_951e17),
        (0.5, 50.0, 0.003_528_901_608_450_353_8, -0.011_595_251_965_969_703),
    ];

    #[test]
    fn e1_matches_reference() {
        for &(re, im, vre, vim) in E1_REFERENCE {
            let got = exp_integral_e1(c(re, im)).unwrap();
            let want = c(vre, vim);
            let rel = (got - want).norm() / want.norm();
            assert!(rel < 1e-10, "z=({re},{im}) got {got} want {want} rel {rel:e}");
        }
        assert!(exp_integral_e1(c(0.0, 0.0)).is_err());
    }

    #[test]
    fn e1_small_argument_limit() {
        for &x in &[1e-3, 1e-5, 1e-8] {
            let v = exp_integral_e1(c(x, 0.0)).unwrap().re;
            assert!((v + EULER_GAMMA + x.ln()).abs() < 2.0 * x);
        }
    }

    #[test]
    fn e1_large_argument_leading_term() {
        let v = exp_integral_e1(c(10.0, 0.0)).unwrap().re;
        let lead = (-10f64).exp() / 10.0;
        assert!((v / lead - 1.0).abs() < 0.1);
    }

    #[test]
    fn e1_derivative_matches_finite_differences() {
        for r in [0.1, 0.5, 1.0, 3.0, 4.5, 7.0, 10.0] {
            for i in -6..=6 {
                let arg = i as f64 * (3.0 * PI / 4.0) / 6.0;
                let z = Complex64::from_polar(r, arg);
                let h = 1e-4 * r;
                let fd = (exp_integral_e1(z + h).unwrap() - exp_integral_e1(z - h).unwrap()) / (2.0 * h);
                let exact = -(-z).exp() / z;
                let rel = (fd - exact).norm() / exact.norm();
                assert!(rel < 1e-6, "z={z} rel={rel:e}");
            }
        }
    }

    #[test]
    fn e1_conjugation() {
        for &(re, im) in &[(1.0, 2.0), (-3.0, 4.0), (6.0, -1.0)] {
            let a = exp_integral_e1(c(re, im)).unwrap();
            let b = exp_integral_e1(c(re, -im)).unwrap();
            assert!((a - b.conj()).norm() < 1e-14 * a.norm());
        }
    }

    #[test]
    fn theta_values() {
        // mpmath siegeltheta
        let refs = [
            (1.0, -1.767_547_952_812_290_4),
            (5.0, -3.459_620_375_363_462_5),
            (10.0, -3.067_074_396_289_895_3),
            (100.0, 87.972_165_231_787_22),
            (1000.0, 2034.546_428_038_031_6),
        ];
        for (t, want) in refs {
            let got = riemann_siegel_theta(t).unwrap();
            assert!((got - want).abs() < 1e-9, "t={t} got {got}");
        }
        assert!(riemann_siegel_theta(0.5).is_err());
        assert!(theta(0.0).abs() < 1e-14);
        // both branches agree at the switch point
        let below = ln_gamma_complex(c(0.25, 6.0)).im - 6.0 * PI.ln();
        assert!((below - theta(12.0)).abs() < 1e-12);
    }

    #[test]
    fn theta_zero_near_17_8() {
        let (mut a, mut b) = (17.0, 18.5);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            if theta(a) * theta(m) <= 0.0 {
                b = m
            } else {
                a = m
            }
        }
        assert!((0.5 * (a + b) - 17.845_599_54).abs() < 1e-7);
    }

    #[test]
    fn theta_leading_asymptotic_and_monotone() {
        for t in [1e3, 1e5, 1e7] {
            let lead = 0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0;
            assert!((theta(t) / lead - 1.0).abs() < 1e-6);
        }
        let mut prev = theta(10.0);
        let mut t = 10.0;
        while t < 200.0 {
            t += 0.5;
            let cur = theta(t);
            assert!(cur > prev);
            let fd = (theta(t + 1e-5) - theta(t - 1e-5)) / 2e-5;
            assert!((fd - theta_prime(t)).abs() < 1e-6);
            prev = cur;
        }
    }

    #[test]
    fn barnes_and_g() {
        assert_eq!(barnes_g(1).unwrap(), 1.0);
        assert_eq!(barnes_g(2).unwrap(), 1.0);
        assert_eq!(barnes_g(3).unwrap(), 1.0);
        assert_eq!(barnes_g(4).unwrap(), 2.0);
        assert_eq!(barnes_g(5).unwrap(), 12.0);
        assert_eq!(barnes_g(7).unwrap(), 34560.0);
        assert!(barnes_g(0).is_err());
        // recurrence G(n+1) = (n-1)! G(n) across the exact/log switch
        let mut fact = 1.0f64;
        for n in 2..27i64 {
            fact *= (n - 1) as f64;
            let lhs = barnes_g(n + 1).unwrap();
            let rhs = fact * barnes_g(n).unwrap();
            assert!((lhs / rhs - 1.0).abs() < 1e-12, "n={n}");
        }
        assert_eq!(rmt_factor_g_exact(0), Some((1, 1)));
        assert_eq!(rmt_factor_g_exact(1), Some((1, 1)));
        assert_eq!(rmt_factor_g_exact(2), Some((1, 12)));
        assert_eq!(rmt_factor_g_exact(3), Some((1, 8640)));
        assert_eq!(rmt_factor_g(2).unwrap(), 1.0 / 12.0);
        assert!(rmt_factor_g(-1).is_err());
        for k in 0..=4 {
            let g = rmt_factor_g(k).unwrap();
            assert!(g > 0.0 && g <= 1.0);
        }
    }

    #[test]
    fn kernel_normalization() {
        for x in [10.0, 100.0, 1e4] {
            let k = SmoothingKernel::new(x).unwrap();
            let (a, b) = k.support();
            // plain midpoint rule in x as an independent route
            let n = 400_000;
            let h = (b - a) / n as f64;
            let mass: f64 = (0..n).map(|i| k.eval(a + (i as f64 + 0.5) * h)).sum::<f64>() * h;
            assert!((mass - 1.0).abs() < 1e-10, "X={x} mass={mass}");
            assert_eq!(k.eval(a), 0.0);
            assert_eq!(k.eval(b), 0.0);
            assert!(k.eval(0.5 * (a + b)) > 0.0);
        }
    }

    #[test]
    fn big_u_limits_and_symmetry() {
        let k = SmoothingKernel::new(1e6).unwrap();
        let u = big_u(c(1.0, 0.0), &k).unwrap();
        assert!((u - exp_integral_e1(c(1.0, 0.0)).unwrap()).norm() < 1e-3);
        let k = SmoothingKernel::new(30.0).unwrap();
        for z in [c(0.3, 2.0), c(-1.0, 5.0), c(0.0, 120.0)] {
            let a = big_u(z, &k).unwrap();
            let b = big_u(z.conj(), &k).unwrap();
            assert!((a - b.conj()).norm() < 1e-12);
        }
        assert!(big_u(c(0.0, 0.0), &k).is_err());
    }

    #[test]
    fn big_u_matches_brute_riemann_sum() {
        let k = SmoothingKernel::new(10.0).unwrap();
        let z = c(2.0, 0.0);
        let (a, b) = k.support();
        let n = 1_000_000;
        let h = (b - a) / n as f64;
        let mut brute = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x = a + (i as f64 + 0.5) * h;
            let w = k.eval(x);
            if w > 0.0 {
                brute += exp_integral_e1(z * x.ln()).unwrap() * w;
            }
        }
        brute *= h;
        let u = big_u(z, &k).unwrap();
        assert!((u - brute).norm() < 1e-8, "diff {:e}", (u - brute).norm());
    }
}
