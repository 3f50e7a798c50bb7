//! Moment estimation on `[T, 2T]`-type windows: midpoint-rule averages of
//! `|f(t)|^{2k}` with block-bootstrap errors, the splitting ratio, prime-sum
//! tail measures and the mean-value diagonal oracles.

mod arith_sums;
mod st;

pub use arith_sums::{
    fourth_moment_arith, fourth_numerator_local, second_moment_arith, FourthMomentArith, SecondMomentArith,
};
pub use st::{prime_sum_max_scan, st_error_budget, st_identity_check, st_kernel, PrimeSumMax, StIdentity};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::{arithmetic_factor_a, sieve_primes, PrimeTable};
use crate::coeffs::CoeffTable;
use crate::error::{domain, Error, Result};
use crate::hybrid::{Part, PrimeSum};
use crate::ladder::{ladder_product_n, LadderParams};
use crate::special::{rmt_factor_g, EULER_GAMMA};
use crate::zeta::zeta_grid;

/// Default grid constant `c` in `step = c / log t_end`.
pub const DEFAULT_STEP_CONSTANT: f64 = 0.25;
/// Bootstrap blocks.
pub const BOOTSTRAP_BLOCKS: usize = 50;
/// Bootstrap resamples.
pub const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0x5eed_2024;
/// Prime cutoff used for `a(k)` in predictions.
pub const A_PRIME_LIMIT: u64 = 1_000_000;

/// Midpoint grid `t_start + (j + 1/2) step` with optional excluded intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    pub step: f64,
    #[serde(default)]
    pub exclusion: Vec<(f64, f64)>,
}

impl GridSpec {
    pub fn new(t_start: f64, t_end: f64, step: f64) -> Result<Self> {
        if !(t_end > t_start) || !(step > 0.0) || !t_start.is_finite() || !t_end.is_finite() {
            return domain(format!(
                "grid needs t_end > t_start and step > 0, got [{t_start}, {t_end}] step {step}"
            ));
        }
        Ok(GridSpec {
            t_start,
            t_end,
            step,
            exclusion: Vec::new(),
        })
    }

    /// Grid with the default step `0.25 / log t_end`.
    pub fn with_default_step(t_start: f64, t_end: f64) -> Result<Self> {
        Self::new(t_start, t_end, DEFAULT_STEP_CONSTANT / t_end.max(std::f64::consts::E).ln())
    }

    pub fn excluding(mut self, intervals: Vec<(f64, f64)>) -> Self {
        self.exclusion = intervals;
        self
    }

    /// Number of midpoint cells.
    pub fn cells(&self) -> usize {
        ((self.t_end - self.t_start) / self.step).round().max(1.0) as usize
    }

    pub fn first_point(&self) -> f64 {
        self.t_start + 0.5 * self.step
    }

    pub fn point(&self, j: usize) -> f64 {
        self.first_point() + j as f64 * self.step
    }

    fn excluded(&self, t: f64) -> bool {
        self.exclusion.iter().any(|&(a, b)| a <= t && t <= b)
    }

    /// Keep-mask over the cells.
    pub fn mask(&self) -> Vec<bool> {
        (0..self.cells()).map(|j| !self.excluded(self.point(j))).collect()
    }

    /// Largest step that resolves oscillations on the `1/log t` scale.
    pub fn step_limit(&self) -> f64 {
        1.0 / self.t_end.max(std::f64::consts::E).ln()
    }

    /// Warnings about the grid; in strict mode they become errors.
    pub fn validate(&self, strict: bool) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        let limit = self.step_limit();
        if self.step > limit {
            if strict {
                return Err(Error::GridTooCoarse {
                    step: self.step,
                    limit,
                });
            }
            warnings.push(format!(
                "step {} exceeds 1/log(t_end) = {limit:.5}; |zeta| oscillations are under-resolved",
                self.step
            ));
        }
        Ok(warnings)
    }
}

/// What is being averaged.
#[derive(Debug, Clone, Copy)]
pub enum Integrand<'a> {
    Constant,
    Zeta,
    EulerP { x: f64 },
    ZQuotient { x: f64 },
    PZProduct { x: f64 },
    Dirichlet(&'a CoeffTable),
    LadderProduct {
        k: f64,
        params: &'a LadderParams,
        primes: &'a PrimeTable,
    },
}

impl Integrand<'_> {
    pub fn id(&self) -> String {
        match self {
            Integrand::Constant => "constant".into(),
            Integrand::Zeta => "zeta".into(),
            Integrand::EulerP { x } => format!("euler_p(X={x})"),
            Integrand::ZQuotient { x } => format!("z_quotient(X={x})"),
            Integrand::PZProduct { x } => format!("pz_product(X={x})"),
            Integrand::Dirichlet(t) => format!("dirichlet({:?},k={},X={},n_max={})", t.kind, t.k, t.x, t.n_max),
            Integrand::LadderProduct { k, params, .. } => {
                format!("ladder_product(k={k},log_T={},J={})", params.log_t, params.big_j())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_points: usize,
    pub two_k: f64,
    pub grid: GridSpec,
    pub integrand_id: String,
}

/// `|f(t)|` at the kept grid points.
pub fn sample_abs(integrand: &Integrand, grid: &GridSpec) -> Result<Vec<f64>> {
    let n = grid.cells();
    let (t0, h) = (grid.first_point(), grid.step);
    let vals: Vec<f64> = match integrand {
        Integrand::Constant => vec![1.0; n],
        Integrand::Zeta => zeta_grid(t0, h, n)?.into_iter().map(|z| z.norm()).collect(),
        Integrand::EulerP { x } => PrimeSum::new(*x)?.eval_grid(t0, h, n).into_iter().map(|s| s.re.exp()).collect(),
        Integrand::ZQuotient { x } => {
            let s = PrimeSum::new(*x)?.eval_grid(t0, h, n);
            let z = zeta_grid(t0, h, n)?;
            z.iter().zip(&s).map(|(z, s)| (z * (-s).exp()).norm()).collect()
        }
        Integrand::PZProduct { x } => {
            let s = PrimeSum::new(*x)?.eval_grid(t0, h, n);
            let z = zeta_grid(t0, h, n)?;
            z.iter().zip(&s).map(|(z, s)| (s.exp() * (z * (-s).exp())).norm()).collect()
        }
        Integrand::Dirichlet(table) => table.to_phasor().eval_grid(t0, h, n).into_iter().map(|z| z.norm()).collect(),
        Integrand::LadderProduct { k, params, primes } => {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map(|j| ladder_product_n(t0 + j as f64 * h, *k, params, primes).map(|z| z.norm()))
                .collect::<Result<Vec<f64>>>()?
        }
    };
    Ok(apply_mask(vals, grid))
}

fn apply_mask<T>(vals: Vec<T>, grid: &GridSpec) -> Vec<T> {
    if grid.exclusion.is_empty() {
        return vals;
    }
    vals.into_iter().zip(grid.mask()).filter(|(_, keep)| *keep).map(|(v, _)| v).collect()
}

/// Pairwise summation in a fixed order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Per-block sums and counts for `blocks` contiguous blocks.
fn block_sums(v: &[f64], blocks: usize) -> Vec<(f64, usize)> {
    let b = blocks.min(v.len()).max(1);
    (0..b)
        .map(|i| {
            let lo = i * v.len() / b;
            let hi = (i + 1) * v.len() / b;
            (pairwise_sum(&v[lo..hi]), hi - lo)
        })
        .collect()
}

fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Bootstrap replicates of a statistic of several block-sum series that are
/// resampled with common block indices.
fn bootstrap<F>(series: &[Vec<(f64, usize)>], stat: F) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let b = series[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
    let mut out = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut means = vec![0.0; series.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let picks: Vec<usize> = (0..b).map(|_| rng.gen_range(0..b)).collect();
        for (m, s) in means.iter_mut().zip(series) {
            let (sum, cnt) = picks.iter().fold((0.0, 0usize), |(a, c), &i| (a + s[i].0, c + s[i].1));
            *m = sum / cnt.max(1) as f64;
        }
        out.push(stat(&means));
    }
    out
}

/// Mean and bootstrap standard error of `v`.
pub fn mean_with_error(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(v) / v.len() as f64;
    let reps = bootstrap(&[block_sums(v, BOOTSTRAP_BLOCKS)], |m| m[0]);
    (mean, std_dev(&reps))
}

/// `(mean |x|^p)^{1/p}`.
pub fn power_mean(samples: &[f64], p: f64) -> f64 {
    let v: Vec<f64> = samples.iter().map(|x| x.abs().powf(p)).collect();
    (pairwise_sum(&v) / v.len() as f64).powf(1.0 / p)
}

/// Moment estimate from precomputed `|f|` samples.
pub fn moment_from_samples(abs_vals: &[f64], two_k: f64, grid: &GridSpec, id: String) -> MomentEstimate {
    let powered: Vec<f64> = abs_vals.iter().map(|a| a.powf(two_k)).collect();
    let (value, std_error) = mean_with_error(&powered);
    MomentEstimate {
        value,
        std_error,
        n_points: abs_vals.len(),
        two_k,
        grid: grid.clone(),
        integrand_id: id,
    }
}

/// Midpoint-rule average of `|f|^{2k}` over the grid.
pub fn integrate_moment(integrand: &Integrand, two_k: f64, grid: &GridSpec, strict: bool) -> Result<MomentEstimate> {
    if !(two_k >= 0.0) {
        return domain(format!("moment exponent must be nonnegative, got {two_k}"));
    }
    grid.validate(strict)?;
    let vals = sample_abs(integrand, grid)?;
    Ok(moment_from_samples(&vals, two_k, grid, integrand.id()))
}

/// `a(k) (e^γ log X)^{k^2}`.
pub fn prediction_p(k: f64, x: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return domain(format!("X must be at least 2, got {x}"));
    }
    let a = arithmetic_factor_a(k, A_PRIME_LIMIT, 1e-16)?;
    Ok(a.value * (EULER_GAMMA.exp() * x.ln()).powf(k * k))
}

/// `g(k) (log T / (e^γ log X))^{k^2}` for integer `k >= 0`.
pub fn prediction_z(k: i64, x: f64, t: f64) -> Result<f64> {
    if !(x >= 2.0) {
        return domain(format!("X must be at least 2, got {x}"));
    }
    if !(t > std::f64::consts::E) {
        return domain(format!("T must exceed e, got {t}"));
    }
    let g = rmt_factor_g(k)?;
    let kk = (k * k) as f64;
    Ok(g * (t.ln() / (EULER_GAMMA.exp() * x.ln())).powf(kk))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingReport {
    pub k: f64,
    pub x: f64,
    pub m_pz: f64,
    pub m_p: f64,
    pub m_z: f64,
    pub m_pz_err: f64,
    pub m_p_err: f64,
    pub m_z_err: f64,
    pub ratio: f64,
    pub ratio_std_error: f64,
    /// 2.5% and 97.5% bootstrap percentiles of the ratio.
    pub ratio_ci: (f64, f64),
    pub prediction_p: f64,
    /// `None` for non-integer `k`.
    pub prediction_z: Option<f64>,
    pub n_points: usize,
    pub grid: GridSpec,
    pub warnings: Vec<String>,
}

/// `M_PZ / (M_P M_Z)` for `2k`-th moments on one grid, with a joint
/// bootstrap for the ratio.
pub fn splitting_report(k: f64, x: f64, grid: &GridSpec, strict: bool) -> Result<SplittingReport> {
    let warnings = grid.validate(strict)?;
    let n = grid.cells();
    let (t0, h) = (grid.first_point(), grid.step);
    let s = PrimeSum::new(x)?.eval_grid(t0, h, n);
    let z = zeta_grid(t0, h, n)?;
    let two_k = 2.0 * k;
    let mut pz = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for (zi, si) in z.iter().zip(&s) {
        let pv = si.exp();
        let zq = zi * (-si).exp();
        pz.push((pv * zq).norm().powf(two_k));
        p.push(pv.norm().powf(two_k));
        q.push(zq.norm().powf(two_k));
    }
    let (pz, p, q) = (apply_mask(pz, grid), apply_mask(p, grid), apply_mask(q, grid));
    let npts = pz.len();
    let mean = |v: &[f64]| pairwise_sum(v) / v.len() as f64;
    let (m_pz, m_p, m_z) = (mean(&pz), mean(&p), mean(&q));
    let series = [block_sums(&pz, BOOTSTRAP_BLOCKS), block_sums(&p, BOOTSTRAP_BLOCKS), block_sums(&q, BOOTSTRAP_BLOCKS)];
    let single = |i: usize| std_dev(&bootstrap(&series, |m| m[i]));
    let mut reps = bootstrap(&series, |m| m[0] / (m[1] * m[2]));
    let ratio_std_error = std_dev(&reps);
    reps.sort_by(f64::total_cmp);
    let pct = |f: f64| reps[((reps.len() - 1) as f64 * f).round() as usize];
    let k_int = (k.fract() == 0.0 && k >= 0.0).then_some(k as i64);
    Ok(SplittingReport {
        k,
        x,
        m_pz,
        m_p,
        m_z,
        m_pz_err: single(0),
        m_p_err: single(1),
        m_z_err: single(2),
        ratio: m_pz / (m_p * m_z),
        ratio_std_error,
        ratio_ci: (pct(0.025), pct(0.975)),
        prediction_p: prediction_p(k, x)?,
        prediction_z: match k_int {
            Some(ki) => Some(prediction_z(ki, x, grid.t_start)?),
            None => None,
        },
        n_points: npts,
        grid: grid.clone(),
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailMeasureReport {
    pub v: f64,
    pub part: Part,
    pub fraction: f64,
    pub count: usize,
    pub x: f64,
    pub grid: GridSpec,
}

fn part_exceeds(part: Part, s: Complex64, v: f64) -> bool {
    match part {
        Part::Real => s.re.abs() > v,
        Part::Imag => s.im.abs() > v,
        // "both": exceptional in either coordinate
        Part::Full => s.re.abs() > v || s.im.abs() > v,
    }
}

/// Fractions of grid points where the selected part of the prime sum
/// exceeds each threshold; the prime sum is computed once.
pub fn tail_measures(vs: &[f64], x: f64, part: Part, grid: &GridSpec) -> Result<Vec<TailMeasureReport>> {
    if vs.iter().any(|&v| !(v >= 0.0)) {
        return domain("thresholds must be nonnegative");
    }
    let s = apply_mask(PrimeSum::new(x)?.eval_grid(grid.first_point(), grid.step, grid.cells()), grid);
    Ok(vs
        .iter()
        .map(|&v| {
            let count = s.iter().filter(|&&z| part_exceeds(part, z, v)).count();
            TailMeasureReport {
                v,
                part,
                fraction: count as f64 / s.len().max(1) as f64,
                count,
                x,
                grid: grid.clone(),
            }
        })
        .collect())
}

/// Fraction of grid points with `|part of Σ_{n≤X} Λ(n)/(n^{1/2+it} log n)| > V`.
pub fn tail_measure(v: f64, x: f64, part: Part, grid: &GridSpec) -> Result<TailMeasureReport> {
    Ok(tail_measures(&[v], x, part, grid)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevReport {
    pub m: u32,
    pub x: f64,
    pub empirical_moment: f64,
    pub std_error: f64,
    /// `m! (Σ_{p≤X} 1/p)^m`.
    pub bound: f64,
    pub reciprocal_sum: f64,
}

/// Empirical `2m`-th moment of `Σ_{p≤X} p^{-1/2-it}` against `m! (Σ 1/p)^m`.
pub fn chebyshev_moment_bound(m: u32, x: f64, grid: &GridSpec) -> Result<ChebyshevReport> {
    if m > 6 {
        return domain(format!("moment order m must be at most 6, got {m}"));
    }
    if !(x >= 2.0) {
        return domain(format!("X must be at least 2, got {x}"));
    }
    let primes = sieve_primes(x.floor() as u64)?;
    let coefs: Vec<f64> = primes.primes().iter().map(|&p| 1.0 / (p as f64).sqrt()).collect();
    let lambdas: Vec<f64> = primes.primes().iter().map(|&p| (p as f64).ln()).collect();
    let sum = crate::grid::PhasorSum::new(coefs, lambdas);
    let vals = apply_mask(sum.eval_grid(grid.first_point(), grid.step, grid.cells()), grid);
    let powered: Vec<f64> = vals.iter().map(|z| z.norm_sqr().powi(m as i32)).collect();
    let (empirical_moment, std_error) = mean_with_error(&powered);
    let recip: f64 = primes.primes().iter().map(|&p| 1.0 / p as f64).sum();
    let fact: f64 = (1..=m).map(|i| i as f64).product();
    Ok(ChebyshevReport {
        m,
        x,
        empirical_moment,
        std_error,
        bound: fact * recip.powi(m as i32),
        reciprocal_sum: recip,
    })
}

/// `Σ a(n)^2 / n` for a coefficient table (the `n^{-1/2}` weight folded in).
pub fn mv_diagonal(table: &CoeffTable) -> f64 {
    table.diagonal()
}

/// `Σ |a(n)|^2` for raw coefficients.
pub fn mv_diagonal_raw(coefs: &[(u64, Complex64)]) -> f64 {
    coefs.iter().map(|(_, a)| a.norm_sqr()).sum()
}

/// Brute-force `Σ_{m = n} a(m) conj(a(n))` over all pairs, for checking
/// [`mv_diagonal_raw`] on tables that may repeat an index.
pub fn mv_diagonal_bruteforce(coefs: &[(u64, Complex64)]) -> f64 {
    let mut s = 0.0;
    for (m, a) in coefs {
        for (n, b) in coefs {
            if m == n {
                s += (a * b.conj()).re;
            }
        }
    }
    s
}

/// Dirichlet convolution of raw coefficient lists.
pub fn dirichlet_product(a: &[(u64, Complex64)], b: &[(u64, Complex64)]) -> Vec<(u64, Complex64)> {
    let mut map = std::collections::BTreeMap::new();
    for &(m, x) in a {
        for &(n, y) in b {
            *map.entry(m * n).or_insert(Complex64::new(0.0, 0.0)) += x * y;
        }
    }
    map.into_iter().collect()
}

/// Empirical `(1/T)∫|Σ a(n) n^{-it}|^2` over the grid.
pub fn mv_empirical(coefs: &[(u64, Complex64)], grid: &GridSpec) -> Result<MomentEstimate> {
    // complex coefficients: split into real and imaginary phasor sums
    let lambdas: Vec<f64> = coefs.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let re = crate::grid::PhasorSum::new(coefs.iter().map(|c| c.1.re).collect(), lambdas.clone());
    let im = crate::grid::PhasorSum::new(coefs.iter().map(|c| c.1.im).collect(), lambdas);
    let n = grid.cells();
    let (t0, h) = (grid.first_point(), grid.step);
    let a = re.eval_grid(t0, h, n);
    let b = im.eval_grid(t0, h, n);
    let vals: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x + Complex64::i() * y).norm()).collect();
    let vals = apply_mask(vals, grid);
    Ok(moment_from_samples(&vals, 2.0, grid, format!("raw_dirichlet(len={})", coefs.len())))
}

/// Random sparse coefficients on distinct `n <= n_max`, reproducible by seed.
pub fn random_sparse_coefficients(len: usize, n_max: u64, seed: u64) -> Vec<(u64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ns = std::collections::BTreeSet::new();
    while ns.len() < len.min(n_max as usize) {
        ns.insert(rng.gen_range(1..=n_max));
    }
    ns.into_iter()
        .map(|n| (n, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = GridSpec::new(0.0, 1.0, 0.25).unwrap();
        assert_eq!(g.cells(), 4);
        assert_eq!(g.point(0), 0.125);
        assert!(GridSpec::new(1.0, 1.0, 0.1).is_err());
        let d = GridSpec::with_default_step(1e5, 2e5).unwrap();
        assert!((d.step - 0.25 / 2e5f64.ln()).abs() < 1e-15);
        assert!(d.validate(true).unwrap().is_empty());
        let coarse = GridSpec::new(1e5, 2e5, 0.5).unwrap();
        assert_eq!(coarse.validate(false).unwrap().len(), 1);
        assert!(matches!(coarse.validate(true), Err(Error::GridTooCoarse { .. })));
        let ex = GridSpec::new(0.0, 1.0, 0.25).unwrap().excluding(vec![(0.3, 0.4)]);
        assert_eq!(ex.mask(), vec![true, false, true, true]);
    }

    #[test]
    fn constant_integrand() {
        let g = GridSpec::new(100.0, 200.0, 0.1).unwrap();
        for two_k in [0.0, 1.0, 4.0] {
            let m = integrate_moment(&Integrand::Constant, two_k, &g, false).unwrap();
            assert_eq!(m.value, 1.0);
            assert!(m.std_error < 1e-15);
            assert_eq!(m.n_points, 1000);
        }
    }

    #[test]
    fn predictions() {
        let e = EULER_GAMMA.exp();
        assert!((prediction_p(1.0, 10.0).unwrap() - e * 10f64.ln()).abs() < 1e-9);
        assert!((prediction_p(1.0, 10.0).unwrap() - 4.101_07).abs() < 1e-5);
        assert!((prediction_p(0.0, 10.0).unwrap() - 1.0).abs() < 1e-15);
        let six = 6.0 / std::f64::consts::PI.powi(2);
        assert!((prediction_p(2.0, 10.0).unwrap() / (six * (e * 10f64.ln()).powi(4)) - 1.0).abs() < 1e-5);
        let t = 1e5;
        assert!((prediction_z(1, 10.0, t).unwrap() - t.ln() / (e * 10f64.ln())).abs() < 1e-12);
        assert!((prediction_z(2, 10.0, t).unwrap() - (t.ln() / (e * 10f64.ln())).powi(4) / 12.0).abs() < 1e-9);
        assert_eq!(prediction_z(0, 10.0, t).unwrap(), 1.0);
    }

    #[test]
    fn splitting_k0_is_one() {
        let g = GridSpec::new(1000.0, 1100.0, 0.05).unwrap();
        let r = splitting_report(0.0, 10.0, &g, false).unwrap();
        assert_eq!(r.ratio, 1.0);
    }

    #[test]
    fn tail_measure_basics() {
        let g = GridSpec::new(1e4, 1.1e4, 0.02).unwrap();
        let rs = tail_measures(&[0.0, 0.5, 1.0, 1.5, 2.0, 3.0], 10.0, Part::Real, &g).unwrap();
        assert!(rs[0].fraction > 0.999);
        assert!(rs.windows(2).all(|w| w[1].fraction <= w[0].fraction));
        let vmax = 2.0 * 10f64.sqrt() / 10f64.ln();
        assert_eq!(tail_measure(vmax, 10.0, Part::Full, &g).unwrap().fraction, 0.0);
    }

    #[test]
    fn chebyshev_small_cases() {
        let g = GridSpec::new(1e4, 2e4, 0.05).unwrap();
        let m0 = chebyshev_moment_bound(0, 10.0, &g).unwrap();
        assert_eq!(m0.empirical_moment, 1.0);
        assert_eq!(m0.bound, 1.0);
        let m1 = chebyshev_moment_bound(1, 10.0, &g).unwrap();
        assert!((m1.empirical_moment / m1.reciprocal_sum - 1.0).abs() < 0.05);
        let m3 = chebyshev_moment_bound(3, 10.0, &g).unwrap();
        assert!(m3.empirical_moment <= m3.bound * 1.5);
        assert!(chebyshev_moment_bound(7, 10.0, &g).is_err());
    }

    #[test]
    fn diagonal_identities() {
        let a = vec![(2u64, Complex64::new(2f64.powf(-0.5), 0.0)), (3, Complex64::new(3f64.powf(-0.5), 0.0))];
        assert!((mv_diagonal_raw(&a) - 5.0 / 6.0).abs() < 1e-15);
        let r = random_sparse_coefficients(50, 200, 3);
        assert!((mv_diagonal_raw(&r) - mv_diagonal_bruteforce(&r)).abs() < 1e-12);
    }

    #[test]
    fn power_means_nondecreasing() {
        let g = GridSpec::new(5000.0, 5050.0, 0.01).unwrap();
        let s = sample_abs(&Integrand::Zeta, &g).unwrap();
        let mut prev = 0.0;
        for p in [0.5, 1.0, 2.0, 3.0, 4.0] {
            let m = power_mean(&s, p);
            assert!(m >= prev);
            prev = m;
        }
    }
}
