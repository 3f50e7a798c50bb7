//! The `T_j` ladder: prime ranges `T_{j-1} < p ≤ T_j` with `T_j = T^{θ_j}`,
//! `θ_j = e^j/(log log T)^2`, per-range truncation lengths `ℓ_j = θ_j^{-3/4}`,
//! the weighted block sums and the truncated-exponential block polynomials.
//!
//! Parameters are stored through `log T`, so asymptotic-scale `T` (far beyond
//! `f64`) can be handled symbolically; numeric block evaluation needs `T_J`
//! within sieve range.

use num_complex::Complex64;

use crate::arith::{sieve_primes, PrimeTable};
use crate::coeffs::{CoeffKind, CoeffTable};
use crate::error::{domain, Error, Result};
use crate::grid::phasor;

/// Cap on `θ_J` in the asymptotic regime.
pub const ASYMPTOTIC_KAPPA: f64 = 1e-12;
/// Largest `T_J` for numeric ("desk") evaluation.
pub const DESK_SIEVE_LIMIT: u64 = 200_000_000;
/// Default magnitude below which polynomial subtrees are dropped.
pub const PRUNE_TOL: f64 = 1e-18;
/// Default cap on the number of polynomial terms.
pub const MAX_TERMS: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Level {
    pub j: usize,
    pub theta: f64,
    pub ell: f64,
    /// `log T_j = θ_j log T` (infinite at asymptotic scale).
    pub log_t: f64,
    /// `log log T_j = j - 2 log log log T + log log T`, always finite.
    pub log_log_t: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LadderParams {
    pub log_t: f64,
    pub log_log_t: f64,
    /// `T_{-1}`.
    pub a: f64,
    pub kappa: f64,
    pub levels: Vec<Level>,
}

impl LadderParams {
    pub fn big_j(&self) -> usize {
        self.levels.len() - 1
    }

    /// `T_j` as a float (infinite when beyond `f64`); `T_{-1} = A`.
    pub fn t_level(&self, j: isize) -> f64 {
        if j < 0 {
            self.a
        } else {
            self.levels[j as usize].log_t.exp()
        }
    }

    fn level(&self, j: usize) -> Result<&Level> {
        self.levels
            .get(j)
            .ok_or_else(|| Error::Domain(format!("level {j} exceeds J = {}", self.big_j())))
    }

    /// Primes up to `T_J`, when that is within desk range.
    pub fn desk_primes(&self) -> Result<PrimeTable> {
        let top = self.t_level(self.big_j() as isize);
        if !(top <= DESK_SIEVE_LIMIT as f64) {
            return Err(Error::Capacity(format!(
                "T_J = {top:e} exceeds the sieve limit {DESK_SIEVE_LIMIT}"
            )));
        }
        sieve_primes((top.floor() as u64).max(2))
    }

    /// Exponent `e` in the polynomial length bound `∏ T_i^{10 ℓ_i} = T^e`,
    /// i.e. `e = 10 Σ θ_i^{1/4}`.
    pub fn length_exponent(&self) -> f64 {
        10.0 * self.levels.iter().map(|l| l.theta.powf(0.25)).sum::<f64>()
    }

    /// The closed-form majorant `20 e^{J/4} / (log log T)^{1/2}` quoted for
    /// the same exponent. It undercounts the geometric sum `Σ e^{i/4}` by
    /// the factor `e^{1/4}/(2(e^{1/4}-1)) ≈ 2.26` for large `J`.
    pub fn length_exponent_quoted(&self) -> f64 {
        20.0 * (self.big_j() as f64 / 4.0).exp() / self.log_log_t.sqrt()
    }
}

/// Ladder for `T` given directly.
pub fn build_ladder(t: f64, a: f64, kappa: f64) -> Result<LadderParams> {
    if !(t >= 100.0) {
        return domain(format!("ladder needs T >= 100, got {t}"));
    }
    ladder_from_log_log(t.ln().ln(), a, kappa)
}

/// Ladder from `log log T`; works for `T` far beyond floating range.
pub fn ladder_from_log_log(log_log_t: f64, a: f64, kappa: f64) -> Result<LadderParams> {
    if !(log_log_t > 0.0) || !log_log_t.is_finite() {
        return domain(format!("log log T must be positive and finite, got {log_log_t}"));
    }
    if !(a >= 1.0) {
        return domain(format!("A must be at least 1, got {a}"));
    }
    let ll2 = log_log_t * log_log_t;
    let min_kappa = 1.0 / ll2;
    if !(kappa > 0.0) || kappa * ll2 < 1.0 {
        return Err(Error::LadderInfeasible { min_kappa });
    }
    // J maximal with e^J / (log log T)^2 <= kappa
    let mut big_j = (kappa * ll2).ln().floor().max(0.0) as usize;
    while (big_j as f64 + 1.0).exp() / ll2 <= kappa {
        big_j += 1;
    }
    while big_j > 0 && (big_j as f64).exp() / ll2 > kappa {
        big_j -= 1;
    }
    let log_t = log_log_t.exp();
    let levels = (0..=big_j)
        .map(|j| {
            let theta = (j as f64).exp() / ll2;
            Level {
                j,
                theta,
                ell: theta.powf(-0.75),
                log_t: theta * log_t,
                log_log_t: theta.ln() + log_log_t,
            }
        })
        .collect();
    Ok(LadderParams {
        log_t,
        log_log_t,
        a,
        kappa,
        levels,
    })
}

/// `w_j(p) = p^{-1/log T_j} · log(T_j/p)/log T_j`.
pub fn weight_w(p: f64, j: usize, params: &LadderParams) -> Result<f64> {
    let lt = params.level(j)?.log_t;
    weight_from_log(p, lt)
}

fn weight_from_log(p: f64, log_tj: f64) -> Result<f64> {
    let r = p.ln() / log_tj;
    if r > 1.0 + 1e-15 {
        return domain(format!("weight needs p <= T_j, got p = {p}, log T_j = {log_tj}"));
    }
    let r = r.min(1.0);
    Ok((-r).exp() * (1.0 - r))
}

/// `Σ_{p ∈ primes} weight(p) p^{-1/2-it}`.
pub fn prime_block_sum<W>(t: f64, primes: &[u64], weight: W) -> Complex64
where
    W: Fn(u64) -> f64,
{
    primes
        .iter()
        .map(|&p| {
            let pf = p as f64;
            phasor(t, pf.ln()) * (weight(p) / pf.sqrt())
        })
        .sum()
}

/// Primes of block `i`: `T_{i-1} < p ≤ T_i`.
pub fn block_primes<'a>(i: usize, params: &LadderParams, primes: &'a PrimeTable) -> Result<&'a [u64]> {
    let hi = params.t_level(i as isize);
    if hi.floor() > primes.limit() as f64 {
        return Err(Error::Capacity(format!(
            "block {i} reaches {hi:e}, beyond the prime table limit {}",
            primes.limit()
        )));
    }
    Ok(primes.range(params.t_level(i as isize - 1), hi))
}

/// `𝓟_{i,j}(t)` (weighted with `w_j`) or, for `j = None`, the plain block
/// sum `𝓟_i(t)`.
pub fn block_prime_sum(
    t: f64,
    i: usize,
    j: Option<usize>,
    params: &LadderParams,
    primes: &PrimeTable,
) -> Result<Complex64> {
    let ps = block_primes(i, params, primes)?;
    match j {
        None => Ok(prime_block_sum(t, ps, |_| 1.0)),
        Some(j) => {
            if i > j {
                return domain(format!("weighted block sum needs i <= j, got i={i}, j={j}"));
            }
            let lt = params.level(j)?.log_t;
            Ok(prime_block_sum(t, ps, |p| weight_from_log(p as f64, lt).unwrap_or(0.0)))
        }
    }
}

/// A truncated exponential polynomial
/// `Σ_{Ω(n) ≤ cap} ∏_{p^a || n} x_p^a / a! · n^{-i s t}` and its
/// bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyValue {
    pub value: Complex64,
    pub terms: usize,
    /// Upper bound on the total magnitude of dropped subtrees.
    pub pruned_bound: f64,
}

/// Options for [`exp_poly`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyOptions {
    pub omega_cap: u32,
    pub tol: f64,
    pub max_terms: usize,
}

impl PolyOptions {
    pub fn with_cap(omega_cap: u32) -> Self {
        PolyOptions {
            omega_cap,
            tol: PRUNE_TOL,
            max_terms: MAX_TERMS,
        }
    }
}

/// Depth-first evaluation of `Σ_n ∏_{p^a||n} x_p^a/a! · e^{-i t freq log n}`
/// over `n` built from `primes`, `Ω(n) ≤ omega_cap`.
///
/// `x` carries everything but the phase (coefficient, weight, `p^{-σ}`).
/// A subtree whose total magnitude is provably below `tol` is skipped; the
/// bound is accumulated in `pruned_bound`.
pub fn exp_poly(t: f64, freq: f64, primes: &[u64], x: &[f64], opts: PolyOptions) -> Result<PolyValue> {
    assert_eq!(primes.len(), x.len());
    let ph: Vec<Complex64> = primes.iter().map(|&p| phasor(t * freq, (p as f64).ln())).collect();
    // suffix[i] = exp(Σ_{q ≥ i} |x_q|): bound on a subtree's total relative mass
    let mut suffix = vec![1.0; primes.len() + 1];
    for i in (0..primes.len()).rev() {
        suffix[i] = suffix[i + 1] * x[i].abs().exp();
    }
    let mut st = PolyState {
        ph: &ph,
        x,
        suffix: &suffix,
        opts,
        value: Complex64::new(0.0, 0.0),
        terms: 0,
        pruned: 0.0,
        overflow: false,
    };
    st.visit(Complex64::new(1.0, 0.0), 0, 0);
    if st.overflow {
        return Err(Error::Capacity(format!(
            "polynomial exceeds {} terms; raise the cap or the tolerance",
            opts.max_terms
        )));
    }
    Ok(PolyValue {
        value: st.value,
        terms: st.terms,
        pruned_bound: st.pruned,
    })
}

struct PolyState<'a> {
    ph: &'a [Complex64],
    x: &'a [f64],
    suffix: &'a [f64],
    opts: PolyOptions,
    value: Complex64,
    terms: usize,
    pruned: f64,
    overflow: bool,
}

impl PolyState<'_> {
    fn visit(&mut self, term: Complex64, start: usize, omega: u32) {
        if self.overflow {
            return;
        }
        self.value += term;
        self.terms += 1;
        if self.terms > self.opts.max_terms {
            self.overflow = true;
            return;
        }
        if omega >= self.opts.omega_cap || start >= self.x.len() {
            return;
        }
        let mag = term.norm();
        let children = mag * (self.suffix[start] - 1.0);
        if children < self.opts.tol {
            self.pruned += children;
            return;
        }
        for q in start..self.x.len() {
            let xq = self.x[q];
            if xq == 0.0 {
                continue;
            }
            let step = self.ph[q] * xq;
            let mut child = term;
            let mut a = 0u32;
            loop {
                a += 1;
                if omega + a > self.opts.omega_cap {
                    break;
                }
                child = child * step / a as f64;
                // everything from this power upward, with later primes attached
                let rest = child.norm() * xq.abs().exp() * self.suffix[q + 1];
                if rest < self.opts.tol {
                    self.pruned += rest;
                    break;
                }
                self.visit(child, q + 1, omega + a);
                if self.overflow {
                    return;
                }
            }
        }
    }
}

/// `𝓝_{i,j}(t,k)` (weights `w_j`) or the unweighted `𝓝_i(t,k)` for `j = None`:
/// `Σ k^{Ω(n)} w(n) 𝔤(n) n^{-1/2-it}` over `n` from block `i` with
/// `Ω(n) ≤ 10 ℓ_i`.
pub fn block_poly_n(
    t: f64,
    i: usize,
    j: Option<usize>,
    k: f64,
    params: &LadderParams,
    primes: &PrimeTable,
) -> Result<PolyValue> {
    let ps = block_primes(i, params, primes)?;
    let cap = (10.0 * params.level(i)?.ell).floor() as u32;
    let weights: Vec<f64> = match j {
        None => vec![1.0; ps.len()],
        Some(j) => {
            if i > j {
                return domain(format!("weighted block polynomial needs i <= j, got i={i}, j={j}"));
            }
            let lt = params.level(j)?.log_t;
            ps.iter().map(|&p| weight_from_log(p as f64, lt)).collect::<Result<_>>()?
        }
    };
    block_poly_custom(t, ps, &weights, k, cap, PolyOptions::with_cap(cap))
}

/// Block polynomial for an explicit prime list and weights.
pub fn block_poly_custom(
    t: f64,
    primes: &[u64],
    weights: &[f64],
    k: f64,
    omega_cap: u32,
    opts: PolyOptions,
) -> Result<PolyValue> {
    let x: Vec<f64> = primes
        .iter()
        .zip(weights)
        .map(|(&p, &w)| k * w / (p as f64).sqrt())
        .collect();
    exp_poly(t, 1.0, primes, &x, PolyOptions { omega_cap, ..opts })
}

/// `𝓜(t,k) = Σ (k/2)^{Ω(n)} 𝔤(n) n^{-1-2it}` over `n` built from primes
/// `≤ log T` with `Ω(n) ≤ 10k(log log T)^2`.
pub fn tail_poly_m(t: f64, k: f64, big_t: f64) -> Result<PolyValue> {
    if !(big_t > 1.0) {
        return domain(format!("T must exceed 1, got {big_t}"));
    }
    let lt = big_t.ln();
    if lt < 2.0 {
        return Ok(PolyValue {
            value: Complex64::new(1.0, 0.0),
            terms: 1,
            pruned_bound: 0.0,
        });
    }
    let ll = lt.ln();
    let cap = (10.0 * k.abs() * ll * ll).floor() as u32;
    let table = sieve_primes(lt.floor() as u64)?;
    let ps = table.primes();
    let x: Vec<f64> = ps.iter().map(|&p| 0.5 * k / p as f64).collect();
    exp_poly(t, 2.0, ps, &x, PolyOptions::with_cap(cap))
}

/// `log 𝓠_j` for `|𝓟_j| = p_abs`:
/// `20ℓ log(e|𝓟|/(10ℓ)) + log Σ_{r ≤ 10ℓ/k} (2e|𝓟|/(r+1))^{2r}`.
pub fn log_majorant_q(p_abs: f64, ell: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return domain(format!("majorant needs k > 0, got {k}"));
    }
    if !(ell > 0.0) || !(p_abs >= 0.0) {
        return domain("majorant needs ell > 0 and |P| >= 0");
    }
    if p_abs == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let lead = 20.0 * ell * (std::f64::consts::E * p_abs / (10.0 * ell)).ln();
    let r_max = (10.0 * ell / k).floor() as usize;
    let logs: Vec<f64> = (0..=r_max)
        .map(|r| 2.0 * r as f64 * (2.0 * std::f64::consts::E * p_abs / (r as f64 + 1.0)).ln())
        .collect();
    let m = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logs.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    Ok(lead + lse)
}

/// `𝓠_j(t)` with `𝓟_j(t)` the unweighted block sum; returned as a logarithm.
pub fn majorant_q(t: f64, j: usize, k: f64, params: &LadderParams, primes: &PrimeTable) -> Result<f64> {
    let p = block_prime_sum(t, j, None, params, primes)?;
    log_majorant_q(p.norm(), params.level(j)?.ell, k)
}

/// `𝓝(t,k) = ∏_{i ≤ J} 𝓝_i(t,k)` (unweighted blocks).
pub fn ladder_product_n(t: f64, k: f64, params: &LadderParams, primes: &PrimeTable) -> Result<Complex64> {
    let mut prod = Complex64::new(1.0, 0.0);
    for i in 0..=params.big_j() {
        prod *= block_poly_n(t, i, None, k, params, primes)?.value;
    }
    Ok(prod)
}

/// Coefficients `γ_k(n)` of `𝓝(t,k)` for `n ≤ n_max`: `k^{Ω(n)} 𝔤(n)` when
/// each block's share of `Ω(n)` is within `10ℓ_i`, else 0 (not stored).
pub fn gamma_table(k: f64, params: &LadderParams, primes: &PrimeTable, n_max: u64) -> Result<CoeffTable> {
    let mut bounds = Vec::new();
    for i in 0..=params.big_j() {
        let ps = block_primes(i, params, primes)?;
        let cap = (10.0 * params.levels[i].ell).floor() as u32;
        bounds.push((ps.first().copied(), ps.last().copied(), cap));
    }
    let all: Vec<u64> = bounds
        .iter()
        .zip(0..)
        .flat_map(|(_, i)| block_primes(i, params, primes).unwrap_or(&[]).to_vec())
        .collect();
    let block_of = |p: u64| bounds.iter().position(|&(lo, hi, _)| matches!((lo, hi), (Some(l), Some(h)) if l <= p && p <= h));
    let mut entries = Vec::new();
    crate::arith::for_each_smooth(&all, n_max, u32::MAX, |n, fac| {
        let mut per_block = vec![0u32; bounds.len()];
        let mut coef = 1.0;
        for &(p, e) in fac {
            if let Some(b) = block_of(p) {
                per_block[b] += e;
            }
            coef *= k.powi(e as i32) / factorial(e);
        }
        if per_block.iter().zip(&bounds).all(|(&o, &(_, _, cap))| o <= cap) {
            entries.push((n, coef));
        }
    });
    let mut table = CoeffTable::from_entries(CoeffKind::GammaLadder, k, params.t_level(params.big_j() as isize), entries);
    table.n_max = n_max;
    Ok(table)
}

fn factorial(e: u32) -> f64 {
    (1..=e).map(|i| i as f64).product()
}

/// `Σ_{j > cutoff} z^j / j!` for `z ≥ 0`, summed in order of decreasing
/// terms with compensation.
pub fn exp_tail(z: f64, cutoff: u32) -> f64 {
    let mut term = 1.0f64;
    for j in 1..=cutoff {
        term *= z / j as f64;
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut j = cutoff;
    loop {
        j += 1;
        term *= z / j as f64;
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
        if term < 1e-30 * sum || term == 0.0 {
            break;
        }
    }
    sum
}

/// Pointwise majorant bound in the "either / or" form: returns `None` when
/// some `|k 𝓟_{0,j}(t)| > ℓ_0` (first alternative), otherwise the value of
/// `∏_i |𝓝_{i,J}(t,k)|^2 · |𝓜(t,k)|^2` (leading term of the second).
pub fn zeta_majorant(t: f64, k: f64, big_t: f64, params: &LadderParams, primes: &PrimeTable) -> Result<Option<f64>> {
    let ell0 = params.levels[0].ell;
    for j in 0..=params.big_j() {
        let p = block_prime_sum(t, 0, Some(j), params, primes)?;
        if (k * p).norm() > ell0 {
            return Ok(None);
        }
    }
    let big_j = params.big_j();
    let mut prod = 1.0;
    for i in 0..=big_j {
        prod *= block_poly_n(t, i, Some(big_j), k, params, primes)?.value.norm_sqr();
    }
    let m = tail_poly_m(t, k, big_t)?.value.norm_sqr();
    Ok(Some(prod * m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_ladder() {
        let p = ladder_from_log_log(100.0, 1.0, 1e-2).unwrap();
        assert!((p.levels[0].theta - 1e-4).abs() < 1e-18);
        assert!((p.levels[0].ell - 1e3).abs() < 1e-9);
        assert_eq!(p.big_j(), 4);
        match ladder_from_log_log(100.0, 1.0, 0.5e-4) {
            Err(Error::LadderInfeasible { min_kappa }) => assert!((min_kappa - 1e-4).abs() < 1e-18),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn asymptotic_regime() {
        // T = 10^{10^6}: (log log T)^2 ≈ 215, far too small for kappa = 1e-12
        let ll = (1e6 * 10f64.ln()).ln();
        match ladder_from_log_log(ll, 1.0, ASYMPTOTIC_KAPPA) {
            Err(Error::LadderInfeasible { min_kappa }) => assert!((min_kappa - 1.0 / (ll * ll)).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        // log log T = 10^7: J = floor(log(1e-12 · 1e14)) = floor(log 100) = 4
        let ll = 1e7;
        let p = ladder_from_log_log(ll, 1.0, ASYMPTOTIC_KAPPA).unwrap();
        let want = (ASYMPTOTIC_KAPPA * ll * ll).ln().floor() as usize;
        assert_eq!(want, 4);
        assert_eq!(p.big_j(), want);
        assert!(p.levels.windows(2).all(|w| w[1].log_log_t > w[0].log_log_t));
    }

    #[test]
    fn weights() {
        let p = build_ladder(1e12, 1.0, 0.5).unwrap();
        let j = p.big_j();
        let tj = p.t_level(j as isize);
        assert!(weight_w(tj, j, &p).unwrap().abs() < 1e-12);
        assert!(weight_w(tj * 1.01, j, &p).is_err());
        let huge = ladder_from_log_log(50.0, 1.0, 1.0).unwrap();
        assert!((weight_w(2.0, huge.big_j(), &huge).unwrap() - 1.0).abs() < 1e-12);
        let mut prev = 1.0;
        for q in 2..(tj.floor() as u64) {
            let w = weight_w(q as f64, j, &p).unwrap();
            assert!(w < prev && (0.0..=1.0).contains(&w));
            prev = w;
        }
    }

    #[test]
    fn majorant_values() {
        assert_eq!(log_majorant_q(0.0, 2.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(log_majorant_q(1.0, 2.0, 0.0).is_err());
        // direct evaluation for ell = 2, |P| = 1
        let e = std::f64::consts::E;
        let direct: f64 = (e / 20.0).powi(40) * (0..=20).map(|r| (2.0 * e / (r as f64 + 1.0)).powi(2 * r)).sum::<f64>();
        let lg = log_majorant_q(1.0, 2.0, 1.0).unwrap();
        assert!((lg - direct.ln()).abs() < 1e-12);
        let mut prev = f64::NEG_INFINITY;
        for i in 1..50 {
            let v = log_majorant_q(i as f64 * 0.2, 3.0, 1.5).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn exp_tail_contract() {
        for z in [1.0f64, 2.0, 3.0] {
            let cut = (10.0 * z) as u32;
            assert!(exp_tail(z, cut) <= (-10.0 * z).exp());
        }
        // whole series
        assert!((exp_tail(1.5, 0) - (1.5f64.exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn tail_poly_trivial_cases() {
        assert_eq!(tail_poly_m(3.0, 1.0, 5.0).unwrap().value, Complex64::new(1.0, 0.0));
        assert_eq!(tail_poly_m(3.0, 0.0, 1e6).unwrap().value, Complex64::new(1.0, 0.0));
    }
}
