//! Dirichlet-polynomial approximations to `P_X(s)^k`.
//!
//! * `β_k` — multiplicative coefficients of `∏_p exp(k Σ_{p^m≤X} p^{-ms}/m)`,
//!   i.e. `ζ^k` with the prime-power terms above `X` removed from each local
//!   factor. On `n` whose prime powers are all `≤ X` this is `d_k(n)`.
//! * `α_k` — coefficients of the truncated exponential
//!   `Σ_{j≤W0} k^j/j! (Σ_{n≤X} Λ(n)/(n^s log n))^j`. Computed by a separate
//!   route (per-`n` polynomial products over its prime factors) so that the
//!   `α = β` identity on `Ω(n) ≤ W0` is a real check.

use num_complex::Complex64;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::arith::{divisor_k_prime_power, for_each_smooth, sieve_primes};
use crate::error::{domain, Result};
use crate::grid::PhasorSum;

/// Default physical cap on table length.
pub const DEFAULT_N_MAX: u64 = 10_000_000;
/// Default floor on `V0` at desk heights.
pub const DEFAULT_V0_FLOOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CoeffKind {
    Alpha,
    Beta,
    GammaLadder,
}

/// `V0 = log₂T · log₃T` (iterated natural logs) and `W0 = 20|k| V0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TruncationBudget {
    pub v0: f64,
    pub w0: f64,
    pub floor_applied: bool,
}

impl TruncationBudget {
    pub fn new(k: f64, t: f64, v0_floor: f64) -> Result<Self> {
        if !(t > 1.0) {
            return domain(format!("T must exceed 1, got {t}"));
        }
        let l2 = t.ln().ln();
        let raw = if l2 > 0.0 { l2 * l2.ln() } else { f64::NEG_INFINITY };
        let (v0, floor_applied) = if raw.is_finite() && raw >= v0_floor { (raw, false) } else { (v0_floor, true) };
        Ok(TruncationBudget {
            v0,
            w0: 20.0 * k.abs() * v0,
            floor_applied,
        })
    }

    /// Explicit `V0`/`W0`, for experiments that want short truncations.
    pub fn custom(v0: f64, w0: f64) -> Self {
        TruncationBudget {
            v0,
            w0: w0.max(0.0),
            floor_applied: false,
        }
    }

    /// Largest admissible number of factors `j ≤ W0`.
    pub fn w0_floor(&self) -> u32 {
        self.w0.floor().min(u32::MAX as f64) as u32
    }
}

/// Sparse coefficients over a smooth set, sorted by `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub kind: CoeffKind,
    pub k: f64,
    pub x: f64,
    pub n_max: u64,
    pub omega_cap: Option<u32>,
    entries: Vec<(u64, f64)>,
}

impl CoeffTable {
    /// A table from raw `(n, a(n))` pairs; sorted and merged on duplicates.
    pub fn from_entries(kind: CoeffKind, k: f64, x: f64, mut entries: Vec<(u64, f64)>) -> Self {
        entries.sort_by_key(|e| e.0);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        let n_max = entries.last().map(|e| e.0).unwrap_or(1);
        CoeffTable {
            kind,
            k,
            x,
            n_max,
            omega_cap: None,
            entries,
        }
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: u64) -> Option<f64> {
        self.entries.binary_search_by_key(&n, |e| e.0).ok().map(|i| self.entries[i].1)
    }

    /// Coefficients with the `n^{-1/2}` weight folded in, as a phasor sum
    /// in `t`.
    pub fn to_phasor(&self) -> PhasorSum {
        let coefs = self.entries.iter().map(|&(n, c)| c / (n as f64).sqrt()).collect();
        let lambdas = self.entries.iter().map(|&(n, _)| (n as f64).ln()).collect();
        PhasorSum::new(coefs, lambdas)
    }

    /// `Σ a(n)^2 / n`.
    pub fn diagonal(&self) -> f64 {
        self.entries.iter().map(|&(n, c)| c * c / n as f64).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,coefficient\n");
        for (n, c) in &self.entries {
            // + 0.0 folds -0 into 0
            let _ = writeln!(s, "{n},{}", c + 0.0);
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

pub(crate) fn check_x(x: f64) -> Result<u64> {
    if !(x >= 2.0) || !x.is_finite() {
        return domain(format!("X must be at least 2, got {x}"));
    }
    Ok(x.floor() as u64)
}

/// Largest `m` with `p^m <= limit`.
pub(crate) fn max_power(p: u64, limit: u64) -> u32 {
    let mut m = 0;
    let mut q = 1u64;
    while let Some(next) = q.checked_mul(p) {
        if next > limit {
            break;
        }
        q = next;
        m += 1;
    }
    m
}

/// Coefficients `c_0..=c_deg` of `exp(k Σ_{j=1}^{big_m} y^j / j)`:
/// `n c_n = k Σ_{j=1}^{min(n, M)} c_{n-j}`.
pub fn beta_local_factor(k: f64, big_m: u32, deg: u32) -> Vec<f64> {
    let mut c = vec![0.0; deg as usize + 1];
    c[0] = 1.0;
    for n in 1..=deg as usize {
        let top = n.min(big_m as usize);
        let s: f64 = (1..=top).map(|j| c[n - j]).sum();
        c[n] = k * s / n as f64;
    }
    c
}

/// `β_k(n)` for all `X`-smooth `n <= n_max`.
pub fn build_beta(k: f64, x: f64, n_max: u64) -> Result<CoeffTable> {
    let xi = check_x(x)?;
    if n_max < 1 {
        return domain("n_max must be at least 1");
    }
    let primes = sieve_primes(xi)?;
    let local: HashMap<u64, Vec<f64>> = primes
        .primes()
        .iter()
        .map(|&p| (p, beta_local_factor(k, max_power(p, xi), max_power(p, n_max))))
        .collect();
    let mut entries = Vec::new();
    for_each_smooth(primes.primes(), n_max, u32::MAX, |n, fac| {
        let v: f64 = fac.iter().map(|&(p, e)| local[&p][e as usize]).product();
        entries.push((n, v));
    });
    entries.sort_unstable_by_key(|e| e.0);
    Ok(CoeffTable {
        kind: CoeffKind::Beta,
        k,
        x,
        n_max,
        omega_cap: None,
        entries,
    })
}

/// `A_p[e][j] = [y^e] ℓ_p(y)^j / j!` with `ℓ_p = Σ_{m≤M} y^m/m`.
fn alpha_local(big_m: u32, deg: u32) -> Vec<Vec<f64>> {
    let d = deg as usize;
    let ell: Vec<f64> = (0..=d)
        .map(|m| if m >= 1 && m <= big_m as usize { 1.0 / m as f64 } else { 0.0 })
        .collect();
    // pow[j] = ℓ^j / j!
    let mut a = vec![vec![0.0; d + 1]; d + 1];
    let mut pow = vec![0.0; d + 1];
    pow[0] = 1.0;
    for j in 0..=d {
        for e in 0..=d {
            a[e][j] = pow[e];
        }
        let mut next = vec![0.0; d + 1];
        for (i, &pi) in pow.iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            for m in 1..=d - i {
                next[i + m] += pi * ell[m];
            }
        }
        for v in next.iter_mut() {
            *v /= (j + 1) as f64;
        }
        pow = next;
    }
    a
}

/// `α_k(n)` for all `X`-smooth `n <= n_max`.
pub fn build_alpha(k: f64, x: f64, budget: &TruncationBudget, n_max: u64) -> Result<CoeffTable> {
    let xi = check_x(x)?;
    if n_max < 1 {
        return domain("n_max must be at least 1");
    }
    let w0 = budget.w0_floor() as usize;
    let primes = sieve_primes(xi)?;
    let local: HashMap<u64, Vec<Vec<f64>>> = primes
        .primes()
        .iter()
        .map(|&p| (p, alpha_local(max_power(p, xi), max_power(p, n_max))))
        .collect();
    let mut entries = Vec::new();
    for_each_smooth(primes.primes(), n_max, u32::MAX, |n, fac| {
        // polynomial in u tracking the total number j of factors, truncated at W0
        let mut poly = vec![1.0];
        for &(p, e) in fac {
            let row = &local[&p][e as usize];
            let mut next = vec![0.0; (poly.len() + e as usize).min(w0 + 1)];
            for (i, &c) in poly.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (j, &a) in row.iter().enumerate().take(e as usize + 1) {
                    if a == 0.0 || i + j > w0 {
                        continue;
                    }
                    next[i + j] += c * a * k.powi(j as i32);
                }
            }
            poly = next;
        }
        entries.push((n, poly.iter().sum()));
    });
    entries.sort_unstable_by_key(|e| e.0);
    Ok(CoeffTable {
        kind: CoeffKind::Alpha,
        k,
        x,
        n_max,
        omega_cap: Some(budget.w0_floor()),
        entries,
    })
}

/// `Σ a(n) n^{-1/2-it}` in ascending `n`.
pub fn eval_dirichlet(table: &CoeffTable, t: f64) -> Complex64 {
    table
        .entries
        .iter()
        .map(|&(n, c)| {
            let l = (n as f64).ln();
            crate::grid::phasor(t, l) * (c / (n as f64).sqrt())
        })
        .sum()
}

/// Grid version of [`eval_dirichlet`].
pub fn eval_dirichlet_grid(table: &CoeffTable, t0: f64, h: f64, count: usize) -> Vec<Complex64> {
    table.to_phasor().eval_grid(t0, h, count)
}

/// Rankin bound `r^{-W0} ∏_{p≤X} Σ_m d_{|k|}(p^m)^2 r^m p^{-m}` on
/// `Σ_{Ω(n)>W0} α_k(n)^2 / n`.
pub fn rankin_tail_bound(k: f64, x: f64, w0: f64, r: f64) -> Result<f64> {
    if !(r > 1.0 && r < 2.0) {
        return domain(format!("Rankin parameter must lie in (1, 2), got {r}"));
    }
    let xi = check_x(x)?;
    let primes = sieve_primes(xi)?;
    let ka = k.abs();
    let mut log_prod = 0.0;
    for &p in primes.primes() {
        let q = r / p as f64;
        let mut sum = 1.0;
        let mut qm = 1.0;
        for m in 1..100_000u32 {
            qm *= q;
            let d = divisor_k_prime_power(ka, m);
            let term = d * d * qm;
            sum += term;
            if term < 1e-17 * sum && m > 4 {
                break;
            }
        }
        log_prod += sum.ln();
    }
    Ok((log_prod - w0 * r.ln()).exp())
}

/// Bound on `Σ_{n > n_max} a(n)^2/n` for a table capped at `n_max`: every
/// dropped `X`-smooth `n` has `Ω(n) ≥ log n_max / log X`, so the Rankin bound
/// applies with that `W0`; minimised over `r` on a grid in `(1, 2)`.
pub fn cap_tail_bound(k: f64, x: f64, n_max: u64) -> Result<f64> {
    check_x(x)?;
    let w = (n_max.max(1) as f64).ln() / x.ln();
    let mut best = f64::INFINITY;
    for i in 1..20 {
        best = best.min(rankin_tail_bound(k, x, w, 1.0 + 0.05 * i as f64)?);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big_omega, divisor_k, factorize};

    #[test]
    fn budget_floor() {
        let b = TruncationBudget::new(1.0, 1e3, 2.0).unwrap();
        assert!(b.floor_applied);
        assert_eq!(b.v0, 2.0);
        assert_eq!(b.w0, 40.0);
        let big = TruncationBudget::new(1.0, 1e300, 2.0).unwrap();
        let l2 = 1e300f64.ln().ln();
        assert!(!big.floor_applied);
        assert!((big.v0 - l2 * l2.ln()).abs() < 1e-12);
    }

    #[test]
    fn local_factor_matches_binomial_series() {
        // no truncation: exp(-k log(1-y)) = (1-y)^{-k}
        for &k in &[-2.0, -0.5, 1.0, 3.0] {
            let c = beta_local_factor(k, 100, 10);
            for (m, &cm) in c.iter().enumerate() {
                assert!((cm - divisor_k_prime_power(k, m as u32)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn beta_examples() {
        let t = build_beta(2.0, 30.0, 10_000).unwrap();
        for p in [2u64, 3, 5, 29] {
            assert_eq!(t.get(p), Some(2.0));
        }
        let m = build_beta(-1.0, 30.0, 10_000).unwrap();
        for p in [2u64, 3, 5] {
            assert_eq!(m.get(p * p), Some(0.0));
        }
        assert_eq!(m.get(1), Some(1.0));
        // 7^2 > 30: the modified factor gives β_{-1}(49) = (-1)^2/2 = 1/2
        assert!((m.get(49).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn alpha_equals_beta_below_w0() {
        let budget = TruncationBudget::custom(1.0, 6.0);
        for &k in &[-2.0, -1.0, 1.0, 2.0] {
            let a = build_alpha(k, 20.0, &budget, 10_000).unwrap();
            let b = build_beta(k, 20.0, 10_000).unwrap();
            assert_eq!(a.len(), b.len());
            for (&(n, av), &(_, bv)) in a.entries().iter().zip(b.entries()) {
                if big_omega(n) <= 6 {
                    assert!((av - bv).abs() < 1e-12 * (1.0 + bv.abs()), "k={k} n={n}");
                }
                assert!(av.abs() <= divisor_k(k.abs(), n) + 1e-10);
            }
        }
    }

    #[test]
    fn multiplicativity() {
        let b = build_beta(1.5, 13.0, 50_000).unwrap();
        for &(m, bm) in b.entries().iter().take(60) {
            for &(n, bn) in b.entries().iter().take(60) {
                if m * n > 50_000 || crate::arith::factorize(m).iter().any(|&(p, _)| n % p == 0) {
                    continue;
                }
                let prod = b.get(m * n).unwrap();
                assert!((prod - bm * bn).abs() < 1e-12 * (1.0 + prod.abs()));
            }
        }
    }

    #[test]
    fn dirichlet_eval_basics() {
        let one = CoeffTable::from_entries(CoeffKind::Beta, 1.0, 2.0, vec![(1, 1.0)]);
        assert_eq!(eval_dirichlet(&one, 123.4), Complex64::new(1.0, 0.0));
        let b = build_beta(1.0, 7.0, 1000).unwrap();
        assert!(eval_dirichlet(&b, 0.0).im.abs() < 1e-15);
        let g = eval_dirichlet_grid(&b, 100.0, 0.1, 50);
        assert!((g[17] - eval_dirichlet(&b, 101.7)).norm() < 1e-10);
    }

    #[test]
    fn rankin_bound_properties() {
        assert!(rankin_tail_bound(1.0, 5.0, 4.0, 1.0).is_err());
        assert!(rankin_tail_bound(1.0, 5.0, 4.0, 2.0).is_err());
        let a = rankin_tail_bound(1.0, 5.0, 4.0, 1.5).unwrap();
        let b = rankin_tail_bound(1.0, 5.0, 8.0, 1.5).unwrap();
        assert!(b < a);
        // brute-force tail with d_1 = 1 coefficients on 5-smooth n <= 10^6
        let tail: f64 = (1..=1_000_000u64)
            .filter(|&n| factorize(n).iter().all(|&(p, _)| p <= 5) && big_omega(n) > 4)
            .map(|n| 1.0 / n as f64)
            .sum();
        for &r in &[1.1, 1.5, 1.9] {
            assert!(rankin_tail_bound(1.0, 5.0, 4.0, r).unwrap() >= tail);
        }
    }

    #[test]
    fn csv_export() {
        let b = build_beta(1.0, 3.0, 10).unwrap();
        let csv = b.to_csv();
        assert!(csv.starts_with("n,coefficient\n1,1\n2,1\n3,1\n4,"));
    }
}
