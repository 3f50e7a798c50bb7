//! Elementary arithmetic: prime tables, the von Mangoldt function, generalized
//! divisor functions `d_k` for real `k`, smooth-number enumeration and the
//! arithmetic factor `a(k)` of the moment conjecture.

use crate::error::{domain, Result};
use crate::special::EULER_GAMMA;

/// All primes up to `limit`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Primes `p` with `lo < p <= hi`.
    pub fn range(&self, lo: f64, hi: f64) -> &[u64] {
        let a = self.primes.partition_point(|&p| (p as f64) <= lo);
        let b = self.primes.partition_point(|&p| (p as f64) <= hi);
        if a >= b {
            &[]
        } else {
            &self.primes[a..b]
        }
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n <= self.limit && self.primes.binary_search(&n).is_ok()
    }

    /// Prime powers `p^m <= limit` as `(p^m, p, m)`, sorted by `p^m`.
    pub fn prime_powers(&self) -> Vec<(u64, u64, u32)> {
        let mut out = Vec::with_capacity(self.primes.len() + 64);
        for &p in &self.primes {
            let mut q = p;
            let mut m = 1;
            loop {
                out.push((q, p, m));
                match q.checked_mul(p) {
                    Some(next) if next <= self.limit => {
                        q = next;
                        m += 1;
                    }
                    _ => break,
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Sieve of Eratosthenes over odd numbers.
pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    if limit < 2 {
        return domain(format!("sieve limit must be at least 2, got {limit}"));
    }
    let n = limit as usize;
    // composite[i] refers to the odd number 2i+1
    let half = n / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p;
            while j <= n {
                composite[j / 2] = true;
                j += 2 * p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2u64];
    primes.extend(
        (1..half)
            .filter(|&i| !composite[i] && 2 * i + 1 <= n)
            .map(|i| (2 * i + 1) as u64),
    );
    Ok(PrimeTable { limit, primes })
}

/// Prime factorization by trial division, as `(p, exponent)` pairs.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Number of prime factors counted with multiplicity.
pub fn big_omega(n: u64) -> u32 {
    factorize(n).iter().map(|&(_, e)| e).sum()
}

/// `Λ(n)`: `log p` when `n = p^m`, zero otherwise.
pub fn von_mangoldt(n: u64) -> Result<f64> {
    if n == 0 {
        return domain("von Mangoldt function is undefined at 0");
    }
    let f = factorize(n);
    Ok(if f.len() == 1 { (f[0].0 as f64).ln() } else { 0.0 })
}

/// `d_k(p^m) = k(k+1)...(k+m-1)/m!`.
///
/// Evaluated as a finite product so negative integer `k` gives exact zeros.
pub fn divisor_k_prime_power(k: f64, m: u32) -> f64 {
    let mut c = 1.0;
    for i in 0..m {
        c *= (k + i as f64) / (i as f64 + 1.0);
    }
    c
}

/// Generalized divisor function `d_k(n)` for real `k`.
pub fn divisor_k(k: f64, n: u64) -> f64 {
    factorize(n)
        .iter()
        .map(|&(_, e)| divisor_k_prime_power(k, e))
        .product()
}

/// Integers `n <= n_max` whose prime factors are all at most `x`, with at most
/// `omega_cap` prime factors counted with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothSet {
    pub x: u64,
    pub n_max: u64,
    pub omega_cap: u32,
    pub members: Vec<u64>,
}

impl SmoothSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }
}

/// Depth-first walk over `primes`-smooth integers `n <= n_max` with
/// `Ω(n) <= omega_cap`. The callback receives `n` and its factorization.
/// Visit order is not sorted.
pub fn for_each_smooth<F>(primes: &[u64], n_max: u64, omega_cap: u32, mut f: F)
where
    F: FnMut(u64, &[(u64, u32)]),
{
    let mut stack: Vec<(u64, u32)> = Vec::new();
    f(1, &stack);
    walk(primes, 0, 1, 0, n_max, omega_cap, &mut stack, &mut f);
}

#[allow(clippy::too_many_arguments)]
fn walk<F>(
    primes: &[u64],
    start: usize,
    n: u64,
    omega: u32,
    n_max: u64,
    omega_cap: u32,
    stack: &mut Vec<(u64, u32)>,
    f: &mut F,
) where
    F: FnMut(u64, &[(u64, u32)]),
{
    for (idx, &p) in primes.iter().enumerate().skip(start) {
        if omega >= omega_cap {
            return;
        }
        let Some(mut m) = n.checked_mul(p) else { return };
        if m > n_max {
            return;
        }
        let mut e = 1;
        loop {
            stack.push((p, e));
            f(m, stack);
            walk(primes, idx + 1, m, omega + e, n_max, omega_cap, stack, f);
            stack.pop();
            if omega + e >= omega_cap {
                break;
            }
            match m.checked_mul(p) {
                Some(next) if next <= n_max => {
                    m = next;
                    e += 1;
                }
                _ => break,
            }
        }
    }
}

/// Enumerate the `x`-smooth integers up to `n_max` with `Ω(n) <= omega_cap`.
/// Pass `u32::MAX` for an unbounded `Ω`.
pub fn enumerate_smooth(x: u64, n_max: u64, omega_cap: u32) -> Result<SmoothSet> {
    if x < 2 {
        return domain(format!("smoothness bound must be at least 2, got {x}"));
    }
    if n_max < 1 {
        return domain("n_max must be at least 1");
    }
    let table = sieve_primes(x)?;
    let mut members = Vec::new();
    for_each_smooth(table.primes(), n_max, omega_cap, |n, _| members.push(n));
    members.sort_unstable();
    Ok(SmoothSet {
        x,
        n_max,
        omega_cap,
        members,
    })
}

/// Truncated Euler product for `a(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArithmeticFactor {
    pub value: f64,
    /// `|local factor - 1|` at the largest prime used.
    pub last_factor_deviation: f64,
    /// Crude size of the omitted tail, assuming `1 + O(p^-2)` local factors.
    pub tail_estimate: f64,
    /// Set when the last local factor is still further than `tol` from 1.
    pub tail_flag: bool,
}

/// `log` of the local factor `(1-1/p)^{k^2} Σ_m d_k(p^m)^2 p^{-m}`.
fn log_local_a(k: f64, p: f64, tol: f64) -> f64 {
    let x = 1.0 / p;
    // Σ_{m>=1} accumulated apart from the leading 1 to avoid cancellation
    let mut rest = 0.0;
    let mut d = 1.0;
    let mut xm = 1.0;
    let mut m = 0u32;
    loop {
        d *= (k + m as f64) / (m as f64 + 1.0);
        m += 1;
        xm *= x;
        let term = d * d * xm;
        rest += term;
        if term.abs() <= tol * (1.0 + rest).abs() {
            break;
        }
        assert!(m < 10_000, "local sum for a(k) failed to converge at p={p}");
    }
    k * k * (-x).ln_1p() + rest.ln_1p()
}

/// `a(k) = Π_p (1-1/p)^{k^2} Σ_m d_k(p^m)^2/p^m` truncated to `p <= prime_limit`.
pub fn arithmetic_factor_a(k: f64, prime_limit: u64, tol: f64) -> Result<ArithmeticFactor> {
    if k <= -0.5 {
        return domain(format!("a(k) requires k > -1/2, got {k}"));
    }
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let primes = sieve_primes(prime_limit)?;
    let mut log_sum = 0.0;
    let mut last = 0.0;
    for &p in primes.primes() {
        last = log_local_a(k, p as f64, tol);
        log_sum += last;
    }
    let last_dev = last.exp_m1().abs();
    let p_last = *primes.primes().last().unwrap() as f64;
    Ok(ArithmeticFactor {
        value: log_sum.exp(),
        last_factor_deviation: last_dev,
        tail_estimate: last_dev * p_last / p_last.ln().max(1.0),
        tail_flag: last_dev > tol,
    })
}

/// `Π_{p<=x}(1-1/p)` and its ratio to `e^{-γ}/log x`.
pub fn mertens_product(x: u64) -> Result<(f64, f64)> {
    let primes = sieve_primes(x)?;
    let log_prod: f64 = primes
        .primes()
        .iter()
        .map(|&p| (-1.0 / p as f64).ln_1p())
        .sum();
    let prod = log_prod.exp();
    let mertens = (-EULER_GAMMA).exp() / (x as f64).ln();
    Ok((prod, prod / mertens))
}
