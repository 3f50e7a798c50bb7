//! Arithmetic end-products of the second and fourth moment computations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::sieve_primes;
use crate::coeffs::{beta_local_factor, build_beta, check_x, max_power};
use crate::error::Result;

/// Local sums are cut once the terms drop below this (relative to 1).
const LOCAL_TOL: f64 = 1e-18;
const MAX_LOCAL_DEG: usize = 400;

/// Degree needed so that `(deg+1)^4 p^{-deg}` is below the tolerance.
fn local_degree(p: u64) -> usize {
    let lp = (p as f64).ln();
    (1..MAX_LOCAL_DEG)
        .find(|&n| 4.0 * ((n + 1) as f64).ln() - n as f64 * lp < LOCAL_TOL.ln())
        .unwrap_or(MAX_LOCAL_DEG)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentArith {
    pub x: f64,
    /// `∏_{p≤X} Σ_{a,b} β_{-1}(p^a) β_{-1}(p^b) p^{-max(a,b)}`.
    pub product: f64,
    /// `∏_{p≤X} (1 - 1/p)`, the leading part of the product.
    pub mertens: f64,
    /// `Σ_{m,n≤n_max} β_{-1}(m) β_{-1}(n) (m,n)/(mn)` over the beta table.
    pub direct: Option<f64>,
    pub n_max: Option<u64>,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Diagonal of the second moment of `ζ · M_X`, with `M_X` the `β_{-1}`
/// mollifier: the Euler product and, when `n_max` is given, the direct
/// double sum over the truncated table.
pub fn second_moment_arith(x: f64, n_max: Option<u64>) -> Result<SecondMomentArith> {
    let xi = check_x(x)?;
    let primes = sieve_primes(xi)?;
    let mut product = 1.0;
    let mut mertens = 1.0;
    for &p in primes.primes() {
        let deg = local_degree(p);
        let c = beta_local_factor(-1.0, max_power(p, xi), deg as u32);
        let pf = p as f64;
        let mut local = 0.0;
        for (a, ca) in c.iter().enumerate() {
            for (b, cb) in c.iter().enumerate() {
                local += ca * cb * pf.powi(-(a.max(b) as i32));
            }
        }
        product *= local;
        mertens *= 1.0 - 1.0 / pf;
    }
    let direct = match n_max {
        Some(n) => {
            let table = build_beta(-1.0, x, n)?;
            let e: Vec<(u64, f64)> = table
                .entries()
                .iter()
                .filter(|e| e.1 != 0.0)
                .map(|&(n, b)| (n, b / n as f64))
                .collect();
            let rows: Vec<f64> = e
                .par_iter()
                .map(|&(m, bm)| e.iter().map(|&(n, bn)| bm * bn * gcd(m, n) as f64).sum::<f64>())
                .collect();
            Some(super::pairwise_sum(&rows))
        }
        None => None,
    };
    Ok(SecondMomentArith {
        x,
        product,
        mertens,
        direct,
        n_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourthMomentArith {
    pub x: f64,
    pub numerator: f64,
    /// `∏_{p≤X} (1 - 1/p)^4 / (1 - 1/p^2)`.
    pub denominator: f64,
    pub combined: f64,
    /// `numerator - 1`, expected to decay like `X^{-1/2+ε}`.
    pub numerator_minus_one: f64,
}

/// `Σ_N c_N^2 p^{-N}` where `c = β_{-2} * d` locally, i.e. the coefficients
/// of `exp(-2 Σ_{m≤M} y^m/m) (1-y)^{-2}`, with `M` the largest power of `p`
/// not exceeding `X`.
pub fn fourth_numerator_local(p: u64, x: u64) -> f64 {
    let deg = local_degree(p);
    let beta = beta_local_factor(-2.0, max_power(p, x), deg as u32);
    let pf = p as f64;
    let mut s = 0.0;
    for big_n in 0..=deg {
        // Σ_{a+b=N} β(p^a) d(p^b), d(p^b) = b + 1
        let c: f64 = (0..=big_n).map(|a| beta[a] * (big_n - a + 1) as f64).sum();
        s += c * c * pf.powi(-(big_n as i32));
    }
    s
}

/// Euler-product pieces of the fourth-moment constant.
pub fn fourth_moment_arith(x: f64) -> Result<FourthMomentArith> {
    let xi = check_x(x)?;
    let primes = sieve_primes(xi)?;
    let mut numerator = 1.0;
    let mut denominator = 1.0;
    for &p in primes.primes() {
        numerator *= fourth_numerator_local(p, xi);
        let inv = 1.0 / p as f64;
        denominator *= (1.0 - inv).powi(4) / (1.0 - inv * inv);
    }
    Ok(FourthMomentArith {
        x,
        numerator,
        denominator,
        combined: numerator * denominator,
        numerator_minus_one: numerator - 1.0,
    })
}
