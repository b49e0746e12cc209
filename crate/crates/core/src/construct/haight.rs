//! Squarefree `H` built from the primes in `(e^{√log N} log N, N]`, with
//! `α` and the `β` estimates for the system whose moduli are all divisors
//! `d > 1` of `H`.
//!
//! For squarefree `H` with prime set `P` every divisor sum factors over `P`,
//! so the `β` quantities have closed forms:
//!
//! * `Σ_{d|H} 1/d = Π (1 + 1/p)`, `Σ_{d|H} 1/d² = Π (1 + 1/p²)`;
//! * ordered coprime pairs `Σ_{(d1,d2)=1} 1/(d1 d2) = Π (1 + 2/p)`;
//! * `Σ_{d>1} Σ_{d|d1, d|d2} 1/(d1 d2) = Π ((1 + 1/p)² + 1/p²) - Π (1 + 1/p)²`.

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{Error, Result};
use crate::rational::{self, ExactRational};

/// Default ceiling on the number of divisors enumerated.
pub const DEFAULT_DIVISOR_GUARD: u64 = 1 << 20;

/// Default ceiling on the bit size of the exact `α` numerator.
pub const DEFAULT_EXACT_ALPHA_BITS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaChainStep {
    pub label: String,
    #[serde(with = "rational::serde_ratio")]
    pub value: ExactRational,
    pub approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorStats {
    /// Number of moduli, `2^k - 1`.
    pub moduli: u64,
    /// `Σ_{d|H, d>1} log(1 - 1/d)`.
    pub approx_log_alpha: f64,
    pub approx_alpha: f64,
    /// Exact `α` when its size is under the guard.
    #[serde(with = "rational::serde_ratio_opt")]
    pub alpha: Option<ExactRational>,
    /// Exact `β(C)`.
    #[serde(with = "rational::serde_ratio")]
    pub beta: ExactRational,
    pub approx_beta: f64,
    /// Successively weaker upper bounds on `β(C)`.
    pub beta_chain: Vec<BetaChainStep>,
    /// `log N · Σ_{d|H, d>1} 1/d²`, the final shape (constant one).
    pub approx_chain_shape: f64,
    /// `α` exceeds every bound in the chain.
    pub alpha_exceeds_chain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaightReport {
    pub n: u64,
    pub approx_threshold: f64,
    pub primes: Vec<u64>,
    /// `σ(H)/H = Π (1 + 1/p)`.
    #[serde(with = "rational::serde_ratio")]
    pub sigma_ratio: ExactRational,
    pub approx_sigma_ratio: f64,
    pub divisor_stats: Option<DivisorStats>,
}

/// `e^{√log N} · log N`.
pub fn haight_threshold(n: u64) -> f64 {
    let l = (n as f64).ln();
    l.sqrt().exp() * l
}

pub fn haight_moduli(n: u64, full_divisor_set: bool, guard: u64) -> Result<HaightReport> {
    let threshold = haight_threshold(n);
    let primes = if threshold < n as f64 {
        arith::primes_in(threshold, n as f64)
    } else {
        Vec::new()
    };
    if primes.is_empty() {
        return Err(Error::Domain(format!(
            "no primes in ({threshold:.3}, {n}]; N is too small"
        )));
    }
    let sigma_ratio = prod(&primes, |p| rational::ratio(p + 1, p));
    let divisor_stats = if full_divisor_set {
        Some(divisor_stats(n, &primes, guard)?)
    } else {
        None
    };
    Ok(HaightReport {
        n,
        approx_threshold: threshold,
        approx_sigma_ratio: rational::to_f64(&sigma_ratio),
        primes,
        sigma_ratio,
        divisor_stats,
    })
}

fn prod<F: Fn(u64) -> ExactRational>(primes: &[u64], f: F) -> ExactRational {
    primes.iter().fold(rational::one(), |acc, &p| acc * f(p))
}

/// Divisors of the squarefree product of `primes`, excluding 1, in
/// enumeration order.
pub fn squarefree_divisors(primes: &[u64]) -> Vec<u128> {
    let mut divisors = vec![1u128];
    for &p in primes {
        let more: Vec<u128> = divisors.iter().map(|&d| d * p as u128).collect();
        divisors.extend(more);
    }
    divisors.remove(0);
    divisors
}

fn divisor_stats(n: u64, primes: &[u64], guard: u64) -> Result<DivisorStats> {
    let k = primes.len() as u32;
    if k >= 63 || (1u64 << k) > guard {
        return Err(Error::guard("Haight divisor enumeration", format!("2^{k}"), guard));
    }
    if primes.iter().map(|&p| (p as f64).log2()).sum::<f64>() >= 127.0 {
        return Err(Error::guard("Haight divisor size", "128 bits", "128 bits"));
    }
    let divisors = squarefree_divisors(primes);
    let approx_log_alpha: f64 = divisors.iter().map(|&d| (-1.0 / d as f64).ln_1p()).sum();
    let alpha_bits: f64 = divisors.iter().map(|&d| (d as f64).log2()).sum();
    let alpha = (alpha_bits <= DEFAULT_EXACT_ALPHA_BITS as f64).then(|| {
        divisors.iter().fold(rational::one(), |acc, &d| {
            acc * rational::ratio_big((d - 1).into(), d.into())
        })
    });

    let one = rational::one();
    let recip = prod(primes, |p| rational::ratio(p + 1, p));
    let recip_sq = prod(primes, |p| rational::ratio(p * p + 1, p * p));
    let coprime_ordered = prod(primes, |p| rational::ratio(p + 2, p));
    // β over unordered non-coprime pairs of distinct divisors > 1.
    let all_ordered = (&recip - &one) * (&recip - &one);
    let coprime_gt1 = &coprime_ordered - rational::int(2) * &recip + &one;
    let diagonal = &recip_sq - &one;
    let beta = (all_ordered - coprime_gt1 - diagonal) / rational::int(2);

    let sharing = prod(primes, |p| {
        let a = rational::ratio(p + 1, p);
        &a * &a + rational::ratio(1, p * p)
    }) - &recip * &recip;
    let spread = (&recip_sq - &one) * &recip * &recip;
    let chain = vec![
        BetaChainStep {
            label: "sum over d>1 of pairs d1, d2 divisible by d".into(),
            approx: rational::to_f64(&sharing),
            value: sharing,
        },
        BetaChainStep {
            label: "sum over d>1 of 1/d^2 times (sigma(H)/H)^2".into(),
            approx: rational::to_f64(&spread),
            value: spread,
        },
    ];
    let approx_alpha = approx_log_alpha.exp();
    let approx_chain_shape = (n as f64).ln() * rational::to_f64(&(&recip_sq - &one));
    let alpha_exceeds_chain = chain.iter().all(|s| approx_alpha > s.approx);
    Ok(DivisorStats {
        moduli: divisors.len() as u64,
        approx_log_alpha,
        approx_alpha,
        alpha,
        approx_beta: rational::to_f64(&beta),
        beta,
        beta_chain: chain,
        approx_chain_shape,
        alpha_exceeds_chain,
    })
}
