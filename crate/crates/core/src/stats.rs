//! Moments of `δ(C)` over the family `𝒞(T)` of all residue systems on a
//! moduli multiset `T`, each residue uniform and independent.
//!
//! The mean is always `Π (1 - 1/n)`. For distinct moduli `n ≥ 3` the second
//! moment has the closed form
//! `E[δ²] = Π (n-2)/n · Σ_{S ⊆ T} 1 / (M(S) L(S))` with
//! `M(S) = Π_{n∈S} (n-2)` and `L(S) = lcm(S)`: two residues `m1, m2` both
//! escape `(n, r(n))` with probability `(n-1)/n` or `(n-2)/n` depending on
//! whether `n | m1 - m2`, and expanding `Π_{n | m1-m2} (1 + 1/(n-2))` over
//! subsets leaves terms whose pair density is `1/L(S)`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, lcm_capped};
use crate::bounds::alpha_of;
use crate::density::{self, DEFAULT_SIEVE_GUARD, DEFAULT_TERM_GUARD};
use crate::error::{Error, Result};
use crate::rational::{self, ExactRational};
use crate::system::{ModuliSet, ResidueClass, ResidueSystem};

/// Default ceiling on `W(T)` for enumeration.
pub const DEFAULT_ENUMERATION_GUARD: u64 = 1_000_000;

/// Default ceiling on the period scanned per system during enumeration.
pub const DEFAULT_PERIOD_GUARD: u64 = 10_000_000;

/// Default ceiling on distinct lcms in the subset expansion.
pub const DEFAULT_PAIR_GUARD: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomModel {
    pub moduli: ModuliSet,
    /// `W(T) = Π n`.
    #[serde(with = "rational::serde_biguint")]
    pub w: BigUint,
    pub seed: Option<u64>,
}

impl RandomModel {
    pub fn new(moduli: ModuliSet, seed: Option<u64>) -> Self {
        let w = moduli.product();
        Self { moduli, w, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    Enumeration,
    PairFormula,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub moduli: ModuliSet,
    pub method: MomentMethod,
    #[serde(with = "rational::serde_ratio")]
    pub mean: ExactRational,
    #[serde(with = "rational::serde_ratio")]
    pub second_moment: ExactRational,
    /// `second_moment - mean²` (the empirical one for Monte Carlo).
    #[serde(with = "rational::serde_ratio")]
    pub variance: ExactRational,
    pub sample_count: Option<u64>,
    pub seed: Option<u64>,
    /// Standard error of the sample mean, Monte Carlo only.
    pub approx_standard_error: Option<f64>,
    /// `variance / (α² log N / N²)` with `N = min T`.
    pub approx_bound_ratio: Option<f64>,
}

impl MomentReport {
    fn new(moduli: &ModuliSet, method: MomentMethod, mean: ExactRational, second: ExactRational) -> Self {
        let variance = &second - &mean * &mean;
        let approx_bound_ratio = bound_ratio(moduli, &variance);
        Self {
            moduli: moduli.clone(),
            method,
            mean,
            second_moment: second,
            variance,
            sample_count: None,
            seed: None,
            approx_standard_error: None,
            approx_bound_ratio,
        }
    }
}

/// `α² log N / N²`, `N = min T`; `None` when it is zero or undefined.
pub fn bound_scale(t: &ModuliSet) -> Option<f64> {
    let n = t.min()?;
    let a = rational::to_f64(&alpha_of(t));
    let scale = a * a * (n as f64).ln() / (n as f64 * n as f64);
    (scale > 0.0 && scale.is_finite()).then_some(scale)
}

fn bound_ratio(t: &ModuliSet, variance: &ExactRational) -> Option<f64> {
    bound_scale(t).map(|s| rational::to_f64(variance) / s)
}

/// `E δ = Π (1 - 1/n)`.
pub fn expected_delta(t: &ModuliSet) -> ExactRational {
    alpha_of(t)
}

/// Exact moments by visiting all `W(T)` systems.
pub fn enumerate_moments(t: &ModuliSet, w_guard: u64, period_guard: u64) -> Result<MomentReport> {
    let w = t.product();
    if w > BigUint::from(w_guard) {
        return Err(Error::guard("systems to enumerate W(T)", w, w_guard));
    }
    let period = lcm_capped(t.iter(), period_guard)
        .ok_or_else(|| Error::guard("enumeration period", "more", period_guard))?;
    let mut moduli: Vec<u64> = t.iter().collect();
    moduli.sort_unstable_by(|a, b| b.cmp(a));
    // suffix lcms: cells only need tracking modulo the lcm of what is left
    let mut suffix = vec![1u64; moduli.len() + 1];
    for i in (0..moduli.len()).rev() {
        suffix[i] = arith::lcm_checked(suffix[i + 1], moduli[i]).expect("divides period");
    }
    let (s1, s2) = if moduli.is_empty() {
        (period as u128, (period as u128).pow(2))
    } else {
        let ones = vec![1u32; period as usize];
        (0..moduli[0])
            .into_par_iter()
            .map(|r| {
                let w = clear_and_fold(&ones, moduli[0], r, suffix[1]);
                let mut acc = (0u128, 0u128);
                walk(&moduli[1..], &suffix[1..], &w, &mut acc);
                acc
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    };
    let denom1 = &w * BigUint::from(period);
    let denom2 = &denom1 * BigUint::from(period);
    let mean = rational::ratio_big(BigUint::from(s1), denom1);
    let second = rational::ratio_big(BigUint::from(s2), denom2);
    Ok(MomentReport::new(t, MomentMethod::Enumeration, mean, second))
}

/// Drops the cells of `r mod n` from `w` and folds the rest modulo `to`.
fn clear_and_fold(w: &[u32], n: u64, r: u64, to: u64) -> Vec<u32> {
    let to = to as usize;
    let mut out = vec![0u32; to];
    for (x, &v) in w.iter().enumerate() {
        out[x % to] += v;
    }
    for x in (r as usize..w.len()).step_by(n as usize) {
        out[x % to] -= w[x];
    }
    out
}

// `w[x]` counts uncovered cells congruent to x modulo `w.len()`, which
// is `suffix[0] = lcm(rest)`. Accumulates Σ c and Σ c² over completions.
fn walk(rest: &[u64], suffix: &[u64], w: &[u32], acc: &mut (u128, u128)) {
    match rest {
        [] => {
            let c: u128 = w.iter().map(|&v| v as u128).sum();
            acc.0 += c;
            acc.1 += c * c;
        }
        [_] => {
            let before: u128 = w.iter().map(|&v| v as u128).sum();
            for &hit in w {
                let c = before - hit as u128;
                acc.0 += c;
                acc.1 += c * c;
            }
        }
        [n, tail @ ..] => {
            for r in 0..*n {
                let next = clear_and_fold(w, *n, r, suffix[1]);
                walk(tail, &suffix[1..], &next, acc);
            }
        }
    }
}

/// Exact moments from the subset expansion, without enumerating systems.
///
/// Subsets are merged by their lcm, so `guard` caps distinct lcms rather
/// than `2^|T|`.
pub fn pair_formula_moments(t: &ModuliSet, guard: u64) -> Result<MomentReport> {
    if !t.is_distinct() {
        return Err(Error::InvalidInput("pair formula needs distinct moduli".into()));
    }
    if let Some(n) = t.distinct().find(|&n| n < 3) {
        return Err(Error::ModulusTooSmall(n));
    }
    // lcm(S) -> Σ 1/M(S) over subsets S with that lcm
    let mut sums: HashMap<BigUint, ExactRational> = HashMap::new();
    sums.insert(BigUint::one(), rational::one());
    for n in t.distinct() {
        let weight = rational::ratio(1, n - 2);
        let bn = BigUint::from(n);
        let snapshot: Vec<(BigUint, ExactRational)> = sums.iter().map(|(l, v)| (l.clone(), v.clone())).collect();
        for (l, v) in snapshot {
            let l2 = l.lcm(&bn);
            *sums.entry(l2).or_insert_with(rational::zero) += v * &weight;
        }
        if sums.len() as u64 > guard {
            return Err(Error::guard("pair-formula lcm classes", sums.len(), guard));
        }
    }
    let expansion = sums
        .into_iter()
        .map(|(l, v)| v / rational::ratio_big(l, BigUint::one()))
        .fold(rational::zero(), |a, b| a + b);
    let prefactor = t
        .distinct()
        .fold(rational::one(), |acc, n| acc * rational::ratio(n - 2, n));
    let second = prefactor * expansion;
    Ok(MomentReport::new(t, MomentMethod::PairFormula, expected_delta(t), second))
}

/// One random system from `𝒞(T)`; trial `i` draws from its own stream.
pub fn sample_system(t: &ModuliSet, seed: u64, trial: u64) -> ResidueSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    t.iter().map(|n| ResidueClass::of(n, rng.random_range(0..n))).collect()
}

/// Empirical moments from `trials` seeded samples, each `δ` exact.
pub fn sample_moments(t: &ModuliSet, trials: u64, seed: u64, sieve_guard: u64) -> Result<MomentReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let deltas: Vec<ExactRational> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let c = sample_system(t, seed, i);
            Ok(density::density_auto(&c, sieve_guard, DEFAULT_TERM_GUARD)?.value)
        })
        .collect::<Result<_>>()?;
    let count = rational::int(trials);
    let s1 = deltas.iter().fold(rational::zero(), |a, d| a + d);
    let s2 = deltas.iter().fold(rational::zero(), |a, d| a + d * d);
    let mean = &s1 / &count;
    let second = &s2 / &count;
    let mut report = MomentReport::new(t, MomentMethod::MonteCarlo, mean, second);
    report.sample_count = Some(trials);
    report.seed = Some(seed);
    report.approx_standard_error = Some(standard_error(&report.variance, trials));
    Ok(report)
}

/// `√(variance / trials)`.
pub fn standard_error(variance: &ExactRational, trials: u64) -> f64 {
    (rational::to_f64(variance) / trials as f64).sqrt()
}

/// [`sample_moments`] with the default sieve guard.
pub fn sample_moments_default(t: &ModuliSet, trials: u64, seed: u64) -> Result<MomentReport> {
    sample_moments(t, trials, seed, DEFAULT_SIEVE_GUARD)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub moduli: ModuliSet,
    pub method: MomentMethod,
    #[serde(with = "rational::serde_ratio")]
    pub variance: ExactRational,
    pub approx_scale: Option<f64>,
    pub approx_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceScan {
    pub rows: Vec<ScanRow>,
    pub approx_max_ratio: Option<f64>,
}

/// Variance against `α² log N / N²` over a family; pair formula when it
/// applies, enumeration otherwise.
pub fn variance_bound_scan(family: &[ModuliSet]) -> Result<VarianceScan> {
    let mut rows = Vec::with_capacity(family.len());
    for t in family {
        let report = if t.is_distinct() && t.min().is_some_and(|n| n >= 3) {
            pair_formula_moments(t, DEFAULT_PAIR_GUARD)?
        } else {
            enumerate_moments(t, DEFAULT_ENUMERATION_GUARD, DEFAULT_PERIOD_GUARD)?
        };
        if let Some(r) = report.approx_bound_ratio {
            if !r.is_finite() {
                return Err(Error::Internal(format!("non-finite ratio for {t}")));
            }
        }
        rows.push(ScanRow {
            moduli: t.clone(),
            method: report.method,
            approx_scale: bound_scale(t),
            approx_ratio: report.approx_bound_ratio,
            variance: report.variance,
        });
    }
    let approx_max_ratio = rows.iter().filter_map(|r| r.approx_ratio).reduce(f64::max);
    Ok(VarianceScan { rows, approx_max_ratio })
}
