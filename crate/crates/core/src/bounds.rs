//! `α(C)`, `β(C)` and the lower bounds built from them, plus the smooth
//! reciprocal tail and the `L(N, s)` threshold.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::density::product_one_minus_inverse;
use crate::error::{Error, Result};
use crate::rational::{self, ExactRational};
use crate::system::{ModuliSet, ResidueSystem};

/// `α(C) = Π (1 - 1/n)` over the moduli multiset.
pub fn alpha(c: &ResidueSystem) -> ExactRational {
    product_one_minus_inverse(c.moduli())
}

pub fn alpha_of(s: &ModuliSet) -> ExactRational {
    product_one_minus_inverse(s.iter())
}

/// `β(C) = Σ_{i<j, gcd(n_i,n_j)>1} 1/(n_i n_j)` over index pairs.
///
/// Grouped by modulus: `c_a c_b / (ab)` for distinct non-coprime moduli and
/// `C(c_n, 2) / n²` within one modulus `n > 1`.
pub fn beta(c: &ResidueSystem) -> ExactRational {
    beta_of(&c.moduli_set())
}

pub fn beta_of(s: &ModuliSet) -> ExactRational {
    let moduli: Vec<(u64, u64)> = s.distinct().map(|n| (n, s.multiplicity(n) as u64)).collect();
    let mut total = rational::zero();
    for (i, &(a, ca)) in moduli.iter().enumerate() {
        if a > 1 && ca > 1 {
            total += rational::ratio_big(BigUint::from(ca * (ca - 1) / 2), BigUint::from(a) * a);
        }
        for &(b, cb) in &moduli[i + 1..] {
            if arith::gcd(a, b) > 1 {
                total += rational::ratio_big(BigUint::from(ca * cb), BigUint::from(a) * b);
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    AlphaBeta,
    Refined,
    Decomposed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    Positive,
    Inconclusive,
}

/// One line of a certificate's audit trail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub label: String,
    #[serde(with = "rational::serde_ratio")]
    pub value: ExactRational,
}

/// A lower bound on `δ(C)` with the quantities it was assembled from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub kind: BoundKind,
    #[serde(with = "rational::serde_ratio")]
    pub lower_bound: ExactRational,
    #[serde(with = "rational::serde_ratio")]
    pub alpha: ExactRational,
    /// What was subtracted from `alpha`: `β(C)` for the plain bound, the
    /// weighted pair sum for the refined one, and the averaged correction
    /// for the decomposed certificate.
    #[serde(with = "rational::serde_ratio")]
    pub beta: ExactRational,
    pub terms: Vec<AuditEntry>,
    pub conclusion: Conclusion,
}

impl BoundCertificate {
    pub(crate) fn new(
        kind: BoundKind,
        lower_bound: ExactRational,
        alpha: ExactRational,
        beta: ExactRational,
        terms: Vec<AuditEntry>,
    ) -> Self {
        let conclusion = if lower_bound.is_positive() {
            Conclusion::Positive
        } else {
            Conclusion::Inconclusive
        };
        Self {
            kind,
            lower_bound,
            alpha,
            beta,
            terms,
            conclusion,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.conclusion == Conclusion::Positive
    }
}

/// Class order used by the refined bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ordering {
    #[default]
    Stored,
    Descending,
}

/// `α(C) - β(C)`, or with `refined` the sharper
/// `α(C) - Σ_{i<j, gcd>1} 1/(n_i n_j) Π_{u>j} (1 - 1/n_u)`.
pub fn alpha_beta_bound(c: &ResidueSystem, refined: bool, order: Ordering) -> BoundCertificate {
    let a = alpha(c);
    if !refined {
        let b = beta(c);
        let terms = vec![
            AuditEntry {
                label: "alpha".into(),
                value: a.clone(),
            },
            AuditEntry {
                label: "beta".into(),
                value: b.clone(),
            },
        ];
        return BoundCertificate::new(BoundKind::AlphaBeta, &a - &b, a, b, terms);
    }
    let ordered = match order {
        Ordering::Stored => c.clone(),
        Ordering::Descending => c.sorted_descending(),
    };
    let moduli: Vec<u64> = ordered.moduli().collect();
    let k = moduli.len();
    // suffix[j] = Π_{u >= j} (1 - 1/n_u)
    let mut suffix = vec![rational::one(); k + 1];
    for j in (0..k).rev() {
        suffix[j] = &suffix[j + 1] * rational::ratio(moduli[j] - 1, moduli[j]);
    }
    let mut seen: BTreeMap<u64, u64> = BTreeMap::new();
    let mut subtracted = rational::zero();
    let mut terms = Vec::new();
    for j in 0..k {
        let nj = moduli[j];
        let partners = seen
            .iter()
            .filter(|&(&m, _)| arith::gcd(m, nj) > 1)
            .map(|(&m, &cnt)| rational::ratio(cnt, m))
            .fold(rational::zero(), |acc, x| acc + x);
        if !partners.is_zero() {
            let term = partners * rational::ratio(1, nj) * &suffix[j + 1];
            terms.push(AuditEntry {
                label: format!("pairs ending at index {j} (modulus {nj})"),
                value: term.clone(),
            });
            subtracted += term;
        }
        *seen.entry(nj).or_insert(0) += 1;
    }
    BoundCertificate::new(BoundKind::Refined, &a - &subtracted, a, subtracted, terms)
}

/// Exact smooth reciprocal tail `Σ_{n > N, P(n) ≤ Q} 1/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothTail {
    #[serde(with = "rational::serde_ratio")]
    pub value: ExactRational,
    /// `Π_{p ≤ Q} p/(p-1)`, the full sum over all `Q`-smooth `n`.
    #[serde(with = "rational::serde_ratio")]
    pub euler_product: ExactRational,
    /// `Σ_{n ≤ N, P(n) ≤ Q} 1/n`.
    #[serde(with = "rational::serde_ratio")]
    pub head: ExactRational,
    pub smooth_count: u64,
    /// `log N / log Q`.
    pub approx_u: f64,
    /// `(log Q) e^{-u log u}`, for shape comparison only.
    pub approx_shape: f64,
}

pub fn smooth_tail_sum(n: u64, q: f64) -> Result<SmoothTail> {
    if q.is_nan() || q < 2.0 || n == 0 {
        return Err(Error::Domain(format!("smooth tail needs N >= 1 and Q >= 2, got N={n}, Q={q}")));
    }
    let primes = arith::primes_in(0.0, q);
    let euler_product = primes
        .iter()
        .fold(rational::one(), |acc, &p| acc * rational::ratio(p, p - 1));
    let mut smooth = vec![1u64];
    for &p in &primes {
        let mut grown = Vec::new();
        for &m in &smooth {
            let mut x = m;
            while let Some(next) = x.checked_mul(p).filter(|&v| v <= n) {
                grown.push(next);
                x = next;
            }
        }
        smooth.extend(grown);
    }
    let head = sum_reciprocals(&smooth);
    let u = (n as f64).ln() / q.ln();
    let approx_shape = if u > 0.0 { q.ln() * (-u * u.ln()).exp() } else { q.ln() };
    Ok(SmoothTail {
        value: &euler_product - &head,
        euler_product,
        head,
        smooth_count: smooth.len() as u64,
        approx_u: u,
        approx_shape,
    })
}

fn sum_reciprocals(values: &[u64]) -> ExactRational {
    // Common denominator is the lcm; far cheaper than adding rationals one by one.
    let l = values.iter().fold(BigUint::one(), |acc, &v| {
        let v = BigUint::from(v);
        let g = num_integer::Integer::gcd(&acc, &v);
        acc / g * v
    });
    let num: BigUint = values.iter().map(|&v| &l / BigUint::from(v)).sum();
    rational::ratio_big(num, l)
}

/// `L(N, s) = exp(log N · log log(s log N) / log(s log N))`, floating only.
pub fn l_threshold(n: u64, s: u64) -> Result<f64> {
    if n < 2 || s == 0 {
        return Err(Error::Domain(format!("L(N, s) needs N >= 2 and s >= 1, got ({n}, {s})")));
    }
    let log_n = (n as f64).ln();
    let inner = s as f64 * log_n;
    if inner <= std::f64::consts::E {
        return Err(Error::Domain(format!("s log N = {inner} must exceed e")));
    }
    Ok((log_n * inner.ln().ln() / inner.ln()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn c3() -> ResidueSystem {
        ResidueSystem::from_pairs([(2, 0), (4, 1), (3, 0)])
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&c3()), ratio(1, 4));
        assert_eq!(alpha_of(&ModuliSet::from_moduli(11..=30)), ratio(1, 3));
        assert_eq!(alpha(&ResidueSystem::from_pairs([(1, 0)])), rational::zero());
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta(&c3()), ratio(1, 8));
        assert_eq!(beta(&ResidueSystem::from_pairs([(2, 0), (3, 1)])), rational::zero());
        assert_eq!(beta(&ResidueSystem::from_pairs([(2, 0), (2, 1), (4, 3)])), ratio(1, 2));
    }

    #[test]
    fn beta_matches_index_pairs() {
        let c = ResidueSystem::from_pairs([(6, 0), (4, 1), (6, 3), (9, 2), (5, 0), (10, 1), (4, 0)]);
        let m: Vec<u64> = c.moduli().collect();
        let mut direct = rational::zero();
        for i in 0..m.len() {
            for j in i + 1..m.len() {
                if arith::gcd(m[i], m[j]) > 1 {
                    direct += ratio(1, m[i] * m[j]);
                }
            }
        }
        assert_eq!(beta(&c), direct);
    }

    #[test]
    fn alpha_beta_examples() {
        let plain = alpha_beta_bound(&c3(), false, Ordering::Stored);
        assert_eq!(plain.lower_bound, ratio(1, 8));
        assert!(plain.is_positive());
        let refined = alpha_beta_bound(&c3(), true, Ordering::Stored);
        assert_eq!(refined.lower_bound, ratio(1, 6));
        let coprime = ResidueSystem::from_pairs([(3, 1), (5, 2), (7, 0)]);
        for r in [false, true] {
            let cert = alpha_beta_bound(&coprime, r, Ordering::Stored);
            assert_eq!(cert.lower_bound, alpha(&coprime));
            assert_eq!(cert.beta, rational::zero());
        }
    }

    // Tail over `n > x` of smooth `n` built from `primes`, by peeling the
    // largest prime and closing the geometric series once p^k > x.
    fn tail_oracle(x: f64, primes: &[u64]) -> ExactRational {
        let Some((&p, rest)) = primes.split_last() else {
            return if x < 1.0 { rational::one() } else { rational::zero() };
        };
        let full_rest = rest.iter().fold(rational::one(), |a, &q| a * ratio(q, q - 1));
        let mut total = rational::zero();
        let mut pk = 1u64;
        loop {
            if pk as f64 > x {
                // Σ_{j ≥ k} p^{-j} · (all of rest) = p^{-k} · p/(p-1) · full_rest
                total += ratio(1, pk) * ratio(p, p - 1) * &full_rest;
                return total;
            }
            total += ratio(1, pk) * tail_oracle(x / pk as f64, rest);
            pk *= p;
        }
    }

    #[test]
    fn smooth_tail_examples() {
        assert_eq!(smooth_tail_sum(10, 3.0).unwrap().value, ratio(37, 72));
        assert_eq!(smooth_tail_sum(1, 2.0).unwrap().value, rational::one());
        let t = smooth_tail_sum(100, 5.0).unwrap();
        assert!(t.value < ratio(15, 4));
        assert_eq!(t.euler_product, ratio(15, 4));
        assert_eq!(t.value, tail_oracle(100.0, &[2, 3, 5]));
        assert_eq!(smooth_tail_sum(1000, 7.5).unwrap().value, tail_oracle(1000.0, &[2, 3, 5, 7]));
    }

    #[test]
    fn l_threshold_examples() {
        let v = l_threshold(1_000_000, 1).unwrap();
        assert!((v - 160.6).abs() < 0.1, "{v}");
        let a = l_threshold(1_000_000, 10).unwrap();
        let b = l_threshold(1_000_000, 100).unwrap();
        assert!(v > a && a > b);
        let l20 = 20f64.ln();
        assert!((l_threshold(20, 1).unwrap() - (l20 * l20.ln().ln() / l20.ln()).exp()).abs() < 1e-12);
        assert!(l_threshold(2, 1).is_err());
    }
}
