//! Random-then-greedy residue choice for distinct moduli in `(N, KN]`.
//!
//! Residues for `N < n ≤ 2N` are uniform and independent. Each later
//! modulus `j` takes the class covering the most still-uncovered cells,
//! restricted to the `f(j)` classes that avoid `r(d) mod d` for every
//! `d | j` in `(N, 2N]`. All counting happens on a finite window `[0, W)`.
//!
//! Every uncovered cell lies in one of the `f(j)` admissible classes, so
//! the best of them holds at least a `1/f(j)` share; on window counts the
//! per-step inequality `after ≤ (1 - 1/f(j)) · before` holds exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arith::lcm_capped;
use crate::error::{Error, Result};
use crate::rational::{self, ExactRational};
use crate::sieve::Cells;
use crate::system::{ResidueClass, ResidueSystem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyStep {
    pub j: u64,
    /// `D(j)`: divisors of `j` in `(N, 2N]`.
    pub divisors: Vec<u64>,
    /// Number of residues mod `j` avoiding `r(d) mod d` for all `d ∈ D(j)`.
    pub f: u64,
    pub residue: u64,
    pub before: u64,
    pub after: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub n: u64,
    pub k: u64,
    pub seed: u64,
    pub window: u64,
    /// Uncovered window cells after the random phase.
    pub after_random: u64,
    pub steps: Vec<GreedyStep>,
    pub system: ResidueSystem,
    pub uncovered: u64,
    #[serde(with = "rational::serde_ratio")]
    pub uncovered_fraction: ExactRational,
}

/// `lcm(N+1, ..., KN)` when it is at most `cap`; a window this size makes
/// window fractions exact densities.
pub fn exact_period(n: u64, k: u64, cap: u64) -> Option<u64> {
    lcm_capped(n + 1..=k * n, cap)
}

/// `r(n)` for the random phase: one uniform draw from a stream keyed by `n`.
pub fn random_residue(seed: u64, n: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n);
    rng.random_range(0..n)
}

pub fn greedy_cover(n: u64, k: u64, seed: u64, window: u64) -> Result<GreedyTrace> {
    if n == 0 || k < 2 {
        return Err(Error::InvalidInput(format!("need N >= 1 and K >= 2, got N={n}, K={k}")));
    }
    let top = k
        .checked_mul(n)
        .ok_or_else(|| Error::InvalidInput("K·N overflows".into()))?;
    if window < top {
        return Err(Error::WindowTooSmall { window, needed: top });
    }
    let mut cells = Cells::full(window);
    let mut system = ResidueSystem::empty();
    let mut chosen = vec![0u64; (2 * n + 1) as usize];
    for m in n + 1..=(2 * n).min(top) {
        let r = random_residue(seed, m);
        chosen[m as usize] = r;
        cells.clear_class(m, r);
        system.push(ResidueClass::of(m, r));
    }
    let after_random = cells.count();
    let mut steps = Vec::new();
    for j in 2 * n + 1..=top {
        let divisors: Vec<u64> = (n + 1..=2 * n).filter(|d| j % d == 0).collect();
        let admissible: Vec<bool> = (0..j)
            .map(|r| divisors.iter().all(|&d| r % d != chosen[d as usize]))
            .collect();
        let f = admissible.iter().filter(|&&a| a).count() as u64;
        let before = cells.count();
        let counts = cells.class_counts(j);
        let mut best: Option<(u64, u64)> = None;
        for r in 0..j {
            if f > 0 && !admissible[r as usize] {
                continue;
            }
            let c = counts[r as usize];
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((r, c));
            }
        }
        let (residue, _) = best.expect("some residue is available");
        cells.clear_class(j, residue);
        system.push(ResidueClass::of(j, residue));
        steps.push(GreedyStep {
            j,
            divisors,
            f,
            residue,
            before,
            after: cells.count(),
        });
    }
    let uncovered = cells.count();
    Ok(GreedyTrace {
        n,
        k,
        seed,
        window,
        after_random,
        steps,
        system,
        uncovered,
        uncovered_fraction: rational::ratio(uncovered, window),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepInvariant {
    pub holds: bool,
    /// Steps where `after > (1 - 1/j) · before`.
    pub trivial_failures: Vec<u64>,
    /// Steps where `after > (1 - 1/f(j)) · before + slack`.
    pub refined_failures: Vec<u64>,
    /// Largest `after - (1 - 1/f(j)) · before` seen, as a rational.
    #[serde(with = "rational::serde_ratio_opt")]
    pub max_excess: Option<ExactRational>,
}

/// Checks both per-step inequalities on window counts, allowing `slack`
/// extra cells in the refined one.
pub fn greedy_step_invariant(trace: &GreedyTrace, slack: u64) -> StepInvariant {
    let mut trivial_failures = Vec::new();
    let mut refined_failures = Vec::new();
    let mut max_excess: Option<ExactRational> = None;
    for s in &trace.steps {
        // after ≤ (1 - 1/j) before  ⟺  j·after ≤ (j-1)·before
        if s.j as u128 * s.after as u128 > (s.j - 1) as u128 * s.before as u128 {
            trivial_failures.push(s.j);
        }
        if s.f == 0 {
            if s.after > slack {
                refined_failures.push(s.j);
            }
            continue;
        }
        let f = s.f as u128;
        if f * s.after as u128 > (f - 1) * s.before as u128 + f * slack as u128 {
            refined_failures.push(s.j);
        }
        let excess = rational::int(s.after) - rational::ratio((s.f - 1) * s.before, s.f);
        if max_excess.as_ref().is_none_or(|m| excess > *m) {
            max_excess = Some(excess);
        }
    }
    StepInvariant {
        holds: trivial_failures.is_empty() && refined_failures.is_empty(),
        trivial_failures,
        refined_failures,
        max_excess,
    }
}

/// `(1/K) exp(-log K / (3N))`.
pub fn strong_target(n: u64, k: u64) -> f64 {
    let kf = k as f64;
    (-(kf.ln()) / (3.0 * n as f64)).exp() / kf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::exact_density;

    #[test]
    fn tiny_exact_trace() {
        let period = exact_period(2, 3, 1000).unwrap();
        assert_eq!(period, 60);
        let t = greedy_cover(2, 3, 7, period).unwrap();
        assert_eq!(t.system.moduli().collect::<Vec<_>>(), vec![3, 4, 5, 6]);
        let six = t.steps.iter().find(|s| s.j == 6).unwrap();
        assert_eq!(six.divisors, vec![3]);
        assert_eq!(six.f, 4);
        let r3 = random_residue(7, 3);
        let brute = (0..6).filter(|r| r % 3 != r3).count() as u64;
        assert_eq!(six.f, brute);
        assert_eq!(exact_density(&t.system, 1000).unwrap().value, t.uncovered_fraction);
        let inv = greedy_step_invariant(&t, 0);
        assert!(inv.holds, "{inv:?}");
    }

    #[test]
    fn random_phase_only() {
        let t = greedy_cover(5, 2, 1, 1000).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.system.len(), 5);
        assert_eq!(t.after_random, t.uncovered);
    }

    #[test]
    fn rejects_small_window() {
        assert_eq!(greedy_cover(4, 10, 0, 39), Err(Error::WindowTooSmall { window: 39, needed: 40 }));
    }

    #[test]
    fn reproducible() {
        assert_eq!(greedy_cover(3, 5, 11, 10_000), greedy_cover(3, 5, 11, 10_000));
        assert_ne!(random_residue(1, 1_000_003), random_residue(2, 1_000_003));
    }
}
