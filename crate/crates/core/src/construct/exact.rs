//! Exact covering systems with squarefree moduli built level by level.
//!
//! Level `j` uses the primes `P_j = (X_{j-1}, X_j]`. Starting from
//! `C_1 = {(2,0),(2,1)}`, every pair `(n, r)` on a modulus `n` is replaced by
//! the `q` pairs `(nq, r + nμ)`, `0 ≤ μ < q`, taking `[X/q_1]` parents through
//! the smallest prime `q_1` of the next block, the following `[X/q_2]` through
//! `q_2`, and so on. Replacing a class by all its lifts keeps the system an
//! exact cover, and `q · [X/q] ≤ X` bounds every multiplicity.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::density::is_exact_cover;
use crate::error::{Error, Result};
use crate::rational;
use crate::system::{ResidueClass, ResidueSystem};

/// Deepest level built by default.
pub const DEFAULT_DEPTH_CEILING: u32 = 4;

/// Deepest `j` for which [`xineq_check`] will sieve (`X_8 = 9^9`).
pub const XINEQ_MAX_LEVEL: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// `X_j = (j+1)^(j+1)`.
    #[default]
    Standard,
    /// `X_0 = 1` and `X_j` the least integer satisfying the block inequality.
    Minimal,
}

/// `X_0, ..., X_depth` under a schedule.
pub fn x_sequence(depth: u32, schedule: Schedule) -> Vec<u64> {
    match schedule {
        Schedule::Standard => (0..=depth).map(|j| ((j + 1) as u64).pow(j + 1)).collect(),
        Schedule::Minimal => {
            let mut xs = vec![1u64];
            for _ in 1..=depth {
                let prev = *xs.last().unwrap();
                let mut x = prev + 1;
                while block_sum(prev, x) < prev {
                    x += 1;
                }
                xs.push(x);
            }
            xs
        }
    }
}

/// `Σ_{lo < p ≤ hi} [hi / p]`.
fn block_sum(lo: u64, hi: u64) -> u64 {
    let mut total = 0u64;
    arith::for_each_prime_in(lo, hi, |p| total += hi / p);
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XineqCheck {
    pub j: u32,
    pub lhs: u64,
    pub rhs: u64,
    pub holds: bool,
}

/// Both sides of `Σ_{X_{j-1} < p ≤ X_j} [X_j / p] ≥ X_{j-1}`.
pub fn xineq_check(j: u32, schedule: Schedule) -> Result<XineqCheck> {
    if j == 0 {
        return Err(Error::InvalidInput("level must be at least 1".into()));
    }
    if schedule == Schedule::Standard && j > XINEQ_MAX_LEVEL {
        return Err(Error::guard("prime sieve level", j, XINEQ_MAX_LEVEL));
    }
    let xs = x_sequence(j, schedule);
    let (lo, hi) = (xs[j as usize - 1], xs[j as usize]);
    let lhs = block_sum(lo, hi);
    Ok(XineqCheck {
        j,
        lhs,
        rhs: lo,
        holds: lhs >= lo,
    })
}

/// Independent checks run on a finished construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanChecks {
    pub is_exact_cover: bool,
    pub min_modulus: u64,
    pub min_modulus_exceeds_n: bool,
    pub max_multiplicity: u32,
    pub multiplicity_within_x: bool,
    pub squarefree: bool,
}

impl PlanChecks {
    pub fn all_pass(&self) -> bool {
        self.is_exact_cover && self.min_modulus_exceeds_n && self.multiplicity_within_x && self.squarefree
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCoverPlan {
    pub depth: u32,
    pub schedule: Schedule,
    /// `X_0, ..., X_J`.
    pub x: Vec<u64>,
    /// `P_1, ..., P_J`.
    pub prime_blocks: Vec<Vec<u64>>,
    /// `N_J = Π_{j<J} X_j`.
    #[serde(with = "rational::serde_biguint")]
    pub n_bound: BigUint,
    pub system: ResidueSystem,
    pub checks: PlanChecks,
}

/// Builds `C_J`. Fails past `ceiling` or if a prime block runs out.
pub fn exact_cover_construct(depth: u32, schedule: Schedule, ceiling: u32) -> Result<ExactCoverPlan> {
    if depth == 0 {
        return Err(Error::InvalidInput("depth must be at least 1".into()));
    }
    if depth > ceiling {
        return Err(Error::CeilingExceeded {
            requested: depth,
            ceiling,
        });
    }
    let x = x_sequence(depth, schedule);
    let prime_blocks: Vec<Vec<u64>> = (1..=depth as usize)
        .map(|j| {
            let mut ps = Vec::new();
            arith::for_each_prime_in(x[j - 1], x[j], |p| ps.push(p));
            ps
        })
        .collect();
    if !prime_blocks[0].contains(&2) {
        return Err(Error::Internal("first prime block must contain 2".into()));
    }
    let mut classes = vec![ResidueClass::of(2, 0), ResidueClass::of(2, 1)];
    for level in 2..=depth {
        let cap = x[level as usize];
        let primes = &prime_blocks[level as usize - 1];
        let mut by_modulus: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for c in &classes {
            by_modulus.entry(c.modulus()).or_default().push(c.residue());
        }
        let mut next = Vec::new();
        for (n, mut residues) in by_modulus {
            residues.sort_unstable();
            let mut pending = residues.as_slice();
            let mut block = primes.iter();
            while !pending.is_empty() {
                let q = *block.next().ok_or(Error::XineqViolated { level, modulus: n })?;
                let take = ((cap / q) as usize).min(pending.len());
                let nq = n.checked_mul(q).ok_or_else(|| Error::Internal("modulus overflow".into()))?;
                for &r in &pending[..take] {
                    next.extend((0..q).map(|mu| ResidueClass::of(nq, r + n * mu)));
                }
                pending = &pending[take..];
            }
        }
        classes = next;
    }
    let system = ResidueSystem::new(classes);
    let n_bound: BigUint = x[..depth as usize].iter().map(|&v| BigUint::from(v)).product();
    let checks = run_checks(&system, &n_bound, x[depth as usize]);
    Ok(ExactCoverPlan {
        depth,
        schedule,
        x,
        prime_blocks,
        n_bound,
        system,
        checks,
    })
}

fn run_checks(system: &ResidueSystem, n_bound: &BigUint, cap: u64) -> PlanChecks {
    let set = system.moduli_set();
    let min_modulus = set.min().unwrap_or(0);
    let max_multiplicity = set.max_multiplicity();
    let squarefree = set.distinct().all(|n| arith::factorize(n).is_squarefree());
    PlanChecks {
        is_exact_cover: is_exact_cover(system).is_exact_cover,
        min_modulus,
        min_modulus_exceeds_n: BigUint::from(min_modulus) > *n_bound,
        max_multiplicity,
        multiplicity_within_x: max_multiplicity as u64 <= cap,
        squarefree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(x_sequence(3, Schedule::Standard), vec![1, 4, 27, 256]);
        assert_eq!(x_sequence(3, Schedule::Minimal), vec![1, 2, 5, 17]);
    }

    #[test]
    fn xineq_small_levels() {
        let c = xineq_check(1, Schedule::Standard).unwrap();
        assert_eq!((c.lhs, c.rhs, c.holds), (3, 1, true));
        let c = xineq_check(2, Schedule::Standard).unwrap();
        assert_eq!((c.lhs, c.rhs), (15, 4));
        assert!(xineq_check(9, Schedule::Standard).unwrap_err().is_guard());
    }

    #[test]
    fn first_levels() {
        let p1 = exact_cover_construct(1, Schedule::Standard, 4).unwrap();
        assert_eq!(p1.system, ResidueSystem::from_pairs([(2, 0), (2, 1)]));
        assert!(p1.checks.all_pass());
        let p2 = exact_cover_construct(2, Schedule::Standard, 4).unwrap();
        assert_eq!(p2.system.len(), 10);
        assert!(p2.system.moduli().all(|n| n == 10));
        assert_eq!(p2.n_bound, BigUint::from(4u32));
        assert!(p2.checks.all_pass());
        let p3 = exact_cover_construct(3, Schedule::Standard, 4).unwrap();
        assert_eq!(p3.system.len(), 294);
        let set = p3.system.moduli_set();
        assert_eq!((set.multiplicity(290), set.multiplicity(310)), (232, 62));
        assert!(p3.checks.all_pass());
    }

    #[test]
    fn minimal_schedule_builds_covers() {
        for depth in 1..=4 {
            let plan = exact_cover_construct(depth, Schedule::Minimal, 4).unwrap();
            assert!(plan.checks.all_pass(), "depth {depth}: {:?}", plan.checks);
        }
    }

    #[test]
    fn ceiling_enforced() {
        assert!(matches!(
            exact_cover_construct(5, Schedule::Standard, 4),
            Err(Error::CeilingExceeded { .. })
        ));
    }
}
