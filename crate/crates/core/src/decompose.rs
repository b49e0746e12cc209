//! Splitting a system by `Q`-smooth parts of its moduli.
//!
//! With `n = n_Q · n_Q̄` and `M = lcm{n_Q}`, integers `≡ h (mod M)` avoid `C`
//! exactly when they avoid
//! `C_h = {(n_Q̄, r) : (n, r) ∈ C, r ≡ h (mod n_Q)}`, and the rough moduli
//! of `C_h` are coprime to `M`. Hence `δ(C) = (1/M) Σ_h δ(C_h)`.
//!
//! Many `h` share one `C_h`, so subsystems are stored once with a count.

use std::collections::HashMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, lcm_capped};
use crate::bounds::{self, AuditEntry, BoundCertificate, BoundKind};
use crate::density::{self, DensityMethod, DensityReport};
use crate::error::{Error, Result};
use crate::rational::{self, ExactRational};
use crate::system::{ResidueClass, ResidueSystem};

/// Default ceiling on `M`.
pub const DEFAULT_M_GUARD: u64 = 10_000_000;

/// All `h` in `[0, M)` sharing one subsystem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemGroup {
    /// Smallest `h` in the group.
    pub representative: u64,
    pub count: u64,
    pub system: ResidueSystem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub q: f64,
    pub m: u64,
    /// Groups ordered by representative.
    pub groups: Vec<SubsystemGroup>,
    /// `C' = {(n, r) ∈ C : P(n) ≤ Q}`.
    pub smooth_subsystem: ResidueSystem,
}

impl Decomposition {
    /// `Σ_h |C_h|`.
    pub fn total_pairs(&self) -> u64 {
        self.groups.iter().map(|g| g.count * g.system.len() as u64).sum()
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

/// `C_h` straight from the membership rule.
pub fn subsystem_at(c: &ResidueSystem, q: f64, h: u64) -> ResidueSystem {
    c.iter()
        .filter_map(|cl| {
            let (smooth, rough) = arith::smooth_split(cl.modulus(), q);
            (h % smooth == cl.residue() % smooth).then(|| ResidueClass::of(rough, cl.residue()))
        })
        .collect()
}

pub fn decompose(c: &ResidueSystem, q: f64, guard: u64) -> Result<Decomposition> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::Domain(format!("Q must be at least 1, got {q}")));
    }
    let splits: Vec<(u64, u64)> = c.moduli().map(|n| arith::smooth_split(n, q)).collect();
    let m = lcm_capped(splits.iter().map(|s| s.0), guard)
        .ok_or_else(|| Error::guard("decomposition modulus M", "more", guard))?;

    // Classes sharing a smooth part s contribute to C_h through h mod s only.
    // Give every residue t mod s a pattern id, then refine an id array over
    // growing moduli until it is indexed by h mod M.
    let mut smooth_parts: Vec<u64> = splits.iter().map(|s| s.0).collect();
    smooth_parts.sort_unstable();
    smooth_parts.dedup();
    let mut ids: Vec<u32> = vec![0];
    let mut cur = 1u64;
    for &s in &smooth_parts {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); s as usize];
        for (i, cl) in c.iter().enumerate() {
            if splits[i].0 == s {
                members[(cl.residue() % s) as usize].push(i);
            }
        }
        let mut pattern_of: HashMap<&[usize], u32> = HashMap::new();
        let pattern: Vec<u32> = members
            .iter()
            .map(|m| {
                let next = pattern_of.len() as u32;
                *pattern_of.entry(m.as_slice()).or_insert(next)
            })
            .collect();
        let next_mod = arith::lcm_checked(cur, s).expect("divides M");
        let mut combined: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next_ids = vec![0u32; next_mod as usize];
        for h in 0..next_mod {
            let key = (ids[(h % cur) as usize], pattern[(h % s) as usize]);
            let fresh = combined.len() as u32;
            next_ids[h as usize] = *combined.entry(key).or_insert(fresh);
        }
        ids = next_ids;
        cur = next_mod;
    }
    debug_assert_eq!(cur, m);

    let mut first: Vec<Option<(u64, u64)>> = Vec::new();
    for (h, &id) in ids.iter().enumerate() {
        let id = id as usize;
        if first.len() <= id {
            first.resize(id + 1, None);
        }
        match &mut first[id] {
            Some((_, count)) => *count += 1,
            slot @ None => *slot = Some((h as u64, 1)),
        }
    }
    // Distinct ids can still yield the same subsystem; merge those.
    let mut merged: HashMap<ResidueSystem, usize> = HashMap::new();
    let mut groups: Vec<SubsystemGroup> = Vec::new();
    let mut reps: Vec<(u64, u64)> = first.into_iter().flatten().collect();
    reps.sort_unstable();
    for (h, count) in reps {
        let system = subsystem_at(c, q, h);
        match merged.get(&system) {
            Some(&g) => groups[g].count += count,
            None => {
                merged.insert(system.clone(), groups.len());
                groups.push(SubsystemGroup {
                    representative: h,
                    count,
                    system,
                });
            }
        }
    }
    let smooth_subsystem = c.filter(|cl| arith::is_smooth(cl.modulus(), q));
    Ok(Decomposition {
        q,
        m,
        groups,
        smooth_subsystem,
    })
}

/// Guards for computations that need densities of the pieces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guards {
    pub m: u64,
    pub sieve: u64,
    pub terms: u64,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            m: DEFAULT_M_GUARD,
            sieve: density::DEFAULT_SIEVE_GUARD,
            terms: density::DEFAULT_TERM_GUARD,
        }
    }
}

fn weighted_average<F>(d: &Decomposition, f: F) -> Result<ExactRational>
where
    F: Fn(&ResidueSystem) -> Result<ExactRational> + Sync,
{
    let parts: Vec<ExactRational> = d
        .groups
        .par_iter()
        .map(|g| Ok(f(&g.system)? * rational::int(g.count)))
        .collect::<Result<_>>()?;
    let total = parts.into_iter().fold(rational::zero(), |a, b| a + b);
    Ok(total / rational::int(d.m))
}

/// `δ(C)` as the average of `δ(C_h)`.
pub fn density_decomposed(c: &ResidueSystem, q: f64, guards: Guards) -> Result<DensityReport> {
    let d = decompose(c, q, guards.m)?;
    let value = weighted_average(&d, |sys| Ok(density::density_auto(sys, guards.sieve, guards.terms)?.value))?;
    Ok(DensityReport::from_value(value, density::lcm_big(c.moduli()), DensityMethod::Decomposition))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    #[serde(with = "rational::serde_ratio")]
    pub lhs: ExactRational,
    #[serde(with = "rational::serde_ratio")]
    pub rhs: ExactRational,
    pub equal: bool,
    pub m: u64,
    pub groups: usize,
}

/// Both sides of `δ(C) = (1/M) Σ δ(C_h)`, computed independently.
pub fn decomposition_identity(c: &ResidueSystem, q: f64, guards: Guards) -> Result<IdentityCheck> {
    let lhs = density::exact_density(c, guards.sieve)?.value;
    let d = decompose(c, q, guards.m)?;
    let rhs = weighted_average(&d, |sys| Ok(density::density_auto(sys, guards.sieve, guards.terms)?.value))?;
    Ok(IdentityCheck {
        equal: lhs == rhs,
        lhs,
        rhs,
        m: d.m,
        groups: d.groups.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedBeta {
    #[serde(with = "rational::serde_ratio")]
    pub value: ExactRational,
    /// Largest multiplicity of a modulus in `C`.
    pub s: u32,
    /// `max n / min n`.
    pub k: f64,
    /// `s² log²(QK) / Q` with constant one.
    pub approx_shape: f64,
}

/// `(1/M) Σ_h β(C_h)`.
pub fn averaged_beta(c: &ResidueSystem, q: f64, guard: u64) -> Result<AveragedBeta> {
    let d = decompose(c, q, guard)?;
    let value = weighted_average(&d, |sys| Ok(bounds::beta(sys)))?;
    let s = c.max_multiplicity();
    let set = c.moduli_set();
    let k = match (set.min(), set.max()) {
        (Some(lo), Some(hi)) => hi as f64 / lo as f64,
        _ => 1.0,
    };
    let approx_shape = (s as f64).powi(2) * (q * k).ln().powi(2) / q;
    Ok(AveragedBeta {
        value,
        s,
        k,
        approx_shape,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaFloor {
    #[serde(with = "rational::serde_ratio")]
    pub avg_alpha: ExactRational,
    #[serde(with = "rational::serde_ratio")]
    pub alpha: ExactRational,
    /// `δ(C')` of the smooth subsystem.
    #[serde(with = "rational::serde_ratio")]
    pub smooth_density: ExactRational,
    /// `(1 + 1/Q) / δ(C')`.
    pub approx_exponent: f64,
    pub approx_avg_alpha: f64,
    /// `α(C)^{(1+1/Q)/δ(C')}`.
    pub approx_floor: f64,
    pub holds: bool,
}

/// Slack allowed when comparing the exact average with the floating floor.
pub const FLOOR_SLACK: f64 = 1e-12;

/// `(1/M) Σ α(C_h)` against `α(C)^{(1+1/Q)/δ(C')}`.
pub fn averaged_alpha_floor(c: &ResidueSystem, q: f64, guards: Guards) -> Result<AlphaFloor> {
    let d = decompose(c, q, guards.m)?;
    // C' has Q-smooth moduli, so its lcm divides M.
    let smooth_density = density::exact_density(&d.smooth_subsystem, guards.m.max(1))?.value;
    if smooth_density.is_zero() {
        return Err(Error::SmoothPartCovers);
    }
    let avg_alpha = weighted_average(&d, |sys| Ok(bounds::alpha(sys)))?;
    let alpha = bounds::alpha(c);
    let exponent = (1.0 + 1.0 / q) / rational::to_f64(&smooth_density);
    let log_alpha: f64 = c.moduli().map(|n| (1.0 - 1.0 / n as f64).ln()).sum();
    let approx_floor = (exponent * log_alpha).exp();
    let approx_avg_alpha = rational::to_f64(&avg_alpha);
    Ok(AlphaFloor {
        holds: approx_avg_alpha >= approx_floor - FLOOR_SLACK,
        avg_alpha,
        alpha,
        smooth_density,
        approx_exponent: exponent,
        approx_avg_alpha,
        approx_floor,
    })
}

/// `δ(C) ≥ (1/M) Σ_h max(0, α(C_h) - β(C_h))`.
pub fn positivity_certificate(c: &ResidueSystem, q: f64, guard: u64) -> Result<BoundCertificate> {
    let d = decompose(c, q, guard)?;
    let per_group: Vec<(ExactRational, ExactRational)> = d
        .groups
        .par_iter()
        .map(|g| (bounds::alpha(&g.system), bounds::beta(&g.system)))
        .collect();
    let m = rational::int(d.m);
    let mut lower = rational::zero();
    let mut avg_alpha = rational::zero();
    let mut terms = Vec::with_capacity(d.groups.len());
    for (g, (a, b)) in d.groups.iter().zip(per_group) {
        let weight = rational::ratio(g.count, 1);
        let clipped = (&a - &b).max(rational::zero());
        let contribution = &clipped * &weight / &m;
        terms.push(AuditEntry {
            label: format!("h={} (x{}, {} classes)", g.representative, g.count, g.system.len()),
            value: contribution.clone(),
        });
        lower += contribution;
        avg_alpha += a * weight / &m;
    }
    let correction = &avg_alpha - &lower;
    Ok(BoundCertificate::new(BoundKind::Decomposed, lower, avg_alpha, correction, terms))
}

/// Largest prime `≤ √(max modulus)`, at least 2.
pub fn suggest_q(c: &ResidueSystem) -> f64 {
    let top = c.moduli().max().unwrap_or(1);
    let root = (top as f64).sqrt().floor() as u64;
    (2..=root.max(2))
        .rev()
        .find(|&p| arith::is_prime(p))
        .unwrap_or(2) as f64
}

/// `Σ_{(n,r) ∈ C} M / n_Q`, the number of pairs the decomposition must hold.
pub fn expected_pairs(c: &ResidueSystem, q: f64, m: u64) -> u64 {
    c.moduli().map(|n| m / arith::smooth_split(n, q).0).sum()
}
