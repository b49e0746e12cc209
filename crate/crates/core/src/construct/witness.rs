//! Extending an uncovered residue of the smooth part to an uncovered integer.
//!
//! For moduli in `(1, B]` with multiplicity at most `s`, a prime
//! `p > √(sB)` divides at most `p - 1` members of `S(C)`, so some residue
//! `b(p)` mod `p` escapes all of their classes. Combining one uncovered
//! class `a mod L` of the smooth part `C_0` with these `b(p)` by CRT gives
//! an integer missed by every class of `C`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{self, crt_coprime_big};
use crate::density::{self, DEFAULT_SIEVE_GUARD};
use crate::error::{Error, Result};
use crate::rational;
use crate::system::ResidueSystem;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeChoice {
    pub p: u64,
    /// Members of `S(C)` divisible by `p`.
    pub multiples: u64,
    pub b: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    /// `√(sB)`.
    pub approx_cutoff: f64,
    pub smooth_part: ResidueSystem,
    /// `L`, the lcm of the smooth moduli.
    pub smooth_period: u64,
    /// Smallest uncovered residue of `C_0` mod `L`.
    pub smooth_residue: u64,
    pub choices: Vec<PrimeChoice>,
    /// Least nonnegative `A` with `A ≡ a (mod L)` and `A ≡ b(p) (mod p)`.
    #[serde(with = "rational::serde_biguint")]
    pub witness: BigUint,
    #[serde(with = "rational::serde_biguint")]
    pub modulus: BigUint,
    pub verified: bool,
}

/// `guard` bounds the lcm of the smooth part.
pub fn extend_witness(c: &ResidueSystem, bound: u64, s: u32, guard: u64) -> Result<WitnessReport> {
    if s == 0 {
        return Err(Error::InvalidInput("multiplicity bound must be at least 1".into()));
    }
    if let Some(bad) = c.moduli().find(|&n| n <= 1 || n > bound) {
        return Err(Error::InvalidInput(format!("modulus {bad} outside (1, {bound}]")));
    }
    if c.max_multiplicity() > s {
        return Err(Error::InvalidInput(format!(
            "a modulus appears {} times, above s = {s}",
            c.max_multiplicity()
        )));
    }
    let cutoff = (s as f64 * bound as f64).sqrt();
    let smooth_part = c.filter(|cl| arith::is_smooth(cl.modulus(), cutoff));
    let period = arith::lcm_capped(smooth_part.moduli(), guard)
        .ok_or_else(|| Error::guard("smooth part period", "more", guard))?;
    let a = density::uncovered_witness(&smooth_part, guard)?.ok_or(Error::SmoothPartCovers)?;

    let mut residues_by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for cl in c.iter().filter(|cl| !arith::is_smooth(cl.modulus(), cutoff)) {
        for p in arith::factorize(cl.modulus()).primes() {
            if (p as f64) > cutoff {
                residues_by_prime.entry(p).or_default().push(cl.residue() % p);
            }
        }
    }
    let mut choices = Vec::new();
    let mut pairs = vec![(BigUint::from(period), BigUint::from(a))];
    for (p, residues) in residues_by_prime {
        let multiples = residues.len() as u64;
        if multiples > p - 1 {
            return Err(Error::Internal(format!("{multiples} multiples of {p} exceed p - 1")));
        }
        let mut taken = vec![false; p as usize];
        for r in residues {
            taken[r as usize] = true;
        }
        let b = taken.iter().position(|t| !t).expect("fewer than p residues taken") as u64;
        choices.push(PrimeChoice { p, multiples, b });
        pairs.push((BigUint::from(p), BigUint::from(b)));
    }
    let (modulus, witness) = crt_coprime_big(&pairs);
    let verified = c.iter().all(|cl| {
        let n = BigUint::from(cl.modulus());
        (&witness % &n) != BigUint::from(cl.residue())
    });
    if !verified {
        return Err(Error::Internal(format!("witness {witness} is covered")));
    }
    debug_assert!(!modulus.is_zero());
    Ok(WitnessReport {
        approx_cutoff: cutoff,
        smooth_part,
        smooth_period: period,
        smooth_residue: a,
        choices,
        witness,
        modulus,
        verified,
    })
}

/// [`extend_witness`] with the default sieve guard.
pub fn extend_witness_default(c: &ResidueSystem, bound: u64, s: u32) -> Result<WitnessReport> {
    extend_witness(c, bound, s, DEFAULT_SIEVE_GUARD)
}
