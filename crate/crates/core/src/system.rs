//! Residue classes, residue systems and moduli multisets.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One congruence `r (mod n)`, stored with `0 <= r < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(u64, i64)", into = "(u64, u64)")]
pub struct ResidueClass {
    modulus: u64,
    residue: u64,
}

impl ResidueClass {
    pub fn new(modulus: u64, residue: i64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidInput("modulus must be at least 1".into()));
        }
        let residue = (residue as i128).rem_euclid(modulus as i128) as u64;
        Ok(Self { modulus, residue })
    }

    /// Panics on a zero modulus; for literals in code and tests.
    pub fn of(modulus: u64, residue: u64) -> Self {
        assert!(modulus >= 1, "modulus must be at least 1");
        Self {
            modulus,
            residue: residue % modulus,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn contains(&self, x: u64) -> bool {
        x % self.modulus == self.residue
    }

    pub fn shifted(&self, t: u64) -> Self {
        Self::of(self.modulus, self.residue + t % self.modulus)
    }
}

impl TryFrom<(u64, i64)> for ResidueClass {
    type Error = Error;
    fn try_from((n, r): (u64, i64)) -> Result<Self> {
        Self::new(n, r)
    }
}

impl From<ResidueClass> for (u64, u64) {
    fn from(c: ResidueClass) -> Self {
        (c.modulus, c.residue)
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus)
    }
}

/// A finite ordered multiset of residue classes.
///
/// Order is kept: the refined alpha - beta bound depends on it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResidueSystem {
    classes: Vec<ResidueClass>,
}

impl ResidueSystem {
    pub fn new(classes: Vec<ResidueClass>) -> Self {
        Self { classes }
    }

    /// Builds from `(n, r)` literals; panics on zero moduli.
    pub fn from_pairs<I: IntoIterator<Item = (u64, u64)>>(pairs: I) -> Self {
        Self::new(pairs.into_iter().map(|(n, r)| ResidueClass::of(n, r)).collect())
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn classes(&self) -> &[ResidueClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn push(&mut self, class: ResidueClass) {
        self.classes.push(class);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ResidueClass> {
        self.classes.iter()
    }

    pub fn moduli(&self) -> impl Iterator<Item = u64> + '_ {
        self.classes.iter().map(|c| c.modulus)
    }

    /// `S(C)`.
    pub fn moduli_set(&self) -> ModuliSet {
        ModuliSet::from_moduli(self.moduli())
    }

    /// Largest number of classes sharing one modulus.
    pub fn max_multiplicity(&self) -> u32 {
        self.moduli_set().max_multiplicity()
    }

    pub fn covers(&self, x: u64) -> bool {
        self.classes.iter().any(|c| c.contains(x))
    }

    pub fn filter<F: Fn(&ResidueClass) -> bool>(&self, keep: F) -> Self {
        Self::new(self.classes.iter().copied().filter(|c| keep(c)).collect())
    }

    /// Adds `t` to every residue.
    pub fn shifted(&self, t: u64) -> Self {
        Self::new(self.classes.iter().map(|c| c.shifted(t)).collect())
    }

    /// Sorted by modulus descending, then residue ascending.
    pub fn sorted_descending(&self) -> Self {
        let mut classes = self.classes.clone();
        classes.sort_by(|a, b| b.modulus.cmp(&a.modulus).then(a.residue.cmp(&b.residue)));
        Self::new(classes)
    }

    pub fn pairwise_coprime(&self) -> bool {
        self.first_non_coprime_pair().is_none()
    }

    pub(crate) fn first_non_coprime_pair(&self) -> Option<(u64, u64)> {
        for (i, a) in self.classes.iter().enumerate() {
            for b in &self.classes[i + 1..] {
                if crate::arith::gcd(a.modulus, b.modulus) > 1 {
                    return Some((a.modulus, b.modulus));
                }
            }
        }
        None
    }
}

impl FromIterator<ResidueClass> for ResidueSystem {
    fn from_iter<I: IntoIterator<Item = ResidueClass>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a ResidueSystem {
    type Item = &'a ResidueClass;
    type IntoIter = std::slice::Iter<'a, ResidueClass>;
    fn into_iter(self) -> Self::IntoIter {
        self.classes.iter()
    }
}

/// A multiset of moduli, each with a multiplicity of at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ModuliSet {
    counts: BTreeMap<u64, u32>,
}

impl ModuliSet {
    /// Panics on zero moduli.
    pub fn from_moduli<I: IntoIterator<Item = u64>>(moduli: I) -> Self {
        let mut counts = BTreeMap::new();
        for n in moduli {
            assert!(n >= 1, "moduli must be positive");
            *counts.entry(n).or_insert(0) += 1;
        }
        Self { counts }
    }

    pub fn try_from_moduli<I: IntoIterator<Item = u64>>(moduli: I) -> Result<Self> {
        let moduli: Vec<u64> = moduli.into_iter().collect();
        if moduli.contains(&0) {
            return Err(Error::InvalidInput("moduli must be positive".into()));
        }
        Ok(Self::from_moduli(moduli))
    }

    pub fn is_distinct(&self) -> bool {
        self.counts.values().all(|&c| c == 1)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total number of elements counting multiplicity.
    pub fn len(&self) -> usize {
        self.counts.values().map(|&c| c as usize).sum()
    }

    pub fn multiplicity(&self, n: u64) -> u32 {
        self.counts.get(&n).copied().unwrap_or(0)
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.counts.values().copied().max().unwrap_or(0)
    }

    /// Distinct moduli, ascending.
    pub fn distinct(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.keys().copied()
    }

    /// Every element with repetition, ascending.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts
            .iter()
            .flat_map(|(&n, &c)| std::iter::repeat_n(n, c as usize))
    }

    pub fn min(&self) -> Option<u64> {
        self.counts.keys().next().copied()
    }

    pub fn max(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// `W(T)`, the product with multiplicity.
    pub fn product(&self) -> num_bigint::BigUint {
        self.iter().map(num_bigint::BigUint::from).product()
    }
}

impl fmt::Display for ModuliSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|n| n.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
