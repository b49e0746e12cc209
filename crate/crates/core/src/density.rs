//! Exact uncovered density of residue systems and related searches.
//!
//! Four routes to `δ(C)` exist:
//!
//! * **lcm scan** – a bit-per-residue sieve over one period; the default and
//!   the reference everything else is tested against.
//! * **coprime product** – `Π (1 - 1/n)` when the moduli are pairwise coprime.
//! * **inclusion–exclusion** – a signed sum over the non-empty intersections of
//!   classes, run per coprime component. Practical when the period is
//!   astronomically large but few intersections are non-empty.
//! * **decomposition** – averaging over smooth-part residue classes, see
//!   [`crate::decompose`].

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, crt_merge, lcm_capped, lcm_checked_u128};
use crate::error::{Error, Result};
use crate::rational::{self, ExactRational};
use crate::sieve::{self, Cells};
use crate::system::{ModuliSet, ResidueClass, ResidueSystem};

/// Default ceiling on sieve cells scanned for one density.
pub const DEFAULT_SIEVE_GUARD: u64 = 1_000_000_000;

/// Default ceiling on inclusion–exclusion terms.
pub const DEFAULT_TERM_GUARD: u64 = 20_000_000;

/// Default ceiling on `Π n` for exhaustive `δ⁻` search.
pub const DEFAULT_EXHAUSTIVE_GUARD: u64 = 10_000_000;

/// Above this many moduli `δ⁺` is computed by sieving instead of
/// inclusion–exclusion.
pub const DELTA_PLUS_IE_MAX: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityMethod {
    LcmScan,
    CoprimeProduct,
    Decomposition,
    InclusionExclusion,
}

/// `δ(C)` together with the period it was established over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityReport {
    #[serde(with = "rational::serde_ratio")]
    pub value: ExactRational,
    #[serde(with = "rational::serde_biguint")]
    pub period: BigUint,
    pub method: DensityMethod,
    #[serde(with = "rational::serde_biguint")]
    pub uncovered_count: BigUint,
}

impl DensityReport {
    pub fn from_value(value: ExactRational, period: BigUint, method: DensityMethod) -> Self {
        let count = &value * BigRational::from_integer(BigInt::from(period.clone()));
        debug_assert!(count.is_integer());
        let uncovered_count = count.to_integer().to_biguint().expect("density is nonnegative");
        Self {
            value,
            period,
            method,
            uncovered_count,
        }
    }
}

fn period_of(c: &ResidueSystem, guard: u64) -> Result<u64> {
    match lcm_capped(c.moduli(), guard) {
        Some(l) => Ok(l),
        None => Err(Error::guard("lcm scan period", "more", guard)),
    }
}

/// `δ(C)` by sieving one full period. Fails with a guard signal when
/// `lcm S(C)` exceeds `guard` cells.
pub fn exact_density(c: &ResidueSystem, guard: u64) -> Result<DensityReport> {
    let period = period_of(c, guard)?;
    let scan = sieve::scan(c.classes(), period);
    Ok(DensityReport {
        value: rational::ratio(scan.uncovered, period),
        period: BigUint::from(period),
        method: DensityMethod::LcmScan,
        uncovered_count: BigUint::from(scan.uncovered),
    })
}

/// `Π (1 - 1/n)` for pairwise coprime moduli.
pub fn density_coprime(c: &ResidueSystem) -> Result<ExactRational> {
    if let Some((a, b)) = c.first_non_coprime_pair() {
        return Err(Error::NotCoprime(a, b));
    }
    Ok(product_one_minus_inverse(c.moduli()))
}

pub(crate) fn product_one_minus_inverse<I: IntoIterator<Item = u64>>(moduli: I) -> ExactRational {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for n in moduli {
        num *= n - 1;
        den *= n;
    }
    rational::ratio_big(num, den)
}

/// Smallest nonnegative integer avoiding every class, or `None` when `C`
/// covers the integers.
pub fn uncovered_witness(c: &ResidueSystem, guard: u64) -> Result<Option<u64>> {
    let period = period_of(c, guard)?;
    Ok(sieve::first_uncovered(c.classes(), period))
}

/// Removes duplicates and classes contained in another class. The union (and
/// so the density) is unchanged.
pub fn drop_redundant(c: &ResidueSystem) -> ResidueSystem {
    let mut classes: Vec<ResidueClass> = c.classes().to_vec();
    classes.sort_unstable();
    classes.dedup();
    let keep: Vec<ResidueClass> = classes
        .iter()
        .filter(|a| {
            !classes.iter().any(|b| {
                b != *a && a.modulus() % b.modulus() == 0 && a.residue() % b.modulus() == b.residue()
            })
        })
        .copied()
        .collect();
    ResidueSystem::new(keep)
}

/// Connected components of the "moduli share a factor" graph. Classes in
/// different components are independent by CRT.
pub fn coprime_components(c: &ResidueSystem) -> Vec<ResidueSystem> {
    let k = c.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let cls = c.classes();
    for i in 0..k {
        for j in i + 1..k {
            if arith::gcd(cls[i].modulus(), cls[j].modulus()) > 1 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<ResidueClass>> = BTreeMap::new();
    for (i, cl) in cls.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(*cl);
    }
    groups.into_values().map(ResidueSystem::new).collect()
}

/// `δ(C)` by inclusion–exclusion over intersections of classes.
///
/// `δ(C) = Σ_{A ⊆ C} (-1)^{|A|} / lcm(A)` where the sum runs over subsets with
/// a non-empty common intersection. Runs per coprime component (the density
/// is the product over components) after dropping redundant classes.
/// `term_guard` caps the number of non-empty intersections visited.
pub fn density_inclusion_exclusion(c: &ResidueSystem, term_guard: u64) -> Result<DensityReport> {
    let reduced = drop_redundant(c);
    if reduced.moduli().any(|n| n == 1) {
        let period = lcm_big(c.moduli());
        return Ok(DensityReport::from_value(rational::zero(), period, DensityMethod::InclusionExclusion));
    }
    let mut value = rational::one();
    let mut budget = term_guard;
    for comp in coprime_components(&reduced) {
        value *= component_inclusion_exclusion(&comp, &mut budget, term_guard)?;
        if value.is_zero() {
            break;
        }
    }
    Ok(DensityReport::from_value(value, lcm_big(c.moduli()), DensityMethod::InclusionExclusion))
}

pub(crate) fn lcm_big<I: IntoIterator<Item = u64>>(moduli: I) -> BigUint {
    let mut acc = BigUint::one();
    for n in moduli {
        let n = BigUint::from(n);
        let g = acc.gcd(&n);
        acc = acc / g * n;
    }
    acc
}

fn component_inclusion_exclusion(c: &ResidueSystem, budget: &mut u64, guard: u64) -> Result<ExactRational> {
    // Larger moduli first keeps intersections sparse early.
    let mut cls: Vec<(u128, u128)> = c
        .iter()
        .map(|cl| (cl.modulus() as u128, cl.residue() as u128))
        .collect();
    cls.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut coef: HashMap<u128, i128> = HashMap::new();
    coef.insert(1, 1);

    struct Walk<'a> {
        cls: &'a [(u128, u128)],
        coef: &'a mut HashMap<u128, i128>,
        budget: &'a mut u64,
        guard: u64,
    }
    impl Walk<'_> {
        fn go(&mut self, from: usize, l: u128, x: u128, sign: i128) -> Result<()> {
            for i in from..self.cls.len() {
                let (n, r) = self.cls[i];
                let g = num_integer::gcd(l, n);
                if x % g != r % g {
                    continue;
                }
                let Some((l2, x2)) = crt_merge(l, x, n, r) else {
                    return Err(Error::guard("inclusion-exclusion lcm", "more than 128 bits", "128 bits"));
                };
                if *self.budget == 0 {
                    return Err(Error::guard("inclusion-exclusion terms", "more", self.guard));
                }
                *self.budget -= 1;
                *self.coef.entry(l2).or_insert(0) -= sign;
                self.go(i + 1, l2, x2, -sign)?;
            }
            Ok(())
        }
    }
    Walk {
        cls: &cls,
        coef: &mut coef,
        budget,
        guard,
    }
    .go(0, 1, 0, 1)?;
    Ok(sum_over_lcms(&coef))
}

fn sum_over_lcms(coef: &HashMap<u128, i128>) -> ExactRational {
    let mut period = BigUint::one();
    for &l in coef.keys() {
        let l = BigUint::from(l);
        let g = period.gcd(&l);
        period = period / g * l;
    }
    let mut total = BigInt::zero();
    for (&l, &c) in coef {
        if c != 0 {
            total += BigInt::from(c) * BigInt::from(&period / BigUint::from(l));
        }
    }
    BigRational::new(total, BigInt::from(period))
}

/// Picks the cheapest exact route: coprime product, lcm scan within
/// `sieve_guard`, otherwise inclusion–exclusion within `term_guard`.
pub fn density_auto(c: &ResidueSystem, sieve_guard: u64, term_guard: u64) -> Result<DensityReport> {
    if c.pairwise_coprime() {
        let value = density_coprime(c)?;
        return Ok(DensityReport::from_value(value, lcm_big(c.moduli()), DensityMethod::CoprimeProduct));
    }
    match exact_density(c, sieve_guard) {
        Err(e) if e.is_guard() => density_inclusion_exclusion(c, term_guard),
        other => other,
    }
}

/// Two classes are disjoint iff `r1 ≢ r2 (mod gcd(n1, n2))`.
pub fn classes_disjoint(a: &ResidueClass, b: &ResidueClass) -> bool {
    let g = arith::gcd(a.modulus(), b.modulus());
    a.residue() % g != b.residue() % g
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExactCoverViolation {
    /// `Σ 1/n ≠ 1`; `deficit = 1 - Σ 1/n` (negative when the sum exceeds one).
    ReciprocalSum {
        #[serde(with = "rational::serde_ratio")]
        deficit: ExactRational,
    },
    /// The first pair of indices `i < j` (lexicographically) whose classes meet.
    Overlap {
        first: usize,
        second: usize,
        a: ResidueClass,
        b: ResidueClass,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactCoverReport {
    pub is_exact_cover: bool,
    #[serde(with = "rational::serde_ratio")]
    pub reciprocal_sum: ExactRational,
    pub violation: Option<ExactCoverViolation>,
}

/// Exact-cover test without a period scan: reciprocal sum exactly one and
/// all classes pairwise disjoint.
pub fn is_exact_cover(c: &ResidueSystem) -> ExactCoverReport {
    let mut by_modulus: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for cl in c {
        by_modulus.entry(cl.modulus()).or_default().push(cl.residue());
    }
    let reciprocal_sum = by_modulus
        .iter()
        .map(|(&n, rs)| rational::ratio(rs.len() as u64, n))
        .fold(rational::zero(), |acc, x| acc + x);
    if reciprocal_sum != rational::one() {
        let deficit = rational::one() - &reciprocal_sum;
        return ExactCoverReport {
            is_exact_cover: false,
            reciprocal_sum,
            violation: Some(ExactCoverViolation::ReciprocalSum { deficit }),
        };
    }
    if grouped_disjoint(&by_modulus) {
        return ExactCoverReport {
            is_exact_cover: true,
            reciprocal_sum,
            violation: None,
        };
    }
    let cls = c.classes();
    for i in 0..cls.len() {
        for j in i + 1..cls.len() {
            if !classes_disjoint(&cls[i], &cls[j]) {
                return ExactCoverReport {
                    is_exact_cover: false,
                    reciprocal_sum,
                    violation: Some(ExactCoverViolation::Overlap {
                        first: i,
                        second: j,
                        a: cls[i],
                        b: cls[j],
                    }),
                };
            }
        }
    }
    unreachable!("grouped check found an overlap the pairwise scan did not")
}

fn grouped_disjoint(by_modulus: &BTreeMap<u64, Vec<u64>>) -> bool {
    let groups: Vec<(&u64, &Vec<u64>)> = by_modulus.iter().collect();
    for (i, &(&n1, r1)) in groups.iter().enumerate() {
        let mut seen = HashSet::with_capacity(r1.len());
        if !r1.iter().all(|r| seen.insert(*r)) {
            return false;
        }
        for &(&n2, r2) in &groups[i + 1..] {
            let g = arith::gcd(n1, n2);
            if g == 1 {
                return false;
            }
            let smaller: HashSet<u64> = r1.iter().map(|r| r % g).collect();
            if r2.iter().any(|r| smaller.contains(&(r % g))) {
                return false;
            }
        }
    }
    true
}

/// `δ⁺(S)`: density of integers divisible by no member of `S`.
pub fn delta_plus(s: &ModuliSet, guard: u64) -> Result<ExactRational> {
    if !s.is_distinct() {
        return Err(Error::InvalidInput("delta_plus needs distinct moduli".into()));
    }
    if s.distinct().any(|n| n == 1) {
        return Ok(rational::zero());
    }
    let all: Vec<u64> = s.distinct().collect();
    let reduced: Vec<u64> = all
        .iter()
        .copied()
        .filter(|&m| !all.iter().any(|&d| d != m && m % d == 0))
        .collect();
    if reduced.len() <= DELTA_PLUS_IE_MAX {
        if let Some(v) = delta_plus_lcm_lattice(&reduced, guard) {
            return Ok(v);
        }
    }
    let zeros = ResidueSystem::new(reduced.iter().map(|&n| ResidueClass::of(n, 0)).collect());
    Ok(exact_density(&zeros, guard)?.value)
}

// Inclusion–exclusion with terms merged by lcm. None on overflow or when the
// lattice outgrows `guard` entries.
fn delta_plus_lcm_lattice(moduli: &[u64], guard: u64) -> Option<ExactRational> {
    let mut coef: HashMap<u128, i128> = HashMap::new();
    coef.insert(1, 1);
    for &m in moduli {
        let snapshot: Vec<(u128, i128)> = coef.iter().map(|(&l, &c)| (l, c)).collect();
        for (l, c) in snapshot {
            if c == 0 {
                continue;
            }
            let l2 = lcm_checked_u128(l, m as u128)?;
            *coef.entry(l2).or_insert(0) -= c;
        }
        coef.retain(|_, c| *c != 0);
        if coef.len() as u64 > guard {
            return None;
        }
    }
    Some(sum_over_lcms(&coef))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    Exhaustive,
    Greedy,
}

/// Result of a `δ⁻` computation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaMinus {
    pub mode: SearchMode,
    /// Exact `δ⁻(S)` in exhaustive mode; the achieved density (an upper
    /// bound on `δ⁻(S)`) in greedy mode.
    #[serde(with = "rational::serde_ratio")]
    pub value: ExactRational,
    /// `Π (1 - 1/n)` over `S`, the peeling bound.
    #[serde(with = "rational::serde_ratio")]
    pub alpha: ExactRational,
    #[serde(with = "rational::serde_ratio")]
    pub reciprocal_sum: ExactRational,
    pub witness: ResidueSystem,
}

pub fn delta_minus(s: &ModuliSet, mode: SearchMode, guard: u64) -> Result<DeltaMinus> {
    let alpha = product_one_minus_inverse(s.iter());
    let reciprocal_sum = s
        .iter()
        .map(|n| rational::ratio(1, n))
        .fold(rational::zero(), |a, b| a + b);
    let (value, witness) = match mode {
        SearchMode::Greedy => {
            let l = lcm_capped(s.iter(), guard).ok_or_else(|| Error::guard("greedy period", "more", guard))?;
            greedy_peel(&s.iter().collect::<Vec<_>>(), l)
        }
        SearchMode::Exhaustive => {
            let product = s.product();
            if product > BigUint::from(guard) {
                return Err(Error::guard("exhaustive residue choices", product, guard));
            }
            let l = lcm_capped(s.iter(), guard).expect("lcm divides the product");
            exhaustive_minimum(s, l)
        }
    };
    Ok(DeltaMinus {
        mode,
        value,
        alpha,
        reciprocal_sum,
        witness,
    })
}

// Peeling: each modulus takes the residue class holding the most uncovered
// cells (smallest residue on ties).
fn greedy_peel(moduli: &[u64], period: u64) -> (ExactRational, ResidueSystem) {
    let mut cells = Cells::full(period);
    let mut witness = ResidueSystem::empty();
    for &n in moduli {
        let counts = cells.class_counts(n);
        let (best_r, _) = counts
            .iter()
            .enumerate()
            .fold((0usize, 0u64), |(br, bc), (r, &c)| if c > bc { (r, c) } else { (br, bc) });
        cells.clear_class(n, best_r as u64);
        witness.push(ResidueClass::of(n, best_r as u64));
    }
    (rational::ratio(cells.count(), period), witness)
}

// Depth-first over moduli in decreasing order. The first modulus is pinned to
// residue 0 (translation invariance) and runs of equal moduli take
// nondecreasing residues; the lexicographically first optimum satisfies both.
fn exhaustive_minimum(s: &ModuliSet, period: u64) -> (ExactRational, ResidueSystem) {
    let mut moduli: Vec<u64> = s.iter().collect();
    moduli.sort_unstable_by(|a, b| b.cmp(a));
    if moduli.is_empty() {
        return (rational::one(), ResidueSystem::empty());
    }
    let (greedy_value, _) = greedy_peel(&moduli, period);
    let greedy_count = (greedy_value * rational::int(period)).to_integer().to_u64().unwrap();

    // Lower bound on what the moduli from index i onward can still remove.
    let mut reach = vec![0u64; moduli.len() + 1];
    for i in (0..moduli.len()).rev() {
        reach[i] = reach[i + 1] + period / moduli[i];
    }

    struct Search<'a> {
        moduli: &'a [u64],
        reach: &'a [u64],
        best: u64,
        best_choice: Vec<u64>,
        choice: Vec<u64>,
    }
    impl Search<'_> {
        fn go(&mut self, depth: usize, cells: &Cells) {
            let count = cells.count();
            if self.best == 0 || count.saturating_sub(self.reach[depth]) >= self.best {
                return;
            }
            let n = self.moduli[depth];
            let lo = if depth == 0 {
                0
            } else if self.moduli[depth - 1] == n {
                self.choice[depth - 1]
            } else {
                0
            };
            let hi = if depth == 0 { 0 } else { n - 1 };
            if depth + 1 == self.moduli.len() {
                let counts = cells.class_counts(n);
                let mut pick: Option<(u64, u64)> = None;
                for r in lo..=hi {
                    let c = counts[r as usize];
                    if pick.is_none_or(|(_, pc)| c > pc) {
                        pick = Some((r, c));
                    }
                }
                let (r, c) = pick.expect("nonempty residue range");
                if count - c < self.best {
                    self.best = count - c;
                    self.choice.push(r);
                    self.best_choice = self.choice.clone();
                    self.choice.pop();
                }
                return;
            }
            for r in lo..=hi {
                let mut next = cells.clone();
                next.clear_class(n, r);
                self.choice.push(r);
                self.go(depth + 1, &next);
                self.choice.pop();
                if self.best == 0 {
                    return;
                }
            }
        }
    }
    let mut search = Search {
        moduli: &moduli,
        reach: &reach,
        best: greedy_count + 1,
        best_choice: Vec::new(),
        choice: Vec::new(),
    };
    search.go(0, &Cells::full(period));
    let witness = moduli
        .iter()
        .zip(&search.best_choice)
        .map(|(&n, &r)| ResidueClass::of(n, r))
        .collect();
    (rational::ratio(search.best, period), witness)
}

/// Backtracking search for residues making the given moduli an exact
/// covering system. Every modulus must divide `period`, and `period` should
/// be at most a few thousand.
pub fn find_exact_cover(moduli: &[u64], period: u64) -> Option<ResidueSystem> {
    let total: u64 = moduli.iter().map(|&n| period / n).sum();
    if total != period || moduli.iter().any(|&n| n == 0 || period % n != 0) {
        return None;
    }
    let mut order: Vec<u64> = moduli.to_vec();
    order.sort_unstable();
    // classes with coprime moduli always meet
    for (i, &a) in order.iter().enumerate() {
        if order[i + 1..].iter().any(|&b| arith::gcd(a, b) == 1) {
            return None;
        }
    }
    let mut search = CoverSearch::new(&order, period);
    search.solve().then(|| {
        let mut placed = search.placed;
        placed.sort_unstable_by_key(|c| (c.modulus(), c.residue()));
        ResidueSystem::new(placed)
    })
}

/// Exact cover of `Z/period` by one class per modulus. Each step branches on
/// the modulus or cell with the fewest remaining options.
struct CoverSearch<'a> {
    order: &'a [u64],
    period: usize,
    words: usize,
    covered: Vec<u64>,
    used: Vec<bool>,
    placed: Vec<ResidueClass>,
}

enum Branch {
    Modulus(usize, Vec<u64>),
    Cell(Vec<(usize, u64)>),
}

impl<'a> CoverSearch<'a> {
    fn new(order: &'a [u64], period: u64) -> Self {
        let period = period as usize;
        let words = period.div_ceil(64);
        Self {
            order,
            period,
            words,
            covered: vec![0; words],
            used: vec![false; order.len()],
            placed: Vec::new(),
        }
    }

    fn is_covered(&self, x: usize) -> bool {
        self.covered[x / 64] >> (x % 64) & 1 == 1
    }

    fn class_free(&self, n: usize, r: usize) -> bool {
        (r..self.period).step_by(n).all(|y| !self.is_covered(y))
    }

    fn toggle(&mut self, n: usize, r: usize) {
        for y in (r..self.period).step_by(n) {
            self.covered[y / 64] ^= 1 << (y % 64);
        }
    }

    fn branch(&self) -> Option<Branch> {
        let mut best: Option<Branch> = None;
        let mut best_len = usize::MAX;
        let mut cell_options = vec![0usize; self.period];
        for (i, &n) in self.order.iter().enumerate() {
            if self.used[i] || (i > 0 && n == self.order[i - 1] && !self.used[i - 1]) {
                continue;
            }
            let n = n as usize;
            let free: Vec<u64> = (0..n).filter(|&r| self.class_free(n, r)).map(|r| r as u64).collect();
            for &r in &free {
                for y in (r as usize..self.period).step_by(n) {
                    cell_options[y] += 1;
                }
            }
            if free.len() < best_len {
                best_len = free.len();
                best = Some(Branch::Modulus(i, free));
                if best_len == 0 {
                    return best;
                }
            }
        }
        let cell = (0..self.period)
            .filter(|&x| !self.is_covered(x))
            .min_by_key(|&x| cell_options[x])?;
        if cell_options[cell] < best_len {
            let options = self
                .order
                .iter()
                .enumerate()
                .filter(|&(i, &n)| {
                    !self.used[i]
                        && !(i > 0 && n == self.order[i - 1] && !self.used[i - 1])
                        && self.class_free(n as usize, cell % n as usize)
                })
                .map(|(i, &n)| (i, (cell as u64) % n))
                .collect();
            best = Some(Branch::Cell(options));
        }
        best
    }

    fn place(&mut self, i: usize, r: u64) -> bool {
        let n = self.order[i];
        self.toggle(n as usize, r as usize);
        self.used[i] = true;
        self.placed.push(ResidueClass::of(n, r));
        if self.solve() {
            return true;
        }
        self.placed.pop();
        self.used[i] = false;
        self.toggle(n as usize, r as usize);
        false
    }

    fn solve(&mut self) -> bool {
        if self.used.iter().all(|&u| u) {
            return self.covered.iter().map(|w| w.count_ones() as usize).sum::<usize>() == self.period;
        }
        debug_assert_eq!(self.words, self.covered.len());
        match self.branch() {
            None => true,
            Some(Branch::Modulus(i, residues)) => residues.into_iter().any(|r| self.place(i, r)),
            Some(Branch::Cell(options)) => options.into_iter().any(|(i, r)| self.place(i, r)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewmanReport {
    pub max_lcm: u64,
    /// Distinct-moduli sets (all moduli > 1, lcm ≤ `max_lcm`, `Σ 1/n = 1`).
    pub candidate_sets: u64,
    pub exact_covers: Vec<ResidueSystem>,
}

/// Searches every set of distinct moduli greater than one with lcm at most
/// `max_lcm` and reciprocal sum exactly one for an exact covering system.
pub fn newman_search(max_lcm: u64) -> NewmanReport {
    let mut report = NewmanReport {
        max_lcm,
        candidate_sets: 0,
        exact_covers: Vec::new(),
    };
    for l in 2..=max_lcm {
        let divisors: Vec<u64> = (2..=l).rev().filter(|d| l % d == 0).collect();
        // weights l/d ascend as d descends; suffix sums bound the search.
        let weights: Vec<u64> = divisors.iter().map(|d| l / d).collect();
        let mut suffix = vec![0u64; weights.len() + 1];
        for i in (0..weights.len()).rev() {
            suffix[i] = suffix[i + 1] + weights[i];
        }
        let mut chosen = Vec::new();
        subset_sums(&divisors, &weights, &suffix, 0, l, &mut chosen, &mut |set| {
            if lcm_capped(set.iter().copied(), l) != Some(l) {
                return;
            }
            report.candidate_sets += 1;
            if let Some(cover) = find_exact_cover(set, l) {
                report.exact_covers.push(cover);
            }
        });
    }
    report
}

fn subset_sums<F: FnMut(&[u64])>(
    items: &[u64],
    weights: &[u64],
    suffix: &[u64],
    from: usize,
    remaining: u64,
    chosen: &mut Vec<u64>,
    visit: &mut F,
) {
    if remaining == 0 {
        visit(chosen);
        return;
    }
    if suffix[from] < remaining {
        return;
    }
    for i in from..items.len() {
        if suffix[i] < remaining {
            return;
        }
        if weights[i] <= remaining {
            chosen.push(items[i]);
            subset_sums(items, weights, suffix, i + 1, remaining - weights[i], chosen, visit);
            chosen.pop();
        }
    }
}

/// `|x|` for rationals, used in reports.
pub fn abs(x: &ExactRational) -> ExactRational {
    x.abs()
}
