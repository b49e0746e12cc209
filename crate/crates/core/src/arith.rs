//! Integer foundations: factorization, smooth parts, prime intervals, guarded
//! lcm and CRT merging.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::system::ModuliSet;

/// Below this bound factorization reads a smallest-prime-factor table.
pub const SPF_LIMIT: u64 = 1_000_000;

/// Default lcm ceiling in bits for arbitrary-precision lcm.
pub const DEFAULT_LCM_BITS: u64 = 1_000_000;

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// lcm, or `None` on `u64` overflow.
pub fn lcm_checked(a: u64, b: u64) -> Option<u64> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / gcd(a, b)).checked_mul(b)
}

pub fn lcm_checked_u128(a: u128, b: u128) -> Option<u128> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    (a / a.gcd(&b)).checked_mul(b)
}

/// lcm of an iterator of moduli, or `None` once it passes `cap`.
pub fn lcm_capped<I: IntoIterator<Item = u64>>(moduli: I, cap: u64) -> Option<u64> {
    let mut acc = 1u64;
    for n in moduli {
        acc = lcm_checked(acc, n)?;
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

fn spf_table() -> &'static [u32] {
    static TABLE: OnceLock<Vec<u32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = SPF_LIMIT as usize;
        let mut spf = vec![0u32; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        spf
    })
}

/// The smallest prime factor of `n`, with `LeastPrime::Infinity` for `n = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LeastPrime {
    Prime(u64),
    Infinity,
}

/// Prime–exponent pairs in increasing prime order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// `P(n)`; zero for `n = 1`.
    pub fn largest_prime(&self) -> u64 {
        self.factors.last().map_or(0, |&(p, _)| p)
    }

    /// `P⁻(n)`; infinite for `n = 1`.
    pub fn least_prime(&self) -> LeastPrime {
        self.factors
            .first()
            .map_or(LeastPrime::Infinity, |&(p, _)| LeastPrime::Prime(p))
    }

    pub fn rebuild(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| p.pow(e)).product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize: n must be positive");
    let mut primes = Vec::new();
    collect_prime_factors(n, &mut primes);
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    Factorization { factors }
}

fn collect_prime_factors(mut n: u64, out: &mut Vec<u64>) {
    if n <= SPF_LIMIT {
        let spf = spf_table();
        while n > 1 {
            let p = spf[n as usize] as u64;
            out.push(p);
            n /= p;
        }
        return;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
    }
    if n == 1 {
        return;
    }
    if n <= SPF_LIMIT {
        collect_prime_factors(n, out);
    } else if is_prime(n) {
        out.push(n);
    } else {
        let d = pollard_rho(n);
        collect_prime_factors(d, out);
        collect_prime_factors(n / d, out);
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n <= SPF_LIMIT {
        return spf_table()[n as usize] as u64 == n;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Brent's variant; n is odd, composite, and has no factor below 41.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn is_smooth_prime(p: u64, q: f64) -> bool {
    (p as f64) <= q
}

/// Splits `n` into its largest `Q`-smooth divisor and the rough cofactor.
pub fn smooth_split(n: u64, q: f64) -> (u64, u64) {
    assert!(n >= 1, "smooth_split: n must be positive");
    let mut smooth = 1u64;
    for &(p, e) in factorize(n).factors() {
        if is_smooth_prime(p, q) {
            smooth *= p.pow(e);
        }
    }
    (smooth, n / smooth)
}

/// `P(n) <= Q`, with `P(1) = 0` so the unit counts as smooth.
pub fn is_smooth(n: u64, q: f64) -> bool {
    (factorize(n).largest_prime() as f64) <= q
}

fn small_primes_upto(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Calls `f` on every prime `p` with `lo < p <= hi`, ascending, using a
/// segmented sieve.
pub fn for_each_prime_in<F: FnMut(u64)>(lo: u64, hi: u64, mut f: F) {
    if hi < 2 || lo >= hi {
        return;
    }
    const SEGMENT: u64 = 1 << 20;
    let base_primes = small_primes_upto(isqrt(hi));
    let mut start = lo + 1;
    let mut flags = vec![true; SEGMENT as usize];
    while start <= hi {
        let end = (start + SEGMENT - 1).min(hi);
        let len = (end - start + 1) as usize;
        flags[..len].fill(true);
        for &p in &base_primes {
            if p * p > end {
                break;
            }
            let mut m = (start.div_ceil(p) * p).max(p * p);
            while m <= end {
                flags[(m - start) as usize] = false;
                m += p;
            }
        }
        for (i, &is_p) in flags[..len].iter().enumerate() {
            let v = start + i as u64;
            if is_p && v >= 2 {
                f(v);
            }
        }
        start = end + 1;
    }
}

/// Primes `p` with `a < p <= b`.
pub fn primes_in(a: f64, b: f64) -> Vec<u64> {
    let lo = if a < 0.0 { 0 } else { a.floor() as u64 };
    let hi = if b < 0.0 { 0 } else { b.floor() as u64 };
    let mut out = Vec::new();
    for_each_prime_in(lo, hi, |p| out.push(p));
    out
}

/// Outcome of [`lcm_guarded`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LcmOutcome {
    Exact(BigUint),
    /// The running lcm passed the guard; `bits_so_far` is its bit length at
    /// the point the scan stopped (a lower bound on the true bit length).
    GuardExceeded { bits_so_far: u64 },
}

pub fn lcm_guarded(moduli: &ModuliSet, guard_bits: u64) -> LcmOutcome {
    let mut acc = BigUint::from(1u32);
    for n in moduli.distinct() {
        let n = BigUint::from(n);
        let g = acc.gcd(&n);
        acc = &acc / g * n;
        if acc.bits() > guard_bits {
            return LcmOutcome::GuardExceeded {
                bits_so_far: acc.bits(),
            };
        }
    }
    LcmOutcome::Exact(acc)
}

/// Intersection of `x ≡ r1 (mod n1)` and `x ≡ r2 (mod n2)`, as `(lcm, residue)`.
/// `None` if the classes are disjoint or the lcm overflows `u128`.
pub fn crt_merge(n1: u128, r1: u128, n2: u128, r2: u128) -> Option<(u128, u128)> {
    let g = n1.gcd(&n2);
    if r1 % g != r2 % g {
        return None;
    }
    let l = (n1 / g).checked_mul(n2)?;
    // x = r1 + n1 * t, with (n1/g) t ≡ (r2 - r1)/g (mod n2/g)
    let m = n2 / g;
    if m == 1 {
        return Some((l, r1 % l));
    }
    let diff = if r2 >= r1 {
        ((r2 - r1) / g) % m
    } else {
        (m - ((r1 - r2) / g) % m) % m
    };
    let inv = mod_inverse_u128((n1 / g) % m, m)?;
    let t = mul_mod_u128(diff, inv, m);
    let x = (r1 % l + mul_mod_u128(n1 % l, t, l)) % l;
    Some((l, x))
}

fn mul_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    if let Some(p) = a.checked_mul(b) {
        return p % m;
    }
    let (mut a, mut b, mut acc) = (a % m, b, 0u128);
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod_u128(acc, a, m);
        }
        a = add_mod_u128(a, a, m);
        b >>= 1;
    }
    acc
}

fn add_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    let s = a.wrapping_add(b);
    if s < a || s >= m {
        s.wrapping_sub(m)
    } else {
        s
    }
}

fn mod_inverse_u128(a: u128, m: u128) -> Option<u128> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u128)
}

/// CRT over big moduli: combines `(modulus, residue)` pairs with pairwise
/// coprime moduli into the least nonnegative solution.
pub fn crt_coprime_big(pairs: &[(BigUint, BigUint)]) -> (BigUint, BigUint) {
    let mut modulus = BigUint::from(1u32);
    let mut value = BigUint::from(0u32);
    for (m, r) in pairs {
        // value + modulus * t ≡ r (mod m)
        let inv = mod_inverse_big(&(&modulus % m), m).expect("moduli must be coprime");
        let cur = &value % m;
        let target = r % m;
        let diff = if target >= cur { target - cur } else { m - (cur - target) };
        let t = (diff * inv) % m;
        value += &modulus * t;
        modulus *= m;
    }
    (modulus, value)
}

fn mod_inverse_big(a: &BigUint, m: &BigUint) -> Option<BigUint> {
    use num_bigint::BigInt;
    let one = BigUint::from(1u32);
    if *m == one {
        return Some(BigUint::from(0u32));
    }
    let egcd = BigInt::from(a.clone()).extended_gcd(&BigInt::from(m.clone()));
    if egcd.gcd != BigInt::from(1) {
        return None;
    }
    let mm = BigInt::from(m.clone());
    let x = ((egcd.x % &mm) + &mm) % &mm;
    x.to_biguint()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            if e > 0 {
                out.push((d, e));
            }
            d += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).factors().is_empty());
        assert_eq!(factorize(1).largest_prime(), 0);
        assert_eq!(factorize(1).least_prime(), LeastPrime::Infinity);
        assert_eq!(factorize(12).factors(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(360).factors(), trial_division(360).as_slice());
        assert_eq!(factorize(360).factors(), &[(2, 3), (3, 2), (5, 1)]);
    }

    #[test]
    fn factorize_rebuilds_everything_below_a_million() {
        for n in 1..=SPF_LIMIT {
            let f = factorize(n);
            assert_eq!(f.rebuild(), n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn factorize_large_values_via_rho() {
        for n in [
            1_000_003u64 * 1_000_033,
            600_851_475_143,
            (1 << 61) - 1,
            4_294_967_291 * 4_294_967_279,
            2u64.pow(40) * 3u64.pow(10),
        ] {
            let f = factorize(n);
            assert_eq!(f.rebuild(), n);
            assert!(f.primes().all(is_prime));
        }
    }

    #[test]
    fn smooth_split_examples() {
        assert_eq!(smooth_split(360, 3.0), (72, 5));
        assert_eq!(smooth_split(7, 10.0), (7, 1));
        assert_eq!(smooth_split(1, 2.0), (1, 1));
        assert_eq!(smooth_split(6, 2.5), (2, 3));
    }

    #[test]
    fn primes_in_examples() {
        assert_eq!(primes_in(1.0, 4.0), vec![2, 3]);
        assert_eq!(primes_in(4.0, 27.0), vec![5, 7, 11, 13, 17, 19, 23]);
        assert!(primes_in(8.0, 9.0).is_empty());
    }

    #[test]
    fn primes_in_matches_naive_loop() {
        let all: Vec<u64> = (0..=100_000).filter(|&n| naive_is_prime(n)).collect();
        assert_eq!(primes_in(0.0, 100_000.0), all);
        for (a, b) in [(0u64, 2u64), (2, 3), (89, 97), (997, 5000), (65_000, 100_000)] {
            let expect: Vec<u64> = all.iter().copied().filter(|&p| p > a && p <= b).collect();
            assert_eq!(primes_in(a as f64, b as f64), expect, "({a}, {b}]");
        }
    }

    #[test]
    fn miller_rabin_agrees_with_table_and_naive() {
        for n in (SPF_LIMIT - 2000)..(SPF_LIMIT + 2000) {
            assert_eq!(is_prime(n), naive_is_prime(n), "{n}");
        }
    }

    #[test]
    fn lcm_guarded_examples() {
        let exact = |m: &[u64]| match lcm_guarded(&ModuliSet::from_moduli(m.iter().copied()), 64) {
            LcmOutcome::Exact(v) => v,
            other => panic!("{other:?}"),
        };
        assert_eq!(exact(&[2, 3, 4, 6, 12]), BigUint::from(12u32));
        assert_eq!(exact(&[10, 10]), BigUint::from(10u32));
        assert_eq!(exact(&[4, 6]), BigUint::from(12u32));
        let big = ModuliSet::from_moduli(2..200);
        assert!(matches!(lcm_guarded(&big, 64), LcmOutcome::GuardExceeded { bits_so_far } if bits_so_far > 64));
    }

    #[test]
    fn crt_merge_small_cases_match_scan() {
        for n1 in 1u128..13 {
            for n2 in 1u128..13 {
                for r1 in 0..n1 {
                    for r2 in 0..n2 {
                        let l = n1 * n2 / n1.gcd(&n2);
                        let hits: Vec<u128> = (0..l).filter(|x| x % n1 == r1 && x % n2 == r2).collect();
                        match crt_merge(n1, r1, n2, r2) {
                            Some((m, x)) => assert_eq!((m, vec![x]), (l, hits)),
                            None => assert!(hits.is_empty()),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn crt_big_solves_system() {
        let pairs: Vec<(BigUint, BigUint)> = [(6u32, 5u32), (7, 3), (11, 0)]
            .iter()
            .map(|&(m, r)| (BigUint::from(m), BigUint::from(r)))
            .collect();
        let (m, x) = crt_coprime_big(&pairs);
        assert_eq!(m, BigUint::from(462u32));
        for (mi, ri) in &pairs {
            assert_eq!(&x % mi, *ri);
        }
    }
}
