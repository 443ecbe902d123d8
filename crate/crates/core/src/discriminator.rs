//! The Lucas-type sequence U_0 = 0, U_1 = 1, U_{n+2} = (4k+2) U_{n+1} - U_n
//! and its discriminator: the smallest modulus m under which the first n
//! terms remain pairwise distinct. For k a Mersenne prime q = 2^p - 1 the
//! discriminator is tied to the successor function of the {2,q}-units,
//! which this module cross-checks at desk scale.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes;
use crate::sunits::SUnitContext;
use crate::types::ExponentPair;

/// Parameter k >= 1 of the recurrence U_{n+2} = (4k+2) U_{n+1} - U_n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LucasContext {
    k: u64,
}

impl LucasContext {
    pub fn new(k: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::ResourceGuard("recurrence parameter must be >= 1".into()));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u64 {
        self.k
    }
}

/// First `n` terms U_0 .. U_{n-1} reduced mod `m`, computed entirely in
/// modular arithmetic (the integer terms grow exponentially).
pub fn lucas_mod(kctx: &LucasContext, n: u64, m: u64) -> Vec<u64> {
    assert!(n >= 1 && m >= 1);
    let mult = (4 * kctx.k + 2) % m;
    let mut out = Vec::with_capacity(n as usize);
    let (mut u0, mut u1) = (0u64, 1 % m);
    for _ in 0..n {
        out.push(u0);
        // u128 intermediate: mult and the residues are both < m <= 2^64
        let next = ((mult as u128 * u1 as u128 + m as u128 - u0 as u128) % m as u128) as u64;
        u0 = u1;
        u1 = next;
    }
    out
}

/// Smallest m with U_0 .. U_{n-1} pairwise distinct mod m. The search runs
/// upward from m = n (pigeonhole: fewer residues than terms always
/// collide) and fails with [`Error::DiscriminatorCeiling`] if no modulus
/// at most `ceiling` works.
pub fn disc(kctx: &LucasContext, n: u64, ceiling: u64) -> Result<u64> {
    assert!(n >= 1);
    for m in n..=ceiling.max(n) {
        if all_distinct_mod(kctx, n, m) {
            return Ok(m);
        }
    }
    Err(Error::DiscriminatorCeiling(ceiling))
}

fn all_distinct_mod(kctx: &LucasContext, n: u64, m: u64) -> bool {
    let mult = (4 * kctx.k + 2) % m;
    let mut seen = vec![false; m as usize];
    let (mut u0, mut u1) = (0u64, 1 % m);
    for _ in 0..n {
        if seen[u0 as usize] {
            return false;
        }
        seen[u0 as usize] = true;
        let next = ((mult as u128 * u1 as u128 + m as u128 - u0 as u128) % m as u128) as u64;
        u0 = u1;
        u1 = next;
    }
    true
}

/// One row of the discriminator/successor cross-check for k = q = 2^p - 1:
/// the discriminator of the first n terms, the smallest {2,q}-unit >= n,
/// and whether the two agree.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiscRow {
    pub n: u64,
    pub disc_value: u64,
    pub successor: u64,
    pub equal: bool,
}

const N_MAX_LIMIT: u64 = 1_000;

/// For q = 2^p - 1 (both p and q must be prime), checks for every
/// 1 <= n <= n_max that the discriminator of the first n terms is at most
/// the smallest {2,q}-unit >= n, with equality whenever [n, 3n/2)
/// contains a {2,q}-unit. Violations are hard errors; the per-n rows are
/// returned for reporting.
pub fn successor_check(p: u64, n_max: u64) -> Result<Vec<DiscRow>> {
    if !primes::is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p >= 63 {
        return Err(Error::ResourceGuard(format!("2^{p} - 1 exceeds the modulus range")));
    }
    let q = (1u64 << p) - 1;
    if !primes::is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if n_max == 0 || n_max > N_MAX_LIMIT {
        return Err(Error::ResourceGuard(format!(
            "successor cross-check is desk-scale: need 1 <= n_max <= {N_MAX_LIMIT}"
        )));
    }
    let ctx = SUnitContext::new(2, q)?;
    // a power of two always lies in [n, 2n), so this covers every successor
    let units: Vec<u64> = ctx
        .enumerate_upto(2 * n_max)?
        .into_iter()
        .map(|s: ExponentPair| {
            let v: BigUint = s.value(2, q);
            v.try_into().expect("enumeration bound fits in u64")
        })
        .collect();
    let kctx = LucasContext::new(q)?;
    let mut rows = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let idx = units.partition_point(|&u| u < n);
        let successor = units[idx];
        let disc_value = disc(&kctx, n, 2 * successor)?;
        if disc_value > successor {
            return Err(Error::ResourceGuard(format!(
                "discriminator bound violated at n = {n}: {disc_value} > {successor}"
            )));
        }
        let equal = disc_value == successor;
        // a {2,q}-unit in [n, 3n/2) forces equality
        if 2 * successor < 3 * n && !equal {
            return Err(Error::ResourceGuard(format!(
                "equality forced but missed at n = {n}: {disc_value} < {successor}"
            )));
        }
        rows.push(DiscRow { n, disc_value, successor, equal });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn lucas_initial_terms() {
        let k1 = LucasContext::new(1).unwrap();
        assert_eq!(lucas_mod(&k1, 6, 1_000_000_000), vec![0, 1, 6, 35, 204, 1189]);
        assert_eq!(lucas_mod(&k1, 2, 2), vec![0, 1]);
        assert_eq!(lucas_mod(&LucasContext::new(8191).unwrap(), 2, 97), vec![0, 1]);
    }

    #[test]
    fn lucas_mod_reduces_the_integer_sequence() {
        // integers for k = 1: 0, 1, 6, 35, 204, 1189, 6930, 40391, 235416, 1372105
        let ints: [u64; 10] = [0, 1, 6, 35, 204, 1189, 6930, 40391, 235416, 1372105];
        let k1 = LucasContext::new(1).unwrap();
        let got = lucas_mod(&k1, 10, 7);
        let want: Vec<u64> = ints.iter().map(|v| v % 7).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn lucas_integers_strictly_increase() {
        for k in [1u64, 2, 7, 31] {
            let kctx = LucasContext::new(k).unwrap();
            let mult = BigUint::from(4 * k + 2);
            let (mut u0, mut u1) = (BigUint::ZERO, BigUint::one());
            for _ in 0..60 {
                let next = &mult * &u1 - &u0;
                assert!(next > u1);
                u0 = u1;
                u1 = next;
            }
            // exact terms agree with the modular recurrence under a big modulus
            let m = 1u64 << 62;
            let residues = lucas_mod(&kctx, 20, m);
            let (mut a, mut b) = (BigUint::ZERO, BigUint::one());
            for r in residues {
                assert_eq!(BigUint::from(r), &a % m);
                let next = &mult * &b - &a;
                a = b;
                b = next;
            }
        }
    }

    #[test]
    fn disc_fixtures() {
        let q13 = LucasContext::new(8191).unwrap();
        assert_eq!(disc(&q13, 129, 10_000).unwrap(), 250);
        let q17 = LucasContext::new(131_071).unwrap();
        assert_eq!(disc(&q17, 129, 10_000).unwrap(), 250);
        assert_eq!(disc(&q17, 257, 10_000).unwrap(), 500);
        // 250 = 2 * 5^3 and 500 = 2^2 * 5^3 are {2, 5, 2^p - 1}-units
        for v in [250u64, 500] {
            let mut v = v;
            for f in [2u64, 5] {
                while v % f == 0 {
                    v /= f;
                }
            }
            assert_eq!(v, 1);
        }
    }

    #[test]
    fn disc_trivial_and_floor() {
        for k in [1u64, 7, 8191] {
            let kctx = LucasContext::new(k).unwrap();
            assert_eq!(disc(&kctx, 1, 10).unwrap(), 1);
            for n in 1..=50 {
                assert!(disc(&kctx, n, 100_000).unwrap() >= n);
            }
        }
    }

    #[test]
    fn disc_is_monotone_in_n() {
        for k in [1u64, 7] {
            let kctx = LucasContext::new(k).unwrap();
            let mut prev = 0;
            for n in 1..=200 {
                let d = disc(&kctx, n, 100_000).unwrap();
                assert!(d >= prev, "k = {k}, n = {n}");
                prev = d;
            }
        }
    }

    #[test]
    fn disc_ceiling_error() {
        let kctx = LucasContext::new(1).unwrap();
        match disc(&kctx, 100, 100) {
            Err(Error::DiscriminatorCeiling(100)) => {}
            other => panic!("expected ceiling error, got {other:?}"),
        }
    }

    #[test]
    fn successor_check_q7_always_equal() {
        let rows = successor_check(3, 130).unwrap();
        assert_eq!(rows.len(), 130);
        assert!(rows.iter().all(|r| r.equal));
    }

    #[test]
    fn successor_check_q8191_has_strict_rows() {
        let rows = successor_check(13, 200).unwrap();
        let r129 = &rows[128];
        assert_eq!((r129.n, r129.disc_value, r129.successor), (129, 250, 256));
        assert!(!r129.equal);
        assert!(rows.iter().any(|r| r.equal));
    }

    #[test]
    fn successor_check_rejects_bad_input() {
        assert!(matches!(successor_check(11, 50), Err(Error::NotPrime(2047))));
        assert!(matches!(successor_check(4, 50), Err(Error::NotPrime(4))));
        assert!(successor_check(3, 0).is_err());
        assert!(successor_check(3, N_MAX_LIMIT + 1).is_err());
    }
}
