//! The ordered sequence of integers of the form p^a * q^b: brute-force
//! enumeration (the test oracle), the lattice-point counting function, and
//! exact left/right neighbor search driven by the convergents of
//! ln p / ln q.

use std::cmp::Ordering;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith;
use crate::cf::{self, ConvergentTable, Key, Side};
use crate::error::{Error, Result};
use crate::types::ExponentPair;

const INITIAL_MIN_DENOMINATOR: u64 = 1 << 10;
/// Refuse enumerations that would materialize more pairs than this.
const ENUMERATION_LIMIT: usize = 50_000_000;

/// A prime pair together with its (growable) convergent table.
///
/// The table behind the lock is immutable; growth swaps in a fresh `Arc`, so
/// in-flight readers keep a consistent snapshot.
pub struct SUnitContext {
    p: u64,
    q: u64,
    table: RwLock<Arc<ConvergentTable>>,
    cache_dir: Option<PathBuf>,
}

impl SUnitContext {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        Self::with_cache(p, q, None)
    }

    pub fn with_cache(p: u64, q: u64, cache_dir: Option<&Path>) -> Result<Self> {
        let table = cf::build_table_cached(p, q, INITIAL_MIN_DENOMINATOR, cache_dir)?;
        Ok(SUnitContext {
            p,
            q,
            table: RwLock::new(Arc::new(table)),
            cache_dir: cache_dir.map(Path::to_path_buf),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn table(&self) -> Arc<ConvergentTable> {
        self.table.read().unwrap().clone()
    }

    /// Grow the table (doubling its denominator target) until "maximal key
    /// <= bound" queries for the pair (a, b) are answerable.
    pub fn ensure_covers(&self, a: u64, b: u64) -> Result<Arc<ConvergentTable>> {
        let mut current = self.table();
        while !current.covers(a, b) {
            let next_den = current
                .min_denominator()
                .checked_mul(2)
                .ok_or_else(|| Error::ResourceGuard("convergent table target overflow".into()))?;
            let grown = Arc::new(cf::build_table_cached(
                self.p,
                self.q,
                next_den,
                self.cache_dir.as_deref(),
            )?);
            let mut slot = self.table.write().unwrap();
            // another thread may have grown further already
            if grown.min_denominator() > slot.min_denominator() {
                *slot = grown;
            }
            current = slot.clone();
        }
        Ok(current)
    }

    /// All exponent pairs with p^a * q^b <= x, ascending by value. Exact
    /// integer arithmetic throughout; serves as the oracle for everything
    /// else.
    pub fn enumerate_upto(&self, x: u64) -> Result<Vec<ExponentPair>> {
        if x < 1 {
            return Err(Error::ResourceGuard("enumeration bound must be >= 1".into()));
        }
        let mut out: Vec<(u64, ExponentPair)> = Vec::new();
        let mut qb: u64 = 1;
        let mut b: u64 = 0;
        loop {
            let mut v = qb;
            let mut a: u64 = 0;
            loop {
                if out.len() >= ENUMERATION_LIMIT {
                    return Err(Error::ResourceGuard(format!(
                        "enumeration up to {x} exceeds {ENUMERATION_LIMIT} elements"
                    )));
                }
                out.push((v, ExponentPair::new(a, b)));
                match v.checked_mul(self.p) {
                    Some(nv) if nv <= x => {
                        v = nv;
                        a += 1;
                    }
                    _ => break,
                }
            }
            match qb.checked_mul(self.q) {
                Some(nq) if nq <= x => {
                    qb = nq;
                    b += 1;
                }
                _ => break,
            }
        }
        out.sort_unstable_by_key(|&(v, _)| v);
        Ok(out.into_iter().map(|(_, s)| s).collect())
    }

    /// The counting function N(x) = #{(a,b) >= 0 : p^a * q^b <= x}, via the
    /// lattice sum over b of floor((ln x - b ln q)/ln p) + 1.
    ///
    /// Floors are certified by interval arithmetic; when x/q^b is exactly a
    /// power of p the interval can never decide, so those columns fall back
    /// to exact integer arithmetic.
    pub fn count(&self, x: &BigUint) -> Result<BigUint> {
        if x < &BigUint::one() {
            return Err(Error::ResourceGuard("counting bound must be >= 1".into()));
        }
        let mut total = BigUint::zero();
        let mut qb = BigUint::one();
        let mut b: u64 = 0;
        while &qb <= x {
            let a_max = match arith::escalate(|bits| {
                let num = arith::ln_big(x, bits)
                    .sub(&arith::log_prime(self.q, bits).mul_i64(b as i64));
                num.div(&arith::log_prime(self.p, bits))?.floor_certified()
            }) {
                Some(f) => f.to_u64().expect("exponent fits u64"),
                None => exact_ilog(&(x / &qb), self.p),
            };
            total += a_max + 1;
            qb *= self.q;
            b += 1;
        }
        Ok(total)
    }

    fn candidate(
        &self,
        table: &ConvergentTable,
        side: Side,
        key: Key,
        bound: u64,
        s: ExponentPair,
        left: bool,
    ) -> Option<ExponentPair> {
        let (num, den) = table.select_best_approx(side, key, &BigUint::from(bound))?;
        let (u, v) = (num.to_u64().unwrap(), den.to_u64().unwrap());
        // A convergent on the far side of theta moves value downward when its
        // denominator is added to a, upward when subtracted; mirrored for the
        // near side.
        Some(match (side, left) {
            (Side::Upper, true) => ExponentPair::new(s.a + v, s.b - u),
            (Side::Lower, true) => ExponentPair::new(s.a - v, s.b + u),
            (Side::Upper, false) => ExponentPair::new(s.a - v, s.b + u),
            (Side::Lower, false) => ExponentPair::new(s.a + v, s.b - u),
        })
    }

    /// Exponent pair of the largest element strictly below p^{s.a} * q^{s.b}.
    pub fn left_neighbor(&self, s: ExponentPair) -> Result<ExponentPair> {
        if s.is_one() {
            return Err(Error::NoPredecessor);
        }
        let table = self.ensure_covers(s.a, s.b)?;
        // upper convergent, maximal numerator <= b: candidate below from above theta
        let c1 = self.candidate(&table, Side::Upper, Key::Numerator, s.b, s, true);
        // lower convergent, maximal denominator <= a
        let c2 = self.candidate(&table, Side::Lower, Key::Denominator, s.a, s, true);
        match (c1, c2) {
            (Some(x), Some(y)) => Ok(max_by_value(x, y, self.p, self.q)),
            (Some(x), None) | (None, Some(x)) => Ok(x),
            (None, None) => Err(Error::NoPredecessor),
        }
    }

    /// Exponent pair of the smallest element strictly above p^{s.a} * q^{s.b}.
    pub fn right_neighbor(&self, s: ExponentPair) -> Result<ExponentPair> {
        let table = self.ensure_covers(s.a, s.b)?;
        // upper convergent, maximal denominator <= a
        let c1 = self.candidate(&table, Side::Upper, Key::Denominator, s.a, s, false);
        // lower convergent, maximal numerator <= b: always exists via 0/1
        let c2 = self.candidate(&table, Side::Lower, Key::Numerator, s.b, s, false);
        match (c1, c2) {
            (Some(x), Some(y)) => Ok(min_by_value(x, y, self.p, self.q)),
            (Some(x), None) | (None, Some(x)) => Ok(x),
            (None, None) => unreachable!("the lower convergent 0/1 always applies"),
        }
    }
}

fn max_by_value(x: ExponentPair, y: ExponentPair, p: u64, q: u64) -> ExponentPair {
    if arith::compare(x, y, p, q) == Ordering::Greater {
        x
    } else {
        y
    }
}

fn min_by_value(x: ExponentPair, y: ExponentPair, p: u64, q: u64) -> ExponentPair {
    if arith::compare(x, y, p, q) == Ordering::Less {
        x
    } else {
        y
    }
}

/// Largest a with p^a <= t, by exact integer arithmetic.
fn exact_ilog(t: &BigUint, p: u64) -> u64 {
    debug_assert!(!t.is_zero() && p >= 2);
    let mut a = 0u64;
    let mut pw = BigUint::one();
    loop {
        let next = &pw * p;
        if &next > t {
            return a;
        }
        pw = next;
        a += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, q: u64) -> SUnitContext {
        SUnitContext::new(p, q).unwrap()
    }

    #[test]
    fn enumerate_small() {
        let c = ctx(2, 3);
        let vals: Vec<u64> = c
            .enumerate_upto(10)
            .unwrap()
            .iter()
            .map(|s| s.value(2, 3).to_u64().unwrap())
            .collect();
        assert_eq!(vals, vec![1, 2, 3, 4, 6, 8, 9]);
        assert_eq!(c.enumerate_upto(1).unwrap(), vec![ExponentPair::ONE]);
    }

    #[test]
    fn first_two_elements() {
        for (p, q) in [(2u64, 3u64), (2, 8191), (13, 89), (5, 7)] {
            let c = ctx(p, q);
            let e = c.enumerate_upto(p * 2).unwrap();
            assert_eq!(e[0], ExponentPair::ONE);
            assert_eq!(e[1], ExponentPair::new(1, 0));
        }
    }

    #[test]
    fn count_matches_enumeration() {
        let c = ctx(2, 3);
        for x in [1u64, 2, 10, 100, 12345, 1_000_000] {
            let n = c.count(&BigUint::from(x)).unwrap();
            assert_eq!(
                n.to_usize().unwrap(),
                c.enumerate_upto(x).unwrap().len(),
                "x={x}"
            );
        }
    }

    #[test]
    fn count_handles_exact_powers() {
        let c = ctx(2, 3);
        // x = 2^20 * 3^3 forces the exact-integer fallback on one column
        let x = BigUint::from(2u32).pow(20) * BigUint::from(3u32).pow(3);
        let n = c.count(&x).unwrap();
        assert_eq!(
            n.to_usize().unwrap(),
            c.enumerate_upto(x.to_u64().unwrap()).unwrap().len()
        );
    }

    #[test]
    fn count_tracks_main_term() {
        let c = ctx(2, 3);
        let x = 1_000_000f64;
        let n = c.count(&BigUint::from(1_000_000u64)).unwrap().to_f64().unwrap();
        let main = ((2.0 * x).ln() * (3.0 * x).ln()) / (2.0 * 2f64.ln() * 3f64.ln());
        assert!((n - main).abs() / main < 0.05, "n={n} main={main}");
    }

    #[test]
    fn neighbor_fixtures() {
        let c = ctx(2, 3);
        assert_eq!(
            c.left_neighbor(ExponentPair::new(3, 1)).unwrap(),
            ExponentPair::new(1, 2)
        ); // 24 -> 18
        assert_eq!(
            c.left_neighbor(ExponentPair::new(1, 0)).unwrap(),
            ExponentPair::ONE
        ); // 2 -> 1
        assert_eq!(
            c.left_neighbor(ExponentPair::new(2, 0)).unwrap(),
            ExponentPair::new(0, 1)
        ); // 4 -> 3
        assert_eq!(
            c.right_neighbor(ExponentPair::ONE).unwrap(),
            ExponentPair::new(1, 0)
        ); // 1 -> 2
        assert_eq!(
            c.right_neighbor(ExponentPair::new(3, 1)).unwrap(),
            ExponentPair::new(0, 3)
        ); // 24 -> 27
        assert!(matches!(
            c.left_neighbor(ExponentPair::ONE),
            Err(Error::NoPredecessor)
        ));
        // inverse property on a fixture
        let s = ExponentPair::new(4, 2);
        assert_eq!(c.left_neighbor(c.right_neighbor(s).unwrap()).unwrap(), s);
    }

    #[test]
    fn neighbors_match_oracle_to_a_million() {
        for (p, q) in [(2u64, 3u64), (2, 7), (3, 5), (5, 7), (13, 89)] {
            let c = ctx(p, q);
            let seq = c.enumerate_upto(1_000_000).unwrap();
            for w in seq.windows(2) {
                assert_eq!(
                    c.right_neighbor(w[0]).unwrap(),
                    w[1],
                    "({p},{q}) successor of {}",
                    w[0]
                );
                assert_eq!(
                    c.left_neighbor(w[1]).unwrap(),
                    w[0],
                    "({p},{q}) predecessor of {}",
                    w[1]
                );
                assert_eq!(arith::compare(w[0], w[1], p, q), Ordering::Less);
            }
        }
    }
}
