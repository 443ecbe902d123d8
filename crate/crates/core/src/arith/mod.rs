//! Certified arithmetic: every quantity this crate reasons about is either an
//! exact integer or an interval that provably encloses the real value.
//!
//! Comparisons start at a modest precision and double it until the sign is
//! certain; symbolic equality (the only case where escalation cannot help) is
//! settled by materializing both sides as exact integers.

pub mod interval;
mod transcend;

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed};

pub use interval::PrecisionInterval;
pub use transcend::{exp_neg, ln2, ln_big, ln_expm1, ln_interval, ln_mant, sqrt_big};

use crate::error::{Error, Result};
use crate::types::ExponentPair;

/// Starting precision for escalating computations.
pub const START_BITS: u32 = 128;
/// Hard ceiling; beyond this, interval refinement gives up and comparisons
/// fall back to exact integer arithmetic.
pub const MAX_BITS: u32 = 16384;

/// Run `f` at doubling precisions until it produces a value.
pub fn escalate<T>(mut f: impl FnMut(u32) -> Option<T>) -> Option<T> {
    let mut bits = START_BITS;
    loop {
        if let Some(v) = f(bits) {
            return Some(v);
        }
        if bits >= MAX_BITS {
            return None;
        }
        bits = (bits * 2).min(MAX_BITS);
    }
}

/// Enclosure of ln n for an integer n >= 2 (primes in practice, but any
/// integer works; results are cached per (n, precision)).
pub fn log_prime(n: u64, bits: u32) -> PrecisionInterval {
    assert!(n >= 2, "log_prime needs n >= 2");
    ln_big(&BigUint::from(n), bits)
}

/// Enclosure of cp * ln p + cq * ln q.
pub fn linear_form(cp: &BigInt, cq: &BigInt, p: u64, q: u64, bits: u32) -> PrecisionInterval {
    log_prime(p, bits)
        .mul_int(cp)
        .add(&log_prime(q, bits).mul_int(cq))
}

pub fn linear_form_i64(cp: i64, cq: i64, p: u64, q: u64, bits: u32) -> PrecisionInterval {
    linear_form(&BigInt::from(cp), &BigInt::from(cq), p, q, bits)
}

/// Enclosure of ln(p^a * q^b).
pub fn log_value(x: ExponentPair, p: u64, q: u64, bits: u32) -> PrecisionInterval {
    linear_form(&BigInt::from(x.a), &BigInt::from(x.b), p, q, bits)
}

fn materialize_scaled(c: u64, x: ExponentPair, p: u64, q: u64) -> BigUint {
    let a: u32 = x.a.try_into().expect("exponent too large to materialize");
    let b: u32 = x.b.try_into().expect("exponent too large to materialize");
    BigUint::from(c) * BigUint::from(p).pow(a) * BigUint::from(q).pow(b)
}

/// Upper bound on the bit length of c * p^a * q^b.
fn scaled_bits_estimate(c: u64, x: ExponentPair, p: u64, q: u64) -> u64 {
    u64::from(c.ilog2()) + 1 + x.a * u64::from(p.ilog2() + 1) + x.b * u64::from(q.ilog2() + 1)
}

/// Exact ordering of c1 * p^x.a * q^x.b versus c2 * p^y.a * q^y.b.
///
/// Interval comparison resolves every strict inequality; genuine equality
/// (possible, e.g. 2 * 1 = 1 * 2^1) is the one case it cannot, so once
/// escalation stalls the two sides are compared as exact integers.
pub fn compare_scaled(
    c1: u64,
    x: ExponentPair,
    c2: u64,
    y: ExponentPair,
    p: u64,
    q: u64,
) -> Ordering {
    assert!(c1 > 0 && c2 > 0);
    if c1 == c2 && x == y {
        return Ordering::Equal;
    }
    let size = scaled_bits_estimate(c1, x, p, q).max(scaled_bits_estimate(c2, y, p, q));
    // Small operands: cut interval refinement short, exact compare is cheap.
    let cutoff = if size <= 1 << 24 { 512 } else { MAX_BITS };
    let da = BigInt::from(x.a) - BigInt::from(y.a);
    let db = BigInt::from(x.b) - BigInt::from(y.b);
    let mut bits = START_BITS;
    loop {
        let mut d = linear_form(&da, &db, p, q, bits);
        if c1 != c2 {
            d = d
                .add(&ln_big(&BigUint::from(c1), bits))
                .sub(&ln_big(&BigUint::from(c2), bits));
        }
        match d.sign() {
            Some(Ordering::Equal) => break, // exact zero only from identical terms
            Some(s) => return s,
            None => {}
        }
        if bits >= cutoff {
            break;
        }
        bits = (bits * 2).min(cutoff);
    }
    materialize_scaled(c1, x, p, q).cmp(&materialize_scaled(c2, y, p, q))
}

/// Exact ordering of the S-units p^x.a * q^x.b and p^y.a * q^y.b.
pub fn compare(x: ExponentPair, y: ExponentPair, p: u64, q: u64) -> Ordering {
    if x == y {
        return Ordering::Equal;
    }
    compare_scaled(1, x, 1, y, p, q)
}

/// Enclosure of Lambda = ln(next) - ln(cur) > 0 with a certified positive
/// lower bound; precision escalates internally if needed.
fn positive_log_ratio(
    cur: ExponentPair,
    next: ExponentPair,
    p: u64,
    q: u64,
    bits: u32,
) -> Result<PrecisionInterval> {
    let da = BigInt::from(next.a) - BigInt::from(cur.a);
    let db = BigInt::from(next.b) - BigInt::from(cur.b);
    let mut b = bits;
    loop {
        let lam = linear_form(&da, &db, p, q, b);
        if lam.lo_mant().is_positive() {
            return Ok(lam);
        }
        if b >= MAX_BITS {
            return Err(Error::NonPositiveLinearForm);
        }
        b = (b * 2).min(MAX_BITS);
    }
}

/// When next/cur is a small exact integer m = p^da * q^db, returns m.
fn integer_ratio(cur: ExponentPair, next: ExponentPair, p: u64, q: u64) -> Option<BigUint> {
    if next.a < cur.a || next.b < cur.b {
        return None;
    }
    let da = next.a - cur.a;
    let db = next.b - cur.b;
    if da * u64::from(p.ilog2() + 1) + db * u64::from(q.ilog2() + 1) > 64 {
        return None;
    }
    Some(ExponentPair::new(da, db).value(p, q))
}

/// Enclosure of ln((next - cur)/cur) = ln(exp(Lambda) - 1) for consecutive
/// values cur < next of the sequence.
///
/// When the ratio next/cur is exactly 2 the result is the exact zero
/// interval, which downstream statistics rely on.
pub fn log_gap_ratio(
    cur: ExponentPair,
    next: ExponentPair,
    p: u64,
    q: u64,
    bits: u32,
) -> Result<PrecisionInterval> {
    if let Some(m) = integer_ratio(cur, next, p, q) {
        let m1 = m - BigUint::one();
        if m1.is_one() {
            return Ok(PrecisionInterval::zero(bits));
        }
        return Ok(ln_big(&m1, bits));
    }
    let lam = positive_log_ratio(cur, next, p, q, bits)?;
    ln_expm1(&lam, bits).ok_or(Error::NonPositiveLinearForm)
}

/// Enclosure of ln(next - cur), the log of the gap itself.
pub fn log_gap(
    cur: ExponentPair,
    next: ExponentPair,
    p: u64,
    q: u64,
    bits: u32,
) -> Result<PrecisionInterval> {
    Ok(log_value(cur, p, q, bits).add(&log_gap_ratio(cur, next, p, q, bits)?))
}

/// Certified floor obtained by escalating the precision handed to `f`.
pub fn certified_floor(f: impl Fn(u32) -> PrecisionInterval) -> Option<BigInt> {
    escalate(|bits| f(bits).floor_certified())
}

/// Certified ceiling obtained by escalating the precision handed to `f`.
pub fn certified_ceil(f: impl Fn(u32) -> PrecisionInterval) -> Option<BigInt> {
    escalate(|bits| f(bits).ceil_certified())
}
