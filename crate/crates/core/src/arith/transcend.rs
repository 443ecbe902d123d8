//! Certified enclosures of the transcendental functions the library needs:
//! natural logs of integers and fixed-point values, exp(-x), and
//! ln(exp(x) - 1). Every routine returns an interval that provably contains
//! the exact value; truncation and tail errors are rounded outward.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::interval::{ceil_div, floor_div, PrecisionInterval};

const GUARD_BITS: u32 = 32;

fn shr_floor(a: &BigInt, k: u32) -> BigInt {
    floor_div(a, &(BigInt::one() << k))
}

fn shr_ceil(a: &BigInt, k: u32) -> BigInt {
    ceil_div(a, &(BigInt::one() << k))
}

/// Enclosure of atanh(a/b) at working scale `w`, for 0 <= a/b <= 1/2.
///
/// Plain power series: atanh(z) = sum z^(2j+1)/(2j+1). The tail after a term
/// of at most one ulp is below two ulps since z^2 <= 1/4.
fn atanh_ratio(a: &BigUint, b: &BigUint, w: u32) -> PrecisionInterval {
    if a.is_zero() {
        return PrecisionInterval::zero(w);
    }
    let a = BigInt::from(a.clone());
    let b = BigInt::from(b.clone());
    debug_assert!(&a * 2 <= b, "atanh argument must be <= 1/2");
    let z_lo = floor_div(&(&a << w), &b);
    let z_hi: BigInt = &z_lo + 1;
    let z2_lo = shr_floor(&(&z_lo * &z_lo), w);
    let z2_hi = shr_ceil(&(&z_hi * &z_hi), w);
    let mut sum_lo = z_lo.clone();
    let mut sum_hi = z_hi.clone();
    let mut t_lo = z_lo;
    let mut t_hi = z_hi;
    let mut j: u64 = 1;
    loop {
        t_lo = shr_floor(&(&t_lo * &z2_lo), w);
        t_hi = shr_ceil(&(&t_hi * &z2_hi), w);
        let d = BigInt::from(2 * j + 1);
        sum_lo += floor_div(&t_lo, &d);
        sum_hi += ceil_div(&t_hi, &d);
        if t_hi <= BigInt::from(2 * j + 3) {
            sum_hi += 2;
            break;
        }
        j += 1;
    }
    PrecisionInterval::new(sum_lo, sum_hi, w)
}

fn ln2_cache() -> &'static Mutex<HashMap<u32, PrecisionInterval>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, PrecisionInterval>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn ln_small_cache() -> &'static Mutex<HashMap<(u64, u32), PrecisionInterval>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), PrecisionInterval>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Enclosure of ln 2 at working scale `w`.
pub fn ln2(w: u32) -> PrecisionInterval {
    if let Some(v) = ln2_cache().lock().unwrap().get(&w) {
        return v.clone();
    }
    let v = atanh_ratio(&BigUint::one(), &BigUint::from(3u32), w).mul_i64(2);
    ln2_cache().lock().unwrap().insert(w, v.clone());
    v
}

/// Enclosure of ln n for an integer n >= 1, at requested precision `bits`
/// (the result is carried at a finer internal scale).
pub fn ln_big(n: &BigUint, bits: u32) -> PrecisionInterval {
    assert!(!n.is_zero(), "ln of zero");
    let w = bits + GUARD_BITS;
    if n.is_one() {
        return PrecisionInterval::zero(w);
    }
    let key = n.to_u64().map(|v| (v, w));
    if let Some(k) = key {
        if let Some(v) = ln_small_cache().lock().unwrap().get(&k) {
            return v.clone();
        }
    }
    // ln n = k ln 2 + 2 atanh((n - 2^k)/(n + 2^k)) with 2^k <= n < 2^(k+1),
    // so the series argument is below 1/3.
    let k = n.bits() - 1;
    let m = BigUint::one() << k;
    let series = atanh_ratio(&(n - &m), &(n + &m), w).mul_i64(2);
    let v = ln2(w).mul_i64(k as i64).add(&series);
    if let Some(kk) = key {
        ln_small_cache().lock().unwrap().insert(kk, v.clone());
    }
    v
}

/// Enclosure of ln(mant * 2^-scale) for a positive mantissa.
pub fn ln_mant(mant: &BigInt, scale: u32, bits: u32) -> PrecisionInterval {
    assert!(mant.is_positive(), "ln of a non-positive value");
    ln_big(mant.magnitude(), bits).sub(&ln2(bits + GUARD_BITS).mul_i64(scale as i64))
}

/// Enclosure of ln x for an interval x with a strictly positive lower bound.
pub fn ln_interval(x: &PrecisionInterval, bits: u32) -> Option<PrecisionInterval> {
    if !x.lo_mant().is_positive() {
        return None;
    }
    let lo = ln_mant(x.lo_mant(), x.bits(), bits);
    let hi = ln_mant(x.hi_mant(), x.bits(), bits);
    let w = lo.bits().max(hi.bits());
    let lo = lo.rescale(w);
    let hi = hi.rescale(w);
    Some(PrecisionInterval::new(
        lo.lo_mant().clone(),
        hi.hi_mant().clone(),
        w,
    ))
}

/// Enclosure of exp(-x) for x = mant * 2^-scale >= 0.
///
/// Argument reduction: exp(-x) = exp(-x/2^m)^(2^m) with x/2^m <= 1/2, then an
/// alternating Taylor series and m interval squarings. Guard bits absorb the
/// relative-error doubling per squaring.
pub fn exp_neg(mant: &BigInt, scale: u32, bits: u32) -> PrecisionInterval {
    assert!(!mant.is_negative(), "exp_neg takes a non-negative argument");
    let value_bits = mant.bits() as i64 - scale as i64;
    let m = (value_bits + 1).max(0) as u32;
    let w = bits + GUARD_BITS + 2 * m + 32;
    let one = BigInt::one() << w;
    // t = x / 2^m at scale w (w >= scale + m always holds here).
    let reduced_scale = scale + m;
    let (t_lo, t_hi) = if w >= reduced_scale {
        let t = mant << (w - reduced_scale);
        (t.clone(), t)
    } else {
        let t = shr_floor(mant, reduced_scale - w);
        (t.clone(), t + 1)
    };
    let mut sum_lo = one.clone();
    let mut sum_hi = one;
    let mut term_lo = t_lo.clone();
    let mut term_hi = t_hi.clone();
    let mut k: u64 = 1;
    let mut negative = true;
    loop {
        if negative {
            sum_lo -= &term_hi;
            sum_hi -= &term_lo;
        } else {
            sum_lo += &term_lo;
            sum_hi += &term_hi;
        }
        let d = BigInt::from(k + 1);
        let next_lo = floor_div(&shr_floor(&(&term_lo * &t_lo), w), &d);
        let next_hi = ceil_div(&shr_ceil(&(&term_hi * &t_hi), w), &d);
        if next_hi <= BigInt::one() {
            // alternating with decreasing terms: remainder below one term
            sum_lo -= 2;
            sum_hi += 2;
            break;
        }
        term_lo = next_lo;
        term_hi = next_hi;
        k += 1;
        negative = !negative;
    }
    if sum_lo.is_negative() {
        sum_lo = BigInt::zero();
    }
    // Undo the reduction by m squarings.
    for _ in 0..m {
        sum_lo = shr_floor(&(&sum_lo * &sum_lo), w);
        sum_hi = shr_ceil(&(&sum_hi * &sum_hi), w) + 1;
    }
    PrecisionInterval::new(sum_lo, sum_hi, w)
}

/// Enclosure of g(x) = ln(exp(x) - 1) at a single positive point
/// x = mant * 2^-scale.
///
/// For x < 1/2 the naive exp(x) - 1 would lose all relative accuracy, so we
/// use g(x) = ln x + ln((exp(x) - 1)/x) with the second factor summed as the
/// series 1 + x/2! + x^2/3! + ... For x >= 1/2, g(x) = x + ln(1 - exp(-x)).
fn ln_expm1_point(mant: &BigInt, scale: u32, bits: u32) -> PrecisionInterval {
    assert!(mant.is_positive());
    let half = BigInt::one() << (scale.max(1) - 1);
    if scale >= 1 && mant >= &half {
        // x + ln(1 - exp(-x))
        let e = exp_neg(mant, scale, bits + 8);
        let one = PrecisionInterval::exact_int(1, e.bits());
        let ln_term = ln_interval(&one.sub(&e), bits).expect("1 - exp(-x) > 0 for x >= 1/2");
        let x = PrecisionInterval::new(mant.clone(), mant.clone(), scale);
        x.add(&ln_term)
    } else {
        let w = bits + GUARD_BITS;
        let (t_lo, t_hi) = if w >= scale {
            let t = mant << (w - scale);
            (t.clone(), t)
        } else {
            let t = shr_floor(mant, scale - w);
            (t.clone(), t + 1)
        };
        // h = (exp(x) - 1)/x, term_k = x^k/(k+1)!
        let mut sum_lo = BigInt::one() << w;
        let mut sum_hi = sum_lo.clone();
        let mut term_lo = t_lo.clone();
        let mut term_hi = t_hi.clone();
        let mut k: u64 = 1;
        loop {
            let d = BigInt::from(k + 1);
            term_lo = floor_div(&term_lo, &d);
            term_hi = ceil_div(&term_hi, &d);
            sum_lo += &term_lo;
            sum_hi += &term_hi;
            if term_hi <= BigInt::one() {
                sum_hi += 2;
                break;
            }
            term_lo = shr_floor(&(&term_lo * &t_lo), w);
            term_hi = shr_ceil(&(&term_hi * &t_hi), w);
            k += 1;
        }
        let h = PrecisionInterval::new(sum_lo, sum_hi, w);
        let ln_h = ln_interval(&h, bits).expect("h >= 1");
        ln_mant(mant, scale, bits).add(&ln_h)
    }
}

/// Enclosure of ln(exp(L) - 1) for an interval L with strictly positive
/// lower bound. Monotone, so the endpoints are evaluated separately.
pub fn ln_expm1(lambda: &PrecisionInterval, bits: u32) -> Option<PrecisionInterval> {
    if !lambda.lo_mant().is_positive() {
        return None;
    }
    let lo = ln_expm1_point(lambda.lo_mant(), lambda.bits(), bits);
    let hi = ln_expm1_point(lambda.hi_mant(), lambda.bits(), bits);
    let w = lo.bits().max(hi.bits());
    let lo = lo.rescale(w);
    let hi = hi.rescale(w);
    Some(PrecisionInterval::new(
        lo.lo_mant().clone(),
        hi.hi_mant().clone(),
        w,
    ))
}

/// Enclosure of sqrt(n) for an integer n >= 0.
pub fn sqrt_big(n: &BigUint, bits: u32) -> PrecisionInterval {
    let w = bits + GUARD_BITS;
    let scaled = n << (2 * w);
    let root = scaled.sqrt(); // floor of the exact square root
    let lo = BigInt::from(root);
    let hi = &lo + 1;
    PrecisionInterval::new(lo, hi, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 50-digit references computed independently with mpmath.
    const LN2: &str = "0.69314718055994530941723212145817656807550013436025";
    const LN3: &str = "1.0986122886681096913952452369225257046474905578227";

    fn contains_decimal(iv: &PrecisionInterval, s: &str) -> bool {
        let (int_part, frac_part) = s.split_once('.').unwrap();
        let digits: String = format!("{int_part}{frac_part}");
        let num: BigInt = digits.parse().unwrap();
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        // widen by one ulp of the decimal reference
        let lo_ok = iv.lo_mant() * &den <= (&num + 1u32) << iv.bits();
        let hi_ok = iv.hi_mant() * &den >= (&num - 1u32) << iv.bits();
        lo_ok && hi_ok
    }

    #[test]
    fn ln_constants() {
        let l2 = ln_big(&BigUint::from(2u32), 128);
        assert!(contains_decimal(&l2, LN2));
        assert!(l2.width_within_pow2(120));
        let l3 = ln_big(&BigUint::from(3u32), 128);
        assert!(contains_decimal(&l3, LN3));
    }

    #[test]
    fn ln_of_large_integer() {
        // ln(3^100) = 100 ln 3
        let n = BigUint::from(3u32).pow(100);
        let l = ln_big(&n, 128);
        let expect = ln_big(&BigUint::from(3u32), 160).mul_i64(100);
        assert!(l.sub(&expect).sign().is_none(), "intervals must overlap");
    }

    #[test]
    fn ln_mant_matches_ratio() {
        // ln(7153/524288) = -4.29450930253057705392... (mpmath)
        let x = PrecisionInterval::from_ratio(&BigInt::from(7153), &BigInt::from(524288), 160);
        let l = ln_interval(&x, 128).unwrap();
        let v = l.mid_f64();
        assert!((v + 4.294509302530577).abs() < 1e-12, "{v}");
    }

    #[test]
    fn exp_neg_values() {
        // exp(-1) = 0.36787944117144232...
        let e = exp_neg(&(BigInt::one() << 64), 64, 128);
        assert!(contains_decimal(
            &e,
            "0.36787944117144232159552377016146086744581113103176"
        ));
        // exp(0) = 1
        let one = exp_neg(&BigInt::zero(), 10, 64);
        assert!(one.contains_ratio(&BigInt::one(), &BigInt::one()));
        // exp(-20) stays positive and tiny
        let tiny = exp_neg(&BigInt::from(20i64 << 32), 32, 96);
        assert!(tiny.hi_f64() < 3e-9 && tiny.lo_f64() >= 0.0);
    }

    #[test]
    fn ln_expm1_doubling_is_near_zero() {
        // L = ln 2 exactly -> ln(e^L - 1) = 0
        let l = ln_big(&BigUint::from(2u32), 128);
        let g = ln_expm1(&l, 128).unwrap();
        assert!(g.contains_ratio(&BigInt::zero(), &BigInt::one()));
        assert!(g.width_within_pow2(100));
    }

    #[test]
    fn ln_expm1_small_argument_keeps_relative_accuracy() {
        // L = 2^-40: ln(e^L - 1) ~ ln(L) + L/2 ~ -27.7258872223978...
        let l = PrecisionInterval::from_ratio(&BigInt::one(), &(BigInt::one() << 40), 160);
        let g = ln_expm1(&l, 128).unwrap();
        let v = g.mid_f64();
        // mpmath: log(expm1(2**-40)) = -27.72588722239781145...
        assert!((v + 27.72588722239781).abs() < 1e-10, "{v}");
        assert!(g.width_within_pow2(100));
    }

    #[test]
    fn ln_expm1_rejects_nonpositive() {
        let l = PrecisionInterval::new(BigInt::from(-1), BigInt::from(1), 32);
        assert!(ln_expm1(&l, 64).is_none());
    }

    #[test]
    fn sqrt5() {
        let s = sqrt_big(&BigUint::from(5u32), 128);
        assert!(contains_decimal(
            &s,
            "2.2360679774997896964091736687312762354406183596115"
        ));
    }
}
