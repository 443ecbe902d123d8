//! Fixed-point interval arithmetic over `BigInt` mantissas.
//!
//! An interval stores two mantissas at a common binary scale: the represented
//! exact real is guaranteed to lie in `[lo, hi] * 2^-bits`. All operations
//! round outward, so soundness is preserved through arbitrary compositions.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

/// A certified enclosure of a real number.
#[derive(Debug, Clone)]
pub struct PrecisionInterval {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

/// Floor division with a strictly positive divisor.
pub(crate) fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(b.is_positive());
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if r.is_negative() {
        q - 1
    } else {
        q
    }
}

/// Ceiling division with a strictly positive divisor.
pub(crate) fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(b.is_positive());
    let (q, r) = num_integer::Integer::div_rem(a, b);
    if r.is_positive() {
        q + 1
    } else {
        q
    }
}

fn shr_floor(a: &BigInt, k: u32) -> BigInt {
    floor_div(a, &(BigInt::from(1) << k))
}

fn shr_ceil(a: &BigInt, k: u32) -> BigInt {
    ceil_div(a, &(BigInt::from(1) << k))
}

impl PrecisionInterval {
    pub fn new(lo: BigInt, hi: BigInt, bits: u32) -> Self {
        debug_assert!(lo <= hi);
        PrecisionInterval { lo, hi, bits }
    }

    pub fn exact_int<T: Into<BigInt>>(n: T, bits: u32) -> Self {
        let m: BigInt = n.into();
        let m = m << bits;
        PrecisionInterval {
            lo: m.clone(),
            hi: m,
            bits,
        }
    }

    pub fn zero(bits: u32) -> Self {
        PrecisionInterval {
            lo: BigInt::zero(),
            hi: BigInt::zero(),
            bits,
        }
    }

    /// Tightest `bits`-scale enclosure of the exact rational `num/den`, `den > 0`.
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Self {
        let scaled = num << bits;
        PrecisionInterval {
            lo: floor_div(&scaled, den),
            hi: ceil_div(&scaled, den),
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn lo_mant(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_mant(&self) -> &BigInt {
        &self.hi
    }

    /// Rescale to a new binary scale, rounding outward when coarsening.
    pub fn rescale(&self, bits: u32) -> Self {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let k = bits - self.bits;
                PrecisionInterval {
                    lo: &self.lo << k,
                    hi: &self.hi << k,
                    bits,
                }
            }
            Ordering::Less => {
                let k = self.bits - bits;
                PrecisionInterval {
                    lo: shr_floor(&self.lo, k),
                    hi: shr_ceil(&self.hi, k),
                    bits,
                }
            }
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let bits = self.bits.max(other.bits);
        (self.rescale(bits), other.rescale(bits))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        PrecisionInterval {
            lo: a.lo + b.lo,
            hi: a.hi + b.hi,
            bits: a.bits,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        PrecisionInterval {
            lo: -self.hi.clone(),
            hi: -self.lo.clone(),
            bits: self.bits,
        }
    }

    /// Multiply by an exact integer.
    pub fn mul_int(&self, k: &BigInt) -> Self {
        let a = &self.lo * k;
        let b = &self.hi * k;
        let (lo, hi) = if k.is_negative() { (b, a) } else { (a, b) };
        PrecisionInterval {
            lo,
            hi,
            bits: self.bits,
        }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self.mul_int(&BigInt::from(k))
    }

    /// Divide by an exact positive integer, rounding outward.
    pub fn div_uint(&self, k: &BigInt) -> Self {
        debug_assert!(k.is_positive());
        PrecisionInterval {
            lo: floor_div(&self.lo, k),
            hi: ceil_div(&self.hi, k),
            bits: self.bits,
        }
    }

    /// General interval product, outward-rounded at the coarser operand scale.
    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let bits = a.bits;
        let products = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let lo = products.iter().min().unwrap().clone();
        let hi = products.iter().max().unwrap().clone();
        PrecisionInterval {
            lo: shr_floor(&lo, bits),
            hi: shr_ceil(&hi, bits),
            bits,
        }
    }

    /// Interval quotient; the divisor must exclude zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        other.sign()?; // None if the divisor straddles zero
        if other.lo.is_zero() || other.hi.is_zero() {
            return None;
        }
        let (a, b) = self.aligned(other);
        let bits = a.bits;
        let scale = BigInt::from(1) << bits;
        // Directed quotients of (x * 2^bits) / y over all endpoint pairs.
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for x in [&a.lo, &a.hi] {
            for y in [&b.lo, &b.hi] {
                let num = x * &scale;
                let (f, c) = if y.is_positive() {
                    (floor_div(&num, y), ceil_div(&num, y))
                } else {
                    let ny = -y.clone();
                    let nnum = -num;
                    (floor_div(&nnum, &ny), ceil_div(&nnum, &ny))
                };
                lo = Some(match lo {
                    Some(v) => v.min(f),
                    None => f,
                });
                hi = Some(match hi {
                    Some(v) => v.max(c),
                    None => c,
                });
            }
        }
        Some(PrecisionInterval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
            bits,
        })
    }

    /// Widen both endpoints by `n` units in the last place.
    pub fn widen_ulps(&self, n: u64) -> Self {
        let d = BigInt::from(n);
        PrecisionInterval {
            lo: &self.lo - &d,
            hi: &self.hi + &d,
            bits: self.bits,
        }
    }

    /// The certain sign of the enclosed value, or `None` if the interval
    /// straddles zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.lo.is_zero() && self.hi.is_zero()
    }

    /// Certified floor of the enclosed value, when unambiguous.
    pub fn floor_certified(&self) -> Option<BigInt> {
        let f_lo = shr_floor(&self.lo, self.bits);
        let f_hi = shr_floor(&self.hi, self.bits);
        (f_lo == f_hi).then_some(f_lo)
    }

    /// Certified ceiling of the enclosed value, when unambiguous.
    pub fn ceil_certified(&self) -> Option<BigInt> {
        let c_lo = shr_ceil(&self.lo, self.bits);
        let c_hi = shr_ceil(&self.hi, self.bits);
        (c_lo == c_hi).then_some(c_lo)
    }

    /// Interval width as an exact rational `(numerator, 2^bits)`.
    pub fn width_mant(&self) -> BigInt {
        &self.hi - &self.lo
    }

    /// True if the width is at most 2^-k.
    pub fn width_within_pow2(&self, k: u32) -> bool {
        if self.bits < k {
            return (self.width_mant() << (k - self.bits)) <= BigInt::from(1);
        }
        self.width_mant() <= (BigInt::from(1) << (self.bits - k))
    }

    /// True if the exact rational num/den (den > 0) lies inside the interval.
    pub fn contains_ratio(&self, num: &BigInt, den: &BigInt) -> bool {
        debug_assert!(den.is_positive());
        let scaled = num << self.bits;
        &self.lo * den <= scaled && scaled <= &self.hi * den
    }

    fn mant_to_f64(m: &BigInt, bits: u32) -> f64 {
        let (sign, mag) = (m.sign(), m.magnitude());
        let nbits = mag.bits();
        let (top, shift) = if nbits > 64 {
            let s = nbits - 64;
            ((mag >> s).to_f64().unwrap_or(f64::INFINITY), s as i64)
        } else {
            (mag.to_f64().unwrap_or(0.0), 0)
        };
        let v = top * 2f64.powi((shift - bits as i64) as i32);
        match sign {
            Sign::Minus => -v,
            _ => v,
        }
    }

    pub fn lo_f64(&self) -> f64 {
        Self::mant_to_f64(&self.lo, self.bits)
    }

    pub fn hi_f64(&self) -> f64 {
        Self::mant_to_f64(&self.hi, self.bits)
    }

    pub fn mid_f64(&self) -> f64 {
        (self.lo_f64() + self.hi_f64()) / 2.0
    }

    pub fn width_f64(&self) -> f64 {
        Self::mant_to_f64(&self.width_mant(), self.bits)
    }

    /// Decimal rendering truncated (floor) at `frac` digits after the point,
    /// certified: returns `None` when the two endpoints truncate differently.
    pub fn to_decimal_truncated(&self, frac: u32) -> Option<String> {
        if self.is_exact_zero() {
            return Some("0".to_string());
        }
        let pow10 = BigInt::from(10u32).pow(frac);
        let scale = BigInt::from(1) << self.bits;
        let t_lo = floor_div(&(&self.lo * &pow10), &scale);
        let t_hi = floor_div(&(&self.hi * &pow10), &scale);
        if t_lo != t_hi {
            return None;
        }
        let neg = t_lo.is_negative();
        let mag: BigUint = t_lo.magnitude().clone();
        let digits = mag.to_string();
        let digits = if digits.len() <= frac as usize {
            format!("{}{}", "0".repeat(frac as usize + 1 - digits.len()), digits)
        } else {
            digits
        };
        let split = digits.len() - frac as usize;
        let (int_part, frac_part) = digits.split_at(split);
        let body = if frac == 0 {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac_part}")
        };
        Some(if neg { format!("-{body}") } else { body })
    }
}
