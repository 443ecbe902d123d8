//! Principal convergents r_k/s_k of theta = ln p / ln q, certified by
//! interval arithmetic: a partial quotient is accepted only when the floors
//! of the interval endpoints agree, otherwise the whole prefix is recomputed
//! at doubled precision.

use std::path::{Path, PathBuf};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, PrecisionInterval};
use crate::error::{Error, Result};
use crate::primes::is_prime;
use crate::types::Alpha;

const CACHE_VERSION: u32 = 1;
const BUILD_START_BITS: u32 = 256;
const BUILD_MAX_BITS: u32 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// r/s < theta; even index (a_0 = 0, so 0/1 opens the lower side).
    Lower,
    /// r/s > theta; odd index.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Key {
    Numerator,
    Denominator,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Convergent {
    pub r: BigUint,
    pub s: BigUint,
    /// Partial quotient a_k that produced this convergent.
    pub quotient: BigUint,
    pub index: usize,
}

impl Convergent {
    pub fn side(&self) -> Side {
        if self.index % 2 == 0 {
            Side::Lower
        } else {
            Side::Upper
        }
    }

    fn key(&self, key: Key) -> &BigUint {
        match key {
            Key::Numerator => &self.r,
            Key::Denominator => &self.s,
        }
    }
}

/// The certified convergent prefix for one prime pair. Immutable after
/// construction; growth replaces the whole table.
#[derive(Debug, Clone)]
pub struct ConvergentTable {
    p: u64,
    q: u64,
    min_denominator: u64,
    entries: Vec<Convergent>,
    certified_bits: u32,
}

fn validate_pair(p: u64, q: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if p >= q {
        return Err(Error::PrimeOrder { p, q });
    }
    Ok(())
}

/// One pass of the continued-fraction expansion of theta at fixed precision.
/// Returns `None` as soon as a floor or a reciprocal cannot be certified.
fn expand_at(p: u64, q: u64, min_den: u64, bits: u32) -> Option<Vec<Convergent>> {
    let target = BigUint::from(min_den);
    let theta = arith::log_prime(p, bits).div(&arith::log_prime(q, bits))?;
    let mut entries = vec![Convergent {
        r: BigUint::zero(),
        s: BigUint::one(),
        quotient: BigUint::zero(),
        index: 0,
    }];
    // Recurrence seeds: (r_{-1}, s_{-1}) = (1, 0), (r_0, s_0) = (0, 1).
    let (mut r2, mut s2) = (BigUint::one(), BigUint::zero());
    let (mut r1, mut s1) = (BigUint::zero(), BigUint::one());
    let mut x = theta; // a_0 = 0, fractional part is theta itself
    loop {
        if !x.lo_mant().is_positive() {
            return None;
        }
        x = PrecisionInterval::exact_int(1, x.bits()).div(&x)?;
        let a: BigUint = x.floor_certified()?.to_biguint()?;
        if a.is_zero() {
            return None;
        }
        let r = &a * &r1 + &r2;
        let s = &a * &s1 + &s2;
        entries.push(Convergent {
            r: r.clone(),
            s: s.clone(),
            quotient: a.clone(),
            index: entries.len(),
        });
        (r2, s2) = (r1, s1);
        (r1, s1) = (r, s);
        let n = entries.len();
        if n >= 2 && entries[n - 2].s > target && entries[n - 1].s > target {
            return Some(entries);
        }
        x = x.sub(&PrecisionInterval::exact_int(BigInt::from(a), x.bits()));
    }
}

pub fn build_table(p: u64, q: u64, min_denominator: u64) -> Result<ConvergentTable> {
    validate_pair(p, q)?;
    let mut bits = BUILD_START_BITS;
    loop {
        if let Some(entries) = expand_at(p, q, min_denominator, bits) {
            return Ok(ConvergentTable {
                p,
                q,
                min_denominator,
                entries,
                certified_bits: bits,
            });
        }
        if bits >= BUILD_MAX_BITS {
            return Err(Error::PrecisionExhausted {
                bits,
                what: "continued-fraction expansion",
            });
        }
        bits *= 2;
    }
}

impl ConvergentTable {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn min_denominator(&self) -> u64 {
        self.min_denominator
    }

    pub fn entries(&self) -> &[Convergent] {
        &self.entries
    }

    pub fn certified_bits(&self) -> u32 {
        self.certified_bits
    }

    /// The convergent on `side` with maximal `key`-value <= `bound`, if any.
    /// Keys grow along each side, so the last match wins.
    pub fn select_extreme(&self, side: Side, key: Key, bound: &BigUint) -> Option<&Convergent> {
        self.entries
            .iter()
            .filter(|c| c.side() == side && c.key(key) <= bound)
            .last()
    }

    /// The best-approximation fraction on `side` with maximal `key` <= `bound`.
    ///
    /// Unlike `select_extreme`, this searches the full ladder of best
    /// approximants: the principal convergents of the side plus the
    /// intermediate fractions (c_m + j * c_{m+1}, 1 <= j < a_{m+2}) between
    /// consecutive ones. Neighbor search needs exactly this family; e.g. the
    /// successor of 27 over (2,3) requires the intermediate 3/5. Returns
    /// (numerator, denominator). Among equal keys, the later (sharper)
    /// ladder element wins.
    pub fn select_best_approx(
        &self,
        side: Side,
        key: Key,
        bound: &BigUint,
    ) -> Option<(BigUint, BigUint)> {
        let kv = |r: &BigUint, s: &BigUint| -> BigUint {
            match key {
                Key::Numerator => r.clone(),
                Key::Denominator => s.clone(),
            }
        };
        let mut best: Option<(BigUint, BigUint)> = None;
        // m walks the same-side principal indices; m = -1 is the virtual
        // seed 1/0 whose intermediates 1/j open the upper ladder.
        let mut m: i64 = if side == Side::Lower { 0 } else { -1 };
        loop {
            let (rm, sm) = if m < 0 {
                (BigUint::one(), BigUint::zero())
            } else {
                let e = self.entries.get(m as usize)?;
                (e.r.clone(), e.s.clone())
            };
            let km = kv(&rm, &sm);
            if m >= 0 {
                if km <= *bound {
                    best = Some((rm.clone(), sm.clone()));
                } else {
                    break; // keys only grow along the ladder
                }
            } else if km > *bound {
                break;
            }
            let Some(next) = self.entries.get((m + 1) as usize) else {
                break;
            };
            let Some(after) = self.entries.get((m + 2) as usize) else {
                break;
            };
            let j_cap = &after.quotient - 1u32;
            let kn = kv(&next.r, &next.s);
            let j_fit = if kn.is_zero() {
                j_cap.clone()
            } else {
                (bound - &km) / &kn
            };
            let j = j_cap.min(j_fit);
            if !j.is_zero() {
                best = Some((&rm + &j * &next.r, &sm + &j * &next.s));
            }
            m += 2;
        }
        best
    }

    /// True when the stored prefix is long enough for "maximal <= bound"
    /// queries against an exponent pair (a, b): the final convergent on each
    /// side must exceed both bounds.
    pub fn covers(&self, a: u64, b: u64) -> bool {
        let (a, b) = (BigUint::from(a), BigUint::from(b));
        self.entries.len() >= 2
            && self
                .entries
                .iter()
                .rev()
                .take(2)
                .all(|c| c.s > a && c.r > b)
    }

    /// Minimal m >= 0 with s_{m+1} > (ln q)/(ln alpha).
    ///
    /// Equivalent to num^{s_{m+1}} > q * den^{s_{m+1}}, which can never be an
    /// equality (q is prime and alpha <= p < q), so interval comparison
    /// always resolves.
    pub fn find_m(&self, alpha: Alpha) -> Result<usize> {
        let (num, den) = (BigUint::from(alpha.num()), BigUint::from(alpha.den()));
        for m in 0..self.entries.len() - 1 {
            let s = BigInt::from(self.entries[m + 1].s.clone());
            let above = arith::escalate(|bits| {
                let d = arith::ln_big(&num, bits)
                    .sub(&arith::ln_big(&den, bits))
                    .mul_int(&s)
                    .sub(&arith::ln_big(&BigUint::from(self.q), bits));
                d.sign()
            })
            .ok_or(Error::PrecisionExhausted {
                bits: arith::MAX_BITS,
                what: "denominator threshold test",
            })?;
            if above == std::cmp::Ordering::Greater {
                return Ok(m);
            }
        }
        Err(Error::ExtendTable {
            needed: self.min_denominator,
        })
    }
}

/// A priori upper bound for `find_m` from the Fibonacci growth of the
/// denominators: ceil((ln(ln q/ln alpha + 53/500) + (ln 5)/2)/ln phi) - 2,
/// clamped at 0.
pub fn fibonacci_bound_m(q: u64, alpha: Alpha) -> Result<u64> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if u128::from(alpha.num()) >= u128::from(q) * u128::from(alpha.den()) {
        return Err(Error::AlphaOutOfRange {
            num: alpha.num(),
            den: alpha.den(),
            p: q,
        });
    }
    let eval = |bits: u32| -> Option<PrecisionInterval> {
        let ln_alpha = arith::ln_big(&BigUint::from(alpha.num()), bits)
            .sub(&arith::ln_big(&BigUint::from(alpha.den()), bits));
        let ratio = arith::log_prime(q, bits).div(&ln_alpha)?;
        let shifted = ratio.add(&PrecisionInterval::from_ratio(
            &BigInt::from(53),
            &BigInt::from(500),
            bits,
        ));
        let ln_shifted = arith::ln_interval(&shifted, bits)?;
        let half_ln5 = arith::ln_big(&BigUint::from(5u32), bits).div_uint(&BigInt::from(2));
        let sqrt5 = arith::sqrt_big(&BigUint::from(5u32), bits);
        let phi = sqrt5
            .add(&PrecisionInterval::exact_int(1, bits))
            .div_uint(&BigInt::from(2));
        let ln_phi = arith::ln_interval(&phi, bits)?;
        ln_shifted.add(&half_ln5).div(&ln_phi)
    };
    let ceiling = match arith::escalate(|bits| eval(bits).and_then(|v| v.ceil_certified())) {
        Some(c) => c,
        // The expression is an upper bound, so rounding its upper endpoint
        // up keeps it one.
        None => {
            use crate::arith::interval::ceil_div;
            let v = eval(arith::MAX_BITS).ok_or(Error::PrecisionExhausted {
                bits: arith::MAX_BITS,
                what: "fibonacci index bound",
            })?;
            ceil_div(v.hi_mant(), &(BigInt::one() << v.bits()))
        }
    };
    let m: BigInt = ceiling - 2;
    Ok(if m.is_negative() {
        0
    } else {
        m.to_u64().expect("index bound fits u64")
    })
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    version: u32,
    p: u64,
    q: u64,
    min_denominator: u64,
    certified_bits: u32,
    quotients: Vec<String>,
    numerators: Vec<String>,
    denominators: Vec<String>,
}

fn cache_path(dir: &Path, p: u64, q: u64, min_den: u64) -> PathBuf {
    dir.join(format!("cf-{p}-{q}-{min_den}.json"))
}

impl ConvergentTable {
    pub fn to_file(&self, dir: &Path) -> Result<PathBuf> {
        let file = TableFile {
            version: CACHE_VERSION,
            p: self.p,
            q: self.q,
            min_denominator: self.min_denominator,
            certified_bits: self.certified_bits,
            quotients: self.entries.iter().map(|c| c.quotient.to_string()).collect(),
            numerators: self.entries.iter().map(|c| c.r.to_string()).collect(),
            denominators: self.entries.iter().map(|c| c.s.to_string()).collect(),
        };
        std::fs::create_dir_all(dir)?;
        let path = cache_path(dir, self.p, self.q, self.min_denominator);
        std::fs::write(&path, serde_json::to_string(&file)?)?;
        Ok(path)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let file: TableFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if file.version != CACHE_VERSION {
            return Err(Error::BadVersion(file.version));
        }
        let parse = |v: &[String]| -> Result<Vec<BigUint>> {
            v.iter()
                .map(|s| {
                    s.parse::<BigUint>()
                        .map_err(|_| Error::CheckpointMismatch(format!("bad integer `{s}`")))
                })
                .collect()
        };
        let quotients = parse(&file.quotients)?;
        let numerators = parse(&file.numerators)?;
        let denominators = parse(&file.denominators)?;
        if quotients.len() != numerators.len() || quotients.len() != denominators.len() {
            return Err(Error::CheckpointMismatch("ragged convergent arrays".into()));
        }
        let entries = quotients
            .into_iter()
            .zip(numerators)
            .zip(denominators)
            .enumerate()
            .map(|(index, ((quotient, r), s))| Convergent {
                r,
                s,
                quotient,
                index,
            })
            .collect();
        Ok(ConvergentTable {
            p: file.p,
            q: file.q,
            min_denominator: file.min_denominator,
            entries,
            certified_bits: file.certified_bits,
        })
    }
}

/// Build with a read-through file cache keyed by (p, q, min_denominator).
pub fn build_table_cached(
    p: u64,
    q: u64,
    min_denominator: u64,
    cache_dir: Option<&Path>,
) -> Result<ConvergentTable> {
    if let Some(dir) = cache_dir {
        let path = cache_path(dir, p, q, min_denominator);
        if path.exists() {
            if let Ok(t) = ConvergentTable::from_file(&path) {
                if t.p == p && t.q == q && t.min_denominator == min_denominator {
                    return Ok(t);
                }
            }
            // unreadable or mismatched cache: fall through and rebuild
        }
    }
    let table = build_table(p, q, min_denominator)?;
    if let Some(dir) = cache_dir {
        table.to_file(dir)?;
    }
    Ok(table)
}
