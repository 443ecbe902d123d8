use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// An S-unit p^a * q^b represented by its exponent pair only.
///
/// The integer itself is materialized only on explicit request; results in
/// this crate routinely have tens of thousands of digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExponentPair {
    pub a: u64,
    pub b: u64,
}

impl ExponentPair {
    pub const ONE: ExponentPair = ExponentPair { a: 0, b: 0 };

    pub fn new(a: u64, b: u64) -> Self {
        ExponentPair { a, b }
    }

    pub fn is_one(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    /// Materialize p^a * q^b as an exact integer.
    pub fn value(&self, p: u64, q: u64) -> BigUint {
        BigUint::from(p).pow(self.a as u32) * BigUint::from(q).pow(self.b as u32)
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// An exact rational alpha = num/den in lowest terms with alpha > 1.
///
/// Rationality keeps the floor/ceiling operations of the descent exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alpha {
    num: u64,
    den: u64,
}

impl Alpha {
    pub fn new(num: u64, den: u64) -> Result<Self, Error> {
        if den == 0 || num <= den {
            return Err(Error::BadRational(format!(
                "{num}/{den} is not a rational > 1"
            )));
        }
        let g = num.gcd(&den);
        Ok(Alpha {
            num: num / g,
            den: den / g,
        })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// alpha <= p, required by the descent (Bertrand range).
    pub fn check_range(&self, p: u64) -> Result<(), Error> {
        // num/den <= p  <=>  num <= p*den
        if u128::from(self.num) > u128::from(p) * u128::from(self.den) {
            return Err(Error::AlphaOutOfRange {
                num: self.num,
                den: self.den,
                p,
            });
        }
        Ok(())
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::BadRational(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let num = n.trim().parse().map_err(|_| bad())?;
                let den = d.trim().parse().map_err(|_| bad())?;
                Alpha::new(num, den)
            }
            None => {
                let num = s.trim().parse().map_err(|_| bad())?;
                Alpha::new(num, 1)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_parses_and_reduces() {
        let a: Alpha = "6/4".parse().unwrap();
        assert_eq!((a.num(), a.den()), (3, 2));
        assert_eq!("2".parse::<Alpha>().unwrap(), Alpha::new(2, 1).unwrap());
        assert!("1".parse::<Alpha>().is_err());
        assert!("3/3".parse::<Alpha>().is_err());
        assert!("x/2".parse::<Alpha>().is_err());
    }

    #[test]
    fn alpha_range() {
        let a = Alpha::new(7, 4).unwrap();
        assert!(a.check_range(2).is_ok());
        assert!(a.check_range(1).is_err());
        assert!(Alpha::new(3, 1).unwrap().check_range(2).is_err());
    }

    #[test]
    fn pair_value() {
        let s = ExponentPair::new(3, 1);
        assert_eq!(s.value(2, 3), BigUint::from(24u32));
        assert_eq!(ExponentPair::ONE.value(13, 89), BigUint::from(1u32));
    }
}
