//! Exact computations on the multiplicative semigroup generated by two fixed
//! primes p < q: ordered enumeration and neighbor search, gap statistics, the
//! Bertrand-type threshold for a rational ratio alpha, and the discriminator
//! of an associated Lucas sequence.

pub mod arith;
pub mod bertrand;
pub mod cf;
pub mod discriminator;
pub mod error;
pub mod gaps;
pub mod primes;
pub mod sunits;
pub mod types;

pub use error::{Error, Result};
pub use types::{Alpha, ExponentPair};
