//! Cutting-and-stacking towers, Hamming-ball covering numbers of their names,
//! and slow-entropy measurements built on top of them.
//!
//! All measures are exact rationals by default ([`Rational`]); the generic
//! types also accept `f64`/`f32` through [`Weight`].

pub mod codewords;
pub mod covers;
pub mod error;
pub mod names;
pub mod scalar;
pub mod scenarios;
pub mod slowent;
pub mod tower;
pub mod verify;

pub use codewords::Codeword;
pub use error::{Error, Result};
pub use names::WeightedNames;
pub use scalar::{parse_rational, Weight};
pub use tower::{Column, LevelSet, Limits, Tower};

pub type Rational = num_rational::BigRational;
pub type ExactTower = Tower<Rational>;
pub type FloatTower = Tower<f64>;
pub type ExactNames = WeightedNames<Rational>;
