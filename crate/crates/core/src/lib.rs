//! Verification toolkit for repetition-constrained words with few palindromes.
//!
//! Modules build on each other bottom-up: [`words`] and [`repetitions`] hold
//! the exact primitives, [`morphisms`] generates morphic words and checks
//! freeness transfer, [`avoidance`] runs constrained exhaustive searches,
//! [`languages`] derives extendable cores and Rauzy graphs, and [`bispecial`]
//! computes critical exponents from bispecial factors and return words.

pub mod error;
pub mod suffix;
pub mod words;
pub mod repetitions;
pub mod avoidance;
pub mod morphisms;
pub mod fixtures;
pub mod languages;
pub mod bispecial;

pub use error::{Error, Result};
pub use repetitions::{Rational, Repetition, Threshold};
pub use words::{Alphabet, ParikhVector, Word};
