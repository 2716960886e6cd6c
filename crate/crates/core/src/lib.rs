//! Broad-beam design for dual-polarized antenna arrays from complementary
//! sequence pairs: search, expansion, pattern evaluation and baselines.

pub mod error;
pub mod baselines;
pub mod cli;
pub mod evaluation;
pub mod expansion;
pub mod mgda;
pub mod patterns;
pub mod sequences;

pub use error::{Error, Result};
