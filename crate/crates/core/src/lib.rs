//! Hybrid secure multipath coding for non-uniform sources.
//!
//! Each of `ℓ` source rows is compressed by a seeded polar source code, the
//! compressed matrix is mixed column by column with a random-binning code,
//! and only `c` of the `ℓ` links (plus the seed) are encrypted.
//!
//! Positions, links and rows are 0-based everywhere.

pub mod adversary;
pub mod analysis;
pub mod bitmat;
pub mod cli;
pub mod crypt;
pub mod error;
pub mod is_codec;
pub mod pipeline;
pub mod polar;
pub mod source_codec;

pub use bitmat::{BitMatrix, BitVector};
pub use error::{Error, Result};
pub use polar::{IndexProfile, PolarParams, ProfileMethod};
