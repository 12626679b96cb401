//! Oriented cube of resolutions for braid closures over F2[U1..Un].
//!
//! The crate builds the closed decorated diagram of a braid word, the Koszul
//! complex of every cycle at every cube vertex, and the first two pages of the
//! spectral sequence of the cube filtration. An independent skein-relation
//! evaluator supplies the HOMFLY-PT polynomial the Euler characteristic is
//! compared against.

pub mod braid;
pub mod cli;
pub mod cycles;
pub mod error;
pub mod export;
pub mod gf2;
pub mod homfly;
pub mod koszul;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
