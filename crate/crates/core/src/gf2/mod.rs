//! Exact arithmetic over the two-element field.

pub mod matrix;
pub mod poly;

pub use matrix::{homology_dims, image, kernel, rank_f2, BitVec, Echelon, GradedMatrix, Homology};
pub use poly::{graded_basis, Monomial, PolyF2};
