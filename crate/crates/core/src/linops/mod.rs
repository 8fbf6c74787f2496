//! Dense vectors and matrices, spectral helpers, and the operator expression tree.

mod expr;
mod matrix;
mod spectrum;
mod vector;

pub use expr::{affine_parts, eval, linearize, AffineParts, Linearization, Node, OperatorExpr, MONOTONE_TOL};
pub use matrix::{Matrix, CONDITION_LIMIT, SYMMETRY_TOL};
pub use spectrum::{spectrum, symmetric_eigen, top_singular, EigenDecomposition, Spectrum};
pub use vector::Vector;
