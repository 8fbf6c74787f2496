//! Numerical toolkit for the resolvent order on firmly nonexpansive maps of R^n.
//!
//! `T1 ⪯ T2` holds when `T2 − T1` is firmly nonexpansive. The crate certifies or
//! falsifies this relation (and the classical orders it unifies: Loewner on PSD
//! matrices, Zarantonello on cone projectors, Moreau on envelopes) exactly for
//! affine operators and by seeded sampling otherwise.

pub mod certify;
pub mod cli;
pub mod error;
pub mod gallery;
pub mod linops;
pub mod orders;
pub mod prox_catalog;
pub mod quotient;
pub mod resolvent_calculus;
pub mod sampling;

pub use error::{Error, Result};
