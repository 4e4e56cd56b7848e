//! Free noncommutative (nc) maps evaluated on tuples of complex matrices.
//!
//! The crate is split along the objects it manipulates:
//!
//! * [`matcore`]: dense complex matrices, nc-points, direct sums, the block
//!   packing `gamma`, Hermitian square roots and directional derivatives.
//! * [`domains`]: the matrix polydisk, the rectangular nc ball `R_pq`, the
//!   spectral disk and the commutator domain, with membership oracles.
//! * [`maps`]: matrix Möbius tuples, Morita isometries `x -> U x V`, the
//!   rectangular maps `H_A`, the block transpose and the commutator
//!   counterexample, plus composition and closed-form inverses.
//! * [`verify`]: seeded numerical experiments producing [`verify::CheckReport`]s.
//!
//! Trials inside a check run through [`par`], which uses rayon when the
//! `parallel` feature is enabled and falls back to a plain loop otherwise.
//! Every trial draws its randomness from `(seed, trial index)`, so both
//! execution modes produce identical reports.

// `!(x >= t)` is used on purpose so that NaN fails the comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domains;
pub mod error;
pub mod maps;
pub mod matcore;
pub mod par;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use matcore::{BlockShape, ComplexMatrix, NcPoint, C64};
