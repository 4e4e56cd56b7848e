//! Dense complex matrices and nc-point algebra.

mod derivative;
mod matrix;
mod point;

pub use derivative::{directional_derivative, DerivativeEstimate, DiffScheme};
pub use matrix::{ComplexMatrix, SqrtPower, C64, EIGEN_CLAMP};
pub use point::{
    relative_matrix_residual, relative_residual, BlockShape, NcPoint, CONJUGATION_RCOND_FLOOR,
};
