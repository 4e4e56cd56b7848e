//! nc map families and their evaluators.

mod counterexample;
mod expr;
mod mobius;
mod rectangular;

pub use counterexample::{counterexample_apply, polynomial_apply};
pub use expr::NcMapExpr;
pub use mobius::{mobius_apply, polydisk_auto_apply, MobiusParams};
pub use rectangular::{
    ha_apply, ha_origin_image, kernel_sides, linear_isometry_apply, transpose_amplify,
    HA_RCOND_FLOOR, UNITARY_TOL,
};
