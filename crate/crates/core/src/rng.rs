//! Seeded random streams and the random matrix ensembles used by the checks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::{ComplexMatrix, C64};

/// The stream for trial `trial` of a check seeded with `seed`.
///
/// Streams are independent of scheduling, so parallel and sequential runs
/// draw exactly the same numbers.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix: i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix
/// with the phases of `R`'s diagonal pushed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = ginibre(rng, n, n).to_na();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            return C64::new(0.0, 0.0);
        }
        let d = r[(i, i)];
        if d.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            d / d.norm()
        }
    });
    ComplexMatrix::from_na(&(q * phases))
}

/// Ginibre matrix rescaled to operator norm `norm`.
pub fn matrix_with_norm<R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    norm: f64,
) -> ComplexMatrix {
    let g = ginibre(rng, rows, cols);
    let current = g.operator_norm();
    if current == 0.0 {
        return g;
    }
    g.scale(C64::new(norm / current, 0.0))
}

/// Uniform point of the open unit disk scaled by `radius`.
pub fn disk_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> C64 {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    C64::from_polar(r, phi)
}
