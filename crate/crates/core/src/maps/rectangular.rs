//! Maps on the rectangular nc ball: Morita isometries, the block transpose
//! and the Harris-type maps `H_A`.
//!
//! Packed points live in `M_p(M_n)` / `M_{p,q}(M_n)` with `gamma`'s block
//! layout, so the level-`n` amplification of a `p x q` matrix `A` is
//! `A.amplify(n)`, whose `(i, j)` block is `a_ij I_n`.

use crate::error::{Error, Result};
use crate::matcore::{BlockShape, ComplexMatrix, NcPoint, SqrtPower};

pub const UNITARY_TOL: f64 = 1e-10;
/// Rcond floor for the middle factor `I + (A^* ⊗ I) Z` of `H_A`.
pub const HA_RCOND_FLOOR: f64 = 1e-12;

fn level_of(packed: &ComplexMatrix, shape: BlockShape) -> Result<usize> {
    let (r, c) = packed.shape();
    if r % shape.p != 0 || c % shape.q != 0 || r / shape.p != c / shape.q {
        return Err(Error::DimensionMismatch(format!(
            "{r}x{c} matrix is not a {}x{} block matrix of square blocks",
            shape.p, shape.q
        )));
    }
    Ok(r / shape.p)
}

/// `Z -> (U ⊗ I_n) Z (V ⊗ I_n)` on the packed point, i.e. `x -> U x V` on the
/// block indices.
pub fn linear_isometry_apply(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    shape: BlockShape,
    x: &NcPoint,
) -> Result<NcPoint> {
    if u.shape() != (shape.p, shape.p) || v.shape() != (shape.q, shape.q) {
        return Err(Error::DimensionMismatch(format!(
            "Morita factors must be {0}x{0} and {1}x{1}",
            shape.p, shape.q
        )));
    }
    u.ensure_unitary(UNITARY_TOL)?;
    v.ensure_unitary(UNITARY_TOL)?;
    let n = x.level();
    let packed = x.gamma_pack(shape)?;
    let image = &(&u.amplify(n) * &packed) * &v.amplify(n);
    NcPoint::gamma_unpack(&image, shape, n)
}

/// Exchange block `(i, j)` with block `(j, i)` of a `p x p` block matrix,
/// leaving each block untransposed.
pub fn transpose_amplify(p: usize, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if p == 0 || !x.is_square() || !x.rows().is_multiple_of(p) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not a {p}x{p} block matrix",
            x.rows(),
            x.cols()
        )));
    }
    let n = x.rows() / p;
    let mut out = ComplexMatrix::zeros(x.rows(), x.cols());
    for i in 0..p {
        for j in 0..p {
            out.set_block(j, i, &x.block(i, j, n, n));
        }
    }
    Ok(out)
}

/// Precomputed factors of `H_A` at one level.
struct HaFactors {
    left: ComplexMatrix,
    right: ComplexMatrix,
    a: ComplexMatrix,
    a_adj: ComplexMatrix,
}

impl HaFactors {
    fn new(a: &ComplexMatrix, n: usize) -> Result<Self> {
        let (p, q) = a.shape();
        let aa = &ComplexMatrix::identity(p) - &(a * &a.adjoint());
        let ata = &ComplexMatrix::identity(q) - &(&a.adjoint() * a);
        Ok(Self {
            left: aa.herm_sqrt_inv(SqrtPower::NegHalf)?.amplify(n),
            right: ata.herm_sqrt_inv(SqrtPower::Half)?.amplify(n),
            a: a.amplify(n),
            a_adj: a.adjoint().amplify(n),
        })
    }
}

/// `H_A(Z) = (I - AA^*)^{-1/2} (Z + A) (I + A^* Z)^{-1} (I - A^*A)^{1/2}`, with
/// every occurrence of `A` amplified to level `n`.
pub fn ha_apply(a: &ComplexMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    let shape = BlockShape::new(a.rows(), a.cols())?;
    let n = level_of(z, shape)?;
    let f = HaFactors::new(a, n)?;
    let middle = &ComplexMatrix::identity(n * shape.q) + &(&f.a_adj * z);
    let (middle_inv, _) = middle.inverse_checked(HA_RCOND_FLOOR)?;
    Ok(&(&(&f.left * &(z + &f.a)) * &middle_inv) * &f.right)
}

/// `A' = H_A(0)` at level 1: `(I - AA^*)^{-1/2} A (I - A^*A)^{1/2}`.
pub fn ha_origin_image(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    ha_apply(a, &ComplexMatrix::zeros(a.rows(), a.cols()))
}

/// Both sides of
/// `I - H_A(W)^* H_A(Z) = R (I + W^*(A ⊗ I))^{-1} (I - W^*Z) (I + (A^* ⊗ I)Z)^{-1} R`
/// with `R = (I - A^*A ⊗ I)^{1/2}`. The right side never calls `H_A`.
pub fn kernel_sides(
    a: &ComplexMatrix,
    w: &ComplexMatrix,
    z: &ComplexMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let shape = BlockShape::new(a.rows(), a.cols())?;
    let n = level_of(z, shape)?;
    if level_of(w, shape)? != n {
        return Err(Error::DimensionMismatch(
            "W and Z must share a level".into(),
        ));
    }
    let id = ComplexMatrix::identity(n * shape.q);
    let lhs = &id - &(&ha_apply(a, w)?.adjoint() * &ha_apply(a, z)?);

    let f = HaFactors::new(a, n)?;
    let w_adj = w.adjoint();
    let (left_inv, _) = (&id + &(&w_adj * &f.a)).inverse_checked(HA_RCOND_FLOOR)?;
    let (right_inv, _) = (&id + &(&f.a_adj * z)).inverse_checked(HA_RCOND_FLOOR)?;
    let core = &id - &(&w_adj * z);
    let rhs = &(&(&(&f.right * &left_inv) * &core) * &right_inv) * &f.right;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{relative_matrix_residual, C64};
    use crate::rng::{disk_point, haar_unitary, matrix_with_norm, trial_rng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_isometry_and_level_one_collapse() {
        let mut rng = trial_rng(51, 0);
        let shape = BlockShape::new(2, 3).unwrap();
        let packed = matrix_with_norm(&mut rng, 4, 6, 0.5);
        let x = NcPoint::gamma_unpack(&packed, shape, 2).unwrap();
        let same = linear_isometry_apply(
            &ComplexMatrix::identity(2),
            &ComplexMatrix::identity(3),
            shape,
            &x,
        )
        .unwrap();
        assert_eq!(same, x);

        let u = haar_unitary(&mut rng, 2);
        let v = haar_unitary(&mut rng, 3);
        let y = NcPoint::gamma_unpack(&matrix_with_norm(&mut rng, 2, 3, 0.5), shape, 1).unwrap();
        let image = linear_isometry_apply(&u, &v, shape, &y)
            .unwrap()
            .gamma_pack(shape)
            .unwrap();
        let direct = &(&u * &y.gamma_pack(shape).unwrap()) * &v;
        assert!((&image - &direct).max_abs() < 1e-14);

        let image2 = linear_isometry_apply(&u, &v, shape, &x)
            .unwrap()
            .gamma_pack(shape)
            .unwrap();
        assert!((image2.operator_norm() - packed.operator_norm()).abs() < 1e-10);
    }

    #[test]
    fn non_unitary_factor_is_rejected() {
        let shape = BlockShape::new(1, 1).unwrap();
        let x = NcPoint::zeros(2, 1);
        let twice = ComplexMatrix::identity(1).scale(c(2.0));
        assert!(matches!(
            linear_isometry_apply(&twice, &ComplexMatrix::identity(1), shape, &x),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn transpose_amplify_examples() {
        let m =
            ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 9.0]])
                .unwrap();
        assert_eq!(transpose_amplify(3, &m).unwrap(), m.transpose());
        assert_eq!(transpose_amplify(1, &m).unwrap(), m);

        let mut rng = trial_rng(52, 0);
        let a = matrix_with_norm(&mut rng, 2, 2, 1.0);
        let b = matrix_with_norm(&mut rng, 2, 2, 1.0);
        let block_diag = a.direct_sum(&b);
        assert_eq!(transpose_amplify(2, &block_diag).unwrap(), block_diag);
        assert!(transpose_amplify(2, &ComplexMatrix::zeros(3, 3)).is_err());
    }

    /// Swap unitary `sum E_ij ⊗ E_ji`. Its block transpose is
    /// `sum E_ij ⊗ E_ij = p |w><w|` with `w = sum e_i ⊗ e_i / sqrt(p)`.
    #[test]
    fn swap_witness_norm_is_p() {
        for p in 1..=4 {
            let mut swap = ComplexMatrix::zeros(p * p, p * p);
            for i in 0..p {
                for j in 0..p {
                    swap.set_block(i, j, &ComplexMatrix::unit(p, p, j, i));
                }
            }
            assert!((swap.operator_norm() - 1.0).abs() < 1e-12);
            let image = transpose_amplify(p, &swap).unwrap();
            // Eigen-oracle: the image is Hermitian with spectrum {p, 0, ..., 0}.
            let (values, _) = image.hermitian_eigen().unwrap();
            assert!((values[values.len() - 1] - p as f64).abs() < 1e-12);
            assert!(values[..values.len() - 1].iter().all(|v| v.abs() < 1e-12));
            assert!((image.operator_norm() - p as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn ha_with_zero_parameter_is_identity() {
        let mut rng = trial_rng(53, 0);
        let z = matrix_with_norm(&mut rng, 4, 6, 0.9);
        let out = ha_apply(&ComplexMatrix::zeros(2, 3), &z).unwrap();
        assert!((&out - &z).max_abs() < 1e-15);
    }

    #[test]
    fn ha_at_origin() {
        let a = ComplexMatrix::scalar(C64::new(0.3, 0.6));
        let image = ha_origin_image(&a).unwrap();
        assert!((image[(0, 0)] - a[(0, 0)]).norm() < 1e-15);

        let mut rng = trial_rng(54, 0);
        let a = matrix_with_norm(&mut rng, 2, 3, 0.8);
        let aa = &ComplexMatrix::identity(2) - &(&a * &a.adjoint());
        let ata = &ComplexMatrix::identity(3) - &(&a.adjoint() * &a);
        let expected = &(&aa.herm_sqrt_inv(SqrtPower::NegHalf).unwrap() * &a)
            * &ata.herm_sqrt_inv(SqrtPower::Half).unwrap();
        let at_level_two = ha_apply(&a, &ComplexMatrix::zeros(4, 6)).unwrap();
        assert!((&at_level_two - &expected.amplify(2)).max_abs() < 1e-14);
    }

    #[test]
    fn scalar_ha_is_a_disk_automorphism() {
        let mut rng = trial_rng(55, 0);
        for _ in 0..100 {
            let a = disk_point(&mut rng, 0.95);
            let z = disk_point(&mut rng, 0.99);
            let got =
                ha_apply(&ComplexMatrix::scalar(a), &ComplexMatrix::scalar(z)).unwrap()[(0, 0)];
            let expected = (z + a) / (1.0 + a.conj() * z);
            assert!((got - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn ha_inverse_law() {
        let mut rng = trial_rng(56, 0);
        for (p, q, n) in [(1, 2, 3), (2, 2, 2), (3, 1, 2), (2, 3, 1)] {
            for _ in 0..20 {
                let a = matrix_with_norm(&mut rng, p, q, 0.9);
                let z = matrix_with_norm(&mut rng, n * p, n * q, 0.9);
                let back = ha_apply(&a.scale(c(-1.0)), &ha_apply(&a, &z).unwrap()).unwrap();
                assert!(relative_matrix_residual(&back, &z) <= 1e-9);
            }
        }
    }

    #[test]
    fn kernel_identity_special_cases() {
        let mut rng = trial_rng(57, 0);
        let w = matrix_with_norm(&mut rng, 4, 4, 0.8);
        let z = matrix_with_norm(&mut rng, 4, 4, 0.8);
        let (lhs, rhs) = kernel_sides(&ComplexMatrix::zeros(2, 2), &w, &z).unwrap();
        let direct = &ComplexMatrix::identity(4) - &(&w.adjoint() * &z);
        assert!((&lhs - &direct).max_abs() < 1e-14);
        assert!((&rhs - &direct).max_abs() < 1e-14);

        let a = matrix_with_norm(&mut rng, 2, 3, 0.7);
        let zero = ComplexMatrix::zeros(4, 6);
        let (lhs, rhs) = kernel_sides(&a, &zero, &zero).unwrap();
        let expected = &ComplexMatrix::identity(6) - &(&a.adjoint() * &a).amplify(2);
        assert!((&lhs - &expected).max_abs() < 1e-13);
        assert!((&rhs - &expected).max_abs() < 1e-13);
    }
}
