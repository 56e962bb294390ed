//! Dense complex linear algebra helpers shared by the Fock engine and the
//! qudit-level channels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// `e^z - 1` evaluated without cancellation near `z = 0`.
pub fn cexpm1(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    let half_sin = (0.5 * y).sin();
    C64::new(
        x.exp_m1() * y.cos() - 2.0 * half_sin * half_sin,
        x.exp() * y.sin(),
    )
}

/// `ln(e^x - 1)` for `x >= 0`; `-inf` at zero.
pub fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// Hermitian part `(A + A*) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigen-decomposition of the Hermitian part of `a`, eigenvalues sorted in
/// descending order with matching eigenvector columns.
pub fn hermitian_eigen(a: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Square root of a positive semidefinite matrix; negative eigenvalues from
/// round-off are clamped to zero.
pub fn psd_sqrt(a: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(a);
    let diag = CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::from(v.max(0.0).sqrt())),
    );
    &vectors * CMatrix::from_diagonal(&diag) * vectors.adjoint()
}

/// Uhlmann fidelity `(tr sqrt(sqrt(a) b sqrt(a)))^2`, clamped to `[0, 1]`.
pub fn uhlmann_fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    let root = psd_sqrt(a);
    let inner = &root * b * &root;
    let (values, _) = hermitian_eigen(&inner);
    let s: f64 = values.iter().map(|v| v.max(0.0).sqrt()).sum();
    (s * s).clamp(0.0, 1.0)
}

/// Trace distance `(1/2) ||a - b||_1` of two Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(&(a - b));
    0.5 * values.iter().map(|v| v.abs()).sum::<f64>()
}

/// Frobenius norm of `U* U - 1`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

/// Largest singular value.
pub fn operator_norm(a: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(&(a.adjoint() * a));
    values.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = gaussian_matrix(n, n, rng);
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        let mut col = u.column_mut(j);
        col *= phase;
    }
    u
}

/// Matrix of independent standard complex normal entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(s * re, s * im)
    })
}

/// Maximum entrywise modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn expm1_matches_exp_away_from_zero() {
        for z in [C64::new(2.0, 1.0), C64::new(-3.0, 0.5), C64::new(0.3, -2.0)] {
            assert!((cexpm1(z) - (z.exp() - ONE)).norm() < 1e-14);
        }
    }

    #[test]
    fn expm1_is_accurate_near_zero() {
        let z = C64::new(1e-12, 2e-12);
        let got = cexpm1(z);
        assert!((got - z).norm() < 1e-22);
    }

    #[test]
    fn ln_expm1_branches_agree() {
        let x = 30.0;
        assert!((ln_expm1(x) - x.exp_m1().ln()).abs() < 1e-12);
        assert!((ln_expm1(500.0) - 500.0).abs() < 1e-12);
        assert_eq!(ln_expm1(0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..6 {
            let u = haar_unitary(n, &mut rng);
            assert!(unitarity_residual(&u) < 1e-12);
        }
    }

    #[test]
    fn fidelity_and_trace_distance_of_pure_states() {
        let a = CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ZERO]);
        let c = C64::new(0.6, 0.0);
        let s = C64::new(0.8, 0.0);
        let b = CMatrix::from_row_slice(2, 2, &[c * c, c * s, s * c, s * s]);
        assert!((uhlmann_fidelity(&a, &b) - 0.36).abs() < 1e-12);
        assert!((trace_distance(&a, &b) - 0.8).abs() < 1e-12);
    }
}
