use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

use super::BMatrix;

/// Tolerance on the orthonormality of amplitude rows and the weight sum.
pub const STATE_TOL: f64 = 1e-10;

/// A qudit density matrix in the form `sum_s lambda_s |c_s><c_s|` with
/// orthonormal amplitude rows `c_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    weights: Vec<f64>,
    rows: CMatrix,
}

impl QuditState {
    pub fn new(weights: Vec<f64>, rows: CMatrix) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidState("a qudit needs dimension >= 1".into()));
        }
        if rows.nrows() != n || rows.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rows.nrows().max(rows.ncols()) });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < -1e-12) {
            return Err(Error::InvalidState("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("weights sum to {total}, not 1")));
        }
        let residual = (&rows * rows.adjoint() - CMatrix::identity(n, n)).norm();
        if !(residual <= STATE_TOL) {
            return Err(Error::InvalidState(format!("amplitude rows are not orthonormal (residual {residual:e})")));
        }
        Ok(QuditState { weights: weights.into_iter().map(|w| w.max(0.0)).collect(), rows })
    }

    /// The computational basis state `|k><k|`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidParameter(format!("basis index {k} out of range for dimension {n}")));
        }
        let mut weights = vec![0.0; n];
        weights[k] = 1.0;
        Self::new(weights, CMatrix::identity(n, n))
    }

    /// The pure uniform superposition `N^{-1/2} sum_j |j>`.
    pub fn uniform(n: usize) -> Result<Self> {
        let scale = C64::from(1.0 / (n as f64).sqrt());
        let rows = BMatrix::dft(n)?.entries().map(|z| z * scale);
        let mut weights = vec![0.0; n];
        weights[0] = 1.0;
        Self::new(weights, rows)
    }

    /// `1/N` times the identity.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidState("a qudit needs dimension >= 1".into()));
        }
        Self::new(vec![1.0 / n as f64; n], CMatrix::identity(n, n))
    }

    /// Seeded random state: Haar-distributed amplitude rows and weights
    /// uniform on the simplex.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidState("a qudit needs dimension >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = linalg::haar_unitary(n, &mut rng);
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        Self::new(raw.iter().map(|w| w / total).collect(), rows)
    }

    /// Pure state `|v><v|` (normalized), with the remaining rows completed to
    /// an orthonormal system.
    pub fn pure(v: &CVector) -> Result<Self> {
        let n = v.len();
        let norm = v.norm();
        if n == 0 || !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("pure state needs a nonzero finite vector".into()));
        }
        let unit = v.unscale(norm);
        let mut seed = CMatrix::zeros(n, n + 1);
        seed.set_column(0, &unit);
        for j in 0..n {
            seed[(j, 1 + j)] = C64::from(1.0);
        }
        // the first column of Q is parallel to `unit`, the rest complete it
        let mut rows = seed.qr().q().transpose();
        rows.set_row(0, &unit.transpose());
        let mut weights = vec![0.0; n];
        weights[0] = 1.0;
        Self::new(weights, rows)
    }

    /// Spectral decomposition of a density matrix; the trace is normalized
    /// and round-off negative eigenvalues are clamped.
    pub fn from_density(rho: &CMatrix) -> Result<Self> {
        let n = rho.nrows();
        if n == 0 || rho.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rho.ncols() });
        }
        let (values, vectors) = linalg::hermitian_eigen(rho);
        let clamped: Vec<f64> = values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clamped.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InvalidState("density matrix has no positive part".into()));
        }
        Self::new(clamped.iter().map(|v| v / total).collect(), vectors.transpose())
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row `s` holds the amplitudes `c_sj`.
    pub fn rows(&self) -> &CMatrix {
        &self.rows
    }

    /// `c_s` as a column vector.
    pub fn amplitudes(&self, s: usize) -> CVector {
        self.rows.row(s).transpose()
    }

    /// `sum_s lambda_s |c_s><c_s|`.
    pub fn density_matrix(&self) -> CMatrix {
        let n = self.dim();
        let mut rho = CMatrix::zeros(n, n);
        for (s, &w) in self.weights.iter().enumerate() {
            if w > 0.0 {
                let c = self.amplitudes(s);
                rho += (&c * c.adjoint()).scale(w);
            }
        }
        rho
    }

    /// `U rho U*` re-decomposed.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: u.ncols() });
        }
        let rows = (u * self.rows.transpose()).transpose();
        Self::new(self.weights.clone(), rows)
    }

    pub fn fidelity(&self, other: &QuditState) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(linalg::uhlmann_fidelity(&self.density_matrix(), &other.density_matrix()))
    }

    pub fn trace_distance(&self, other: &QuditState) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(linalg::trace_distance(&self.density_matrix(), &other.density_matrix()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructors_produce_valid_states() {
        for n in 1..6 {
            for k in 0..n {
                QuditState::basis(n, k).unwrap();
            }
            QuditState::uniform(n).unwrap();
            QuditState::maximally_mixed(n).unwrap();
            QuditState::random(n, 11).unwrap();
        }
        assert!(QuditState::basis(2, 2).is_err());
    }

    #[test]
    fn random_states_are_reproducible() {
        assert_eq!(QuditState::random(4, 5).unwrap(), QuditState::random(4, 5).unwrap());
        assert_ne!(QuditState::random(4, 5).unwrap(), QuditState::random(4, 6).unwrap());
    }

    #[test]
    fn pure_state_keeps_its_vector() {
        let v = CVector::from_vec(vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0), C64::new(0.5, 0.0)]);
        let q = QuditState::pure(&v).unwrap();
        let unit = v.unscale(v.norm());
        assert!((q.amplitudes(0) - &unit).norm() < 1e-15);
        let rho = q.density_matrix();
        assert!((rho - &unit * unit.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn density_roundtrip() {
        let q = QuditState::random(4, 21).unwrap();
        let back = QuditState::from_density(&q.density_matrix()).unwrap();
        assert!(q.trace_distance(&back).unwrap() < 1e-13);
        assert!((q.fidelity(&back).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_invalid_data() {
        assert!(QuditState::new(vec![0.5, 0.6], CMatrix::identity(2, 2)).is_err());
        let mut rows = CMatrix::identity(2, 2);
        rows[(1, 0)] = C64::from(1.0);
        assert!(QuditState::new(vec![0.5, 0.5], rows).is_err());
    }
}
