use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{IdentityCheck, OPERATOR_TOL};
use crate::linalg::{CMatrix, CVector};

/// Phase matrix `b_nk` whose rows label Alice's measurement outcomes. Valid
/// matrices have unit-modulus entries and mutually orthogonal rows.
#[derive(Clone, Debug, PartialEq)]
pub struct BMatrix {
    entries: CMatrix,
}

impl BMatrix {
    /// `b_nk = exp(2 pi i n k / N)`.
    pub fn dft(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let entries = CMatrix::from_fn(n, n, |r, k| {
            let phase = 2.0 * PI * ((r * k) % n) as f64 / n as f64;
            C64::from_polar(1.0, phase)
        });
        Ok(BMatrix { entries })
    }

    /// Validated matrix; fails with the name of the first violated check.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let b = Self::unchecked(entries)?;
        for check in b.checks(OPERATOR_TOL) {
            if !check.pass {
                return Err(Error::InvalidBMatrix { check: check.name, residual: check.residual });
            }
        }
        Ok(b)
    }

    /// Square matrix without the phase or orthogonality checks.
    pub fn unchecked(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("b-matrix entry"));
        }
        Ok(BMatrix { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn entry(&self, n: usize, k: usize) -> C64 {
        self.entries[(n, k)]
    }

    pub fn row(&self, n: usize) -> CVector {
        self.entries.row(n).transpose()
    }

    /// `max |(|b_nk| - 1)|`.
    pub fn modulus_residual(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, z| acc.max((z.norm() - 1.0).abs()))
    }

    /// `max_{n != j} |<b_n, b_j>|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let gram = &self.entries.conjugate() * self.entries.transpose();
        let mut worst = 0.0_f64;
        for n in 0..self.dim() {
            for j in 0..self.dim() {
                if n != j {
                    worst = worst.max(gram[(n, j)].norm());
                }
            }
        }
        worst
    }

    pub fn checks(&self, tol: f64) -> [IdentityCheck; 2] {
        [
            IdentityCheck::new("b_unit_modulus", self.modulus_residual(), tol),
            IdentityCheck::new("b_rows_orthogonal", self.orthogonality_residual(), tol),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_examples() {
        let b1 = BMatrix::dft(1).unwrap();
        assert_eq!(b1.entry(0, 0), C64::from(1.0));

        let b2 = BMatrix::dft(2).unwrap();
        let gram = b2.entries() * b2.entries().adjoint();
        assert!((gram - CMatrix::identity(2, 2).scale(2.0)).norm() < 1e-15);
        assert!((b2.entry(1, 1) + C64::from(1.0)).norm() < 1e-15);

        let b4 = BMatrix::dft(4).unwrap();
        assert!(b4.modulus_residual() < 1e-15);
        assert!(b4.orthogonality_residual() < 1e-14);
    }

    #[test]
    fn corrupted_rows_are_rejected() {
        let mut e = BMatrix::dft(3).unwrap().entries().clone();
        e[(1, 0)] = e[(1, 1)];
        match BMatrix::new(e) {
            Err(Error::InvalidBMatrix { check, .. }) => assert_eq!(check, "b_rows_orthogonal"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dft_is_accepted_by_validation() {
        for n in 1..8 {
            BMatrix::new(BMatrix::dft(n).unwrap().entries().clone()).unwrap();
        }
    }
}
