//! Orthonormal frames of coherent spans, obtained from the Gram matrix of a
//! generating family, and the finite matrices of span-supported operators.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

use super::{CoherentTerm, DensityOperator, FockVector, MIN_NORM};

/// Gram eigenvalues below this fraction of the largest are discarded.
pub const GRAM_CUTOFF: f64 = 1e-10;

/// Largest trace defect `|tr(op) - tr(matrix)|` tolerated by
/// [`OrthonormalFrame::matrix_rep`].
pub const LEAKAGE_TOL: f64 = 1e-10;

/// Orthonormal vectors `f_k = sum_i C_ik g_i` over normalized generators
/// `g_i`.
#[derive(Clone, Debug)]
pub struct OrthonormalFrame {
    generators: Vec<FockVector>,
    coeffs: CMatrix,
    eigenvalues: Vec<f64>,
}

/// Frame of the span of `generators`, discarding Gram eigenvalues below
/// `tol` times the largest.
pub fn span_basis(generators: &[FockVector], tol: f64) -> Result<OrthonormalFrame> {
    let first = generators.first().ok_or(Error::NullVector { norm: 0.0 })?;
    let (modes, dim) = (first.modes(), first.dim());
    let mut normalized = Vec::with_capacity(generators.len());
    for g in generators {
        if g.modes() != modes {
            return Err(Error::ModeMismatch { expected: modes, found: g.modes() });
        }
        if g.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
        }
        let norm = g.norm();
        if norm > MIN_NORM {
            normalized.push(g.scale(C64::from(1.0 / norm)));
        }
    }
    if normalized.is_empty() {
        return Err(Error::NullVector { norm: 0.0 });
    }
    let n = normalized.len();
    let mut gram = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let z = normalized[i].inner(&normalized[j])?;
            gram[(i, j)] = z;
            gram[(j, i)] = z.conj();
        }
    }
    let (values, vectors) = linalg::hermitian_eigen(&gram);
    let cutoff = tol * values[0];
    let rank = values.iter().take_while(|&&l| l > cutoff).count();
    let mut coeffs = CMatrix::zeros(n, rank);
    for (k, value) in values.iter().take(rank).enumerate() {
        coeffs.set_column(k, &(vectors.column(k) * C64::from(1.0 / value.sqrt())));
    }
    Ok(OrthonormalFrame { generators: normalized, coeffs, eigenvalues: values[..rank].to_vec() })
}

impl OrthonormalFrame {
    pub fn new(generators: &[FockVector]) -> Result<Self> {
        span_basis(generators, GRAM_CUTOFF)
    }

    pub fn rank(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Retained Gram eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Coordinates `<f_k, v>`.
    pub fn components(&self, v: &FockVector) -> Result<CVector> {
        let overlaps = self
            .generators
            .iter()
            .map(|g| g.inner(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.coeffs.adjoint() * CVector::from_vec(overlaps))
    }

    /// The frame vector `f_k`.
    pub fn vector(&self, k: usize) -> FockVector {
        let g = &self.generators[0];
        FockVector::linear_combination(
            g.modes(),
            g.dim(),
            self.generators.iter().enumerate().map(|(i, v)| (self.coeffs[(i, k)], v)),
        )
        .expect("generators share a shape")
    }

    /// `<f_i, op f_j>` together with the trace defect `|tr(op) - tr(M)|`.
    pub fn matrix_rep_with_leakage(&self, op: &DensityOperator) -> Result<(CMatrix, f64)> {
        let r = self.rank();
        let mut m = CMatrix::zeros(r, r);
        for s in op.summands() {
            let ket = self.components(&s.ket)?;
            let bra = match &s.bra {
                Some(b) => self.components(b)?,
                None => ket.clone(),
            };
            m += (ket * bra.adjoint()) * s.weight;
        }
        let leakage = (op.trace() - m.trace()).norm();
        Ok((m, leakage))
    }

    /// `<f_i, op f_j>`; fails when the operator is not supported on the span.
    pub fn matrix_rep(&self, op: &DensityOperator) -> Result<CMatrix> {
        let (m, leakage) = self.matrix_rep_with_leakage(op)?;
        if leakage > LEAKAGE_TOL {
            return Err(Error::Support { leakage, threshold: LEAKAGE_TOL });
        }
        Ok(m)
    }
}

/// A frame for the joint support of several operators, generated by the
/// distinct product terms of their kets and bras in vacuum-split form.
/// Nearly parallel coherent vectors differ mostly by a small vacuum
/// component; splitting it off keeps the Gram matrix well conditioned.
pub fn operator_frame(ops: &[&DensityOperator]) -> Result<OrthonormalFrame> {
    let first = ops.first().ok_or(Error::NullVector { norm: 0.0 })?;
    let (modes, dim) = (first.modes(), first.dim());
    let mut terms = Vec::new();
    for op in ops {
        for v in op.generators() {
            if v.modes() != modes {
                return Err(Error::ModeMismatch { expected: modes, found: v.modes() });
            }
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
            }
            terms.extend(v.split_vacuum().terms.into_iter().map(|t| CoherentTerm::new(C64::from(1.0), t.factors)));
        }
    }
    let pieces = FockVector::canonical(modes, dim, terms);
    let generators: Vec<FockVector> = pieces
        .terms
        .into_iter()
        .map(|t| FockVector { modes, dim, terms: vec![CoherentTerm::new(C64::from(1.0), t.factors)] })
        .collect();
    OrthonormalFrame::new(&generators)
}

fn joint_matrices(a: &DensityOperator, b: &DensityOperator) -> Result<(CMatrix, CMatrix)> {
    let frame = operator_frame(&[a, b])?;
    Ok((frame.matrix_rep(a)?, frame.matrix_rep(b)?))
}

/// Uhlmann fidelity `(tr |sqrt(a) sqrt(b)|)^2` on a joint frame.
pub fn fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    let (ma, mb) = joint_matrices(a, b)?;
    Ok(linalg::uhlmann_fidelity(&ma, &mb))
}

/// `(1/2) ||a - b||_1` on a joint frame.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    let (ma, mb) = joint_matrices(a, b)?;
    Ok(linalg::trace_distance(&ma, &mb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::ModeVector;

    fn v(re: &[f64]) -> ModeVector {
        ModeVector::from_real(re).unwrap()
    }

    #[test]
    fn frames_of_simple_spans() {
        let vac = FockVector::exponential(&ModeVector::zeros(2));
        assert_eq!(OrthonormalFrame::new(std::slice::from_ref(&vac)).unwrap().rank(), 1);
        let g = FockVector::exponential(&v(&[0.4, 0.1]));
        assert_eq!(OrthonormalFrame::new(&[g.clone(), g.clone()]).unwrap().rank(), 1);
        assert_eq!(OrthonormalFrame::new(&[g, vac]).unwrap().rank(), 2);
        assert!(OrthonormalFrame::new(&[FockVector::zero(1, 2)]).is_err());
    }

    #[test]
    fn frame_vectors_are_orthonormal() {
        let gens: Vec<_> = [[0.1, 0.2], [0.5, -0.3], [0.0, 0.9], [-0.4, 0.4]]
            .iter()
            .map(|c| FockVector::coherent(&v(c)))
            .collect();
        let frame = OrthonormalFrame::new(&gens).unwrap();
        for i in 0..frame.rank() {
            for j in 0..frame.rank() {
                let z = frame.vector(i).inner(&frame.vector(j)).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((z - C64::from(expected)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn matrix_rep_of_vacuum_projector() {
        let vac = FockVector::vacuum(1, 2);
        let frame = OrthonormalFrame::new(std::slice::from_ref(&vac)).unwrap();
        let m = frame.matrix_rep(&DensityOperator::pure(&vac)).unwrap();
        assert!((m[(0, 0)] - C64::from(1.0)).norm() < 1e-15);
    }

    #[test]
    fn matrix_rep_detects_leakage() {
        let frame = OrthonormalFrame::new(&[FockVector::vacuum(1, 2)]).unwrap();
        let outside = FockVector::filtered_coherent(&v(&[1.0, 0.0]), None);
        assert!(matches!(frame.matrix_rep(&DensityOperator::pure(&outside)), Err(Error::Support { .. })));
    }

    #[test]
    fn trace_distance_resolves_small_vacuum_admixtures() {
        // |exp h> against |F_+ exp h> differ only by a vacuum component of
        // weight e^{-|h|^2}; the distance is e^{-|h|^2/2}.
        let h = v(&[5.0, 0.0]);
        let plain = DensityOperator::pure(&FockVector::coherent(&h));
        let filtered = DensityOperator::pure(&FockVector::filtered_coherent(&h, None));
        let td = trace_distance(&plain, &filtered).unwrap();
        assert!((td - (-12.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn pure_state_metrics() {
        let vac = FockVector::vacuum(1, 2);
        let other = FockVector::filtered_coherent(&v(&[0.7, 0.0]), None);
        let (a, b) = (DensityOperator::pure(&vac), DensityOperator::pure(&other));
        assert!(fidelity(&a, &b).unwrap() < 1e-15);
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);

        let c = FockVector::coherent(&v(&[0.6, -0.2]));
        let overlap = vac.inner(&c).unwrap().norm_sqr();
        let td = trace_distance(&a, &DensityOperator::pure(&c)).unwrap();
        assert!((td - (1.0 - overlap).sqrt()).abs() < 1e-12);
    }
}
