use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

use super::FockVector;

/// `weight * |ket><bra|`; a missing bra means `bra = ket`.
#[derive(Clone, Debug)]
pub struct Summand {
    pub weight: C64,
    pub ket: FockVector,
    pub bra: Option<FockVector>,
}

impl Summand {
    pub fn bra(&self) -> &FockVector {
        self.bra.as_ref().unwrap_or(&self.ket)
    }

    pub fn is_hermitian(&self) -> bool {
        self.bra.is_none() && self.weight.im == 0.0
    }
}

/// A finite-rank operator `sum_s w_s |ket_s><bra_s|` on a coherent span.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    modes: usize,
    dim: usize,
    summands: Vec<Summand>,
}

impl DensityOperator {
    pub fn zero(modes: usize, dim: usize) -> Self {
        DensityOperator { modes, dim, summands: Vec::new() }
    }

    /// `|v><v|`, taken as given (not normalized).
    pub fn pure(v: &FockVector) -> Self {
        DensityOperator {
            modes: v.modes(),
            dim: v.dim(),
            summands: vec![Summand { weight: C64::from(1.0), ket: v.clone(), bra: None }],
        }
    }

    /// `sum_s lambda_s |v_s><v_s|`.
    pub fn mixture(items: &[(f64, FockVector)]) -> Result<Self> {
        let first = items.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let summands = items
            .iter()
            .map(|(w, v)| Summand { weight: C64::from(*w), ket: v.clone(), bra: None })
            .collect();
        Self::from_summands(first.1.modes(), first.1.dim(), summands)
    }

    /// `weight * |ket><bra|`.
    pub fn dyad(weight: C64, ket: &FockVector, bra: &FockVector) -> Result<Self> {
        Self::from_summands(ket.modes(), ket.dim(), vec![Summand { weight, ket: ket.clone(), bra: Some(bra.clone()) }])
    }

    pub fn from_summands(modes: usize, dim: usize, summands: Vec<Summand>) -> Result<Self> {
        for s in &summands {
            for v in std::iter::once(&s.ket).chain(s.bra.as_ref()) {
                if v.modes() != modes {
                    return Err(Error::ModeMismatch { expected: modes, found: v.modes() });
                }
                if v.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
                }
            }
            if !s.weight.re.is_finite() || !s.weight.im.is_finite() {
                return Err(Error::NonFinite("summand weight"));
            }
        }
        Ok(DensityOperator { modes, dim, summands })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn trace(&self) -> C64 {
        self.summands
            .iter()
            .map(|s| s.weight * s.bra().inner(&s.ket).expect("summand shapes checked on construction"))
            .sum()
    }

    /// `<v, op v>`.
    pub fn expectation(&self, v: &FockVector) -> Result<C64> {
        let mut acc = C64::from(0.0);
        for s in &self.summands {
            let left = v.inner(&s.ket)?;
            let right = match &s.bra {
                Some(b) => b.inner(v)?,
                None => left.conj(),
            };
            acc += s.weight * left * right;
        }
        Ok(acc)
    }

    pub fn scale(&self, c: C64) -> Self {
        let summands =
            self.summands.iter().map(|s| Summand { weight: s.weight * c, ..s.clone() }).collect();
        DensityOperator { summands, ..self.clone() }
    }

    pub fn add(&self, other: &DensityOperator) -> Result<Self> {
        let summands = self.summands.iter().chain(&other.summands).cloned().collect();
        Self::from_summands(self.modes, self.dim, summands)
    }

    /// `A op A*` for a linear map `A` given by its action on vectors.
    pub fn conjugate_by<F>(&self, mut a: F) -> Result<Self>
    where
        F: FnMut(&FockVector) -> Result<FockVector>,
    {
        let mut summands = Vec::with_capacity(self.summands.len());
        let mut shape = None;
        for s in &self.summands {
            let ket = a(&s.ket)?;
            let bra = s.bra.as_ref().map(&mut a).transpose()?;
            shape.get_or_insert((ket.modes(), ket.dim()));
            summands.push(Summand { weight: s.weight, ket, bra });
        }
        let (modes, dim) = shape.unwrap_or((self.modes, self.dim));
        Self::from_summands(modes, dim, summands)
    }

    /// Every ket and bra; their span supports the operator.
    pub fn generators(&self) -> Vec<FockVector> {
        self.summands
            .iter()
            .flat_map(|s| std::iter::once(s.ket.clone()).chain(s.bra.clone()))
            .collect()
    }

    /// Checks the state conditions: Hermitian summands with real weights
    /// `>= -1e-12` and unit trace within `1e-10`.
    pub fn validate_state(&self) -> Result<()> {
        for s in &self.summands {
            if s.bra.is_some() || s.weight.im != 0.0 || s.weight.re < -1e-12 {
                return Err(Error::InvalidState("summands must be |v><v| with nonnegative weights".into()));
            }
        }
        let t = self.trace();
        if (t - C64::from(1.0)).norm() > 1e-10 {
            return Err(Error::InvalidState(format!("trace {t} differs from one")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::ModeVector;

    fn v(re: &[f64]) -> ModeVector {
        ModeVector::from_real(re).unwrap()
    }

    #[test]
    fn traces_of_pure_and_dyadic_operators() {
        let a = FockVector::coherent(&v(&[0.3, 0.2]));
        assert!((DensityOperator::pure(&a).trace() - C64::from(1.0)).norm() < 1e-15);
        DensityOperator::pure(&a).validate_state().unwrap();

        let x = FockVector::filtered_coherent(&v(&[1.0, 0.0]), None);
        let y = FockVector::filtered_coherent(&v(&[0.0, 1.0]), None);
        let dyad = DensityOperator::dyad(C64::from(1.0), &x, &y).unwrap();
        assert!(dyad.trace().norm() < 1e-15);
        assert!(dyad.validate_state().is_err());
    }

    #[test]
    fn expectation_matches_overlap() {
        let a = FockVector::coherent(&v(&[0.3, 0.2]));
        let b = FockVector::coherent(&v(&[-0.1, 0.7]));
        let rho = DensityOperator::mixture(&[(0.25, a.clone()), (0.75, b.clone())]).unwrap();
        let got = rho.expectation(&a).unwrap();
        let expected = 0.25 + 0.75 * b.inner(&a).unwrap().norm_sqr();
        assert!((got.re - expected).abs() < 1e-15 && got.im.abs() < 1e-15);
    }

    #[test]
    fn mixture_rejects_shape_mismatch() {
        let a = FockVector::coherent(&v(&[0.3, 0.2]));
        let b = FockVector::vacuum(2, 2);
        assert!(DensityOperator::mixture(&[(0.5, a), (0.5, b)]).is_err());
    }
}
