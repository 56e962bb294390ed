//! JSON-shaped debug dumps of Fock vectors and operators.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{ModeVector, Region};

use super::{CoherentTerm, DensityOperator, Factor, FockVector, Summand};

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn complex(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorDump {
    pub coeffs: Vec<[f64; 2]>,
    /// Indices of the filter region, absent for a plain coherent factor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDump {
    /// Coefficient of the product of unit-normalized factors.
    pub amplitude: [f64; 2],
    pub factors: Vec<FactorDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockDump {
    pub modes: usize,
    pub dim: usize,
    pub terms: Vec<TermDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummandDump {
    pub weight: [f64; 2],
    pub ket: FockDump,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bra: Option<FockDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityDump {
    pub modes: usize,
    pub dim: usize,
    pub summands: Vec<SummandDump>,
}

impl FockVector {
    pub fn dump(&self) -> FockDump {
        FockDump {
            modes: self.modes,
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| TermDump {
                    amplitude: pair(t.amplitude),
                    factors: t
                        .factors
                        .iter()
                        .map(|f| FactorDump {
                            coeffs: f.vector.coeffs().iter().copied().map(pair).collect(),
                            filter: f.filter.as_ref().map(Region::indices),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn from_dump(dump: &FockDump) -> Result<Self> {
        let mut terms = Vec::with_capacity(dump.terms.len());
        for t in &dump.terms {
            let mut factors = Vec::with_capacity(t.factors.len());
            for f in &t.factors {
                let vector = ModeVector::new(f.coeffs.iter().copied().map(complex).collect())?;
                let factor = match &f.filter {
                    None => Factor::coherent(vector),
                    Some(indices) => {
                        let region = Region::from_indices(dump.dim, indices)?;
                        Factor::filtered(vector, region)
                            .ok_or_else(|| Error::InvalidParameter("filtered factor is zero".into()))?
                    }
                };
                factors.push(factor);
            }
            terms.push(CoherentTerm::new(complex(t.amplitude), factors));
        }
        FockVector::from_terms(dump.modes, dump.dim, terms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.dump()).expect("plain data serializes")
    }
}

impl DensityOperator {
    pub fn dump(&self) -> DensityDump {
        DensityDump {
            modes: self.modes(),
            dim: self.dim(),
            summands: self
                .summands()
                .iter()
                .map(|s| SummandDump { weight: pair(s.weight), ket: s.ket.dump(), bra: s.bra.as_ref().map(FockVector::dump) })
                .collect(),
        }
    }

    pub fn from_dump(dump: &DensityDump) -> Result<Self> {
        let summands = dump
            .summands
            .iter()
            .map(|s| {
                Ok(Summand {
                    weight: complex(s.weight),
                    ket: FockVector::from_dump(&s.ket)?,
                    bra: s.bra.as_ref().map(FockVector::from_dump).transpose()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DensityOperator::from_summands(dump.modes, dump.dim, summands)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.dump()).expect("plain data serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_vector() {
        let h = ModeVector::new(vec![C64::new(0.2, -0.1), C64::new(0.0, 0.4)]).unwrap();
        let x = Region::from_indices(2, &[1]).unwrap();
        let v = FockVector::filtered_coherent(&h, Some(&x))
            .add(&FockVector::coherent(&h).scale(C64::new(0.0, 0.5)))
            .unwrap();
        let back = FockVector::from_dump(&v.dump()).unwrap();
        assert_eq!(back.dump(), v.dump());
        let json = v.to_json();
        let parsed: FockDump = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, v.dump());
    }
}
