//! Operators on coherent spans, all defined through their action on
//! exponential vectors.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{ModeVector, Region, Splitting};
use crate::linalg::{self, CMatrix, ZERO};

use super::{expand_factor, kernel, map_factors, CoherentTerm, Factor, FockVector};

/// Which tensor factors an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorSelection {
    All,
    Index(usize),
}

impl FactorSelection {
    fn contains(self, q: usize) -> bool {
        match self {
            FactorSelection::All => true,
            FactorSelection::Index(i) => i == q,
        }
    }
}

fn require_modes(v: &FockVector, modes: usize) -> Result<()> {
    if v.modes() != modes {
        return Err(Error::ModeMismatch { expected: modes, found: v.modes() });
    }
    Ok(())
}

fn require_dim(v: &FockVector, dim: usize) -> Result<()> {
    if v.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: v.dim() });
    }
    Ok(())
}

/// Map every (filter-expanded) term `prod |exp h_q>` through a raw map
/// `prod exp h_q -> prod exp h'_r`, tracking the change of normalization.
fn map_plain_terms<F>(v: &FockVector, out_modes: usize, mut f: F) -> FockVector
where
    F: FnMut(&[&ModeVector]) -> Vec<ModeVector>,
{
    let expanded = v.expand_filters();
    let terms = expanded
        .terms()
        .iter()
        .map(|t| {
            let inputs: Vec<&ModeVector> = t.factors.iter().map(|f| f.vector()).collect();
            let before: f64 = inputs.iter().map(|h| h.norm_sqr()).sum();
            let outputs = f(&inputs);
            let after: f64 = outputs.iter().map(|h| h.norm_sqr()).sum();
            let amplitude = t.amplitude * (0.5 * (after - before)).exp();
            CoherentTerm::new(amplitude, outputs.into_iter().map(Factor::coherent).collect())
        })
        .collect();
    FockVector::canonical(out_modes, v.dim(), terms)
}

fn map_factors_each<F>(v: &FockVector, sel: FactorSelection, f: F) -> FockVector
where
    F: FnMut(&Factor) -> Vec<(C64, Factor)>,
{
    map_factors(v, |q| sel.contains(q), f)
}

/// Compound Malliavin derivative: `D exp(g) = exp(g) (x) exp(g)`.
pub fn malliavin_d(v: &FockVector) -> Result<FockVector> {
    require_modes(v, 1)?;
    Ok(map_plain_terms(v, 2, |h| vec![h[0].clone(), h[0].clone()]))
}

/// Compound Skorohod integral: `S(exp(g) (x) exp(h)) = exp(g + h)`.
pub fn skorohod_s(v: &FockVector) -> Result<FockVector> {
    require_modes(v, 2)?;
    Ok(map_plain_terms(v, 1, |h| vec![h[0].add(h[1]).expect("common dimension")]))
}

/// Columns in `region` and in its complement must hit disjoint rows for
/// `Gamma(T)` to carry `F_X` to a single filter `F_{X'}`. Returns `X'`.
fn transported_region(t: &CMatrix, region: &Region) -> Option<Region> {
    let n = t.nrows();
    let mut image = vec![false; n];
    let mut rest = vec![false; n];
    for j in 0..t.ncols() {
        for i in 0..n {
            if t[(i, j)] != ZERO {
                if region.contains(j) {
                    image[i] = true;
                } else {
                    rest[i] = true;
                }
            }
        }
    }
    if image.iter().zip(&rest).any(|(&a, &b)| a && b) {
        return None;
    }
    let indices: Vec<usize> = (0..n).filter(|&i| image[i]).collect();
    Region::from_indices(n, &indices).ok()
}

/// Second quantization `Gamma(T) exp(g) = exp(T g)` on the selected factors.
pub fn second_quantize(t: &CMatrix, v: &FockVector, sel: FactorSelection) -> Result<FockVector> {
    if t.nrows() != v.dim() || t.ncols() != v.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), found: t.ncols() });
    }
    if let FactorSelection::Index(q) = sel {
        if q >= v.modes() {
            return Err(Error::ModeMismatch { expected: v.modes(), found: q + 1 });
        }
    }
    let norm = linalg::operator_norm(t);
    if norm > 1.0 + 1e-12 {
        return Err(Error::NormBound { norm });
    }
    let apply = |h: &ModeVector| ModeVector::from_vector(t * h.coeffs());
    Ok(map_factors_each(v, sel, |f| {
        let filtered_image = |region: Region| -> Vec<(C64, Factor)> {
            match Factor::filtered(apply(f.vector()), region) {
                Some(g) => {
                    let c = (0.5 * (g.log_norm_sqr() - f.log_norm_sqr())).exp();
                    vec![(C64::from(c), g)]
                }
                None => Vec::new(),
            }
        };
        match f.filter() {
            None => {
                let g = Factor::coherent(apply(f.vector()));
                let c = (0.5 * (g.log_norm_sqr() - f.log_norm_sqr())).exp();
                vec![(C64::from(c), g)]
            }
            // Gamma(T) fixes the vacuum, so it commutes with F_+.
            Some(x) if x.is_full() => filtered_image(Region::full(v.dim())),
            Some(x) => match transported_region(t, x) {
                Some(image) => filtered_image(image),
                None => expand_factor(f)
                    .into_iter()
                    .map(|(c, piece)| {
                        let g = Factor::coherent(apply(piece.vector()));
                        let scale = (0.5 * (g.log_norm_sqr() - piece.log_norm_sqr())).exp();
                        (c * scale, g)
                    })
                    .collect(),
            },
        }
    }))
}

/// The splitting isometry `nu exp(g) = exp(K1 g) (x) exp(K2 g)`.
pub fn split_iso(s: &Splitting, v: &FockVector) -> Result<FockVector> {
    s.require_checked()?;
    require_modes(v, 1)?;
    require_dim(v, s.dim())?;
    Ok(map_plain_terms(v, 2, |h| {
        vec![ModeVector::from_vector(s.k1() * h[0].coeffs()), ModeVector::from_vector(s.k2() * h[0].coeffs())]
    }))
}

/// The adjoint `nu* (exp(h) (x) exp(g)) = exp(K1* h + K2* g)`.
pub fn split_iso_adjoint(s: &Splitting, v: &FockVector) -> Result<FockVector> {
    s.require_checked()?;
    require_modes(v, 2)?;
    require_dim(v, s.dim())?;
    let (k1a, k2a) = (s.k1().adjoint(), s.k2().adjoint());
    Ok(map_plain_terms(v, 1, |h| vec![ModeVector::from_vector(&k1a * h[0].coeffs() + &k2a * h[1].coeffs())]))
}

/// Bob's vacuum filter on one factor: `F_+ = 1 - |exp 0><exp 0|` when
/// `region` is `None`, otherwise `F_{+,X}`, the projection onto
/// configurations with at least one particle in `X`.
pub fn vacuum_filter(v: &FockVector, factor: usize, region: Option<&Region>) -> Result<FockVector> {
    if factor >= v.modes() {
        return Err(Error::ModeMismatch { expected: v.modes(), found: factor + 1 });
    }
    let x = match region {
        Some(r) if r.dim() != v.dim() => return Err(Error::DimensionMismatch { expected: v.dim(), found: r.dim() }),
        Some(r) => r.clone(),
        None => Region::full(v.dim()),
    };
    let filter_plain = |f: &Factor| -> Vec<(C64, Factor)> {
        match Factor::filtered(f.vector().clone(), x.clone()) {
            Some(g) => vec![(C64::from((0.5 * (g.log_norm_sqr() - f.log_norm_sqr())).exp()), g)],
            None => Vec::new(),
        }
    };
    Ok(map_factors_each(v, FactorSelection::Index(factor), |f| match f.filter() {
        None => filter_plain(f),
        Some(y) if y.is_subset(&x) => vec![(C64::from(1.0), f.clone())],
        // F_X F_Y = F_X for X inside Y
        Some(y) if x.is_subset(y) => filter_plain(f),
        Some(_) => expand_factor(f)
            .into_iter()
            .flat_map(|(c, piece)| filter_plain(&piece).into_iter().map(move |(k, g)| (c * k, g)))
            .collect(),
    }))
}

/// Contract the leading `bra.modes()` factors of `v` against `bra`
/// (antilinearly), leaving a vector on the remaining factors. For a unit
/// vector `xi`, `(|xi><xi| (x) 1) v = xi (x) pair_first(xi, v)`.
pub fn pair_first(bra: &FockVector, v: &FockVector) -> Result<FockVector> {
    if v.modes() <= bra.modes() {
        return Err(Error::ModeMismatch { expected: bra.modes() + 1, found: v.modes() });
    }
    require_dim(v, bra.dim())?;
    let q = bra.modes();
    let mut terms = Vec::with_capacity(bra.terms().len() * v.terms().len());
    for b in bra.terms() {
        for t in v.terms() {
            let mut c = b.amplitude.conj() * t.amplitude;
            for (x, y) in b.factors.iter().zip(&t.factors[..q]) {
                if c == ZERO {
                    break;
                }
                c *= kernel::factor_overlap(x, y);
            }
            if c != ZERO {
                terms.push(CoherentTerm::new(c, t.factors[q..].to_vec()));
            }
        }
    }
    Ok(FockVector::canonical(v.modes() - q, v.dim(), terms))
}
