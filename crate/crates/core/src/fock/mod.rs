//! Exact linear algebra on finite coherent spans of the symmetric Fock space.
//!
//! A [`FockVector`] is a finite sum of amplitudes times tensor products of
//! exponential vectors. Every factor is kept unit-normalized and may carry a
//! vacuum filter `F_X = 1 - Gamma(P_{X^c})` (with `F_+` the filter on the full
//! ambient space), so the vacuum-removed vectors `exp(h) - exp(0)` are
//! represented exactly rather than as a cancelling difference. All inner
//! products come from the exponential kernel and are evaluated in log-scaled
//! form.

mod density;
mod dump;
mod frame;
pub mod kernel;
mod ops;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{ModeVector, Region};
use crate::linalg::ZERO;

pub use density::{DensityOperator, Summand};
pub use dump::{DensityDump, FactorDump, FockDump, SummandDump, TermDump};
pub use frame::{fidelity, operator_frame, span_basis, trace_distance, OrthonormalFrame, GRAM_CUTOFF, LEAKAGE_TOL};
pub use kernel::{kernel, normalized_kernel};
pub use ops::{
    malliavin_d, pair_first, second_quantize, skorohod_s, split_iso, split_iso_adjoint, vacuum_filter,
    FactorSelection,
};

/// Factor lists closer than this (entrywise) are merged into one term.
pub const MERGE_TOL: f64 = 1e-12;

/// Smallest norm [`FockVector::normalize`] accepts.
pub const MIN_NORM: f64 = 1e-150;

/// One unit-normalized tensor factor `|F_X exp(h)>` (or `|exp(h)>`).
#[derive(Clone, Debug)]
pub struct Factor {
    vector: ModeVector,
    filter: Option<Region>,
    log_norm_sqr: f64,
}

impl Factor {
    pub fn coherent(vector: ModeVector) -> Self {
        let log_norm_sqr = kernel::log_norm_sqr(&vector, None);
        Factor { vector, filter: None, log_norm_sqr }
    }

    /// `F_X exp(h)` normalized; `None` when the filtered vector is zero.
    /// When `h` vanishes off `X`, `F_X exp(h) = F_+ exp(h)` and the full
    /// filter is stored instead, so equal vectors compare equal.
    pub fn filtered(vector: ModeVector, region: Region) -> Option<Self> {
        let region = if !region.is_full() && vector.norm_sqr_on(&region.complement()) == 0.0 {
            Region::full(vector.dim())
        } else {
            region
        };
        let log_norm_sqr = kernel::log_norm_sqr(&vector, Some(&region));
        if log_norm_sqr == f64::NEG_INFINITY {
            return None;
        }
        Some(Factor { vector, filter: Some(region), log_norm_sqr })
    }

    pub fn vector(&self) -> &ModeVector {
        &self.vector
    }

    pub fn filter(&self) -> Option<&Region> {
        self.filter.as_ref()
    }

    /// `ln` of the squared norm of the unnormalized factor.
    pub fn log_norm_sqr(&self) -> f64 {
        self.log_norm_sqr
    }

    fn same_as(&self, other: &Factor) -> bool {
        self.filter == other.filter && self.vector.approx_eq(&other.vector, MERGE_TOL)
    }
}

/// `amplitude * |f_1> (x) ... (x) |f_p>` with unit-normalized factors.
#[derive(Clone, Debug)]
pub struct CoherentTerm {
    pub amplitude: C64,
    pub factors: Vec<Factor>,
}

impl CoherentTerm {
    pub fn new(amplitude: C64, factors: Vec<Factor>) -> Self {
        CoherentTerm { amplitude, factors }
    }

    /// `amplitude * exp(h_1) (x) ... (x) exp(h_p)` in terms of unnormalized
    /// exponential vectors.
    pub fn exponential(amplitude: C64, vectors: Vec<ModeVector>) -> Self {
        let scale: f64 = vectors.iter().map(|h| 0.5 * h.norm_sqr()).sum();
        CoherentTerm { amplitude: amplitude * scale.exp(), factors: vectors.into_iter().map(Factor::coherent).collect() }
    }

    /// The coefficient relative to the unnormalized factors
    /// (`exp(h)` or `F_X exp(h)`).
    pub fn raw_amplitude(&self) -> C64 {
        let scale: f64 = self.factors.iter().map(|f| 0.5 * f.log_norm_sqr).sum();
        self.amplitude * (-scale).exp()
    }

    fn overlap(&self, other: &CoherentTerm) -> C64 {
        let mut acc = self.amplitude.conj() * other.amplitude;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            if acc == ZERO {
                break;
            }
            acc *= kernel::factor_overlap(a, b);
        }
        acc
    }
}

/// A vector in the `p`-fold tensor power of the Fock space, supported on a
/// finite coherent span.
#[derive(Clone, Debug)]
pub struct FockVector {
    modes: usize,
    dim: usize,
    terms: Vec<CoherentTerm>,
}

impl FockVector {
    pub fn zero(modes: usize, dim: usize) -> Self {
        FockVector { modes, dim, terms: Vec::new() }
    }

    /// `exp(0) (x) ... (x) exp(0)`.
    pub fn vacuum(modes: usize, dim: usize) -> Self {
        let factors = (0..modes).map(|_| Factor::coherent(ModeVector::zeros(dim))).collect();
        FockVector { modes, dim, terms: vec![CoherentTerm::new(C64::from(1.0), factors)] }
    }

    /// The unnormalized exponential vector `exp(h)`.
    pub fn exponential(h: &ModeVector) -> Self {
        FockVector { modes: 1, dim: h.dim(), terms: vec![CoherentTerm::exponential(C64::from(1.0), vec![h.clone()])] }
    }

    /// The normalized coherent vector `|exp(h)>`.
    pub fn coherent(h: &ModeVector) -> Self {
        FockVector { modes: 1, dim: h.dim(), terms: vec![CoherentTerm::new(C64::from(1.0), vec![Factor::coherent(h.clone())])] }
    }

    /// The normalized vacuum-removed vector `|F_X exp(h)>` (`X` = everything
    /// when `region` is `None`); zero if `h` vanishes on `X`.
    pub fn filtered_coherent(h: &ModeVector, region: Option<&Region>) -> Self {
        let region = region.cloned().unwrap_or_else(|| Region::full(h.dim()));
        let terms = Factor::filtered(h.clone(), region)
            .map(|f| vec![CoherentTerm::new(C64::from(1.0), vec![f])])
            .unwrap_or_default();
        FockVector { modes: 1, dim: h.dim(), terms }
    }

    /// Build from terms, merging duplicates.
    pub fn from_terms(modes: usize, dim: usize, terms: Vec<CoherentTerm>) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidParameter("a Fock vector needs at least one mode".into()));
        }
        for t in &terms {
            if t.factors.len() != modes {
                return Err(Error::ModeMismatch { expected: modes, found: t.factors.len() });
            }
            if let Some(f) = t.factors.iter().find(|f| f.vector.dim() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, found: f.vector.dim() });
            }
            if !t.amplitude.re.is_finite() || !t.amplitude.im.is_finite() {
                return Err(Error::NonFinite("term amplitude"));
            }
        }
        Ok(Self::canonical(modes, dim, terms))
    }

    pub(crate) fn canonical(modes: usize, dim: usize, terms: Vec<CoherentTerm>) -> Self {
        let mut merged: Vec<CoherentTerm> = Vec::with_capacity(terms.len());
        for term in terms {
            if term.amplitude == ZERO {
                continue;
            }
            match merged
                .iter_mut()
                .find(|m| m.factors.iter().zip(&term.factors).all(|(a, b)| a.same_as(b)))
            {
                Some(m) => m.amplitude += term.amplitude,
                None => merged.push(term),
            }
        }
        merged.retain(|t| t.amplitude != ZERO);
        FockVector { modes, dim, terms: merged }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Ambient dimension of the one-particle space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[CoherentTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_compatible(&self, other: &FockVector) -> Result<()> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch { expected: self.modes, found: other.modes });
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &FockVector) -> Result<Self> {
        self.check_compatible(other)?;
        let terms = self.terms.iter().chain(&other.terms).cloned().collect();
        Ok(Self::canonical(self.modes, self.dim, terms))
    }

    pub fn sub(&self, other: &FockVector) -> Result<Self> {
        self.add(&other.scale(C64::from(-1.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == ZERO {
            return Self::zero(self.modes, self.dim);
        }
        let terms = self
            .terms
            .iter()
            .map(|t| CoherentTerm::new(t.amplitude * s, t.factors.clone()))
            .collect();
        FockVector { modes: self.modes, dim: self.dim, terms }
    }

    /// `sum_k c_k v_k` over vectors of common shape.
    pub fn linear_combination<'a, I>(modes: usize, dim: usize, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C64, &'a FockVector)>,
    {
        let mut terms = Vec::new();
        for (c, v) in items {
            if v.modes != modes {
                return Err(Error::ModeMismatch { expected: modes, found: v.modes });
            }
            if v.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: v.dim });
            }
            terms.extend(v.terms.iter().map(|t| CoherentTerm::new(c * t.amplitude, t.factors.clone())));
        }
        Ok(Self::canonical(modes, dim, terms))
    }

    /// `self (x) other`.
    pub fn tensor(&self, other: &FockVector) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut factors = a.factors.clone();
                factors.extend(b.factors.iter().cloned());
                terms.push(CoherentTerm::new(a.amplitude * b.amplitude, factors));
            }
        }
        Ok(Self::canonical(self.modes + other.modes, self.dim, terms))
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        self.check_compatible(other)?;
        Ok(self.terms.iter().flat_map(|a| other.terms.iter().map(move |b| a.overlap(b))).sum())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).map(|z| z.re.max(0.0)).unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > MIN_NORM) || !norm.is_finite() {
            return Err(Error::NullVector { norm });
        }
        Ok(self.scale(C64::from(1.0 / norm)))
    }

    /// `||self - other||`. Both sides are first brought to the
    /// [`split_vacuum`](Self::split_vacuum) normal form so that matching
    /// terms cancel in their amplitudes rather than in a difference of
    /// nearly equal inner products.
    pub fn distance(&self, other: &FockVector) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.split_vacuum().sub(&other.split_vacuum())?.norm())
    }

    /// Rewrite every filtered factor `|F_X exp h>` as the difference of two
    /// unfiltered coherent vectors.
    pub fn expand_filters(&self) -> Self {
        map_factors(self, |_| true, expand_factor)
    }

    /// Normal form in which every factor is either the vacuum or a
    /// vacuum-removed `|F_+ exp h>`, using
    /// `|exp h> = (1 - e^{-|h|^2})^{1/2} |F_+ exp h> + e^{-|h|^2/2} |exp 0>`.
    /// The two pieces are orthogonal, so no coefficient exceeds one in
    /// modulus; only region-restricted filters are expanded first.
    pub fn split_vacuum(&self) -> Self {
        map_factors(self, |_| true, split_factor)
    }

    /// Apply a one-mode map to tensor factor `q` of every term, extended
    /// linearly.
    pub fn map_factor<F>(&self, q: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&FockVector) -> Result<FockVector>,
    {
        if q >= self.modes {
            return Err(Error::ModeMismatch { expected: self.modes, found: q + 1 });
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            let single = FockVector {
                modes: 1,
                dim: self.dim,
                terms: vec![CoherentTerm::new(C64::from(1.0), vec![t.factors[q].clone()])],
            };
            let image = f(&single)?;
            if image.modes != 1 {
                return Err(Error::ModeMismatch { expected: 1, found: image.modes });
            }
            for it in image.terms {
                let mut factors = t.factors.clone();
                factors[q] = it.factors.into_iter().next().expect("one-mode term");
                terms.push(CoherentTerm::new(t.amplitude * it.amplitude, factors));
            }
        }
        Ok(Self::canonical(self.modes, self.dim, terms))
    }

    /// Every one-particle vector appearing in factor `q`.
    pub fn factor_vectors(&self, q: usize) -> impl Iterator<Item = &Factor> {
        self.terms.iter().map(move |t| &t.factors[q])
    }
}

/// Replace each factor accepted by `select` by a weighted sum of factors
/// and multiply out.
pub(crate) fn map_factors<S, F>(v: &FockVector, select: S, mut f: F) -> FockVector
where
    S: Fn(usize) -> bool,
    F: FnMut(&Factor) -> Vec<(C64, Factor)>,
{
    let mut terms = Vec::new();
    for t in &v.terms {
        let mut partial = vec![CoherentTerm::new(t.amplitude, Vec::with_capacity(v.modes))];
        for (q, factor) in t.factors.iter().enumerate() {
            let pieces = if select(q) { f(factor) } else { vec![(C64::from(1.0), factor.clone())] };
            let mut next = Vec::with_capacity(partial.len() * pieces.len());
            for p in &partial {
                for (c, g) in &pieces {
                    let mut factors = p.factors.clone();
                    factors.push(g.clone());
                    next.push(CoherentTerm::new(p.amplitude * c, factors));
                }
            }
            partial = next;
        }
        terms.extend(partial);
    }
    FockVector::canonical(v.modes, v.dim, terms)
}

fn split_factor(f: &Factor) -> Vec<(C64, Factor)> {
    match &f.filter {
        Some(x) if x.is_full() => vec![(C64::from(1.0), f.clone())],
        Some(_) => expand_factor(f)
            .into_iter()
            .flat_map(|(c, g)| split_factor(&g).into_iter().map(move |(k, piece)| (c * k, piece)))
            .collect(),
        None => {
            let x = f.vector.norm_sqr();
            if x == 0.0 {
                return vec![(C64::from(1.0), f.clone())];
            }
            let filtered = Factor::filtered(f.vector.clone(), Region::full(f.vector.dim()))
                .expect("nonzero vector survives the vacuum filter");
            vec![
                (C64::from((-(-x).exp_m1()).sqrt()), filtered),
                (C64::from((-0.5 * x).exp()), Factor::coherent(ModeVector::zeros(f.vector.dim()))),
            ]
        }
    }
}

/// `|F_X exp h> = c1 |exp h> - c2 |exp(h chi_{X^c})>`, with
/// `c1 = (1 - e^{-x})^{-1/2}`, `c2 = (e^x - 1)^{-1/2}`, `x = ||h chi_X||^2`.
fn expand_factor(f: &Factor) -> Vec<(C64, Factor)> {
    match &f.filter {
        None => vec![(C64::from(1.0), f.clone())],
        Some(x) => {
            let inside = f.vector.norm_sqr_on(x);
            let c1 = 1.0 / (-(-inside).exp_m1()).sqrt();
            let c2 = 1.0 / inside.exp_m1().sqrt();
            vec![
                (C64::from(c1), Factor::coherent(f.vector.clone())),
                (C64::from(-c2), Factor::coherent(f.vector.restrict(&x.complement()))),
            ]
        }
    }
}
