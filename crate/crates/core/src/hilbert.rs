//! The one-particle space as a finite-dimensional complex inner-product space,
//! and the splitting data `(K1, K2, T)` that define a beam splitter together
//! with Bob's transfer unitary.
//!
//! Only finitely many inner products between one-particle vectors ever enter
//! the protocol, so the continuum is replaced by an abstract orthonormal
//! ambient basis of dimension `M`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ONE, ZERO};

/// Tolerance for operator identities on the one-particle space.
pub const OPERATOR_TOL: f64 = 1e-12;

/// An element of the one-particle space, given by its coefficients in the
/// ambient orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeVector {
    coeffs: CVector,
}

impl ModeVector {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParameter("mode vector must have dimension >= 1".into()));
        }
        if coeffs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("mode vector"));
        }
        Ok(ModeVector { coeffs: CVector::from_vec(coeffs) })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| C64::from(x)).collect())
    }

    pub(crate) fn from_vector(coeffs: CVector) -> Self {
        ModeVector { coeffs }
    }

    pub fn zeros(dim: usize) -> Self {
        ModeVector { coeffs: CVector::zeros(dim) }
    }

    /// The `i`-th ambient basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.coeffs[i] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &CVector {
        &self.coeffs
    }

    pub fn check_dim(&self, other: &ModeVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &ModeVector) -> Result<C64> {
        self.check_dim(other)?;
        Ok(self.coeffs.dotc(&other.coeffs))
    }

    /// Inner product restricted to the components in `region`.
    pub(crate) fn inner_on(&self, other: &ModeVector, region: &Region) -> C64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .zip(region.mask.iter())
            .filter(|(_, &inside)| inside)
            .map(|((a, b), _)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.norm_squared()
    }

    pub(crate) fn norm_sqr_on(&self, region: &Region) -> f64 {
        self.coeffs
            .iter()
            .zip(region.mask.iter())
            .filter(|(_, &inside)| inside)
            .map(|(z, _)| z.norm_sqr())
            .sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        ModeVector { coeffs: self.coeffs.map(|z| z * s) }
    }

    pub fn add(&self, other: &ModeVector) -> Result<Self> {
        self.check_dim(other)?;
        Ok(ModeVector { coeffs: &self.coeffs + &other.coeffs })
    }

    pub fn sub(&self, other: &ModeVector) -> Result<Self> {
        self.check_dim(other)?;
        Ok(ModeVector { coeffs: &self.coeffs - &other.coeffs })
    }

    /// Apply a matrix acting on the ambient space.
    pub fn apply(&self, op: &CMatrix) -> Result<Self> {
        if op.ncols() != self.dim() || op.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.ncols() });
        }
        Ok(ModeVector { coeffs: op * &self.coeffs })
    }

    /// The restriction `h * chi_region`.
    pub fn restrict(&self, region: &Region) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (z, &inside) in coeffs.iter_mut().zip(region.mask.iter()) {
            if !inside {
                *z = ZERO;
            }
        }
        ModeVector { coeffs }
    }

    pub(crate) fn approx_eq(&self, other: &ModeVector, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.coeffs.iter().zip(other.coeffs.iter()).all(|(a, b)| (a - b).norm() <= tol)
    }
}

/// A set of ambient components, standing in for a measurable region of the
/// configuration space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Region {
    mask: Vec<bool>,
}

impl Region {
    pub fn full(dim: usize) -> Self {
        Region { mask: vec![true; dim] }
    }

    pub fn from_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut mask = vec![false; dim];
        for &i in indices {
            if i >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: i + 1 });
            }
            mask[i] = true;
        }
        Ok(Region { mask })
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.mask[i]).collect()
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Region { mask: self.mask.iter().map(|&b| !b).collect() }
    }

    pub fn intersect(&self, other: &Region) -> Self {
        Region { mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| a && b).collect() }
    }

    pub fn minus(&self, other: &Region) -> Self {
        Region { mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| a && !b).collect() }
    }

    pub fn union(&self, other: &Region) -> Self {
        Region { mask: self.mask.iter().zip(&other.mask).map(|(&a, &b)| a || b).collect() }
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    /// Diagonal projection onto the region's components.
    pub fn projector(&self) -> CMatrix {
        CMatrix::from_fn(self.dim(), self.dim(), |i, j| if i == j && self.mask[i] { ONE } else { ZERO })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingKind {
    HalfHalf,
    ProjectionPair,
    Custom,
}

/// Beam-splitter data `(K1, K2, T)` together with the designated orthonormal
/// family `g_j` the protocol encodes into.
#[derive(Clone, Debug)]
pub struct Splitting {
    k1: CMatrix,
    k2: CMatrix,
    t: CMatrix,
    kind: SplittingKind,
    basis: Vec<ModeVector>,
    regions: Option<(Region, Region)>,
    checked: bool,
}

impl Splitting {
    /// `K1 = K2 = I/sqrt(2)`, `T = I`, with the standard basis as `g_j`.
    pub fn half_half(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let k = CMatrix::identity(n, n).scale(FRAC_1_SQRT_2);
        Ok(Splitting {
            k1: k.clone(),
            k2: k,
            t: CMatrix::identity(n, n),
            kind: SplittingKind::HalfHalf,
            basis: (0..n).map(|j| ModeVector::basis(n, j)).collect(),
            regions: None,
            checked: true,
        })
    }

    /// Two disjoint regions: ambient dimension `2n`, component `2j` is the
    /// part of `g_j` in Alice's region and `2j + 1` its translate in Bob's.
    /// `K1`, `K2` project onto the regions and `T` swaps them.
    pub fn projection_pair(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        let dim = 2 * n;
        let alice = Region::from_indices(dim, &(0..n).map(|j| 2 * j).collect::<Vec<_>>())?;
        let bob = alice.complement();
        let mut t = CMatrix::zeros(dim, dim);
        for j in 0..n {
            t[(2 * j + 1, 2 * j)] = ONE;
            t[(2 * j, 2 * j + 1)] = ONE;
        }
        let basis = (0..n)
            .map(|j| {
                let mut v = ModeVector::zeros(dim);
                v.coeffs[2 * j] = C64::from(FRAC_1_SQRT_2);
                v.coeffs[2 * j + 1] = C64::from(FRAC_1_SQRT_2);
                v
            })
            .collect();
        Ok(Splitting {
            k1: alice.projector(),
            k2: bob.projector(),
            t,
            kind: SplittingKind::ProjectionPair,
            basis,
            regions: Some((alice, bob)),
            checked: true,
        })
    }

    /// User-supplied splitting. `K1* K1 + K2* K2 = 1` and unitarity of `T`
    /// are enforced; the basis-dependent conditions are left to
    /// [`validate_splitting`].
    pub fn custom(k1: CMatrix, k2: CMatrix, t: CMatrix, basis: Vec<ModeVector>) -> Result<Self> {
        let s = Self::unchecked(k1, k2, t, basis)?;
        let completeness = s.completeness_residual();
        if completeness > OPERATOR_TOL {
            return Err(Error::InvalidSplitting(format!(
                "K1*K1 + K2*K2 deviates from identity by {completeness:e}"
            )));
        }
        let unitarity = linalg::unitarity_residual(&s.t);
        if unitarity > OPERATOR_TOL {
            return Err(Error::InvalidSplitting(format!("T is not unitary (residual {unitarity:e})")));
        }
        Ok(Splitting { checked: true, ..s })
    }

    /// Splitting data without any algebraic checks, for diagnostics. Fock
    /// operations that require a valid splitting reject it.
    pub fn unchecked(k1: CMatrix, k2: CMatrix, t: CMatrix, basis: Vec<ModeVector>) -> Result<Self> {
        let dim = k1.nrows();
        for m in [&k1, &k2, &t] {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: m.ncols() });
            }
        }
        if let Some(g) = basis.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
        }
        Ok(Splitting { k1, k2, t, kind: SplittingKind::Custom, basis, regions: None, checked: false })
    }

    /// Replace `K1`, `K2`, `T` by `U K1`, `V K2`, `V T U*`.
    pub fn rotated(&self, u: &CMatrix, v: &CMatrix) -> Result<Self> {
        let t = v * &self.t * u.adjoint();
        let s = Self::unchecked(u * &self.k1, v * &self.k2, t, self.basis.clone())?;
        Self::custom(s.k1, s.k2, s.t, s.basis)
    }

    pub fn dim(&self) -> usize {
        self.k1.nrows()
    }

    pub fn k1(&self) -> &CMatrix {
        &self.k1
    }

    pub fn k2(&self) -> &CMatrix {
        &self.k2
    }

    pub fn t(&self) -> &CMatrix {
        &self.t
    }

    pub fn kind(&self) -> SplittingKind {
        self.kind
    }

    /// The designated family `g_1, ..., g_N`.
    pub fn basis(&self) -> &[ModeVector] {
        &self.basis
    }

    pub fn is_checked(&self) -> bool {
        self.checked
    }

    /// Alice's region (where `K1` projects), for projection-type splittings.
    pub fn alice_region(&self) -> Result<&Region> {
        self.regions
            .as_ref()
            .map(|(a, _)| a)
            .ok_or_else(|| Error::UnsupportedRegion(format!("{:?} splitting has no regions", self.kind)))
    }

    /// Bob's region (where `K2` projects), for projection-type splittings.
    pub fn bob_region(&self) -> Result<&Region> {
        self.regions
            .as_ref()
            .map(|(_, b)| b)
            .ok_or_else(|| Error::UnsupportedRegion(format!("{:?} splitting has no regions", self.kind)))
    }

    pub(crate) fn require_checked(&self) -> Result<()> {
        if self.checked {
            Ok(())
        } else {
            Err(Error::InvalidSplitting("splitting was constructed without validation".into()))
        }
    }

    /// Frobenius norm of `K1* K1 + K2* K2 - 1`.
    pub fn completeness_residual(&self) -> f64 {
        let n = self.dim();
        (self.k1.adjoint() * &self.k1 + self.k2.adjoint() * &self.k2 - CMatrix::identity(n, n)).norm()
    }
}

/// One checked identity in a [`ValidationReport`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl IdentityCheck {
    pub fn new(name: &'static str, residual: f64, tolerance: f64) -> Self {
        IdentityCheck { name, residual, tolerance, pass: residual.is_finite() && residual <= tolerance }
    }
}

/// Residuals of the splitting conditions on a basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `K1* K1 + K2* K2 = 1` on the full ambient space.
    pub completeness: IdentityCheck,
    /// `T K1 g_j = K2 g_j`.
    pub transfer: IdentityCheck,
    /// `<K1 g_k, K1 g_j> = 0` for `k != j`.
    pub alice_orthogonal: IdentityCheck,
    /// `||K1 g_j||^2 = ||K2 g_j||^2 = 1/2`.
    pub half_mass: IdentityCheck,
    /// `<K2 g_k, K2 g_j> = 0` for `k != j`.
    pub bob_orthogonal: IdentityCheck,
    /// `T* T = 1`.
    pub transfer_unitary: IdentityCheck,
}

impl ValidationReport {
    pub fn checks(&self) -> [&IdentityCheck; 6] {
        [
            &self.completeness,
            &self.transfer,
            &self.alice_orthogonal,
            &self.half_mass,
            &self.bob_orthogonal,
            &self.transfer_unitary,
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&IdentityCheck> {
        self.checks().into_iter().find(|c| !c.pass)
    }
}

/// Residuals of every splitting condition for the given basis, at tolerance
/// [`OPERATOR_TOL`].
pub fn validate_splitting(s: &Splitting, basis: &[ModeVector]) -> Result<ValidationReport> {
    if let Some(g) = basis.iter().find(|g| g.dim() != s.dim()) {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: g.dim() });
    }
    let k1g: Vec<ModeVector> = basis.iter().map(|g| g.apply(&s.k1)).collect::<Result<_>>()?;
    let k2g: Vec<ModeVector> = basis.iter().map(|g| g.apply(&s.k2)).collect::<Result<_>>()?;

    let mut transfer = 0.0_f64;
    let mut half_mass = 0.0_f64;
    for (a, b) in k1g.iter().zip(&k2g) {
        transfer = transfer.max(a.apply(&s.t)?.sub(b)?.norm_sqr().sqrt());
        half_mass = half_mass.max((a.norm_sqr() - 0.5).abs()).max((b.norm_sqr() - 0.5).abs());
    }
    let off_diagonal = |vs: &[ModeVector]| -> Result<f64> {
        let mut worst = 0.0_f64;
        for (k, u) in vs.iter().enumerate() {
            for (j, v) in vs.iter().enumerate() {
                if k != j {
                    worst = worst.max(u.inner(v)?.norm());
                }
            }
        }
        Ok(worst)
    };

    Ok(ValidationReport {
        completeness: IdentityCheck::new("completeness", s.completeness_residual(), OPERATOR_TOL),
        transfer: IdentityCheck::new("transfer", transfer, OPERATOR_TOL),
        alice_orthogonal: IdentityCheck::new("alice_orthogonal", off_diagonal(&k1g)?, OPERATOR_TOL),
        half_mass: IdentityCheck::new("half_mass", half_mass, OPERATOR_TOL),
        bob_orthogonal: IdentityCheck::new("bob_orthogonal", off_diagonal(&k2g)?, OPERATOR_TOL),
        transfer_unitary: IdentityCheck::new(
            "transfer_unitary",
            linalg::unitarity_residual(&s.t),
            OPERATOR_TOL,
        ),
    })
}
