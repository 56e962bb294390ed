use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{second_quantize, split_iso, DensityOperator, FactorSelection, FockVector};
use crate::hilbert::{validate_splitting, IdentityCheck, ModeVector, Splitting, OPERATOR_TOL};
use crate::linalg::{self, CMatrix, CVector, ZERO};

use super::BMatrix;

/// Tolerance for the protocol-level identities checked when a model is built.
pub const MODEL_TOL: f64 = 1e-10;

/// Everything Alice and Bob share: the encoding family, the entangled
/// resources, the measurement vectors and Bob's keys.
///
/// Outcome indices are 0-based: `n` selects the row `b_n`, `m` the cyclic
/// shift `j -> (j + m) mod N`.
#[derive(Clone, Debug)]
pub struct TeleportModel {
    n: usize,
    d: f64,
    splitting: Splitting,
    b: BMatrix,
    alice: Vec<FockVector>,
    bob: Vec<FockVector>,
    measurement: Vec<FockVector>,
    perfect: FockVector,
    beam: FockVector,
    coherent: FockVector,
    gamma: f64,
    keys: Vec<CMatrix>,
    invariants: Vec<IdentityCheck>,
}

fn gram_residual(vs: &[FockVector]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for (i, u) in vs.iter().enumerate() {
        for (j, v) in vs.iter().enumerate().skip(i) {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((u.inner(v)? - C64::from(expected)).norm());
        }
    }
    Ok(worst)
}

impl TeleportModel {
    /// Builds all derived vectors for `N` levels at mean particle number
    /// `d`, and checks the model invariants at [`MODEL_TOL`].
    pub fn build(n: usize, d: f64, splitting: Splitting, b: BMatrix) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidParameter(format!("density d must be positive and finite, got {d}")));
        }
        if b.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: b.dim() });
        }
        if splitting.basis().len() != n {
            return Err(Error::InvalidSplitting(format!(
                "splitting designates {} basis vectors, expected {n}",
                splitting.basis().len()
            )));
        }
        if !splitting.is_checked() {
            return Err(Error::InvalidSplitting("splitting was constructed without validation".into()));
        }
        let report = validate_splitting(&splitting, splitting.basis())?;
        if let Some(c) = report.first_failure() {
            return Err(Error::InvalidSplitting(format!("check `{}` failed with residual {:e}", c.name, c.residual)));
        }
        for c in b.checks(OPERATOR_TOL) {
            if !c.pass {
                return Err(Error::InvalidBMatrix { check: c.name, residual: c.residual });
            }
        }

        let a = C64::from(d.sqrt());
        let arm = |k: &CMatrix| -> Vec<FockVector> {
            splitting
                .basis()
                .iter()
                .map(|g| FockVector::filtered_coherent(&ModeVector::from_vector(k * g.coeffs() * a), None))
                .collect()
        };
        let alice = arm(splitting.k1());
        let bob = arm(splitting.k2());
        let root = C64::from(1.0 / (n as f64).sqrt());
        let dim = splitting.dim();

        let mut measurement = Vec::with_capacity(n * n);
        for r in 0..n {
            for m in 0..n {
                let pairs: Vec<FockVector> =
                    (0..n).map(|j| alice[j].tensor(&alice[(j + m) % n])).collect::<Result<_>>()?;
                let v = FockVector::linear_combination(2, dim, (0..n).map(|j| (b.entry(r, j) * root, &pairs[j])))?;
                measurement.push(v);
            }
        }
        let pairs: Vec<FockVector> = (0..n).map(|k| alice[k].tensor(&bob[k])).collect::<Result<_>>()?;
        let perfect = FockVector::linear_combination(2, dim, pairs.iter().map(|p| (root, p)))?;

        let gamma = 1.0 / ((n - 1) as f64).mul_add((-d).exp(), 1.0).sqrt();
        let beams: Vec<FockVector> = splitting
            .basis()
            .iter()
            .map(|g| FockVector::coherent(&g.scale(a)))
            .collect();
        let beam = FockVector::linear_combination(1, dim, beams.iter().map(|v| (root * gamma, v)))?;
        let coherent = split_iso(&splitting, &beam)?;

        let mut model = TeleportModel {
            n,
            d,
            splitting,
            b,
            alice,
            bob,
            measurement,
            perfect,
            beam,
            coherent,
            gamma,
            keys: Vec::new(),
            invariants: Vec::new(),
        };
        model.keys = (0..n * n).map(|i| model.compute_key(i / n, i % n)).collect::<Result<_>>()?;
        model.invariants = model.compute_invariants()?;
        if let Some(c) = model.invariants.iter().find(|c| !c.pass) {
            return Err(Error::ModelInvariant { check: c.name, residual: c.residual });
        }
        Ok(model)
    }

    fn compute_invariants(&self) -> Result<Vec<IdentityCheck>> {
        let n = self.n;
        let explicit: Vec<FockVector> = self
            .splitting
            .basis()
            .iter()
            .map(|g| {
                let a = C64::from(self.d.sqrt());
                let h1 = ModeVector::from_vector(self.splitting.k1() * g.coeffs() * a);
                let h2 = ModeVector::from_vector(self.splitting.k2() * g.coeffs() * a);
                FockVector::coherent(&h1).tensor(&FockVector::coherent(&h2))
            })
            .collect::<Result<_>>()?;
        let weight = C64::from(self.gamma / (n as f64).sqrt());
        let explicit = FockVector::linear_combination(2, self.dim(), explicit.iter().map(|v| (weight, v)))?;

        let mut key_unitary = 0.0_f64;
        let mut key_rule = 0.0_f64;
        for r in 0..n {
            for m in 0..n {
                let v = self.key_unitary(r, m);
                key_unitary = key_unitary.max(linalg::unitarity_residual(v));
                for j in 0..n {
                    for i in 0..n {
                        let expected = if i == (j + m) % n { self.b.entry(r, j).conj() } else { ZERO };
                        key_rule = key_rule.max((v[(i, j)] - expected).norm());
                    }
                }
            }
        }
        Ok(vec![
            IdentityCheck::new("alice_orthonormal", gram_residual(&self.alice)?, MODEL_TOL),
            IdentityCheck::new("bob_orthonormal", gram_residual(&self.bob)?, MODEL_TOL),
            IdentityCheck::new("measurement_orthonormal", gram_residual(&self.measurement)?, MODEL_TOL),
            IdentityCheck::new("perfect_entangled_norm", (self.perfect.norm() - 1.0).abs(), MODEL_TOL),
            IdentityCheck::new("beam_norm", (self.beam.norm() - 1.0).abs(), MODEL_TOL),
            IdentityCheck::new("coherent_entangled_norm", (self.coherent.norm() - 1.0).abs(), MODEL_TOL),
            IdentityCheck::new("coherent_entangled_explicit", self.coherent.distance(&explicit)?, MODEL_TOL),
            IdentityCheck::new("key_unitary", key_unitary, MODEL_TOL),
            IdentityCheck::new("key_rule", key_rule, MODEL_TOL),
        ])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// Coherent amplitude scale `a = sqrt(d)`.
    pub fn amplitude(&self) -> f64 {
        self.d.sqrt()
    }

    /// Ambient one-particle dimension.
    pub fn dim(&self) -> usize {
        self.splitting.dim()
    }

    pub fn splitting(&self) -> &Splitting {
        &self.splitting
    }

    pub fn b(&self) -> &BMatrix {
        &self.b
    }

    /// `gamma = (1 + (N - 1) e^{-d})^{-1/2}`, the normalizer of the beam.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Alice's encoding vectors `|F_+ exp(a K1 g_j)>`.
    pub fn alice_basis(&self) -> &[FockVector] {
        &self.alice
    }

    /// Bob's vectors `|F_+ exp(a K2 g_j)>`.
    pub fn bob_basis(&self) -> &[FockVector] {
        &self.bob
    }

    /// `xi_nm = N^{-1/2} sum_j b_nj gamma_j (x) gamma_{j+m}`.
    pub fn measurement_vector(&self, n: usize, m: usize) -> &FockVector {
        &self.measurement[n * self.n + m]
    }

    /// `xi = N^{-1/2} sum_k gamma_k (x) gamma'_k`.
    pub fn entangled_perfect(&self) -> &FockVector {
        &self.perfect
    }

    /// `eta = gamma N^{-1/2} sum_k |exp(a g_k)>`, a superposition of
    /// coherent beams.
    pub fn beam(&self) -> &FockVector {
        &self.beam
    }

    /// `nu(eta)`, the beam split into Alice's and Bob's arms.
    pub fn entangled_coherent(&self) -> &FockVector {
        &self.coherent
    }

    /// Checks evaluated at build time, all within [`MODEL_TOL`].
    pub fn invariants(&self) -> &[IdentityCheck] {
        &self.invariants
    }

    /// `sum_j c_j gamma_j`.
    pub fn lift_vector(&self, c: &CVector) -> Result<FockVector> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: c.len() });
        }
        FockVector::linear_combination(1, self.dim(), c.iter().zip(&self.alice).map(|(&cj, g)| (cj, g)))
    }

    /// `<gamma_j, v>` for every `j`.
    pub fn alice_coordinates(&self, v: &FockVector) -> Result<CVector> {
        let xs = self.alice.iter().map(|g| g.inner(v)).collect::<Result<Vec<_>>>()?;
        Ok(CVector::from_vec(xs))
    }

    /// `<gamma'_j, v>` for every `j`.
    pub fn bob_coordinates(&self, v: &FockVector) -> Result<CVector> {
        let xs = self.bob.iter().map(|g| g.inner(v)).collect::<Result<Vec<_>>>()?;
        Ok(CVector::from_vec(xs))
    }

    /// Apply the operator with matrix `block` in the basis `gamma_j` on
    /// their span and the identity on its orthogonal complement.
    pub fn act_on_alice_span(&self, block: &CMatrix, v: &FockVector) -> Result<FockVector> {
        if block.nrows() != self.n || block.ncols() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: block.ncols() });
        }
        let x = self.alice_coordinates(v)?;
        let delta = block * &x - &x;
        let mut out = v.clone();
        for (j, g) in self.alice.iter().enumerate() {
            if delta[j] != ZERO {
                out = out.add(&g.scale(delta[j]))?;
            }
        }
        Ok(out)
    }

    /// Matrix of `B_n`: `gamma_j -> b_nj gamma_j`.
    pub fn phase_block(&self, n: usize) -> CMatrix {
        CMatrix::from_diagonal(&self.b.row(n))
    }

    /// Matrix of `U_m`: `gamma_j -> gamma_{(j + m) mod N}`.
    pub fn shift_block(&self, m: usize) -> CMatrix {
        let mut u = CMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            u[((j + m) % self.n, j)] = C64::from(1.0);
        }
        u
    }

    /// `Gamma(T) U_m B_n*` applied to a one-mode vector: the map Bob's
    /// post-measurement state is related to Alice's input by.
    pub fn key_operator(&self, n: usize, m: usize, v: &FockVector) -> Result<FockVector> {
        let block = self.shift_block(m) * self.phase_block(n).adjoint();
        let moved = self.act_on_alice_span(&block, v)?;
        second_quantize(self.splitting.t(), &moved, FactorSelection::All)
    }

    fn compute_key(&self, n: usize, m: usize) -> Result<CMatrix> {
        let mut v = CMatrix::zeros(self.n, self.n);
        for (j, g) in self.alice.iter().enumerate() {
            let image = self.key_operator(n, m, g)?;
            v.set_column(j, &self.bob_coordinates(&image)?);
        }
        Ok(v)
    }

    /// Bob's key `V_nm`, the matrix of `Gamma(T) U_m B_n*` from the
    /// `gamma_j` to the `gamma'_i`.
    pub fn key_unitary(&self, n: usize, m: usize) -> &CMatrix {
        &self.keys[n * self.n + m]
    }

    /// `A rho A*` with `A = Gamma(T) U_m B_n*`.
    pub fn conjugate_by_key(&self, n: usize, m: usize, rho: &DensityOperator) -> Result<DensityOperator> {
        rho.conjugate_by(|v| self.key_operator(n, m, v))
    }

    /// `|| xi_nm - (B_n (x) U_m Gamma(T*)) xi ||`.
    pub fn entangled_transform_residual(&self, n: usize, m: usize) -> Result<f64> {
        let phase = self.phase_block(n);
        let shift = self.shift_block(m);
        let t_adj = self.splitting.t().adjoint();
        let moved = self
            .perfect
            .map_factor(0, |v| self.act_on_alice_span(&phase, v))?
            .map_factor(1, |v| {
                let back = second_quantize(&t_adj, v, FactorSelection::All)?;
                self.act_on_alice_span(&shift, &back)
            })?;
        moved.distance(self.measurement_vector(n, m))
    }
}
