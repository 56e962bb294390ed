use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{trace_distance, FockVector};
use crate::hilbert::{ModeVector, Region, SplittingKind};
use crate::linalg::CVector;

use super::channel::{alice_measure, bob_post_select, lift_state, Variant};
use super::{QuditState, TeleportModel};

/// Success probabilities of the post-selected coherent protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosedForms {
    /// `gamma^2 = 1 / (1 + (N - 1) e^{-d})`.
    pub gamma_squared: f64,
    /// `(gamma^2 / N^2) (e^{d/2} - 1)^2 e^{-d}` for each outcome.
    pub per_outcome: f64,
    /// `(1 - e^{-d/2})^2 / (1 + (N - 1) e^{-d})`.
    pub total: f64,
}

/// Closed-form probabilities, written in terms of `e^{-d}` and `expm1` so
/// that nothing overflows for large `d` or cancels for small `d`.
pub fn closed_forms(n: usize, d: f64) -> Result<ClosedForms> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!("density d must be positive and finite, got {d}")));
    }
    let gamma_squared = 1.0 / ((n - 1) as f64).mul_add((-d).exp(), 1.0);
    let kept = -(-0.5 * d).exp_m1();
    let total = gamma_squared * kept * kept;
    Ok(ClosedForms { gamma_squared, per_outcome: total / (n * n) as f64, total })
}

/// Probability of outcome `(n, m)` without post-selection for the pure
/// input with amplitudes `c`:
/// `(gamma^2 / N^2) ((1 - e^{-d/2})^2 + (e^{d/2} - 1) e^{-d} |<b_n, c>|^2)`.
pub fn unfiltered_pure_probability(model: &TeleportModel, n: usize, c: &CVector) -> f64 {
    let d = model.d();
    let kept = -(-0.5 * d).exp_m1();
    let overlap = model.b().row(n).dotc(c).norm_sqr();
    let scale = model.gamma().powi(2) / (model.n() * model.n()) as f64;
    scale * (kept * kept + kept * (-0.5 * d).exp() * overlap)
}

/// Bob's unnormalized vector after outcome `(n, m)` on input
/// `Phi = sum_j c_j gamma_j` with the coherent resource, in closed form:
/// `(gamma/N)(1 - e^{-d/2}) Gamma(T) U_m B_n* Phi
///  + (gamma/N) ((e^{d/2} - 1) e^{-d})^{1/2} <b_n, c> |exp 0>`.
pub fn coherent_outcome_vector(model: &TeleportModel, n: usize, m: usize, c: &CVector) -> Result<FockVector> {
    let d = model.d();
    let scale = model.gamma() / model.n() as f64;
    let kept = -(-0.5 * d).exp_m1();
    let phi = model.lift_vector(c)?;
    let keyed = model.key_operator(n, m, &phi)?;
    let vacuum_weight = scale * (kept.sqrt() * (-0.25 * d).exp());
    let vacuum = FockVector::vacuum(1, model.dim());
    let overlap = model.b().row(n).dotc(c);
    keyed.scale(C64::from(scale * kept)).add(&vacuum.scale(overlap * vacuum_weight))
}

/// Perfectness figures for one input state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StateReport {
    /// Largest trace distance between Bob's conditional state and the
    /// key-conjugated input, over all outcomes.
    pub e1: f64,
    /// `|sum p_nm - 1|`.
    pub e2: f64,
    pub total_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfectnessReport {
    pub variant: Variant,
    pub states: Vec<StateReport>,
    /// `max_nm || xi_nm - (B_n (x) U_m Gamma(T*)) xi ||`, evaluated for the
    /// half-half splitting only.
    pub entangled_transform: Option<f64>,
}

impl PerfectnessReport {
    pub fn max_e1(&self) -> f64 {
        self.states.iter().map(|s| s.e1).fold(0.0, f64::max)
    }

    pub fn max_e2(&self) -> f64 {
        self.states.iter().map(|s| s.e2).fold(0.0, f64::max)
    }
}

/// Runs every outcome for every state and measures how far the protocol is
/// from perfect: (E1) unitary recoverability, (E2) unit total probability.
pub fn verify_perfectness(model: &TeleportModel, states: &[QuditState], variant: Variant) -> Result<PerfectnessReport> {
    let entangled = variant.entangled(model);
    let mut reports = Vec::with_capacity(states.len());
    for q in states {
        let rho = lift_state(model, q)?;
        let mut e1 = 0.0_f64;
        let mut total = 0.0;
        for n in 0..model.n() {
            for m in 0..model.n() {
                let mut outcome = alice_measure(model, &rho, entangled, n, m)?;
                if let Some(local) = variant.filter() {
                    outcome = bob_post_select(model, &outcome, local)?;
                }
                let expected = model.conjugate_by_key(n, m, &rho)?;
                e1 = e1.max(trace_distance(&outcome.post_state, &expected)?);
                total += outcome.probability;
            }
        }
        reports.push(StateReport { e1, e2: (total - 1.0).abs(), total_probability: total });
    }
    let entangled_transform = if model.splitting().kind() == SplittingKind::HalfHalf {
        let mut worst = 0.0_f64;
        for n in 0..model.n() {
            for m in 0..model.n() {
                worst = worst.max(model.entangled_transform_residual(n, m)?);
            }
        }
        Some(worst)
    } else {
        None
    };
    Ok(PerfectnessReport { variant, states: reports, entangled_transform })
}

/// How much of each party's vectors reaches into the other party's region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalityReport {
    /// Largest `||P_{X2} h||` over the one-particle vectors of Alice's
    /// measurement vectors, her encoded states and her arm of the resource.
    pub alice_outside: f64,
    /// Largest `||P_{X1} h||` over Bob's vectors, his arm of the resource
    /// and his post-selected states.
    pub bob_outside: f64,
    /// Whether Alice's and Bob's regions are disjoint; Bob's local vacuum
    /// test acts on his region only.
    pub regions_disjoint: bool,
}

fn leak<'a>(vectors: impl Iterator<Item = &'a ModeVector>, region: &Region) -> f64 {
    vectors.map(|h| h.restrict(region).norm_sqr().sqrt()).fold(0.0, f64::max)
}

/// Support check for the spatially separated scenario. Requires a
/// splitting with regions.
pub fn locality_report(model: &TeleportModel, states: &[QuditState]) -> Result<LocalityReport> {
    let alice_region = model.splitting().alice_region()?;
    let bob_region = model.splitting().bob_region()?;
    let factor_vectors = |v: &FockVector, q: usize| -> Vec<ModeVector> {
        v.factor_vectors(q).map(|f| f.vector().clone()).collect()
    };

    let mut alice_side: Vec<ModeVector> = Vec::new();
    let mut bob_side: Vec<ModeVector> = Vec::new();
    for n in 0..model.n() {
        for m in 0..model.n() {
            let xi = model.measurement_vector(n, m);
            alice_side.extend(factor_vectors(xi, 0));
            alice_side.extend(factor_vectors(xi, 1));
        }
    }
    for v in model.alice_basis() {
        alice_side.extend(factor_vectors(v, 0));
    }
    for v in model.bob_basis() {
        bob_side.extend(factor_vectors(v, 0));
    }
    for e in [model.entangled_perfect(), model.entangled_coherent()] {
        alice_side.extend(factor_vectors(e, 0));
        bob_side.extend(factor_vectors(e, 1));
    }
    for q in states {
        let rho = lift_state(model, q)?;
        for s in rho.summands() {
            alice_side.extend(factor_vectors(&s.ket, 0));
        }
        for n in 0..model.n() {
            for m in 0..model.n() {
                let outcome = alice_measure(model, &rho, model.entangled_coherent(), n, m)?;
                let kept = bob_post_select(model, &outcome, true)?;
                for s in kept.post_state.summands() {
                    bob_side.extend(factor_vectors(&s.ket, 0));
                }
            }
        }
    }
    Ok(LocalityReport {
        alice_outside: leak(alice_side.iter(), bob_region),
        bob_outside: leak(bob_side.iter(), alice_region),
        regions_disjoint: bob_region.intersect(alice_region).is_empty(),
    })
}
