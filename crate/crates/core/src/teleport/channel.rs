use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{pair_first, vacuum_filter, DensityOperator, FockVector, Summand, MIN_NORM};
use crate::linalg::CMatrix;

use super::{QuditState, TeleportModel};

/// Outcomes with probability below this are reported as impossible.
pub const IMPOSSIBLE_PROBABILITY: f64 = 1e-300;

/// Which entangled resource is shared and whether Bob post-selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// The vacuum-free resource `xi`.
    #[serde(rename = "perfect")]
    Perfect,
    /// The split coherent beam, without post-selection.
    #[serde(rename = "coherent")]
    Coherent,
    /// The split coherent beam, with Bob discarding the vacuum.
    #[serde(rename = "coherent+filter")]
    Filtered,
    /// As `Filtered`, with the vacuum test restricted to Bob's region.
    #[serde(rename = "coherent+local-filter")]
    LocallyFiltered,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Perfect => "perfect",
            Variant::Coherent => "coherent",
            Variant::Filtered => "coherent+filter",
            Variant::LocallyFiltered => "coherent+local-filter",
        }
    }

    pub fn entangled(self, model: &TeleportModel) -> &FockVector {
        match self {
            Variant::Perfect => model.entangled_perfect(),
            _ => model.entangled_coherent(),
        }
    }

    /// `Some(local)` when Bob applies a vacuum filter.
    pub fn filter(self) -> Option<bool> {
        match self {
            Variant::Filtered => Some(false),
            Variant::LocallyFiltered => Some(true),
            _ => None,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Variant::Perfect, Variant::Coherent, Variant::Filtered, Variant::LocallyFiltered]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown variant `{s}`")))
    }
}

/// One measurement record `(n, m)` with its probability and Bob's state.
#[derive(Clone, Debug)]
pub struct OutcomeResult {
    pub n: usize,
    pub m: usize,
    pub probability: f64,
    pub post_state: DensityOperator,
    pub recovered: Option<QuditState>,
    pub fidelity_to_input: Option<f64>,
}

fn check_outcome(model: &TeleportModel, n: usize, m: usize) -> Result<()> {
    if n >= model.n() || m >= model.n() {
        return Err(Error::InvalidParameter(format!("outcome ({n}, {m}) out of range for N = {}", model.n())));
    }
    Ok(())
}

/// `(<xi_nm| (x) 1)(rho (x) sigma)(|xi_nm> (x) 1)` on Bob's factor, with
/// `sigma = |entangled><entangled|`. Its trace is the outcome probability.
pub fn outcome_operator(
    model: &TeleportModel,
    rho: &DensityOperator,
    entangled: &FockVector,
    n: usize,
    m: usize,
) -> Result<DensityOperator> {
    check_outcome(model, n, m)?;
    if rho.modes() != 1 {
        return Err(Error::ModeMismatch { expected: 1, found: rho.modes() });
    }
    if entangled.modes() != 2 {
        return Err(Error::ModeMismatch { expected: 2, found: entangled.modes() });
    }
    let xi = model.measurement_vector(n, m);
    let contract = |v: &FockVector| -> Result<FockVector> { pair_first(xi, &v.tensor(entangled)?) };
    rho.conjugate_by(contract)
}

/// Normalize an operator of positive trace, rescaling Hermitian summands
/// to unit kets.
fn normalize_state(op: &DensityOperator, probability: f64) -> Result<DensityOperator> {
    let mut summands = Vec::with_capacity(op.summands().len());
    for s in op.summands() {
        match &s.bra {
            None => {
                let norm_sqr = s.ket.norm_sqr();
                if norm_sqr.sqrt() > MIN_NORM {
                    summands.push(Summand {
                        weight: s.weight * (norm_sqr / probability),
                        ket: s.ket.scale(C64::from(1.0 / norm_sqr.sqrt())),
                        bra: None,
                    });
                }
            }
            Some(_) => summands.push(Summand { weight: s.weight / probability, ..s.clone() }),
        }
    }
    DensityOperator::from_summands(op.modes(), op.dim(), summands)
}

/// Alice's Bell-type measurement with outcome `(n, m)`: the probability and
/// Bob's normalized conditional state.
pub fn alice_measure(
    model: &TeleportModel,
    rho: &DensityOperator,
    entangled: &FockVector,
    n: usize,
    m: usize,
) -> Result<OutcomeResult> {
    let op = outcome_operator(model, rho, entangled, n, m)?;
    let probability = op.trace().re;
    if !(probability >= IMPOSSIBLE_PROBABILITY) {
        return Err(Error::ImpossibleOutcome { n, m, probability });
    }
    Ok(OutcomeResult {
        n,
        m,
        probability,
        post_state: normalize_state(&op, probability)?,
        recovered: None,
        fidelity_to_input: None,
    })
}

/// Bob keeps the run only if his vacuum test fires: `F_+` on his factor,
/// or `F_{+,X}` on his region when `local`. The probability is multiplied
/// by the acceptance weight.
pub fn bob_post_select(model: &TeleportModel, outcome: &OutcomeResult, local: bool) -> Result<OutcomeResult> {
    let region = if local { Some(model.splitting().bob_region()?.clone()) } else { None };
    let filtered = outcome.post_state.conjugate_by(|v| vacuum_filter(v, 0, region.as_ref()))?;
    let acceptance = filtered.trace().re;
    let probability = outcome.probability * acceptance;
    if !(probability >= IMPOSSIBLE_PROBABILITY) {
        return Err(Error::ImpossibleOutcome { n: outcome.n, m: outcome.m, probability });
    }
    Ok(OutcomeResult {
        n: outcome.n,
        m: outcome.m,
        probability,
        post_state: normalize_state(&filtered, acceptance)?,
        recovered: None,
        fidelity_to_input: None,
    })
}

/// Alice's state `sum_s lambda_s |Phi_s><Phi_s|` with
/// `Phi_s = sum_j c_sj gamma_j`.
pub fn lift_state(model: &TeleportModel, q: &QuditState) -> Result<DensityOperator> {
    if q.dim() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: q.dim() });
    }
    let mut items = Vec::new();
    for (s, &w) in q.weights().iter().enumerate() {
        if w > 0.0 {
            items.push((w, model.lift_vector(&q.amplitudes(s))?));
        }
    }
    DensityOperator::mixture(&items)
}

/// Compress a Bob-side operator to the span of the `gamma'_j` and read it
/// as a qudit state, renormalized by its trace there.
pub fn reduce_state(model: &TeleportModel, rho: &DensityOperator) -> Result<QuditState> {
    let n = model.n();
    let mut r = CMatrix::zeros(n, n);
    for s in rho.summands() {
        let ket = model.bob_coordinates(&s.ket)?;
        let bra = match &s.bra {
            Some(b) => model.bob_coordinates(b)?,
            None => ket.clone(),
        };
        r += (ket * bra.adjoint()) * s.weight;
    }
    let trace = r.trace().re;
    if !(trace > IMPOSSIBLE_PROBABILITY) {
        return Err(Error::Support { leakage: rho.trace().norm(), threshold: IMPOSSIBLE_PROBABILITY });
    }
    QuditState::from_density(&r.unscale(trace))
}

/// One full run per outcome: lift, measure, optionally post-select, reduce,
/// undo Bob's key, and compare with the input.
pub fn end_to_end(model: &TeleportModel, q: &QuditState, variant: Variant) -> Result<Vec<OutcomeResult>> {
    let rho = lift_state(model, q)?;
    let entangled = variant.entangled(model);
    let mut results = Vec::with_capacity(model.n() * model.n());
    for n in 0..model.n() {
        for m in 0..model.n() {
            let mut outcome = alice_measure(model, &rho, entangled, n, m)?;
            if let Some(local) = variant.filter() {
                outcome = bob_post_select(model, &outcome, local)?;
            }
            let recovered = reduce_state(model, &outcome.post_state)?;
            let undone = recovered.conjugated(&model.key_unitary(n, m).adjoint())?;
            outcome.fidelity_to_input = Some(undone.fidelity(q)?);
            outcome.recovered = Some(recovered);
            results.push(outcome);
        }
    }
    Ok(results)
}
