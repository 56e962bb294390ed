//! The teleportation protocol: perfect and coherent-beam models, Alice's
//! measurement, Bob's vacuum post-selection, the qudit lift and reduction,
//! and the perfectness checks.

mod bmatrix;
mod channel;
mod model;
mod qudit;
mod verify;

pub use bmatrix::BMatrix;
pub use channel::{
    alice_measure, bob_post_select, end_to_end, lift_state, outcome_operator, reduce_state, OutcomeResult, Variant,
    IMPOSSIBLE_PROBABILITY,
};
pub use model::{TeleportModel, MODEL_TOL};
pub use qudit::{QuditState, STATE_TOL};
pub use verify::{
    closed_forms, coherent_outcome_vector, locality_report, unfiltered_pure_probability, verify_perfectness,
    ClosedForms, LocalityReport, PerfectnessReport, StateReport,
};
