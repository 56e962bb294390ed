//! The four commands.

use coherent_teleport::fock::trace_distance;
use coherent_teleport::hilbert::validate_splitting;
use coherent_teleport::teleport::{
    closed_forms, end_to_end, lift_state, locality_report, BMatrix, QuditState, TeleportModel, Variant,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{Command, Resolved};
use crate::report::{matrix_rows, Check, OutcomeRecord, Report, SampleRecord, Summary};
use crate::CliError;

/// Total success probability predicted for the variant: one for the
/// perfect resource, `gamma^2 (1 - e^{-d/2})` without post-selection and
/// `gamma^2 (1 - e^{-d/2})^2` with it.
pub fn closed_form_total(variant: Variant, n: usize, d: f64) -> Result<f64, CliError> {
    let cf = closed_forms(n, d)?;
    Ok(match variant {
        Variant::Perfect => 1.0,
        Variant::Coherent => cf.gamma_squared * -(-0.5 * d).exp_m1(),
        Variant::Filtered | Variant::LocallyFiltered => cf.total,
    })
}

/// Everything computed at one `d`.
pub struct Point {
    pub model: TeleportModel,
    pub outcomes: Vec<OutcomeRecord>,
    pub summary: Summary,
    pub checks: Vec<Check>,
}

fn build(cfg: &Resolved, d: f64, b: &BMatrix) -> Result<TeleportModel, CliError> {
    Ok(TeleportModel::build(cfg.n, d, cfg.splitting()?, b.clone())?)
}

pub fn evaluate(cfg: &Resolved, d: f64, b: &BMatrix, q: &QuditState, variant: Variant) -> Result<Point, CliError> {
    let model = build(cfg, d, b)?;
    let rho = lift_state(&model, q)?;
    let mut outcomes = Vec::with_capacity(cfg.n * cfg.n);
    for r in end_to_end(&model, q, variant)? {
        let expected = model.conjugate_by_key(r.n, r.m, &rho)?;
        outcomes.push(OutcomeRecord {
            d,
            n: r.n,
            m: r.m,
            probability: r.probability,
            fidelity: r.fidelity_to_input.expect("end_to_end fills the fidelity"),
            e1_residual: trace_distance(&r.post_state, &expected)?,
            recovered: matrix_rows(&r.recovered.as_ref().expect("end_to_end fills the state").density_matrix()),
        });
    }
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    let closed = closed_form_total(variant, cfg.n, d)?;
    let summary = Summary {
        d,
        total_probability: total,
        closed_form_total: closed,
        min_fidelity: outcomes.iter().map(|o| o.fidelity).fold(f64::INFINITY, f64::min),
        e1_residual: outcomes.iter().map(|o| o.e1_residual).fold(0.0, f64::max),
        e2_residual: (total - 1.0).abs(),
    };

    let tol = cfg.protocol_tolerance;
    let at = Some(d);
    let mut checks = vec![
        Check::new("closed_form_total", at, (total - closed).abs(), tol),
        Check::new("e1_recoverability", at, summary.e1_residual, tol),
    ];
    if variant != Variant::Coherent {
        checks.push(Check::new("recovery_fidelity", at, (1.0 - summary.min_fidelity).abs(), tol));
    }
    let per_outcome = match variant {
        Variant::Perfect => Some(1.0 / (cfg.n * cfg.n) as f64),
        Variant::Filtered | Variant::LocallyFiltered => Some(closed_forms(cfg.n, d)?.per_outcome),
        Variant::Coherent => None,
    };
    if let Some(p) = per_outcome {
        let worst = outcomes.iter().map(|o| (o.probability - p).abs()).fold(0.0, f64::max);
        checks.push(Check::new("closed_form_per_outcome", at, worst, tol));
    }
    Ok(Point { model, outcomes, summary, checks })
}

fn push_point(report: &mut Report, p: Point) {
    report.checks.extend(p.checks);
    report.outcomes.extend(p.outcomes);
    report.summaries.push(p.summary);
}

/// Phase-matrix checks; the report is returned early when they fail since
/// no model can be built.
fn b_checks(cfg: &Resolved, report: &mut Report) -> Result<Option<BMatrix>, CliError> {
    let b = cfg.b_matrix()?;
    let mut ok = true;
    for c in b.checks(cfg.protocol_tolerance) {
        ok &= c.pass;
        report.checks.push(Check::new(c.name, None, c.residual, cfg.protocol_tolerance));
    }
    Ok(ok.then_some(b))
}

pub fn run(cfg: &Resolved) -> Result<Report, CliError> {
    let mut report = Report::new(cfg.clone());
    let Some(b) = b_checks(cfg, &mut report)? else {
        return Ok(report);
    };
    let q = cfg.qudit_state()?;
    match cfg.command {
        Command::Verify => verify(cfg, &b, &q, &mut report)?,
        Command::Teleport => teleport(cfg, &b, &q, &mut report)?,
        Command::Sweep => sweep(cfg, &b, &q, &mut report)?,
        Command::Spatial => spatial(cfg, &b, &q, &mut report)?,
    }
    Ok(report)
}

fn verify(cfg: &Resolved, b: &BMatrix, q: &QuditState, report: &mut Report) -> Result<(), CliError> {
    let d = cfg.d[0];
    let splitting = cfg.splitting()?;
    for c in validate_splitting(&splitting, splitting.basis())?.checks() {
        report.checks.push(Check::new(c.name, None, c.residual, cfg.operator_tolerance));
    }
    let point = evaluate(cfg, d, b, q, cfg.variant)?;
    for c in point.model.invariants() {
        report.checks.push(Check::new(c.name, Some(d), c.residual, cfg.protocol_tolerance));
    }
    if cfg.variant == Variant::Perfect {
        report.checks.push(Check::new("e2_total_probability", Some(d), point.summary.e2_residual, cfg.protocol_tolerance));
        if let Some(worst) = coherent_teleport::teleport::verify_perfectness(&point.model, &[], Variant::Perfect)?
            .entangled_transform
        {
            report.checks.push(Check::new("entangled_transform", Some(d), worst, cfg.protocol_tolerance));
        }
    }
    push_point(report, point);
    Ok(())
}

fn teleport(cfg: &Resolved, b: &BMatrix, q: &QuditState, report: &mut Report) -> Result<(), CliError> {
    let point = evaluate(cfg, cfg.d[0], b, q, cfg.variant)?;
    if let Some(seed) = cfg.sample {
        report.sample = Some(sample(seed, &point.outcomes));
    }
    push_point(report, point);
    Ok(())
}

/// Draws one outcome from the enumerated probabilities; the missing mass
/// is Bob's rejection.
fn sample(seed: u64, outcomes: &[OutcomeRecord]) -> SampleRecord {
    let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
    let mut acc = 0.0;
    for o in outcomes {
        acc += o.probability;
        if u < acc {
            return SampleRecord { seed, accepted: true, n: Some(o.n), m: Some(o.m), fidelity: Some(o.fidelity) };
        }
    }
    SampleRecord { seed, accepted: false, n: None, m: None, fidelity: None }
}

fn sweep(cfg: &Resolved, b: &BMatrix, q: &QuditState, report: &mut Report) -> Result<(), CliError> {
    let points: Vec<Point> =
        cfg.d.par_iter().map(|&d| evaluate(cfg, d, b, q, cfg.variant)).collect::<Result<_, _>>()?;
    for p in points {
        push_point(report, p);
    }
    Ok(())
}

fn spatial(cfg: &Resolved, b: &BMatrix, q: &QuditState, report: &mut Report) -> Result<(), CliError> {
    let d = cfg.d[0];
    let point = evaluate(cfg, d, b, q, Variant::LocallyFiltered)?;
    let locality = locality_report(&point.model, std::slice::from_ref(q))?;
    let tol = cfg.operator_tolerance;
    report.checks.push(Check::new("alice_outside_region", Some(d), locality.alice_outside, tol));
    report.checks.push(Check::new("bob_outside_region", Some(d), locality.bob_outside, tol));
    let disjoint = if locality.regions_disjoint { 0.0 } else { 1.0 };
    report.checks.push(Check::new("regions_disjoint", Some(d), disjoint, tol));

    let global = end_to_end(&point.model, q, Variant::Filtered)?;
    let worst = point
        .outcomes
        .iter()
        .zip(&global)
        .map(|(a, g)| (a.probability - g.probability).abs())
        .fold(0.0, f64::max);
    report.checks.push(Check::new("local_global_probability", Some(d), worst, cfg.protocol_tolerance));
    report.locality = Some(locality);
    push_point(report, point);
    Ok(())
}
