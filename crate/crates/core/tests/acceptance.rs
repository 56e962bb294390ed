//! Acceptance suite: one pass/fail line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p coherent-teleport --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use coherent_teleport::fock::{
    kernel, malliavin_d, second_quantize, skorohod_s, split_iso, split_iso_adjoint, trace_distance, FactorSelection,
};
use coherent_teleport::hilbert::{ModeVector, Splitting};
use coherent_teleport::linalg::{haar_unitary, hermitian_eigen, CMatrix};
use coherent_teleport::teleport::*;
use coherent_teleport::Result;
use num_complex::Complex64 as C64;
use rand::Rng;

use common::*;

/// Worst residual seen so far, with the configuration that produced it.
#[derive(Default)]
struct Worst {
    value: f64,
    at: String,
}

impl Worst {
    fn see(&mut self, value: f64, at: impl FnOnce() -> String) {
        if self.at.is_empty() || value > self.value || value.is_nan() {
            self.value = value;
            self.at = at();
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(worst: Worst, tol: f64) -> Outcome {
    Outcome {
        pass: worst.value < tol,
        detail: format!("max residual {:.3e} (tol {tol:.0e}) at {}", worst.value, worst.at),
    }
}

const DS_PERFECT: [f64; 3] = [0.1, 1.0, 10.0];

fn perfect_probabilities() -> Result<Outcome> {
    let mut worst = Worst::default();
    for kind in ["half-half", "regions"] {
        for n in 1..=5 {
            for d in DS_PERFECT {
                let m = model(kind, n, d);
                let q = QuditState::random(n, 1000 + n as u64)?;
                let results = end_to_end(&m, &q, Variant::Perfect)?;
                let expected = 1.0 / (n * n) as f64;
                for r in &results {
                    worst.see((r.probability - expected).abs(), || format!("{kind} N={n} d={d} ({},{})", r.n, r.m));
                }
                let total: f64 = results.iter().map(|r| r.probability).sum();
                worst.see((total - 1.0).abs(), || format!("{kind} N={n} d={d} total"));
            }
        }
    }
    Ok(within(worst, 1e-10))
}

fn perfect_channel_output() -> Result<Outcome> {
    let mut worst = Worst::default();
    for n in 1..=5 {
        for d in DS_PERFECT {
            let m = model("half-half", n, d);
            let bob = bob_vectors(m.splitting(), d);
            for seed in 0..20 {
                let q = QuditState::random(n, seed)?;
                let rho = lift_state(&m, &q)?;
                for r in 0..n {
                    for s in 0..n {
                        let out = alice_measure(&m, &rho, m.entangled_perfect(), r, s)?;
                        let td = trace_distance(&out.post_state, &conjugated_oracle(&bob, &q, r, s))?;
                        worst.see(td, || format!("N={n} d={d} seed={seed} ({r},{s})"));
                    }
                }
            }
        }
    }
    Ok(within(worst, 1e-10))
}

const DS_FILTERED: [f64; 6] = [0.25, std::f64::consts::LN_2 * 2.0, 1.0, 5.0, 20.0, 100.0];

/// Filtered probabilities against the closed forms and post-states against
/// the key-conjugated input, for one splitting and filter placement.
fn filtered_run(kind: &str, variant: Variant, worst: &mut Worst) -> Result<()> {
    for n in [2, 3, 4] {
        for d in DS_FILTERED {
            let m = model(kind, n, d);
            let bob = bob_vectors(m.splitting(), d);
            let gamma2 = 1.0 / (1.0 + (n as f64 - 1.0) * (-d).exp());
            let per_outcome = gamma2 / (n * n) as f64 * (d / 2.0).exp_m1().powi(2) * (-d).exp();
            let total = total_oracle(n, d);
            for seed in 0..3 {
                let q = QuditState::random(n, 300 + seed)?;
                let rho = lift_state(&m, &q)?;
                let mut sum = 0.0;
                for r in 0..n {
                    for s in 0..n {
                        let raw = alice_measure(&m, &rho, m.entangled_coherent(), r, s)?;
                        let out = bob_post_select(&m, &raw, variant == Variant::LocallyFiltered)?;
                        worst.see((out.probability - per_outcome).abs(), || {
                            format!("{kind} N={n} d={d} seed={seed} ({r},{s}) probability")
                        });
                        let td = trace_distance(&out.post_state, &conjugated_oracle(&bob, &q, r, s))?;
                        worst.see(td, || format!("{kind} N={n} d={d} seed={seed} ({r},{s}) state"));
                        sum += out.probability;
                    }
                }
                worst.see((sum - total).abs(), || format!("{kind} N={n} d={d} seed={seed} total"));
            }
        }
    }
    Ok(())
}

fn spot_values(worst: &mut Worst) -> Result<()> {
    let q = QuditState::basis(2, 0)?;
    let results = end_to_end(&model("half-half", 2, 4f64.ln()), &q, Variant::Filtered)?;
    let total: f64 = results.iter().map(|r| r.probability).sum();
    worst.see((total - 0.2).abs(), || "spot N=2 d=ln4 total".into());
    for r in &results {
        worst.see((r.probability - 0.05).abs(), || "spot N=2 d=ln4 per outcome".into());
    }
    Ok(())
}

fn filtered_probabilities() -> Result<Outcome> {
    let mut worst = Worst::default();
    filtered_run("half-half", Variant::Filtered, &mut worst)?;
    spot_values(&mut worst)?;
    Ok(within(worst, 1e-10))
}

fn asymptotic_perfection() -> Result<Outcome> {
    let mut worst = Worst::default();
    let states: Vec<QuditState> = (0..3).map(|s| QuditState::random(2, 40 + s)).collect::<Result<_>>()?;
    for n in [2, 3] {
        let m = model("half-half", n, 200.0);
        let q = QuditState::random(n, 7)?;
        let total: f64 = end_to_end(&m, &q, Variant::Filtered)?.iter().map(|r| r.probability).sum();
        worst.see((total - 1.0).abs(), || format!("N={n} d=200 total"));
    }
    let mut e1 = Vec::new();
    for d in [5.0, 10.0, 20.0, 50.0] {
        e1.push(verify_perfectness(&model("half-half", 2, d), &states, Variant::Coherent)?.max_e1());
    }
    let monotone = e1.windows(2).all(|w| w[1] < w[0]);
    let mut out = within(worst, 1e-10);
    out.pass &= monotone;
    out.detail += &format!("; unfiltered E1 over d=5,10,20,50: {}", fmt_list(&e1));
    Ok(out)
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

/// Recovered qudit states against `V rho V*` with `V` built from the phases
/// directly.
fn end_to_end_run(kind: &str, variant: Variant, worst: &mut Worst) -> Result<()> {
    for n in [2, 3, 5] {
        let m = model(kind, n, 2.0);
        for seed in 0..20 {
            let q = QuditState::random(n, 500 + seed)?;
            let rho = q.density_matrix();
            for r in end_to_end(&m, &q, variant)? {
                let v = key_oracle(n, r.n, r.m);
                let expected = &v * &rho * v.adjoint();
                let got = r.recovered.as_ref().expect("filtered runs recover a state").density_matrix();
                worst.see(max_entry(&(got - expected)), || format!("{kind} N={n} seed={seed} ({},{})", r.n, r.m));
            }
        }
    }
    Ok(())
}

fn end_to_end_keys() -> Result<Outcome> {
    let mut worst = Worst::default();
    for variant in [Variant::Perfect, Variant::Filtered] {
        end_to_end_run("half-half", variant, &mut worst)?;
    }
    Ok(within(worst, 1e-10))
}

fn operator_suite() -> Result<Outcome> {
    let mut worst = Worst::default();
    let mut r = rng(2024);
    for i in 0..100 {
        let n = 1 + i % 4;
        let splitting = match i % 3 {
            0 => Splitting::half_half(n)?,
            1 => Splitting::projection_pair(n)?,
            _ => Splitting::half_half(n)?.rotated(&haar_unitary(n, &mut r), &haar_unitary(n, &mut r))?,
        };
        let dim = splitting.dim();
        let v = random_span_vector(dim, &mut r);
        let w = random_span_vector(dim, &mut r);
        let pair = random_span_vector(dim, &mut r).tensor(&random_span_vector(dim, &mut r))?;

        let image = split_iso(&splitting, &v)?;
        worst.see((image.norm() - v.norm()).abs(), || format!("vector {i}: split isometry"));

        let mut x = malliavin_d(&v)?;
        for (k, sel) in [(splitting.k1(), 0), (splitting.k2(), 1)] {
            x = second_quantize(k, &x, FactorSelection::Index(sel))?;
        }
        for (k, sel) in [(splitting.k1(), 0), (splitting.k2(), 1)] {
            x = second_quantize(&k.adjoint(), &x, FactorSelection::Index(sel))?;
        }
        worst.see(skorohod_s(&x)?.distance(&v)?, || format!("vector {i}: split-merge identity"));

        let lhs = malliavin_d(&v)?.inner(&pair)?;
        let rhs = v.inner(&skorohod_s(&pair)?)?;
        worst.see((lhs - rhs).norm(), || format!("vector {i}: D/S adjoint"));
        let lhs = split_iso(&splitting, &v)?.inner(&pair)?;
        let rhs = v.inner(&split_iso_adjoint(&splitting, &pair)?)?;
        worst.see((lhs - rhs).norm(), || format!("vector {i}: split adjoint"));

        let t1 = contraction(dim, &mut r);
        let t2 = contraction(dim, &mut r);
        let composed = second_quantize(&t1, &second_quantize(&t2, &w, FactorSelection::All)?, FactorSelection::All)?;
        let direct = second_quantize(&(&t1 * &t2), &w, FactorSelection::All)?;
        worst.see(composed.distance(&direct)?, || format!("vector {i}: second quantization composition"));

        let hs: Vec<ModeVector> = (0..8).map(|_| random_mode(dim, 0.8, &mut r)).collect();
        let gram = CMatrix::from_fn(8, 8, |a, b| kernel(&hs[a], &hs[b]).expect("same dimension"));
        let (values, _) = hermitian_eigen(&gram);
        worst.see((-values[7]).max(0.0), || format!("vector {i}: kernel Gram"));
    }
    Ok(within(worst, 1e-10))
}

fn contraction<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let s = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| C64::from(rng.random_range(0.0..1.0))));
    haar_unitary(n, rng) * s * haar_unitary(n, rng)
}

fn spatial_locality() -> Result<Outcome> {
    let mut worst = Worst::default();
    filtered_run("regions", Variant::LocallyFiltered, &mut worst)?;
    end_to_end_run("regions", Variant::LocallyFiltered, &mut worst)?;
    let mut outside = Worst::default();
    for n in [2, 3, 5] {
        for d in [1.0, 10.0] {
            let m = model("regions", n, d);
            let states: Vec<QuditState> = (0..3).map(|s| QuditState::random(n, 60 + s)).collect::<Result<_>>()?;
            let report = locality_report(&m, &states)?;
            outside.see(report.alice_outside.max(report.bob_outside), || format!("N={n} d={d} support overlap"));
            if !report.regions_disjoint {
                outside.see(f64::INFINITY, || format!("N={n} d={d} regions overlap"));
            }
            for q in &states {
                let local = end_to_end(&m, q, Variant::LocallyFiltered)?;
                let global = end_to_end(&m, q, Variant::Filtered)?;
                for (a, b) in local.iter().zip(&global) {
                    worst.see((a.probability - b.probability).abs(), || format!("N={n} d={d} local vs global"));
                }
            }
        }
    }
    let mut out = within(worst, 1e-10);
    let overlap = within(outside, 1e-12);
    out.pass &= overlap.pass;
    out.detail += &format!("; locality {}", overlap.detail);
    Ok(out)
}

fn numerical_robustness() -> Result<Outcome> {
    let mut worst = Worst::default();
    for n in [2, 3, 5] {
        let m = model("half-half", n, 1000.0);
        let cf = closed_forms(n, 1000.0)?;
        let finite = [cf.total, cf.per_outcome, cf.gamma_squared, m.gamma(), m.entangled_coherent().norm()]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            worst.see(f64::INFINITY, || format!("N={n} d=1000 non-finite"));
        }
        let total: f64 = end_to_end(&m, &QuditState::random(n, 3)?, Variant::Filtered)?.iter().map(|r| r.probability).sum();
        worst.see((total - cf.total).abs(), || format!("N={n} d=1000 total"));

        let small = model("half-half", n, 1e-6);
        let results = end_to_end(&small, &QuditState::random(n, 4)?, Variant::Filtered)?;
        if results.iter().any(|r| !r.probability.is_finite() || !r.fidelity_to_input.unwrap_or(0.0).is_finite()) {
            worst.see(f64::INFINITY, || format!("N={n} d=1e-6 non-finite"));
        }
        let total: f64 = results.iter().map(|r| r.probability).sum();
        worst.see((total - closed_forms(n, 1e-6)?.total).abs(), || format!("N={n} d=1e-6 total"));
    }
    Ok(within(worst, 1e-10))
}

type Criterion = (&'static str, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("perfect-model outcome probabilities", perfect_probabilities),
        ("perfect channel output equals key conjugation", perfect_channel_output),
        ("post-selected probabilities and states", filtered_probabilities),
        ("asymptotic perfection", asymptotic_perfection),
        ("end-to-end qudit teleportation", end_to_end_keys),
        ("operator-algebra suite", operator_suite),
        ("spatial locality", spatial_locality),
        ("numerical robustness", numerical_robustness),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome { pass: false, detail: format!("error: {e}") });
        let status = if outcome.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {}. {name}: {} ({:.1}s)", i + 1, outcome.detail, start.elapsed().as_secs_f64());
        failures += usize::from(!outcome.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
