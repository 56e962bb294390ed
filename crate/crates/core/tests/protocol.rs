mod common;

use coherent_teleport::fock::{pair_first, trace_distance, vacuum_filter, DensityOperator, FockVector, OrthonormalFrame};
use coherent_teleport::hilbert::{ModeVector, Splitting};
use coherent_teleport::linalg::{CMatrix, CVector};
use coherent_teleport::teleport::*;
use coherent_teleport::Error;
use num_complex::Complex64 as C64;

use common::*;

#[test]
fn dft_b_matrix_for_two_levels() {
    let b = BMatrix::dft(2).unwrap();
    let gram = b.entries() * b.entries().adjoint();
    assert!((gram - CMatrix::identity(2, 2).scale(2.0)).norm() < 1e-15);
    for n in 0..2 {
        for k in 0..2 {
            assert!((b.entry(n, k) - dft_entry(n, k, 2)).norm() < 1e-15);
        }
    }
}

#[test]
fn build_examples() {
    let m = model("half-half", 2, 1.0);
    assert!((m.entangled_perfect().norm() - 1.0).abs() < 1e-12);
    let z = m.measurement_vector(0, 0).inner(m.measurement_vector(0, 1)).unwrap();
    assert!(z.norm() < 1e-15);

    for (n, d) in [(1, 0.3), (3, 2.0), (5, 7.5)] {
        let m = model("half-half", n, d);
        let expected = 1.0 / (1.0 + (n as f64 - 1.0) * (-d).exp());
        assert!((m.gamma().powi(2) - expected).abs() < 1e-15);
    }

    let huge = model("half-half", 3, 1e6);
    assert!(huge.entangled_coherent().norm().is_finite());
    assert!((huge.entangled_coherent().norm() - 1.0).abs() < 1e-9);
}

#[test]
fn build_rejects_bad_inputs() {
    let s = Splitting::half_half(2).unwrap();
    let b = BMatrix::dft(2).unwrap();
    assert!(matches!(TeleportModel::build(2, 0.0, s.clone(), b.clone()), Err(Error::InvalidParameter(_))));
    assert!(matches!(TeleportModel::build(2, -1.0, s.clone(), b.clone()), Err(Error::InvalidParameter(_))));
    assert!(TeleportModel::build(3, 1.0, s.clone(), BMatrix::dft(3).unwrap()).is_err());
    let mut e = b.entries().clone();
    e[(1, 1)] = C64::from(1.0);
    let bad = BMatrix::unchecked(e).unwrap();
    assert!(matches!(
        TeleportModel::build(2, 1.0, s, bad),
        Err(Error::InvalidBMatrix { check: "b_rows_orthogonal", .. })
    ));
}

#[test]
fn invariants_hold_over_grid() {
    for kind in ["half-half", "regions"] {
        for n in 1..=5 {
            for d in [0.1, 1.0, 10.0, 100.0] {
                let m = model(kind, n, d);
                for c in m.invariants() {
                    assert!(c.pass, "{kind} N={n} d={d}: {} = {:e}", c.name, c.residual);
                }
            }
        }
    }
}

#[test]
fn coherent_resource_two_ways() {
    // nu(eta) against the explicit sum gamma N^{-1/2} sum_k |exp a K1 g_k> (x) |exp a K2 g_k>
    for kind in ["half-half", "regions"] {
        let (n, d) = (3, 2.5);
        let m = model(kind, n, d);
        let s = m.splitting();
        let gamma = (1.0 + (n as f64 - 1.0) * (-d).exp()).powf(-0.5);
        let mut explicit = FockVector::zero(2, s.dim());
        for g in s.basis() {
            let side = |k: &CMatrix| {
                let h = ModeVector::new((k * g.coeffs()).iter().map(|z| z * d.sqrt()).collect()).unwrap();
                FockVector::exponential(&h).normalize().unwrap()
            };
            let term = side(s.k1()).tensor(&side(s.k2())).unwrap();
            explicit = explicit.add(&term.scale(C64::from(gamma / (n as f64).sqrt()))).unwrap();
        }
        assert!(m.entangled_coherent().distance(&explicit).unwrap() < 1e-13);
    }
}

#[test]
fn single_level_resource_is_a_product() {
    let m = model("half-half", 1, 3.0);
    let product = m.alice_basis()[0].tensor(&m.bob_basis()[0]).unwrap();
    assert!(m.entangled_perfect().distance(&product).unwrap() < 1e-15);
}

#[test]
fn perfect_outcomes_are_uniform_and_keyed() {
    let m = model("half-half", 3, 1.0);
    let q = QuditState::random(3, 4).unwrap();
    let rho = lift_state(&m, &q).unwrap();
    let bob = bob_vectors(m.splitting(), m.d());
    for n in 0..3 {
        for mm in 0..3 {
            let out = alice_measure(&m, &rho, m.entangled_perfect(), n, mm).unwrap();
            assert!((out.probability - 1.0 / 9.0).abs() < 1e-14);
            let target = conjugated_oracle(&bob, &q, n, mm);
            assert!(trace_distance(&out.post_state, &target).unwrap() < 1e-13);
        }
    }
}

#[test]
fn unfiltered_pure_state_probability() {
    // (gamma^2/N^2)((1 - e^{-d/2})^2 + (e^{d/2} - 1) e^{-d} |<b_n, c>|^2)
    for (n, d) in [(2, 0.7), (3, 2.0), (4, 6.0)] {
        let m = model("half-half", n, d);
        let q = QuditState::random(n, 9).unwrap();
        let c = q.amplitudes(0);
        let pure = QuditState::pure(&c).unwrap();
        let rho = lift_state(&m, &pure).unwrap();
        let gamma2 = 1.0 / (1.0 + (n as f64 - 1.0) * (-d).exp());
        for r in 0..n {
            let overlap: C64 = (0..n).map(|j| dft_entry(r, j, n).conj() * c[j]).sum();
            let expected = gamma2 / (n * n) as f64
                * ((1.0 - (-d / 2.0).exp()).powi(2) + ((d / 2.0).exp() - 1.0) * (-d).exp() * overlap.norm_sqr());
            for mm in 0..n {
                let out = alice_measure(&m, &rho, m.entangled_coherent(), r, mm).unwrap();
                assert!((out.probability - expected).abs() < 1e-14, "{} vs {}", out.probability, expected);
                assert!((unfiltered_pure_probability(&m, r, &c) - expected).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn coherent_outcome_decomposes_into_keyed_state_and_vacuum() {
    for kind in ["half-half", "regions"] {
        for (n, d) in [(2, 0.25), (3, 1.0), (4, 12.0)] {
            let m = model(kind, n, d);
            let bob = bob_vectors(m.splitting(), d);
            let q = QuditState::random(n, 33).unwrap();
            let gamma = (1.0 + (n as f64 - 1.0) * (-d).exp()).powf(-0.5);
            let vacuum = FockVector::vacuum(1, m.dim());
            for s in 0..n {
                let c = q.amplitudes(s);
                let phi = m.lift_vector(&c).unwrap();
                let joint = phi.tensor(m.entangled_coherent()).unwrap();
                for r in 0..n {
                    for mm in 0..n {
                        let w = pair_first(m.measurement_vector(r, mm), &joint).unwrap();
                        let mut keyed = FockVector::zero(1, m.dim());
                        for j in 0..n {
                            keyed = keyed.add(&bob[(j + mm) % n].scale(dft_entry(r, j, n).conj() * c[j])).unwrap();
                        }
                        let overlap: C64 = (0..n).map(|j| dft_entry(r, j, n).conj() * c[j]).sum();
                        let first = gamma / n as f64 * (1.0 - (-d / 2.0).exp());
                        let second = gamma / n as f64 * (((d / 2.0).exp() - 1.0) / d.exp()).sqrt();
                        let expected = keyed.scale(C64::from(first)).add(&vacuum.scale(overlap * second)).unwrap();
                        assert!(w.distance(&expected).unwrap() < 1e-13);
                        let library = coherent_outcome_vector(&m, r, mm, &c).unwrap();
                        assert!(w.distance(&library).unwrap() < 1e-13);

                        // the vacuum filter removes exactly the vacuum summand
                        let filtered = vacuum_filter(&w, 0, None).unwrap();
                        assert!(filtered.distance(&keyed.scale(C64::from(first))).unwrap() < 1e-13);
                    }
                }
            }
        }
    }
}

#[test]
fn outcome_operator_factorizes() {
    // (F_nm (x) 1)(rho (x) sigma)(F_nm (x) 1) = (1/N^2) |xi_nm><xi_nm| (x) A rho A*
    let m = model("half-half", 2, 1.5);
    let q = QuditState::random(2, 8).unwrap();
    let rho = lift_state(&m, &q).unwrap();
    let bob = bob_vectors(m.splitting(), m.d());
    for n in 0..2 {
        for mm in 0..2 {
            let xi = m.measurement_vector(n, mm);
            let bob_part = outcome_operator(&m, &rho, m.entangled_perfect(), n, mm).unwrap();
            let lhs = bob_part.conjugate_by(|v| xi.tensor(v)).unwrap();
            let target = conjugated_oracle(&bob, &q, n, mm).scale(C64::from(0.25));
            let rhs = target.conjugate_by(|v| xi.tensor(v)).unwrap();
            let mut generators = lhs.generators();
            generators.extend(rhs.generators());
            let frame = OrthonormalFrame::new(&generators).unwrap();
            let diff = frame.matrix_rep(&lhs).unwrap() - frame.matrix_rep(&rhs).unwrap();
            assert!(max_entry(&diff) < 1e-13);
        }
    }
}

#[test]
fn post_selection_closed_form_spot_value() {
    let m = model("half-half", 2, 4f64.ln());
    let q = QuditState::basis(2, 0).unwrap();
    let results = end_to_end(&m, &q, Variant::Filtered).unwrap();
    let total: f64 = results.iter().map(|r| r.probability).sum();
    assert!((total - 0.2).abs() < 1e-14);
    for r in &results {
        assert!((r.probability - 0.05).abs() < 1e-15);
    }
    let cf = closed_forms(2, 4f64.ln()).unwrap();
    assert!((cf.total - 0.2).abs() < 1e-15 && (cf.per_outcome - 0.05).abs() < 1e-16);
}

#[test]
fn closed_form_identities() {
    let cf = closed_forms(3, 200.0).unwrap();
    assert!((1.0 - cf.total).abs() < 1e-10);
    let mut r = rng(2);
    use rand::Rng;
    for _ in 0..50 {
        let n = r.random_range(1..8);
        let d = r.random_range(0.01..50.0);
        let cf = closed_forms(n, d).unwrap();
        assert!(((n * n) as f64 * cf.per_outcome - cf.total).abs() < 1e-15);
        assert!((cf.total - total_oracle(n, d)).abs() < 1e-13);
    }
    assert!(closed_forms(2, 0.0).is_err());
}

#[test]
fn lift_and_reduce() {
    let m = model("half-half", 3, 2.0);
    let basis = lift_state(&m, &QuditState::basis(3, 1).unwrap()).unwrap();
    let expected = DensityOperator::pure(&m.alice_basis()[1]);
    assert!(trace_distance(&basis, &expected).unwrap() < 1e-15);

    let mixed = lift_state(&m, &QuditState::maximally_mixed(3).unwrap()).unwrap();
    let items: Vec<_> = m.alice_basis().iter().map(|g| (1.0 / 3.0, g.clone())).collect();
    assert!(trace_distance(&mixed, &DensityOperator::mixture(&items).unwrap()).unwrap() < 1e-15);

    let bob = DensityOperator::pure(&m.bob_basis()[2]);
    let reduced = reduce_state(&m, &bob).unwrap();
    assert!(reduced.trace_distance(&QuditState::basis(3, 2).unwrap()).unwrap() < 1e-15);

    // reduction of the Bob-side copy recovers the state
    let q = QuditState::random(3, 77).unwrap();
    let items: Vec<_> = (0..3)
        .filter(|&s| q.weights()[s] > 0.0)
        .map(|s| {
            let c = q.amplitudes(s);
            let v = FockVector::linear_combination(1, m.dim(), (0..3).map(|j| (c[j], &m.bob_basis()[j]))).unwrap();
            (q.weights()[s], v)
        })
        .collect();
    let back = reduce_state(&m, &DensityOperator::mixture(&items).unwrap()).unwrap();
    assert!(back.trace_distance(&q).unwrap() < 1e-13);
}

#[test]
fn reduce_removes_components_outside_bob_span() {
    let m = model("half-half", 2, 3.0);
    let q = QuditState::random(2, 5).unwrap();
    let c = q.amplitudes(0);
    let inside = FockVector::linear_combination(1, m.dim(), (0..2).map(|j| (c[j], &m.bob_basis()[j]))).unwrap();
    let junk = FockVector::vacuum(1, m.dim()).scale(C64::new(0.3, -0.4));
    assert!(inside.inner(&junk).unwrap().norm() < 1e-15);
    let noisy = DensityOperator::pure(&inside.add(&junk).unwrap().normalize().unwrap());
    let reduced = reduce_state(&m, &noisy).unwrap();
    assert!(reduced.trace_distance(&QuditState::pure(&c).unwrap()).unwrap() < 1e-13);
    assert!(matches!(reduce_state(&m, &DensityOperator::pure(&FockVector::vacuum(1, 2))), Err(Error::Support { .. })));
}

#[test]
fn keys_follow_phase_shift_rule() {
    for kind in ["half-half", "regions"] {
        for n in [2, 3, 5] {
            let m = model(kind, n, 1.3);
            for r in 0..n {
                for mm in 0..n {
                    let v = m.key_unitary(r, mm);
                    assert!(max_entry(&(v - key_oracle(n, r, mm))) < 1e-13);
                    assert!((v.adjoint() * v - CMatrix::identity(n, n)).norm() < 1e-12);
                }
            }
        }
    }
    // V_11 on |0> for N = 2 lands on |1>
    let v = key_oracle(2, 1, 1);
    let image = &v * CVector::from_vec(vec![C64::from(1.0), C64::from(0.0)]);
    assert!(image[0].norm() < 1e-15 && (image[1].norm() - 1.0).abs() < 1e-15);
}

#[test]
fn end_to_end_recovers_input() {
    for variant in [Variant::Perfect, Variant::Filtered] {
        for n in [2, 3] {
            let m = model("half-half", n, 2.0);
            for seed in 0..3 {
                let q = QuditState::random(n, seed).unwrap();
                let results = end_to_end(&m, &q, variant).unwrap();
                for r in &results {
                    assert!((r.fidelity_to_input.unwrap() - 1.0).abs() < 1e-10);
                    let expected = q.conjugated(&key_oracle(n, r.n, r.m)).unwrap();
                    assert!(max_entry(&(r.recovered.as_ref().unwrap().density_matrix() - expected.density_matrix())) < 1e-12);
                }
                let total: f64 = results.iter().map(|r| r.probability).sum();
                let expected_total = if variant == Variant::Perfect { 1.0 } else { total_oracle(n, 2.0) };
                assert!((total - expected_total).abs() < 1e-13);
            }
        }
    }
}

#[test]
fn large_density_filtered_run() {
    let m = model("half-half", 2, 50.0);
    let q = QuditState::random(2, 1).unwrap();
    let results = end_to_end(&m, &q, Variant::Filtered).unwrap();
    let total: f64 = results.iter().map(|r| r.probability).sum();
    // 1 - total = 2 e^{-25} + O(e^{-50})
    let deficit = 1.0 - total;
    assert!((deficit - 2.0 * (-25.0f64).exp()).abs() < 1e-13, "{deficit:e}");
    for r in &results {
        assert!((r.fidelity_to_input.unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn perfectness_report_examples() {
    let m = model("half-half", 2, 1.0);
    let states = [QuditState::random(2, 3).unwrap(), QuditState::uniform(2).unwrap()];
    let perfect = verify_perfectness(&m, &states, Variant::Perfect).unwrap();
    assert!(perfect.max_e1() < 1e-10 && perfect.max_e2() < 1e-10);
    assert!(perfect.entangled_transform.unwrap() < 1e-10);

    let coherent = verify_perfectness(&m, &states, Variant::Coherent).unwrap();
    assert!(coherent.max_e1() > 1e-3);

    let mut previous = f64::INFINITY;
    for d in [5.0, 10.0, 20.0] {
        let e1 = verify_perfectness(&model("half-half", 2, d), &states, Variant::Coherent).unwrap().max_e1();
        assert!(e1 < previous);
        previous = e1;
    }

    let regions = verify_perfectness(&model("regions", 2, 1.0), &states, Variant::Perfect).unwrap();
    assert!(regions.entangled_transform.is_none());
}

#[test]
fn spatial_run_is_local() {
    let m = model("regions", 2, 10.0);
    let states = [QuditState::random(2, 12).unwrap()];
    let report = locality_report(&m, &states).unwrap();
    assert!(report.alice_outside < 1e-12 && report.bob_outside < 1e-12 && report.regions_disjoint);
    let local = end_to_end(&m, &states[0], Variant::LocallyFiltered).unwrap();
    let global = end_to_end(&m, &states[0], Variant::Filtered).unwrap();
    for (a, b) in local.iter().zip(&global) {
        assert!((a.probability - b.probability).abs() < 1e-16);
        assert!((a.fidelity_to_input.unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn local_filter_needs_regions() {
    let m = model("half-half", 2, 1.0);
    let q = QuditState::basis(2, 0).unwrap();
    assert!(matches!(end_to_end(&m, &q, Variant::LocallyFiltered), Err(Error::UnsupportedRegion(_))));
    assert!(matches!(locality_report(&m, &[q]), Err(Error::UnsupportedRegion(_))));
}

#[test]
fn impossible_outcome_is_reported() {
    // the vacuum input has no overlap with Alice's measurement vectors
    let m = model("half-half", 2, 1.0);
    let rho = DensityOperator::pure(&FockVector::vacuum(1, 2));
    assert!(matches!(
        alice_measure(&m, &rho, m.entangled_perfect(), 0, 0),
        Err(Error::ImpossibleOutcome { .. })
    ));
}

#[test]
fn rotated_splitting_runs_the_protocol() {
    let mut r = rng(21);
    let base = Splitting::half_half(3).unwrap();
    let s = base
        .rotated(&coherent_teleport::linalg::haar_unitary(3, &mut r), &coherent_teleport::linalg::haar_unitary(3, &mut r))
        .unwrap();
    let m = TeleportModel::build(3, 2.0, s, BMatrix::dft(3).unwrap()).unwrap();
    let q = QuditState::random(3, 8).unwrap();
    for variant in [Variant::Perfect, Variant::Filtered] {
        let report = verify_perfectness(&m, std::slice::from_ref(&q), variant).unwrap();
        assert!(report.max_e1() < 1e-10, "{variant:?}");
        for out in end_to_end(&m, &q, variant).unwrap() {
            assert!((out.fidelity_to_input.unwrap() - 1.0).abs() < 1e-10);
        }
    }
}
