//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use coherent_teleport::fock::{DensityOperator, FockVector};
use coherent_teleport::hilbert::{ModeVector, Splitting};
use coherent_teleport::linalg::{gaussian_matrix, CMatrix, CVector};
use coherent_teleport::teleport::{BMatrix, QuditState, TeleportModel};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mode<R: Rng>(dim: usize, scale: f64, rng: &mut R) -> ModeVector {
    let col = gaussian_matrix(dim, 1, rng).column(0).into_owned();
    ModeVector::new(col.iter().map(|z| z * scale).collect()).unwrap()
}

/// A random normalized combination of 1..=4 coherent or vacuum-removed
/// vectors on one mode.
pub fn random_span_vector<R: Rng>(dim: usize, rng: &mut R) -> FockVector {
    let count = rng.random_range(1..=4);
    let mut v = FockVector::zero(1, dim);
    for _ in 0..count {
        let h = random_mode(dim, 0.8, rng);
        let piece = if rng.random_bool(0.3) {
            FockVector::filtered_coherent(&h, None)
        } else {
            FockVector::exponential(&h)
        };
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        v = v.add(&piece.scale(c)).unwrap();
    }
    v.normalize().unwrap()
}

pub fn splitting(kind: &str, n: usize) -> Splitting {
    match kind {
        "half-half" => Splitting::half_half(n).unwrap(),
        _ => Splitting::projection_pair(n).unwrap(),
    }
}

pub fn model(kind: &str, n: usize, d: f64) -> TeleportModel {
    TeleportModel::build(n, d, splitting(kind, n), BMatrix::dft(n).unwrap()).unwrap()
}

/// `e^{2 pi i n k / N}`, written out independently of the library.
pub fn dft_entry(n: usize, k: usize, size: usize) -> C64 {
    let angle = 2.0 * std::f64::consts::PI * (n * k) as f64 / size as f64;
    C64::new(angle.cos(), angle.sin())
}

/// `V_nm |j> = conj(b_nj) |(j + m) mod N>` for the DFT phases.
pub fn key_oracle(size: usize, n: usize, m: usize) -> CMatrix {
    let mut v = CMatrix::zeros(size, size);
    for j in 0..size {
        v[((j + m) % size, j)] = dft_entry(n, j, size).conj();
    }
    v
}

/// Bob's vectors `|exp(a K2 g_j) - exp(0)>` normalized, rebuilt from the
/// splitting matrices.
pub fn bob_vectors(s: &Splitting, d: f64) -> Vec<FockVector> {
    s.basis()
        .iter()
        .map(|g| {
            let h = ModeVector::new((s.k2() * g.coeffs()).iter().map(|z| z * d.sqrt()).collect()).unwrap();
            let raw = FockVector::exponential(&h).sub(&FockVector::exponential(&ModeVector::zeros(h.dim()))).unwrap();
            raw.normalize().unwrap()
        })
        .collect()
}

/// `sum_s lambda_s |Psi_s><Psi_s|` with `Psi_s = sum_j conj(b_nj) c_sj gamma'_{j+m}`:
/// the conjugation of the lifted input by Bob's key, assembled directly.
pub fn conjugated_oracle(bob: &[FockVector], q: &QuditState, n: usize, m: usize) -> DensityOperator {
    let size = q.dim();
    let mut items = Vec::new();
    for (s, &w) in q.weights().iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let c = q.amplitudes(s);
        let mut psi = FockVector::zero(1, bob[0].dim());
        for j in 0..size {
            let coeff = dft_entry(n, j, size).conj() * c[j];
            psi = psi.add(&bob[(j + m) % size].scale(coeff)).unwrap();
        }
        items.push((w, psi));
    }
    DensityOperator::mixture(&items).unwrap()
}

/// `(1 - e^{-d/2})^2 / (1 + (N - 1) e^{-d})` evaluated naively.
pub fn total_oracle(size: usize, d: f64) -> f64 {
    let gamma2 = 1.0 / (1.0 + (size as f64 - 1.0) * (-d).exp());
    gamma2 * (d / 2.0).exp_m1().powi(2) * (-d).exp()
}

pub fn max_entry(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn amplitudes(q: &QuditState, s: usize) -> CVector {
    q.amplitudes(s)
}
