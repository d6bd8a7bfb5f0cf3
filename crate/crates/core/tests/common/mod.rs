#![allow(dead_code)]

use fdasec::experiments::{realization_rng, sample_scenario, ExperimentConfig};
use fdasec::{ChannelPair, FrequencyPlan, Scenario};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    realization_rng(seed, 0)
}

/// Random reference-setup scenario with `n` elements.
pub fn random_scenario(rng: &mut ChaCha8Rng, n: usize) -> Scenario {
    sample_scenario(rng, &ExperimentConfig::default(), n).unwrap()
}

pub fn random_plan(rng: &mut ChaCha8Rng, scenario: &Scenario) -> FrequencyPlan {
    let fm = scenario.rf().max_offset();
    let offsets = (0..scenario.element_count())
        .map(|_| fm * rng.random::<f64>())
        .collect();
    FrequencyPlan::new(offsets, fm).unwrap()
}

/// Channel pair of a random scenario under a random plan at a random instant.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> ChannelPair {
    let s = random_scenario(rng, n);
    let plan = random_plan(rng, &s);
    let t = 20e-6 * rng.random::<f64>();
    s.channel_pair(&plan, t).unwrap()
}

/// Complex Gaussian-ish vector with entries of magnitude `scale`.
pub fn random_vector(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale)
        .collect()
}

/// `a·x x^H + b·y y^H` as a dense matrix.
pub fn rank2(a: f64, x: &[Complex64], b: f64, y: &[Complex64]) -> DMatrix<Complex64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| x[i] * x[j].conj() * a + y[i] * y[j].conj() * b)
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut v: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn principal_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    eigenvalues(m)[0]
}

/// Assembled `Σ = ĥ_b ĥ_b^H − 2^R ĥ_e ĥ_e^H`.
pub fn sigma_matrix(pair: &ChannelPair, rate: f64) -> DMatrix<Complex64> {
    rank2(1.0, &pair.bob, -(2f64.powf(rate)), &pair.eve)
}

/// Assembled `Δ = Q^{-1/2}(I + P ĥ_b ĥ_b^H)Q^{-1/2}` with `Q = I/P + ĥ_e ĥ_e^H`,
/// scaled by `1/P` so that `Δ = (I + P ĥ_eĥ_e^H)^{-1/2}(I + P ĥ_bĥ_b^H)(I + P ĥ_eĥ_e^H)^{-1/2}`.
/// The inverse square root comes from a dense eigendecomposition.
pub fn delta_matrix(pair: &ChannelPair, power: f64) -> DMatrix<Complex64> {
    let n = pair.len();
    let id = DMatrix::<Complex64>::identity(n, n);
    let q = &id + rank2(power, &pair.eve, 0.0, &pair.eve);
    let eig = q.symmetric_eigen();
    let inv_sqrt =
        DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from(1.0 / l.sqrt())));
    let q_inv_sqrt = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    let b = &id + rank2(power, &pair.bob, 0.0, &pair.bob);
    &q_inv_sqrt * b * &q_inv_sqrt
}

pub fn apply(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let x = nalgebra::DVector::from_column_slice(v);
    (m * x).iter().copied().collect()
}

/// Spectral norm of a Hermitian matrix.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    eigenvalues(m)
        .iter()
        .fold(0.0f64, |acc, l| acc.max(l.abs()))
}

pub fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// `min_k K|rest + α e^{jω(f_c + k h)}|²` over `points` equispaced offsets in
/// `[0, f_m]`, stepping the phasor by repeated rotation and resynchronizing
/// every 1024 steps.
pub fn coordinate_grid_min(
    k: f64,
    rest: Complex64,
    alpha: f64,
    omega: f64,
    fc: f64,
    fm: f64,
    points: usize,
) -> f64 {
    let h = fm / (points - 1) as f64;
    let step = Complex64::from_polar(1.0, omega * h);
    let mut best = f64::INFINITY;
    let mut z = Complex64::new(0.0, 0.0);
    for i in 0..points {
        if i % 1024 == 0 {
            z = Complex64::from_polar(alpha, omega * (fc + i as f64 * h));
        }
        best = best.min((rest + z).norm_sqr());
        z *= step;
    }
    k * best
}
