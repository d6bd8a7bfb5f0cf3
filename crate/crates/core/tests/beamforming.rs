mod common;

use common::*;
use fdasec::beamforming::*;
use fdasec::scenario::{inner, norm_sqr};
use fdasec::ChannelPair;
use num_complex::Complex64;
use proptest::prelude::*;

fn target(r: f64) -> SecrecyTarget {
    SecrecyTarget::new(r).unwrap()
}

fn budget(p: f64) -> PowerBudget {
    PowerBudget::new(p).unwrap()
}

fn orthogonal_pair(b: f64, e: f64) -> ChannelPair {
    let z = Complex64::new(0.0, 0.0);
    ChannelPair::new(
        vec![Complex64::new(b.sqrt(), 0.0), z, z],
        vec![z, Complex64::new(0.0, e.sqrt()), z],
    )
    .unwrap()
}

#[test]
fn lambda1_matches_dense_eigenvalues_on_random_n4_pair() {
    let mut rng = rng(11);
    for _ in 0..20 {
        let pair = random_pair(&mut rng, 4);
        let closed =
            lambda1_closed_form(pair.bob_gain(), pair.eve_gain(), pair.coupling(), 10.0).unwrap();
        let dense = principal_eigenvalue(&sigma_matrix(&pair, 10.0));
        assert!(relative(closed, dense) < 1e-9, "{closed} vs {dense}");
    }
}

#[test]
fn lambda_delta_matches_dense_eigenvalues() {
    let mut rng = rng(12);
    for n in 2..=8 {
        let pair = random_pair(&mut rng, n);
        for p in [1e-4, 1e-3, 1e-2] {
            let closed = lambda_delta_closed_form(
                pair.bob_gain(),
                pair.eve_gain(),
                pair.coupling(),
                budget(p),
            )
            .unwrap();
            let dense = principal_eigenvalue(&delta_matrix(&pair, p));
            assert!(
                relative(closed, dense) < 1e-9,
                "N={n} P={p}: {closed} vs {dense}"
            );
        }
    }
}

#[test]
fn lambda_delta_orthogonal_identity_against_dense_oracle() {
    let pair = orthogonal_pair(3.0, 5.0);
    for p in [0.0, 0.1, 1.0, 10.0] {
        let closed = lambda_delta_closed_form(3.0, 5.0, 0.0, budget(p)).unwrap();
        assert!(relative(closed, 1.0 + 3.0 * p) < 1e-12);
        let dense = principal_eigenvalue(&delta_matrix(&pair, p));
        assert!(relative(closed, dense) < 1e-12);
    }
    // (PBE + B − E)² + 4BE(1+PE) = (PBE + B + E)²
    let (b, e, p) = (3.0f64, 5.0f64, 0.7f64);
    let lhs = (p * b * e + b - e).powi(2) + 4.0 * b * e * (1.0 + p * e);
    let rhs = (p * b * e + b + e).powi(2);
    assert!(relative(lhs, rhs) < 1e-14);
}

#[test]
fn span2_eigenpair_matches_dense_oracle_with_small_residual() {
    let mut rng = rng(13);
    for _ in 0..50 {
        let pair = random_pair(&mut rng, 5);
        for (a, b) in [(1.0, -1024.0), (1.0, -2.0), (1.0, 0.0), (0.5, 3.0)] {
            let (lambda, u) = principal_eigvec_span2(a, &pair.bob, b, &pair.eve).unwrap();
            let m = rank2(a, &pair.bob, b, &pair.eve);
            let dense = principal_eigenvalue(&m);
            let norm = spectral_norm(&m);
            assert!((lambda - dense).abs() <= 1e-9 * norm, "{lambda} vs {dense}");
            assert!((norm_sqr(&u) - 1.0).abs() < 1e-12);
            let mu = apply(&m, &u);
            let residual: f64 = mu
                .iter()
                .zip(&u)
                .map(|(x, y)| (x - y * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(
                residual <= 1e-9 * norm,
                "residual {residual} vs norm {norm}"
            );
        }
    }
}

/// Smallest `p` with `λ_max((1 − 2^R) I + p Σ) ≥ 0`, found by bisection with
/// a dense eigendecomposition at every step.
fn bisection_min_power(pair: &ChannelPair, rate: f64) -> f64 {
    let ratio = 2f64.powf(rate);
    let sigma = sigma_matrix(pair, rate);
    let feasible = |p: f64| principal_eigenvalue(&(&sigma * Complex64::from(p))) >= ratio - 1.0;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while !feasible(hi) {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[test]
fn min_power_matches_bisection_oracle() {
    let mut rng = rng(14);
    let mut checked = 0;
    while checked < 20 {
        let pair = random_pair(&mut rng, 4);
        let Some(sol) = min_power_beamformer(&pair, target(10.0))
            .unwrap()
            .feasible()
        else {
            continue;
        };
        let oracle = bisection_min_power(&pair, 10.0);
        assert!(
            relative(sol.power, oracle) < 1e-6,
            "{} vs {oracle}",
            sol.power
        );
        assert!(relative(norm_sqr(&sol.beamformer), sol.power) < 1e-12);
        assert!((secrecy_rate(&sol.beamformer, &pair) - 10.0).abs() < 1e-9);
        checked += 1;
    }
}

#[test]
fn min_power_dominates_bound_with_equality_only_when_orthogonal() {
    let mut rng = rng(15);
    for n in 2..=8 {
        let pair = random_pair(&mut rng, n);
        let bound = power_lower_bound(&pair, target(10.0)).unwrap();
        if let Some(p) = min_power_beamformer(&pair, target(10.0)).unwrap().power() {
            assert!(p > bound);
        }
    }
    let pair = orthogonal_pair(2.0, 7.0);
    let p = min_power_beamformer(&pair, target(10.0))
        .unwrap()
        .power()
        .unwrap();
    assert!(relative(p, power_lower_bound(&pair, target(10.0)).unwrap()) < 1e-12);
}

/// Best secrecy rate found by a shrinking-step random search over
/// `‖w‖² = P`.
fn hill_climb_rate(
    rng: &mut rand_chacha::ChaCha8Rng,
    pair: &ChannelPair,
    p: f64,
    samples: usize,
) -> f64 {
    let n = pair.len();
    let project = |v: Vec<Complex64>| -> Vec<Complex64> {
        let s = (p / norm_sqr(&v)).sqrt();
        v.into_iter().map(|z| z * s).collect()
    };
    let value = |w: &[Complex64]| {
        let gb = inner(&pair.bob, w).norm_sqr();
        let ge = inner(&pair.eve, w).norm_sqr();
        ((1.0 + gb) / (1.0 + ge)).log2()
    };
    let mut best = project(random_vector(rng, n, 1.0));
    let mut best_value = value(&best);
    let mut step = 1.0;
    let rounds = 100;
    for _ in 0..rounds {
        for _ in 0..samples / rounds {
            let scale = step * p.sqrt();
            let candidate = project(
                best.iter()
                    .zip(random_vector(rng, n, scale))
                    .map(|(a, b)| a + b)
                    .collect(),
            );
            let v = value(&candidate);
            if v > best_value {
                best = candidate;
                best_value = v;
            }
        }
        step *= 0.85;
    }
    best_value.max(0.0)
}

#[test]
fn max_rate_matches_hill_climb_oracle_and_grows_with_power() {
    let mut rng = rng(16);
    let pair = ChannelPair::new(
        random_vector(&mut rng, 4, 1.0),
        random_vector(&mut rng, 4, 1.0),
    )
    .unwrap();
    let mut previous = 0.0;
    for p in [0.1, 1.0, 10.0] {
        let sol = max_rate_beamformer(&pair, budget(p)).unwrap();
        let oracle = hill_climb_rate(&mut rng, &pair, p, 1_000_000);
        assert!(
            oracle <= sol.rate + 1e-9,
            "oracle {oracle} beats closed form {}",
            sol.rate
        );
        assert!(
            sol.rate - oracle < 1e-6 * sol.rate.max(1.0),
            "{} vs {oracle}",
            sol.rate
        );
        assert!(relative(norm_sqr(&sol.beamformer), p) < 1e-12);
        assert!((secrecy_rate(&sol.beamformer, &pair) - sol.rate).abs() < 1e-9);
        assert!(sol.rate >= previous);
        previous = sol.rate;
    }
}

#[test]
fn max_rate_beamformer_plug_back_at_reference_scale() {
    let mut rng = rng(17);
    for n in 2..=8 {
        let pair = random_pair(&mut rng, n);
        for p in [1e-4, 1e-3, 1e-2] {
            let sol = max_rate_beamformer(&pair, budget(p)).unwrap();
            assert!(sol.lambda_delta >= 1.0);
            assert!(relative(sol.rate, sol.lambda_delta.log2()) < 1e-15);
            assert!(relative(norm_sqr(&sol.beamformer), p) < 1e-12);
            assert!((secrecy_rate(&sol.beamformer, &pair) - sol.rate).abs() < 1e-9);
        }
    }
}

#[test]
fn mrt_formulas_match_direct_evaluation() {
    let mut rng = rng(18);
    for n in 2..=8 {
        let pair = random_pair(&mut rng, n);
        let g = pair.coupling();
        for p in [0.0, 1e-4, 1e-2] {
            let w = mrt_beamformer(&pair.bob, budget(p)).unwrap();
            assert!((norm_sqr(&w) - p).abs() <= 1e-12 * p.max(1e-300));
            let direct = secrecy_rate(&w, &pair);
            let formula = mrt_rate(&pair, budget(p), g).unwrap();
            assert!((direct - formula).abs() < 1e-9, "{direct} vs {formula}");
        }
        // low target so MRT is feasible
        let t = target(0.25);
        let p_mrt = mrt_required_power(&pair, t, g)
            .unwrap()
            .expect("feasible at low rate");
        assert!((mrt_rate(&pair, budget(p_mrt), g).unwrap() - 0.25).abs() < 1e-9);
        let p_evd = min_power_beamformer(&pair, t).unwrap().power().unwrap();
        assert!(p_evd <= p_mrt * (1.0 + 1e-12));
        let r_evd = max_rate_beamformer(&pair, budget(p_mrt)).unwrap().rate;
        assert!(r_evd >= 0.25 - 1e-9);
    }
}

fn phase_rotated(pair: &ChannelPair, theta: f64) -> ChannelPair {
    let u = Complex64::from_polar(1.0, theta);
    ChannelPair::new(
        pair.bob.iter().map(|z| z * u).collect(),
        pair.eve.iter().map(|z| z * u).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rate_is_monotone_in_power_and_coupling(
        b in 1e-3f64..1e3,
        e in 1e-3f64..1e3,
        rho1 in 0.0f64..1.0,
        rho2 in 0.0f64..1.0,
        p1 in 0.0f64..10.0,
        p2 in 0.0f64..10.0,
    ) {
        let (lo_p, hi_p) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        let (lo_x, hi_x) = if rho1 <= rho2 { (rho1 * b * e, rho2 * b * e) } else { (rho2 * b * e, rho1 * b * e) };
        let at = |x: f64, p: f64| lambda_delta_closed_form(b, e, x, budget(p)).unwrap();
        prop_assert!(at(lo_x, lo_p) >= 1.0);
        prop_assert!(at(lo_x, hi_p) >= at(lo_x, lo_p) * (1.0 - 1e-14));
        prop_assert!(at(hi_x, hi_p) <= at(lo_x, hi_p) * (1.0 + 1e-14));
    }

    #[test]
    fn common_phase_changes_no_power_or_rate(seed in 0u64..1000, theta in 0.0f64..std::f64::consts::TAU, n in 2usize..=6) {
        let mut r = common::rng(seed);
        let pair = random_pair(&mut r, n);
        let rotated = phase_rotated(&pair, theta);
        let p0 = min_power_beamformer(&pair, target(3.0)).unwrap().power();
        let p1 = min_power_beamformer(&rotated, target(3.0)).unwrap().power();
        match (p0, p1) {
            (Some(a), Some(b)) => prop_assert!(relative(a, b) < 1e-9),
            (None, None) => {}
            _ => prop_assert!(false, "feasibility changed under a common phase"),
        }
        let r0 = max_rate_beamformer(&pair, budget(1e-3)).unwrap().rate;
        let r1 = max_rate_beamformer(&rotated, budget(1e-3)).unwrap().rate;
        prop_assert!(relative(r0, r1) < 1e-9);
    }

    #[test]
    fn lambda1_never_exceeds_bob_gain(seed in 0u64..1000, n in 2usize..=8, rate in 0.1f64..12.0) {
        let mut r = common::rng(seed);
        let pair = random_pair(&mut r, n);
        let l1 = lambda1_closed_form(pair.bob_gain(), pair.eve_gain(), pair.coupling(), rate).unwrap();
        prop_assert!(l1 <= pair.bob_gain() * (1.0 + 1e-12));
        prop_assert!(l1 >= 0.0);
    }
}

#[test]
fn cauchy_schwarz_violation_is_rejected() {
    assert!(lambda1_closed_form(1.0, 1.0, 1.1, 1.0).is_err());
    assert!(lambda_delta_closed_form(1.0, 1.0, 1.1, budget(1.0)).is_err());
}
