//! Closed-form transmit beamformers for the FDA wiretap channel.
//!
//! Every matrix that matters here is a rank-≤2 Hermitian update of a scaled
//! identity built from `ĥ_b` and `ĥ_e`, so principal eigenpairs come from a
//! 2×2 problem projected onto `span{ĥ_b, ĥ_e}`. No general eigensolver is
//! needed on the production path.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::scenario::{inner, norm_sqr, ChannelPair};

/// Relative slack allowed on `|ĥ_e^H ĥ_b|² ≤ ‖ĥ_b‖²‖ĥ_e‖²` before inputs are
/// rejected as inconsistent.
const CAUCHY_SCHWARZ_SLACK: f64 = 1e-10;

/// Target secrecy rate in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyTarget(f64);

impl SecrecyTarget {
    pub fn new(rate: f64) -> Result<Self> {
        if rate.is_finite() && rate > 0.0 {
            Ok(Self(rate))
        } else {
            Err(invalid("target_rate", format!("must be > 0, got {rate}")))
        }
    }

    pub fn rate(self) -> f64 {
        self.0
    }

    /// `2^R`
    pub fn ratio(self) -> f64 {
        self.0.exp2()
    }
}

/// Transmit power budget in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget(f64);

impl PowerBudget {
    pub fn new(power: f64) -> Result<Self> {
        if power.is_finite() && power >= 0.0 {
            Ok(Self(power))
        } else {
            Err(invalid("power", format!("must be >= 0, got {power}")))
        }
    }

    pub fn power(self) -> f64 {
        self.0
    }
}

/// Feasible solution of the power-minimization subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMinSolution {
    pub beamformer: Vec<Complex64>,
    pub power: f64,
    /// Principal eigenvalue of `Σ = ĥ_b ĥ_b^H − 2^R ĥ_e ĥ_e^H`.
    pub lambda1: f64,
}

/// Outcome of [`min_power_beamformer`].
#[derive(Debug, Clone, PartialEq)]
pub enum PowerMin {
    Feasible(PowerMinSolution),
    /// No finite power reaches the target; `lambda1 ≤ 0`.
    Infeasible {
        lambda1: f64,
    },
}

impl PowerMin {
    pub fn is_feasible(&self) -> bool {
        matches!(self, PowerMin::Feasible(_))
    }

    pub fn lambda1(&self) -> f64 {
        match self {
            PowerMin::Feasible(s) => s.lambda1,
            PowerMin::Infeasible { lambda1 } => *lambda1,
        }
    }

    pub fn power(&self) -> Option<f64> {
        match self {
            PowerMin::Feasible(s) => Some(s.power),
            PowerMin::Infeasible { .. } => None,
        }
    }

    pub fn feasible(self) -> Option<PowerMinSolution> {
        match self {
            PowerMin::Feasible(s) => Some(s),
            PowerMin::Infeasible { .. } => None,
        }
    }
}

/// Solution of the rate-maximization subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMaxSolution {
    pub beamformer: Vec<Complex64>,
    /// `log₂ λ_Δ`
    pub rate: f64,
    pub lambda_delta: f64,
}

/// Received SNR `|ĥ_i^H w|²` (noise already folded into `ĥ_i`).
pub fn snr(w: &[Complex64], h_normalized: &[Complex64]) -> f64 {
    inner(h_normalized, w).norm_sqr()
}

/// `max{log₂(1+γ_b) − log₂(1+γ_e), 0}`
pub fn secrecy_rate(w: &[Complex64], pair: &ChannelPair) -> f64 {
    let gb = snr(w, &pair.bob);
    let ge = snr(w, &pair.eve);
    secrecy_rate_from_snr(gb, ge)
}

pub fn secrecy_rate_from_snr(gamma_bob: f64, gamma_eve: f64) -> f64 {
    ((1.0 + gamma_bob) / (1.0 + gamma_eve)).log2().max(0.0)
}

/// `B·E − x`, clamped at zero within rounding slack.
fn gram_determinant(bob_gain: f64, eve_gain: f64, coupling: f64) -> Result<f64> {
    if bob_gain < 0.0 || eve_gain < 0.0 || coupling < 0.0 {
        return Err(invalid("channel gains", "must be non-negative"));
    }
    let bound = bob_gain * eve_gain;
    if coupling > bound * (1.0 + CAUCHY_SCHWARZ_SLACK) {
        return Err(Error::CauchySchwarz {
            inner: coupling,
            bound,
        });
    }
    Ok((bound - coupling).max(0.0))
}

/// Principal eigenvalue of `Σ = ĥ_b ĥ_b^H − 2^R ĥ_e ĥ_e^H` from the channel
/// Gram entries `B = ‖ĥ_b‖²`, `E = ‖ĥ_e‖²`, `x = |ĥ_e^H ĥ_b|²`:
///
/// ```text
/// λ₁ = −w₁/2 + √(w₁² + 2^{2+R} w₂)/2,  w₁ = 2^R E − B,  w₂ = B E − x
/// ```
pub fn lambda1_closed_form(bob_gain: f64, eve_gain: f64, coupling: f64, rate: f64) -> Result<f64> {
    let w2 = gram_determinant(bob_gain, eve_gain, coupling)?;
    let ratio = rate.exp2();
    let w1 = ratio * eve_gain - bob_gain;
    let root = (w1 * w1 + 4.0 * ratio * w2).sqrt();
    // rationalized when w₁ > 0 to avoid cancellation
    Ok(if w1 > 0.0 {
        2.0 * ratio * w2 / (w1 + root)
    } else {
        0.5 * (root - w1)
    })
}

/// Principal eigenvalue of `Δ = Q^{-1/2} (P⁻¹I + ĥ_b ĥ_b^H) Q^{-1/2}` with
/// `Q = P⁻¹I + ĥ_e ĥ_e^H`:
///
/// ```text
/// λ_Δ = 1 + (P/2)(f₁ + √(f₁² + f₂)) / (1 + P E)
/// f₁ = P(B E − x) + B − E,  f₂ = 4(1 + P E)(B E − x)
/// ```
pub fn lambda_delta_closed_form(
    bob_gain: f64,
    eve_gain: f64,
    coupling: f64,
    budget: PowerBudget,
) -> Result<f64> {
    let w2 = gram_determinant(bob_gain, eve_gain, coupling)?;
    let p = budget.power();
    let f1 = p * w2 + bob_gain - eve_gain;
    let f2 = 4.0 * (1.0 + p * eve_gain) * w2;
    let root = (f1 * f1 + f2).sqrt();
    let numerator = if f1 >= 0.0 {
        f1 + root
    } else if root - f1 > 0.0 {
        f2 / (root - f1)
    } else {
        0.0
    };
    Ok(1.0 + 0.5 * p * numerator / (1.0 + p * eve_gain))
}

/// `(2^R − 1)/‖ĥ_b‖²`: the power needed when Eve's channel is orthogonal.
pub fn power_lower_bound(pair: &ChannelPair, target: SecrecyTarget) -> Result<f64> {
    let b = pair.bob_gain();
    if !(b > 0.0) {
        return Err(Error::Degenerate("Bob's channel is zero"));
    }
    Ok((target.ratio() - 1.0) / b)
}

/// Principal eigenpair of `M = a·ĥ_b ĥ_b^H + b·ĥ_e ĥ_e^H`.
///
/// Works in an orthonormal basis of `span{ĥ_b, ĥ_e}`; when that span is
/// smaller than the ambient space and every in-span eigenvalue is negative,
/// the principal eigenvalue is 0 with an eigenvector from the complement.
pub fn principal_eigvec_span2(
    a: f64,
    h_bob: &[Complex64],
    b: f64,
    h_eve: &[Complex64],
) -> Result<(f64, Vec<Complex64>)> {
    if h_bob.len() != h_eve.len() {
        return Err(Error::LengthMismatch {
            expected: h_bob.len(),
            actual: h_eve.len(),
        });
    }
    let dim = h_bob.len();
    let nb = norm_sqr(h_bob);
    let ne = norm_sqr(h_eve);
    let bob_active = a != 0.0 && nb > 0.0;
    let eve_active = b != 0.0 && ne > 0.0;
    if !bob_active && !eve_active {
        return Err(Error::Degenerate("matrix is zero"));
    }

    // First basis vector along whichever channel contributes.
    let (first, second, a1, a2) = if bob_active {
        (h_bob, h_eve, a, b)
    } else {
        (h_eve, h_bob, b, a)
    };
    let first_norm = norm_sqr(first).sqrt();
    let q1: Vec<Complex64> = first.iter().map(|z| z / first_norm).collect();

    // Coordinates: first ↦ (first_norm, 0), second ↦ (s1, s2).
    let s1 = inner(&q1, second);
    let residual: Vec<Complex64> = second.iter().zip(&q1).map(|(v, q)| v - s1 * q).collect();
    let s2 = norm_sqr(&residual).sqrt();
    let second_norm = norm_sqr(second).sqrt();
    let second_active = a2 != 0.0 && second_norm > 0.0;
    let two_dim = second_active && s2 > 1e-14 * second_norm && dim >= 2;

    if !two_dim {
        let value = a1 * first_norm * first_norm
            + if second_active {
                a2 * s1.norm_sqr()
            } else {
                0.0
            };
        if value >= 0.0 || dim == 1 {
            return Ok((value, q1));
        }
        return Ok((0.0, orthogonal_unit(&q1)));
    }
    let q2: Vec<Complex64> = residual.iter().map(|z| z / s2).collect();

    // Projected 2×2 Hermitian matrix [[p, q], [q*, s]].
    let p = a1 * first_norm * first_norm + a2 * s1.norm_sqr();
    let q = a2 * s1 * s2;
    let s = a2 * s2 * s2;
    let det = a1 * a2 * (first_norm * s2).powi(2);
    let half_trace = 0.5 * (p + s);
    let disc = (0.25 * (p - s) * (p - s) + q.norm_sqr()).sqrt();
    let lambda = if half_trace >= 0.0 {
        half_trace + disc
    } else {
        det / (half_trace - disc)
    };

    if lambda < 0.0 && dim > 2 {
        // both in-span eigenvalues negative; the complement has eigenvalue 0
        return Ok((0.0, complement_unit(&q1, &q2)));
    }

    let coords = if p >= s {
        (Complex64::new(lambda - s, 0.0), q.conj())
    } else {
        (q, Complex64::new(lambda - p, 0.0))
    };
    let norm = (coords.0.norm_sqr() + coords.1.norm_sqr()).sqrt();
    let (c1, c2) = if norm > 0.0 {
        (coords.0 / norm, coords.1 / norm)
    } else {
        (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
    };
    let v = q1.iter().zip(&q2).map(|(x, y)| c1 * x + c2 * y).collect();
    Ok((lambda, v))
}

fn orthogonal_unit(q: &[Complex64]) -> Vec<Complex64> {
    complement_unit(q, &[])
}

/// Unit vector orthogonal to the orthonormal vectors `q1` (and `q2` if
/// non-empty), built by Gram–Schmidt on the canonical basis.
fn complement_unit(q1: &[Complex64], q2: &[Complex64]) -> Vec<Complex64> {
    let dim = q1.len();
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for k in 0..dim {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[k] = Complex64::new(1.0, 0.0);
        for q in [q1, q2] {
            if q.is_empty() {
                continue;
            }
            let c = inner(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
        let n = norm_sqr(&v);
        if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, v));
        }
    }
    let (n, v) = best.expect("dimension is positive");
    let n = n.sqrt();
    v.into_iter().map(|z| z / n).collect()
}

/// Minimum-power beamformer meeting a secrecy target at fixed frequencies.
///
/// Feasible iff `λ₁ > 0`; then `p = (2^R − 1)/λ₁` and `w = √p·u` with `u` the
/// unit principal eigenvector of `Σ`.
pub fn min_power_beamformer(pair: &ChannelPair, target: SecrecyTarget) -> Result<PowerMin> {
    let ratio = target.ratio();
    let lambda1 = lambda1_closed_form(
        pair.bob_gain(),
        pair.eve_gain(),
        pair.coupling(),
        target.rate(),
    )?;
    if !(lambda1 > 0.0) {
        return Ok(PowerMin::Infeasible { lambda1 });
    }
    let (_, u) = principal_eigvec_span2(1.0, &pair.bob, -ratio, &pair.eve)?;
    let power = (ratio - 1.0) / lambda1;
    let scale = power.sqrt();
    Ok(PowerMin::Feasible(PowerMinSolution {
        beamformer: u.into_iter().map(|z| z * scale).collect(),
        power,
        lambda1,
    }))
}

/// Rate-maximizing beamformer under a power budget at fixed frequencies.
///
/// Uses `Q^{-1/2} = √P (I + c ĥ_e ĥ_e^H)` with `c = ((1+PE)^{-1/2} − 1)/E`
/// and `Δ − I = g g^H − P/(1+PE) ĥ_e ĥ_e^H` where `g = Q^{-1/2} ĥ_b`.
pub fn max_rate_beamformer(pair: &ChannelPair, budget: PowerBudget) -> Result<RateMaxSolution> {
    let dim = pair.len();
    let p = budget.power();
    let zero = vec![Complex64::new(0.0, 0.0); dim];
    if p == 0.0 {
        return Ok(RateMaxSolution {
            beamformer: zero,
            rate: 0.0,
            lambda_delta: 1.0,
        });
    }
    let e = pair.eve_gain();
    let lambda_delta = lambda_delta_closed_form(pair.bob_gain(), e, pair.coupling(), budget)?;

    let c = if e > 0.0 {
        ((1.0 + p * e).sqrt().recip() - 1.0) / e
    } else {
        0.0
    };
    let inv_sqrt_q = |v: &[Complex64]| -> Vec<Complex64> {
        let proj = inner(&pair.eve, v) * c;
        v.iter()
            .zip(&pair.eve)
            .map(|(vi, hi)| (vi + proj * hi) * p.sqrt())
            .collect()
    };
    let g = inv_sqrt_q(&pair.bob);
    let (mu, p_delta) = match principal_eigvec_span2(1.0, &g, -p / (1.0 + p * e), &pair.eve) {
        Ok(pair) => pair,
        Err(Error::Degenerate(_)) => (0.0, orthogonal_unit(&unit(dim))),
        Err(err) => return Err(err),
    };
    let w = inv_sqrt_q(&p_delta);
    let wn = norm_sqr(&w).sqrt();
    let beamformer = if wn > 0.0 {
        w.into_iter().map(|z| z * (p.sqrt() / wn)).collect()
    } else {
        zero
    };
    debug_assert!(mu + 1.0 <= lambda_delta * (1.0 + 1e-6) + 1e-9);
    Ok(RateMaxSolution {
        beamformer,
        rate: lambda_delta.log2(),
        lambda_delta,
    })
}

fn unit(dim: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); dim];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Maximal-ratio transmission `w = √P h_b / ‖h_b‖`.
pub fn mrt_beamformer(h_bob: &[Complex64], budget: PowerBudget) -> Result<Vec<Complex64>> {
    let n = norm_sqr(h_bob).sqrt();
    if !(n > 0.0) {
        return Err(Error::Degenerate("Bob's channel is zero"));
    }
    let scale = budget.power().sqrt() / n;
    Ok(h_bob.iter().map(|z| z * scale).collect())
}

/// Secrecy rate of MRT: `log₂((1 + P‖ĥ_b‖²)/(1 + P ĝ/‖ĥ_b‖²))`, clamped at 0.
pub fn mrt_rate(pair: &ChannelPair, budget: PowerBudget, coupling: f64) -> Result<f64> {
    let b = pair.bob_gain();
    if !(b > 0.0) {
        return Err(Error::Degenerate("Bob's channel is zero"));
    }
    let p = budget.power();
    Ok(secrecy_rate_from_snr(p * b, p * coupling / b))
}

/// Power MRT needs to reach `target`:
/// `(2^R − 1)/(‖ĥ_b‖² − 2^R ĝ/‖ĥ_b‖²)`, or `None` when the denominator is
/// not positive.
pub fn mrt_required_power(
    pair: &ChannelPair,
    target: SecrecyTarget,
    coupling: f64,
) -> Result<Option<f64>> {
    let b = pair.bob_gain();
    if !(b > 0.0) {
        return Err(Error::Degenerate("Bob's channel is zero"));
    }
    let ratio = target.ratio();
    let denominator = b - ratio * coupling / b;
    Ok((denominator > 0.0).then(|| (ratio - 1.0) / denominator))
}
