//! Bob–Eve channel coupling and its minimization over frequency offsets.
//!
//! Expanding the free-space channel model, the coupling between the
//! noise-normalized channels reduces to a cosine sum that does not depend on
//! time:
//!
//! ```text
//! g(f) = |ĥ_e^H ĥ_b|² = K · |Σ_n α_n exp(j ω_n f_n)|²
//! ω_n = 2π (r_{e,n} − r_{b,n}) / c,   α_n = 1 / (r_{b,n} r_{e,n})
//! K   = λ⁴ / ((4π)⁴ σ_b² σ_e²)
//! ```
//!
//! With every offset but one held fixed, the terms depending on `f_n` collapse
//! to a single shifted cosine `√(A_n² + B_n²) cos(|ω_n| f_n − φ_n)`, whose
//! minimum over the box `[f_c, f_c + f_m]` has a closed form. Cycling that
//! update over the elements is a block coordinate descent that never
//! increases `g`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::scenario::{FrequencyPlan, Node, RfParams, Scenario};

/// Default relative decrease per sweep below which the descent stops.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// Default cap on full sweeps.
pub const DEFAULT_MAX_OUTER: usize = 50;

/// Geometry-only slopes and weights of the cosine-sum objective.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingCoefficients {
    omega: Vec<f64>,
    alpha: Vec<f64>,
}

impl CouplingCoefficients {
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let c = scenario.rf().wave_speed();
        let rb = scenario.propagation_distances(Node::Bob);
        let re = scenario.propagation_distances(Node::Eve);
        let omega = rb.iter().zip(re).map(|(b, e)| TAU * (e - b) / c).collect();
        let alpha = rb.iter().zip(re).map(|(b, e)| 1.0 / (b * e)).collect();
        Self { omega, alpha }
    }

    /// Phase slopes `ω_n` (rad/Hz).
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Weights `α_n` (m⁻²).
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `α_n exp(j ω_n (f_c + Δf_n))`
    pub fn phasor(&self, n: usize, carrier_frequency: f64, offset: f64) -> Complex64 {
        Complex64::from_polar(self.alpha[n], self.omega[n] * (carrier_frequency + offset))
    }
}

pub fn coupling_coefficients(scenario: &Scenario) -> CouplingCoefficients {
    CouplingCoefficients::from_scenario(scenario)
}

/// `K = λ⁴ / ((4π)⁴ σ_b² σ_e²)`, mapping the cosine sum onto `|ĥ_e^H ĥ_b|²`.
pub fn coupling_prefactor(rf: &RfParams) -> f64 {
    let a = rf.wavelength() / (4.0 * PI);
    let a2 = a * a;
    a2 * a2 / (rf.noise_power(Node::Bob) * rf.noise_power(Node::Eve))
}

/// Coupling `|ĥ_e^H ĥ_b|²` from the time-free cosine-sum form.
pub fn g_value(scenario: &Scenario, plan: &FrequencyPlan) -> f64 {
    let coeffs = CouplingCoefficients::from_scenario(scenario);
    let fc = scenario.rf().carrier_frequency();
    let sum: Complex64 = plan
        .offsets()
        .iter()
        .enumerate()
        .map(|(n, &df)| coeffs.phasor(n, fc, df))
        .sum();
    coupling_prefactor(scenario.rf()) * sum.norm_sqr()
}

/// Coupling `|ĥ_e^H ĥ_b|²` as a direct inner product of the channels at `t`.
pub fn g_value_at(scenario: &Scenario, plan: &FrequencyPlan, t: f64) -> Result<f64> {
    Ok(scenario.channel_pair(plan, t)?.coupling())
}

/// Minimizer of `cos(x)` over `[lower, upper]`.
///
/// Returns the first odd multiple of π inside the interval when there is one,
/// otherwise the endpoint with the smaller cosine (ties go to `lower`).
pub fn cosine_argmin(lower: f64, upper: f64) -> Result<f64> {
    if !(lower <= upper) {
        return Err(Error::EmptyInterval { lower, upper });
    }
    let k = ((lower - PI) / TAU).ceil();
    let odd = PI + TAU * k;
    if odd <= upper {
        // guard against rounding just below `lower`
        return Ok(odd.max(lower));
    }
    if upper.cos() < lower.cos() {
        Ok(upper)
    } else {
        Ok(lower)
    }
}

/// Single-coordinate view `√(A_n² + B_n²) cos(|ω_n| f_n − φ_n)` of the
/// objective, built from the other elements' current offsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineTerm {
    pub a: f64,
    pub b: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl CosineTerm {
    /// Builds the term from `Σ_{n'≠n} α_{n'} exp(j ω_{n'} f_{n'}) = A_n + j B_n`.
    pub fn from_rest(rest: Complex64, omega: f64) -> Self {
        let (a, b) = (rest.re, rest.im);
        Self {
            a,
            b,
            amplitude: rest.norm(),
            phase: sign(omega) * b.atan2(a),
        }
    }

    pub fn new(
        n: usize,
        plan: &FrequencyPlan,
        coeffs: &CouplingCoefficients,
        rf: &RfParams,
    ) -> Self {
        let fc = rf.carrier_frequency();
        let rest: Complex64 = plan
            .offsets()
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != n)
            .map(|(k, &df)| coeffs.phasor(k, fc, df))
            .sum();
        Self::from_rest(rest, coeffs.omega[n])
    }

    /// `g_n` at absolute frequency `f_c + offset`.
    pub fn value(&self, omega: f64, carrier_frequency: f64, offset: f64) -> f64 {
        self.amplitude * (omega.abs() * carrier_frequency - self.phase + omega.abs() * offset).cos()
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Optimal offset for one coordinate through the interval cosine argmin.
///
/// `omega` is the coordinate's slope and `phase` its `φ_n`. Returns
/// `Δf ∈ [0, f_m]`, or `None` when the objective is flat (`ω_n = 0`).
pub fn argmin_offset(
    omega: f64,
    phase: f64,
    carrier_frequency: f64,
    max_offset: f64,
) -> Option<f64> {
    let slope = omega.abs();
    if slope == 0.0 {
        return None;
    }
    let lower = slope * carrier_frequency - phase;
    let upper = lower + slope * max_offset;
    let x = cosine_argmin(lower, upper).ok()?;
    Some(((x - lower) / slope).clamp(0.0, max_offset))
}

/// Optimal absolute frequency for one coordinate via the five-branch table
/// on `a_n = b_n mod 2π`, `c_n = |ω_n| f_m`, `d_n = b_n − a_n + φ_n`.
pub fn case_table_frequency(
    omega: f64,
    phase: f64,
    carrier_frequency: f64,
    max_offset: f64,
) -> Option<f64> {
    let slope = omega.abs();
    if slope == 0.0 {
        return None;
    }
    let b = slope * carrier_frequency - phase;
    let a = b.rem_euclid(TAU);
    let c = slope * max_offset;
    let d = b - a + phase;
    let top = carrier_frequency + max_offset;
    let f = if a <= PI {
        if c + a < PI {
            top
        } else {
            (PI + d) / slope
        }
    } else if c + 2.0 * a <= 4.0 * PI {
        carrier_frequency
    } else if c + a < 3.0 * PI {
        top
    } else {
        (3.0 * PI + d) / slope
    };
    Some(f.clamp(carrier_frequency, top))
}

/// Distance (radians) from the case-table inputs to the nearest branch
/// boundary. Small values flag inputs where the table's strict/non-strict
/// inequalities decide the answer.
pub fn case_table_margin(omega: f64, phase: f64, carrier_frequency: f64, max_offset: f64) -> f64 {
    let slope = omega.abs();
    let b = slope * carrier_frequency - phase;
    let a = b.rem_euclid(TAU);
    let c = slope * max_offset;
    let mut margin = a.min((a - PI).abs()).min(TAU - a);
    if a <= PI {
        margin = margin.min((c + a - PI).abs());
    } else {
        margin = margin
            .min((c + 2.0 * a - 4.0 * PI).abs())
            .min((c + a - 3.0 * PI).abs());
    }
    margin
}

/// Conditionally optimal frequency `f_n*` (absolute Hz) for element `n` with
/// every other offset fixed. A flat coordinate keeps its current value.
pub fn update_frequency(
    n: usize,
    plan: &FrequencyPlan,
    coeffs: &CouplingCoefficients,
    rf: &RfParams,
) -> f64 {
    let fc = rf.carrier_frequency();
    let term = CosineTerm::new(n, plan, coeffs, rf);
    let current = plan.offsets()[n];
    let offset = if term.amplitude == 0.0 {
        current
    } else {
        argmin_offset(coeffs.omega[n], term.phase, fc, rf.max_offset()).unwrap_or(current)
    };
    fc + offset
}

/// Per-update objective record of one descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerTrace {
    /// `g` at the initial plan followed by `g` after each single-coordinate
    /// update.
    pub objective_history: Vec<f64>,
    pub outer_iterations: usize,
    pub converged: bool,
    element_count: usize,
}

impl OptimizerTrace {
    /// `g` at the initial plan and after each full sweep.
    pub fn per_sweep(&self) -> Vec<f64> {
        self.objective_history
            .iter()
            .step_by(self.element_count.max(1))
            .copied()
            .collect()
    }

    pub fn final_value(&self) -> f64 {
        *self
            .objective_history
            .last()
            .expect("history holds the initial value")
    }

    /// Writes `iteration,g` rows, one per sweep (iteration 0 is the initial plan).
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "g"])?;
        for (k, g) in self.per_sweep().iter().enumerate() {
            w.write_record([k.to_string(), format!("{g:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Source of the per-element contributions `z_n` whose sum's squared modulus
/// is proportional to the coupling.
trait PhasorModel {
    fn phasor(&self, n: usize, offset: f64) -> Complex64;
    fn objective(&self, sum: Complex64) -> f64;
}

struct CosineSum<'a> {
    coeffs: &'a CouplingCoefficients,
    carrier_frequency: f64,
    prefactor: f64,
}

impl PhasorModel for CosineSum<'_> {
    fn phasor(&self, n: usize, offset: f64) -> Complex64 {
        self.coeffs.phasor(n, self.carrier_frequency, offset)
    }

    fn objective(&self, sum: Complex64) -> f64 {
        self.prefactor * sum.norm_sqr()
    }
}

/// Contributions `conj(ĥ_{e,n}) ĥ_{b,n}` taken from the channels at one time
/// instant.
struct ChannelProducts<'a> {
    scenario: &'a Scenario,
    time: f64,
    scale: f64,
}

impl PhasorModel for ChannelProducts<'_> {
    fn phasor(&self, n: usize, offset: f64) -> Complex64 {
        let hb = self.scenario.channel_entry(Node::Bob, n, offset, self.time);
        let he = self.scenario.channel_entry(Node::Eve, n, offset, self.time);
        he.conj() * hb * self.scale
    }

    fn objective(&self, sum: Complex64) -> f64 {
        sum.norm_sqr()
    }
}

/// Cyclic block coordinate descent over the offsets (one block per element).
///
/// Stops once a full sweep lowers `g` by less than `tol` relative, or after
/// `max_outer` sweeps. The returned plan is always the best one seen.
pub fn optimize_offsets(
    scenario: &Scenario,
    initial: &FrequencyPlan,
    tol: f64,
    max_outer: usize,
) -> Result<(FrequencyPlan, OptimizerTrace)> {
    let coeffs = CouplingCoefficients::from_scenario(scenario);
    let model = CosineSum {
        coeffs: &coeffs,
        carrier_frequency: scenario.rf().carrier_frequency(),
        prefactor: coupling_prefactor(scenario.rf()),
    };
    descend(scenario, &coeffs, &model, initial, tol, max_outer)
}

/// Same descent, but every coordinate subproblem is assembled from the
/// channel vectors observed at time `t` instead of the geometric cosine sum.
pub fn optimize_offsets_at(
    scenario: &Scenario,
    initial: &FrequencyPlan,
    t: f64,
    tol: f64,
    max_outer: usize,
) -> Result<(FrequencyPlan, OptimizerTrace)> {
    let coeffs = CouplingCoefficients::from_scenario(scenario);
    let rf = scenario.rf();
    let model = ChannelProducts {
        scenario,
        time: t,
        scale: (rf.noise_power(Node::Bob) * rf.noise_power(Node::Eve))
            .sqrt()
            .recip(),
    };
    descend(scenario, &coeffs, &model, initial, tol, max_outer)
}

fn descend<M: PhasorModel>(
    scenario: &Scenario,
    coeffs: &CouplingCoefficients,
    model: &M,
    initial: &FrequencyPlan,
    tol: f64,
    max_outer: usize,
) -> Result<(FrequencyPlan, OptimizerTrace)> {
    let n_elem = scenario.element_count();
    if initial.len() != n_elem {
        return Err(Error::LengthMismatch {
            expected: n_elem,
            actual: initial.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be > 0, got {tol}")));
    }
    let rf = scenario.rf();
    let fc = rf.carrier_frequency();
    let fm = rf.max_offset();
    let mut plan = initial.clone();
    for (index, &df) in plan.offsets().iter().enumerate() {
        if !(0.0..=fm).contains(&df) {
            return Err(Error::OffsetOutOfRange {
                index,
                value: df,
                max: fm,
            });
        }
    }

    let mut phasors: Vec<Complex64> = (0..n_elem)
        .map(|n| model.phasor(n, plan.offsets()[n]))
        .collect();
    let mut current = model.objective(phasors.iter().sum());
    let mut history = Vec::with_capacity(1 + n_elem * max_outer.min(64));
    history.push(current);

    let mut outer = 0;
    let mut converged = false;
    while outer < max_outer {
        let sweep_start = current;
        for n in 0..n_elem {
            let rest: Complex64 = phasors
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != n)
                .map(|(_, z)| z)
                .sum();
            let term = CosineTerm::from_rest(rest, coeffs.omega[n]);
            if term.amplitude > 0.0 {
                if let Some(candidate) = argmin_offset(coeffs.omega[n], term.phase, fc, fm) {
                    let z = model.phasor(n, candidate);
                    let value = model.objective(rest + z);
                    // rounding can push an already-optimal coordinate up by an ulp
                    if value <= current {
                        plan.set_offset(n, candidate);
                        phasors[n] = z;
                        current = value;
                    }
                }
            }
            history.push(current);
        }
        outer += 1;
        if sweep_start == 0.0 || sweep_start - current <= tol * sweep_start {
            converged = true;
            break;
        }
    }

    Ok((
        plan,
        OptimizerTrace {
            objective_history: history,
            outer_iterations: outer,
            converged,
            element_count: n_elem,
        },
    ))
}

/// Exhaustive grid minimization of `g` over `[0, f_m]^N` for `N ≤ 3`.
/// Verification oracle; cost grows as `points_per_axis^N`.
pub fn grid_oracle(scenario: &Scenario, points_per_axis: usize) -> Result<(FrequencyPlan, f64)> {
    let n_elem = scenario.element_count();
    if n_elem > 3 {
        return Err(Error::OracleTooLarge(n_elem));
    }
    if points_per_axis == 0 {
        return Err(invalid("points_per_axis", "must be >= 1"));
    }
    let coeffs = CouplingCoefficients::from_scenario(scenario);
    let rf = scenario.rf();
    let fc = rf.carrier_frequency();
    let grid: Vec<f64> = grid_points(rf.max_offset(), points_per_axis);
    let tables: Vec<Vec<Complex64>> = (0..n_elem)
        .map(|n| grid.iter().map(|&df| coeffs.phasor(n, fc, df)).collect())
        .collect();

    let mut index = vec![0usize; n_elem];
    let mut best = (index.clone(), f64::INFINITY);
    loop {
        let sum: Complex64 = index.iter().enumerate().map(|(n, &k)| tables[n][k]).sum();
        let value = sum.norm_sqr();
        if value < best.1 {
            best = (index.clone(), value);
        }
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == n_elem {
                let plan =
                    FrequencyPlan::new(best.0.iter().map(|&k| grid[k]).collect(), rf.max_offset())?;
                return Ok((plan, coupling_prefactor(rf) * best.1));
            }
            index[axis] += 1;
            if index[axis] < points_per_axis {
                break;
            }
            index[axis] = 0;
            axis += 1;
        }
    }
}

/// `points` equispaced offsets covering `[0, max]` inclusive.
pub fn grid_points(max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    (0..points)
        .map(|k| (max * k as f64 / (points - 1) as f64).min(max))
        .collect()
}
