//! Baseline frequency plans and Monte Carlo sweeps.
//!
//! Each realization draws Bob's range uniformly, places Eve a fixed distance
//! behind him on the same bearing, and evaluates every scheme on that
//! geometry. Realization `k` uses its own ChaCha stream derived from
//! `(seed, k)`, so results do not depend on how many worker threads run.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::beamforming::{
    lambda_delta_closed_form, max_rate_beamformer, min_power_beamformer, mrt_rate,
    mrt_required_power, PowerBudget, SecrecyTarget,
};
use crate::coupling::{optimize_offsets, OptimizerTrace, DEFAULT_MAX_OUTER, DEFAULT_TOLERANCE};
use crate::error::{invalid, Result};
use crate::scenario::{
    ArrayGeometry, ChannelPair, FrequencyPlan, Node, NodePlacement, RfParams, Scenario,
};

/// Compared transmission schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    /// Orthogonal-channel bound (`g = 0`).
    Bound,
    /// Optimized offsets with EVD-based beamforming.
    Proposed,
    /// Linearly increasing offsets `Δf_n = (n/N) f_m`.
    Linear,
    /// All offsets zero.
    Phased,
    /// Optimized offsets with maximal-ratio transmission.
    Mrt,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Bound,
        Scheme::Proposed,
        Scheme::Linear,
        Scheme::Phased,
        Scheme::Mrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bound => "bound",
            Scheme::Proposed => "proposed",
            Scheme::Linear => "linear",
            Scheme::Phased => "phased",
            Scheme::Mrt => "mrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

/// Starting point of the offset optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Initialization {
    #[default]
    Phased,
    Linear,
    Random,
}

impl Initialization {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "phased" => Some(Self::Phased),
            "linear" => Some(Self::Linear),
            "random" => Some(Self::Random),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rf: RfParams,
    pub first_element_x: f64,
    /// Element spacing; `None` means half a wavelength.
    pub spacing: Option<f64>,
    pub realizations: usize,
    pub rng_seed: u64,
    /// Element counts for power sweeps and convergence studies.
    pub antenna_counts: Vec<usize>,
    /// Element count for rate sweeps.
    pub rate_antenna_count: usize,
    /// Power budgets (W) for rate sweeps.
    pub power_grid: Vec<f64>,
    /// Secrecy target (bits/s/Hz) for power sweeps.
    pub target_rate: f64,
    pub range_interval: (f64, f64),
    /// `r_e − r_b` (m).
    pub range_gap: f64,
    pub angle_interval: (f64, f64),
    /// Verification instants for the average-design variants.
    pub time_samples: Vec<f64>,
    pub baselines: Vec<Scheme>,
    pub initialization: Initialization,
    pub tolerance: f64,
    pub max_outer: usize,
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rf: RfParams::new(2.4e9, 3e6, 1e-13, 1e-13).expect("constants are valid"),
            first_element_x: 0.0,
            spacing: None,
            realizations: 100,
            rng_seed: 2025,
            antenna_counts: vec![2, 4, 6, 8],
            rate_antenna_count: 3,
            // −10 dBm … +10 dBm
            power_grid: [-40.0, -35.0, -30.0, -25.0, -20.0]
                .iter()
                .map(|dbw: &f64| 10f64.powf(dbw / 10.0))
                .collect(),
            target_rate: 10.0,
            range_interval: (50.0, 150.0),
            range_gap: 20.0,
            angle_interval: (0.0, PI),
            time_samples: equispaced(0.0, 20e-6, 21),
            baselines: Scheme::ALL.to_vec(),
            initialization: Initialization::Phased,
            tolerance: DEFAULT_TOLERANCE,
            max_outer: DEFAULT_MAX_OUTER,
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(invalid("realizations", "must be >= 1"));
        }
        if self.antenna_counts.is_empty() || self.antenna_counts.contains(&0) {
            return Err(invalid(
                "antenna_counts",
                "must be a non-empty list of positive counts",
            ));
        }
        if self.rate_antenna_count == 0 {
            return Err(invalid("rate_antenna_count", "must be >= 1"));
        }
        if self.power_grid.is_empty()
            || self
                .power_grid
                .iter()
                .any(|p| !(p.is_finite() && *p >= 0.0))
        {
            return Err(invalid(
                "power_grid",
                "must be a non-empty list of non-negative powers",
            ));
        }
        SecrecyTarget::new(self.target_rate)?;
        let (lo, hi) = self.range_interval;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return Err(invalid("range_interval", "need 0 < min <= max"));
        }
        if !(self.range_gap.is_finite() && lo + self.range_gap > 0.0) {
            return Err(invalid("range_gap", "Eve's range must stay positive"));
        }
        let (a, b) = self.angle_interval;
        if !(0.0 <= a && a <= b && b <= PI) {
            return Err(invalid("angle_interval", "need 0 <= min <= max <= pi"));
        }
        if self.time_samples.is_empty() || self.time_samples.iter().any(|t| !t.is_finite()) {
            return Err(invalid(
                "time_samples",
                "must be a non-empty list of finite instants",
            ));
        }
        if self.baselines.is_empty() {
            return Err(invalid("baselines", "select at least one scheme"));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance", "must be > 0"));
        }
        if self.max_outer == 0 {
            return Err(invalid("max_outer", "must be >= 1"));
        }
        if self.workers == Some(0) {
            return Err(invalid("workers", "must be >= 1"));
        }
        if let Some(d) = self.spacing {
            if !(d > 0.0) {
                return Err(invalid("spacing", "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn array(&self, element_count: usize) -> Result<ArrayGeometry> {
        let spacing = self.spacing.unwrap_or(self.rf.wavelength() / 2.0);
        ArrayGeometry::new(element_count, self.first_element_x, spacing)
    }

    fn includes(&self, scheme: Scheme) -> bool {
        self.baselines.contains(&scheme)
    }

    fn selected(&self) -> Vec<Scheme> {
        let mut s = self.baselines.clone();
        s.sort();
        s.dedup();
        s
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = self.workers {
            builder = builder.num_threads(w);
        }
        builder
            .build()
            .map_err(|e| invalid("workers", e.to_string()))
    }
}

/// `n` equispaced points covering `[start, end]`.
pub fn equispaced(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| start + (end - start) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// `Δf_n = (n/N) f_m` for `n = 1..N`.
pub fn linear_fda_plan(element_count: usize, max_offset: f64) -> FrequencyPlan {
    let offsets = (1..=element_count)
        .map(|n| (max_offset * n as f64 / element_count as f64).min(max_offset))
        .collect();
    FrequencyPlan::new(offsets, max_offset).expect("offsets lie in [0, f_m]")
}

/// All offsets zero.
pub fn phased_array_plan(element_count: usize) -> FrequencyPlan {
    FrequencyPlan::zeros(element_count)
}

/// Bound values obtained by setting the coupling to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundMetrics {
    /// `(2^R − 1)/B`
    pub power: f64,
    /// `log₂(1 + P B)`
    pub rate: f64,
}

pub fn bound_metrics(bob_gain: f64, target: SecrecyTarget, budget: PowerBudget) -> BoundMetrics {
    BoundMetrics {
        power: (target.ratio() - 1.0) / bob_gain,
        rate: (1.0 + budget.power() * bob_gain).log2(),
    }
}

/// Deterministic RNG stream for realization `index`.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Bob's placement and Eve's placement on the same bearing, `range_gap`
/// further out.
pub fn sample_placements<R: Rng + ?Sized>(
    rng: &mut R,
    config: &ExperimentConfig,
) -> Result<(NodePlacement, NodePlacement)> {
    let (lo, hi) = config.range_interval;
    let (a, b) = config.angle_interval;
    let range = lo + (hi - lo) * rng.random::<f64>();
    let angle = (a + (b - a) * rng.random::<f64>()).clamp(a, b);
    Ok((
        NodePlacement::new(range, angle)?,
        NodePlacement::new(range + config.range_gap, angle)?,
    ))
}

pub fn sample_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    config: &ExperimentConfig,
    element_count: usize,
) -> Result<Scenario> {
    let (bob, eve) = sample_placements(rng, config)?;
    Scenario::new(config.rf, config.array(element_count)?, bob, eve)
}

fn initial_plan<R: Rng + ?Sized>(
    init: Initialization,
    element_count: usize,
    max_offset: f64,
    rng: &mut R,
) -> FrequencyPlan {
    match init {
        Initialization::Phased => phased_array_plan(element_count),
        Initialization::Linear => linear_fda_plan(element_count, max_offset),
        Initialization::Random => {
            let offsets = (0..element_count)
                .map(|_| max_offset * rng.random::<f64>())
                .collect();
            FrequencyPlan::new(offsets, max_offset).expect("offsets lie in [0, f_m]")
        }
    }
}

/// Quantity a sweep reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Transmit power in W (lower is better).
    Power,
    /// Secrecy rate in bits/s/Hz (higher is better).
    Rate,
}

/// Per-scheme, per-axis-point, per-realization metrics of one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub metric: Metric,
    pub axis_name: &'static str,
    pub axis: Vec<f64>,
    pub schemes: Vec<Scheme>,
    /// `samples[scheme][axis][realization]`; `None` marks an infeasible
    /// realization.
    pub samples: Vec<Vec<Vec<Option<f64>>>>,
    /// Largest relative deviation of the time-sampled EVD and MRT metrics
    /// from their `t = 0` values.
    pub time_spread: f64,
}

/// Aggregate over realizations for one (axis point, scheme) cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub axis: f64,
    pub scheme: Scheme,
    pub mean: f64,
    pub p05: f64,
    pub p95: f64,
    pub infeasible_fraction: f64,
}

impl SweepResult {
    fn scheme_index(&self, scheme: Scheme) -> Option<usize> {
        self.schemes.iter().position(|&s| s == scheme)
    }

    /// Per-realization values for `scheme` at axis point `axis_index`.
    pub fn values(&self, scheme: Scheme, axis_index: usize) -> Option<&[Option<f64>]> {
        let s = self.scheme_index(scheme)?;
        Some(&self.samples[s][axis_index])
    }

    /// Mean over feasible realizations.
    pub fn mean(&self, scheme: Scheme, axis_index: usize) -> Option<f64> {
        self.values(scheme, axis_index).map(|v| summarize(v).0)
    }

    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for (k, &axis) in self.axis.iter().enumerate() {
            for (s, &scheme) in self.schemes.iter().enumerate() {
                let (mean, p05, p95, infeasible_fraction) = summarize(&self.samples[s][k]);
                rows.push(SummaryRow {
                    axis,
                    scheme,
                    mean,
                    p05,
                    p95,
                    infeasible_fraction,
                });
            }
        }
        rows
    }

    /// One row per (axis point, scheme) with full-precision numbers.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "axis",
            "scheme",
            "mean_metric",
            "p05",
            "p95",
            "infeasible_fraction",
        ])?;
        for row in self.summary() {
            w.write_record([
                format_full(row.axis),
                row.scheme.name().to_string(),
                format_full(row.mean),
                format_full(row.p05),
                format_full(row.p95),
                format_full(row.infeasible_fraction),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits.
pub fn format_full(x: f64) -> String {
    format!("{x:.16e}")
}

fn summarize(values: &[Option<f64>]) -> (f64, f64, f64, f64) {
    let mut feasible: Vec<f64> = values.iter().flatten().copied().collect();
    let infeasible = (values.len() - feasible.len()) as f64 / values.len().max(1) as f64;
    if feasible.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN, infeasible);
    }
    feasible.sort_by(f64::total_cmp);
    let mean = feasible.iter().sum::<f64>() / feasible.len() as f64;
    (
        mean,
        quantile(&feasible, 0.05),
        quantile(&feasible, 0.95),
        infeasible,
    )
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Optimized plan for one scenario under the config's initialization.
fn proposed_plan(
    scenario: &Scenario,
    config: &ExperimentConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(FrequencyPlan, OptimizerTrace)> {
    let init = initial_plan(
        config.initialization,
        scenario.element_count(),
        scenario.rf().max_offset(),
        rng,
    );
    optimize_offsets(scenario, &init, config.tolerance, config.max_outer)
}

/// Per-realization output of a sweep: `metrics[axis][scheme]` plus the
/// time-invariance check.
struct RealizationOutput {
    metrics: Vec<Vec<Option<f64>>>,
    time_spread: f64,
}

fn collect_sweep(
    metric: Metric,
    axis_name: &'static str,
    axis: Vec<f64>,
    schemes: Vec<Scheme>,
    outputs: Vec<RealizationOutput>,
) -> SweepResult {
    let realizations = outputs.len();
    let mut samples = vec![vec![Vec::with_capacity(realizations); axis.len()]; schemes.len()];
    let mut time_spread: f64 = 0.0;
    for out in outputs {
        time_spread = time_spread.max(out.time_spread);
        for (k, row) in out.metrics.into_iter().enumerate() {
            for (s, value) in row.into_iter().enumerate() {
                samples[s][k].push(value);
            }
        }
    }
    SweepResult {
        metric,
        axis_name,
        axis,
        schemes,
        samples,
        time_spread,
    }
}

/// Minimum transmit power versus element count at a fixed secrecy target.
///
/// The bound is `(2^R − 1)/‖ĥ_b‖²`; proposed, linear and phased use the
/// EVD-based beamformer under their plans; MRT uses the optimized plan. The
/// proposed and MRT powers are re-evaluated at every time sample to confirm
/// they do not drift.
pub fn run_power_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let target = SecrecyTarget::new(config.target_rate)?;
    let schemes = config.selected();
    let pool = config.pool()?;
    let outputs: Vec<RealizationOutput> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|k| power_realization(config, &schemes, target, k as u64))
            .collect::<Result<Vec<_>>>()
    })?;
    let axis = config.antenna_counts.iter().map(|&n| n as f64).collect();
    Ok(collect_sweep(
        Metric::Power,
        "elements",
        axis,
        schemes,
        outputs,
    ))
}

fn power_realization(
    config: &ExperimentConfig,
    schemes: &[Scheme],
    target: SecrecyTarget,
    index: u64,
) -> Result<RealizationOutput> {
    let mut rng = realization_rng(config.rng_seed, index);
    let (bob, eve) = sample_placements(&mut rng, config)?;
    let fm = config.rf.max_offset();
    let mut metrics = Vec::with_capacity(config.antenna_counts.len());
    let mut time_spread: f64 = 0.0;

    for &n in &config.antenna_counts {
        let scenario = Scenario::new(config.rf, config.array(n)?, bob, eve)?;
        let power_under = |plan: &FrequencyPlan, t: f64| -> Result<Option<f64>> {
            let pair = scenario.channel_pair(plan, t)?;
            Ok(min_power_beamformer(&pair, target)?.power())
        };
        let needs_proposed = config.includes(Scheme::Proposed) || config.includes(Scheme::Mrt);
        let proposed = if needs_proposed {
            Some(proposed_plan(&scenario, config, &mut rng)?.0)
        } else {
            None
        };

        let mut row = Vec::with_capacity(schemes.len());
        for &scheme in schemes {
            let value = match scheme {
                Scheme::Bound => {
                    let pair = scenario.channel_pair(&phased_array_plan(n), 0.0)?;
                    Some((target.ratio() - 1.0) / pair.bob_gain())
                }
                Scheme::Proposed => {
                    let plan = proposed.as_ref().expect("computed above");
                    let reference = power_under(plan, 0.0)?;
                    for &t in &config.time_samples {
                        let p = power_under(plan, t)?;
                        if let (Some(a), Some(b)) = (reference, p) {
                            time_spread = time_spread.max(relative_gap(a, b));
                        }
                    }
                    reference
                }
                Scheme::Linear => power_under(&linear_fda_plan(n, fm), 0.0)?,
                Scheme::Phased => power_under(&phased_array_plan(n), 0.0)?,
                Scheme::Mrt => {
                    let plan = proposed.as_ref().expect("computed above");
                    let mrt_at = |t: f64| -> Result<Option<f64>> {
                        let pair = scenario.channel_pair(plan, t)?;
                        mrt_required_power(&pair, target, pair.coupling())
                    };
                    let reference = mrt_at(0.0)?;
                    for &t in &config.time_samples {
                        if let (Some(a), Some(b)) = (reference, mrt_at(t)?) {
                            time_spread = time_spread.max(relative_gap(a, b));
                        }
                    }
                    reference
                }
            };
            row.push(value);
        }
        metrics.push(row);
    }
    Ok(RealizationOutput {
        metrics,
        time_spread,
    })
}

/// Maximum secrecy rate versus power budget at `rate_antenna_count`
/// elements. The bound is `log₂(1 + P‖ĥ_b‖²)`.
pub fn run_rate_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let schemes = config.selected();
    let pool = config.pool()?;
    let outputs: Vec<RealizationOutput> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|k| rate_realization(config, &schemes, k as u64))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(collect_sweep(
        Metric::Rate,
        "power_w",
        config.power_grid.clone(),
        schemes,
        outputs,
    ))
}

fn rate_realization(
    config: &ExperimentConfig,
    schemes: &[Scheme],
    index: u64,
) -> Result<RealizationOutput> {
    let mut rng = realization_rng(config.rng_seed, index);
    let n = config.rate_antenna_count;
    let scenario = sample_scenario(&mut rng, config, n)?;
    let fm = config.rf.max_offset();
    let needs_proposed = config.includes(Scheme::Proposed) || config.includes(Scheme::Mrt);
    let proposed = if needs_proposed {
        Some(proposed_plan(&scenario, config, &mut rng)?.0)
    } else {
        None
    };
    let pair_of = |plan: &FrequencyPlan, t: f64| scenario.channel_pair(plan, t);
    let proposed_pairs: Option<Vec<ChannelPair>> = proposed
        .as_ref()
        .map(|plan| {
            std::iter::once(0.0)
                .chain(config.time_samples.iter().copied())
                .map(|t| pair_of(plan, t))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    let linear = pair_of(&linear_fda_plan(n, fm), 0.0)?;
    let phased = pair_of(&phased_array_plan(n), 0.0)?;

    let mut time_spread: f64 = 0.0;
    let mut metrics = Vec::with_capacity(config.power_grid.len());
    for &p in &config.power_grid {
        let budget = PowerBudget::new(p)?;
        let mut row = Vec::with_capacity(schemes.len());
        for &scheme in schemes {
            let value = match scheme {
                Scheme::Bound => (1.0 + p * phased.bob_gain()).log2(),
                Scheme::Proposed => {
                    let pairs = proposed_pairs.as_ref().expect("computed above");
                    let reference = max_rate_beamformer(&pairs[0], budget)?.rate;
                    for pair in &pairs[1..] {
                        let l = lambda_delta_closed_form(
                            pair.bob_gain(),
                            pair.eve_gain(),
                            pair.coupling(),
                            budget,
                        )?;
                        time_spread = time_spread.max(relative_gap(reference, l.log2()));
                    }
                    reference
                }
                Scheme::Linear => max_rate_beamformer(&linear, budget)?.rate,
                Scheme::Phased => max_rate_beamformer(&phased, budget)?.rate,
                Scheme::Mrt => {
                    let pairs = proposed_pairs.as_ref().expect("computed above");
                    let reference = mrt_rate(&pairs[0], budget, pairs[0].coupling())?;
                    for pair in &pairs[1..] {
                        let r = mrt_rate(pair, budget, pair.coupling())?;
                        time_spread = time_spread.max(relative_gap(reference, r));
                    }
                    reference
                }
            };
            row.push(Some(value));
        }
        metrics.push(row);
    }
    Ok(RealizationOutput {
        metrics,
        time_spread,
    })
}

/// Mean objective per outer iteration of the offset optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub element_counts: Vec<usize>,
    /// `mean_objective[i][k]`: mean `g` after `k` sweeps at
    /// `element_counts[i]` (iteration 0 is the initial plan). Realizations
    /// that stopped early hold their final value.
    pub mean_objective: Vec<Vec<f64>>,
    /// Mean final `g / (‖ĥ_b‖²‖ĥ_e‖²)`, the squared correlation coefficient
    /// between Bob's and Eve's channels.
    pub mean_correlation: Vec<f64>,
    /// Sweeps performed, per element count and realization.
    pub outer_iterations: Vec<Vec<usize>>,
    /// Whether every per-update history was non-increasing.
    pub monotone: bool,
}

impl ConvergenceTable {
    pub fn median_outer_iterations(&self, index: usize) -> f64 {
        let mut v: Vec<f64> = self.outer_iterations[index]
            .iter()
            .map(|&k| k as f64)
            .collect();
        v.sort_by(f64::total_cmp);
        quantile(&v, 0.5)
    }

    pub fn final_mean(&self, index: usize) -> f64 {
        *self.mean_objective[index]
            .last()
            .expect("at least the initial value")
    }

    /// Rows `elements,iteration,mean_g`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["elements", "iteration", "mean_g"])?;
        for (n, series) in self.element_counts.iter().zip(&self.mean_objective) {
            for (k, g) in series.iter().enumerate() {
                w.write_record([n.to_string(), k.to_string(), format_full(*g)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn run_convergence_study(config: &ExperimentConfig) -> Result<ConvergenceTable> {
    config.validate()?;
    let pool = config.pool()?;
    let traces: Vec<Vec<(OptimizerTrace, f64)>> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|k| {
                let mut rng = realization_rng(config.rng_seed, k as u64);
                let (bob, eve) = sample_placements(&mut rng, config)?;
                config
                    .antenna_counts
                    .iter()
                    .map(|&n| {
                        let scenario = Scenario::new(config.rf, config.array(n)?, bob, eve)?;
                        let gram = scenario.normalized_channel_gain(Node::Bob)
                            * scenario.normalized_channel_gain(Node::Eve);
                        Ok((proposed_plan(&scenario, config, &mut rng)?.1, gram))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut mean_objective = Vec::new();
    let mut mean_correlation = Vec::new();
    let mut outer_iterations = Vec::new();
    let mut monotone = true;
    for (i, _) in config.antenna_counts.iter().enumerate() {
        let sweeps: Vec<Vec<f64>> = traces.iter().map(|t| t[i].0.per_sweep()).collect();
        let len = sweeps.iter().map(Vec::len).max().unwrap_or(1);
        let mut mean = vec![0.0; len];
        for s in &sweeps {
            let last = *s.last().expect("initial value present");
            for (k, m) in mean.iter_mut().enumerate() {
                *m += s.get(k).copied().unwrap_or(last);
            }
        }
        for m in &mut mean {
            *m /= sweeps.len() as f64;
        }
        mean_objective.push(mean);
        mean_correlation.push(
            traces
                .iter()
                .map(|t| t[i].0.final_value() / t[i].1)
                .sum::<f64>()
                / traces.len() as f64,
        );
        outer_iterations.push(traces.iter().map(|t| t[i].0.outer_iterations).collect());
        monotone &= traces
            .iter()
            .all(|t| t[i].0.objective_history.windows(2).all(|w| w[1] <= w[0]));
    }
    Ok(ConvergenceTable {
        element_counts: config.antenna_counts.clone(),
        mean_objective,
        mean_correlation,
        outer_iterations,
        monotone,
    })
}
