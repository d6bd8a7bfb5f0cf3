//! Command-line front end for the FDA secure-beamforming library.

pub mod config;
pub mod plot;
pub mod units;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use fdasec::beamforming::{
    max_rate_beamformer, min_power_beamformer, mrt_rate, mrt_required_power, power_lower_bound,
    secrecy_rate, PowerBudget, PowerMin, SecrecyTarget,
};
use fdasec::coupling::{g_value, optimize_offsets, OptimizerTrace};
use fdasec::experiments::{
    format_full, linear_fda_plan, phased_array_plan, realization_rng, run_convergence_study,
    run_power_sweep, run_rate_sweep, Initialization, Metric, SweepResult,
};
use fdasec::{FrequencyPlan, Scenario};
use num_complex::Complex64;
use rand::Rng;

use config::{Overrides, Settings};
use units::{format_dbm, format_mhz};

/// Exit status for a single solve whose secrecy target cannot be met.
pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_ERROR: u8 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "fdasec",
    version,
    about = "Frequency-offset and beamformer design for secure FDA transmission"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file; the reference setup is used when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory for CSV files and plot scripts.
    #[arg(long, global = true, env = "FDASEC_OUT_DIR", default_value = ".")]
    pub out: PathBuf,

    /// Random seed for sweeps and random initialization.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Override a configuration key, e.g. `--set experiment.realizations=50`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Starting plan for the offset optimizer.
    #[arg(long, global = true, value_enum)]
    pub init: Option<InitArg>,

    /// Also write a matplotlib script next to each CSV.
    #[arg(long, global = true)]
    pub plot_script: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Minimum transmit power meeting the secrecy target for one scenario.
    SolvePower,
    /// Maximum secrecy rate under the power budget for one scenario.
    SolveRate,
    /// Optimize the frequency offsets of one scenario.
    OptimizeOffsets,
    /// Mean transmit power versus number of antennas.
    SweepPower,
    /// Mean secrecy rate versus power budget.
    SweepRate,
    /// Mean coupling per optimizer iteration.
    Convergence,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InitArg {
    Phased,
    Linear,
    Random,
}

impl From<InitArg> for Initialization {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Phased => Initialization::Phased,
            InitArg::Linear => Initialization::Linear,
            InitArg::Random => Initialization::Random,
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Model(#[from] fdasec::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("secrecy target infeasible (lambda1 = {lambda1:e}, target {rate} bits/s/Hz)")]
    Infeasible { lambda1: f64, rate: f64 },
}

impl From<std::io::Error> for RunError {
    fn from(source: std::io::Error) -> Self {
        RunError::Io {
            context: "cannot write output".into(),
            source,
        }
    }
}

fn io_error(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> RunError {
    let context = context.into();
    move |source| RunError::Io { context, source }
}

/// Runs one command, writing the summary to `out` and diagnostics to `err`.
/// Returns the process exit status.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match execute(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            match e {
                RunError::Infeasible { .. } => EXIT_INFEASIBLE,
                _ => EXIT_ERROR,
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), RunError> {
    let overrides = Overrides {
        assignments: cli.overrides.clone(),
        seed: cli.seed,
        workers: cli.workers,
        initialization: cli.init.map(Into::into),
    };
    let settings = config::load(cli.config.as_deref(), &overrides)?;
    std::fs::create_dir_all(&cli.out)
        .map_err(io_error(format!("cannot create {}", cli.out.display())))?;
    let out_dir = Output {
        dir: &cli.out,
        plot: cli.plot_script,
    };
    match cli.command {
        Command::SolvePower => solve_power(&settings, &out_dir, out),
        Command::SolveRate => solve_rate(&settings, &out_dir, out),
        Command::OptimizeOffsets => optimize(&settings, &out_dir, out),
        Command::SweepPower => {
            let sweep = run_power_sweep(&settings.experiment)?;
            write_sweep(&sweep, &out_dir, "sweep_power", out)
        }
        Command::SweepRate => {
            let sweep = run_rate_sweep(&settings.experiment)?;
            write_sweep(&sweep, &out_dir, "sweep_rate", out)
        }
        Command::Convergence => convergence(&settings, &out_dir, out),
    }
}

struct Output<'a> {
    dir: &'a Path,
    plot: bool,
}

impl Output<'_> {
    fn create(&self, name: &str) -> Result<(PathBuf, std::fs::File), RunError> {
        let path = self.dir.join(name);
        let file = std::fs::File::create(&path)
            .map_err(io_error(format!("cannot create {}", path.display())))?;
        Ok((path, file))
    }

    fn script(&self, stem: &str, body: impl FnOnce(&str) -> String) -> Result<(), RunError> {
        if self.plot {
            let (path, mut file) = self.create(&format!("plot_{stem}.py"))?;
            file.write_all(body(&format!("{stem}.csv")).as_bytes())
                .map_err(io_error(format!("cannot write {}", path.display())))?;
        }
        Ok(())
    }
}

/// Starting plan: explicit offsets when configured, else the chosen
/// initialization.
fn initial_plan(settings: &Settings) -> Result<FrequencyPlan, RunError> {
    let s = &settings.scenario;
    let n = s.element_count();
    let fm = s.rf().max_offset();
    if let Some(offsets) = &settings.offsets {
        return Ok(FrequencyPlan::new(offsets.clone(), fm)?);
    }
    Ok(match settings.initialization {
        Initialization::Phased => phased_array_plan(n),
        Initialization::Linear => linear_fda_plan(n, fm),
        Initialization::Random => {
            let mut rng = realization_rng(settings.experiment.rng_seed, 0);
            FrequencyPlan::new((0..n).map(|_| fm * rng.random::<f64>()).collect(), fm)?
        }
    })
}

/// Final plan and, when the optimizer ran, its trace.
fn design_plan(settings: &Settings) -> Result<(FrequencyPlan, Option<OptimizerTrace>), RunError> {
    let initial = initial_plan(settings)?;
    if !settings.optimize {
        return Ok((initial, None));
    }
    let (plan, trace) = optimize_offsets(
        &settings.scenario,
        &initial,
        settings.tolerance,
        settings.max_outer,
    )?;
    Ok((plan, Some(trace)))
}

fn write_plan_summary(
    out: &mut dyn Write,
    scenario: &Scenario,
    plan: &FrequencyPlan,
    trace: Option<&OptimizerTrace>,
) -> std::io::Result<()> {
    writeln!(out, "elements           {}", scenario.element_count())?;
    let offsets: Vec<String> = plan.offsets().iter().map(|&d| format_mhz(d)).collect();
    writeln!(out, "offsets            {}", offsets.join(", "))?;
    let g = g_value(scenario, plan);
    let g_phased = g_value(scenario, &phased_array_plan(scenario.element_count()));
    writeln!(out, "coupling g         {g:e}")?;
    writeln!(out, "phased-array g     {g_phased:e}")?;
    if let Some(t) = trace {
        writeln!(
            out,
            "outer iterations   {}{}",
            t.outer_iterations,
            if t.converged { "" } else { " (not converged)" }
        )?;
    }
    Ok(())
}

fn write_beamformer_csv(
    output: &Output,
    name: &str,
    scenario: &Scenario,
    plan: &FrequencyPlan,
    beamformer: &[Complex64],
) -> Result<(), RunError> {
    let (path, file) = output.create(name)?;
    let mut w = csv::Writer::from_writer(file);
    let fc = scenario.rf().carrier_frequency();
    let result = (|| -> csv::Result<()> {
        w.write_record(["element", "offset_hz", "frequency_hz", "w_re", "w_im"])?;
        for (n, (&df, z)) in plan.offsets().iter().zip(beamformer).enumerate() {
            w.write_record([
                (n + 1).to_string(),
                format_full(df),
                format_full(fc + df),
                format_full(z.re),
                format_full(z.im),
            ])?;
        }
        w.flush()?;
        Ok(())
    })();
    result.map_err(|e| RunError::Io {
        context: format!("cannot write {}", path.display()),
        source: e.into(),
    })
}

fn write_trace(output: &Output, trace: Option<&OptimizerTrace>) -> Result<(), RunError> {
    if let Some(t) = trace {
        let (_, file) = output.create("trace.csv")?;
        t.write_csv(file)?;
        output.script("trace", plot::convergence_single)?;
    }
    Ok(())
}

fn solve_power(settings: &Settings, output: &Output, out: &mut dyn Write) -> Result<(), RunError> {
    let s = &settings.scenario;
    let target = SecrecyTarget::new(settings.target_rate)?;
    let (plan, trace) = design_plan(settings)?;
    let pair = s.channel_pair(&plan, settings.time)?;
    write_trace(output, trace.as_ref())?;
    let solution = match min_power_beamformer(&pair, target)? {
        PowerMin::Feasible(sol) => sol,
        PowerMin::Infeasible { lambda1 } => {
            let _ = write_plan_summary(out, s, &plan, trace.as_ref());
            return Err(RunError::Infeasible {
                lambda1,
                rate: target.rate(),
            });
        }
    };
    write_beamformer_csv(output, "solve_power.csv", s, &plan, &solution.beamformer)?;
    let bound = power_lower_bound(&pair, target)?;
    let mrt = mrt_required_power(&pair, target, pair.coupling())?;
    write_plan_summary(out, s, &plan, trace.as_ref())?;
    writeln!(out, "lambda1            {:e}", solution.lambda1)?;
    writeln!(
        out,
        "power              {} ({:e} W)",
        format_dbm(solution.power),
        solution.power
    )?;
    writeln!(out, "lower bound        {}", format_dbm(bound))?;
    match mrt {
        Some(p) => writeln!(out, "MRT power          {}", format_dbm(p))?,
        None => writeln!(out, "MRT power          infeasible")?,
    }
    writeln!(
        out,
        "secrecy rate       {} bits/s/Hz",
        secrecy_rate(&solution.beamformer, &pair)
    )?;
    Ok(())
}

fn solve_rate(settings: &Settings, output: &Output, out: &mut dyn Write) -> Result<(), RunError> {
    let s = &settings.scenario;
    let budget = PowerBudget::new(settings.power_budget)?;
    let (plan, trace) = design_plan(settings)?;
    let pair = s.channel_pair(&plan, settings.time)?;
    write_trace(output, trace.as_ref())?;
    let solution = max_rate_beamformer(&pair, budget)?;
    write_beamformer_csv(output, "solve_rate.csv", s, &plan, &solution.beamformer)?;
    let mrt = mrt_rate(&pair, budget, pair.coupling())?;
    let bound = (1.0 + budget.power() * pair.bob_gain()).log2();
    write_plan_summary(out, s, &plan, trace.as_ref())?;
    writeln!(out, "power budget       {}", format_dbm(budget.power()))?;
    writeln!(out, "lambda_delta       {:e}", solution.lambda_delta)?;
    writeln!(out, "secrecy rate       {} bits/s/Hz", solution.rate)?;
    writeln!(out, "upper bound        {bound} bits/s/Hz")?;
    writeln!(out, "MRT rate           {mrt} bits/s/Hz")?;
    Ok(())
}

fn optimize(settings: &Settings, output: &Output, out: &mut dyn Write) -> Result<(), RunError> {
    let s = &settings.scenario;
    let initial = initial_plan(settings)?;
    let (plan, trace) = optimize_offsets(s, &initial, settings.tolerance, settings.max_outer)?;
    write_trace(output, Some(&trace))?;
    let (path, file) = output.create("offsets.csv")?;
    let mut w = csv::Writer::from_writer(file);
    let result = (|| -> csv::Result<()> {
        w.write_record(["element", "offset_hz"])?;
        for (n, &df) in plan.offsets().iter().enumerate() {
            w.write_record([(n + 1).to_string(), format_full(df)])?;
        }
        w.flush()?;
        Ok(())
    })();
    result.map_err(|e| RunError::Io {
        context: format!("cannot write {}", path.display()),
        source: e.into(),
    })?;
    write_plan_summary(out, s, &plan, Some(&trace))?;
    writeln!(out, "initial g          {:e}", trace.objective_history[0])?;
    Ok(())
}

fn write_sweep(
    sweep: &SweepResult,
    output: &Output,
    stem: &str,
    out: &mut dyn Write,
) -> Result<(), RunError> {
    let (_, file) = output.create(&format!("{stem}.csv"))?;
    sweep.write_csv(file)?;
    match sweep.metric {
        Metric::Power => output.script(stem, plot::sweep_power)?,
        Metric::Rate => output.script(stem, plot::sweep_rate)?,
    }
    let axis = match sweep.metric {
        Metric::Power => "N",
        Metric::Rate => "P",
    };
    writeln!(
        out,
        "{:<12} {:<10} {:>26} {:>10}",
        axis, "scheme", "mean", "infeasible"
    )?;
    for row in sweep.summary() {
        let axis = match sweep.metric {
            Metric::Power => format!("{}", row.axis),
            Metric::Rate => format_dbm(row.axis),
        };
        let mean = match sweep.metric {
            Metric::Power if row.mean.is_finite() => format_dbm(row.mean),
            Metric::Power => "-".to_string(),
            Metric::Rate => format!("{:.6} bits/s/Hz", row.mean),
        };
        writeln!(
            out,
            "{:<12} {:<10} {:>26} {:>10.3}",
            axis,
            row.scheme.name(),
            mean,
            row.infeasible_fraction
        )?;
    }
    Ok(())
}

fn convergence(settings: &Settings, output: &Output, out: &mut dyn Write) -> Result<(), RunError> {
    let table = run_convergence_study(&settings.experiment)?;
    let (_, file) = output.create("convergence.csv")?;
    table.write_csv(file)?;
    output.script("convergence", plot::convergence)?;
    writeln!(
        out,
        "{:<4} {:>8} {:>14} {:>14}",
        "N", "median", "final mean g", "final g/(BE)"
    )?;
    for (i, n) in table.element_counts.iter().enumerate() {
        writeln!(
            out,
            "{:<4} {:>8} {:>14.6e} {:>14.6}",
            n,
            table.median_outer_iterations(i),
            table.final_mean(i),
            table.mean_correlation[i]
        )?;
    }
    writeln!(out, "monotone           {}", table.monotone)?;
    Ok(())
}
