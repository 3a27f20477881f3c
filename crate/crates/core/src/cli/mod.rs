//! Command-line front end.
//!
//! Settings are layered: built-in reference values, then the `--config`
//! TOML file, then individual flags. Tabular output is CSV with a header
//! row; single results are `key = value` lines. Numbers carry 12
//! significant digits.
//!
//! Exit status: 0 on success, 1 for invalid input, 2 for I/O failures and
//! 3 when `reproduce` misses a reference value.

pub mod config;
pub mod output;
#[cfg(test)]
mod tests;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use crate::correlator::{lgi_correlator, BaselineSchedule};
use crate::expansion::flavor_probabilities_from_e;
use crate::montecarlo::simulate_lgi;
use crate::optimize::{
    grid_scan, maximize, parameter_sweep, Evaluator, RefineOptions, ScanGrid, SweepAxis,
};
use crate::oracle::Propagator;
use crate::params::Flavor;
use crate::reproduce::reproduce;

pub use config::{RunConfigFile, Settings};
use output::{sig12, Sink};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("one or more reproduction checks failed")]
    Acceptance,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io { .. } => 2,
            CliError::Acceptance => 3,
        }
    }
}

impl From<crate::error::Error> for CliError {
    fn from(e: crate::error::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvaluatorArg {
    Expansion,
    Oracle,
}

impl From<EvaluatorArg> for Evaluator {
    fn from(e: EvaluatorArg) -> Self {
        match e {
            EvaluatorArg::Expansion => Evaluator::Expansion,
            EvaluatorArg::Oracle => Evaluator::Oracle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Theta13,
    Alpha,
    DeltaCp,
}

impl From<AxisArg> for SweepAxis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::Theta13 => SweepAxis::Theta13,
            AxisArg::Alpha => SweepAxis::Alpha,
            AxisArg::DeltaCp => SweepAxis::DeltaCp,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "triflavor-lgi",
    version,
    about = "Leggett-Garg correlators for three-flavor neutrino oscillations in matter"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Set the Dirac phase to zero.
    #[arg(long, global = true)]
    pub no_cp: bool,
    /// Override θ13, degrees.
    #[arg(long, global = true, value_name = "DEG")]
    pub theta13: Option<f64>,
    /// Override the mass hierarchy parameter α.
    #[arg(long, global = true, value_name = "VAL")]
    pub alpha: Option<f64>,
    /// Probability model used for correlators and scans.
    #[arg(long, global = true, value_enum)]
    pub evaluator: Option<EvaluatorArg>,
    /// Monte Carlo seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Switch off the matter potential.
    #[arg(long, global = true)]
    pub vacuum: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate P(ν_e → ν_β) against baseline.
    Probability {
        /// Comma-separated lengths in km; overrides the range options.
        #[arg(long, value_delimiter = ',', value_name = "KM,...")]
        lengths: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 2000.0)]
        to: f64,
        #[arg(long, default_value_t = 201)]
        steps: usize,
        /// Add exact-propagation columns next to the expansion.
        #[arg(long)]
        both: bool,
    },
    /// Evaluate C and its pair correlators at one schedule.
    Correlator {
        #[arg(long, value_name = "KM")]
        l1: Option<f64>,
        #[arg(long, value_name = "KM")]
        dl: Option<f64>,
        /// Emit one CSV row instead of key = value lines.
        #[arg(long)]
        csv: bool,
    },
    /// Evaluate C on the configured grid.
    Scan {
        /// Hold L1 fixed and scan ΔL only.
        #[arg(long, value_name = "KM")]
        fixed_l1: Option<f64>,
    },
    /// Re-maximize C for each value of one parameter.
    Sweep {
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated values (degrees for angles); defaults from config.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Emit C against ΔL at this fixed L1 for each value instead of maxima.
        #[arg(long, value_name = "KM")]
        curves_at_l1: Option<f64>,
    },
    /// Monte Carlo estimate of C under negative-result measurements.
    Simulate {
        /// Trials per pair.
        #[arg(long)]
        n: Option<u64>,
        #[arg(long, value_name = "KM")]
        l1: Option<f64>,
        #[arg(long, value_name = "KM")]
        dl: Option<f64>,
    },
    /// Recompute the reference maxima and compare.
    Reproduce,
    /// Print the normalized settings.
    Config,
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn settings_from(cli: &Cli) -> Result<Settings, CliError> {
    let file = match &cli.config {
        Some(path) => RunConfigFile::load(path)?,
        None => RunConfigFile::default(),
    };
    let mut s = file.into_settings()?;
    if let Some(deg) = cli.theta13 {
        if !(0.0..=90.0).contains(&deg) {
            return Err(CliError::Validation(format!(
                "--theta13: {deg} is outside [0, 90] degrees"
            )));
        }
        s.params = s.params.with_theta13(deg.to_radians());
    }
    if let Some(alpha) = cli.alpha {
        if !alpha.is_finite() {
            return Err(CliError::Validation("--alpha: must be finite".into()));
        }
        s.params = s.params.with_alpha(alpha);
    }
    if cli.no_cp {
        s.params = s.params.with_delta_cp(0.0);
    }
    if cli.vacuum {
        s.params = s.params.with_potential(0.0);
    }
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(e) = cli.evaluator {
        s.evaluator = e.into();
    }
    s.params.validate()?;
    Ok(s)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let settings = settings_from(cli)?;
    let mut sink = Sink::open(cli.out.as_deref())?;
    let outcome = match &cli.command {
        Command::Probability {
            lengths,
            from,
            to,
            steps,
            both,
        } => {
            let lengths = if lengths.is_empty() {
                let grid = ScanGrid::new((*from, *to, *steps), (0.0, 0.0, 1))
                    .map_err(|e| CliError::Validation(format!("--from/--to/--steps: {e}")))?;
                (0..*steps).map(|i| grid.l1_at(i)).collect()
            } else {
                lengths.clone()
            };
            cmd_probability(&settings, &lengths, *both, &mut sink)
        }
        Command::Correlator { l1, dl, csv } => {
            let schedule = BaselineSchedule::new(
                l1.unwrap_or(settings.schedule.l1),
                dl.unwrap_or(settings.schedule.spacing),
            )?;
            cmd_correlator(&settings, schedule, *csv, &mut sink)
        }
        Command::Scan { fixed_l1 } => cmd_scan(&settings, *fixed_l1, &mut sink),
        Command::Sweep {
            axis,
            values,
            curves_at_l1,
        } => cmd_sweep(&settings, (*axis).into(), values, *curves_at_l1, &mut sink),
        Command::Simulate { n, l1, dl } => {
            let schedule = BaselineSchedule::new(
                l1.unwrap_or(settings.schedule.l1),
                dl.unwrap_or(settings.schedule.spacing),
            )?;
            cmd_simulate(&settings, schedule, n.unwrap_or(settings.n_runs), &mut sink)
        }
        Command::Reproduce => cmd_reproduce(&settings, &mut sink),
        Command::Config => cmd_config(&settings, &mut sink),
    };
    let flushed = sink.finish();
    outcome.and(flushed)
}

pub fn cmd_probability(
    settings: &Settings,
    lengths: &[f64],
    both: bool,
    sink: &mut Sink,
) -> Result<(), CliError> {
    if let Some(bad) = lengths.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(CliError::Validation(format!(
            "--lengths: {bad} is not a nonnegative length"
        )));
    }
    let p = &settings.params;
    let propagator = (both || settings.evaluator == Evaluator::Oracle).then(|| Propagator::new(p));
    let exact_row = |l: f64| {
        propagator
            .as_ref()
            .map(|prop| prop.transition(l).row(Flavor::E))
    };
    if both {
        sink.line("L_km,P_e,P_mu,P_tau,P_e_exact,P_mu_exact,P_tau_exact")?;
    } else {
        sink.line("L_km,P_e,P_mu,P_tau,evaluator")?;
    }
    for &l in lengths {
        let mut cells = vec![sig12(l)];
        if both || settings.evaluator == Evaluator::Expansion {
            let probs = flavor_probabilities_from_e(p, l).as_array();
            cells.extend(probs.iter().map(|&x| sig12(x)));
        }
        if let Some(row) = exact_row(l) {
            cells.extend(row.iter().map(|&x| sig12(x)));
        }
        if !both {
            cells.push(settings.evaluator.name().into());
        }
        sink.csv_row(&cells)?;
    }
    Ok(())
}

pub fn cmd_correlator(
    settings: &Settings,
    schedule: BaselineSchedule,
    csv: bool,
    sink: &mut Sink,
) -> Result<(), CliError> {
    let r = match settings.evaluator {
        Evaluator::Expansion => lgi_correlator(&settings.params, schedule),
        Evaluator::Oracle => Propagator::new(&settings.params).lgi_correlator(schedule),
    };
    let fields = [
        ("l1_km", schedule.l1),
        ("dl_km", schedule.spacing),
        ("c12", r.c12),
        ("c23", r.c23),
        ("c34", r.c34),
        ("c14", r.c14),
        ("c_total", r.c_total),
    ];
    if csv {
        let mut header: Vec<&str> = fields.iter().map(|f| f.0).collect();
        header.push("evaluator");
        sink.csv_row(&header)?;
        let mut row: Vec<String> = fields.iter().map(|f| sig12(f.1)).collect();
        row.push(settings.evaluator.name().into());
        sink.csv_row(&row)
    } else {
        sink.key_value("evaluator", settings.evaluator.name())?;
        for (k, v) in fields {
            sink.key_value(k, sig12(v))?;
        }
        sink.key_value("violation", sig12(r.violation()))
    }
}

pub fn cmd_scan(
    settings: &Settings,
    fixed_l1: Option<f64>,
    sink: &mut Sink,
) -> Result<(), CliError> {
    let g = settings.grid;
    let grid = match fixed_l1 {
        Some(l1) => {
            let grid = ScanGrid::fixed_l1(l1, g.dl_min, g.dl_max, g.dl_steps);
            grid.validate()?;
            grid
        }
        None => g,
    };
    let surface = grid_scan(&settings.params, &grid, settings.evaluator)?;
    sink.line("l1_km,dl_km,c")?;
    for s in &surface.samples {
        sink.csv_row(&[sig12(s.l1), sig12(s.dl), sig12(s.c)])?;
    }
    let best = maximize(
        &settings.params,
        &grid,
        settings.evaluator,
        &RefineOptions::default(),
    )?;
    eprintln!(
        "maximum: C* = {} at L1 = {} km, dL = {} km (refined: {})",
        sig12(best.c_star),
        sig12(best.l1_star),
        sig12(best.dl_star),
        best.refined
    );
    Ok(())
}

fn axis_column(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::Theta13 => "theta13_deg",
        SweepAxis::Alpha => "alpha",
        SweepAxis::DeltaCp => "delta_cp_deg",
    }
}

fn axis_display(axis: SweepAxis, internal: f64) -> f64 {
    match axis {
        SweepAxis::Alpha => internal,
        SweepAxis::Theta13 | SweepAxis::DeltaCp => internal.to_degrees(),
    }
}

pub fn cmd_sweep(
    settings: &Settings,
    axis: SweepAxis,
    values: &[f64],
    curves_at_l1: Option<f64>,
    sink: &mut Sink,
) -> Result<(), CliError> {
    let internal: Vec<f64> = if values.is_empty() {
        match axis {
            SweepAxis::Theta13 => settings.sweep.theta13.clone(),
            SweepAxis::Alpha => settings.sweep.alpha.clone(),
            SweepAxis::DeltaCp => settings.sweep.delta_cp.clone(),
        }
    } else {
        match axis {
            SweepAxis::Alpha => values.to_vec(),
            SweepAxis::Theta13 | SweepAxis::DeltaCp => {
                values.iter().map(|d| d.to_radians()).collect()
            }
        }
    };
    let column = axis_column(axis);

    if let Some(l1) = curves_at_l1 {
        let g = settings.grid;
        let grid = ScanGrid::fixed_l1(l1, g.dl_min, g.dl_max, g.dl_steps);
        grid.validate()?;
        sink.line(&format!("{column},l1_km,dl_km,c"))?;
        for &v in &internal {
            let p = axis.apply(&settings.params, v);
            p.validate()?;
            let surface = grid_scan(&p, &grid, settings.evaluator)?;
            for s in &surface.samples {
                sink.csv_row(&[
                    sig12(axis_display(axis, v)),
                    sig12(s.l1),
                    sig12(s.dl),
                    sig12(s.c),
                ])?;
            }
        }
        return Ok(());
    }

    let points = parameter_sweep(
        &settings.params,
        axis,
        &internal,
        &settings.grid,
        settings.evaluator,
        settings.sweep.refine,
    )?;
    sink.line(&format!("{column},l1_star_km,dl_star_km,c_star,refined"))?;
    for pt in points {
        let r = pt.report;
        sink.csv_row(&[
            sig12(axis_display(axis, pt.value)),
            sig12(r.l1_star),
            sig12(r.dl_star),
            sig12(r.c_star),
            r.refined.to_string(),
        ])?;
    }
    Ok(())
}

pub fn cmd_simulate(
    settings: &Settings,
    schedule: BaselineSchedule,
    n_runs: u64,
    sink: &mut Sink,
) -> Result<(), CliError> {
    if n_runs == 0 {
        return Err(CliError::Validation("--n: must be at least 1".into()));
    }
    let est = simulate_lgi(&settings.params, schedule, n_runs, settings.seed)?;
    let exact = Propagator::new(&settings.params).lgi_correlator(schedule);
    sink.key_value("seed", settings.seed)?;
    sink.key_value("n_runs_per_pair", n_runs)?;
    sink.key_value("l1_km", sig12(schedule.l1))?;
    sink.key_value("dl_km", sig12(schedule.spacing))?;
    for (name, pair) in ["c12", "c23", "c34", "c14"].iter().zip(&est.pairs) {
        let (a, b) = pair.config.pair;
        sink.key_value(
            &format!("{name}.lengths_km"),
            format!("{} {}", sig12(a), sig12(b)),
        )?;
        for (label, e) in [
            ("p_pp", pair.p_pp),
            ("p_pm", pair.p_pm),
            ("p_mp", pair.p_mp),
            ("p_mm", pair.p_mm),
            ("estimate", pair.c12_hat),
        ] {
            sink.key_value(&format!("{name}.{label}"), sig12(e.value))?;
            sink.key_value(&format!("{name}.{label}_err"), sig12(e.std_error))?;
        }
        let [used_e, used_not_e] = pair.n_used();
        let [ret_e, ret_not_e] = pair.retention();
        sink.key_value(&format!("{name}.retained_trigger_on_e"), used_e)?;
        sink.key_value(&format!("{name}.retained_trigger_on_not_e"), used_not_e)?;
        sink.key_value(&format!("{name}.retention_trigger_on_e"), sig12(ret_e))?;
        sink.key_value(
            &format!("{name}.retention_trigger_on_not_e"),
            sig12(ret_not_e),
        )?;
    }
    sink.key_value("c_total", sig12(est.c_total.value))?;
    sink.key_value("c_total_err", sig12(est.c_total.std_error))?;
    sink.key_value("c_total_exact", sig12(exact.c_total))?;
    if est.c_total.std_error > 0.0 {
        let sigmas = (est.c_total.value - 2.0) / est.c_total.std_error;
        sink.key_value("violation_sigmas", sig12(sigmas))?;
    }
    Ok(())
}

pub fn cmd_reproduce(settings: &Settings, sink: &mut Sink) -> Result<(), CliError> {
    let report = reproduce(&settings.params, &settings.grid, settings.evaluator)?;
    for job in report.jobs() {
        let r = job.report;
        sink.line(&format!(
            "# {}: C* = {} at L1 = {} km, dL = {} km ({} evaluations)",
            job.name,
            sig12(r.c_star),
            sig12(r.l1_star),
            sig12(r.dl_star),
            r.evaluations
        ))?;
    }
    for check in report.checks() {
        sink.line(&check.to_string())?;
    }
    for (key, value) in &report.info {
        sink.line(&format!("INFO {key}: {value}"))?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Acceptance)
    }
}

pub fn cmd_config(settings: &Settings, sink: &mut Sink) -> Result<(), CliError> {
    let p = &settings.params;
    let list = |v: &[f64]| v.iter().map(|&x| sig12(x)).collect::<Vec<_>>().join(" ");
    let rows: Vec<(&str, String)> = vec![
        ("dm21_sq_ev2", sig12(p.dm21_sq)),
        ("dm31_sq_ev2", sig12(p.dm31_sq)),
        ("theta12_rad", sig12(p.theta12)),
        ("theta13_rad", sig12(p.theta13)),
        ("theta23_rad", sig12(p.theta23)),
        ("delta_cp_rad", sig12(p.delta_cp)),
        ("energy_gev", sig12(p.energy)),
        ("potential_ev", sig12(p.potential)),
        ("alpha", sig12(p.alpha())),
        ("alpha_overridden", p.alpha_override.is_some().to_string()),
        ("matter_parameter", sig12(p.matter_parameter())),
        ("schedule.l1_km", sig12(settings.schedule.l1)),
        ("schedule.spacing_km", sig12(settings.schedule.spacing)),
        (
            "grid.l1_km",
            format!(
                "{} {} {}",
                sig12(settings.grid.l1_min),
                sig12(settings.grid.l1_max),
                settings.grid.l1_steps
            ),
        ),
        (
            "grid.dl_km",
            format!(
                "{} {} {}",
                sig12(settings.grid.dl_min),
                sig12(settings.grid.dl_max),
                settings.grid.dl_steps
            ),
        ),
        ("sweep.theta13_rad", list(&settings.sweep.theta13)),
        ("sweep.alpha", list(&settings.sweep.alpha)),
        ("sweep.delta_cp_rad", list(&settings.sweep.delta_cp)),
        ("sweep.refine", settings.sweep.refine.to_string()),
        ("simulation.n_runs", settings.n_runs.to_string()),
        ("simulation.seed", settings.seed.to_string()),
        ("evaluator", settings.evaluator.name().to_string()),
    ];
    for (k, v) in rows {
        sink.key_value(k, v)?;
    }
    Ok(())
}
