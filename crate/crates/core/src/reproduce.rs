//! Reference maxima of `C` under four parameter settings, and the
//! differences between them.
//!
//! Each job re-maximizes `C` under one parameter change and compares value
//! and location with reference numbers. Tolerances: 5e-4 on `C`, 0.5 km
//! on locations near the headline point, 2 km on the θ13 = 0 and α = 0
//! locations, 1e-3 on the derived differences and 0.05 percentage points on
//! the excess over the classical bound.

use std::fmt;

use crate::error::Result;
use crate::optimize::{
    maximize, refine_maximum_with, refine_spacing, Evaluator, MaximumReport, RefineOptions,
    ScanGrid,
};
use crate::params::OscillationParams;

pub const FULL_C: f64 = 2.17036;
pub const FULL_L1: f64 = 140.15;
pub const FULL_DL: f64 = 1255.7;
pub const NO_THETA13_C: f64 = 2.07762;
pub const NO_THETA13_L1: f64 = 638.0;
pub const NO_THETA13_DL: f64 = 1376.34;
pub const NO_ALPHA_C: f64 = 2.09606;
pub const NO_ALPHA_DL: f64 = 1252.74;
pub const NO_CP_C: f64 = 2.16553;
pub const NO_CP_L1: f64 = 140.15;
pub const NO_CP_DL: f64 = 1253.8;
pub const THETA13_ENHANCEMENT: f64 = 0.09274;
pub const CP_ENHANCEMENT: f64 = 0.00483;
pub const EXCESS_PERCENT: f64 = 8.5;

pub const C_TOLERANCE: f64 = 5e-4;
pub const NEAR_TOLERANCE_KM: f64 = 0.5;
pub const WIDE_TOLERANCE_KM: f64 = 2.0;
pub const DELTA_TOLERANCE: f64 = 1e-3;
pub const PERCENT_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub target: f64,
    pub achieved: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(label: impl Into<String>, target: f64, achieved: f64, tolerance: f64) -> Self {
        Check {
            label: label.into(),
            target,
            achieved,
            tolerance,
        }
    }

    pub fn deviation(&self) -> f64 {
        (self.achieved - self.target).abs()
    }

    pub fn passed(&self) -> bool {
        self.deviation() <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: target {} achieved {:.6} |diff| {:.3e} tol {:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.label,
            self.target,
            self.achieved,
            self.deviation(),
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub name: &'static str,
    pub report: MaximumReport,
    pub checks: Vec<Check>,
}

impl Job {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    fn check_value(&mut self, target: f64) {
        let check = Check::new(
            format!("{} C*", self.name),
            target,
            self.report.c_star,
            C_TOLERANCE,
        );
        self.checks.push(check);
    }

    fn check_l1(&mut self, target: f64, tol: f64) {
        let check = Check::new(
            format!("{} L1*", self.name),
            target,
            self.report.l1_star,
            tol,
        );
        self.checks.push(check);
    }

    fn check_dl(&mut self, target: f64, tol: f64) {
        let check = Check::new(
            format!("{} dL*", self.name),
            target,
            self.report.dl_star,
            tol,
        );
        self.checks.push(check);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReproduceReport {
    pub full: Job,
    pub no_theta13: Job,
    /// α = 0 with L1 held at 140.15 km.
    pub no_alpha_fixed: Job,
    /// α = 0 with L1 free, refined in the basin of the full optimum.
    pub no_alpha_joint: Job,
    pub no_cp: Job,
    pub derived: Vec<Check>,
    /// Name/value lines that are reported but not judged.
    pub info: Vec<(String, String)>,
}

impl ReproduceReport {
    pub fn jobs(&self) -> [&Job; 5] {
        [
            &self.full,
            &self.no_theta13,
            &self.no_alpha_fixed,
            &self.no_alpha_joint,
            &self.no_cp,
        ]
    }

    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.jobs()
            .into_iter()
            .flat_map(|j| j.checks.iter())
            .chain(self.derived.iter())
    }

    pub fn passed(&self) -> bool {
        self.checks().all(Check::passed)
    }
}

fn job(name: &'static str, report: MaximumReport) -> Job {
    Job {
        name,
        report,
        checks: Vec::new(),
    }
}

/// Runs all jobs. `params` is the full-parameter point; each job modifies
/// one parameter of it.
pub fn reproduce(
    params: &OscillationParams,
    grid: &ScanGrid,
    evaluator: Evaluator,
) -> Result<ReproduceReport> {
    params.validate()?;
    let options = RefineOptions::default();

    let mut full = job("full", maximize(params, grid, evaluator, &options)?);
    full.check_value(FULL_C);
    full.check_l1(FULL_L1, NEAR_TOLERANCE_KM);
    full.check_dl(FULL_DL, NEAR_TOLERANCE_KM);

    let mut no_theta13 = job(
        "theta13=0",
        maximize(&params.with_theta13(0.0), grid, evaluator, &options)?,
    );
    no_theta13.check_value(NO_THETA13_C);
    no_theta13.check_l1(NO_THETA13_L1, WIDE_TOLERANCE_KM);
    no_theta13.check_dl(NO_THETA13_DL, WIDE_TOLERANCE_KM);

    // with α = 0 the surface is periodic with equal-height maxima; follow the
    // basin of the full-parameter optimum
    let no_alpha = params.with_alpha(0.0);
    let seed = (full.report.l1_star, full.report.dl_star);
    let mut no_alpha_fixed = job(
        "alpha=0 (L1 fixed)",
        refine_spacing(&no_alpha, FULL_L1, seed.1, evaluator, &options),
    );
    no_alpha_fixed.check_value(NO_ALPHA_C);
    no_alpha_fixed.check_dl(NO_ALPHA_DL, WIDE_TOLERANCE_KM);
    let mut no_alpha_joint = job(
        "alpha=0 (joint)",
        refine_maximum_with(&no_alpha, seed, evaluator, &options),
    );
    no_alpha_joint.check_value(NO_ALPHA_C);
    no_alpha_joint.check_dl(NO_ALPHA_DL, WIDE_TOLERANCE_KM);

    let mut no_cp = job(
        "delta_cp=0",
        maximize(&params.with_delta_cp(0.0), grid, evaluator, &options)?,
    );
    no_cp.check_value(NO_CP_C);
    no_cp.check_l1(NO_CP_L1, NEAR_TOLERANCE_KM);
    no_cp.check_dl(NO_CP_DL, NEAR_TOLERANCE_KM);

    let theta13_gain = full.report.c_star - no_theta13.report.c_star;
    let cp_gain = full.report.c_star - no_cp.report.c_star;
    let excess = 100.0 * (full.report.c_star - 2.0) / 2.0;
    let derived = vec![
        Check::new(
            "theta13 enhancement",
            THETA13_ENHANCEMENT,
            theta13_gain,
            DELTA_TOLERANCE,
        ),
        Check::new(
            "delta_cp enhancement",
            CP_ENHANCEMENT,
            cp_gain,
            DELTA_TOLERANCE,
        ),
        Check::new(
            "excess over classical bound (%)",
            EXCESS_PERCENT,
            excess,
            PERCENT_TOLERANCE,
        ),
    ];

    let global_alpha = maximize(&no_alpha, grid, evaluator, &options)?;
    let wide = maximize(params, &ScanGrid::wide(), evaluator, &options)?;
    let info = vec![
        (
            "theta13 enhancement (% of bound)".to_string(),
            format!("{:.3}", 100.0 * theta13_gain / 2.0),
        ),
        (
            "delta_cp enhancement (% of bound)".to_string(),
            format!("{:.3}", 100.0 * cp_gain / 2.0),
        ),
        ("alpha=0 grid maximum".to_string(), describe(&global_alpha)),
        ("full wide-grid maximum".to_string(), describe(&wide)),
    ];

    Ok(ReproduceReport {
        full,
        no_theta13,
        no_alpha_fixed,
        no_alpha_joint,
        no_cp,
        derived,
        info,
    })
}

fn describe(r: &MaximumReport) -> String {
    format!(
        "C* {:.6} at L1 {:.3} km, dL {:.3} km",
        r.c_star, r.l1_star, r.dl_star
    )
}
