//! Locating maxima of `C(L1, ΔL)`.
//!
//! A deterministic two-stage search: evaluate `C` on a rectangular grid
//! (nodes are independent and evaluated in parallel), take the best node and
//! polish it with a Nelder-Mead simplex, or with golden-section search on ΔL
//! alone when L1 is pinned.
//!
//! The surface is very flat along L1 near its maxima (C changes by ~1e-7 over
//! a km), so refinement tolerances are set well below the km scale.

use rayon::prelude::*;

use crate::correlator::{lgi_correlator, BaselineSchedule};
use crate::error::{Error, Result};
use crate::oracle::Propagator;
use crate::params::OscillationParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluator {
    /// Series-expansion probabilities.
    #[default]
    Expansion,
    /// Exact propagation.
    Oracle,
}

impl Evaluator {
    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Expansion => "expansion",
            Evaluator::Oracle => "oracle",
        }
    }
}

/// `C` as a function of `(L1, ΔL)` for one parameter point.
pub struct Objective {
    params: OscillationParams,
    propagator: Option<Propagator>,
}

impl Objective {
    pub fn new(params: &OscillationParams, evaluator: Evaluator) -> Self {
        let propagator = match evaluator {
            Evaluator::Expansion => None,
            Evaluator::Oracle => Some(Propagator::new(params)),
        };
        Objective {
            params: *params,
            propagator,
        }
    }

    /// `C` at a point; `−∞` outside the physical quadrant.
    pub fn value(&self, l1: f64, dl: f64) -> f64 {
        if !(l1 >= 0.0 && dl >= 0.0) {
            return f64::NEG_INFINITY;
        }
        let schedule = BaselineSchedule { l1, spacing: dl };
        match &self.propagator {
            Some(prop) => prop.lgi_correlator(schedule).c_total,
            None => lgi_correlator(&self.params, schedule).c_total,
        }
    }
}

/// Rectangular grid over `(L1, ΔL)` in km; `*_steps` counts nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub l1_min: f64,
    pub l1_max: f64,
    pub dl_min: f64,
    pub dl_max: f64,
    pub l1_steps: usize,
    pub dl_steps: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            l1_min: 0.0,
            l1_max: 1000.0,
            dl_min: 0.0,
            dl_max: 3000.0,
            l1_steps: 101,
            dl_steps: 301,
        }
    }
}

impl ScanGrid {
    pub fn new(
        (l1_min, l1_max, l1_steps): (f64, f64, usize),
        (dl_min, dl_max, dl_steps): (f64, f64, usize),
    ) -> Result<Self> {
        let grid = ScanGrid {
            l1_min,
            l1_max,
            dl_min,
            dl_max,
            l1_steps,
            dl_steps,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// L1 ∈ [0, 1500] km at 10 km spacing; reaches the higher basin near
    /// L1 ≈ 1250 km.
    pub fn wide() -> Self {
        ScanGrid {
            l1_max: 1500.0,
            l1_steps: 151,
            ..ScanGrid::default()
        }
    }

    pub fn point(l1: f64, dl: f64) -> Self {
        ScanGrid {
            l1_min: l1,
            l1_max: l1,
            dl_min: dl,
            dl_max: dl,
            l1_steps: 1,
            dl_steps: 1,
        }
    }

    pub fn fixed_l1(l1: f64, dl_min: f64, dl_max: f64, dl_steps: usize) -> Self {
        ScanGrid {
            l1_min: l1,
            l1_max: l1,
            dl_min,
            dl_max,
            l1_steps: 1,
            dl_steps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| {
            Err(Error::InvalidGrid {
                what: "scan grid",
                reason,
            })
        };
        for (name, lo, hi, steps) in [
            ("l1", self.l1_min, self.l1_max, self.l1_steps),
            ("dl", self.dl_min, self.dl_max, self.dl_steps),
        ] {
            if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 {
                return bad(format!("{name} bounds must be finite and nonnegative"));
            }
            if lo > hi {
                return bad(format!("{name}_min {lo} exceeds {name}_max {hi}"));
            }
            if steps == 0 {
                return bad(format!("{name}_steps must be at least 1"));
            }
        }
        Ok(())
    }

    fn node(min: f64, max: f64, steps: usize, i: usize) -> f64 {
        if steps == 1 {
            min
        } else {
            min + (max - min) * i as f64 / (steps - 1) as f64
        }
    }

    pub fn l1_at(&self, i: usize) -> f64 {
        Self::node(self.l1_min, self.l1_max, self.l1_steps, i)
    }

    pub fn dl_at(&self, j: usize) -> f64 {
        Self::node(self.dl_min, self.dl_max, self.dl_steps, j)
    }

    pub fn l1_spacing(&self) -> f64 {
        if self.l1_steps > 1 {
            (self.l1_max - self.l1_min) / (self.l1_steps - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dl_spacing(&self) -> f64 {
        if self.dl_steps > 1 {
            (self.dl_max - self.dl_min) / (self.dl_steps - 1) as f64
        } else {
            0.0
        }
    }

    pub fn len(&self) -> usize {
        self.l1_steps * self.dl_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_fixed_l1(&self) -> bool {
        self.l1_steps == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSample {
    pub l1: f64,
    pub dl: f64,
    pub c: f64,
}

/// Samples in row-major order: L1 outer, ΔL inner.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSurface {
    pub grid: ScanGrid,
    pub samples: Vec<ScanSample>,
}

impl ScanSurface {
    /// Best sample; ties go to the smallest L1, then the smallest ΔL.
    pub fn argmax(&self) -> Option<ScanSample> {
        let mut best: Option<ScanSample> = None;
        for s in &self.samples {
            if best.is_none_or(|b| s.c > b.c) {
                best = Some(*s);
            }
        }
        best
    }
}

pub fn grid_scan(
    params: &OscillationParams,
    grid: &ScanGrid,
    evaluator: Evaluator,
) -> Result<ScanSurface> {
    grid.validate()?;
    let objective = Objective::new(params, evaluator);
    let n_dl = grid.dl_steps;
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (l1, dl) = (grid.l1_at(k / n_dl), grid.dl_at(k % n_dl));
            ScanSample {
                l1,
                dl,
                c: objective.value(l1, dl),
            }
        })
        .collect();
    Ok(ScanSurface {
        grid: *grid,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximumReport {
    pub l1_star: f64,
    pub dl_star: f64,
    pub c_star: f64,
    pub evaluations: usize,
    /// False when refinement hit its evaluation cap (or was not run).
    pub refined: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    /// Simplex size / bracket width at which refinement stops, km.
    pub tolerance_km: f64,
    pub max_evaluations: usize,
    /// Initial simplex edge or half-bracket, km.
    pub initial_step_km: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            tolerance_km: 1e-4,
            max_evaluations: 20_000,
            initial_step_km: 5.0,
        }
    }
}

pub fn refine_maximum(
    params: &OscillationParams,
    seed: (f64, f64),
    evaluator: Evaluator,
) -> MaximumReport {
    refine_maximum_with(params, seed, evaluator, &RefineOptions::default())
}

pub fn refine_maximum_with(
    params: &OscillationParams,
    seed: (f64, f64),
    evaluator: Evaluator,
    options: &RefineOptions,
) -> MaximumReport {
    let objective = Objective::new(params, evaluator);
    let mut counter = Counted::new(|x: [f64; 2]| objective.value(x[0], x[1]));
    let mut best = ([seed.0, seed.1], counter.eval([seed.0, seed.1]));
    let mut step = options.initial_step_km;
    let mut converged = false;
    // restart from the current best until a fresh simplex no longer moves it
    for _ in 0..8 {
        let outcome = nelder_mead(&mut counter, best, step, options);
        let moved = (outcome.point[0] - best.0[0])
            .abs()
            .max((outcome.point[1] - best.0[1]).abs());
        if outcome.value >= best.1 {
            best = (outcome.point, outcome.value);
        }
        if !outcome.converged {
            converged = false;
            break;
        }
        converged = true;
        if moved < options.tolerance_km {
            break;
        }
        step = (moved * 2.0).clamp(10.0 * options.tolerance_km, options.initial_step_km);
    }
    MaximumReport {
        l1_star: best.0[0],
        dl_star: best.0[1],
        c_star: best.1,
        evaluations: counter.count,
        refined: converged,
    }
}

/// Maximizes over ΔL with L1 held fixed, by golden-section search on a
/// bracket around `seed_dl` that is re-centred if the optimum sits on an edge.
pub fn refine_spacing(
    params: &OscillationParams,
    l1: f64,
    seed_dl: f64,
    evaluator: Evaluator,
    options: &RefineOptions,
) -> MaximumReport {
    let objective = Objective::new(params, evaluator);
    let mut counter = Counted::new(|x: [f64; 2]| objective.value(x[0], x[1]));
    let mut centre = seed_dl;
    let mut best = (seed_dl, counter.eval([l1, seed_dl]));
    let half = options.initial_step_km;
    let mut refined = false;
    for _ in 0..64 {
        let lo = (centre - half).max(0.0);
        let hi = centre + half;
        let (x, fx) = golden_section_max(|dl| counter.eval([l1, dl]), lo, hi, options.tolerance_km);
        if fx >= best.1 {
            best = (x, fx);
        }
        let at_edge = (x - lo < 2.0 * options.tolerance_km && lo > 0.0)
            || hi - x < 2.0 * options.tolerance_km;
        if !at_edge {
            refined = true;
            break;
        }
        if counter.count > options.max_evaluations {
            break;
        }
        centre = x;
    }
    MaximumReport {
        l1_star: l1,
        dl_star: best.0,
        c_star: best.1,
        evaluations: counter.count,
        refined,
    }
}

/// Grid scan followed by refinement from the best node.
pub fn maximize(
    params: &OscillationParams,
    grid: &ScanGrid,
    evaluator: Evaluator,
    options: &RefineOptions,
) -> Result<MaximumReport> {
    let surface = grid_scan(params, grid, evaluator)?;
    let seed = surface.argmax().ok_or(Error::InvalidGrid {
        what: "scan grid",
        reason: "no nodes".into(),
    })?;
    let mut report = if grid.is_fixed_l1() {
        let opts = RefineOptions {
            initial_step_km: grid.dl_spacing().max(options.initial_step_km),
            ..*options
        };
        refine_spacing(params, seed.l1, seed.dl, evaluator, &opts)
    } else {
        let opts = RefineOptions {
            initial_step_km: grid
                .l1_spacing()
                .min(grid.dl_spacing())
                .max(options.initial_step_km)
                / 2.0,
            ..*options
        };
        refine_maximum_with(params, (seed.l1, seed.dl), evaluator, &opts)
    };
    report.evaluations += grid.len();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// θ13 in radians.
    Theta13,
    /// Mass hierarchy parameter, applied as an override.
    Alpha,
    /// δ_CP in radians.
    DeltaCp,
}

impl SweepAxis {
    pub fn apply(self, params: &OscillationParams, value: f64) -> OscillationParams {
        match self {
            SweepAxis::Theta13 => params.with_theta13(value),
            SweepAxis::Alpha => params.with_alpha(value),
            SweepAxis::DeltaCp => params.with_delta_cp(value),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Theta13 => "theta13",
            SweepAxis::Alpha => "alpha",
            SweepAxis::DeltaCp => "delta_cp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub report: MaximumReport,
}

/// Re-maximizes `C` for every value of one parameter.
pub fn parameter_sweep(
    params: &OscillationParams,
    axis: SweepAxis,
    values: &[f64],
    grid: &ScanGrid,
    evaluator: Evaluator,
    refine: bool,
) -> Result<Vec<SweepPoint>> {
    values
        .iter()
        .map(|&value| {
            let p = axis.apply(params, value);
            p.validate()?;
            let report = if refine {
                maximize(&p, grid, evaluator, &RefineOptions::default())?
            } else {
                let surface = grid_scan(&p, grid, evaluator)?;
                let best = surface.argmax().expect("validated grid is nonempty");
                MaximumReport {
                    l1_star: best.l1,
                    dl_star: best.dl,
                    c_star: best.c,
                    evaluations: grid.len(),
                    refined: false,
                }
            };
            Ok(SweepPoint { value, report })
        })
        .collect()
}

struct Counted<F> {
    func: F,
    count: usize,
}

impl<F: FnMut([f64; 2]) -> f64> Counted<F> {
    fn new(func: F) -> Self {
        Counted { func, count: 0 }
    }

    fn eval(&mut self, x: [f64; 2]) -> f64 {
        self.count += 1;
        (self.func)(x)
    }
}

struct SimplexOutcome {
    point: [f64; 2],
    value: f64,
    converged: bool,
}

fn nelder_mead<F: FnMut([f64; 2]) -> f64>(
    f: &mut Counted<F>,
    start: ([f64; 2], f64),
    step: f64,
    options: &RefineOptions,
) -> SimplexOutcome {
    let (x0, f0) = start;
    let mut simplex = vec![(x0, f0)];
    for axis in 0..2 {
        let mut x = x0;
        x[axis] += step;
        if f.eval(x) == f64::NEG_INFINITY {
            x[axis] = x0[axis] - step;
        }
        simplex.push((x, f.eval(x)));
    }

    let lerp =
        |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    loop {
        // descending by value: best first
        simplex.sort_by(|a, b| b.1.total_cmp(&a.1));
        let best = simplex[0];
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| (x[0] - best.0[0]).abs().max((x[1] - best.0[1]).abs()))
            .fold(0.0, f64::max);
        if size < options.tolerance_km {
            return SimplexOutcome {
                point: best.0,
                value: best.1,
                converged: true,
            };
        }
        if f.count >= options.max_evaluations {
            return SimplexOutcome {
                point: best.0,
                value: best.1,
                converged: false,
            };
        }

        let worst = simplex[2];
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let reflected = lerp(centroid, worst.0, -1.0);
        let fr = f.eval(reflected);
        if fr > simplex[0].1 {
            let expanded = lerp(centroid, worst.0, -2.0);
            let fe = f.eval(expanded);
            simplex[2] = if fe > fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr > simplex[1].1 {
            simplex[2] = (reflected, fr);
            continue;
        }
        let (contracted, accept_above) = if fr > worst.1 {
            (lerp(centroid, reflected, 0.5), fr)
        } else {
            (lerp(centroid, worst.0, 0.5), worst.1)
        };
        let fc = f.eval(contracted);
        if fc > accept_above {
            simplex[2] = (contracted, fc);
            continue;
        }
        for vertex in simplex.iter_mut().skip(1) {
            let x = lerp(best.0, vertex.0, 0.5);
            *vertex = (x, f.eval(x));
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of a unimodal function on `[lo, hi]`.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tolerance: f64,
) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tolerance {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx) = golden_section_max(|x| -(x - 1.234).powi(2) + 3.0, 0.0, 5.0, 1e-9);
        assert!((x - 1.234).abs() < 1e-6);
        assert!((fx - 3.0).abs() < 1e-15);
    }

    #[test]
    fn nelder_mead_on_quadratic() {
        let mut counted = Counted::new(|x: [f64; 2]| {
            -(x[0] - 3.0).powi(2) - 10.0 * (x[1] + 1.0).powi(2) - 0.5 * x[0] * x[1]
        });
        let start = ([0.0, 0.0], counted.eval([0.0, 0.0]));
        let options = RefineOptions {
            tolerance_km: 1e-9,
            ..RefineOptions::default()
        };
        let out = nelder_mead(&mut counted, start, 1.0, &options);
        assert!(out.converged);
        // stationary point: x = 6.5 / (2 − 1/80), y = −1 − x/40
        let x_star = 6.5 / (2.0 - 1.0 / 80.0);
        let y_star = -1.0 - x_star / 40.0;
        assert!((out.point[0] - x_star).abs() < 1e-6, "{:?}", out.point);
        assert!((out.point[1] - y_star).abs() < 1e-6);
    }

    #[test]
    fn grid_nodes() {
        let g = ScanGrid::default();
        assert_eq!(g.len(), 101 * 301);
        assert_eq!(g.l1_at(0), 0.0);
        assert_eq!(g.l1_at(100), 1000.0);
        assert_eq!(g.dl_at(300), 3000.0);
        assert_eq!(g.dl_spacing(), 10.0);
        let p = ScanGrid::point(1.0, 2.0);
        assert_eq!((p.l1_at(0), p.dl_at(0), p.len()), (1.0, 2.0, 1));
    }

    #[test]
    fn grid_validation() {
        assert!(ScanGrid::new((10.0, 5.0, 3), (0.0, 1.0, 2)).is_err());
        assert!(ScanGrid::new((0.0, 5.0, 0), (0.0, 1.0, 2)).is_err());
        assert!(ScanGrid::new((-1.0, 5.0, 2), (0.0, 1.0, 2)).is_err());
        assert!(ScanGrid::new((0.0, 5.0, 2), (0.0, 1.0, 2)).is_ok());
    }

    #[test]
    fn argmax_tie_break() {
        let grid = ScanGrid::new((0.0, 1.0, 2), (0.0, 1.0, 2)).unwrap();
        let s = |l1, dl, c| ScanSample { l1, dl, c };
        let surface = ScanSurface {
            grid,
            samples: vec![
                s(0.0, 0.0, 1.0),
                s(0.0, 1.0, 2.0),
                s(1.0, 0.0, 2.0),
                s(1.0, 1.0, 2.0),
            ],
        };
        assert_eq!(surface.argmax(), Some(s(0.0, 1.0, 2.0)));
    }

    #[test]
    fn zero_spacing_axis_gives_two() {
        let p = OscillationParams::reference();
        let grid = ScanGrid::new((0.0, 900.0, 7), (0.0, 0.0, 1)).unwrap();
        for ev in [Evaluator::Expansion, Evaluator::Oracle] {
            let surface = grid_scan(&p, &grid, ev).unwrap();
            assert!(surface.samples.iter().all(|s| (s.c - 2.0).abs() < 1e-12));
        }
    }

    #[test]
    fn objective_rejects_negative_lengths() {
        let obj = Objective::new(&OscillationParams::reference(), Evaluator::Expansion);
        assert_eq!(obj.value(-1.0, 10.0), f64::NEG_INFINITY);
        assert_eq!(obj.value(1.0, -10.0), f64::NEG_INFINITY);
    }
}
