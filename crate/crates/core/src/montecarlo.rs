//! Monte Carlo simulation of negative-result measurements.
//!
//! A detector placed on one outcome channel flags runs where the neutrino is
//! found there; those runs are discarded and the surviving runs carry a known
//! first Q value without having interacted. Two orientations are run, half
//! the budget each:
//!
//! * [`Orientation::TriggerOnE`] keeps runs with `Q1 = −1`,
//! * [`Orientation::TriggerOnNotE`] keeps runs with `Q1 = +1`.
//!
//! The marginal `m = P(Q1 = +1)` is estimated from the first-stage counts of
//! both orientations (triggered and untriggered alike), and each orientation
//! supplies the conditional frequency of `Q2 = +1` for its retained sign. The
//! scripted probabilities are then `P_ab = P(Q1 = a) · P(Q2 = b | Q1 = a)`.
//!
//! Random numbers come from ChaCha8 seeded with the user seed. Each block of
//! [`BLOCK_TRIALS`] trials gets its own stream id
//!
//! ```text
//! stream = (pair index << 48) | (orientation << 40) | block index
//! ```
//!
//! so results do not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correlator::{BaselineSchedule, CorrelatorResult};
use crate::error::{Error, Result};
use crate::oracle::{Propagator, TransitionMatrix};
use crate::params::{Flavor, OscillationParams};

/// Trials per RNG stream.
pub const BLOCK_TRIALS: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Detector on the ν_e channel; retained runs have `Q1 = −1`.
    TriggerOnE,
    /// Detector on the ν_μ and ν_τ channels; retained runs have `Q1 = +1`.
    TriggerOnNotE,
}

impl Orientation {
    pub fn name(self) -> &'static str {
        match self {
            Orientation::TriggerOnE => "trigger-on-e",
            Orientation::TriggerOnNotE => "trigger-on-not-e",
        }
    }

    fn code(self) -> u64 {
        match self {
            Orientation::TriggerOnE => 0,
            Orientation::TriggerOnNotE => 1,
        }
    }

    fn triggers(self, flavor: Flavor) -> bool {
        match self {
            Orientation::TriggerOnE => flavor == Flavor::E,
            Orientation::TriggerOnNotE => flavor != Flavor::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub n_runs: u64,
    pub seed: u64,
    /// First and second measurement lengths, km.
    pub pair: (f64, f64),
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::domain("n_runs", 0.0, "at least one run is required"));
        }
        let (first, second) = self.pair;
        if !first.is_finite() || first < 0.0 {
            return Err(Error::domain(
                "pair.first",
                first,
                "must be finite and nonnegative",
            ));
        }
        if !second.is_finite() || second < first {
            return Err(Error::Ordering { first, second });
        }
        Ok(())
    }
}

/// Raw counts from one orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OrientationCounts {
    pub trials: u64,
    pub triggered: u64,
    /// Untriggered runs whose second measurement gave `Q2 = +1`.
    pub retained_plus: u64,
}

impl OrientationCounts {
    pub fn retained(&self) -> u64 {
        self.trials - self.triggered
    }

    fn merge(self, other: Self) -> Self {
        OrientationCounts {
            trials: self.trials + other.trials,
            triggered: self.triggered + other.triggered,
            retained_plus: self.retained_plus + other.retained_plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEstimate {
    pub p_pp: Estimate,
    pub p_pm: Estimate,
    pub p_mp: Estimate,
    pub p_mm: Estimate,
    pub c12_hat: Estimate,
    /// Counts for `[TriggerOnE, TriggerOnNotE]`.
    pub counts: [OrientationCounts; 2],
    pub config: RunConfig,
}

impl PairEstimate {
    /// Retained runs per orientation.
    pub fn n_used(&self) -> [u64; 2] {
        self.counts.map(|c| c.retained())
    }

    /// Fraction of trials retained per orientation.
    pub fn retention(&self) -> [f64; 2] {
        self.counts.map(|c| c.retained() as f64 / c.trials as f64)
    }

    pub fn probability_sum(&self) -> f64 {
        self.p_pp.value + self.p_pm.value + self.p_mp.value + self.p_mm.value
    }

    fn from_counts(
        config: RunConfig,
        on_e: OrientationCounts,
        on_not_e: OrientationCounts,
    ) -> Result<Self> {
        if on_e.retained() == 0 {
            return Err(Error::Estimation {
                orientation: Orientation::TriggerOnE.name(),
            });
        }
        if on_not_e.retained() == 0 {
            return Err(Error::Estimation {
                orientation: Orientation::TriggerOnNotE.name(),
            });
        }
        let n = (on_e.trials + on_not_e.trials) as f64;
        let m = (on_e.triggered + on_not_e.retained()) as f64 / n;
        let r_plus = on_not_e.retained() as f64;
        let r_minus = on_e.retained() as f64;
        let a = on_not_e.retained_plus as f64 / r_plus;
        let b = on_e.retained_plus as f64 / r_minus;

        let var_m = m * (1.0 - m) / n;
        let var_a = a * (1.0 - a) / r_plus;
        let var_b = b * (1.0 - b) / r_minus;
        let est = |value: f64, var: f64| Estimate {
            value,
            std_error: var.max(0.0).sqrt(),
        };

        let p_pp = est(m * a, a * a * var_m + m * m * var_a);
        let p_pm = est(m * (1.0 - a), (1.0 - a).powi(2) * var_m + m * m * var_a);
        let p_mp = est((1.0 - m) * b, b * b * var_m + (1.0 - m).powi(2) * var_b);
        let p_mm = est(
            (1.0 - m) * (1.0 - b),
            (1.0 - b).powi(2) * var_m + (1.0 - m).powi(2) * var_b,
        );
        // 1 − 2·P(Q1 ≠ Q2); equal to p_pp − p_pm − p_mp + p_mm
        let c = 1.0 - 2.0 * (p_pm.value + p_mp.value);
        let var_c = 4.0 * (a + b - 1.0).powi(2) * var_m
            + 4.0 * m * m * var_a
            + 4.0 * (1.0 - m).powi(2) * var_b;
        Ok(PairEstimate {
            p_pp,
            p_pm,
            p_mp,
            p_mm,
            c12_hat: est(c, var_c),
            counts: [on_e, on_not_e],
            config,
        })
    }
}

fn sample_flavor(row: &[f64; 3], u: f64) -> Flavor {
    if u < row[0] {
        Flavor::E
    } else if u < row[0] + row[1] {
        Flavor::Mu
    } else {
        Flavor::Tau
    }
}

fn stream_id(pair_index: u64, orientation: Orientation, block: u64) -> u64 {
    (pair_index << 48) | (orientation.code() << 40) | block
}

/// Runs `trials` trials in one orientation.
pub fn simulate_orientation(
    first: &TransitionMatrix,
    second: &TransitionMatrix,
    orientation: Orientation,
    trials: u64,
    seed: u64,
    pair_index: u64,
) -> OrientationCounts {
    let e_row = first.row(Flavor::E);
    let rows = Flavor::ALL.map(|f| second.row(f));
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream_id(pair_index, orientation, block));
            let len = BLOCK_TRIALS.min(trials - block * BLOCK_TRIALS);
            let mut counts = OrientationCounts {
                trials: len,
                ..Default::default()
            };
            for _ in 0..len {
                let a = sample_flavor(&e_row, rng.random());
                if orientation.triggers(a) {
                    counts.triggered += 1;
                    continue;
                }
                let b = sample_flavor(&rows[a.index()], rng.random());
                if b == Flavor::E {
                    counts.retained_plus += 1;
                }
            }
            counts
        })
        .reduce(OrientationCounts::default, OrientationCounts::merge)
}

fn simulate_pair_indexed(
    propagator: &Propagator,
    config: RunConfig,
    pair_index: u64,
) -> Result<PairEstimate> {
    config.validate()?;
    let (l_first, l_second) = config.pair;
    let first = propagator.transition(l_first);
    let second = propagator.transition(l_second - l_first);
    let half = config.n_runs / 2;
    let run = |orientation, trials| {
        simulate_orientation(
            &first,
            &second,
            orientation,
            trials,
            config.seed,
            pair_index,
        )
    };
    let on_e = run(Orientation::TriggerOnE, half);
    let on_not_e = run(Orientation::TriggerOnNotE, config.n_runs - half);
    PairEstimate::from_counts(config, on_e, on_not_e)
}

pub fn simulate_pair(params: &OscillationParams, config: RunConfig) -> Result<PairEstimate> {
    simulate_pair_indexed(&Propagator::new(params), config, 0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LgiEstimate {
    /// Pairs (l1,l2), (l2,l3), (l3,l4), (l1,l4).
    pub pairs: [PairEstimate; 4],
    pub c_total: Estimate,
    pub schedule: BaselineSchedule,
}

impl LgiEstimate {
    pub fn correlator(&self) -> CorrelatorResult {
        let [c12, c23, c34, c14] = self.pairs.map(|p| p.c12_hat.value);
        CorrelatorResult::from_pairs(self.schedule, c12, c23, c34, c14)
    }
}

/// Simulates all four pairs with `n_runs` trials each; pair `k` uses
/// streams tagged with index `k`.
pub fn simulate_lgi(
    params: &OscillationParams,
    schedule: BaselineSchedule,
    n_runs: u64,
    seed: u64,
) -> Result<LgiEstimate> {
    let propagator = Propagator::new(params);
    let [l1, l2, l3, l4] = schedule.lengths();
    let pairs = [(l1, l2), (l2, l3), (l3, l4), (l1, l4)];
    let mut out = Vec::with_capacity(4);
    for (k, pair) in pairs.into_iter().enumerate() {
        let config = RunConfig { n_runs, seed, pair };
        out.push(simulate_pair_indexed(&propagator, config, k as u64)?);
    }
    let pairs: [PairEstimate; 4] = out.try_into().expect("four pairs");
    let c = pairs[0].c12_hat.value + pairs[1].c12_hat.value + pairs[2].c12_hat.value
        - pairs[3].c12_hat.value;
    let var: f64 = pairs.iter().map(|p| p.c12_hat.std_error.powi(2)).sum();
    Ok(LgiEstimate {
        pairs,
        c_total: Estimate {
            value: c,
            std_error: var.sqrt(),
        },
        schedule,
    })
}
