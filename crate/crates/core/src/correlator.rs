//! Two-time correlators `C_ij = ⟨Q(L_i) Q(L_j)⟩` and the Leggett-Garg
//! combination `C = C12 + C23 + C34 − C14` over four equally spaced baselines.
//!
//! The dichotomic observable is `Q = +1` for ν_e and `−1` otherwise. Grouping
//! the nine joint probabilities by the Q value of the second outcome gives
//!
//! ```text
//! C(L, s) = P_e(L)·[2P_ee(s) − 1] − P_μ(L)·[2P_μe(s) − 1] − P_τ(L)·[2P_τe(s) − 1]
//! ```
//!
//! where the first factor is the unconditioned probability at the first
//! measurement (every pair starts from the ν_e source) and the brackets come
//! from the return-to-ν_e probabilities over the separation `s`.

use crate::error::{Error, Result};
use crate::expansion::{
    conditional_return_probabilities_with, flavor_probabilities_from_e, ReturnPhase,
};
use crate::params::OscillationParams;

/// Four measurement points `l1, l1 + s, l1 + 2s, l1 + 3s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineSchedule {
    pub l1: f64,
    pub spacing: f64,
}

impl BaselineSchedule {
    pub fn new(l1: f64, spacing: f64) -> Result<Self> {
        if !l1.is_finite() || l1 < 0.0 {
            return Err(Error::domain(
                "l1",
                l1,
                "first baseline must be nonnegative",
            ));
        }
        if !spacing.is_finite() || spacing < 0.0 {
            return Err(Error::domain(
                "spacing",
                spacing,
                "spacing must be nonnegative",
            ));
        }
        Ok(BaselineSchedule { l1, spacing })
    }

    pub fn lengths(&self) -> [f64; 4] {
        let s = self.spacing;
        [self.l1, self.l1 + s, self.l1 + 2.0 * s, self.l1 + 3.0 * s]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorResult {
    pub c12: f64,
    pub c23: f64,
    pub c34: f64,
    pub c14: f64,
    pub c_total: f64,
    pub schedule: BaselineSchedule,
}

impl CorrelatorResult {
    pub fn from_pairs(schedule: BaselineSchedule, c12: f64, c23: f64, c34: f64, c14: f64) -> Self {
        CorrelatorResult {
            c12,
            c23,
            c34,
            c14,
            c_total: c12 + c23 + c34 - c14,
            schedule,
        }
    }

    /// Amount by which `C` exceeds the macrorealist bound of 2.
    pub fn violation(&self) -> f64 {
        self.c_total - 2.0
    }

    /// Evaluates `C` from any pair-correlator function `(l_first, separation)`.
    pub fn assemble(schedule: BaselineSchedule, mut pair: impl FnMut(f64, f64) -> f64) -> Self {
        let [l1, l2, l3, _] = schedule.lengths();
        let s = schedule.spacing;
        let c12 = pair(l1, s);
        let c23 = pair(l2, s);
        let c34 = pair(l3, s);
        let c14 = pair(l1, 3.0 * s);
        Self::from_pairs(schedule, c12, c23, c34, c14)
    }
}

pub fn pair_correlator(params: &OscillationParams, l_first: f64, separation: f64) -> f64 {
    pair_correlator_with(params, l_first, separation, ReturnPhase::default())
}

pub fn pair_correlator_with(
    params: &OscillationParams,
    l_first: f64,
    separation: f64,
    convention: ReturnPhase,
) -> f64 {
    let first = flavor_probabilities_from_e(params, l_first);
    let back = conditional_return_probabilities_with(params, separation, convention);
    first.e * (2.0 * back.ee - 1.0)
        - first.mu * (2.0 * back.mu_to_e - 1.0)
        - first.tau * (2.0 * back.tau_to_e - 1.0)
}

pub fn lgi_correlator(params: &OscillationParams, schedule: BaselineSchedule) -> CorrelatorResult {
    lgi_correlator_with(params, schedule, ReturnPhase::default())
}

pub fn lgi_correlator_with(
    params: &OscillationParams,
    schedule: BaselineSchedule,
    convention: ReturnPhase,
) -> CorrelatorResult {
    CorrelatorResult::assemble(schedule, |l, s| {
        pair_correlator_with(params, l, s, convention)
    })
}
