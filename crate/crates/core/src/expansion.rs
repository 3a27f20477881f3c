//! Second-order series-expansion probabilities in α and sin θ13 for a ν_e
//! source in matter of constant density.
//!
//! With `Δ = Δm²₃₁L/4E` and `A = 2EV/Δm²₃₁` the expansion is built from two
//! kinematic factors,
//!
//! ```text
//! f = sin(AΔ) / A            (= sin(VL/2) / A)
//! g = sin((A − 1)Δ) / (A − 1)
//! ```
//!
//! and three mixing weights: `α² sin²2θ12` (solar), `4 s13²` (reactor) and
//! `2 α s13 sin2θ12 sin2θ23` (interference). The formulas are valid for
//! α, s13 ≪ 1 and GeV-scale energies; outside that domain a probability can
//! step marginally outside [0, 1]. Values are never clamped so that the three
//! probabilities keep summing to one exactly.

use crate::error::{Error, Result};
use crate::params::{Flavor, OscillationParams, KM_IN_INV_EV};

/// Below this |x| the ratio `sin(kx)/x` is evaluated by its Taylor series.
const SERIES_THRESHOLD: f64 = 1e-6;

/// `sin(k x) / x` with a third-order series near the removable singularity.
pub(crate) fn sin_ratio(k: f64, x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        k - k * k * k * x * x / 6.0
    } else {
        (k * x).sin() / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicFactors {
    /// Oscillation phase Δ.
    pub delta: f64,
    /// Matter parameter A.
    pub a_mat: f64,
    /// Solar factor sin(VL/2)/A.
    pub f: f64,
    /// Resonance factor sin((A−1)Δ)/(A−1).
    pub g: f64,
}

pub fn kinematic_factors(params: &OscillationParams, length: f64) -> KinematicFactors {
    let delta = params.phase(length);
    let a_mat = params.matter_parameter();
    let f = if a_mat.abs() < SERIES_THRESHOLD {
        sin_ratio(delta, a_mat)
    } else {
        (0.5 * params.potential * length * KM_IN_INV_EV).sin() / a_mat
    };
    let g = sin_ratio(delta, a_mat - 1.0);
    KinematicFactors { delta, a_mat, f, g }
}

/// The mixing-angle weights multiplying each kinematic structure.
#[derive(Debug, Clone, Copy)]
struct MixingWeights {
    solar: f64,
    reactor: f64,
    interference: f64,
    c23_sq: f64,
    s23_sq: f64,
}

impl MixingWeights {
    fn new(params: &OscillationParams) -> Self {
        let alpha = params.alpha();
        let s13 = params.theta13.sin();
        let sin_2t12 = (2.0 * params.theta12).sin();
        let sin_2t23 = (2.0 * params.theta23).sin();
        let (s23, c23) = params.theta23.sin_cos();
        MixingWeights {
            solar: alpha * alpha * sin_2t12 * sin_2t12,
            reactor: 4.0 * s13 * s13,
            interference: 2.0 * alpha * s13 * sin_2t12 * sin_2t23,
            c23_sq: c23 * c23,
            s23_sq: s23 * s23,
        }
    }

    /// Shared (ee, mu, tau) structure; `phase_factor` multiplies the
    /// interference term, which enters the μ row with + and the τ row with −.
    fn probabilities(&self, k: &KinematicFactors, phase_factor: f64) -> [f64; 3] {
        let solar = self.solar * k.f * k.f;
        let reactor = self.reactor * k.g * k.g;
        let interference = self.interference * phase_factor * k.f * k.g;
        [
            1.0 - solar - reactor,
            solar * self.c23_sq + reactor * self.s23_sq + interference,
            solar * self.s23_sq + reactor * self.c23_sq - interference,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlavorProbabilities {
    pub e: f64,
    pub mu: f64,
    pub tau: f64,
}

impl FlavorProbabilities {
    fn from_array([e, mu, tau]: [f64; 3]) -> Self {
        FlavorProbabilities { e, mu, tau }
    }

    pub fn get(&self, flavor: Flavor) -> f64 {
        match flavor {
            Flavor::E => self.e,
            Flavor::Mu => self.mu,
            Flavor::Tau => self.tau,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.e, self.mu, self.tau]
    }

    pub fn sum(&self) -> f64 {
        self.e + self.mu + self.tau
    }
}

/// Probabilities of finding ν_e, ν_μ, ν_τ at `length` km from a ν_e source.
pub fn flavor_probabilities_from_e(params: &OscillationParams, length: f64) -> FlavorProbabilities {
    let k = kinematic_factors(params, length);
    let phase = (k.delta - params.delta_cp).cos();
    FlavorProbabilities::from_array(MixingWeights::new(params).probabilities(&k, phase))
}

/// How the CP phase enters the second (return-to-ν_e) leg of a pair correlator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReturnPhase {
    /// `cos(Δ + δ) = cos(Δ − δ) − 2 sin δ sin Δ`, the time-reversed image of
    /// the forward ν_e → ν_μ channel. Agrees with exact evolution.
    #[default]
    TimeReversed,
    /// `cos(Δ − δ) − sin δ sin Δ`, which equals `cos Δ cos δ`. Kept for
    /// comparison; it does not match exact evolution for δ ≠ 0.
    CosineProduct,
}

impl ReturnPhase {
    pub fn factor(self, delta: f64, delta_cp: f64) -> f64 {
        match self {
            ReturnPhase::TimeReversed => (delta + delta_cp).cos(),
            ReturnPhase::CosineProduct => (delta - delta_cp).cos() - delta_cp.sin() * delta.sin(),
        }
    }
}

/// Probabilities of ending in ν_e after `separation` km, starting from each
/// flavor (ν_e, ν_μ, ν_τ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnProbabilities {
    pub ee: f64,
    pub mu_to_e: f64,
    pub tau_to_e: f64,
}

impl ReturnProbabilities {
    pub fn from_flavor(&self, flavor: Flavor) -> f64 {
        match flavor {
            Flavor::E => self.ee,
            Flavor::Mu => self.mu_to_e,
            Flavor::Tau => self.tau_to_e,
        }
    }
}

pub fn conditional_return_probabilities(
    params: &OscillationParams,
    separation: f64,
) -> ReturnProbabilities {
    conditional_return_probabilities_with(params, separation, ReturnPhase::default())
}

pub fn conditional_return_probabilities_with(
    params: &OscillationParams,
    separation: f64,
    convention: ReturnPhase,
) -> ReturnProbabilities {
    let k = kinematic_factors(params, separation);
    let phase = convention.factor(k.delta, params.delta_cp);
    let [ee, mu_to_e, tau_to_e] = MixingWeights::new(params).probabilities(&k, phase);
    ReturnProbabilities {
        ee,
        mu_to_e,
        tau_to_e,
    }
}

/// Joint probability of ν_e at `l1` followed by `target` at `l2`, treating the
/// first detection as a projective collapse onto ν_e.
pub fn joint_probability_e_then(
    params: &OscillationParams,
    target: Flavor,
    l1: f64,
    l2: f64,
) -> Result<f64> {
    if l2 < l1 {
        return Err(Error::Ordering {
            first: l1,
            second: l2,
        });
    }
    if l1 < 0.0 {
        return Err(Error::domain("l1", l1, "length must be nonnegative"));
    }
    let first = flavor_probabilities_from_e(params, l1).e;
    let second = flavor_probabilities_from_e(params, l2 - l1).get(target);
    Ok(first * second)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> OscillationParams {
        OscillationParams::reference()
    }

    #[test]
    fn zero_length_is_identity() {
        let p = reference();
        let k = kinematic_factors(&p, 0.0);
        assert_eq!((k.delta, k.f, k.g), (0.0, 0.0, 0.0));
        assert_eq!(k.a_mat, p.matter_parameter());
        let probs = flavor_probabilities_from_e(&p, 0.0);
        assert_eq!(probs.as_array(), [1.0, 0.0, 0.0]);
        let r = conditional_return_probabilities(&p, 0.0);
        assert_eq!((r.ee, r.mu_to_e, r.tau_to_e), (1.0, 0.0, 0.0));
    }

    #[test]
    fn reference_matter_parameter() {
        let k = kinematic_factors(&reference(), 100.0);
        assert!((k.a_mat - 0.092_307_692_307_692_3).abs() < 1e-15);
    }

    #[test]
    fn vacuum_limit_of_factors() {
        let p = reference().with_potential(0.0);
        let k = kinematic_factors(&p, 735.0);
        assert_eq!(k.a_mat, 0.0);
        assert!((k.f - k.delta).abs() < 1e-14);
        assert!((k.g - k.delta.sin()).abs() < 1e-14);

        // tiny but nonzero potential approaches the same limit
        let q = reference().with_potential(1e-22);
        let kq = kinematic_factors(&q, 735.0);
        assert!((kq.f - k.delta).abs() < 1e-9);
        assert!((kq.g - k.delta.sin()).abs() < 1e-9);
    }

    #[test]
    fn continuity_across_resonance() {
        // choose V so that A = 1 exactly, then perturb by ±1e-9 and ±2e-6
        let base = reference();
        let v_res = base.dm31_sq / (2.0 * base.energy_ev());
        let length = 900.0;
        let at = kinematic_factors(&base.with_potential(v_res), length);
        assert!((at.a_mat - 1.0).abs() < 1e-15);
        assert!((at.g - at.delta).abs() < 1e-12);
        for eps in [1e-9, -1e-9, 2e-6, -2e-6] {
            let k = kinematic_factors(&base.with_potential(v_res * (1.0 + eps)), length);
            let rel = (k.g - at.g).abs() / at.g.abs();
            let bound = if eps.abs() < 1e-6 { 1e-9 } else { 1e-8 };
            assert!(rel < bound, "eps {eps}: rel {rel}");
        }
    }

    #[test]
    fn sin_ratio_branches_agree() {
        for k in [0.5, 3.0, 9.0] {
            let x = SERIES_THRESHOLD * 1.0001;
            let direct = (k * x).sin() / x;
            assert!((sin_ratio(k, x * 0.9999) - direct).abs() < 1e-12 * k);
        }
    }

    #[test]
    fn regression_probabilities_at_140_km() {
        // 40-digit evaluation of the same closed forms (mpmath)
        let probs = flavor_probabilities_from_e(&reference(), 140.15);
        let expected = [
            0.984_068_449_822_705_7,
            0.007_522_721_040_475_553,
            0.008_408_829_136_818_796,
        ];
        for (got, want) in probs.as_array().iter().zip(expected) {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }

    #[test]
    fn regression_return_probabilities() {
        let p = reference();
        let tr = conditional_return_probabilities(&p, 1255.7);
        assert!((tr.ee - 0.971_883_106_390_558_8).abs() < 1e-13);
        assert!((tr.mu_to_e - 0.027_380_595_257_425_536).abs() < 1e-13);
        assert!((tr.tau_to_e - 0.000_736_298_352_015_651_4).abs() < 1e-13);

        let lit = conditional_return_probabilities_with(&p, 1255.7, ReturnPhase::CosineProduct);
        assert!((lit.ee - tr.ee).abs() < 1e-15);
        assert!((lit.mu_to_e - 0.019_647_850_273_830_827).abs() < 1e-13);
        assert!((lit.tau_to_e - 0.008_469_043_335_610_361).abs() < 1e-13);
    }

    #[test]
    fn return_phase_forms_agree() {
        for &(d, dcp) in &[(0.3, 5.34), (4.0, 1.0), (11.2, 0.0), (2.2, 3.1)] {
            let lit = ReturnPhase::CosineProduct.factor(d, dcp);
            assert!((lit - d.cos() * dcp.cos()).abs() < 1e-15);
            let tr = ReturnPhase::TimeReversed.factor(d, dcp);
            let expanded = (d - dcp).cos() - 2.0 * dcp.sin() * d.sin();
            assert!((tr - expanded).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_cp_phase_return_matches_forward() {
        let p = reference().with_delta_cp(0.0);
        for length in [50.0, 700.0, 1800.0] {
            let fwd = flavor_probabilities_from_e(&p, length);
            for convention in [ReturnPhase::TimeReversed, ReturnPhase::CosineProduct] {
                let r = conditional_return_probabilities_with(&p, length, convention);
                assert_eq!(r.ee, fwd.e);
                assert!((r.mu_to_e - fwd.mu).abs() < 1e-16);
                assert!((r.tau_to_e - fwd.tau).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn joint_probability() {
        let p = reference();
        let j = joint_probability_e_then(&p, Flavor::Mu, 140.15, 1395.85).unwrap();
        assert!((j - 0.011_725_279_192_436_975).abs() < 1e-14, "{j}");

        let pe = flavor_probabilities_from_e(&p, 300.0).e;
        assert_eq!(
            joint_probability_e_then(&p, Flavor::E, 300.0, 300.0).unwrap(),
            pe
        );
        assert_eq!(
            joint_probability_e_then(&p, Flavor::Mu, 300.0, 300.0).unwrap(),
            0.0
        );
        assert!(matches!(
            joint_probability_e_then(&p, Flavor::Mu, 300.0, 200.0),
            Err(Error::Ordering { .. })
        ));
    }

    #[test]
    fn no_oscillation_without_small_parameters() {
        let p = reference().with_theta13(0.0).with_alpha(0.0);
        for length in [0.0, 123.0, 1500.0, 9000.0] {
            assert_eq!(
                flavor_probabilities_from_e(&p, length).as_array(),
                [1.0, 0.0, 0.0]
            );
        }
    }

    #[test]
    fn alpha_override_equal_to_ratio_is_identical() {
        let p = reference();
        let q = p.with_alpha(p.dm21_sq / p.dm31_sq);
        for length in [10.0, 777.0] {
            assert_eq!(
                flavor_probabilities_from_e(&p, length),
                flavor_probabilities_from_e(&q, length)
            );
        }
    }

    mod properties {
        use proptest::prelude::*;

        use super::*;
        use crate::params::strategy::params;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]

            #[test]
            fn probabilities_sum_to_one(p in params(), l in 0.0..8000.0_f64) {
                prop_assert!((flavor_probabilities_from_e(&p, l).sum() - 1.0).abs() < 1e-12);
                let back = conditional_return_probabilities(&p, l);
                prop_assert_eq!(back.ee, flavor_probabilities_from_e(&p, l).e);
            }

            #[test]
            fn joint_probabilities_marginalize(p in params(), l1 in 0.0..2000.0_f64, ds in 0.0..2000.0_f64) {
                let total: f64 = Flavor::ALL
                    .iter()
                    .map(|&f| joint_probability_e_then(&p, f, l1, l1 + ds).unwrap())
                    .sum();
                prop_assert!((total - flavor_probabilities_from_e(&p, l1).e).abs() < 1e-12);
            }
        }
    }
}
