//! Exact three-flavor propagation in matter of constant density.
//!
//! The flavor-basis Hamiltonian (with the m₁² zero point removed) is
//!
//! ```text
//! H = U diag(0, Δm²₂₁, Δm²₃₁) U† / 2E + diag(V, 0, 0)
//! ```
//!
//! and the propagator over a segment of length L is `exp(−iHL)`. This module
//! is the reference the expansion is checked against and the probability
//! source for the Monte Carlo simulator.

mod eigen;
mod matrix;

pub use eigen::{hermitian_eigen, EigenError, HermitianEigen};
pub use matrix::{Matrix3, C64};

use crate::correlator::{BaselineSchedule, CorrelatorResult};
use crate::params::{Flavor, OscillationParams, KM_IN_INV_EV};

/// PMNS mixing matrix, rows indexed by flavor (e, μ, τ) and columns by mass
/// state (1, 2, 3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmnsMatrix(pub Matrix3);

impl PmnsMatrix {
    pub fn element(&self, flavor: Flavor, mass_state: usize) -> C64 {
        self.0.get(flavor.index(), mass_state)
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.0.unitarity_defect()
    }
}

/// Standard parameterization with the Dirac phase on the (e, 3) element.
pub fn pmns_matrix(theta12: f64, theta13: f64, theta23: f64, delta_cp: f64) -> PmnsMatrix {
    let (s12, c12) = theta12.sin_cos();
    let (s13, c13) = theta13.sin_cos();
    let (s23, c23) = theta23.sin_cos();
    let phase = C64::from_polar(1.0, delta_cp);
    let r = |x: f64| C64::new(x, 0.0);
    PmnsMatrix(Matrix3([
        [r(c12 * c13), r(s12 * c13), phase.conj() * s13],
        [
            r(-s12 * c23) - phase * (c12 * s13 * s23),
            r(c12 * c23) - phase * (s12 * s13 * s23),
            r(c13 * s23),
        ],
        [
            r(s12 * s23) - phase * (c12 * s13 * c23),
            r(-c12 * s23) - phase * (s12 * s13 * c23),
            r(c13 * c23),
        ],
    ]))
}

/// Flavor-basis Hamiltonian in radians per km.
pub fn hamiltonian_per_km(params: &OscillationParams) -> Matrix3 {
    let u = pmns_matrix(
        params.theta12,
        params.theta13,
        params.theta23,
        params.delta_cp,
    )
    .0;
    let two_e = 2.0 * params.energy_ev();
    let masses = Matrix3::real_diagonal([
        0.0,
        params.effective_dm21_sq() / two_e,
        params.dm31_sq / two_e,
    ]);
    let matter = Matrix3::real_diagonal([params.potential, 0.0, 0.0]);
    (u * masses * u.adjoint() + matter).scale(C64::new(KM_IN_INV_EV, 0.0))
}

/// `exp(−iHL)` by scaling and squaring a truncated Taylor series; used when
/// the eigendecomposition is unavailable.
pub fn evolution_operator_series(hamiltonian: &Matrix3, length: f64) -> Matrix3 {
    let generator = hamiltonian.scale(C64::new(0.0, -length));
    let norm = generator.frobenius_norm();
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.25 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let x = generator.scale(C64::new(0.5_f64.powi(squarings as i32), 0.0));

    // ‖x‖ ≤ 1/4, so 18 terms are far below double precision
    let mut term = Matrix3::identity();
    let mut sum = Matrix3::identity();
    for k in 1..=18 {
        term = (term * x).scale(C64::new(1.0 / k as f64, 0.0));
        sum = sum + term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}

/// Flavor-transition probabilities `P[a][b] = |⟨b| exp(−iHL) |a⟩|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix(pub [[f64; 3]; 3]);

impl TransitionMatrix {
    pub fn from_operator(op: &Matrix3) -> Self {
        let mut p = [[0.0; 3]; 3];
        for (a, row) in p.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                *entry = op.get(b, a).norm_sqr();
            }
        }
        TransitionMatrix(p)
    }

    pub fn get(&self, from: Flavor, to: Flavor) -> f64 {
        self.0[from.index()][to.index()]
    }

    pub fn row(&self, from: Flavor) -> [f64; 3] {
        self.0[from.index()]
    }

    pub fn row_sums(&self) -> [f64; 3] {
        self.0.map(|row| row.iter().sum())
    }

    pub fn column_sums(&self) -> [f64; 3] {
        let mut sums = [0.0; 3];
        for row in &self.0 {
            for (s, x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }

    /// Largest violation of entry bounds and unit row/column sums.
    pub fn stochasticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for x in self.0.iter().flatten() {
            worst = worst.max(-x).max(x - 1.0);
        }
        for s in self.row_sums().into_iter().chain(self.column_sums()) {
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }
}

/// Propagator for one parameter point. Holds the eigendecomposition of H so
/// that repeated lengths cost one 3×3 product each.
#[derive(Debug, Clone)]
pub struct Propagator {
    hamiltonian: Matrix3,
    eigen: Option<HermitianEigen>,
}

impl Propagator {
    pub fn new(params: &OscillationParams) -> Self {
        let hamiltonian = hamiltonian_per_km(params);
        let eigen = hermitian_eigen(&hamiltonian).ok();
        Propagator { hamiltonian, eigen }
    }

    pub fn hamiltonian(&self) -> &Matrix3 {
        &self.hamiltonian
    }

    /// True when the eigendecomposition succeeded and the spectral route is
    /// in use.
    pub fn is_spectral(&self) -> bool {
        self.eigen.is_some()
    }

    pub fn operator(&self, length: f64) -> Matrix3 {
        match &self.eigen {
            Some(eig) => eig.apply(|lambda| C64::from_polar(1.0, -lambda * length)),
            None => evolution_operator_series(&self.hamiltonian, length),
        }
    }

    pub fn transition(&self, length: f64) -> TransitionMatrix {
        TransitionMatrix::from_operator(&self.operator(length))
    }

    pub fn pair_correlator(&self, l_first: f64, separation: f64) -> f64 {
        let first = self.transition(l_first).row(Flavor::E);
        let second = self.transition(separation);
        let mut c = 0.0;
        for a in Flavor::ALL {
            let qa = f64::from(a.q_value());
            for b in Flavor::ALL {
                let qb = f64::from(b.q_value());
                c += qa * qb * first[a.index()] * second.get(a, b);
            }
        }
        c
    }

    pub fn lgi_correlator(&self, schedule: BaselineSchedule) -> CorrelatorResult {
        CorrelatorResult::assemble(schedule, |l, s| self.pair_correlator(l, s))
    }
}

pub fn evolution_operator(params: &OscillationParams, length: f64) -> Matrix3 {
    Propagator::new(params).operator(length)
}

pub fn exact_transition_matrix(params: &OscillationParams, length: f64) -> TransitionMatrix {
    Propagator::new(params).transition(length)
}

/// `C` from exact probabilities under projective collapse at each measurement.
pub fn exact_lgi_correlator(
    params: &OscillationParams,
    schedule: BaselineSchedule,
) -> CorrelatorResult {
    Propagator::new(params).lgi_correlator(schedule)
}
