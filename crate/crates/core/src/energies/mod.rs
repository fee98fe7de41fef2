//! Energy functionals on `(κ, g, ρ)` and their `L²(dσ)` variational derivatives.
//!
//! Every model implements [`EnergyModel`]; flows only ever see the energy
//! value and the three derivative fields. The sharp-interface objects
//! (double well, heteroclinic profile, recovery sequences, limit energy) live
//! in [`gamma`], the critical-point residual of the limit energy in [`el`].

mod curvature;
pub mod el;
pub mod gamma;
mod nodal;
mod phase_sep;

use serde::{Deserialize, Serialize};

use crate::curve_geometry::IntrinsicState;
use crate::surface_calculus::PeriodicField;

pub use curvature::{
    willmore_family_velocity, CurvatureEnergy, LengthEnergy, MembranePenalty, WillmoreForm,
};
pub use el::{el_residual, ElResidual};
pub use gamma::{
    detect_transitions, gamma_limit_energy, heteroclinic_profile, limit_density,
    recovery_sequence, surface_tension_constants, DoubleWell, RecoverySequence, SurfaceTension,
    TransitionSet,
};
pub use nodal::{default_nodal_model, nodal_model_with_shape, NodalModel, PointPotentials};
pub use phase_sep::{phase_sep_energy, phase_sep_variations, PhaseSepEnergy, PhaseSepParams};

/// Variational derivatives `(∂_κF, ∂_gF, ∂_ρF)` in the `L²(dσ)` pairing.
#[derive(Clone, Debug, PartialEq)]
pub struct Variations {
    pub d_kappa: PeriodicField,
    pub d_g: PeriodicField,
    pub d_rho: Option<PeriodicField>,
}

/// An energy of the intrinsic state and, optionally, one surface density.
pub trait EnergyModel: Send + Sync {
    fn name(&self) -> &str;

    /// Whether the energy depends on a surface density field.
    fn uses_density(&self) -> bool;

    fn energy(&self, u: &IntrinsicState, rho: Option<&[f64]>) -> f64;

    fn variations(&self, u: &IntrinsicState, rho: Option<&[f64]>) -> Variations;
}

/// Polynomial with coefficients in ascending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly(coeffs)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    /// `c (x - a)² + b (x - a) + d` expanded to monomials.
    pub fn quadratic_about(a: f64, c: f64, b: f64, d: f64) -> Poly {
        Poly(vec![d - b * a + c * a * a, b - 2.0 * c * a, c])
    }
}
