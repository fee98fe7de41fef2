use serde::{Deserialize, Serialize};

use super::{EnergyModel, Poly, Variations};
use crate::curve_geometry::{total_length, IntrinsicState};
use crate::kinematics::{geometry_operator, gradient_normal_velocity};
use crate::surface_calculus::PeriodicField;

/// `∮ F(κ) dσ + β/2 (|Γ| - L_ref)²` with a polynomial density `F`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureEnergy {
    pub density: Poly,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub ref_length: f64,
}

impl CurvatureEnergy {
    /// `∮ κ²/2 dσ` without length penalty.
    pub fn willmore() -> Self {
        Self {
            density: Poly(vec![0.0, 0.0, 0.5]),
            beta: 0.0,
            ref_length: 0.0,
        }
    }

    pub fn with_length_penalty(mut self, beta: f64, ref_length: f64) -> Self {
        self.beta = beta;
        self.ref_length = ref_length;
        self
    }

    fn excess(&self, u: &IntrinsicState) -> f64 {
        self.beta * (total_length(u) - self.ref_length)
    }
}

impl EnergyModel for CurvatureEnergy {
    fn name(&self) -> &str {
        "curvature"
    }

    fn uses_density(&self) -> bool {
        false
    }

    fn energy(&self, u: &IntrinsicState, _rho: Option<&[f64]>) -> f64 {
        let dens: Vec<f64> = u.kappa().iter().map(|&k| self.density.eval(k)).collect();
        let ex = total_length(u) - self.ref_length;
        u.integrate(&dens) + 0.5 * self.beta * ex * ex
    }

    fn variations(&self, u: &IntrinsicState, _rho: Option<&[f64]>) -> Variations {
        let dp = self.density.derivative();
        let ex = self.excess(u);
        Variations {
            d_kappa: u.kappa().iter().map(|&k| dp.eval(k)).collect(),
            d_g: (0..u.n())
                .map(|j| (self.density.eval(u.kappa()[j]) + ex) / u.g_at(j))
                .collect(),
            d_rho: None,
        }
    }
}

/// Total length `∮ dσ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LengthEnergy;

impl EnergyModel for LengthEnergy {
    fn name(&self) -> &str {
        "length"
    }

    fn uses_density(&self) -> bool {
        false
    }

    fn energy(&self, u: &IntrinsicState, _rho: Option<&[f64]>) -> f64 {
        total_length(u)
    }

    fn variations(&self, u: &IntrinsicState, _rho: Option<&[f64]>) -> Variations {
        Variations {
            d_kappa: vec![0.0; u.n()],
            d_g: (0..u.n()).map(|j| 1.0 / u.g_at(j)).collect(),
            d_rho: None,
        }
    }
}

/// Curvature energy plus the membrane-density penalty `(2ε)⁻¹ ∮ (ρ_m - 1)² dσ`.
///
/// Its gradient flow with `𝒢 = -Δ_s` has normal velocity
/// `V̂ + κ(ρ_m² - 1)/(2ε)` and `Dρ_m/Dt = ε⁻¹ Δ_s ρ_m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembranePenalty {
    pub epsilon: f64,
    pub base: CurvatureEnergy,
}

impl EnergyModel for MembranePenalty {
    fn name(&self) -> &str {
        "membrane_penalty"
    }

    fn uses_density(&self) -> bool {
        true
    }

    fn energy(&self, u: &IntrinsicState, rho: Option<&[f64]>) -> f64 {
        let rho = rho.expect("membrane penalty needs a density");
        let pen: Vec<f64> = rho.iter().map(|r| (r - 1.0).powi(2) / (2.0 * self.epsilon)).collect();
        self.base.energy(u, None) + u.integrate(&pen)
    }

    fn variations(&self, u: &IntrinsicState, rho: Option<&[f64]>) -> Variations {
        let rho = rho.expect("membrane penalty needs a density");
        let mut var = self.base.variations(u, None);
        for j in 0..u.n() {
            var.d_g[j] += (rho[j] - 1.0).powi(2) / (2.0 * self.epsilon * u.g_at(j));
        }
        var.d_rho = Some(rho.iter().map(|r| (r - 1.0) / self.epsilon).collect());
        var
    }
}

/// Normal-velocity laws for curvature-driven flows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum WillmoreForm {
    /// `V = -Gκ + κ³/2 - κβ(|Γ| - L_ref)`.
    WillmoreBeta {
        #[serde(default)]
        beta: f64,
        #[serde(default)]
        ref_length: f64,
    },
    /// Gradient-flow velocity of a [`CurvatureEnergy`]:
    /// `V = -G F'(κ) - κ F(κ) - κβ(|Γ| - L_ref)`.
    General(CurvatureEnergy),
}

impl WillmoreForm {
    pub fn willmore() -> Self {
        WillmoreForm::WillmoreBeta {
            beta: 0.0,
            ref_length: 0.0,
        }
    }

    /// The energy whose gradient flow this velocity is, when there is one.
    pub fn energy(&self) -> Option<&CurvatureEnergy> {
        match self {
            WillmoreForm::WillmoreBeta { .. } => None,
            WillmoreForm::General(e) => Some(e),
        }
    }
}

pub fn willmore_family_velocity(u: &IntrinsicState, form: &WillmoreForm) -> PeriodicField {
    match form {
        WillmoreForm::WillmoreBeta { beta, ref_length } => {
            let gk = geometry_operator(u, u.kappa());
            let ex = beta * (total_length(u) - ref_length);
            u.kappa()
                .iter()
                .zip(&gk)
                .map(|(&k, g)| -g + 0.5 * k * k * k - k * ex)
                .collect()
        }
        WillmoreForm::General(energy) => {
            let var = energy.variations(u, None);
            gradient_normal_velocity(u, None, &var.d_kappa, &var.d_g, None)
        }
    }
}
