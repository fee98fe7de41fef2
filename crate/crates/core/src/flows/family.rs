use serde::{Deserialize, Serialize};

use crate::curve_geometry::IntrinsicState;
use crate::energies::{NodalModel, PhaseSepParams, WillmoreForm};
use crate::error::{CurveError, Result};
use crate::surface_calculus::PeriodicField;

/// Which scalar field, if any, a flow family carries along with `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DensityKind {
    None,
    /// Embedded agent density `ρ`.
    Agent,
    /// Membrane density `ρ_m`.
    Membrane,
}

/// The flow families and their parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowFamily {
    /// Gradient flow of the phase-separation energy with `𝒢 = -Δ_s`.
    PhaseSep {
        params: PhaseSepParams,
        nodal: NodalModel,
    },
    /// Curvature-driven normal motion `V = V̂(U)`.
    Curvature { form: WillmoreForm },
    /// `V = V̂ + κ(ρ_m² - 1)/(2ε)`, `Dρ_m/Dt = ε⁻¹Δ_sρ_m`.
    Penalized { epsilon: f64, base: WillmoreForm },
    /// `V = ℐV̂`.
    Incompressible { base: WillmoreForm },
}

impl FlowFamily {
    pub fn density_kind(&self) -> DensityKind {
        match self {
            FlowFamily::PhaseSep { .. } => DensityKind::Agent,
            FlowFamily::Penalized { .. } => DensityKind::Membrane,
            FlowFamily::Curvature { .. } | FlowFamily::Incompressible { .. } => DensityKind::None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FlowFamily::PhaseSep { .. } => "phase_sep",
            FlowFamily::Curvature { .. } => "curvature",
            FlowFamily::Penalized { .. } => "penalized",
            FlowFamily::Incompressible { .. } => "incompressible",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FlowFamily::PhaseSep { params, nodal } => {
                params.validate()?;
                nodal.validate()
            }
            FlowFamily::Penalized { epsilon, .. } if !(*epsilon > 0.0) => Err(
                CurveError::InvalidParameter(format!("epsilon must be positive, got {epsilon}")),
            ),
            _ => Ok(()),
        }
    }
}

/// Flow unknowns at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub u: IntrinsicState,
    pub rho: Option<PeriodicField>,
    pub rho_m: Option<PeriodicField>,
    pub t: f64,
}

impl FlowState {
    pub fn curve(u: IntrinsicState) -> Self {
        Self {
            u,
            rho: None,
            rho_m: None,
            t: 0.0,
        }
    }

    pub fn with_agents(u: IntrinsicState, rho: PeriodicField) -> Result<Self> {
        u.grid().check_len(&rho)?;
        Ok(Self {
            u,
            rho: Some(rho),
            rho_m: None,
            t: 0.0,
        })
    }

    pub fn with_membrane(u: IntrinsicState, rho_m: PeriodicField) -> Result<Self> {
        u.grid().check_len(&rho_m)?;
        if let Some(min) = rho_m.iter().copied().reduce(f64::min) {
            if !(min > 0.0) {
                return Err(CurveError::InvalidParameter(format!(
                    "membrane density must be positive, min is {min}"
                )));
            }
        }
        Ok(Self {
            u,
            rho: None,
            rho_m: Some(rho_m),
            t: 0.0,
        })
    }

    /// The field matching `kind`, or an error naming what is missing.
    pub fn density(&self, kind: DensityKind) -> Result<Option<&[f64]>> {
        match kind {
            DensityKind::None => Ok(None),
            DensityKind::Agent => self
                .rho
                .as_deref()
                .map(Some)
                .ok_or_else(|| CurveError::InvalidParameter("flow needs an agent density".into())),
            DensityKind::Membrane => self
                .rho_m
                .as_deref()
                .map(Some)
                .ok_or_else(|| CurveError::InvalidParameter("flow needs a membrane density".into())),
        }
    }
}
