//! Time integration of curve flows in the scaled arc-length gauge.
//!
//! Four families are supported: the phase-separation gradient flow coupled to
//! an agent density, curvature-only flows of the Willmore family, the
//! membrane-density penalised flow and its incompressible limit. Each family
//! supplies a right-hand side ([`rhs`]) and a frozen-coefficient linear part;
//! [`integrator`] advances them with a linearly implicit Euler step, step
//! doubling and local extrapolation.

mod family;
pub mod incompressible;
pub mod integrator;
pub mod rhs;
mod run;
mod system;

pub use family::{DensityKind, FlowFamily, FlowState};
pub use incompressible::{excess_density, manifold_distance, residual_velocity};
pub use integrator::{step_adaptive, SemiImplicitSystem, StepController, StepOutcome};
pub use rhs::{
    dissipation_rate, evaluate_rhs, family_energy, form_energy, rhs_curvature,
    rhs_incompressible, rhs_penalized, rhs_phase_sep, FlowRhs,
};
pub use run::{diagnose, run_flow, FlowDiagnostics, FlowRun, RunOptions, StopReason};
pub use system::FlowSystem;
