use serde::{Deserialize, Serialize};

use crate::curve_geometry::{closure_project_with, closure_residual, total_length, ClosureOptions};
use crate::error::{CurveError, Result};
use crate::surface_calculus::h2_norm;

use super::family::{DensityKind, FlowFamily, FlowState};
use super::incompressible::{manifold_distance, residual_velocity};
use super::integrator::{step_adaptive, StepController};
use super::rhs::{evaluate_rhs, family_energy};
use super::system::FlowSystem;

/// Stopping rules and bookkeeping for [`run_flow`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub t_end: f64,
    /// Stop once `max(sup|V|, sup|Dρ/Dt|)` falls below this value.
    pub stall_tol: Option<f64>,
    pub max_steps: usize,
    /// Closure projection after this many accepted steps (0 disables it).
    pub project_every: usize,
    /// Keep a full snapshot after this many accepted steps (0 keeps only the
    /// initial and final states).
    pub snapshot_every: usize,
    pub controller: StepController,
    pub closure: ClosureOptions,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            stall_tol: None,
            max_steps: 1_000_000,
            project_every: 10,
            snapshot_every: 0,
            controller: StepController::default(),
            closure: ClosureOptions::default(),
        }
    }
}

/// Per-step record of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowDiagnostics {
    pub t: f64,
    pub dt: f64,
    pub energy: f64,
    pub length: f64,
    /// `∮ρ dσ` or `∮ρ_m dσ`.
    pub mass: Option<f64>,
    pub closure_norm: f64,
    /// Distance to the incompressible manifold (penalised flow only).
    pub d_m: Option<f64>,
    /// `‖V_R‖_{H²}` (penalised flow only).
    pub residual_h2: Option<f64>,
    pub rhs_sup: f64,
    pub density_min: Option<f64>,
    pub density_max: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EndTime,
    Stalled,
    MaxSteps,
    Failed,
}

/// Trajectory of one run. On failure the partial trajectory is kept and
/// the error is stored in `failure`.
#[derive(Debug)]
pub struct FlowRun {
    pub family: FlowFamily,
    pub diagnostics: Vec<FlowDiagnostics>,
    pub snapshots: Vec<FlowState>,
    pub final_state: FlowState,
    pub stop: StopReason,
    pub accepted: usize,
    pub rejected: usize,
    pub failure: Option<CurveError>,
}

impl FlowRun {
    pub fn into_result(self) -> Result<Self> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok(self),
        }
    }
}

pub fn diagnose(state: &FlowState, family: &FlowFamily, dt: f64) -> Result<FlowDiagnostics> {
    let u = &state.u;
    let kind = family.density_kind();
    let density = state.density(kind)?;
    let rhs = evaluate_rhs(state, family)?;
    let (d_m, residual_h2) = match family {
        FlowFamily::Penalized { epsilon, base } => {
            let rho = density.expect("membrane density present");
            let d = manifold_distance(u, rho, *epsilon, base)?;
            let (v_r, _) = residual_velocity(u, rho, *epsilon, base)?;
            (Some(d), Some(h2_norm(&v_r, u)))
        }
        _ => (None, None),
    };
    Ok(FlowDiagnostics {
        t: state.t,
        dt,
        energy: family_energy(state, family)?,
        length: total_length(u),
        mass: density.map(|r| u.integrate(r)),
        closure_norm: closure_residual(u).norm(),
        d_m,
        residual_h2,
        rhs_sup: rhs.sup_norm(),
        density_min: density.map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)),
        density_max: density.map(|r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    })
}

/// Integrate `family` from `initial` until `t_end`, stall or `max_steps`.
pub fn run_flow(initial: FlowState, family: &FlowFamily, opts: &RunOptions) -> Result<FlowRun> {
    family.validate()?;
    opts.controller.validate()?;
    if family.density_kind() != DensityKind::None {
        initial.density(family.density_kind())?;
    }
    let system = FlowSystem::new(family.clone(), initial.u.grid().clone());
    let mut y = system.pack(&initial)?;
    let mut t = initial.t;
    let mut ctrl = opts.controller.clone();
    let mut state = initial.clone();
    let mut diagnostics = vec![diagnose(&state, family, 0.0)?];
    let mut snapshots = vec![initial];
    let mut accepted = 0;
    let mut rejected = 0;
    let mut since_projection = 0;

    let finish = |stop, state: FlowState, diagnostics, mut snapshots: Vec<FlowState>, accepted, rejected, failure| {
        if snapshots.last() != Some(&state) {
            snapshots.push(state.clone());
        }
        FlowRun {
            family: family.clone(),
            diagnostics,
            snapshots,
            final_state: state,
            stop,
            accepted,
            rejected,
            failure,
        }
    };

    if let (Some(tol), Some(d)) = (opts.stall_tol, diagnostics.first()) {
        if d.rhs_sup < tol {
            return Ok(finish(StopReason::Stalled, state, diagnostics, snapshots, 0, 0, None));
        }
    }

    let time_eps = 1e-12 * opts.t_end.abs().max(1.0);
    while t < opts.t_end - time_eps {
        if accepted + rejected >= opts.max_steps {
            return Ok(finish(StopReason::MaxSteps, state, diagnostics, snapshots, accepted, rejected, None));
        }
        let remaining = opts.t_end - t;
        let saved_dt = ctrl.dt;
        let landing = ctrl.dt >= remaining;
        if landing {
            ctrl.dt = remaining;
        }
        let outcome = match step_adaptive(&system, &y, t, &mut ctrl) {
            Ok(o) => o,
            Err(e) => {
                return Ok(finish(StopReason::Failed, state, diagnostics, snapshots, accepted, rejected, Some(e)));
            }
        };
        if !outcome.accepted {
            rejected += 1;
            continue;
        }
        if landing {
            ctrl.dt = ctrl.dt.max(saved_dt.min(ctrl.dt_max));
        }
        accepted += 1;
        since_projection += 1;
        y = outcome.y;
        t = outcome.t;
        let mut next = system.unpack(&y, t)?;
        if opts.project_every > 0 && since_projection >= opts.project_every {
            since_projection = 0;
            match closure_project_with(&next.u, &opts.closure) {
                Ok(u) => {
                    next.u = u;
                    y = system.pack(&next)?;
                }
                Err(e) => {
                    return Ok(finish(StopReason::Failed, next, diagnostics, snapshots, accepted, rejected, Some(e)));
                }
            }
        }
        state = next;
        let diag = match diagnose(&state, family, outcome.dt_used) {
            Ok(d) => d,
            Err(e) => {
                return Ok(finish(StopReason::Failed, state, diagnostics, snapshots, accepted, rejected, Some(e)));
            }
        };
        let stalled = opts.stall_tol.is_some_and(|tol| diag.rhs_sup < tol);
        diagnostics.push(diag);
        if opts.snapshot_every > 0 && accepted % opts.snapshot_every == 0 {
            snapshots.push(state.clone());
        }
        if stalled {
            return Ok(finish(StopReason::Stalled, state, diagnostics, snapshots, accepted, rejected, None));
        }
    }
    Ok(finish(StopReason::EndTime, state, diagnostics, snapshots, accepted, rejected, None))
}
