//! Right-hand sides of the flow families in the scaled arc-length gauge.
//!
//! Every family produces a normal velocity `V`; the tangential velocity `W`
//! keeps `g` spatially constant, and `∂_tU = M(U)(V, W)`. Densities follow
//! their material-derivative law, converted to a parameter-time derivative by
//! `ρ_t = Dρ/Dt - κVρ + W∇_sρ`.

use crate::curve_geometry::IntrinsicState;
use crate::energies::{
    phase_sep_energy, phase_sep_variations, willmore_family_velocity, CurvatureEnergy,
    EnergyModel, MembranePenalty, NodalModel, PhaseSepParams, WillmoreForm,
};
use crate::error::{CurveError, Result};
use crate::kinematics::{gauge_scaled_arclength, geometry_operator, gradient_normal_velocity};
use crate::surface_calculus::{grad_s, laplace_s, HelmholtzOperator, PeriodicField};

use super::family::{DensityKind, FlowFamily, FlowState};

/// Velocities and time derivatives at one state.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowRhs {
    /// Normal velocity `V`.
    pub v: PeriodicField,
    /// Tangential velocity `W`.
    pub w: PeriodicField,
    pub dkappa_dt: PeriodicField,
    /// Rate of the (spatially constant) metric.
    pub dg_dt: f64,
    /// `∂_tρ` or `∂_tρ_m`, when the family carries a density.
    pub density_dt: Option<PeriodicField>,
    /// `Dρ/Dt`, when the family carries a density.
    pub material_rate: Option<PeriodicField>,
}

impl FlowRhs {
    /// `max(sup|V|, sup|Dρ/Dt|)`, the stall measure of a run.
    pub fn sup_norm(&self) -> f64 {
        let sup = |f: &[f64]| f.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut s = sup(&self.v);
        if let Some(m) = &self.material_rate {
            s = s.max(sup(m));
        }
        s
    }
}

fn uniform_metric(u: &IntrinsicState) -> Result<f64> {
    u.metric().uniform_value().ok_or_else(|| {
        CurveError::InvalidParameter("flows run in the scaled arc-length gauge (uniform g)".into())
    })
}

/// Assemble `∂_tU` and the density rate from `V` and, optionally, `Dρ/Dt`.
fn assemble(
    u: &IntrinsicState,
    v: PeriodicField,
    density: Option<(&[f64], PeriodicField)>,
) -> Result<FlowRhs> {
    let g = uniform_metric(u)?;
    let w = gauge_scaled_arclength(u, &v);
    let gv = geometry_operator(u, &v);
    let dk = grad_s(u.kappa(), u);
    let k = u.kappa();
    let dkappa_dt = (0..u.n()).map(|j| gv[j] + dk[j] * w[j]).collect();
    let kv: Vec<f64> = (0..u.n()).map(|j| k[j] * v[j]).collect();
    let dg_dt = g * u.arc_mean(&kv);
    let (density_dt, material_rate) = match density {
        Some((rho, material)) => {
            let dr = grad_s(rho, u);
            let rate = (0..u.n())
                .map(|j| material[j] - kv[j] * rho[j] + w[j] * dr[j])
                .collect();
            (Some(rate), Some(material))
        }
        None => (None, None),
    };
    Ok(FlowRhs {
        v,
        w,
        dkappa_dt,
        dg_dt,
        density_dt,
        material_rate,
    })
}

/// Phase-separation gradient flow: `V = -G∂_κF - gκ∂_gF + κρ∂_ρF`,
/// `Dρ/Dt = Δ_s ∂_ρF`.
pub fn rhs_phase_sep(
    state: &FlowState,
    params: &PhaseSepParams,
    nodal: &NodalModel,
) -> Result<FlowRhs> {
    let u = &state.u;
    let rho = state.density(DensityKind::Agent)?.expect("agent density present");
    let (dk, dg, dr) = phase_sep_variations(u, rho, params, nodal);
    let v = gradient_normal_velocity(u, Some(rho), &dk, &dg, Some(&dr));
    let material = laplace_s(&dr, u);
    assemble(u, v, Some((rho, material)))
}

/// Curvature-only flow `V = V̂(U)`.
pub fn rhs_curvature(state: &FlowState, form: &WillmoreForm) -> Result<FlowRhs> {
    let v = willmore_family_velocity(&state.u, form);
    assemble(&state.u, v, None)
}

/// Penalised flow `V = V̂ + κ(ρ_m² - 1)/(2ε)`, `Dρ_m/Dt = ε⁻¹Δ_sρ_m`.
pub fn rhs_penalized(state: &FlowState, epsilon: f64, base: &WillmoreForm) -> Result<FlowRhs> {
    let u = &state.u;
    let rho = state.density(DensityKind::Membrane)?.expect("membrane density present");
    let v_hat = willmore_family_velocity(u, base);
    let k = u.kappa();
    let v = (0..u.n())
        .map(|j| v_hat[j] + k[j] * (rho[j] * rho[j] - 1.0) / (2.0 * epsilon))
        .collect();
    let material = laplace_s(rho, u).iter().map(|x| x / epsilon).collect();
    assemble(u, v, Some((rho, material)))
}

/// Incompressible flow `V = ℐV̂`.
pub fn rhs_incompressible(state: &FlowState, base: &WillmoreForm) -> Result<FlowRhs> {
    let v_hat = willmore_family_velocity(&state.u, base);
    let v = HelmholtzOperator::new(&state.u)?.incompressibility_apply(&v_hat)?;
    assemble(&state.u, v, None)
}

pub fn evaluate_rhs(state: &FlowState, family: &FlowFamily) -> Result<FlowRhs> {
    match family {
        FlowFamily::PhaseSep { params, nodal } => rhs_phase_sep(state, params, nodal),
        FlowFamily::Curvature { form } => rhs_curvature(state, form),
        FlowFamily::Penalized { epsilon, base } => rhs_penalized(state, *epsilon, base),
        FlowFamily::Incompressible { base } => rhs_incompressible(state, base),
    }
}

/// Energy attached to a velocity law. For the literal Willmore form, which is
/// not an exact gradient flow, this is `∮κ²/2 + β/2(|Γ| - L_ref)²`.
pub fn form_energy(form: &WillmoreForm) -> CurvatureEnergy {
    match form {
        WillmoreForm::WillmoreBeta { beta, ref_length } => {
            CurvatureEnergy::willmore().with_length_penalty(*beta, *ref_length)
        }
        WillmoreForm::General(e) => e.clone(),
    }
}

/// The energy monitored along a run of `family`.
pub fn family_energy(state: &FlowState, family: &FlowFamily) -> Result<f64> {
    let u = &state.u;
    Ok(match family {
        FlowFamily::PhaseSep { params, nodal } => {
            let rho = state.density(DensityKind::Agent)?.expect("agent density present");
            phase_sep_energy(u, rho, params, nodal)
        }
        FlowFamily::Curvature { form } | FlowFamily::Incompressible { base: form } => {
            form_energy(form).energy(u, None)
        }
        FlowFamily::Penalized { epsilon, base } => MembranePenalty {
            epsilon: *epsilon,
            base: form_energy(base),
        }
        .energy(u, state.density(DensityKind::Membrane)?),
    })
}

/// Predicted `dF/dt`: `-∮(V² + |∇_s∂_ρF|²) dσ` for the gradient flows with
/// `𝒢 = -Δ_s`, and `-∮V̂ ℐV̂ dσ` for the incompressible flow.
pub fn dissipation_rate(state: &FlowState, family: &FlowFamily) -> Result<f64> {
    let u = &state.u;
    let rhs = evaluate_rhs(state, family)?;
    match family {
        FlowFamily::Incompressible { base } => {
            let v_hat = willmore_family_velocity(u, base);
            Ok(-u.inner(&v_hat, &rhs.v))
        }
        _ => {
            let mut rate = -u.inner(&rhs.v, &rhs.v);
            let d_rho: Option<Vec<f64>> = match family {
                FlowFamily::PhaseSep { params, nodal } => {
                    let rho = state.density(DensityKind::Agent)?.expect("agent density present");
                    Some(phase_sep_variations(u, rho, params, nodal).2)
                }
                FlowFamily::Penalized { epsilon, .. } => {
                    let rho = state.density(DensityKind::Membrane)?.expect("membrane density present");
                    Some(rho.iter().map(|r| (r - 1.0) / epsilon).collect())
                }
                _ => None,
            };
            if let Some(d) = d_rho {
                let gd = grad_s(&d, u);
                rate -= u.inner(&gd, &gd);
            }
            Ok(rate)
        }
    }
}
