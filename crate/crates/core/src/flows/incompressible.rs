//! The incompressible manifold `ρ_m = 1 + ερ̄_m(U)` and the distance and
//! residual velocities measured against it.

use crate::curve_geometry::IntrinsicState;
use crate::energies::{willmore_family_velocity, WillmoreForm};
use crate::error::Result;
use crate::kinematics::gauge_scaled_arclength;
use crate::surface_calculus::{h2_norm, HelmholtzOperator, PeriodicField};

/// `ρ̄_m = -H⁻¹(κV̂)`.
pub fn excess_density(u: &IntrinsicState, base: &WillmoreForm) -> Result<PeriodicField> {
    let v_hat = willmore_family_velocity(u, base);
    let rhs: Vec<f64> = u.kappa().iter().zip(&v_hat).map(|(k, v)| -k * v).collect();
    HelmholtzOperator::new(u)?.solve(&rhs)
}

/// `d_M = ‖ρ_m - 1 - ερ̄_m(U)‖_{H²}`.
pub fn manifold_distance(
    u: &IntrinsicState,
    rho_m: &[f64],
    epsilon: f64,
    base: &WillmoreForm,
) -> Result<f64> {
    let bar = excess_density(u, base)?;
    let diff: Vec<f64> = rho_m
        .iter()
        .zip(&bar)
        .map(|(r, b)| r - 1.0 - epsilon * b)
        .collect();
    Ok(h2_norm(&diff, u))
}

/// Residual velocities `(V_R, W_R)` of the penalised flow relative to the
/// incompressible one: `V_R = V - ℐV̂` and `W_R` its scaled arc-length
/// tangential partner.
pub fn residual_velocity(
    u: &IntrinsicState,
    rho_m: &[f64],
    epsilon: f64,
    base: &WillmoreForm,
) -> Result<(PeriodicField, PeriodicField)> {
    let v_hat = willmore_family_velocity(u, base);
    let h = HelmholtzOperator::new(u)?;
    let i_v = h.incompressibility_apply(&v_hat)?;
    let k = u.kappa();
    let v_r: Vec<f64> = (0..u.n())
        .map(|j| v_hat[j] + k[j] * (rho_m[j] * rho_m[j] - 1.0) / (2.0 * epsilon) - i_v[j])
        .collect();
    let w_r = gauge_scaled_arclength(u, &v_r);
    Ok((v_r, w_r))
}
