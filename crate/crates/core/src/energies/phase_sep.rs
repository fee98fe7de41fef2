use serde::{Deserialize, Serialize};

use super::{EnergyModel, NodalModel, Variations};
use crate::curve_geometry::{total_length, IntrinsicState};
use crate::error::{CurveError, Result};
use crate::surface_calculus::{grad_s, laplace_s};

/// Coefficients of the phase-separation energy.
///
/// `sigma1_len` multiplies the reference length in the length penalty
/// `β/2 (|Γ| - σ₁|Γ₀|)²`; it is unrelated to the surface-tension constant of
/// the sharp-interface limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSepParams {
    pub epsilon: f64,
    pub delta: f64,
    pub beta: f64,
    pub sigma1_len: f64,
    /// Reference length `|Γ₀|`.
    pub gamma0_length: f64,
}

impl PhaseSepParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("sigma1_len", self.sigma1_len),
            ("gamma0_length", self.gamma0_length),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CurveError::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(CurveError::InvalidParameter(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// `|Γ| - σ₁|Γ₀|`.
    pub fn length_excess(&self, length: f64) -> f64 {
        length - self.sigma1_len * self.gamma0_length
    }
}

/// Pointwise energy density without the length penalty, and the bracket
/// `-δ/2|∇κ|² + f/δ - ε/2|∇ρ|² + F/ε` that enters `∂_gF`.
fn densities(
    u: &IntrinsicState,
    rho: &[f64],
    p: &PhaseSepParams,
    nodal: &NodalModel,
) -> (Vec<f64>, Vec<f64>) {
    let dk = grad_s(u.kappa(), u);
    let dr = grad_s(rho, u);
    let mut dens = Vec::with_capacity(u.n());
    let mut bracket = Vec::with_capacity(u.n());
    for j in 0..u.n() {
        let pot = nodal.potentials(u.kappa()[j], rho[j]);
        let gk = 0.5 * p.delta * dk[j] * dk[j];
        let gr = 0.5 * p.epsilon * dr[j] * dr[j];
        let bulk = pot.f / p.delta + pot.big_f / p.epsilon;
        dens.push(gk + gr + bulk);
        bracket.push(-gk - gr + bulk);
    }
    (dens, bracket)
}

/// `F_ε(U, ρ)`.
pub fn phase_sep_energy(
    u: &IntrinsicState,
    rho: &[f64],
    params: &PhaseSepParams,
    nodal: &NodalModel,
) -> f64 {
    let (dens, _) = densities(u, rho, params, nodal);
    let excess = params.length_excess(total_length(u));
    u.integrate(&dens) + 0.5 * params.beta * excess * excess
}

/// `(∂_κF, ∂_gF, ∂_ρF)` of the phase-separation energy.
pub fn phase_sep_variations(
    u: &IntrinsicState,
    rho: &[f64],
    params: &PhaseSepParams,
    nodal: &NodalModel,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (_, bracket) = densities(u, rho, params, nodal);
    let lk = laplace_s(u.kappa(), u);
    let lr = laplace_s(rho, u);
    let excess = params.beta * params.length_excess(total_length(u));
    let n = u.n();
    let mut dk = Vec::with_capacity(n);
    let mut dg = Vec::with_capacity(n);
    let mut dr = Vec::with_capacity(n);
    for j in 0..n {
        let pot = nodal.potentials(u.kappa()[j], rho[j]);
        dk.push(-params.delta * lk[j] + pot.f_kappa / params.delta + pot.big_f_kappa / params.epsilon);
        dr.push(-params.epsilon * lr[j] + pot.f_rho / params.delta + pot.big_f_rho / params.epsilon);
        dg.push((bracket[j] + excess) / u.g_at(j));
    }
    (dk, dg, dr)
}

/// Phase-separation energy as an [`EnergyModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSepEnergy {
    pub params: PhaseSepParams,
    pub nodal: NodalModel,
}

impl EnergyModel for PhaseSepEnergy {
    fn name(&self) -> &str {
        "phase_sep"
    }

    fn uses_density(&self) -> bool {
        true
    }

    fn energy(&self, u: &IntrinsicState, rho: Option<&[f64]>) -> f64 {
        phase_sep_energy(u, rho.expect("phase-separation energy needs a density"), &self.params, &self.nodal)
    }

    fn variations(&self, u: &IntrinsicState, rho: Option<&[f64]>) -> Variations {
        let (d_kappa, d_g, d_rho) = phase_sep_variations(
            u,
            rho.expect("phase-separation energy needs a density"),
            &self.params,
            &self.nodal,
        );
        Variations {
            d_kappa,
            d_g,
            d_rho: Some(d_rho),
        }
    }
}
