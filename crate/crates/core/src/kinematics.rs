//! Maps between extrinsic velocities `(V, W)` and intrinsic rates `(∂_t κ, ∂_t g)`.

use crate::curve_geometry::{reconstruct_embedding, IntrinsicState, Metric};
use crate::energies::EnergyModel;
use crate::surface_calculus::{grad_s, laplace_s, PeriodicField};

/// Normal and tangential velocity of the curve, `γ_t = V n + W τ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtrinsicVelocity {
    pub v: PeriodicField,
    pub w: PeriodicField,
}

/// Rates of change of the intrinsic coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicVelocity {
    pub dkappa_dt: PeriodicField,
    pub dg_dt: PeriodicField,
}

/// `G f = -Δ_s f - κ² f`.
pub fn geometry_operator(u: &IntrinsicState, f: &[f64]) -> PeriodicField {
    laplace_s(f, u)
        .iter()
        .zip(f)
        .zip(u.kappa())
        .map(|((l, x), k)| -l - k * k * x)
        .collect()
}

/// `∂_t U = M(U) (V, W) = (G V + (∇_s κ) W, g κ V + g ∇_s W)`.
pub fn apply_m(u: &IntrinsicState, vel: &ExtrinsicVelocity) -> IntrinsicVelocity {
    let gv = geometry_operator(u, &vel.v);
    let dk = grad_s(u.kappa(), u);
    let dw = grad_s(&vel.w, u);
    let n = u.n();
    let dkappa_dt = (0..n).map(|j| gv[j] + dk[j] * vel.w[j]).collect();
    let dg_dt = (0..n)
        .map(|j| u.g_at(j) * (u.kappa()[j] * vel.v[j] + dw[j]))
        .collect();
    IntrinsicVelocity { dkappa_dt, dg_dt }
}

/// Top 2×2 block of `M†` applied to `(a, b)`:
/// `(G a + g κ b, (∇_s κ) a - ∇_s(g b))`.
pub fn apply_m_adjoint(u: &IntrinsicState, a: &[f64], b: &[f64]) -> (PeriodicField, PeriodicField) {
    let ga = geometry_operator(u, a);
    let dk = grad_s(u.kappa(), u);
    let gb: Vec<f64> = (0..u.n()).map(|j| u.g_at(j) * b[j]).collect();
    let dgb = grad_s(&gb, u);
    let first = (0..u.n())
        .map(|j| ga[j] + u.g_at(j) * u.kappa()[j] * b[j])
        .collect();
    let second = (0..u.n()).map(|j| dk[j] * a[j] - dgb[j]).collect();
    (first, second)
}

/// Basis of `ker M†` built from the reconstructed curve:
/// `(γ_i, (κ γ_i - n_i)/g)` for `i = 1, 2` and `(1, κ/g)`.
pub fn rigid_kernel_adjoint(u: &IntrinsicState) -> [(PeriodicField, PeriodicField); 3] {
    let emb = reconstruct_embedding(u, 0.0, [0.0, 0.0]);
    let n = u.n();
    let k = u.kappa();
    let psi = |i: usize| -> (PeriodicField, PeriodicField) {
        let a: Vec<f64> = emb.gamma.iter().map(|p| p[i]).collect();
        let b = (0..n)
            .map(|j| (k[j] * a[j] - emb.normal[j][i]) / u.g_at(j))
            .collect();
        (a, b)
    };
    let third = (vec![1.0; n], (0..n).map(|j| k[j] / u.g_at(j)).collect());
    [psi(0), psi(1), third]
}

/// Extrinsic velocities of the rigid motions: translations along x and y,
/// and rotation about the origin.
pub fn rigid_motions(u: &IntrinsicState) -> [ExtrinsicVelocity; 3] {
    let emb = reconstruct_embedding(u, 0.0, [0.0, 0.0]);
    let tx = ExtrinsicVelocity {
        v: emb.normal.iter().map(|v| v[0]).collect(),
        w: emb.tau.iter().map(|t| t[0]).collect(),
    };
    let ty = ExtrinsicVelocity {
        v: emb.normal.iter().map(|v| v[1]).collect(),
        w: emb.tau.iter().map(|t| t[1]).collect(),
    };
    // Rotation field J γ = (-γ₂, γ₁) projected on the frame.
    let rot = ExtrinsicVelocity {
        v: emb
            .gamma
            .iter()
            .zip(&emb.normal)
            .map(|(p, nv)| -p[1] * nv[0] + p[0] * nv[1])
            .collect(),
        w: emb
            .gamma
            .iter()
            .zip(&emb.tau)
            .map(|(p, t)| -p[1] * t[0] + p[0] * t[1])
            .collect(),
    };
    [tx, ty, rot]
}

/// `Dρ/Dt = ρ_t + κ V ρ - W ∇_s ρ`.
pub fn material_derivative(
    u: &IntrinsicState,
    vel: &ExtrinsicVelocity,
    rho: &[f64],
    drho_dt: &[f64],
) -> PeriodicField {
    let dr = grad_s(rho, u);
    (0..u.n())
        .map(|j| drho_dt[j] + u.kappa()[j] * vel.v[j] * rho[j] - vel.w[j] * dr[j])
        .collect()
}

/// Tangential velocity keeping the metric spatially uniform:
/// `W(s) = -∫_0^s κV dσ + ℓ(s) ∮ κV dσ` with `ℓ` the fractional arc length
/// of `γ([0, s])`, so `W(0) = 0`.
pub fn gauge_scaled_arclength(u: &IntrinsicState, v: &[f64]) -> PeriodicField {
    let n = u.n();
    let kv: Vec<f64> = (0..n).map(|j| u.kappa()[j] * v[j]).collect();
    let mean = u.arc_mean(&kv);
    let integrand: Vec<f64> = match u.metric() {
        Metric::Uniform(g) => kv.iter().map(|x| -(x - mean) * g).collect(),
        Metric::Varying(gs) => kv.iter().zip(gs).map(|(x, g)| -(x - mean) * g).collect(),
    };
    u.grid().cumulative_integral(&integrand)
}

/// Parameterisation-independence residual
/// `∂_κF ∇_s κ + ∂_ρF ∇_s ρ - ∇_s(g ∂_gF)`; vanishes in the continuum.
pub fn pip_residual(u: &IntrinsicState, rho: Option<&[f64]>, energy: &dyn EnergyModel) -> PeriodicField {
    let var = energy.variations(u, rho);
    let dk = grad_s(u.kappa(), u);
    let g_dg: Vec<f64> = (0..u.n()).map(|j| u.g_at(j) * var.d_g[j]).collect();
    let d_gdg = grad_s(&g_dg, u);
    let mut out: Vec<f64> = (0..u.n()).map(|j| var.d_kappa[j] * dk[j] - d_gdg[j]).collect();
    if let (Some(rho), Some(d_rho)) = (rho, var.d_rho.as_ref()) {
        let dr = grad_s(rho, u);
        for j in 0..u.n() {
            out[j] += d_rho[j] * dr[j];
        }
    }
    out
}

/// Normal velocity of the `L²`-`𝒢` gradient flow,
/// `V = -G ∂_κF - g κ ∂_gF + κ ρ ∂_ρF`.
pub fn gradient_normal_velocity(
    u: &IntrinsicState,
    rho: Option<&[f64]>,
    d_kappa: &[f64],
    d_g: &[f64],
    d_rho: Option<&[f64]>,
) -> PeriodicField {
    let g_dk = geometry_operator(u, d_kappa);
    let k = u.kappa();
    let mut v: Vec<f64> = (0..u.n())
        .map(|j| -g_dk[j] - u.g_at(j) * k[j] * d_g[j])
        .collect();
    if let (Some(rho), Some(d_rho)) = (rho, d_rho) {
        for j in 0..u.n() {
            v[j] += k[j] * rho[j] * d_rho[j];
        }
    }
    v
}
