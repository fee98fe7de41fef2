//! Residual of the Euler-Lagrange system of the limit energy `F₀(U, T)`.

use super::gamma::{limit_density, surface_tension_constants, DoubleWell, TransitionSet};
use super::NodalModel;
use crate::curve_geometry::{reconstruct_embedding, IntrinsicState};
use crate::surface_calculus::{laplace_s, PeriodicField};

/// Bulk residual on the grid and, per transition point, the residuals of the
/// two Robin conditions and of curvature continuity.
#[derive(Clone, Debug, PartialEq)]
pub struct ElResidual {
    pub bulk: PeriodicField,
    pub robin: Vec<[f64; 3]>,
}

/// Value and first derivative at `x0` of the interpolating polynomial.
fn lagrange_value_and_slope(xs: &[f64], ys: &[f64], x0: f64) -> (f64, f64) {
    let m = xs.len();
    let mut value = 0.0;
    let mut slope = 0.0;
    for a in 0..m {
        let mut denom = 1.0;
        for b in 0..m {
            if b != a {
                denom *= xs[a] - xs[b];
            }
        }
        let mut prod = 1.0;
        let mut dprod = 0.0;
        for b in 0..m {
            if b != a {
                // d/dx of the running product via the product rule.
                dprod = dprod * (x0 - xs[b]) + prod;
                prod *= x0 - xs[b];
            }
        }
        value += ys[a] * prod / denom;
        slope += ys[a] * dprod / denom;
    }
    (value, slope)
}

/// One-sided limits `(κ(s⁻), ∇_sκ(s⁻), κ(s⁺), ∇_sκ(s⁺))` from degree-four
/// fits through the five nearest samples on each side.
fn one_sided(u: &IntrinsicState, s: f64) -> (f64, f64, f64, f64) {
    const POINTS: usize = 5;
    let n = u.n() as i64;
    let h = u.grid().h();
    let x = s.rem_euclid(1.0) / h;
    let base = x.floor() as i64;
    let g = u.grid().interpolate(&u.g_vec(), s);
    let side = |start: i64, step: i64| {
        let mut xs = Vec::with_capacity(POINTS);
        let mut ys = Vec::with_capacity(POINTS);
        let mut j = start;
        while xs.len() < POINTS {
            let off = (j as f64 - x) * h;
            if off.abs() > 1e-12 * h {
                xs.push(off);
                ys.push(u.kappa()[j.rem_euclid(n) as usize]);
            }
            j += step;
        }
        let (v, d) = lagrange_value_and_slope(&xs, &ys, 0.0);
        (v, d / g)
    };
    let (km, dm) = side(base, -1);
    let (kp, dp) = side(base + 1, 1);
    (km, dm, kp, dp)
}

/// Residual of the Euler-Lagrange system for multipliers
/// `λ = (λ₁, λ₂, λ₃, λ₄)`:
///
/// bulk `-δ²Δ_sκ + ∂_κf + ∂_ρf ρ̂' - δ(λ₁γ₁ + λ₂γ₂ + λ₃ + λ₄ρ̂')` with `f`
/// evaluated at `ρ̂` and `ρ̂' = ρ±'(κ)` on `𝕊±`; at each `s_i` the entries
/// `∇_sκ(s_i⁺) + 1 - c`, `∇_sκ(s_i⁻) + 1 + c` and `κ(s_i⁺) - κ(s_i⁻)`,
/// with `c = 3ϑ₁P²(κ_i)P'(κ_i)/(2δ)`.
///
/// The bulk entries use the global Laplacian, so they are only meaningful
/// a few grid points away from the transitions.
pub fn el_residual(
    u: &IntrinsicState,
    t: &TransitionSet,
    lambda: [f64; 4],
    delta: f64,
    nodal: &NodalModel,
) -> ElResidual {
    let emb = reconstruct_embedding(u, 0.0, [0.0, 0.0]);
    let lap = laplace_s(u.kappa(), u);
    let rho_hat = limit_density(u, t, nodal);
    let d_minus = nodal.rho_minus.derivative();
    let d_plus = nodal.rho_plus.derivative();
    let bulk = (0..u.n())
        .map(|j| {
            let k = u.kappa()[j];
            let slope = if t.is_plus(u.grid().s(j)) {
                d_plus.eval(k)
            } else {
                d_minus.eval(k)
            };
            let pot = nodal.potentials(k, rho_hat[j]);
            let forcing = lambda[0] * emb.gamma[j][0]
                + lambda[1] * emb.gamma[j][1]
                + lambda[2]
                + lambda[3] * slope;
            -delta * delta * lap[j] + pot.f_kappa + pot.f_rho * slope - delta * forcing
        })
        .collect();

    let theta1 = surface_tension_constants(&DoubleWell::default()).theta1;
    let robin = t
        .points()
        .iter()
        .map(|&s| {
            let (km, dm, kp, dp) = one_sided(u, s);
            let ki = 0.5 * (km + kp);
            let p = nodal.gap(ki);
            let c = 3.0 * theta1 * p * p * nodal.gap_derivative(ki) / (2.0 * delta);
            [dp - (-1.0 + c), dm - (-1.0 - c), kp - km]
        })
        .collect();
    ElResidual { bulk, robin }
}
