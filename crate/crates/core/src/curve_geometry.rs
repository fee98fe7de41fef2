//! Closed planar curves stored intrinsically as curvature and metric samples.
//!
//! An [`IntrinsicState`] holds `κ(s_j)` and the metric `g(s_j) = |∂_s γ|`.
//! The embedding is recovered by integrating `θ' = κ g` and `γ' = τ(θ) g`;
//! the curve closes when the jump functional `(⟦γ⟧, ⟦θ⟧ - 2π)` vanishes.
//! [`closure_project`] pushes a nearly closed state back onto the closed set.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{CurveError, Result};
pub use crate::grid::{DiffScheme, ParamGrid};

/// Arc-length metric samples.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// Scaled arc-length gauge: one value shared by every grid point.
    Uniform(f64),
    /// Pointwise metric, used when probing energies in non-uniform directions.
    Varying(Vec<f64>),
}

impl Metric {
    pub fn at(&self, j: usize) -> f64 {
        match self {
            Metric::Uniform(g) => *g,
            Metric::Varying(v) => v[j],
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, Metric::Uniform(_))
    }

    pub fn to_vec(&self, n: usize) -> Vec<f64> {
        match self {
            Metric::Uniform(g) => vec![*g; n],
            Metric::Varying(v) => v.clone(),
        }
    }

    /// The shared value when uniform.
    pub fn uniform_value(&self) -> Option<f64> {
        match self {
            Metric::Uniform(g) => Some(*g),
            Metric::Varying(_) => None,
        }
    }
}

/// Intrinsic coordinates `U = (κ, g)` on a parameter grid.
#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicState {
    grid: ParamGrid,
    kappa: Vec<f64>,
    metric: Metric,
}

impl IntrinsicState {
    pub fn new(grid: ParamGrid, kappa: Vec<f64>, metric: Metric) -> Result<Self> {
        grid.check_len(&kappa)?;
        if kappa.iter().any(|k| !k.is_finite()) {
            return Err(CurveError::NonFinite("curvature"));
        }
        match &metric {
            Metric::Uniform(g) => {
                if !g.is_finite() {
                    return Err(CurveError::NonFinite("metric"));
                }
                if *g <= 0.0 {
                    return Err(CurveError::NonPositiveMetric(*g));
                }
            }
            Metric::Varying(v) => {
                grid.check_len(v)?;
                if let Some(bad) = v.iter().find(|g| !(**g > 0.0) || !g.is_finite()) {
                    if !bad.is_finite() {
                        return Err(CurveError::NonFinite("metric"));
                    }
                    return Err(CurveError::NonPositiveMetric(*bad));
                }
            }
        }
        Ok(Self {
            grid,
            kappa,
            metric,
        })
    }

    /// State in the scaled arc-length gauge.
    pub fn uniform(grid: ParamGrid, kappa: Vec<f64>, g: f64) -> Result<Self> {
        Self::new(grid, kappa, Metric::Uniform(g))
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn g_at(&self, j: usize) -> f64 {
        self.metric.at(j)
    }

    pub fn g_vec(&self) -> Vec<f64> {
        self.metric.to_vec(self.n())
    }

    /// Return a copy with the curvature replaced.
    pub fn with_kappa(&self, kappa: Vec<f64>) -> Result<Self> {
        Self::new(self.grid.clone(), kappa, self.metric.clone())
    }

    pub fn with_metric(&self, metric: Metric) -> Result<Self> {
        Self::new(self.grid.clone(), self.kappa.clone(), metric)
    }

    /// `∮ f dσ = Σ f_j g_j / n`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        let n = self.n() as f64;
        match &self.metric {
            Metric::Uniform(g) => f.iter().sum::<f64>() * g / n,
            Metric::Varying(v) => f.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / n,
        }
    }

    /// `⟨f, h⟩ = ∮ f h dσ`.
    pub fn inner(&self, f: &[f64], h: &[f64]) -> f64 {
        let n = self.n() as f64;
        match &self.metric {
            Metric::Uniform(g) => f.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() * g / n,
            Metric::Varying(v) => {
                f.iter()
                    .zip(h)
                    .zip(v)
                    .map(|((a, b), w)| a * b * w)
                    .sum::<f64>()
                    / n
            }
        }
    }

    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }

    /// Average with respect to arc length.
    pub fn arc_mean(&self, f: &[f64]) -> f64 {
        self.integrate(f) / total_length(self)
    }

    pub fn is_finite(&self) -> bool {
        self.kappa.iter().all(|k| k.is_finite())
            && match &self.metric {
                Metric::Uniform(g) => g.is_finite(),
                Metric::Varying(v) => v.iter().all(|g| g.is_finite()),
            }
    }
}

/// `|Γ| = ∮ dσ`.
pub fn total_length(u: &IntrinsicState) -> f64 {
    match u.metric() {
        Metric::Uniform(g) => *g,
        Metric::Varying(v) => v.iter().sum::<f64>() / v.len() as f64,
    }
}

/// Reconstructed plane curve with its Frenet frame.
#[derive(Clone, Debug)]
pub struct CurveEmbedding {
    pub theta: Vec<f64>,
    pub gamma: Vec<[f64; 2]>,
    pub tau: Vec<[f64; 2]>,
    pub normal: Vec<[f64; 2]>,
}

impl CurveEmbedding {
    pub fn gamma_x(&self) -> Vec<f64> {
        self.gamma.iter().map(|p| p[0]).collect()
    }

    pub fn gamma_y(&self) -> Vec<f64> {
        self.gamma.iter().map(|p| p[1]).collect()
    }
}

/// Unit tangent `τ = (cos θ, sin θ)`.
pub fn tangent(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

/// Normal `n = (sin θ, -cos θ)`, so that `∂_s τ = -κ n g`.
pub fn normal(theta: f64) -> [f64; 2] {
    [theta.sin(), -theta.cos()]
}

fn weighted(u: &IntrinsicState, f: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..u.n()).map(|j| f(j) * u.g_at(j)).collect()
}

/// Integrate the frame equations from `(theta0, gamma0)` at `s = 0`.
pub fn reconstruct_embedding(u: &IntrinsicState, theta0: f64, gamma0: [f64; 2]) -> CurveEmbedding {
    let grid = u.grid();
    let kg = weighted(u, |j| u.kappa()[j]);
    let theta: Vec<f64> = grid
        .cumulative_integral_spectral(&kg)
        .into_iter()
        .map(|v| theta0 + v)
        .collect();
    let tau: Vec<[f64; 2]> = theta.iter().map(|&t| tangent(t)).collect();
    let normal: Vec<[f64; 2]> = theta.iter().map(|&t| normal(t)).collect();
    let tx = grid.cumulative_integral_spectral(&weighted(u, |j| tau[j][0]));
    let ty = grid.cumulative_integral_spectral(&weighted(u, |j| tau[j][1]));
    let gamma = tx
        .iter()
        .zip(&ty)
        .map(|(x, y)| [gamma0[0] + x, gamma0[1] + y])
        .collect();
    CurveEmbedding {
        theta,
        gamma,
        tau,
        normal,
    }
}

/// The jump functional `𝒥(U) = (⟦γ⟧, ⟦θ⟧ - 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureResidual {
    pub jump_gamma: [f64; 2],
    pub jump_theta: f64,
}

impl ClosureResidual {
    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.jump_gamma[0], self.jump_gamma[1], self.jump_theta)
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }
}

pub fn closure_residual(u: &IntrinsicState) -> ClosureResidual {
    let emb = reconstruct_embedding(u, 0.0, [0.0, 0.0]);
    let jx = u.integrate(&emb.tau.iter().map(|t| t[0]).collect::<Vec<_>>());
    let jy = u.integrate(&emb.tau.iter().map(|t| t[1]).collect::<Vec<_>>());
    let jt = u.integrate(u.kappa()) - 2.0 * PI;
    ClosureResidual {
        jump_gamma: [jx, jy],
        jump_theta: jt,
    }
}

/// Newton settings for [`closure_project_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosureOptions {
    /// Target for `‖𝒥‖`.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest admissible starting residual, with `⟦γ⟧` measured in units of `|Γ|`.
    pub basin: f64,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 30,
            basin: 0.5,
        }
    }
}

/// Project onto closed curves with default options.
pub fn closure_project(u: &IntrinsicState) -> Result<IntrinsicState> {
    closure_project_with(u, &ClosureOptions::default())
}

/// Restore closure by a three-parameter curvature correction.
///
/// The correction lies in the span of `{γ₁ - γ̄₁, γ₂ - γ̄₂, 1}`, the first
/// components of the adjoint kernel fields, which are the `L²(dσ)` gradients
/// of the jump functional. The metric is left untouched so that the total
/// length does not change.
pub fn closure_project_with(u: &IntrinsicState, opts: &ClosureOptions) -> Result<IntrinsicState> {
    let r0 = closure_residual(u);
    if r0.norm() <= opts.tol {
        return Ok(u.clone());
    }
    let len = total_length(u);
    let scaled = Vector3::new(
        r0.jump_gamma[0] / len,
        r0.jump_gamma[1] / len,
        r0.jump_theta,
    )
    .norm();
    if scaled > opts.basin {
        return Err(CurveError::OutsideClosureBasin {
            residual: r0.norm(),
            limit: opts.basin,
        });
    }

    let emb = reconstruct_embedding(u, 0.0, [0.0, 0.0]);
    let gx = emb.gamma_x();
    let gy = emb.gamma_y();
    let mx = u.arc_mean(&gx);
    let my = u.arc_mean(&gy);
    // Directions scaled to unit dσ-norm for a well-conditioned Newton matrix.
    let mut dirs = [
        gx.iter().map(|x| x - mx).collect::<Vec<_>>(),
        gy.iter().map(|y| y - my).collect::<Vec<_>>(),
        vec![1.0; u.n()],
    ];
    for d in dirs.iter_mut() {
        let nrm = u.l2_norm(d).max(f64::MIN_POSITIVE);
        d.iter_mut().for_each(|x| *x /= nrm);
    }

    let apply = |c: &Vector3<f64>| -> Result<IntrinsicState> {
        let kappa: Vec<f64> = (0..u.n())
            .map(|j| u.kappa()[j] + c[0] * dirs[0][j] + c[1] * dirs[1][j] + c[2] * dirs[2][j])
            .collect();
        u.with_kappa(kappa)
    };

    let mut c = Vector3::zeros();
    let mut res = r0.as_vector();
    let step = 1e-6 / len.sqrt();
    for _ in 0..opts.max_iter {
        let mut jac = Matrix3::zeros();
        for i in 0..3 {
            let mut cp = c;
            let mut cm = c;
            cp[i] += step;
            cm[i] -= step;
            let rp = closure_residual(&apply(&cp)?).as_vector();
            let rm = closure_residual(&apply(&cm)?).as_vector();
            jac.set_column(i, &((rp - rm) / (2.0 * step)));
        }
        let delta = jac
            .lu()
            .solve(&(-res))
            .ok_or(CurveError::ClosureNotConverged {
                iterations: 0,
                residual: res.norm(),
            })?;
        c += delta;
        let current = apply(&c)?;
        res = closure_residual(&current).as_vector();
        if res.norm() <= opts.tol {
            return Ok(current);
        }
    }
    Err(CurveError::ClosureNotConverged {
        iterations: opts.max_iter,
        residual: res.norm(),
    })
}

/// Parameterised families of initial curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum NamedCurve {
    Circle {
        #[serde(default = "one")]
        radius: f64,
    },
    PerturbedCircle {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "two")]
        mode: u32,
        #[serde(default = "point_three")]
        amplitude: f64,
    },
    /// Three-lobed curve `κ = (2π/L)(1 + a cos(6πs) + asym cos(2πs))`, `L = 2πR`.
    Trillium {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "trillium_amplitude")]
        amplitude: f64,
        #[serde(default = "trillium_asym")]
        asym: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn two() -> u32 {
    2
}
fn point_three() -> f64 {
    0.3
}
fn trillium_amplitude() -> f64 {
    1.5
}
fn trillium_asym() -> f64 {
    0.05
}

impl NamedCurve {
    pub fn circle(radius: f64) -> Self {
        NamedCurve::Circle { radius }
    }

    pub fn perturbed_circle(radius: f64, mode: u32, amplitude: f64) -> Self {
        NamedCurve::PerturbedCircle {
            radius,
            mode,
            amplitude,
        }
    }

    pub fn trillium() -> Self {
        NamedCurve::Trillium {
            radius: 1.0,
            amplitude: trillium_amplitude(),
            asym: trillium_asym(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            NamedCurve::Circle { .. } => "circle",
            NamedCurve::PerturbedCircle { .. } => "perturbed_circle",
            NamedCurve::Trillium { .. } => "trillium",
        }
    }

    /// Parse the bare family name with default parameters.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "circle" => Some(Self::circle(1.0)),
            "perturbed_circle" | "perturbed-circle" => Some(Self::perturbed_circle(1.0, 2, 0.3)),
            "trillium" => Some(Self::trillium()),
            _ => None,
        }
    }
}

/// Build a closed curve from a named family.
pub fn make_named_curve(curve: &NamedCurve, grid: &ParamGrid) -> Result<IntrinsicState> {
    let s = grid.s_values();
    let state = match *curve {
        NamedCurve::Circle { radius } => {
            check_radius(radius)?;
            return IntrinsicState::uniform(grid.clone(), vec![1.0 / radius; grid.n()], 2.0 * PI * radius);
        }
        NamedCurve::PerturbedCircle {
            radius,
            mode,
            amplitude,
        } => {
            check_radius(radius)?;
            let kappa = s
                .iter()
                .map(|s| (1.0 + amplitude * (2.0 * PI * mode as f64 * s).cos()) / radius)
                .collect();
            IntrinsicState::uniform(grid.clone(), kappa, 2.0 * PI * radius)?
        }
        NamedCurve::Trillium {
            radius,
            amplitude,
            asym,
        } => {
            check_radius(radius)?;
            let len = 2.0 * PI * radius;
            let kappa = s
                .iter()
                .map(|s| {
                    (2.0 * PI / len)
                        * (1.0 + amplitude * (6.0 * PI * s).cos() + asym * (2.0 * PI * s).cos())
                })
                .collect();
            IntrinsicState::uniform(grid.clone(), kappa, len)?
        }
    };
    closure_project(&state)
}

fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(CurveError::InvalidParameter(format!(
            "radius must be positive, got {r}"
        )));
    }
    Ok(())
}

/// Number of sign changes of a periodic sequence.
pub fn sign_changes(f: &[f64]) -> usize {
    let n = f.len();
    (0..n)
        .filter(|&j| (f[j] > 0.0) != (f[(j + 1) % n] > 0.0))
        .count()
}
