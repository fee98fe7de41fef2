use rustfft::num_complex::Complex64;

use crate::curve_geometry::{IntrinsicState, ParamGrid};
use crate::energies::{NodalModel, PhaseSepParams, Poly, WillmoreForm};
use crate::error::{CurveError, Result};

use super::family::{DensityKind, FlowFamily, FlowState};
use super::integrator::SemiImplicitSystem;
use super::rhs::evaluate_rhs;

/// Smallest membrane density tolerated before a run is aborted.
pub const MIN_MEMBRANE_DENSITY: f64 = 0.1;

/// A flow family on a fixed grid, in the flat layout `[κ, density?, g]`.
///
/// Agent densities are stored as `gρ`, so the agent mass `∮ρ dσ` is the
/// plain mean of that block and every linear step conserves it. Membrane
/// densities are stored as they are.
#[derive(Clone, Debug)]
pub struct FlowSystem {
    family: FlowFamily,
    grid: ParamGrid,
    kind: DensityKind,
}

/// Frozen linear part as polynomials in `q ≥ 0`, the symbol of `-Δ_s`.
struct ModeCoefficients {
    kk: Poly,
    kr: Poly,
    rk: Poly,
    rr: Poly,
}

impl FlowSystem {
    pub fn new(family: FlowFamily, grid: ParamGrid) -> Self {
        let kind = family.density_kind();
        Self { family, grid, kind }
    }

    pub fn family(&self) -> &FlowFamily {
        &self.family
    }

    pub fn grid(&self) -> &ParamGrid {
        &self.grid
    }

    fn has_density(&self) -> bool {
        self.kind != DensityKind::None
    }

    pub fn pack(&self, state: &FlowState) -> Result<Vec<f64>> {
        let g = state.u.metric().uniform_value().ok_or_else(|| {
            CurveError::InvalidParameter("flows run in the scaled arc-length gauge (uniform g)".into())
        })?;
        let mut y = state.u.kappa().to_vec();
        if let Some(rho) = state.density(self.kind)? {
            let w = self.density_weight(g);
            y.extend(rho.iter().map(|r| w * r));
        }
        y.push(g);
        Ok(y)
    }

    pub fn unpack(&self, y: &[f64], t: f64) -> Result<FlowState> {
        let n = self.grid.n();
        let g = y[y.len() - 1];
        let u = IntrinsicState::uniform(self.grid.clone(), y[..n].to_vec(), g)?;
        let w = self.density_weight(g);
        let density = self
            .has_density()
            .then(|| y[n..2 * n].iter().map(|q| q / w).collect());
        let (rho, rho_m) = match self.kind {
            DensityKind::None => (None, None),
            DensityKind::Agent => (density, None),
            DensityKind::Membrane => (None, density),
        };
        Ok(FlowState { u, rho, rho_m, t })
    }

    fn density_weight(&self, g: f64) -> f64 {
        if self.kind == DensityKind::Agent {
            g
        } else {
            1.0
        }
    }

    fn coefficients(&self, state: &FlowState) -> ModeCoefficients {
        let zero = || Poly(vec![0.0]);
        let k = state.u.kappa();
        match &self.family {
            FlowFamily::Curvature { form } | FlowFamily::Incompressible { base: form } => {
                ModeCoefficients {
                    kk: Poly(vec![0.0, 0.0, -form_stiffness(form, k)]),
                    kr: zero(),
                    rk: zero(),
                    rr: zero(),
                }
            }
            FlowFamily::Penalized { epsilon, base } => {
                let rho = state.rho_m.as_deref().expect("membrane density present");
                let c4 = form_stiffness(base, k);
                let kr_vals: Vec<f64> = k.iter().zip(rho).map(|(a, b)| a * b).collect();
                let c0 = kr_vals.iter().fold(0.0_f64, |m, x| m.max(x * x));
                let a = state.u.arc_mean(&kr_vals);
                let k2: Vec<f64> = k.iter().map(|x| x * x).collect();
                let kbar2 = state.u.arc_mean(&k2);
                ModeCoefficients {
                    kk: Poly(vec![0.0, 0.0, -c4]),
                    kr: Poly(vec![-a * kbar2 / epsilon, a / epsilon]),
                    rk: Poly(vec![0.0, c4 * a]),
                    rr: Poly(vec![-c0 / epsilon, -1.0 / epsilon]),
                }
            }
            FlowFamily::PhaseSep { params, nodal } => {
                let rho = state.rho.as_deref().expect("agent density present");
                let s = max_bulk_curvature(k, rho, params, nodal);
                ModeCoefficients {
                    kk: Poly(vec![0.0, 0.0, -s, -params.delta]),
                    kr: zero(),
                    rk: zero(),
                    rr: Poly(vec![0.0, -s, -params.epsilon]),
                }
            }
        }
    }
}

/// Coefficient of the leading `-Δ_s²` term in `∂_tκ` for a curvature velocity.
fn form_stiffness(form: &WillmoreForm, kappa: &[f64]) -> f64 {
    match form {
        WillmoreForm::WillmoreBeta { .. } => 1.0,
        WillmoreForm::General(e) => {
            let d2 = e.density.derivative().derivative();
            kappa
                .iter()
                .map(|&x| d2.eval(x))
                .fold(f64::NEG_INFINITY, f64::max)
                .max(1e-3)
        }
    }
}

/// Largest positive eigenvalue over the grid of the Hessian of
/// `f/δ + F/ε` in `(κ, ρ)`, by central differences of the gradients.
fn max_bulk_curvature(kappa: &[f64], rho: &[f64], p: &PhaseSepParams, nodal: &NodalModel) -> f64 {
    let h = 1e-5;
    let grad = |k: f64, r: f64| {
        let pot = nodal.potentials(k, r);
        (
            pot.f_kappa / p.delta + pot.big_f_kappa / p.epsilon,
            pot.f_rho / p.delta + pot.big_f_rho / p.epsilon,
        )
    };
    kappa
        .iter()
        .zip(rho)
        .map(|(&k, &r)| {
            let (kp, rp) = grad(k + h, r);
            let (km, rm) = grad(k - h, r);
            let (kq, rq) = grad(k, r + h);
            let (kl, rl) = grad(k, r - h);
            let a = (kp - km) / (2.0 * h);
            let d = (rq - rl) / (2.0 * h);
            let b = 0.25 * ((rp - rm) + (kq - kl)) / h;
            let mid = 0.5 * (a + d);
            let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
            mid + rad
        })
        .fold(0.0_f64, f64::max)
}

impl SemiImplicitSystem for FlowSystem {
    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        let state = self.unpack(y, 0.0)?;
        let r = evaluate_rhs(&state, &self.family)?;
        let mut out = r.dkappa_dt;
        match (self.kind, r.density_dt, r.material_rate) {
            (DensityKind::Agent, _, Some(material)) => {
                // Conservative form (gρ)_t = g Dρ/Dt + ∂_s(Wρ); the gauge
                // relation for W turns the stretching and transport terms
                // into this flux, whose grid mean vanishes exactly.
                let g = y[y.len() - 1];
                let rho = state.rho.as_deref().expect("agent density present");
                let flux: Vec<f64> = r.w.iter().zip(rho).map(|(w, p)| w * p).collect();
                let div = self.grid.d1(&flux);
                out.extend(material.iter().zip(&div).map(|(m, d)| g * m + d));
            }
            (_, Some(d), _) => out.extend(d),
            _ => {}
        }
        out.push(r.dg_dt);
        Ok(out)
    }

    fn solve_linear(&self, y0: &[f64], dt: f64, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.n();
        let state = self.unpack(y0, 0.0)?;
        let c = self.coefficients(&state);
        let g = y0[y0.len() - 1];
        let d2 = self.grid.d2_symbol();
        let mut bk = self.grid.fft(&b[..n]);
        if self.has_density() {
            let mut br = self.grid.fft(&b[n..2 * n]);
            for k in 0..n {
                let q = -d2[k] / (g * g);
                let a11 = 1.0 - dt * c.kk.eval(q);
                let a12 = -dt * c.kr.eval(q);
                let a21 = -dt * c.rk.eval(q);
                let a22 = 1.0 - dt * c.rr.eval(q);
                let det = a11 * a22 - a12 * a21;
                let (x1, x2) = (bk[k], br[k]);
                bk[k] = (x1 * a22 - x2 * a12) / det;
                br[k] = (x2 * a11 - x1 * a21) / det;
            }
            let mut out = self.grid.ifft_real(bk);
            out.extend(self.grid.ifft_real(br));
            out.push(b[2 * n]);
            Ok(out)
        } else {
            for (k, v) in bk.iter_mut().enumerate() {
                let q = -d2[k] / (g * g);
                *v /= Complex64::new(1.0 - dt * c.kk.eval(q), 0.0);
            }
            let mut out = self.grid.ifft_real(bk);
            out.push(b[n]);
            Ok(out)
        }
    }

    fn admissible(&self, y: &[f64], t: f64) -> Result<()> {
        if y.iter().any(|v| !v.is_finite()) {
            return Err(CurveError::Blowup(t));
        }
        if self.kind == DensityKind::Membrane {
            let n = self.grid.n();
            let min = y[n..2 * n].iter().copied().fold(f64::INFINITY, f64::min);
            if min < MIN_MEMBRANE_DENSITY {
                return Err(CurveError::DensityCollapse { min, t });
            }
        }
        Ok(())
    }
}
