//! Linearly implicit Euler steps with step-doubling error control.
//!
//! One step solves `(I - dt L) k = f(y)` and sets `y + dt k`, where `L` is a
//! frozen linear approximation of the stiff part supplied by the system. Any
//! choice of `L` gives a consistent first-order method; `L` only decides which
//! modes are damped implicitly. Two half steps are compared with one full
//! step for the error estimate, and the accepted value is the extrapolation
//! `2 y_half - y_full`.

use serde::{Deserialize, Serialize};

use crate::error::{CurveError, Result};

/// A stiff system in flat-vector form.
pub trait SemiImplicitSystem {
    /// `dy/dt`.
    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>>;

    /// Solve `(I - dt L(y0)) x = b` with `L` frozen at `y0`.
    fn solve_linear(&self, y0: &[f64], dt: f64, b: &[f64]) -> Result<Vec<f64>>;

    /// Hard constraints on an accepted state; an error aborts the run.
    fn admissible(&self, _y: &[f64], _t: f64) -> Result<()> {
        Ok(())
    }
}

/// Adaptive step-size state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepController {
    pub dt: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub rtol: f64,
    pub atol: f64,
    pub safety: f64,
}

impl Default for StepController {
    fn default() -> Self {
        Self {
            dt: 1e-6,
            dt_min: 1e-14,
            dt_max: 1e-1,
            rtol: 1e-5,
            atol: 1e-8,
            safety: 0.9,
        }
    }
}

impl StepController {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt_min > 0.0
            && self.dt_min <= self.dt
            && self.dt <= self.dt_max
            && self.rtol > 0.0
            && self.atol > 0.0
            && self.safety > 0.0
            && self.safety <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(CurveError::InvalidParameter(format!(
                "step controller needs 0 < dt_min <= dt <= dt_max, positive tolerances and safety in (0, 1]: {self:?}"
            )))
        }
    }
}

/// Result of one attempted step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub y: Vec<f64>,
    pub t: f64,
    pub accepted: bool,
    /// Scaled error estimate; the step is accepted when it is at most 1.
    pub err: f64,
    pub dt_used: f64,
}

/// One linearly implicit Euler step.
pub fn euler_step<S: SemiImplicitSystem + ?Sized>(sys: &S, y: &[f64], dt: f64) -> Result<Vec<f64>> {
    let f = sys.rhs(y)?;
    let k = sys.solve_linear(y, dt, &f)?;
    Ok(y.iter().zip(&k).map(|(a, b)| a + dt * b).collect())
}

/// Attempt one step of size `ctrl.dt` from `(y, t)` and update `ctrl.dt`.
///
/// A rejected step returns the unchanged state with `accepted = false`.
/// Non-finite trial states count as rejections. If the step size falls
/// below `dt_min` the run fails.
pub fn step_adaptive<S: SemiImplicitSystem + ?Sized>(
    sys: &S,
    y: &[f64],
    t: f64,
    ctrl: &mut StepController,
) -> Result<StepOutcome> {
    let dt = ctrl.dt.min(ctrl.dt_max);
    let trial = || -> Result<(Vec<f64>, Vec<f64>)> {
        let full = euler_step(sys, y, dt)?;
        let half = euler_step(sys, y, 0.5 * dt)?;
        let two = euler_step(sys, &half, 0.5 * dt)?;
        Ok((full, two))
    };
    let (full, two, mut err) = match trial() {
        Ok((full, two)) => (full, two, 0.0_f64),
        // Trial states that leave the admissible set are rejections.
        Err(
            CurveError::NonFinite(_)
            | CurveError::NonPositiveMetric(_)
            | CurveError::SingularHelmholtz { .. }
            | CurveError::Blowup(_),
        ) => (Vec::new(), Vec::new(), f64::INFINITY),
        Err(e) => return Err(e),
    };
    if err == 0.0 {
        for i in 0..y.len() {
            let scale = ctrl.atol + ctrl.rtol * y[i].abs().max(two[i].abs());
            let e = (two[i] - full[i]).abs() / scale;
            if !e.is_finite() {
                err = f64::INFINITY;
                break;
            }
            err = err.max(e);
        }
    }
    // Local error of the half-step pair is O(dt²).
    let factor = if err > 0.0 {
        ctrl.safety * err.powf(-0.5)
    } else {
        5.0
    };
    if err <= 1.0 {
        let y_new: Vec<f64> = two.iter().zip(&full).map(|(a, b)| 2.0 * a - b).collect();
        sys.admissible(&y_new, t + dt)?;
        ctrl.dt = (dt * factor.clamp(0.2, 5.0)).clamp(ctrl.dt_min, ctrl.dt_max);
        Ok(StepOutcome {
            y: y_new,
            t: t + dt,
            accepted: true,
            err,
            dt_used: dt,
        })
    } else {
        let next = dt * factor.clamp(0.1, 0.5);
        if next < ctrl.dt_min {
            return Err(CurveError::StepTooSmall {
                dt: next,
                dt_min: ctrl.dt_min,
                t,
            });
        }
        ctrl.dt = next;
        Ok(StepOutcome {
            y: y.to_vec(),
            t,
            accepted: false,
            err,
            dt_used: dt,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);

    impl SemiImplicitSystem for Decay {
        fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
            Ok(y.iter().map(|v| -self.0 * v).collect())
        }
        fn solve_linear(&self, _y0: &[f64], dt: f64, b: &[f64]) -> Result<Vec<f64>> {
            Ok(b.iter().map(|v| v / (1.0 + dt * self.0)).collect())
        }
    }

    #[test]
    fn extrapolated_step_is_second_order() {
        let sys = Decay(3.0);
        let mut errs = Vec::new();
        for dt in [0.02, 0.01] {
            let mut ctrl = StepController {
                dt,
                dt_min: 1e-12,
                dt_max: 1.0,
                rtol: 1.0,
                atol: 1.0,
                safety: 0.9,
            };
            let out = step_adaptive(&sys, &[1.0], 0.0, &mut ctrl).unwrap();
            assert!(out.accepted);
            errs.push((out.y[0] - (-3.0 * dt).exp()).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 2.7, "local order {order}");
    }
}
