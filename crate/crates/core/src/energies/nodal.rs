use serde::{Deserialize, Serialize};

use super::Poly;
use crate::error::{CurveError, Result};

/// Nodal lines of the mixing potentials.
///
/// `f = (κ - κ₀(ρ))²/2` vanishes on the graph of `κ₀`, and
/// `F = 4(ρ - ρ₋(κ))²(ρ - ρ₊(κ))²` vanishes on the graphs of `ρ₋` and `ρ₊`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodalModel {
    /// `κ₀(ρ)`, coefficients in ascending powers of `ρ`.
    pub kappa0: Poly,
    /// `ρ₋(κ)`, coefficients in ascending powers of `κ`.
    pub rho_minus: Poly,
    /// `ρ₊(κ)`, coefficients in ascending powers of `κ`.
    pub rho_plus: Poly,
    /// Curvature interval on which the invariants are enforced.
    #[serde(default = "default_range")]
    pub kappa_range: [f64; 2],
    /// Required lower bound on the gap `P = ρ₊ - ρ₋` over the range.
    #[serde(default = "default_gap")]
    pub min_gap: f64,
}

fn default_range() -> [f64; 2] {
    [-2.0, 3.0]
}

fn default_gap() -> f64 {
    0.05
}

/// Values and first derivatives of `f` and `F` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointPotentials {
    pub f: f64,
    pub f_kappa: f64,
    pub f_rho: f64,
    pub big_f: f64,
    pub big_f_kappa: f64,
    pub big_f_rho: f64,
}

/// Double-nodal points: `κ₀` meets `ρ₋` at `(0.19, 1.3)` and `ρ₊` at `(0.95, -0.7)`.
pub const DOUBLE_NODAL_MINUS: (f64, f64) = (0.19, 1.3);
pub const DOUBLE_NODAL_PLUS: (f64, f64) = (0.95, -0.7);

/// Quadratic nodal lines through the two double-nodal points.
///
/// `κ₀` carries the shape parameter `c` as the coefficient of
/// `(ρ - ρ₁)(ρ - ρ₂)`; `ρ₋` has its minimum at `κ = 0.3` and `ρ₊` its
/// maximum `0.98` at `κ = 0.2`, so both are non-monotone on the working range.
pub fn default_nodal_model() -> NodalModel {
    nodal_model_with_shape(1.0).expect("default nodal model satisfies its invariants")
}

/// Default family with a chosen `κ₀` curvature parameter.
pub fn nodal_model_with_shape(c: f64) -> Result<NodalModel> {
    let (r1, k1) = DOUBLE_NODAL_MINUS;
    let (r2, k2) = DOUBLE_NODAL_PLUS;
    let slope = (k2 - k1) / (r2 - r1);
    // k1 + slope (ρ - r1) + c (ρ - r1)(ρ - r2)
    let kappa0 = Poly(vec![
        k1 - slope * r1 + c * r1 * r2,
        slope - c * (r1 + r2),
        c,
    ]);
    let rho_minus = Poly::quadratic_about(0.3, (r1 - 0.15) / (k1 - 0.3).powi(2), 0.0, 0.15);
    let rho_plus = Poly::quadratic_about(0.2, -(0.98 - r2) / (k2 - 0.2).powi(2), 0.0, 0.98);
    let model = NodalModel {
        kappa0,
        rho_minus,
        rho_plus,
        kappa_range: default_range(),
        min_gap: default_gap(),
    };
    model.validate()?;
    Ok(model)
}

impl NodalModel {
    pub fn kappa0(&self, rho: f64) -> f64 {
        self.kappa0.eval(rho)
    }

    pub fn rho_minus(&self, kappa: f64) -> f64 {
        self.rho_minus.eval(kappa)
    }

    pub fn rho_plus(&self, kappa: f64) -> f64 {
        self.rho_plus.eval(kappa)
    }

    /// Gap `P(κ) = ρ₊(κ) - ρ₋(κ)`.
    pub fn gap(&self, kappa: f64) -> f64 {
        self.rho_plus(kappa) - self.rho_minus(kappa)
    }

    pub fn gap_derivative(&self, kappa: f64) -> f64 {
        self.rho_plus.derivative().eval(kappa) - self.rho_minus.derivative().eval(kappa)
    }

    /// Scaled density `ρ̄ = (ρ - ρ₋)/P`.
    pub fn scaled_density(&self, kappa: f64, rho: f64) -> f64 {
        (rho - self.rho_minus(kappa)) / self.gap(kappa)
    }

    pub fn potentials(&self, kappa: f64, rho: f64) -> PointPotentials {
        let k0 = self.kappa0(rho);
        let dk0 = self.kappa0.derivative().eval(rho);
        let a = rho - self.rho_minus(kappa);
        let b = rho - self.rho_plus(kappa);
        let dm = self.rho_minus.derivative().eval(kappa);
        let dp = self.rho_plus.derivative().eval(kappa);
        let e = kappa - k0;
        PointPotentials {
            f: 0.5 * e * e,
            f_kappa: e,
            f_rho: -e * dk0,
            big_f: 4.0 * a * a * b * b,
            big_f_kappa: -8.0 * a * b * (dm * b + dp * a),
            big_f_rho: 8.0 * a * b * (a + b),
        }
    }

    /// Check ordering, gap and single-crossing invariants on the working range.
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.kappa_range;
        if !(lo < hi) {
            return Err(CurveError::NodalModel(format!("empty curvature range [{lo}, {hi}]")));
        }
        let samples = 4001;
        let mut cross_minus = 0;
        let mut cross_plus = 0;
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..samples {
            let k = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let (rm, rp) = (self.rho_minus(k), self.rho_plus(k));
            if rm < 0.0 || rp > 1.0 || rm >= rp {
                return Err(CurveError::NodalModel(format!(
                    "0 <= rho_minus < rho_plus <= 1 at kappa = {k:.4} (rho_minus = {rm:.4}, rho_plus = {rp:.4})"
                )));
            }
            if rp - rm < self.min_gap {
                return Err(CurveError::NodalModel(format!(
                    "gap {:.4} below {} at kappa = {k:.4}",
                    rp - rm,
                    self.min_gap
                )));
            }
            let hm = self.kappa0(rm) - k;
            let hp = self.kappa0(rp) - k;
            if let Some((pm, pp)) = prev {
                if (pm > 0.0) != (hm > 0.0) {
                    cross_minus += 1;
                }
                if (pp > 0.0) != (hp > 0.0) {
                    cross_plus += 1;
                }
            }
            prev = Some((hm, hp));
        }
        if cross_minus != 1 || cross_plus != 1 {
            return Err(CurveError::NodalModel(format!(
                "kappa0 must cross each density nodal line once (found {cross_minus} and {cross_plus})"
            )));
        }
        Ok(())
    }

    /// Smallest gap over the working range, sampled.
    pub fn min_gap_on_range(&self) -> f64 {
        let [lo, hi] = self.kappa_range;
        (0..=4000)
            .map(|i| self.gap(lo + (hi - lo) * i as f64 / 4000.0))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance in the `(ρ, κ)` plane from a point to the `F` nodal set.
    pub fn distance_to_f_nodal_set(&self, kappa: f64, rho: f64) -> f64 {
        let [lo, hi] = self.kappa_range;
        let span = (hi - lo).max(1.0);
        let a = (lo - span).min(kappa - 1.0);
        let b = (hi + span).max(kappa + 1.0);
        let mut best = f64::INFINITY;
        for line in [&self.rho_minus, &self.rho_plus] {
            let d2 = |k: f64| (line.eval(k) - rho).powi(2) + (k - kappa).powi(2);
            // Coarse scan followed by golden-section refinement.
            let m = 2000;
            let mut kbest = a;
            let mut dbest = f64::INFINITY;
            for i in 0..=m {
                let k = a + (b - a) * i as f64 / m as f64;
                let d = d2(k);
                if d < dbest {
                    dbest = d;
                    kbest = k;
                }
            }
            let hstep = (b - a) / m as f64;
            let (mut x0, mut x1) = (kbest - hstep, kbest + hstep);
            let phi = 0.5 * (5f64.sqrt() - 1.0);
            for _ in 0..60 {
                let c = x1 - phi * (x1 - x0);
                let d = x0 + phi * (x1 - x0);
                if d2(c) < d2(d) {
                    x1 = d;
                } else {
                    x0 = c;
                }
            }
            best = best.min(d2(0.5 * (x0 + x1)).min(dbest));
        }
        best.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_model_passes_through_double_nodal_points() {
        let m = default_nodal_model();
        assert!((m.kappa0(0.19) - 1.3).abs() < 1e-12);
        assert!((m.kappa0(0.95) + 0.7).abs() < 1e-12);
        assert!((m.rho_minus(1.3) - 0.19).abs() < 1e-12);
        assert!((m.rho_plus(-0.7) - 0.95).abs() < 1e-12);
        assert!(m.min_gap_on_range() > 0.05);
    }

    #[test]
    fn potentials_vanish_on_nodal_lines() {
        let m = default_nodal_model();
        let p = m.potentials(1.3, 0.19);
        assert!(p.f.abs() < 1e-24 && p.big_f.abs() < 1e-24);
        assert!(p.f_rho.abs() < 1e-12 && p.big_f_rho.abs() < 1e-12);
    }
}
