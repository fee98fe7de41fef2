//! Sharp-interface objects: the scaled double well, its heteroclinic profile,
//! surface-tension constants, transition sets, recovery sequences and the
//! limit energy `F₀(U, T)`.

use serde::{Deserialize, Serialize};

use super::NodalModel;
use crate::curve_geometry::{IntrinsicState, Metric};
use crate::error::{CurveError, Result};
use crate::grid::Antiderivative;
use crate::surface_calculus::{grad_s, PeriodicField};

/// `F₀(t) = 4c t²(1 - t)²`; `scale = 1` is the standard well.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DoubleWell {
    pub scale: f64,
}

impl Default for DoubleWell {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

impl DoubleWell {
    pub fn eval(&self, t: f64) -> f64 {
        4.0 * self.scale * t * t * (1.0 - t) * (1.0 - t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        8.0 * self.scale * t * (1.0 - t) * (1.0 - 2.0 * t)
    }

    /// Growth rate `r` of the logistic heteroclinic `φ(z) = 1/(1 + e^{-rz})`.
    pub fn profile_rate(&self) -> f64 {
        2.0 * (2.0 * self.scale).sqrt()
    }
}

/// Heteroclinic `0 → 1` solution of `φ'' = F₀'(φ)` normalised by `φ(0) = 1/2`.
pub fn heteroclinic_profile(well: &DoubleWell, z: f64) -> f64 {
    let x = well.profile_rate() * z;
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ϑ₁ = ∫_0^1 √F₀` and `σ₁ = ½∫|φ'|² dz`, computed independently.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceTension {
    pub theta1: f64,
    pub sigma1_st: f64,
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
];

fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            GAUSS5
                .iter()
                .map(|(x, w)| w * f(mid + 0.5 * h * x))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

pub fn surface_tension_constants(well: &DoubleWell) -> SurfaceTension {
    let theta1 = gauss_legendre(|t| well.eval(t).max(0.0).sqrt(), 0.0, 1.0, 64);
    // Trapezoid rule over the profile; the integrand decays like e^{-r|z|}.
    let r = well.profile_rate();
    let half_width = 40.0 / r;
    let m = 20_000;
    let h = 2.0 * half_width / m as f64;
    let sum: f64 = (0..=m)
        .map(|i| {
            let z = -half_width + i as f64 * h;
            let p = heteroclinic_profile(well, z);
            let dp = r * p * (1.0 - p);
            let w = if i == 0 || i == m { 0.5 } else { 1.0 };
            w * dp * dp
        })
        .sum();
    SurfaceTension {
        theta1,
        sigma1_st: 0.5 * h * sum,
    }
}

/// Transition set `T = ∂𝕊₊` as sorted parameter values in `[0, 1)`.
///
/// The interval `[s_1, s_2]` lies in `𝕊₊` when `plus_first` is set, and the
/// phases alternate from there. With no points the whole circle is in `𝕊₊`
/// or `𝕊₋` according to `plus_first`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSet {
    points: Vec<f64>,
    plus_first: bool,
}

impl TransitionSet {
    pub fn new(mut points: Vec<f64>, plus_first: bool) -> Result<Self> {
        for p in points.iter_mut() {
            if !p.is_finite() {
                return Err(CurveError::NonFinite("transition points"));
            }
            *p = p.rem_euclid(1.0);
        }
        points.sort_by(f64::total_cmp);
        if points.len() % 2 != 0 {
            return Err(CurveError::InvalidParameter(format!(
                "a closed two-phase partition needs an even number of transitions, got {}",
                points.len()
            )));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(CurveError::InvalidParameter("repeated transition point".into()));
        }
        Ok(Self { points, plus_first })
    }

    pub fn empty(plus: bool) -> Self {
        Self {
            points: Vec::new(),
            plus_first: plus,
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn plus_first(&self) -> bool {
        self.plus_first
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether `s` lies in `𝕊₊`.
    pub fn is_plus(&self, s: f64) -> bool {
        let n = self.points.len();
        if n == 0 {
            return self.plus_first;
        }
        let s = s.rem_euclid(1.0);
        let i = self.points.partition_point(|&p| p <= s);
        let interval = (i + n - 1) % n;
        (interval % 2 == 0) == self.plus_first
    }

    /// Intervals `(start, end, plus)`; the last one wraps through `s = 0`.
    pub fn intervals(&self) -> Vec<(f64, f64, bool)> {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let a = self.points[i];
                let b = self.points[(i + 1) % n];
                (a, b, (i % 2 == 0) == self.plus_first)
            })
            .collect()
    }
}

/// Arc-length coordinate `σ(s) = ∫_0^s g` as a callable.
fn arc_coordinate(u: &IntrinsicState) -> Result<impl Fn(f64) -> f64> {
    let (g, anti) = match u.metric() {
        Metric::Uniform(g) => (Some(*g), None),
        Metric::Varying(gs) => (None, Some(Antiderivative::new(gs)?)),
    };
    Ok(move |s: f64| match (&g, &anti) {
        (Some(g), _) => g * s,
        (None, Some(a)) => a.at(s),
        (None, None) => unreachable!(),
    })
}

/// `ρ̂ = χ₊ρ₊(κ) + χ₋ρ₋(κ)` on the grid.
pub fn limit_density(u: &IntrinsicState, t: &TransitionSet, nodal: &NodalModel) -> PeriodicField {
    (0..u.n())
        .map(|j| {
            let k = u.kappa()[j];
            if t.is_plus(u.grid().s(j)) {
                nodal.rho_plus(k)
            } else {
                nodal.rho_minus(k)
            }
        })
        .collect()
}

/// Scaled and unscaled densities of the sawtooth recovery sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoverySequence {
    /// `ρ̄_ε = φ(z P(κ)/ε)`.
    pub scaled: PeriodicField,
    /// `ρ_ε = P(κ) ρ̄_ε + ρ₋(κ)`.
    pub density: PeriodicField,
}

/// Recovery sequence for `(U, T)` with the standard well.
///
/// `z` is the signed arc-length distance to the nearest transition, positive
/// on `𝕊₊`.
pub fn recovery_sequence(
    u: &IntrinsicState,
    t: &TransitionSet,
    epsilon: f64,
    nodal: &NodalModel,
) -> Result<RecoverySequence> {
    if !(epsilon > 0.0) {
        return Err(CurveError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let arc = arc_coordinate(u)?;
    let total = arc(1.0);
    let sigma_t: Vec<f64> = t.points().iter().map(|&p| arc(p)).collect();
    let nt = sigma_t.len();
    if nt > 0 {
        let min_gap = (0..nt)
            .map(|i| {
                let next = if i + 1 == nt { sigma_t[0] + total } else { sigma_t[i + 1] };
                next - sigma_t[i]
            })
            .fold(f64::INFINITY, f64::min);
        if min_gap < 10.0 * epsilon {
            return Err(CurveError::TransitionGap {
                gap: min_gap,
                epsilon,
            });
        }
    }
    let well = DoubleWell::default();
    let mut scaled = Vec::with_capacity(u.n());
    let mut density = Vec::with_capacity(u.n());
    for j in 0..u.n() {
        let s = u.grid().s(j);
        let k = u.kappa()[j];
        let plus = t.is_plus(s);
        let rb = if nt == 0 {
            if plus {
                1.0
            } else {
                0.0
            }
        } else {
            let sj = arc(s);
            let d = sigma_t
                .iter()
                .map(|&st| {
                    let x = (sj - st).rem_euclid(total);
                    x.min(total - x)
                })
                .fold(f64::INFINITY, f64::min);
            let z = if plus { d } else { -d };
            heteroclinic_profile(&well, z * nodal.gap(k) / epsilon)
        };
        scaled.push(rb);
        density.push(nodal.gap(k) * rb + nodal.rho_minus(k));
    }
    Ok(RecoverySequence { scaled, density })
}

/// `F₀(U, T) = ∮ (δ/2|∇_sκ|² + f(κ, ρ̂)/δ) dσ + √2 ϑ₁ Σ_i P³(κ(s_i))`.
///
/// The piecewise bulk term is integrated exactly across the transitions by
/// evaluating trigonometric antiderivatives of the two smooth branches at
/// the transition points.
pub fn gamma_limit_energy(
    u: &IntrinsicState,
    t: &TransitionSet,
    delta: f64,
    nodal: &NodalModel,
) -> Result<f64> {
    let dk = grad_s(u.kappa(), u);
    let grad_term: Vec<f64> = dk.iter().map(|d| 0.5 * delta * d * d).collect();
    let mut energy = u.integrate(&grad_term);

    let branch = |plus: bool| -> Vec<f64> {
        (0..u.n())
            .map(|j| {
                let k = u.kappa()[j];
                let rho = if plus { nodal.rho_plus(k) } else { nodal.rho_minus(k) };
                nodal.potentials(k, rho).f * u.g_at(j) / delta
            })
            .collect()
    };
    let plus = Antiderivative::new(&branch(true))?;
    let minus = Antiderivative::new(&branch(false))?;
    if t.is_empty() {
        let a = if t.plus_first() { &plus } else { &minus };
        energy += a.at(1.0);
    } else {
        for (a, b, is_plus) in t.intervals() {
            let anti = if is_plus { &plus } else { &minus };
            energy += anti.between(a, b);
        }
    }

    let tension = surface_tension_constants(&DoubleWell::default());
    let jumps: f64 = t
        .points()
        .iter()
        .map(|&s| nodal.gap(u.grid().interpolate(u.kappa(), s)).powi(3))
        .sum();
    Ok(energy + 2f64.sqrt() * tension.theta1 * jumps)
}

/// Transitions of `ρ̄ = (ρ - ρ₋(κ))/P(κ)` through `1/2`, located by bisection
/// on the interpolated fields.
pub fn detect_transitions(u: &IntrinsicState, rho: &[f64], nodal: &NodalModel) -> Result<TransitionSet> {
    u.grid().check_len(rho)?;
    let n = u.n();
    let grid = u.grid();
    let level: Vec<f64> = (0..n)
        .map(|j| nodal.scaled_density(u.kappa()[j], rho[j]) - 0.5)
        .collect();
    let at = |s: f64| {
        nodal.scaled_density(grid.interpolate(u.kappa(), s), grid.interpolate(rho, s)) - 0.5
    };
    let mut points = Vec::new();
    let mut plus_first = None;
    for j in 0..n {
        let (a, b) = (level[j], level[(j + 1) % n]);
        if (a > 0.0) == (b > 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (grid.s(j), grid.s(j) + grid.h());
        let mut flo = a;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let fm = at(mid);
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        points.push(0.5 * (lo + hi));
        if plus_first.is_none() {
            plus_first = Some(b > 0.0);
        }
    }
    // Crossings are found in increasing `s`, so the first one fixes the phase.
    TransitionSet::new(points, plus_first.unwrap_or(level[0] > 0.0))
}
