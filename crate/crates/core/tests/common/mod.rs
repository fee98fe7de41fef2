//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use curveflow::curve_geometry::{make_named_curve, IntrinsicState, NamedCurve, ParamGrid};
use proptest::prelude::*;

pub fn circle(n: usize, radius: f64) -> IntrinsicState {
    make_named_curve(&NamedCurve::circle(radius), &ParamGrid::fd4(n).unwrap()).unwrap()
}

pub fn trillium(n: usize) -> IntrinsicState {
    make_named_curve(&NamedCurve::trillium(), &ParamGrid::fd4(n).unwrap()).unwrap()
}

pub fn trillium_spectral(n: usize) -> IntrinsicState {
    make_named_curve(&NamedCurve::trillium(), &ParamGrid::spectral(n).unwrap()).unwrap()
}

/// Trigonometric polynomial `Σ a_k cos(2πks) + b_k sin(2πks)` sampled on `n` points.
pub fn trig_field(n: usize, coeffs: &[(f64, f64)]) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let s = j as f64 / n as f64;
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = 2.0 * PI * k as f64 * s;
                    a * w.cos() + b * w.sin()
                })
                .sum()
        })
        .collect()
}

/// Five low Fourier modes with coefficients in `[-1, 1]`.
pub fn smooth_coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5)
}

pub fn sup(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
