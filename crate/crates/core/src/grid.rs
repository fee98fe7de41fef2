//! Uniform periodic parameter grid on the unit circle and the discrete
//! differentiation, integration and interpolation rules attached to it.
//!
//! Samples sit at `s_j = j/n`. Derivatives are either fourth-order central
//! differences or Fourier (spectral) derivatives; both share the same FFT
//! plans so that periodic antiderivatives and constant-coefficient solves
//! can be carried out mode by mode.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{CurveError, Result};

/// Discretisation used for `d/ds` and `d²/ds²`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffScheme {
    /// Fourth-order central differences (five-point stencils).
    #[default]
    FiniteDifference4,
    /// Fourier differentiation; the first derivative drops the Nyquist mode.
    Spectral,
}

struct GridInner {
    n: usize,
    scheme: DiffScheme,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `d/ds` acts on mode k as multiplication by `i * d1[k]`.
    d1: Vec<f64>,
    /// `d²/ds²` acts on mode k as multiplication by `d2[k]` (never positive).
    d2: Vec<f64>,
}

/// Uniform sampling of the unit-circumference circle.
///
/// Cloning is cheap: FFT plans and symbols are shared.
#[derive(Clone)]
pub struct ParamGrid {
    inner: Arc<GridInner>,
}

impl fmt::Debug for ParamGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamGrid")
            .field("n", &self.inner.n)
            .field("scheme", &self.inner.scheme)
            .finish()
    }
}

impl PartialEq for ParamGrid {
    fn eq(&self, other: &Self) -> bool {
        self.inner.n == other.inner.n && self.inner.scheme == other.inner.scheme
    }
}

/// Signed integer wavenumber of FFT bin `k` on an `n`-point grid.
pub fn wavenumber(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

impl ParamGrid {
    pub fn new(n: usize, scheme: DiffScheme) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(CurveError::InvalidGrid(n));
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let h = 1.0 / n as f64;
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for k in 0..n {
            let m = wavenumber(k, n);
            let omega = 2.0 * PI * m as f64;
            let th = omega * h;
            match scheme {
                DiffScheme::FiniteDifference4 => {
                    d1[k] = (8.0 * th.sin() - (2.0 * th).sin()) / (6.0 * h);
                    d2[k] = (-2.0 * (2.0 * th).cos() + 32.0 * th.cos() - 30.0) / (12.0 * h * h);
                }
                DiffScheme::Spectral => {
                    d1[k] = if 2 * k == n { 0.0 } else { omega };
                    d2[k] = -omega * omega;
                }
            }
        }
        // Exact zeros where the continuum symbol vanishes or the stencil is blind.
        d1[0] = 0.0;
        d1[n / 2] = 0.0;
        d2[0] = 0.0;
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                scheme,
                fwd,
                inv,
                d1,
                d2,
            }),
        })
    }

    /// Fourth-order finite-difference grid, the default discretisation.
    pub fn fd4(n: usize) -> Result<Self> {
        Self::new(n, DiffScheme::FiniteDifference4)
    }

    pub fn spectral(n: usize) -> Result<Self> {
        Self::new(n, DiffScheme::Spectral)
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn scheme(&self) -> DiffScheme {
        self.inner.scheme
    }

    pub fn h(&self) -> f64 {
        1.0 / self.inner.n as f64
    }

    pub fn s(&self, j: usize) -> f64 {
        j as f64 / self.inner.n as f64
    }

    pub fn s_values(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.s(j)).collect()
    }

    /// Imaginary part of the first-derivative symbol, indexed by FFT bin.
    pub fn d1_symbol(&self) -> &[f64] {
        &self.inner.d1
    }

    /// Second-derivative symbol, indexed by FFT bin.
    pub fn d2_symbol(&self) -> &[f64] {
        &self.inner.d2
    }

    pub fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n() {
            return Err(CurveError::LengthMismatch {
                expected: self.n(),
                found: f.len(),
            });
        }
        Ok(())
    }

    /// Forward DFT without normalisation.
    pub fn fft(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.inner.fwd.process(&mut buf);
        buf
    }

    /// Inverse DFT including the `1/n` normalisation; returns the real part.
    pub fn ifft_real(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inner.inv.process(&mut buf);
        let scale = 1.0 / self.n() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Apply a real even symbol (one factor per FFT bin).
    pub fn apply_symbol(&self, f: &[f64], symbol: impl Fn(usize) -> f64) -> Vec<f64> {
        let mut hat = self.fft(f);
        for (k, c) in hat.iter_mut().enumerate() {
            *c *= symbol(k);
        }
        self.ifft_real(hat)
    }

    /// Discrete `d/ds` on the unit parameter circle.
    pub fn d1(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        match self.scheme() {
            DiffScheme::FiniteDifference4 => {
                let c = n as f64 / 12.0;
                (0..n)
                    .map(|j| {
                        let jm2 = (j + n - 2) % n;
                        let jm1 = (j + n - 1) % n;
                        let jp1 = (j + 1) % n;
                        let jp2 = (j + 2) % n;
                        c * (f[jm2] - 8.0 * f[jm1] + 8.0 * f[jp1] - f[jp2])
                    })
                    .collect()
            }
            DiffScheme::Spectral => {
                let mut hat = self.fft(f);
                for (k, c) in hat.iter_mut().enumerate() {
                    *c *= Complex64::new(0.0, self.inner.d1[k]);
                }
                self.ifft_real(hat)
            }
        }
    }

    /// Discrete `d²/ds²` on the unit parameter circle.
    pub fn d2(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        match self.scheme() {
            DiffScheme::FiniteDifference4 => {
                let c = (n * n) as f64 / 12.0;
                (0..n)
                    .map(|j| {
                        let jm2 = (j + n - 2) % n;
                        let jm1 = (j + n - 1) % n;
                        let jp1 = (j + 1) % n;
                        let jp2 = (j + 2) % n;
                        c * (-f[jm2] + 16.0 * f[jm1] - 30.0 * f[j] + 16.0 * f[jp1] - f[jp2])
                    })
                    .collect()
            }
            DiffScheme::Spectral => self.apply_symbol(f, |k| self.inner.d2[k]),
        }
    }

    /// Mean over the parameter circle (plain trapezoid rule).
    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() / f.len() as f64
    }

    /// Periodic antiderivative consistent with [`Self::d1`].
    ///
    /// Returns `I` with `I[0] = 0` and `I[j] ≈ ∫_0^{s_j} f ds`; the mean of `f`
    /// contributes the linear part `mean * s`. Applying `d1` to the periodic
    /// part reproduces `f - mean(f)` up to its Nyquist component.
    pub fn cumulative_integral(&self, f: &[f64]) -> Vec<f64> {
        self.antiderivative_with(f, &self.inner.d1)
    }

    /// Spectrally accurate antiderivative, whatever the grid's scheme.
    pub fn cumulative_integral_spectral(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n();
        let symbol: Vec<f64> = (0..n)
            .map(|k| {
                if 2 * k == n {
                    0.0
                } else {
                    2.0 * PI * wavenumber(k, n) as f64
                }
            })
            .collect();
        self.antiderivative_with(f, &symbol)
    }

    fn antiderivative_with(&self, f: &[f64], d1: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mean = self.mean(f);
        let mut hat = self.fft(f);
        for (c, &sym) in hat.iter_mut().zip(d1) {
            if sym == 0.0 {
                *c = Complex64::new(0.0, 0.0);
            } else {
                *c /= Complex64::new(0.0, sym);
            }
        }
        let p = self.ifft_real(hat);
        let p0 = p[0];
        (0..n).map(|j| mean * self.s(j) + p[j] - p0).collect()
    }

    /// Evaluate a periodic grid function at an arbitrary parameter `s`.
    ///
    /// Spectral grids use trigonometric interpolation; finite-difference grids
    /// use a six-point Lagrange stencil (sixth order).
    pub fn interpolate(&self, f: &[f64], s: f64) -> f64 {
        let n = self.n();
        let x = s.rem_euclid(1.0) * n as f64;
        match self.scheme() {
            DiffScheme::Spectral => {
                let hat = self.fft(f);
                let mut acc = 0.0;
                for (k, c) in hat.iter().enumerate() {
                    let m = wavenumber(k, n);
                    let w = if 2 * k == n { 0.5 } else { 1.0 };
                    let ang = 2.0 * PI * m as f64 * x / n as f64;
                    acc += w * (c.re * ang.cos() - c.im * ang.sin());
                    if 2 * k == n {
                        // Symmetrised Nyquist term: average of +n/2 and -n/2.
                        acc += w * (c.re * ang.cos() + c.im * ang.sin());
                    }
                }
                acc / n as f64
            }
            DiffScheme::FiniteDifference4 => {
                let j0 = x.floor() as i64;
                let t = x - j0 as f64;
                let nodes: [i64; 6] = [-2, -1, 0, 1, 2, 3];
                let mut acc = 0.0;
                for (a, &da) in nodes.iter().enumerate() {
                    let mut w = 1.0;
                    for (b, &db) in nodes.iter().enumerate() {
                        if a != b {
                            w *= (t - db as f64) / (da - db) as f64;
                        }
                    }
                    let idx = (j0 + da).rem_euclid(n as i64) as usize;
                    acc += w * f[idx];
                }
                acc
            }
        }
    }
}

/// Trigonometric antiderivative of a periodic grid function, evaluable at any `s`.
///
/// `at(s) = ∫_0^s f ds` with spectral accuracy for smooth `f`, independent of
/// the scheme of the grid the samples came from.
#[derive(Clone, Debug)]
pub struct Antiderivative {
    mean: f64,
    /// Fourier coefficients of the periodic part, normalised by `n`.
    coeffs: Vec<(i64, Complex64)>,
    offset: f64,
}

impl Antiderivative {
    pub fn new(f: &[f64]) -> Result<Self> {
        let n = f.len();
        let grid = ParamGrid::spectral(n)?;
        let mean = grid.mean(f);
        let hat = grid.fft(f);
        let mut coeffs = Vec::with_capacity(n);
        for (k, c) in hat.iter().enumerate() {
            let m = wavenumber(k, n);
            if m == 0 || 2 * k == n {
                continue;
            }
            let omega = 2.0 * PI * m as f64;
            coeffs.push((m, *c / Complex64::new(0.0, omega) / n as f64));
        }
        let mut out = Self {
            mean,
            coeffs,
            offset: 0.0,
        };
        out.offset = out.periodic(0.0);
        Ok(out)
    }

    fn periodic(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(m, c)| {
                let ang = 2.0 * PI * *m as f64 * s;
                c.re * ang.cos() - c.im * ang.sin()
            })
            .sum()
    }

    /// `∫_0^s f`, for any real `s` (not reduced modulo 1).
    pub fn at(&self, s: f64) -> f64 {
        self.mean * s + self.periodic(s) - self.offset
    }

    /// `∫_a^b f` along increasing `s`, wrapping once around when `b < a`.
    pub fn between(&self, a: f64, b: f64) -> f64 {
        let b = if b < a { b + 1.0 } else { b };
        self.at(b) - self.at(a)
    }
}
