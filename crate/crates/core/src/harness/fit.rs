//! Small least-squares fits used by the scaling studies.

/// Least-squares slope of `ln y` against `ln x`.
///
/// Returns `None` with fewer than two points or a non-positive entry.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Parameters of `y ≈ a·e^{-bt} + c`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ExpPlateauFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Root-mean-square residual.
    pub rms: f64,
}

/// For fixed `b` the model is linear in `(a, c)`; solve that 2×2 problem.
fn linear_part(t: &[f64], y: &[f64], b: f64) -> (f64, f64, f64) {
    let (mut s11, mut s12, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let e = (-b * ti).exp();
        s11 += e * e;
        s12 += e;
        r1 += e * yi;
        r2 += yi;
    }
    let s22 = t.len() as f64;
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-14 * s11 * s22 {
        let c = r2 / s22;
        let res = y.iter().map(|v| (v - c).powi(2)).sum();
        return (0.0, c, res);
    }
    let a = (r1 * s22 - r2 * s12) / det;
    let c = (s11 * r2 - s12 * r1) / det;
    let res = t
        .iter()
        .zip(y)
        .map(|(&ti, &yi)| (a * (-b * ti).exp() + c - yi).powi(2))
        .sum();
    (a, c, res)
}

/// Fit `a·e^{-bt} + c` by variable projection: a log-spaced scan over
/// `b ∈ [0.01/T, 100/T]` (T the time span), then golden-section refinement
/// around the best bracket.
pub fn fit_exp_plateau(t: &[f64], y: &[f64]) -> Option<ExpPlateauFit> {
    if t.len() != y.len() || t.len() < 4 {
        return None;
    }
    let span = t.last()? - t.first()?;
    if !(span > 0.0) {
        return None;
    }
    let t0 = t[0];
    let shifted: Vec<f64> = t.iter().map(|v| v - t0).collect();
    let objective = |lb: f64| linear_part(&shifted, y, lb.exp()).2;

    let (lo, hi) = ((0.01 / span).ln(), (100.0 / span).ln());
    let m = 400;
    let grid: Vec<f64> = (0..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
    let best = (0..=m)
        .min_by(|&i, &j| objective(grid[i]).total_cmp(&objective(grid[j])))
        .expect("non-empty scan");
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(m)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = objective(x2);
        }
    }
    let rate = (0.5 * (a + b)).exp();
    let (amp, c, res) = linear_part(&shifted, y, rate);
    // Undo the time shift: a·e^{-b(t - t0)} = (a·e^{b t0})·e^{-bt}.
    Some(ExpPlateauFit {
        a: amp * (rate * t0).exp(),
        b: rate,
        c,
        rms: (res / t.len() as f64).sqrt(),
    })
}
