//! Surface derivatives on a curve and the Helmholtz operator `H = -Δ_s + κ²`.
//!
//! All adjointness and spectral statements use the arc-length inner product
//! `⟨f, h⟩ = Σ f_j h_j g_j / n`. Dense matrices are assembled column by column
//! from the matrix-free operators, which keeps the discrete operators used in
//! flows and in spectral diagnostics identical.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, LU};

use crate::curve_geometry::{IntrinsicState, Metric};
use crate::error::{CurveError, Result};
use crate::parallel::{self, Execution};

/// Samples of a scalar function on the parameter grid.
pub type PeriodicField = Vec<f64>;

/// `∇_s f = g⁻¹ ∂_s f`.
pub fn grad_s(f: &[f64], u: &IntrinsicState) -> PeriodicField {
    let mut d = u.grid().d1(f);
    match u.metric() {
        Metric::Uniform(g) => d.iter_mut().for_each(|x| *x /= g),
        Metric::Varying(v) => d.iter_mut().zip(v).for_each(|(x, g)| *x /= g),
    }
    d
}

/// `Δ_s f = g⁻¹ ∂_s (g⁻¹ ∂_s f)`; equal to `g⁻² ∂_s² f` in the uniform gauge,
/// where the compact second-derivative rule is used.
pub fn laplace_s(f: &[f64], u: &IntrinsicState) -> PeriodicField {
    match u.metric() {
        Metric::Uniform(g) => {
            let mut d = u.grid().d2(f);
            let c = 1.0 / (g * g);
            d.iter_mut().for_each(|x| *x *= c);
            d
        }
        Metric::Varying(_) => grad_s(&grad_s(f, u), u),
    }
}

/// `‖f‖_{H^k}² = ∮ (|∇_s^k f|² + f²) dσ` for `k ∈ {0, 1, 2}`; `∇_s²` is `Δ_s`.
pub fn hk_norm(f: &[f64], u: &IntrinsicState, k: u32) -> f64 {
    let top = match k {
        0 => return u.l2_norm(f),
        1 => grad_s(f, u),
        2 => laplace_s(f, u),
        _ => panic!("hk_norm supports k <= 2"),
    };
    (u.inner(&top, &top) + u.inner(f, f)).max(0.0).sqrt()
}

pub fn h2_norm(f: &[f64], u: &IntrinsicState) -> f64 {
    hk_norm(f, u, 2)
}

/// Dense matrix of a linear grid operator, assembled from its action on unit vectors.
pub fn assemble(n: usize, op: impl Fn(&[f64]) -> Vec<f64> + Sync + Send) -> DMatrix<f64> {
    assemble_with(Execution::default(), n, op)
}

/// [`assemble`] with an explicit execution strategy; columns are independent.
pub fn assemble_with(
    exec: Execution,
    n: usize,
    op: impl Fn(&[f64]) -> Vec<f64> + Sync + Send,
) -> DMatrix<f64> {
    let columns = parallel::map_range(exec, n, |j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        op(&e)
    });
    let mut m = DMatrix::zeros(n, n);
    for (j, col) in columns.into_iter().enumerate() {
        m.set_column(j, &DVector::from_vec(col));
    }
    m
}

/// Dense matrix of `Δ_s`. In the uniform gauge the operator is circulant and
/// only its first column is computed.
pub fn laplace_matrix(u: &IntrinsicState) -> DMatrix<f64> {
    let n = u.n();
    match u.metric() {
        Metric::Uniform(_) => {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            let c0 = laplace_s(&e, u);
            DMatrix::from_fn(n, n, |i, j| c0[(i + n - j) % n])
        }
        Metric::Varying(_) => assemble(n, |f| laplace_s(f, u)),
    }
}

/// Symmetric form `W^{1/2} A W^{-1/2}` of an operator self-adjoint in `L²(dσ)`.
fn symmetrize(a: &DMatrix<f64>, u: &IntrinsicState) -> DMatrix<f64> {
    let n = u.n();
    let w: Vec<f64> = (0..n).map(|j| u.g_at(j).sqrt()).collect();
    let s = DMatrix::from_fn(n, n, |i, j| w[i] * a[(i, j)] / w[j]);
    (&s + s.transpose()) * 0.5
}

fn sorted_eigenvalues(sym: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

enum Factor {
    Cholesky(Cholesky<f64, Dyn>),
    Lu(LU<f64, Dyn, Dyn>),
}

/// `H = -Δ_s + κ²` assembled densely for one state, with a cached factorisation.
pub struct HelmholtzOperator {
    state: IntrinsicState,
    matrix: DMatrix<f64>,
    factor: Factor,
}

impl HelmholtzOperator {
    pub fn new(u: &IntrinsicState) -> Result<Self> {
        let n = u.n();
        let mut matrix = -laplace_matrix(u);
        for j in 0..n {
            matrix[(j, j)] += u.kappa()[j] * u.kappa()[j];
        }
        let factor = if u.metric().is_uniform() {
            match Cholesky::new(matrix.clone()) {
                Some(c) => Factor::Cholesky(c),
                None => {
                    return Err(CurveError::SingularHelmholtz {
                        min_eig: min_eig_of(&matrix, u),
                    })
                }
            }
        } else {
            let lu = matrix.clone().lu();
            if !lu.is_invertible() {
                return Err(CurveError::SingularHelmholtz {
                    min_eig: min_eig_of(&matrix, u),
                });
            }
            Factor::Lu(lu)
        };
        Ok(Self {
            state: u.clone(),
            matrix,
            factor,
        })
    }

    pub fn state(&self) -> &IntrinsicState {
        &self.state
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, f: &[f64]) -> PeriodicField {
        let lap = laplace_s(f, &self.state);
        lap.iter()
            .zip(f)
            .zip(self.state.kappa())
            .map(|((l, x), k)| -l + k * k * x)
            .collect()
    }

    /// Solve `H u = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Result<PeriodicField> {
        let b = DVector::from_column_slice(rhs);
        let x = match &self.factor {
            Factor::Cholesky(c) => Some(c.solve(&b)),
            Factor::Lu(lu) => lu.solve(&b),
        };
        match x {
            Some(x) if x.iter().all(|v| v.is_finite()) => Ok(x.iter().copied().collect()),
            _ => Err(CurveError::SingularHelmholtz {
                min_eig: self.min_eig(),
            }),
        }
    }

    /// Smallest eigenvalue in the `L²(dσ)` sense.
    pub fn min_eig(&self) -> f64 {
        min_eig_of(&self.matrix, &self.state)
    }

    /// All eigenvalues, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        sorted_eigenvalues(symmetrize(&self.matrix, &self.state))
    }

    /// `ℐ v = v - κ H⁻¹(κ v)`.
    pub fn incompressibility_apply(&self, v: &[f64]) -> Result<PeriodicField> {
        let k = self.state.kappa();
        let kv: Vec<f64> = v.iter().zip(k).map(|(a, b)| a * b).collect();
        let w = self.solve(&kv)?;
        Ok(v.iter()
            .zip(k)
            .zip(&w)
            .map(|((vi, ki), wi)| vi - ki * wi)
            .collect())
    }

    /// Dense matrix of `ℐ`.
    pub fn incompressibility_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.state.n();
        let k = self.state.kappa();
        let kmat = DMatrix::from_fn(n, n, |i, j| if i == j { k[i] } else { 0.0 });
        let rhs = &kmat;
        let solved = match &self.factor {
            Factor::Cholesky(c) => c.solve(rhs),
            Factor::Lu(lu) => lu.solve(rhs).ok_or(CurveError::SingularHelmholtz {
                min_eig: self.min_eig(),
            })?,
        };
        Ok(DMatrix::identity(n, n) - kmat * solved)
    }
}

fn min_eig_of(m: &DMatrix<f64>, u: &IntrinsicState) -> f64 {
    sorted_eigenvalues(symmetrize(m, u))[0]
}

/// Solve `H u = rhs` for the state `u`.
pub fn helmholtz_solve(h: &HelmholtzOperator, rhs: &[f64]) -> Result<PeriodicField> {
    h.solve(rhs)
}

pub fn helmholtz_min_eig(h: &HelmholtzOperator) -> f64 {
    h.min_eig()
}

/// `ℐ v` for a state, assembling `H` on the fly.
pub fn incompressibility_apply(u: &IntrinsicState, v: &[f64]) -> Result<PeriodicField> {
    HelmholtzOperator::new(u)?.incompressibility_apply(v)
}

/// Sorted eigenvalues of `ℐ` in the `L²(dσ)` inner product.
pub fn incompressibility_spectrum(u: &IntrinsicState) -> Result<Vec<f64>> {
    let h = HelmholtzOperator::new(u)?;
    let i = h.incompressibility_matrix()?;
    Ok(sorted_eigenvalues(symmetrize(&i, u)))
}

/// Smallest `ν₂` with `‖H f‖_{L²} ≥ ν₂ ‖f‖_{H²}` over grid functions.
///
/// Computed as the smallest generalised singular value of `H` relative to
/// the discrete `H²` Gram matrix.
pub fn helmholtz_h2_coercivity(h: &HelmholtzOperator) -> f64 {
    let u = h.state();
    let n = u.n();
    let w = DMatrix::from_fn(n, n, |i, j| if i == j { u.g_at(i) / n as f64 } else { 0.0 });
    let lap = laplace_matrix(u);
    let gram = lap.transpose() * &w * &lap + &w;
    let hm = h.matrix();
    let top = hm.transpose() * &w * hm;
    // Reduce the generalised problem with a Cholesky factor of the Gram matrix.
    let chol = Cholesky::new(gram).expect("H² Gram matrix is positive definite");
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .expect("triangular factor is invertible");
    let reduced = &linv * top * linv.transpose();
    let sym = (&reduced + reduced.transpose()) * 0.5;
    sorted_eigenvalues(sym)[0].max(0.0).sqrt()
}
