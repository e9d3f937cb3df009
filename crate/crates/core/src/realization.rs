//! Realizing doubly stochastic matrices as measurement chains: search the
//! unitary group for `U` with `|U_ij|^2 = W_ij`.
//!
//! The search minimizes `f(U) = Σ_ij (|U_ij|^2 - W_ij)^2` by Riemannian
//! gradient descent on `U(N)`. With Euclidean gradient `G = 4 (|U|^2 - W) ∘ U`,
//! the descent direction in the left-invariant chart is `Ω = -skew(U† G)` and
//! steps are retracted as `U exp(η Ω)`, with Armijo backtracking on `η`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::global::{self, Initial, TransitionMatrix};
use crate::linalg::{self, CMatrix, RMatrix, C64, I};
use crate::rng::run_stream;
use crate::state::UnitaryOperator;

/// Tolerance on row and column sums of a [`StochasticMatrix`].
pub const SUM_TOL: f64 = 1e-9;
/// Most negative entry accepted in a [`StochasticMatrix`].
pub const ENTRY_TOL: f64 = 1e-12;
/// Residual below which a fit counts as an exact realization.
pub const EXACT_THRESHOLD: f64 = 1e-8;
const DRIFT_TOL: f64 = 1e-12;
const RESTART_BATCH: usize = 8;
const MAX_STEP: f64 = 8.0;

/// A doubly stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    matrix: RMatrix,
}

impl StochasticMatrix {
    pub fn new(matrix: RMatrix) -> Result<Self> {
        if let Some(problem) = stochastic_violation(&matrix, ENTRY_TOL, SUM_TOL)? {
            return Err(Error::NotStochastic(problem));
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.matrix
    }

    /// The same matrix read as a chain with rows as sources.
    pub fn as_transition(&self) -> TransitionMatrix {
        TransitionMatrix::from_matrix(self.matrix.clone(), SUM_TOL)
            .expect("validated on construction")
    }
}

fn stochastic_violation(w: &RMatrix, entry_tol: f64, sum_tol: f64) -> Result<Option<String>> {
    if w.nrows() != w.ncols() {
        return Err(Error::NotSquare {
            rows: w.nrows(),
            cols: w.ncols(),
        });
    }
    if let Some(((i, j), v)) = w
        .iter()
        .enumerate()
        .map(|(idx, v)| ((idx % w.nrows(), idx / w.nrows()), *v))
        .find(|(_, v)| *v < -entry_tol || !v.is_finite())
    {
        return Ok(Some(format!("entry ({}, {}) = {v}", i + 1, j + 1)));
    }
    for (i, row) in w.row_iter().enumerate() {
        let s = row.sum();
        if (s - 1.0).abs() > sum_tol {
            return Ok(Some(format!("row {} sums to {s}", i + 1)));
        }
    }
    for (j, col) in w.column_iter().enumerate() {
        let s = col.sum();
        if (s - 1.0).abs() > sum_tol {
            return Ok(Some(format!("column {} sums to {s}", j + 1)));
        }
    }
    Ok(None)
}

/// Entries `≥ -tol` and every row and column sums to one within `tol`.
pub fn check_doubly_stochastic(w: &RMatrix, tol: f64) -> Result<bool> {
    Ok(stochastic_violation(w, tol, tol)?.is_none())
}

/// `Σ_ij (|U_ij|^2 - W_ij)^2`.
pub fn residual(u: &UnitaryOperator, w: &RMatrix) -> Result<f64> {
    if w.nrows() != u.dim() || w.ncols() != u.dim() {
        return Err(Error::DimensionMismatch {
            context: "unitary vs target matrix",
            expected: u.dim(),
            found: w.nrows().max(w.ncols()),
        });
    }
    Ok(objective(u.matrix(), w))
}

fn objective(u: &CMatrix, w: &RMatrix) -> f64 {
    u.iter()
        .zip(w.iter())
        .map(|(z, &t)| (z.norm_sqr() - t).powi(2))
        .sum()
}

/// Search budget and line-search constants.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub restarts: usize,
    pub iterations: usize,
    /// First trial step of the line search.
    pub initial_step: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Step shrink factor on rejection.
    pub shrink: f64,
    /// Stop a descent once the objective falls below this value.
    pub target: f64,
    /// Residual below which a result is flagged as converged.
    pub exact_threshold: f64,
    /// Try a damped Gauss-Newton direction before the plain gradient.
    pub gauss_newton: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            restarts: 50,
            iterations: 2000,
            initial_step: 0.5,
            armijo: 1e-4,
            shrink: 0.5,
            target: 1e-24,
            exact_threshold: EXACT_THRESHOLD,
            gauss_newton: true,
        }
    }
}

/// Outcome of a single descent.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent {
    pub unitary: UnitaryOperator,
    pub residual: f64,
    pub iterations: usize,
    /// Objective after every accepted step, starting with the initial value.
    pub trace: Vec<f64>,
}

/// Best result over the restarts.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub unitary: UnitaryOperator,
    pub residual: f64,
    pub restarts_used: usize,
    /// Index of the winning restart.
    pub best_restart: usize,
    pub converged: bool,
}

/// Real basis of the skew-Hermitian `N x N` matrices: `i e_jj`, then for
/// `j < k` the pairs `e_jk - e_kj` and `i (e_jk + e_kj)`.
fn skew_basis(dim: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        let mut e = CMatrix::zeros(dim, dim);
        e[(j, j)] = I;
        basis.push(e);
    }
    for j in 0..dim {
        for k in j + 1..dim {
            let mut a = CMatrix::zeros(dim, dim);
            a[(j, k)] = C64::new(1.0, 0.0);
            a[(k, j)] = C64::new(-1.0, 0.0);
            basis.push(a);
            let mut b = CMatrix::zeros(dim, dim);
            b[(j, k)] = I;
            b[(k, j)] = I;
            basis.push(b);
        }
    }
    basis
}

/// `exp(η S)` for skew-Hermitian `S`, reusing one eigendecomposition of `i S`
/// across trial steps.
struct SkewExp {
    vectors: CMatrix,
    values: nalgebra::DVector<f64>,
}

impl SkewExp {
    fn new(s: &CMatrix) -> Self {
        let h = (s * I + (s * I).adjoint()).scale(0.5);
        let eig = h.symmetric_eigen();
        Self {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues,
        }
    }

    fn at(&self, eta: f64) -> CMatrix {
        let phases = CMatrix::from_diagonal(&self.values.map(|l| C64::new(0.0, -eta * l).exp()));
        &self.vectors * phases * self.vectors.adjoint()
    }
}

/// Damped Gauss-Newton direction on the residuals `r_ij = |U_ij|^2 - W_ij`
/// in the chart `U exp(Σ δ_k E_k)`, with damping `μ = f` so it vanishes at a
/// solution. Returns the direction and its directional derivative.
fn gauss_newton_direction(
    u: &CMatrix,
    w: &RMatrix,
    f: f64,
    basis: &[CMatrix],
) -> Option<(CMatrix, f64)> {
    let dim = u.nrows();
    let m = dim * dim;
    let r = nalgebra::DVector::from_iterator(m, u.iter().zip(w.iter()).map(|(z, &t)| z.norm_sqr() - t));
    let mut jac = RMatrix::zeros(m, basis.len());
    for (k, e) in basis.iter().enumerate() {
        let ue = u * e;
        for (idx, (z, dz)) in u.iter().zip(ue.iter()).enumerate() {
            jac[(idx, k)] = 2.0 * (z.conj() * dz).re;
        }
    }
    let jt = jac.transpose();
    let mut normal = &jt * &jac;
    for d in 0..basis.len() {
        normal[(d, d)] += f.max(1e-14);
    }
    let rhs = -(&jt * &r);
    let delta = normal.cholesky()?.solve(&rhs);
    let derivative = -2.0 * rhs.dot(&delta);
    if !(derivative < 0.0) || !delta.iter().all(|x| x.is_finite()) {
        return None;
    }
    let mut s = CMatrix::zeros(dim, dim);
    for (e, &d) in basis.iter().zip(delta.iter()) {
        s += e.scale(d);
    }
    Some((s, derivative))
}

/// Riemannian gradient `Ω = -skew(U† G)` and the directional derivative
/// `-‖Ω‖^2` of the objective along it.
fn gradient_direction(u: &CMatrix, w: &RMatrix) -> (CMatrix, f64) {
    let g = CMatrix::from_fn(u.nrows(), u.ncols(), |i, j| {
        u[(i, j)] * (4.0 * (u[(i, j)].norm_sqr() - w[(i, j)]))
    });
    let ug = u.adjoint() * g;
    let omega = (ug.adjoint() - ug).scale(0.5);
    let slope = omega.norm_squared();
    (omega, -slope)
}

/// Backtracking along `U exp(η S)` from `eta0` until the Armijo condition
/// holds. Returns the accepted point, its value and the accepted `η`.
fn line_search(
    u: &CMatrix,
    w: &RMatrix,
    f: f64,
    direction: &CMatrix,
    derivative: f64,
    eta0: f64,
    options: &FitOptions,
) -> Option<(CMatrix, f64, f64)> {
    let exp = SkewExp::new(direction);
    let mut eta = eta0;
    for _ in 0..60 {
        let candidate = u * exp.at(eta);
        let fc = objective(&candidate, w);
        if fc <= f + options.armijo * eta * derivative {
            return Some((candidate, fc, eta));
        }
        eta *= options.shrink;
    }
    None
}

/// Monotone descent on `U(N)` from `start`.
///
/// Each iteration tries the damped Gauss-Newton direction at unit step when
/// enabled, and otherwise (or if that search fails) the Riemannian gradient
/// with an adaptive step. Accepted points are re-orthonormalized by polar
/// decomposition once unitarity drifts past 1e-12.
pub fn descend(w: &RMatrix, start: &UnitaryOperator, options: &FitOptions) -> Result<Descent> {
    if w.nrows() != start.dim() || w.ncols() != start.dim() {
        return Err(Error::DimensionMismatch {
            context: "start unitary vs target matrix",
            expected: w.nrows(),
            found: start.dim(),
        });
    }
    let basis = if options.gauss_newton {
        skew_basis(start.dim())
    } else {
        Vec::new()
    };
    let mut u = start.matrix().clone();
    let mut f = objective(&u, w);
    let mut trace = vec![f];
    let mut step = options.initial_step;
    let mut iterations = 0;
    while iterations < options.iterations && f > options.target {
        iterations += 1;
        let mut accepted = None;
        if options.gauss_newton {
            if let Some((s, d)) = gauss_newton_direction(&u, w, f, &basis) {
                accepted = line_search(&u, w, f, &s, d, 1.0, options).map(|(c, fc, _)| (c, fc));
            }
        }
        if accepted.is_none() {
            let (omega, d) = gradient_direction(&u, w);
            if -d < 1e-30 {
                break;
            }
            accepted = line_search(&u, w, f, &omega, d, step, options).map(|(c, fc, eta)| {
                // let the step grow again after a first-try acceptance
                step = if eta == step { (step * 2.0).min(MAX_STEP) } else { eta };
                (c, fc)
            });
        }
        let Some((mut candidate, mut fc)) = accepted else {
            break;
        };
        if linalg::unitarity_deviation(&candidate) > DRIFT_TOL {
            candidate = linalg::polar_unitary(&candidate);
            fc = objective(&candidate, w);
        }
        // the polar projection may perturb the value; keep the run monotone
        if fc > f {
            break;
        }
        u = candidate;
        f = fc;
        trace.push(f);
    }
    Ok(Descent {
        unitary: UnitaryOperator::from_trusted(u),
        residual: f,
        iterations,
        trace,
    })
}

/// Search for a unitary realizing `w` from random restarts.
///
/// Restart `r` starts from a random unitary drawn from stream `r` of `seed`.
/// Restarts run in fixed batches; the search stops after the first batch
/// whose best residual is below the exact threshold. The lowest residual
/// wins, ties going to the lower restart index.
pub fn fit_unitary(w: &StochasticMatrix, options: &FitOptions, seed: u64) -> Result<FitResult> {
    if options.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be positive".into()));
    }
    let dim = w.dim();
    linalg::qubits_for_dim(dim)?;
    let mut best: Option<(usize, Descent)> = None;
    let mut used = 0;
    while used < options.restarts {
        let batch_end = (used + RESTART_BATCH).min(options.restarts);
        let results = (used..batch_end)
            .into_par_iter()
            .map(|r| {
                let mut rng = run_stream(seed, r as u64);
                let start = UnitaryOperator::from_trusted(linalg::random_unitary(dim, &mut rng));
                descend(w.matrix(), &start, options).map(|d| (r, d))
            })
            .collect::<Result<Vec<_>>>()?;
        for (r, d) in results {
            let better = match &best {
                None => true,
                Some((_, b)) => d.residual < b.residual,
            };
            if better {
                best = Some((r, d));
            }
        }
        used = batch_end;
        if best.as_ref().is_some_and(|(_, b)| b.residual < options.exact_threshold) {
            break;
        }
    }
    let (best_restart, d) = best.expect("at least one restart");
    Ok(FitResult {
        converged: d.residual < options.exact_threshold,
        residual: d.residual,
        unitary: d.unitary,
        restarts_used: used,
        best_restart,
    })
}

/// A fitted measurement chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub n: usize,
    pub fit: FitResult,
    /// Measurement-frame propagator of the chain: `transition_matrix(U) ≈ W`.
    pub unitary: UnitaryOperator,
    pub transition: TransitionMatrix,
    /// `‖transition(U) - W‖_∞`.
    pub deviation: f64,
    /// `p(t)`, `t = 0..=t_max`, of the induced chain.
    pub p: Vec<Vec<f64>>,
}

/// Fit `w`, then build the chain on `log2 N` qubits from `p0`.
///
/// The fit gives `|U_ij|^2 ≈ W_ij`, while the chain reads `P_ij = |U_ji|^2`,
/// so the propagator is the transpose of the fitted unitary.
pub fn realize_chain(
    w: &StochasticMatrix,
    p0: &[f64],
    t_max: usize,
    options: &FitOptions,
    seed: u64,
) -> Result<Realization> {
    let n = linalg::qubits_for_dim(w.dim())?;
    global::check_distribution(p0, w.dim())?;
    let fit = fit_unitary(w, options, seed)?;
    let unitary = UnitaryOperator::from_trusted(fit.unitary.matrix().transpose());
    let transition = global::transition_matrix(&unitary);
    let deviation = (transition.matrix() - w.matrix()).amax();
    if deviation > fit.residual.sqrt() + 1e-12 {
        return Err(Error::Internal(format!(
            "induced chain deviates by {deviation:.3e}, above sqrt(residual) = {:.3e}",
            fit.residual.sqrt()
        )));
    }
    let p = global::exact_chain(
        &Initial::Distribution(p0.to_vec()),
        &vec![transition.clone(); t_max.max(1)],
        t_max,
    )?;
    Ok(Realization {
        n,
        fit,
        unitary,
        transition,
        deviation,
        p,
    })
}
