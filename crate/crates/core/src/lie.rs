//! Lie closures of skew-Hermitian generators and the classification used by
//! the controllability certificates.
//!
//! Matrices are handled as real vectors in `R^(2 N^2)` under the inner product
//! `Re tr(X† Y)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, C64, I, ZERO};

/// Residual norm above which a bracket adds a new direction.
pub const CLOSURE_TOL: f64 = 1e-8;
/// Required ratio between the smallest accepted and largest rejected
/// singular value in rank decisions.
pub const GAP_RATIO: f64 = 1e3;
const SKEW_TOL: f64 = 1e-10;
const SYMPLECTIC_TOL: f64 = 1e-8;

fn to_vec(x: &CMatrix) -> DVector<f64> {
    DVector::from_iterator(2 * x.len(), x.iter().flat_map(|z| [z.re, z.im]))
}

fn from_vec(v: &DVector<f64>, dim: usize) -> CMatrix {
    CMatrix::from_iterator(dim, dim, v.as_slice().chunks(2).map(|p| C64::new(p[0], p[1])))
}

fn bracket(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Orthonormal basis of a real Lie algebra of `N x N` skew-Hermitian matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct LieBasis {
    dim: usize,
    vectors: Vec<DVector<f64>>,
}

impl LieBasis {
    fn empty(dim: usize) -> Self {
        Self {
            dim,
            vectors: Vec::new(),
        }
    }

    /// Matrix dimension `N`.
    pub fn matrix_dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the algebra.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn elements(&self) -> Vec<CMatrix> {
        self.vectors.iter().map(|v| from_vec(v, self.dim)).collect()
    }

    /// Norm of the component of `x` orthogonal to the span.
    pub fn distance(&self, x: &CMatrix) -> f64 {
        self.residual(to_vec(x)).norm()
    }

    fn residual(&self, mut v: DVector<f64>) -> DVector<f64> {
        // two passes of classical Gram-Schmidt keep the basis orthonormal
        for _ in 0..2 {
            for b in &self.vectors {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        v
    }

    /// Add the normalized residual of `x` if it exceeds `tol`.
    fn try_add(&mut self, x: &CMatrix, tol: f64) -> bool {
        let r = self.residual(to_vec(x));
        let norm = r.norm();
        if norm > tol {
            self.vectors.push(r / norm);
            true
        } else {
            false
        }
    }

    /// Largest `|Re tr(X_i† X_j) - δ_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }
}

fn check_generators(generators: &[CMatrix]) -> Result<usize> {
    let first = generators
        .first()
        .ok_or_else(|| Error::InvalidParameter("no generators".into()))?;
    let dim = first.nrows();
    for g in generators {
        linalg::ensure_square(g)?;
        if g.nrows() != dim {
            return Err(Error::DimensionMismatch {
                context: "generator dimension",
                expected: dim,
                found: g.nrows(),
            });
        }
        let deviation = linalg::skew_hermiticity_deviation(g);
        if deviation > SKEW_TOL {
            return Err(Error::NotSkewHermitian { deviation });
        }
    }
    Ok(dim)
}

/// Smallest bracket-closed real span containing `generators`.
///
/// Each basis element is bracketed with every earlier one; components with
/// residual norm above `tol` are added, until the list is exhausted. A final
/// full sweep confirms that nothing new appears.
pub fn lie_closure(generators: &[CMatrix], tol: f64) -> Result<LieBasis> {
    let dim = check_generators(generators)?;
    let max = dim * dim;
    let mut basis = LieBasis::empty(dim);
    for g in generators {
        basis.try_add(g, tol);
    }
    loop {
        let mut next = 0;
        while next < basis.len() {
            let elements = basis.elements();
            for j in 0..next {
                if basis.try_add(&bracket(&elements[next], &elements[j]), tol) && basis.len() > max {
                    return Err(Error::ClosureOverflow { max });
                }
            }
            next += 1;
        }
        // confirmation sweep
        let elements = basis.elements();
        let before = basis.len();
        for i in 0..elements.len() {
            for j in 0..i {
                basis.try_add(&bracket(&elements[i], &elements[j]), tol);
            }
        }
        if basis.len() > max {
            return Err(Error::ClosureOverflow { max });
        }
        if basis.len() == before {
            return Ok(basis);
        }
    }
}

/// Orthonormal basis of `su(N)`: `i` times the generalized Gell-Mann matrices,
/// scaled to unit norm.
pub fn su_basis(dim: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(dim * dim - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        for k in j + 1..dim {
            let mut a = CMatrix::zeros(dim, dim);
            a[(j, k)] = C64::new(s, 0.0);
            a[(k, j)] = C64::new(-s, 0.0);
            out.push(a);
            let mut b = CMatrix::zeros(dim, dim);
            b[(j, k)] = I * s;
            b[(k, j)] = I * s;
            out.push(b);
        }
    }
    for l in 1..dim {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut d = CMatrix::zeros(dim, dim);
        for m in 0..l {
            d[(m, m)] = I / norm;
        }
        d[(l, l)] = I * (-(l as f64) / norm);
        out.push(d);
    }
    out
}

/// Classification branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraTag {
    FullSu,
    Symplectic,
    Other,
}

impl std::fmt::Display for AlgebraTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlgebraTag::FullSu => "su",
            AlgebraTag::Symplectic => "sp",
            AlgebraTag::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraClass {
    pub tag: AlgebraTag,
    /// Dimension of the traceless projection.
    pub dim: usize,
    /// Dimension of the algebra before projection.
    pub full_dim: usize,
    /// Whether `i I` lies in the algebra.
    pub contains_identity: bool,
    /// The antisymmetric form with `X J + J Xᵀ = 0`, for the symplectic branch.
    pub j: Option<CMatrix>,
    /// `max_i ‖X_i J + J X_iᵀ‖` for the returned `J`.
    pub j_residual: Option<f64>,
    pub diagnostics: Vec<String>,
}

/// Rank with a gap check: singular values above `tol` count, and the last
/// accepted one must exceed the first rejected one by [`GAP_RATIO`].
fn gapped_rank(mut values: Vec<f64>, tol: f64) -> (usize, bool) {
    values.sort_by(|a, b| b.total_cmp(a));
    let rank = values.iter().filter(|&&s| s > tol).count();
    let gap_ok = match (rank.checked_sub(1).map(|i| values[i]), values.get(rank)) {
        (Some(acc), Some(&rej)) => rej == 0.0 || acc / rej >= GAP_RATIO,
        _ => true,
    };
    (rank, gap_ok)
}

fn traceless(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let t = x.trace() / n as f64;
    x - CMatrix::identity(n, n) * t
}

/// Classify the algebra spanned by `basis`.
///
/// Trace components are projected out first. `FullSu` when the traceless
/// part has dimension `N^2 - 1`; `Symplectic` when `N` is even, the dimension
/// is `(N/2)(N+1)`, and the stacked constraints `X_i J + J X_iᵀ = 0` over
/// antisymmetric `J` have a one-dimensional, nondegenerate solution; `Other`
/// otherwise, with the reasons in `diagnostics`.
pub fn classify(basis: &LieBasis) -> AlgebraClass {
    let n = basis.matrix_dim();
    let mut diagnostics = Vec::new();
    let projected: Vec<CMatrix> = basis.elements().iter().map(traceless).collect();
    let identity_dir = CMatrix::identity(n, n) * (I / (n as f64).sqrt());
    let contains_identity = basis.distance(&identity_dir) < CLOSURE_TOL;
    let (dim, gap_ok) = if projected.is_empty() {
        (0, true)
    } else {
        let cols: Vec<DVector<f64>> = projected.iter().map(to_vec).collect();
        let m = RMatrix::from_columns(&cols);
        gapped_rank(m.singular_values().iter().copied().collect(), CLOSURE_TOL)
    };
    let mut class = AlgebraClass {
        tag: AlgebraTag::Other,
        dim,
        full_dim: basis.len(),
        contains_identity,
        j: None,
        j_residual: None,
        diagnostics: Vec::new(),
    };
    if !gap_ok {
        diagnostics.push("no clear singular-value gap in the traceless rank".to_string());
        class.diagnostics = diagnostics;
        return class;
    }
    if dim == n * n - 1 {
        class.tag = AlgebraTag::FullSu;
        return class;
    }
    let sp_dim = if n.is_multiple_of(2) { (n / 2) * (n + 1) } else { 0 };
    if n % 2 == 1 {
        diagnostics.push(format!("N = {n} is odd, no symplectic form"));
    } else if dim != sp_dim {
        diagnostics.push(format!(
            "traceless dimension {dim}, su needs {}, sp needs {sp_dim}",
            n * n - 1
        ));
    } else {
        match symplectic_form(&projected) {
            Ok((j, residual)) => {
                class.tag = AlgebraTag::Symplectic;
                class.j = Some(j);
                class.j_residual = Some(residual);
            }
            Err(reason) => diagnostics.push(reason),
        }
    }
    class.diagnostics = diagnostics;
    class
}

/// Solve `X_i J + J X_iᵀ = 0` for antisymmetric `J`, parameterized by its
/// strict upper triangle. Returns `J` scaled to unit Frobenius norm with its
/// largest entry real positive, and the constraint residual.
fn symplectic_form(elements: &[CMatrix]) -> std::result::Result<(CMatrix, f64), String> {
    let n = elements[0].nrows();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let unit = |&(a, b): &(usize, usize)| {
        let mut e = CMatrix::zeros(n, n);
        e[(a, b)] = C64::new(1.0, 0.0);
        e[(b, a)] = C64::new(-1.0, 0.0);
        e
    };
    let units: Vec<CMatrix> = pairs.iter().map(unit).collect();
    let rows = elements.len() * n * n;
    let mut a = CMatrix::zeros(rows, pairs.len());
    for (c, e) in units.iter().enumerate() {
        for (i, x) in elements.iter().enumerate() {
            let image = x * e + e * x.transpose();
            for (r, z) in image.iter().enumerate() {
                a[(i * n * n + r, c)] = *z;
            }
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&p, &q| svd.singular_values[q].total_cmp(&svd.singular_values[p]));
    let values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    // make sure the smallest singular value is present when rows < columns
    if values.len() < pairs.len() {
        return Err("constraint system is underdetermined".into());
    }
    let last = values.len() - 1;
    let smallest = values[last];
    if smallest >= SYMPLECTIC_TOL {
        return Err(format!(
            "no antisymmetric J: smallest singular value {smallest:.3e}"
        ));
    }
    if last > 0 && values[last - 1] < SYMPLECTIC_TOL {
        return Err("the antisymmetric solution space has dimension above one".into());
    }
    if last > 0 && smallest > 0.0 && values[last - 1] / smallest < GAP_RATIO {
        return Err(format!(
            "no clear gap above the null singular value {smallest:.3e}"
        ));
    }
    let row = v_t.row(order[last]);
    let mut j = CMatrix::zeros(n, n);
    for (c, e) in units.iter().enumerate() {
        j += e * row[c].conj();
    }
    let j_sv = j.singular_values();
    let j_min = j_sv.iter().copied().fold(f64::INFINITY, f64::min);
    let j_max = j_sv.iter().copied().fold(0.0, f64::max);
    if j_min < 1e-6 * j_max {
        return Err("the antisymmetric solution is degenerate".into());
    }
    let pivot = j
        .iter()
        .copied()
        .max_by(|p, q| p.norm().total_cmp(&q.norm()))
        .unwrap_or(ZERO);
    let phase = pivot.conj() / pivot.norm();
    let norm = j.norm();
    j = (j * phase).unscale(norm);
    let residual = elements
        .iter()
        .map(|x| (x * &j + &j * x.transpose()).norm())
        .fold(0.0, f64::max);
    if residual > SYMPLECTIC_TOL {
        return Err(format!("J leaves residual {residual:.3e}"));
    }
    Ok((j, residual))
}

/// Drift-free controllability: the closure of `controls` is `su(2^n)` or
/// symplectic.
pub fn drift_free_controllable(controls: &[CMatrix], n: usize) -> Result<bool> {
    let class = controls_class(controls, n)?;
    Ok(matches!(class.tag, AlgebraTag::FullSu | AlgebraTag::Symplectic))
}

fn controls_class(generators: &[CMatrix], n: usize) -> Result<AlgebraClass> {
    let dim = check_generators(generators)?;
    if dim != 1usize << n {
        return Err(Error::DimensionMismatch {
            context: "generator dimension vs 2^n",
            expected: 1 << n,
            found: dim,
        });
    }
    Ok(classify(&lie_closure(generators, CLOSURE_TOL)?))
}

/// Certificate for controllability with a drift term.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCertificate {
    pub certified: bool,
    /// The algebra generated by the drift and controls is su or symplectic.
    pub algebra_condition: bool,
    /// The caller's assertion that the measurement period is long enough
    /// for the reachable set to cover the group. Never computed.
    pub period_assumed: bool,
    pub class: AlgebraClass,
    pub report: Vec<String>,
}

/// Check the algebra generated by drift `a` and `controls`, and combine it
/// with the caller's assertion about the period length.
pub fn drift_case_certificate(
    a: &CMatrix,
    controls: &[CMatrix],
    n: usize,
    period_assumed: bool,
) -> Result<DriftCertificate> {
    let mut generators = vec![a.clone()];
    generators.extend_from_slice(controls);
    let class = controls_class(&generators, n)?;
    let algebra_condition = matches!(class.tag, AlgebraTag::FullSu | AlgebraTag::Symplectic);
    let mut report = vec![format!(
        "(i) Lie algebra of drift and controls: {} (traceless dim {}): {}",
        class.tag,
        class.dim,
        if algebra_condition { "holds" } else { "fails" }
    )];
    report.push(format!(
        "(ii) period long enough for the reachable set to cover the group: {} (asserted by the caller, not computed)",
        if period_assumed { "assumed" } else { "not assumed" }
    ));
    Ok(DriftCertificate {
        certified: algebra_condition && period_assumed,
        algebra_condition,
        period_assumed,
        class,
        report,
    })
}
