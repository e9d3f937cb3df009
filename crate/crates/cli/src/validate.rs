//! Check every input file named by a configuration and list each violation.

use qubit_pbn::linalg::{self, CMatrix};

use crate::error::{CliError, CliResult};
use crate::inputs::Session;
use crate::io::{self, Source};

const TOL: f64 = 1e-10;
const SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Unitary,
    Hermitian,
    Generator,
    State,
    Distribution,
    DoublyStochastic,
    Frame,
}

const ROLES: &[(&str, Kind)] = &[
    ("system.unitary", Kind::Unitary),
    ("system.hamiltonian", Kind::Hermitian),
    ("system.controls", Kind::Hermitian),
    ("system.state", Kind::State),
    ("system.p0", Kind::Distribution),
    ("system.w", Kind::DoublyStochastic),
    ("measurement.frame", Kind::Frame),
    ("lie.generators", Kind::Generator),
    ("lie.drift", Kind::Generator),
];

/// A violated input invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub file: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.file, self.message)
    }
}

fn square(m: &CMatrix) -> Option<String> {
    (m.nrows() != m.ncols()).then(|| format!("not square: {}x{}", m.nrows(), m.ncols()))
}

fn power_of_two(dim: usize) -> Option<String> {
    (!dim.is_power_of_two()).then(|| format!("dimension {dim} is not a power of two"))
}

fn check_complex(kind: Kind, m: &CMatrix) -> Vec<String> {
    if let Some(s) = square(m) {
        return vec![s];
    }
    let mut out: Vec<String> = Vec::new();
    match kind {
        Kind::Unitary => {
            out.extend(power_of_two(m.nrows()));
            let dev = linalg::unitarity_deviation(m);
            if dev > TOL {
                out.push(format!("not unitary: max |U^dagger U - I| = {dev:.3e}"));
            }
        }
        Kind::Hermitian => {
            out.extend(power_of_two(m.nrows()));
            let dev = linalg::hermiticity_deviation(m);
            if dev > TOL {
                out.push(format!("not Hermitian: max |H - H^dagger| = {dev:.3e}"));
            }
        }
        Kind::Generator => {
            out.extend(power_of_two(m.nrows()));
            let herm = linalg::hermiticity_deviation(m);
            let skew = linalg::skew_hermiticity_deviation(m);
            if herm > TOL && skew > TOL {
                out.push(format!(
                    "neither Hermitian nor skew-Hermitian: deviations {herm:.3e} and {skew:.3e}"
                ));
            }
        }
        Kind::Frame => {
            if m.nrows() != 2 {
                out.push(format!("frame must be 2x2, found {}x{}", m.nrows(), m.ncols()));
            }
            let dev = linalg::unitarity_deviation(m);
            if dev > TOL {
                out.push(format!("frame not unitary: max |U^dagger U - I| = {dev:.3e}"));
            }
        }
        _ => unreachable!("matrix kinds only"),
    }
    out
}

fn check_state(grid_len: usize, norm_sqr: f64) -> Vec<String> {
    let mut out: Vec<String> = power_of_two(grid_len).into_iter().collect();
    if (norm_sqr - 1.0).abs() > TOL {
        out.push(format!("not normalized: norm = {:.6e} (norm^2 = {norm_sqr:.6e})", norm_sqr.sqrt()));
    }
    out
}

fn check_distribution(p: &[f64]) -> Vec<String> {
    let mut out: Vec<String> = power_of_two(p.len()).into_iter().collect();
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| **v < 0.0 || !v.is_finite()) {
        out.push(format!("entry {} = {v} is not a probability", i + 1));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        out.push(format!("sums to {total:.12}"));
    }
    out
}

fn check_stochastic(w: &linalg::RMatrix) -> Vec<String> {
    if w.nrows() != w.ncols() {
        return vec![format!("not square: {}x{}", w.nrows(), w.ncols())];
    }
    let mut out: Vec<String> = power_of_two(w.nrows()).into_iter().collect();
    for i in 0..w.nrows() {
        for j in 0..w.ncols() {
            if w[(i, j)] < 0.0 {
                out.push(format!("entry ({}, {}) = {} is negative", i + 1, j + 1, w[(i, j)]));
            }
        }
    }
    for (i, row) in w.row_iter().enumerate() {
        let s = row.sum();
        if (s - 1.0).abs() > SUM_TOL {
            out.push(format!("row {} sums to {s:.12}", i + 1));
        }
    }
    for (j, col) in w.column_iter().enumerate() {
        let s = col.sum();
        if (s - 1.0).abs() > SUM_TOL {
            out.push(format!("column {} sums to {s:.12}", j + 1));
        }
    }
    out
}

/// All violations across the inputs named by the configuration. Unreadable
/// or unparsable files are errors, not violations.
pub fn validate_inputs(s: &mut Session) -> CliResult<(Vec<Violation>, usize)> {
    let mut violations = Vec::new();
    let mut checked = 0;
    for &(key, kind) in ROLES {
        let Some(names) = s.config.list(key)? else {
            continue;
        };
        for name in names {
            let src = Source::new(&s.config, &name);
            let messages = match kind {
                Kind::State => {
                    let (re, im) = io::read_complex_grid(&mut s.inputs, &src)?;
                    if re.rows != 1 && re.cols != 1 {
                        vec![format!("state must be a single row or column, found {}x{}", re.rows, re.cols)]
                    } else {
                        let norm_sqr = re.data.iter().chain(&im.data).map(|x| x * x).sum();
                        check_state(re.data.len(), norm_sqr)
                    }
                }
                Kind::Distribution => {
                    let grid = io::read_real_grid(&mut s.inputs, &src)?;
                    if grid.rows != 1 && grid.cols != 1 {
                        vec![format!("distribution must be a single row or column, found {}x{}", grid.rows, grid.cols)]
                    } else {
                        check_distribution(&grid.data)
                    }
                }
                Kind::DoublyStochastic => check_stochastic(&io::read_real_matrix(&mut s.inputs, &src)?),
                _ => check_complex(kind, &io::read_complex_matrix(&mut s.inputs, &src)?),
            };
            checked += 1;
            violations.extend(messages.into_iter().map(|message| Violation {
                file: name.clone(),
                message,
            }));
        }
    }
    Ok((violations, checked))
}

/// Report text and, when anything is violated, the error carrying status 3.
pub fn run(s: &mut Session) -> CliResult<(String, Option<CliError>)> {
    let (violations, checked) = validate_inputs(s)?;
    let mut report = format!("checked {checked} input file(s)\n");
    if violations.is_empty() {
        report.push_str("no violations\n");
        return Ok((report, None));
    }
    for v in &violations {
        report.push_str(&format!("violation: {v}\n"));
    }
    let err = CliError::Invariant(format!("{} violation(s)", violations.len()));
    Ok((report, Some(err)))
}
