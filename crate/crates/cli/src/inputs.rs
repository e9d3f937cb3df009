//! Building library objects from configuration keys.

use nalgebra::Matrix2;
use qubit_pbn::dynamics::segment_unitary;
use qubit_pbn::linalg::{self, CMatrix};
use qubit_pbn::{
    Basis, BooleanWord, HamiltonianSet, MeasurementSpec, Observable, StateVector, UnitaryOperator,
    UnitarySchedule,
};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::io::{self, Inputs, Source};

/// Configuration plus the record of every file it caused to be read.
pub struct Session {
    pub config: Config,
    pub inputs: Inputs,
}

impl Session {
    pub fn new(config: Config, inputs: Inputs) -> Self {
        Self { config, inputs }
    }

    pub fn complex_matrix(&mut self, name: &str) -> CliResult<CMatrix> {
        let src = Source::new(&self.config, name);
        io::read_complex_matrix(&mut self.inputs, &src)
    }

    pub fn complex_matrices(&mut self, key: &str) -> CliResult<Option<Vec<(String, CMatrix)>>> {
        let Some(names) = self.config.list(key)? else {
            return Ok(None);
        };
        names
            .into_iter()
            .map(|name| {
                let m = self.complex_matrix(&name)?;
                Ok((name, m))
            })
            .collect::<CliResult<Vec<_>>>()
            .map(Some)
    }

    pub fn real_matrix(&mut self, key: &str) -> CliResult<linalg::RMatrix> {
        let name = self.config.require(key)?.to_string();
        io::read_real_matrix(&mut self.inputs, &Source::new(&self.config, &name))
    }

    pub fn real_vector(&mut self, key: &str) -> CliResult<Option<Vec<f64>>> {
        match self.config.get(key).map(str::to_string) {
            None => Ok(None),
            Some(name) => io::read_real_vector(&mut self.inputs, &Source::new(&self.config, &name)).map(Some),
        }
    }

    /// Propagators from `system.unitary` (one file, or a comma list for a
    /// time-varying schedule), or from `system.hamiltonian` held for
    /// `system.period` with optional constant controls.
    pub fn unitaries(&mut self) -> CliResult<UnitarySchedule> {
        let schedule = if let Some(list) = self.complex_matrices("system.unitary")? {
            if self.config.has("system.hamiltonian") {
                return Err(CliError::Malformed(
                    "give either system.unitary or system.hamiltonian, not both".into(),
                ));
            }
            let mut ops = list
                .into_iter()
                .map(|(name, m)| {
                    UnitaryOperator::new(m).map_err(|e| CliError::Invariant(format!("{name}: {e}")))
                })
                .collect::<CliResult<Vec<_>>>()?;
            if ops.len() == 1 {
                UnitarySchedule::Constant(ops.remove(0))
            } else {
                UnitarySchedule::Sequence(ops)
            }
        } else if self.config.has("system.hamiltonian") {
            UnitarySchedule::Constant(self.propagator()?)
        } else {
            return Err(CliError::Malformed(
                "missing required key `system.unitary` (or `system.hamiltonian`)".into(),
            ));
        };
        let dim = schedule.dim().unwrap_or(0);
        if let UnitarySchedule::Sequence(list) = &schedule {
            if list.iter().any(|u| u.dim() != dim) {
                return Err(CliError::Malformed("propagators differ in dimension".into()));
            }
        }
        self.check_n(dim)?;
        Ok(schedule)
    }

    fn propagator(&mut self) -> CliResult<UnitaryOperator> {
        let name = self.config.require("system.hamiltonian")?.to_string();
        let drift = self.complex_matrix(&name)?;
        let controls: Vec<CMatrix> = self
            .complex_matrices("system.controls")?
            .unwrap_or_default()
            .into_iter()
            .map(|(_, m)| m)
            .collect();
        let values: Vec<f64> = self
            .config
            .parsed_list("system.control_values")?
            .unwrap_or_default();
        if values.len() != controls.len() {
            return Err(CliError::Malformed(format!(
                "{} control Hamiltonians but {} control values",
                controls.len(),
                values.len()
            )));
        }
        let period: f64 = self.config.require_parsed("system.period")?;
        if !(period > 0.0 && period.is_finite()) {
            return Err(CliError::Malformed(format!("system.period = {period} must be positive")));
        }
        let hams = HamiltonianSet::new(drift, controls)?;
        Ok(segment_unitary(&hams, &values, period)?)
    }

    /// Qubit count from a matrix dimension, checked against `system.n`.
    pub fn check_n(&self, dim: usize) -> CliResult<usize> {
        let n = linalg::qubits_for_dim(dim)?;
        if let Some(given) = self.config.parsed::<usize>("system.n")? {
            if given != n {
                return Err(CliError::Malformed(format!(
                    "system.n = {given} but the inputs have dimension {dim} ({n} qubits)"
                )));
            }
        }
        Ok(n)
    }

    pub fn spec(&self, n: usize) -> CliResult<MeasurementSpec> {
        match self.config.parsed_list::<usize>("measurement.measured")? {
            None => Ok(MeasurementSpec::global(n)),
            Some(q) => Ok(MeasurementSpec::new(n, q)?),
        }
    }

    /// Observables from `measurement.frame`: one 2x2 frame for every measured
    /// qubit, or one per measured qubit. Eigenvalues default to `(0, 1)`.
    pub fn basis(&mut self, k: usize) -> CliResult<Basis> {
        let (l0, l1) = match self.config.parsed_list::<f64>("measurement.eigenvalues")? {
            None => (0.0, 1.0),
            Some(v) if v.len() == 2 => (v[0], v[1]),
            Some(v) => {
                return Err(CliError::Malformed(format!(
                    "measurement.eigenvalues needs 2 values, found {}",
                    v.len()
                )))
            }
        };
        let Some(frames) = self.complex_matrices("measurement.frame")? else {
            return Ok(if (l0, l1) == (0.0, 1.0) {
                Basis::computational()
            } else {
                Basis::Uniform(Observable::from_frame(l0, l1, Matrix2::identity())?)
            });
        };
        let observables = frames
            .into_iter()
            .map(|(name, m)| {
                if m.shape() != (2, 2) {
                    return Err(CliError::Invariant(format!(
                        "{name}: frame must be 2x2, found {}x{}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let u = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
                Observable::from_frame(l0, l1, u).map_err(|e| CliError::Invariant(format!("{name}: {e}")))
            })
            .collect::<CliResult<Vec<_>>>()?;
        match observables.len() {
            1 => Ok(Basis::Uniform(observables.into_iter().next().expect("one"))),
            len if len == k => Ok(Basis::PerQubit(observables)),
            len => Err(CliError::Malformed(format!(
                "{len} measurement frames for {k} measured qubits"
            ))),
        }
    }

    /// Initial state from `system.state` (complex vector) or `system.x0`
    /// (basis word).
    pub fn state(&mut self, n: usize) -> CliResult<StateVector> {
        match (self.config.get("system.state").map(str::to_string), self.config.get("system.x0")) {
            (Some(_), Some(_)) => Err(CliError::Malformed(
                "give either system.state or system.x0, not both".into(),
            )),
            (Some(name), None) => {
                let amps = io::read_complex_vector(&mut self.inputs, &Source::new(&self.config, &name))?;
                if amps.len() != 1 << n {
                    return Err(CliError::Malformed(format!(
                        "{name}: {} amplitudes for {n} qubits",
                        amps.len()
                    )));
                }
                StateVector::new(n, amps).map_err(|e| CliError::Invariant(format!("{name}: {e}")))
            }
            (None, Some(_)) => Ok(StateVector::basis(&self.word("system.x0", n)?)),
            (None, None) => Err(CliError::Malformed(
                "missing required key `system.state` (or `system.x0`)".into(),
            )),
        }
    }

    pub fn word(&self, key: &str, len: usize) -> CliResult<BooleanWord> {
        let text = self.config.require(key)?;
        let w: BooleanWord = text
            .parse()
            .map_err(|e| CliError::Malformed(format!("{key} = {text}: {e}")))?;
        if w.len() != len {
            return Err(CliError::Malformed(format!(
                "{key} = {text} has {} bits, expected {len}",
                w.len()
            )));
        }
        Ok(w)
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.config.parsed("run.seed")?.ok_or_else(|| {
            CliError::Malformed("this mode is stochastic: pass --seed or set run.seed".into())
        })
    }
}
