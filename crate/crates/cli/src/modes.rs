//! One function per subcommand. Each returns the tables to write and a
//! text report; nothing touches the filesystem here except input reads.

use rayon::prelude::*;

use qubit_pbn::global::{self, Initial};
use qubit_pbn::hitting::{estimate_hitting, hitting_lower_bound, HittingCurve, OverlapPolicy};
use qubit_pbn::lie::{self, AlgebraClass};
use qubit_pbn::linalg::{self, CMatrix, RMatrix, I};
use qubit_pbn::local::{self, LocalFrame, PathRecord};
use qubit_pbn::measurement::outcome_distribution;
use qubit_pbn::realization::{self, FitOptions, StochasticMatrix};
use qubit_pbn::rng::run_stream;
use qubit_pbn::{Basis, BooleanWord, MeasurementSpec, UnitarySchedule};

use crate::error::{CliError, CliResult};
use crate::inputs::Session;
use crate::io::{fmt_f64, matrix_table, Table};
use crate::Mode;

/// Tolerance for the normalization check applied to every table before it
/// is written.
const TABLE_TOL: f64 = 1e-9;

#[derive(Debug, Default)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub report: String,
    /// Error to report after the tables are written.
    pub deferred: Option<CliError>,
}

impl Outcome {
    fn say(&mut self, line: impl AsRef<str>) {
        self.report.push_str(line.as_ref());
        self.report.push('\n');
    }
}

fn word_columns(k: usize) -> Vec<String> {
    std::iter::once("t".to_string())
        .chain(BooleanWord::all(k).map(|w| w.to_string()))
        .collect()
}

fn check_distributions(name: &str, rows: &[Vec<f64>]) -> CliResult<()> {
    for (t, row) in rows.iter().enumerate() {
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > TABLE_TOL || row.iter().any(|&p| p < -TABLE_TOL) {
            return Err(CliError::Core(qubit_pbn::Error::Internal(format!(
                "{name}: row t = {t} is not a distribution (sum {total})"
            ))));
        }
    }
    Ok(())
}

fn distribution_table(name: &str, header: &str, k: usize, rows: &[Vec<f64>]) -> CliResult<Table> {
    check_distributions(name, rows)?;
    let mut table = Table::new(name, header, Some(&word_columns(k)));
    for (t, row) in rows.iter().enumerate() {
        table.row(std::iter::once(t.to_string()).chain(row.iter().map(|&p| fmt_f64(p))));
    }
    Ok(table)
}

fn steps(s: &Session) -> CliResult<usize> {
    s.config.require_parsed("run.steps")
}

fn runs(s: &Session) -> CliResult<usize> {
    let runs: usize = s.config.require_parsed("run.runs")?;
    if runs == 0 {
        return Err(CliError::Malformed("run.runs must be positive".into()));
    }
    Ok(runs)
}

/// Global-measurement propagators in the measurement frame.
fn frame_schedule(s: &mut Session) -> CliResult<(usize, UnitarySchedule, Basis)> {
    let unitaries = s.unitaries()?;
    let n = s.check_n(unitaries.dim().unwrap_or(0))?;
    if s.config.has("measurement.measured") {
        let spec = s.spec(n)?;
        if !spec.is_global() {
            return Err(CliError::Malformed(
                "this mode needs a global measurement; drop measurement.measured".into(),
            ));
        }
    }
    let basis = s.basis(n)?;
    let framed = unitaries.map(|u| global::measurement_frame(u, &basis))?;
    Ok((n, framed, basis))
}

pub fn transition(s: &mut Session) -> CliResult<Outcome> {
    let (n, framed, _) = frame_schedule(s)?;
    let p = global::transition_matrix(framed.at(0)?);
    global::check_transition(&p)?;
    let mut out = Outcome::default();
    let header = s.inputs.header(Mode::Transition.name(), None);
    out.tables.push(matrix_table("transition.csv", &header, p.matrix()));
    out.say(format!("transition matrix on {n} qubits (rows are sources)"));
    if matches!(framed, UnitarySchedule::Sequence(ref l) if l.len() > 1) {
        out.say("note: only the first propagator of the schedule is used");
    }
    Ok(out)
}

pub fn mappings(s: &mut Session) -> CliResult<Outcome> {
    let (n, framed, _) = frame_schedule(s)?;
    let threshold: f64 = s.config.parsed_or("run.threshold", 0.0)?;
    let list = global::enumerate_mappings(framed.at(0)?, threshold)
        .map_err(|e| match e {
            qubit_pbn::Error::TooLarge { .. } => CliError::Infeasible(e.to_string()),
            other => other.into(),
        })?;
    let dim = 1usize << n;
    let columns: Vec<String> = (1..=dim)
        .map(|i| format!("alpha_{i}"))
        .chain(std::iter::once("probability".to_string()))
        .collect();
    let header = s.inputs.header(Mode::Mappings.name(), None);
    let mut table = Table::new("mappings.csv", &header, Some(&columns));
    let mut total = 0.0;
    for (m, p) in &list {
        total += p;
        table.row(m.alpha().iter().map(|a| a.to_string()).chain(std::iter::once(fmt_f64(*p))));
    }
    let mut out = Outcome::default();
    out.tables.push(table);
    out.say(format!(
        "{} mappings with probability above {threshold}; total probability {total:.12}",
        list.len()
    ));
    Ok(out)
}

fn initial(s: &mut Session, n: usize, basis: &Basis) -> CliResult<Initial> {
    let given = ["system.p0", "system.state", "system.x0"]
        .iter()
        .filter(|k| s.config.has(k))
        .count();
    if given != 1 {
        return Err(CliError::Malformed(
            "give exactly one of system.p0, system.state, system.x0".into(),
        ));
    }
    if let Some(p0) = s.real_vector("system.p0")? {
        return Ok(Initial::Distribution(p0));
    }
    if s.config.has("system.x0") {
        return Ok(Initial::Word(s.word("system.x0", n)?));
    }
    let state = s.state(n)?;
    Ok(Initial::Distribution(outcome_distribution(
        &state,
        &MeasurementSpec::global(n),
        basis,
    )?))
}

pub fn simulate_global(s: &mut Session) -> CliResult<Outcome> {
    let seed = s.seed()?;
    let steps = steps(s)?;
    let runs = runs(s)?;
    let (n, matrices, init) = if s.config.has("system.w") {
        if s.config.has("system.unitary") || s.config.has("system.hamiltonian") {
            return Err(CliError::Malformed(
                "give either system.w or a propagator, not both".into(),
            ));
        }
        let w = StochasticMatrix::new(s.real_matrix("system.w")?)?;
        let n = s.check_n(w.dim())?;
        let init = initial(s, n, &Basis::computational())?;
        (n, vec![w.as_transition(); steps.max(1)], init)
    } else {
        let (n, framed, basis) = frame_schedule(s)?;
        let init = initial(s, n, &basis)?;
        (n, global::transition_schedule(&framed, steps)?, init)
    };
    let tables = global::simulate_markov(&init, &matrices, steps, runs, seed)?;
    let header = s.inputs.header(Mode::SimulateGlobal.name(), Some(seed));
    let mut out = Outcome::default();
    out.tables.push(distribution_table("p_hat.csv", &header, n, &tables.p_hat)?);
    out.tables.push(distribution_table("p_exact.csv", &header, n, &tables.p_exact)?);
    out.say(format!(
        "{runs} runs, {steps} steps, {n} qubits; max |p_hat - p_exact| = {:.3e}",
        tables.max_error()
    ));
    Ok(out)
}

fn local_setup(s: &mut Session) -> CliResult<(usize, UnitarySchedule, MeasurementSpec, Basis)> {
    let unitaries = s.unitaries()?;
    let n = s.check_n(unitaries.dim().unwrap_or(0))?;
    let spec = s.spec(n)?;
    let basis = s.basis(spec.k())?;
    Ok((n, unitaries, spec, basis))
}

fn path_columns(k: usize, n: usize, with_run: bool) -> Vec<String> {
    let d = 1usize << (n - k);
    let mut cols = Vec::new();
    if with_run {
        cols.push("run".to_string());
    }
    cols.extend(["t", "outcome", "probability"].map(String::from));
    for i in 1..=d {
        cols.push(format!("beta_re_{i}"));
        cols.push(format!("beta_im_{i}"));
    }
    cols
}

fn push_record(table: &mut Table, run: Option<usize>, rec: &PathRecord) -> CliResult<()> {
    for (t, ((x, p), beta)) in rec.outcomes.iter().zip(&rec.probs).zip(&rec.betas).enumerate() {
        if !(-TABLE_TOL..=1.0 + TABLE_TOL).contains(p) {
            return Err(CliError::Core(qubit_pbn::Error::Internal(format!(
                "conditional probability {p} at t = {t} outside [0, 1]"
            ))));
        }
        let mut fields: Vec<String> = run.map(|r| r.to_string()).into_iter().collect();
        fields.push(t.to_string());
        fields.push(x.to_string());
        fields.push(fmt_f64(*p));
        for z in beta.iter() {
            fields.push(fmt_f64(z.re));
            fields.push(fmt_f64(z.im));
        }
        table.row(fields);
    }
    Ok(())
}

pub fn simulate_local(s: &mut Session) -> CliResult<Outcome> {
    let seed = s.seed()?;
    let steps = steps(s)?;
    let runs = runs(s)?;
    let (n, unitaries, spec, basis) = local_setup(s)?;
    let state = s.state(n)?;
    let frame = LocalFrame::new(&spec, &basis)?;
    let records = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = run_stream(seed, r as u64);
            local::sample_local_path(&state, &unitaries, &frame, steps, &mut rng)
        })
        .collect::<qubit_pbn::Result<Vec<_>>>()?;
    let k = spec.k();
    let mut counts = vec![vec![0u64; 1 << k]; steps + 1];
    for rec in &records {
        for (t, x) in rec.outcomes.iter().enumerate() {
            counts[t][x.position()] += 1;
        }
    }
    let p_hat: Vec<Vec<f64>> = counts
        .iter()
        .map(|c| c.iter().map(|&v| v as f64 / runs as f64).collect())
        .collect();
    let p_exact = local::outcome_marginals(&state, &unitaries, &spec, &basis, steps)?;
    let header = s.inputs.header(Mode::SimulateLocal.name(), Some(seed));
    let mut paths = Table::new("path.csv", &header, Some(&path_columns(k, n, true)));
    for (r, rec) in records.iter().enumerate() {
        push_record(&mut paths, Some(r), rec)?;
    }
    let err = p_hat
        .iter()
        .zip(&p_exact)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let mut out = Outcome::default();
    out.tables.push(distribution_table("p_hat.csv", &header, k, &p_hat)?);
    out.tables.push(distribution_table("p_exact.csv", &header, k, &p_exact)?);
    out.tables.push(paths);
    out.say(format!(
        "{runs} runs, {steps} steps, measured qubits {:?} of {n}; max |p_hat - p_exact| = {err:.3e}",
        spec.measured()
    ));
    Ok(out)
}

pub fn path_prob(s: &mut Session) -> CliResult<Outcome> {
    let (n, unitaries, spec, basis) = local_setup(s)?;
    let state = s.state(n)?;
    let k = spec.k();
    let path = s
        .config
        .list("path.outcomes")?
        .ok_or_else(|| CliError::Malformed("missing required key `path.outcomes`".into()))?
        .iter()
        .map(|text| {
            let w: BooleanWord = text
                .parse()
                .map_err(|e| CliError::Malformed(format!("path.outcomes: `{text}`: {e}")))?;
            if w.len() != k {
                return Err(CliError::Malformed(format!(
                    "path.outcomes: `{text}` has {} bits, {k} qubits are measured",
                    w.len()
                )));
            }
            Ok(w)
        })
        .collect::<CliResult<Vec<_>>>()?;
    let frame = LocalFrame::new(&spec, &basis)?;
    let rec = frame.path_trace(&state, &unitaries, &path)?;
    let header = s.inputs.header(Mode::PathProb.name(), None);
    let mut table = Table::new("path.csv", &header, Some(&path_columns(k, n, false)));
    push_record(&mut table, None, &rec)?;
    let mut out = Outcome::default();
    out.tables.push(table);
    let vanished = rec.len() < path.len()
        || rec.betas.last().is_some_and(|b| b.norm() < local::ZERO_BETA);
    if vanished {
        out.say(format!(
            "path is impossible: conditional probability vanishes at t = {}",
            rec.len() - 1
        ));
    } else {
        out.say(format!("joint probability {}", fmt_f64(rec.joint_probability())));
    }
    Ok(out)
}

pub fn realize(s: &mut Session) -> CliResult<Outcome> {
    let seed = s.seed()?;
    let w = StochasticMatrix::new(s.real_matrix("system.w")?)?;
    let dim = w.dim();
    s.check_n(dim)?;
    let p0 = s
        .real_vector("system.p0")?
        .unwrap_or_else(|| vec![1.0 / dim as f64; dim]);
    let t_max: usize = s.config.parsed_or("run.steps", 0)?;
    let defaults = FitOptions::default();
    let options = FitOptions {
        restarts: s.config.parsed_or("run.restarts", defaults.restarts)?,
        iterations: s.config.parsed_or("run.iterations", defaults.iterations)?,
        ..defaults
    };
    let real = realization::realize_chain(&w, &p0, t_max, &options, seed)?;
    let header = s.inputs.header(Mode::Realize.name(), Some(seed));
    let cols: Vec<String> = ["i", "j", "re", "im", "modulus_sq", "target"]
        .map(String::from)
        .to_vec();
    let mut fit = Table::new("fit.csv", &header, Some(&cols));
    let u = real.fit.unitary.matrix();
    for i in 0..dim {
        for j in 0..dim {
            let z = u[(i, j)];
            fit.row([
                (i + 1).to_string(),
                (j + 1).to_string(),
                fmt_f64(z.re),
                fmt_f64(z.im),
                fmt_f64(z.norm_sqr()),
                fmt_f64(w.matrix()[(i, j)]),
            ]);
        }
    }
    let parts = |m: &CMatrix, f: fn(&qubit_pbn::linalg::C64) -> f64| -> RMatrix {
        RMatrix::from_fn(m.nrows(), m.ncols(), |r, c| f(&m[(r, c)]))
    };
    let mut out = Outcome::default();
    out.tables.push(fit);
    out.tables.push(matrix_table("unitary.re.csv", &header, &parts(u, |z| z.re)));
    out.tables.push(matrix_table("unitary.im.csv", &header, &parts(u, |z| z.im)));
    out.tables.push(distribution_table("p_exact.csv", &header, real.n, &real.p)?);
    out.say(format!("residual {}", fmt_f64(real.fit.residual)));
    out.say(format!(
        "restarts used {} (best {}), converged: {}",
        real.fit.restarts_used, real.fit.best_restart, real.fit.converged
    ));
    out.say(format!("max |P - W| = {:.3e}", real.deviation));
    out.say("unitary.re/im.csv hold the fitted U with |U_ij|^2 ~ W_ij; the chain propagator is its transpose");
    if !real.fit.converged {
        out.deferred = Some(CliError::Infeasible(format!(
            "no unitary realizes W within the budget (best residual {:.3e})",
            real.fit.residual
        )));
    }
    Ok(out)
}

/// Generators as skew-Hermitian matrices: Hermitian inputs `H` become `-iH`.
fn as_generator(name: &str, m: CMatrix) -> CliResult<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(CliError::Invariant(format!(
            "{name}: matrix is not square: {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let herm = linalg::hermiticity_deviation(&m);
    let skew = linalg::skew_hermiticity_deviation(&m);
    if herm <= 1e-10 {
        Ok(m * (-I))
    } else if skew <= 1e-10 {
        Ok(m)
    } else {
        Err(CliError::Invariant(format!(
            "{name}: neither Hermitian nor skew-Hermitian (deviations {herm:.3e}, {skew:.3e})"
        )))
    }
}

fn describe(out: &mut Outcome, class: &AlgebraClass) {
    out.say(format!("algebra: {}", class.tag));
    out.say(format!("dimension: {} (traceless {})", class.full_dim, class.dim));
    out.say(format!("contains identity: {}", class.contains_identity));
    if let Some(j) = &class.j {
        out.say("J:");
        for r in 0..j.nrows() {
            let row: Vec<String> = j
                .row(r)
                .iter()
                .map(|z| format!("({}, {})", fmt_f64(z.re), fmt_f64(z.im)))
                .collect();
            out.say(format!("  {}", row.join(", ")));
        }
        if let Some(res) = class.j_residual {
            out.say(format!("J residual: {res:.3e}"));
        }
    }
    for d in &class.diagnostics {
        out.say(format!("diagnostic: {d}"));
    }
}

pub fn lie_check(s: &mut Session) -> CliResult<Outcome> {
    let controls = s
        .complex_matrices("lie.generators")?
        .ok_or_else(|| CliError::Malformed("missing required key `lie.generators`".into()))?
        .into_iter()
        .map(|(name, m)| as_generator(&name, m))
        .collect::<CliResult<Vec<_>>>()?;
    let dim = controls[0].nrows();
    let n = s.check_n(dim)?;
    let mut out = Outcome::default();
    match s.config.get("lie.drift").map(str::to_string) {
        None => {
            if s.config.has("lie.period_assumed") {
                return Err(CliError::Malformed("lie.period_assumed needs lie.drift".into()));
            }
            let basis = lie::lie_closure(&controls, lie::CLOSURE_TOL)?;
            let class = lie::classify(&basis);
            describe(&mut out, &class);
            let ok = lie::drift_free_controllable(&controls, n)?;
            out.say(format!("drift-free controllable: {ok}"));
        }
        Some(name) => {
            let drift = as_generator(&name, s.complex_matrix(&name)?)?;
            let assumed: bool = s.config.parsed_or("lie.period_assumed", false)?;
            let cert = lie::drift_case_certificate(&drift, &controls, n, assumed)?;
            describe(&mut out, &cert.class);
            for line in &cert.report {
                out.say(line);
            }
            out.say(format!("certified: {}", cert.certified));
        }
    }
    Ok(out)
}

pub fn hitting(s: &mut Session) -> CliResult<Outcome> {
    let seed = s.seed()?;
    let horizon = steps(s)?;
    let runs = runs(s)?;
    let delta: f64 = s.config.parsed_or("hitting.delta", 1.0)?;
    let curve: HittingCurve;
    let n;
    if let Some(overlap) = s.config.parsed::<f64>("hitting.overlap")? {
        if s.config.has("system.unitary") || s.config.has("system.hamiltonian") {
            return Err(CliError::Malformed(
                "hitting.overlap defines the policy; drop the propagator".into(),
            ));
        }
        if s.config.has("measurement.measured") || s.config.has("measurement.frame") {
            return Err(CliError::Malformed(
                "the overlap policy uses global computational measurement".into(),
            ));
        }
        n = s.config.require_parsed::<usize>("system.n")?;
        let target = s.word("hitting.target", n)?;
        let state = s.state(n)?;
        let policy = OverlapPolicy::new(target.clone(), overlap)?;
        curve = estimate_hitting(
            &state,
            &policy,
            &MeasurementSpec::global(n),
            &Basis::computational(),
            &target,
            runs,
            horizon,
            seed,
        )?;
    } else {
        let unitaries = s.unitaries()?;
        n = s.check_n(unitaries.dim().unwrap_or(0))?;
        let spec = s.spec(n)?;
        let basis = s.basis(spec.k())?;
        let target = s.word("hitting.target", spec.k())?;
        let state = s.state(n)?;
        curve = estimate_hitting(&state, &unitaries, &spec, &basis, &target, runs, horizon, seed)?;
    }
    let header = s.inputs.header(Mode::Hitting.name(), Some(seed));
    let cols: Vec<String> = ["t", "p_hat", "std_error", "bound"].map(String::from).to_vec();
    let mut table = Table::new("hitting.csv", &header, Some(&cols));
    for t in 0..=horizon {
        table.row([
            t.to_string(),
            fmt_f64(curve.curve[t]),
            fmt_f64(curve.std_error(t)),
            fmt_f64(hitting_lower_bound(delta, t)?),
        ]);
    }
    let mut out = Outcome::default();
    out.tables.push(table);
    out.say(format!(
        "{runs} runs on {n} qubits; P(T_hit <= {horizon}) = {:.6}",
        curve.curve[horizon]
    ));
    Ok(out)
}
