//! CSV matrices and vectors, input digests, and output tables.
//!
//! Complex data is stored as two real files `<name>.re.csv` and
//! `<name>.im.csv`; a missing imaginary file means a real matrix.

use std::path::{Path, PathBuf};

use qubit_pbn::linalg::{CMatrix, CVector, RMatrix, C64};
use sha2::{Digest, Sha256};

use crate::config::Config;
use crate::error::{CliError, CliResult};

/// Full double precision, scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Files read during a run, with their SHA-256 digests, in first-read order.
#[derive(Debug, Default, Clone)]
pub struct Inputs {
    entries: Vec<(String, String)>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path, label: &str) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        if !self.entries.iter().any(|(l, _)| l == label) {
            self.entries
                .push((label.to_string(), hex::encode(Sha256::digest(&bytes))));
        }
        Ok(bytes)
    }

    pub fn header(&self, mode: &str, seed: Option<u64>) -> String {
        let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        let inputs: Vec<String> = self
            .entries
            .iter()
            .map(|(l, d)| format!("{l}:{d}"))
            .collect();
        format!("# mode={mode} seed={seed} inputs={}", inputs.join(","))
    }
}

fn parse_rows(bytes: &[u8], label: &str) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(bytes);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Malformed(format!("{label}: {e}")))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|_| {
                    CliError::Malformed(format!("{label}: row {}: `{field}` is not a number", i + 1))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Malformed(format!("{label}: no data")));
    }
    Ok(rows)
}

/// A numeric table as read, before any shape requirement.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid {
    fn from_rows(rows: Vec<Vec<f64>>, label: &str) -> CliResult<Self> {
        let cols = rows[0].len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(CliError::Malformed(format!(
                "{label}: row {} has {} entries, expected {cols}",
                i + 1,
                r.len()
            )));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    fn matrix(&self) -> RMatrix {
        RMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

/// Where a named input lives.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    /// Name as written in the configuration.
    pub label: String,
    pub path: PathBuf,
}

impl Source {
    pub fn new(config: &Config, name: &str) -> Self {
        Self {
            label: name.to_string(),
            path: config.resolve(name),
        }
    }

    fn complex_parts(&self) -> (Source, Source) {
        let stem = self
            .label
            .strip_suffix(".re.csv")
            .unwrap_or(&self.label)
            .to_string();
        let base = self
            .path
            .to_string_lossy()
            .strip_suffix(".re.csv")
            .map(str::to_string)
            .unwrap_or_else(|| self.path.to_string_lossy().into_owned());
        (
            Source {
                label: format!("{stem}.re.csv"),
                path: PathBuf::from(format!("{base}.re.csv")),
            },
            Source {
                label: format!("{stem}.im.csv"),
                path: PathBuf::from(format!("{base}.im.csv")),
            },
        )
    }
}

pub fn read_real_grid(inputs: &mut Inputs, src: &Source) -> CliResult<Grid> {
    let bytes = inputs.read(&src.path, &src.label)?;
    Grid::from_rows(parse_rows(&bytes, &src.label)?, &src.label)
}

/// Real and imaginary grids of a complex input, with a matching shape.
pub fn read_complex_grid(inputs: &mut Inputs, src: &Source) -> CliResult<(Grid, Grid)> {
    let (re_src, im_src) = src.complex_parts();
    let re = read_real_grid(inputs, &re_src)?;
    let im = if im_src.path.exists() {
        read_real_grid(inputs, &im_src)?
    } else {
        Grid {
            rows: re.rows,
            cols: re.cols,
            data: vec![0.0; re.data.len()],
        }
    };
    if (im.rows, im.cols) != (re.rows, re.cols) {
        return Err(CliError::Malformed(format!(
            "{}: imaginary part is {}x{}, real part is {}x{}",
            src.label, im.rows, im.cols, re.rows, re.cols
        )));
    }
    Ok((re, im))
}

pub fn read_real_matrix(inputs: &mut Inputs, src: &Source) -> CliResult<RMatrix> {
    Ok(read_real_grid(inputs, src)?.matrix())
}

pub fn read_complex_matrix(inputs: &mut Inputs, src: &Source) -> CliResult<CMatrix> {
    let (re, im) = read_complex_grid(inputs, src)?;
    Ok(CMatrix::from_fn(re.rows, re.cols, |r, c| {
        C64::new(re.data[r * re.cols + c], im.data[r * im.cols + c])
    }))
}

fn as_vector(grid: &Grid, label: &str) -> CliResult<Vec<f64>> {
    if grid.rows != 1 && grid.cols != 1 {
        return Err(CliError::Malformed(format!(
            "{label}: expected a single row or column, found {}x{}",
            grid.rows, grid.cols
        )));
    }
    Ok(grid.data.clone())
}

pub fn read_real_vector(inputs: &mut Inputs, src: &Source) -> CliResult<Vec<f64>> {
    as_vector(&read_real_grid(inputs, src)?, &src.label)
}

pub fn read_complex_vector(inputs: &mut Inputs, src: &Source) -> CliResult<CVector> {
    let (re, im) = read_complex_grid(inputs, src)?;
    let re = as_vector(&re, &src.label)?;
    let im = as_vector(&im, &src.label)?;
    Ok(CVector::from_iterator(
        re.len(),
        re.iter().zip(&im).map(|(&a, &b)| C64::new(a, b)),
    ))
}

/// A CSV file assembled in memory and written in one go.
#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    text: String,
}

impl Table {
    pub fn new(name: &str, header: &str, columns: Option<&[String]>) -> Self {
        let mut text = format!("{header}\n");
        if let Some(cols) = columns {
            text.push_str(&cols.join(","));
            text.push('\n');
        }
        Self {
            name: name.to_string(),
            text,
        }
    }

    /// Append a row of preformatted fields.
    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(f.as_ref());
        }
        self.text.push('\n');
    }

    pub fn numbers(&mut self, values: &[f64]) {
        self.row(values.iter().map(|&v| fmt_f64(v)));
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn write(&self, dir: &Path) -> CliResult<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Write {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = dir.join(&self.name);
        std::fs::write(&path, &self.text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

/// Row-major dump of a real matrix, without a column header.
pub fn matrix_table(name: &str, header: &str, m: &RMatrix) -> Table {
    let mut t = Table::new(name, header, None);
    for r in 0..m.nrows() {
        let row: Vec<f64> = m.row(r).iter().copied().collect();
        t.numbers(&row);
    }
    t
}
