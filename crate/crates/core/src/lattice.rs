//! Real fields on rectangular windows of the square lattice.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("window {rows}x{cols} is too small (need at least 2x2)")]
    TooSmall { rows: usize, cols: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields live on different windows: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("site ({m}, {n}) is missing from the CSV data")]
    MissingSite { m: usize, n: usize },
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Indices wrap around.
    Periodic,
    /// Values exist only inside the window; stencils shrink the window.
    Fixed,
}

/// `values[m * cols + n]` is the value at site `(m, n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField {
    rows: usize,
    cols: usize,
    boundary: Boundary,
    values: Vec<f64>,
}

impl LatticeField {
    pub fn new(rows: usize, cols: usize, boundary: Boundary, values: Vec<f64>) -> Result<Self, LatticeError> {
        if rows < 2 || cols < 2 {
            return Err(LatticeError::TooSmall { rows, cols });
        }
        if values.len() != rows * cols {
            return Err(LatticeError::LengthMismatch { expected: rows * cols, got: values.len() });
        }
        Ok(LatticeField { rows, cols, boundary, values })
    }

    pub fn periodic(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self, LatticeError> {
        Self::new(rows, cols, Boundary::Periodic, values)
    }

    /// # Panics
    /// If the window is smaller than 2x2.
    pub fn constant(rows: usize, cols: usize, value: f64) -> Self {
        Self::periodic(rows, cols, vec![value; rows * cols]).expect("window at least 2x2")
    }

    /// # Panics
    /// If the window is smaller than 2x2.
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let values = (0..rows * cols).map(|i| f(i / cols, i % cols)).collect();
        Self::periodic(rows, cols, values).expect("window at least 2x2")
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, m: usize, n: usize) -> f64 {
        self.values[m * self.cols + n]
    }

    pub fn set(&mut self, m: usize, n: usize, value: f64) {
        self.values[m * self.cols + n] = value;
    }

    /// Value at `(m, n)`, wrapping for periodic windows.
    ///
    /// # Panics
    /// On a fixed window when `(m, n)` lies outside it.
    pub fn at(&self, m: i64, n: i64) -> f64 {
        let (r, c) = (self.rows as i64, self.cols as i64);
        let (m, n) = match self.boundary {
            Boundary::Periodic => (m.rem_euclid(r), n.rem_euclid(c)),
            Boundary::Fixed => {
                assert!((0..r).contains(&m) && (0..c).contains(&n), "site ({m}, {n}) outside fixed window");
                (m, n)
            }
        };
        self.values[(m * c + n) as usize]
    }

    /// `g(m, n) = f(m + dm, n + dn)` on a periodic window.
    pub fn shifted(&self, dm: i64, dn: i64) -> Self {
        let values = (0..self.rows * self.cols)
            .map(|i| self.at((i / self.cols) as i64 + dm, (i % self.cols) as i64 + dn))
            .collect();
        LatticeField { values, ..*self }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        LatticeField { values: self.values.iter().map(|&x| f(x)).collect(), ..*self }
    }

    pub fn zip_map(&self, other: &LatticeField, f: impl Fn(f64, f64) -> f64) -> Result<Self, LatticeError> {
        self.check_shape(other)?;
        Ok(LatticeField { values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(), ..*self })
    }

    pub fn check_shape(&self, other: &LatticeField) -> Result<(), LatticeError> {
        if self.shape() != other.shape() {
            return Err(LatticeError::ShapeMismatch(self.shape(), other.shape()));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &LatticeField) -> f64 {
        self.values.iter().zip(&other.values).fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sites `(m, n)` for which a stencil reaching one step forward in both
    /// directions stays in the window.
    pub fn forward_window(&self) -> (usize, usize) {
        match self.boundary {
            Boundary::Periodic => (self.rows, self.cols),
            Boundary::Fixed => (self.rows - 1, self.cols - 1),
        }
    }

    /// Evaluates `f(m, n)` on the forward window of `self`. The result is
    /// periodic for periodic windows and a fixed window otherwise (which may
    /// be smaller than 2x2 only if `self` is; such results are kept as-is).
    pub fn forward_stencil(&self, f: impl Fn(i64, i64) -> f64) -> Self {
        let (rows, cols) = self.forward_window();
        let values = (0..rows * cols).map(|i| f((i / cols) as i64, (i % cols) as i64)).collect();
        LatticeField { rows, cols, boundary: self.boundary, values }
    }

    /// CSV with header `m,n,value`, `m` outer.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,n,value\n");
        for m in 0..self.rows {
            for n in 0..self.cols {
                out.push_str(&format!("{m},{n},{}\n", self.get(m, n)));
            }
        }
        out
    }

    /// Reads `m,n,value` rows; the window is the bounding box of the sites.
    pub fn from_csv(reader: impl Read, boundary: Boundary) -> Result<Self, LatticeError> {
        let rows = read_rows::<(usize, usize, f64)>(reader)?;
        let (r, c) = rows.iter().fold((0, 0), |(r, c), &(m, n, _)| (r.max(m + 1), c.max(n + 1)));
        assemble(r, c, boundary, rows.into_iter())
    }
}

fn read_rows<T: for<'de> Deserialize<'de>>(reader: impl Read) -> Result<Vec<T>, LatticeError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    Ok(rdr.deserialize().collect::<Result<Vec<T>, _>>()?)
}

fn assemble(
    rows: usize,
    cols: usize,
    boundary: Boundary,
    entries: impl Iterator<Item = (usize, usize, f64)>,
) -> Result<LatticeField, LatticeError> {
    let mut values = vec![None; rows * cols];
    for (m, n, v) in entries {
        values[m * cols + n] = Some(v);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or(LatticeError::MissingSite { m: i / cols.max(1), n: i % cols.max(1) }))
        .collect::<Result<Vec<_>, _>>()?;
    LatticeField::new(rows, cols, boundary, values)
}

/// Layers `k, m, n` as CSV with header `k,m,n,value`.
pub fn stack_to_csv(k0: i64, layers: &[LatticeField]) -> String {
    let mut out = String::from("k,m,n,value\n");
    for (i, layer) in layers.iter().enumerate() {
        for m in 0..layer.rows() {
            for n in 0..layer.cols() {
                out.push_str(&format!("{},{m},{n},{}\n", k0 + i as i64, layer.get(m, n)));
            }
        }
    }
    out
}

/// Reads `k,m,n,value` rows into consecutive layers starting at the smallest `k`.
pub fn stack_from_csv(reader: impl Read, boundary: Boundary) -> Result<(i64, Vec<LatticeField>), LatticeError> {
    let rows = read_rows::<(i64, usize, usize, f64)>(reader)?;
    let k0 = rows.iter().map(|r| r.0).min().unwrap_or(0);
    let k1 = rows.iter().map(|r| r.0).max().unwrap_or(-1);
    let (r, c) = rows.iter().fold((0, 0), |(r, c), &(_, m, n, _)| (r.max(m + 1), c.max(n + 1)));
    let mut layers = Vec::new();
    for k in k0..=k1 {
        let entries = rows.iter().filter(|x| x.0 == k).map(|&(_, m, n, v)| (m, n, v));
        layers.push(assemble(r, c, boundary, entries)?);
    }
    Ok((k0, layers))
}
