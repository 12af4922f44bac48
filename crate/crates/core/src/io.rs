//! JSON file formats for complexes, connections, edge weights and operators.
//!
//! Edges are named by their end vertices. On complexes with parallel edges
//! (small tori) the complex carries `triangle_edges` and edge-valued lists
//! must be given in edge-id order.

use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Color, Complex2D, ComplexError};
use crate::connection::{Connection, ConnectionError, EdgeWeights};
use crate::schrodinger::{OperatorError, SelfAdjointOperator};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {error}")]
    File { path: String, error: std::io::Error },
    #[error("{path}: {error}")]
    Json { path: String, error: serde_json::Error },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|error| IoError::File { path: path.display().to_string(), error })?;
    serde_json::from_str(&text).map_err(|error| IoError::Json { path: path.display().to_string(), error })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|error| IoError::File { path: dir.display().to_string(), error })?;
    }
    std::fs::write(path, text).map_err(|error| IoError::File { path: path.display().to_string(), error })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub vertices: usize,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<Vec<Color>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triangle_edges: Option<Vec<[usize; 3]>>,
}

impl From<&Complex2D> for ComplexJson {
    fn from(c: &Complex2D) -> Self {
        let triangle_edges = (!c.edges_determined_by_vertices())
            .then(|| (0..c.n_triangles()).map(|t| c.triangle_edges(t)).collect());
        ComplexJson {
            vertices: c.n_vertices(),
            triangles: c.triangles().to_vec(),
            coloring: c.coloring().map(|x| x.to_vec()),
            triangle_edges,
        }
    }
}

impl TryFrom<ComplexJson> for Complex2D {
    type Error = ComplexError;

    fn try_from(j: ComplexJson) -> Result<Self, ComplexError> {
        let c = match j.triangle_edges {
            Some(te) => Complex2D::from_triangle_edges(j.vertices, j.triangles, te)?,
            None => Complex2D::from_triangles(j.vertices, j.triangles)?,
        };
        match j.coloring {
            Some(col) => c.with_coloring(col),
            None => Ok(c),
        }
    }
}

/// Resolves `[i, j, value]` entries to one value per edge.
fn edge_values(c: &Complex2D, entries: &[(usize, usize, f64)], what: &str) -> Result<Vec<f64>, IoError> {
    if entries.len() != c.n_edges() {
        return Err(IoError::Format(format!("{what}: expected {} entries, got {}", c.n_edges(), entries.len())));
    }
    let mut out = vec![None; c.n_edges()];
    for (k, &(i, j, value)) in entries.iter().enumerate() {
        let e = if c.edges_determined_by_vertices() {
            c.edge_between(i, j).ok_or_else(|| IoError::Format(format!("{what}: {i}-{j} is not an edge")))?
        } else {
            let ends = c.edge(k).ends;
            if ends != [i.min(j), i.max(j)] {
                return Err(IoError::Format(format!(
                    "{what}: entry {k} must be edge {}-{} on a complex with parallel edges",
                    ends[0], ends[1]
                )));
            }
            k
        };
        if out[e].replace(value).is_some() {
            return Err(IoError::Format(format!("{what}: edge {i}-{j} listed twice")));
        }
    }
    Ok(out.into_iter().map(|v| v.expect("counted")).collect())
}

fn edge_entries(c: &Complex2D, values: &[f64]) -> Vec<(usize, usize, f64)> {
    c.edges().iter().zip(values).map(|(e, &v)| (e.ends[0], e.ends[1], v)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionJson {
    pub complex: ComplexJson,
    /// `[triangle, local vertex index, value]`.
    pub coeffs: Vec<(usize, usize, f64)>,
}

impl From<&Connection> for ConnectionJson {
    fn from(conn: &Connection) -> Self {
        let coeffs = conn
            .coeffs()
            .iter()
            .enumerate()
            .flat_map(|(t, u)| u.iter().enumerate().map(move |(k, &x)| (t, k, x)))
            .collect();
        ConnectionJson { complex: conn.complex().into(), coeffs }
    }
}

impl ConnectionJson {
    pub fn into_connection(self) -> Result<Connection, IoError> {
        let c = Arc::new(Complex2D::try_from(self.complex)?);
        let mut coeffs = vec![[f64::NAN; 3]; c.n_triangles()];
        let mut seen = vec![[false; 3]; c.n_triangles()];
        for (t, k, x) in self.coeffs {
            if t >= c.n_triangles() || k >= 3 {
                return Err(IoError::Format(format!("coefficient [{t}, {k}] is out of range")));
            }
            if std::mem::replace(&mut seen[t][k], true) {
                return Err(IoError::Format(format!("coefficient [{t}, {k}] listed twice")));
            }
            coeffs[t][k] = x;
        }
        if let Some(t) = seen.iter().position(|s| s.contains(&false)) {
            return Err(IoError::Format(format!("triangle {t} is missing coefficients")));
        }
        Ok(Connection::new(c, coeffs)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeWeightsJson {
    pub weights: Vec<(usize, usize, f64)>,
}

impl EdgeWeightsJson {
    pub fn new(c: &Complex2D, w: &EdgeWeights) -> Self {
        EdgeWeightsJson { weights: edge_entries(c, &w.values) }
    }

    pub fn resolve(&self, c: &Complex2D) -> Result<EdgeWeights, IoError> {
        Ok(EdgeWeights { values: edge_values(c, &self.weights, "weights")? })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub complex: ComplexJson,
    pub offdiag: Vec<(usize, usize, f64)>,
    pub potential: Vec<f64>,
}

impl From<&SelfAdjointOperator> for OperatorJson {
    fn from(op: &SelfAdjointOperator) -> Self {
        OperatorJson {
            complex: op.complex().into(),
            offdiag: edge_entries(op.complex(), op.offdiag()),
            potential: op.potential().to_vec(),
        }
    }
}

impl OperatorJson {
    pub fn into_operator(self) -> Result<SelfAdjointOperator, IoError> {
        let c = Arc::new(Complex2D::try_from(self.complex)?);
        let offdiag = edge_values(&c, &self.offdiag, "offdiag")?;
        Ok(SelfAdjointOperator::new(c, offdiag, self.potential)?)
    }
}
