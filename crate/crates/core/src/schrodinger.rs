//! Self-adjoint second order operators on black-white triangulated surfaces
//! and their factorization through triangle operators.

use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::complex::{Color, Complex2D};
use crate::connection::{triangle_solve, Connection, ConnectionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("the triangulation has no black-white coloring")]
    NoColoring,
    #[error("off-diagonal coefficient on edge {edge} is not positive: {value}")]
    NonPositiveOffdiag { edge: usize, value: f64 },
    #[error("edge {0} is not shared by one black and one white triangle")]
    UncoveredEdge(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("triangle operators do not partition the triangles: {0}")]
    ColorMismatch(String),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

/// `(L psi)_P = sum_{edges P P'} b_e psi_{P'} + W(P) psi_P`.
#[derive(Clone, Debug, PartialEq)]
pub struct SelfAdjointOperator {
    complex: Arc<Complex2D>,
    offdiag: Vec<f64>,
    potential: Vec<f64>,
}

impl SelfAdjointOperator {
    pub fn new(complex: Arc<Complex2D>, offdiag: Vec<f64>, potential: Vec<f64>) -> Result<Self, OperatorError> {
        if offdiag.len() != complex.n_edges() {
            return Err(OperatorError::LengthMismatch { expected: complex.n_edges(), got: offdiag.len() });
        }
        if potential.len() != complex.n_vertices() {
            return Err(OperatorError::LengthMismatch { expected: complex.n_vertices(), got: potential.len() });
        }
        if let Some((edge, &value)) = offdiag.iter().enumerate().find(|(_, b)| !(**b > 0.0 && b.is_finite())) {
            return Err(OperatorError::NonPositiveOffdiag { edge, value });
        }
        Ok(SelfAdjointOperator { complex, offdiag, potential })
    }

    pub fn complex(&self) -> &Complex2D {
        &self.complex
    }

    pub fn complex_arc(&self) -> &Arc<Complex2D> {
        &self.complex
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.potential.iter().zip(psi).map(|(w, p)| w * p).collect();
        for (edge, &b) in self.complex.edges().iter().zip(&self.offdiag) {
            let [p, q] = edge.ends;
            out[p] += b * psi[q];
            out[q] += b * psi[p];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.complex.n_vertices();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.potential));
        for (edge, &b) in self.complex.edges().iter().zip(&self.offdiag) {
            let [p, q] = edge.ends;
            m[(p, q)] += b;
            m[(q, p)] += b;
        }
        debug_assert_eq!(m.nrows(), n);
        m
    }
}

/// `(Q psi)_T = sum_{P in T} u[T:P] psi_P` over the triangles of one color.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleOperator {
    pub color: Color,
    pub triangles: Vec<usize>,
    pub coeffs: Vec<[f64; 3]>,
}

impl TriangleOperator {
    pub fn apply(&self, c: &Complex2D, psi: &[f64]) -> Vec<f64> {
        self.triangles
            .iter()
            .zip(&self.coeffs)
            .map(|(&t, u)| c.triangle(t).iter().zip(u).map(|(&p, u)| u * psi[p]).sum())
            .collect()
    }

    pub fn apply_adjoint(&self, c: &Complex2D, phi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; c.n_vertices()];
        for ((&t, u), f) in self.triangles.iter().zip(&self.coeffs).zip(phi) {
            for (&p, u) in c.triangle(t).iter().zip(u) {
                out[p] += u * f;
            }
        }
        out
    }

    /// Rows indexed like `triangles`, columns by vertex.
    pub fn to_dense(&self, c: &Complex2D) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.triangles.len(), c.n_vertices());
        for (row, (&t, u)) in self.triangles.iter().zip(&self.coeffs).enumerate() {
            for (&p, u) in c.triangle(t).iter().zip(u) {
                m[(row, p)] += u;
            }
        }
        m
    }
}

/// `L = Qb^+ Qb + Wb = Qw^+ Qw + Ww`.
#[derive(Clone, Debug, PartialEq)]
pub struct BwFactorization {
    pub black: TriangleOperator,
    pub black_potential: Vec<f64>,
    pub white: TriangleOperator,
    pub white_potential: Vec<f64>,
}

impl BwFactorization {
    /// Max-norm of `Q^+ Q + W - L` for the given color, by dense assembly.
    pub fn residual(&self, op: &SelfAdjointOperator, color: Color) -> f64 {
        let (q, w) = match color {
            Color::Black => (&self.black, &self.black_potential),
            Color::White => (&self.white, &self.white_potential),
        };
        let c = op.complex();
        let qd = q.to_dense(c);
        let mut m = qd.transpose() * qd;
        for (p, w) in w.iter().enumerate() {
            m[(p, p)] += w;
        }
        (m - op.to_dense()).abs().max()
    }
}

/// Factorizes `L` through the black and through the white triangles. Every
/// edge must lie in one black and one white triangle; in each colored
/// triangle `u[T:P] u[T:P'] = b_{PP'}` is solved as for edge weights.
pub fn factorize_bw(op: &SelfAdjointOperator) -> Result<BwFactorization, OperatorError> {
    let c = op.complex();
    let coloring = c.coloring().map(|x| x.to_vec()).or_else(|| c.bipartite_coloring()).ok_or(OperatorError::NoColoring)?;
    for (e, edge) in c.edges().iter().enumerate() {
        let colors: Vec<Color> = edge.sides.iter().map(|s| coloring[s.triangle]).collect();
        if !(colors.contains(&Color::Black) && colors.contains(&Color::White)) {
            return Err(OperatorError::UncoveredEdge(e));
        }
    }
    let build = |color: Color| {
        let triangles: Vec<usize> = (0..c.n_triangles()).filter(|&t| coloring[t] == color).collect();
        let coeffs: Vec<[f64; 3]> = triangles
            .iter()
            .map(|&t| {
                let e = c.triangle_edges(t);
                triangle_solve([op.offdiag[e[0]], op.offdiag[e[1]], op.offdiag[e[2]]])
            })
            .collect();
        let mut potential = op.potential.clone();
        for (&t, u) in triangles.iter().zip(&coeffs) {
            for (&p, u) in c.triangle(t).iter().zip(u) {
                potential[p] -= u * u;
            }
        }
        (TriangleOperator { color, triangles, coeffs }, potential)
    };
    let (black, black_potential) = build(Color::Black);
    let (white, white_potential) = build(Color::White);
    Ok(BwFactorization { black, black_potential, white, white_potential })
}

/// Joins the coefficients of two triangle operators, which must cover every
/// triangle exactly once, into one connection.
pub fn combined_connection(
    complex: Arc<Complex2D>,
    black: &TriangleOperator,
    white: &TriangleOperator,
) -> Result<Connection, OperatorError> {
    let mut coeffs: Vec<Option<[f64; 3]>> = vec![None; complex.n_triangles()];
    for op in [black, white] {
        for (&t, u) in op.triangles.iter().zip(&op.coeffs) {
            let slot = coeffs
                .get_mut(t)
                .ok_or_else(|| OperatorError::ColorMismatch(format!("triangle {t} does not exist")))?;
            if slot.replace(*u).is_some() {
                return Err(OperatorError::ColorMismatch(format!("triangle {t} appears twice")));
            }
        }
    }
    let coeffs = coeffs
        .into_iter()
        .enumerate()
        .map(|(t, u)| u.ok_or_else(|| OperatorError::ColorMismatch(format!("triangle {t} is not covered"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Connection::new(complex, coeffs)?)
}
