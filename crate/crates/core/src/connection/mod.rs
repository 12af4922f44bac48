//! Discrete connections on triangulated surfaces.
//!
//! A connection assigns a positive coefficient `u[T:P]` to every triangle `T`
//! and vertex `P` of `T`; the equation `Q psi = 0` with
//! `(Q psi)_T = sum_P u[T:P] psi_P` transports vertex data across triangles.
//! Only the ratios `mu[T](P, P') = u[T:P] / u[T:P']` matter up to gauge.

mod balance;
mod holonomy;
mod invariants;
mod sl2;

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use crate::complex::{Complex2D, ComplexError, FramedPath, ThickPath};

pub use balance::{face_balance_cycle_residual, sl_n_face_balance, SimplexConnection};
pub use holonomy::HolonomyMatrix;
pub use invariants::{framed_generator_values, reconstruct_connection_from_invariants, RhoData};
pub use sl2::{is_sl2, LoopCheck, Sl2Report, Sl2Verdict, VertexCheck};

/// Relative tolerance for verdicts.
pub const VERDICT_TOL: f64 = 1e-10;
/// Relative tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Products longer than this are renormalized as they accumulate.
const RENORMALIZE_AFTER: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectionError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error("vertex {vertex} is not a vertex of triangle {triangle}")]
    VertexNotInTriangle { triangle: usize, vertex: usize },
    #[error("coefficient for triangle {triangle}, local vertex {local} is not positive: {value}")]
    NonPositiveCoefficient { triangle: usize, local: usize, value: f64 },
    #[error("edge weight on edge {edge} is not positive: {value}")]
    NonPositiveWeight { edge: usize, value: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge {0} lies on the boundary")]
    BoundaryEdge(usize),
    #[error("connection is not SL2: edge {edge} propagates inconsistently (relative gap {gap:e})")]
    NotSl2 { edge: usize, gap: f64 },
    #[error("complex is not connected")]
    Disconnected,
    #[error("rho data is not a coboundary: log product over triangles is {0:e}")]
    InconsistentRho(f64),
    #[error("loop values cannot be realized: {0}")]
    UnsatisfiableLoopValues(String),
}

/// Positive per-(triangle, vertex) coefficients on a surface.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    complex: Arc<Complex2D>,
    coeffs: Vec<[f64; 3]>,
}

/// A positive function of triangles and a positive function of vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePair {
    pub triangle: Vec<f64>,
    pub vertex: Vec<f64>,
}

impl GaugePair {
    pub fn identity(c: &Complex2D) -> Self {
        GaugePair { triangle: vec![1.0; c.n_triangles()], vertex: vec![1.0; c.n_vertices()] }
    }
}

/// Positive numbers `A(R)` on edges, indexed by edge id.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeWeights {
    pub values: Vec<f64>,
}

impl EdgeWeights {
    pub fn constant(c: &Complex2D, value: f64) -> Self {
        EdgeWeights { values: vec![value; c.n_edges()] }
    }
}

impl Connection {
    pub fn new(complex: Arc<Complex2D>, coeffs: Vec<[f64; 3]>) -> Result<Self, ConnectionError> {
        if coeffs.len() != complex.n_triangles() {
            return Err(ConnectionError::LengthMismatch { expected: complex.n_triangles(), got: coeffs.len() });
        }
        for (t, row) in coeffs.iter().enumerate() {
            for (k, &value) in row.iter().enumerate() {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(ConnectionError::NonPositiveCoefficient { triangle: t, local: k, value });
                }
            }
        }
        Ok(Connection { complex, coeffs })
    }

    /// All coefficients equal to one.
    pub fn canonical(complex: Arc<Complex2D>) -> Self {
        let coeffs = vec![[1.0; 3]; complex.n_triangles()];
        Connection { complex, coeffs }
    }

    pub fn complex(&self) -> &Complex2D {
        &self.complex
    }

    pub fn complex_arc(&self) -> &Arc<Complex2D> {
        &self.complex
    }

    pub fn coeffs(&self) -> &[[f64; 3]] {
        &self.coeffs
    }

    /// `u[T:P]` for the vertex in local slot `local` of triangle `t`.
    pub fn coeff(&self, t: usize, local: usize) -> f64 {
        self.coeffs[t][local]
    }

    pub fn coeff_at(&self, t: usize, v: usize) -> Result<f64, ConnectionError> {
        let k = self.local(t, v)?;
        Ok(self.coeffs[t][k])
    }

    fn local(&self, t: usize, v: usize) -> Result<usize, ConnectionError> {
        self.complex
            .local_index(t, v)
            .ok_or(ConnectionError::VertexNotInTriangle { triangle: t, vertex: v })
    }

    /// `u'[T:P] = g_T u[T:P] / h_P`.
    pub fn gauge_transform(&self, gauge: &GaugePair) -> Result<Self, ConnectionError> {
        let c = &self.complex;
        if gauge.triangle.len() != c.n_triangles() {
            return Err(ConnectionError::LengthMismatch { expected: c.n_triangles(), got: gauge.triangle.len() });
        }
        if gauge.vertex.len() != c.n_vertices() {
            return Err(ConnectionError::LengthMismatch { expected: c.n_vertices(), got: gauge.vertex.len() });
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(t, row)| {
                let tri = c.triangle(t);
                let mut out = [0.0; 3];
                for k in 0..3 {
                    out[k] = gauge.triangle[t] * row[k] / gauge.vertex[tri[k]];
                }
                out
            })
            .collect();
        Connection::new(self.complex.clone(), coeffs)
    }

    /// `mu[T](P, P') = u[T:P] / u[T:P']`.
    pub fn mu_ratio(&self, t: usize, p: usize, q: usize) -> Result<f64, ConnectionError> {
        let (kp, kq) = (self.local(t, p)?, self.local(t, q)?);
        Ok(self.coeffs[t][kp] / self.coeffs[t][kq])
    }

    /// `rho^{T T'}_{P P'} = mu[T](P, P') mu[T'](P', P)` for edge `e` walked from
    /// `from`, with `T = t` and `T'` the triangle across `e`.
    pub fn rho(&self, e: usize, from: usize, t: usize) -> Result<f64, ConnectionError> {
        let edge = self.complex.edge(e);
        let to = edge.other_end(from);
        let t2 = self.complex.across(e, t).ok_or(ConnectionError::BoundaryEdge(e))?;
        Ok(self.mu_ratio(t, from, to)? * self.mu_ratio(t2, to, from)?)
    }

    /// `rho^{T T'}_{P P'}` with `T` the triangle in which `P -> P'` is
    /// positively oriented.
    pub fn rho_edge(&self, e: usize, from: usize) -> Result<f64, ConnectionError> {
        let side = self.complex.positive_side(e, from).ok_or(ConnectionError::BoundaryEdge(e))?;
        self.rho(e, from, side.triangle)
    }

    /// Product of `rho` over the three positively oriented sides of `t`.
    pub fn rho_triangle(&self, t: usize) -> Result<f64, ConnectionError> {
        let tri = self.complex.triangle(t);
        let edges = self.complex.triangle_edges(t);
        let mut log = 0.0;
        for k in 0..3 {
            log += self.rho(edges[k], tri[k], t)?.ln();
        }
        Ok(log.exp())
    }

    /// `prod_i mu[T_i](P_{i-1}, P_i)`, accumulated in log space.
    pub fn framed_holonomy(&self, path: &FramedPath) -> Result<f64, ConnectionError> {
        Ok(self.log_framed_holonomy(path)?.exp())
    }

    pub fn log_framed_holonomy(&self, path: &FramedPath) -> Result<f64, ConnectionError> {
        let mut log = 0.0;
        for (i, &t) in path.triangles.iter().enumerate() {
            log += self.mu_ratio(t, path.vertices[i], path.vertices[i + 1])?.ln();
        }
        Ok(log)
    }

    /// Matrix transporting `psi` on the seed face of `path` to its exit face by
    /// solving `Q psi = 0` triangle by triangle. Face values are ordered by
    /// ascending vertex index.
    pub fn thick_holonomy(&self, path: &ThickPath) -> Result<HolonomyMatrix, ConnectionError> {
        let c = &*self.complex;
        let checked = ThickPath::new(c, path.triangles.clone(), path.faces.clone())?;
        let renormalize = checked.len() > RENORMALIZE_AFTER;
        let mut k = HolonomyMatrix::identity();
        for (i, &t) in checked.triangles.iter().enumerate() {
            let [a, b] = c.edge(checked.faces[i]).ends;
            let [x, y] = c.edge(checked.faces[i + 1]).ends;
            let (la, lb) = (self.local(t, a)?, self.local(t, b)?);
            let ls = 3 - la - lb;
            let s = c.triangle(t)[ls];
            let u = self.coeffs[t];
            let row = |z: usize| -> [f64; 2] {
                if z == a {
                    [1.0, 0.0]
                } else if z == b {
                    [0.0, 1.0]
                } else {
                    debug_assert_eq!(z, s);
                    [-u[la] / u[ls], -u[lb] / u[ls]]
                }
            };
            k = k.left_mul([row(x), row(y)]);
            if renormalize {
                k = k.renormalized();
            }
        }
        Ok(k)
    }

    /// Holonomy around the boundary of the star of an interior vertex,
    /// expressed in the basis `(psi_P, psi_{P_1})` where `P_1` follows `P` in the
    /// first star triangle.
    pub fn vertex_curvature(&self, v: usize) -> Result<Curvature, ConnectionError> {
        let c = &*self.complex;
        let star = c.vertex_star(v)?;
        let ring = c.vertex_ring(v)?;
        let mut k = self.thick_holonomy(&star)?;
        if ring[0] < v {
            k = k.swapped_basis();
        }
        let normalized = k.normalized_by_upper_left();
        let mu_from_matrix = normalized[1][1].abs();
        let mu_from_rho = self.star_rho_product(v)?;
        Ok(Curvature { vertex: v, matrix: k, normalized, mu_from_matrix, mu_from_rho })
    }

    /// `prod_i rho^{T_i T_{i+1}}_{P P_{i+1}}` over the star of `v`, where
    /// `T_i, T_{i+1}` meet along `P P_{i+1}`.
    pub fn star_rho_product(&self, v: usize) -> Result<f64, ConnectionError> {
        let star = self.complex.vertex_star(v)?;
        let m = star.len();
        let mut log = 0.0;
        for i in 0..m {
            log += self.rho(star.faces[i + 1], v, star.triangles[i])?.ln();
        }
        Ok(log.exp())
    }

    /// Finds `(g, h)` with `other = self.gauge_transform((g, h))`, normalized by
    /// `h = 1` at the first vertex of each component. `None` when the two
    /// connections are not gauge equivalent within `tol` (absolute, on logs).
    pub fn gauge_to(&self, other: &Connection, tol: f64) -> Option<GaugePair> {
        let c = &*self.complex;
        if other.complex.n_triangles() != c.n_triangles() || other.complex.n_vertices() != c.n_vertices() {
            return None;
        }
        let nt = c.n_triangles();
        let nv = c.n_vertices();
        // log g_T - log h_P = log(u'/u) at every corner
        let r = |t: usize, k: usize| (other.coeffs[t][k] / self.coeffs[t][k]).ln();
        let mut corners_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
        for t in 0..nt {
            for (k, &v) in c.triangle(t).iter().enumerate() {
                corners_of[v].push((t, k));
            }
        }
        let mut log_g: Vec<Option<f64>> = vec![None; nt];
        let mut log_h: Vec<Option<f64>> = vec![None; nv];
        for root in 0..nv {
            if log_h[root].is_some() {
                continue;
            }
            log_h[root] = Some(0.0);
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                let hv = log_h[v].expect("queued vertices are set");
                for &(t, k) in &corners_of[v] {
                    let g = hv + r(t, k);
                    match log_g[t] {
                        Some(existing) if (existing - g).abs() > tol => return None,
                        Some(_) => continue,
                        None => log_g[t] = Some(g),
                    }
                    for (k2, &w) in c.triangle(t).iter().enumerate() {
                        let h = g - r(t, k2);
                        match log_h[w] {
                            Some(existing) if (existing - h).abs() > tol => return None,
                            Some(_) => {}
                            None => {
                                log_h[w] = Some(h);
                                queue.push_back(w);
                            }
                        }
                    }
                }
            }
        }
        Some(GaugePair {
            triangle: log_g.into_iter().map(|x| x.unwrap_or(0.0).exp()).collect(),
            vertex: log_h.into_iter().map(|x| x.unwrap_or(0.0).exp()).collect(),
        })
    }

    /// Largest relative difference of the ratios `mu[T](P, P')` between two
    /// connections on the same complex.
    pub fn max_mu_gap(&self, other: &Connection) -> f64 {
        let mut worst = 0.0f64;
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            for k in 0..3 {
                let j = (k + 1) % 3;
                let gap = ((a[k] / a[j]) / (b[k] / b[j]) - 1.0).abs();
                worst = worst.max(gap);
            }
        }
        worst
    }
}

/// Nonabelian curvature at a vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct Curvature {
    pub vertex: usize,
    /// Holonomy in the basis `(psi_P, psi_{P_1})`.
    pub matrix: HolonomyMatrix,
    /// The holonomy divided by its upper-left entry: `[[1, ~0], [alpha, +-mu_P]]`.
    pub normalized: [[f64; 2]; 2],
    pub mu_from_matrix: f64,
    /// The same invariant as a product of `rho` around the star.
    pub mu_from_rho: f64,
}

impl Curvature {
    pub fn alpha(&self) -> f64 {
        self.normalized[1][0]
    }
}

/// Solves `u[T:P_i] u[T:P_{i+1}] = A(P_i P_{i+1})` in every triangle.
pub fn build_from_edge_weights(complex: Arc<Complex2D>, weights: &EdgeWeights) -> Result<Connection, ConnectionError> {
    if weights.values.len() != complex.n_edges() {
        return Err(ConnectionError::LengthMismatch { expected: complex.n_edges(), got: weights.values.len() });
    }
    if let Some((edge, &value)) = weights.values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
        return Err(ConnectionError::NonPositiveWeight { edge, value });
    }
    let coeffs = (0..complex.n_triangles())
        .map(|t| {
            let e = complex.triangle_edges(t);
            triangle_solve([weights.values[e[0]], weights.values[e[1]], weights.values[e[2]]])
        })
        .collect();
    Connection::new(complex, coeffs)
}

/// Given the products on the sides `(P1P2, P2P3, P3P1)` of a triangle, returns
/// the three vertex values `(u1, u2, u3)` whose pairwise products reproduce them.
pub fn triangle_solve(sides: [f64; 3]) -> [f64; 3] {
    let [a1, a2, a3] = sides;
    [(a1 * a3 / a2).sqrt(), (a1 * a2 / a3).sqrt(), (a2 * a3 / a1).sqrt()]
}

/// Recovers edge weights from an SL2 connection by propagation from one seed
/// edge: in a triangle with known `A(PP')` and third vertex `S`,
/// `A(PS) = A(PP') u[T:S] / u[T:P']`. Breadth-first over edges from the seed;
/// every edge reached twice must agree within `tol` (relative).
pub fn reconstruct_edge_weights(
    conn: &Connection,
    seed_edge: usize,
    seed_value: f64,
    tol: f64,
) -> Result<EdgeWeights, ConnectionError> {
    let c = conn.complex();
    if seed_edge >= c.n_edges() {
        return Err(ConnectionError::LengthMismatch { expected: c.n_edges(), got: seed_edge + 1 });
    }
    if !(seed_value > 0.0 && seed_value.is_finite()) {
        return Err(ConnectionError::NonPositiveWeight { edge: seed_edge, value: seed_value });
    }
    let mut a: Vec<Option<f64>> = vec![None; c.n_edges()];
    let mut done = vec![false; c.n_triangles()];
    a[seed_edge] = Some(seed_value);
    let mut queue = VecDeque::from([seed_edge]);
    while let Some(e) = queue.pop_front() {
        let ae = a[e].expect("queued edges are set");
        for side in c.edge(e).sides.clone() {
            let t = side.triangle;
            if done[t] {
                continue;
            }
            done[t] = true;
            let (lx, ly) = (side.slot, (side.slot + 1) % 3);
            let lz = (side.slot + 2) % 3;
            let u = conn.coeffs[t];
            let edges = c.triangle_edges(t);
            // side (ly, lz) and side (lz, lx)
            for (edge, value) in [(edges[ly], ae * u[lz] / u[lx]), (edges[lz], ae * u[lz] / u[ly])] {
                match a[edge] {
                    None => {
                        a[edge] = Some(value);
                        queue.push_back(edge);
                    }
                    Some(existing) => {
                        let gap = (value / existing - 1.0).abs();
                        if gap > tol {
                            return Err(ConnectionError::NotSl2 { edge, gap });
                        }
                    }
                }
            }
        }
    }
    let values: Option<Vec<f64>> = a.into_iter().collect();
    values.map(|values| EdgeWeights { values }).ok_or(ConnectionError::Disconnected)
}
