//! Electric networks: total currents, free vertices, the star-triangle
//! transformation and the black-triangle factorization of `L = d C d*`.
//!
//! `L` has off-diagonal entries `+c` and diagonal `-sum c`, so constants lie
//! in its kernel and a free vertex is one with a vanishing row.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Color, Complex2D};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("conductivity {value} on edge {edge} is not positive")]
    NonPositiveConductivity { edge: usize, value: f64 },
    #[error("edge {edge} has invalid endpoints {ends:?}")]
    BadEdge { edge: usize, ends: [usize; 2] },
    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(usize),
    #[error("invalid black-triangle structure: {0}")]
    InvalidKStructure(String),
    #[error("W vanishes at vertex {0}")]
    ZeroW(usize),
    #[error("no black triangle has all its vertices in the asserted set")]
    EmptyWindow,
    #[error("neither normalization is a kernel vector: residuals {inverse:e} and {direct:e}")]
    NoKernelVector { inverse: f64, direct: f64 },
    #[error("Dirichlet system is singular")]
    SingularDirichlet,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Graph with positive conductivities and optionally a set of black
/// triangles such that every edge is a side of exactly one of them.
#[derive(Clone, Debug, PartialEq)]
pub struct ElectricNetwork {
    n_vertices: usize,
    edges: Vec<[usize; 2]>,
    conductivity: Vec<f64>,
    black: Option<Vec<[usize; 3]>>,
    /// For each black triangle the edges opposite its three vertices.
    black_edges: Vec<[usize; 3]>,
}

impl ElectricNetwork {
    pub fn new(
        n_vertices: usize,
        edges: Vec<[usize; 2]>,
        conductivity: Vec<f64>,
        black: Option<Vec<[usize; 3]>>,
    ) -> Result<Self, NetworkError> {
        if conductivity.len() != edges.len() {
            return Err(NetworkError::LengthMismatch { expected: edges.len(), got: conductivity.len() });
        }
        for (edge, &ends) in edges.iter().enumerate() {
            if ends[0] == ends[1] || ends[0] >= n_vertices || ends[1] >= n_vertices {
                return Err(NetworkError::BadEdge { edge, ends });
            }
        }
        if let Some((edge, &value)) = conductivity.iter().enumerate().find(|(_, c)| !(**c > 0.0 && c.is_finite())) {
            return Err(NetworkError::NonPositiveConductivity { edge, value });
        }
        let black_edges = match &black {
            Some(k) => match_black_triangles(n_vertices, &edges, k)?,
            None => Vec::new(),
        };
        Ok(ElectricNetwork { n_vertices, edges, conductivity, black, black_edges })
    }

    /// Network on the edges of a colored (or bipartite) surface with its
    /// black triangles as K-structure.
    pub fn from_black_triangles(c: &Complex2D, conductivity: Vec<f64>) -> Result<Self, NetworkError> {
        let coloring = c
            .coloring()
            .map(|x| x.to_vec())
            .or_else(|| c.bipartite_coloring())
            .ok_or_else(|| NetworkError::InvalidKStructure("surface has no black-white coloring".into()))?;
        let edges = c.edges().iter().map(|e| e.ends).collect();
        let black = (0..c.n_triangles()).filter(|&t| coloring[t] == Color::Black).map(|t| c.triangle(t)).collect();
        ElectricNetwork::new(c.n_vertices(), edges, conductivity, Some(black))
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn conductivity(&self) -> &[f64] {
        &self.conductivity
    }

    pub fn black_triangles(&self) -> Option<&[[usize; 3]]> {
        self.black.as_deref()
    }

    /// Whether every vertex lies in at least three black triangles. The
    /// factorization identities do not need it, so it is reported rather
    /// than enforced.
    pub fn every_vertex_in_three_triangles(&self) -> bool {
        let mut count = vec![0usize; self.n_vertices];
        for t in self.black.iter().flatten() {
            for &p in t {
                count[p] += 1;
            }
        }
        count.iter().all(|&k| k >= 3)
    }

    fn require_k(&self) -> Result<&[[usize; 3]], NetworkError> {
        self.black.as_deref().ok_or_else(|| NetworkError::InvalidKStructure("no black triangles given".into()))
    }

    /// Dense `L`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_vertices, self.n_vertices);
        for (&[p, q], &c) in self.edges.iter().zip(&self.conductivity) {
            m[(p, q)] += c;
            m[(q, p)] += c;
            m[(p, p)] -= c;
            m[(q, q)] -= c;
        }
        m
    }

    /// Current `c (U(P1) - U(P0))` through each edge `[P0, P1]`.
    pub fn edge_currents(&self, u: &[f64]) -> Vec<f64> {
        self.edges.iter().zip(&self.conductivity).map(|(&[p, q], &c)| c * (u[q] - u[p])).collect()
    }
}

fn match_black_triangles(
    n_vertices: usize,
    edges: &[[usize; 2]],
    black: &[[usize; 3]],
) -> Result<Vec<[usize; 3]>, NetworkError> {
    let mut by_pair: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (e, &[p, q]) in edges.iter().enumerate() {
        if by_pair.insert((p.min(q), p.max(q)), e).is_some() {
            return Err(NetworkError::InvalidKStructure(format!("vertices {p} and {q} are joined twice")));
        }
    }
    let mut used = vec![false; edges.len()];
    let mut out = Vec::with_capacity(black.len());
    for (t, tri) in black.iter().enumerate() {
        if tri.iter().any(|&p| p >= n_vertices) || tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(NetworkError::InvalidKStructure(format!("triangle {t} is degenerate")));
        }
        let mut opp = [0; 3];
        for (k, slot) in opp.iter_mut().enumerate() {
            let (p, q) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let e = *by_pair
                .get(&(p.min(q), p.max(q)))
                .ok_or_else(|| NetworkError::InvalidKStructure(format!("side {p}-{q} of triangle {t} is not an edge")))?;
            if std::mem::replace(&mut used[e], true) {
                return Err(NetworkError::InvalidKStructure(format!("edge {e} lies in two triangles")));
            }
            *slot = e;
        }
        out.push(opp);
    }
    if let Some(e) = used.iter().position(|&u| !u) {
        return Err(NetworkError::InvalidKStructure(format!("edge {e} lies in no triangle")));
    }
    Ok(out)
}

/// `(LU)(P) = sum_{P' ~ P} c(P P') (U(P') - U(P))`.
pub fn total_current(net: &ElectricNetwork, u: &[f64]) -> Result<Vec<f64>, NetworkError> {
    check_len(net.n_vertices, u.len())?;
    let mut out = vec![0.0; net.n_vertices];
    for (&[p, q], j) in net.edges.iter().zip(net.edge_currents(u)) {
        out[p] += j;
        out[q] -= j;
    }
    Ok(out)
}

/// The conductance-weighted mean of the neighbours of `p`.
pub fn free_vertex_value(net: &ElectricNetwork, u: &[f64], p: usize) -> Result<f64, NetworkError> {
    check_len(net.n_vertices, u.len())?;
    let (mut num, mut den) = (0.0, 0.0);
    for (&[a, b], &c) in net.edges.iter().zip(&net.conductivity) {
        if a == p {
            num += c * u[b];
            den += c;
        } else if b == p {
            num += c * u[a];
            den += c;
        }
    }
    if den == 0.0 {
        return Err(NetworkError::IsolatedVertex(p));
    }
    Ok(num / den)
}

/// Star conductivities `S / c_i`, `S = c1 c2 + c1 c3 + c2 c3`, where `c_i` sits
/// on the triangle edge opposite vertex `i` and the result on the star edge at
/// vertex `i`.
pub fn star_triangle_single(c: [f64; 3]) -> Result<[f64; 3], NetworkError> {
    if let Some((edge, &value)) = c.iter().enumerate().find(|(_, c)| !(**c > 0.0 && c.is_finite())) {
        return Err(NetworkError::NonPositiveConductivity { edge, value });
    }
    let s = c[0] * c[1] + c[0] * c[2] + c[1] * c[2];
    Ok([s / c[0], s / c[1], s / c[2]])
}

/// Replaces every black triangle by a star around a new vertex
/// `n_vertices + t`, whose voltage is the free value. Original vertices keep
/// their voltages.
pub fn star_triangle_network(
    net: &ElectricNetwork,
    u: &[f64],
) -> Result<(ElectricNetwork, Vec<f64>), NetworkError> {
    check_len(net.n_vertices, u.len())?;
    let black = net.require_k()?;
    let n = net.n_vertices;
    let mut edges = Vec::with_capacity(3 * black.len());
    let mut cond = Vec::with_capacity(3 * black.len());
    let mut u2 = u.to_vec();
    for (t, (tri, opp)) in black.iter().zip(&net.black_edges).enumerate() {
        let star = star_triangle_single(opp.map(|e| net.conductivity[e]))?;
        let center = n + t;
        let sigma: f64 = star.iter().sum();
        u2.push(tri.iter().zip(&star).map(|(&p, c)| c * u[p]).sum::<f64>() / sigma);
        for (&p, &c) in tri.iter().zip(&star) {
            edges.push([p, center]);
            cond.push(c);
        }
    }
    Ok((ElectricNetwork::new(n + black.len(), edges, cond, None)?, u2))
}

/// `L = Q^+ (C')^{-1} Q - W` with `(Q psi)(T) = sum_i c'_i(T) psi(P_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlackFactorization {
    pub triangles: Vec<[usize; 3]>,
    /// Star conductivities `c'_i(T)` at the corners.
    pub star: Vec<[f64; 3]>,
    /// `sigma(T) = sum_i c'_i(T)`.
    pub sigma: Vec<f64>,
    pub w: Vec<f64>,
    /// `max |Q^+ (C')^{-1} Q - W - L|` by dense assembly.
    pub residual: f64,
}

impl BlackFactorization {
    /// Dense `Q`, one row per black triangle.
    pub fn q_matrix(&self, n_vertices: usize) -> DMatrix<f64> {
        let mut q = DMatrix::zeros(self.triangles.len(), n_vertices);
        for (t, (tri, c)) in self.triangles.iter().zip(&self.star).enumerate() {
            for (&p, &c) in tri.iter().zip(c) {
                q[(t, p)] += c;
            }
        }
        q
    }

    /// Dense `Q W^{-1} Q^+ - C'` on the black triangles.
    pub fn image_operator(&self, n_vertices: usize) -> Result<DMatrix<f64>, NetworkError> {
        if let Some(p) = self.w.iter().position(|&w| w == 0.0) {
            return Err(NetworkError::ZeroW(p));
        }
        let q = self.q_matrix(n_vertices);
        let winv = DMatrix::from_diagonal(&DVector::from_iterator(n_vertices, self.w.iter().map(|w| 1.0 / w)));
        Ok(&q * winv * q.transpose() - DMatrix::from_diagonal(&DVector::from_column_slice(&self.sigma)))
    }
}

pub fn black_factorization(net: &ElectricNetwork) -> Result<BlackFactorization, NetworkError> {
    let black = net.require_k()?;
    let mut star = Vec::with_capacity(black.len());
    let mut sigma = Vec::with_capacity(black.len());
    let mut w = vec![0.0; net.n_vertices];
    for (tri, opp) in black.iter().zip(&net.black_edges) {
        let s = star_triangle_single(opp.map(|e| net.conductivity[e]))?;
        let total: f64 = s.iter().sum();
        for (&p, &c) in tri.iter().zip(&s) {
            w[p] += c * c / total;
        }
        star.push(s);
        sigma.push(total);
    }
    let l = net.laplacian();
    for (p, w) in w.iter_mut().enumerate() {
        *w -= l[(p, p)];
    }
    let mut f = BlackFactorization { triangles: black.to_vec(), star, sigma, w, residual: 0.0 };
    let q = f.q_matrix(net.n_vertices);
    let cinv = DMatrix::from_diagonal(&DVector::from_iterator(f.sigma.len(), f.sigma.iter().map(|s| 1.0 / s)));
    let assembled = q.transpose() * cinv * q - DMatrix::from_diagonal(&DVector::from_column_slice(&f.w));
    f.residual = (assembled - l).abs().max();
    Ok(f)
}

/// The two candidate triangle functions built from `QU`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalization {
    /// `U' = (C')^{-1} Q U`
    #[serde(rename = "inverse_cprime_q_u")]
    InverseCPrime,
    /// `U' = C' Q U`
    #[serde(rename = "cprime_q_u")]
    CPrime,
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::InverseCPrime => "U' = (C')^-1 Q U",
            Normalization::CPrime => "U' = C' Q U",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceImage {
    pub operator: DMatrix<f64>,
    pub verified: Normalization,
    pub u_prime: Vec<f64>,
    pub kernel_residual: f64,
    /// Residual of the other normalization on the same window.
    pub rejected_residual: f64,
    /// Black triangles all of whose vertices are asserted.
    pub window: Vec<usize>,
}

/// Builds `L' = Q W^{-1} Q^+ - C'` and tests both normalizations of `QU` as
/// kernel vectors. `LU = 0` is assumed on the `asserted` vertices; the
/// residual is taken over black triangles whose vertices are all asserted,
/// since elsewhere `L' U'` picks up `Q W^{-1} L U`.
pub fn laplace_image(
    net: &ElectricNetwork,
    u: &[f64],
    asserted: &[usize],
    tol: f64,
) -> Result<LaplaceImage, NetworkError> {
    laplace_image_with(&black_factorization(net)?, net.n_vertices, u, asserted, tol)
}

pub fn laplace_image_with(
    f: &BlackFactorization,
    n_vertices: usize,
    u: &[f64],
    asserted: &[usize],
    tol: f64,
) -> Result<LaplaceImage, NetworkError> {
    check_len(n_vertices, u.len())?;
    let operator = f.image_operator(n_vertices)?;
    let mut mask = vec![false; n_vertices];
    for &p in asserted {
        if p < n_vertices {
            mask[p] = true;
        }
    }
    let window: Vec<usize> = (0..f.triangles.len()).filter(|&t| f.triangles[t].iter().all(|&p| mask[p])).collect();
    if window.is_empty() {
        return Err(NetworkError::EmptyWindow);
    }
    let qu = f.q_matrix(n_vertices) * DVector::from_column_slice(u);
    let candidate = |scale: &dyn Fn(usize) -> f64| {
        let v = DVector::from_fn(qu.len(), |t, _| qu[t] * scale(t));
        let r = &operator * &v;
        (v.iter().copied().collect::<Vec<_>>(), window.iter().map(|&t| r[t].abs()).fold(0.0, f64::max))
    };
    let (inv, inv_res) = candidate(&|t| 1.0 / f.sigma[t]);
    let (dir, dir_res) = candidate(&|t| f.sigma[t]);
    let (verified, u_prime, kernel_residual, rejected_residual) = if inv_res <= dir_res {
        (Normalization::InverseCPrime, inv, inv_res, dir_res)
    } else {
        (Normalization::CPrime, dir, dir_res, inv_res)
    };
    if kernel_residual.is_nan() || kernel_residual >= tol {
        return Err(NetworkError::NoKernelVector { inverse: inv_res, direct: dir_res });
    }
    Ok(LaplaceImage { operator, verified, u_prime, kernel_residual, rejected_residual, window })
}

/// Fixes `U` at the given vertices and solves `LU = 0` at all others.
pub fn dirichlet_solve(net: &ElectricNetwork, fixed: &[(usize, f64)]) -> Result<Vec<f64>, NetworkError> {
    let n = net.n_vertices;
    let mut u = vec![0.0; n];
    let mut is_fixed = vec![false; n];
    for &(p, value) in fixed {
        if p >= n {
            return Err(NetworkError::LengthMismatch { expected: n, got: p + 1 });
        }
        u[p] = value;
        is_fixed[p] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&p| !is_fixed[p]).collect();
    if free.is_empty() {
        return Ok(u);
    }
    let l = net.laplacian();
    let a = DMatrix::from_fn(free.len(), free.len(), |i, j| l[(free[i], free[j])]);
    let rhs = DVector::from_fn(free.len(), |i, _| -(0..n).filter(|&p| is_fixed[p]).map(|p| l[(free[i], p)] * u[p]).sum::<f64>());
    let x = a.lu().solve(&rhs).ok_or(NetworkError::SingularDirichlet)?;
    for (&p, &x) in free.iter().zip(x.iter()) {
        u[p] = x;
    }
    Ok(u)
}

fn check_len(expected: usize, got: usize) -> Result<(), NetworkError> {
    if expected == got {
        Ok(())
    } else {
        Err(NetworkError::LengthMismatch { expected, got })
    }
}

/// JSON form `{"vertices": N, "edges": [[i, j, c]], "black_triangles": [[i, j, k]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub vertices: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub black_triangles: Option<Vec<[usize; 3]>>,
}

impl From<&ElectricNetwork> for NetworkJson {
    fn from(net: &ElectricNetwork) -> Self {
        NetworkJson {
            vertices: net.n_vertices,
            edges: net.edges.iter().zip(&net.conductivity).map(|(&[p, q], &c)| (p, q, c)).collect(),
            black_triangles: net.black.clone(),
        }
    }
}

impl TryFrom<NetworkJson> for ElectricNetwork {
    type Error = NetworkError;

    fn try_from(j: NetworkJson) -> Result<Self, NetworkError> {
        let (edges, cond) = j.edges.into_iter().map(|(p, q, c)| ([p, q], c)).unzip();
        ElectricNetwork::new(j.vertices, edges, cond, j.black_triangles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(c: [f64; 3]) -> ElectricNetwork {
        // edges opposite vertices 0, 1, 2
        ElectricNetwork::new(3, vec![[1, 2], [0, 2], [0, 1]], c.to_vec(), Some(vec![[0, 1, 2]])).unwrap()
    }

    #[test]
    fn path_graph_current() {
        let net = ElectricNetwork::new(3, vec![[0, 1], [1, 2]], vec![1.0, 1.0], None).unwrap();
        assert_eq!(total_current(&net, &[0.0, 0.0, 1.0]).unwrap(), vec![0.0, 1.0, -1.0]);
    }

    #[test]
    fn star_values() {
        assert_eq!(star_triangle_single([1.0, 1.0, 1.0]).unwrap(), [3.0, 3.0, 3.0]);
        assert_eq!(star_triangle_single([1.0, 2.0, 3.0]).unwrap(), [11.0, 5.5, 11.0 / 3.0]);
        assert!(star_triangle_single([1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn unit_triangle_factorization() {
        let f = black_factorization(&single([1.0; 3])).unwrap();
        assert_eq!(f.sigma, vec![9.0]);
        assert_eq!(f.w, vec![3.0; 3]);
        assert!(f.residual < 1e-15);
    }

    #[test]
    fn k_structure_needs_every_edge() {
        let r = ElectricNetwork::new(4, vec![[1, 2], [0, 2], [0, 1], [2, 3]], vec![1.0; 4], Some(vec![[0, 1, 2]]));
        assert!(matches!(r, Err(NetworkError::InvalidKStructure(_))));
    }
}
