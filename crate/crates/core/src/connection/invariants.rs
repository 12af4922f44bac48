use std::sync::Arc;

use crate::complex::Complex2D;

use super::{Connection, ConnectionError};

/// The `rho` invariants of a connection, one number per interior edge.
///
/// For edge `e` with ends `[P0, P1]` and sides `[T0, T1]` (`T0` the triangle
/// in which `P0 -> P1` is positive) the stored value is `rho^{T0 T1}_{P0 P1}`.
/// All other orderings follow from `rho^{TT'}_{PP'} rho^{TT'}_{P'P} = 1` and
/// `rho^{T'T}_{P'P} = rho^{TT'}_{PP'}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoData {
    complex: Arc<Complex2D>,
    values: Vec<f64>,
}

impl RhoData {
    pub fn new(complex: Arc<Complex2D>, values: Vec<f64>) -> Result<Self, ConnectionError> {
        if values.len() != complex.n_edges() {
            return Err(ConnectionError::LengthMismatch { expected: complex.n_edges(), got: values.len() });
        }
        if let Some(e) = (0..complex.n_edges()).find(|&e| !complex.edge(e).is_interior()) {
            return Err(ConnectionError::BoundaryEdge(e));
        }
        if let Some((edge, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(ConnectionError::NonPositiveWeight { edge, value });
        }
        Ok(RhoData { complex, values })
    }

    pub fn trivial(complex: Arc<Complex2D>) -> Self {
        let values = vec![1.0; complex.n_edges()];
        RhoData { complex, values }
    }

    pub fn from_connection(conn: &Connection) -> Result<Self, ConnectionError> {
        let c = conn.complex();
        let values = (0..c.n_edges())
            .map(|e| {
                let edge = c.edge(e);
                let t0 = edge.sides.first().ok_or(ConnectionError::BoundaryEdge(e))?.triangle;
                conn.rho(e, edge.ends[0], t0)
            })
            .collect::<Result<_, _>>()?;
        Ok(RhoData { complex: conn.complex_arc().clone(), values })
    }

    pub fn complex(&self) -> &Complex2D {
        &self.complex
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `rho^{t t'}_{from, to}` across edge `e`.
    pub fn rho(&self, e: usize, from: usize, t: usize) -> f64 {
        let edge = self.complex.edge(e);
        let c = self.values[e];
        if (t == edge.sides[0].triangle) == (from == edge.ends[0]) {
            c
        } else {
            1.0 / c
        }
    }

    pub fn log_rho(&self, e: usize, from: usize, t: usize) -> f64 {
        self.rho(e, from, t).ln()
    }

    /// `rho(T)`: the product over the positively oriented sides of `t`.
    pub fn rho_triangle(&self, t: usize) -> f64 {
        self.log_rho_triangle(t).exp()
    }

    fn log_rho_triangle(&self, t: usize) -> f64 {
        let tri = self.complex.triangle(t);
        let edges = self.complex.triangle_edges(t);
        (0..3).map(|k| self.log_rho(edges[k], tri[k], t)).sum()
    }

    /// `ln prod_T rho(T)`; zero exactly when the data is a coboundary.
    pub fn log_cocycle_defect(&self) -> f64 {
        (0..self.complex.n_triangles()).map(|t| self.log_rho_triangle(t)).sum()
    }
}

/// Framed holonomy of `conn` around each framed generator cycle of the
/// complex, in the order of `homology_basis`.
pub fn framed_generator_values(conn: &Connection) -> Result<Vec<f64>, ConnectionError> {
    let basis = conn.complex().homology_basis()?;
    basis.framed_cycles.iter().map(|p| conn.framed_holonomy(p)).collect()
}

/// Builds a connection with prescribed `rho` invariants and prescribed framed
/// holonomy on the generator cycles of `homology_basis`.
///
/// With `x_e = ln lambda_e` on each edge (oriented `ends[0] -> ends[1]`), the
/// ratios are `mu^T_{PP'} = lambda_{PP'} rho^{TT'}_{PP'}^{1/2}`. Edges of the
/// primal spanning tree get `x = 0`, generator edges are fixed by the loop
/// values, and the dual-tree edges are solved from the triangle condition
/// `sum_sides x = -ln rho(T) / 2` from the leaves of the dual tree inwards.
/// The result is unique up to vertex gauge.
pub fn reconstruct_connection_from_invariants(
    rho: &RhoData,
    loop_values: &[f64],
    tol: f64,
) -> Result<Connection, ConnectionError> {
    let c = &*rho.complex;
    let defect = rho.log_cocycle_defect();
    if defect.abs() > tol {
        return Err(ConnectionError::InconsistentRho(defect));
    }
    let basis = c.homology_basis()?;
    if loop_values.len() != basis.generator_edges.len() {
        return Err(ConnectionError::UnsatisfiableLoopValues(format!(
            "surface has {} generator loops, got {} values",
            basis.generator_edges.len(),
            loop_values.len()
        )));
    }
    if let Some(v) = loop_values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(ConnectionError::UnsatisfiableLoopValues(format!("loop value {v} is not positive")));
    }

    // orientation sign of the positive traversal of side k of t
    let sign = |e: usize, from: usize| if c.edge(e).ends[0] == from { 1.0 } else { -1.0 };

    let mut x: Vec<Option<f64>> = vec![Some(0.0); c.n_edges()];
    for e in basis.dual_parent.iter().flatten() {
        x[*e] = None;
    }
    for ((&g, cycle), &value) in basis.generator_edges.iter().zip(&basis.framed_cycles).zip(loop_values) {
        let mut log = value.ln();
        let g_from = cycle.vertices[0];
        for (i, &t) in cycle.triangles.iter().enumerate() {
            let (p, q) = (cycle.vertices[i], cycle.vertices[i + 1]);
            let e = if i == 0 { g } else { edge_of_step(c, t, p, q) };
            log -= 0.5 * rho.log_rho(e, p, t);
        }
        // the cycle starts with the generator edge; all other steps have x = 0
        x[g] = Some(sign(g, g_from) * log);
    }

    let triangle_residual = |t: usize, x: &[Option<f64>], skip: Option<usize>| -> f64 {
        let tri = c.triangle(t);
        let edges = c.triangle_edges(t);
        let mut sum = 0.5 * rho.log_rho_triangle(t);
        for k in 0..3 {
            if Some(edges[k]) != skip {
                sum += sign(edges[k], tri[k]) * x[edges[k]].expect("edge solved before use");
            }
        }
        sum
    };
    for &t in basis.dual_order.iter().rev() {
        let Some(e) = basis.dual_parent[t] else { continue };
        let k = (0..3).find(|&k| c.triangle_edges(t)[k] == e).expect("parent edge is a side");
        let s = sign(e, c.triangle(t)[k]);
        x[e] = Some(-s * triangle_residual(t, &x, Some(e)));
    }
    let root = basis.dual_order[0];
    let residual = triangle_residual(root, &x, None);
    if residual.abs() > tol.max(1e-9) {
        return Err(ConnectionError::InconsistentRho(residual));
    }

    let coeffs = (0..c.n_triangles())
        .map(|t| {
            let tri = c.triangle(t);
            let edges = c.triangle_edges(t);
            let log_mu = |k: usize| {
                let e = edges[k];
                sign(e, tri[k]) * x[e].expect("all edges solved") + 0.5 * rho.log_rho(e, tri[k], t)
            };
            let u0 = 1.0;
            let u1 = u0 / log_mu(0).exp();
            let u2 = u1 / log_mu(1).exp();
            [u0, u1, u2]
        })
        .collect();
    Connection::new(rho.complex.clone(), coeffs)
}

fn edge_of_step(c: &Complex2D, t: usize, p: usize, q: usize) -> usize {
    let tri = c.triangle(t);
    let k = (0..3).find(|&k| tri[k] == p && tri[(k + 1) % 3] == q);
    match k {
        Some(k) => c.triangle_edges(t)[k],
        None => {
            let k = (0..3).find(|&k| tri[k] == q && tri[(k + 1) % 3] == p).expect("step is a side of its frame");
            c.triangle_edges(t)[k]
        }
    }
}
