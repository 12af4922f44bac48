//! Fourth order self-adjoint operators on trivalent trees and their
//! factorization `L = Q^+ Q + u` through first order operators.
//!
//! `(Q psi)_P = sum_{P' ~ P} d_{PP'} psi_{P'} + v_P psi_P`, with one row per
//! vertex. Then `L = Q^+ Q + u` has entries `a_{PP''} = d_{P'P} d_{P'P''}` on
//! paths `P P' P''`, `b_{PP'} = d_{P'P} v_{P'} + d_{PP'} v_P` on edges and
//! `W_P = v_P^2 + sum_{P' ~ P} d_{P'P}^2 + u_P` on the diagonal.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connection::triangle_solve;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("vertex {vertex} has degree {degree}; trees here have degrees 1 and 3 only")]
    BadDegree { vertex: usize, degree: usize },
    #[error("edge list does not form a connected tree")]
    TreeNotConnected,
    #[error("tree needs at least one vertex of degree 3")]
    NoInteriorVertex,
    #[error("distance-two coefficients around vertex {0} are missing or not positive")]
    InconsistentA(usize),
    #[error("edge {0} has a vanishing coefficient")]
    DegenerateEdge(usize),
    #[error("u vanishes at vertex {0}")]
    ZeroPotential(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// A finite tree whose vertices have degree 1 (leaves) or 3.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    edges: Vec<[usize; 2]>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl Tree {
    pub fn new(n_vertices: usize, edges: Vec<[usize; 2]>) -> Result<Self, TreeError> {
        if edges.len() + 1 != n_vertices {
            return Err(TreeError::TreeNotConnected);
        }
        let mut adj = vec![Vec::new(); n_vertices];
        for (e, &[p, q]) in edges.iter().enumerate() {
            if p >= n_vertices || q >= n_vertices || p == q {
                return Err(TreeError::TreeNotConnected);
            }
            adj[p].push((q, e));
            adj[q].push((p, e));
        }
        for (vertex, a) in adj.iter().enumerate() {
            if a.len() != 1 && a.len() != 3 {
                return Err(TreeError::BadDegree { vertex, degree: a.len() });
            }
        }
        if adj.iter().all(|a| a.len() == 1) {
            return Err(TreeError::NoInteriorVertex);
        }
        let tree = Tree { edges, adj };
        if tree.bfs_order(0).len() != n_vertices {
            return Err(TreeError::TreeNotConnected);
        }
        Ok(tree)
    }

    /// Root of degree 3; every vertex at depth below `depth` has degree 3 and
    /// the vertices at `depth` are leaves.
    ///
    /// # Panics
    /// If `depth` is zero.
    pub fn complete(depth: usize) -> Self {
        assert!(depth > 0, "a complete trivalent tree needs depth at least 1");
        let mut edges = Vec::new();
        let mut frontier = vec![0usize];
        let mut next_id = 1;
        for level in 0..depth {
            let mut next = Vec::new();
            for &p in &frontier {
                let children = if level == 0 { 3 } else { 2 };
                for _ in 0..children {
                    edges.push([p, next_id]);
                    next.push(next_id);
                    next_id += 1;
                }
            }
            frontier = next;
        }
        Tree::new(next_id, edges).expect("complete trees are valid")
    }

    pub fn n_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// `(neighbour, edge)` pairs.
    pub fn neighbours(&self, p: usize) -> &[(usize, usize)] {
        &self.adj[p]
    }

    pub fn is_leaf(&self, p: usize) -> bool {
        self.adj[p].len() == 1
    }

    /// Unordered pairs at distance two with their middle vertex, sorted.
    pub fn distance_two_pairs(&self) -> Vec<((usize, usize), usize)> {
        let mut out = Vec::new();
        for (mid, nb) in self.adj.iter().enumerate() {
            for i in 0..nb.len() {
                for j in i + 1..nb.len() {
                    let (x, y) = (nb[i].0, nb[j].0);
                    out.push(((x.min(y), x.max(y)), mid));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Distance of every vertex to the nearest leaf.
    pub fn leaf_distance(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_vertices()];
        let mut queue: VecDeque<usize> = (0..self.n_vertices()).filter(|&p| self.is_leaf(p)).collect();
        for &p in &queue {
            dist[p] = 0;
        }
        while let Some(p) = queue.pop_front() {
            for &(q, _) in &self.adj[p] {
                if dist[q] == usize::MAX {
                    dist[q] = dist[p] + 1;
                    queue.push_back(q);
                }
            }
        }
        dist
    }

    fn bfs_order(&self, root: usize) -> Vec<(usize, Option<(usize, usize)>)> {
        let mut seen = vec![false; self.n_vertices()];
        let mut out = vec![(root, None)];
        seen[root] = true;
        let mut i = 0;
        while i < out.len() {
            let p = out[i].0;
            for &(q, e) in &self.adj[p] {
                if !seen[q] {
                    seen[q] = true;
                    out.push((q, Some((p, e))));
                }
            }
            i += 1;
        }
        out
    }

    fn edge_slot(&self, e: usize, from: usize) -> usize {
        if self.edges[e][0] == from {
            0
        } else {
            1
        }
    }
}

/// The fourth order operator: `a` on distance-two pairs, `b` on edges and the
/// diagonal `w`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrivalentOperator {
    pub tree: Tree,
    pub a: BTreeMap<(usize, usize), f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
}

/// First order operator on the tree. `d[e] = [d_{P0 P1}, d_{P1 P0}]` for
/// edge `e = [P0, P1]`, where `d_{PP'}` sits in row `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrder {
    pub d: Vec<[f64; 2]>,
    pub v: Vec<f64>,
}

/// `L = Q^+ Q + u`.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeFactorization {
    pub q: FirstOrder,
    pub u: Vec<f64>,
}

impl FirstOrder {
    /// `d_{from, to}` across edge `e`.
    pub fn d(&self, tree: &Tree, e: usize, from: usize) -> f64 {
        self.d[e][tree.edge_slot(e, from)]
    }

    pub fn to_dense(&self, tree: &Tree) -> DMatrix<f64> {
        let n = tree.n_vertices();
        let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(&self.v));
        for (e, &[p, q]) in tree.edges().iter().enumerate() {
            m[(p, q)] += self.d[e][0];
            m[(q, p)] += self.d[e][1];
        }
        debug_assert_eq!(m.nrows(), n);
        m
    }

    pub fn apply(&self, tree: &Tree, psi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.v.iter().zip(psi).map(|(v, p)| v * p).collect();
        for (e, &[p, q]) in tree.edges().iter().enumerate() {
            out[p] += self.d[e][0] * psi[q];
            out[q] += self.d[e][1] * psi[p];
        }
        out
    }
}

impl TrivalentOperator {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(&self.w));
        for (&(x, y), &a) in &self.a {
            m[(x, y)] += a;
            m[(y, x)] += a;
        }
        for (&[p, q], &b) in self.tree.edges().iter().zip(&self.b) {
            m[(p, q)] += b;
            m[(q, p)] += b;
        }
        m
    }

    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = self.w.iter().zip(psi).map(|(w, p)| w * p).collect();
        for (&(x, y), &a) in &self.a {
            out[x] += a * psi[y];
            out[y] += a * psi[x];
        }
        for (&[p, q], &b) in self.tree.edges().iter().zip(&self.b) {
            out[p] += b * psi[q];
            out[q] += b * psi[p];
        }
        out
    }

    /// Assembles `Q^+ Q + u`.
    pub fn from_factorization(tree: &Tree, f: &TreeFactorization) -> Self {
        let q = &f.q;
        let mut a = BTreeMap::new();
        for ((x, y), mid) in tree.distance_two_pairs() {
            let ex = tree.neighbours(mid).iter().find(|n| n.0 == x).expect("neighbour").1;
            let ey = tree.neighbours(mid).iter().find(|n| n.0 == y).expect("neighbour").1;
            a.insert((x, y), q.d(tree, ex, mid) * q.d(tree, ey, mid));
        }
        let b = tree
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &[p, s])| q.d(tree, e, s) * q.v[s] + q.d(tree, e, p) * q.v[p])
            .collect();
        let w = (0..tree.n_vertices())
            .map(|p| {
                let incoming: f64 = tree.neighbours(p).iter().map(|&(r, e)| q.d(tree, e, r).powi(2)).sum();
                q.v[p] * q.v[p] + incoming + f.u[p]
            })
            .collect();
        TrivalentOperator { tree: tree.clone(), a, b, w }
    }
}

/// Factorizes `L = Q^+ Q + u` given `v` at `root`.
///
/// Around each degree-3 vertex `P'` the three `a` values on pairs of its
/// neighbours fix `d_{P'X}` as in the triangle edge-weight system. A leaf row
/// has no such constraint; there `d_{leaf, S}` is set equal to `d_{S, leaf}`.
/// `v` then follows from `b_{PS} = d_{SP} v_S + d_{PS} v_P` outward from the
/// root, and `u` from the diagonal.
pub fn trivalent_factorize(op: &TrivalentOperator, root: usize, v0: f64) -> Result<TreeFactorization, TreeError> {
    let tree = &op.tree;
    let n = tree.n_vertices();
    if op.b.len() != tree.edges().len() {
        return Err(TreeError::LengthMismatch { expected: tree.edges().len(), got: op.b.len() });
    }
    if op.w.len() != n {
        return Err(TreeError::LengthMismatch { expected: n, got: op.w.len() });
    }
    let mut d = vec![[f64::NAN; 2]; tree.edges().len()];
    for mid in (0..n).filter(|&p| !tree.is_leaf(p)) {
        let nb = tree.neighbours(mid);
        let pair = |i: usize, j: usize| {
            let (x, y) = (nb[i].0, nb[j].0);
            op.a.get(&(x.min(y), x.max(y))).copied().filter(|a| *a > 0.0 && a.is_finite())
        };
        let (Some(a01), Some(a12), Some(a20)) = (pair(0, 1), pair(1, 2), pair(2, 0)) else {
            return Err(TreeError::InconsistentA(mid));
        };
        let sol = triangle_solve([a01, a12, a20]);
        for (k, &(_, e)) in nb.iter().enumerate() {
            d[e][tree.edge_slot(e, mid)] = sol[k];
        }
    }
    for (e, &[p, q]) in tree.edges().iter().enumerate() {
        if tree.is_leaf(p) {
            d[e][0] = d[e][1];
        }
        if tree.is_leaf(q) {
            d[e][1] = d[e][0];
        }
    }
    let mut v = vec![0.0; n];
    for (s, parent) in tree.bfs_order(root) {
        match parent {
            None => v[s] = v0,
            Some((p, e)) => {
                let (d_ps, d_sp) = (d[e][tree.edge_slot(e, p)], d[e][tree.edge_slot(e, s)]);
                if d_sp == 0.0 {
                    return Err(TreeError::DegenerateEdge(e));
                }
                v[s] = (op.b[e] - v[p] * d_ps) / d_sp;
            }
        }
    }
    let q = FirstOrder { d, v };
    let u = (0..n)
        .map(|p| {
            let incoming: f64 = tree.neighbours(p).iter().map(|&(r, e)| q.d(tree, e, r).powi(2)).sum();
            op.w[p] - q.v[p] * q.v[p] - incoming
        })
        .collect();
    Ok(TreeFactorization { q, u })
}

/// `Q u^{-1} Q^+ + 1` on the same tree.
pub fn trivalent_laplace(tree: &Tree, f: &TreeFactorization) -> Result<TrivalentOperator, TreeError> {
    let (q, u) = (&f.q, &f.u);
    if let Some(p) = u.iter().position(|&x| x == 0.0) {
        return Err(TreeError::ZeroPotential(p));
    }
    let mut a = BTreeMap::new();
    for ((x, y), mid) in tree.distance_two_pairs() {
        let ex = tree.neighbours(mid).iter().find(|n| n.0 == x).expect("neighbour").1;
        let ey = tree.neighbours(mid).iter().find(|n| n.0 == y).expect("neighbour").1;
        a.insert((x, y), q.d(tree, ex, x) * q.d(tree, ey, y) / u[mid]);
    }
    let b = tree
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &[p, s])| q.v[p] * q.d(tree, e, s) / u[p] + q.d(tree, e, p) * q.v[s] / u[s])
        .collect();
    let w = (0..tree.n_vertices())
        .map(|p| {
            let out: f64 = tree.neighbours(p).iter().map(|&(r, e)| q.d(tree, e, p).powi(2) / u[r]).sum();
            q.v[p] * q.v[p] / u[p] + out + 1.0
        })
        .collect();
    Ok(TrivalentOperator { tree: tree.clone(), a, b, w })
}

/// JSON form `{"vertices", "edges", "a": [[i, k, value]], "b", "w"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrivalentJson {
    pub vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
}

impl From<&TrivalentOperator> for TrivalentJson {
    fn from(op: &TrivalentOperator) -> Self {
        TrivalentJson {
            vertices: op.tree.n_vertices(),
            edges: op.tree.edges().to_vec(),
            a: op.a.iter().map(|(&(x, y), &v)| (x, y, v)).collect(),
            b: op.b.clone(),
            w: op.w.clone(),
        }
    }
}

impl TryFrom<TrivalentJson> for TrivalentOperator {
    type Error = TreeError;

    fn try_from(j: TrivalentJson) -> Result<Self, TreeError> {
        let tree = Tree::new(j.vertices, j.edges)?;
        let a = j.a.into_iter().map(|(x, y, v)| ((x.min(y), x.max(y)), v)).collect();
        Ok(TrivalentOperator { tree, a, b: j.b, w: j.w })
    }
}
