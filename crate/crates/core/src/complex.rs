//! Oriented triangulated surfaces, their vertex stars, framed and thick paths,
//! black-white colorings and homology generator loops.
//!
//! Vertices, triangles and edges are dense indices. A triangle is stored as the
//! cyclic order of its three vertices; side `k` of a triangle runs from local
//! vertex `k` to local vertex `k + 1 (mod 3)`. Edges are usually identified by
//! their sorted vertex pair, but the lattice generators key edges by lattice
//! position so that small periodic windows (where two distinct edges join the
//! same pair of vertices) are still represented faithfully.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("vertex {vertex} out of range (complex has {count} vertices)")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("triangle {0} repeats a vertex")]
    DegenerateTriangle(usize),
    #[error("vertex {0} belongs to no triangle")]
    UnusedVertex(usize),
    #[error("non-manifold complex: {0}")]
    NonManifold(String),
    #[error("incoherent orientation across edge {edge} ({a}, {b})")]
    IncoherentOrientation { edge: usize, a: usize, b: usize },
    #[error("coloring is invalid: {0}")]
    InvalidColoring(String),
    #[error("vertex {0} lies on the boundary")]
    BoundaryVertex(usize),
    #[error("complex has boundary edges")]
    NotClosed,
    #[error("complex is not connected")]
    Disconnected,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("seed edge {0} is not an edge of the first triangle")]
    SeedNotInFirstTriangle(usize),
    #[error("invalid surface description: {0}")]
    InvalidSurface(String),
}

/// Color of a triangle in a black-white coloring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    #[serde(rename = "b")]
    Black,
    #[serde(rename = "w")]
    White,
}

impl Color {
    pub fn opposite(self) -> Self {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

/// One occurrence of an edge as a side of a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Side {
    pub triangle: usize,
    /// The side runs from local vertex `slot` to local vertex `slot + 1`.
    pub slot: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    /// Endpoints, ascending.
    pub ends: [usize; 2],
    /// The one or two triangle sides carrying this edge.
    pub sides: Vec<Side>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.sides.len() == 2
    }

    pub fn other_end(&self, v: usize) -> usize {
        if self.ends[0] == v {
            self.ends[1]
        } else {
            self.ends[0]
        }
    }
}

/// An oriented triangulated 2-manifold, possibly with boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex2D {
    n_vertices: usize,
    triangles: Vec<[usize; 3]>,
    tri_edges: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    coloring: Option<Vec<Color>>,
    /// For every corner (3 * triangle + slot) the next corner counter-clockwise
    /// around the same vertex, if the shared edge is interior.
    corner_next: Vec<Option<usize>>,
    /// Corners incident to each vertex.
    vertex_corners: Vec<Vec<usize>>,
}

impl Complex2D {
    /// Builds a complex from an explicit triangle list. Edges are the sorted
    /// vertex pairs.
    pub fn from_triangles(n_vertices: usize, triangles: Vec<[usize; 3]>) -> Result<Self, ComplexError> {
        for t in &triangles {
            for &v in t {
                if v >= n_vertices {
                    return Err(ComplexError::VertexOutOfRange { vertex: v, count: n_vertices });
                }
            }
        }
        let keys: Vec<[(usize, usize); 3]> = triangles
            .iter()
            .map(|t| {
                let mut k = [(0, 0); 3];
                for s in 0..3 {
                    let (a, b) = (t[s], t[(s + 1) % 3]);
                    k[s] = (a.min(b), a.max(b));
                }
                k
            })
            .collect();
        Self::from_keyed_sides(n_vertices, triangles, keys)
    }

    /// Builds a complex whose edges are given explicitly: `tri_edges[t][k]` is
    /// an edge id for side `k` of triangle `t`.
    pub fn from_triangle_edges(
        n_vertices: usize,
        triangles: Vec<[usize; 3]>,
        tri_edges: Vec<[usize; 3]>,
    ) -> Result<Self, ComplexError> {
        if tri_edges.len() != triangles.len() {
            return Err(ComplexError::InvalidSurface(
                "triangle_edges must have one entry per triangle".into(),
            ));
        }
        for t in &triangles {
            for &v in t {
                if v >= n_vertices {
                    return Err(ComplexError::VertexOutOfRange { vertex: v, count: n_vertices });
                }
            }
        }
        Self::from_keyed_sides(n_vertices, triangles, tri_edges)
    }

    /// General constructor: sides with equal keys are the same edge. Edge ids
    /// are assigned in ascending key order.
    pub(crate) fn from_keyed_sides<K: Ord + Clone + std::fmt::Debug>(
        n_vertices: usize,
        triangles: Vec<[usize; 3]>,
        keys: Vec<[K; 3]>,
    ) -> Result<Self, ComplexError> {
        for (i, t) in triangles.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(ComplexError::DegenerateTriangle(i));
            }
        }
        let mut by_key: BTreeMap<K, Vec<Side>> = BTreeMap::new();
        for (t, ks) in keys.iter().enumerate() {
            for (slot, k) in ks.iter().enumerate() {
                by_key.entry(k.clone()).or_default().push(Side { triangle: t, slot });
            }
        }
        let mut edges = Vec::with_capacity(by_key.len());
        let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (key, sides) in by_key {
            let id = edges.len();
            let s0 = sides[0];
            let (a, b) = side_ends(&triangles, s0);
            let ends = [a.min(b), a.max(b)];
            for s in &sides {
                let (x, y) = side_ends(&triangles, *s);
                if [x.min(y), x.max(y)] != ends {
                    return Err(ComplexError::NonManifold(format!(
                        "edge key {key:?} joins different vertex pairs"
                    )));
                }
                if tri_edges[s.triangle][s.slot] != usize::MAX {
                    return Err(ComplexError::NonManifold(format!(
                        "triangle {} uses edge key {key:?} twice",
                        s.triangle
                    )));
                }
                tri_edges[s.triangle][s.slot] = id;
            }
            if sides.len() > 2 {
                return Err(ComplexError::NonManifold(format!(
                    "edge ({a}, {b}) lies in {} triangles",
                    sides.len()
                )));
            }
            if sides.len() == 2 {
                let (x0, _) = side_ends(&triangles, sides[0]);
                let (x1, _) = side_ends(&triangles, sides[1]);
                if x0 == x1 {
                    return Err(ComplexError::IncoherentOrientation { edge: id, a: ends[0], b: ends[1] });
                }
            }
            edges.push(Edge { ends, sides });
        }

        let mut vertex_corners = vec![Vec::new(); n_vertices];
        for (t, tri) in triangles.iter().enumerate() {
            for (k, &v) in tri.iter().enumerate() {
                vertex_corners[v].push(3 * t + k);
            }
        }
        if let Some(v) = vertex_corners.iter().position(|c| c.is_empty()) {
            return Err(ComplexError::UnusedVertex(v));
        }

        let mut complex = Complex2D {
            n_vertices,
            triangles,
            tri_edges,
            edges,
            coloring: None,
            corner_next: Vec::new(),
            vertex_corners,
        };
        complex.corner_next = (0..3 * complex.triangles.len())
            .map(|c| complex.next_corner_raw(c))
            .collect();
        complex.check_vertex_links()?;
        Ok(complex)
    }

    /// Attaches a black-white coloring after checking that adjacent triangles
    /// differ.
    pub fn with_coloring(mut self, coloring: Vec<Color>) -> Result<Self, ComplexError> {
        if coloring.len() != self.triangles.len() {
            return Err(ComplexError::InvalidColoring(format!(
                "expected {} colors, got {}",
                self.triangles.len(),
                coloring.len()
            )));
        }
        for (id, e) in self.edges.iter().enumerate() {
            if e.is_interior() && coloring[e.sides[0].triangle] == coloring[e.sides[1].triangle] {
                return Err(ComplexError::InvalidColoring(format!(
                    "both triangles at edge {id} have the same color"
                )));
            }
        }
        self.coloring = Some(coloring);
        Ok(self)
    }

    fn next_corner_raw(&self, corner: usize) -> Option<usize> {
        let (t, k) = (corner / 3, corner % 3);
        // The edge entering the corner's vertex, shared with the next triangle
        // counter-clockwise around it.
        let e = self.tri_edges[t][(k + 2) % 3];
        let other = self.edges[e].sides.iter().find(|s| s.triangle != t)?;
        // In the neighbour the same edge leaves the vertex.
        Some(3 * other.triangle + other.slot)
    }

    fn check_vertex_links(&self) -> Result<(), ComplexError> {
        let mut prev = vec![None; self.corner_next.len()];
        for (c, n) in self.corner_next.iter().enumerate() {
            if let Some(n) = n {
                prev[*n] = Some(c);
            }
        }
        for (v, corners) in self.vertex_corners.iter().enumerate() {
            let starts: Vec<usize> = corners.iter().copied().filter(|c| prev[*c].is_none()).collect();
            if starts.len() > 1 {
                return Err(ComplexError::NonManifold(format!("star of vertex {v} is not a single arc")));
            }
            let start = starts.first().copied().unwrap_or(corners[0]);
            let mut seen = 1;
            let mut c = start;
            while let Some(n) = self.corner_next[c] {
                if n == start {
                    break;
                }
                seen += 1;
                c = n;
                if seen > corners.len() {
                    break;
                }
            }
            if seen != corners.len() {
                return Err(ComplexError::NonManifold(format!("star of vertex {v} is not a single cycle")));
            }
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    /// Edge ids of the three sides of triangle `t`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn coloring(&self) -> Option<&[Color]> {
        self.coloring.as_deref()
    }

    /// Local index of vertex `v` in triangle `t`.
    pub fn local_index(&self, t: usize, v: usize) -> Option<usize> {
        self.triangles[t].iter().position(|&x| x == v)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn is_closed(&self) -> bool {
        self.edges.iter().all(Edge::is_interior)
    }

    pub fn is_interior_vertex(&self, v: usize) -> bool {
        self.vertex_corners[v].iter().all(|&c| self.corner_next[c].is_some())
    }

    /// True when edge ids coincide with sorted vertex pairs.
    pub fn edges_determined_by_vertices(&self) -> bool {
        let mut pairs: Vec<[usize; 2]> = self.edges.iter().map(|e| e.ends).collect();
        pairs.sort_unstable();
        pairs.windows(2).all(|w| w[0] != w[1])
    }

    /// The edge joining `a` and `b`, when it is unique.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let ends = [a.min(b), a.max(b)];
        let mut found = self.edges.iter().enumerate().filter(|(_, e)| e.ends == ends).map(|(i, _)| i);
        let first = found.next()?;
        match found.next() {
            Some(_) => None,
            None => Some(first),
        }
    }

    /// Triangles adjacent across each side of `t` (`None` on boundary sides).
    pub fn neighbours(&self, t: usize) -> [Option<usize>; 3] {
        let mut out = [None; 3];
        for (k, &e) in self.tri_edges[t].iter().enumerate() {
            out[k] = self.edges[e].sides.iter().find(|s| s.triangle != t).map(|s| s.triangle);
        }
        out
    }

    /// The other triangle at edge `e`, seen from `t`.
    pub fn across(&self, e: usize, t: usize) -> Option<usize> {
        self.edges[e].sides.iter().find(|s| s.triangle != t).map(|s| s.triangle)
    }

    /// The triangle in which the edge is traversed from `from` to its other
    /// endpoint.
    pub fn positive_side(&self, e: usize, from: usize) -> Option<Side> {
        self.edges[e]
            .sides
            .iter()
            .copied()
            .find(|s| self.triangles[s.triangle][s.slot] == from)
    }

    /// The cyclic thick path of triangles around an interior vertex, ordered
    /// counter-clockwise and starting at the incident triangle of least index.
    pub fn vertex_star(&self, v: usize) -> Result<ThickPath, ComplexError> {
        if v >= self.n_vertices {
            return Err(ComplexError::VertexOutOfRange { vertex: v, count: self.n_vertices });
        }
        if !self.is_interior_vertex(v) {
            return Err(ComplexError::BoundaryVertex(v));
        }
        let start = *self.vertex_corners[v].iter().min().expect("vertex has corners");
        let mut corners = vec![start];
        let mut c = self.corner_next[start].expect("interior corner");
        while c != start {
            corners.push(c);
            c = self.corner_next[c].expect("interior corner");
        }
        let mut faces = Vec::with_capacity(corners.len() + 1);
        faces.push(self.tri_edges[start / 3][start % 3]);
        for &c in &corners {
            faces.push(self.tri_edges[c / 3][(c % 3 + 2) % 3]);
        }
        Ok(ThickPath { triangles: corners.iter().map(|c| c / 3).collect(), faces })
    }

    /// The vertices `P_1, ..., P_m` around an interior vertex, in star order:
    /// triangle `i` of the star is `P P_i P_{i+1}`.
    pub fn vertex_ring(&self, v: usize) -> Result<Vec<usize>, ComplexError> {
        let star = self.vertex_star(v)?;
        Ok(star.triangles.iter().map(|&t| {
            let k = self.local_index(t, v).expect("star triangle contains vertex");
            self.triangles[t][(k + 1) % 3]
        }).collect())
    }

    /// Two-colors the dual graph so that adjacent triangles differ, starting
    /// each component with black at its least triangle. `None` when the dual
    /// graph has an odd cycle.
    pub fn bipartite_coloring(&self) -> Option<Vec<Color>> {
        let mut color: Vec<Option<Color>> = vec![None; self.triangles.len()];
        for root in 0..self.triangles.len() {
            if color[root].is_some() {
                continue;
            }
            color[root] = Some(Color::Black);
            let mut queue = VecDeque::from([root]);
            while let Some(t) = queue.pop_front() {
                let c = color[t].expect("queued triangles are colored");
                for n in self.neighbours(t).into_iter().flatten() {
                    match color[n] {
                        None => {
                            color[n] = Some(c.opposite());
                            queue.push_back(n);
                        }
                        Some(cn) if cn == c => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(color.into_iter().map(|c| c.expect("all colored")).collect())
    }

    /// Closed thick paths generating the first homology of a closed connected
    /// surface.
    pub fn homology_generator_loops(&self) -> Result<Vec<ThickPath>, ComplexError> {
        Ok(self.homology_basis()?.thick_loops)
    }

    /// Tree-cotree decomposition: a breadth-first dual spanning tree, a
    /// breadth-first primal spanning tree avoiding the dual tree, and the
    /// leftover generator edges. Each generator edge yields one closed thick
    /// path (through the dual tree) and one closed framed path (through the
    /// primal tree); both lists share the same order.
    pub fn homology_basis(&self) -> Result<HomologyBasis, ComplexError> {
        if !self.is_closed() {
            return Err(ComplexError::NotClosed);
        }
        let nt = self.triangles.len();
        // dual tree
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; nt];
        let mut depth = vec![usize::MAX; nt];
        let mut in_dual_tree = vec![false; self.edges.len()];
        let mut dual_order = Vec::with_capacity(nt);
        depth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(t) = queue.pop_front() {
            dual_order.push(t);
            for &e in &self.tri_edges[t] {
                if let Some(n) = self.across(e, t) {
                    if depth[n] == usize::MAX {
                        depth[n] = depth[t] + 1;
                        parent[n] = Some((t, e));
                        in_dual_tree[e] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        if depth.contains(&usize::MAX) {
            return Err(ComplexError::Disconnected);
        }
        // primal tree on the remaining edges
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.n_vertices];
        for (id, e) in self.edges.iter().enumerate() {
            if !in_dual_tree[id] {
                adj[e.ends[0]].push(id);
                adj[e.ends[1]].push(id);
            }
        }
        let mut vparent: Vec<Option<(usize, usize)>> = vec![None; self.n_vertices];
        let mut vdepth = vec![usize::MAX; self.n_vertices];
        let mut in_primal_tree = vec![false; self.edges.len()];
        vdepth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for &e in &adj[v] {
                let w = self.edges[e].other_end(v);
                if vdepth[w] == usize::MAX {
                    vdepth[w] = vdepth[v] + 1;
                    vparent[w] = Some((v, e));
                    in_primal_tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
        if vdepth.contains(&usize::MAX) {
            return Err(ComplexError::Disconnected);
        }
        let generator_edges: Vec<usize> = (0..self.edges.len())
            .filter(|&e| !in_dual_tree[e] && !in_primal_tree[e])
            .collect();

        let mut thick_loops = Vec::with_capacity(generator_edges.len());
        let mut framed_cycles = Vec::with_capacity(generator_edges.len());
        for &g in &generator_edges {
            let e = &self.edges[g];
            let (ta, tb) = (e.sides[0].triangle, e.sides[1].triangle);
            let (up, down) = tree_path(ta, tb, &parent, &depth);
            let mut triangles: Vec<usize> = up.iter().map(|x| x.0).collect();
            let mut faces = vec![g];
            faces.extend(up.iter().filter_map(|x| x.1));
            for (node, edge) in down.iter().rev() {
                faces.push(*edge);
                triangles.push(*node);
            }
            faces.push(g);
            thick_loops.push(ThickPath::new(self, triangles, faces)?);

            // framed: cross the generator edge a -> b, then return b -> a in the tree
            let side = e.sides[0];
            let a = self.triangles[side.triangle][side.slot];
            let b = e.other_end(a);
            let (up, down) = tree_path(b, a, &vparent, &vdepth);
            let mut steps = vec![g];
            steps.extend(up.iter().filter_map(|x| x.1));
            steps.extend(down.iter().rev().map(|x| x.1));
            framed_cycles.push(FramedPath::along_edges(self, a, &steps)?);
        }
        Ok(HomologyBasis {
            generator_edges,
            thick_loops,
            framed_cycles,
            dual_parent: parent.iter().map(|p| p.map(|(_, e)| e)).collect(),
            dual_order,
        })
    }
}

fn side_ends(triangles: &[[usize; 3]], s: Side) -> (usize, usize) {
    let t = triangles[s.triangle];
    (t[s.slot], t[(s.slot + 1) % 3])
}

/// Path between two nodes of a rooted tree. Returns the ascending part from
/// `a` to the common ancestor (node, edge to parent or `None` at the ancestor)
/// and the ascending part from `b` excluding the ancestor (node, edge to
/// parent).
fn tree_path(
    a: usize,
    b: usize,
    parent: &[Option<(usize, usize)>],
    depth: &[usize],
) -> (Vec<(usize, Option<usize>)>, Vec<(usize, usize)>) {
    let (mut x, mut y) = (a, b);
    let mut up = Vec::new();
    let mut down = Vec::new();
    while depth[x] > depth[y] {
        let (p, e) = parent[x].expect("non-root has parent");
        up.push((x, Some(e)));
        x = p;
    }
    while depth[y] > depth[x] {
        let (p, e) = parent[y].expect("non-root has parent");
        down.push((y, e));
        y = p;
    }
    while x != y {
        let (px, ex) = parent[x].expect("non-root has parent");
        let (py, ey) = parent[y].expect("non-root has parent");
        up.push((x, Some(ex)));
        down.push((y, ey));
        x = px;
        y = py;
    }
    up.push((x, None));
    (up, down)
}

/// Homology generators of a closed surface from the tree-cotree
/// decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct HomologyBasis {
    pub generator_edges: Vec<usize>,
    pub thick_loops: Vec<ThickPath>,
    pub framed_cycles: Vec<FramedPath>,
    /// Edge to the parent triangle in the dual spanning tree (`None` at the
    /// root, triangle 0).
    pub dual_parent: Vec<Option<usize>>,
    /// Triangles in breadth-first order of the dual spanning tree.
    pub dual_order: Vec<usize>,
}

/// A sequence of triangles `T_1 .. T_m` glued along faces. `faces[0]` is the
/// entry face (seed) of `T_1`, `faces[i]` is shared by `T_i` and `T_{i+1}`, and
/// `faces[m]` is the exit face of `T_m`. The path is closed when the exit face
/// is the seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThickPath {
    pub triangles: Vec<usize>,
    pub faces: Vec<usize>,
}

impl ThickPath {
    pub fn new(c: &Complex2D, triangles: Vec<usize>, faces: Vec<usize>) -> Result<Self, ComplexError> {
        if faces.len() != triangles.len() + 1 {
            return Err(ComplexError::InvalidPath(format!(
                "{} triangles need {} faces, got {}",
                triangles.len(),
                triangles.len() + 1,
                faces.len()
            )));
        }
        if let Some(&f) = faces.iter().find(|&&f| f >= c.n_edges()) {
            return Err(ComplexError::InvalidPath(format!("edge {f} does not exist")));
        }
        if let Some(&t) = triangles.iter().find(|&&t| t >= c.n_triangles()) {
            return Err(ComplexError::InvalidPath(format!("triangle {t} does not exist")));
        }
        if let Some(&t0) = triangles.first() {
            if !c.tri_edges[t0].contains(&faces[0]) {
                return Err(ComplexError::SeedNotInFirstTriangle(faces[0]));
            }
        }
        for (i, &t) in triangles.iter().enumerate() {
            let (fin, fout) = (faces[i], faces[i + 1]);
            let te = c.tri_edges[t];
            if !te.contains(&fin) || !te.contains(&fout) {
                return Err(ComplexError::InvalidPath(format!(
                    "faces {fin} and {fout} are not both sides of triangle {t}"
                )));
            }
            if fin == fout {
                return Err(ComplexError::InvalidPath(format!(
                    "triangle {t} is entered and left through the same face {fin}"
                )));
            }
            if i + 1 < triangles.len() && c.across(fout, t) != Some(triangles[i + 1]) {
                return Err(ComplexError::InvalidPath(format!(
                    "triangles {t} and {} are not glued along edge {fout}",
                    triangles[i + 1]
                )));
            }
        }
        if triangles.len() > 1 && faces[0] == faces[triangles.len()] {
            let (first, last) = (triangles[0], triangles[triangles.len() - 1]);
            if c.across(faces[0], last) != Some(first) {
                return Err(ComplexError::InvalidPath("closing face does not glue the ends".into()));
            }
            if faces[1] == faces[0] {
                return Err(ComplexError::InvalidPath("closing face repeats".into()));
            }
        }
        Ok(ThickPath { triangles, faces })
    }

    /// The zero-length path sitting on one face.
    pub fn empty(seed: usize) -> Self {
        ThickPath { triangles: Vec::new(), faces: vec![seed] }
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn seed(&self) -> usize {
        self.faces[0]
    }

    pub fn is_closed(&self) -> bool {
        !self.triangles.is_empty() && self.faces[0] == self.faces[self.triangles.len()]
    }
}

/// A vertex path `P_0 .. P_m` framed by triangles `T_1 .. T_m`, with the step
/// `P_{i-1} P_i` an edge of `T_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramedPath {
    pub vertices: Vec<usize>,
    pub triangles: Vec<usize>,
}

impl FramedPath {
    pub fn new(c: &Complex2D, vertices: Vec<usize>, triangles: Vec<usize>) -> Result<Self, ComplexError> {
        if vertices.is_empty() {
            if triangles.is_empty() {
                return Ok(FramedPath { vertices, triangles });
            }
            return Err(ComplexError::InvalidPath("framed path without vertices".into()));
        }
        if vertices.len() != triangles.len() + 1 {
            return Err(ComplexError::InvalidPath(format!(
                "{} steps need {} vertices, got {}",
                triangles.len(),
                triangles.len() + 1,
                vertices.len()
            )));
        }
        for (i, &t) in triangles.iter().enumerate() {
            if t >= c.n_triangles() {
                return Err(ComplexError::InvalidPath(format!("triangle {t} does not exist")));
            }
            let (p, q) = (vertices[i], vertices[i + 1]);
            if p == q || c.local_index(t, p).is_none() || c.local_index(t, q).is_none() {
                return Err(ComplexError::InvalidPath(format!(
                    "step {p} -> {q} is not an edge of triangle {t}"
                )));
            }
        }
        Ok(FramedPath { vertices, triangles })
    }

    /// Walks the given edges from `start`, framing each step by the triangle in
    /// which it is positively oriented.
    pub fn along_edges(c: &Complex2D, start: usize, edges: &[usize]) -> Result<Self, ComplexError> {
        let mut vertices = vec![start];
        let mut triangles = Vec::with_capacity(edges.len());
        let mut at = start;
        for &e in edges {
            if e >= c.n_edges() || !c.edge(e).ends.contains(&at) {
                return Err(ComplexError::InvalidPath(format!("edge {e} does not leave vertex {at}")));
            }
            let side = c.positive_side(e, at).ok_or_else(|| {
                ComplexError::InvalidPath(format!("no triangle traverses edge {e} away from {at}"))
            })?;
            at = c.edge(e).other_end(at);
            vertices.push(at);
            triangles.push(side.triangle);
        }
        Self::new(c, vertices, triangles)
    }

    /// Frames the step back and forth across an interior edge: `[P P' P; T T']`.
    pub fn edge_return(c: &Complex2D, e: usize, from: usize, t: usize) -> Result<Self, ComplexError> {
        let to = c.edge(e).other_end(from);
        let t2 = c.across(e, t).ok_or_else(|| ComplexError::InvalidPath("boundary edge".into()))?;
        Self::new(c, vec![from, to, from], vec![t, t2])
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.vertices.first() == self.vertices.last()
    }

    /// The same steps walked backwards with the same framing.
    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        let mut triangles = self.triangles.clone();
        triangles.reverse();
        FramedPath { vertices, triangles }
    }
}

/// Ways to obtain a surface.
#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceSpec {
    /// Explicit triangle list; edges are sorted vertex pairs.
    Explicit { vertices: usize, triangles: Vec<[usize; 3]> },
    /// Periodic `m x n` window of the equilateral triangle lattice.
    Torus { m: usize, n: usize },
    Octahedron,
    Icosahedron,
    /// Non-periodic `m x n` vertex patch of the equilateral lattice.
    DiskPatch { m: usize, n: usize },
    /// Genus-2 surface: connected sum of two 3 x 3 lattice tori.
    DoubleTorus,
}

impl std::str::FromStr for SurfaceSpec {
    type Err = ComplexError;

    /// Parses `octahedron`, `icosahedron`, `double-torus`, `torus:MxN` or
    /// `disk:MxN`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ComplexError::InvalidSurface(format!("unknown surface '{s}'"));
        let dims = |d: &str| -> Result<(usize, usize), ComplexError> {
            let (a, b) = d.split_once(['x', 'X']).ok_or_else(bad)?;
            Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
        };
        match s {
            "octahedron" => Ok(SurfaceSpec::Octahedron),
            "icosahedron" => Ok(SurfaceSpec::Icosahedron),
            "double-torus" | "genus2" => Ok(SurfaceSpec::DoubleTorus),
            _ => {
                if let Some(d) = s.strip_prefix("torus:") {
                    let (m, n) = dims(d)?;
                    Ok(SurfaceSpec::Torus { m, n })
                } else if let Some(d) = s.strip_prefix("disk:") {
                    let (m, n) = dims(d)?;
                    Ok(SurfaceSpec::DiskPatch { m, n })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

pub fn build_surface(spec: &SurfaceSpec) -> Result<Complex2D, ComplexError> {
    match spec {
        SurfaceSpec::Explicit { vertices, triangles } => Complex2D::from_triangles(*vertices, triangles.clone()),
        SurfaceSpec::Torus { m, n } => lattice_torus(*m, *n),
        SurfaceSpec::Octahedron => octahedron(),
        SurfaceSpec::Icosahedron => icosahedron(),
        SurfaceSpec::DiskPatch { m, n } => disk_patch(*m, *n),
        SurfaceSpec::DoubleTorus => double_torus(),
    }
}

/// Lattice site `(m, n)` of an `rows x cols` window, row-major.
pub fn site_index(m: usize, n: usize, cols: usize) -> usize {
    m * cols + n
}

/// Periodic equilateral lattice. Triangle `2 i` is the up (black) triangle
/// `(m,n), (m+1,n), (m,n+1)` at site `i = (m,n)`, triangle `2 i + 1` the down
/// (white) triangle `(m+1,n), (m+1,n+1), (m,n+1)`.
pub fn lattice_torus(rows: usize, cols: usize) -> Result<Complex2D, ComplexError> {
    if rows < 2 || cols < 2 {
        return Err(ComplexError::InvalidSurface("torus needs at least 2 x 2 sites".into()));
    }
    let id = |m: usize, n: usize| site_index(m % rows, n % cols, cols);
    let mut triangles = Vec::with_capacity(2 * rows * cols);
    let mut keys = Vec::with_capacity(2 * rows * cols);
    for m in 0..rows {
        for n in 0..cols {
            let p = id(m, n);
            let p1 = id(m + 1, n);
            let p2 = id(m, n + 1);
            let p12 = id(m + 1, n + 1);
            // edge key: (base site, direction) with directions (1,0), (0,1), (-1,1)
            triangles.push([p, p1, p2]);
            keys.push([(p, 0usize), (p1, 2), (p, 1)]);
            triangles.push([p1, p12, p2]);
            keys.push([(p1, 1), (p2, 0), (p1, 2)]);
        }
    }
    let coloring = (0..triangles.len())
        .map(|t| if t % 2 == 0 { Color::Black } else { Color::White })
        .collect();
    Complex2D::from_keyed_sides(rows * cols, triangles, keys)?.with_coloring(coloring)
}

/// Non-periodic `rows x cols` vertex patch of the equilateral lattice, with
/// the same up/down triangle order as [`lattice_torus`].
pub fn disk_patch(rows: usize, cols: usize) -> Result<Complex2D, ComplexError> {
    if rows < 2 || cols < 2 {
        return Err(ComplexError::InvalidSurface("disk patch needs at least 2 x 2 sites".into()));
    }
    let id = |m: usize, n: usize| site_index(m, n, cols);
    let mut triangles = Vec::new();
    let mut coloring = Vec::new();
    for m in 0..rows - 1 {
        for n in 0..cols - 1 {
            triangles.push([id(m, n), id(m + 1, n), id(m, n + 1)]);
            coloring.push(Color::Black);
            triangles.push([id(m + 1, n), id(m + 1, n + 1), id(m, n + 1)]);
            coloring.push(Color::White);
        }
    }
    Complex2D::from_triangles(rows * cols, triangles)?.with_coloring(coloring)
}

fn orient_outward(coords: &[[f64; 3]], mut t: [usize; 3]) -> [usize; 3] {
    let [a, b, c] = [coords[t[0]], coords[t[1]], coords[t[2]]];
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let n = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    if n[0] * a[0] + n[1] * a[1] + n[2] * a[2] < 0.0 {
        t.swap(1, 2);
    }
    t
}

fn convex_hull_faces(coords: &[[f64; 3]], edge_len2: f64) -> Vec<[usize; 3]> {
    let d2 = |i: usize, j: usize| -> f64 { (0..3).map(|k| (coords[i][k] - coords[j][k]).powi(2)).sum() };
    let close = |i: usize, j: usize| (d2(i, j) - edge_len2).abs() < 1e-9;
    let n = coords.len();
    let mut faces = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if close(i, j) && close(j, k) && close(i, k) {
                    faces.push(orient_outward(coords, [i, j, k]));
                }
            }
        }
    }
    faces
}

pub fn octahedron() -> Result<Complex2D, ComplexError> {
    let coords = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    Complex2D::from_triangles(6, convex_hull_faces(&coords, 2.0))
}

pub fn icosahedron() -> Result<Complex2D, ComplexError> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut coords = Vec::with_capacity(12);
    for &s1 in &[1.0, -1.0] {
        for &s2 in &[1.0, -1.0] {
            coords.push([0.0, s1, s2 * phi]);
            coords.push([s1, s2 * phi, 0.0]);
            coords.push([s2 * phi, 0.0, s1]);
        }
    }
    Complex2D::from_triangles(12, convex_hull_faces(&coords, 4.0))
}

/// Removes triangle `ta` from `a` and `tb` from `b` and glues the two
/// boundary triangles with opposite orientations. Both complexes must have
/// edges determined by vertex pairs.
pub fn connected_sum(a: &Complex2D, ta: usize, b: &Complex2D, tb: usize) -> Result<Complex2D, ComplexError> {
    let [a0, a1, a2] = a.triangle(ta);
    let [b0, b1, b2] = b.triangle(tb);
    let mut map_b = vec![usize::MAX; b.n_vertices()];
    map_b[b0] = a0;
    map_b[b1] = a2;
    map_b[b2] = a1;
    let mut next = a.n_vertices();
    for slot in map_b.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    let mut triangles: Vec<[usize; 3]> = a
        .triangles()
        .iter()
        .enumerate()
        .filter(|(t, _)| *t != ta)
        .map(|(_, t)| *t)
        .collect();
    triangles.extend(
        b.triangles()
            .iter()
            .enumerate()
            .filter(|(t, _)| *t != tb)
            .map(|(_, t)| [map_b[t[0]], map_b[t[1]], map_b[t[2]]]),
    );
    Complex2D::from_triangles(next, triangles)
}

/// Genus-2 surface from two 3 x 3 lattice tori (15 vertices, 34 triangles).
pub fn double_torus() -> Result<Complex2D, ComplexError> {
    let t = lattice_torus(3, 3)?;
    let plain = Complex2D::from_triangles(t.n_vertices(), t.triangles().to_vec())?;
    connected_sum(&plain, 0, &plain, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octahedron_counts() {
        let c = octahedron().unwrap();
        assert_eq!((c.n_vertices(), c.n_triangles(), c.n_edges()), (6, 8, 12));
        for v in 0..6 {
            assert_eq!(c.vertex_star(v).unwrap().len(), 4);
        }
        assert_eq!(c.euler_characteristic(), 2);
    }

    #[test]
    fn small_torus_counts() {
        let c = lattice_torus(2, 2).unwrap();
        assert_eq!((c.n_vertices(), c.n_triangles(), c.n_edges()), (4, 8, 12));
        assert_eq!(c.euler_characteristic(), 0);
        assert!(!c.edges_determined_by_vertices());
        for v in 0..4 {
            assert_eq!(c.vertex_star(v).unwrap().len(), 6);
        }
    }

    #[test]
    fn doubled_triangle_is_a_sphere() {
        let c = Complex2D::from_triangles(3, vec![[0, 1, 2], [0, 2, 1]]).unwrap();
        assert_eq!(c.n_edges(), 3);
        assert!(c.edges().iter().all(|e| e.sides.len() == 2));
        assert_eq!(c.euler_characteristic(), 2);
        assert_eq!(c.vertex_star(0).unwrap().len(), 2);
        assert!(c.homology_generator_loops().unwrap().is_empty());
    }

    #[test]
    fn rejects_edge_in_three_triangles() {
        let err = Complex2D::from_triangles(5, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, ComplexError::NonManifold(_)), "{err:?}");
    }

    #[test]
    fn rejects_incoherent_orientation() {
        let err = Complex2D::from_triangles(4, vec![[0, 1, 2], [0, 1, 3]]).unwrap_err();
        assert!(matches!(err, ComplexError::IncoherentOrientation { .. }), "{err:?}");
    }

    #[test]
    fn rejects_pinched_vertex() {
        // two triangles meeting only at vertex 0
        let err = Complex2D::from_triangles(5, vec![[0, 1, 2], [0, 3, 4]]).unwrap_err();
        assert!(matches!(err, ComplexError::NonManifold(_)), "{err:?}");
    }

    #[test]
    fn star_of_boundary_vertex_is_an_error() {
        let c = disk_patch(3, 3).unwrap();
        assert_eq!(c.vertex_star(0).unwrap_err(), ComplexError::BoundaryVertex(0));
        assert_eq!(c.vertex_star(4).unwrap().len(), 6);
    }

    #[test]
    fn star_order_is_counter_clockwise_and_glued() {
        let c = icosahedron().unwrap();
        for v in 0..12 {
            let star = c.vertex_star(v).unwrap();
            assert_eq!(star.len(), 5);
            assert!(star.is_closed());
            let mut ts = star.triangles.clone();
            ts.sort_unstable();
            ts.dedup();
            assert_eq!(ts.len(), 5);
            assert_eq!(star.triangles[0], *ts.first().unwrap());
            // consecutive triangles share an edge through v
            for (i, &f) in star.faces.iter().enumerate().skip(1) {
                assert!(c.edge(f).ends.contains(&v), "face {i}");
            }
        }
    }

    #[test]
    fn colorings() {
        assert!(octahedron().unwrap().bipartite_coloring().is_some());
        assert!(icosahedron().unwrap().bipartite_coloring().is_none());
        let patch = disk_patch(4, 5).unwrap();
        let col = patch.bipartite_coloring().unwrap();
        assert_eq!(col, patch.coloring().unwrap());
    }

    #[test]
    fn homology_ranks() {
        assert!(octahedron().unwrap().homology_generator_loops().unwrap().is_empty());
        for (m, n) in [(2, 2), (3, 4), (6, 6)] {
            let loops = lattice_torus(m, n).unwrap().homology_generator_loops().unwrap();
            assert_eq!(loops.len(), 2);
            assert!(loops.iter().all(ThickPath::is_closed));
        }
        let g2 = double_torus().unwrap();
        assert_eq!(g2.euler_characteristic(), -2);
        assert_eq!(g2.homology_generator_loops().unwrap().len(), 4);
    }

    #[test]
    fn homology_requires_closed_surface() {
        let c = disk_patch(3, 3).unwrap();
        assert_eq!(c.homology_generator_loops().unwrap_err(), ComplexError::NotClosed);
    }

    #[test]
    fn surface_spec_parsing() {
        assert_eq!("torus:3x4".parse::<SurfaceSpec>().unwrap(), SurfaceSpec::Torus { m: 3, n: 4 });
        assert_eq!("octahedron".parse::<SurfaceSpec>().unwrap(), SurfaceSpec::Octahedron);
        assert!("klein".parse::<SurfaceSpec>().is_err());
    }

    #[test]
    fn thick_path_validation() {
        let c = octahedron().unwrap();
        let star = c.vertex_star(0).unwrap();
        let mut faces = star.faces.clone();
        faces[0] = faces[2];
        assert!(ThickPath::new(&c, star.triangles.clone(), faces).is_err());
        let t0 = star.triangles[0];
        let foreign = (0..c.n_edges()).find(|e| !c.triangle_edges(t0).contains(e)).unwrap();
        let mut faces = star.faces.clone();
        faces[0] = foreign;
        assert_eq!(
            ThickPath::new(&c, star.triangles.clone(), faces).unwrap_err(),
            ComplexError::SeedNotInFirstTriangle(foreign)
        );
    }
}
