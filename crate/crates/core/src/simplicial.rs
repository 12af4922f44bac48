//! Pure n-dimensional simplicial complexes, only as far as face gluing goes.

use std::collections::BTreeMap;

use crate::complex::{Complex2D, ComplexError};

/// `n`-simplices given as ordered `(n+1)`-tuples of vertices, glued along
/// their `(n-1)`-faces.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexN {
    dim: usize,
    n_vertices: usize,
    simplices: Vec<Vec<usize>>,
    /// `simplex_faces[s][k]` is the face of `s` opposite its local vertex `k`.
    simplex_faces: Vec<Vec<usize>>,
    face_simplices: Vec<Vec<usize>>,
}

impl ComplexN {
    /// Faces are identified by their vertex sets.
    pub fn new(n_vertices: usize, simplices: Vec<Vec<usize>>) -> Result<Self, ComplexError> {
        let keys: Vec<Vec<Vec<usize>>> = simplices
            .iter()
            .map(|s| {
                (0..s.len())
                    .map(|k| {
                        let mut f: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, &v)| v).collect();
                        f.sort_unstable();
                        f
                    })
                    .collect()
            })
            .collect();
        Self::from_keyed(n_vertices, simplices, keys)
    }

    /// Triangles of a surface with faces identified by edge ids, so multiple
    /// edges between the same vertices stay distinct.
    pub fn from_complex2d(c: &Complex2D) -> Self {
        let simplices = c.triangles().iter().map(|t| t.to_vec()).collect();
        // face opposite local k is side (k + 1) % 3
        let keys = (0..c.n_triangles())
            .map(|t| {
                let e = c.triangle_edges(t);
                (0..3).map(|k| e[(k + 1) % 3]).collect()
            })
            .collect();
        Self::from_keyed(c.n_vertices(), simplices, keys).expect("a valid surface is a valid 2-complex")
    }

    fn from_keyed<K: Ord + Clone>(
        n_vertices: usize,
        simplices: Vec<Vec<usize>>,
        keys: Vec<Vec<K>>,
    ) -> Result<Self, ComplexError> {
        let dim = simplices.first().map_or(0, |s| s.len().saturating_sub(1));
        if dim == 0 {
            return Err(ComplexError::InvalidSurface("need simplices of dimension at least 1".into()));
        }
        let mut ids: BTreeMap<K, usize> = BTreeMap::new();
        let mut face_simplices: Vec<Vec<usize>> = Vec::new();
        let mut simplex_faces = Vec::with_capacity(simplices.len());
        for (s, (simplex, key)) in simplices.iter().zip(&keys).enumerate() {
            if simplex.len() != dim + 1 {
                return Err(ComplexError::InvalidSurface(format!("simplex {s} has {} vertices", simplex.len())));
            }
            if let Some(&v) = simplex.iter().find(|&&v| v >= n_vertices) {
                return Err(ComplexError::VertexOutOfRange { vertex: v, count: n_vertices });
            }
            let mut sorted = simplex.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != simplex.len() {
                return Err(ComplexError::DegenerateTriangle(s));
            }
            let mut faces = Vec::with_capacity(dim + 1);
            for k in key {
                let next = ids.len();
                let id = *ids.entry(k.clone()).or_insert(next);
                if id == face_simplices.len() {
                    face_simplices.push(Vec::new());
                }
                face_simplices[id].push(s);
                if face_simplices[id].len() > 2 {
                    return Err(ComplexError::NonManifold(format!("face {id} lies in more than two simplices")));
                }
                faces.push(id);
            }
            simplex_faces.push(faces);
        }
        Ok(ComplexN { dim, n_vertices, simplices, simplex_faces, face_simplices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_simplices(&self) -> usize {
        self.simplices.len()
    }

    pub fn n_faces(&self) -> usize {
        self.face_simplices.len()
    }

    pub fn simplex(&self, s: usize) -> &[usize] {
        &self.simplices[s]
    }

    pub fn simplex_faces(&self, s: usize) -> &[usize] {
        &self.simplex_faces[s]
    }

    pub fn face_simplices(&self, f: usize) -> &[usize] {
        &self.face_simplices[f]
    }

    /// Local index of the vertex of `s` opposite face `f`.
    pub fn opposite_local(&self, s: usize, f: usize) -> Option<usize> {
        self.simplex_faces[s].iter().position(|&x| x == f)
    }
}

/// Two tetrahedra glued along one triangle.
pub fn two_tetrahedra() -> ComplexN {
    ComplexN::new(5, vec![vec![0, 1, 2, 3], vec![1, 0, 2, 4]]).expect("valid gluing")
}

/// `k` tetrahedra around the edge `0 1`, so the dual graph is a single cycle.
pub fn tetrahedra_ring(k: usize) -> Result<ComplexN, ComplexError> {
    let simplices = (0..k).map(|i| vec![0, 1, 2 + i, 2 + (i + 1) % k]).collect();
    ComplexN::new(k + 2, simplices)
}

/// The boundary of the `(n+1)`-simplex: `n + 2` copies of an `n`-simplex
/// forming a sphere whose dual graph is complete.
pub fn simplex_boundary(n: usize) -> ComplexN {
    let simplices = (0..n + 2)
        .map(|skip| (0..n + 2).filter(|&v| v != skip).collect())
        .collect();
    ComplexN::new(n + 2, simplices).expect("valid sphere")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::lattice_torus;

    #[test]
    fn counts() {
        let t = two_tetrahedra();
        assert_eq!((t.dim(), t.n_simplices(), t.n_faces()), (3, 2, 7));
        let s = simplex_boundary(3);
        assert_eq!((s.n_simplices(), s.n_faces()), (5, 10));
        assert!((0..s.n_faces()).all(|f| s.face_simplices(f).len() == 2));
        let r = tetrahedra_ring(4).unwrap();
        assert_eq!(r.n_simplices(), 4);
    }

    #[test]
    fn surface_faces_follow_edge_ids() {
        let c = lattice_torus(2, 2).unwrap();
        let n = ComplexN::from_complex2d(&c);
        assert_eq!(n.n_faces(), 12);
        assert!((0..n.n_faces()).all(|f| n.face_simplices(f).len() == 2));
    }
}
