use serde::Serialize;

use super::{Connection, ConnectionError};

/// Classification of a connection on a closed surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sl2Verdict {
    /// Locally and globally SL2 with trivial parity: the triangles admit a
    /// black/white coloring and every generator loop has determinant `+1`.
    #[serde(rename = "SL2")]
    Sl2,
    /// Locally and globally SL2 up to sign.
    #[serde(rename = "SL2+-")]
    Sl2Pm,
    #[serde(rename = "not SL2")]
    NotSl2,
}

impl std::fmt::Display for Sl2Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sl2Verdict::Sl2 => "SL2",
            Sl2Verdict::Sl2Pm => "SL2+-",
            Sl2Verdict::NotSl2 => "not SL2",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexCheck {
    pub vertex: usize,
    /// Abelian curvature as a product of `rho` around the star.
    pub mu: f64,
    /// The same number read off the diagonal of the star holonomy.
    pub mu_from_matrix: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopCheck {
    pub generator_edge: usize,
    pub length: usize,
    pub det: f64,
    pub det_sign: i8,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sl2Report {
    pub verdict: Sl2Verdict,
    pub locally_sl2: bool,
    pub globally_sl2: bool,
    pub bipartite: bool,
    pub tol: f64,
    pub vertices: Vec<VertexCheck>,
    pub loops: Vec<LoopCheck>,
}

impl Sl2Report {
    pub fn is_sl2_pm(&self) -> bool {
        self.locally_sl2 && self.globally_sl2
    }

    pub fn failing_vertices(&self) -> impl Iterator<Item = &VertexCheck> {
        self.vertices.iter().filter(|v| !v.ok)
    }
}

/// Checks `mu_P = 1` at every interior vertex and `|det| = 1` along every
/// homology generator loop, both within relative tolerance `tol`.
pub fn is_sl2(conn: &Connection, tol: f64) -> Result<Sl2Report, ConnectionError> {
    let c = conn.complex();
    let mut vertices = Vec::new();
    for v in (0..c.n_vertices()).filter(|&v| c.is_interior_vertex(v)) {
        let curvature = conn.vertex_curvature(v)?;
        let mu = curvature.mu_from_rho;
        vertices.push(VertexCheck {
            vertex: v,
            mu,
            mu_from_matrix: curvature.mu_from_matrix,
            ok: (mu - 1.0).abs() <= tol,
        });
    }
    let mut loops = Vec::new();
    if c.is_closed() {
        let basis = c.homology_basis()?;
        for (g, path) in basis.generator_edges.iter().zip(&basis.thick_loops) {
            let k = conn.thick_holonomy(path)?;
            let abs_det = k.log_abs_det().exp();
            loops.push(LoopCheck {
                generator_edge: *g,
                length: path.len(),
                det: k.det(),
                det_sign: if k.det_sign() < 0.0 { -1 } else { 1 },
                ok: (abs_det - 1.0).abs() <= tol,
            });
        }
    }
    let locally_sl2 = vertices.iter().all(|v| v.ok);
    let globally_sl2 = loops.iter().all(|l| l.ok);
    let bipartite = c.bipartite_coloring().is_some();
    let verdict = if !(locally_sl2 && globally_sl2) {
        Sl2Verdict::NotSl2
    } else if bipartite && loops.iter().all(|l| l.det_sign > 0) {
        Sl2Verdict::Sl2
    } else {
        Sl2Verdict::Sl2Pm
    };
    Ok(Sl2Report { verdict, locally_sl2, globally_sl2, bipartite, tol, vertices, loops })
}
