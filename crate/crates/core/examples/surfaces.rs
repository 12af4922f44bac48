//! Builds the test surfaces and prints their combinatorics: Euler
//! characteristic, vertex stars, black-white colorability and the number of
//! homology generator loops.

use discrete_sl2::complex::{build_surface, SurfaceSpec};

pub fn run() -> anyhow::Result<()> {
    for spec in ["octahedron", "icosahedron", "torus:4x6", "disk:3x4", "double-torus"] {
        let c = build_surface(&spec.parse::<SurfaceSpec>()?)?;
        let star_sizes: Vec<usize> = (0..c.n_vertices())
            .filter(|&v| c.is_interior_vertex(v))
            .map(|v| c.vertex_star(v).map(|s| s.len()))
            .collect::<Result<_, _>>()?;
        let loops = if c.is_closed() { c.homology_basis()?.generator_edges.len() } else { 0 };
        println!(
            "{spec:>13}: V={:<3} E={:<3} T={:<3} chi={:<3} colorable={:<5} loops={loops} star sizes {:?}..{:?}",
            c.n_vertices(),
            c.n_edges(),
            c.n_triangles(),
            c.euler_characteristic(),
            c.bipartite_coloring().is_some(),
            star_sizes.iter().min(),
            star_sizes.iter().max(),
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
