//! Edge weights on a surface define a connection whose holonomies all have
//! determinant one. A generic connection fails the test at its vertices.

use std::sync::Arc;

use discrete_sl2::complex::{lattice_torus, octahedron};
use discrete_sl2::connection::{build_from_edge_weights, is_sl2, VERDICT_TOL};
use discrete_sl2::random;

pub fn run() -> anyhow::Result<()> {
    let mut rng = random::rng(1);
    for c in [octahedron()?, lattice_torus(5, 4)?] {
        let c = Arc::new(c);
        let weights = random::edge_weights(&mut rng, &c);
        let conn = build_from_edge_weights(c.clone(), &weights)?;
        let report = is_sl2(&conn, VERDICT_TOL)?;
        println!("edge-weight connection: {} ({} vertices, {} loops)", report.verdict, report.vertices.len(), report.loops.len());
        for l in &report.loops {
            println!("  loop through edge {}: {} triangles, det {:.15}", l.generator_edge, l.length, l.det);
        }

        // gauge transformations change coefficients, not the verdict
        let gauged = conn.gauge_transform(&random::gauge(&mut rng, &c))?;
        println!("after a random gauge: {}", is_sl2(&gauged, VERDICT_TOL)?.verdict);

        let generic = random::connection(&mut rng, c.clone());
        let report = is_sl2(&generic, VERDICT_TOL)?;
        println!("generic connection: {}, {} failing vertices", report.verdict, report.failing_vertices().count());
        let k = generic.vertex_curvature(0)?;
        println!("  vertex 0: mu from the star holonomy {:.12}, from rho {:.12}", k.mu_from_matrix, k.mu_from_rho);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
