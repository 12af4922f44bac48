//! Face balance: a positive function on top simplices equalizing the face
//! products across every interior face. On surfaces it exists exactly for SL2
//! connections; two glued tetrahedra always admit one, a ring of tetrahedra
//! generally does not.

use std::sync::Arc;

use discrete_sl2::complex::lattice_torus;
use discrete_sl2::connection::{build_from_edge_weights, face_balance_cycle_residual, sl_n_face_balance, SimplexConnection};
use discrete_sl2::random;
use discrete_sl2::simplicial::{tetrahedra_ring, two_tetrahedra};

pub fn run() -> anyhow::Result<()> {
    let mut rng = random::rng(8);
    let c = Arc::new(lattice_torus(4, 4)?);
    let sl2 = build_from_edge_weights(c.clone(), &random::edge_weights(&mut rng, &c))?;
    let generic = random::connection(&mut rng, c);
    for (name, conn) in [("edge-weight", &sl2), ("generic", &generic)] {
        let s = SimplexConnection::from_connection(conn);
        println!("{name} connection on the torus: balanced {}", sl_n_face_balance(&s, 1e-10).is_some());
    }

    for (name, complex) in [("two tetrahedra", two_tetrahedra()), ("ring of 5 tetrahedra", tetrahedra_ring(5)?)] {
        let complex = Arc::new(complex);
        let coeffs = (0..complex.n_simplices()).map(|_| random::positive_vec(&mut rng, 4, 1.0)).collect();
        let s = SimplexConnection::new(complex, coeffs)?;
        println!("{name}: cycle residual {:.2e}", face_balance_cycle_residual(&s));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
