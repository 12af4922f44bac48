//! A self-adjoint operator on a black-white torus factors through its black
//! triangles and through its white triangles; the two factors together form
//! an SL2 connection.

use std::sync::Arc;

use discrete_sl2::complex::{lattice_torus, Color};
use discrete_sl2::connection::{is_sl2, VERDICT_TOL};
use discrete_sl2::random;
use discrete_sl2::schrodinger::{combined_connection, factorize_bw, SelfAdjointOperator};
use rand::Rng;

pub fn run() -> anyhow::Result<()> {
    let mut rng = random::rng(3);
    let c = Arc::new(lattice_torus(6, 6)?);
    let offdiag = random::positive_vec(&mut rng, c.n_edges(), 1.0);
    let potential = (0..c.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let op = SelfAdjointOperator::new(c.clone(), offdiag, potential)?;

    let f = factorize_bw(&op)?;
    println!(
        "L = Qb+ Qb + Wb: residual {:.2e}; L = Qw+ Qw + Ww: residual {:.2e}",
        f.residual(&op, Color::Black),
        f.residual(&op, Color::White)
    );
    let conn = combined_connection(c, &f.black, &f.white)?;
    let report = is_sl2(&conn, VERDICT_TOL)?;
    println!("combined connection: {}", report.verdict);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
