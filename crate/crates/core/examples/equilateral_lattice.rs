//! On the periodic equilateral lattice an operator factors in six directions.
//! The resulting connections agree, and a gauge brings the potential to a
//! constant so that the Laplace transformation applies.

use discrete_sl2::equilateral::{equilateral_connection, equilateral_factorize, equilateral_laplace};
use discrete_sl2::random;
use discrete_sl2::verify::random_equilateral;

pub fn run() -> anyhow::Result<()> {
    let mut rng = random::rng(4);
    let op = random_equilateral(&mut rng, 8, 8);
    for j in 0..6 {
        let f = equilateral_factorize(&op, j)?;
        let back = f.reassemble()?;
        println!("direction {j}: reassembly error {:.2e}, min potential {:.3}", back.a.max_abs_diff(&op.a), f.potential.min());
    }
    let reference = equilateral_connection(&op, 0, 1)?;
    let other = equilateral_connection(&op, 4, 3)?;
    println!("mu ratios from directions (0, 1) and (4, 3) differ by {:.2e}", reference.max_mu_gap(&other));

    let image = equilateral_laplace(&op, 0, 1.0, 1e-12)?;
    println!(
        "Laplace image in direction 0 after {} gauge steps: a ranges over [{:.3}, {:.3}]",
        image.iterations,
        image.operator.a.min(),
        image.operator.a.max_abs()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
