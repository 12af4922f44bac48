//! Repeated Laplace transformations of a square-lattice operator. The
//! potentials of the chain satisfy the discrete Toda equation; its scaled
//! form and the period-two reduction are checked as well. Perturbations of
//! the constant solution grow quickly along the chain, and the residual,
//! being a product of four layers, grows with them.

use discrete_sl2::hyperbolic::HyperbolicOperator;
use discrete_sl2::random;
use discrete_sl2::toda::{cyclic2_from_boundary, cyclic2_residual, evolve_chain, toda_residual, toda_to_hirota_form};

pub fn run() -> anyhow::Result<()> {
    let mut rng = random::rng(5);
    let mut near_one = || random::field(&mut rng, 8, 8, 0.99, 1.01);
    let h = HyperbolicOperator::new(near_one(), near_one(), near_one())?;
    let ev = evolve_chain(&h, 4)?;
    for k in ev.stack.interior() {
        let r = toda_residual(&ev.stack, k)?.max_abs();
        let scaled = toda_to_hirota_form(&ev.stack, k, 0.5)?.max_abs();
        let size = ev.stack.layer(k + 1)?.max_abs();
        println!("layer {k}: Toda residual {r:.2e}, kappa = 1/2 form {scaled:.2e}, next layer max |w| {size:.2e}");
    }

    let row = [1.0, 1.3, 0.8, 1.1, 0.9, 1.2];
    let col = [1.0, 0.7, 1.4, 1.0, 1.1, 0.8];
    let (a, b) = cyclic2_from_boundary(2.0, &row, &col)?;
    let r = cyclic2_residual(&a, &b)?;
    println!("period two with a b = 2: G residual {:.2e}, system residual {:.2e}", r.g.max_abs(), r.system.max_abs());
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
