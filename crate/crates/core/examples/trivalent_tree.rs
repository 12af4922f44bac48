//! Fourth order operators on a trivalent tree: factorization through a first
//! order operator (one free parameter) and the Laplace image.

use discrete_sl2::random;
use discrete_sl2::trivalent::{trivalent_factorize, trivalent_laplace, FirstOrder, Tree, TreeFactorization, TrivalentOperator};
use rand::Rng;

pub fn run() -> anyhow::Result<()> {
    let mut rng = random::rng(6);
    let tree = Tree::complete(4);
    let mut d: Vec<[f64; 2]> = tree.edges().iter().map(|_| [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)]).collect();
    for (e, &[p, q]) in tree.edges().iter().enumerate() {
        // leaf rows copy the coefficient from the other side
        if tree.is_leaf(p) {
            d[e][0] = d[e][1];
        }
        if tree.is_leaf(q) {
            d[e][1] = d[e][0];
        }
    }
    let v = (0..tree.n_vertices()).map(|_| rng.gen_range(0.5..1.5)).collect();
    let u = (0..tree.n_vertices()).map(|_| rng.gen_range(0.5..2.0)).collect();
    let op = TrivalentOperator::from_factorization(&tree, &TreeFactorization { q: FirstOrder { d, v }, u });
    println!("tree with {} vertices and {} distance-two pairs", tree.n_vertices(), op.a.len());

    for v0 in [1.0, 2.0] {
        let f = trivalent_factorize(&op, 0, v0)?;
        let again = TrivalentOperator::from_factorization(&tree, &f);
        println!("v0 = {v0}: reassembly error {:.2e}, u(0) = {:.4}", (again.to_dense() - op.to_dense()).abs().max(), f.u[0]);
    }

    let f = trivalent_factorize(&op, 0, 1.0)?;
    let image = trivalent_laplace(&tree, &f)?;
    let psi: Vec<f64> = (0..tree.n_vertices()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let lhs = image.apply(&f.q.apply(&tree, &psi));
    let scaled: Vec<f64> = op.apply(&psi).iter().zip(&f.u).map(|(x, u)| x / u).collect();
    let rhs = f.q.apply(&tree, &scaled);
    let gap = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("image intertwines with Q up to {gap:.2e}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run()
}
