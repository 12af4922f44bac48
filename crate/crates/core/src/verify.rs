//! The property suite behind `dsl2 verify all`. Every check draws its random
//! instances from its own seeded stream, so a report depends only on the seed.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::complex::{double_torus, icosahedron, lattice_torus, octahedron, Complex2D};
use crate::connection::{
    build_from_edge_weights, is_sl2, reconstruct_edge_weights, sl_n_face_balance, Connection, RhoData,
    SimplexConnection, Sl2Verdict,
};
use crate::electric::{
    black_factorization, dirichlet_solve, laplace_image, star_triangle_single, ElectricNetwork,
};
use crate::equilateral::{equilateral_connection, EquilateralOperator};
use crate::hyperbolic::{laplace_invariant_update, HyperbolicOperator};
use crate::lattice::LatticeField;
use crate::random;
use crate::schrodinger::{combined_connection, factorize_bw, SelfAdjointOperator};
use crate::simplicial::two_tetrahedra;
use crate::toda::{
    cyclic2_from_boundary, cyclic2_residual, evolve_chain, hirota_residual, toda_residual, toda_to_hirota_form,
    TodaStack,
};
use crate::trivalent::{trivalent_factorize, FirstOrder, Tree, TreeFactorization, TrivalentOperator};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    /// Largest residual seen, compared against `tol`.
    pub worst: f64,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

pub fn verify_all(seed: u64) -> VerifyReport {
    let checks = vec![
        edge_weight_sl2(seed),
        cocycle(seed),
        star_curvature(seed),
        black_white(seed),
        equilateral_directions(seed),
        toda_chain(seed),
        hirota_forms(seed),
        cyclic_period_two(seed),
        trivalent_round_trip(seed),
        face_balance(seed),
        network_factorization(seed),
        network_kernel(seed),
    ];
    VerifyReport { seed, passed: checks.iter().all(|c| c.passed), checks }
}

fn stream(seed: u64, id: u32) -> rand_chacha::ChaCha8Rng {
    random::rng(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(u64::from(id)))
}

fn check(id: u32, name: &'static str, cases: usize, worst: f64, tol: f64, ok: bool, note: Option<String>) -> Check {
    Check { id, name, passed: ok && worst < tol, cases, worst, tol, note }
}

fn closed_bipartite(i: usize) -> Complex2D {
    let sizes = [(3, 3), (4, 6), (6, 6), (8, 5), (12, 12)];
    match i % 6 {
        0 => octahedron(),
        k => {
            let (m, n) = sizes[k - 1];
            lattice_torus(m, n)
        }
    }
    .expect("valid surface")
}

fn edge_weight_sl2(seed: u64) -> Check {
    let mut rng = stream(seed, 1);
    let (mut worst, mut ok) = (0.0f64, true);
    for i in 0..100 {
        let c = Arc::new(closed_bipartite(i));
        let w = random::edge_weights(&mut rng, &c);
        let conn = build_from_edge_weights(c.clone(), &w).expect("positive weights");
        let report = is_sl2(&conn, 1e-10).expect("closed surface");
        ok &= report.verdict == Sl2Verdict::Sl2;
        for l in &report.loops {
            worst = worst.max((l.det.abs() - 1.0).abs());
        }
        let back = reconstruct_edge_weights(&conn, 0, w.values[0], 1e-10).expect("sl2 connection");
        let rebuilt = build_from_edge_weights(c, &back).expect("positive weights");
        worst = worst.max(conn.max_mu_gap(&rebuilt));
    }
    check(1, "edge weights give SL2 connections; reconstruction round trip", 100, worst, 1e-10, ok, None)
}

fn closed_surfaces() -> Vec<Arc<Complex2D>> {
    [octahedron(), icosahedron(), lattice_torus(4, 5), double_torus()]
        .into_iter()
        .map(|c| Arc::new(c.expect("valid surface")))
        .collect()
}

fn cocycle(seed: u64) -> Check {
    let mut rng = stream(seed, 2);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for c in closed_surfaces() {
        for _ in 0..25 {
            let conn = random::connection(&mut rng, c.clone());
            let rho = RhoData::from_connection(&conn).expect("closed surface");
            worst = worst.max(rho.log_cocycle_defect().exp_m1().abs());
            cases += 1;
        }
    }
    check(2, "product of rho over all triangles is one", cases, worst, 1e-10, true, None)
}

fn star_curvature(seed: u64) -> Check {
    let mut rng = stream(seed, 3);
    let surfaces = closed_surfaces();
    let mut worst = 0.0f64;
    for i in 0..100 {
        let c = surfaces[i % surfaces.len()].clone();
        let conn = random::connection(&mut rng, c.clone());
        for v in 0..c.n_vertices() {
            let k = conn.vertex_curvature(v).expect("interior vertex");
            worst = worst.max((k.mu_from_matrix / k.mu_from_rho - 1.0).abs());
        }
    }
    check(3, "star holonomy diagonal ratio equals the rho product", 100, worst, 1e-10, true, None)
}

fn black_white(seed: u64) -> Check {
    let mut rng = stream(seed, 4);
    let (mut worst, mut ok) = (0.0f64, true);
    for i in 0..100 {
        let c = Arc::new(closed_bipartite(i % 5));
        let offdiag = random::positive_vec(&mut rng, c.n_edges(), 1.0);
        let potential = (0..c.n_vertices()).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let op = SelfAdjointOperator::new(c.clone(), offdiag, potential).expect("valid operator");
        let f = factorize_bw(&op).expect("bipartite closed surface");
        let conn = combined_connection(c, &f.black, &f.white).expect("partition");
        let report = is_sl2(&conn, 1e-10).expect("closed surface");
        ok &= report.verdict == Sl2Verdict::Sl2;
        worst = worst.max(report.loops.iter().map(|l| (l.det - 1.0).abs()).fold(0.0, f64::max));
    }
    check(4, "black and white factors combine into an SL2 connection", 100, worst, 1e-10, ok, None)
}

pub fn random_equilateral<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> EquilateralOperator {
    let a = random::field(rng, rows, cols, 9.0, 11.0);
    let b = random::field(rng, rows, cols, 0.5, 2.0);
    let c = random::field(rng, rows, cols, 0.5, 2.0);
    let d = random::field(rng, rows, cols, 0.5, 2.0);
    EquilateralOperator::new(a, b, c, d).expect("positive couplings")
}

fn equilateral_directions(seed: u64) -> Check {
    let mut rng = stream(seed, 5);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let op = random_equilateral(&mut rng, 8, 8);
        let reference = equilateral_connection(&op, 0, 1).expect("valid operator");
        for black in [0, 2, 4] {
            for white in [1, 3, 5] {
                let conn = equilateral_connection(&op, black, white).expect("valid operator");
                worst = worst.max(reference.max_mu_gap(&conn));
            }
        }
    }
    check(5, "all six direction factorizations give the same mu ratios", 10, worst, 1e-12, true, None)
}

fn near_constant<R: Rng>(rng: &mut R, rows: usize, cols: usize, center: f64, eps: f64) -> LatticeField {
    random::field(rng, rows, cols, center - eps, center + eps)
}

fn toda_chain(seed: u64) -> Check {
    let mut rng = stream(seed, 6);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = HyperbolicOperator::new(
            near_constant(&mut rng, 8, 8, 1.0, 0.01),
            near_constant(&mut rng, 8, 8, 1.0, 0.01),
            near_constant(&mut rng, 8, 8, 1.0, 0.01),
        )
        .expect("valid operator");
        let ev = evolve_chain(&h, 4).expect("nondegenerate chain");
        worst = worst.max(ev.stack.max_residual().expect("interior layers"));
        for pair in ev.operators.windows(2) {
            let (hh, w) = pair[0].invariants();
            let (h_next, w_next) = laplace_invariant_update(&hh, &w).expect("nonzero potential");
            let (h_op, w_op) = pair[1].invariants();
            worst = worst.max(h_next.max_abs_diff(&h_op)).max(w_next.max_abs_diff(&w_op));
        }
    }
    check(6, "Laplace chains satisfy the Toda equation; invariant update commutes", 20, worst, 1e-10, true, None)
}

fn hirota_forms(seed: u64) -> Check {
    let mut rng = stream(seed, 7);
    let mut worst = 0.0f64;
    let h = HyperbolicOperator::new(
        near_constant(&mut rng, 8, 8, 1.0, 0.1),
        near_constant(&mut rng, 8, 8, 1.0, 0.1),
        near_constant(&mut rng, 8, 8, 1.0, 0.1),
    )
    .expect("valid operator");
    let ev = evolve_chain(&h, 4).expect("nondegenerate chain");
    for k in ev.stack.interior() {
        let plain = toda_residual(&ev.stack, k).expect("interior layer");
        let scaled = toda_to_hirota_form(&ev.stack, k, 1.0).expect("nonzero kappa");
        worst = worst.max(plain.max_abs_diff(&scaled));
    }
    let alpha = rng.gen_range(-2.0..2.0);
    let beta = rng.gen_range(-2.0..2.0);
    let gamma = -(alpha + beta);
    for lambda in [1.0, 2.0, 0.5] {
        let layers = (0..4).map(|k| LatticeField::constant(5, 5, f64::powi(lambda, k))).collect();
        let f = TodaStack::new(0, layers).expect("same shape");
        for k in f.interior() {
            let r = hirota_residual(&f, k, alpha, beta, gamma).expect("coefficients sum to zero");
            worst = worst.max(r.max_abs());
        }
    }
    check(7, "kappa form equals the Toda residual; Hirota null solutions", 4, worst, 1e-12, true, None)
}

fn cyclic_period_two(seed: u64) -> Check {
    let mut rng = stream(seed, 8);
    let one = LatticeField::constant(6, 6, 1.0);
    let r = cyclic2_residual(&one, &one).expect("same shape");
    let mut worst = r.g.max_abs().max(r.system.max_abs());
    for _ in 0..10 {
        let c = rng.gen_range(0.5..2.0);
        let row: Vec<f64> = (0..6).map(|_| rng.gen_range(0.5..2.0)).collect();
        let col: Vec<f64> = (0..6).map(|_| rng.gen_range(0.5..2.0)).collect();
        let (a, b) = cyclic2_from_boundary(c, &row, &col).expect("positive boundary data");
        let r = cyclic2_residual(&a, &b).expect("same shape");
        let scale = b.max_abs().max(1.0).powi(4);
        worst = worst.max(r.g.max_abs()).max(r.system.max_abs() / scale);
        let stack = TodaStack::new(0, vec![a.clone(), b.clone(), a, b]).expect("same shape");
        let toda = stack.max_residual().expect("interior layers");
        worst = worst.max(toda / scale);
    }
    check(8, "period-two reduction", 11, worst, 1e-12, true, None)
}

fn random_tree_factorization<R: Rng>(rng: &mut R, tree: &Tree) -> TreeFactorization {
    let mut d: Vec<[f64; 2]> = tree.edges().iter().map(|_| [random::positive(rng, 0.7), random::positive(rng, 0.7)]).collect();
    for (e, &[p, q]) in tree.edges().iter().enumerate() {
        if tree.is_leaf(p) {
            d[e][0] = d[e][1];
        }
        if tree.is_leaf(q) {
            d[e][1] = d[e][0];
        }
    }
    let v = (0..tree.n_vertices()).map(|_| rng.gen_range(0.5..1.5)).collect();
    let u = (0..tree.n_vertices()).map(|_| rng.gen_range(0.5..2.0)).collect();
    TreeFactorization { q: FirstOrder { d, v }, u }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn trivalent_round_trip(seed: u64) -> Check {
    let mut rng = stream(seed, 9);
    let tree = Tree::complete(3);
    let (mut worst, mut distinct) = (0.0f64, true);
    for _ in 0..20 {
        let f = random_tree_factorization(&mut rng, &tree);
        let op = TrivalentOperator::from_factorization(&tree, &f);
        let back = trivalent_factorize(&op, 0, f.q.v[0]).expect("positive a");
        worst = worst.max(max_diff(&back.u, &f.u)).max(max_diff(&back.q.v, &f.q.v));
        let f1 = trivalent_factorize(&op, 0, 1.0).expect("positive a");
        let f2 = trivalent_factorize(&op, 0, 2.0).expect("positive a");
        for g in [&f1, &f2] {
            let again = TrivalentOperator::from_factorization(&tree, g);
            worst = worst.max((again.to_dense() - op.to_dense()).abs().max());
        }
        distinct &= max_diff(&f1.q.v, &f2.q.v) > 0.5;
    }
    check(9, "trivalent tree factorization round trip and one-parameter family", 20, worst, 1e-12, distinct, None)
}

fn face_balance(seed: u64) -> Check {
    let mut rng = stream(seed, 10);
    let surfaces = closed_surfaces();
    let mut agree = true;
    for i in 0..100 {
        let c = surfaces[i % surfaces.len()].clone();
        let conn = if i % 2 == 0 {
            random::connection(&mut rng, c.clone())
        } else {
            let w = random::edge_weights(&mut rng, &c);
            let g = random::gauge(&mut rng, &c);
            build_from_edge_weights(c.clone(), &w).and_then(|x| x.gauge_transform(&g)).expect("positive data")
        };
        let sl2 = is_sl2(&conn, 1e-10).expect("closed surface").is_sl2_pm();
        let balanced = sl_n_face_balance(&SimplexConnection::from_connection(&conn), 1e-10).is_some();
        agree &= sl2 == balanced;
    }
    let mut worst = 0.0f64;
    let torus = Arc::new(lattice_torus(4, 4).expect("valid torus"));
    let canonical2 = SimplexConnection::from_connection(&Connection::canonical(torus));
    let canonical3 = SimplexConnection::canonical(Arc::new(two_tetrahedra()));
    for conn in [canonical2, canonical3] {
        match sl_n_face_balance(&conn, 1e-12) {
            Some(f) => worst = worst.max(f.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)),
            None => worst = f64::INFINITY,
        }
    }
    check(10, "face balance solvable exactly for SL2 connections", 102, worst, 1e-12, agree, None)
}

fn random_network<R: Rng>(rng: &mut R, i: usize) -> ElectricNetwork {
    let c = if i.is_multiple_of(2) { octahedron() } else { lattice_torus(4, 4) }.expect("valid surface");
    ElectricNetwork::from_black_triangles(&c, random::positive_vec(rng, c.n_edges(), 1.0)).expect("black triangles")
}

fn network_factorization(seed: u64) -> Check {
    let mut rng = stream(seed, 11);
    let exact = star_triangle_single([1.0; 3]) == Ok([3.0; 3])
        && star_triangle_single([1.0, 2.0, 3.0]) == Ok([11.0, 5.5, 11.0 / 3.0]);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let net = random_network(&mut rng, i);
        let f = black_factorization(&net).expect("black triangles");
        worst = worst.max(f.residual);
        for (tri, (star, sigma)) in f.triangles.iter().zip(f.star.iter().zip(&f.sigma)) {
            for k in 0..3 {
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                let e = net
                    .edges()
                    .iter()
                    .position(|&[p, q]| [p, q] == [tri[i], tri[j]] || [q, p] == [tri[i], tri[j]])
                    .expect("triangle side is an edge");
                let c = net.conductivity()[e];
                worst = worst.max((star[i] * star[j] / sigma - c).abs() / c);
            }
        }
    }
    check(11, "black triangle factorization of the network Laplacian", 100, worst, 1e-12, exact, None)
}

fn network_kernel(seed: u64) -> Check {
    let mut rng = stream(seed, 12);
    let mut worst = 0.0f64;
    let mut verified = Vec::new();
    for _ in 0..20 {
        let net = random_network(&mut rng, 0);
        // +x and +y are held fixed; the rest solve LU = 0
        let fixed = [(0, rng.gen_range(-1.0..1.0)), (2, rng.gen_range(-1.0..1.0))];
        let u = dirichlet_solve(&net, &fixed).expect("connected network");
        match laplace_image(&net, &u, &[1, 3, 4, 5], 1e-10) {
            Ok(img) => {
                worst = worst.max(img.kernel_residual);
                verified.push(img.verified);
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    let consistent = verified.windows(2).all(|w| w[0] == w[1]);
    let note = verified.first().map(|n| format!("verified {n}"));
    check(12, "kernel vectors transported by the star-triangle image", 20, worst, 1e-10, consistent, note)
}
