mod common;

use std::sync::Arc;

use proptest::prelude::*;

use discrete_sl2::complex::{icosahedron, lattice_torus, octahedron, Complex2D, FramedPath, ThickPath};
use discrete_sl2::connection::{
    build_from_edge_weights, framed_generator_values, is_sl2, reconstruct_connection_from_invariants,
    reconstruct_edge_weights, sl_n_face_balance, Connection, ConnectionError, EdgeWeights, GaugePair, RhoData,
    SimplexConnection, Sl2Verdict,
};
use discrete_sl2::random;
use discrete_sl2::simplicial::{tetrahedra_ring, two_tetrahedra};

use common::*;

fn oct() -> Arc<Complex2D> {
    Arc::new(octahedron().unwrap())
}

fn torus(m: usize, n: usize) -> Arc<Complex2D> {
    Arc::new(lattice_torus(m, n).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a / b - 1.0).abs() < tol
}

#[test]
fn identity_gauge_changes_nothing() {
    let mut rng = random::rng(1);
    let conn = random::connection(&mut rng, oct());
    assert_eq!(conn.gauge_transform(&GaugePair::identity(conn.complex())).unwrap(), conn);
}

#[test]
fn constant_triangle_gauge() {
    let c = oct();
    let g = GaugePair { triangle: vec![2.0; c.n_triangles()], vertex: vec![1.0; c.n_vertices()] };
    let conn = Connection::canonical(c.clone()).gauge_transform(&g).unwrap();
    assert!(conn.coeffs().iter().flatten().all(|&u| u == 2.0));
    for t in 0..c.n_triangles() {
        let [p, q, _] = c.triangle(t);
        assert_eq!(conn.mu_ratio(t, p, q).unwrap(), 1.0);
    }
}

#[test]
fn mu_ratio_values() {
    let c = oct();
    let mut coeffs = vec![[1.0; 3]; c.n_triangles()];
    coeffs[0] = [2.0, 4.0, 1.0];
    let conn = Connection::new(c.clone(), coeffs).unwrap();
    let [p, q, r] = c.triangle(0);
    assert_eq!(conn.mu_ratio(0, p, q).unwrap(), 0.5);
    let cyclic = conn.mu_ratio(0, p, q).unwrap() * conn.mu_ratio(0, q, r).unwrap() * conn.mu_ratio(0, r, p).unwrap();
    assert_eq!(cyclic, 1.0);
    let outside = (0..6).find(|v| !c.triangle(0).contains(v)).unwrap();
    assert!(matches!(conn.mu_ratio(0, p, outside), Err(ConnectionError::VertexNotInTriangle { .. })));
}

#[test]
fn rho_from_edge_weights_is_a_square_ratio() {
    let mut rng = random::rng(2);
    let c = torus(4, 4);
    let conn = build_from_edge_weights(c.clone(), &random::edge_weights(&mut rng, &c)).unwrap();
    for (e, edge) in c.edges().iter().enumerate() {
        let p = edge.ends[0];
        let side = c.positive_side(e, p).unwrap();
        let t2 = c.across(e, side.triangle).unwrap();
        let expected = (u_at(&conn, side.triangle, p) / u_at(&conn, t2, p)).powi(2);
        assert!(close(conn.rho_edge(e, p).unwrap(), expected, 1e-12));
    }
}

#[test]
fn canonical_invariants_are_trivial() {
    let c = torus(3, 3);
    let conn = Connection::canonical(c.clone());
    assert!((0..c.n_edges()).all(|e| conn.rho_edge(e, c.edge(e).ends[0]).unwrap() == 1.0));
    assert!((0..c.n_triangles()).all(|t| conn.rho_triangle(t).unwrap() == 1.0));
    let path = FramedPath::along_edges(&c, 0, &[c.vertex_star(0).unwrap().faces[1]]).unwrap();
    assert_eq!(conn.framed_holonomy(&path).unwrap(), 1.0);
    assert_eq!(conn.framed_holonomy(&FramedPath::new(&c, vec![], vec![]).unwrap()).unwrap(), 1.0);
    for v in 0..c.n_vertices() {
        assert_eq!(conn.vertex_curvature(v).unwrap().mu_from_rho, 1.0);
        let star = c.vertex_star(v).unwrap();
        assert!((conn.thick_holonomy(&star).unwrap().det() - 1.0).abs() < 1e-12);
    }
    let id = conn.thick_holonomy(&ThickPath::empty(0)).unwrap();
    assert_eq!(id.to_matrix(), [[1.0, 0.0], [0.0, 1.0]]);
}

#[test]
fn rho_triangle_by_hand() {
    let mut rng = random::rng(3);
    let c = oct();
    let conn = random::connection(&mut rng, c.clone());
    for t in 0..c.n_triangles() {
        let tri = c.triangle(t);
        let te = c.triangle_edges(t);
        let hand: f64 = (0..3).map(|k| rho(&conn, te[k], tri[k], t)).product();
        assert!(close(conn.rho_triangle(t).unwrap(), hand, 1e-12));
    }
}

#[test]
fn curvature_on_octahedron_by_hand() {
    let mut rng = random::rng(4);
    let c = oct();
    let conn = random::connection(&mut rng, c.clone());
    for v in 0..6 {
        let k = conn.vertex_curvature(v).unwrap();
        let hand = star_rho(&conn, &c.vertex_star(v).unwrap(), v);
        assert!(close(k.mu_from_rho, hand, 1e-12));
        assert!(close(k.mu_from_matrix, hand, 1e-10));
    }
}

#[test]
fn build_from_weights_single_triangle() {
    let c = Arc::new(Complex2D::from_triangles(3, vec![[0, 1, 2], [0, 2, 1]]).unwrap());
    let mut values = vec![0.0; 3];
    values[c.edge_between(0, 1).unwrap()] = 1.0;
    values[c.edge_between(1, 2).unwrap()] = 4.0;
    values[c.edge_between(2, 0).unwrap()] = 9.0;
    let conn = build_from_edge_weights(c, &EdgeWeights { values }).unwrap();
    let u = conn.coeffs()[0];
    for (x, y) in u.iter().zip([1.5, 2.0 / 3.0, 6.0]) {
        assert!((x - y).abs() < 1e-15);
    }
    let canon = build_from_edge_weights(oct(), &EdgeWeights::constant(&oct(), 1.0)).unwrap();
    assert_eq!(canon, Connection::canonical(oct()));
    let bad = EdgeWeights { values: vec![-1.0; 12] };
    assert!(matches!(build_from_edge_weights(oct(), &bad), Err(ConnectionError::NonPositiveWeight { .. })));
}

#[test]
fn sl2_verdicts() {
    let report = is_sl2(&Connection::canonical(oct()), 1e-10).unwrap();
    assert_eq!(report.verdict, Sl2Verdict::Sl2);
    assert!(report.locally_sl2 && report.globally_sl2);
    let mut rng = random::rng(5);
    let c = torus(5, 4);
    let conn = build_from_edge_weights(c.clone(), &random::edge_weights(&mut rng, &c)).unwrap();
    assert!(is_sl2(&conn, 1e-10).unwrap().is_sl2_pm());
    let generic = random::connection(&mut rng, c);
    let r = is_sl2(&generic, 1e-10).unwrap();
    assert_eq!(r.verdict, Sl2Verdict::NotSl2);
    assert!(!r.locally_sl2);
    for v in &r.vertices {
        assert!(close(v.mu, v.mu_from_matrix, 1e-10));
    }
}

#[test]
fn icosahedron_edge_weights_are_only_sl2_pm() {
    let mut rng = random::rng(6);
    let c = Arc::new(icosahedron().unwrap());
    let conn = build_from_edge_weights(c.clone(), &random::edge_weights(&mut rng, &c)).unwrap();
    let r = is_sl2(&conn, 1e-10).unwrap();
    assert!(r.is_sl2_pm() && !r.bipartite);
    assert_eq!(r.verdict, Sl2Verdict::Sl2Pm);
}

#[test]
fn reconstruction_recovers_weights() {
    let mut rng = random::rng(7);
    let c = torus(4, 6);
    let w = random::edge_weights(&mut rng, &c);
    let conn = build_from_edge_weights(c.clone(), &w).unwrap();
    let back = reconstruct_edge_weights(&conn, 0, w.values[0], 1e-10).unwrap();
    for (a, b) in back.values.iter().zip(&w.values) {
        assert!(close(*a, *b, 1e-10));
    }
    let canon = reconstruct_edge_weights(&Connection::canonical(c.clone()), 0, 1.0, 1e-10).unwrap();
    assert!(canon.values.iter().all(|&x| (x - 1.0).abs() < 1e-14));
}

#[test]
fn rescaled_seed_stays_in_the_gauge_class() {
    let mut rng = random::rng(8);
    let c = torus(4, 4);
    let w = random::edge_weights(&mut rng, &c);
    let conn = build_from_edge_weights(c.clone(), &w).unwrap();
    let back = reconstruct_edge_weights(&conn, 0, 2.0 * w.values[0], 1e-10).unwrap();
    let rebuilt = build_from_edge_weights(c, &back).unwrap();
    assert!(is_sl2(&rebuilt, 1e-10).unwrap().is_sl2_pm());
    assert!(conn.gauge_to(&rebuilt, 1e-9).is_some());
}

#[test]
fn reconstruction_rejects_generic_connections() {
    let mut rng = random::rng(9);
    let conn = random::connection(&mut rng, torus(3, 3));
    assert!(matches!(reconstruct_edge_weights(&conn, 0, 1.0, 1e-10), Err(ConnectionError::NotSl2 { .. })));
}

#[test]
fn invariants_round_trip_on_a_sphere() {
    let mut rng = random::rng(10);
    let c = oct();
    let w = random::edge_weights(&mut rng, &c);
    let conn = build_from_edge_weights(c.clone(), &w).unwrap().gauge_transform(&random::gauge(&mut rng, &c)).unwrap();
    let rho = RhoData::from_connection(&conn).unwrap();
    let rebuilt = reconstruct_connection_from_invariants(&rho, &[], 1e-10).unwrap();
    // mu ratios agree up to a vertex gauge
    assert!(conn.gauge_to(&rebuilt, 1e-9).is_some());
    for t in 0..c.n_triangles() {
        assert!(close(conn.rho_triangle(t).unwrap(), rebuilt.rho_triangle(t).unwrap(), 1e-10));
    }
    let trivial = reconstruct_connection_from_invariants(&RhoData::trivial(c.clone()), &[], 1e-10).unwrap();
    assert!(Connection::canonical(c).gauge_to(&trivial, 1e-12).is_some());
}

#[test]
fn invariants_with_doubled_loop_value() {
    let mut rng = random::rng(11);
    let c = torus(4, 5);
    let conn = random::connection(&mut rng, c.clone());
    let rho = RhoData::from_connection(&conn).unwrap();
    let loops = framed_generator_values(&conn).unwrap();
    let same = reconstruct_connection_from_invariants(&rho, &loops, 1e-10).unwrap();
    assert!(conn.gauge_to(&same, 1e-9).is_some());
    let doubled = reconstruct_connection_from_invariants(&rho, &[2.0 * loops[0], loops[1]], 1e-10).unwrap();
    let got = framed_generator_values(&doubled).unwrap();
    assert!(close(got[0] / loops[0], 2.0, 1e-10));
    assert!(close(got[1], loops[1], 1e-10));
    let again = RhoData::from_connection(&doubled).unwrap();
    for (a, b) in again.values().iter().zip(rho.values()) {
        assert!(close(*a, *b, 1e-10));
    }
}

#[test]
fn inconsistent_rho_is_rejected() {
    let c = oct();
    let mut values = vec![1.0; c.n_edges()];
    values[0] = 3.0;
    let rho = RhoData::new(c, values).unwrap();
    assert!(matches!(
        reconstruct_connection_from_invariants(&rho, &[], 1e-10),
        Err(ConnectionError::InconsistentRho(_))
    ));
}

#[test]
fn canonical_face_balance() {
    let f = sl_n_face_balance(&SimplexConnection::from_connection(&Connection::canonical(torus(3, 3))), 1e-12).unwrap();
    assert!(f.iter().all(|&x| x == 1.0));
    let f3 = sl_n_face_balance(&SimplexConnection::canonical(Arc::new(two_tetrahedra())), 1e-12).unwrap();
    assert_eq!(f3, vec![1.0, 1.0]);
}

#[test]
fn edge_weight_connections_balance_with_unit_gauge() {
    let mut rng = random::rng(12);
    let c = torus(4, 4);
    let conn = build_from_edge_weights(c.clone(), &random::edge_weights(&mut rng, &c)).unwrap();
    let f = sl_n_face_balance(&SimplexConnection::from_connection(&conn), 1e-10).unwrap();
    assert!(f.iter().all(|&x| (x - 1.0).abs() < 1e-12));
}

/// Sum of the balance equations around the dual cycle of a tetrahedra ring.
fn ring_cycle_sum(k: usize, coeffs: &[Vec<f64>]) -> f64 {
    let simplex = |i: usize| [0, 1, 2 + i, 2 + (i + 1) % k];
    let log_at = |s: usize, face: &[usize]| -> f64 {
        simplex(s).iter().zip(&coeffs[s]).filter(|(v, _)| face.contains(v)).map(|(_, u)| u.ln()).sum()
    };
    (0..k)
        .map(|i| {
            let face = [0, 1, 2 + (i + 1) % k];
            (log_at(i, &face) - log_at((i + 1) % k, &face)) / 3.0
        })
        .sum()
}

#[test]
fn ring_balance_matches_cycle_sum() {
    let mut rng = random::rng(13);
    let ring = Arc::new(tetrahedra_ring(5).unwrap());
    for _ in 0..20 {
        let coeffs: Vec<Vec<f64>> = (0..5).map(|_| random::positive_vec(&mut rng, 4, 1.0)).collect();
        let conn = SimplexConnection::new(ring.clone(), coeffs.clone()).unwrap();
        let absent = ring_cycle_sum(5, &coeffs).abs() > 1e-10;
        assert_eq!(sl_n_face_balance(&conn, 1e-10).is_none(), absent);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gauge_invariance(seed in any::<u64>(), steps in 1usize..20) {
        let mut rng = random::rng(seed);
        let c = torus(4, 4);
        let conn = random::connection(&mut rng, c.clone());
        let gauged = conn.gauge_transform(&random::gauge(&mut rng, &c)).unwrap();
        // closed framed path: a walk out along star edges and back
        let mut vertices = vec![0];
        let mut triangles = Vec::new();
        for i in 0..steps {
            let at = *vertices.last().unwrap();
            let star = c.vertex_star(at).unwrap();
            let t = star.triangles[i % star.len()];
            let next = *c.triangle(t).iter().find(|&&v| v != at).unwrap();
            vertices.push(next);
            triangles.push(t);
        }
        let out = FramedPath::new(&c, vertices, triangles).unwrap();
        let mut back = out.reversed();
        back.vertices.remove(0);
        let mut vertices = out.vertices.clone();
        vertices.extend(back.vertices);
        let mut triangles = out.triangles.clone();
        triangles.extend(back.triangles);
        let path = FramedPath::new(&c, vertices, triangles).unwrap();
        prop_assert!(path.is_closed());
        let a = conn.framed_holonomy(&path).unwrap();
        let b = gauged.framed_holonomy(&path).unwrap();
        prop_assert!(close(a, b, 1e-12));
        for e in 0..c.n_edges() {
            let p = c.edge(e).ends[0];
            prop_assert!(close(conn.rho_edge(e, p).unwrap(), gauged.rho_edge(e, p).unwrap(), 1e-12));
        }
    }

    #[test]
    fn rho_antisymmetry_and_cocycle(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let c = torus(3, 4);
        let conn = random::connection(&mut rng, c.clone());
        for e in 0..c.n_edges() {
            let [p, q] = c.edge(e).ends;
            let t = c.positive_side(e, p).unwrap().triangle;
            prop_assert!((conn.rho(e, p, t).unwrap() * conn.rho(e, q, t).unwrap() - 1.0).abs() < 1e-12);
        }
        prop_assert!(log_rho_product(&conn).abs() < 1e-10);
    }

    #[test]
    fn reversed_path_cancels(seed in any::<u64>()) {
        let mut rng = random::rng(seed);
        let c = oct();
        let conn = random::connection(&mut rng, c.clone());
        let star = c.vertex_star(0).unwrap();
        let path = FramedPath::along_edges(&c, 0, &[star.faces[0]]).unwrap();
        let there = conn.framed_holonomy(&path).unwrap();
        let back = conn.framed_holonomy(&path.reversed()).unwrap();
        prop_assert!((there * back - 1.0).abs() < 1e-12);
    }

    #[test]
    fn edge_weights_give_sl2(seed in any::<u64>(), m in 3usize..7, n in 3usize..7) {
        let mut rng = random::rng(seed);
        let c = torus(m, n);
        let w = random::edge_weights(&mut rng, &c);
        let conn = build_from_edge_weights(c.clone(), &w).unwrap();
        prop_assert_eq!(is_sl2(&conn, 1e-10).unwrap().verdict, Sl2Verdict::Sl2);
        for path in c.homology_generator_loops().unwrap() {
            let (sign, log) = transport_det(&conn, &path);
            prop_assert!(sign > 0.0 && log.abs() < 1e-10);
        }
        let back = reconstruct_edge_weights(&conn, 0, w.values[0], 1e-10).unwrap();
        prop_assert!(mu_gap(&conn, &build_from_edge_weights(c, &back).unwrap()) < 1e-10);
    }

    #[test]
    fn balance_agrees_with_sl2(seed in any::<u64>(), sl2 in any::<bool>()) {
        let mut rng = random::rng(seed);
        let c = torus(3, 3);
        let conn = if sl2 {
            build_from_edge_weights(c.clone(), &random::edge_weights(&mut rng, &c)).unwrap()
        } else {
            random::connection(&mut rng, c.clone())
        };
        let verdict = is_sl2(&conn, 1e-10).unwrap().is_sl2_pm();
        prop_assert_eq!(verdict, sl2);
        prop_assert_eq!(sl_n_face_balance(&SimplexConnection::from_connection(&conn), 1e-10).is_some(), verdict);
    }
}
