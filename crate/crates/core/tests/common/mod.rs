//! Oracles shared by the integration tests. They work from raw coefficients
//! and never call the library's holonomy or invariant code.
#![allow(dead_code)]

use discrete_sl2::complex::{Complex2D, ThickPath};
use discrete_sl2::connection::Connection;

pub fn u_at(conn: &Connection, t: usize, v: usize) -> f64 {
    let k = conn.complex().triangle(t).iter().position(|&x| x == v).expect("vertex of triangle");
    conn.coeffs()[t][k]
}

pub fn mu(conn: &Connection, t: usize, p: usize, q: usize) -> f64 {
    u_at(conn, t, p) / u_at(conn, t, q)
}

/// `mu[T](P, Q) mu[T'](Q, P)` across edge `e`.
pub fn rho(conn: &Connection, e: usize, p: usize, t: usize) -> f64 {
    let c = conn.complex();
    let q = c.edge(e).other_end(p);
    let t2 = c.edge(e).sides.iter().map(|s| s.triangle).find(|&x| x != t).expect("interior edge");
    mu(conn, t, p, q) * mu(conn, t2, q, p)
}

/// `log prod_T rho(T)` with each triangle's sides walked in orientation order.
pub fn log_rho_product(conn: &Connection) -> f64 {
    let c = conn.complex();
    let mut log = 0.0;
    for t in 0..c.n_triangles() {
        let tri = c.triangle(t);
        let te = c.triangle_edges(t);
        for k in 0..3 {
            log += rho(conn, te[k], tri[k], t).ln();
        }
    }
    log
}

/// Product of `rho` around the star of `v` along the star path.
pub fn star_rho(conn: &Connection, star: &ThickPath, v: usize) -> f64 {
    (0..star.triangles.len()).map(|i| rho(conn, star.faces[i + 1], v, star.triangles[i]).ln()).sum::<f64>().exp()
}

fn ends(c: &Complex2D, e: usize) -> [usize; 2] {
    c.edge(e).ends
}

/// One transport step through `t` from face `fin` to face `fout`, face values
/// in ascending vertex order.
pub fn step(conn: &Connection, t: usize, fin: usize, fout: usize) -> [[f64; 2]; 2] {
    let c = conn.complex();
    let [a, b] = ends(c, fin);
    let s = *c.triangle(t).iter().find(|&&x| x != a && x != b).expect("third vertex");
    let row = |z: usize| {
        if z == a {
            [1.0, 0.0]
        } else if z == b {
            [0.0, 1.0]
        } else {
            let us = u_at(conn, t, s);
            [-u_at(conn, t, a) / us, -u_at(conn, t, b) / us]
        }
    };
    let [x, y] = ends(c, fout);
    [row(x), row(y)]
}

/// `(sign, log|det|)` of the transport along a thick path, from per-step
/// determinants.
pub fn transport_det(conn: &Connection, path: &ThickPath) -> (f64, f64) {
    let (mut sign, mut log) = (1.0, 0.0);
    for (i, &t) in path.triangles.iter().enumerate() {
        let m = step(conn, t, path.faces[i], path.faces[i + 1]);
        let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        sign *= d.signum();
        log += d.abs().ln();
    }
    (sign, log)
}

/// Full transport matrix, renormalized by its largest entry as it goes.
/// Returns the matrix up to a positive factor.
pub fn transport(conn: &Connection, path: &ThickPath) -> [[f64; 2]; 2] {
    let mut k = [[1.0, 0.0], [0.0, 1.0]];
    for (i, &t) in path.triangles.iter().enumerate() {
        let s = step(conn, t, path.faces[i], path.faces[i + 1]);
        let mut p = [[0.0; 2]; 2];
        for r in 0..2 {
            for col in 0..2 {
                p[r][col] = s[r][0] * k[0][col] + s[r][1] * k[1][col];
            }
        }
        let scale = p.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
        k = p.map(|r| r.map(|x| x / scale));
    }
    k
}

/// Largest relative gap between corresponding ratios `u[T:P_k] / u[T:P_{k+1}]`.
pub fn mu_gap(a: &Connection, b: &Connection) -> f64 {
    let mut worst = 0.0f64;
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        for k in 0..3 {
            let j = (k + 1) % 3;
            worst = worst.max(((x[k] / x[j]) / (y[k] / y[j]) - 1.0).abs());
        }
    }
    worst
}

/// Dense network Laplacian: `+c` off the diagonal, `-sum c` on it.
pub fn network_laplacian(n: usize, edges: &[[usize; 2]], cond: &[f64]) -> nalgebra::DMatrix<f64> {
    let mut l = nalgebra::DMatrix::zeros(n, n);
    for (&[i, j], &c) in edges.iter().zip(cond) {
        l[(i, j)] += c;
        l[(j, i)] += c;
        l[(i, i)] -= c;
        l[(j, j)] -= c;
    }
    l
}

/// Conductivity between two terminals after eliminating every other vertex
/// (Schur complement of the Laplacian).
pub fn schur_reduce(l: &nalgebra::DMatrix<f64>, keep: &[usize]) -> nalgebra::DMatrix<f64> {
    let n = l.nrows();
    let drop: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
    let pick = |r: &[usize], c: &[usize]| nalgebra::DMatrix::from_fn(r.len(), c.len(), |i, j| l[(r[i], c[j])]);
    let (a, b, d) = (pick(keep, keep), pick(keep, &drop), pick(&drop, &drop));
    let dinv = d.try_inverse().expect("eliminated block is invertible");
    a - &b * dinv * b.transpose()
}
