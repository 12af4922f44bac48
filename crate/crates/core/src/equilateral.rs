//! Self-adjoint operators on the periodic equilateral lattice and their six
//! direction-wise factorizations.
//!
//! Sites are `(m, n)` on a periodic `rows x cols` window; site `(m, n)` is the
//! vertex `m * cols + n` of [`lattice_torus`]. The six unit steps are
//! [`DIRECTIONS`]; step `k + 3` is the inverse of step `k`. Direction `j` uses
//! the basis `(D_j, D_{j+1})`, whose triangles `p, p + D_j, p + D_{j+1}` are the
//! up (black) triangles for even `j` and the down (white) ones for odd `j`.

use std::sync::Arc;

use thiserror::Error;

use crate::complex::{lattice_torus, Complex2D, ComplexError};
use crate::connection::{triangle_solve, Connection, ConnectionError};
use crate::lattice::{Boundary, LatticeField};
use crate::schrodinger::{OperatorError, SelfAdjointOperator};

pub const DIRECTIONS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];

/// Damping and step budget for the gauge search in [`equilateral_laplace`].
pub const GAUGE_DAMPING: f64 = 0.5;
pub const GAUGE_MAX_STEPS: usize = 10_000;

#[derive(Debug, Error)]
pub enum EquilateralError {
    #[error("equilateral operators need a periodic window of at least 3x3 sites, got {0}x{1}")]
    Window(usize, usize),
    #[error("coefficient fields live on different windows")]
    ShapeMismatch,
    #[error("off-diagonal coefficient in direction {direction} at ({m}, {n}) is not positive: {value}")]
    NonPositiveCoefficient { direction: usize, m: usize, n: usize, value: f64 },
    #[error("direction must be in 0..6, got {0}")]
    BadDirection(usize),
    #[error("no gauge reduces the potential to {level}: {reason}")]
    GaugeNotFound { level: f64, reason: String },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

/// `(L psi)(p) = a(p) psi(p) + sum_k coupling(p, k) psi(p + D_k)`.
///
/// The coupling between `p` and `p + D_k` for `k < 3` is stored at the far
/// end: `b(p + D_0)`, `c(p + D_1)`, `d(p + D_2)`. Seen from the other end it is
/// the coupling in direction `k + 3`, stored at the site itself.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilateralOperator {
    pub a: LatticeField,
    pub b: LatticeField,
    pub c: LatticeField,
    pub d: LatticeField,
}

/// Direction-`j` factor `(Q psi)(p) = u(p) psi(p) + v(p) psi(p + D_j) + w(p) psi(p + D_{j+1})`
/// with `L = Q^+ Q + potential`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalFactor {
    pub direction: usize,
    pub u: LatticeField,
    pub v: LatticeField,
    pub w: LatticeField,
    pub potential: LatticeField,
}

/// Result of [`equilateral_laplace`]: the gauge `f` with `f L f = Q^+ Q + level`
/// and the transformed operator `Q Q^+ + level`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceImage {
    pub gauge: LatticeField,
    pub factor: DirectionalFactor,
    pub operator: EquilateralOperator,
    pub iterations: usize,
}

fn dir(k: usize) -> (i64, i64) {
    DIRECTIONS[k % 6]
}

impl EquilateralOperator {
    pub fn new(a: LatticeField, b: LatticeField, c: LatticeField, d: LatticeField) -> Result<Self, EquilateralError> {
        let (rows, cols) = a.shape();
        if rows < 3 || cols < 3 || [&a, &b, &c, &d].iter().any(|f| f.boundary() != Boundary::Periodic) {
            return Err(EquilateralError::Window(rows, cols));
        }
        if [&b, &c, &d].iter().any(|f| f.shape() != a.shape()) {
            return Err(EquilateralError::ShapeMismatch);
        }
        let op = EquilateralOperator { a, b, c, d };
        for (k, field) in [&op.b, &op.c, &op.d].into_iter().enumerate() {
            for m in 0..rows {
                for n in 0..cols {
                    let value = field.get(m, n);
                    if !(value > 0.0 && value.is_finite()) {
                        return Err(EquilateralError::NonPositiveCoefficient { direction: k, m, n, value });
                    }
                }
            }
        }
        Ok(op)
    }

    /// `a` constant, all couplings one.
    pub fn unit(rows: usize, cols: usize, a: f64) -> Result<Self, EquilateralError> {
        let one = LatticeField::constant(rows, cols, 1.0);
        Self::new(LatticeField::constant(rows, cols, a), one.clone(), one.clone(), one)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    fn field(&self, k: usize) -> &LatticeField {
        [&self.b, &self.c, &self.d][k]
    }

    /// Coupling between `p = (m, n)` and `p + D_k`.
    pub fn coupling(&self, m: i64, n: i64, k: usize) -> f64 {
        let k = k % 6;
        if k < 3 {
            let (dm, dn) = dir(k);
            self.field(k).at(m + dm, n + dn)
        } else {
            self.field(k - 3).at(m, n)
        }
    }

    pub fn apply(&self, psi: &LatticeField) -> LatticeField {
        psi.forward_stencil(|m, n| {
            let mut s = self.a.at(m, n) * psi.at(m, n);
            for (k, (dm, dn)) in DIRECTIONS.iter().enumerate() {
                s += self.coupling(m, n, k) * psi.at(m + dm, n + dn);
            }
            s
        })
    }

    /// `f L f` for a positive site function `f`.
    pub fn conjugated(&self, f: &LatticeField) -> Result<Self, EquilateralError> {
        let scale = |field: &LatticeField, (dm, dn): (i64, i64)| {
            field.forward_stencil(|m, n| field.at(m, n) * f.at(m, n) * f.at(m - dm, n - dn))
        };
        Self::new(
            self.a.forward_stencil(|m, n| self.a.at(m, n) * f.at(m, n) * f.at(m, n)),
            scale(&self.b, dir(0)),
            scale(&self.c, dir(1)),
            scale(&self.d, dir(2)),
        )
    }

    /// The same operator on the torus complex.
    pub fn to_operator(&self) -> Result<SelfAdjointOperator, EquilateralError> {
        let (rows, cols) = self.shape();
        let complex = Arc::new(lattice_torus(rows, cols)?);
        let mut offdiag = vec![0.0; complex.n_edges()];
        for m in 0..rows as i64 {
            for n in 0..cols as i64 {
                let p = site(rows, cols, m, n);
                for k in 0..3 {
                    let (dm, dn) = dir(k);
                    let q = site(rows, cols, m + dm, n + dn);
                    let e = complex.edge_between(p, q).expect("lattice neighbours share an edge");
                    offdiag[e] = self.coupling(m, n, k);
                }
            }
        }
        let potential = self.a.values().to_vec();
        Ok(SelfAdjointOperator::new(complex, offdiag, potential)?)
    }

    /// Sets the coupling between `(m, n)` and `(m, n) + D_k`.
    fn set_coupling(&mut self, m: i64, n: i64, k: usize, value: f64) {
        let k = k % 6;
        let (rows, cols) = self.shape();
        let (field, (m, n)) = if k < 3 {
            let (dm, dn) = dir(k);
            (k, (m + dm, n + dn))
        } else {
            (k - 3, (m, n))
        };
        let (m, n) = (m.rem_euclid(rows as i64) as usize, n.rem_euclid(cols as i64) as usize);
        [&mut self.b, &mut self.c, &mut self.d][field].set(m, n, value);
    }
}

fn site(rows: usize, cols: usize, m: i64, n: i64) -> usize {
    (m.rem_euclid(rows as i64) as usize) * cols + n.rem_euclid(cols as i64) as usize
}

impl DirectionalFactor {
    pub fn apply(&self, psi: &LatticeField) -> LatticeField {
        let (j1, j2) = (dir(self.direction), dir(self.direction + 1));
        psi.forward_stencil(|m, n| {
            self.u.at(m, n) * psi.at(m, n)
                + self.v.at(m, n) * psi.at(m + j1.0, n + j1.1)
                + self.w.at(m, n) * psi.at(m + j2.0, n + j2.1)
        })
    }

    pub fn apply_adjoint(&self, phi: &LatticeField) -> LatticeField {
        let (j1, j2) = (dir(self.direction), dir(self.direction + 1));
        phi.forward_stencil(|m, n| {
            self.u.at(m, n) * phi.at(m, n)
                + self.v.at(m - j1.0, n - j1.1) * phi.at(m - j1.0, n - j1.1)
                + self.w.at(m - j2.0, n - j2.1) * phi.at(m - j2.0, n - j2.1)
        })
    }

    /// `Q^+ Q + potential` as an operator on the lattice.
    pub fn reassemble(&self) -> Result<EquilateralOperator, EquilateralError> {
        let (rows, cols) = self.u.shape();
        let j = self.direction;
        let (j1, j2) = (dir(j), dir(j + 1));
        let a = self.potential.forward_stencil(|m, n| {
            self.potential.at(m, n)
                + self.u.at(m, n).powi(2)
                + self.v.at(m - j1.0, n - j1.1).powi(2)
                + self.w.at(m - j2.0, n - j2.1).powi(2)
        });
        let one = LatticeField::constant(rows, cols, 1.0);
        let mut op = EquilateralOperator { a, b: one.clone(), c: one.clone(), d: one };
        for m in 0..rows as i64 {
            for n in 0..cols as i64 {
                // the triangle anchored at p carries the three couplings of its sides
                let (u, v, w) = (self.u.at(m, n), self.v.at(m, n), self.w.at(m, n));
                op.set_coupling(m, n, j, u * v);
                op.set_coupling(m, n, j + 1, u * w);
                op.set_coupling(m + j1.0, n + j1.1, j + 2, v * w);
            }
        }
        Ok(op)
    }

    /// Coefficients of the factor as `(triangle, [u; 3])` on [`lattice_torus`],
    /// in the local vertex order of the torus triangles.
    pub fn torus_coefficients(&self, c: &Complex2D) -> Vec<(usize, [f64; 3])> {
        let (rows, cols) = self.u.shape();
        let j = self.direction;
        let (j1, j2) = (dir(j), dir(j + 1));
        let mut out = Vec::with_capacity(rows * cols);
        for m in 0..rows as i64 {
            for n in 0..cols as i64 {
                let verts = [(m, n), (m + j1.0, n + j1.1), (m + j2.0, n + j2.1)];
                let t = anchor_triangle(rows, cols, &verts, j.is_multiple_of(2));
                let coeffs = [self.u.at(m, n), self.v.at(m, n), self.w.at(m, n)];
                let mut local = [0.0; 3];
                for (&(vm, vn), u) in verts.iter().zip(coeffs) {
                    let k = c.local_index(t, site(rows, cols, vm, vn)).expect("vertex of its triangle");
                    local[k] = u;
                }
                out.push((t, local));
            }
        }
        out.sort_by_key(|x| x.0);
        out
    }
}

/// Index in [`lattice_torus`] of the up (`up = true`) or down triangle with
/// the given vertices.
fn anchor_triangle(rows: usize, cols: usize, verts: &[(i64, i64); 3], up: bool) -> usize {
    let has = |m: i64, n: i64| verts.iter().any(|&(a, b)| (a - m).rem_euclid(rows as i64) == 0 && (b - n).rem_euclid(cols as i64) == 0);
    for &(m, n) in verts {
        if up && has(m + 1, n) && has(m, n + 1) {
            return 2 * site(rows, cols, m, n);
        }
        if !up && has(m - 1, n) && has(m, n - 1) {
            return 2 * site(rows, cols, m - 1, n - 1) + 1;
        }
    }
    unreachable!("lattice triangle has a base vertex")
}

/// Factorizes `L = Q_j^+ Q_j + W_j` with `Q_j` supported on the triangles
/// `p, p + D_j, p + D_{j+1}`.
pub fn equilateral_factorize(op: &EquilateralOperator, j: usize) -> Result<DirectionalFactor, EquilateralError> {
    if j >= 6 {
        return Err(EquilateralError::BadDirection(j));
    }
    let (rows, cols) = op.shape();
    let (j1, j2) = (dir(j), dir(j + 1));
    let mut u = Vec::with_capacity(rows * cols);
    let mut v = Vec::with_capacity(rows * cols);
    let mut w = Vec::with_capacity(rows * cols);
    for m in 0..rows as i64 {
        for n in 0..cols as i64 {
            let sides = [
                op.coupling(m, n, j),
                op.coupling(m + j1.0, n + j1.1, j + 2),
                op.coupling(m, n, j + 1),
            ];
            let [x, y, z] = triangle_solve(sides);
            u.push(x);
            v.push(y);
            w.push(z);
        }
    }
    let u = LatticeField::periodic(rows, cols, u).expect("window checked");
    let v = LatticeField::periodic(rows, cols, v).expect("window checked");
    let w = LatticeField::periodic(rows, cols, w).expect("window checked");
    let potential = op.a.forward_stencil(|m, n| {
        op.a.at(m, n) - u.at(m, n).powi(2) - v.at(m - j1.0, n - j1.1).powi(2) - w.at(m - j2.0, n - j2.1).powi(2)
    });
    Ok(DirectionalFactor { direction: j, u, v, w, potential })
}

/// The connection on [`lattice_torus`] whose black triangles come from the
/// factorization in direction `black` (even) and whose white triangles come
/// from direction `white` (odd).
pub fn equilateral_connection(
    op: &EquilateralOperator,
    black: usize,
    white: usize,
) -> Result<Connection, EquilateralError> {
    if !black.is_multiple_of(2) || white % 2 != 1 {
        return Err(EquilateralError::BadDirection(if !black.is_multiple_of(2) { black } else { white }));
    }
    let (rows, cols) = op.shape();
    let c = Arc::new(lattice_torus(rows, cols)?);
    let mut coeffs = vec![[0.0; 3]; c.n_triangles()];
    for j in [black, white] {
        for (t, u) in equilateral_factorize(op, j)?.torus_coefficients(&c) {
            coeffs[t] = u;
        }
    }
    Ok(Connection::new(c, coeffs)?)
}

/// Laplace transformation in direction `j`: finds `f > 0` with
/// `f L f = Q^+ Q + level` and returns `Q Q^+ + level` on the lattice of
/// triangle anchors (identified with the sites).
///
/// Under `L -> f L f` the potential of the factorization scales pointwise,
/// `W -> f^2 W`. The gauge is found by the damped iteration
/// `log f <- log f - damping * log(W_f / level) / 2`, which needs `W > 0`
/// for `level > 0`; for `level = 0` the potential must already vanish.
pub fn equilateral_laplace(
    op: &EquilateralOperator,
    j: usize,
    level: f64,
    tol: f64,
) -> Result<LaplaceImage, EquilateralError> {
    let (rows, cols) = op.shape();
    let mut f = LatticeField::constant(rows, cols, 1.0);
    let mut factor = equilateral_factorize(op, j)?;
    let mut iterations = 0;
    if level == 0.0 {
        let worst = factor.potential.max_abs();
        let scale = op.a.max_abs().max(1.0);
        if worst > tol * scale {
            return Err(EquilateralError::GaugeNotFound {
                level,
                reason: format!("potential is not identically zero (max |W| = {worst:e}) and scales multiplicatively"),
            });
        }
    } else {
        loop {
            let w = &factor.potential;
            if w.values().iter().any(|&x| x.signum() != level.signum() || x == 0.0) {
                return Err(EquilateralError::GaugeNotFound {
                    level,
                    reason: "potential changes sign relative to the target level".into(),
                });
            }
            let gap = w.values().iter().fold(0.0f64, |acc, &x| acc.max((x / level - 1.0).abs()));
            if gap <= tol {
                break;
            }
            if iterations == GAUGE_MAX_STEPS {
                return Err(EquilateralError::GaugeNotFound {
                    level,
                    reason: format!("no convergence after {GAUGE_MAX_STEPS} steps (gap {gap:e})"),
                });
            }
            let step = w.map(|x| (-GAUGE_DAMPING * 0.5 * (x / level).ln()).exp());
            f = f.zip_map(&step, |a, b| a * b).expect("same window");
            factor = equilateral_factorize(&op.conjugated(&f)?, j)?;
            iterations += 1;
        }
    }
    // Q Q^+: triangles anchored at p and p - D_j share p, and so on
    let (j1, j2, j3) = (dir(j), dir(j + 1), dir(j + 2));
    let (u, v, w) = (&factor.u, &factor.v, &factor.w);
    let a = u.forward_stencil(|m, n| u.at(m, n).powi(2) + v.at(m, n).powi(2) + w.at(m, n).powi(2) + level);
    let one = LatticeField::constant(rows, cols, 1.0);
    let mut image = EquilateralOperator { a, b: one.clone(), c: one.clone(), d: one };
    for m in 0..rows as i64 {
        for n in 0..cols as i64 {
            image.set_coupling(m, n, j + 3, u.at(m, n) * v.at(m - j1.0, n - j1.1));
            image.set_coupling(m, n, j + 4, u.at(m, n) * w.at(m - j2.0, n - j2.1));
            image.set_coupling(m, n, j + 5, v.at(m, n) * w.at(m - j3.0, n - j3.1));
        }
    }
    let operator = EquilateralOperator::new(image.a, image.b, image.c, image.d)?;
    Ok(LaplaceImage { gauge: f, factor, operator, iterations })
}
