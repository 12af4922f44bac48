use std::collections::VecDeque;
use std::sync::Arc;

use crate::simplicial::ComplexN;

use super::{Connection, ConnectionError};

/// Positive coefficients `u[T:P]` on the simplices of an n-complex.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexConnection {
    complex: Arc<ComplexN>,
    coeffs: Vec<Vec<f64>>,
}

impl SimplexConnection {
    pub fn new(complex: Arc<ComplexN>, coeffs: Vec<Vec<f64>>) -> Result<Self, ConnectionError> {
        if coeffs.len() != complex.n_simplices() {
            return Err(ConnectionError::LengthMismatch { expected: complex.n_simplices(), got: coeffs.len() });
        }
        for (s, row) in coeffs.iter().enumerate() {
            if row.len() != complex.dim() + 1 {
                return Err(ConnectionError::LengthMismatch { expected: complex.dim() + 1, got: row.len() });
            }
            if let Some((local, &value)) = row.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
                return Err(ConnectionError::NonPositiveCoefficient { triangle: s, local, value });
            }
        }
        Ok(SimplexConnection { complex, coeffs })
    }

    pub fn canonical(complex: Arc<ComplexN>) -> Self {
        let coeffs = vec![vec![1.0; complex.dim() + 1]; complex.n_simplices()];
        SimplexConnection { complex, coeffs }
    }

    pub fn from_connection(conn: &Connection) -> Self {
        SimplexConnection {
            complex: Arc::new(ComplexN::from_complex2d(conn.complex())),
            coeffs: conn.coeffs().iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn complex(&self) -> &ComplexN {
        &self.complex
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// `ln A(s:f)`, the log of the product of the coefficients of `s` at the
    /// vertices of face `f`.
    pub fn log_face_product(&self, s: usize, f: usize) -> f64 {
        let skip = self.complex.opposite_local(s, f).expect("face of simplex");
        self.coeffs[s].iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, u)| u.ln()).sum()
    }
}

/// Breadth-first solve of `log f(T'') - log f(T') = (ln A(T':F) - ln A(T'':F)) / n`
/// on the dual graph. Returns `log f` and the largest mismatch on faces
/// outside the spanning tree.
fn solve_log_balance(conn: &SimplexConnection) -> (Vec<f64>, f64) {
    let c = conn.complex();
    let n = c.dim() as f64;
    let ns = c.n_simplices();
    let mut log_f: Vec<Option<f64>> = vec![None; ns];
    let mut worst = 0.0f64;
    for root in 0..ns {
        if log_f[root].is_some() {
            continue;
        }
        log_f[root] = Some(0.0);
        let mut queue = VecDeque::from([root]);
        while let Some(s) = queue.pop_front() {
            let fs = log_f[s].expect("queued simplices are set");
            for &face in c.simplex_faces(s) {
                let Some(&t) = c.face_simplices(face).iter().find(|&&t| t != s) else { continue };
                let ft = fs + (conn.log_face_product(s, face) - conn.log_face_product(t, face)) / n;
                match log_f[t] {
                    None => {
                        log_f[t] = Some(ft);
                        queue.push_back(t);
                    }
                    Some(existing) => worst = worst.max((existing - ft).abs()),
                }
            }
        }
    }
    (log_f.into_iter().map(|x| x.expect("every simplex reached")).collect(), worst)
}

/// Looks for a positive `f` on simplices with `A(T':F) f(T')^n = A(T'':F) f(T'')^n`
/// on every interior face. `f` is 1 on the first simplex of each component.
pub fn sl_n_face_balance(conn: &SimplexConnection, tol: f64) -> Option<Vec<f64>> {
    let (log_f, worst) = solve_log_balance(conn);
    (worst <= tol).then(|| log_f.into_iter().map(f64::exp).collect())
}

/// Largest mismatch (in log space) of the balance equations around the
/// fundamental cycles of the dual graph. Zero when a balancing gauge exists.
pub fn face_balance_cycle_residual(conn: &SimplexConnection) -> f64 {
    solve_log_balance(conn).1
}
