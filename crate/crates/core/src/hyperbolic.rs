//! Hyperbolic operators on the periodic square lattice, their factorized
//! forms and Laplace transformations.
//!
//! Shifts act on functions by `(T1 psi)(m, n) = psi(m+1, n)` and
//! `(T2 psi)(m, n) = psi(m, n+1)`; a subscript denotes a shifted field,
//! `f_1(m, n) = f(m+1, n)`, `f_12(m, n) = f(m+1, n+1)`. General operators are
//! stored by their coefficients at the point they act on:
//! `(L psi) = a psi + b psi_1 + c psi_2 + d psi_12`.

use thiserror::Error;

use crate::lattice::{Boundary, LatticeError, LatticeField};

#[derive(Debug, Error)]
pub enum HyperbolicError {
    #[error("potential w vanishes at ({0}, {1})")]
    ZeroPotential(usize, usize),
    #[error("1 + w vanishes at ({0}, {1})")]
    SingularGauge(usize, usize),
    #[error("division by zero in {what} at ({m}, {n})")]
    DegenerateCoefficient { what: &'static str, m: usize, n: usize },
    #[error("lattice operators need periodic windows")]
    NotPeriodic,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// `(L psi) = a psi + b psi_1 + c psi_2 + d psi_12`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareCoefficients {
    pub a: LatticeField,
    pub b: LatticeField,
    pub c: LatticeField,
    pub d: LatticeField,
}

impl SquareCoefficients {
    pub fn apply(&self, psi: &LatticeField) -> LatticeField {
        psi.forward_stencil(|m, n| {
            self.a.at(m, n) * psi.at(m, n)
                + self.b.at(m, n) * psi.at(m + 1, n)
                + self.c.at(m, n) * psi.at(m, n + 1)
                + self.d.at(m, n) * psi.at(m + 1, n + 1)
        })
    }

    /// `(1/g) L` for a nowhere vanishing `g`.
    pub fn divided_by(&self, g: &LatticeField) -> Self {
        let div = |f: &LatticeField| f.zip_map(g, |x, y| x / y).expect("same window");
        SquareCoefficients { a: div(&self.a), b: div(&self.b), c: div(&self.c), d: div(&self.d) }
    }
}

/// The zero-level representative `L = (1 + u T1)(1 + v T2) + w`.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperbolicOperator {
    pub u: LatticeField,
    pub v: LatticeField,
    pub w: LatticeField,
}

/// `L = g [(1 + v T2)(1 + u T1) + w]`, the factorization in the other order.
#[derive(Clone, Debug, PartialEq)]
pub struct LeftForm {
    pub u: LatticeField,
    pub v: LatticeField,
    pub w: LatticeField,
    pub scale: LatticeField,
}

impl LeftForm {
    pub fn expand(&self) -> SquareCoefficients {
        let (u, v, w, g) = (&self.u, &self.v, &self.w, &self.scale);
        SquareCoefficients {
            a: u.forward_stencil(|m, n| g.at(m, n) * (1.0 + w.at(m, n))),
            b: u.forward_stencil(|m, n| g.at(m, n) * u.at(m, n)),
            c: u.forward_stencil(|m, n| g.at(m, n) * v.at(m, n)),
            d: u.forward_stencil(|m, n| g.at(m, n) * v.at(m, n) * u.at(m, n + 1)),
        }
    }
}

/// Right and left factorized forms of one operator, with their scalar factors
/// `L = f [(1 + u T1)(1 + v T2) + w] = g [(1 + v T2)(1 + u T1) + w]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factorizations {
    pub right: HyperbolicOperator,
    pub right_scale: LatticeField,
    pub left: LeftForm,
}

impl HyperbolicOperator {
    pub fn new(u: LatticeField, v: LatticeField, w: LatticeField) -> Result<Self, HyperbolicError> {
        for f in [&u, &v, &w] {
            if f.boundary() != Boundary::Periodic {
                return Err(HyperbolicError::NotPeriodic);
            }
        }
        u.check_shape(&v)?;
        u.check_shape(&w)?;
        Ok(HyperbolicOperator { u, v, w })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.u.shape()
    }

    /// `a = 1 + w`, `b = u`, `c = v`, `d = u v_1`.
    pub fn expand(&self) -> SquareCoefficients {
        let (u, v, w) = (&self.u, &self.v, &self.w);
        SquareCoefficients {
            a: w.map(|x| 1.0 + x),
            b: u.clone(),
            c: v.clone(),
            d: u.forward_stencil(|m, n| u.at(m, n) * v.at(m + 1, n)),
        }
    }

    pub fn apply(&self, psi: &LatticeField) -> LatticeField {
        let (u, v, w) = (&self.u, &self.v, &self.w);
        // (1 + v T2) first, then (1 + u T1)
        let inner = psi.forward_stencil(|m, n| psi.at(m, n) + v.at(m, n) * psi.at(m, n + 1));
        inner.forward_stencil(|m, n| inner.at(m, n) + u.at(m, n) * inner.at(m + 1, n) + w.at(m, n) * psi.at(m, n))
    }

    /// `f^{-1} L f`: `u -> u f_1 / f`, `v -> v f_2 / f`, `w` unchanged.
    pub fn conjugated(&self, f: &LatticeField) -> Self {
        HyperbolicOperator {
            u: self.u.forward_stencil(|m, n| self.u.at(m, n) * f.at(m + 1, n) / f.at(m, n)),
            v: self.v.forward_stencil(|m, n| self.v.at(m, n) * f.at(m, n + 1) / f.at(m, n)),
            w: self.w.clone(),
        }
    }

    /// Gauge invariants `H = v u_2 / (u v_1)` and `w`.
    pub fn invariants(&self) -> (LatticeField, LatticeField) {
        let (u, v) = (&self.u, &self.v);
        let h = u.forward_stencil(|m, n| v.at(m, n) * u.at(m, n + 1) / (u.at(m, n) * v.at(m + 1, n)));
        (h, self.w.clone())
    }

    fn check_potential(&self) -> Result<(), HyperbolicError> {
        let (rows, cols) = self.shape();
        for m in 0..rows {
            for n in 0..cols {
                let w = self.w.get(m, n);
                if w == 0.0 {
                    return Err(HyperbolicError::ZeroPotential(m, n));
                }
                if 1.0 + w == 0.0 {
                    return Err(HyperbolicError::SingularGauge(m, n));
                }
            }
        }
        Ok(())
    }
}

/// Finds both factorized forms of `L = a + b T1 + c T2 + d T1 T2`.
///
/// Right form: `f(m, n) = b(m-1, n) c(m, n) / d(m-1, n)`, then `u = b / f`,
/// `v = c / f`, `w = a / f - 1`. Left form: `g(m, n) = c(m, n-1) b(m, n) / d(m, n-1)`,
/// then `u = b / g`, `v = c / g`, `w = a / g - 1`.
pub fn hyperbolic_factorize(coeffs: &SquareCoefficients) -> Result<Factorizations, HyperbolicError> {
    let SquareCoefficients { a, b, c, d } = coeffs;
    for f in [a, b, c, d] {
        if f.boundary() != Boundary::Periodic {
            return Err(HyperbolicError::NotPeriodic);
        }
        a.check_shape(f)?;
    }
    let (rows, cols) = a.shape();
    let check = |f: &LatticeField, what: &'static str| -> Result<(), HyperbolicError> {
        for m in 0..rows {
            for n in 0..cols {
                if f.get(m, n) == 0.0 || !f.get(m, n).is_finite() {
                    return Err(HyperbolicError::DegenerateCoefficient { what, m, n });
                }
            }
        }
        Ok(())
    };
    check(d, "d")?;
    let f = a.forward_stencil(|m, n| b.at(m - 1, n) * c.at(m, n) / d.at(m - 1, n));
    let g = a.forward_stencil(|m, n| c.at(m, n - 1) * b.at(m, n) / d.at(m, n - 1));
    check(&f, "right scale")?;
    check(&g, "left scale")?;
    let split = |s: &LatticeField| {
        (
            b.zip_map(s, |x, y| x / y).expect("same window"),
            c.zip_map(s, |x, y| x / y).expect("same window"),
            a.zip_map(s, |x, y| x / y - 1.0).expect("same window"),
        )
    };
    let (u, v, w) = split(&f);
    let (ul, vl, wl) = split(&g);
    Ok(Factorizations {
        right: HyperbolicOperator { u, v, w },
        right_scale: f,
        left: LeftForm { u: ul, v: vl, w: wl, scale: g },
    })
}

/// Result of one Laplace transformation.
#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceStep {
    pub operator: HyperbolicOperator,
    /// The gauge factor `f'` of the transformed operator.
    pub gauge: LatticeField,
    pub h: LatticeField,
}

/// Laplace transformation of `L = (1 + u T1)(1 + v T2) + w`.
///
/// With `H = v u_2 / (u v_1)`, the new potential is fixed by
/// `1 + w'_1 = (1 + w_1) H w w_12 / (w_1 w_2)`; then
/// `f' = (1 + w') w / (1 + w)`, `u' = f' u / w` and `v' = f' v / w_2`.
pub fn laplace_transform_square(h: &HyperbolicOperator) -> Result<LaplaceStep, HyperbolicError> {
    h.check_potential()?;
    let (hh, _) = h.invariants();
    let (u, v, w) = (&h.u, &h.v, &h.w);
    let w_new = shifted_update(&hh, w);
    let f = w.forward_stencil(|m, n| (1.0 + w_new.at(m, n)) * w.at(m, n) / (1.0 + w.at(m, n)));
    let operator = HyperbolicOperator {
        u: u.forward_stencil(|m, n| f.at(m, n) * u.at(m, n) / w.at(m, n)),
        v: v.forward_stencil(|m, n| f.at(m, n) * v.at(m, n) / w.at(m, n + 1)),
        w: w_new,
    };
    Ok(LaplaceStep { operator, gauge: f, h: hh })
}

/// `w'` from `1 + w'_1 = (1 + w_1) H w w_12 / (w_1 w_2)`, evaluated at
/// `(m-1, n)` to place it back at `(m, n)`.
fn shifted_update(h: &LatticeField, w: &LatticeField) -> LatticeField {
    w.forward_stencil(|m, n| {
        let m = m - 1;
        (1.0 + w.at(m + 1, n)) * h.at(m, n) * w.at(m, n) * w.at(m + 1, n + 1) / (w.at(m + 1, n) * w.at(m, n + 1)) - 1.0
    })
}

/// The transformation on gauge invariants:
/// `1 + w'_1 = (1 + w_1) H w w_12 / (w_1 w_2)` and `H' = (1 + w'_2) / (1 + w_2)`.
pub fn laplace_invariant_update(
    h: &LatticeField,
    w: &LatticeField,
) -> Result<(LatticeField, LatticeField), HyperbolicError> {
    h.check_shape(w)?;
    let (rows, cols) = w.shape();
    for m in 0..rows {
        for n in 0..cols {
            if w.get(m, n) == 0.0 {
                return Err(HyperbolicError::ZeroPotential(m, n));
            }
            if 1.0 + w.get(m, n) == 0.0 {
                return Err(HyperbolicError::SingularGauge(m, n));
            }
        }
    }
    let w_new = shifted_update(h, w);
    let h_new = w.forward_stencil(|m, n| (1.0 + w_new.at(m, n + 1)) / (1.0 + w.at(m, n + 1)));
    Ok((h_new, w_new))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_op(u: f64, v: f64, w: f64) -> HyperbolicOperator {
        let k = |x| LatticeField::constant(4, 4, x);
        HyperbolicOperator::new(k(u), k(v), k(w)).unwrap()
    }

    #[test]
    fn expansion_of_constants() {
        let e = constant_op(2.0, 3.0, 5.0).expand();
        assert!(e.a.values().iter().all(|&x| x == 6.0));
        assert!(e.b.values().iter().all(|&x| x == 2.0));
        assert!(e.c.values().iter().all(|&x| x == 3.0));
        assert!(e.d.values().iter().all(|&x| x == 6.0));
        let f = hyperbolic_factorize(&e).unwrap();
        assert_eq!(f.right, constant_op(2.0, 3.0, 5.0));
        assert!(f.right_scale.values().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn unit_operator_is_fixed() {
        let step = laplace_transform_square(&constant_op(1.0, 1.0, 1.0)).unwrap();
        assert_eq!(step.operator, constant_op(1.0, 1.0, 1.0));
        assert!(step.gauge.values().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn constant_fields_keep_u_and_v() {
        let step = laplace_transform_square(&constant_op(0.7, 1.3, 2.5)).unwrap();
        assert!(step.h.values().iter().all(|&x| x == 1.0));
        assert!(step.operator.w.values().iter().all(|&x| (x - 2.5).abs() < 1e-15));
        assert!(step.gauge.values().iter().all(|&x| (x - 2.5).abs() < 1e-15));
        assert!(step.operator.u.values().iter().all(|&x| (x - 0.7).abs() < 1e-15));
        assert!(step.operator.v.values().iter().all(|&x| (x - 1.3).abs() < 1e-15));
    }

    #[test]
    fn zero_potential_is_rejected() {
        assert!(matches!(laplace_transform_square(&constant_op(1.0, 1.0, 0.0)), Err(HyperbolicError::ZeroPotential(0, 0))));
        assert!(matches!(laplace_transform_square(&constant_op(1.0, 1.0, -1.0)), Err(HyperbolicError::SingularGauge(0, 0))));
    }
}
