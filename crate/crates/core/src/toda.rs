//! The discrete 2D Toda chain of potentials `w^k` along a Laplace chain, its
//! Hirota forms and the period-2 reduction. All residuals are cross-multiplied.

use thiserror::Error;

use crate::hyperbolic::{laplace_transform_square, HyperbolicError, HyperbolicOperator};
use crate::lattice::{Boundary, LatticeError, LatticeField};

#[derive(Debug, Error)]
pub enum TodaError {
    #[error("layer {0} is missing from the stack")]
    MissingLayer(i64),
    #[error("Laplace step {step} failed: {source}")]
    Step { step: usize, source: HyperbolicError },
    #[error("Hirota coefficients must sum to zero, got {0:e}")]
    CoefficientSumNonzero(f64),
    #[error("scaling parameter must be nonzero")]
    ZeroKappa,
    #[error("denominator vanishes at ({m}, {n})")]
    SingularDenominator { m: i64, n: i64 },
    #[error("stack is empty")]
    Empty,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Layers `w^k` for `k = k0, k0 + 1, ...` on one window.
#[derive(Clone, Debug, PartialEq)]
pub struct TodaStack {
    pub k0: i64,
    pub layers: Vec<LatticeField>,
}

impl TodaStack {
    pub fn new(k0: i64, layers: Vec<LatticeField>) -> Result<Self, TodaError> {
        let first = layers.first().ok_or(TodaError::Empty)?;
        for l in &layers {
            first.check_shape(l)?;
        }
        Ok(TodaStack { k0, layers })
    }

    pub fn layer(&self, k: i64) -> Result<&LatticeField, TodaError> {
        usize::try_from(k - self.k0).ok().and_then(|i| self.layers.get(i)).ok_or(TodaError::MissingLayer(k))
    }

    /// Indices `k` with both neighbours present.
    pub fn interior(&self) -> std::ops::Range<i64> {
        self.k0 + 1..self.k0 + self.layers.len() as i64 - 1
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Copy) -> Self {
        TodaStack { k0: self.k0, layers: self.layers.iter().map(|l| l.map(f)).collect() }
    }

    /// Largest `|toda_residual|` over all interior layers.
    pub fn max_residual(&self) -> Result<f64, TodaError> {
        let mut worst = 0.0f64;
        for k in self.interior() {
            worst = worst.max(toda_residual(self, k)?.max_abs());
        }
        Ok(worst)
    }
}

/// `(w^{k+1}_1 + 1)(w^{k-1}_2 + 1) w^k_1 w^k_2 - (w^k_1 + 1)(w^k_2 + 1) w^k w^k_12`.
pub fn toda_residual(stack: &TodaStack, k: i64) -> Result<LatticeField, TodaError> {
    let (prev, cur, next) = (stack.layer(k - 1)?, stack.layer(k)?, stack.layer(k + 1)?);
    Ok(cur.forward_stencil(|m, n| {
        let (w, w1, w2, w12) = (cur.at(m, n), cur.at(m + 1, n), cur.at(m, n + 1), cur.at(m + 1, n + 1));
        (next.at(m + 1, n) + 1.0) * (prev.at(m, n + 1) + 1.0) * w1 * w2 - (w1 + 1.0) * (w2 + 1.0) * w * w12
    }))
}

/// The chain produced by repeated Laplace transformations, with the
/// potentials of all operators (`steps + 1` layers).
#[derive(Clone, Debug, PartialEq)]
pub struct Evolution {
    pub stack: TodaStack,
    pub operators: Vec<HyperbolicOperator>,
}

pub fn evolve_chain(h0: &HyperbolicOperator, steps: usize) -> Result<Evolution, TodaError> {
    let mut operators = vec![h0.clone()];
    for step in 0..steps {
        let next = laplace_transform_square(operators.last().expect("nonempty"))
            .map_err(|source| TodaError::Step { step, source })?;
        operators.push(next.operator);
    }
    let layers = operators.iter().map(|h| h.w.clone()).collect();
    Ok(Evolution { stack: TodaStack::new(0, layers)?, operators })
}

/// Layers `F(k, ., .)` of a three-index field, starting at `k0`.
pub type HirotaField = TodaStack;

/// `gamma F(k+1, m+1, n) F(k-1, m, n+1) + alpha F(k, m, n) F(k, m+1, n+1)
///  + beta F(k, m+1, n) F(k, m, n+1)` with `alpha + beta + gamma = 0`.
pub fn hirota_residual(
    f: &HirotaField,
    k: i64,
    alpha: f64,
    beta: f64,
    gamma: f64,
) -> Result<LatticeField, TodaError> {
    let sum = alpha + beta + gamma;
    if sum.abs() > 1e-14 * (alpha.abs() + beta.abs() + gamma.abs()).max(1.0) {
        return Err(TodaError::CoefficientSumNonzero(sum));
    }
    let (prev, cur, next) = (f.layer(k - 1)?, f.layer(k)?, f.layer(k + 1)?);
    Ok(cur.forward_stencil(|m, n| {
        gamma * next.at(m + 1, n) * prev.at(m, n + 1)
            + alpha * cur.at(m, n) * cur.at(m + 1, n + 1)
            + beta * cur.at(m + 1, n) * cur.at(m, n + 1)
    }))
}

/// `v^{k+1}_1 v^{k-1}_2 (v^k_1 - kappa)(v^k_2 - kappa) - v^k_1 v^k_2 (v^k - kappa)(v^k_12 - kappa)`
/// for arbitrary layers `v`.
pub fn kappa_form_residual(v: &TodaStack, k: i64, kappa: f64) -> Result<LatticeField, TodaError> {
    let (prev, cur, next) = (v.layer(k - 1)?, v.layer(k)?, v.layer(k + 1)?);
    Ok(cur.forward_stencil(|m, n| {
        let (v0, v1, v2, v12) = (cur.at(m, n), cur.at(m + 1, n), cur.at(m, n + 1), cur.at(m + 1, n + 1));
        next.at(m + 1, n) * prev.at(m, n + 1) * (v1 - kappa) * (v2 - kappa) - v1 * v2 * (v0 - kappa) * (v12 - kappa)
    }))
}

/// The chain in the variables `v = kappa (w + 1)`; equals `kappa^4` times
/// [`toda_residual`], so it vanishes on chains for every nonzero `kappa`.
pub fn toda_to_hirota_form(stack: &TodaStack, k: i64, kappa: f64) -> Result<LatticeField, TodaError> {
    if kappa == 0.0 {
        return Err(TodaError::ZeroKappa);
    }
    kappa_form_residual(&stack.map(|w| kappa * (w + 1.0)), k, kappa)
}

/// Residuals of the period-2 chain `w^{2k} = a`, `w^{2k+1} = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cyclic2Residual {
    /// `G G_12 - G_1 G_2` with `G = a b`.
    pub g: LatticeField,
    /// `(C + b_1)(C + b_2) - b b_12 (1 + b_1)(1 + b_2)` with `C = G(0, 0)`.
    pub system: LatticeField,
    pub c: f64,
}

pub fn cyclic2_residual(a: &LatticeField, b: &LatticeField) -> Result<Cyclic2Residual, TodaError> {
    let g = a.zip_map(b, |x, y| x * y)?;
    let c = g.get(0, 0);
    let g_res = g.forward_stencil(|m, n| g.at(m, n) * g.at(m + 1, n + 1) - g.at(m + 1, n) * g.at(m, n + 1));
    let system = b.forward_stencil(|m, n| {
        let (b0, b1, b2, b12) = (b.at(m, n), b.at(m + 1, n), b.at(m, n + 1), b.at(m + 1, n + 1));
        (c + b1) * (c + b2) - b0 * b12 * (1.0 + b1) * (1.0 + b2)
    });
    Ok(Cyclic2Residual { g: g_res, system, c })
}

/// Solves the period-2 system with `a b = C` on a fixed window from the
/// values of `b` on the first row (`n = 0..cols`) and the first column
/// (`m = 0..rows`; its first entry is taken from the row):
/// `b_12 = (C + b_1)(C + b_2) / ((1 + b_1)(1 + b_2) b)`.
pub fn cyclic2_from_boundary(
    c: f64,
    first_row: &[f64],
    first_col: &[f64],
) -> Result<(LatticeField, LatticeField), TodaError> {
    let (rows, cols) = (first_col.len(), first_row.len());
    let mut b = LatticeField::new(rows, cols, Boundary::Fixed, vec![0.0; rows * cols])?;
    for (n, &x) in first_row.iter().enumerate() {
        b.set(0, n, x);
    }
    for (m, &x) in first_col.iter().enumerate().skip(1) {
        b.set(m, 0, x);
    }
    for m in 1..rows {
        for n in 1..cols {
            let (b0, b1, b2) = (b.get(m - 1, n - 1), b.get(m, n - 1), b.get(m - 1, n));
            let den = (1.0 + b1) * (1.0 + b2) * b0;
            if den == 0.0 {
                return Err(TodaError::SingularDenominator { m: m as i64, n: n as i64 });
            }
            b.set(m, n, (c + b1) * (c + b2) / den);
        }
    }
    let a = b.map(|x| c / x);
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(values: &[f64]) -> TodaStack {
        TodaStack::new(0, values.iter().map(|&x| LatticeField::constant(3, 3, x)).collect()).unwrap()
    }

    #[test]
    fn geometric_constant_layers() {
        // w + 1 in {1, 2, 4}
        let r = toda_residual(&stack(&[0.0, 1.0, 3.0]), 1).unwrap();
        assert_eq!(r.max_abs(), 0.0);
        assert_eq!(toda_residual(&stack(&[2.0, 2.0, 2.0]), 1).unwrap().max_abs(), 0.0);
        assert!(matches!(toda_residual(&stack(&[2.0, 2.0]), 1), Err(TodaError::MissingLayer(2))));
    }

    #[test]
    fn hirota_null_cases() {
        let ones = stack(&[1.0, 1.0, 1.0]);
        assert_eq!(hirota_residual(&ones, 1, 1.0, 2.0, -3.0).unwrap().max_abs(), 0.0);
        assert!(matches!(hirota_residual(&ones, 1, 1.0, 1.0, 1.0), Err(TodaError::CoefficientSumNonzero(_))));
    }

    #[test]
    fn trivial_cyclic_reduction() {
        let one = LatticeField::constant(4, 4, 1.0);
        let r = cyclic2_residual(&one, &one).unwrap();
        assert_eq!((r.g.max_abs(), r.system.max_abs()), (0.0, 0.0));
    }
}
