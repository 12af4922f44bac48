use serde::Serialize;

/// A 2x2 real matrix stored as `scale * entries`, with `log_scale` the natural
/// logarithm of the scale. Long products are renormalized by their largest
/// entry. The determinant is accumulated separately (log of its magnitude and
/// its sign) from the factors, so it stays exact even when the product is
/// badly conditioned.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolonomyMatrix {
    entries: [[f64; 2]; 2],
    log_scale: f64,
    log_abs_det: f64,
    det_sign: f64,
}

impl HolonomyMatrix {
    pub fn identity() -> Self {
        Self::from_entries([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn from_entries(entries: [[f64; 2]; 2]) -> Self {
        let d = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        HolonomyMatrix { entries, log_scale: 0.0, log_abs_det: d.abs().ln(), det_sign: d.signum() }
    }

    /// Normalized entries; the true matrix is `exp(log_scale) * entries`.
    pub fn entries(&self) -> [[f64; 2]; 2] {
        self.entries
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// The matrix itself. May overflow for very long products; prefer the
    /// scale-aware accessors.
    pub fn to_matrix(&self) -> [[f64; 2]; 2] {
        let s = self.log_scale.exp();
        let e = self.entries;
        [[e[0][0] * s, e[0][1] * s], [e[1][0] * s, e[1][1] * s]]
    }

    pub fn det(&self) -> f64 {
        self.det_sign * self.log_abs_det.exp()
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    pub fn det_sign(&self) -> f64 {
        self.det_sign
    }

    /// `step * self`.
    pub fn left_mul(&self, step: [[f64; 2]; 2]) -> Self {
        let a = step;
        let b = self.entries;
        let entries = [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ];
        let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        HolonomyMatrix {
            entries,
            log_scale: self.log_scale,
            log_abs_det: self.log_abs_det + d.abs().ln(),
            det_sign: self.det_sign * d.signum(),
        }
    }

    /// Divides the entries by the largest absolute entry and folds the factor
    /// into the scale.
    pub fn renormalized(&self) -> Self {
        let m = self
            .entries
            .iter()
            .flatten()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        if m == 0.0 || !m.is_finite() {
            return *self;
        }
        let e = self.entries;
        HolonomyMatrix {
            entries: [[e[0][0] / m, e[0][1] / m], [e[1][0] / m, e[1][1] / m]],
            log_scale: self.log_scale + m.ln(),
            ..*self
        }
    }

    /// Conjugation by the coordinate swap.
    pub fn swapped_basis(&self) -> Self {
        let e = self.entries;
        HolonomyMatrix { entries: [[e[1][1], e[1][0]], [e[0][1], e[0][0]]], ..*self }
    }

    /// Entries divided by the upper-left entry (the scale cancels).
    pub fn normalized_by_upper_left(&self) -> [[f64; 2]; 2] {
        let e = self.entries;
        let d = e[0][0];
        [[1.0, e[0][1] / d], [e[1][0] / d, e[1][1] / d]]
    }
}
