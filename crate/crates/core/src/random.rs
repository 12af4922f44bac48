//! Seeded random inputs. Positive values are drawn log-uniformly so that
//! ratios are spread evenly around one.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::Complex2D;
use crate::connection::{Connection, EdgeWeights, GaugePair};
use crate::lattice::LatticeField;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `exp(x)` with `x` uniform in `[-spread, spread]`.
pub fn positive<R: Rng>(rng: &mut R, spread: f64) -> f64 {
    rng.gen_range(-spread..=spread).exp()
}

pub fn positive_vec<R: Rng>(rng: &mut R, len: usize, spread: f64) -> Vec<f64> {
    (0..len).map(|_| positive(rng, spread)).collect()
}

pub fn edge_weights<R: Rng>(rng: &mut R, c: &Complex2D) -> EdgeWeights {
    EdgeWeights { values: positive_vec(rng, c.n_edges(), 1.0) }
}

/// Independent coefficients: a generic GL2 connection.
pub fn connection<R: Rng>(rng: &mut R, c: Arc<Complex2D>) -> Connection {
    let coeffs = (0..c.n_triangles())
        .map(|_| [positive(rng, 1.0), positive(rng, 1.0), positive(rng, 1.0)])
        .collect();
    Connection::new(c, coeffs).expect("positive coefficients")
}

pub fn gauge<R: Rng>(rng: &mut R, c: &Complex2D) -> GaugePair {
    GaugePair { triangle: positive_vec(rng, c.n_triangles(), 1.0), vertex: positive_vec(rng, c.n_vertices(), 1.0) }
}

/// Periodic field with entries uniform in `[lo, hi)`, row-major draws.
pub fn field<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64) -> LatticeField {
    LatticeField::periodic(rows, cols, (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect())
        .expect("values match the shape")
}
