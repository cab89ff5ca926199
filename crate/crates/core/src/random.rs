//! Seeded generators for random states, unitaries and channels.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::Channel;
use crate::linalg::{c, cr, ComplexMatrix};
use crate::state::DensityMatrix;

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unit vector, as a column matrix.
pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let v = ginibre(dim, 1, rng);
    let norm = v.norm();
    v * cr(1.0 / norm)
}

/// Random full-rank mixed state from the Hilbert–Schmidt ensemble.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(dim, dim, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m * cr(1.0 / tr)).expect("Wishart matrices normalize to valid states")
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (q, r) = qr.unpack();
    // fix column phases so the distribution is Haar
    let mut q = q;
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { cr(1.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Random CPTP map with `n_kraus` operators, from a random Stinespring isometry.
pub fn random_channel<R: Rng + ?Sized>(dim_in: usize, dim_out: usize, n_kraus: usize, rng: &mut R) -> Channel {
    let n_kraus = n_kraus.max(1);
    let g = ginibre(dim_out * n_kraus, dim_in, rng);
    let (q, _) = g.qr().unpack();
    let ops = (0..n_kraus)
        .map(|k| q.rows(k * dim_out, dim_out).into_owned())
        .collect();
    Channel::from_kraus(ops).expect("blocks share one shape")
}

pub fn random_unitary_channel<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Channel {
    Channel::from_unitary(random_unitary(dim, rng)).expect("square unitary")
}

/// Uniformly random point on the probability simplex.
pub fn random_simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}
