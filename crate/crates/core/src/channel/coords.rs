//! Euclidean coordinates on the affine space of Hermitian trace-preserving
//! Choi matrices.
//!
//! Every such `J` on a `D`-dimensional system decomposes as `J = J₀ + V` with
//! `J₀ = I/D` (the completely depolarizing channel) and `V` Hermitian with
//! `Tr_out V = 0`. An orthonormal basis of the `V` space is `{G ⊗ F}` where
//! `G` runs over traceless Hermitian matrices on the output and `F` over all
//! Hermitian matrices on the input, both orthonormal under the Frobenius
//! inner product. That gives `(D² − 1)·D² = D⁴ − D²` coordinates, and the map
//! `J ↦ x` is an isometry: `‖x_a − x_b‖₂ = ‖J_a − J_b‖_F`.

use serde::{Deserialize, Serialize};

use super::Channel;
use crate::error::{Error, Result};
use crate::linalg::{c, cr, frobenius, identity, kron, partial_trace_first, zeros, ComplexMatrix};

/// Real affine dimension `D⁴ − D²` of the Hermitian TP Choi matrices.
pub fn affine_dim(dim: usize) -> usize {
    dim.pow(4) - dim.pow(2)
}

/// Orthonormal Hermitian basis of `D×D` matrices: `I/√D` first, then the
/// generalized Gell-Mann matrices (symmetric, antisymmetric, diagonal).
fn hermitian_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut basis = vec![identity(d) * cr(1.0 / (d as f64).sqrt())];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = zeros(d, d);
            sym[(j, k)] = cr(s);
            sym[(k, j)] = cr(s);
            basis.push(sym);
            let mut anti = zeros(d, d);
            anti[(j, k)] = c(0.0, -s);
            anti[(k, j)] = c(0.0, s);
            basis.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = cr(norm);
        }
        diag[(l, l)] = cr(-(l as f64) * norm);
        basis.push(diag);
    }
    basis
}

/// Precomputed coordinate basis for one system dimension.
#[derive(Debug, Clone)]
pub struct TpBasis {
    dim: usize,
    origin: ComplexMatrix,
    elements: Vec<ComplexMatrix>,
}

impl TpBasis {
    pub fn new(dim: usize) -> Self {
        let h = hermitian_basis(dim);
        let mut elements = Vec::with_capacity(affine_dim(dim));
        for g in h.iter().skip(1) {
            for f in &h {
                elements.push(kron(g, f));
            }
        }
        let origin = identity(dim * dim) * cr(1.0 / dim as f64);
        Self { dim, origin, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn affine_dim(&self) -> usize {
        self.elements.len()
    }

    pub fn coordinates(&self, channel: &Channel) -> Result<ChoiCoordinates> {
        if channel.dim_in() != self.dim || channel.dim_out() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "basis for dimension {} given a channel {}→{}",
                self.dim,
                channel.dim_in(),
                channel.dim_out()
            )));
        }
        let j = channel.choi();
        let defect = frobenius(&(partial_trace_first(&j, self.dim, self.dim) - identity(self.dim)));
        if defect > 1e-9 {
            return Err(Error::InvalidChannel(format!(
                "coordinates need a trace-preserving map (defect {defect:e})"
            )));
        }
        let delta = j - &self.origin;
        let vector = self
            .elements
            .iter()
            .map(|b| b.iter().zip(delta.iter()).map(|(x, y)| (x.conj() * y).re).sum())
            .collect();
        Ok(ChoiCoordinates { dim: self.dim, vector })
    }

    pub fn choi(&self, coords: &ChoiCoordinates) -> Result<ComplexMatrix> {
        if coords.dim != self.dim || coords.vector.len() != self.elements.len() {
            return Err(Error::DimensionMismatch(format!(
                "coordinates of length {} for a dimension-{} basis",
                coords.vector.len(),
                self.dim
            )));
        }
        let mut j = self.origin.clone();
        for (b, &x) in self.elements.iter().zip(&coords.vector) {
            if x != 0.0 {
                j += b * cr(x);
            }
        }
        Ok(j)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiCoordinates {
    pub dim: usize,
    pub vector: Vec<f64>,
}

impl ChoiCoordinates {
    pub fn affine_dim(&self) -> usize {
        affine_dim(self.dim)
    }

    pub fn distance(&self, other: &ChoiCoordinates) -> f64 {
        self.vector
            .iter()
            .zip(&other.vector)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

pub fn choi_coordinates(channel: &Channel) -> Result<ChoiCoordinates> {
    if channel.dim_in() != channel.dim_out() {
        return Err(Error::InvalidChannel("coordinates need dim_in = dim_out".into()));
    }
    TpBasis::new(channel.dim_in()).coordinates(channel)
}

pub fn coordinates_to_choi(coords: &ChoiCoordinates) -> Result<Channel> {
    let j = TpBasis::new(coords.dim).choi(coords)?;
    Channel::from_choi(j, coords.dim, coords.dim)
}
