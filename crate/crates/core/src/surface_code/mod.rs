//! Rotated surface code on a `d × d` grid of data qubits, with a
//! code-capacity noise model and an exact matching decoder.
//!
//! Data qubit `(r, c)` has index `r·d + c`. Stabilizers sit on the faces of
//! the grid: the face with top-left corner `(r, c)` touches data qubits
//! `(r, c)`, `(r, c+1)`, `(r+1, c)`, `(r+1, c+1)` that exist. Bulk faces
//! alternate X/Z in a checkerboard (`r + c` even is X). Weight-2 X faces run
//! along the top and bottom edges, weight-2 Z faces along the left and right.
//!
//! Syndromes list the X stabilizers first, then the Z stabilizers.

pub mod decoder;
pub mod extract;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use decoder::{Decoder, MatchingGraph, Sector};
pub use extract::{
    extract_logical_channel, logical_channel_family, Estimation, LogicalRoundChannel, NoiseKind, NoiseModel,
    RecoveryPolicy,
};

/// Largest distance whose data qubits fit in a `u128` mask.
pub const MAX_DISTANCE: usize = 11;

/// A Pauli operator on the data qubits, up to phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct PauliError {
    pub x_mask: u128,
    pub z_mask: u128,
}

impl PauliError {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new(x_mask: u128, z_mask: u128) -> Self {
        Self { x_mask, z_mask }
    }

    pub fn x_on(qubits: &[usize]) -> Self {
        Self { x_mask: mask_of(qubits), z_mask: 0 }
    }

    pub fn z_on(qubits: &[usize]) -> Self {
        Self { x_mask: 0, z_mask: mask_of(qubits) }
    }

    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn compose(&self, other: &PauliError) -> PauliError {
        PauliError { x_mask: self.x_mask ^ other.x_mask, z_mask: self.z_mask ^ other.z_mask }
    }

    pub fn commutes_with(&self, other: &PauliError) -> bool {
        ((self.x_mask & other.z_mask).count_ones() + (self.z_mask & other.x_mask).count_ones()) % 2 == 0
    }
}

pub fn mask_of(qubits: &[usize]) -> u128 {
    qubits.iter().fold(0, |m, &q| m | (1u128 << q))
}

fn qubits_of(mask: u128) -> Vec<usize> {
    (0..128).filter(|&q| mask >> q & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCode {
    distance: usize,
    data_qubits: Vec<(usize, usize)>,
    x_stabilizers: Vec<Vec<usize>>,
    z_stabilizers: Vec<Vec<usize>>,
    logical_x: Vec<usize>,
    logical_z: Vec<usize>,
    #[serde(skip)]
    x_masks: Vec<u128>,
    #[serde(skip)]
    z_masks: Vec<u128>,
}

impl SurfaceCode {
    pub fn new(distance: usize) -> Result<Self> {
        if distance < 3 || distance % 2 == 0 || distance > MAX_DISTANCE {
            return Err(Error::InvalidParameter(format!(
                "distance must be odd and in 3..={MAX_DISTANCE}, got {distance}"
            )));
        }
        let d = distance as i64;
        let data_qubits = (0..distance).flat_map(|r| (0..distance).map(move |c| (r, c))).collect();
        let face = |r: i64, c: i64| -> Vec<usize> {
            let mut qs = Vec::new();
            for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let (qr, qc) = (r + dr, c + dc);
                if (0..d).contains(&qr) && (0..d).contains(&qc) {
                    qs.push((qr * d + qc) as usize);
                }
            }
            qs
        };
        let mut x_stabilizers = Vec::new();
        let mut z_stabilizers = Vec::new();
        for r in -1..d {
            for c in -1..d {
                let is_x = (r + c).rem_euclid(2) == 0;
                let top_or_bottom = r == -1 || r == d - 1;
                let left_or_right = c == -1 || c == d - 1;
                let keep = match (top_or_bottom, left_or_right) {
                    (false, false) => true,
                    (true, false) => is_x,
                    (false, true) => !is_x,
                    (true, true) => false,
                };
                if !keep {
                    continue;
                }
                if is_x {
                    x_stabilizers.push(face(r, c));
                } else {
                    z_stabilizers.push(face(r, c));
                }
            }
        }
        let n = distance;
        let logical_x: Vec<usize> = (0..n).map(|r| r * n).collect();
        let logical_z: Vec<usize> = (0..n).collect();
        let x_masks = x_stabilizers.iter().map(|s| mask_of(s)).collect();
        let z_masks = z_stabilizers.iter().map(|s| mask_of(s)).collect();
        Ok(Self { distance, data_qubits, x_stabilizers, z_stabilizers, logical_x, logical_z, x_masks, z_masks })
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn n_data(&self) -> usize {
        self.data_qubits.len()
    }

    pub fn data_qubits(&self) -> &[(usize, usize)] {
        &self.data_qubits
    }

    pub fn x_stabilizers(&self) -> &[Vec<usize>] {
        &self.x_stabilizers
    }

    pub fn z_stabilizers(&self) -> &[Vec<usize>] {
        &self.z_stabilizers
    }

    pub fn n_stabilizers(&self) -> usize {
        self.x_stabilizers.len() + self.z_stabilizers.len()
    }

    /// Data qubits plus one measurement ancilla per stabilizer: `2d² − 1`.
    pub fn patch_qubits(&self) -> usize {
        self.n_data() + self.n_stabilizers()
    }

    pub fn logical_x(&self) -> PauliError {
        PauliError::x_on(&self.logical_x)
    }

    pub fn logical_z(&self) -> PauliError {
        PauliError::z_on(&self.logical_z)
    }

    pub fn x_stabilizer_masks(&self) -> &[u128] {
        &self.x_masks
    }

    pub fn z_stabilizer_masks(&self) -> &[u128] {
        &self.z_masks
    }

    /// All stabilizers as Pauli operators, X-type first.
    pub fn stabilizers(&self) -> Vec<PauliError> {
        self.x_masks
            .iter()
            .map(|&m| PauliError::new(m, 0))
            .chain(self.z_masks.iter().map(|&m| PauliError::new(0, m)))
            .collect()
    }

    /// One bit per stabilizer, set when it anticommutes with `error`.
    pub fn syndrome(&self, error: &PauliError) -> u128 {
        let nx = self.x_masks.len();
        let mut s = 0u128;
        for (i, m) in self.x_masks.iter().enumerate() {
            s |= (((m & error.z_mask).count_ones() & 1) as u128) << i;
        }
        for (i, m) in self.z_masks.iter().enumerate() {
            s |= (((m & error.x_mask).count_ones() & 1) as u128) << (nx + i);
        }
        s
    }

    /// Split a full syndrome into its X-stabilizer and Z-stabilizer parts.
    pub fn split_syndrome(&self, syndrome: u128) -> (u128, u128) {
        let nx = self.x_masks.len();
        (syndrome & ((1u128 << nx) - 1), syndrome >> nx)
    }

    /// GF(2) rank of the stabilizer generators.
    pub fn independent_stabilizers(&self) -> usize {
        gf2_rank(&self.x_masks) + gf2_rank(&self.z_masks)
    }

    /// Logical class of an operator that commutes with every stabilizer, as
    /// one of `I`, `X`, `Y`, `Z`.
    pub fn logical_class(&self, op: &PauliError) -> Result<char> {
        if self.syndrome(op) != 0 {
            return Err(Error::Numeric("residual operator has a nonzero syndrome".into()));
        }
        let flips_x = !op.commutes_with(&self.logical_z());
        let flips_z = !op.commutes_with(&self.logical_x());
        Ok(match (flips_x, flips_z) {
            (false, false) => 'I',
            (true, false) => 'X',
            (true, true) => 'Y',
            (false, true) => 'Z',
        })
    }

    pub fn qubits_of(&self, mask: u128) -> Vec<usize> {
        qubits_of(mask)
    }
}

fn gf2_rank(rows: &[u128]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for bit in 0..128 {
        let pivot = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1);
        if let Some(p) = pivot {
            rows.swap(rank, p);
            for i in 0..rows.len() {
                if i != rank && rows[i] >> bit & 1 == 1 {
                    rows[i] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank
}
