//! Support reduction for mixtures: any point in the hull of points in an
//! `n`-dimensional affine space is a mixture of at most `n + 1` of them.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::RealMatrix;
use crate::weights::{MixtureWeights, SUPPORT_TOL};

/// Largest acceptable `‖M v‖` for a null direction.
pub const NULL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneResult {
    pub weights: MixtureWeights,
    /// Set when a null direction was not accurate enough; the input weights
    /// are then returned unchanged.
    pub failed: bool,
    pub removed: usize,
}

/// Drops support points until at most `rows(a) + 1` remain, keeping `A r` fixed.
pub fn caratheodory_prune(a: &RealMatrix, weights: &MixtureWeights) -> Result<PruneResult> {
    let n = a.nrows();
    let bound = n + 1;
    let mut r = weights.weights().to_vec();
    let mut removed = 0;

    loop {
        let active: Vec<usize> = (0..r.len()).filter(|&k| r[k] > SUPPORT_TOL).collect();
        if active.len() <= bound {
            break;
        }
        // n + 2 points in n dimensions are affinely dependent: find v with
        // Σ v_k x_k = 0 and Σ v_k = 0 from the smallest singular vector
        let cols = &active[..bound + 1];
        let size = bound + 1;
        let mut m = RealMatrix::zeros(size, size);
        for (j, &k) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = a[(i, k)];
            }
            m[(n, j)] = 1.0;
        }
        let svd = m.clone().svd(false, true);
        let vt = svd.v_t.expect("requested right singular vectors");
        let min_idx = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best })
            .0;
        let v: Vec<f64> = vt.row(min_idx).iter().copied().collect();
        let mv = &m * nalgebra::DVector::from_vec(v.clone());
        if mv.norm() > NULL_TOL {
            return Ok(PruneResult { weights: weights.clone(), failed: true, removed: 0 });
        }

        // r_k − t v_k stays nonnegative until the first ratio r_k / v_k over v_k > 0
        let (hit, t) = cols
            .iter()
            .zip(&v)
            .filter(|(_, &vk)| vk > 0.0)
            .map(|(&k, &vk)| (k, r[k] / vk))
            .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        if hit == usize::MAX {
            return Ok(PruneResult { weights: weights.clone(), failed: true, removed: 0 });
        }
        for (&k, &vk) in cols.iter().zip(&v) {
            r[k] = (r[k] - t * vk).max(0.0);
        }
        r[hit] = 0.0;
        removed += 1;
    }

    let total: f64 = r.iter().sum();
    for w in r.iter_mut() {
        *w /= total;
    }
    Ok(PruneResult { weights: MixtureWeights::new(r)?, failed: false, removed })
}
