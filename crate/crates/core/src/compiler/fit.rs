//! Frank–Wolfe over the probability simplex for `min ½‖A r − b‖²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::weights::MixtureWeights;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    /// Target residual. The loop stops once the duality gap drops below `eta²`.
    pub eta: f64,
    pub max_iter: usize,
    /// Stop on this duality gap instead of `eta²`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    /// Keep the objective value of every iterate.
    #[serde(default)]
    pub record_history: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { eta: 1e-8, max_iter: 100_000, gap_tol: None, record_history: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub weights: MixtureWeights,
    /// `‖Σ r_k x_k − x_tar‖₂`.
    pub residual: f64,
    pub fw_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `√(2(f* + gap))` with `f*` replaced by the final objective: an upper
    /// bound on the best residual any weights could reach, plus the gap.
    pub certified_bound: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<f64>,
}

fn check_inputs(a: &RealMatrix, b: &[f64]) -> Result<()> {
    if a.ncols() == 0 {
        return Err(Error::InvalidParameter("empty library".into()));
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "coordinates have {} rows, target has {}",
            a.nrows(),
            b.len()
        )));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite coordinate".into()));
    }
    Ok(())
}

/// Iterations between exact gradient evaluations.
const REFRESH: usize = 256;

fn column_dist2(a: &RealMatrix, k: usize, y: &[f64]) -> f64 {
    a.column(k).iter().zip(y).map(|(x, t)| (x - t) * (x - t)).sum()
}

/// Residual `‖A r − b‖₂` recomputed from scratch.
pub fn mixture_residual(a: &RealMatrix, weights: &[f64], b: &[f64]) -> f64 {
    let mut y = vec![0.0; a.nrows()];
    for (k, &r) in weights.iter().enumerate() {
        if r != 0.0 {
            for (yi, xi) in y.iter_mut().zip(a.column(k).iter()) {
                *yi += r * xi;
            }
        }
    }
    y.iter().zip(b).map(|(p, t)| (p - t) * (p - t)).sum::<f64>().sqrt()
}

/// Columns of `a` are the library points, `b` the target point.
pub fn frank_wolfe(a: &RealMatrix, b: &[f64], options: &FitOptions) -> Result<FitResult> {
    check_inputs(a, b)?;
    let (n, m) = (a.nrows(), a.ncols());

    let start = (0..m)
        .map(|k| (k, column_dist2(a, k, b)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0;
    let mut r = vec![0.0; m];
    r[start] = 1.0;
    let mut y: Vec<f64> = a.column(start).iter().copied().collect();
    let mut resid: Vec<f64> = y.iter().zip(b).map(|(p, t)| p - t).collect();
    let mut f = 0.5 * resid.iter().map(|v| v * v).sum::<f64>();

    // AᵀA and Aᵀb make each iteration O(n + m); the gradient is refreshed
    // from the residual now and then to keep rounding from piling up.
    let gram = a.transpose() * a;
    let atb: Vec<f64> = (0..m).map(|k| a.column(k).iter().zip(b).map(|(x, t)| x * t).sum()).collect();
    let mut ay: Vec<f64> = gram.column(start).iter().copied().collect();

    let mut history = Vec::new();
    if options.record_history {
        history.push(f);
    }
    let stop = options.gap_tol.unwrap_or(options.eta * options.eta);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut grad = vec![0.0; m];

    while iterations < options.max_iter {
        if iterations % REFRESH == 0 {
            for (k, v) in ay.iter_mut().enumerate() {
                *v = a.column(k).iter().zip(&y).map(|(x, p)| x * p).sum();
            }
        }
        // ∇f = Aᵀ(Ar − b)
        for k in 0..m {
            grad[k] = ay[k] - atb[k];
        }
        let (s, gs) = grad
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (k, &g)| if g < best.1 { (k, g) } else { best });
        let gr: f64 = r.iter().zip(&grad).map(|(w, g)| w * g).sum();
        gap = gr - gs;
        if gap <= stop {
            converged = true;
            break;
        }
        // d = a_s − y, exact step γ = −⟨resid, d⟩/‖d‖² clipped to [0, 1]
        let d: Vec<f64> = a.column(s).iter().zip(&y).map(|(x, p)| x - p).collect();
        let dd: f64 = d.iter().map(|v| v * v).sum();
        if dd == 0.0 {
            converged = true;
            break;
        }
        let gamma = (-resid.iter().zip(&d).map(|(e, v)| e * v).sum::<f64>() / dd).clamp(0.0, 1.0);
        for w in r.iter_mut() {
            *w *= 1.0 - gamma;
        }
        r[s] += gamma;
        for i in 0..n {
            y[i] += gamma * d[i];
            resid[i] = y[i] - b[i];
        }
        for (k, v) in ay.iter_mut().enumerate() {
            *v += gamma * (gram[(k, s)] - *v);
        }
        f = 0.5 * resid.iter().map(|v| v * v).sum::<f64>();
        iterations += 1;
        if options.record_history {
            history.push(f);
        }
    }

    let weights = MixtureWeights::new(r)?;
    let residual = mixture_residual(a, weights.weights(), b);
    let certified_bound = (2.0 * (f + gap.max(0.0))).sqrt();
    Ok(FitResult { weights, residual, fw_gap: gap, iterations, converged, certified_bound, history })
}
