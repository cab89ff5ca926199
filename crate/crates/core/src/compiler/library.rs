//! Indexed families of implementable logical channels with precomputed
//! Choi coordinates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::pauli::pauli_labels;
use crate::channel::{
    amplitude_damping, compose, measure_z_discard, mix, on_qubit, reset_to_zero, tensor, Channel, TpBasis,
};
use crate::error::{Error, Result};
use crate::linalg::RealMatrix;
use crate::surface_code::{logical_channel_family, Estimation, NoiseModel, RecoveryPolicy, SurfaceCode};
use crate::weights::MixtureWeights;

/// Default strength of the amplitude-damping primitive.
pub const DEFAULT_LAMBDA_UNIT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LibrarySource {
    PauliFrames { n_qubits: usize },
    ResetFeedback { n_qubits: usize, lambda_unit: f64 },
    /// Pauli frames after a product of per-qubit `{I, AD(λ_unit)}` choices.
    Programmable { n_qubits: usize, lambda_unit: f64 },
    StrategyA { distance: usize, noise: NoiseModel, n_qubits: usize },
    Custom { description: String },
}

#[derive(Debug, Clone)]
pub struct LogicalChannelLibrary {
    channels: Vec<Channel>,
    labels: Vec<String>,
    coords: RealMatrix,
    source: LibrarySource,
}

impl LogicalChannelLibrary {
    pub fn new(channels: Vec<Channel>, labels: Vec<String>, source: LibrarySource) -> Result<Self> {
        let first = channels.first().ok_or_else(|| Error::InvalidParameter("empty library".into()))?;
        let dim = first.dim_in();
        if labels.len() != channels.len() {
            return Err(Error::InvalidParameter("one label per channel".into()));
        }
        for (ch, label) in channels.iter().zip(&labels) {
            if ch.dim_in() != dim || ch.dim_out() != dim {
                return Err(Error::DimensionMismatch(format!("library element {label} has other dimensions")));
            }
            let report = ch.validate();
            if !report.is_cptp() {
                return Err(Error::InvalidChannel(format!("library element {label} is not CPTP: {report:?}")));
            }
        }
        let basis = TpBasis::new(dim);
        let columns: Vec<Vec<f64>> = channels
            .par_iter()
            .map(|ch| basis.coordinates(ch).map(|c| c.vector))
            .collect::<Result<_>>()?;
        let coords = RealMatrix::from_fn(basis.affine_dim(), channels.len(), |i, k| columns[k][i]);
        Ok(Self { channels, labels, coords, source })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.channels[0].dim_in()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn coords(&self) -> &RealMatrix {
        &self.coords
    }

    pub fn source(&self) -> &LibrarySource {
        &self.source
    }

    pub fn mix(&self, weights: &MixtureWeights) -> Result<Channel> {
        mix(&self.channels, weights)
    }

    /// `Σ r_k x_k` in Choi coordinates.
    pub fn point(&self, weights: &MixtureWeights) -> Result<Vec<f64>> {
        if weights.len() != self.len() {
            return Err(Error::DimensionMismatch(format!("{} weights for {} channels", weights.len(), self.len())));
        }
        Ok((&self.coords * nalgebra::DVector::from_column_slice(weights.weights())).iter().copied().collect())
    }

    /// Every element followed by `second`: `{second ∘ G_k}`.
    pub fn then(&self, second: &Channel, source: LibrarySource) -> Result<Self> {
        let channels = self.channels.iter().map(|g| compose(second, g)).collect::<Result<_>>()?;
        Self::new(channels, self.labels.clone(), source)
    }

    /// Every element preceded by `first`: `{G_k ∘ first}`.
    pub fn after(&self, first: &Channel, source: LibrarySource) -> Result<Self> {
        let channels = self.channels.iter().map(|g| compose(g, first)).collect::<Result<_>>()?;
        let labels = self.labels.clone();
        Self::new(channels, labels, source)
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameter(format!("libraries cover 1 or 2 logical qubits, got {n}")));
    }
    Ok(())
}

fn frames(n: usize) -> Result<(Vec<Channel>, Vec<String>)> {
    let labels = pauli_labels(n);
    let channels = labels.iter().map(|l| Channel::pauli_conjugation(l)).collect::<Result<_>>()?;
    Ok((channels, labels))
}

/// The `4ⁿ` Pauli conjugations.
pub fn pauli_frame_library(n_qubits: usize) -> Result<LogicalChannelLibrary> {
    check_qubits(n_qubits)?;
    let (channels, labels) = frames(n_qubits)?;
    LogicalChannelLibrary::new(channels, labels, LibrarySource::PauliFrames { n_qubits })
}

/// Pauli frames plus, on each qubit, reset to `|0⟩`, Z measurement with the
/// outcome discarded, and amplitude damping of strength `lambda_unit`.
pub fn reset_feedback_library(n_qubits: usize, lambda_unit: f64) -> Result<LogicalChannelLibrary> {
    check_qubits(n_qubits)?;
    let (mut channels, mut labels) = frames(n_qubits)?;
    let ad = amplitude_damping(lambda_unit)?;
    for q in 0..n_qubits {
        for (name, ch) in [("reset", reset_to_zero()), ("measure-z", measure_z_discard()), ("ad", ad.clone())] {
            channels.push(on_qubit(&ch, q, n_qubits)?);
            labels.push(format!("{name}-q{q}"));
        }
    }
    LogicalChannelLibrary::new(channels, labels, LibrarySource::ResetFeedback { n_qubits, lambda_unit })
}

/// `P ∘ (g₁ ⊗ … ⊗ g_n)` for every Pauli frame `P` and `g_i ∈ {I, AD(λ_unit)}`.
pub fn programmable_library(n_qubits: usize, lambda_unit: f64) -> Result<LogicalChannelLibrary> {
    check_qubits(n_qubits)?;
    let ad = amplitude_damping(lambda_unit)?;
    let id = Channel::identity(2);
    let (frame_channels, frame_labels) = frames(n_qubits)?;
    let mut channels = Vec::new();
    let mut labels = Vec::new();
    for pattern in 0..1usize << n_qubits {
        let mut prod: Option<Channel> = None;
        let mut tag = String::new();
        for q in 0..n_qubits {
            let damped = pattern >> (n_qubits - 1 - q) & 1 == 1;
            let g = if damped { &ad } else { &id };
            tag.push(if damped { 'A' } else { 'I' });
            prod = Some(match prod {
                None => g.clone(),
                Some(p) => tensor(&p, g)?,
            });
        }
        let prod = prod.expect("at least one qubit");
        for (f, fl) in frame_channels.iter().zip(&frame_labels) {
            channels.push(compose(f, &prod)?.to_choi());
            labels.push(format!("{fl}.{tag}"));
        }
    }
    LogicalChannelLibrary::new(channels, labels, LibrarySource::Programmable { n_qubits, lambda_unit })
}

/// The channels of one correction round under each recovery policy. Element 0
/// is the first policy, normally the baseline.
pub fn strategy_a_library(
    code: &SurfaceCode,
    noise: &NoiseModel,
    estimation: Estimation,
    policies: &[RecoveryPolicy],
) -> Result<LogicalChannelLibrary> {
    let family = logical_channel_family(code, noise, estimation, policies)?;
    let channels = family.iter().map(|f| f.channel()).collect::<Result<_>>()?;
    let labels = policies.iter().map(|p| p.label()).collect();
    LogicalChannelLibrary::new(
        channels,
        labels,
        LibrarySource::StrategyA { distance: code.distance(), noise: *noise, n_qubits: 1 },
    )
}

/// Baseline then frames: `[baseline, frame-I, frame-X, frame-Y, frame-Z]`.
pub fn frame_policies() -> Vec<RecoveryPolicy> {
    let mut p = vec![RecoveryPolicy::Baseline];
    p.extend(RecoveryPolicy::frames());
    p
}
