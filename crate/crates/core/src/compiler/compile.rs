//! One stroboscopic step `G ∘ B ∘ U` compiled against a Lindblad target.

use serde::{Deserialize, Serialize};

use super::fit::{frank_wolfe, FitOptions, FitResult};
use super::library::{LibrarySource, LogicalChannelLibrary};
use super::prune::caratheodory_prune;
use crate::channel::{compose, Channel, ChannelDocument, TpBasis};
use crate::error::{Error, Result};
use crate::lindblad::LindbladModel;
use crate::linalg::frobenius;
use crate::weights::MixtureWeights;

#[derive(Debug, Clone)]
pub enum Strategy {
    /// Fit `Σ r_k B^(k) ∘ U` to the target. The library holds the `B^(k)`,
    /// the noisy correction rounds themselves, with element 0 the baseline.
    A,
    /// Fit `G_s` to the dissipative step alone and run it after a fully
    /// corrected baseline: `G_s ∘ B^FT ∘ U`.
    B { baseline: Channel },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StrategyKind {
    A,
    B,
}

/// What Strategy A is fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepTarget {
    /// The exact propagator `exp(Lτ)`.
    #[default]
    Exact,
    /// `exp(L_D τ) ∘ exp(−iHτ)`, the same factorization the step itself uses.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileOptions {
    #[serde(flatten)]
    pub fit: FitOptions,
    #[serde(default)]
    pub target: StepTarget,
    /// Reduce the support of the fitted weights afterwards.
    #[serde(default)]
    pub prune: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self { fit: FitOptions::default(), target: StepTarget::Exact, prune: false }
    }
}

#[derive(Debug, Clone)]
pub struct CompiledStep {
    pub strategy: StrategyKind,
    pub tau: f64,
    pub coherent: Channel,
    pub baseline: Channel,
    pub programmed: MixtureWeights,
    pub labels: Vec<String>,
    pub fit: FitResult,
    /// The channel the fit was measured against.
    pub target: Channel,
    pub assembled: Channel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompiledStepDocument {
    pub strategy: StrategyKind,
    pub tau: f64,
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
    pub support: Vec<usize>,
    pub residual: f64,
    pub fw_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub certified_bound: f64,
    pub assembled: ChannelDocument,
}

impl CompiledStep {
    /// The same weights run on a possibly different set of physical channels:
    /// Strategy A swaps in `library`, Strategy B swaps in `library` for the
    /// programmable maps and `baseline` for the corrected round.
    pub fn realize(&self, library: &LogicalChannelLibrary, baseline: Option<&Channel>) -> Result<Channel> {
        if library.len() != self.programmed.len() {
            return Err(Error::DimensionMismatch("library size differs from the compiled weights".into()));
        }
        match self.strategy {
            StrategyKind::A => {
                let composed = library.after(&self.coherent, library.source().clone())?;
                composed.mix(&self.programmed)
            }
            StrategyKind::B => {
                let g = library.mix(&self.programmed)?;
                let b = baseline.unwrap_or(&self.baseline);
                compose(&compose(&g, b)?, &self.coherent)
            }
        }
    }

    pub fn to_document(&self) -> CompiledStepDocument {
        CompiledStepDocument {
            strategy: self.strategy,
            tau: self.tau,
            labels: self.labels.clone(),
            weights: self.programmed.weights().to_vec(),
            support: self.programmed.support().to_vec(),
            residual: self.fit.residual,
            fw_gap: self.fit.fw_gap,
            iterations: self.fit.iterations,
            converged: self.fit.converged,
            certified_bound: self.fit.certified_bound,
            assembled: self.assembled.to_choi().to_document(),
        }
    }
}

/// `‖x(a) − x(b)‖₂`, equal to the Frobenius distance of the Choi matrices.
pub fn coordinate_distance(a: &Channel, b: &Channel) -> Result<f64> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::DimensionMismatch("channels differ in dimension".into()));
    }
    Ok(frobenius(&(a.choi() - b.choi())))
}

/// Fit a mixture of `library` to `target` in Choi coordinates.
pub fn fit_mixture(library: &LogicalChannelLibrary, target: &Channel, options: &FitOptions) -> Result<FitResult> {
    if target.dim_in() != library.dim() || target.dim_out() != library.dim() {
        return Err(Error::DimensionMismatch("target and library differ in dimension".into()));
    }
    let b = TpBasis::new(library.dim()).coordinates(target)?;
    frank_wolfe(library.coords(), &b.vector, options)
}

fn finish_fit(library: &LogicalChannelLibrary, target: &Channel, options: &CompileOptions) -> Result<FitResult> {
    let mut fit = fit_mixture(library, target, &options.fit)?;
    if options.prune {
        let pruned = caratheodory_prune(library.coords(), &fit.weights)?;
        if !pruned.failed {
            fit.weights = pruned.weights;
        }
    }
    if !(fit.residual <= options.fit.eta) {
        return Err(Error::CompileFailure { fit: Box::new(fit), eta: options.fit.eta });
    }
    Ok(fit)
}

pub fn compile_step(
    strategy: &Strategy,
    model: &LindbladModel,
    tau: f64,
    library: &LogicalChannelLibrary,
    options: &CompileOptions,
) -> Result<CompiledStep> {
    if library.dim() != model.dim() {
        return Err(Error::DimensionMismatch(format!(
            "library acts on dimension {}, model on {}",
            library.dim(),
            model.dim()
        )));
    }
    let coherent = model.coherent_step(tau)?;
    let dissipative = model.dissipative_part().exact_step(tau)?;
    match strategy {
        Strategy::A => {
            let target = match options.target {
                StepTarget::Exact => model.exact_step(tau)?,
                StepTarget::Split => compose(&dissipative, &coherent)?,
            };
            let composed = library.after(&coherent, LibrarySource::Custom { description: "B(k) after U".into() })?;
            let fit = finish_fit(&composed, &target, options)?;
            let assembled = composed.mix(&fit.weights)?;
            Ok(CompiledStep {
                strategy: StrategyKind::A,
                tau,
                coherent,
                baseline: library.channels()[0].clone(),
                programmed: fit.weights.clone(),
                labels: library.labels().to_vec(),
                fit,
                target,
                assembled,
            })
        }
        Strategy::B { baseline } => {
            if baseline.dim_in() != model.dim() || baseline.dim_out() != model.dim() {
                return Err(Error::DimensionMismatch("baseline and model differ in dimension".into()));
            }
            let fit = finish_fit(library, &dissipative, options)?;
            let g = library.mix(&fit.weights)?;
            let assembled = compose(&compose(&g, baseline)?, &coherent)?;
            Ok(CompiledStep {
                strategy: StrategyKind::B,
                tau,
                coherent,
                baseline: baseline.clone(),
                programmed: fit.weights.clone(),
                labels: library.labels().to_vec(),
                fit,
                target: dissipative,
                assembled,
            })
        }
    }
}
