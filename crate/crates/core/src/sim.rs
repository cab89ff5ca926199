//! End-to-end studies: channel fits against a dephasing target, stroboscopic
//! exciton dynamics, and distance/footprint grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    amplitude_damping, diamond_distance_bounds, state_trace_distance, tensor, Channel, DiamondBounds, DiamondOptions,
};
use crate::compiler::{
    compile_step, coordinate_distance, fit_mixture, frame_policies, FitResult, pauli_frame_library, programmable_library,
    reset_feedback_library, strategy_a_library, CompileOptions, CompiledStep, FitOptions, LibrarySource, LogicalChannelLibrary, StepTarget,
    Strategy, StrategyKind, DEFAULT_LAMBDA_UNIT,
};
use crate::error::{Error, Result};
use crate::lindblad::{build_exciton_model, dephasing_model, ExcitonParams};
use crate::resource::{
    footprint, savings_ratio, savings_ratio_square, strategy_a_distance, strategy_b_distance, BudgetSpec,
    DistanceRule, ScalingAnsatz,
};
use crate::state::DensityMatrix;
use crate::surface_code::{
    extract_logical_channel, logical_channel_family, Estimation, LogicalRoundChannel, NoiseKind, NoiseModel, RecoveryPolicy, SurfaceCode,
};

/// A code distance with its physical noise. Without `samples` the round is
/// enumerated exactly (d = 3 only); otherwise Monte Carlo with the study seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeRoundSpec {
    pub distance: usize,
    pub noise: NoiseModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
}

impl CodeRoundSpec {
    pub fn exact(distance: usize, noise: NoiseModel) -> Self {
        Self { distance, noise, samples: None }
    }

    pub fn estimation(&self, seed: u64) -> Estimation {
        match self.samples {
            None => Estimation::ExactEnumeration,
            Some(samples) => Estimation::MonteCarlo { samples, seed },
        }
    }

    /// The baseline round's logical channel at `mismatch × p_phys`.
    pub fn baseline(&self, mismatch: f64, seed: u64) -> Result<Channel> {
        let code = SurfaceCode::new(self.distance)?;
        let noise = self.noise.assumed().with_mismatch(mismatch)?;
        extract_logical_channel(&code, &noise, self.estimation(seed))?.channel()
    }
}

fn dephasing_noise(p: f64) -> NoiseModel {
    NoiseModel { kind: NoiseKind::DephasingOnly, p_phys: p, mismatch_factor: 1.0 }
}

/// `n` points from `lo` to `hi`, evenly spaced in `log`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `n` evenly spaced points from `lo` to `hi`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

// ------------------------------------------------------------ extract study

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractSpec {
    pub distance: usize,
    pub noise: NoiseModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default = "default_policies")]
    pub policies: Vec<RecoveryPolicy>,
    #[serde(default)]
    pub seed: u64,
}

fn default_policies() -> Vec<RecoveryPolicy> {
    vec![RecoveryPolicy::Baseline]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliRow {
    pub policy: String,
    #[serde(rename = "I")]
    pub p_i: f64,
    #[serde(rename = "X")]
    pub p_x: f64,
    #[serde(rename = "Y")]
    pub p_y: f64,
    #[serde(rename = "Z")]
    pub p_z: f64,
    pub se_i: f64,
    pub se_x: f64,
    pub se_y: f64,
    pub se_z: f64,
    pub logical_error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub channels: Vec<LogicalRoundChannel>,
}

impl ExtractReport {
    pub fn csv(&self) -> Result<String> {
        let rows: Vec<PauliRow> = self
            .channels
            .iter()
            .map(|c| {
                let p = |k: &str| c.pauli_probs.get(k).copied().unwrap_or(0.0);
                let se = |k: &str| c.standard_errors.get(k).copied().unwrap_or(0.0);
                PauliRow {
                    policy: c.policy.label(),
                    p_i: p("I"),
                    p_x: p("X"),
                    p_y: p("Y"),
                    p_z: p("Z"),
                    se_i: se("I"),
                    se_x: se("X"),
                    se_y: se("Y"),
                    se_z: se("Z"),
                    logical_error_rate: c.logical_error_rate(),
                }
            })
            .collect();
        csv_string(&rows)
    }
}

/// The logical channel of one round under each listed policy.
pub fn run_extract_study(spec: &ExtractSpec) -> Result<ExtractReport> {
    let code = SurfaceCode::new(spec.distance)?;
    let round = CodeRoundSpec { distance: spec.distance, noise: spec.noise, samples: spec.samples };
    let channels = logical_channel_family(&code, &spec.noise, round.estimation(spec.seed), &spec.policies)?;
    Ok(ExtractReport { channels })
}

// ---------------------------------------------------------------- fit study

/// Which logical frames the fit may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FrameSet {
    #[default]
    Full,
    /// Only `I` and `Z`.
    Iz,
}

impl FrameSet {
    fn labels(self) -> &'static [char] {
        match self {
            FrameSet::Full => &['I', 'X', 'Y', 'Z'],
            FrameSet::Iz => &['I', 'Z'],
        }
    }

    fn policies(self) -> Vec<RecoveryPolicy> {
        match self {
            FrameSet::Full => frame_policies(),
            FrameSet::Iz => {
                let mut p = vec![RecoveryPolicy::Baseline];
                p.extend(self.labels().iter().map(|&label| RecoveryPolicy::Frame { label }));
                p
            }
        }
    }

    fn frame_library(self) -> Result<LogicalChannelLibrary> {
        match self {
            FrameSet::Full => pauli_frame_library(1),
            FrameSet::Iz => {
                let labels: Vec<String> = self.labels().iter().map(|c| c.to_string()).collect();
                let channels = labels.iter().map(|l| Channel::pauli_conjugation(l)).collect::<Result<_>>()?;
                LogicalChannelLibrary::new(channels, labels, LibrarySource::Custom { description: "I and Z frames".into() })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitStudySpec {
    #[serde(default = "default_gamma_tau_grid")]
    pub gamma_tau: Vec<f64>,
    #[serde(default = "default_mismatch_grid")]
    pub mismatch: Vec<f64>,
    /// Target strength for the mismatch sweep.
    #[serde(default = "default_fixed_gamma_tau")]
    pub fixed_gamma_tau: f64,
    #[serde(default = "default_fit_round_a")]
    pub strategy_a: CodeRoundSpec,
    #[serde(default = "default_fit_round_b")]
    pub strategy_b: CodeRoundSpec,
    #[serde(default)]
    pub frames: FrameSet,
    #[serde(default)]
    pub fit: FitOptions,
    /// Optional amplitude-damping sweep against the unital and non-unital libraries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull: Option<HullSpec>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HullSpec {
    #[serde(default = "default_hull_lambdas")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_lambda_unit")]
    pub lambda_unit: f64,
}

impl Default for HullSpec {
    fn default() -> Self {
        Self { lambda: default_hull_lambdas(), lambda_unit: DEFAULT_LAMBDA_UNIT }
    }
}

fn default_hull_lambdas() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.5]
}

fn default_gamma_tau_grid() -> Vec<f64> {
    log_grid(0.01, 0.2, 16)
}

fn default_mismatch_grid() -> Vec<f64> {
    linear_grid(0.85, 1.15, 7)
}

fn default_fixed_gamma_tau() -> f64 {
    0.08
}

fn default_fit_round_a() -> CodeRoundSpec {
    CodeRoundSpec::exact(3, dephasing_noise(0.01))
}

fn default_fit_round_b() -> CodeRoundSpec {
    CodeRoundSpec { distance: 7, noise: dephasing_noise(0.01), samples: Some(200_000) }
}

impl Default for FitStudySpec {
    fn default() -> Self {
        Self {
            gamma_tau: default_gamma_tau_grid(),
            mismatch: default_mismatch_grid(),
            fixed_gamma_tau: default_fixed_gamma_tau(),
            strategy_a: default_fit_round_a(),
            strategy_b: default_fit_round_b(),
            frames: FrameSet::Full,
            fit: FitOptions::default(),
            hull: None,
            seed: 0,
        }
    }
}

impl FitStudySpec {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_tau.is_empty() || self.mismatch.is_empty() {
            return Err(Error::InvalidParameter("empty grid".into()));
        }
        if self.gamma_tau.iter().chain([&self.fixed_gamma_tau]).any(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidParameter("γτ values must be positive".into()));
        }
        for f in &self.mismatch {
            self.strategy_a.noise.with_mismatch(*f)?;
            self.strategy_b.noise.with_mismatch(*f)?;
        }
        SurfaceCode::new(self.strategy_a.distance)?;
        SurfaceCode::new(self.strategy_b.distance)?;
        if let Some(h) = &self.hull {
            if h.lambda.iter().any(|l| !(0.0..=1.0).contains(l)) {
                return Err(Error::InvalidParameter("damping strengths must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

/// One row of either sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub gamma_tau: f64,
    pub mismatch_factor: f64,
    pub strategy: StrategyKind,
    pub distance: usize,
    pub residual: f64,
    pub certified_bound: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Weight per logical frame, baseline folded into `I`.
    pub p_i: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    /// `1 − P(I)` of the uncorrected-frame round at this noise.
    pub baseline_error_rate: f64,
    pub status: String,
}

/// Full weight vector behind one sweep row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitWeights {
    pub gamma_tau: f64,
    pub strategy: StrategyKind,
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullPoint {
    pub lambda: f64,
    pub library: String,
    pub lambda_unit: Option<f64>,
    pub residual: f64,
    pub certified_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitStudyReport {
    pub sweep: Vec<FitPoint>,
    pub mismatch: Vec<FitPoint>,
    pub weights: Vec<FitWeights>,
    pub hull: Vec<HullPoint>,
}

impl FitStudyReport {
    pub fn sweep_csv(&self) -> Result<String> {
        csv_string(&self.sweep)
    }

    pub fn mismatch_csv(&self) -> Result<String> {
        csv_string(&self.mismatch)
    }

    pub fn hull_csv(&self) -> Result<String> {
        csv_string(&self.hull)
    }

    /// Rows with a compile failure, for diagnostics.
    pub fn failures(&self) -> impl Iterator<Item = &FitPoint> {
        self.sweep.iter().chain(&self.mismatch).filter(|p| p.status != "ok")
    }
}

/// Amplitude damping `AD(λ)` fitted by the Pauli frames and by the
/// reset/feedback library.
pub fn run_hull_sweep(spec: &HullSpec, fit: &FitOptions) -> Result<Vec<HullPoint>> {
    let frames = pauli_frame_library(1)?;
    let reset = reset_feedback_library(1, spec.lambda_unit)?;
    let libraries = [("pauli_frames", &frames, None), ("reset_feedback", &reset, Some(spec.lambda_unit))];
    let grid: Vec<(f64, usize)> = spec.lambda.iter().flat_map(|&l| (0..libraries.len()).map(move |k| (l, k))).collect();
    grid.par_iter()
        .map(|&(lambda, k)| {
            let (name, lib, unit) = libraries[k];
            let r = fit_mixture(lib, &amplitude_damping(lambda)?, fit)?;
            Ok(HullPoint {
                lambda,
                library: name.into(),
                lambda_unit: unit,
                residual: r.residual,
                certified_bound: r.certified_bound,
            })
        })
        .collect()
}

fn frame_of(label: &str) -> char {
    match label {
        "baseline" => 'I',
        l => l.chars().last().unwrap_or('I'),
    }
}

fn frame_probs(labels: &[String], weights: &[f64]) -> [f64; 4] {
    let mut p = [0.0; 4];
    for (l, w) in labels.iter().zip(weights) {
        let k = match frame_of(l) {
            'X' => 1,
            'Y' => 2,
            'Z' => 3,
            _ => 0,
        };
        p[k] += w;
    }
    p
}

/// One minus the entanglement fidelity, which is `1 − P(I)` for a Pauli channel.
fn error_rate(ch: &Channel) -> Result<f64> {
    let id = Channel::identity(ch.dim_in());
    let overlap = (id.choi().adjoint() * ch.choi()).trace().re / (ch.dim_in() * ch.dim_in()) as f64;
    Ok(1.0 - overlap)
}

struct FitContext {
    spec: FitStudySpec,
    lib_a: LogicalChannelLibrary,
    frames_b: LogicalChannelLibrary,
    baseline_b: Channel,
}

impl FitContext {
    fn options(&self) -> CompileOptions {
        CompileOptions { fit: self.spec.fit, target: StepTarget::Exact, prune: false }
    }

    fn point(
        &self,
        kind: StrategyKind,
        gamma_tau: f64,
        mismatch: f64,
        outcome: Result<(f64, &CompiledStep)>,
        baseline_error_rate: f64,
    ) -> FitPoint {
        let distance = match kind {
            StrategyKind::A => self.spec.strategy_a.distance,
            StrategyKind::B => self.spec.strategy_b.distance,
        };
        let mut p = FitPoint {
            gamma_tau,
            mismatch_factor: mismatch,
            strategy: kind,
            distance,
            residual: f64::NAN,
            certified_bound: f64::NAN,
            iterations: 0,
            converged: false,
            p_i: f64::NAN,
            p_x: f64::NAN,
            p_y: f64::NAN,
            p_z: f64::NAN,
            baseline_error_rate,
            status: "ok".into(),
        };
        match outcome {
            Ok((residual, step)) => {
                let fp = frame_probs(&step.labels, step.programmed.weights());
                p.residual = residual;
                p.certified_bound = step.fit.certified_bound;
                p.iterations = step.fit.iterations;
                p.converged = step.fit.converged;
                [p.p_i, p.p_x, p.p_y, p.p_z] = fp;
            }
            Err(Error::CompileFailure { fit, .. }) => {
                p.residual = fit.residual;
                p.certified_bound = fit.certified_bound;
                p.iterations = fit.iterations;
                p.converged = fit.converged;
                p.status = "compile_failure".into();
            }
            Err(e) => p.status = format!("error: {e}"),
        }
        p
    }

    fn compile(&self, kind: StrategyKind, gamma_tau: f64) -> Result<CompiledStep> {
        let model = dephasing_model(gamma_tau)?;
        match kind {
            StrategyKind::A => compile_step(&Strategy::A, &model, 1.0, &self.lib_a, &self.options()),
            StrategyKind::B => compile_step(
                &Strategy::B { baseline: self.baseline_b.clone() },
                &model,
                1.0,
                &self.frames_b,
                &self.options(),
            ),
        }
    }
}

/// Sweep `γτ` at matched noise, then sweep the noise mismatch at
/// `fixed_gamma_tau` with the weights compiled for the nominal noise.
pub fn run_channel_fit_study(spec: &FitStudySpec) -> Result<FitStudyReport> {
    spec.validate()?;
    let code_a = SurfaceCode::new(spec.strategy_a.distance)?;
    let est_a = spec.strategy_a.estimation(spec.seed);
    let lib_a = strategy_a_library(&code_a, &spec.strategy_a.noise.assumed(), est_a, &spec.frames.policies())?;
    let ctx = FitContext {
        spec: spec.clone(),
        lib_a,
        frames_b: spec.frames.frame_library()?,
        baseline_b: spec.strategy_b.baseline(1.0, spec.seed)?,
    };
    let rate_a = error_rate(&ctx.lib_a.channels()[0])?;
    let rate_b = error_rate(&ctx.baseline_b)?;

    let compiled: Vec<(FitPoint, Option<FitWeights>)> = spec
        .gamma_tau
        .par_iter()
        .flat_map_iter(|&g| {
            [(StrategyKind::A, rate_a), (StrategyKind::B, rate_b)].map(|(kind, rate)| {
                let step = ctx.compile(kind, g);
                let weights = step.as_ref().ok().map(|s| FitWeights {
                    gamma_tau: g,
                    strategy: kind,
                    labels: s.labels.clone(),
                    weights: s.programmed.weights().to_vec(),
                });
                (ctx.point(kind, g, 1.0, step.as_ref().map(|s| (s.fit.residual, s)).map_err(clone_err), rate), weights)
            })
        })
        .collect();
    let (sweep, weights): (Vec<FitPoint>, Vec<Option<FitWeights>>) = compiled.into_iter().unzip();
    let weights = weights.into_iter().flatten().collect();

    let g = spec.fixed_gamma_tau;
    let step_a = ctx.compile(StrategyKind::A, g);
    let step_b = ctx.compile(StrategyKind::B, g);
    let mismatch: Vec<FitPoint> = spec
        .mismatch
        .par_iter()
        .map(|&f| -> Result<[FitPoint; 2]> {
            let noise_a = spec.strategy_a.noise.assumed().with_mismatch(f)?;
            let lib_true = strategy_a_library(&code_a, &noise_a, est_a, &spec.frames.policies())?;
            let a = step_a.as_ref().map_err(clone_err).and_then(|s| {
                let realized = s.realize(&lib_true, None)?;
                Ok((coordinate_distance(&realized, &s.target)?, s))
            });
            let baseline_true = spec.strategy_b.baseline(f, spec.seed)?;
            let b = step_b.as_ref().map_err(clone_err).and_then(|s| {
                // the programmed map alone is what is fitted; the baseline is budgeted apart
                let g_s = ctx.frames_b.mix(&s.programmed)?;
                Ok((coordinate_distance(&g_s, &s.target)?, s))
            });
            Ok([
                ctx.point(StrategyKind::A, g, f, a, error_rate(&lib_true.channels()[0])?),
                ctx.point(StrategyKind::B, g, f, b, error_rate(&baseline_true)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let hull = match &spec.hull {
        Some(h) => run_hull_sweep(h, &spec.fit)?,
        None => Vec::new(),
    };
    Ok(FitStudyReport { sweep, mismatch, weights, hull })
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::CompileFailure { fit, eta } => Error::CompileFailure { fit: fit.clone(), eta: *eta },
        other => Error::Numeric(other.to_string()),
    }
}

// ----------------------------------------------------------- dynamics study

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSpec {
    #[serde(default)]
    pub exciton: ExcitonParams,
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_steps")]
    pub m: usize,
    /// Computational basis index of the initial state; 2 is `|10⟩`.
    #[serde(default = "default_initial")]
    pub initial_state: usize,
    /// Per-qubit correction round feeding Strategy A.
    #[serde(default = "default_fit_round_a")]
    pub strategy_a: CodeRoundSpec,
    /// Per-qubit fully corrected baseline for Strategy B.
    #[serde(default = "default_fit_round_b")]
    pub strategy_b: CodeRoundSpec,
    /// Noise scale for an extra Strategy-A run with the nominal weights; 1 skips it.
    #[serde(default = "default_dynamics_mismatch")]
    pub mismatch_factor: f64,
    #[serde(default = "default_lambda_unit")]
    pub lambda_unit: f64,
    #[serde(default)]
    pub target: StepTarget,
    #[serde(default = "default_dynamics_fit")]
    pub fit: FitOptions,
    #[serde(default)]
    pub seed: u64,
}

fn default_tau() -> f64 {
    0.2
}

fn default_steps() -> usize {
    100
}

fn default_initial() -> usize {
    2
}

fn default_dynamics_mismatch() -> f64 {
    1.06
}

fn default_lambda_unit() -> f64 {
    DEFAULT_LAMBDA_UNIT
}

fn default_dynamics_fit() -> FitOptions {
    FitOptions { eta: 5e-3, max_iter: 200_000, gap_tol: Some(1e-10), record_history: false }
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        Self {
            exciton: ExcitonParams::default(),
            tau: default_tau(),
            m: default_steps(),
            initial_state: default_initial(),
            strategy_a: default_fit_round_a(),
            strategy_b: default_fit_round_b(),
            mismatch_factor: default_dynamics_mismatch(),
            lambda_unit: DEFAULT_LAMBDA_UNIT,
            target: StepTarget::Exact,
            fit: default_dynamics_fit(),
            seed: 0,
        }
    }
}

impl DynamicsSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidParameter("m must be ≥ 1".into()));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau = {} must be positive", self.tau)));
        }
        if self.initial_state >= 4 {
            return Err(Error::InvalidParameter(format!("initial state {} outside 0..4", self.initial_state)));
        }
        self.strategy_a.noise.with_mismatch(self.mismatch_factor)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub trajectory: String,
    pub step: usize,
    pub time: f64,
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
    /// `|ρ_{10,01}|`.
    pub coherence: f64,
    pub trace_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub label: String,
    #[serde(skip)]
    pub rows: Vec<TrajectoryRow>,
    pub max_trace_distance: f64,
    pub final_trace_distance: f64,
    /// Bounds on `½‖S − T‖_◊` for one step against the exact step.
    pub step_distance: Option<DiamondBounds>,
    /// Coordinate distance of what was fitted to its target: the whole step
    /// for Strategy A, the programmed map for Strategy B.
    pub compile_residual: Option<f64>,
    pub failure: Option<String>,
    /// The fit behind a compile failure.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_fit: Option<FitResult>,
    /// The per-step channel that produced the trajectory.
    #[serde(skip)]
    pub channel: Option<Channel>,
}

impl TrajectoryReport {
    fn failed(label: &str, e: &Error) -> Self {
        Self {
            label: label.into(),
            rows: Vec::new(),
            max_trace_distance: f64::NAN,
            final_trace_distance: f64::NAN,
            step_distance: None,
            compile_residual: None,
            failure: Some(e.to_string()),
            failed_fit: match e {
                Error::CompileFailure { fit, .. } => Some((**fit).clone()),
                _ => None,
            },
            channel: None,
        }
    }
}

/// `m` applications of `step` and of `oracle` from `rho0`, compared state by state.
pub fn run_trajectory(
    label: &str,
    step: &Channel,
    oracle: &Channel,
    rho0: &DensityMatrix,
    tau: f64,
    m: usize,
) -> Result<TrajectoryReport> {
    let mut rho = rho0.matrix().clone();
    let mut sigma = rho0.matrix().clone();
    let mut rows = Vec::with_capacity(m + 1);
    for k in 0..=m {
        if k > 0 {
            rho = step.apply(&rho)?;
            sigma = oracle.apply(&sigma)?;
        }
        let state = DensityMatrix::new(rho.clone())?;
        let p = state.populations();
        rows.push(TrajectoryRow {
            trajectory: label.into(),
            step: k,
            time: k as f64 * tau,
            p00: p[0],
            p01: p[1],
            p10: p[2],
            p11: p[3],
            coherence: rho[(2, 1)].norm(),
            trace_distance: state_trace_distance(&rho, &sigma).min(1.0),
        });
    }
    let max = rows.iter().map(|r| r.trace_distance).fold(0.0, f64::max);
    let last = rows.last().map_or(0.0, |r| r.trace_distance);
    Ok(TrajectoryReport {
        label: label.into(),
        rows,
        max_trace_distance: max,
        final_trace_distance: last,
        step_distance: None,
        compile_residual: None,
        failure: None,
        failed_fit: None,
        channel: Some(step.clone()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsReport {
    pub oracle: TrajectoryReport,
    pub strategies: Vec<TrajectoryReport>,
}

impl DynamicsReport {
    pub fn failures(&self) -> impl Iterator<Item = &TrajectoryReport> {
        self.strategies.iter().filter(|t| t.failure.is_some())
    }

    pub fn trajectory(&self, label: &str) -> Option<&TrajectoryReport> {
        self.strategies.iter().find(|t| t.label == label)
    }

    pub fn csv(&self) -> Result<String> {
        let rows: Vec<&TrajectoryRow> =
            std::iter::once(&self.oracle).chain(&self.strategies).flat_map(|t| t.rows.iter()).collect();
        csv_string(&rows)
    }
}

fn pair(round: &Channel) -> Result<Channel> {
    tensor(round, round)
}

/// Oracle, Strategy A, Strategy A with mismatched code noise, and Strategy B,
/// all from the same initial state.
pub fn run_dynamics_study(spec: &DynamicsSpec) -> Result<DynamicsReport> {
    spec.validate()?;
    let model = build_exciton_model(&spec.exciton)?;
    let oracle = model.exact_step(spec.tau)?;
    let rho0 = DensityMatrix::basis_state(4, spec.initial_state)?;
    let diamond = DiamondOptions { seed: spec.seed, ..Default::default() };
    let options = CompileOptions { fit: spec.fit, target: spec.target, prune: false };
    let programmable = programmable_library(2, spec.lambda_unit)?;

    let round_a = |mismatch: f64| -> Result<LogicalChannelLibrary> {
        let b = pair(&spec.strategy_a.baseline(mismatch, spec.seed)?)?;
        programmable.after(
            &b,
            LibrarySource::StrategyA {
                distance: spec.strategy_a.distance,
                noise: spec.strategy_a.noise.assumed().with_mismatch(mismatch)?,
                n_qubits: 2,
            },
        )
    };
    let finish = |label: &str, channel: &Channel, residual: f64| -> Result<TrajectoryReport> {
        let mut t = run_trajectory(label, channel, &oracle, &rho0, spec.tau, spec.m)?;
        t.step_distance = Some(diamond_distance_bounds(channel, &oracle, &diamond)?);
        t.compile_residual = Some(residual);
        Ok(t)
    };

    let mut strategies = Vec::new();
    let lib_a = round_a(1.0)?;
    match compile_step(&Strategy::A, &model, spec.tau, &lib_a, &options) {
        Ok(step) => {
            strategies.push(finish("A", &step.assembled, step.fit.residual)?);
            if spec.mismatch_factor != 1.0 {
                let realized = step.realize(&round_a(spec.mismatch_factor)?, None)?;
                let residual = coordinate_distance(&realized, &step.target)?;
                strategies.push(finish("A-mismatch", &realized, residual)?);
            }
        }
        Err(e @ Error::CompileFailure { .. }) => strategies.push(TrajectoryReport::failed("A", &e)),
        Err(e) => return Err(e),
    }
    let baseline = pair(&spec.strategy_b.baseline(1.0, spec.seed)?)?;
    match compile_step(&Strategy::B { baseline }, &model, spec.tau, &programmable, &options) {
        Ok(step) => strategies.push(finish("B", &step.assembled, step.fit.residual)?),
        Err(e @ Error::CompileFailure { .. }) => strategies.push(TrajectoryReport::failed("B", &e)),
        Err(e) => return Err(e),
    }
    let oracle_report = run_trajectory("oracle", &oracle, &oracle, &rho0, spec.tau, spec.m)?;
    Ok(DynamicsReport { oracle: oracle_report, strategies })
}

// ----------------------------------------------------------- resource study

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceStudySpec {
    #[serde(default = "default_ansatz")]
    pub ansatz: ScalingAnsatz,
    #[serde(default = "default_n_logical")]
    pub n_logical: usize,
    #[serde(default = "default_resource_m")]
    pub m: usize,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    #[serde(default)]
    pub eps_prog_a: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default)]
    pub eps_prog_b: f64,
    #[serde(default = "default_delta_tar_grid")]
    pub delta_tar: Vec<f64>,
    /// Values of `ε/m`.
    #[serde(default = "default_per_step_grid")]
    pub per_step: Vec<f64>,
    #[serde(default = "default_rule")]
    pub rule: DistanceRule,
}

fn default_ansatz() -> ScalingAnsatz {
    ScalingAnsatz { a: 0.1, p_phys: 1e-3, p_th: 1e-2, c: 1.0 }
}

fn default_n_logical() -> usize {
    2
}

fn default_resource_m() -> usize {
    100
}

fn default_zeta() -> f64 {
    0.1
}

fn default_delta_tar_grid() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1]
}

fn default_per_step_grid() -> Vec<f64> {
    vec![1e-6, 1e-8, 1e-10]
}

fn default_rule() -> DistanceRule {
    DistanceRule::TargetAware
}

impl Default for ResourceStudySpec {
    fn default() -> Self {
        Self {
            ansatz: default_ansatz(),
            n_logical: 2,
            m: default_resource_m(),
            zeta: default_zeta(),
            eps_prog_a: 0.0,
            nu: 0.0,
            eps_prog_b: 0.0,
            delta_tar: default_delta_tar_grid(),
            per_step: default_per_step_grid(),
            rule: DistanceRule::TargetAware,
        }
    }
}

impl ResourceStudySpec {
    pub fn validate(&self) -> Result<()> {
        self.ansatz.validate()?;
        if self.n_logical == 0 || self.m == 0 {
            return Err(Error::InvalidParameter("n_logical and m must be ≥ 1".into()));
        }
        if self.delta_tar.is_empty() || self.per_step.is_empty() {
            return Err(Error::InvalidParameter("empty grid".into()));
        }
        Ok(())
    }

    fn budget(&self, delta_tar: f64, per_step: f64) -> BudgetSpec {
        BudgetSpec {
            epsilon: per_step * self.m as f64,
            m: self.m,
            zeta: self.zeta,
            delta_tar,
            eps_prog_a: self.eps_prog_a,
            nu: self.nu,
            eps_prog_b: self.eps_prog_b,
        }
    }
}

/// One bar pair. Distances and footprints are `None` where the budget is infeasible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourcePoint {
    pub scenario: String,
    pub delta_tar: f64,
    pub per_step: f64,
    pub x_a: f64,
    pub x_b: f64,
    pub d_a: Option<usize>,
    pub d_b: Option<usize>,
    pub footprint_a: Option<usize>,
    pub footprint_b: Option<usize>,
    pub ratio: Option<f64>,
    pub ratio_square: Option<f64>,
    pub status: String,
}

#[derive(Serialize)]
struct BarRow<'a> {
    scenario: &'a str,
    #[serde(rename = "d_A")]
    d_a: Option<usize>,
    #[serde(rename = "d_B")]
    d_b: Option<usize>,
    #[serde(rename = "footprint_A")]
    footprint_a: Option<usize>,
    #[serde(rename = "footprint_B")]
    footprint_b: Option<usize>,
    ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub points: Vec<ResourcePoint>,
}

impl ResourceReport {
    /// `scenario,d_A,d_B,footprint_A,footprint_B,ratio`; infeasible cells are empty.
    pub fn csv(&self) -> Result<String> {
        let rows: Vec<BarRow> = self
            .points
            .iter()
            .map(|p| BarRow {
                scenario: &p.scenario,
                d_a: p.d_a,
                d_b: p.d_b,
                footprint_a: p.footprint_a,
                footprint_b: p.footprint_b,
                ratio: p.ratio,
            })
            .collect();
        csv_string(&rows)
    }

    pub fn detail_csv(&self) -> Result<String> {
        csv_string(&self.points)
    }
}

fn resource_point(spec: &ResourceStudySpec, delta_tar: f64, per_step: f64) -> Result<ResourcePoint> {
    let budget = spec.budget(delta_tar, per_step);
    let mut p = ResourcePoint {
        scenario: format!("dtar={delta_tar:e};eps_per_step={per_step:e}"),
        delta_tar,
        per_step,
        x_a: budget.x_a(spec.rule),
        x_b: budget.per_step(),
        d_a: None,
        d_b: None,
        footprint_a: None,
        footprint_b: None,
        ratio: None,
        ratio_square: None,
        status: "ok".into(),
    };
    let a = strategy_a_distance(&spec.ansatz, &budget, spec.rule);
    let b = strategy_b_distance(&spec.ansatz, &budget);
    let mut flags = Vec::new();
    match a {
        Ok(c) => p.d_a = Some(c.distance),
        Err(Error::InfeasibleBudget { .. }) => flags.push("infeasible_A"),
        Err(e) => return Err(e),
    }
    match b {
        Ok(c) => p.d_b = Some(c.distance),
        Err(Error::InfeasibleBudget { .. }) => flags.push("infeasible_B"),
        Err(e) => return Err(e),
    }
    if !flags.is_empty() {
        p.status = flags.join("+");
    }
    p.footprint_a = p.d_a.map(|d| footprint(spec.n_logical, d)).transpose()?;
    p.footprint_b = p.d_b.map(|d| footprint(spec.n_logical, d)).transpose()?;
    if let (Some(da), Some(db)) = (p.d_a, p.d_b) {
        p.ratio = Some(savings_ratio(db, da)?);
        p.ratio_square = Some(savings_ratio_square(db, da)?);
    }
    Ok(p)
}

/// Distances and footprints over the `Δ_tar × ε/m` grid, in grid order.
pub fn run_resource_study(spec: &ResourceStudySpec) -> Result<ResourceReport> {
    spec.validate()?;
    let grid: Vec<(f64, f64)> =
        spec.delta_tar.iter().flat_map(|&dt| spec.per_step.iter().map(move |&x| (dt, x))).collect();
    let points = grid.par_iter().map(|&(dt, x)| resource_point(spec, dt, x)).collect::<Result<_>>()?;
    Ok(ResourceReport { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g = log_grid(0.01, 0.2, 16);
        assert_eq!(g.len(), 16);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[15] - 0.2).abs() < 1e-15);
        let ratios: Vec<f64> = g.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-12));
        let m = linear_grid(0.85, 1.15, 7);
        assert!((m[3] - 1.0).abs() < 1e-15);
        assert!((m[6] - 1.15).abs() < 1e-15);
    }

    #[test]
    fn frame_folding() {
        let labels: Vec<String> = ["baseline", "frame-I", "frame-X", "frame-Y", "frame-Z"].map(String::from).to_vec();
        let p = frame_probs(&labels, &[0.1, 0.2, 0.3, 0.0, 0.4]);
        assert_eq!(p, [0.30000000000000004, 0.3, 0.0, 0.4]);
        let q = frame_probs(&["I".into(), "Z".into()], &[0.9, 0.1]);
        assert_eq!(q, [0.9, 0.0, 0.0, 0.1]);
    }

    #[test]
    fn error_rate_of_pauli_channel() {
        let ch = crate::channel::PauliChannel::from_pairs(1, [("I", 0.9), ("X", 0.05), ("Z", 0.05)])
            .unwrap()
            .to_channel()
            .unwrap();
        assert!((error_rate(&ch).unwrap() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn resource_csv_header() {
        let report = run_resource_study(&ResourceStudySpec::default()).unwrap();
        let csv = report.csv().unwrap();
        assert_eq!(csv.lines().next().unwrap(), "scenario,d_A,d_B,footprint_A,footprint_B,ratio");
        assert_eq!(csv.lines().count(), 10);
    }
}
