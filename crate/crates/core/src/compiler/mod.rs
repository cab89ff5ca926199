//! Convex compilation of target channels into mixtures of implementable
//! logical channels.

pub mod compile;
pub mod fit;
pub mod library;
pub mod prune;

pub use compile::{
    compile_step, coordinate_distance, fit_mixture, CompileOptions, CompiledStep, CompiledStepDocument, StepTarget,
    Strategy, StrategyKind,
};
pub use fit::{frank_wolfe, mixture_residual, FitOptions, FitResult};
pub use library::{
    frame_policies, pauli_frame_library, programmable_library, reset_feedback_library, strategy_a_library,
    LibrarySource, LogicalChannelLibrary, DEFAULT_LAMBDA_UNIT,
};
pub use prune::{caratheodory_prune, PruneResult};
