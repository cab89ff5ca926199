pub mod channel;
pub mod compiler;
pub mod error;
pub mod lindblad;
pub mod linalg;
pub mod random;
pub mod resource;
pub mod sim;
pub mod state;
pub mod surface_code;
pub mod weights;

pub use channel::{Channel, PauliChannel};
pub use error::{Error, Result};
pub use state::DensityMatrix;
pub use weights::MixtureWeights;
