pub mod bell;
pub mod error;
pub mod graph;
pub mod grid;
pub mod noise;
pub mod optimizer;
pub mod protocol;
pub mod quantum;
pub mod separability;
pub mod verify;

pub use bell::{BellDiagonalState, MeasureReport, NegativeSlot};
pub use error::{EdssError, Result};
pub use graph::{Graph, GraphDiagonalState};
pub use noise::{NoiseChannel, NoiseKind};
pub use optimizer::{OptimizationResult, UnitaryParams};
pub use protocol::{Branch, ProtocolOutcome};
pub use quantum::{DensityMatrix, PauliWord, Qubit, Spectrum};
pub use separability::{LocalizationResult, SeparableDecomposition};
