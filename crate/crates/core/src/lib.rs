pub mod bp;
pub mod cell;
pub mod config;
pub mod decoder;
pub mod engine;
pub mod error;
pub mod harness;
pub mod noise;
pub mod pauli;
pub mod toric;

pub use config::{DecoderConfig, ExperimentSpec};
pub use decoder::{decode, exact_ml, DecodeResult, Decoder};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliOp};
pub use toric::{Syndrome, TorusLattice};
