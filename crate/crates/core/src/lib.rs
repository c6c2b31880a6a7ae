//! Fractional powers of the Wiener process: Clifford embeddings, power
//! processes, ensembles, complex Fokker–Planck solvers and a quantized
//! sphere volume check.

pub mod clifford;
pub mod error;
pub mod fokker_planck;
pub mod ito;
pub mod montecarlo;
pub mod ncg;
pub mod sde;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
