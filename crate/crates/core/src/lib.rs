//! Activation of nonclassical correlations into bipartite entanglement.
//!
//! The library implements the activation protocol (adversarial local
//! rotations followed by pairwise generalized CNOTs onto ancillas), the
//! quantumness measures it induces (relative entropy of quantumness,
//! negativity of quantumness), seeded Haar-random state ensembles, and a
//! deterministic multi-start optimizer over products of local bases.

pub mod error;
pub mod state;
pub mod protocol;
pub mod optimize;
pub mod quantumness;
pub mod sampling;
pub mod io;
pub mod experiment;
pub mod zoo;

pub use error::{Error, Result};
pub use state::{Bipartition, DensityMatrix, ProductBasis, PureState};

/// Library version reported in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
