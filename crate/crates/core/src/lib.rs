//! Fixed-node CTMC verification for local Hamiltonians with succinct ground
//! states.
//!
//! The crate builds lazy fixed-node Hamiltonians and CTMC generators from a
//! sparse k-local Hamiltonian and an amplitude oracle, simulates them with
//! Gillespie's algorithm, and runs the checked random-walk verifier that
//! rejects as soon as a visited generator column stops being legal. A dense
//! brute-force module provides ground truth for small registers, and the
//! `zoo` module generates Yes/No instances and witnesses.

pub mod amplitude;
pub mod basis;
pub mod ctmc;
pub mod dense;
pub mod error;
pub mod exact;
pub mod fixed_node;
pub mod hamiltonian;
pub mod numeric;
pub mod realify;
pub mod sampling;
pub mod verifier;
pub mod zoo;

pub use amplitude::{AmplitudeOracle, VectorOracle};
pub use basis::BasisIndex;
pub use error::{Error, Result};
pub use fixed_node::{FixedNodeView, GeneratorView};
pub use hamiltonian::{LocalHamiltonian, LocalTerm, Pauli};
pub use numeric::{NumericMode, Scalar};
pub use sampling::RngStream;
