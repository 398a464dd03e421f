//! Simulation and analysis toolkit for low-depth probabilistic quantum state
//! preparation.
//!
//! The crate splits into an exact layer and a statistical layer:
//!
//! - [`state`] is a dense statevector engine (practical cap around 24 qubits).
//! - [`encoding`] builds amplitude vectors and label-encoding states.
//! - [`concat`] implements the controlled-swap concatenation step, the
//!   value-qubit projection, and the four-vector route for complex data.
//! - [`prep`] drives the sequential, parallel, batched-parallel, and
//!   unitary-leaf preparation strategies over either engine.
//! - [`cascade`] runs Monte Carlo runtime scaling experiments and the
//!   per-level success-probability bound machinery.
//! - [`bounds`] samples random data models and verifies the projection
//!   probability and cutoff-fidelity guarantees empirically.
//! - [`circuit`] is a layered gate IR with decomposition to 1q+CNOT, text
//!   emission, and a light-cone depth analyzer.

pub mod bounds;
pub mod cascade;
pub mod circuit;
pub mod concat;
pub mod encoding;
pub mod error;
pub mod fit;
pub mod prep;
pub mod rng;
pub mod state;

pub use encoding::{AmplitudeVector, LabelState, ResizedVector};
pub use error::{Error, Result};
pub use state::PureState;
