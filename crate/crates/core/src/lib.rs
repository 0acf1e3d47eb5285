//! Numerics for group symmetries acting on finite-dimensional quantum systems.
//!
//! The crate covers four layers that build on each other:
//!
//! - [`linalg`] and [`repr`]: dense complex matrices, state metrics, Lie-type
//!   generator lists and finite-group representations.
//! - [`channel`]: Kraus/Choi channels, covariance checks, Hilbert–Schmidt
//!   duals, dilations and a diamond-norm SDP solver.
//! - [`words`] and [`catalysis`]: trace fingerprints of matrix words, the
//!   simultaneous unitary equivalence solver, and the pipeline that turns an
//!   exact-catalysis scenario into an intertwiner on the system alone.
//! - [`refframe`]: the recovery channel that keeps a quantum reference frame
//!   close to its initial state, with sweeps over frame size.
//!
//! Batch workloads (scenario suites, sampled inputs, restarts, sweeps) run on
//! rayon when the `parallel` feature is enabled; see [`par::Exec`].

pub mod catalysis;
pub mod channel;
mod error;
pub mod io;
pub mod linalg;
pub mod par;
pub mod refframe;
pub mod repr;
pub mod words;

pub use error::{Error, Result};
pub use linalg::{CMat, C64};
