//! Entanglement-assisted implementation of weakly entangling multipartite
//! unitaries.
//!
//! The crate covers the whole pipeline for `U(α) = exp(iα σz⊗…⊗σz)` and its
//! generalizations:
//!
//! * [`linalg`]: dense complex states and operators, tensor products,
//!   projective measurement, entropies and an independent matrix-exponential
//!   oracle used to check everything else.
//! * [`protocol`]: exact simulation of the four-step stage (controlled-Z
//!   coupling to a resource state, worker measurements, parity correction,
//!   leader projection), the deterministic one-ebit stage, and multi-stage runs
//!   with entanglement and communication metering.
//! * [`optimizer`]: minimization of the expected entanglement over stage
//!   schedules, the dyadic-expansion baseline and the small-angle bound.
//! * [`comm`]: classical-communication accounting, typical-set compression and
//!   the communication-optimized single-stage scheme.
//! * [`hamiltonian`]: compilation of tensor-product Hamiltonians (and sums of
//!   them) into local layers and collective-Z rotations.
//! * [`general`]: the protocol for `U = Σ_k λ_k V_k⊗…⊗V_k` with a
//!   `d`-dimensional resource and Fourier-basis worker measurements.

pub mod angle;
pub mod comm;
pub mod error;
pub mod general;
pub mod hamiltonian;
pub mod linalg;
pub mod optimizer;
pub mod protocol;

pub use error::{Error, Result};
pub use linalg::C64;
