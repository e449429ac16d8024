//! Dense complex linear algebra over tensor-product Hilbert spaces.
//!
//! Basis-index convention: party 1 is the most significant digit of a joint
//! index. Every module in the crate relies on this ordering.

mod distance;
mod entropy;
mod expm;
mod local;
mod operator;
mod state;
mod stator;

pub use distance::op_distance_phase_invariant;
pub(crate) use entropy::h;
pub use entropy::{binary_entropy, reduced_density, resource_entanglement, shannon_entropy, von_neumann_entropy};
pub use expm::expm_oracle;
pub use local::{apply_controlled, apply_local, project_rows};
pub use operator::{pauli, tensor, OperatorMatrix, Tensor};
pub use state::{project_subsystem, resource_state, Projection, StateVector};
pub use stator::{DenseStator, Stator, StatorTerm};

pub use nalgebra::{DMatrix, DVector};

pub type C64 = num_complex::Complex64;

/// Largest joint dimension handled by the dense representation.
pub const MAX_JOINT_DIM: u128 = 1 << 22;

/// Product of `dims`, rejecting spaces above [`MAX_JOINT_DIM`].
pub fn joint_dim(dims: &[usize]) -> crate::Result<usize> {
    let mut total: u128 = 1;
    for &d in dims {
        total = total.saturating_mul(d as u128);
        if total > MAX_JOINT_DIM {
            return Err(crate::Error::DimensionTooLarge(total));
        }
    }
    Ok(total as usize)
}

pub(crate) const fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
