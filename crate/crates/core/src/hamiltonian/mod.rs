//! Compiling `exp(±itH)` for tensor-product Hamiltonians (and sums of them)
//! into local unitaries and collective rotations `exp(iθ σz⊗…⊗σz)`.
//!
//! Each party `j` works in `W_j = T_j ⊗ C_j`: a level register `T_j` of the
//! factor's dimension and a carrier qubit `C_j`, basis index `2l + c`. The
//! collective rotations act on the carriers. The system embeds as `c = 0`.

mod compile;
mod spec;
mod verify;

pub use compile::{
    compile, compile_factor_step, compile_sum, cost_estimate, cost_estimate_with, CompiledSchedule, CostMode,
    Primitive, LINEAR_COST_CONSTANT,
};
pub use spec::{diagonalize, Convention, DiagonalizedForm, HamiltonianSpec, TensorTerm};
pub use verify::{evaluate, verify, Verification};

#[cfg(test)]
mod tests;
