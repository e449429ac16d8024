//! The individual steps of one stage, acting on a [`DenseStator`] whose output
//! register is `resource qubits (still held) ⊗ system qubits`.

use crate::angle::fold;
use crate::linalg::{pauli, resource_state, DenseStator, C64};
use crate::Result;
use std::f64::consts::FRAC_PI_2;

/// Step 1: append `|ψ(β)⟩` and apply controlled-Z from resource qubit `j` to
/// system qubit `j` for every party.
pub fn couple(system_map: &DenseStator, beta: f64, parties: usize) -> Result<DenseStator> {
    let mut st = system_map.prepend(&resource_state(beta, parties)?)?;
    let ops = [pauli::i().into_entries(), pauli::z().into_entries()];
    for j in 0..parties {
        st.apply_controlled(j, parties + j, &ops);
    }
    Ok(st)
}

/// Step 2 for the first worker still holding a resource qubit: Hadamard, then
/// computational-basis outcome `bit`.
pub fn measure_worker(st: &DenseStator, bit: u8) -> DenseStator {
    let mut st = st.clone();
    st.apply_local(0, pauli::hadamard().entries());
    let onto =
        if bit == 0 { [C64::new(1.0, 0.0), C64::new(0.0, 0.0)] } else { [C64::new(0.0, 0.0), C64::new(1.0, 0.0)] };
    st.project(0, &onto)
}

/// Step 3: σz on the leader's resource qubit when the worker parity is odd.
pub fn correct_parity(st: &mut DenseStator, worker_bits: &[u8]) {
    let parity = worker_bits.iter().fold(0u8, |acc, b| acc ^ b);
    if parity == 1 {
        st.apply_local(0, pauli::z().entries());
    }
}

/// Leader's projection vector: `cos γ|0⟩ + sin γ|1⟩` on success,
/// `sin γ|0⟩ − cos γ|1⟩` on failure.
pub fn leader_vector(gamma: f64, success: bool) -> [C64; 2] {
    let (s, c) = gamma.sin_cos();
    if success {
        [C64::new(c, 0.0), C64::new(s, 0.0)]
    } else {
        [C64::new(s, 0.0), C64::new(-c, 0.0)]
    }
}

/// Step 4: the leader's projection, consuming the last resource qubit.
pub fn project_leader(st: &DenseStator, gamma: f64, success: bool) -> DenseStator {
    st.project(0, &leader_vector(gamma, success))
}

/// Applies the local rotation `U(angle)` for `angle ≡ 0` or `π/2` as a layer of
/// per-party σz (or nothing). Returns whether a layer was applied.
pub fn apply_local_rotation(st: &mut DenseStator, angle: f64) -> bool {
    if (fold(angle) - FRAC_PI_2).abs() > 1e-9 {
        return false;
    }
    let z = pauli::z().into_entries();
    for j in 0..st.out_dims().len() {
        st.apply_local(j, &z);
    }
    true
}
