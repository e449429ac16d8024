use super::compile::{CompiledSchedule, Primitive};
use super::spec::HamiltonianSpec;
use crate::linalg::{apply_local, joint_dim, op_distance_phase_invariant, OperatorMatrix, C64};
use crate::Result;
use nalgebra::DMatrix;
use serde::Serialize;

/// Dense product of the schedule on `⊗_j W_j`.
pub fn evaluate(schedule: &CompiledSchedule) -> Result<OperatorMatrix> {
    let wdims = schedule.working_dims();
    let dim = joint_dim(&wdims)?;
    // carrier parity of each joint basis index
    let parity: Vec<f64> = (0..dim)
        .map(|mut i| {
            let mut s = 1.0;
            for &d in wdims.iter().rev() {
                if (i % d) % 2 == 1 {
                    s = -s;
                }
                i /= d;
            }
            s
        })
        .collect();
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for p in &schedule.primitives {
        match p {
            Primitive::LocalLayer { ops } => {
                for (j, op) in ops.iter().enumerate() {
                    apply_local(&mut u, &wdims, j, op.entries());
                }
            }
            Primitive::ZZRotation { angle } => {
                for (r, s) in parity.iter().enumerate() {
                    let ph = C64::from_polar(1.0, angle * s);
                    u.row_mut(r).iter_mut().for_each(|z| *z *= ph);
                }
            }
            Primitive::AncillaPrep { .. } | Primitive::SubspaceEmbed { .. } | Primitive::SubspaceRestrict { .. } => {}
        }
    }
    OperatorMatrix::new(wdims, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verification {
    /// Phase-invariant distance of the restricted schedule to `exp(±itH)`.
    pub distance: f64,
    /// Frobenius norm of the part of the embedded subspace mapped outside it.
    pub leakage: f64,
    pub unitarity_deviation: f64,
}

/// Joint working-space indices of the embedded system basis (carriers `|0⟩`).
fn embedded_indices(dims: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    (0..total)
        .map(|mut s| {
            let mut digits = vec![0; dims.len()];
            for j in (0..dims.len()).rev() {
                digits[j] = s % dims[j];
                s /= dims[j];
            }
            digits.iter().zip(dims).fold(0, |acc, (&l, &d)| acc * 2 * d + 2 * l)
        })
        .collect()
}

/// Compares the compiled schedule with the exact evolution of `spec`.
pub fn verify(schedule: &CompiledSchedule, spec: &HamiltonianSpec) -> Result<Verification> {
    let full = evaluate(schedule)?;
    let idx = embedded_indices(&schedule.dims);
    let u = full.entries();
    let restricted = DMatrix::from_fn(idx.len(), idx.len(), |r, c| u[(idx[r], idx[c])]);
    let mut leak = 0.0;
    for &c in &idx {
        for r in 0..u.nrows() {
            if !idx.contains(&r) {
                leak += u[(r, c)].norm_sqr();
            }
        }
    }
    let restricted = OperatorMatrix::new(schedule.dims.clone(), restricted)?;
    Ok(Verification {
        distance: op_distance_phase_invariant(&restricted, &spec.target()?),
        leakage: leak.sqrt(),
        unitarity_deviation: full.unitarity_deviation(),
    })
}
