//! Strided application of local operators to the rows of a dense matrix whose
//! row space is a tensor product. Columns are independent vectors.

use super::C64;
use nalgebra::DMatrix;

fn stride(dims: &[usize], sub: usize) -> usize {
    dims[sub + 1..].iter().product()
}

/// Applies `op` (a `dims[sub]`-square matrix) to subsystem `sub` of every column.
pub fn apply_local(data: &mut DMatrix<C64>, dims: &[usize], sub: usize, op: &DMatrix<C64>) {
    let d = dims[sub];
    debug_assert_eq!(op.nrows(), d);
    let inner = stride(dims, sub);
    let outer = data.nrows() / (d * inner);
    let mut fiber = vec![C64::new(0.0, 0.0); d];
    for col in 0..data.ncols() {
        for o in 0..outer {
            for i in 0..inner {
                let base = o * d * inner + i;
                for (k, f) in fiber.iter_mut().enumerate() {
                    *f = data[(base + k * inner, col)];
                }
                for r in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, f) in fiber.iter().enumerate() {
                        acc += op[(r, k)] * f;
                    }
                    data[(base + r * inner, col)] = acc;
                }
            }
        }
    }
}

/// Applies `ops[k]` to subsystem `target` on the components where subsystem
/// `control` is in basis state `k`.
pub fn apply_controlled(data: &mut DMatrix<C64>, dims: &[usize], control: usize, target: usize, ops: &[DMatrix<C64>]) {
    assert_ne!(control, target);
    assert_eq!(ops.len(), dims[control]);
    let d = dims[target];
    let t_stride = stride(dims, target);
    let c_stride = stride(dims, control);
    let dc = dims[control];
    let mut fiber = vec![C64::new(0.0, 0.0); d];
    for col in 0..data.ncols() {
        for row in 0..data.nrows() {
            if !(row / t_stride).is_multiple_of(d) {
                continue;
            }
            let op = &ops[(row / c_stride) % dc];
            for (k, f) in fiber.iter_mut().enumerate() {
                *f = data[(row + k * t_stride, col)];
            }
            for r in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (k, f) in fiber.iter().enumerate() {
                    acc += op[(r, k)] * f;
                }
                data[(row + r * t_stride, col)] = acc;
            }
        }
    }
}

/// Contracts subsystem `sub` with `⟨onto|`, removing it from the row space.
pub fn project_rows(data: &DMatrix<C64>, dims: &[usize], sub: usize, onto: &[C64]) -> DMatrix<C64> {
    let d = dims[sub];
    assert_eq!(onto.len(), d);
    let inner = stride(dims, sub);
    let outer = data.nrows() / (d * inner);
    let mut out = DMatrix::zeros(outer * inner, data.ncols());
    for col in 0..data.ncols() {
        for o in 0..outer {
            for i in 0..inner {
                let mut acc = C64::new(0.0, 0.0);
                for (k, w) in onto.iter().enumerate() {
                    acc += w.conj() * data[(o * d * inner + k * inner + i, col)];
                }
                out[(o * inner + i, col)] = acc;
            }
        }
    }
    out
}
