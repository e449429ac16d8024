//! Matrix exponential of hermitian generators by scaling and squaring with a
//! truncated Taylor series. Slow and simple; it is the reference the compiled
//! and simulated operators are checked against.

use super::{c, OperatorMatrix, C64};
use crate::{Error, Result};
use nalgebra::DMatrix;

const HERMITIAN_TOL: f64 = 1e-10;
const TERM_TOL: f64 = 1e-16;

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter().map(|col| col.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(i · scale · H)` for hermitian `h`.
pub fn expm_oracle(h: &OperatorMatrix, scale: f64) -> Result<OperatorMatrix> {
    let dev = h.hermiticity_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = h.dim();
    let a = h.entries() * c(0.0, scale);
    let norm = one_norm(&a);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let b = &a / c(2f64.powi(squarings as i32), 0.0);

    let mut sum = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..200 {
        term = &term * &b / c(k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < TERM_TOL {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    OperatorMatrix::new(h.dims().to_vec(), sum)
}
