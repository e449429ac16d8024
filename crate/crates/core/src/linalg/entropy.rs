use super::{StateVector, C64};
use crate::{Error, Result};
use nalgebra::DMatrix;

/// Binary entropy in bits, `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(h(p))
}

/// Unchecked binary entropy for arguments already known to lie in `[0, 1]`.
#[inline]
pub(crate) fn h(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    -(p * p.log2() + q * q.log2())
}

/// Entanglement `E(β) = h(sin²β)` of the resource state `cos β|0…0⟩ + i sin β|1…1⟩`.
pub fn resource_entanglement(beta: f64) -> f64 {
    let s = beta.sin();
    h(s * s)
}

/// Shannon entropy (bits) of a probability vector; zeros are skipped.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Reduced density operator of subsystem `party`.
pub fn reduced_density(state: &StateVector, party: usize) -> DMatrix<C64> {
    let dims = state.dims();
    let d = dims[party];
    let inner: usize = dims[party + 1..].iter().product();
    let outer = state.dim() / (d * inner);
    let a = state.amps();
    DMatrix::from_fn(d, d, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for o in 0..outer {
            for k in 0..inner {
                let base = o * d * inner + k;
                acc += a[base + i * inner] * a[base + j * inner].conj();
            }
        }
        acc
    })
}

/// Von Neumann entropy (bits) of a density operator, from its eigenvalues.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> f64 {
    let eig = rho.clone().symmetric_eigen();
    let probs: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    shannon_entropy(&probs)
}
