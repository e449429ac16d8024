use super::{c, joint_dim, StateVector, C64};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// A square complex matrix acting on a tensor product of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    dims: Vec<usize>,
    entries: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(dims: Vec<usize>, entries: DMatrix<C64>) -> Result<Self> {
        let n = joint_dim(&dims)?;
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, dims {:?} need {n}x{n}",
                entries.nrows(),
                entries.ncols(),
                dims
            )));
        }
        Ok(Self { dims, entries })
    }

    /// Single-subsystem operator from row-major entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("matrix rows must all have length n".into()));
        }
        Self::new(vec![n], DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let n = values.len();
        let entries = DMatrix::from_diagonal(&DVector::from_iterator(n, values.iter().map(|&v| c(v, 0.0))));
        Self { dims: vec![n], entries }
    }

    pub fn identity(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self { dims: dims.to_vec(), entries: DMatrix::identity(n, n) }
    }

    /// Unitary flagged constructor: rejects `entries` with `U†U ≠ I` beyond 1e-10.
    pub fn unitary(dims: Vec<usize>, entries: DMatrix<C64>) -> Result<Self> {
        let op = Self::new(dims, entries)?;
        let dev = op.unitarity_deviation();
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Ok(op)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self { dims: self.dims.clone(), entries: self.entries.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dims: self.dims.clone(), entries: &self.entries * s }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dims != rhs.dims {
            return Err(Error::DimensionMismatch(format!("cannot compose {:?} with {:?}", self.dims, rhs.dims)));
        }
        Ok(Self { dims: self.dims.clone(), entries: &self.entries * &rhs.entries })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        if self.dims != rhs.dims {
            return Err(Error::DimensionMismatch(format!("cannot add {:?} and {:?}", self.dims, rhs.dims)));
        }
        Ok(Self { dims: self.dims.clone(), entries: &self.entries + &rhs.entries })
    }

    pub fn apply(&self, state: &StateVector) -> Result<DVector<C64>> {
        if self.dims != state.dims() {
            return Err(Error::DimensionMismatch(format!(
                "operator dims {:?} vs state dims {:?}",
                self.dims,
                state.dims()
            )));
        }
        Ok(&self.entries * state.amps())
    }

    /// Max-entry deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim();
        let g = self.entries.adjoint() * &self.entries - DMatrix::<C64>::identity(n, n);
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let g = &self.entries - self.entries.adjoint();
        g.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        self.entries.clone().singular_values().max()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&rhs.dims);
        joint_dim(&dims)?;
        Ok(Self { dims, entries: self.entries.kronecker(&rhs.entries) })
    }
}

/// Values that combine under the Kronecker product.
pub trait Tensor: Sized {
    fn kron_pair(&self, rhs: &Self) -> Result<Self>;
}

impl Tensor for OperatorMatrix {
    fn kron_pair(&self, rhs: &Self) -> Result<Self> {
        self.kron(rhs)
    }
}

impl Tensor for StateVector {
    fn kron_pair(&self, rhs: &Self) -> Result<Self> {
        self.kron(rhs)
    }
}

/// Kronecker product of `items` in party order 1..N.
pub fn tensor<T: Tensor + Clone>(items: &[T]) -> Result<T> {
    let (first, rest) = items.split_first().ok_or(Error::EmptyTensor)?;
    rest.iter().try_fold(first.clone(), |acc, x| acc.kron_pair(x))
}

/// Single-qubit Pauli matrices and the Hadamard gate.
pub mod pauli {
    use super::*;

    fn qubit(m: [[C64; 2]; 2]) -> OperatorMatrix {
        OperatorMatrix { dims: vec![2], entries: DMatrix::from_fn(2, 2, |i, j| m[i][j]) }
    }

    pub fn i() -> OperatorMatrix {
        OperatorMatrix::identity(&[2])
    }

    pub fn x() -> OperatorMatrix {
        qubit([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
    }

    pub fn y() -> OperatorMatrix {
        qubit([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
    }

    pub fn z() -> OperatorMatrix {
        qubit([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
    }

    pub fn hadamard() -> OperatorMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        qubit([[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])
    }

    /// σ_0 = I, σ_1 = X, σ_2 = Y, σ_3 = Z.
    pub fn sigma(k: usize) -> OperatorMatrix {
        match k {
            0 => i(),
            1 => x(),
            2 => y(),
            3 => z(),
            _ => panic!("pauli index {k} out of range"),
        }
    }

    /// σz on each of `n` qubits.
    pub fn z_string(n: usize) -> OperatorMatrix {
        tensor(&vec![z(); n]).expect("z string within dense limit")
    }
}
