use super::{c, joint_dim, local, C64};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

const NORM_TOL: f64 = 1e-10;

/// A normalized pure state over a tensor product of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: DVector<C64>) -> Result<Self> {
        let n = joint_dim(&dims)?;
        if amps.len() != n {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for dims {:?}", amps.len(), dims)));
        }
        let norm2 = amps.norm_squared();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm2));
        }
        Ok(Self { dims, amps })
    }

    /// Normalizes `amps`; `None` when the vector is (numerically) zero.
    pub fn normalized(dims: Vec<usize>, amps: DVector<C64>) -> Result<Option<Self>> {
        let n = joint_dim(&dims)?;
        if amps.len() != n {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for dims {:?}", amps.len(), dims)));
        }
        let norm = amps.norm();
        if norm < 1e-150 {
            return Ok(None);
        }
        Ok(Some(Self { dims, amps: amps / c(norm, 0.0) }))
    }

    pub fn from_slice(dims: Vec<usize>, amps: &[C64]) -> Result<Self> {
        Self::new(dims, DVector::from_column_slice(amps))
    }

    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        let n = joint_dim(dims)?;
        if index >= n {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {n}")));
        }
        let mut amps = DVector::zeros(n);
        amps[index] = c(1.0, 0.0);
        Ok(Self { dims: dims.to_vec(), amps })
    }

    /// Haar-random state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<Self> {
        let n = joint_dim(dims)?;
        let amps = DVector::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        Ok(Self::normalized(dims.to_vec(), amps)?.expect("gaussian vector is nonzero"))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn kron(&self, rhs: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&rhs.dims);
        joint_dim(&dims)?;
        Ok(Self { dims, amps: self.amps.kronecker(&rhs.amps) })
    }
}

/// Outcome of projecting one subsystem onto a vector.
#[derive(Debug, Clone)]
pub struct Projection {
    pub probability: f64,
    /// Renormalized state of the remaining subsystems; `None` for a
    /// zero-probability outcome or when no subsystems remain.
    pub state: Option<StateVector>,
}

/// Projects subsystem `party` (0-based) of `state` onto `onto`.
pub fn project_subsystem(state: &StateVector, party: usize, onto: &StateVector) -> Result<Projection> {
    if party >= state.dims.len() {
        return Err(Error::InvalidArgument(format!("party {party} out of range for {} subsystems", state.dims.len())));
    }
    if onto.dims.len() != 1 || onto.dim() != state.dims[party] {
        return Err(Error::DimensionMismatch(format!(
            "projector dims {:?} vs party dimension {}",
            onto.dims, state.dims[party]
        )));
    }
    let column = DMatrix::from_column_slice(state.dim(), 1, state.amps.as_slice());
    let projected = local::project_rows(&column, &state.dims, party, onto.amps.as_slice());
    let amps = DVector::from_column_slice(projected.as_slice());
    let probability = amps.norm_squared();
    let mut dims = state.dims.clone();
    dims.remove(party);
    let remaining = if dims.is_empty() || probability < 1e-300 { None } else { StateVector::normalized(dims, amps)? };
    Ok(Projection { probability, state: remaining })
}

/// `cos β |0…0⟩ + i sin β |1…1⟩` on `parties` qubits.
pub fn resource_state(beta: f64, parties: usize) -> Result<StateVector> {
    if parties < 2 {
        return Err(Error::InvalidArgument(format!("resource state needs at least 2 parties, got {parties}")));
    }
    let dims = vec![2; parties];
    let n = joint_dim(&dims)?;
    let mut amps = DVector::zeros(n);
    amps[0] = c(beta.cos(), 0.0);
    amps[n - 1] += c(0.0, beta.sin());
    StateVector::new(dims, amps)
}
