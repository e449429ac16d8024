//! Stators: hybrid state-operator objects `Σ_k c_k |k…k⟩ ⊗ O_k`.
//!
//! A stator acts on a system state by applying its operator component and
//! appending its state component. [`Stator`] is the symbolic form used by the
//! protocols; [`DenseStator`] is the explicit linear map from the system to
//! `resource ⊗ system` that the simulators evolve step by step.

use super::{c, joint_dim, local, tensor, OperatorMatrix, StateVector, C64};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct StatorTerm {
    pub label: usize,
    pub coefficient: C64,
    /// One single-party operator per system party.
    pub ops: Vec<OperatorMatrix>,
}

/// `Σ_k c_k |k⟩^{⊗copies} ⊗ (O_k^{(1)} ⊗ … ⊗ O_k^{(N)})` with a
/// `resource_dim`-dimensional register held by each of `copies` parties.
#[derive(Debug, Clone)]
pub struct Stator {
    resource_dim: usize,
    copies: usize,
    terms: Vec<StatorTerm>,
}

impl Stator {
    pub fn new(resource_dim: usize, copies: usize, terms: Vec<StatorTerm>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("stator needs at least one term".into()));
        }
        let norm2: f64 = terms.iter().map(|t| t.coefficient.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized(norm2));
        }
        let dims: Vec<usize> = terms[0].ops.iter().map(|o| o.dim()).collect();
        for t in &terms {
            if t.label >= resource_dim {
                return Err(Error::InvalidArgument(format!(
                    "label {} outside resource dimension {resource_dim}",
                    t.label
                )));
            }
            let tdims: Vec<usize> = t.ops.iter().map(|o| o.dim()).collect();
            if tdims != dims {
                return Err(Error::DimensionMismatch(format!("stator term dims {tdims:?} vs {dims:?}")));
            }
            for op in &t.ops {
                let dev = op.unitarity_deviation();
                if dev > 1e-10 {
                    return Err(Error::NotUnitary(dev));
                }
            }
        }
        Ok(Self { resource_dim, copies, terms })
    }

    pub fn resource_dim(&self) -> usize {
        self.resource_dim
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn terms(&self) -> &[StatorTerm] {
        &self.terms
    }

    pub fn system_dims(&self) -> Vec<usize> {
        self.terms[0].ops.iter().map(|o| o.dim()).collect()
    }

    /// The explicit map `system → resource^{⊗copies} ⊗ system`.
    pub fn to_dense(&self) -> Result<DenseStator> {
        let sys_dims = self.system_dims();
        let mut out_dims = vec![self.resource_dim; self.copies];
        out_dims.extend_from_slice(&sys_dims);
        let rows = joint_dim(&out_dims)?;
        let sys = joint_dim(&sys_dims)?;
        let mut map = DMatrix::zeros(rows, sys);
        // index of |k…k⟩ in the resource block
        let rep = |k: usize| (0..self.copies).fold(0usize, |acc, _| acc * self.resource_dim + k);
        for t in &self.terms {
            let op = tensor(&t.ops)?;
            let offset = rep(t.label) * sys;
            let block = op.entries() * t.coefficient;
            let mut view = map.view_mut((offset, 0), (sys, sys));
            view += block;
        }
        Ok(DenseStator { out_dims, in_dims: sys_dims, map })
    }

    /// Applies the stator to `state`, returning the joint resource ⊗ system vector.
    pub fn act(&self, state: &StateVector) -> Result<DVector<C64>> {
        self.to_dense()?.act(state)
    }
}

/// A linear map from a system with `in_dims` to a register with `out_dims`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStator {
    out_dims: Vec<usize>,
    in_dims: Vec<usize>,
    map: DMatrix<C64>,
}

impl DenseStator {
    pub fn identity(dims: &[usize]) -> Result<Self> {
        let n = joint_dim(dims)?;
        Ok(Self { out_dims: dims.to_vec(), in_dims: dims.to_vec(), map: DMatrix::identity(n, n) })
    }

    pub fn from_operator(op: &OperatorMatrix) -> Self {
        Self { out_dims: op.dims().to_vec(), in_dims: op.dims().to_vec(), map: op.entries().clone() }
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn map(&self) -> &DMatrix<C64> {
        &self.map
    }

    /// Places `resource` in front of the current output register.
    pub fn prepend(&self, resource: &StateVector) -> Result<Self> {
        let mut out_dims = resource.dims().to_vec();
        out_dims.extend_from_slice(&self.out_dims);
        joint_dim(&out_dims)?;
        let col = DMatrix::from_column_slice(resource.dim(), 1, resource.amps().as_slice());
        Ok(Self { out_dims, in_dims: self.in_dims.clone(), map: col.kronecker(&self.map) })
    }

    pub fn apply_local(&mut self, sub: usize, op: &DMatrix<C64>) {
        local::apply_local(&mut self.map, &self.out_dims, sub, op);
    }

    pub fn apply_controlled(&mut self, control: usize, target: usize, ops: &[DMatrix<C64>]) {
        local::apply_controlled(&mut self.map, &self.out_dims, control, target, ops);
    }

    /// Contracts output subsystem `sub` with `⟨onto|`.
    pub fn project(&self, sub: usize, onto: &[C64]) -> Self {
        let map = local::project_rows(&self.map, &self.out_dims, sub, onto);
        let mut out_dims = self.out_dims.clone();
        out_dims.remove(sub);
        Self { out_dims, in_dims: self.in_dims.clone(), map }
    }

    pub fn scale(&mut self, s: f64) {
        self.map *= c(s, 0.0);
    }

    pub fn act(&self, state: &StateVector) -> Result<DVector<C64>> {
        if state.dims() != self.in_dims {
            return Err(Error::DimensionMismatch(format!(
                "stator input dims {:?} vs state dims {:?}",
                self.in_dims,
                state.dims()
            )));
        }
        Ok(&self.map * state.amps())
    }

    /// `‖M χ‖²`: the probability weight the map assigns to `state`.
    pub fn weight(&self, state: &StateVector) -> Result<f64> {
        Ok(self.act(state)?.norm_squared())
    }

    /// The map as a square operator once every resource register is consumed.
    pub fn as_operator(&self) -> Result<OperatorMatrix> {
        if self.out_dims != self.in_dims {
            return Err(Error::DimensionMismatch(format!(
                "stator still carries resource registers: out {:?} in {:?}",
                self.out_dims, self.in_dims
            )));
        }
        OperatorMatrix::new(self.in_dims.clone(), self.map.clone())
    }

    /// Largest entry-wise distance to `other` after removing an overall complex
    /// scale. Used to compare stators that are only defined up to normalization.
    pub fn distance_up_to_scale(&self, other: &Self) -> f64 {
        if self.out_dims != other.out_dims || self.in_dims != other.in_dims {
            return f64::INFINITY;
        }
        let a = &self.map / c(self.map.norm(), 0.0);
        let b = &other.map / c(other.map.norm(), 0.0);
        let overlap = b.dotc(&a);
        let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
        (a - b * phase).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
