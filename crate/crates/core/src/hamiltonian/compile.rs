use super::spec::{diagonalize, DiagonalizedForm, HamiltonianSpec, TensorTerm};
use crate::linalg::{OperatorMatrix, C64};
use crate::optimizer::CostOptimizer;
use crate::Result;
use nalgebra::DMatrix;
use serde::Serialize;

/// Linear entanglement cost per unit of rotation angle.
pub const LINEAR_COST_CONSTANT: f64 = 5.6418;

#[derive(Debug, Clone)]
pub enum Primitive {
    /// Party `party` appends its level register of dimension `dim`.
    AncillaPrep { party: usize, dim: usize },
    /// The party's system is mapped into its working space with carrier `|0⟩`.
    SubspaceEmbed { party: usize },
    /// One unitary per party on its working space.
    LocalLayer { ops: Vec<OperatorMatrix> },
    /// `exp(i·angle·σz⊗…⊗σz)` on the carriers.
    ZZRotation { angle: f64 },
    /// The party discards the working space outside the embedded system.
    SubspaceRestrict { party: usize },
}

#[derive(Debug, Clone)]
pub struct CompiledSchedule {
    /// System dimension of each party.
    pub dims: Vec<usize>,
    pub primitives: Vec<Primitive>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScheduleSummary {
    pub local_layers: usize,
    pub rotations: usize,
    pub total_angle: f64,
}

impl CompiledSchedule {
    /// Dimensions of the working spaces `W_j`.
    pub fn working_dims(&self) -> Vec<usize> {
        self.dims.iter().map(|d| 2 * d).collect()
    }

    pub fn rotations(&self) -> impl Iterator<Item = f64> + '_ {
        self.primitives.iter().filter_map(|p| match p {
            Primitive::ZZRotation { angle } => Some(*angle),
            _ => None,
        })
    }

    /// `Σ |α_seg|`.
    pub fn total_angle(&self) -> f64 {
        self.rotations().map(f64::abs).sum()
    }

    pub fn local_layers(&self) -> usize {
        self.primitives.iter().filter(|p| matches!(p, Primitive::LocalLayer { .. })).count()
    }

    /// Local layers strictly between the first and last rotation.
    pub fn interior_layers(&self) -> usize {
        let is_rot = |p: &Primitive| matches!(p, Primitive::ZZRotation { .. });
        match (self.primitives.iter().position(is_rot), self.primitives.iter().rposition(is_rot)) {
            (Some(a), Some(b)) => {
                self.primitives[a..b].iter().filter(|p| matches!(p, Primitive::LocalLayer { .. })).count()
            }
            _ => 0,
        }
    }

    pub fn summary(&self) -> ScheduleSummary {
        ScheduleSummary {
            local_layers: self.local_layers(),
            rotations: self.rotations().count(),
            total_angle: self.total_angle(),
        }
    }
}

/// Swap of the carrier for every level in `mask`.
fn swap_op(dim: usize, mask: u32) -> DMatrix<C64> {
    let n = 2 * dim;
    let mut m = DMatrix::zeros(n, n);
    for l in 0..dim {
        let (a, b) = (2 * l, 2 * l + 1);
        if mask >> l & 1 == 1 {
            m[(a, b)] = C64::new(1.0, 0.0);
            m[(b, a)] = C64::new(1.0, 0.0);
        } else {
            m[(a, a)] = C64::new(1.0, 0.0);
            m[(b, b)] = C64::new(1.0, 0.0);
        }
    }
    m
}

/// `Q ⊗ I_carrier`.
fn lift(q: &OperatorMatrix) -> DMatrix<C64> {
    let d = q.dim();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            m[(2 * r, 2 * c)] = q.entries()[(r, c)];
            m[(2 * r + 1, 2 * c + 1)] = q.entries()[(r, c)];
        }
    }
    m
}

/// Event times closer than this (as fractions of a step) coincide.
const EVENT_TOL: f64 = 1e-12;

/// One party's time-sharing cycle: `(fraction of the step, flipped levels)`.
/// Level `l` has its carrier flipped during `[p_l, 1)` with `p_l = (a_l + 1)/2`.
fn party_segments(a: &[f64]) -> Vec<(f64, u32)> {
    let p: Vec<f64> = a.iter().map(|v| (v + 1.0) / 2.0).collect();
    let mut cuts: Vec<f64> = p.iter().copied().filter(|&x| x > EVENT_TOL && x < 1.0 - EVENT_TOL).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() < EVENT_TOL);
    cuts.windows(2)
        .map(|w| {
            let mask =
                p.iter().enumerate().filter(|(_, &pl)| pl <= w[0] + EVENT_TOL).fold(0u32, |m, (l, _)| m | 1 << l);
            (w[1] - w[0], mask)
        })
        .collect()
}

/// Leaves of the nested cycles, party 1 innermost: `(fraction, masks)`.
fn nested_leaves(forms: &DiagonalizedForm) -> Vec<(f64, Vec<u32>)> {
    let per: Vec<Vec<(f64, u32)>> = forms.diagonals.iter().map(|a| party_segments(a)).collect();
    let n = per.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let frac: f64 = (0..n).map(|j| per[j][idx[j]].0).product();
        out.push((frac, (0..n).map(|j| per[j][idx[j]].1).collect()));
        // party 1 (index 0) advances fastest
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] < per[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == n {
                return out;
            }
        }
    }
}

/// Accumulates primitives, merging adjacent layers and adjacent rotations.
struct Builder {
    dims: Vec<usize>,
    prims: Vec<Primitive>,
    masks: Vec<u32>,
}

impl Builder {
    fn new(dims: Vec<usize>) -> Self {
        let n = dims.len();
        Self { dims, prims: Vec::new(), masks: vec![0; n] }
    }

    fn layer(&mut self, ops: Vec<DMatrix<C64>>) -> Result<()> {
        if let Some(Primitive::LocalLayer { ops: prev }) = self.prims.last_mut() {
            for (p, o) in prev.iter_mut().zip(ops) {
                *p = OperatorMatrix::new(vec![o.nrows()], o * p.entries())?;
            }
            return Ok(());
        }
        let ops = ops.into_iter().map(|o| OperatorMatrix::new(vec![o.nrows()], o)).collect::<Result<Vec<_>>>()?;
        self.prims.push(Primitive::LocalLayer { ops });
        Ok(())
    }

    fn set_masks(&mut self, masks: &[u32]) -> Result<()> {
        if masks == self.masks.as_slice() {
            return Ok(());
        }
        let ops = self.dims.iter().zip(masks.iter().zip(&self.masks)).map(|(&d, (a, b))| swap_op(d, a ^ b)).collect();
        self.masks = masks.to_vec();
        self.layer(ops)
    }

    fn rotate(&mut self, angle: f64) {
        if angle == 0.0 {
            return;
        }
        if let Some(Primitive::ZZRotation { angle: prev }) = self.prims.last_mut() {
            *prev += angle;
            return;
        }
        self.prims.push(Primitive::ZZRotation { angle });
    }

    /// `exp(i·angle·Δ·⊗_j diag(a_j))` in the eigenbasis, as nested cycles.
    fn diagonal_step(&mut self, form: &DiagonalizedForm, angle: f64) -> Result<()> {
        if angle == 0.0 || form.delta == 0.0 {
            return Ok(());
        }
        for (frac, masks) in nested_leaves(form) {
            self.set_masks(&masks)?;
            self.rotate(angle * form.delta * frac);
        }
        Ok(())
    }

    fn basis(&mut self, form: &DiagonalizedForm, forward: bool) -> Result<()> {
        let ops = form.locals.iter().map(|q| if forward { lift(q) } else { lift(&q.adjoint()) }).collect();
        self.layer(ops)
    }

    fn finish(mut self) -> Result<CompiledSchedule> {
        let zero = vec![0; self.dims.len()];
        self.set_masks(&zero)?;
        let n = self.dims.len();
        let mut primitives = Vec::with_capacity(self.prims.len() + 3 * n);
        for (party, &dim) in self.dims.iter().enumerate() {
            primitives.push(Primitive::AncillaPrep { party, dim });
        }
        primitives.extend((0..n).map(|party| Primitive::SubspaceEmbed { party }));
        primitives.extend(self.prims);
        primitives.extend((0..n).map(|party| Primitive::SubspaceRestrict { party }));
        Ok(CompiledSchedule { dims: self.dims, primitives })
    }
}

/// Party `j`'s time-sharing cycle over a step of length `dt`, with every other
/// party's carrier held fixed: swap layers on party `j` only, rotations scaled
/// by `Δ`. No basis change is included.
pub fn compile_factor_step(j: usize, form: &DiagonalizedForm, dt: f64) -> Result<Vec<Primitive>> {
    let dims: Vec<usize> = form.diagonals.iter().map(|a| a.len()).collect();
    if j >= dims.len() {
        return Err(crate::Error::InvalidArgument(format!("party {j} out of range")));
    }
    let mut b = Builder::new(dims);
    if dt != 0.0 {
        for (frac, mask) in party_segments(&form.diagonals[j]) {
            let mut masks = vec![0; b.dims.len()];
            masks[j] = mask;
            b.set_masks(&masks)?;
            b.rotate(dt * form.delta * frac);
        }
        let zero = vec![0; b.dims.len()];
        b.set_masks(&zero)?;
    }
    Ok(b.prims)
}

fn append_term(b: &mut Builder, form: &DiagonalizedForm, angle: f64) -> Result<()> {
    if angle == 0.0 || form.delta == 0.0 {
        return Ok(());
    }
    b.basis(form, false)?;
    b.diagonal_step(form, angle)?;
    let zero = vec![0; b.dims.len()];
    b.set_masks(&zero)?;
    b.basis(form, true)
}

fn compile_terms(spec: &HamiltonianSpec, terms: &[TensorTerm], slices: usize) -> Result<CompiledSchedule> {
    let forms = terms.iter().map(diagonalize).collect::<Result<Vec<_>>>()?;
    let mut b = Builder::new(spec.dims());
    let dt = spec.convention.sign() * spec.time / slices as f64;
    if forms.len() == 1 {
        // a single term needs one basis change around all slices
        let form = &forms[0];
        if dt != 0.0 && form.delta != 0.0 {
            b.basis(form, false)?;
            for _ in 0..slices {
                b.diagonal_step(form, dt)?;
            }
            let zero = vec![0; b.dims.len()];
            b.set_masks(&zero)?;
            b.basis(form, true)?;
        }
    } else {
        for _ in 0..slices {
            for form in &forms {
                append_term(&mut b, form, dt)?;
            }
        }
    }
    b.finish()
}

/// Compiles a single tensor-product term with `spec.slices` slices.
pub fn compile(spec: &HamiltonianSpec) -> Result<CompiledSchedule> {
    if spec.terms.len() != 1 {
        return Err(crate::Error::Hamiltonian(format!(
            "compile takes one tensor-product term, got {}; use compile_sum",
            spec.terms.len()
        )));
    }
    compile_terms(spec, &spec.terms, spec.slices)
}

/// First-order product formula `(Π_k e^{±i t H_k/m})^m`.
pub fn compile_sum(spec: &HamiltonianSpec) -> Result<CompiledSchedule> {
    compile_terms(spec, &spec.terms, spec.slices)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    /// `5.6418 Σ |α_seg|`.
    Linear,
    /// `Σ 𝓔(|α_seg|)` from the optimizer.
    Exact,
}

/// Expected entanglement of running every rotation with the optimized protocol.
pub fn cost_estimate(schedule: &CompiledSchedule, mode: CostMode) -> Result<f64> {
    match mode {
        CostMode::Linear => Ok(LINEAR_COST_CONSTANT * schedule.total_angle()),
        CostMode::Exact => cost_estimate_with(schedule, CostOptimizer::shared_default()),
    }
}

pub fn cost_estimate_with(schedule: &CompiledSchedule, optimizer: &CostOptimizer) -> Result<f64> {
    schedule.rotations().map(|a| Ok(optimizer.optimize_schedule(a.abs())?.expected_ebits)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segments_time_share_to_diagonal() {
        for a in [vec![1.0, -1.0], vec![1.0, 0.0], vec![1.0, 0.3, -0.3, -1.0], vec![0.5, 0.5, -1.0]] {
            let segs = party_segments(&a);
            let total: f64 = segs.iter().map(|s| s.0).sum();
            assert!((total - 1.0).abs() < 1e-15);
            for (l, &al) in a.iter().enumerate() {
                let avg: f64 = segs.iter().map(|&(f, m)| if m >> l & 1 == 1 { -f } else { f }).sum();
                assert!((avg - al).abs() < 1e-15, "{a:?} level {l}");
            }
        }
        assert_eq!(party_segments(&[1.0, -1.0]).len(), 1);
        assert_eq!(party_segments(&[1.0, 0.0]).len(), 2);
    }

    #[test]
    fn swap_is_involution() {
        let s = swap_op(3, 0b101);
        assert!((&s * &s - DMatrix::<C64>::identity(6, 6)).norm() < 1e-15);
    }
}
