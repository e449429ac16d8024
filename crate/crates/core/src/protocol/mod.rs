//! Simulation of the stage protocol for `U(α) = exp(iα σz⊗N)`.
//!
//! One stage consumes the resource `cos β|0…0⟩ + i sin β|1…1⟩`:
//!
//! 1. every party applies controlled-Z from its resource qubit to its system qubit;
//! 2. workers (parties 1..N−1) measure their resource qubit in the Hadamard basis
//!    and send the bit to the leader (party N);
//! 3. the leader applies σz to its resource qubit when the parity of the bits is odd;
//! 4. the leader projects onto `cos γ|0⟩ + sin γ|1⟩` (success, `U(α)` applied)
//!    or the orthogonal vector (failure, `U(α′)` applied) and broadcasts the branch.
//!
//! With `tan β tan γ = tan α` the success branch is exactly `U(α)`; after a
//! failure the next stage targets `α − α′`. A stage whose failure leaves a
//! local correction (`α − α′ ≡ π/2`) ends the chain; the one-ebit stage
//! `β = π/4, γ = α` always does.

mod outcome;
mod run;
pub mod steps;

pub use outcome::{rng_stream, ForcedOutcomes, OutcomeSource, SampledOutcomes};
pub use run::{
    enumerate_leaves, run_deterministic_stage, run_protocol, run_stage, Leaf, StageOutcome, StageRecord, Transcript,
};

use crate::angle::{fold, is_local};
use crate::linalg::resource_entanglement;
use crate::{Error, Result};
use serde::Serialize;
use std::f64::consts::FRAC_PI_4;

const EQ8_TOL: f64 = 1e-10;
const CHAIN_TOL: f64 = 1e-9;

/// `γ = arctan(tan α / tan β)`, the projection angle that makes the success
/// branch implement `U(α)`.
pub fn gamma_for(alpha: f64, beta: f64) -> Result<f64> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    if sa.abs() < 1e-300 {
        return Ok(0.0);
    }
    if sb.abs() < 1e-15 || cb.abs() < 1e-15 {
        return Err(Error::DegenerateBeta { alpha, beta });
    }
    Ok(((sa / ca) / (sb / cb)).atan())
}

/// Probability that the leader's projection lands on the success vector.
/// Independent of the system state.
pub fn success_probability(beta: f64, gamma: f64) -> f64 {
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    cb * cb * cg * cg + sb * sb * sg * sg
}

/// Rotation angle applied by the success branch, folded.
pub fn success_angle(beta: f64, gamma: f64) -> f64 {
    let (sb, cb) = beta.sin_cos();
    let (sg, cg) = gamma.sin_cos();
    fold((sb * sg).atan2(cb * cg))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageKind {
    Probabilistic,
    /// Maximally entangled resource; both branches end in `U(α)`.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageParams {
    pub stage_index: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub kind: StageKind,
}

impl StageParams {
    /// Probabilistic stage targeting `alpha` with resource parameter `beta`.
    /// Stages whose failure branch is locally correctable are marked
    /// deterministic.
    pub fn new(stage_index: usize, alpha: f64, beta: f64) -> Result<Self> {
        let alpha = fold(alpha);
        let gamma = gamma_for(alpha, beta)?;
        let mut p = Self { stage_index, alpha, beta, gamma, kind: StageKind::Probabilistic };
        if is_local(failure_residual(&p).alpha_next) {
            p.kind = StageKind::Deterministic;
        }
        Ok(p)
    }

    /// The one-ebit stage: `β = π/4`, `γ = α`.
    pub fn deterministic(stage_index: usize, alpha: f64) -> Self {
        let alpha = fold(alpha);
        Self { stage_index, alpha, beta: FRAC_PI_4, gamma: alpha, kind: StageKind::Deterministic }
    }

    pub fn success_probability(&self) -> f64 {
        success_probability(self.beta, self.gamma)
    }

    pub fn entanglement(&self) -> f64 {
        resource_entanglement(self.beta)
    }

    /// Checks `tan β tan γ = tan α` via the success-branch rotation angle.
    pub fn check(&self) -> Result<()> {
        let got = success_angle(self.beta, self.gamma);
        let diff = fold(got - self.alpha).abs();
        if diff > EQ8_TOL {
            return Err(Error::InconsistentSchedule(format!(
                "stage {}: success branch implements {got}, target {}",
                self.stage_index, self.alpha
            )));
        }
        Ok(())
    }
}

/// Rotation left behind by the failure branch and the angle still to implement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// `α′`: the failure branch applies `U(α′)`.
    pub alpha_prime: f64,
    /// `fold(α − α′)`: target of the next stage.
    pub alpha_next: f64,
}

pub fn failure_residual(params: &StageParams) -> Residual {
    let (sb, cb) = params.beta.sin_cos();
    let (sg, cg) = params.gamma.sin_cos();
    let alpha_prime = fold((-sb * cg).atan2(cb * sg));
    Residual { alpha_prime, alpha_next: fold(params.alpha - alpha_prime) }
}

/// A chain of stages: stage `l+1` corrects the failure of stage `l`; the last
/// stage's failure branch is locally correctable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSchedule {
    pub alpha: f64,
    pub stages: Vec<StageParams>,
    pub max_stages: usize,
}

impl StageSchedule {
    pub fn new(alpha: f64, stages: Vec<StageParams>, max_stages: usize) -> Result<Self> {
        let s = Self { alpha: fold(alpha), stages, max_stages };
        s.validate()?;
        Ok(s)
    }

    /// Builds a chain by choosing `beta_of(stage_index, alpha_l)` at each stage;
    /// stage `max_stages` is the deterministic one-ebit stage.
    pub fn build(alpha: f64, max_stages: usize, mut beta_of: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        if max_stages == 0 {
            return Err(Error::InvalidArgument("max_stages must be at least 1".into()));
        }
        let mut stages = Vec::new();
        let mut target = fold(alpha);
        let mut index = 1;
        while !is_local(target) {
            let stage = if index == max_stages {
                StageParams::deterministic(index, target)
            } else {
                StageParams::new(index, target, beta_of(index, target))?
            };
            stages.push(stage);
            if stage.kind == StageKind::Deterministic {
                break;
            }
            target = failure_residual(&stage).alpha_next;
            index += 1;
        }
        Self::new(alpha, stages, max_stages)
    }

    /// Doubling chain with `β_l = α_l` (success probability 1/2 per stage).
    pub fn cdkl(alpha: f64, max_stages: usize) -> Result<Self> {
        Self::build(alpha, max_stages, |_, a| a)
    }

    /// A single one-ebit stage.
    pub fn deterministic(alpha: f64) -> Self {
        let alpha = fold(alpha);
        let stages = if is_local(alpha) { vec![] } else { vec![StageParams::deterministic(1, alpha)] };
        Self { alpha, stages, max_stages: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.len() > self.max_stages {
            return Err(Error::InconsistentSchedule(format!(
                "{} stages exceed max_stages {}",
                self.stages.len(),
                self.max_stages
            )));
        }
        let mut target = self.alpha;
        for (i, st) in self.stages.iter().enumerate() {
            if st.stage_index != i + 1 {
                return Err(Error::InconsistentSchedule(format!(
                    "stage at position {} has index {}",
                    i + 1,
                    st.stage_index
                )));
            }
            if is_local(target) {
                return Err(Error::InconsistentSchedule(format!("stage {} targets a local rotation", st.stage_index)));
            }
            if fold(st.alpha - target).abs() > CHAIN_TOL {
                return Err(Error::InconsistentSchedule(format!(
                    "stage {} targets {} but the chain requires {target}",
                    st.stage_index, st.alpha
                )));
            }
            st.check()?;
            target = failure_residual(st).alpha_next;
        }
        if !is_local(target) {
            return Err(Error::InconsistentSchedule(format!("chain ends with nonlocal residual {target}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

    #[test]
    fn gamma_examples() {
        assert!((gamma_for(FRAC_PI_8, FRAC_PI_4).unwrap() - FRAC_PI_8).abs() < 1e-15);
        assert_eq!(gamma_for(0.0, 0.7).unwrap(), 0.0);
        assert_eq!(gamma_for(0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(gamma_for(0.1, 0.0), Err(Error::DegenerateBeta { .. })));
        assert!(gamma_for(0.1, FRAC_PI_2).is_err());
        // solve tan²β = tan α by bisection, then γ = β
        let alpha: f64 = 0.1;
        let (mut lo, mut hi) = (0.0f64, FRAC_PI_4);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid.tan().powi(2) < alpha.tan() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 0.306_757_951_566).abs() < 1e-9);
        assert!((gamma_for(alpha, lo).unwrap() - lo).abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let a = 0.2;
        let r = failure_residual(&StageParams::new(1, a, a).unwrap());
        assert!((r.alpha_prime + a).abs() < 1e-14);
        assert!((r.alpha_next - 2.0 * a).abs() < 1e-14);

        let p = StageParams::new(1, a, FRAC_PI_4).unwrap();
        assert!((p.gamma - a).abs() < 1e-15);
        let r = failure_residual(&p);
        assert!((r.alpha_prime - (a - FRAC_PI_2)).abs() < 1e-14);
        assert_eq!(r.alpha_next, FRAC_PI_2);
        assert_eq!(p.kind, StageKind::Deterministic);

        // γ = π/2 is the degenerate β = 0 case: the failure branch is the identity
        let p = StageParams { stage_index: 1, alpha: 0.0, beta: 0.0, gamma: FRAC_PI_2, kind: StageKind::Probabilistic };
        assert_eq!(failure_residual(&p).alpha_prime, 0.0);
    }

    #[test]
    fn half_success_for_doubling_stage() {
        for &a in &[0.01, 0.3, 0.7] {
            let p = StageParams::new(1, a, a).unwrap();
            assert!((p.gamma - FRAC_PI_4).abs() < 1e-14);
            assert!((p.success_probability() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn schedules_chain() {
        let s = StageSchedule::cdkl(FRAC_PI_8, 10).unwrap();
        assert_eq!(s.stages.len(), 2);
        assert!((s.stages[1].alpha - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(s.stages[1].kind, StageKind::Deterministic);

        let s = StageSchedule::cdkl(0.1, 3).unwrap();
        assert_eq!(s.stages.len(), 3);
        assert_eq!(s.stages[2].kind, StageKind::Deterministic);
        assert!((s.stages[2].alpha - 0.4).abs() < 1e-14);

        assert!(StageSchedule::cdkl(0.0, 5).unwrap().stages.is_empty());
    }

    #[test]
    fn inconsistent_schedules_rejected() {
        let good = StageSchedule::cdkl(0.1, 4).unwrap();
        let mut bad = good.clone();
        bad.stages[1].alpha = 0.25;
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.stages.pop();
        assert!(bad.validate().is_err());
        let mut bad = good.clone();
        bad.stages[0].gamma += 0.01;
        assert!(bad.validate().is_err());
        let mut bad = good;
        bad.max_stages = 2;
        assert!(bad.validate().is_err());
    }
}
