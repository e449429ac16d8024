use super::steps::{apply_local_rotation, correct_parity, couple, measure_worker, project_leader};
use super::{failure_residual, OutcomeSource, StageKind, StageParams, StageSchedule};
use crate::angle::{fold, is_local};
use crate::linalg::{DenseStator, OperatorMatrix, StateVector};
use crate::{Error, Result};
use serde::Serialize;

/// What happened in one executed stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageRecord {
    pub stage_index: usize,
    /// Raw Step-2 outcomes of parties 1..N−1.
    pub worker_bits: Vec<u8>,
    pub success: bool,
    /// A local σz layer finished the stage after a correctable failure.
    pub local_correction: bool,
}

/// Result of a full protocol run.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub outcomes: Vec<StageRecord>,
    pub ebits_consumed: f64,
    /// Bits sent by each worker (parties 1..N−1).
    pub bits_from_workers: Vec<u64>,
    pub bits_from_leader: u64,
    /// Operator applied to the system, normalized to be unitary.
    pub net_operator: OperatorMatrix,
    pub final_state: StateVector,
}

#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub state: StateVector,
    pub record: StageRecord,
    /// Probability of the realized branch (worker pattern and leader outcome).
    pub probability: f64,
    /// Branch operator, including any local correction, normalized to be unitary.
    pub operator: OperatorMatrix,
}

fn qubit_parties(system: &StateVector) -> Result<usize> {
    let n = system.dims().len();
    if n < 2 || system.dims().iter().any(|&d| d != 2) {
        return Err(Error::DimensionMismatch(format!(
            "the stage protocol needs one qubit per party and at least 2 parties, got dims {:?}",
            system.dims()
        )));
    }
    Ok(n)
}

/// Squared Frobenius norm divided by the system dimension: the branch weight
/// averaged over inputs (equal to the state-independent branch probability).
fn mean_weight(st: &DenseStator) -> f64 {
    st.map().norm_squared() / st.map().ncols() as f64
}

fn renormalize(st: &mut DenseStator) {
    let w = mean_weight(st);
    if w > 0.0 {
        st.scale(1.0 / w.sqrt());
    }
}

fn normalized_operator(st: &DenseStator) -> Result<OperatorMatrix> {
    let mut st = st.clone();
    renormalize(&mut st);
    st.as_operator()
}

/// Runs one stage on top of `map` (the operator accumulated so far, normalized),
/// sampling outcomes for the input `system`. Returns the new normalized map, the
/// record and the realized branch probability.
fn stage_on_map(
    map: &DenseStator,
    system: &StateVector,
    params: &StageParams,
    parties: usize,
    source: &mut dyn OutcomeSource,
) -> Result<(DenseStator, StageRecord, f64)> {
    let mut st = couple(map, params.beta, parties)?;
    let mut weight = st.weight(system)?;
    let mut probability = 1.0;
    let mut bits = Vec::with_capacity(parties - 1);
    for _ in 0..parties - 1 {
        let cands = [measure_worker(&st, 0), measure_worker(&st, 1)];
        let ws = [cands[0].weight(system)?, cands[1].weight(system)?];
        let probs = [ws[0] / weight, ws[1] / weight];
        let k = source.choose(&probs)?;
        probability *= probs[k];
        weight = ws[k];
        bits.push(k as u8);
        st = cands[k].clone();
    }
    correct_parity(&mut st, &bits);
    let cands = [project_leader(&st, params.gamma, true), project_leader(&st, params.gamma, false)];
    let ws = [cands[0].weight(system)?, cands[1].weight(system)?];
    let probs = [ws[0] / weight, ws[1] / weight];
    let k = source.choose(&probs)?;
    probability *= probs[k];
    let success = k == 0;
    let mut st = cands[k].clone();
    let mut local_correction = false;
    if !success {
        let next = failure_residual(params).alpha_next;
        if is_local(next) {
            local_correction = apply_local_rotation(&mut st, next);
        }
    }
    renormalize(&mut st);
    let record = StageRecord { stage_index: params.stage_index, worker_bits: bits, success, local_correction };
    Ok((st, record, probability))
}

fn output_state(map: &DenseStator, system: &StateVector) -> Result<StateVector> {
    StateVector::normalized(system.dims().to_vec(), map.act(system)?)?
        .ok_or_else(|| Error::InvalidArgument("protocol annihilated the input state".into()))
}

/// Executes Steps 1–4 once on `system`.
pub fn run_stage(system: &StateVector, params: &StageParams, source: &mut dyn OutcomeSource) -> Result<StageOutcome> {
    let parties = qubit_parties(system)?;
    params.check()?;
    let map = DenseStator::identity(system.dims())?;
    let (st, record, probability) = stage_on_map(&map, system, params, parties, source)?;
    Ok(StageOutcome { state: output_state(&st, system)?, record, probability, operator: st.as_operator()? })
}

/// The one-ebit stage (`β = π/4`, `γ = α`) with the local `U(π/2)` fix-up on
/// failure: implements `U(alpha)` on every branch.
pub fn run_deterministic_stage(
    system: &StateVector,
    alpha: f64,
    source: &mut dyn OutcomeSource,
) -> Result<StageOutcome> {
    if is_local(alpha) {
        let parties = qubit_parties(system)?;
        let mut map = DenseStator::identity(system.dims())?;
        apply_local_rotation(&mut map, alpha);
        return Ok(StageOutcome {
            state: output_state(&map, system)?,
            record: StageRecord {
                stage_index: 1,
                worker_bits: vec![0; parties - 1],
                success: true,
                local_correction: false,
            },
            probability: 1.0,
            operator: map.as_operator()?,
        });
    }
    run_stage(system, &StageParams::deterministic(1, alpha), source)
}

fn check_schedule_target(alpha: f64, schedule: &StageSchedule) -> Result<()> {
    if fold(alpha - schedule.alpha).abs() > 1e-12 {
        return Err(Error::InconsistentSchedule(format!("schedule built for {} used for {alpha}", schedule.alpha)));
    }
    schedule.validate()
}

/// Runs the stage chain until a success (or the locally corrected failure of
/// the last stage), metering entanglement and communication.
pub fn run_protocol(
    alpha: f64,
    schedule: &StageSchedule,
    system: &StateVector,
    source: &mut dyn OutcomeSource,
) -> Result<Transcript> {
    check_schedule_target(alpha, schedule)?;
    let parties = qubit_parties(system)?;
    let mut map = DenseStator::identity(system.dims())?;
    let mut outcomes = Vec::new();
    let mut ebits = 0.0;
    if schedule.stages.is_empty() {
        apply_local_rotation(&mut map, schedule.alpha);
    }
    for params in &schedule.stages {
        let (st, record, _) = stage_on_map(&map, system, params, parties, source)?;
        map = st;
        ebits += params.entanglement();
        let done = record.success || record.local_correction;
        outcomes.push(record);
        if done {
            break;
        }
    }
    let executed = outcomes.len() as u64;
    Ok(Transcript {
        ebits_consumed: ebits,
        bits_from_workers: vec![executed; parties - 1],
        bits_from_leader: executed,
        net_operator: map.as_operator()?,
        final_state: output_state(&map, system)?,
        outcomes,
    })
}

/// One path through the branch tree.
#[derive(Debug, Clone)]
pub struct Leaf {
    pub records: Vec<StageRecord>,
    pub probability: f64,
    pub ebits: f64,
    pub net_operator: OperatorMatrix,
}

/// Enumerates every branch of the protocol (all worker patterns and leader
/// outcomes of every stage), skipping zero-probability branches.
pub fn enumerate_leaves(alpha: f64, schedule: &StageSchedule, parties: usize) -> Result<Vec<Leaf>> {
    check_schedule_target(alpha, schedule)?;
    if parties < 2 {
        return Err(Error::InvalidArgument("at least 2 parties required".into()));
    }
    let mut map = DenseStator::identity(&vec![2; parties])?;
    let mut leaves = Vec::new();
    if schedule.stages.is_empty() {
        apply_local_rotation(&mut map, schedule.alpha);
        leaves.push(Leaf { records: vec![], probability: 1.0, ebits: 0.0, net_operator: map.as_operator()? });
        return Ok(leaves);
    }
    descend(schedule, 0, &map, 1.0, 0.0, &mut Vec::new(), parties, &mut leaves)?;
    Ok(leaves)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    schedule: &StageSchedule,
    idx: usize,
    map: &DenseStator,
    prob: f64,
    ebits: f64,
    path: &mut Vec<StageRecord>,
    parties: usize,
    leaves: &mut Vec<Leaf>,
) -> Result<()> {
    let params = &schedule.stages[idx];
    let ebits = ebits + params.entanglement();
    let coupled = couple(map, params.beta, parties)?;
    for pattern in 0..1usize << (parties - 1) {
        let bits: Vec<u8> = (0..parties - 1).map(|w| ((pattern >> (parties - 2 - w)) & 1) as u8).collect();
        let mut st = coupled.clone();
        for &b in &bits {
            st = measure_worker(&st, b);
        }
        correct_parity(&mut st, &bits);
        for success in [true, false] {
            let mut branch = project_leader(&st, params.gamma, success);
            let p = mean_weight(&branch);
            if p < 1e-14 {
                continue;
            }
            let mut record = StageRecord {
                stage_index: params.stage_index,
                worker_bits: bits.clone(),
                success,
                local_correction: false,
            };
            let next = failure_residual(params).alpha_next;
            let terminal = success || is_local(next) || params.kind == StageKind::Deterministic;
            if !success && is_local(next) {
                record.local_correction = apply_local_rotation(&mut branch, next);
            }
            renormalize(&mut branch);
            path.push(record);
            if terminal || idx + 1 == schedule.stages.len() {
                leaves.push(Leaf {
                    records: path.clone(),
                    probability: prob * p,
                    ebits,
                    net_operator: normalized_operator(&branch)?,
                });
            } else {
                descend(schedule, idx + 1, &branch, prob * p, ebits, path, parties, leaves)?;
            }
            path.pop();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{expm_oracle, op_distance_phase_invariant, pauli, Stator, StatorTerm, C64};
    use crate::protocol::steps::{correct_parity, couple, measure_worker};
    use crate::protocol::{success_probability, ForcedOutcomes, SampledOutcomes};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn target(alpha: f64, n: usize) -> OperatorMatrix {
        expm_oracle(&pauli::z_string(n), alpha).unwrap()
    }

    fn two_term(beta: f64, n: usize, copies: usize) -> DenseStator {
        let (s, c) = beta.sin_cos();
        Stator::new(
            2,
            copies,
            vec![
                StatorTerm { label: 0, coefficient: C64::new(c, 0.0), ops: vec![pauli::i(); n] },
                StatorTerm { label: 1, coefficient: C64::new(0.0, s), ops: vec![pauli::z(); n] },
            ],
        )
        .unwrap()
        .to_dense()
        .unwrap()
    }

    #[test]
    fn coupling_builds_the_stator() {
        for n in 2..=4 {
            let st = couple(&DenseStator::identity(&vec![2; n]).unwrap(), 0.37, n).unwrap();
            assert!(st.distance_up_to_scale(&two_term(0.37, n, n)) < 1e-12);
        }
    }

    #[test]
    fn parity_correction_restores_plus_sign() {
        for n in 2..=4 {
            let coupled = couple(&DenseStator::identity(&vec![2; n]).unwrap(), 0.41, n).unwrap();
            let want = two_term(0.41, n, 1);
            for pattern in 0..1usize << (n - 1) {
                let bits: Vec<u8> = (0..n - 1).map(|w| ((pattern >> w) & 1) as u8).collect();
                let mut st = coupled.clone();
                for &b in &bits {
                    st = measure_worker(&st, b);
                }
                correct_parity(&mut st, &bits);
                assert!(st.distance_up_to_scale(&want) < 1e-12, "n={n} bits={bits:?}");
            }
        }
    }

    #[test]
    fn success_branch_is_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=4 {
            let system = StateVector::random(&vec![2; n], &mut rng).unwrap();
            for (alpha, beta) in [(0.3, 0.5), (-0.7, 1.1), (1.2, 0.4)] {
                let params = StageParams::new(1, alpha, beta).unwrap();
                let out = run_stage(&system, &params, &mut ForcedOutcomes::new(vec![0; n])).unwrap();
                assert!(out.record.success);
                assert!(op_distance_phase_invariant(&out.operator, &target(alpha, n)) < 1e-10);
            }
        }
    }

    #[test]
    fn failure_branch_at_half_probability_is_inverse() {
        let alpha = 0.23;
        let system = StateVector::basis(&[2, 2], 1).unwrap();
        let params = StageParams::new(1, alpha, alpha).unwrap();
        assert!((params.gamma - FRAC_PI_4).abs() < 1e-14);
        let out = run_stage(&system, &params, &mut ForcedOutcomes::new(vec![1, 1])).unwrap();
        assert!(!out.record.success);
        assert!(op_distance_phase_invariant(&out.operator, &target(-alpha, 2)) < 1e-10);
    }

    #[test]
    fn probabilities_do_not_depend_on_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let params = StageParams::new(1, 0.4, 0.3).unwrap();
        let ps = success_probability(params.beta, params.gamma);
        for n in [2, 3] {
            for _ in 0..100 {
                let system = StateVector::random(&vec![2; n], &mut rng).unwrap();
                let mut total = 0.0;
                for pattern in 0..1usize << (n - 1) {
                    let mut choices: Vec<usize> = (0..n - 1).map(|w| (pattern >> w) & 1).collect();
                    choices.push(0);
                    let out = run_stage(&system, &params, &mut ForcedOutcomes::new(choices)).unwrap();
                    total += out.probability;
                }
                assert!((total - ps).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn deterministic_stage_both_branches() {
        let system = StateVector::basis(&[2, 2, 2], 3).unwrap();
        for leader in [0, 1] {
            let out =
                run_deterministic_stage(&system, FRAC_PI_4, &mut ForcedOutcomes::new(vec![0, 1, leader])).unwrap();
            assert_eq!(out.record.local_correction, leader == 1);
            assert!(op_distance_phase_invariant(&out.operator, &target(FRAC_PI_4, 3)) < 1e-10);
        }
        let out = run_deterministic_stage(&system, 0.0, &mut ForcedOutcomes::new(vec![])).unwrap();
        assert!(op_distance_phase_invariant(&out.operator, &OperatorMatrix::identity(&[2, 2, 2])) < 1e-12);
    }

    #[test]
    fn cdkl_leaves_are_exact() {
        let schedule = StageSchedule::cdkl(FRAC_PI_8, 4).unwrap();
        let leaves = enumerate_leaves(FRAC_PI_8, &schedule, 2).unwrap();
        let mass: f64 = leaves.iter().map(|l| l.probability).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        for leaf in &leaves {
            assert!(op_distance_phase_invariant(&leaf.net_operator, &target(FRAC_PI_8, 2)) < 1e-10);
            let ebits: f64 = leaf.records.iter().map(|r| schedule.stages[r.stage_index - 1].entanglement()).sum();
            assert!((leaf.ebits - ebits).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_angle_is_empty() {
        let schedule = StageSchedule::cdkl(0.0, 4).unwrap();
        let system = StateVector::basis(&[2, 2], 0).unwrap();
        let t = run_protocol(0.0, &schedule, &system, &mut ForcedOutcomes::new(vec![])).unwrap();
        assert!(t.outcomes.is_empty());
        assert_eq!(t.ebits_consumed, 0.0);
        assert_eq!(t.bits_from_leader, 0);
    }

    #[test]
    fn seeded_runs_repeat() {
        let schedule = StageSchedule::cdkl(0.3, 6).unwrap();
        let system = StateVector::basis(&[2, 2, 2], 5).unwrap();
        let run = || {
            let mut src = SampledOutcomes::seeded(42, 0);
            (0..50).map(|_| run_protocol(0.3, &schedule, &system, &mut src).unwrap().outcomes).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mismatched_schedule_rejected() {
        let schedule = StageSchedule::cdkl(0.3, 6).unwrap();
        let system = StateVector::basis(&[2, 2], 0).unwrap();
        let err = run_protocol(0.2, &schedule, &system, &mut ForcedOutcomes::new(vec![])).unwrap_err();
        assert!(matches!(err, Error::InconsistentSchedule(_)));
    }
}
