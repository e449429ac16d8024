use super::{check_common, config_block, finite, json_only, optimizer, Failure, Outcome};
use crate::args::{ScheduleKind, SimulateArgs};
use crate::output::write_json;
use rayon::prelude::*;
use serde_json::json;
use stator::linalg::{expm_oracle, op_distance_phase_invariant, pauli, StateVector};
use stator::optimizer::expected_cost;
use stator::protocol::{enumerate_leaves, rng_stream, run_protocol, SampledOutcomes, StageSchedule, Transcript};

/// Leaves farther than this from the target are invariant violations.
const LEAF_TOL: f64 = 1e-8;
const MAX_PARTIES: usize = 10;

struct Run {
    stages: usize,
    succeeded_at: Option<usize>,
    ebits: f64,
    worker_bits: f64,
    leader_bits: f64,
    distance: f64,
}

pub fn run(args: &SimulateArgs) -> Outcome<()> {
    let c = &args.common;
    check_common(c)?;
    json_only(c, "simulate")?;
    let alpha = finite("alpha", args.alpha)?;
    if !(2..=MAX_PARTIES).contains(&args.parties) {
        return Err(Failure::validation(format!("--parties must lie in 2..={MAX_PARTIES}")));
    }
    if args.runs == 0 && !args.exhaustive {
        return Err(Failure::validation("--runs must be at least 1"));
    }
    let schedule = match args.schedule {
        ScheduleKind::Optimized => optimizer(c)?.optimize_schedule(alpha)?.schedule,
        ScheduleKind::Cdkl => StageSchedule::cdkl(alpha, c.stages)?,
        ScheduleKind::Deterministic => StageSchedule::deterministic(alpha),
    };
    let analytic = expected_cost(&schedule);
    let n = args.parties;
    let target = expm_oracle(&pauli::z_string(n), alpha)?;
    let stages_json: Vec<_> = schedule
        .stages
        .iter()
        .map(|s| json!({ "index": s.stage_index, "alpha": s.alpha, "beta": s.beta, "gamma": s.gamma, "kind": s.kind }))
        .collect();

    let (body, max_distance) = if args.exhaustive {
        let leaves = enumerate_leaves(alpha, &schedule, n)?;
        let total: f64 = leaves.iter().map(|l| l.probability).sum();
        let ebits: f64 = leaves.iter().map(|l| l.probability * l.ebits).sum();
        let dist = leaves.iter().map(|l| op_distance_phase_invariant(&l.net_operator, &target)).fold(0.0, f64::max);
        let body = json!({
            "mode": "exhaustive",
            "leaves": leaves.len(),
            "total_probability": total,
            "expected_ebits": ebits,
            "analytic_ebits": analytic.expected_ebits,
            "max_leaf_distance": dist,
        });
        (body, dist)
    } else {
        let dims = vec![2; n];
        let runs = (0..args.runs as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng_stream(c.seed, 2 * i);
                let psi = StateVector::random(&dims, &mut rng)?;
                let mut source = SampledOutcomes::seeded(c.seed, 2 * i + 1);
                let t: Transcript = run_protocol(alpha, &schedule, &psi, &mut source)?;
                Ok(Run {
                    stages: t.outcomes.len(),
                    succeeded_at: t.outcomes.iter().position(|r| r.success),
                    ebits: t.ebits_consumed,
                    worker_bits: t.bits_from_workers.first().copied().unwrap_or(0) as f64,
                    leader_bits: t.bits_from_leader as f64,
                    distance: op_distance_phase_invariant(&t.net_operator, &target),
                })
            })
            .collect::<Result<Vec<_>, stator::Error>>()?;
        let m = runs.len() as f64;
        let mean = |f: &dyn Fn(&Run) -> f64| runs.iter().map(f).sum::<f64>() / m;
        let mean_ebits = mean(&|r| r.ebits);
        let var = runs.iter().map(|r| (r.ebits - mean_ebits).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
        let se = (var / m).sqrt();
        let per_stage: Vec<_> = (0..schedule.stages.len())
            .map(|l| {
                let reached = runs.iter().filter(|r| r.stages > l).count();
                let succeeded = runs.iter().filter(|r| r.succeeded_at == Some(l)).count();
                let rate = if reached == 0 { 0.0 } else { succeeded as f64 / reached as f64 };
                json!({
                    "index": l + 1,
                    "reached": reached,
                    "succeeded": succeeded,
                    "success_rate": rate,
                    "analytic_success_probability": schedule.stages[l].success_probability(),
                })
            })
            .collect();
        let dist = runs.iter().map(|r| r.distance).fold(0.0, f64::max);
        let body = json!({
            "mode": "monte_carlo",
            "runs": args.runs,
            "per_stage": per_stage,
            "mean_ebits": mean_ebits,
            "ebits_standard_error": se,
            "analytic_ebits": analytic.expected_ebits,
            "mean_bits_per_worker": mean(&|r| r.worker_bits),
            "mean_bits_leader": mean(&|r| r.leader_bits),
            "max_leaf_distance": dist,
        });
        (body, dist)
    };
    let report = json!({
        "schema": "stator/v1/simulate",
        "config": config_block("simulate", args),
        "alpha": alpha,
        "schedule": stages_json,
        "result": body,
    });
    write_json(report, c.out.as_deref())?;
    if max_distance > LEAF_TOL {
        return Err(Failure::invariant(format!(
            "a branch operator is {max_distance:.3e} from the target (tolerance {LEAF_TOL:e})"
        )));
    }
    Ok(())
}
