use super::{check_common, config_block, finite, optimizer, Outcome};
use crate::args::{Format, OptimizeArgs};
use crate::output::{write_csv, write_json};
use serde_json::json;
use stator::angle::{is_local, reduce};
use stator::comm::{leader_comm_rate, worker_comm_rate, LeaderMode};
use stator::optimizer::cdkl_cost;

pub fn run(args: &OptimizeArgs) -> Outcome<()> {
    let c = &args.common;
    check_common(c)?;
    let alpha = finite("alpha", args.alpha)?;
    let opt = optimizer(c)?;
    let profile = opt.optimize_schedule(alpha)?;
    let r = reduce(alpha);
    let cdkl = if is_local(r) { 0.0 } else { cdkl_cost(r)? };
    let stages: Vec<_> = profile
        .schedule
        .stages
        .iter()
        .zip(&profile.stage_reach_probs)
        .map(|(s, p)| {
            json!({
                "index": s.stage_index,
                "alpha": s.alpha,
                "beta": s.beta,
                "gamma": s.gamma,
                "kind": s.kind,
                "reach_probability": p,
                "success_probability": s.success_probability(),
                "ebits": s.entanglement(),
            })
        })
        .collect();
    if c.format == Some(Format::Csv) {
        let rows: Vec<Vec<f64>> = profile
            .schedule
            .stages
            .iter()
            .zip(&profile.stage_reach_probs)
            .map(|(s, p)| {
                vec![s.stage_index as f64, s.alpha, s.beta, s.gamma, *p, s.success_probability(), s.entanglement()]
            })
            .collect();
        return write_csv(
            c.out.as_deref(),
            &["stage", "alpha", "beta", "gamma", "reach_probability", "success_probability", "ebits"],
            &rows,
        );
    }
    let ratio = if r == 0.0 { 0.0 } else { profile.expected_ebits / r };
    let report = json!({
        "schema": "stator/v1/optimize",
        "config": config_block("optimize", args),
        "alpha": alpha,
        "reduced_alpha": r,
        "expected_ebits": profile.expected_ebits,
        "ebits_over_alpha": ratio,
        "cdkl_ebits": cdkl,
        "stages": stages,
        "communication": {
            "worker_bits": worker_comm_rate(&profile, c.delta),
            "leader_bits_uncompressed": leader_comm_rate(&profile, LeaderMode::Uncompressed),
            "leader_bits_entropy_bound": leader_comm_rate(&profile, LeaderMode::EntropyBound),
        },
    });
    write_json(report, c.out.as_deref())
}
