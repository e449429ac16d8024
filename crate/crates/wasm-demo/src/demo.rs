use serde_json::{json, Value};
use stator::angle::reduce;
use stator::linalg::{expm_oracle, op_distance_phase_invariant, pauli, StateVector};
use stator::optimizer::{CostOptimizer, OptimizerConfig};
use stator::protocol::{rng_stream, run_protocol, SampledOutcomes};
use stator::{Error, Result};
use std::f64::consts::FRAC_PI_4;
use std::sync::OnceLock;

pub const MAX_POINTS: usize = 400;
pub const MAX_PARTIES: usize = 8;
pub const MAX_RUNS: usize = 20_000;

/// Coarse tables, built on first use (about a second).
pub fn optimizer() -> &'static CostOptimizer {
    static OPT: OnceLock<CostOptimizer> = OnceLock::new();
    OPT.get_or_init(|| CostOptimizer::new(OptimizerConfig::fast()).expect("fast config is valid"))
}

fn invalid(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

pub fn cost_curve(points: usize) -> Result<Value> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(invalid(format!("points must lie in 2..={MAX_POINTS}, got {points}")));
    }
    let (lo, hi) = (1e-6f64.ln(), FRAC_PI_4.ln());
    let alphas: Vec<f64> =
        (0..points).map(|i| (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp().min(FRAC_PI_4)).collect();
    let rows = optimizer().sweep(&alphas)?;
    Ok(json!({
        "alpha": alphas,
        "optimized_ratio": rows.iter().map(|r| r.optimized / r.alpha).collect::<Vec<_>>(),
        "cdkl_ratio": rows.iter().map(|r| r.cdkl / r.alpha).collect::<Vec<_>>(),
    }))
}

fn finite(alpha: f64) -> Result<f64> {
    if alpha.is_finite() {
        Ok(alpha)
    } else {
        Err(invalid(format!("alpha must be finite, got {alpha}")))
    }
}

pub fn optimize(alpha: f64) -> Result<Value> {
    let opt = optimizer();
    let profile = opt.optimize_schedule(finite(alpha)?)?;
    let stages: Vec<Value> = profile
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
                "ebits": s.entanglement(),
            })
        })
        .collect();
    Ok(json!({
        "alpha": alpha,
        "reduced_alpha": reduce(alpha),
        "expected_ebits": profile.expected_ebits,
        "cdkl_ebits": stator::optimizer::cdkl_cost(alpha)?,
        "stages": stages,
    }))
}

pub fn simulate(alpha: f64, parties: usize, runs: usize, seed: u64) -> Result<Value> {
    if !(2..=MAX_PARTIES).contains(&parties) {
        return Err(invalid(format!("parties must lie in 2..={MAX_PARTIES}, got {parties}")));
    }
    if !(1..=MAX_RUNS).contains(&runs) {
        return Err(invalid(format!("runs must lie in 1..={MAX_RUNS}, got {runs}")));
    }
    let profile = optimizer().optimize_schedule(finite(alpha)?)?;
    let target = expm_oracle(&pauli::z_string(parties), alpha)?;
    let dims = vec![2; parties];
    let mut histogram = vec![0usize; profile.schedule.stages.len() + 1];
    let (mut sum, mut sum_sq, mut worst) = (0.0, 0.0, 0.0f64);
    for i in 0..runs as u64 {
        let psi = StateVector::random(&dims, &mut rng_stream(seed, 2 * i))?;
        let t = run_protocol(alpha, &profile.schedule, &psi, &mut SampledOutcomes::seeded(seed, 2 * i + 1))?;
        histogram[t.outcomes.len()] += 1;
        sum += t.ebits_consumed;
        sum_sq += t.ebits_consumed * t.ebits_consumed;
        worst = worst.max(op_distance_phase_invariant(&t.net_operator, &target));
    }
    let m = runs as f64;
    let mean = sum / m;
    let var = ((sum_sq - m * mean * mean) / (m - 1.0).max(1.0)).max(0.0);
    Ok(json!({
        "runs": runs,
        "stages_used": histogram,
        "mean_ebits": mean,
        "standard_error": (var / m).sqrt(),
        "analytic_ebits": profile.expected_ebits,
        "max_distance": worst,
    }))
}
