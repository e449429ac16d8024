use super::{check_common, config_block, json_only, Failure, Outcome};
use crate::args::GeneralArgs;
use crate::output::write_json;
use serde_json::{json, Value};
use stator::general::{
    canonical_two_qubit, design_resource, failure_policy_cost, run_general_protocol, z_string_family, DesignPolicy,
    FailurePolicy, TensorDecomposition,
};
use stator::linalg::{op_distance_phase_invariant, StateVector};
use stator::protocol::{rng_stream, ForcedOutcomes};
use stator::C64;

const SUCCESS_TOL: f64 = 1e-9;

fn parse_zstrings(text: &str) -> Outcome<Vec<(Vec<usize>, f64)>> {
    text.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|g| {
            let (support, angle) = g
                .split_once(':')
                .ok_or_else(|| Failure::validation(format!("generator `{g}` needs the form parties:angle")))?;
            let parties = support
                .split('-')
                .map(|p| p.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::validation(format!("bad party list `{support}`")))?;
            let angle: f64 = angle.trim().parse().map_err(|_| Failure::validation(format!("bad angle `{angle}`")))?;
            Ok((parties, angle))
        })
        .collect()
}

fn complex(z: &C64) -> Value {
    json!([z.re, z.im])
}

pub fn run(args: &GeneralArgs) -> Outcome<()> {
    let c = &args.common;
    check_common(c)?;
    json_only(c, "general")?;
    let decomp: TensorDecomposition = match (&args.theta, &args.zstrings) {
        (Some(t), None) if t.len() == 3 => canonical_two_qubit([t[0], t[1], t[2]])?,
        (Some(_), None) => return Err(Failure::validation("--theta takes three comma-separated angles")),
        (None, Some(z)) => z_string_family(args.parties, &parse_zstrings(z)?)?,
        _ => return Err(Failure::validation("give exactly one of --theta or --zstrings")),
    };
    let design = design_resource(&decomp, &DesignPolicy::Sqrt)?;
    let u = decomp.unitary()?;
    let mut rng = rng_stream(c.seed, 0);
    let psi = StateVector::random(&decomp.system_dims(), &mut rng)?;
    let d = decomp.resource_dim();
    let n = decomp.parties();
    let mut worst = 0.0f64;
    let patterns = d.pow(n as u32 - 1);
    for mut idx in 0..patterns {
        let mut choices = Vec::with_capacity(n);
        for _ in 0..n - 1 {
            choices.push(idx % d);
            idx /= d;
        }
        choices.push(0);
        let o = run_general_protocol(&decomp, &design, &psi, &mut ForcedOutcomes::new(choices))?;
        worst = worst.max(op_distance_phase_invariant(&o.rescaled(), &u));
    }
    let teleport = failure_policy_cost(&decomp, &design, FailurePolicy::Teleport)?;
    let iterate = match failure_policy_cost(&decomp, &design, FailurePolicy::Iterate) {
        Ok(f) => {
            let step = f.iterate.expect("iterate step");
            json!({ "alpha": step.alpha, "alpha_prime": step.alpha_prime, "alpha_next": step.alpha_next })
        }
        Err(stator::Error::Unsupported(msg)) => json!({ "unsupported": msg }),
        Err(e) => return Err(e.into()),
    };
    let report = json!({
        "schema": "stator/v1/general",
        "config": config_block("general", args),
        "parties": n,
        "resource_dim": d,
        "lambda": decomp.lambdas().iter().map(complex).collect::<Vec<_>>(),
        "mu": design.mu.iter().map(complex).collect::<Vec<_>>(),
        "nu": design.nu.iter().map(complex).collect::<Vec<_>>(),
        "success_probability": design.success_probability(&decomp),
        "fail_probability": teleport.fail_probability,
        "resource_ebits": design.entanglement(),
        "teleport": {
            "fallback_ebits": teleport.fallback_ebits,
            "fallback_bits": teleport.fallback_bits,
            "expected_ebits": teleport.expected_ebits,
        },
        "iterate": iterate,
        "check": { "worker_patterns": patterns, "max_success_distance": worst },
    });
    write_json(report, c.out.as_deref())?;
    if worst > SUCCESS_TOL {
        return Err(Failure::invariant(format!("success operator is {worst:.3e} from the target")));
    }
    Ok(())
}
