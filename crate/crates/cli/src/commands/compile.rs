use super::{check_common, config_block, json_only, optimizer, Failure, Outcome};
use crate::args::CompileArgs;
use crate::output::write_json;
use serde_json::{json, Value};
use stator::hamiltonian::{
    compile, compile_sum, cost_estimate, cost_estimate_with, verify, CostMode, HamiltonianSpec, Primitive,
};
use stator::linalg::OperatorMatrix;
use std::fs;

const EXACT_TOL: f64 = 1e-8;
const LEAKAGE_TOL: f64 = 1e-10;

fn matrix(m: &OperatorMatrix) -> Value {
    let e = m.entries();
    Value::Array(
        (0..e.nrows())
            .map(|r| json!((0..e.ncols()).map(|c| [e[(r, c)].re, e[(r, c)].im]).collect::<Vec<_>>()))
            .collect(),
    )
}

fn primitive(p: &Primitive) -> Value {
    match p {
        Primitive::AncillaPrep { party, dim } => json!({ "type": "ancilla_prep", "party": party, "dim": dim }),
        Primitive::SubspaceEmbed { party } => json!({ "type": "subspace_embed", "party": party }),
        Primitive::LocalLayer { ops } => {
            json!({ "type": "local_layer", "ops": ops.iter().map(matrix).collect::<Vec<_>>() })
        }
        Primitive::ZZRotation { angle } => json!({ "type": "zz_rotation", "angle": angle }),
        Primitive::SubspaceRestrict { party } => json!({ "type": "subspace_restrict", "party": party }),
    }
}

pub fn run(args: &CompileArgs) -> Outcome<()> {
    let c = &args.common;
    check_common(c)?;
    json_only(c, "compile")?;
    let text = fs::read_to_string(&args.input).map_err(|e| Failure::io(&args.input, e))?;
    let spec = HamiltonianSpec::from_json(&text)?;
    let single = spec.terms.len() == 1;
    let schedule = if single { compile(&spec)? } else { compile_sum(&spec)? };
    let v = verify(&schedule, &spec)?;
    let opt = optimizer(c)?;
    let summary = schedule.summary();
    let interior = schedule.interior_layers();
    let report = json!({
        "schema": "stator/v1/compile",
        "config": config_block("compile", args),
        "input": {
            "dims": spec.dims(),
            "terms": spec.terms.len(),
            "time": spec.time,
            "slices": spec.slices,
            "convention": spec.convention,
        },
        "primitives": schedule.primitives.iter().map(primitive).collect::<Vec<_>>(),
        "summary": {
            "local_layers": summary.local_layers,
            "rotations": summary.rotations,
            "total_angle": summary.total_angle,
            "interior_layers": interior,
            "no_interior_events": interior == 0,
        },
        "cost": {
            "linear_ebits": cost_estimate(&schedule, CostMode::Linear)?,
            "exact_ebits": cost_estimate_with(&schedule, &opt)?,
        },
        "verification": {
            "distance": v.distance,
            "leakage": v.leakage,
            "unitarity_deviation": v.unitarity_deviation,
            "trotter_error": if single { Value::Null } else { json!(v.distance) },
        },
    });
    write_json(report, c.out.as_deref())?;
    if v.leakage > LEAKAGE_TOL || (single && v.distance > EXACT_TOL) {
        return Err(Failure::invariant(format!(
            "compiled schedule misses the target: distance {:.3e}, leakage {:.3e}",
            v.distance, v.leakage
        )));
    }
    Ok(())
}
