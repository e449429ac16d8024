use super::{check_common, config_block, optimizer, Failure, Outcome};
use crate::args::{CurvesArgs, Format};
use crate::output::{write_csv, write_json};
use rayon::prelude::*;
use serde_json::json;
use stator::comm::{linear_fit, optimize_leader_comm};
use stator::optimizer::cdkl_cost;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fs;
use std::path::{Path, PathBuf};

/// Printed constant the bound is compared against.
const BOUND_REFERENCE: f64 = 5.6418;

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| if i + 1 == n { hi } else { (a + (b - a) * i as f64 / (n - 1) as f64).exp() }).collect()
}

fn emit(dir: &Path, name: &str, format: Format, header: &[&str], rows: &[Vec<f64>]) -> Outcome<String> {
    match format {
        Format::Csv => {
            let file = format!("{name}.csv");
            write_csv(Some(&dir.join(&file)), header, rows)?;
            Ok(file)
        }
        Format::Json => {
            let file = format!("{name}.json");
            write_json(json!({ "columns": header, "rows": rows }), Some(&dir.join(&file)))?;
            Ok(file)
        }
    }
}

pub fn run(args: &CurvesArgs) -> Outcome<()> {
    let c = &args.common;
    check_common(c)?;
    if !(args.alpha_min > 0.0 && args.alpha_min < args.alpha_max && args.alpha_max <= FRAC_PI_4) {
        return Err(Failure::validation(format!(
            "need 0 < --alpha-min < --alpha-max ≤ π/4, got [{}, {}]",
            args.alpha_min, args.alpha_max
        )));
    }
    if args.points < 2 || args.bound_points < 1 {
        return Err(Failure::validation("--points must be at least 2 and --bound-points at least 1"));
    }
    let dir: PathBuf = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
    let format = c.format.unwrap_or(Format::Csv);
    let opt = optimizer(c)?;
    let alphas = log_spaced(args.alpha_min, args.alpha_max, args.points);

    let fig1 = alphas
        .par_iter()
        .map(|&a| Ok(vec![a, opt.optimize_schedule(a)?.expected_ebits, cdkl_cost(a)?]))
        .collect::<Result<Vec<_>, stator::Error>>()?;
    let a0 = PI / 2f64.powi(20);
    let fig2 = (0..args.bound_points)
        .into_par_iter()
        .map(|i| {
            let a = a0 * (1.0 + i as f64 / args.bound_points as f64);
            Ok(vec![a, opt.asymptotic_bound(a, 1e-14)? - BOUND_REFERENCE])
        })
        .collect::<Result<Vec<_>, stator::Error>>()?;
    let comm = alphas
        .par_iter()
        .map(|&a| optimize_leader_comm(a, c.delta, c.epsilon))
        .collect::<Result<Vec<_>, stator::Error>>()?;
    let fig3: Vec<Vec<f64>> =
        comm.iter().zip(&fig1).map(|(lo, row)| vec![row[0], lo.comm.leader_bits_rate, lo.ebits, row[1]]).collect();
    let fig4: Vec<Vec<f64>> = fig3.iter().map(|r| vec![r[0], r[1] / r[0]]).collect();

    let files = vec![
        emit(&dir, "fig1", format, &["alpha", "optimized", "cdkl"], &fig1)?,
        emit(&dir, "fig2", format, &["A", "bound_minus_5.6418"], &fig2)?,
        emit(&dir, "fig3", format, &["alpha", "leader_bits", "comm_opt_ebits", "ent_opt_ebits"], &fig3)?,
        emit(&dir, "fig4", format, &["alpha", "leader_bits_over_alpha"], &fig4)?,
    ];
    let violations: Vec<f64> = fig1.iter().filter(|r| r[1] > r[2] + 1e-12).map(|r| r[0]).collect();
    let bound_max = fig2.iter().map(|r| r[1]).fold(f64::NEG_INFINITY, f64::max);
    let xs: Vec<f64> = fig4.iter().map(|r| (1.0 / r[0]).log2()).collect();
    let ys: Vec<f64> = fig4.iter().map(|r| r[1]).collect();
    let fit = linear_fit(&xs, &ys);
    let summary = json!({
        "schema": "stator/v1/curves",
        "config": config_block("curves", args),
        "files": files,
        "bound_max_minus_reference": bound_max,
        "dominance_violations": violations,
        "leader_ratio_fit": fit,
    });
    write_json(summary, Some(&dir.join("summary.json")))?;
    if !violations.is_empty() {
        return Err(Failure::invariant(format!(
            "optimized cost exceeds the dyadic baseline at {} angles",
            violations.len()
        )));
    }
    Ok(())
}
