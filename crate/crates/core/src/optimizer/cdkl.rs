//! The doubling baseline: `β_l = α_l`, success probability 1/2 per stage.

use crate::linalg::resource_entanglement;
use crate::{Error, Result};
use std::f64::consts::PI;

/// Cost of `U(π/2^n)`: `Σ_{l=1}^{n−1} 2^{1−l} E(2^{l−1}π/2^n)`.
pub fn cdkl_power_cost(n: u32) -> f64 {
    let target = PI / 2f64.powi(n as i32);
    (1..n)
        .map(|l| {
            let w = 2f64.powi(1 - l as i32);
            w * resource_entanglement(target * 2f64.powi(l as i32 - 1))
        })
        .sum()
}

/// Expands `alpha = Σ a_n π/2^n` greedily and adds the cost of every term.
/// The expansion stops once the remainder is below `1e-12·alpha`.
pub fn cdkl_cost(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::AngleOutOfDomain { angle: alpha, domain: "(0, π)" });
    }
    let mut rest = alpha;
    let mut cost = 0.0;
    let mut n = 1u32;
    while rest >= 1e-12 * alpha && n < 1000 {
        let piece = PI / 2f64.powi(n as i32);
        if rest >= piece {
            rest -= piece;
            cost += cdkl_power_cost(n);
        }
        n += 1;
    }
    Ok(cost)
}
