//! Angle conventions for collective-Z rotations.
//!
//! `U(α + π) = −U(α)`, so rotation angles live in the fundamental domain
//! `(−π/2, π/2]`. Conjugating by σx on a single party maps `U(α)` to `U(−α)`,
//! and `U(π/2)` is a product of local σz operations, so the entanglement cost of
//! `U(α)` only depends on [`reduce`]`(α) ∈ [0, π/4]`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Angles closer than this to 0 or π/2 (after folding) are treated as local.
pub const LOCAL_TOL: f64 = 1e-13;

/// Folds an angle into `(−π/2, π/2]`.
pub fn fold(alpha: f64) -> f64 {
    let mut a =
        if alpha > -FRAC_PI_2 && alpha <= FRAC_PI_2 { alpha } else { (alpha + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2 };
    if a <= -FRAC_PI_2 + LOCAL_TOL {
        a += PI;
    }
    if (a - FRAC_PI_2).abs() < LOCAL_TOL {
        a = FRAC_PI_2;
    }
    a
}

/// Maps an angle to the cost-equivalent representative in `[0, π/4]`.
pub fn reduce(alpha: f64) -> f64 {
    let a = fold(alpha).abs();
    if a > FRAC_PI_4 {
        FRAC_PI_2 - a
    } else {
        a
    }
}

/// True when `U(alpha)` can be applied with local operations only.
pub fn is_local(alpha: f64) -> bool {
    reduce(alpha) < LOCAL_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_domain() {
        assert_eq!(fold(0.3), 0.3);
        assert!((fold(0.3 + PI) - 0.3).abs() < 1e-15);
        assert!((fold(-FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!((fold(FRAC_PI_2 + 0.1) - (0.1 - FRAC_PI_2)).abs() < 1e-15);
        assert!((fold(-1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn reduce_symmetries() {
        for &a in &[0.01, 0.2, 0.7, 1.2, -0.4, 2.5] {
            let r = reduce(a);
            assert!((0.0..=FRAC_PI_4).contains(&r));
            assert!((reduce(-a) - r).abs() < 1e-14);
            assert!((reduce(FRAC_PI_2 - a) - r).abs() < 1e-14);
        }
        assert!(is_local(FRAC_PI_2));
        assert!(is_local(0.0));
        assert!(is_local(-FRAC_PI_2 + 1e-15));
        assert!(!is_local(1e-9));
    }
}
