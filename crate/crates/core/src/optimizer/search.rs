//! One-dimensional minimization: coarse grid scan followed by golden section.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` on `[lo, hi]` down to bracket width `tol`.
pub(crate) fn golden(mut lo: f64, mut hi: f64, tol: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Local minima of the grid kept for refinement.
const BASINS: usize = 8;

/// Scans `points` equally spaced samples of `[lo, hi]`, then refines the
/// lowest few grid-local minima. Returns `(argmin, min)`.
pub(crate) fn grid_then_golden(
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
    f: &mut impl FnMut(f64) -> f64,
) -> (f64, f64) {
    let step = (hi - lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| lo + step * i as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut minima: Vec<usize> =
        (0..points).filter(|&i| (i == 0 || vs[i] <= vs[i - 1]) && (i + 1 == points || vs[i] <= vs[i + 1])).collect();
    minima.sort_by(|&a, &b| vs[a].total_cmp(&vs[b]));
    minima.truncate(BASINS);
    let mut best = (xs[minima[0]], vs[minima[0]]);
    for &i in &minima {
        let a = xs[i.saturating_sub(1)];
        let b = xs[(i + 1).min(points - 1)];
        let (x, v) = golden(a, b, tol, f);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let (x, v) = golden(-3.0, 5.0, 1e-10, &mut |x: f64| (x - 1.25).powi(2) + 2.0);
        assert!((x - 1.25).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_picks_the_global_basin() {
        let mut f = |x: f64| (3.0 * x).cos() + 0.1 * x;
        let (x, _) = grid_then_golden(0.0, 6.0, 200, 1e-10, &mut f);
        // minima at 3x = (2k+1)π − asin(1/30); the first one is lowest
        assert!((x - (std::f64::consts::PI - (1.0f64 / 30.0).asin()) / 3.0).abs() < 1e-8, "{x}");
    }
}
