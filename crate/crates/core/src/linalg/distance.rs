use super::{OperatorMatrix, C64};

fn max_dev(a: &OperatorMatrix, b: &OperatorMatrix, phi: f64) -> f64 {
    let ph = C64::from_polar(1.0, phi);
    a.entries().iter().zip(b.entries().iter()).map(|(x, y)| (x - ph * y).norm()).fold(0.0, f64::max)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `min_φ max_ij |A_ij − e^{iφ} B_ij|`: zero exactly when `A` and `B` agree up
/// to a global phase. Returns `f64::INFINITY` for mismatched dimensions.
pub fn op_distance_phase_invariant(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    if a.dims() != b.dims() {
        return f64::INFINITY;
    }
    let overlap: C64 = b.entries().iter().zip(a.entries().iter()).map(|(y, x)| y.conj() * x).sum();
    let phi0 = if overlap.norm() > 0.0 { overlap.arg() } else { 0.0 };
    let d0 = max_dev(a, b, phi0);
    if d0 == 0.0 {
        return 0.0;
    }
    let f = |phi: f64| max_dev(a, b, phi);
    if d0 < 1e-3 {
        // the least-squares phase is already within O(d0) of the optimum
        let (_, d) = golden_min(f, phi0 - 1e-2, phi0 + 1e-2, 1e-15);
        return d.min(d0);
    }
    let steps = 720;
    let h = std::f64::consts::TAU / steps as f64;
    let (mut best_phi, mut best) = (phi0, d0);
    for k in 0..steps {
        let phi = k as f64 * h;
        let v = f(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    let (_, d) = golden_min(f, best_phi - h, best_phi + h, 1e-13);
    d.min(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, expm_oracle, pauli, tensor};

    #[test]
    fn equal_up_to_phase() {
        let h = tensor(&[pauli::x(), pauli::z()]).unwrap();
        let u = expm_oracle(&h, 0.37).unwrap();
        assert_eq!(op_distance_phase_invariant(&u, &u), 0.0);
        assert!(op_distance_phase_invariant(&u, &u.scale(c(-1.0, 0.0))) < 1e-15);
        assert!(op_distance_phase_invariant(&u, &u.scale(C64::from_polar(1.0, 2.1))) < 1e-15);
    }

    #[test]
    fn z_versus_x() {
        // brute-force oracle: max(|1 − 0|, |0 − e^{iφ}|, …) ≥ 1 for every φ
        let z = pauli::z();
        let x = pauli::x();
        let mut grid_min = f64::INFINITY;
        for k in 0..100_000 {
            let phi = std::f64::consts::TAU * k as f64 / 100_000.0;
            grid_min = grid_min.min(max_dev(&z, &x, phi));
        }
        let d = op_distance_phase_invariant(&z, &x);
        assert!(d >= 1.0 - 1e-12);
        assert!((d - grid_min).abs() < 1e-6);
    }

    #[test]
    fn mismatched_dims_are_infinitely_far() {
        let a = pauli::z();
        let b = tensor(&[pauli::z(), pauli::z()]).unwrap();
        assert_eq!(op_distance_phase_invariant(&a, &b), f64::INFINITY);
    }
}
