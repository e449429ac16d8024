use super::*;
use crate::linalg::{expm_oracle, pauli, tensor, OperatorMatrix, C64};
use crate::optimizer::{CostOptimizer, OptimizerConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(d: usize, rng: &mut impl Rng) -> OperatorMatrix {
    let m = DMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    OperatorMatrix::new(vec![d], h).unwrap()
}

fn check(spec: &HamiltonianSpec, tol: f64) -> CompiledSchedule {
    let sched = if spec.terms.len() == 1 { compile(spec) } else { compile_sum(spec) }.unwrap();
    let v = verify(&sched, spec).unwrap();
    assert!(v.distance < tol, "distance {}", v.distance);
    assert!(v.leakage < 1e-10, "leakage {}", v.leakage);
    assert!(v.unitarity_deviation < 1e-10);
    sched
}

#[test]
fn zz_is_a_single_rotation() {
    let spec = HamiltonianSpec::product(vec![pauli::z(), pauli::z()], 0.7).unwrap();
    let s = check(&spec, 1e-12);
    let angles: Vec<f64> = s.rotations().collect();
    assert_eq!(angles.len(), 1);
    assert!((angles[0] - 0.7).abs() < 1e-15);
}

#[test]
fn xx_is_conjugated_by_hadamards() {
    let spec = HamiltonianSpec::product(vec![pauli::x(), pauli::x()], 0.5).unwrap();
    let s = check(&spec, 1e-10);
    assert_eq!(s.local_layers(), 2);
    if let Primitive::LocalLayer { ops } = &s.primitives[4] {
        // Hadamard on the level, then the carrier swap of the −1 level
        let h = pauli::hadamard();
        let lifted =
            DMatrix::from_fn(
                4,
                4,
                |r, c| if r % 2 == c % 2 { h.entries()[(r / 2, c / 2)] } else { C64::new(0.0, 0.0) },
            );
        let mut swap = DMatrix::<C64>::identity(4, 4);
        swap.swap_rows(2, 3);
        assert!((ops[0].entries() - swap * lifted).norm() < 1e-12);
    } else {
        panic!("expected a layer after the embeds");
    }
}

#[test]
fn partial_diagonal_matches_oracle() {
    let spec =
        HamiltonianSpec::product(vec![pauli::z(), OperatorMatrix::from_real_diagonal(&[1.0, 0.0])], 1.0).unwrap();
    let s = check(&spec, 1e-10);
    assert!(s.local_layers() > 2);
}

#[test]
fn factor_step_events() {
    let form = diagonalize(&TensorTerm { factors: vec![OperatorMatrix::from_real_diagonal(&[1.0, 0.0]), pauli::z()] })
        .unwrap();
    let prims = compile_factor_step(0, &form, 0.3).unwrap();
    let angles: Vec<f64> = prims
        .iter()
        .filter_map(|p| if let Primitive::ZZRotation { angle } = p { Some(*angle) } else { None })
        .collect();
    assert_eq!(angles.len(), 2);
    assert!((angles[0] - 0.15).abs() < 1e-15 && (angles[1] - 0.15).abs() < 1e-15);
    let sched = CompiledSchedule { dims: vec![2, 2], primitives: prims };
    let u = evaluate(&sched).unwrap();
    // party 2's carrier stays |0⟩: exp(i·0.3·diag(1,0)⊗I) on the embedded subspace
    let target =
        expm_oracle(&tensor(&[OperatorMatrix::from_real_diagonal(&[1.0, 0.0]), pauli::i()]).unwrap(), 0.3).unwrap();
    for (r, &wr) in [0usize, 2, 8, 10].iter().enumerate() {
        assert!((u.entries()[(wr, wr)] - target.entries()[(r, r)]).norm() < 1e-12);
    }
    let self_inverse = diagonalize(&TensorTerm { factors: vec![pauli::z(), pauli::z()] }).unwrap();
    let prims = compile_factor_step(1, &self_inverse, 0.3).unwrap();
    assert_eq!(prims.iter().filter(|p| matches!(p, Primitive::ZZRotation { .. })).count(), 1);
    assert!(compile_factor_step(0, &form, 0.0).unwrap().is_empty());
}

#[test]
fn random_products_exact_for_any_slicing() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in 0..8 {
        let n = 2 + case % 2;
        let factors: Vec<OperatorMatrix> = (0..n).map(|_| random_hermitian(rng.gen_range(2..=3), &mut rng)).collect();
        for m in [1, 3] {
            let mut spec = HamiltonianSpec::product(factors.clone(), rng.gen_range(0.1..1.5)).unwrap();
            spec.slices = m;
            check(&spec, 1e-8);
        }
    }
}

#[test]
fn self_inverse_inputs_have_no_interior_layers() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for m in [1, 5] {
        // unitary conjugates of ±1 spectra
        let factors: Vec<OperatorMatrix> = (0..3)
            .map(|_| {
                let q = expm_oracle(&random_hermitian(3, &mut rng), 1.0).unwrap();
                let d = OperatorMatrix::from_real_diagonal(&[1.0, -1.0, -1.0]);
                q.compose(&d).unwrap().compose(&q.adjoint()).unwrap()
            })
            .collect();
        let mut spec = HamiltonianSpec::product(factors, 0.9).unwrap();
        spec.slices = m;
        let s = check(&spec, 1e-8);
        assert_eq!(s.local_layers(), 2);
        assert_eq!(s.rotations().count(), 1);
    }
}

#[test]
fn commuting_sum_exact_at_one_slice() {
    let i = pauli::i;
    let z = pauli::z;
    let spec = HamiltonianSpec::sum(
        vec![TensorTerm { factors: vec![z(), z(), i()] }, TensorTerm { factors: vec![i(), z(), z()] }],
        0.8,
        1,
    )
    .unwrap();
    check(&spec, 1e-9);
}

#[test]
fn trotter_error_is_first_order() {
    let spec_for = |m: usize| {
        HamiltonianSpec::sum(
            vec![
                TensorTerm { factors: vec![pauli::x(), pauli::x()] },
                TensorTerm { factors: vec![pauli::z(), pauli::i()] },
            ],
            0.4,
            m,
        )
        .unwrap()
    };
    let err = |m: usize| {
        let spec = spec_for(m);
        verify(&compile_sum(&spec).unwrap(), &spec).unwrap().distance
    };
    let (e8, e64) = (err(8), err(64));
    let ratio = e64 / e8;
    assert!(ratio > 1.0 / 8.0 / 1.5 && ratio < 1.0 / 8.0 * 1.5, "{ratio}");
}

#[test]
fn costs() {
    let spec = HamiltonianSpec::sum(
        vec![
            TensorTerm { factors: vec![pauli::x(), pauli::x()] },
            TensorTerm { factors: vec![pauli::z(), pauli::z()] },
        ],
        0.4,
        16,
    )
    .unwrap();
    let s = compile_sum(&spec).unwrap();
    let linear = cost_estimate(&s, CostMode::Linear).unwrap();
    assert!((linear - 5.6418 * 0.4 * 2.0).abs() < 1e-12);
    let single =
        HamiltonianSpec::product(vec![OperatorMatrix::from_real_diagonal(&[2.0, 0.5]), pauli::x()], 0.3).unwrap();
    for m in [1, 7] {
        let mut sp = single.clone();
        sp.slices = m;
        let s = compile(&sp).unwrap();
        assert!((s.total_angle() - 0.3 * 2.0).abs() < 1e-12);
    }
    let zero = HamiltonianSpec::product(vec![pauli::z(), pauli::z()], 0.0).unwrap();
    assert_eq!(cost_estimate(&compile(&zero).unwrap(), CostMode::Linear).unwrap(), 0.0);
    // many small rotations: exact and linear agree within 1%
    let mut tiny = HamiltonianSpec::product(vec![pauli::z(), pauli::z()], 1e-4).unwrap();
    tiny.slices = 1;
    let s = compile(&tiny).unwrap();
    let opt = CostOptimizer::new(OptimizerConfig::fast()).unwrap();
    let exact = cost_estimate_with(&s, &opt).unwrap();
    let lin = cost_estimate(&s, CostMode::Linear).unwrap();
    assert!((exact - lin).abs() / lin < 0.01, "{exact} vs {lin}");
}

#[test]
fn minus_convention_flips_time() {
    let f = vec![pauli::x(), OperatorMatrix::from_real_diagonal(&[1.0, 0.25])];
    let spec = HamiltonianSpec::product(f, 0.6).unwrap().with_convention(Convention::Minus);
    check(&spec, 1e-9);
    let s = compile(&spec).unwrap();
    assert!(s.rotations().all(|a| a < 0.0));
}

#[test]
fn compile_rejects_sums() {
    let spec = HamiltonianSpec::sum(
        vec![TensorTerm { factors: vec![pauli::z()] }, TensorTerm { factors: vec![pauli::x()] }],
        0.1,
        1,
    )
    .unwrap();
    assert!(compile(&spec).is_err());
}
