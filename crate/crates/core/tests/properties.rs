use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use stator::angle::{fold, reduce};
use stator::comm::typical_set;
use stator::general::{canonical_two_qubit, design_resource, leader_basis, run_general_protocol, DesignPolicy};
use stator::hamiltonian::{compile, verify, HamiltonianSpec};
use stator::linalg::{expm_oracle, op_distance_phase_invariant, pauli, DMatrix, OperatorMatrix, StateVector};
use stator::optimizer::{cdkl_cost, CostOptimizer, OptimizerConfig};
use stator::protocol::{
    enumerate_leaves, failure_residual, gamma_for, run_stage, success_probability, ForcedOutcomes, StageParams,
    StageSchedule,
};
use stator::C64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::sync::OnceLock;

fn fast() -> &'static CostOptimizer {
    static OPT: OnceLock<CostOptimizer> = OnceLock::new();
    OPT.get_or_init(|| CostOptimizer::new(OptimizerConfig::fast()).unwrap())
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn fold_and_reduce_ranges(a in -20.0f64..20.0) {
        let f = fold(a);
        prop_assert!(f > -FRAC_PI_2 && f <= FRAC_PI_2 + 1e-15);
        prop_assert!((fold(f) - f).abs() < 1e-15);
        let r = reduce(a);
        prop_assert!((0.0..=FRAC_PI_4 + 1e-15).contains(&r));
        // U(a) and U(a + π) agree up to a global phase
        prop_assert!((reduce(a + PI) - r).abs() < 1e-12);
    }

    #[test]
    fn stage_angles_compose(alpha in 0.01f64..1.5, beta in 0.05f64..1.5) {
        let p = StageParams::new(1, alpha, beta).unwrap();
        prop_assert!((p.beta.tan() * p.gamma.tan() - fold(alpha).tan()).abs() < 1e-9 * (1.0 + alpha.tan()));
        let res = failure_residual(&p);
        prop_assert!((fold(res.alpha_prime + res.alpha_next - p.alpha)).abs() < 1e-12);
        let ps = success_probability(p.beta, p.gamma);
        prop_assert!((0.0..=1.0).contains(&ps));
    }
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn stage_branches_are_target_or_residual(alpha in 0.02f64..1.5, beta in 0.05f64..1.5, seed in any::<u64>()) {
        let p = StageParams::new(1, alpha, beta).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let psi = StateVector::random(&[2, 2, 2], &mut rng).unwrap();
        let z3 = pauli::z_string(3);
        let mut total = 0.0;
        for pattern in 0..4usize {
            for leader in 0..2usize {
                let choices = vec![pattern & 1, pattern >> 1, leader];
                let Ok(o) = run_stage(&psi, &p, &mut ForcedOutcomes::new(choices)) else { continue };
                total += o.probability;
                let want = if leader == 0 || o.record.local_correction {
                    p.alpha
                } else {
                    failure_residual(&p).alpha_prime
                };
                let u = expm_oracle(&z3, want).unwrap();
                prop_assert!(op_distance_phase_invariant(&o.operator, &u) < 1e-10);
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
        let g = gamma_for(p.alpha, p.beta).unwrap();
        prop_assert!((g - p.gamma).abs() < 1e-15);
    }

    #[test]
    fn cdkl_leaves_sum_to_one(alpha in 0.01f64..1.5, n in 2usize..4) {
        let s = StageSchedule::cdkl(alpha, 5).unwrap();
        let leaves = enumerate_leaves(alpha, &s, n).unwrap();
        let total: f64 = leaves.iter().map(|l| l.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let u = expm_oracle(&pauli::z_string(n), alpha).unwrap();
        for l in &leaves {
            prop_assert!(op_distance_phase_invariant(&l.net_operator, &u) < 1e-10);
        }
    }

    #[test]
    fn optimized_is_below_cdkl_and_one(alpha in 1e-6f64..FRAC_PI_4) {
        let e = fast().optimize_schedule(alpha).unwrap().expected_ebits;
        prop_assert!(e <= 1.0 + 1e-12);
        prop_assert!(e <= cdkl_cost(alpha).unwrap() + 1e-9);
        prop_assert!(e >= 0.0);
    }

    #[test]
    fn typical_set_respects_bound(m in 1usize..16, p in 0.01f64..0.99, delta in 0.0f64..0.3) {
        let r = typical_set(m, p, delta).unwrap();
        prop_assert!((r.set_size as f64).log2() <= r.log2_bound() + 1e-9 || r.set_size == 0);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.mass));
    }

    #[test]
    fn general_success_is_target(x in -0.78f64..0.78, y in -0.78f64..0.78, z in -0.78f64..0.78, s in 0usize..4) {
        let d = canonical_two_qubit([x, y, z]).unwrap();
        let design = design_resource(&d, &DesignPolicy::Sqrt).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(s as u64);
        let psi = StateVector::random(&[2, 2], &mut rng).unwrap();
        if let Ok(o) = run_general_protocol(&d, &design, &psi, &mut ForcedOutcomes::new(vec![s, 0])) {
            prop_assert!(op_distance_phase_invariant(&o.rescaled(), &d.unitary().unwrap()) < 1e-9);
        }
        let basis = leader_basis(&design.nu);
        prop_assert_eq!(basis.len(), 4);
    }

    #[test]
    fn compiled_products_match_oracle(
        entries in proptest::collection::vec(-1.0f64..1.0, 16),
        t in 0.05f64..1.5,
        m in 1usize..4,
    ) {
        let herm = |e: &[f64]| {
            let a = DMatrix::from_fn(2, 2, |r, c| C64::new(e[2 * r + c], e[4 + 2 * r + c]));
            OperatorMatrix::new(vec![2], (&a + a.adjoint()) * C64::new(0.5, 0.0)).unwrap()
        };
        let mut spec = HamiltonianSpec::product(vec![herm(&entries[..8]), herm(&entries[8..])], t).unwrap();
        spec.slices = m;
        let v = verify(&compile(&spec).unwrap(), &spec).unwrap();
        prop_assert!(v.distance < 1e-8);
        prop_assert!(v.leakage < 1e-10);
    }
}
