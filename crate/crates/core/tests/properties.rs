use nuds_core::dynamics::{
    closed_form_resolvent_state, closed_form_state, data_matrix, simulate, sup_row_norm, SystemSpec,
};
use nuds_core::frames::{analysis, canonical_dual, frame_bounds, min_norm_gap, synthesis, verify_dual_pair};
use nuds_core::lambda::window;
use nuds_core::numerics::{real, CMat};
use nuds_core::random;
use nuds_core::recovery::{
    counterexample_nullifier, coupling_matrix, reconstruct_finite, reconstruct_finite_coupled,
};
use nuds_core::{c64, LambdaIndex, SpectralParams, Tolerances};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_spec(seed: u64, dim: usize, k: usize, norm: f64) -> SystemSpec {
    let mut r = rng(seed);
    let a = random::matrix_with_norm(&mut r, dim, norm);
    let g = random::frame(&mut r, dim, dim + 2, 0.1);
    SystemSpec::new(
        SpectralParams::default(),
        a,
        g,
        CMat::identity(dim, dim),
        random::vector(&mut r, dim),
        random::vector(&mut r, dim),
        random::vector(&mut r, dim),
        k,
        &Tolerances::default(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn frame_inequality_holds(seed in any::<u64>(), dim in 1usize..6, count in 1usize..9) {
        let mut r = rng(seed);
        let f = random::family(&mut r, dim, count);
        let b = frame_bounds(&f, &Tolerances::default()).unwrap();
        let x = random::vector(&mut r, dim);
        let energy = analysis(&x, &f).unwrap().norm_squared();
        let nx = x.norm_squared();
        let slack = 1e-10 * nx * b.beta.max(1.0);
        prop_assert!(b.alpha <= b.beta + 1e-12);
        prop_assert!(b.alpha * nx <= energy + slack);
        prop_assert!(energy <= b.beta * nx + slack);
    }

    #[test]
    fn canonical_dual_reconstructs(seed in any::<u64>(), dim in 1usize..6, extra in 0usize..4) {
        let mut r = rng(seed);
        let f = random::frame(&mut r, dim, dim + extra, 0.05);
        let d = canonical_dual(&f, &Tolerances::default()).unwrap();
        prop_assert!(verify_dual_pair(&f, &d, 3, seed).unwrap() <= 1e-8);
        let x = random::vector(&mut r, dim);
        let back = synthesis(&analysis(&x, d.family()).unwrap(), &f).unwrap();
        prop_assert!((back - &x).norm() <= 1e-8 * (1.0 + x.norm()));
    }

    #[test]
    fn min_norm_gap_is_nonnegative(seed in any::<u64>(), dim in 1usize..5, extra in 1usize..4) {
        let mut r = rng(seed);
        let f = random::frame(&mut r, dim, dim + extra, 0.05);
        let x = random::vector(&mut r, dim);
        let canonical = analysis(&x, canonical_dual(&f, &Tolerances::default()).unwrap().family()).unwrap();
        // shift by a kernel element of the synthesis map
        let s = f.synthesis_matrix();
        let v = random::vector(&mut r, dim + extra);
        let kernel = &v - s.adjoint() * (&s * s.adjoint()).lu().solve(&(&s * &v)).unwrap();
        let gap = min_norm_gap(&x, &f, &(&canonical + &kernel), &Tolerances::default()).unwrap();
        prop_assert!(gap >= -1e-10);
        prop_assert!((gap - kernel.norm_squared()).abs() <= 1e-8 * (1.0 + kernel.norm_squared()));
    }

    #[test]
    fn simulation_matches_closed_forms(seed in any::<u64>(), dim in 1usize..5, k in 1usize..7, norm in 0.0f64..1.0) {
        let spec = random_spec(seed, dim, k, norm);
        for (idx, x) in simulate(&spec).iter() {
            let cf = closed_form_state(&spec, *idx);
            let rf = closed_form_resolvent_state(&spec, *idx, &Tolerances::default()).unwrap();
            prop_assert!((x - &cf).norm() <= 1e-9);
            prop_assert!((x - &rf).norm() <= 1e-9);
        }
    }

    #[test]
    fn finite_recovery_round_trip(seed in any::<u64>(), dim in 1usize..6, k in 2usize..4, norm in 0.0f64..2.0) {
        let tol = Tolerances::default();
        let spec = random_spec(seed, dim, k, norm);
        let d = data_matrix(&simulate(&spec), &spec.g).unwrap();
        let dual = canonical_dual(&spec.g, &tol).unwrap();
        let coupling = coupling_matrix(&spec.a, &spec.g, &dual, &tol).unwrap();
        for at in window(k - 1).unwrap() {
            let rec = reconstruct_finite(&d, at, &spec.a, &spec.g, &dual, &tol).unwrap();
            let coupled = reconstruct_finite_coupled(&d, at, &coupling, &dual).unwrap();
            let scale = 1.0 + spec.w.norm();
            prop_assert!((&rec.w_hat - &spec.w).norm() <= 1e-8 * scale);
            prop_assert!((&coupled - &rec.w_hat).norm() <= 1e-8 * scale);
        }
    }

    #[test]
    fn sup_row_norm_bounds_data(seed in any::<u64>(), dim in 1usize..5, k in 1usize..4) {
        let spec = random_spec(seed, dim, k, 1.0);
        let d = data_matrix(&simulate(&spec), &spec.g).unwrap();
        let sup = sup_row_norm(&d);
        let mut r = rng(seed ^ 1);
        let c = random::unit_vector(&mut r, d.width());
        let dc = d.apply(&c).unwrap();
        prop_assert!(dc.iter().all(|z| z.norm() <= sup + 1e-10));
    }

    #[test]
    fn nullifier_silences_measurements(k in 1usize..3, lo in 0.1f64..0.3, spread in 0.2f64..0.6, seed in any::<u64>()) {
        let dim = 4 * k;
        let diag: Vec<c64> = (0..dim).map(|i| real(lo + spread * (i as f64 + 1.0) / (dim as f64 + 1.0))).collect();
        let a = CMat::from_diagonal(&nuds_core::CVec::from_vec(diag));
        let mut r = rng(seed);
        let w = random::vector(&mut r, dim).map(|z| if z.norm() < 0.1 { z + real(1.0) } else { z });
        let tol = Tolerances::default();
        let nul = counterexample_nullifier(&a, &w, k, &tol).unwrap();
        let spec = SystemSpec::new(
            SpectralParams::default(),
            a,
            nuds_core::frames::VectorFamily::new(vec![nul.g.clone()]).unwrap(),
            CMat::identity(dim, dim),
            w,
            nul.x0.clone(),
            nul.xm2.clone(),
            k,
            &tol,
        )
        .unwrap();
        let scale = nul.x0.norm() + nul.xm2.norm() + 1.0;
        for idx in window(k).unwrap() {
            let x = closed_form_state(&spec, idx);
            prop_assert!(nul.g.dotc(&x).norm() <= 1e-8 * scale);
        }
        prop_assert!(nul.measurements.iter().all(|(idx, _)| window(k).unwrap().contains(idx)));
    }

    #[test]
    fn labels_round_trip(m in -1000i64..1000, offset in any::<bool>()) {
        let idx = LambdaIndex::new(m, offset);
        prop_assert_eq!(LambdaIndex::parse_label(&idx.label()), Some(idx));
    }
}
