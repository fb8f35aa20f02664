use nmcm_core::benchmark::{adc_map, ExcitationPreservingQubitMap};
use nmcm_core::chain::{reduced_recursion, simulate_full_chain, CollisionChainConfig};
use nmcm_core::channel::Superoperator;
use nmcm_core::kernel::trace_weight_sum;
use nmcm_core::linalg::{max_abs_diff, tensor, trace};
use nmcm_core::random;
use nmcm_core::state::{partial_trace_matrix, trace_distance_matrix};
use nmcm_core::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn disc() -> impl Strategy<Value = C64> {
    (0.0..=1.0f64, 0.0..std::f64::consts::TAU).prop_map(|(r, phi)| C64::from_polar(r, phi))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn representations_round_trip(seed in any::<u64>(), dim_a in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random::haar_unitary(2 * dim_a, &mut rng);
        let anc = random::pure_state(dim_a, &mut rng);
        let s = Superoperator::stinespring(u.matrix(), 2, &anc);
        let via_kraus = s.to_kraus().unwrap().to_superoperator();
        let via_choi = s.choi().to_superoperator();
        prop_assert!(via_kraus.max_abs_diff(&s) < 1e-12);
        prop_assert!(via_choi.max_abs_diff(&s) < 1e-14);
        let r = s.cpt_check(1e-10);
        prop_assert!(r.is_cpt);
    }

    #[test]
    fn channels_contract_trace_distance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random::haar_unitary(4, &mut rng);
        let s = Superoperator::stinespring(u.matrix(), 2, &random::pure_state(2, &mut rng));
        let a = random::density_matrix(2, &mut rng);
        let b = random::density_matrix(2, &mut rng);
        let before = trace_distance_matrix(a.matrix(), b.matrix()).unwrap();
        let after = trace_distance_matrix(&s.apply(a.matrix()), &s.apply(b.matrix())).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&before));
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn adc_composition_multiplies_amplitudes(a in disc(), b in disc()) {
        let composed = adc_map(a).unwrap().compose(&adc_map(b).unwrap());
        prop_assert!(composed.max_abs_diff(&adc_map(a * b).unwrap()) < 1e-14);
        let fam = ExcitationPreservingQubitMap::from_superoperator(&composed, 1e-14).unwrap();
        prop_assert!((fam.c - a * b).norm() < 1e-14);
        prop_assert!(fam.cp_margin() >= -1e-14);
    }

    #[test]
    fn excitation_preserving_family_is_closed(q1 in 0.0..=1.0f64, q2 in 0.0..=1.0f64, u1 in disc(), u2 in disc()) {
        // scale amplitudes into the CP region |c|² ≤ q
        let m1 = ExcitationPreservingQubitMap::new(q1, u1 * q1.sqrt()).unwrap();
        let m2 = ExcitationPreservingQubitMap::new(q2, u2 * q2.sqrt()).unwrap();
        let direct = m1.to_superoperator().compose(&m2.to_superoperator());
        prop_assert!(direct.max_abs_diff(&m1.compose(&m2).to_superoperator()) < 1e-14);
        prop_assert!(m1.to_superoperator().cpt_check(1e-12).is_cpt);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random::density_matrix(2, &mut rng);
        let b = random::density_matrix(3, &mut rng);
        let ab = tensor(a.matrix(), b.matrix());
        prop_assert!(max_abs_diff(&partial_trace_matrix(&ab, &[2, 3], &[0]).unwrap(), a.matrix()) < 1e-14);
        prop_assert!(max_abs_diff(&partial_trace_matrix(&ab, &[2, 3], &[1]).unwrap(), b.matrix()) < 1e-14);
    }

    #[test]
    fn reduced_recursion_matches_brute_force(seed in any::<u64>(), n in 1usize..6, p in 0.0..=1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = CollisionChainConfig::new(
            n,
            p,
            0.4,
            random::haar_unitary(4, &mut rng),
            random::density_matrix(2, &mut rng),
            random::pure_state(2, &mut rng),
        )
        .unwrap();
        let full = simulate_full_chain(&cfg).unwrap();
        let reduced = reduced_recursion(&cfg).unwrap();
        for (f, r) in full.iter().zip(&reduced) {
            let marginal = f.system_marginal(&cfg).unwrap();
            prop_assert!(trace_distance_matrix(marginal.matrix(), r.matrix()).unwrap() < 1e-10);
            prop_assert!((trace(r.matrix()).re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_weights_increase_to_one(gamma in 0.0..5.0f64, t in 0.0..10.0f64) {
        let mut prev = 0.0;
        for k in 1..150 {
            let w = trace_weight_sum(gamma, t, k);
            prop_assert!(w >= prev - 1e-15 && w <= 1.0 + 1e-12);
            prev = w;
        }
        prop_assert!((prev - 1.0).abs() < 1e-10);
    }
}
