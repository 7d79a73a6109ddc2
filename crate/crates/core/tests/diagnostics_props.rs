use fracwalk::diagnostics::{
    cf_convergence, ks_from_positions, rho_integral, ScalingChoice, WalkModel,
};
use fracwalk::kernels::{CoeffName, ModelTag};
use fracwalk::StableParams;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ks_permutation_invariant(mut xs in prop::collection::vec(-20.0f64..20.0, 1..60), alpha in 0.5f64..=2.0, seed in any::<u64>()) {
        let p = StableParams::new(alpha, 1.0).unwrap();
        let a = ks_from_positions(&xs, &p).unwrap().d;
        // deterministic shuffle
        let n = xs.len();
        let mut state = seed | 1;
        for i in (1..n).rev() {
            state ^= state << 13; state ^= state >> 7; state ^= state << 17;
            xs.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let b = ks_from_positions(&xs, &p).unwrap().d;
        prop_assert_eq!(a, b);
        prop_assert!(a > 0.0 && a <= 1.0);
    }

    #[test]
    fn kappa_zero_error_is_zero(alpha in 0.3f64..=2.0, binomial in any::<bool>()) {
        let model = if binomial { ModelTag::GloballyBinomial } else { ModelTag::GillisWeiss };
        let name = if binomial { CoeffName::Mu } else { CoeffName::Lambda };
        let bound = fracwalk::kernels::coeff_bound(model, alpha, name).unwrap();
        let walk = WalkModel { model, alpha, coeff_name: name, coeff: 0.5 * bound, scaling: ScalingChoice::Auto };
        let r = cf_convergence(&walk, &[0.0], &[0.25, 0.125], 1.0).unwrap();
        prop_assert!(r.errors[0].iter().all(|e| *e == Some(0.0)));
    }

    #[test]
    fn rho_is_decreasing(alpha in 0.2f64..=2.0, nu in 1e-5f64..10.0, factor in 1.01f64..4.0) {
        let a = rho_integral(alpha, nu).unwrap();
        let b = rho_integral(alpha, nu * factor).unwrap();
        prop_assert!(b < a);
    }
}
