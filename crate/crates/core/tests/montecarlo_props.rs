use fracwalk::kernels::{gl_kernel, gw_kernel, gw_lambda_bound};
use fracwalk::montecarlo::{
    run_walks, run_walks_with_threads, CGDensitySpec, CGVariant, DiscreteSampler, WalkConfig,
};
use proptest::prelude::*;

fn mean_within_noise(config: &WalkConfig) {
    let s = run_walks(config);
    let sd = s.variance().sqrt();
    let n = s.len() as f64;
    assert!(
        s.mean().abs() < 5.0 * sd / n.sqrt(),
        "mean {} sd {sd}",
        s.mean()
    );
}

#[test]
fn symmetric_means() {
    mean_within_noise(
        &WalkConfig::lattice(gl_kernel(1.5, 0.2, 200).unwrap(), 0.1, 1.0, 20_000, 3).unwrap(),
    );
    let lam = 0.5 * gw_lambda_bound(1.2).unwrap();
    mean_within_noise(
        &WalkConfig::lattice(gw_kernel(1.2, lam, 2000).unwrap(), 0.1, 1.0, 20_000, 4).unwrap(),
    );
    let spec = CGDensitySpec::new(CGVariant::ShiftedPower, 1.7).unwrap();
    mean_within_noise(&WalkConfig::chechkin_gonchar(spec, 0.05, 1.0, 20_000, 5).unwrap());
}

#[test]
fn worker_count_does_not_change_samples() {
    let spec = CGDensitySpec::new(CGVariant::PowerRatio, 0.8).unwrap();
    let c = WalkConfig::chechkin_gonchar(spec, 0.05, 0.5, 5000, 99).unwrap();
    let a = run_walks_with_threads(&c, 1).unwrap();
    let b = run_walks_with_threads(&c, 3).unwrap();
    let d = run_walks_with_threads(&c, 8).unwrap();
    assert_eq!(a.to_le_bytes(), b.to_le_bytes());
    assert_eq!(a.to_le_bytes(), d.to_le_bytes());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inverse_cdf_round_trip(alpha in 0.1f64..=2.0, y in 1e-9f64..(1.0 - 1e-9), shifted in any::<bool>()) {
        let v = if shifted { CGVariant::ShiftedPower } else { CGVariant::PowerRatio };
        let spec = CGDensitySpec::new(v, alpha).unwrap();
        let x = spec.inverse_cdf(y).unwrap();
        prop_assert!((spec.cdf(x) - y).abs() < 1e-12);
    }

    #[test]
    fn discrete_sampler_is_monotone_in_u(alpha in 0.3f64..=2.0, u1 in 0.0f64..1.0, u2 in 0.0f64..1.0) {
        prop_assume!(alpha != 1.0);
        let k = gl_kernel(alpha, 0.5 * fracwalk::kernels::gl_mu_bound(alpha).unwrap(), 30).unwrap();
        let s = DiscreteSampler::new(&k);
        // the ordering 0, +1, -1, +2, ... maps u to |offset| nondecreasingly
        let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        prop_assert!(s.sample(lo).abs() <= s.sample(hi).abs());
    }
}
