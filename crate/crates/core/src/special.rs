//! Special functions and the scaling constants shared by the walk models.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Generalized binomial coefficient C(alpha, k) = alpha (alpha - 1) ... (alpha - k + 1) / k!.
///
/// Exact zero when alpha is a nonnegative integer smaller than k. For large k the
/// product is replaced by a gamma-ratio form whose logarithm is expanded so that
/// no large cancelling terms appear; relative accuracy stays near machine
/// precision up to k ~ 1e9.
pub fn binom_alpha(alpha: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if alpha >= 0.0 && alpha.fract() == 0.0 && (k as f64) > alpha {
        return 0.0;
    }
    let kf = k as f64;
    if k <= PRODUCT_LIMIT || kf - alpha < PRODUCT_LIMIT as f64 {
        let mut c = 1.0;
        for i in 0..k {
            let i = i as f64;
            c *= (alpha - i) / (i + 1.0);
        }
        return c;
    }
    // C(alpha, k) = (-1)^k Gamma(k - alpha) / (Gamma(-alpha) Gamma(k + 1))
    let log_ratio = ln_gamma_ratio(kf, -alpha, 1.0);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * log_ratio.exp() / gamma(-alpha)
}

const PRODUCT_LIMIT: u64 = 256;

/// ln Gamma(x + a) - ln Gamma(x + b) for large x, from the Stirling series with
/// the leading logarithms combined analytically.
fn ln_gamma_ratio(x: f64, a: f64, b: f64) -> f64 {
    let za = x + a;
    let zb = x + b;
    let head =
        (a - b) * x.ln() + (za - 0.5) * (a / x).ln_1p() - (zb - 0.5) * (b / x).ln_1p() - a + b;
    head + stirling_tail(za) - stirling_tail(zb)
}

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// b(alpha) = Gamma(alpha + 1) sin(alpha pi / 2) / pi, the coefficient of the
/// hypersingular representation of the Riesz derivative. Exactly zero at alpha = 2.
pub fn b_coeff(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 2.0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(1.0 / PI);
    }
    Ok(gamma(alpha + 1.0) * (alpha * PI / 2.0).sin() / PI)
}

/// c(alpha) linking lambda and mu of the globally binomial walk (mu = c lambda).
///
/// 2 cos(alpha pi / 2) / (1 - alpha) away from 1 and 2, the removable value pi
/// at alpha = 1 and the (discontinuous) value 1 at alpha = 2.
pub fn c_coeff(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 2.0 {
        return Ok(1.0);
    }
    if alpha == 1.0 {
        return Ok(PI);
    }
    let eps = 1.0 - alpha;
    if eps.abs() < 1e-4 {
        // cos((1 - eps) pi / 2) = sin(eps pi / 2)
        let x = eps * PI / 2.0;
        return Ok(2.0 * x.sin() / eps);
    }
    Ok(2.0 * (alpha * PI / 2.0).cos() / eps)
}

/// Riemann zeta for real s > 1.
///
/// Direct partial sum up to N - 1 followed by the Euler-Maclaurin tail
/// (integral, half term and Bernoulli corrections) from N = 50.
pub fn riemann_zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        if s == f64::INFINITY {
            return Ok(1.0);
        }
        return Err(Error::ZetaDomain(s));
    }
    const N: u64 = 50;
    let head: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    Ok(head + zeta_tail_em(s, N as f64))
}

/// Sum over k >= m of k^{-s}, for s > 1 and m >= 1.
pub fn zeta_tail(s: f64, m: u64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::ZetaDomain(s));
    }
    let m = m.max(1);
    const N: u64 = 50;
    if m >= N {
        return Ok(zeta_tail_em(s, m as f64));
    }
    let head: f64 = (m..N).rev().map(|k| (k as f64).powf(-s)).sum();
    Ok(head + zeta_tail_em(s, N as f64))
}

/// Euler-Maclaurin estimate of sum_{k >= n} k^{-s}.
fn zeta_tail_em(s: f64, n: f64) -> f64 {
    // B_2/2!, B_4/4!, B_6/6!, B_8/8!, B_10/10!
    const B: [f64; 5] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
    ];
    let base = n.powf(-s);
    let mut acc = n * base / (s - 1.0) + 0.5 * base;
    // term_j = B_{2j}/(2j)! * s (s+1) ... (s+2j-2) n^{-s-2j+1}
    let mut rising = s;
    let mut pow = base / n;
    for (j, bj) in B.iter().enumerate() {
        acc += bj * rising * pow;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        pow /= n * n;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_small_cases() {
        assert_eq!(binom_alpha(2.0, 1), 2.0);
        assert_eq!(binom_alpha(1.0, 3), 0.0);
        assert_eq!(binom_alpha(2.0, 3), 0.0);
        assert!((binom_alpha(0.5, 2) + 0.125).abs() < 1e-16);
        assert_eq!(binom_alpha(0.7, 0), 1.0);
    }

    #[test]
    fn binom_large_k_matches_running_product() {
        for &alpha in &[0.3, 0.5, 1.5, 1.9] {
            let mut c = 1.0;
            for i in 0..1_000_000u64 {
                let fi = i as f64;
                c *= (alpha - fi) / (fi + 1.0);
                let k = i + 1;
                if k == 257 || k == 1000 || k == 65_536 || k == 1_000_000 {
                    let got = binom_alpha(alpha, k);
                    assert!(
                        ((got - c) / c).abs() < 1e-9,
                        "alpha {alpha} k {k}: {got} vs {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn b_and_c_branches() {
        assert_eq!(b_coeff(2.0).unwrap(), 0.0);
        assert_eq!(b_coeff(1.0).unwrap(), 1.0 / PI);
        assert_eq!(c_coeff(2.0).unwrap(), 1.0);
        assert_eq!(c_coeff(1.0).unwrap(), PI);
        assert!((c_coeff(0.5).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((c_coeff(1.0 + 1e-6).unwrap() - PI).abs() < 1e-4);
        assert!((c_coeff(1.0 - 1e-6).unwrap() - PI).abs() < 1e-4);
        assert!(b_coeff(0.0).is_err());
        assert!(c_coeff(2.5).is_err());
    }

    #[test]
    fn zeta_values() {
        assert!((riemann_zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!(riemann_zeta(1.0).is_err());
        assert!(riemann_zeta(0.5).is_err());
    }

    #[test]
    fn zeta_tail_consistent_with_partial_sums() {
        let s = 2.3;
        let z = riemann_zeta(s).unwrap();
        let partial: f64 = (1..=120u64).map(|k| (k as f64).powf(-s)).sum();
        let tail = zeta_tail(s, 121).unwrap();
        assert!((partial + tail - z).abs() < 1e-14);
        assert!((zeta_tail(s, 1).unwrap() - z).abs() < 1e-14);
    }
}
