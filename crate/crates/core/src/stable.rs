//! The symmetric stable target law: characteristic function, density and CDF.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature;

/// Symmetric stable law at time `t` with characteristic function exp(-t |kappa|^alpha).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableParams {
    alpha: f64,
    t: f64,
}

impl StableParams {
    pub fn new(alpha: f64, t: f64) -> Result<Self> {
        Self::with_theta(alpha, t, 0.0)
    }

    /// Accepts a skewness argument only to reject it when nonzero.
    pub fn with_theta(alpha: f64, t: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::NonPositiveTime(t));
        }
        if theta != 0.0 {
            return Err(Error::Asymmetric(theta));
        }
        Ok(Self { alpha, t })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn theta(&self) -> f64 {
        0.0
    }

    /// Same exponent at a different time.
    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.alpha, t)
    }
}

/// Controls the cosine-form Fourier inversion.
///
/// `kappa_max = None` derives the cutoff from `abs_tol`. `panels` is the minimum
/// number of panels; more are used when the integrand oscillates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub kappa_max: Option<f64>,
    pub panels: usize,
    pub abs_tol: f64,
    pub max_panels: usize,
}

pub const DEFAULT_ABS_TOL: f64 = 1e-8;

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            kappa_max: None,
            panels: 64,
            abs_tol: DEFAULT_ABS_TOL,
            max_panels: 1 << 20,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(k) = self.kappa_max {
            if !(k > 0.0 && k.is_finite()) {
                return Err(invalid("kappa_max", format!("must be positive, got {k}")));
            }
        }
        if self.panels < 16 {
            return Err(invalid(
                "panels",
                format!("must be at least 16, got {}", self.panels),
            ));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid(
                "abs_tol",
                format!("must be positive, got {}", self.abs_tol),
            ));
        }
        Ok(())
    }

    /// Cutoff for the inversion integral: at least (ln(1/tol)/t)^{1/alpha}, enlarged
    /// until the neglected tail, bounded by e^{-t K^a} K^{1-a} / (t a), is below tol.
    pub fn kappa_max_for(&self, params: &StableParams) -> f64 {
        if let Some(k) = self.kappa_max {
            return k;
        }
        let (a, t) = (params.alpha, params.t);
        let tol = self.abs_tol;
        let mut k = ((1.0 / tol).ln() / t).powf(1.0 / a);
        let tail = |k: f64| (-t * k.powf(a)).exp() * k.powf(1.0 - a) / (t * a);
        while tail(k) > tol {
            k *= 1.25;
        }
        k
    }
}

/// exp(-t |kappa|^alpha).
pub fn char_fn(params: &StableParams, kappa: f64) -> f64 {
    (-params.t * kappa.abs().powf(params.alpha)).exp()
}

/// g_1(x, t) = t / (pi (x^2 + t^2)).
pub fn cauchy_pdf(x: f64, t: f64) -> f64 {
    t / (PI * (x * x + t * t))
}

pub fn cauchy_cdf(x: f64, t: f64) -> f64 {
    0.5 + (x / t).atan() / PI
}

/// g_2(x, t) = exp(-x^2 / 4t) / (2 sqrt(pi t)), the heat kernel of u_t = u_xx.
pub fn gauss_pdf(x: f64, t: f64) -> f64 {
    (-x * x / (4.0 * t)).exp() / (2.0 * (PI * t).sqrt())
}

pub fn gauss_cdf(x: f64, t: f64) -> f64 {
    0.5 * libm::erfc(-x / (2.0 * t.sqrt()))
}

/// Density by the cosine form (1/pi) int_0^K cos(kappa x) exp(-t kappa^alpha) d kappa.
///
/// Composite 16-point Gauss-Legendre; the first panel is refined geometrically
/// towards the kappa^alpha cusp and the panel width never exceeds one period of
/// cos(kappa x).
pub fn stable_density(params: &StableParams, x: f64, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    let (a, t) = (params.alpha, params.t);
    let kmax = q.kappa_max_for(params);
    let ax = x.abs();
    let mut width = kmax / q.panels as f64;
    if ax > 0.0 {
        width = width.min(2.0 * PI / ax);
    }
    let panels = (kmax / width).ceil();
    if panels > q.max_panels as f64 {
        return Err(Error::QuadratureBudget {
            required: panels.min(usize::MAX as f64) as usize,
            limit: q.max_panels,
        });
    }
    let panels = panels as usize;
    let width = kmax / panels as f64;
    let mut f = |k: f64| (k * ax).cos() * (-t * k.powf(a)).exp();
    let graded_levels = if a.fract() == 0.0 { 0 } else { 40 };
    let mut acc = quadrature::graded_at_zero(width, graded_levels, &mut f);
    acc += quadrature::uniform(width, kmax, panels - 1, &mut f);
    Ok(acc / PI)
}

/// Ray angle for the contour rotation kappa -> r e^{i phi}. Both e^{i kappa x}
/// (x > 0) and exp(-t kappa^alpha) decay on the ray.
fn ray_angle(alpha: f64) -> f64 {
    (PI / 2.0).min(PI / (4.0 * alpha))
}

/// e^z - 1 without cancellation for small |z|.
fn cexpm1(z: Complex64) -> Complex64 {
    let (a, b) = (z.re, z.im);
    let s = (0.5 * b).sin();
    Complex64::new(a.exp_m1() * b.cos() - 2.0 * s * s, a.exp() * b.sin())
}

/// Integration range in s = ln r outside which the rotated integrands are below
/// round-off. `x` is the (positive) position, 0 allowed; `x_decays` says whether
/// the factor e^{i kappa x} multiplies the whole integrand.
fn ray_range(params: &StableParams, x: f64, phi: f64, x_decays: bool) -> (f64, f64) {
    let (a, t) = (params.alpha, params.t);
    let decay = t * (a * phi).cos();
    let s_hi_t = (60.0 / decay).ln() / a;
    let s_hi = if x_decays && x > 0.0 && phi.sin() > 0.0 {
        s_hi_t.min((60.0 / (x * phi.sin())).ln())
    } else {
        s_hi_t
    };
    // small r: integrand ~ r (density) or ~ x r (cdf)
    let scale = x.max(t.powf(-1.0 / a));
    let s_lo = (1e-18 / scale).ln();
    (s_lo, s_hi.max(s_lo + 1.0))
}

const RAY_PANEL: f64 = 1.0 / 16.0;

/// Density by integrating along the rotated ray. Accurate in the far tails,
/// where the cosine form suffers from cancellation.
pub fn stable_density_rotated(params: &StableParams, x: f64) -> f64 {
    let (a, t) = (params.alpha, params.t);
    let x = x.abs();
    let phi = ray_angle(a);
    let e_phi = Complex64::from_polar(1.0, phi);
    let e_aphi = Complex64::from_polar(1.0, a * phi);
    let (lo, hi) = ray_range(params, x, phi, true);
    let panels = ((hi - lo) / RAY_PANEL).ceil() as usize;
    let w = (hi - lo) / panels as f64;
    let mut f = |s: f64| {
        let r = s.exp();
        let kappa = e_phi * r;
        let v = kappa * (Complex64::i() * kappa * x - e_aphi * (t * (a * s).exp())).exp();
        v.re
    };
    let mut acc = 0.0;
    for i in 0..panels {
        let l = lo + w * i as f64;
        acc += quadrature::panel(l, l + w, &mut f);
    }
    (acc / PI).max(0.0)
}

/// CDF G(x) = 1/2 + (1/pi) Im int (e^{i kappa x} - 1) exp(-t kappa^alpha) d kappa / kappa,
/// evaluated along a ray in the upper half plane with s = ln|kappa|.
pub fn stable_cdf_rotated(params: &StableParams, x: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    if x < 0.0 {
        return 1.0 - stable_cdf_rotated(params, -x);
    }
    let (a, t) = (params.alpha, params.t);
    let phi = ray_angle(a);
    let e_phi = Complex64::from_polar(1.0, phi);
    let e_aphi = Complex64::from_polar(1.0, a * phi);
    let (lo, hi) = ray_range(params, x, phi, false);
    let panels = ((hi - lo) / RAY_PANEL).ceil() as usize;
    let w = (hi - lo) / panels as f64;
    let mut f = |s: f64| {
        let kappa = e_phi * s.exp();
        let v = cexpm1(Complex64::i() * kappa * x) * (-e_aphi * (t * (a * s).exp())).exp();
        v.im
    };
    let mut acc = 0.0;
    for i in 0..panels {
        let l = lo + w * i as f64;
        acc += quadrature::panel(l, l + w, &mut f);
    }
    (0.5 + acc / PI).clamp(0.0, 1.0)
}

/// CDF of the target law. Closed forms at alpha = 1 and 2, contour integral otherwise.
/// The contour path has its own error control; `q` is validated for interface symmetry
/// with [`stable_density`].
pub fn stable_cdf(params: &StableParams, x: f64, q: &QuadratureConfig) -> Result<f64> {
    q.validate()?;
    Ok(match params.alpha {
        1.0 => cauchy_cdf(x, params.t),
        2.0 => gauss_cdf(x, params.t),
        _ => stable_cdf_rotated(params, x),
    })
}
