//! Lattice transition kernels of the Grünwald-Letnikov, Gillis-Weiss and
//! globally binomial walks, their scaling laws and generating functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::export::fmt_f64;
use crate::quadrature;
use crate::special::{b_coeff, binom_alpha, c_coeff, gamma, riemann_zeta, zeta_tail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelTag {
    GrunwaldLetnikov,
    GillisWeiss,
    GloballyBinomial,
    ChechkinGonchar,
}

impl ModelTag {
    pub fn has_lattice_kernel(self) -> bool {
        !matches!(self, ModelTag::ChechkinGonchar)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffName {
    Mu,
    Lambda,
}

impl CoeffName {
    fn as_str(self) -> &'static str {
        match self {
            CoeffName::Mu => "mu",
            CoeffName::Lambda => "lambda",
        }
    }
}

/// The model coefficient as supplied by the caller, with the admissibility bound
/// that applied to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub name: CoeffName,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Origin {
    Formula,
    Tabulated,
}

/// A symmetric jump law truncated at `radius`. Only p_0..p_K are stored; the
/// mass beyond K is kept in `tail_mass` and is attributed to k = 0 when the
/// kernel drives a simulation or lattice evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionKernel {
    model: ModelTag,
    alpha: f64,
    coeff: Coefficient,
    mu: Option<f64>,
    lambda: Option<f64>,
    probs: Vec<f64>,
    tail_mass: f64,
    origin: Origin,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

fn check_radius(radius: usize) -> Result<()> {
    if radius == 0 {
        Err(invalid("radius", "must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_coeff(model: ModelTag, name: CoeffName, value: f64, bound: f64) -> Result<Coefficient> {
    if !(value > 0.0 && value <= bound) {
        return Err(Error::CoeffOutOfBound {
            model,
            name: name.as_str(),
            value,
            bound,
        });
    }
    Ok(Coefficient { name, value, bound })
}

/// Rounding can leave an exact zero (at the admissibility bound) slightly negative.
fn clean(p: f64) -> f64 {
    if p <= 0.0 && p > -1e-14 {
        0.0
    } else {
        p
    }
}

fn tail_from_sum(probs: &[f64]) -> f64 {
    let partial = probs[0] + 2.0 * probs[1..].iter().rev().sum::<f64>();
    (1.0 - partial).max(0.0)
}

/// Admissibility bound on mu for the Grünwald-Letnikov walk.
pub fn gl_mu_bound(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Err(Error::GlSingularAlpha);
    }
    let c = (alpha * PI / 2.0).cos();
    Ok(if alpha < 1.0 { c } else { c.abs() / alpha })
}

/// Grünwald-Letnikov walk. alpha < 1 and alpha > 1 use the two distinct
/// discretisations; alpha = 1 is rejected.
pub fn gl_kernel(alpha: f64, mu: f64, radius: usize) -> Result<TransitionKernel> {
    let bound = gl_mu_bound(alpha)?;
    check_radius(radius)?;
    let coeff = check_coeff(ModelTag::GrunwaldLetnikov, CoeffName::Mu, mu, bound)?;
    let cos = (alpha * PI / 2.0).cos();
    let r = mu / cos;
    let mut probs = vec![0.0; radius + 1];
    if alpha < 1.0 {
        probs[0] = 1.0 - r;
        for (k, p) in probs.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *p = sign * 0.5 * r * binom_alpha(alpha, k as u64);
        }
    } else {
        probs[0] = 1.0 + r * alpha;
        probs[1] = -0.5 * r * (1.0 + binom_alpha(alpha, 2));
        for (k, p) in probs.iter_mut().enumerate().skip(2) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            *p = sign * 0.5 * r * binom_alpha(alpha, k as u64 + 1);
        }
    }
    probs.iter_mut().for_each(|p| *p = clean(*p));
    let tail_mass = if alpha == 2.0 {
        0.0
    } else {
        tail_from_sum(&probs)
    };
    Ok(TransitionKernel {
        model: ModelTag::GrunwaldLetnikov,
        alpha,
        coeff,
        mu: Some(mu),
        lambda: None,
        probs,
        tail_mass,
        origin: Origin::Formula,
    })
}

/// Admissibility bound on lambda for the Gillis-Weiss walk, 1 / (2 zeta(alpha + 1)).
pub fn gw_lambda_bound(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(0.5 / riemann_zeta(alpha + 1.0)?)
}

/// Gillis-Weiss walk p_k = lambda |k|^{-(alpha+1)}.
pub fn gw_kernel(alpha: f64, lambda: f64, radius: usize) -> Result<TransitionKernel> {
    let bound = gw_lambda_bound(alpha)?;
    check_radius(radius)?;
    let coeff = check_coeff(ModelTag::GillisWeiss, CoeffName::Lambda, lambda, bound)?;
    gw_build(alpha, lambda, radius, coeff)
}

/// Gillis-Weiss walk parameterised by mu = lambda / b(alpha); undefined at alpha = 2.
pub fn gw_kernel_mu(alpha: f64, mu: f64, radius: usize) -> Result<TransitionKernel> {
    check_alpha(alpha)?;
    if alpha == 2.0 {
        return Err(Error::MuFormAtAlphaTwo);
    }
    let b = b_coeff(alpha)?;
    let bound = gw_lambda_bound(alpha)? / b;
    check_radius(radius)?;
    let coeff = check_coeff(ModelTag::GillisWeiss, CoeffName::Mu, mu, bound)?;
    gw_build(alpha, (mu * b).min(bound * b), radius, coeff)
}

fn gw_build(
    alpha: f64,
    lambda: f64,
    radius: usize,
    coeff: Coefficient,
) -> Result<TransitionKernel> {
    let s = alpha + 1.0;
    let mut probs = vec![0.0; radius + 1];
    probs[0] = clean(1.0 - 2.0 * lambda * riemann_zeta(s)?);
    for (k, p) in probs.iter_mut().enumerate().skip(1) {
        *p = lambda * (k as f64).powf(-s);
    }
    let tail_mass = 2.0 * lambda * zeta_tail(s, radius as u64 + 1)?;
    let mu = if alpha < 2.0 {
        Some(lambda / b_coeff(alpha)?)
    } else {
        None
    };
    Ok(TransitionKernel {
        model: ModelTag::GillisWeiss,
        alpha,
        coeff,
        mu,
        lambda: Some(lambda),
        probs,
        tail_mass,
        origin: Origin::Formula,
    })
}

/// Globally binomial walk in the lambda form, 0 < lambda <= 1/2.
pub fn binom_kernel_lambda(alpha: f64, lambda: f64, radius: usize) -> Result<TransitionKernel> {
    check_alpha(alpha)?;
    check_radius(radius)?;
    let coeff = check_coeff(ModelTag::GloballyBinomial, CoeffName::Lambda, lambda, 0.5)?;
    binom_build(alpha, lambda, radius, coeff)
}

/// Globally binomial walk with mu = c(alpha) lambda, 0 < mu <= c(alpha)/2.
pub fn binom_kernel(alpha: f64, mu: f64, radius: usize) -> Result<TransitionKernel> {
    check_alpha(alpha)?;
    let c = c_coeff(alpha)?;
    check_radius(radius)?;
    let coeff = check_coeff(ModelTag::GloballyBinomial, CoeffName::Mu, mu, 0.5 * c)?;
    binom_build(alpha, (mu / c).min(0.5), radius, coeff)
}

fn binom_build(
    alpha: f64,
    lambda: f64,
    radius: usize,
    coeff: Coefficient,
) -> Result<TransitionKernel> {
    let mut probs = vec![0.0; radius + 1];
    probs[0] = 1.0 - 2.0 * lambda;
    if alpha == 1.0 {
        for (k, p) in probs.iter_mut().enumerate().skip(1) {
            let k = k as f64;
            *p = lambda / (k * (k + 1.0));
        }
    } else {
        let r = lambda / (alpha - 1.0);
        for (k, p) in probs.iter_mut().enumerate().skip(1) {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            *p = sign * r * binom_alpha(alpha, k as u64 + 1);
        }
    }
    probs.iter_mut().for_each(|p| *p = clean(*p));
    let tail_mass = if alpha == 2.0 {
        0.0
    } else {
        tail_from_sum(&probs)
    };
    Ok(TransitionKernel {
        model: ModelTag::GloballyBinomial,
        alpha,
        coeff,
        mu: Some(c_coeff(alpha)? * lambda),
        lambda: Some(lambda),
        probs,
        tail_mass,
        origin: Origin::Formula,
    })
}

/// Builds the kernel of `model` from whichever coefficient the caller supplied.
pub fn build_kernel(
    model: ModelTag,
    alpha: f64,
    name: CoeffName,
    value: f64,
    radius: usize,
) -> Result<TransitionKernel> {
    match (model, name) {
        (ModelTag::GrunwaldLetnikov, CoeffName::Mu) => gl_kernel(alpha, value, radius),
        (ModelTag::GrunwaldLetnikov, CoeffName::Lambda) => Err(invalid(
            "lambda",
            "the Grünwald-Letnikov walk is parameterised by mu only",
        )),
        (ModelTag::GillisWeiss, CoeffName::Lambda) => gw_kernel(alpha, value, radius),
        (ModelTag::GillisWeiss, CoeffName::Mu) => gw_kernel_mu(alpha, value, radius),
        (ModelTag::GloballyBinomial, CoeffName::Mu) => binom_kernel(alpha, value, radius),
        (ModelTag::GloballyBinomial, CoeffName::Lambda) => {
            binom_kernel_lambda(alpha, value, radius)
        }
        (ModelTag::ChechkinGonchar, _) => Err(Error::NoLatticeKernel(model)),
    }
}

/// Admissibility bound for the given model and coefficient name.
pub fn coeff_bound(model: ModelTag, alpha: f64, name: CoeffName) -> Result<f64> {
    match (model, name) {
        (ModelTag::GrunwaldLetnikov, CoeffName::Mu) => gl_mu_bound(alpha),
        (ModelTag::GillisWeiss, CoeffName::Lambda) => gw_lambda_bound(alpha),
        (ModelTag::GillisWeiss, CoeffName::Mu) => {
            if alpha == 2.0 {
                return Err(Error::MuFormAtAlphaTwo);
            }
            Ok(gw_lambda_bound(alpha)? / b_coeff(alpha)?)
        }
        (ModelTag::GloballyBinomial, CoeffName::Mu) => Ok(0.5 * c_coeff(alpha)?),
        (ModelTag::GloballyBinomial, CoeffName::Lambda) => {
            check_alpha(alpha)?;
            Ok(0.5)
        }
        (ModelTag::GrunwaldLetnikov, CoeffName::Lambda) => Err(invalid(
            "lambda",
            "the Grünwald-Letnikov walk is parameterised by mu only",
        )),
        (ModelTag::ChechkinGonchar, _) => Err(Error::NoLatticeKernel(model)),
    }
}

/// Closed-form mass beyond radius K. GL and binomial use the partial-sum
/// identity sum_{j<=K} (-1)^j C(a, j) = (-1)^K C(a-1, K).
pub fn analytic_tail(
    model: ModelTag,
    alpha: f64,
    coeff: f64,
    name: CoeffName,
    radius: usize,
) -> Result<f64> {
    check_alpha(alpha)?;
    let k = radius as u64;
    let sgn = |n: u64| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(match model {
        ModelTag::GrunwaldLetnikov => {
            gl_mu_bound(alpha)?;
            if alpha == 2.0 {
                return Ok(0.0);
            }
            let r = coeff / (alpha * PI / 2.0).cos();
            if alpha < 1.0 {
                r * sgn(k) * binom_alpha(alpha - 1.0, k)
            } else {
                r * sgn(k + 1) * binom_alpha(alpha - 1.0, k + 1)
            }
        }
        ModelTag::GillisWeiss => {
            let lambda = match name {
                CoeffName::Lambda => coeff,
                CoeffName::Mu => coeff * b_coeff(alpha)?,
            };
            2.0 * lambda * zeta_tail(alpha + 1.0, k + 1)?
        }
        ModelTag::GloballyBinomial => {
            let lambda = match name {
                CoeffName::Lambda => coeff,
                CoeffName::Mu => coeff / c_coeff(alpha)?,
            };
            if alpha == 2.0 {
                0.0
            } else if alpha == 1.0 {
                2.0 * lambda / (k as f64 + 1.0)
            } else {
                2.0 * lambda / (alpha - 1.0) * sgn(k) * binom_alpha(alpha - 1.0, k + 1)
            }
        }
        ModelTag::ChechkinGonchar => return Err(Error::NoLatticeKernel(model)),
    })
}

/// Default tail tolerances: heavier Gillis-Weiss tails get a looser target.
pub fn default_tail_tol(model: ModelTag) -> f64 {
    match model {
        ModelTag::GillisWeiss => 1e-6,
        _ => 1e-8,
    }
}

/// Largest radius the default search will return.
pub const MAX_DEFAULT_RADIUS: usize = 1 << 20;

/// Smallest radius whose closed-form tail is below `tol`, capped at
/// [`MAX_DEFAULT_RADIUS`]. The achieved tail is reported by the constructed kernel.
pub fn default_radius(
    model: ModelTag,
    alpha: f64,
    coeff: f64,
    name: CoeffName,
    tol: f64,
) -> Result<usize> {
    let tail = |k: usize| analytic_tail(model, alpha, coeff, name, k);
    if tail(MAX_DEFAULT_RADIUS)? > tol {
        return Ok(MAX_DEFAULT_RADIUS);
    }
    let mut hi = 1usize;
    while tail(hi)? > tol {
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(1);
    }
    // tail(lo) > tol >= tail(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail(mid)? > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// How the mass beyond the radius enters a truncated generating-function sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesTail {
    /// Tail attributed to k = 0, the law that simulations actually use.
    Lumped,
    /// Tail omitted; differs from the untruncated law by at most tail_mass.
    Dropped,
}

impl TransitionKernel {
    /// A kernel given directly by p_0..p_K (symmetric extension implied). The
    /// probabilities must be nonnegative and sum to at most 1; the remainder
    /// becomes the tail mass.
    pub fn from_one_sided(model: ModelTag, alpha: f64, probs: Vec<f64>) -> Result<Self> {
        check_alpha(alpha)?;
        if !model.has_lattice_kernel() {
            return Err(Error::NoLatticeKernel(model));
        }
        if probs.len() < 2 {
            return Err(invalid("probs", "need p_0 and at least p_1"));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
            return Err(invalid("probs", format!("negative or NaN entry {p}")));
        }
        let partial = probs[0] + 2.0 * probs[1..].iter().sum::<f64>();
        if partial > 1.0 + 1e-14 {
            return Err(invalid("probs", format!("total {partial} exceeds 1")));
        }
        Ok(Self {
            model,
            alpha,
            coeff: Coefficient {
                name: CoeffName::Mu,
                value: f64::NAN,
                bound: f64::NAN,
            },
            mu: None,
            lambda: None,
            tail_mass: (1.0 - partial).max(0.0),
            probs,
            origin: Origin::Tabulated,
        })
    }

    pub fn model(&self) -> ModelTag {
        self.model
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn coeff(&self) -> Coefficient {
        self.coeff
    }

    /// Equivalent mu, if defined (not for Gillis-Weiss at alpha = 2).
    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn radius(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// p_0, ..., p_K.
    pub fn one_sided(&self) -> &[f64] {
        &self.probs
    }

    /// p_k for any integer k; zero outside the radius.
    pub fn p(&self, k: i64) -> f64 {
        self.probs
            .get(k.unsigned_abs() as usize)
            .copied()
            .unwrap_or(0.0)
    }

    /// p_0 with the tail lumped in.
    pub fn p0_lumped(&self) -> f64 {
        self.probs[0] + self.tail_mass
    }

    /// (k, p_k) for k = -K..=K.
    pub fn full(&self) -> Vec<(i64, f64)> {
        let r = self.radius() as i64;
        (-r..=r).map(|k| (k, self.p(k))).collect()
    }

    /// Scaling law tau = sigma(h) under which the walk converges.
    pub fn scaling_law(&self) -> Result<ScalingLaw> {
        match self.origin {
            Origin::Tabulated => Err(invalid("kernel", "tabulated kernel has no scaling law")),
            Origin::Formula => {
                if self.model == ModelTag::GillisWeiss && self.alpha == 2.0 {
                    ScalingLaw::log_corrected(self.lambda.unwrap_or(self.coeff.value))
                } else {
                    ScalingLaw::power_law(
                        self.model,
                        self.alpha,
                        self.mu.unwrap_or(self.coeff.value),
                    )
                }
            }
        }
    }

    /// Hex SHA-256 over the model, alpha, coefficient and probabilities.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{:?}", self.model).as_bytes());
        h.update(self.alpha.to_le_bytes());
        h.update(self.coeff.value.to_le_bytes());
        h.update(self.tail_mass.to_le_bytes());
        for p in &self.probs {
            h.update(p.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Two columns k, p_k over -K..=K.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,p_k\n");
        for (k, p) in self.full() {
            out.push_str(&format!("{k},{}\n", fmt_f64(p)));
        }
        out
    }

    /// Metadata record (probabilities are left to the CSV).
    pub fn metadata_json(&self) -> serde_json::Value {
        let law = self.scaling_law().ok();
        serde_json::json!({
            "model": self.model,
            "alpha": self.alpha,
            "coeff": {
                "name": self.coeff.name,
                "value": self.coeff.value,
                "bound": self.coeff.bound,
            },
            "mu": self.mu,
            "lambda": self.lambda,
            "radius": self.radius(),
            "tail_mass": self.tail_mass,
            "p0": self.probs[0],
            "min_p": self.probs.iter().cloned().fold(f64::INFINITY, f64::min),
            "scaling": law,
            "fingerprint": self.fingerprint(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalingForm {
    /// tau = mu h^alpha
    PowerLaw,
    /// tau = lambda h^2 ln(1/h)
    LogCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingLaw {
    pub model: ModelTag,
    pub alpha: f64,
    pub coeff: f64,
    pub form: ScalingForm,
}

impl ScalingLaw {
    pub fn power_law(model: ModelTag, alpha: f64, mu: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid(
                "mu",
                format!("scaling coefficient must be positive, got {mu}"),
            ));
        }
        Ok(Self {
            model,
            alpha,
            coeff: mu,
            form: ScalingForm::PowerLaw,
        })
    }

    /// The Gillis-Weiss walk at alpha = 2.
    pub fn log_corrected(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", format!("must be positive, got {lambda}")));
        }
        Ok(Self {
            model: ModelTag::GillisWeiss,
            alpha: 2.0,
            coeff: lambda,
            form: ScalingForm::LogCorrected,
        })
    }

    /// Continuous-jump walk with tail constant b: mu = b pi / (Gamma(alpha+1) sin(alpha pi/2)).
    pub fn chechkin_gonchar(alpha: f64, b: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let mu = b * PI / (gamma(alpha + 1.0) * (alpha * PI / 2.0).sin());
        Self::power_law(ModelTag::ChechkinGonchar, alpha, mu)
    }

    pub fn tau(&self, h: f64) -> Result<f64> {
        scaling_tau(self, h)
    }
}

pub fn scaling_tau(law: &ScalingLaw, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    match law.form {
        ScalingForm::PowerLaw => Ok(law.coeff * h.powf(law.alpha)),
        ScalingForm::LogCorrected => {
            if h >= 1.0 {
                return Err(invalid(
                    "h",
                    format!("log-corrected scaling needs 0 < h < 1, got {h}"),
                ));
            }
            Ok(law.coeff * h * h * (1.0 / h).ln())
        }
    }
}

fn wrap_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(2.0 * PI);
    if r > PI {
        2.0 * PI - r
    } else {
        r
    }
}

/// Truncated generating function sum_{|k|<=K} p_k e^{ik phase}, with the tail
/// handled per `tail`.
pub fn series_gen_fn(kernel: &TransitionKernel, phase: f64, tail: SeriesTail) -> f64 {
    // e^{ik phase} by rotation, re-anchored every block to bound rounding drift
    const BLOCK: usize = 64;
    let step = Complex64::from_polar(1.0, phase);
    let mut sum = 0.0;
    for (b, chunk) in kernel.probs[1..].chunks(BLOCK).enumerate() {
        let mut z = Complex64::from_polar(1.0, (b * BLOCK + 1) as f64 * phase);
        let mut part = 0.0;
        for p in chunk {
            part += p * z.re;
            z *= step;
        }
        sum += part;
    }
    let acc = kernel.probs[0] + 2.0 * sum;
    match tail {
        SeriesTail::Lumped => acc + kernel.tail_mass,
        SeriesTail::Dropped => acc,
    }
}

/// 1 - p~(e^{i phase}) of the untruncated law, without cancellation near phase 0.
///
/// Closed forms for the Grünwald-Letnikov and binomial walks, an integral
/// representation for Gillis-Weiss, and the lumped series for tabulated kernels.
pub fn gen_fn_deficit(kernel: &TransitionKernel, phase: f64) -> f64 {
    let theta = wrap_phase(phase);
    if theta == 0.0 {
        return 0.0;
    }
    if kernel.origin == Origin::Tabulated {
        return tabulated_deficit(kernel, theta);
    }
    let alpha = kernel.alpha;
    match kernel.model {
        ModelTag::GrunwaldLetnikov => {
            let mu = kernel.mu.unwrap_or(kernel.coeff.value);
            if alpha == 2.0 {
                let s = (theta / 2.0).sin();
                return 4.0 * mu * s * s;
            }
            let cos = (alpha * PI / 2.0).cos();
            let m = (2.0 * (theta / 2.0).sin()).powf(alpha);
            let angle = if alpha < 1.0 {
                alpha * (PI - theta) / 2.0
            } else {
                alpha * (PI - theta) / 2.0 + theta
            };
            mu / cos * m * angle.cos()
        }
        ModelTag::GloballyBinomial => {
            let lambda = kernel.lambda.unwrap_or(0.0);
            if alpha == 2.0 {
                let s = (theta / 2.0).sin();
                return 4.0 * lambda * s * s;
            }
            let z = Complex64::from_polar(1.0, theta);
            let one_minus_zbar = Complex64::new(1.0, 0.0) - z.conj();
            let log = (Complex64::new(1.0, 0.0) - z).ln();
            let one_minus_z = Complex64::new(1.0, 0.0) - z;
            let log_bar = one_minus_zbar.ln();
            let (q, q_bar) = if alpha == 1.0 {
                (one_minus_zbar * log, one_minus_z * log_bar)
            } else {
                let e = alpha - 1.0;
                (
                    one_minus_zbar * cexpm1(e * log) / e,
                    one_minus_z * cexpm1(e * log_bar) / e,
                )
            };
            let sum = q + q_bar;
            debug_assert!(sum.im.abs() < 1e-12, "imaginary residue {}", sum.im);
            lambda * sum.re
        }
        ModelTag::GillisWeiss => {
            let lambda = kernel.lambda.unwrap_or(0.0);
            2.0 * lambda * gw_deficit_integral(alpha, theta)
        }
        ModelTag::ChechkinGonchar => unreachable!("no lattice kernel"),
    }
}

fn tabulated_deficit(kernel: &TransitionKernel, theta: f64) -> f64 {
    // 1 - p~ = sum_{k>=1} 2 p_k (1 - cos k theta) = sum 4 p_k sin^2(k theta / 2)
    kernel
        .probs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, p)| {
            let s = (0.5 * k as f64 * theta).sin();
            4.0 * p * s * s
        })
        .sum()
}

fn cexpm1(z: Complex64) -> Complex64 {
    let s = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * z.im.cos() - 2.0 * s * s,
        z.re.exp() * z.im.sin(),
    )
}

/// sum_{k>=1} k^{-(alpha+1)} (1 - cos k nu) via the Laplace representation
/// k^{-(a+1)} = (1/Gamma(a+1)) int u^a e^{-ku} du, summed under the integral.
pub fn gw_deficit_integral(alpha: f64, nu: f64) -> f64 {
    let nu = wrap_phase(nu);
    if nu == 0.0 {
        return 0.0;
    }
    let sh = (0.5 * nu).sin();
    let one_minus_cos = 2.0 * sh * sh;
    let mut f = |s: f64| {
        let u = s.exp();
        let e = (-u).exp();
        let d = -(-u).exp_m1();
        let num = u.powf(alpha + 1.0) * e * (1.0 + e) * one_minus_cos;
        let den = d * (d * d + 2.0 * e * one_minus_cos);
        num / den
    };
    let lo = (1e-17 * alpha).ln() / alpha;
    let hi = 50f64.ln().max(lo + 1.0);
    let panels = ((hi - lo) * 8.0).ceil() as usize;
    quadrature::uniform(lo, hi, panels, &mut f) / gamma(alpha + 1.0)
}

/// p~(e^{i phase}) of the untruncated law (lumped series for tabulated kernels).
pub fn gen_fn(kernel: &TransitionKernel, phase: f64) -> f64 {
    1.0 - gen_fn_deficit(kernel, phase)
}

/// The closed-form generating function where one exists (Grünwald-Letnikov and
/// globally binomial walks).
pub fn gen_fn_closed(kernel: &TransitionKernel, phase: f64) -> Option<f64> {
    match (kernel.origin, kernel.model) {
        (Origin::Formula, ModelTag::GrunwaldLetnikov | ModelTag::GloballyBinomial) => {
            Some(gen_fn(kernel, phase))
        }
        _ => None,
    }
}

/// Characteristic function of S_n = h (Y_1 + ... + Y_n): p~(e^{i kappa h})^n.
pub fn walk_char_fn(kernel: &TransitionKernel, h: f64, n: u64, kappa: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let d = gen_fn_deficit(kernel, kappa * h);
    if d < 1.0 {
        (n as f64 * (-d).ln_1p()).exp()
    } else {
        let p = 1.0 - d;
        let m = p.abs().powf(n as f64);
        if n % 2 == 1 && p < 0.0 {
            -m
        } else {
            m
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total(k: &TransitionKernel) -> f64 {
        k.probs[0] + 2.0 * k.probs[1..].iter().sum::<f64>() + k.tail_mass
    }

    #[test]
    fn gl_alpha_two_is_explicit_scheme() {
        let k = gl_kernel(2.0, 0.3, 4).unwrap();
        assert!((k.p(0) - 0.4).abs() < 1e-15);
        assert!((k.p(1) - 0.3).abs() < 1e-15);
        assert_eq!(k.p(-1), k.p(1));
        for j in 2..=4 {
            assert_eq!(k.p(j), 0.0);
        }
        assert_eq!(k.tail_mass(), 0.0);
    }

    #[test]
    fn gl_boundary_case_a() {
        let mu = (PI / 4.0).cos();
        let k = gl_kernel(0.5, mu, 64).unwrap();
        assert!(k.p(0).abs() < 1e-15);
        assert!((k.p(1) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gl_rejects_alpha_one_and_excess_mu() {
        assert_eq!(gl_kernel(1.0, 0.1, 4), Err(Error::GlSingularAlpha));
        let b = gl_mu_bound(1.5).unwrap();
        assert!(matches!(
            gl_kernel(1.5, b * 1.000001, 8),
            Err(Error::CoeffOutOfBound { bound, .. }) if bound == b
        ));
        assert!(gl_kernel(1.5, b, 8).is_ok());
    }

    #[test]
    fn gw_boundary_and_ratio() {
        let lam = 0.5 / riemann_zeta(3.0).unwrap();
        let k = gw_kernel(2.0, lam, 100).unwrap();
        assert!(k.p(0).abs() < 1e-15);
        assert_eq!(k.p(1), lam);
        let k = gw_kernel(0.8, 0.1, 50).unwrap();
        assert!((k.p(2) / k.p(1) - 2f64.powf(-1.8)).abs() < 1e-15);
        assert!((total(&k) - 1.0).abs() < 1e-15);
        assert_eq!(gw_kernel_mu(2.0, 0.1, 10), Err(Error::MuFormAtAlphaTwo));
    }

    #[test]
    fn gw_mu_form_matches_lambda_form() {
        let k1 = gw_kernel(1.3, 0.2, 40).unwrap();
        let mu = k1.mu().unwrap();
        let k2 = gw_kernel_mu(1.3, mu, 40).unwrap();
        for j in 0..=40 {
            assert!((k1.p(j) - k2.p(j)).abs() < 1e-15);
        }
    }

    #[test]
    fn binomial_examples() {
        let k = binom_kernel(2.0, 0.25, 4).unwrap();
        assert_eq!(k.p(0), 0.5);
        assert_eq!(k.p(1), 0.25);
        assert_eq!(k.p(2), 0.0);
        let k = binom_kernel(1.0, 1.0, 10).unwrap();
        assert!((k.p(1) - 0.5 / PI).abs() < 1e-15);
        let k = binom_kernel_lambda(1.5, 0.5, 16).unwrap();
        assert_eq!(k.p(0), 0.0);
    }

    #[test]
    fn binomial_mu_form_is_lambda_form_rescaled() {
        // p_k = (-1)^k mu / (2 cos(a pi/2)) C(a, |k|+1)
        let (a, mu) = (0.6, 0.7);
        let k = binom_kernel(a, mu, 20).unwrap();
        let cos = (a * PI / 2.0).cos();
        for j in 1..=20u64 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let want = sign * mu / (2.0 * cos) * binom_alpha(a, j + 1);
            assert!((k.p(j as i64) - want).abs() < 1e-15, "k {j}");
        }
    }

    #[test]
    fn analytic_tail_matches_summed_tail() {
        let cases = [
            gl_kernel(0.3, 0.5 * gl_mu_bound(0.3).unwrap(), 200).unwrap(),
            gl_kernel(1.7, 0.5 * gl_mu_bound(1.7).unwrap(), 200).unwrap(),
            binom_kernel_lambda(0.4, 0.3, 200).unwrap(),
            binom_kernel_lambda(1.0, 0.3, 200).unwrap(),
            binom_kernel_lambda(1.6, 0.3, 200).unwrap(),
            gw_kernel(1.2, 0.2, 200).unwrap(),
        ];
        for k in &cases {
            let c = k.coeff();
            let t = analytic_tail(k.model(), k.alpha(), c.value, c.name, 200).unwrap();
            assert!(
                (t - k.tail_mass()).abs() < 1e-13,
                "{:?} {}: {t} vs {}",
                k.model(),
                k.alpha(),
                k.tail_mass()
            );
        }
    }

    #[test]
    fn default_radius_meets_tolerance() {
        let r = default_radius(ModelTag::GrunwaldLetnikov, 1.5, 0.2, CoeffName::Mu, 1e-8).unwrap();
        let k = gl_kernel(1.5, 0.2, r).unwrap();
        assert!(k.tail_mass() <= 1e-8 + 1e-15);
        let before =
            analytic_tail(ModelTag::GrunwaldLetnikov, 1.5, 0.2, CoeffName::Mu, r - 1).unwrap();
        assert!(before > 1e-8);
        let r = default_radius(
            ModelTag::GloballyBinomial,
            2.0,
            0.2,
            CoeffName::Lambda,
            1e-8,
        )
        .unwrap();
        assert_eq!(r, 1);
        let r = default_radius(ModelTag::GrunwaldLetnikov, 0.3, 0.2, CoeffName::Mu, 1e-8).unwrap();
        assert_eq!(r, MAX_DEFAULT_RADIUS);
    }

    #[test]
    fn scaling_examples() {
        let law = ScalingLaw::power_law(ModelTag::GrunwaldLetnikov, 0.5, 0.5).unwrap();
        assert!((law.tau(0.04).unwrap() - 0.1).abs() < 1e-15);
        let law = ScalingLaw::log_corrected(0.2).unwrap();
        assert!((law.tau(0.1).unwrap() - 0.2 * 0.01 * 10f64.ln()).abs() < 1e-15);
        assert!(law.tau(1.0).is_err());
        let law = ScalingLaw::chechkin_gonchar(1.0, 0.5).unwrap();
        assert!((law.coeff - PI / 2.0).abs() < 1e-15);
        let gw2 = gw_kernel(2.0, 0.2, 10).unwrap().scaling_law().unwrap();
        assert_eq!(gw2.form, ScalingForm::LogCorrected);
    }

    #[test]
    fn gen_fn_identities() {
        let k = binom_kernel_lambda(2.0, 0.3, 4).unwrap();
        for &th in &[0.0, 0.4, -1.1, 3.0] {
            let want = 1.0 + 0.3 * (2.0 * f64::cos(th) - 2.0);
            assert!((gen_fn(&k, th) - want).abs() < 1e-15);
        }
        let k = gl_kernel(0.5, 0.3, 64).unwrap();
        assert_eq!(gen_fn(&k, 0.2), gen_fn(&k, -0.2));
        assert_eq!(gen_fn(&k, 0.0), 1.0);
    }

    #[test]
    fn gw_integral_matches_direct_sum() {
        // alpha = 2 converges fast enough to sum directly
        for &nu in &[0.01, 0.3, 2.0, PI] {
            let direct: f64 = (1..2_000_000u64)
                .map(|k| {
                    let k = k as f64;
                    k.powi(-3) * (1.0 - (k * nu).cos())
                })
                .sum();
            let got = gw_deficit_integral(2.0, nu);
            assert!((got - direct).abs() < 1e-11, "nu {nu}: {got} vs {direct}");
        }
    }

    #[test]
    fn gw_integral_matches_kernel_series() {
        let k = gw_kernel(0.7, 0.1, 50_000).unwrap();
        for &nu in &[0.05, 0.7, 2.5] {
            let series = series_gen_fn(&k, nu, SeriesTail::Dropped);
            let closed = gen_fn(&k, nu);
            assert!((series - closed).abs() <= k.tail_mass() + 1e-12, "nu {nu}");
        }
    }

    #[test]
    fn walk_char_fn_trivia() {
        let k = gl_kernel(1.5, 0.2, 64).unwrap();
        assert_eq!(walk_char_fn(&k, 0.1, 0, 3.0), 1.0);
        assert_eq!(walk_char_fn(&k, 0.1, 7, 0.0), 1.0);
        let p = gen_fn(&k, 0.3);
        assert!((walk_char_fn(&k, 0.1, 5, 3.0) - p.powi(5)).abs() < 1e-14);
    }

    #[test]
    fn tabulated_kernel() {
        let k =
            TransitionKernel::from_one_sided(ModelTag::GrunwaldLetnikov, 1.0, vec![0.4, 0.2, 0.05])
                .unwrap();
        assert!((k.tail_mass() - 0.1).abs() < 1e-15);
        assert!(k.scaling_law().is_err());
        assert!(
            TransitionKernel::from_one_sided(ModelTag::GillisWeiss, 1.0, vec![0.9, 0.2]).is_err()
        );
        let th: f64 = 0.8;
        let want = 0.5 + 0.4 * th.cos() + 0.1 * (2.0 * th).cos();
        assert!((gen_fn(&k, th) - want).abs() < 1e-15);
    }

    #[test]
    fn csv_has_full_support() {
        let k = gl_kernel(2.0, 0.25, 2).unwrap();
        let csv = k.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "k,p_k");
        assert_eq!(lines.len(), 6);
        assert!(lines[3].starts_with("0,5.0"));
    }
}
