//! Monte Carlo simulation of the walks: discrete jumps drawn from a lattice
//! kernel, or continuous jumps drawn by inverting an explicit distribution
//! function.
//!
//! Every sample owns its own ChaCha8 stream: the generator is seeded with the
//! run seed and switched to stream number `sample_index`. Output therefore does
//! not depend on how samples are spread over threads.

use std::f64::consts::PI;

use rand::distributions::{Distribution, Open01, Standard};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::export::fmt_f64;
use crate::kernels::{ModelTag, ScalingLaw, TransitionKernel};

pub const GENERATOR: &str = "rand_chacha::ChaCha8Rng";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CGVariant {
    /// W(x) = 1 - (1/2)(1 + x^alpha)^{-1} for x >= 0.
    PowerRatio,
    /// w(x) = (alpha/2)(1 + |x|)^{-(alpha+1)}.
    ShiftedPower,
    /// Standard Cauchy jumps, alpha = 1.
    ExactCauchy,
}

/// A continuous symmetric jump density with w(x) = (b + eps(|x|)) |x|^{-(alpha+1)},
/// |eps| <= k_bound everywhere and |eps(x)| <= e_bound |x|^{-gamma} for |x| >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CGDensitySpec {
    pub variant: CGVariant,
    pub alpha: f64,
    pub b: f64,
    pub gamma: f64,
    pub k_bound: f64,
    pub e_bound: f64,
}

impl CGDensitySpec {
    pub fn new(variant: CGVariant, alpha: f64) -> Result<Self> {
        match variant {
            CGVariant::ExactCauchy => {
                if alpha != 1.0 {
                    return Err(invalid(
                        "alpha",
                        format!("exact Cauchy jumps need alpha = 1, got {alpha}"),
                    ));
                }
                Ok(Self {
                    variant,
                    alpha,
                    b: 1.0 / PI,
                    gamma: 2.0,
                    k_bound: 1.0 / PI,
                    e_bound: 1.0 / PI,
                })
            }
            CGVariant::PowerRatio | CGVariant::ShiftedPower => {
                if !(alpha > 0.0 && alpha < 2.0) {
                    return Err(Error::AlphaOutOfRange(alpha));
                }
                let (gamma, e_bound) = match variant {
                    CGVariant::PowerRatio => (alpha, alpha),
                    _ => (1.0, 0.5 * alpha * (alpha + 1.0)),
                };
                Ok(Self {
                    variant,
                    alpha,
                    b: 0.5 * alpha,
                    gamma,
                    k_bound: 0.5 * alpha,
                    e_bound,
                })
            }
        }
    }

    /// Shifted power for alpha < 1 (bounded density), power ratio otherwise.
    pub fn default_for(alpha: f64) -> Result<Self> {
        if alpha < 1.0 {
            Self::new(CGVariant::ShiftedPower, alpha)
        } else {
            Self::new(CGVariant::PowerRatio, alpha)
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        let a = self.alpha;
        let ax = x.abs();
        match self.variant {
            CGVariant::PowerRatio => {
                let xa = ax.powf(a);
                a * ax.powf(a - 1.0) / (2.0 * (1.0 + xa) * (1.0 + xa))
            }
            CGVariant::ShiftedPower => 0.5 * a * (1.0 + ax).powf(-(a + 1.0)),
            CGVariant::ExactCauchy => 1.0 / (PI * (1.0 + x * x)),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let a = self.alpha;
        let lower = |ax: f64| match self.variant {
            CGVariant::PowerRatio => 0.5 / (1.0 + ax.powf(a)),
            CGVariant::ShiftedPower => 0.5 * (1.0 + ax).powf(-a),
            CGVariant::ExactCauchy => 0.5 - ax.atan() / PI,
        };
        if x < 0.0 {
            lower(-x)
        } else {
            1.0 - lower(x)
        }
    }

    /// The unique x with W(x) = y.
    pub fn inverse_cdf(&self, y: f64) -> Result<f64> {
        cg_inverse_cdf(self, y)
    }

    /// tau = mu h^alpha with mu = b pi / (Gamma(alpha+1) sin(alpha pi/2)).
    pub fn scaling_law(&self) -> Result<ScalingLaw> {
        ScalingLaw::chechkin_gonchar(self.alpha, self.b)
    }
}

pub fn cg_inverse_cdf(spec: &CGDensitySpec, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::ProbabilityOutOfRange { value: y });
    }
    if spec.variant == CGVariant::ExactCauchy {
        return sample_cauchy_exact(y);
    }
    if y == 0.5 {
        return Ok(0.0);
    }
    // distance of y from the nearer end, in (0, 1/2)
    let (q, sign) = if y < 0.5 { (y, -1.0) } else { (1.0 - y, 1.0) };
    let a = spec.alpha;
    let ax = match spec.variant {
        // 1/(2q) = 1 + |x|^a
        CGVariant::PowerRatio => ((1.0 - 2.0 * q) / (2.0 * q)).powf(1.0 / a),
        // 1/(2q) = (1 + |x|)^a
        _ => (-(2.0 * q).ln() / a).exp_m1(),
    };
    Ok(sign * ax)
}

/// tan(pi (u - 1/2)), a standard Cauchy variate.
pub fn sample_cauchy_exact(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::ProbabilityOutOfRange { value: u });
    }
    if u == 0.5 {
        return Ok(0.0);
    }
    Ok((PI * (u - 0.5)).tan())
}

/// Offset at position `i` of the scan order 0, +1, -1, +2, -2, ...
fn offset_at(i: usize) -> i64 {
    if i == 0 {
        0
    } else if i % 2 == 1 {
        i.div_ceil(2) as i64
    } else {
        -((i / 2) as i64)
    }
}

fn prob_at(kernel: &TransitionKernel, i: usize) -> f64 {
    if i == 0 {
        kernel.p0_lumped()
    } else {
        kernel.p(offset_at(i))
    }
}

/// Inversion by a linear scan over 0, +1, -1, +2, -2, ... with the tail mass
/// lumped into the first atom. A u beyond the last cumulative value (round-off)
/// maps to 0.
pub fn sample_step_discrete(kernel: &TransitionKernel, u: f64) -> i64 {
    let mut acc = 0.0;
    for i in 0..=2 * kernel.radius() {
        acc += prob_at(kernel, i);
        if u < acc {
            return offset_at(i);
        }
    }
    0
}

/// Same draws as [`sample_step_discrete`] using a precomputed cumulative table
/// and binary search.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cumulative: Vec<f64>,
}

impl DiscreteSampler {
    pub fn new(kernel: &TransitionKernel) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..=2 * kernel.radius())
            .map(|i| {
                acc += prob_at(kernel, i);
                acc
            })
            .collect();
        Self { cumulative }
    }

    pub fn sample(&self, u: f64) -> i64 {
        let i = self.cumulative.partition_point(|c| *c <= u);
        if i == self.cumulative.len() {
            0
        } else {
            offset_at(i)
        }
    }
}

#[derive(Debug, Clone)]
pub enum Jumps {
    Lattice(TransitionKernel),
    Continuous(CGDensitySpec),
}

#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub model: ModelTag,
    pub alpha: f64,
    pub h: f64,
    pub t: f64,
    pub scaling: ScalingLaw,
    pub tau: f64,
    pub n: u64,
    pub num_samples: usize,
    pub seed: u64,
    pub jumps: Jumps,
}

fn steps_for(t: f64, tau: f64) -> Result<u64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositiveTime(t));
    }
    let n = (t / tau).round();
    if n < 1.0 {
        return Err(Error::ZeroSteps { t, tau });
    }
    Ok(n as u64)
}

impl WalkConfig {
    /// Lattice walk with the kernel's own scaling law.
    pub fn lattice(
        kernel: TransitionKernel,
        h: f64,
        t: f64,
        num_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        let law = kernel.scaling_law()?;
        Self::lattice_with_law(kernel, law, h, t, num_samples, seed)
    }

    /// Lattice walk with an explicit scaling law (e.g. a control run).
    pub fn lattice_with_law(
        kernel: TransitionKernel,
        scaling: ScalingLaw,
        h: f64,
        t: f64,
        num_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if num_samples == 0 {
            return Err(invalid("num_samples", "must be at least 1"));
        }
        let tau = scaling.tau(h)?;
        let n = steps_for(t, tau)?;
        Ok(Self {
            model: kernel.model(),
            alpha: kernel.alpha(),
            h,
            t,
            scaling,
            tau,
            n,
            num_samples,
            seed,
            jumps: Jumps::Lattice(kernel),
        })
    }

    /// Continuous-jump walk. Exact Cauchy jumps use tau = h.
    pub fn chechkin_gonchar(
        spec: CGDensitySpec,
        h: f64,
        t: f64,
        num_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if num_samples == 0 {
            return Err(invalid("num_samples", "must be at least 1"));
        }
        let scaling = spec.scaling_law()?;
        let tau = scaling.tau(h)?;
        let n = steps_for(t, tau)?;
        Ok(Self {
            model: ModelTag::ChechkinGonchar,
            alpha: spec.alpha,
            h,
            t,
            scaling,
            tau,
            n,
            num_samples,
            seed,
            jumps: Jumps::Continuous(spec),
        })
    }

    /// t_n = n tau, the time the samples actually represent.
    pub fn realized_t(&self) -> f64 {
        self.n as f64 * self.tau
    }

    pub fn to_json(&self) -> serde_json::Value {
        let jumps = match &self.jumps {
            Jumps::Lattice(k) => serde_json::json!({
                "kind": "lattice",
                "coeff": k.coeff(),
                "radius": k.radius(),
                "tail_mass": k.tail_mass(),
                "fingerprint": k.fingerprint(),
            }),
            Jumps::Continuous(s) => serde_json::to_value(s).unwrap_or_default(),
        };
        serde_json::json!({
            "model": self.model,
            "alpha": self.alpha,
            "h": self.h,
            "t": self.t,
            "tau": self.tau,
            "n": self.n,
            "realized_t": self.realized_t(),
            "scaling": self.scaling,
            "num_samples": self.num_samples,
            "seed": self.seed,
            "jumps": jumps,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub generator: String,
    pub seed: u64,
    /// Stream ids used, one per sample: first..=last.
    pub first_stream: u64,
    pub last_stream: u64,
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    pub config: WalkConfig,
    pub positions: Vec<f64>,
    pub rng_streams: StreamRecord,
}

/// Generator for sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

enum Stepper<'a> {
    Discrete(DiscreteSampler),
    Continuous(&'a CGDensitySpec),
}

impl Stepper<'_> {
    fn position(&self, rng: &mut ChaCha8Rng, n: u64, h: f64) -> f64 {
        match self {
            Stepper::Discrete(s) => {
                let mut sum: i64 = 0;
                for _ in 0..n {
                    let u: f64 = Standard.sample(rng);
                    sum += s.sample(u);
                }
                h * sum as f64
            }
            Stepper::Continuous(spec) => {
                let mut sum = 0.0;
                for _ in 0..n {
                    let u: f64 = Open01.sample(rng);
                    // u in (0, 1) so inversion cannot fail
                    sum += cg_inverse_cdf(spec, u).unwrap_or(0.0);
                }
                h * sum
            }
        }
    }
}

/// Terminal positions S_n = h (Y_1 + ... + Y_n) for every sample, using the
/// global thread pool when the `parallel` feature is on.
pub fn run_walks(config: &WalkConfig) -> SampleSet {
    let stepper = match &config.jumps {
        Jumps::Lattice(k) => Stepper::Discrete(DiscreteSampler::new(k)),
        Jumps::Continuous(s) => Stepper::Continuous(s),
    };
    let one = |i: usize| {
        let mut rng = sample_rng(config.seed, i as u64);
        stepper.position(&mut rng, config.n, config.h)
    };
    #[cfg(feature = "parallel")]
    let positions: Vec<f64> = {
        use rayon::prelude::*;
        (0..config.num_samples).into_par_iter().map(one).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let positions: Vec<f64> = (0..config.num_samples).map(one).collect();
    SampleSet {
        config: config.clone(),
        positions,
        rng_streams: StreamRecord {
            generator: GENERATOR.to_string(),
            seed: config.seed,
            first_stream: 0,
            last_stream: config.num_samples as u64 - 1,
        },
    }
}

/// [`run_walks`] on a dedicated pool of `threads` workers (1 = sequential).
pub fn run_walks_with_threads(config: &WalkConfig, threads: usize) -> Result<SampleSet> {
    crate::with_threads(Some(threads), || run_walks(config))
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn realized_t(&self) -> f64 {
        self.config.realized_t()
    }

    pub fn mean(&self) -> f64 {
        self.positions.iter().sum::<f64>() / self.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.positions.iter().map(|x| (x - m) * (x - m)).sum();
        ss / (self.len() as f64 - 1.0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 24 + 9);
        out.push_str("position\n");
        for x in &self.positions {
            out.push_str(&fmt_f64(*x));
            out.push('\n');
        }
        out
    }

    /// Little-endian f64 values, no header.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.positions
            .iter()
            .flat_map(|x| x.to_le_bytes())
            .collect()
    }

    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config.to_json(),
            "generator": self.rng_streams.generator,
            "rng_streams": self.rng_streams,
            "realized_t": self.realized_t(),
            "num_samples": self.len(),
        })
    }
}
