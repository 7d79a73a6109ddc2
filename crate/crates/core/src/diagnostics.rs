//! Convergence diagnostics: characteristic-function error tables, KS distance
//! of Monte Carlo samples, lattice profile errors and the small-nu asymptotics
//! behind the Gillis-Weiss scaling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::export::fmt_f64;
use crate::kernels::{
    build_kernel, gen_fn_deficit, gw_lambda_bound, walk_char_fn, CoeffName, ModelTag, ScalingForm,
    ScalingLaw,
};
use crate::lattice::LatticeState;
use crate::montecarlo::SampleSet;
use crate::quadrature;
use crate::special::gamma;
use crate::stable::{
    cauchy_cdf, cauchy_pdf, char_fn, gauss_cdf, gauss_pdf, stable_cdf_rotated,
    stable_density_rotated, StableParams,
};

/// Which time-step coupling a convergence study uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingChoice {
    /// The model's own law (log-corrected for Gillis-Weiss at alpha = 2).
    Auto,
    /// tau = coeff h^alpha even where the model needs a log correction.
    Naive,
}

/// A lattice walk family indexed by h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkModel {
    pub model: ModelTag,
    pub alpha: f64,
    pub coeff_name: CoeffName,
    pub coeff: f64,
    pub scaling: ScalingChoice,
}

impl WalkModel {
    /// Scaling law for this family; `Naive` replaces a log-corrected law by
    /// tau = lambda h^2.
    pub fn scaling_law(&self) -> Result<ScalingLaw> {
        let kernel = build_kernel(self.model, self.alpha, self.coeff_name, self.coeff, 1)?;
        let law = kernel.scaling_law()?;
        Ok(match (self.scaling, law.form) {
            (ScalingChoice::Naive, ScalingForm::LogCorrected) => {
                ScalingLaw::power_law(self.model, self.alpha, law.coeff)?
            }
            _ => law,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub model: ModelTag,
    pub alpha: f64,
    pub t: f64,
    pub scaling: ScalingLaw,
    pub kappa_grid: Vec<f64>,
    pub h_sequence: Vec<f64>,
    /// Steps n = round(t / tau) per h.
    pub steps: Vec<Option<u64>>,
    /// Realized t_n = n tau per h.
    pub realized_t: Vec<Option<f64>>,
    /// errors[i][j] = |y^(kappa_i, t_n; h_j) - exp(-t_n |kappa_i|^alpha)|.
    pub errors: Vec<Vec<Option<f64>>>,
    /// Per-cell failure messages, parallel to `errors`.
    pub cell_errors: Vec<Vec<Option<String>>>,
    /// Empirical log-log slopes over the last three levels, per kappa.
    pub observed_rates: Vec<Option<f64>>,
}

/// Least-squares slope of log(err) against log(h) over the last three levels.
fn fitted_rate(h: &[f64], err: &[Option<f64>]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(err)
        .filter_map(|(h, e)| match e {
            Some(e) if *e > 0.0 => Some((h.ln(), e.ln())),
            _ => None,
        })
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let pts = &pts[pts.len().saturating_sub(3)..];
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

pub fn cf_convergence(
    walk: &WalkModel,
    kappa_grid: &[f64],
    h_sequence: &[f64],
    t: f64,
) -> Result<ConvergenceReport> {
    if h_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("h_sequence", "must be strictly decreasing"));
    }
    if !(t > 0.0) {
        return Err(Error::NonPositiveTime(t));
    }
    let kernel = build_kernel(walk.model, walk.alpha, walk.coeff_name, walk.coeff, 1)?;
    let law = walk.scaling_law()?;
    let target = StableParams::new(walk.alpha, t)?;
    let mut steps = Vec::new();
    let mut realized = Vec::new();
    let mut step_err = Vec::new();
    for &h in h_sequence {
        match law.tau(h) {
            Ok(tau) => {
                let n = (t / tau).round();
                if n < 1.0 {
                    steps.push(None);
                    realized.push(None);
                    step_err.push(Some(Error::ZeroSteps { t, tau }.to_string()));
                } else {
                    steps.push(Some(n as u64));
                    realized.push(Some(n * tau));
                    step_err.push(None);
                }
            }
            Err(e) => {
                steps.push(None);
                realized.push(None);
                step_err.push(Some(e.to_string()));
            }
        }
    }
    let cell = |kappa: f64, j: usize| -> (Option<f64>, Option<String>) {
        match (steps[j], realized[j]) {
            (Some(n), Some(tn)) => {
                let y = walk_char_fn(&kernel, h_sequence[j], n, kappa);
                let exact = char_fn(&target.at_time(tn).unwrap_or(target), kappa);
                (Some((y - exact).abs()), None)
            }
            _ => (None, step_err[j].clone()),
        }
    };
    let rows: Vec<Vec<(Option<f64>, Option<String>)>> = {
        let row = |kappa: &f64| {
            (0..h_sequence.len())
                .map(|j| cell(*kappa, j))
                .collect::<Vec<_>>()
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            kappa_grid.par_iter().map(row).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            kappa_grid.iter().map(row).collect()
        }
    };
    let errors: Vec<Vec<Option<f64>>> = rows
        .iter()
        .map(|r| r.iter().map(|c| c.0).collect())
        .collect();
    let cell_errors = rows
        .iter()
        .map(|r| r.iter().map(|c| c.1.clone()).collect())
        .collect();
    let observed_rates = errors.iter().map(|e| fitted_rate(h_sequence, e)).collect();
    Ok(ConvergenceReport {
        model: walk.model,
        alpha: walk.alpha,
        t,
        scaling: law,
        kappa_grid: kappa_grid.to_vec(),
        h_sequence: h_sequence.to_vec(),
        steps,
        realized_t: realized,
        errors,
        cell_errors,
        observed_rates,
    })
}

/// Outcome of checking a report against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCheck {
    /// Max over kappa of the error, per h.
    pub max_errors: Vec<Option<f64>>,
    pub monotone: bool,
    pub final_error: Option<f64>,
    pub within_tol: bool,
}

impl ConvergenceCheck {
    pub fn pass(&self) -> bool {
        self.monotone && self.within_tol
    }
}

impl ConvergenceReport {
    pub fn max_errors(&self) -> Vec<Option<f64>> {
        (0..self.h_sequence.len())
            .map(|j| {
                let mut m: Option<f64> = Some(0.0);
                for row in &self.errors {
                    m = match (m, row[j]) {
                        (Some(a), Some(b)) => Some(a.max(b)),
                        _ => None,
                    };
                }
                m
            })
            .collect()
    }

    /// Max-over-kappa error must strictly decrease at every refinement and end below `tol`.
    pub fn check(&self, tol: f64) -> ConvergenceCheck {
        let max_errors = self.max_errors();
        let monotone = max_errors.windows(2).all(|w| match (w[0], w[1]) {
            (Some(a), Some(b)) => b < a,
            _ => false,
        });
        let final_error = max_errors.last().copied().flatten();
        ConvergenceCheck {
            within_tol: final_error.is_some_and(|e| e < tol),
            max_errors,
            monotone,
            final_error,
        }
    }

    /// Error matrix: one row per kappa, one column per h (empty cell = failure).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kappa");
        for h in &self.h_sequence {
            out.push_str(&format!(",h={}", fmt_f64(*h)));
        }
        out.push('\n');
        for (k, row) in self.kappa_grid.iter().zip(&self.errors) {
            out.push_str(&fmt_f64(*k));
            for e in row {
                out.push(',');
                if let Some(e) = e {
                    out.push_str(&fmt_f64(*e));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// CDF of the target law, vectorised over points.
pub struct TargetCdf {
    params: StableParams,
    grid: Option<CdfGrid>,
}

/// Monotone piecewise-cubic table of G on x = s sinh(u), x >= 0.
struct CdfGrid {
    scale: f64,
    du: f64,
    u_max: f64,
    g: Vec<f64>,
    slope: Vec<f64>,
    interpolation_error: f64,
}

impl CdfGrid {
    fn build(params: &StableParams, x_max: f64) -> Self {
        let scale = params.t().powf(1.0 / params.alpha());
        let du = 0.02;
        let u_max = ((x_max / scale).asinh() + du).min(20.0);
        let m = (u_max / du).ceil() as usize + 1;
        let u_max = (m - 1) as f64 * du;
        let eval = |i: usize| {
            let u = i as f64 * du;
            let x = scale * u.sinh();
            // dG/du = g(x) dx/du
            (
                stable_cdf_rotated(params, x),
                stable_density_rotated(params, x) * scale * u.cosh(),
            )
        };
        let vals: Vec<(f64, f64)> = {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                (0..m).into_par_iter().map(eval).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                (0..m).map(eval).collect()
            }
        };
        let g: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let mut slope: Vec<f64> = vals.iter().map(|v| v.1).collect();
        // Fritsch-Carlson limiter keeps each cubic piece monotone.
        for i in 0..m - 1 {
            let delta = (g[i + 1] - g[i]) / du;
            if delta <= 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
                continue;
            }
            let a = slope[i] / delta;
            let b = slope[i + 1] / delta;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slope[i] = tau * a * delta;
                slope[i + 1] = tau * b * delta;
            }
        }
        let mut grid = Self {
            scale,
            du,
            u_max,
            g,
            slope,
            interpolation_error: 0.0,
        };
        let probes: Vec<usize> = (0..m - 1).step_by(7).collect();
        let err = probes
            .iter()
            .map(|&i| {
                let u = (i as f64 + 0.5) * du;
                let x = scale * u.sinh();
                (grid.interp(x).unwrap_or(0.0) - stable_cdf_rotated(params, x)).abs()
            })
            .fold(0.0, f64::max);
        grid.interpolation_error = err;
        grid
    }

    fn interp(&self, x: f64) -> Option<f64> {
        let u = (x / self.scale).asinh();
        if u > self.u_max {
            return None;
        }
        let pos = u / self.du;
        let i = (pos.floor() as usize).min(self.g.len() - 2);
        let s = pos - i as f64;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        Some(
            h00 * self.g[i]
                + h10 * self.du * self.slope[i]
                + h01 * self.g[i + 1]
                + h11 * self.du * self.slope[i + 1],
        )
    }
}

/// Number of points above which the target CDF is tabulated.
pub const KS_GRID_THRESHOLD: usize = 10_000;

impl TargetCdf {
    /// Direct evaluation.
    pub fn direct(params: StableParams) -> Self {
        Self { params, grid: None }
    }

    /// Tabulated on [0, x_max] when no closed form exists.
    pub fn tabulated(params: StableParams, x_max: f64) -> Self {
        let a = params.alpha();
        let grid = if a == 1.0 || a == 2.0 {
            None
        } else {
            Some(CdfGrid::build(&params, x_max))
        };
        Self { params, grid }
    }

    /// Reported interpolation error (0 without a table).
    pub fn interpolation_error(&self) -> f64 {
        self.grid.as_ref().map_or(0.0, |g| g.interpolation_error)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = &self.params;
        match p.alpha() {
            1.0 => cauchy_cdf(x, p.t()),
            2.0 => gauss_cdf(x, p.t()),
            _ => {
                let ax = x.abs();
                let g = self
                    .grid
                    .as_ref()
                    .and_then(|g| g.interp(ax))
                    .unwrap_or_else(|| stable_cdf_rotated(p, ax));
                if x < 0.0 {
                    1.0 - g
                } else {
                    g
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub d: f64,
    pub n: usize,
    /// Error bound of the tabulated target CDF (0 when evaluated directly).
    pub interpolation_error: f64,
}

/// sup_x |F_N(x) - G(x)| evaluated on both sides of every jump of F_N.
pub fn ks_from_positions(positions: &[f64], target: &StableParams) -> Result<KsReport> {
    if positions.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut xs = positions.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    let cdf = if n > KS_GRID_THRESHOLD {
        let x_max = xs[0].abs().max(xs[n - 1].abs());
        TargetCdf::tabulated(*target, x_max)
    } else {
        TargetCdf::direct(*target)
    };
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let g = cdf.eval(*x);
        d = d.max((i as f64 + 1.0) / nf - g).max(g - i as f64 / nf);
    }
    Ok(KsReport {
        d,
        n,
        interpolation_error: cdf.interpolation_error(),
    })
}

fn check_time(target: f64, realized: f64) -> Result<()> {
    if (target - realized).abs() > 1e-9 * target.abs().max(1.0) {
        return Err(Error::TimeMismatch { target, realized });
    }
    Ok(())
}

pub fn ks_report(samples: &SampleSet, target: &StableParams) -> Result<KsReport> {
    check_time(target.t(), samples.realized_t())?;
    if target.alpha() != samples.config.alpha {
        return Err(invalid(
            "target",
            format!(
                "alpha {} differs from the walk's {}",
                target.alpha(),
                samples.config.alpha
            ),
        ));
    }
    ks_from_positions(&samples.positions, target)
}

/// KS distance of the samples from the stable law at the samples' realized time.
pub fn ks_statistic(samples: &SampleSet, target: &StableParams) -> Result<f64> {
    Ok(ks_report(samples, target)?.d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeError {
    /// sum_j |y_j - int_cell g|
    pub l1: f64,
    /// max_j |y_j / h - g(x_j)|
    pub linf: f64,
}

pub fn lattice_error(state: &LatticeState, target: &StableParams) -> Result<LatticeError> {
    let tn = state.time();
    if !(tn > 0.0) {
        return Err(Error::NonPositiveTime(tn));
    }
    check_time(target.t(), tn)?;
    let (a, t) = (target.alpha(), target.t());
    let cdf = |x: f64| match a {
        1.0 => cauchy_cdf(x, t),
        2.0 => gauss_cdf(x, t),
        _ => stable_cdf_rotated(target, x),
    };
    let pdf = |x: f64| match a {
        1.0 => cauchy_pdf(x, t),
        2.0 => gauss_pdf(x, t),
        _ => stable_density_rotated(target, x),
    };
    let h = state.h();
    let (min, max) = state.window();
    let mut l1 = 0.0;
    let mut linf: f64 = 0.0;
    let mut lower = cdf((min as f64 - 0.5) * h);
    let mut inside = 0.0;
    for j in min..=max {
        let upper = cdf((j as f64 + 0.5) * h);
        let cell = upper - lower;
        lower = upper;
        inside += cell;
        let y = state.y(j);
        l1 += (y - cell).abs();
        linf = linf.max((y / h - pdf(j as f64 * h)).abs());
    }
    // target mass outside the window counts as error as well
    l1 += (1.0 - inside).max(0.0);
    Ok(LatticeError { l1, linf })
}

/// rho(nu) = int_0^inf w^{alpha-1} e^{-nu w} / (w^2 + 1) dw.
///
/// Split at w = 1. On [0, 1] the substitution w = s^{1/alpha} removes the
/// endpoint singularity when alpha < 1; [1, inf) is mapped to (0, 1] by
/// w = 1/v, which turns the slowly decaying tail into an integral over (0, 1]
/// with geometrically graded panels at v = 0.
pub fn rho_integral(alpha: f64, nu: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(invalid("nu", format!("must be nonnegative, got {nu}")));
    }
    if nu == 0.0 && alpha == 2.0 {
        return Err(Error::Divergent("rho(0) at alpha = 2"));
    }
    let head = if alpha < 1.0 {
        let mut f = |s: f64| {
            let w = s.powf(1.0 / alpha);
            (-nu * w).exp() / (w * w + 1.0) / alpha
        };
        quadrature::graded_at_zero(1.0, 60, &mut f)
    } else {
        let mut f = |w: f64| w.powf(alpha - 1.0) * (-nu * w).exp() / (w * w + 1.0);
        quadrature::graded_at_zero(1.0, 60, &mut f)
    };
    // int_0^1 v^{1-alpha} e^{-nu/v} / (1 + v^2) dv; for alpha < 2 the
    // substitution v = s^{1/(2-alpha)} absorbs the power.
    let levels = if nu == 0.0 {
        60
    } else {
        (50.0 / nu).log2().ceil().max(0.0) as usize + 12
    };
    let tail = if alpha < 2.0 {
        let e = 1.0 / (2.0 - alpha);
        let mut g = |s: f64| {
            let v = s.powf(e);
            if v == 0.0 {
                return if nu == 0.0 { e } else { 0.0 };
            }
            e * (-nu / v).exp() / (1.0 + v * v)
        };
        quadrature::graded_at_zero(1.0, levels, &mut g)
    } else {
        let mut g = |v: f64| {
            if v == 0.0 {
                0.0
            } else {
                (-nu / v).exp() / (v * (1.0 + v * v))
            }
        };
        quadrature::graded_at_zero(1.0, levels, &mut g)
    };
    Ok(head + tail)
}

/// q(beta) = int_0^inf x^beta / (x^2 + 1) dx = pi / (2 cos(beta pi / 2)), |beta| < 1.
pub fn q_beta(beta: f64) -> Result<f64> {
    if !(beta.abs() < 1.0) {
        return Err(Error::Divergent("q(beta) needs |beta| < 1"));
    }
    Ok(PI / (2.0 * (beta * PI / 2.0).cos()))
}

/// Limit of rho(nu) as nu -> 0 for alpha < 2.
pub fn rho_limit(alpha: f64) -> f64 {
    PI / (2.0 * (alpha * PI / 2.0).sin())
}

/// pi / (Gamma(alpha+1) sin(alpha pi/2)); 1 - p~(e^{i nu}) ~ lambda c nu^alpha for Gillis-Weiss.
pub fn gw_small_nu_constant(alpha: f64) -> f64 {
    PI / (gamma(alpha + 1.0) * (alpha * PI / 2.0).sin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixRow {
    pub alpha: f64,
    pub nu: f64,
    pub rho: f64,
    /// rho / (pi / (2 sin(alpha pi/2))) for alpha < 2, rho / ln(1/nu) at alpha = 2.
    pub rho_ratio: f64,
    /// [1 - p~(e^{i nu})] / (lambda c nu^alpha), or / (lambda nu^2 ln(1/nu)) at alpha = 2.
    pub gw_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppendixReport {
    pub rows: Vec<AppendixRow>,
    /// Per alpha: |rho_ratio - 1| is nonincreasing over the last three nu.
    pub tail_monotone: Vec<(f64, bool)>,
}

impl AppendixReport {
    pub fn to_csv(&self) -> String {
        crate::export::csv_table(
            &["alpha", "nu", "rho", "rho_ratio", "gw_ratio"],
            self.rows
                .iter()
                .map(|r| vec![r.alpha, r.nu, r.rho, r.rho_ratio, r.gw_ratio]),
        )
    }
}

/// Gillis-Weiss deficit ratio at nu, with lambda at half its bound (the ratio
/// does not depend on lambda).
pub fn gw_direct_ratio(alpha: f64, nu: f64) -> Result<f64> {
    let lambda = 0.5 * gw_lambda_bound(alpha)?;
    let k = build_kernel(ModelTag::GillisWeiss, alpha, CoeffName::Lambda, lambda, 1)?;
    let d = gen_fn_deficit(&k, nu);
    Ok(if alpha == 2.0 {
        d / (lambda * nu * nu * (1.0 / nu).ln())
    } else {
        d / (lambda * gw_small_nu_constant(alpha) * nu.powf(alpha))
    })
}

pub fn appendix_limits_check(alpha_grid: &[f64], nu_sequence: &[f64]) -> Result<AppendixReport> {
    if nu_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("nu_sequence", "must decrease towards 0"));
    }
    let mut rows = Vec::new();
    let mut tail_monotone = Vec::new();
    for &alpha in alpha_grid {
        let mut devs = Vec::new();
        for &nu in nu_sequence {
            let rho = rho_integral(alpha, nu)?;
            let rho_ratio = if alpha == 2.0 {
                rho / (1.0 / nu).ln()
            } else {
                rho / rho_limit(alpha)
            };
            devs.push((rho_ratio - 1.0).abs());
            rows.push(AppendixRow {
                alpha,
                nu,
                rho,
                rho_ratio,
                gw_ratio: gw_direct_ratio(alpha, nu)?,
            });
        }
        let tail = &devs[devs.len().saturating_sub(3)..];
        tail_monotone.push((alpha, tail.windows(2).all(|w| w[1] <= w[0])));
    }
    Ok(AppendixReport {
        rows,
        tail_monotone,
    })
}
