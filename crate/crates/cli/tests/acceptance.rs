//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported but the process exits 0 so that the rest of
//! the workspace tests still run; set FRACWALK_ACCEPTANCE_STRICT=1 to turn any
//! FAIL into a nonzero exit.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fracwalk::diagnostics::{
    cf_convergence, gw_direct_ratio, ks_statistic, lattice_error, rho_integral, ScalingChoice,
    WalkModel,
};
use fracwalk::kernels::{
    build_kernel, coeff_bound, default_radius, default_tail_tol, gen_fn_closed, gl_kernel,
    series_gen_fn, CoeffName, ModelTag, SeriesTail,
};
use fracwalk::lattice::default_half_width;
use fracwalk::montecarlo::{run_walks, CGDensitySpec, CGVariant, WalkConfig};
use fracwalk::special::{b_coeff, c_coeff, riemann_zeta};
use fracwalk::stable::{cauchy_pdf, gauss_pdf, stable_density, QuadratureConfig, StableParams};
use fracwalk::LatticeState;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const GL_ALPHAS: [f64; 5] = [0.3, 0.5, 1.5, 1.9, 2.0];
const OTHER_ALPHAS: [f64; 6] = [0.3, 0.5, 1.0, 1.5, 1.9, 2.0];

/// (model, alpha, coefficient name) cells shared by criteria 2 and 4.
fn matrix() -> Vec<(ModelTag, f64, CoeffName)> {
    let mut m: Vec<_> = GL_ALPHAS
        .iter()
        .map(|&a| (ModelTag::GrunwaldLetnikov, a, CoeffName::Mu))
        .collect();
    for &a in &OTHER_ALPHAS {
        m.push((ModelTag::GillisWeiss, a, CoeffName::Lambda));
    }
    for &a in &OTHER_ALPHAS {
        m.push((ModelTag::GloballyBinomial, a, CoeffName::Mu));
    }
    m
}

fn c1_closed_forms() -> Outcome {
    let q = QuadratureConfig::default();
    let mut worst: f64 = 0.0;
    for &t in &[0.5, 1.0, 2.0] {
        for i in 0..201 {
            let x = -10.0 + 0.1 * i as f64;
            for (alpha, exact) in [(1.0, cauchy_pdf(x, t)), (2.0, gauss_pdf(x, t))] {
                let p = StableParams::new(alpha, t).unwrap();
                match stable_density(&p, x, &q) {
                    Ok(g) => worst = worst.max((g - exact).abs()),
                    Err(e) => return outcome(false, format!("alpha {alpha} t {t} x {x}: {e}")),
                }
            }
        }
    }
    outcome(
        worst < 1e-6,
        format!("max |g - closed form| = {worst:.2e} (tol 1e-6)"),
    )
}

fn c2_kernel_matrix() -> Outcome {
    let mut bad = Vec::new();
    for (model, alpha, name) in matrix() {
        let bound = coeff_bound(model, alpha, name).unwrap();
        let value = 0.9 * bound;
        let radius = default_radius(model, alpha, value, name, default_tail_tol(model)).unwrap();
        match build_kernel(model, alpha, name, value, radius) {
            Ok(k) => {
                let full = k.full();
                let symmetric = full.iter().all(|(j, p)| k.p(-j) == *p);
                let nonneg = k.one_sided().iter().all(|p| *p >= 0.0) && k.tail_mass() >= 0.0;
                let total = k.one_sided()[0]
                    + 2.0 * k.one_sided()[1..].iter().rev().sum::<f64>()
                    + k.tail_mass();
                if !symmetric || !nonneg || (total - 1.0).abs() > 1e-14 {
                    bad.push(format!(
                        "{model:?} a={alpha}: sym {symmetric} nonneg {nonneg} sum-1 {:.1e}",
                        total - 1.0
                    ));
                }
            }
            Err(e) => bad.push(format!("{model:?} a={alpha}: {e}")),
        }
        if build_kernel(model, alpha, name, 1.000001 * bound, 1).is_ok() {
            bad.push(format!("{model:?} a={alpha}: accepted 1.000001x bound"));
        }
    }
    if gl_kernel(1.0, 0.1, 4).is_ok() {
        bad.push("GL at alpha = 1 accepted".into());
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "17 cells valid, over-bound and GL alpha=1 rejected".to_string()
        } else {
            bad.join("; ")
        },
    )
}

fn c3_generating_functions() -> Outcome {
    let mut worst_excess = f64::NEG_INFINITY;
    let mut where_ = String::new();
    let cells = GL_ALPHAS
        .iter()
        .map(|&a| (ModelTag::GrunwaldLetnikov, a))
        .chain(
            OTHER_ALPHAS
                .iter()
                .map(|&a| (ModelTag::GloballyBinomial, a)),
        );
    for (model, alpha) in cells {
        let name = CoeffName::Mu;
        let value = 0.5 * coeff_bound(model, alpha, name).unwrap();
        let radius = default_radius(model, alpha, value, name, default_tail_tol(model)).unwrap();
        let k = build_kernel(model, alpha, name, value, radius).unwrap();
        let tol = k.tail_mass().max(1e-10);
        for i in 0..100 {
            let theta = -PI + 2.0 * PI * (i as f64 + 0.5) / 100.0;
            let closed = gen_fn_closed(&k, theta).unwrap();
            let series = series_gen_fn(&k, theta, SeriesTail::Dropped);
            let excess = (closed - series).abs() - tol;
            if excess > worst_excess {
                worst_excess = excess;
                where_ = format!("{model:?} a={alpha} theta={theta:.3}");
            }
        }
    }
    outcome(
        worst_excess <= 0.0,
        format!("worst |series - closed| - max(1e-10, tail) = {worst_excess:.2e} at {where_}"),
    )
}

fn c4_cf_convergence() -> Outcome {
    let hs: Vec<f64> = (3..=7).map(|e| 0.5f64.powi(e)).collect();
    let kappas = [0.5, 1.0, 2.0];
    let mut lines = Vec::new();
    let mut all = true;
    for (model, alpha, name) in matrix() {
        let coeff = 0.5 * coeff_bound(model, alpha, name).unwrap();
        let walk = WalkModel {
            model,
            alpha,
            coeff_name: name,
            coeff,
            scaling: ScalingChoice::Auto,
        };
        let (ok, msg) = match cf_convergence(&walk, &kappas, &hs, 1.0) {
            Ok(r) => {
                let c = r.check(0.02);
                let errs: Vec<String> = c
                    .max_errors
                    .iter()
                    .map(|e| e.map_or("-".into(), |e| format!("{e:.2e}")))
                    .collect();
                (c.pass(), format!("max errors [{}]", errs.join(", ")))
            }
            Err(e) => (false, e.to_string()),
        };
        all &= ok;
        lines.push(format!(
            "    {} {model:?} alpha={alpha}: {msg}",
            if ok { "ok  " } else { "FAIL" }
        ));
    }
    let lam = 0.5 * coeff_bound(ModelTag::GillisWeiss, 2.0, CoeffName::Lambda).unwrap();
    let naive = WalkModel {
        model: ModelTag::GillisWeiss,
        alpha: 2.0,
        coeff_name: CoeffName::Lambda,
        coeff: lam,
        scaling: ScalingChoice::Naive,
    };
    let floor = cf_convergence(&naive, &kappas, &hs, 1.0)
        .ok()
        .and_then(|r| r.max_errors().last().copied().flatten());
    let control = floor.is_some_and(|e| e > 0.01);
    all &= control;
    lines.push(format!(
        "    {} GW alpha=2 naive tau = lambda h^2 control: error at h=1/128 = {:?} (needs > 0.01)",
        if control { "ok  " } else { "FAIL" },
        floor
    ));
    outcome(all, format!("\n{}", lines.join("\n")))
}

fn lattice_l1(h: f64) -> f64 {
    let k = gl_kernel(2.0, 0.25, 1).unwrap();
    let tau = k.scaling_law().unwrap().tau(h).unwrap();
    let n = (1.0 / tau).round() as u64;
    let w = default_half_width(2.0, 1.0, h, 1);
    let mut s = LatticeState::init_delta(h, tau, (-w, w)).unwrap();
    s.evolve(&k, n);
    let target = StableParams::new(2.0, n as f64 * tau).unwrap();
    lattice_error(&s, &target).unwrap().l1
}

fn c5_lattice() -> Outcome {
    let e1 = lattice_l1(0.05);
    let e2 = lattice_l1(0.025);
    let ratio = e1 / e2;
    outcome(
        e1 < 0.02 && ratio >= 1.5,
        format!("l1(h=0.05) = {e1:.3e} (< 0.02), l1(0.05)/l1(0.025) = {ratio:.2} (>= 1.5)"),
    )
}

fn c6_variance() -> Outcome {
    let k = gl_kernel(2.0, 0.25, 1).unwrap();
    let c = WalkConfig::lattice(k, 0.1, 1.0, 100_000, 20240601).unwrap();
    let s = run_walks(&c);
    let v = s.variance();
    let target = 2.0 * s.realized_t();
    outcome(
        (v / target - 1.0).abs() <= 0.05,
        format!("sample variance {v:.4}, 2 t_n = {target:.4}"),
    )
}

fn c7_ks() -> Outcome {
    let n = 100_000;
    let bound = 1.95 / (n as f64).sqrt();
    let mut passes = 0;
    let mut parts = Vec::new();
    for seed in [1u64, 2, 3] {
        let spec = CGDensitySpec::new(CGVariant::ExactCauchy, 1.0).unwrap();
        let c = WalkConfig::chechkin_gonchar(spec, 0.1, 1.0, n, seed).unwrap();
        let s = run_walks(&c);
        let d = ks_statistic(&s, &StableParams::new(1.0, s.realized_t()).unwrap()).unwrap();
        if d <= bound {
            passes += 1;
        }
        parts.push(format!("{d:.4}"));
    }
    let a_ok = passes >= 2;
    let mut detail = format!(
        "(a) exact Cauchy D_N = [{}], bound {bound:.4}, {passes}/3 pass",
        parts.join(", ")
    );
    let mut b_ok = true;
    for alpha in [0.5, 1.0, 1.5] {
        let spec = CGDensitySpec::new(CGVariant::ShiftedPower, alpha).unwrap();
        let c = WalkConfig::chechkin_gonchar(spec, 0.02, 1.0, n, 11).unwrap();
        let s = run_walks(&c);
        let d = ks_statistic(&s, &StableParams::new(alpha, s.realized_t()).unwrap()).unwrap();
        b_ok &= d < 0.01;
        detail.push_str(&format!("; (b) shifted-power alpha={alpha} D_N = {d:.4}"));
    }
    outcome(a_ok && b_ok, detail)
}

fn c8_appendix() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for a in [0.5, 1.0, 1.5] {
        let r = rho_integral(a, 1e-4).unwrap() * 2.0 * (a * PI / 2.0).sin() / PI;
        ok &= (r - 1.0).abs() < 0.02;
        parts.push(format!("rho ratio a={a}: {r:.4}"));
    }
    let r2 = rho_integral(2.0, 1e-4).unwrap() / 1e4f64.ln();
    ok &= (0.85..=1.05).contains(&r2);
    parts.push(format!("rho/ln(1/nu) a=2: {r2:.4}"));
    for a in [0.5, 1.0, 1.5] {
        let g = gw_direct_ratio(a, 1e-3).unwrap();
        ok &= (g - 1.0).abs() < 0.05;
        parts.push(format!("GW ratio a={a}: {g:.4}"));
    }
    outcome(ok, parts.join(", "))
}

fn c9_constants() -> Outcome {
    let b1 = b_coeff(1.0).unwrap();
    let b2 = b_coeff(2.0).unwrap();
    let c1 = c_coeff(1.0).unwrap();
    let c2 = c_coeff(2.0).unwrap();
    let z = riemann_zeta(2.0).unwrap();
    let ok =
        b1 == 1.0 / PI && b2 == 0.0 && c2 == 1.0 && c1 == PI && (z - PI * PI / 6.0).abs() < 1e-12;
    outcome(
        ok,
        format!(
            "b(1)={b1}, b(2)={b2}, c(1)={c1}, c(2)={c2}, |zeta(2)-pi^2/6|={:.1e}",
            (z - PI * PI / 6.0).abs()
        ),
    )
}

fn run_sample(dir: &Path, name: &str, threads: &str) -> Result<Vec<u8>, String> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_fracwalk"))
        .args([
            "sample",
            "--model",
            "exact-cauchy",
            "--t",
            "1",
            "--samples",
            "20000",
            "--seed",
            "7",
        ])
        .args(["--threads", threads, "--out"])
        .arg(&out)
        .env_remove("FRACWALK_THREADS")
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("exit status {status}"));
    }
    std::fs::read(&out).map_err(|e| e.to_string())
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: Result<Vec<Vec<u8>>, String> = [
        ("a.csv", "1"),
        ("b.csv", "1"),
        ("c.csv", "4"),
        ("d.csv", "4"),
    ]
    .iter()
    .map(|(n, t)| run_sample(dir.path(), n, t))
    .collect();
    match runs {
        Ok(r) => {
            let same = r.windows(2).all(|w| w[0] == w[1]);
            outcome(
                same,
                format!("4 runs, {} bytes each, identical: {same}", r[0].len()),
            )
        }
        Err(e) => outcome(false, e),
    }
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "closed-form oracle equivalence",
            c1_closed_forms,
            Duration::from_secs(5),
        ),
        (
            "kernel validity matrix",
            c2_kernel_matrix,
            Duration::from_secs(5),
        ),
        (
            "generating-function cross-check",
            c3_generating_functions,
            Duration::from_secs(5),
        ),
        (
            "characteristic-function convergence",
            c4_cf_convergence,
            Duration::from_secs(120),
        ),
        ("lattice vs density", c5_lattice, Duration::from_secs(30)),
        (
            "Monte Carlo variance identity",
            c6_variance,
            Duration::from_secs(60),
        ),
        ("KS convergence", c7_ks, Duration::from_secs(180)),
        ("small-nu limits", c8_appendix, Duration::from_secs(30)),
        ("constants", c9_constants, Duration::from_secs(1)),
        ("determinism", c10_determinism, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let in_time = took <= *budget;
        let pass = o.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name} [{:.2}s / {}s budget{}] {}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            o.detail
        );
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 && std::env::var("FRACWALK_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
