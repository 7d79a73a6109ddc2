//! Composite Gauss-Legendre quadrature on explicit breakpoints.

use std::sync::OnceLock;

/// Nodes per panel of the composite rule.
pub const GL_ORDER: usize = 16;

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], computed by
/// Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Integrates `f` over `[a, b]` with one 16-point panel.
pub fn panel<F: FnMut(f64) -> f64>(a: f64, b: f64, f: &mut F) -> f64 {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        acc += wi * f(mid + half * xi);
    }
    acc * half
}

/// Complex-valued variant of [`panel`], returning (re, im).
pub fn panel_complex<F: FnMut(f64) -> (f64, f64)>(a: f64, b: f64, f: &mut F) -> (f64, f64) {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let (mut re, mut im) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(w) {
        let (r, i) = f(mid + half * xi);
        re += wi * r;
        im += wi * i;
    }
    (re * half, im * half)
}

/// `panels` equal panels over `[a, b]`.
pub fn uniform<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, f: &mut F) -> f64 {
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == panels { b } else { lo + width };
            panel(lo, hi, f)
        })
        .sum()
}

/// Integrates over `[0, b]` with panels refined geometrically towards 0, for
/// integrands with an algebraic endpoint singularity or cusp at the origin.
pub fn graded_at_zero<F: FnMut(f64) -> f64>(b: f64, levels: usize, f: &mut F) -> f64 {
    let mut acc = 0.0;
    let mut hi = b;
    for _ in 0..levels {
        let lo = 0.5 * hi;
        acc += panel(lo, hi, f);
        hi = lo;
    }
    acc + panel(0.0, hi, f)
}
