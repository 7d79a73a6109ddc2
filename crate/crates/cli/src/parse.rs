//! Flag value parsers.

use serde::Serialize;

/// A parsed list of reals (a newtype so clap treats it as one value).
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Reals(pub Vec<f64>);

/// Parses a decimal or an exact rational "p/q" (one correctly rounded division).
pub fn real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in {s:?}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            p / q
        }
        None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
    };
    if !v.is_finite() {
        return Err(format!("not finite: {s:?}"));
    }
    Ok(v)
}

/// Comma-separated list of reals, each accepting the rational form.
pub fn real_list(s: &str) -> Result<Reals, String> {
    let out: Result<Vec<f64>, String> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(real)
        .collect();
    let out = out?;
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(Reals(out))
}

/// A lattice window: either a half-width "N" or "MIN:MAX".
pub fn window(s: &str) -> Result<(i64, i64), String> {
    match s.split_once(':') {
        Some((a, b)) => {
            let a = a
                .trim()
                .parse()
                .map_err(|_| format!("bad window start in {s:?}"))?;
            let b = b
                .trim()
                .parse()
                .map_err(|_| format!("bad window end in {s:?}"))?;
            Ok((a, b))
        }
        None => {
            let n: i64 = s
                .trim()
                .parse()
                .map_err(|_| format!("bad window half-width {s:?}"))?;
            if n < 0 {
                return Err("half-width must be nonnegative".into());
            }
            Ok((-n, n))
        }
    }
}

/// "a,b,n": n equally spaced points from a to b inclusive.
pub fn range(s: &str) -> Result<Reals, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected START,END,COUNT, got {s:?}"));
    }
    let a = real(parts[0])?;
    let b = real(parts[1])?;
    let n: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| format!("bad count in {s:?}"))?;
    match n {
        0 => Err("count must be positive".into()),
        1 => Ok(Reals(vec![a])),
        _ => Ok(Reals(
            (0..n)
                .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
                .collect(),
        )),
    }
}
