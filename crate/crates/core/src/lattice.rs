//! Redistribution scheme y_j(t_{n+1}) = sum_k p_k y_{j-k}(t_n) on a finite window.
//!
//! The window is absorbing with accounting: mass that would land outside it is
//! added to `boundary_loss` instead of being reflected or wrapped around.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::export::csv_table;
use crate::kernels::TransitionKernel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    h: f64,
    tau: f64,
    n: u64,
    j_min: i64,
    j_max: i64,
    values: Vec<f64>,
    boundary_loss: f64,
    initial_mass: f64,
    t0: f64,
}

fn check_steps(h: f64, tau: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    Ok(())
}

fn check_window(min: i64, max: i64) -> Result<()> {
    if min > max {
        return Err(Error::EmptyWindow { min, max });
    }
    Ok(())
}

/// Half-width that keeps the mass escaping a run to time t negligible:
/// ceil(10 t^{1/alpha} / h) + radius.
pub fn default_half_width(alpha: f64, t: f64, h: f64, radius: usize) -> i64 {
    (10.0 * t.powf(1.0 / alpha) / h).ceil() as i64 + radius as i64
}

impl LatticeState {
    /// Walker at the origin: y_0 = 1.
    pub fn init_delta(h: f64, tau: f64, window: (i64, i64)) -> Result<Self> {
        check_steps(h, tau)?;
        let (min, max) = window;
        check_window(min, max)?;
        if min > 0 || max < 0 {
            return Err(Error::WindowExcludesOrigin { min, max });
        }
        let mut values = vec![0.0; (max - min + 1) as usize];
        values[(-min) as usize] = 1.0;
        Ok(Self {
            h,
            tau,
            n: 0,
            j_min: min,
            j_max: max,
            values,
            boundary_loss: 0.0,
            initial_mass: 1.0,
            t0: 0.0,
        })
    }

    /// Cell masses y_j ~ h f(j h) (midpoint rule).
    pub fn init_from_density<F: Fn(f64) -> f64>(
        h: f64,
        tau: f64,
        window: (i64, i64),
        f: F,
    ) -> Result<Self> {
        check_steps(h, tau)?;
        let (min, max) = window;
        check_window(min, max)?;
        let mut values = Vec::with_capacity((max - min + 1) as usize);
        for j in min..=max {
            let x = j as f64 * h;
            let v = f(x);
            if !(v >= 0.0) {
                return Err(Error::NegativeDensity { x, value: v });
            }
            values.push(h * v);
        }
        Ok(Self::from_values(h, tau, min, values))
    }

    /// Exact cell masses y_j = F(x_j + h/2) - F(x_j - h/2) from a CDF.
    pub fn init_from_cdf<F: Fn(f64) -> f64>(
        h: f64,
        tau: f64,
        window: (i64, i64),
        cdf: F,
    ) -> Result<Self> {
        check_steps(h, tau)?;
        let (min, max) = window;
        check_window(min, max)?;
        let mut values = Vec::with_capacity((max - min + 1) as usize);
        let mut lower = cdf((min as f64 - 0.5) * h);
        for j in min..=max {
            let upper = cdf((j as f64 + 0.5) * h);
            let v = upper - lower;
            if v < -1e-15 {
                return Err(Error::NegativeDensity {
                    x: j as f64 * h,
                    value: v / h,
                });
            }
            values.push(v.max(0.0));
            lower = upper;
        }
        Ok(Self::from_values(h, tau, min, values))
    }

    fn from_values(h: f64, tau: f64, min: i64, values: Vec<f64>) -> Self {
        let initial_mass = values.iter().sum();
        let max = min + values.len() as i64 - 1;
        Self {
            h,
            tau,
            n: 0,
            j_min: min,
            j_max: max,
            values,
            boundary_loss: 0.0,
            initial_mass,
            t0: 0.0,
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Declares that the initial values represent time `t0` (default 0), e.g.
    /// when they were loaded from the target law itself.
    pub fn starting_at(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    /// t0 + n tau.
    pub fn time(&self) -> f64 {
        self.t0 + self.n as f64 * self.tau
    }

    pub fn window(&self) -> (i64, i64) {
        (self.j_min, self.j_max)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// y_j, zero outside the window.
    pub fn y(&self, j: i64) -> f64 {
        if j < self.j_min || j > self.j_max {
            0.0
        } else {
            self.values[(j - self.j_min) as usize]
        }
    }

    pub fn boundary_loss(&self) -> f64 {
        self.boundary_loss
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn initial_mass(&self) -> f64 {
        self.initial_mass
    }

    /// Applies the kernel `steps` times. The kernel tail is attributed to k = 0.
    pub fn evolve(&mut self, kernel: &TransitionKernel, steps: u64) {
        if steps == 0 {
            return;
        }
        let probs = kernel.one_sided();
        let p0 = kernel.p0_lumped();
        let len = self.values.len();
        let radius = kernel.radius().min(len.saturating_sub(1));
        let mut next = vec![0.0; len];
        for _ in 0..steps {
            let before: f64 = self.values.iter().sum();
            for (j, out) in next.iter_mut().enumerate() {
                let y = &self.values;
                let mut acc = p0 * y[j];
                let reach = radius.min(j.max(len - 1 - j));
                for k in 1..=reach {
                    let left = if k <= j { y[j - k] } else { 0.0 };
                    let right = if j + k < len { y[j + k] } else { 0.0 };
                    acc += probs[k] * (left + right);
                }
                *out = acc;
            }
            std::mem::swap(&mut self.values, &mut next);
            let after: f64 = self.values.iter().sum();
            self.boundary_loss += before - after;
        }
        self.n += steps;
    }

    /// Positions x_j = j h with density estimates y_j / h.
    pub fn lattice_profile(&self) -> Vec<(f64, f64)> {
        (self.j_min..=self.j_max)
            .zip(&self.values)
            .map(|(j, y)| (j as f64 * self.h, y / self.h))
            .collect()
    }

    pub fn profile_csv(&self) -> String {
        csv_table(
            &["x", "y_over_h"],
            self.lattice_profile().into_iter().map(|(x, y)| vec![x, y]),
        )
    }
}
