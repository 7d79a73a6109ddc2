//! Random-walk approximations to symmetric space-fractional diffusion.
//!
//! The target is the symmetric stable law with characteristic function
//! exp(-t |kappa|^alpha), 0 < alpha <= 2. Four walks approximate it: the
//! Grünwald-Letnikov, Gillis-Weiss and globally binomial lattice walks, and
//! the Chechkin-Gonchar walk with continuous jumps.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod export;
pub mod kernels;
pub mod lattice;
pub mod montecarlo;
pub mod quadrature;
pub mod special;
pub mod stable;

pub use error::{Error, Result};
pub use kernels::{ModelTag, ScalingLaw, TransitionKernel};
pub use lattice::LatticeState;
pub use stable::{QuadratureConfig, StableParams};

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`. Without the `parallel` feature `f` simply runs.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| error::invalid("threads", e.to_string()))?;
        return Ok(pool.install(f));
    }
    let _ = threads;
    Ok(f())
}
