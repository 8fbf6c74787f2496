//! Seeded, index-addressable sampling and the data-parallel map used by every
//! sampled check.
//!
//! Sample `i` is drawn from its own ChaCha stream (`seed`, stream `i`), so the
//! value of a sample never depends on evaluation order. Sample `i` lives in the
//! ball of radius `radius / 2^(i mod SCALE_LEVELS)`, so features near the origin
//! are probed as densely as the far field. With the `parallel`
//! feature the per-sample work runs on rayon; results are collected in index
//! order and reduced sequentially, which keeps outputs bit-identical to the
//! sequential path.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PAIRS: usize = 1000;
pub const DEFAULT_RADIUS: f64 = 10.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Number of dyadic radius levels cycled through by sample index.
pub const SCALE_LEVELS: u64 = 8;

/// How indexed work is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_pairs: usize,
    /// Samples are uniform in the centered ball of this radius.
    pub radius: f64,
    pub tolerance: f64,
    pub execution: Execution,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: DEFAULT_SEED,
            n_pairs: DEFAULT_PAIRS,
            radius: DEFAULT_RADIUS,
            tolerance: DEFAULT_TOLERANCE,
            execution: Execution::default(),
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_pairs == 0 {
            return Err(Error::InvalidArgument("n_pairs must be >= 1".into()));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidArgument("radius must be positive".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::InvalidArgument("tolerance must be nonnegative".into()));
        }
        Ok(())
    }

    /// Generator for sample `index`, independent of every other index.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// Uniform point in the centered ball of `radius` in R^dim.
pub fn uniform_in_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> DVector<f64> {
    loop {
        let g = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 1e-300 {
            let r: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
            return g * (radius * r / n);
        }
    }
}

/// Sampling radius for sample `index`; level 0 is the configured radius.
pub fn sample_radius(cfg: &SamplerConfig, index: u64) -> f64 {
    cfg.radius / (1u64 << (index % SCALE_LEVELS)) as f64
}

/// Independent pair `(x, y)` for sample `index`, both at the same scale.
pub fn sample_pair(cfg: &SamplerConfig, dim: usize, index: u64) -> (DVector<f64>, DVector<f64>) {
    let mut rng = cfg.rng(index);
    let radius = sample_radius(cfg, index);
    let x = uniform_in_ball(&mut rng, dim, radius);
    let y = uniform_in_ball(&mut rng, dim, radius);
    (x, y)
}

/// Single point for sample `index`.
pub fn sample_point(cfg: &SamplerConfig, dim: usize, index: u64) -> DVector<f64> {
    uniform_in_ball(&mut cfg.rng(index), dim, sample_radius(cfg, index))
}

/// `(0..n).map(f)` collected in index order, on rayon when available.
pub fn map_indexed<T, F>(execution: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution {
        Execution::Sequential => (0..n).map(f).collect(),
        Execution::Parallel => par_map(n, f),
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Index and value of the smallest element; the first index wins ties.
pub fn argmin(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .copied()
        .enumerate()
        .fold(None, |best, (i, v)| match best {
            // keeps the first index on ties; a NaN never displaces a number
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            Some((_, b)) if !(v < b) => best,
            _ => Some((i, v)),
        })
}
