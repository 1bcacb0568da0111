//! Real-world paths of the underlying and its volatility.
//!
//! `σ` is advanced with its exact lognormal solution; `log S` with an Euler
//! step that uses the volatility at the start of each substep. The spot shock
//! is `√(1−ρ²)·Z¹ + ρ·Z²` with `Z²` the volatility shock.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::BacktestConfig;
use crate::error::Result;
use crate::model::TrueDynamics;

/// One path sampled at the rebalance dates.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub spot: Vec<f64>,
    pub vol: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub times: Vec<f64>,
    pub paths: Vec<Path>,
}

/// `0, T/n, …, T`.
pub fn rebalance_times(config: &BacktestConfig) -> Vec<f64> {
    let n = config.n_rebalance;
    (0..=n).map(|i| config.horizon * i as f64 / n as f64).collect()
}

/// Generator for path `index`: the seed picks the key, the index the stream.
pub fn path_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn simulate_path(truth: &TrueDynamics, s0: f64, sigma0: f64, config: &BacktestConfig, index: usize) -> Path {
    let mut rng = path_rng(config.seed, index);
    let n = config.n_rebalance;
    let m = config.n_substeps;
    let dt = config.horizon / (n * m) as f64;
    let sq = dt.sqrt();
    let rho_perp = (1.0 - truth.rho * truth.rho).max(0.0).sqrt();
    let vol_drift = -0.5 * truth.b * truth.b * dt;

    let mut spot = Vec::with_capacity(n + 1);
    let mut vol = Vec::with_capacity(n + 1);
    let (mut log_s, mut sigma) = (s0.ln(), sigma0);
    spot.push(s0);
    vol.push(sigma0);
    for _ in 0..n {
        for _ in 0..m {
            let z1: f64 = StandardNormal.sample(&mut rng);
            let z2: f64 = StandardNormal.sample(&mut rng);
            log_s += (truth.mu - 0.5 * sigma * sigma) * dt + sigma * sq * (rho_perp * z1 + truth.rho * z2);
            sigma *= (vol_drift + truth.b * sq * z2).exp();
        }
        spot.push(log_s.exp());
        vol.push(sigma);
    }
    Path { spot, vol }
}

/// All paths of a run, in parallel; identical for any thread count.
pub fn simulate_paths(truth: &TrueDynamics, s0: f64, sigma0: f64, config: &BacktestConfig) -> Result<PathSet> {
    truth.validate()?;
    config.validate()?;
    let paths = (0..config.n_paths)
        .into_par_iter()
        .map(|i| simulate_path(truth, s0, sigma0, config, i))
        .collect();
    Ok(PathSet {
        times: rebalance_times(config),
        paths,
    })
}
