//! Monte-Carlo backtest of the rebalanced spread strategies.
//!
//! At every rebalance date the whole option book is sold back to the market,
//! a fresh spread of options with fixed time to maturity is bought at the
//! strikes the strategy selects, and the stock position is reset to the
//! market-model delta. Cash earns nothing.

mod engine;
mod paths;
mod report;
mod stats;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TrueDynamics;

pub use engine::{run_backtest, target_portfolio, BacktestResult, Diagnostics, Leg, Target};
pub use paths::{path_rng, rebalance_times, simulate_path, simulate_paths, Path, PathSet};
pub use report::{canonical_hash, write_stats_csv, write_terminal_csv, RunManifest};
pub use stats::{mean_stdev, pnl_quantiles, quantile, PnlStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Two-strike optimum of the full objective.
    Optimal,
    /// Three-leg butterfly with wings at `z = ±z₀`.
    Butterfly,
    /// Two legs at `z = ±1`.
    RiskReversal,
    /// First-order SABR correction of the Black-Scholes optimum.
    PerturbedSabr,
}

/// Strike search used by the numerical strategies at each rebalance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig {
    /// Strikes are searched over `z ∈ [−z_max, z_max]`.
    pub z_max: f64,
    pub grid_step: f64,
    /// Nelder-Mead stopping diameter in `z`.
    pub x_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            z_max: 4.0,
            grid_step: 0.1,
            x_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BacktestConfig {
    pub n_paths: usize,
    /// Years.
    pub horizon: f64,
    /// Rebalance dates per horizon.
    pub n_rebalance: usize,
    /// SDE steps per rebalance interval.
    pub n_substeps: usize,
    /// Time to maturity of the options bought at each rebalance, years.
    pub option_tenor: f64,
    pub strategy: Strategy,
    /// Implied-volatility half-spread paid on every option trade.
    pub vol_spread: f64,
    pub seed: u64,
    pub spot0: f64,
    pub sigma0: f64,
    /// Parameters the trader optimizes with; the true ones when absent.
    pub trader_params: Option<TrueDynamics>,
    /// Market implied volatility as a multiple of the true spot volatility.
    pub implied_vol_ratio: f64,
    pub search: SearchConfig,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            n_paths: 1000,
            horizon: 1.0,
            n_rebalance: 64,
            n_substeps: 8,
            option_tenor: 1.0 / 12.0,
            strategy: Strategy::Optimal,
            vol_spread: 0.0,
            seed: 0,
            spot0: 100.0,
            sigma0: 0.1,
            trader_params: None,
            implied_vol_ratio: 1.0,
            search: SearchConfig::default(),
        }
    }
}

impl BacktestConfig {
    /// Checks every field; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(name, format!("must be positive, got {v}")))
            }
        };
        if self.n_paths < 2 {
            return Err(Error::config("n_paths", "need at least two paths"));
        }
        if self.n_rebalance == 0 {
            return Err(Error::config("n_rebalance", "must be at least one"));
        }
        if self.n_substeps == 0 {
            return Err(Error::config("n_substeps", "must be at least one"));
        }
        positive("horizon", self.horizon)?;
        positive("option_tenor", self.option_tenor)?;
        positive("spot0", self.spot0)?;
        positive("sigma0", self.sigma0)?;
        positive("implied_vol_ratio", self.implied_vol_ratio)?;
        positive("search.z_max", self.search.z_max)?;
        positive("search.grid_step", self.search.grid_step)?;
        positive("search.x_tol", self.search.x_tol)?;
        if self.search.grid_step > self.search.z_max {
            return Err(Error::config("search.grid_step", "larger than the search half-width"));
        }
        if self.option_tenor <= self.horizon / self.n_rebalance as f64 {
            return Err(Error::config(
                "option_tenor",
                "options must outlive the rebalance interval",
            ));
        }
        if !(self.vol_spread.is_finite() && self.vol_spread >= 0.0) {
            return Err(Error::config("vol_spread", "must be non-negative"));
        }
        if let Some(t) = &self.trader_params {
            t.validate().map_err(|e| Error::config("trader_params", e.to_string()))?;
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.n_rebalance as f64
    }
}
