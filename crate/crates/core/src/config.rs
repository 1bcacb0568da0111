//! The JSON run configuration shared by all command-line subcommands.

use serde::{Deserialize, Serialize};

use crate::backtest::BacktestConfig;
use crate::bs::MarketState;
use crate::error::{Error, Result};
use crate::margin::MarginParams;
use crate::model::{MarketModel, TrueDynamics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrikeMethod {
    /// Black-Scholes-market closed form (ignores the market's vol-of-vol).
    ClosedForm,
    /// Grid and Nelder-Mead search on the market model's own greeks.
    Numerical,
    /// Closed form plus the first-order SABR correction.
    Perturbed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrikesConfig {
    pub methods: Vec<StrikeMethod>,
    /// Market vol-of-vol values to tabulate; the market's own when empty.
    pub b_tilde_grid: Vec<f64>,
    pub z_max: f64,
    pub grid_step: f64,
}

impl Default for StrikesConfig {
    fn default() -> Self {
        Self {
            methods: vec![StrikeMethod::ClosedForm, StrikeMethod::Numerical, StrikeMethod::Perturbed],
            b_tilde_grid: Vec::new(),
            z_max: 8.0,
            grid_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarginConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub z_max: f64,
    pub grid_step: f64,
}

impl Default for MarginConfig {
    fn default() -> Self {
        let p = MarginParams::default();
        Self {
            alpha: p.alpha,
            beta: p.beta,
            gamma: p.gamma,
            z_max: 6.0,
            grid_step: 0.05,
        }
    }
}

impl MarginConfig {
    pub fn params(&self) -> MarginParams {
        MarginParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
        }
    }
}

fn black_scholes() -> MarketModel {
    MarketModel::BlackScholes
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub truth: TrueDynamics,
    #[serde(default = "black_scholes")]
    pub market: MarketModel,
    /// Needed by the analytic commands.
    #[serde(default)]
    pub state: Option<MarketState>,
    /// Time to maturity for the analytic commands, years.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub strikes: StrikesConfig,
    #[serde(default)]
    pub margin: MarginConfig,
    #[serde(default)]
    pub backtest: BacktestConfig,
    /// Output directory.
    #[serde(default)]
    pub out: Option<String>,
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::Config { field, message } => Error::config(format!("{prefix}.{field}"), message),
        other => Error::config(prefix, other.to_string()),
    }
}

impl RunConfig {
    /// Parses and validates; errors carry the JSON path of the bad field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let field = if path == "." { "<root>".to_string() } else { path };
            Error::config(field, format!("{inner}"))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.truth.validate().map_err(|e| prefixed("truth", e))?;
        self.market.validate().map_err(|e| prefixed("market", e))?;
        if let Some(s) = &self.state {
            s.validate().map_err(|e| prefixed("state", e))?;
        }
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::config("tau", format!("must be positive, got {tau}")));
            }
        }
        let st = &self.strikes;
        if let Some(b) = st.b_tilde_grid.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::config("strikes.b_tilde_grid", format!("invalid vol-of-vol {b}")));
        }
        if !(st.z_max > 0.0 && st.grid_step > 0.0 && st.grid_step <= st.z_max) {
            return Err(Error::config("strikes.grid_step", "needs 0 < grid_step <= z_max"));
        }
        let m = &self.margin;
        m.params().validate().map_err(|e| prefixed("margin", e))?;
        if !(m.z_max > 0.0 && m.grid_step > 0.0 && m.grid_step <= m.z_max) {
            return Err(Error::config("margin.grid_step", "needs 0 < grid_step <= z_max"));
        }
        self.backtest.validate().map_err(|e| prefixed("backtest", e))?;
        Ok(())
    }

    pub fn require_state(&self) -> Result<(MarketState, f64)> {
        let state = self.state.ok_or_else(|| Error::config("state", "required by this command"))?;
        let tau = self.tau.ok_or_else(|| Error::config("tau", "required by this command"))?;
        Ok((state, tau))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_json(r#"{"truth": {"sigma": 0.2, "b": 0.3, "rho": -0.3}}"#).unwrap();
        assert_eq!(cfg.market, MarketModel::BlackScholes);
        assert_eq!(cfg.backtest.n_paths, 1000);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let err = RunConfig::from_json(
            r#"{"truth": {"sigma": 0.2, "b": 0.3, "rho": -0.3}, "backtest": {"n_path": 3}}"#,
        )
        .unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "backtest.n_path"),
            e => panic!("{e}"),
        }
        let err = RunConfig::from_json(
            r#"{"truth": {"sigma": 0.2, "b": 0.3, "rho": -0.3},
                "market": {"model": "sabr", "b_tilde": 0.1, "rho_tilde": -0.2, "beta": 1}}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config { .. }), "{err}");
    }

    #[test]
    fn semantic_errors_name_their_field() {
        let err = RunConfig::from_json(
            r#"{"truth": {"sigma": 0.2, "b": 0.3, "rho": -0.3}, "backtest": {"n_rebalance": 4}}"#,
        )
        .unwrap_err();
        match err {
            Error::Config { field, .. } => assert_eq!(field, "backtest.option_tenor"),
            e => panic!("{e}"),
        }
        let err = RunConfig::from_json(r#"{"truth": {"sigma": 0.2, "b": 0.3, "rho": -3}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "truth"), "{err}");
    }
}
