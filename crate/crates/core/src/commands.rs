//! The work behind each command-line subcommand, as plain functions of a
//! [`RunConfig`].

use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::backtest::{
    canonical_hash, run_backtest, write_stats_csv, write_terminal_csv, BacktestResult, RunManifest,
};
use crate::bs::{z_of_strike, MarketState};
use crate::bs_arb::{optimal_bs_spread, profit_split, universal_constants};
use crate::config::{RunConfig, StrikeMethod};
use crate::error::{Error, Result};
use crate::margin::{margin_scan, optimal_margin_spread, MarginOutcome};
use crate::model::{MarketModel, ModelHooks};
use crate::sabr::{perturbed_optimal_strikes, SabrParams};
use crate::two_strike::{optimal_two_strike, PricingHooks, SearchDomain, TwoStrikeSpread};

/// A CSV-ready table of formatted values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comma-separated, LF line endings, header first.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }
}

fn s<T: Display>(v: T) -> String {
    v.to_string()
}

fn method_name(m: StrikeMethod) -> &'static str {
    match m {
        StrikeMethod::ClosedForm => "closed_form",
        StrikeMethod::Numerical => "numerical",
        StrikeMethod::Perturbed => "perturbed",
    }
}

fn with_b_tilde(market: &MarketModel, b: f64) -> MarketModel {
    match market {
        MarketModel::BlackScholes => MarketModel::BlackScholes,
        MarketModel::Sabr(p) => MarketModel::Sabr(SabrParams::new(b, p.rho_tilde)),
    }
}

/// Vega-neutral unit spread on given strikes under `hooks`, reporting `profit`.
fn spread_on(
    hooks: &ModelHooks,
    state: &MarketState,
    tau: f64,
    k1: f64,
    k2: f64,
    profit: f64,
) -> Result<TwoStrikeSpread> {
    let (p1, p2) = (hooks.at(k1), hooks.at(k2));
    if !(p1.vega > 0.0 && p2.vega > 0.0) {
        return Err(Error::Model(format!("no positive vega at strikes {k1}, {k2}")));
    }
    let mut sp = TwoStrikeSpread::from_points(
        k1,
        k2,
        z_of_strike(state, k1, tau)?,
        z_of_strike(state, k2, tau)?,
        &p1,
        &p2,
        true,
    );
    sp.profit_rate = profit;
    Ok(sp)
}

/// One strike solution per method and market vol-of-vol.
pub fn strike_solution(cfg: &RunConfig, method: StrikeMethod, b_tilde: f64) -> Result<TwoStrikeSpread> {
    let (state, tau) = cfg.require_state()?;
    let market = with_b_tilde(&cfg.market, b_tilde);
    match method {
        StrikeMethod::ClosedForm => optimal_bs_spread(&state, &cfg.truth, tau),
        StrikeMethod::Numerical => {
            let hooks = ModelHooks::new(state, tau, cfg.truth, market);
            let domain = SearchDomain::new(state, tau)
                .with_z_range(-cfg.strikes.z_max, cfg.strikes.z_max)
                .with_grid_step(cfg.strikes.grid_step);
            optimal_two_strike(&hooks, &domain)
        }
        StrikeMethod::Perturbed => {
            let params = match market {
                MarketModel::Sabr(p) => p,
                MarketModel::BlackScholes => SabrParams::new(0.0, 0.0),
            };
            let terms = perturbed_optimal_strikes(&state, &cfg.truth, &params, tau)?;
            let [k1, k2] = terms.strikes();
            let hooks = ModelHooks::new(state, tau, cfg.truth, market);
            spread_on(&hooks, &state, tau, k1, k2, terms.objective.expanded(params.b_tilde))
        }
    }
}

/// Optimal strikes, weights, hedge and profit for each configured method.
pub fn cmd_strikes(cfg: &RunConfig) -> Result<Table> {
    let grid = match (&cfg.market, cfg.strikes.b_tilde_grid.is_empty()) {
        (MarketModel::Sabr(_), false) => cfg.strikes.b_tilde_grid.clone(),
        (m, _) => vec![m.b_tilde()],
    };
    let mut t = Table::new(&[
        "b_tilde",
        "method",
        "k1",
        "k2",
        "z1",
        "z2",
        "w1",
        "w2",
        "delta_hedge",
        "profit_rate",
        "arbitrage",
    ]);
    for &b in &grid {
        for &m in &cfg.strikes.methods {
            let sp = strike_solution(cfg, m, b)?;
            t.push(vec![
                s(b),
                s(method_name(m)),
                s(sp.k1),
                s(sp.k2),
                s(sp.z1),
                s(sp.z2),
                s(sp.w1),
                s(sp.w2),
                s(sp.delta_hedge),
                s(sp.profit_rate),
                s(sp.arbitrage),
            ]);
        }
    }
    Ok(t)
}

/// Optimal, risk-reversal and butterfly profits with the split bounds.
pub fn cmd_bf_rr(cfg: &RunConfig) -> Result<Table> {
    let (state, tau) = cfg.require_state()?;
    if cfg.market != MarketModel::BlackScholes {
        return Err(Error::config("market", "butterfly/risk-reversal analytics need a black_scholes market"));
    }
    let p = profit_split(&state, &cfg.truth, tau)?;
    let c = universal_constants();
    let mut t = Table::new(&[
        "p_opt", "p_rr", "p_bf", "alpha", "rr_slack", "bf_slack", "sum_slack", "z0", "x0", "k0",
    ]);
    t.push(vec![
        s(p.p_opt),
        s(p.p_rr),
        s(p.p_bf),
        s(p.alpha),
        s(p.rr_slack()),
        s(p.bf_slack()),
        s(p.sum_slack()),
        s(c.z0),
        s(c.x0),
        s(c.k0),
    ]);
    Ok(t)
}

pub struct MarginTables {
    pub summary: Table,
    pub scan: Table,
}

/// Margin-constrained optimum and the per-strike objective scan.
pub fn cmd_margin(cfg: &RunConfig) -> Result<MarginTables> {
    let (state, tau) = cfg.require_state()?;
    let hooks = ModelHooks::new(state, tau, cfg.truth, cfg.market);
    let domain = SearchDomain::new(state, tau)
        .with_z_range(-cfg.margin.z_max, cfg.margin.z_max)
        .with_grid_step(cfg.margin.grid_step);
    let params = cfg.margin.params();
    let outcome = optimal_margin_spread(&hooks, &params, &domain)?;
    let best = outcome.best();
    let mut summary = Table::new(&[
        "outcome",
        "k1",
        "k2",
        "z1",
        "z2",
        "w1",
        "w2",
        "beta_plus",
        "beta_minus",
        "margin_used",
        "delta_hedge",
        "profit_rate",
        "on_boundary",
    ]);
    let sp = &best.spread;
    summary.push(vec![
        s(match outcome {
            MarginOutcome::Interior(_) => "interior",
            MarginOutcome::Unbounded(_) => "unbounded",
        }),
        s(sp.k1),
        s(sp.k2),
        s(sp.z1),
        s(sp.z2),
        s(sp.w1),
        s(sp.w2),
        s(best.beta_plus),
        s(best.beta_minus),
        s(best.margin_used()),
        s(sp.delta_hedge),
        s(sp.profit_rate),
        s(best.on_boundary),
    ]);
    let mut scan = Table::new(&[
        "z",
        "strike",
        "price",
        "delta",
        "vega",
        "profit_density",
        "beta_plus",
        "beta_minus",
        "best_objective",
    ]);
    for r in margin_scan(&hooks, &params, &domain)? {
        scan.push(vec![
            s(r.z),
            s(r.strike),
            s(r.price),
            s(r.delta),
            s(r.vega),
            s(r.profit_density),
            s(r.beta_plus),
            s(r.beta_minus),
            s(r.best_objective),
        ]);
    }
    Ok(MarginTables { summary, scan })
}

#[derive(Debug, Clone, Serialize)]
pub struct BacktestFiles {
    pub stats: PathBuf,
    pub terminal: PathBuf,
    pub manifest: PathBuf,
}

/// Runs the backtest and writes `pnl.csv`, `terminal.csv` and
/// `manifest.json` into `out_dir`.
pub fn cmd_backtest(cfg: &RunConfig, out_dir: &Path) -> Result<(BacktestResult, BacktestFiles)> {
    let result = run_backtest(&cfg.truth, &cfg.market, &cfg.backtest)?;
    std::fs::create_dir_all(out_dir)?;
    let files = BacktestFiles {
        stats: out_dir.join("pnl.csv"),
        terminal: out_dir.join("terminal.csv"),
        manifest: out_dir.join("manifest.json"),
    };
    write_stats_csv(&files.stats, &result.stats)?;
    write_terminal_csv(&files.terminal, &result.terminal)?;
    let st = &result.stats;
    let last = st.len() - 1;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: "backtest".to_string(),
        config: serde_json::to_value(cfg).map_err(|e| Error::Io(e.to_string()))?,
        input_hash: canonical_hash(cfg)?,
        outputs: vec!["pnl.csv".into(), "terminal.csv".into()],
        summary: serde_json::json!({
            "terminal_q25": st.q25[last],
            "terminal_median": st.median[last],
            "terminal_q75": st.q75[last],
            "terminal_mean": st.mean[last],
            "terminal_standard_error": st.terminal_standard_error(),
            "total_trades": result.trades.iter().sum::<usize>(),
            "diagnostics": result.diagnostics,
        }),
    };
    manifest.write(&files.manifest)?;
    Ok((result, files))
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        Error::Domain(_)
        | Error::Model(_)
        | Error::Constraint(_)
        | Error::DegenerateCurvature(_)
        | Error::Pricing { .. } => EXIT_NUMERIC,
    }
}

/// Worker cap from `VOLARB_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("VOLARB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::config("VOLARB_THREADS", format!("expected a positive integer, got {v:?}"))),
        },
    }
}
