use rayon::prelude::*;
use serde::Serialize;

use super::paths::{rebalance_times, simulate_path};
use super::stats::{pnl_quantiles, PnlStats};
use super::{BacktestConfig, SearchConfig, Strategy};
use crate::bs::{strike_of_z, MarketState, OptionSpec};
use crate::bs_arb::{optimal_bs_spread_on, rr_buys_low_delta, universal_constants};
use crate::error::{Error, Result};
use crate::model::{MarketModel, ModelHooks, TrueDynamics};
use crate::optim::{Grid, NelderMeadOptions};
use crate::sabr::perturbed_optimal_strikes;
use crate::two_strike::{optimal_two_strike_with, SearchDomain, TwoStrikeSpread};

/// A call position; negative quantity is short.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Leg {
    pub strike: f64,
    pub quantity: f64,
}

/// The option book a strategy wants to hold at one date.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Target {
    /// Empty when the strategy sees no arbitrage.
    pub legs: Vec<Leg>,
    /// Instantaneous profit the trader expects, per year.
    pub profit_rate: f64,
}

fn market_vega(state: &MarketState, market: &MarketModel, strike: f64, tenor: f64) -> Result<f64> {
    let g = market.greeks(state, &OptionSpec::call(strike, state.t + tenor))?;
    if g.vega.is_nan() || g.vega <= 0.0 {
        return Err(Error::Model(format!("non-positive vega at strike {strike}")));
    }
    Ok(g.vega)
}

/// Long `k1`, short `k2`, sized for unit total variation and zero market vega.
fn vega_neutral_pair(state: &MarketState, market: &MarketModel, tenor: f64, k1: f64, k2: f64) -> Result<Vec<Leg>> {
    let g1 = market_vega(state, market, k1, tenor)?;
    let g2 = market_vega(state, market, k2, tenor)?;
    Ok(vec![
        Leg {
            strike: k1,
            quantity: g2 / (g1 + g2),
        },
        Leg {
            strike: k2,
            quantity: -g1 / (g1 + g2),
        },
    ])
}

fn from_spread(s: TwoStrikeSpread) -> Target {
    if !s.arbitrage {
        return Target {
            legs: Vec::new(),
            profit_rate: 0.0,
        };
    }
    Target {
        legs: vec![
            Leg {
                strike: s.k1,
                quantity: s.w1,
            },
            Leg {
                strike: s.k2,
                quantity: -s.w2,
            },
        ],
        profit_rate: s.profit_rate,
    }
}

fn optimal(
    state: &MarketState,
    trader: &TrueDynamics,
    market: &MarketModel,
    tenor: f64,
    search: &SearchConfig,
) -> Result<Target> {
    let polish = NelderMeadOptions {
        initial_step: search.grid_step,
        x_tol: search.x_tol,
        ..NelderMeadOptions::default()
    };
    let spread = match market {
        MarketModel::BlackScholes if trader.b > 0.0 => optimal_bs_spread_on(
            state,
            trader,
            tenor,
            Grid::new(-search.z_max, search.z_max, search.grid_step),
            polish,
        )?,
        _ => {
            let hooks = ModelHooks::new(*state, tenor, *trader, *market);
            let domain = SearchDomain::new(*state, tenor)
                .with_z_range(-search.z_max, search.z_max)
                .with_grid_step(search.grid_step);
            optimal_two_strike_with(&hooks, &domain, polish)?
        }
    };
    Ok(from_spread(spread))
}

/// Option book the strategy selects at `state`, sized for unit total
/// variation and zero vega under the market model.
///
/// Butterfly and risk-reversal legs sit at fixed `z` positions computed from
/// the market's implied volatility; their weights are re-solved against
/// market vegas, which reproduces the universal weights in a Black-Scholes
/// market.
pub fn target_portfolio(
    state: &MarketState,
    trader: &TrueDynamics,
    market: &MarketModel,
    strategy: Strategy,
    tenor: f64,
    search: &SearchConfig,
) -> Result<Target> {
    match (strategy, market) {
        (Strategy::Optimal, _) | (Strategy::PerturbedSabr, MarketModel::BlackScholes) => {
            optimal(state, trader, market, tenor, search)
        }
        (Strategy::PerturbedSabr, MarketModel::Sabr(params)) => {
            let terms = perturbed_optimal_strikes(state, trader, params, tenor)?;
            let [k1, k2] = terms.strikes();
            if !(k1 > 0.0 && k2 > 0.0) {
                return Err(Error::Model(format!("perturbed strikes {k1}, {k2} are not positive")));
            }
            let legs = vega_neutral_pair(state, market, tenor, k1, k2)?;
            let profit_rate = terms.objective.expanded(params.b_tilde);
            Ok(Target { legs, profit_rate })
        }
        (Strategy::RiskReversal, _) => {
            let (lo, hi) = (strike_of_z(state, 1.0, tenor)?, strike_of_z(state, -1.0, tenor)?);
            let (long, short) = if rr_buys_low_delta(state, trader, tenor) { (hi, lo) } else { (lo, hi) };
            let legs = vega_neutral_pair(state, market, tenor, long, short)?;
            let hooks = ModelHooks::new(*state, tenor, *trader, *market);
            Ok(Target {
                profit_rate: book_profit(&hooks, &legs),
                legs,
            })
        }
        (Strategy::Butterfly, _) => {
            let z0 = universal_constants().z0;
            let wing_lo = strike_of_z(state, z0, tenor)?;
            let body = strike_of_z(state, 0.0, tenor)?;
            let wing_hi = strike_of_z(state, -z0, tenor)?;
            let g_lo = market_vega(state, market, wing_lo, tenor)?;
            let g0 = market_vega(state, market, body, tenor)?;
            let g_hi = market_vega(state, market, wing_hi, tenor)?;
            let wing = g0 / (2.0 * g0 + g_lo + g_hi);
            let legs = vec![
                Leg {
                    strike: wing_lo,
                    quantity: wing,
                },
                Leg {
                    strike: body,
                    quantity: -(1.0 - 2.0 * wing),
                },
                Leg {
                    strike: wing_hi,
                    quantity: wing,
                },
            ];
            let hooks = ModelHooks::new(*state, tenor, *trader, *market);
            Ok(Target {
                profit_rate: book_profit(&hooks, &legs),
                legs,
            })
        }
    }
}

fn book_profit(hooks: &ModelHooks, legs: &[Leg]) -> f64 {
    use crate::two_strike::PricingHooks;
    legs.iter().map(|l| l.quantity * hooks.profit_density(l.strike)).sum()
}

/// Worst-case checks collected over all paths and dates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    /// Largest change of portfolio value caused by rebalancing itself,
    /// without bid-ask costs.
    pub max_rebalance_residual: f64,
    /// Largest `|Σ q·vega| / Σ |q|·vega` of a freshly bought book.
    pub max_vega_residual: f64,
    /// Largest `|Σ|q| − 1|` of a freshly bought book.
    pub max_tv_residual: f64,
    /// Rebalance dates at which the strategy held no options.
    pub idle_dates: usize,
}

impl Diagnostics {
    fn merge(self, o: Diagnostics) -> Diagnostics {
        Diagnostics {
            max_rebalance_residual: self.max_rebalance_residual.max(o.max_rebalance_residual),
            max_vega_residual: self.max_vega_residual.max(o.max_vega_residual),
            max_tv_residual: self.max_tv_residual.max(o.max_tv_residual),
            idle_dates: self.idle_dates + o.idle_dates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestResult {
    pub stats: PnlStats,
    /// Terminal P&L per path, in path order.
    pub terminal: Vec<f64>,
    /// Option transactions per path.
    pub trades: Vec<usize>,
    pub diagnostics: Diagnostics,
}

struct PathOutcome {
    values: Vec<f64>,
    trades: usize,
    diagnostics: Diagnostics,
}

struct Held {
    opt: OptionSpec,
    quantity: f64,
}

fn run_path(
    truth: &TrueDynamics,
    market: &MarketModel,
    config: &BacktestConfig,
    times: &[f64],
    index: usize,
) -> Result<PathOutcome> {
    let path = simulate_path(truth, config.spot0, config.sigma0, config, index);
    let trader_base = config.trader_params.unwrap_or(*truth);
    let h = config.vol_spread;
    let n = config.n_rebalance;

    let mut cash = 0.0;
    let mut stock = 0.0;
    let mut book: Vec<Held> = Vec::new();
    let mut values = Vec::with_capacity(n + 1);
    let mut trades = 0;
    let mut diag = Diagnostics::default();

    for (i, &t) in times.iter().enumerate() {
        let wrap = |e: Error| Error::Pricing {
            path: index,
            date: i,
            source: Box::new(e),
        };
        let spot = path.spot[i];
        let state = MarketState::new(spot, config.implied_vol_ratio * path.vol[i], t);
        // price paid (buy) or received (sell) for one option
        let trade_price = |opt: &OptionSpec, buy: bool| -> Result<f64> {
            if h == 0.0 {
                market.price(&state, opt)
            } else {
                market.price_shifted(&state, opt, if buy { h } else { -h })
            }
        };

        let mut before = cash + stock * spot;
        for held in &book {
            before += held.quantity * market.price(&state, &held.opt).map_err(wrap)?;
        }

        for held in book.drain(..) {
            let px = trade_price(&held.opt, held.quantity < 0.0).map_err(wrap)?;
            cash += held.quantity * px;
            trades += 1;
        }

        let after;
        if i < n {
            let mut book_mid = 0.0;
            let trader = trader_base.with_sigma(path.vol[i]);
            let target = target_portfolio(&state, &trader, market, config.strategy, config.option_tenor, &config.search)
                .map_err(wrap)?;
            if target.legs.is_empty() {
                diag.idle_dates += 1;
            }
            let (mut net_delta, mut net_vega, mut gross_vega, mut tv) = (0.0, 0.0, 0.0, 0.0);
            for leg in &target.legs {
                let opt = OptionSpec::call(leg.strike, t + config.option_tenor);
                let g = market.greeks(&state, &opt).map_err(wrap)?;
                let px = trade_price(&opt, leg.quantity > 0.0).map_err(wrap)?;
                cash -= leg.quantity * px;
                book_mid += leg.quantity * g.price;
                net_delta += leg.quantity * g.delta;
                net_vega += leg.quantity * g.vega;
                gross_vega += leg.quantity.abs() * g.vega;
                tv += leg.quantity.abs();
                trades += 1;
                book.push(Held {
                    opt,
                    quantity: leg.quantity,
                });
            }
            if !target.legs.is_empty() {
                diag.max_vega_residual = diag.max_vega_residual.max(net_vega.abs() / gross_vega);
                diag.max_tv_residual = diag.max_tv_residual.max((tv - 1.0).abs());
            }
            let new_stock = -net_delta;
            cash -= (new_stock - stock) * spot;
            stock = new_stock;
            after = cash + stock * spot + book_mid;
        } else {
            cash += stock * spot;
            stock = 0.0;
            after = cash;
        }
        if h == 0.0 {
            diag.max_rebalance_residual = diag.max_rebalance_residual.max((after - before).abs());
        }
        values.push(after);
    }
    Ok(PathOutcome {
        values,
        trades,
        diagnostics: diag,
    })
}

/// Simulates `config.n_paths` paths of `truth` and trades the configured
/// strategy against `market`. Paths run in parallel on the current rayon
/// pool; results do not depend on the number of threads.
///
/// The spot volatility field of `truth` (and of the trader's parameters) is
/// replaced by the simulated volatility at each date, starting from
/// `config.sigma0`.
pub fn run_backtest(truth: &TrueDynamics, market: &MarketModel, config: &BacktestConfig) -> Result<BacktestResult> {
    truth.validate()?;
    market.validate()?;
    config.validate()?;
    let times = rebalance_times(config);
    let outcomes: Vec<PathOutcome> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| run_path(truth, market, config, &times, i))
        .collect::<Result<_>>()?;

    let series: Vec<Vec<f64>> = outcomes.iter().map(|o| o.values.clone()).collect();
    let stats = pnl_quantiles(&times, &series)?;
    let diagnostics = outcomes
        .iter()
        .fold(Diagnostics::default(), |acc, o| acc.merge(o.diagnostics));
    Ok(BacktestResult {
        stats,
        terminal: outcomes.iter().map(|o| *o.values.last().expect("non-empty")).collect(),
        trades: outcomes.iter().map(|o| o.trades).collect(),
        diagnostics,
    })
}
