//! Optimal option-spread arbitrage against a misspecified stochastic
//! volatility pricing model.

pub mod bs;
pub mod backtest;
pub mod bs_arb;
pub mod commands;
pub mod config;
pub mod error;
pub mod margin;
pub mod model;
pub mod normal;
pub mod optim;
pub mod sabr;
pub mod two_strike;

pub use bs::{bs_greeks, bs_price, Greeks, MarketState, OptionKind, OptionSpec};
pub use error::{Error, Result};
pub use model::{misspec_profit_density, MarketModel, ModelHooks, TrueDynamics};
pub use sabr::SabrParams;
pub use two_strike::{
    measure_profit, objective_f, optimal_two_strike, Atom, PricingHooks, SearchDomain, SignedStrikeMeasure,
    TwoStrikeSpread,
};
