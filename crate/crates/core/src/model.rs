//! Real-world dynamics, market pricing models, and the profit density of a
//! delta- and vega-hedged option under misspecification.
//!
//! Both the true implied volatility and the SABR pricing model use lognormal
//! vol-of-vol: `dσ̃ = b σ̃ dW²`. The instantaneous (absolute) diffusion
//! coefficient of `σ̃` is therefore `b·σ̃`, which is what the closed-form
//! Black-Scholes-market analytics consume (see [`TrueDynamics::abs_vol_of_vol`]).

use serde::{Deserialize, Serialize};

use crate::bs::{self, Greeks, MarketState, OptionKind, OptionSpec};
use crate::error::{Error, Result};
use crate::sabr::{self, SabrParams};
use crate::two_strike::{HookPoint, PricingHooks};

/// Real-world parameters of the underlying and its implied volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrueDynamics {
    /// Drift of the underlying, per year.
    #[serde(default)]
    pub mu: f64,
    /// Spot volatility.
    pub sigma: f64,
    /// Lognormal vol-of-vol of the implied volatility.
    pub b: f64,
    /// Correlation between spot and volatility shocks.
    pub rho: f64,
}

impl TrueDynamics {
    pub fn new(mu: f64, sigma: f64, b: f64, rho: f64) -> Self {
        Self { mu, sigma, b, rho }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::domain("mu must be finite"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::domain(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::domain(format!("b must be non-negative, got {}", self.b)));
        }
        if !(self.rho.is_finite() && self.rho.abs() <= 1.0) {
            return Err(Error::domain(format!("rho must lie in [-1, 1], got {}", self.rho)));
        }
        Ok(())
    }

    /// Diffusion coefficient of `σ̃` itself when the implied volatility sits at `y`.
    pub fn abs_vol_of_vol(&self, y: f64) -> f64 {
        self.b * y
    }

    /// Same dynamics with the spot volatility replaced.
    pub fn with_sigma(self, sigma: f64) -> Self {
        Self { sigma, ..self }
    }
}

/// The model the options market prices with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarketModel {
    /// Black-Scholes at the current implied volatility (no vol-of-vol).
    BlackScholes,
    /// SABR with `β = 1`, priced through Hagan's implied-volatility expansion.
    Sabr(SabrParams),
}

impl MarketModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            MarketModel::BlackScholes => Ok(()),
            MarketModel::Sabr(p) => p.validate(),
        }
    }

    pub fn b_tilde(&self) -> f64 {
        match self {
            MarketModel::BlackScholes => 0.0,
            MarketModel::Sabr(p) => p.b_tilde,
        }
    }

    pub fn rho_tilde(&self) -> f64 {
        match self {
            MarketModel::BlackScholes => 0.0,
            MarketModel::Sabr(p) => p.rho_tilde,
        }
    }

    /// Implied volatility the market quotes for `strike` at maturity `tau`.
    pub fn implied_vol(&self, state: &MarketState, strike: f64, tau: f64) -> Result<f64> {
        match self {
            MarketModel::BlackScholes => Ok(state.y),
            MarketModel::Sabr(p) => sabr::hagan_implied_vol(state.spot, strike, state.y, p, tau),
        }
    }

    pub fn price(&self, state: &MarketState, opt: &OptionSpec) -> Result<f64> {
        let tau = state.tau(opt);
        if tau < bs::EXPIRY_EPS {
            return bs::bs_price(state, opt);
        }
        let vol = self.implied_vol(state, opt.strike, tau)?;
        bs::price(state.spot, opt.strike, vol, tau, opt.kind)
    }

    /// Price with the implied volatility shifted by `vol_shift` (used for bid/ask).
    pub fn price_shifted(&self, state: &MarketState, opt: &OptionSpec, vol_shift: f64) -> Result<f64> {
        let tau = state.tau(opt);
        if tau < bs::EXPIRY_EPS {
            return bs::bs_price(state, opt);
        }
        let vol = self.implied_vol(state, opt.strike, tau)? + vol_shift;
        if vol <= 0.0 {
            return Err(Error::domain(format!("shifted implied volatility {vol} is not positive")));
        }
        bs::price(state.spot, opt.strike, vol, tau, opt.kind)
    }

    /// Greeks with respect to spot and the instantaneous implied volatility.
    pub fn greeks(&self, state: &MarketState, opt: &OptionSpec) -> Result<Greeks> {
        match self {
            MarketModel::BlackScholes => bs::bs_greeks(state, opt),
            MarketModel::Sabr(p) => sabr::sabr_price_and_greeks(state, opt, p),
        }
    }
}

/// `(L - L̃)P` expressed through the option's greeks, with `σ̃ = state.y`.
pub fn profit_density_from_greeks(
    state: &MarketState,
    g: &Greeks,
    truth: &TrueDynamics,
    b_tilde: f64,
    rho_tilde: f64,
) -> f64 {
    let s = state.spot;
    let y = state.y;
    let gamma_coef = 0.5 * s * s * (truth.sigma * truth.sigma - y * y);
    let vomma_coef = 0.5 * (truth.b * truth.b - b_tilde * b_tilde) * y * y;
    let vanna_coef = s * (truth.sigma * y * truth.b * truth.rho - y * y * b_tilde * rho_tilde);
    gamma_coef * g.gamma + vomma_coef * g.vomma + vanna_coef * g.vanna
}

/// Instantaneous drift of one unit of `opt`, delta- and vega-hedged with
/// market-model ratios, when the world follows `truth`.
pub fn misspec_profit_density(
    state: &MarketState,
    opt: &OptionSpec,
    truth: &TrueDynamics,
    market: &MarketModel,
) -> Result<f64> {
    state.validate()?;
    truth.validate()?;
    market.validate()?;
    if state.tau(opt) <= 0.0 {
        return Err(Error::domain("profit density needs tau > 0"));
    }
    let g = market.greeks(state, opt)?;
    Ok(profit_density_from_greeks(
        state,
        &g,
        truth,
        market.b_tilde(),
        market.rho_tilde(),
    ))
}

/// Pricing hooks for calls of one maturity under a market model, with the
/// profit density taken against `truth`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelHooks {
    pub state: MarketState,
    pub tau: f64,
    pub truth: TrueDynamics,
    pub market: MarketModel,
}

impl ModelHooks {
    pub fn new(state: MarketState, tau: f64, truth: TrueDynamics, market: MarketModel) -> Self {
        Self {
            state,
            tau,
            truth,
            market,
        }
    }

    fn option(&self, strike: f64) -> OptionSpec {
        OptionSpec {
            strike,
            expiry: self.state.t + self.tau,
            kind: OptionKind::Call,
        }
    }

    pub fn greeks(&self, strike: f64) -> Result<Greeks> {
        self.market.greeks(&self.state, &self.option(strike))
    }
}

impl PricingHooks for ModelHooks {
    fn at(&self, strike: f64) -> HookPoint {
        match self.greeks(strike) {
            Ok(g) => HookPoint {
                vega: g.vega,
                profit: profit_density_from_greeks(
                    &self.state,
                    &g,
                    &self.truth,
                    self.market.b_tilde(),
                    self.market.rho_tilde(),
                ),
                price: g.price,
                delta: g.delta,
            },
            Err(_) => HookPoint::invalid(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_density(s: f64, k: f64, y: f64, tau: f64, truth: &TrueDynamics) -> f64 {
        // brute-force (L - L̃)P for a Black-Scholes market from price bumps only
        let p = |s: f64, y: f64| bs::price(s, k, y, tau, OptionKind::Call).unwrap();
        let hs = 1e-4 * s;
        let hy = 1e-4 * y;
        let pss = (p(s + hs, y) - 2.0 * p(s, y) + p(s - hs, y)) / (hs * hs);
        let pyy = (p(s, y + hy) - 2.0 * p(s, y) + p(s, y - hy)) / (hy * hy);
        let psy = (p(s + hs, y + hy) - p(s + hs, y - hy) - p(s - hs, y + hy) + p(s - hs, y - hy))
            / (4.0 * hs * hy);
        let by = truth.b * y;
        0.5 * s * s * (truth.sigma.powi(2) - y * y) * pss
            + 0.5 * by * by * pyy
            + s * truth.sigma * by * truth.rho * psy
    }

    #[test]
    fn zero_when_models_coincide() {
        let state = MarketState::new(1.0, 0.2, 0.0);
        let sabr = SabrParams::new(0.3, -0.4);
        let truth = TrueDynamics::new(0.0, 0.2, 0.3, -0.4);
        for k in [0.7, 1.0, 1.3] {
            let d = misspec_profit_density(&state, &OptionSpec::call(k, 0.5), &truth, &MarketModel::Sabr(sabr)).unwrap();
            assert_eq!(d, 0.0);
        }
        let flat = TrueDynamics::new(0.0, 0.2, 0.0, 0.3);
        let d = misspec_profit_density(&state, &OptionSpec::call(1.1, 0.5), &flat, &MarketModel::BlackScholes).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn matches_finite_difference_operator() {
        let state = MarketState::new(1.0, 0.2, 0.0);
        let truth = TrueDynamics::new(0.0, 0.2, 0.3, -0.3);
        let d = misspec_profit_density(&state, &OptionSpec::call(1.0, 1.0), &truth, &MarketModel::BlackScholes).unwrap();
        let fd = fd_density(1.0, 1.0, 0.2, 1.0, &truth);
        assert!((d - fd).abs() < 1e-6 * d.abs(), "{d} vs {fd}");

        let truth = TrueDynamics::new(0.0, 0.25, 0.6, 0.5);
        for k in [0.8, 0.95, 1.2] {
            let d = misspec_profit_density(&state, &OptionSpec::call(k, 0.4), &truth, &MarketModel::BlackScholes).unwrap();
            let fd = fd_density(1.0, k, 0.2, 0.4, &truth);
            assert!((d - fd).abs() < 1e-6 * d.abs().max(1e-3), "{k}: {d} vs {fd}");
        }
    }

    #[test]
    fn gamma_terms_cancel_in_vega_neutral_pair() {
        // Only the spot-vol mismatch differs between the two dynamics, so the
        // density is pure gamma, and a vega-neutral pair carries none of it.
        let state = MarketState::new(1.0, 0.2, 0.0);
        let truth = TrueDynamics::new(0.0, 0.3, 0.0, 0.0);
        let (k1, k2, tau) = (0.9, 1.15, 0.5);
        let g1 = bs::bs_greeks(&state, &OptionSpec::call(k1, tau)).unwrap();
        let g2 = bs::bs_greeks(&state, &OptionSpec::call(k2, tau)).unwrap();
        let w1 = g2.vega / (g1.vega + g2.vega);
        let w2 = g1.vega / (g1.vega + g2.vega);
        let f1 = misspec_profit_density(&state, &OptionSpec::call(k1, tau), &truth, &MarketModel::BlackScholes).unwrap();
        let f2 = misspec_profit_density(&state, &OptionSpec::call(k2, tau), &truth, &MarketModel::BlackScholes).unwrap();
        assert!(f1.abs() > 1e-3);
        assert!((w1 * f1 - w2 * f2).abs() < 1e-14);
    }

    #[test]
    fn rejects_expired_and_bad_parameters() {
        let state = MarketState::new(1.0, 0.2, 1.0);
        let truth = TrueDynamics::new(0.0, 0.2, 0.3, -0.3);
        assert!(misspec_profit_density(&state, &OptionSpec::call(1.0, 1.0), &truth, &MarketModel::BlackScholes).is_err());
        let bad = TrueDynamics::new(0.0, 0.2, 0.3, -1.5);
        let state = MarketState::new(1.0, 0.2, 0.0);
        assert!(misspec_profit_density(&state, &OptionSpec::call(1.0, 1.0), &bad, &MarketModel::BlackScholes).is_err());
    }
}
