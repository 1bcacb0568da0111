//! Retail (CBOE-style) margin and the spread that maximizes profit per unit
//! of margin instead of per unit of total position.
//!
//! A naked short call needs `P + λ` with `λ = max(αS − (K − S)⁺·1{K>S}, βS)`.
//! For a delta-hedged position the capital consumed per unit is
//!
//! ```text
//! long:  β⁺ = P + Δ(1 + γ)S
//! short: β⁻ = (λ + P)(1 − Δ) + γSΔ
//! ```
//!
//! and the two-strike objective becomes
//! `G = (g₂f₁ − g₁f₂) / (β⁻(K₂)g₁ + β⁺(K₁)g₂)`.
//! In a Black-Scholes market `G` grows without bound as the long strike goes
//! to infinity, which [`optimal_margin_spread`] reports as
//! [`MarginOutcome::Unbounded`].
//!
//! Only the two-option form is solved here. Capping both the position size
//! and the margin generally leads to a three-option portfolio; that case is
//! left to callers, who can combine [`margin_weights`] with
//! [`crate::two_strike::measure_profit`] on their own measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{grid_argmax, nelder_mead_max, NelderMeadOptions};
use crate::two_strike::{HookPoint, PricingHooks, SearchDomain, TwoStrikeSpread};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginParams {
    pub alpha: f64,
    pub beta: f64,
    /// Margin on the stock, as a fraction of spot.
    pub gamma: f64,
}

impl Default for MarginParams {
    fn default() -> Self {
        Self {
            alpha: 0.15,
            beta: 0.1,
            gamma: 0.5,
        }
    }
}

impl MarginParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::domain(format!("margin {name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }

    /// `λ = max(αS − (K − S)·1{K>S}, βS)`.
    pub fn lambda(&self, spot: f64, strike: f64) -> f64 {
        let otm = if strike > spot { strike - spot } else { 0.0 };
        (self.alpha * spot - otm).max(self.beta * spot)
    }
}

/// Margin for one naked short call: `P + λ`.
pub fn naked_short_margin(spot: f64, strike: f64, price: f64, params: &MarginParams) -> f64 {
    price + params.lambda(spot, strike)
}

/// Capital consumed per unit long (`plus`) or short (`minus`) hedged call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginWeights {
    pub plus: f64,
    pub minus: f64,
}

pub fn margin_weights(spot: f64, strike: f64, point: &HookPoint, params: &MarginParams) -> MarginWeights {
    let (p, d) = (point.price, point.delta);
    MarginWeights {
        plus: p + d * (1.0 + params.gamma) * spot,
        minus: (params.lambda(spot, strike) + p) * (1.0 - d) + params.gamma * spot * d,
    }
}

/// A margin-normalized spread: `w₁β⁺(K₁) + w₂β⁻(K₂) = 1`, `w₁g₁ = w₂g₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginSpread {
    pub spread: TwoStrikeSpread,
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// Either leg sits on the edge of the search domain.
    pub on_boundary: bool,
}

impl MarginSpread {
    pub fn margin_used(&self) -> f64 {
        self.spread.w1 * self.beta_plus + self.spread.w2 * self.beta_minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MarginOutcome {
    Interior(MarginSpread),
    /// The objective is still increasing at the highest strike; the spread
    /// is the best found inside the domain.
    Unbounded(MarginSpread),
}

impl MarginOutcome {
    pub fn best(&self) -> &MarginSpread {
        match self {
            MarginOutcome::Interior(s) | MarginOutcome::Unbounded(s) => s,
        }
    }

    pub fn is_unbounded(&self) -> bool {
        matches!(self, MarginOutcome::Unbounded(_))
    }
}

struct Leg {
    point: HookPoint,
    weights: MarginWeights,
}

fn margin_objective(long: &Leg, short: &Leg) -> f64 {
    let (g1, g2) = (long.point.vega, short.point.vega);
    (g2 * long.point.profit - g1 * short.point.profit) / (short.weights.minus * g1 + long.weights.plus * g2)
}

fn build(spot: f64, strike: f64, z: f64, hooks: &(impl PricingHooks + ?Sized), params: &MarginParams) -> Result<(Leg, f64, f64)> {
    let point = hooks.at(strike);
    if !(point.vega > 0.0 && point.profit.is_finite() && point.price.is_finite()) {
        return Err(Error::Model(format!("invalid pricing at strike {strike}")));
    }
    let weights = margin_weights(spot, strike, &point, params);
    Ok((Leg { point, weights }, strike, z))
}

/// Maximizes `G` over the domain: grid scan, unboundedness check on the two
/// highest strikes, then Nelder-Mead polish for interior solutions.
pub fn optimal_margin_spread<H: PricingHooks + ?Sized>(
    hooks: &H,
    params: &MarginParams,
    domain: &SearchDomain,
) -> Result<MarginOutcome> {
    params.validate()?;
    domain.validate()?;
    let spot = domain.state.spot;
    let zs = domain.grid();
    let legs: Vec<Leg> = zs
        .iter()
        .map(|&z| build(spot, domain.strike(z), z, hooks, params).map(|l| l.0))
        .collect::<Result<_>>()?;

    let coarse = grid_argmax(&zs, |i, j| margin_objective(&legs[i], &legs[j]));
    let n = zs.len();
    let edge = |i: usize| i == 0 || i == n - 1;

    // highest strikes are at the low end of z
    let best_long = |i: usize| {
        (0..n)
            .map(|j| margin_objective(&legs[i], &legs[j]))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let unbounded = n >= 2 && best_long(0) > best_long(1);

    let finish = |z1: f64, z2: f64| -> Result<MarginSpread> {
        let (l1, k1, _) = build(spot, domain.strike(z1), z1, hooks, params)?;
        let (l2, k2, _) = build(spot, domain.strike(z2), z2, hooks, params)?;
        let value = margin_objective(&l1, &l2);
        let arbitrage = value > 0.0;
        let denom = l1.weights.plus * l2.point.vega + l2.weights.minus * l1.point.vega;
        let w1 = l2.point.vega / denom;
        let w2 = l1.point.vega / denom;
        Ok(MarginSpread {
            spread: TwoStrikeSpread {
                k1,
                k2,
                w1,
                w2,
                z1,
                z2,
                delta_hedge: w1 * l1.point.delta - w2 * l2.point.delta,
                profit_rate: if arbitrage { value } else { 0.0 },
                arbitrage,
            },
            beta_plus: l1.weights.plus,
            beta_minus: l2.weights.minus,
            on_boundary: false,
        })
    };

    if unbounded || coarse.value <= 0.0 || edge(coarse.i) || edge(coarse.j) {
        let mut s = finish(coarse.x, coarse.y)?;
        s.on_boundary = edge(coarse.i) || edge(coarse.j);
        return Ok(if unbounded {
            MarginOutcome::Unbounded(s)
        } else {
            MarginOutcome::Interior(s)
        });
    }

    let objective = |p: [f64; 2]| {
        match (
            build(spot, domain.strike(p[0]), p[0], hooks, params),
            build(spot, domain.strike(p[1]), p[1], hooks, params),
        ) {
            (Ok(a), Ok(b)) => margin_objective(&a.0, &b.0),
            _ => f64::NAN,
        }
    };
    let opts = NelderMeadOptions {
        initial_step: domain.grid_step,
        ..NelderMeadOptions::default()
    };
    let (p, v) = nelder_mead_max(objective, [coarse.x, coarse.y], domain.z_lo, domain.z_hi, opts);
    let (z1, z2) = if v >= coarse.value { (p[0], p[1]) } else { (coarse.x, coarse.y) };
    let mut s = finish(z1, z2)?;
    s.on_boundary = [z1, z2].iter().any(|&z| z <= domain.z_lo || z >= domain.z_hi);
    Ok(MarginOutcome::Interior(s))
}

/// One row of the objective scan: a candidate long strike and the best
/// short strike for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginScanRow {
    pub z: f64,
    pub strike: f64,
    pub price: f64,
    pub delta: f64,
    pub vega: f64,
    pub profit_density: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// `max over K₂` of the objective with this strike long.
    pub best_objective: f64,
}

/// Per-strike margin weights and best objective over the domain grid.
pub fn margin_scan<H: PricingHooks + ?Sized>(
    hooks: &H,
    params: &MarginParams,
    domain: &SearchDomain,
) -> Result<Vec<MarginScanRow>> {
    params.validate()?;
    domain.validate()?;
    let spot = domain.state.spot;
    let zs = domain.grid();
    let legs: Vec<(Leg, f64, f64)> = zs
        .iter()
        .map(|&z| build(spot, domain.strike(z), z, hooks, params))
        .collect::<Result<_>>()?;
    Ok(legs
        .iter()
        .map(|(l, k, z)| MarginScanRow {
            z: *z,
            strike: *k,
            price: l.point.price,
            delta: l.point.delta,
            vega: l.point.vega,
            profit_density: l.point.profit,
            beta_plus: l.weights.plus,
            beta_minus: l.weights.minus,
            best_objective: legs
                .iter()
                .map(|(s, _, _)| margin_objective(l, s))
                .fold(f64::NEG_INFINITY, f64::max),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_cases() {
        let m = MarginParams::default();
        assert_eq!(m.lambda(100.0, 90.0), 15.0);
        assert_eq!(m.lambda(100.0, 100.0), 15.0);
        assert_eq!(m.lambda(100.0, 200.0), 10.0);
        assert!((m.lambda(100.0, 108.0) - 10.0).abs() < 1e-12);
        assert!((naked_short_margin(100.0, 108.0, 1.0, &m) - 11.0).abs() < 1e-12);
    }

    #[test]
    fn weight_limits() {
        let m = MarginParams::default();
        let otm = HookPoint {
            vega: 1e-9,
            profit: 0.0,
            price: 0.0,
            delta: 0.0,
        };
        assert_eq!(margin_weights(100.0, 300.0, &otm, &m).plus, 0.0);
        let itm = HookPoint {
            vega: 1e-9,
            profit: 0.0,
            price: 70.0,
            delta: 1.0,
        };
        assert_eq!(margin_weights(100.0, 30.0, &itm, &m).minus, 50.0);
    }

    #[test]
    fn bad_params_rejected() {
        let m = MarginParams {
            alpha: 1.5,
            ..MarginParams::default()
        };
        assert!(m.validate().is_err());
    }
}
