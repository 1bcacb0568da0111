//! Closed-form arbitrage analytics when the market prices with flat
//! Black-Scholes volatility: the optimal two-strike spread, the universal
//! butterfly and risk reversal, and the profit split between them.
//!
//! Everything here is expressed in the delta coordinate `z`, in which the
//! objective no longer depends on spot or strike:
//!
//! ```text
//! f(z₁, z₂) = (z₁ − z₂)(z₁ + z₂ − w) / (exp(z₁²/2) + exp(z₂²/2))
//! w = (σ̃bτ + 2σρ) / (b√τ)
//! ```
//!
//! with `b` the absolute diffusion coefficient of `σ̃` (see
//! [`TrueDynamics::abs_vol_of_vol`]).

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::bs::{strike_of_z, MarketState};
use crate::error::{Error, Result};
use crate::model::{MarketModel, ModelHooks, TrueDynamics};
use crate::normal::cdf;
use crate::optim::{grid_argmax, nelder_mead_max, Grid, NelderMeadOptions};
use crate::two_strike::{optimal_two_strike_with, Atom, SearchDomain, SignedStrikeMeasure, TwoStrikeSpread};

/// Constants of the universal butterfly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniversalConstants {
    /// Root of `u − 1 = exp(−u)`.
    pub u: f64,
    /// Wing position, `√(2u)`.
    pub z0: f64,
    /// Wing weight.
    pub x0: f64,
    /// `exp(1/2 − u)`, enters the profit split.
    pub k0: f64,
}

fn solve_u() -> f64 {
    let g = |u: f64| u - 1.0 - (-u).exp();
    let (mut lo, mut hi) = (1.0, 2.0);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Computed once by bisection, then cached.
pub fn universal_constants() -> &'static UniversalConstants {
    static CONSTANTS: OnceLock<UniversalConstants> = OnceLock::new();
    CONSTANTS.get_or_init(|| {
        let u = solve_u();
        UniversalConstants {
            u,
            z0: (2.0 * u).sqrt(),
            x0: 0.5 / (1.0 + (-u).exp()),
            k0: (0.5 - u).exp(),
        }
    })
}

/// The dimensionless objective `f(z₁, z₂)`; `z₁` is the long leg.
pub fn bs_objective(z1: f64, z2: f64, w: f64) -> f64 {
    (z1 - z2) * (z1 + z2 - w) / ((0.5 * z1 * z1).exp() + (0.5 * z2 * z2).exp())
}

/// Shift parameter `w` of [`bs_objective`]; `b_abs` is the absolute vol-of-vol.
pub fn bs_w(sigma_tilde: f64, sigma: f64, b_abs: f64, rho: f64, tau: f64) -> f64 {
    (sigma_tilde * b_abs * tau + 2.0 * sigma * rho) / (b_abs * tau.sqrt())
}

fn check(state: &MarketState, truth: &TrueDynamics, tau: f64) -> Result<()> {
    state.validate()?;
    truth.validate()?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// `S b²√τ / (2σ̃√(2π))`: converts [`bs_objective`] into profit per year.
pub fn profit_scale(state: &MarketState, truth: &TrueDynamics, tau: f64) -> f64 {
    let b = truth.abs_vol_of_vol(state.y);
    state.spot * b * b * tau.sqrt() / (2.0 * state.y * (2.0 * PI).sqrt())
}

fn shift_w(state: &MarketState, truth: &TrueDynamics, tau: f64) -> f64 {
    bs_w(state.y, truth.sigma, truth.abs_vol_of_vol(state.y), truth.rho, tau)
}

/// Spread from legs given in `z`; weights from vegas `∝ exp(−z²/2)`.
fn spread_at(state: &MarketState, truth: &TrueDynamics, tau: f64, z1: f64, z2: f64, value: f64) -> TwoStrikeSpread {
    let e1 = (-0.5 * z1 * z1).exp();
    let e2 = (-0.5 * z2 * z2).exp();
    let w1 = e2 / (e1 + e2);
    let w2 = e1 / (e1 + e2);
    TwoStrikeSpread {
        k1: strike_of_z(state, z1, tau).expect("validated"),
        k2: strike_of_z(state, z2, tau).expect("validated"),
        w1,
        w2,
        z1,
        z2,
        delta_hedge: w1 * cdf(z1) - w2 * cdf(z2),
        profit_rate: profit_scale(state, truth, tau) * value,
        arbitrage: value > 0.0,
    }
}

/// Optimal vega-neutral spread in a Black-Scholes market.
///
/// Scans `[−6, 6]²` in `z` with spacing 0.05 and polishes the best grid
/// point with Nelder-Mead. When `w = 0` the maximizer is not unique; the
/// lexicographically smallest grid maximizer is the starting point, so the
/// result is deterministic but arbitrary among the symmetric optima. With
/// `b = 0` the objective is undefined and the generic solver is used.
pub fn optimal_bs_spread(state: &MarketState, truth: &TrueDynamics, tau: f64) -> Result<TwoStrikeSpread> {
    optimal_bs_spread_on(state, truth, tau, Grid::new(-6.0, 6.0, 0.05), NelderMeadOptions::default())
}

/// [`optimal_bs_spread`] with a caller-chosen scan grid and polish tolerance.
pub fn optimal_bs_spread_on(
    state: &MarketState,
    truth: &TrueDynamics,
    tau: f64,
    grid: Grid,
    polish: NelderMeadOptions,
) -> Result<TwoStrikeSpread> {
    check(state, truth, tau)?;
    if truth.b == 0.0 {
        let hooks = ModelHooks::new(*state, tau, *truth, MarketModel::BlackScholes);
        let domain = SearchDomain::new(*state, tau)
            .with_z_range(grid.lo, grid.hi)
            .with_grid_step(grid.step);
        return optimal_two_strike_with(&hooks, &domain, polish);
    }
    let w = shift_w(state, truth, tau);
    let zs = grid.points();
    let ez: Vec<f64> = zs.iter().map(|z| (0.5 * z * z).exp()).collect();
    let coarse = grid_argmax(&zs, |i, j| {
        (zs[i] - zs[j]) * (zs[i] + zs[j] - w) / (ez[i] + ez[j])
    });
    let (best, value) = nelder_mead_max(
        |p| bs_objective(p[0], p[1], w),
        [coarse.x, coarse.y],
        grid.lo,
        grid.hi,
        NelderMeadOptions {
            initial_step: polish.initial_step.min(grid.step),
            ..polish
        },
    );
    let (z1, z2, value) = if value >= coarse.value {
        (best[0], best[1], value)
    } else {
        (coarse.x, coarse.y, coarse.value)
    };
    Ok(spread_at(state, truth, tau, z1, z2, value))
}

/// Whether the risk reversal buys the low-delta leg: `bτ/2 + ρσ/σ̃ ≥ 0`.
pub fn rr_buys_low_delta(state: &MarketState, truth: &TrueDynamics, tau: f64) -> bool {
    0.5 * truth.abs_vol_of_vol(state.y) * tau + truth.rho * truth.sigma / state.y >= 0.0
}

/// Universal risk reversal: half a unit at `z = ±1`, long the `z = −1` leg
/// when [`rr_buys_low_delta`], otherwise the reverse.
pub fn risk_reversal(state: &MarketState, truth: &TrueDynamics, tau: f64) -> Result<SignedStrikeMeasure> {
    check(state, truth, tau)?;
    let s = if rr_buys_low_delta(state, truth, tau) { 1.0 } else { -1.0 };
    SignedStrikeMeasure::new(vec![
        Atom {
            strike: strike_of_z(state, -1.0, tau)?,
            weight: 0.5 * s,
        },
        Atom {
            strike: strike_of_z(state, 1.0, tau)?,
            weight: -0.5 * s,
        },
    ])
}

/// Universal butterfly: `x₀` at `z = ±z₀`, short `1 − 2x₀` at `z = 0`.
pub fn butterfly(state: &MarketState, tau: f64) -> Result<SignedStrikeMeasure> {
    state.validate()?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    let c = universal_constants();
    SignedStrikeMeasure::new(vec![
        Atom {
            strike: strike_of_z(state, c.z0, tau)?,
            weight: c.x0,
        },
        Atom {
            strike: strike_of_z(state, 0.0, tau)?,
            weight: -(1.0 - 2.0 * c.x0),
        },
        Atom {
            strike: strike_of_z(state, -c.z0, tau)?,
            weight: c.x0,
        },
    ])
}

/// `S b |bτ/2 + ρσ/σ̃| e^{−1/2} / √(2π)`.
pub fn rr_profit(state: &MarketState, truth: &TrueDynamics, tau: f64) -> f64 {
    let b = truth.abs_vol_of_vol(state.y);
    let k = 0.5 * b * tau + truth.rho * truth.sigma / state.y;
    state.spot * b * k.abs() * (-0.5f64).exp() / (2.0 * PI).sqrt()
}

/// `S b²√τ e^{−z₀²/2} / (σ̃√(2π))`; does not involve `ρ`.
pub fn bf_profit(state: &MarketState, truth: &TrueDynamics, tau: f64) -> f64 {
    let b = truth.abs_vol_of_vol(state.y);
    let u = universal_constants().u;
    state.spot * b * b * tau.sqrt() * (-u).exp() / (state.y * (2.0 * PI).sqrt())
}

/// Profit of the optimal spread against the two universal contracts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfitSplit {
    pub p_opt: f64,
    pub p_rr: f64,
    pub p_bf: f64,
    /// Share of the optimal profit the risk reversal is guaranteed to earn.
    pub alpha: f64,
}

impl ProfitSplit {
    /// `P_RR − α P_opt`.
    pub fn rr_slack(&self) -> f64 {
        self.p_rr - self.alpha * self.p_opt
    }

    /// `P_BF − (1 − α) P_opt`.
    pub fn bf_slack(&self) -> f64 {
        self.p_bf - (1.0 - self.alpha) * self.p_opt
    }

    /// `P_BF + P_RR − P_opt`.
    pub fn sum_slack(&self) -> f64 {
        self.p_bf + self.p_rr - self.p_opt
    }
}

/// `α = |σ̃bτ + 2σρ| / (|σ̃bτ + 2σρ| + 2bK₀√τ)`.
pub fn alpha(state: &MarketState, truth: &TrueDynamics, tau: f64) -> f64 {
    let b = truth.abs_vol_of_vol(state.y);
    let a = (state.y * b * tau + 2.0 * truth.sigma * truth.rho).abs();
    let d = a + 2.0 * b * universal_constants().k0 * tau.sqrt();
    if d == 0.0 {
        // σρ = 0 and b = 0: nothing to split
        1.0
    } else {
        a / d
    }
}

pub fn profit_split(state: &MarketState, truth: &TrueDynamics, tau: f64) -> Result<ProfitSplit> {
    check(state, truth, tau)?;
    if truth.b <= 0.0 {
        return Err(Error::domain("profit split needs b > 0"));
    }
    let opt = optimal_bs_spread(state, truth, tau)?;
    Ok(ProfitSplit {
        p_opt: opt.profit_rate,
        p_rr: rr_profit(state, truth, tau),
        p_bf: bf_profit(state, truth, tau),
        alpha: alpha(state, truth, tau),
    })
}
