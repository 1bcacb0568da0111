//! Black-Scholes pricing at zero rates, analytic greeks, and the delta-space
//! strike coordinate `z = log(S/K)/(σ√τ) + σ√τ/2` (call delta is `N(z)`).
//!
//! The volatility argument is the market's instantaneous implied volatility,
//! carried as `MarketState::y`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal::{cdf, pdf};

/// Remaining maturities below this are treated as expired.
pub const EXPIRY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    Call,
    Put,
}

/// A European option.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub strike: f64,
    pub expiry: f64,
    pub kind: OptionKind,
}

impl OptionSpec {
    pub fn call(strike: f64, expiry: f64) -> Self {
        Self {
            strike,
            expiry,
            kind: OptionKind::Call,
        }
    }

    pub fn put(strike: f64, expiry: f64) -> Self {
        Self {
            strike,
            expiry,
            kind: OptionKind::Put,
        }
    }
}

/// Spot, instantaneous implied volatility and calendar time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketState {
    pub spot: f64,
    pub y: f64,
    /// Calendar time, years; zero when omitted from a config.
    #[serde(default)]
    pub t: f64,
}

impl MarketState {
    pub fn new(spot: f64, y: f64, t: f64) -> Self {
        Self { spot, y, t }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spot.is_finite() && self.spot > 0.0) {
            return Err(Error::domain(format!("spot must be positive, got {}", self.spot)));
        }
        if !(self.y.is_finite() && self.y > 0.0) {
            return Err(Error::domain(format!(
                "implied volatility must be positive, got {}",
                self.y
            )));
        }
        if !self.t.is_finite() {
            return Err(Error::domain("time must be finite"));
        }
        Ok(())
    }

    /// Time to expiry of `opt` seen from this state.
    pub fn tau(&self, opt: &OptionSpec) -> f64 {
        opt.expiry - self.t
    }
}

/// Price and sensitivities of one option. Volatility derivatives are taken
/// with respect to the instantaneous implied volatility.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Greeks {
    pub price: f64,
    /// dP/dS
    pub delta: f64,
    /// dP/dσ
    pub vega: f64,
    /// d²P/dS²
    pub gamma: f64,
    /// d²P/dσdS
    pub vanna: f64,
    /// d²P/dσ²
    pub vomma: f64,
}

fn check_inputs(spot: f64, strike: f64, vol: f64, tau: f64) -> Result<()> {
    if !(spot.is_finite() && strike.is_finite() && vol.is_finite() && tau.is_finite()) {
        return Err(Error::domain(format!(
            "non-finite input (S={spot}, K={strike}, vol={vol}, tau={tau})"
        )));
    }
    if spot <= 0.0 || strike <= 0.0 || vol <= 0.0 {
        return Err(Error::domain(format!(
            "spot, strike and volatility must be positive (S={spot}, K={strike}, vol={vol})"
        )));
    }
    if tau < 0.0 {
        return Err(Error::domain(format!("option already expired (tau={tau})")));
    }
    Ok(())
}

fn intrinsic(spot: f64, strike: f64, kind: OptionKind) -> f64 {
    match kind {
        OptionKind::Call => (spot - strike).max(0.0),
        OptionKind::Put => (strike - spot).max(0.0),
    }
}

/// Undiscounted Black-Scholes value for explicit inputs.
pub fn price(spot: f64, strike: f64, vol: f64, tau: f64, kind: OptionKind) -> Result<f64> {
    check_inputs(spot, strike, vol, tau)?;
    if tau < EXPIRY_EPS {
        return Ok(intrinsic(spot, strike, kind));
    }
    let sd = vol * tau.sqrt();
    let d1 = (spot / strike).ln() / sd + 0.5 * sd;
    let d2 = d1 - sd;
    Ok(match kind {
        OptionKind::Call => spot * cdf(d1) - strike * cdf(d2),
        OptionKind::Put => strike * cdf(-d2) - spot * cdf(-d1),
    })
}

/// Price and all greeks for explicit inputs; `tau` must be positive.
pub fn greeks(spot: f64, strike: f64, vol: f64, tau: f64, kind: OptionKind) -> Result<Greeks> {
    check_inputs(spot, strike, vol, tau)?;
    if tau <= 0.0 {
        return Err(Error::domain(format!("greeks need tau > 0, got {tau}")));
    }
    if tau < EXPIRY_EPS {
        let call_delta = if spot > strike {
            1.0
        } else if spot < strike {
            0.0
        } else {
            0.5
        };
        let delta = match kind {
            OptionKind::Call => call_delta,
            OptionKind::Put => call_delta - 1.0,
        };
        return Ok(Greeks {
            price: intrinsic(spot, strike, kind),
            delta,
            ..Greeks::default()
        });
    }

    let sqrt_tau = tau.sqrt();
    let sd = vol * sqrt_tau;
    let d1 = (spot / strike).ln() / sd + 0.5 * sd;
    let d2 = d1 - sd;
    let nd1 = pdf(d1);

    let (price, delta) = match kind {
        OptionKind::Call => (spot * cdf(d1) - strike * cdf(d2), cdf(d1)),
        OptionKind::Put => (strike * cdf(-d2) - spot * cdf(-d1), cdf(d1) - 1.0),
    };
    let vega = spot * nd1 * sqrt_tau;
    Ok(Greeks {
        price,
        delta,
        vega,
        gamma: nd1 / (spot * sd),
        vanna: -nd1 * d2 / vol,
        vomma: vega * d1 * d2 / vol,
    })
}

/// Black-Scholes value of `opt` with volatility `state.y`. Returns intrinsic
/// value at expiry.
pub fn bs_price(state: &MarketState, opt: &OptionSpec) -> Result<f64> {
    price(state.spot, opt.strike, state.y, state.tau(opt), opt.kind)
}

/// Analytic greeks of `opt` with volatility `state.y`.
pub fn bs_greeks(state: &MarketState, opt: &OptionSpec) -> Result<Greeks> {
    greeks(state.spot, opt.strike, state.y, state.tau(opt), opt.kind)
}

fn check_z_inputs(state: &MarketState, tau: f64) -> Result<()> {
    state.validate()?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::domain(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// Delta-space coordinate of a strike.
pub fn z_of_strike(state: &MarketState, strike: f64, tau: f64) -> Result<f64> {
    check_z_inputs(state, tau)?;
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::domain(format!("strike must be positive, got {strike}")));
    }
    let sd = state.y * tau.sqrt();
    Ok((state.spot / strike).ln() / sd + 0.5 * sd)
}

/// Inverse of [`z_of_strike`].
pub fn strike_of_z(state: &MarketState, z: f64, tau: f64) -> Result<f64> {
    check_z_inputs(state, tau)?;
    if !z.is_finite() {
        return Err(Error::domain("z must be finite"));
    }
    let sd = state.y * tau.sqrt();
    Ok(state.spot * (-(z - 0.5 * sd) * sd).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st() -> MarketState {
        MarketState::new(1.0, 0.2, 0.0)
    }

    #[test]
    fn atm_call_matches_quadrature() {
        // Oracle: integrate (S e^x - K)^+ against the N(-σ²τ/2, σ²τ) density
        // with composite Simpson on [-12σ, 12σ].
        let (s, k, vol, tau): (f64, f64, f64, f64) = (1.0, 1.0, 0.2, 1.0);
        let sd = vol * tau.sqrt();
        let mean = -0.5 * sd * sd;
        let n = 200_000;
        let (a, b) = (mean - 12.0 * sd, mean + 12.0 * sd);
        let h = (b - a) / n as f64;
        let integrand = |x: f64| {
            let dens = (-(x - mean).powi(2) / (2.0 * sd * sd)).exp()
                / (sd * (2.0 * std::f64::consts::PI).sqrt());
            (s * x.exp() - k).max(0.0) * dens
        };
        let mut acc = integrand(a) + integrand(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(a + i as f64 * h);
        }
        let quad = acc * h / 3.0;
        let p = bs_price(&st(), &OptionSpec::call(k, tau)).unwrap();
        assert!((p - quad).abs() < 1e-9, "{p} vs {quad}");
        assert_eq!(format!("{p:.4}"), "0.0797");
    }

    #[test]
    fn intrinsic_at_expiry() {
        let state = MarketState::new(1.2, 0.2, 1.0);
        let p = bs_price(&state, &OptionSpec::call(1.0, 1.0)).unwrap();
        assert!((p - 0.2).abs() < 1e-15);
        let g = bs_greeks(&state, &OptionSpec::call(1.0, 1.0 + 1e-13)).unwrap();
        assert_eq!(g.delta, 1.0);
        assert_eq!(g.vega, 0.0);
        let atm = MarketState::new(1.0, 0.2, 1.0);
        assert_eq!(bs_greeks(&atm, &OptionSpec::call(1.0, 1.0 + 1e-13)).unwrap().delta, 0.5);
    }

    #[test]
    fn put_call_parity() {
        for &(s, k, v, t) in &[(1.0, 0.7, 0.3, 0.5), (100.0, 120.0, 0.1, 2.0), (5.0, 5.0, 0.8, 0.01)] {
            let state = MarketState::new(s, v, 0.0);
            let c = bs_price(&state, &OptionSpec::call(k, t)).unwrap();
            let p = bs_price(&state, &OptionSpec::put(k, t)).unwrap();
            assert!((c - p - (s - k)).abs() < 1e-12 * s.max(k));
        }
    }

    #[test]
    fn domain_errors() {
        let state = st();
        assert!(bs_price(&MarketState::new(f64::NAN, 0.2, 0.0), &OptionSpec::call(1.0, 1.0)).is_err());
        assert!(bs_greeks(&state, &OptionSpec::call(1.0, 0.0)).is_err());
        assert!(bs_price(&state, &OptionSpec::call(1.0, -0.5)).is_err());
        assert!(z_of_strike(&state, -1.0, 1.0).is_err());
        assert!(z_of_strike(&state, 1.0, 0.0).is_err());
    }

    #[test]
    fn two_vega_formulas_agree() {
        for &(s, k, v, t) in &[(1.0, 0.7, 0.3, 0.5), (100.0, 120.0, 0.1, 2.0), (5.0, 4.0, 0.8, 0.01)] {
            let g = greeks(s, k, v, t, OptionKind::Call).unwrap();
            let sd = v * f64::sqrt(t);
            let d2 = (s / k).ln() / sd - 0.5 * sd;
            let alt = k * pdf(d2) * t.sqrt();
            assert!((g.vega - alt).abs() <= 1e-13 * g.vega.abs().max(1e-300));
        }
    }

    #[test]
    fn vanna_vomma_vanish_when_d2_is_zero() {
        let (v, t): (f64, f64) = (0.25, 0.75);
        // m = σ²τ/2  =>  d2 = 0
        let k = (-(v * v * t) / 2.0).exp();
        let g = greeks(1.0, k, v, t, OptionKind::Call).unwrap();
        assert!(g.vanna.abs() < 1e-15);
        assert!(g.vomma.abs() < 1e-15);
    }

    #[test]
    fn z_coordinate() {
        let state = st();
        let z = z_of_strike(&state, 1.0, 1.0).unwrap();
        assert!((z - 0.1).abs() < 1e-15);
        assert!((cdf(1.0) - 0.84).abs() < 0.005);
        let k = strike_of_z(&state, 1.0, 1.0).unwrap();
        let g = bs_greeks(&state, &OptionSpec::call(k, 1.0)).unwrap();
        assert!((g.delta - cdf(1.0)).abs() < 1e-14);
        let mut prev = f64::INFINITY;
        for i in 1..50 {
            let k = 0.1 * i as f64;
            let z = z_of_strike(&state, k, 0.5).unwrap();
            assert!(z < prev);
            prev = z;
            let back = strike_of_z(&state, z, 0.5).unwrap();
            assert!((back / k - 1.0).abs() < 1e-12);
        }
    }
}
