//! SABR (`β = 1`) market: Hagan's lognormal implied-volatility expansion,
//! greeks of the resulting prices, and first-order corrections in the
//! pricing vol-of-vol `b̃` to prices and to the optimal two-strike spread.
//!
//! The current instantaneous volatility is always read from
//! [`MarketState::y`]; [`SabrParams`] only carries the smile parameters.

use serde::{Deserialize, Serialize};

use crate::bs::{self, Greeks, MarketState, OptionKind, OptionSpec};
use crate::bs_arb;
use crate::error::{Error, Result};
use crate::model::TrueDynamics;

/// Vol-of-vol and spot/vol correlation of the pricing model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SabrParams {
    pub b_tilde: f64,
    pub rho_tilde: f64,
}

impl SabrParams {
    pub fn new(b_tilde: f64, rho_tilde: f64) -> Self {
        Self { b_tilde, rho_tilde }
    }

    /// `b̃ ≥ 0` and `-1 < ρ̃ ≤ 0` (non-positive correlation keeps the
    /// underlying a martingale under the pricing measure).
    pub fn validate(&self) -> Result<()> {
        if !(self.b_tilde.is_finite() && self.b_tilde >= 0.0) {
            return Err(Error::domain(format!("b_tilde must be non-negative, got {}", self.b_tilde)));
        }
        if !(self.rho_tilde.is_finite() && self.rho_tilde <= 0.0 && self.rho_tilde > -1.0) {
            return Err(Error::domain(format!(
                "rho_tilde must lie in (-1, 0], got {}",
                self.rho_tilde
            )));
        }
        Ok(())
    }
}

/// Below this |ζ| the ratio ζ/x(ζ) and its derivatives come from a Taylor
/// series; above it the closed form is free of cancellation.
const SERIES_ZETA: f64 = 0.05;

/// Taylor coefficients of ζ/x(ζ) in ζ, as polynomials in ρ.
fn series_coefficients(r: f64) -> [f64; 10] {
    let r2 = r * r;
    let r4 = r2 * r2;
    let r6 = r4 * r2;
    let r8 = r4 * r4;
    [
        1.0,
        -r / 2.0,
        -(3.0 * r2 - 2.0) / 12.0,
        -r * (6.0 * r2 - 5.0) / 24.0,
        -(225.0 * r4 - 240.0 * r2 + 34.0) / 720.0,
        -r * (210.0 * r4 - 275.0 * r2 + 74.0) / 480.0,
        -(39690.0 * r6 - 61740.0 * r4 + 24381.0 * r2 - 1468.0) / 60480.0,
        -r * (124740.0 * r6 - 224910.0 * r4 + 117012.0 * r2 - 15467.0) / 120960.0,
        -(6081075.0 * r8 - 12474000.0 * r6 + 8051400.0 * r4 - 1680240.0 * r2 + 55718.0)
            / 3628800.0,
        -r * (20270250.0 * r8 - 46621575.0 * r6 + 35925120.0 * r4 - 10326600.0 * r2 + 810086.0)
            / 7257600.0,
    ]
}

/// φ(ζ) = ζ/x(ζ) with its first two derivatives.
#[derive(Debug, Clone, Copy)]
struct ZetaRatio {
    phi: f64,
    d1: f64,
    d2: f64,
}

fn zeta_ratio(zeta: f64, rho: f64) -> ZetaRatio {
    if zeta.abs() < SERIES_ZETA {
        let c = series_coefficients(rho);
        let (mut phi, mut d1, mut d2) = (0.0, 0.0, 0.0);
        for k in (0..c.len()).rev() {
            phi = phi * zeta + c[k];
        }
        for k in (1..c.len()).rev() {
            d1 = d1 * zeta + k as f64 * c[k];
        }
        for k in (2..c.len()).rev() {
            d2 = d2 * zeta + (k * (k - 1)) as f64 * c[k];
        }
        return ZetaRatio { phi, d1, d2 };
    }
    let dd = (1.0 - 2.0 * rho * zeta + zeta * zeta).sqrt();
    let shifted = zeta - rho;
    // dd + ζ - ρ, rewritten when ζ - ρ < 0 to avoid cancellation
    let arg = if shifted >= 0.0 {
        dd + shifted
    } else {
        (1.0 - rho * rho) / (dd - shifted)
    };
    let x = (arg / (1.0 - rho)).ln();
    let xp = 1.0 / dd;
    let xpp = -shifted / (dd * dd * dd);
    let x2 = x * x;
    ZetaRatio {
        phi: zeta / x,
        d1: (x - zeta * xp) / x2,
        d2: -zeta * xpp / x2 - 2.0 * xp * (x - zeta * xp) / (x2 * x),
    }
}

/// Implied volatility and its partial derivatives in spot and `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedVolSurfacePoint {
    pub vol: f64,
    pub d_s: f64,
    pub d_y: f64,
    pub d_ss: f64,
    pub d_yy: f64,
    pub d_sy: f64,
}

fn check_hagan_inputs(spot: f64, strike: f64, y: f64, params: &SabrParams, tau: f64) -> Result<()> {
    params.validate()?;
    for (name, v) in [("spot", spot), ("strike", strike), ("volatility", y), ("tau", tau)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Hagan implied volatility with `β = 1` and its derivatives.
pub fn hagan_vol_point(
    spot: f64,
    strike: f64,
    y: f64,
    params: &SabrParams,
    tau: f64,
) -> Result<ImpliedVolSurfacePoint> {
    check_hagan_inputs(spot, strike, y, params, tau)?;
    let (b, r) = (params.b_tilde, params.rho_tilde);
    let zeta = b * (spot / strike).ln() / y;
    let ZetaRatio { phi, d1, d2 } = zeta_ratio(zeta, r);

    let u = y * phi;
    let u_s = d1 * b / spot;
    let u_ss = d2 * b * b / (y * spot * spot) - d1 * b / (spot * spot);
    let u_y = phi - zeta * d1;
    let u_yy = zeta * zeta * d2 / y;
    let u_sy = -zeta * d2 * b / (y * spot);

    let l = 1.0 + (r * b * y / 4.0 + (2.0 - 3.0 * r * r) * b * b / 24.0) * tau;
    let l_y = r * b * tau / 4.0;

    let vol = u * l;
    if !(vol > 0.0 && vol.is_finite()) {
        return Err(Error::Model(format!(
            "Hagan expansion gives non-positive volatility {vol} (K={strike}, tau={tau})"
        )));
    }
    Ok(ImpliedVolSurfacePoint {
        vol,
        d_s: u_s * l,
        d_y: u_y * l + u * l_y,
        d_ss: u_ss * l,
        d_yy: u_yy * l + 2.0 * u_y * l_y,
        d_sy: u_sy * l + u_s * l_y,
    })
}

/// `σ_imp = σ̃·(ζ/x(ζ))·(1 + [ρ̃b̃σ̃/4 + (2−3ρ̃²)b̃²/24]τ)`, `ζ = (b̃/σ̃)log(S/K)`.
pub fn hagan_implied_vol(spot: f64, strike: f64, y: f64, params: &SabrParams, tau: f64) -> Result<f64> {
    check_hagan_inputs(spot, strike, y, params, tau)?;
    let (b, r) = (params.b_tilde, params.rho_tilde);
    let zeta = b * (spot / strike).ln() / y;
    let l = 1.0 + (r * b * y / 4.0 + (2.0 - 3.0 * r * r) * b * b / 24.0) * tau;
    let vol = y * zeta_ratio(zeta, r).phi * l;
    if !(vol > 0.0 && vol.is_finite()) {
        return Err(Error::Model(format!("Hagan expansion gives non-positive volatility {vol}")));
    }
    Ok(vol)
}

/// Black-Scholes price at the Hagan volatility, with greeks in spot and
/// `y` obtained by the chain rule through the implied-volatility surface.
pub fn sabr_price_and_greeks(state: &MarketState, opt: &OptionSpec, params: &SabrParams) -> Result<Greeks> {
    state.validate()?;
    let tau = state.tau(opt);
    if tau <= 0.0 {
        return Err(Error::domain(format!("greeks need tau > 0, got {tau}")));
    }
    let iv = hagan_vol_point(state.spot, opt.strike, state.y, params, tau)?;
    let b = bs::greeks(state.spot, opt.strike, iv.vol, tau, opt.kind)?;

    Ok(Greeks {
        price: b.price,
        delta: b.delta + b.vega * iv.d_s,
        vega: b.vega * iv.d_y,
        gamma: b.gamma + 2.0 * b.vanna * iv.d_s + b.vomma * iv.d_s * iv.d_s + b.vega * iv.d_ss,
        vanna: b.vanna * iv.d_y + b.vomma * iv.d_s * iv.d_y + b.vega * iv.d_sy,
        vomma: b.vomma * iv.d_y * iv.d_y + b.vega * iv.d_yy,
    })
}

/// Derivatives of `H(S, σ) = σ·S·n(d₁)·d₂`; the first-order price term is
/// `P₁ = -(ρ̃τ/2)·H`.
#[derive(Debug, Clone, Copy)]
struct VannaCarrier {
    h: f64,
    h_sigma: f64,
    h_ss: f64,
    h_sigma_sigma: f64,
    h_s_sigma: f64,
}

fn vanna_carrier(spot: f64, strike: f64, vol: f64, tau: f64) -> VannaCarrier {
    let sqrt_tau = tau.sqrt();
    let sd = vol * sqrt_tau;
    let d1 = (spot / strike).ln() / sd + 0.5 * sd;
    let d2 = d1 - sd;
    let n = crate::normal::pdf(d1);
    let d2_2 = d2 * d2;
    let d2_3 = d2_2 * d2;
    let d2_4 = d2_2 * d2_2;
    let d2_5 = d2_4 * d2;
    VannaCarrier {
        h: n * spot * vol * d2,
        h_sigma: n * spot * (d2_3 + sd * d2_2 - sd),
        h_ss: n / spot * ((d2_3 - 3.0 * d2) / (vol * tau) + (d2_2 - 1.0) / sqrt_tau),
        h_sigma_sigma: n
            * spot
            * (d2_5 / vol + 2.0 * sqrt_tau * d2_4 + (vol * tau - 3.0 / vol) * d2_3
                - 5.0 * sqrt_tau * d2_2
                - 3.0 * vol * tau * d2
                - sqrt_tau),
        h_s_sigma: n * (-d2_4 / sd - d2_3 + 3.0 * d2_2 / sd + 3.0 * d2),
    }
}

/// Zero- and first-order pieces of one strike's price, vega and profit density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrikeTerms {
    pub strike: f64,
    pub p0: f64,
    pub p1: f64,
    /// vega of `P₀`
    pub w0: f64,
    /// vega of `P₁`
    pub w1: f64,
    pub f0: f64,
    pub f1: f64,
}

/// Expansion `P ≈ P₀ + b̃P₁` of a call price and of its profit density
/// `f ≈ f₀ + b̃f₁` against `truth`.
pub fn strike_terms(
    state: &MarketState,
    strike: f64,
    tau: f64,
    truth: &TrueDynamics,
    params: &SabrParams,
) -> Result<StrikeTerms> {
    let y = state.y;
    let s = state.spot;
    let g0 = bs::greeks(s, strike, y, tau, OptionKind::Call)?;
    let h = vanna_carrier(s, strike, y, tau);
    let scale = -params.rho_tilde * tau / 2.0;

    let gamma_coef = 0.5 * s * s * (truth.sigma * truth.sigma - y * y);
    let vomma_coef = 0.5 * truth.b * truth.b * y * y;
    let vanna_coef = s * truth.sigma * y * truth.b * truth.rho;

    let f0 = gamma_coef * g0.gamma + vomma_coef * g0.vomma + vanna_coef * g0.vanna;
    let f1 = scale * (gamma_coef * h.h_ss + vomma_coef * h.h_sigma_sigma + vanna_coef * h.h_s_sigma)
        - s * y * y * params.rho_tilde * g0.vanna;

    Ok(StrikeTerms {
        strike,
        p0: g0.price,
        p1: scale * h.h,
        w0: g0.vega,
        w1: scale * h.h_sigma,
        f0,
        f1,
    })
}

/// First-order SABR price `P₀ + b̃P₁` with `P₁ = (σ̃²ρ̃τ/2)·S·∂²P₀/∂S∂σ`.
pub fn perturbed_price(state: &MarketState, opt: &OptionSpec, params: &SabrParams) -> Result<f64> {
    state.validate()?;
    params.validate()?;
    let tau = state.tau(opt);
    if tau <= 0.0 {
        return Err(Error::domain(format!("perturbed price needs tau > 0, got {tau}")));
    }
    let g0 = bs::greeks(state.spot, opt.strike, state.y, tau, opt.kind)?;
    let p1 = 0.5 * state.y * state.y * params.rho_tilde * tau * state.spot * g0.vanna;
    Ok(g0.price + params.b_tilde * p1)
}

/// Two-strike objective pieces `F₀`, `F₁`, `F₃` at a strike pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveTerms {
    pub f0: f64,
    pub f1: f64,
    pub f3: f64,
}

impl ObjectiveTerms {
    fn from_legs(a: &StrikeTerms, b: &StrikeTerms) -> Self {
        let denom = a.w0 + b.w0;
        ObjectiveTerms {
            f0: (b.w0 * a.f0 - a.w0 * b.f0) / denom,
            f1: (b.w0 * a.f1 + b.w1 * a.f0 - a.w0 * b.f1 - a.w1 * b.f0) / denom,
            f3: (a.w1 + b.w1) / denom,
        }
    }

    /// First-order objective `F₀ + b̃(F₁ − F₃F₀)`.
    pub fn expanded(&self, b_tilde: f64) -> f64 {
        self.f0 + b_tilde * (self.f1 - self.f3 * self.f0)
    }
}

/// Evaluates `F₀`, `F₁`, `F₃` for long strike `k1` and short strike `k2`.
pub fn objective_terms(
    state: &MarketState,
    k1: f64,
    k2: f64,
    tau: f64,
    truth: &TrueDynamics,
    params: &SabrParams,
) -> Result<ObjectiveTerms> {
    let a = strike_terms(state, k1, tau, truth, params)?;
    let b = strike_terms(state, k2, tau, truth, params)?;
    Ok(ObjectiveTerms::from_legs(&a, &b))
}

/// Zero-order optimum and its first-order correction in `b̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationTerms {
    pub b_tilde: f64,
    /// Zero-order (Black-Scholes market) strikes, long then short.
    pub k0: [f64; 2],
    /// Correction per unit `b̃`.
    pub k1: [f64; 2],
    pub legs: [StrikeTerms; 2],
    pub objective: ObjectiveTerms,
    /// Hessian of `F₀` in strike space at `k0`.
    pub hessian: [[f64; 2]; 2],
}

impl PerturbationTerms {
    /// `K₀ + b̃K₁` per leg.
    pub fn strikes(&self) -> [f64; 2] {
        [
            self.k0[0] + self.b_tilde * self.k1[0],
            self.k0[1] + self.b_tilde * self.k1[1],
        ]
    }
}

/// Optimal strikes to first order in `b̃`.
///
/// Setting the gradient of `F₀ + b̃(F₁ − F₃F₀)` to zero around the
/// zero-order maximizer `K₀` gives
/// `K₁ = −(∇²F₀)⁻¹ (∇F₁ − F₀∇F₃)`, solved as a 2×2 system. Strike
/// derivatives are central differences with step `1e-4·K₀`.
pub fn perturbed_optimal_strikes(
    state: &MarketState,
    truth: &TrueDynamics,
    params: &SabrParams,
    tau: f64,
) -> Result<PerturbationTerms> {
    state.validate()?;
    truth.validate()?;
    params.validate()?;
    let zero_order = bs_arb::optimal_bs_spread(state, truth, tau)?;
    let k0 = [zero_order.k1, zero_order.k2];
    let h = [1e-4 * k0[0], 1e-4 * k0[1]];

    let terms = |k: [f64; 2]| objective_terms(state, k[0], k[1], tau, truth, params);
    let shift = |i: usize, d: f64| {
        let mut k = k0;
        k[i] += d;
        k
    };

    let mut grad_f1 = [0.0; 2];
    let mut grad_f3 = [0.0; 2];
    let centre = terms(k0)?;
    let mut hess = [[0.0; 2]; 2];
    for i in 0..2 {
        let up = terms(shift(i, h[i]))?;
        let dn = terms(shift(i, -h[i]))?;
        grad_f1[i] = (up.f1 - dn.f1) / (2.0 * h[i]);
        grad_f3[i] = (up.f3 - dn.f3) / (2.0 * h[i]);
        hess[i][i] = (up.f0 - 2.0 * centre.f0 + dn.f0) / (h[i] * h[i]);
    }
    let corner = |a: f64, b: f64| terms([k0[0] + a * h[0], k0[1] + b * h[1]]).map(|t| t.f0);
    let cross = (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?)
        / (4.0 * h[0] * h[1]);
    hess[0][1] = cross;
    hess[1][0] = cross;

    let tr = hess[0][0] + hess[1][1];
    let det = hess[0][0] * hess[1][1] - cross * cross;
    let disc = ((hess[0][0] - hess[1][1]).powi(2) + 4.0 * cross * cross).sqrt();
    let lambda_max = 0.5 * (tr + disc);
    if lambda_max >= -1e-10 {
        return Err(Error::DegenerateCurvature(lambda_max));
    }

    let rhs = [
        -(grad_f1[0] - centre.f0 * grad_f3[0]),
        -(grad_f1[1] - centre.f0 * grad_f3[1]),
    ];
    let k1 = [
        (hess[1][1] * rhs[0] - hess[0][1] * rhs[1]) / det,
        (hess[0][0] * rhs[1] - hess[1][0] * rhs[0]) / det,
    ];

    Ok(PerturbationTerms {
        b_tilde: params.b_tilde,
        k0,
        k1,
        legs: [
            strike_terms(state, k0[0], tau, truth, params)?,
            strike_terms(state, k0[1], tau, truth, params)?,
        ],
        objective: centre,
        hessian: hess,
    })
}
