//! Model-agnostic optimal vega-neutral spread.
//!
//! A pricing model enters only through [`PricingHooks`]: for each strike it
//! reports the option's vega `g(K)` and the profit density `f(K)` of the
//! hedged option. Among all signed strike measures with total variation one
//! and zero net vega, the instantaneous profit `∫ f dω` is maximized by a
//! two-strike spread: long `w₁` of `K₁`, short `w₂` of `K₂` with
//!
//! ```text
//! w₁ = g(K₂) / (g(K₁) + g(K₂)),   w₂ = g(K₁) / (g(K₁) + g(K₂))
//! (K₁, K₂) = argmax F,   F = (g(K₂) f(K₁) − g(K₁) f(K₂)) / (g(K₁) + g(K₂))
//! ```
//!
//! Strikes are searched in the delta-space coordinate `z` of
//! [`crate::bs::z_of_strike`], which keeps the grid well scaled for every
//! maturity and volatility level.

use serde::{Deserialize, Serialize};

use crate::bs::{strike_of_z, z_of_strike, MarketState};
use crate::error::{Error, Result};
use crate::optim::{grid_argmax, nelder_mead_max, Grid, NelderMeadOptions};

/// Everything the optimizer needs to know about one strike.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HookPoint {
    /// `∂P/∂y`
    pub vega: f64,
    /// `(L − L̃)P`
    pub profit: f64,
    pub price: f64,
    pub delta: f64,
}

impl HookPoint {
    pub fn invalid() -> Self {
        HookPoint {
            vega: f64::NAN,
            profit: f64::NAN,
            price: f64::NAN,
            delta: f64::NAN,
        }
    }
}

/// Per-strike model evaluations for calls of a single maturity.
///
/// Implementations must be callable from several threads at once.
pub trait PricingHooks: Sync {
    fn at(&self, strike: f64) -> HookPoint;

    fn vega(&self, strike: f64) -> f64 {
        self.at(strike).vega
    }

    fn profit_density(&self, strike: f64) -> f64 {
        self.at(strike).profit
    }
}

impl<H: PricingHooks + ?Sized> PricingHooks for &H {
    fn at(&self, strike: f64) -> HookPoint {
        (**self).at(strike)
    }
}

/// Hooks built from plain closures; price and delta default to zero.
pub struct FnHooks<G, F> {
    vega: G,
    profit: F,
}

impl<G, F> FnHooks<G, F>
where
    G: Fn(f64) -> f64 + Sync,
    F: Fn(f64) -> f64 + Sync,
{
    pub fn new(vega: G, profit: F) -> Self {
        Self { vega, profit }
    }
}

impl<G, F> PricingHooks for FnHooks<G, F>
where
    G: Fn(f64) -> f64 + Sync,
    F: Fn(f64) -> f64 + Sync,
{
    fn at(&self, strike: f64) -> HookPoint {
        HookPoint {
            vega: (self.vega)(strike),
            profit: (self.profit)(strike),
            price: 0.0,
            delta: 0.0,
        }
    }
}

/// Wraps hooks and multiplies the profit density by a constant.
pub struct ScaledProfit<H> {
    pub inner: H,
    pub factor: f64,
}

impl<H: PricingHooks> PricingHooks for ScaledProfit<H> {
    fn at(&self, strike: f64) -> HookPoint {
        let mut p = self.inner.at(strike);
        p.profit *= self.factor;
        p
    }
}

/// One atom of a signed strike measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub strike: f64,
    /// Positive for a long position.
    pub weight: f64,
}

/// Finite signed measure over strikes with total variation one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedStrikeMeasure {
    atoms: Vec<Atom>,
}

const TV_TOL: f64 = 1e-9;

impl SignedStrikeMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Constraint("measure has no atoms".into()));
        }
        if let Some(a) = atoms.iter().find(|a| !(a.strike.is_finite() && a.strike > 0.0 && a.weight.is_finite())) {
            return Err(Error::Constraint(format!("invalid atom {a:?}")));
        }
        let tv: f64 = atoms.iter().map(|a| a.weight.abs()).sum();
        if (tv - 1.0).abs() > TV_TOL {
            return Err(Error::Constraint(format!("total variation is {tv}, expected 1")));
        }
        Ok(Self { atoms })
    }

    /// Rescales arbitrary weights to total variation one.
    pub fn normalized(atoms: Vec<Atom>) -> Result<Self> {
        let tv: f64 = atoms.iter().map(|a| a.weight.abs()).sum();
        if !(tv > 0.0 && tv.is_finite()) {
            return Err(Error::Constraint("cannot normalize a zero measure".into()));
        }
        Self::new(
            atoms
                .into_iter()
                .map(|a| Atom {
                    strike: a.strike,
                    weight: a.weight / tv,
                })
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight.abs()).sum()
    }

    pub fn negated(&self) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    strike: a.strike,
                    weight: -a.weight,
                })
                .collect(),
        }
    }

    /// `Σ weight·vega`.
    pub fn net_vega<H: PricingHooks + ?Sized>(&self, hooks: &H) -> f64 {
        self.atoms.iter().map(|a| a.weight * hooks.vega(a.strike)).sum()
    }
}

/// The optimal vega-neutral two-option portfolio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStrikeSpread {
    /// Long leg.
    pub k1: f64,
    /// Short leg.
    pub k2: f64,
    pub w1: f64,
    pub w2: f64,
    pub z1: f64,
    pub z2: f64,
    /// Stock quantity to short against the options.
    pub delta_hedge: f64,
    /// Instantaneous profit, price units per year.
    pub profit_rate: f64,
    /// False when the objective is non-positive everywhere on the domain.
    pub arbitrage: bool,
}

impl TwoStrikeSpread {
    pub fn measure(&self) -> SignedStrikeMeasure {
        SignedStrikeMeasure {
            atoms: vec![
                Atom {
                    strike: self.k1,
                    weight: self.w1,
                },
                Atom {
                    strike: self.k2,
                    weight: -self.w2,
                },
            ],
        }
    }

    /// Builds the vega-neutral unit spread on two strikes from hook values.
    pub fn from_points(
        k1: f64,
        k2: f64,
        z1: f64,
        z2: f64,
        p1: &HookPoint,
        p2: &HookPoint,
        arbitrage: bool,
    ) -> Self {
        let denom = p1.vega + p2.vega;
        let w1 = p2.vega / denom;
        let w2 = p1.vega / denom;
        let profit_rate = if arbitrage {
            (p2.vega * p1.profit - p1.vega * p2.profit) / denom
        } else {
            0.0
        };
        TwoStrikeSpread {
            k1,
            k2,
            w1,
            w2,
            z1,
            z2,
            delta_hedge: w1 * p1.delta - w2 * p2.delta,
            profit_rate,
            arbitrage,
        }
    }
}

/// Bounded search region in `z` around a market state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchDomain {
    pub state: MarketState,
    pub tau: f64,
    pub z_lo: f64,
    pub z_hi: f64,
    /// Spacing of the initial grid scan.
    pub grid_step: f64,
}

impl SearchDomain {
    /// `z ∈ [-8, 8]` scanned with spacing 0.05.
    pub fn new(state: MarketState, tau: f64) -> Self {
        Self {
            state,
            tau,
            z_lo: -8.0,
            z_hi: 8.0,
            grid_step: 0.05,
        }
    }

    pub fn with_z_range(mut self, z_lo: f64, z_hi: f64) -> Self {
        self.z_lo = z_lo;
        self.z_hi = z_hi;
        self
    }

    pub fn with_grid_step(mut self, step: f64) -> Self {
        self.grid_step = step;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.state.validate()?;
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::domain(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.z_lo < self.z_hi && self.z_lo.is_finite() && self.z_hi.is_finite()) {
            return Err(Error::domain("empty search domain"));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= self.z_hi - self.z_lo) {
            return Err(Error::domain("grid step must be positive and fit in the domain"));
        }
        Ok(())
    }

    pub fn strike(&self, z: f64) -> f64 {
        strike_of_z(&self.state, z, self.tau).expect("validated domain")
    }

    pub fn z(&self, strike: f64) -> Result<f64> {
        z_of_strike(&self.state, strike, self.tau)
    }

    /// Strike interval covered, ascending.
    pub fn strike_range(&self) -> (f64, f64) {
        (self.strike(self.z_hi), self.strike(self.z_lo))
    }

    pub(crate) fn grid(&self) -> Vec<f64> {
        Grid::new(self.z_lo, self.z_hi, self.grid_step).points()
    }
}

fn check_vega(k: f64, p: &HookPoint) -> Result<()> {
    if p.vega.is_nan() || p.vega <= 0.0 {
        return Err(Error::Model(format!(
            "vega must be positive, got {} at strike {k}",
            p.vega
        )));
    }
    if !p.profit.is_finite() {
        return Err(Error::Model(format!("profit density is not finite at strike {k}")));
    }
    Ok(())
}

fn objective_from_points(p1: &HookPoint, p2: &HookPoint) -> f64 {
    (p2.vega * p1.profit - p1.vega * p2.profit) / (p1.vega + p2.vega)
}

/// `F(K₁, K₂)`: profit of the unit vega-neutral spread long `K₁`, short `K₂`.
pub fn objective_f<H: PricingHooks + ?Sized>(hooks: &H, k1: f64, k2: f64) -> Result<f64> {
    for k in [k1, k2] {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::domain(format!("strike must be positive, got {k}")));
        }
    }
    let p1 = hooks.at(k1);
    let p2 = hooks.at(k2);
    check_vega(k1, &p1)?;
    check_vega(k2, &p2)?;
    Ok(objective_from_points(&p1, &p2))
}

/// `∫ f dω` for a measure that satisfies the vega constraint.
pub fn measure_profit<H: PricingHooks + ?Sized>(hooks: &H, measure: &SignedStrikeMeasure) -> Result<f64> {
    let mut net_vega = 0.0;
    let mut gross_vega = 0.0;
    let mut profit = 0.0;
    for a in measure.atoms() {
        let p = hooks.at(a.strike);
        check_vega(a.strike, &p)?;
        net_vega += a.weight * p.vega;
        gross_vega += a.weight.abs() * p.vega;
        profit += a.weight * p.profit;
    }
    if net_vega.abs() > 1e-8 * gross_vega.max(f64::MIN_POSITIVE) {
        return Err(Error::Constraint(format!(
            "measure is not vega-neutral: net vega {net_vega:e}, gross {gross_vega:e}"
        )));
    }
    Ok(profit)
}

const NOISE_FLOOR: f64 = 1e-12;

/// Fallback legs used when no strike pair has positive objective.
const IDLE_Z: (f64, f64) = (-1.0, 1.0);

/// Grid scan over the domain followed by Nelder-Mead refinement.
pub fn optimal_two_strike<H: PricingHooks + ?Sized>(hooks: &H, domain: &SearchDomain) -> Result<TwoStrikeSpread> {
    optimal_two_strike_with(hooks, domain, NelderMeadOptions::default())
}

pub fn optimal_two_strike_with<H: PricingHooks + ?Sized>(
    hooks: &H,
    domain: &SearchDomain,
    polish: NelderMeadOptions,
) -> Result<TwoStrikeSpread> {
    domain.validate()?;
    let zs = domain.grid();
    let strikes: Vec<f64> = zs.iter().map(|&z| domain.strike(z)).collect();
    let points: Vec<HookPoint> = strikes.iter().map(|&k| hooks.at(k)).collect();
    for (k, p) in strikes.iter().zip(&points) {
        check_vega(*k, p)?;
    }

    let coarse = grid_argmax(&zs, |i, j| objective_from_points(&points[i], &points[j]));
    // rounding noise in exactly cancelling densities is not an arbitrage
    let noise = NOISE_FLOOR * points.iter().map(|p| p.profit.abs()).fold(0.0, f64::max);
    if coarse.value <= noise {
        let z1 = IDLE_Z.0.clamp(domain.z_lo, domain.z_hi);
        let z2 = IDLE_Z.1.clamp(domain.z_lo, domain.z_hi);
        let (k1, k2) = (domain.strike(z1), domain.strike(z2));
        return Ok(TwoStrikeSpread::from_points(k1, k2, z1, z2, &hooks.at(k1), &hooks.at(k2), false));
    }

    let objective = |p: [f64; 2]| {
        let a = hooks.at(domain.strike(p[0]));
        let b = hooks.at(domain.strike(p[1]));
        if a.vega > 0.0 && b.vega > 0.0 {
            objective_from_points(&a, &b)
        } else {
            f64::NAN
        }
    };
    let opts = NelderMeadOptions {
        initial_step: polish.initial_step.min(domain.grid_step),
        ..polish
    };
    let (best, value) = nelder_mead_max(objective, [coarse.x, coarse.y], domain.z_lo, domain.z_hi, opts);
    let (z1, z2) = if value >= coarse.value {
        (best[0], best[1])
    } else {
        (coarse.x, coarse.y)
    };
    let (k1, k2) = (domain.strike(z1), domain.strike(z2));
    let p1 = hooks.at(k1);
    let p2 = hooks.at(k2);
    check_vega(k1, &p1)?;
    check_vega(k2, &p2)?;
    Ok(TwoStrikeSpread::from_points(k1, k2, z1, z2, &p1, &p2, true))
}

/// Optimal strikes along a time grid and the largest step-to-step move.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub times: Vec<f64>,
    pub strikes: Vec<(f64, f64)>,
    pub max_jump_k1: f64,
    pub max_jump_k2: f64,
    /// Index `i` such that the largest move happened between `times[i]` and `times[i+1]`.
    pub worst_step: usize,
}

impl ContinuityReport {
    pub fn max_jump(&self) -> f64 {
        self.max_jump_k1.max(self.max_jump_k2)
    }
}

/// Re-solves the two-strike problem at each time and reports how far the
/// optimal strikes move between consecutive times. A large jump signals a
/// non-unique maximizer; it is reported, never treated as an error.
pub fn strike_continuity_probe<H, F>(family: F, times: &[f64]) -> Result<ContinuityReport>
where
    H: PricingHooks,
    F: Fn(f64) -> (H, SearchDomain),
{
    let mut strikes = Vec::with_capacity(times.len());
    for &t in times {
        let (hooks, domain) = family(t);
        let s = optimal_two_strike(&hooks, &domain)?;
        strikes.push((s.k1, s.k2));
    }
    let mut report = ContinuityReport {
        times: times.to_vec(),
        strikes,
        max_jump_k1: 0.0,
        max_jump_k2: 0.0,
        worst_step: 0,
    };
    let mut worst = 0.0;
    for i in 1..report.strikes.len() {
        let (a, b) = (report.strikes[i - 1], report.strikes[i]);
        let j1 = (b.0 - a.0).abs();
        let j2 = (b.1 - a.1).abs();
        report.max_jump_k1 = report.max_jump_k1.max(j1);
        report.max_jump_k2 = report.max_jump_k2.max(j2);
        if j1.max(j2) > worst {
            worst = j1.max(j2);
            report.worst_step = i - 1;
        }
    }
    Ok(report)
}
