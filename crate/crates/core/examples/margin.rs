//! Profit per unit of retail margin, and why it has no finite optimum in a
//! Black-Scholes market.

use volarb::margin::{naked_short_margin, optimal_margin_spread, MarginOutcome, MarginParams};
use volarb::two_strike::SearchDomain;
use volarb::{MarketModel, MarketState, ModelHooks, Result, SabrParams, TrueDynamics};

fn main() -> Result<()> {
    let params = MarginParams::default();
    println!("naked short call S=100 K=108 P=1: margin {}", naked_short_margin(100.0, 108.0, 1.0, &params));

    let state = MarketState::new(100.0, 0.2, 0.0);
    let tau = 0.25;
    let truth = TrueDynamics::new(0.0, 0.25, 0.4, -0.5);
    let bs = ModelHooks::new(state, tau, truth, MarketModel::BlackScholes);
    for z_max in [4.0, 6.0, 8.0] {
        let domain = SearchDomain::new(state, tau).with_z_range(-z_max, z_max);
        let out = optimal_margin_spread(&bs, &params, &domain)?;
        let s = out.best();
        println!(
            "BS market, z_max {z_max}: {} long {:.2} short {:.2} profit/margin {:.4}",
            if out.is_unbounded() { "unbounded" } else { "interior" },
            s.spread.k1,
            s.spread.k2,
            s.spread.profit_rate
        );
    }

    let truth = TrueDynamics::new(0.0, 0.2, 0.1, -0.3);
    let sabr = ModelHooks::new(state, tau, truth, MarketModel::Sabr(SabrParams::new(0.6, -0.3)));
    let out = optimal_margin_spread(&sabr, &params, &SearchDomain::new(state, tau).with_z_range(-4.0, 4.0))?;
    if let MarginOutcome::Interior(s) = out {
        println!(
            "SABR market: long {:.2} x{:.5}, short {:.2} x{:.5}, margin used {:.6}, profit/margin {:.5}",
            s.spread.k1,
            s.spread.w1,
            s.spread.k2,
            s.spread.w2,
            s.margin_used(),
            s.spread.profit_rate
        );
    }
    Ok(())
}
