//! Closed-form optimal two-strike spread when the market prices with
//! Black-Scholes but volatility is really stochastic.

use volarb::bs_arb::{bs_w, optimal_bs_spread};
use volarb::{MarketState, Result, TrueDynamics};

fn main() -> Result<()> {
    let state = MarketState::new(100.0, 0.2, 0.0);
    let tau = 1.0 / 12.0;
    for rho in [-0.8, -0.3, 0.0, 0.5] {
        let truth = TrueDynamics::new(0.0, 0.2, 0.4, rho);
        let s = optimal_bs_spread(&state, &truth, tau)?;
        let w = bs_w(state.y, truth.sigma, truth.abs_vol_of_vol(state.y), rho, tau);
        println!(
            "rho {rho:>5.2}  w {w:>7.4}  long {:>8.3} x{:.4}  short {:>8.3} x{:.4}  hedge {:>7.4}  profit/yr {:.5}",
            s.k1, s.w1, s.k2, s.w2, s.delta_hedge, s.profit_rate
        );
    }
    Ok(())
}
