//! Hagan smile, first-order price correction, and optimal strikes against
//! a SABR market for small market vol-of-vol.

use volarb::sabr::{hagan_implied_vol, perturbed_optimal_strikes, perturbed_price, sabr_price_and_greeks};
use volarb::two_strike::{optimal_two_strike, SearchDomain};
use volarb::{MarketModel, MarketState, ModelHooks, OptionSpec, Result, SabrParams, TrueDynamics};

fn main() -> Result<()> {
    let state = MarketState::new(1.0, 0.2, 0.0);
    let tau = 1.0;
    let p = SabrParams::new(0.1, -0.5);
    for k in [0.8, 0.9, 1.0, 1.1, 1.2] {
        let opt = OptionSpec::call(k, tau);
        println!(
            "K {k:.1}: implied vol {:.5}  price {:.6}  first-order {:.6}",
            hagan_implied_vol(1.0, k, 0.2, &p, tau)?,
            sabr_price_and_greeks(&state, &opt, &p)?.price,
            perturbed_price(&state, &opt, &p)?
        );
    }

    let truth = TrueDynamics::new(0.0, 0.2, 0.3, -0.3);
    println!("{:>6} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}", "b~", "K1 zero", "K1 pert", "K1 num", "K2 zero", "K2 pert", "K2 num");
    for b in [0.01, 0.02, 0.05, 0.1] {
        let params = SabrParams::new(b, -0.5);
        let terms = perturbed_optimal_strikes(&state, &truth, &params, tau)?;
        let k = terms.strikes();
        let hooks = ModelHooks::new(state, tau, truth, MarketModel::Sabr(params));
        let num = optimal_two_strike(&hooks, &SearchDomain::new(state, tau))?;
        println!(
            "{b:>6.2} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            terms.k0[0], k[0], num.k1, terms.k0[1], k[1], num.k2
        );
    }
    Ok(())
}
