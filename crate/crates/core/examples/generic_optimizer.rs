//! The generic two-strike search driven by user-supplied vega and profit
//! density functions, and by a SABR market.

use volarb::bs::strike_of_z;
use volarb::two_strike::{optimal_two_strike, FnHooks, SearchDomain};
use volarb::{bs_greeks, MarketModel, MarketState, ModelHooks, OptionSpec, Result, SabrParams, TrueDynamics};

fn main() -> Result<()> {
    let state = MarketState::new(1.0, 0.2, 0.0);
    let tau = 1.0;
    let domain = SearchDomain::new(state, tau).with_z_range(-5.0, 5.0);

    // a toy density that rewards strikes near 0.9 and penalizes the wings
    let hooks = FnHooks::new(
        |k: f64| bs_greeks(&state, &OptionSpec::call(k, tau)).map_or(f64::NAN, |g| g.vega),
        |k: f64| (-(k - 0.9f64).powi(2) / 0.01).exp() - 0.2 * (-(k - 1.3f64).powi(2) / 0.02).exp(),
    );
    let s = optimal_two_strike(&hooks, &domain)?;
    println!("toy density:  long {:.4}  short {:.4}  profit {:.5}", s.k1, s.k2, s.profit_rate);

    let truth = TrueDynamics::new(0.0, 0.2, 0.3, -0.3);
    for b_tilde in [0.0, 0.1, 0.2, 0.4] {
        let hooks = ModelHooks::new(state, tau, truth, MarketModel::Sabr(SabrParams::new(b_tilde, -0.5)));
        let s = optimal_two_strike(&hooks, &domain)?;
        println!(
            "SABR b~={b_tilde:.1}: long {:.4} (z {:+.3})  short {:.4} (z {:+.3})  profit {:.5}",
            s.k1, s.z1, s.k2, s.z2, s.profit_rate
        );
    }
    println!("domain strikes {:.4}..{:.4}", strike_of_z(&state, 5.0, tau)?, strike_of_z(&state, -5.0, tau)?);
    Ok(())
}
