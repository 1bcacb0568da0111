//! Black-Scholes greeks across strikes, indexed by the delta coordinate z.

use volarb::bs::{strike_of_z, z_of_strike};
use volarb::{bs_greeks, MarketState, OptionSpec, Result};

fn main() -> Result<()> {
    let state = MarketState::new(100.0, 0.2, 0.0);
    let tau = 0.25;
    println!("{:>6} {:>9} {:>8} {:>7} {:>8} {:>9} {:>9} {:>9}", "z", "strike", "price", "delta", "vega", "gamma", "vanna", "vomma");
    for i in -4..=4 {
        let z = 0.5 * i as f64;
        let k = strike_of_z(&state, z, tau)?;
        let g = bs_greeks(&state, &OptionSpec::call(k, tau))?;
        println!(
            "{z:>6.2} {k:>9.3} {:>8.4} {:>7.4} {:>8.4} {:>9.5} {:>9.4} {:>9.4}",
            g.price, g.delta, g.vega, g.gamma, g.vanna, g.vomma
        );
        debug_assert!((z_of_strike(&state, k, tau)? - z).abs() < 1e-12);
    }
    Ok(())
}
