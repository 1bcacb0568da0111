//! How much of the optimal profit a risk reversal and a butterfly capture.

use volarb::bs_arb::{butterfly, profit_split, risk_reversal, universal_constants};
use volarb::{MarketState, Result, TrueDynamics};

fn main() -> Result<()> {
    let c = universal_constants();
    println!("z0 = {:.6}, x0 = {:.6}, K0 = {:.6}", c.z0, c.x0, c.k0);

    let state = MarketState::new(100.0, 0.2, 0.0);
    let tau = 0.25;
    let truth = TrueDynamics::new(0.0, 0.2, 0.6, -0.5);
    for atom in risk_reversal(&state, &truth, tau)?.atoms() {
        println!("risk reversal: strike {:.3} weight {:+.4}", atom.strike, atom.weight);
    }
    for atom in butterfly(&state, tau)?.atoms() {
        println!("butterfly:     strike {:.3} weight {:+.4}", atom.strike, atom.weight);
    }

    println!("{:>6} {:>10} {:>10} {:>10} {:>6}", "b", "optimal", "rr", "bf", "alpha");
    for b in [0.05, 0.2, 0.6, 1.5] {
        let p = profit_split(&state, &TrueDynamics { b, ..truth }, tau)?;
        println!("{b:>6.2} {:>10.6} {:>10.6} {:>10.6} {:>6.3}", p.p_opt, p.p_rr, p.p_bf, p.alpha);
    }
    Ok(())
}
