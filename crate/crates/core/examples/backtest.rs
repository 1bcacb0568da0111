//! Monte-Carlo P&L of the rebalanced optimal spread against a SABR market
//! whose correlation is wrong, with and without a bid-ask spread.

use volarb::backtest::{run_backtest, BacktestConfig, Strategy};
use volarb::{MarketModel, Result, SabrParams, TrueDynamics};

fn main() -> Result<()> {
    let truth = TrueDynamics::new(0.0, 0.1, 0.2, -0.8);
    let market = MarketModel::Sabr(SabrParams::new(0.2, -0.2));
    for (strategy, vol_spread) in [
        (Strategy::Optimal, 0.0),
        (Strategy::Optimal, 0.00225),
        (Strategy::RiskReversal, 0.0),
        (Strategy::Butterfly, 0.0),
        (Strategy::PerturbedSabr, 0.0),
    ] {
        let cfg = BacktestConfig {
            n_paths: 400,
            strategy,
            vol_spread,
            ..BacktestConfig::default()
        };
        let res = run_backtest(&truth, &market, &cfg)?;
        let last = res.stats.len() - 1;
        println!(
            "{strategy:?} spread {vol_spread}: q25 {:.4} median {:.4} q75 {:.4}",
            res.stats.q25[last], res.stats.median[last], res.stats.q75[last]
        );
    }
    Ok(())
}
