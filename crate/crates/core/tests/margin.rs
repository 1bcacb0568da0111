mod common;

use volarb::bs::strike_of_z;
use volarb::margin::{margin_scan, margin_weights, naked_short_margin, optimal_margin_spread, MarginOutcome, MarginParams};
use volarb::two_strike::{FnHooks, PricingHooks, SearchDomain};
use volarb::{bs_greeks, MarketModel, MarketState, ModelHooks, OptionSpec, SabrParams, TrueDynamics};

fn block() -> (MarketState, TrueDynamics, f64) {
    (MarketState::new(100.0, 0.2, 0.0), TrueDynamics::new(0.0, 0.2, 0.3, -0.3), 0.25)
}

#[test]
fn naked_margin_cases() {
    let m = MarginParams::default();
    for k in [50.0, 99.0, 100.0] {
        assert_eq!(m.lambda(100.0, k), 15.0);
    }
    assert_eq!(m.lambda(100.0, 200.0), 10.0);
    assert!((naked_short_margin(100.0, 108.0, 1.0, &m) - 11.0).abs() < 1e-12);
    for k in [10.0, 100.0, 104.0, 1000.0] {
        assert!(naked_short_margin(100.0, k, 2.0, &m) >= 2.0 + 10.0);
    }
}

#[test]
fn weights_match_direct_substitution() {
    let (state, truth, tau) = block();
    let hooks = ModelHooks::new(state, tau, truth, MarketModel::BlackScholes);
    let m = MarginParams::default();
    for k in [80.0, 95.0, 100.0, 110.0, 130.0] {
        let g = bs_greeks(&state, &OptionSpec::call(k, tau)).unwrap();
        let lambda = (0.15 * 100.0 - if k > 100.0 { k - 100.0 } else { 0.0 }).max(10.0);
        let plus = g.price + g.delta * 1.5 * 100.0;
        let minus = (lambda + g.price) * (1.0 - g.delta) + 0.5 * 100.0 * g.delta;
        let w = margin_weights(100.0, k, &hooks.at(k), &m);
        assert!((w.plus - plus).abs() < 1e-12 && (w.minus - minus).abs() < 1e-12);
        assert!(w.plus > 0.0 && w.minus > 0.0);
    }
}

#[test]
fn long_margin_vanishes_faster_than_vega() {
    let (state, truth, tau) = block();
    let hooks = ModelHooks::new(state, tau, truth, MarketModel::BlackScholes);
    let m = MarginParams::default();
    let domain = SearchDomain::new(state, tau).with_z_range(-6.0, 6.0);
    let rows = margin_scan(&hooks, &m, &domain).unwrap();
    // last decade of strikes: rows are in increasing z, so decreasing strike
    let top = rows[0].strike;
    let tail: Vec<_> = rows.iter().filter(|r| r.strike >= top / 10.0 && r.strike > 100.0).collect();
    assert!(tail.len() > 10);
    for pair in tail.windows(2) {
        // pair[0] has the larger strike
        assert!(pair[0].beta_plus / pair[0].vega < pair[1].beta_plus / pair[1].vega);
    }
}

#[test]
fn black_scholes_objective_is_unbounded() {
    let (state, truth, tau) = block();
    let hooks = ModelHooks::new(state, tau, truth, MarketModel::BlackScholes);
    let mut last = f64::NEG_INFINITY;
    for z_max in [4.0, 6.0, 8.0] {
        let domain = SearchDomain::new(state, tau).with_z_range(-z_max, z_max);
        let out = optimal_margin_spread(&hooks, &MarginParams::default(), &domain).unwrap();
        assert!(out.is_unbounded(), "z_max {z_max}");
        let p = out.best().spread.profit_rate;
        assert!(p > last, "{p} <= {last}");
        last = p;
    }
}

#[test]
fn zero_profit_density_gives_zero() {
    let (state, _, tau) = block();
    let hooks = FnHooks::new(
        |k: f64| bs_greeks(&state, &OptionSpec::call(k, tau)).unwrap().vega,
        |_| 0.0,
    );
    let domain = SearchDomain::new(state, tau).with_z_range(-4.0, 4.0);
    let out = optimal_margin_spread(&hooks, &MarginParams::default(), &domain).unwrap();
    let s = out.best().spread;
    assert_eq!(s.profit_rate, 0.0);
    assert!(!s.arbitrage);
}

#[test]
fn restricted_domain_maximizer_on_boundary() {
    let (state, truth, tau) = block();
    let hooks = ModelHooks::new(state, tau, truth, MarketModel::BlackScholes);
    let m = MarginParams::default();
    let domain = SearchDomain::new(state, tau).with_z_range(-1.0, 1.0).with_grid_step(0.01);
    let out = optimal_margin_spread(&hooks, &m, &domain).unwrap();
    let best = out.best();
    assert!(best.on_boundary);
    // oracle: exhaustive scan of the objective on the same grid
    let zs: Vec<f64> = (0..=200).map(|i| -1.0 + 0.01 * i as f64).collect();
    let mut top = (0.0, 0.0, f64::NEG_INFINITY);
    for &z1 in &zs {
        for &z2 in &zs {
            let (k1, k2) = (strike_of_z(&state, z1, tau).unwrap(), strike_of_z(&state, z2, tau).unwrap());
            let (a, b) = (hooks.at(k1), hooks.at(k2));
            let (wa, wb) = (margin_weights(100.0, k1, &a, &m), margin_weights(100.0, k2, &b, &m));
            let g = (b.vega * a.profit - a.vega * b.profit) / (wb.minus * a.vega + wa.plus * b.vega);
            if g > top.2 {
                top = (z1, z2, g);
            }
        }
    }
    assert!(top.0 == -1.0 || top.0 == 1.0 || top.1 == -1.0 || top.1 == 1.0);
    assert!((best.spread.z1 - top.0).abs() < 1e-9 && (best.spread.z2 - top.1).abs() < 1e-9);
    assert!((best.spread.profit_rate - top.2).abs() < 1e-12 * top.2.abs());
}

#[test]
fn interior_solution_uses_all_margin() {
    let (state, _, tau) = block();
    // truth with less vol-of-vol than the market: wing options are rich
    let truth = TrueDynamics::new(0.0, 0.2, 0.1, -0.3);
    let hooks = ModelHooks::new(state, tau, truth, MarketModel::Sabr(SabrParams::new(0.6, -0.3)));
    let domain = SearchDomain::new(state, tau).with_z_range(-4.0, 4.0);
    let out = optimal_margin_spread(&hooks, &MarginParams::default(), &domain).unwrap();
    let MarginOutcome::Interior(s) = out else {
        panic!("expected an interior maximizer, got {out:?}");
    };
    assert!(!s.on_boundary && s.spread.arbitrage);
    assert!((s.margin_used() - 1.0).abs() < 1e-10);
    let (a, b) = (hooks.at(s.spread.k1), hooks.at(s.spread.k2));
    assert!((s.spread.w1 * a.vega - s.spread.w2 * b.vega).abs() < 1e-12 * s.spread.w1 * a.vega);
}
