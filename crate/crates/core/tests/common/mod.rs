#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use volarb::two_strike::{measure_profit, Atom, PricingHooks, SignedStrikeMeasure};
use volarb::{MarketState, TrueDynamics};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameter box used by the random bound checks.
pub fn random_bs_block(r: &mut ChaCha8Rng) -> (MarketState, TrueDynamics, f64) {
    let sigma = r.gen_range(0.05..0.5);
    let sigma_tilde = r.gen_range(0.05..0.5);
    let b = r.gen_range(0.01..1.0);
    let rho = r.gen_range(-1.0..=1.0);
    let tau = r.gen_range(1.0 / 12.0..2.0);
    (
        MarketState::new(1.0, sigma_tilde, 0.0),
        TrueDynamics::new(0.0, sigma, b, rho),
        tau,
    )
}

/// A random five-atom measure on `strikes`, projected onto the vega-neutral
/// hyperplane and rescaled to total variation one.
pub fn random_vega_neutral_measure<H: PricingHooks>(
    r: &mut ChaCha8Rng,
    hooks: &H,
    strikes: (f64, f64),
) -> SignedStrikeMeasure {
    loop {
        let ks: Vec<f64> = (0..5)
            .map(|_| r.gen_range(strikes.0.ln()..strikes.1.ln()).exp())
            .collect();
        let g: Vec<f64> = ks.iter().map(|&k| hooks.vega(k)).collect();
        let raw: Vec<f64> = (0..5).map(|_| r.gen_range(-1.0..1.0)).collect();
        // remove the component along g
        let gg: f64 = g.iter().map(|x| x * x).sum();
        assert!(gg.is_finite() && gg > 0.0, "hooks give no usable vega on {strikes:?}");
        let wg: f64 = raw.iter().zip(&g).map(|(w, x)| w * x).sum();
        let w: Vec<f64> = raw.iter().zip(&g).map(|(w, x)| w - wg / gg * x).collect();
        let atoms: Vec<Atom> = ks.iter().zip(&w).map(|(&strike, &weight)| Atom { strike, weight }).collect();
        if let Ok(m) = SignedStrikeMeasure::normalized(atoms) {
            return m;
        }
    }
}

/// Largest profit over `n` random admissible measures.
pub fn best_random_profit<H: PricingHooks>(r: &mut ChaCha8Rng, hooks: &H, strikes: (f64, f64), n: usize) -> f64 {
    (0..n)
        .map(|_| {
            let m = random_vega_neutral_measure(r, hooks, strikes);
            measure_profit(hooks, &m).expect("projected measure is admissible")
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Central first difference.
pub fn d1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central second difference.
pub fn d2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Central mixed difference.
pub fn d11(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, hx: f64, hy: f64) -> f64 {
    (f(x + hx, y + hy) - f(x + hx, y - hy) - f(x - hx, y + hy) + f(x - hx, y - hy)) / (4.0 * hx * hy)
}

/// Brute-force maximum of `f` over `[lo, hi]²` on a uniform grid, refined
/// by repeated zooming around the best point.
pub fn zoom_argmax(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64) -> (f64, f64, f64) {
    let n = 200;
    let mut best = (lo, lo, f64::NEG_INFINITY);
    let (mut a0, mut a1, mut b0, mut b1) = (lo, hi, lo, hi);
    for _ in 0..12 {
        for i in 0..=n {
            for j in 0..=n {
                let x = a0 + (a1 - a0) * i as f64 / n as f64;
                let y = b0 + (b1 - b0) * j as f64 / n as f64;
                let v = f(x, y);
                if v > best.2 {
                    best = (x, y, v);
                }
            }
        }
        let wx = (a1 - a0) / 10.0;
        let wy = (b1 - b0) / 10.0;
        a0 = (best.0 - wx).max(lo);
        a1 = (best.0 + wx).min(hi);
        b0 = (best.1 - wy).max(lo);
        b1 = (best.1 + wy).min(hi);
    }
    best
}

/// Scaled differences between analytic greeks and finite-difference
/// oracles, in the order delta, vega, gamma, vanna, vomma.
///
/// First-order greeks are differenced from the price, second-order ones from
/// the analytic first-order greeks. Spot is bumped by `1e-4` of one
/// total-volatility move `S·σ√τ`, volatility by `1e-4·σ`. Each
/// difference is divided by `max(|greek|, 1e-3·unit)` where `unit` is the
/// greek's natural size at the money, so that greeks passing through zero
/// are not judged by a relative error of a vanishing quantity.
pub fn greek_fd_errors(s: f64, k: f64, vol: f64, tau: f64) -> [f64; 5] {
    use volarb::bs::{greeks, price, OptionKind};
    let kind = OptionKind::Call;
    let g = greeks(s, k, vol, tau, kind).unwrap();
    let hs = 1e-4 * s * vol * tau.sqrt();
    let hv = 1e-4 * vol;
    let p = |s: f64, v: f64| price(s, k, v, tau, kind).unwrap();
    let gr = |s: f64, v: f64| greeks(s, k, v, tau, kind).unwrap();
    let fd = [
        d1(|x| p(x, vol), s, hs),
        d1(|x| p(s, x), vol, hv),
        d1(|x| gr(x, vol).delta, s, hs),
        d1(|x| gr(s, x).delta, vol, hv),
        d1(|x| gr(s, x).vega, vol, hv),
    ];
    let n0 = volarb::normal::pdf(0.0);
    let sq = tau.sqrt();
    let unit = [1.0, s * sq * n0, n0 / (s * vol * sq), n0 / vol, s * sq * n0 / vol];
    let an = [g.delta, g.vega, g.gamma, g.vanna, g.vomma];
    let mut out = [0.0; 5];
    for i in 0..5 {
        out[i] = (an[i] - fd[i]).abs() / an[i].abs().max(1e-3 * unit[i]);
    }
    out
}
