//! Cross-sectional statistics of P&L paths.

use serde::Serialize;

use crate::error::{Error, Result};

/// Quantile of sorted data with linear interpolation between order
/// statistics at position `p·(n−1)`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean and sample standard deviation.
pub fn mean_stdev(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var.sqrt())
}

/// Per-date P&L summary across paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PnlStats {
    pub times: Vec<f64>,
    pub q25: Vec<f64>,
    pub median: Vec<f64>,
    pub q75: Vec<f64>,
    pub mean: Vec<f64>,
    pub stdev: Vec<f64>,
    pub n_paths: usize,
}

impl PnlStats {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn last(v: &[f64]) -> f64 {
        *v.last().expect("non-empty stats")
    }

    pub fn terminal_median(&self) -> f64 {
        Self::last(&self.median)
    }

    pub fn terminal_iqr(&self) -> f64 {
        Self::last(&self.q75) - Self::last(&self.q25)
    }

    /// Standard error of the terminal sample mean.
    pub fn terminal_standard_error(&self) -> f64 {
        Self::last(&self.stdev) / (self.n_paths as f64).sqrt()
    }
}

/// `series[path][date]` to per-date statistics.
pub fn pnl_quantiles(times: &[f64], series: &[Vec<f64>]) -> Result<PnlStats> {
    if series.len() < 2 {
        return Err(Error::domain("P&L statistics need at least two paths"));
    }
    if let Some(bad) = series.iter().position(|s| s.len() != times.len()) {
        return Err(Error::domain(format!("path {bad} has the wrong number of dates")));
    }
    let mut stats = PnlStats {
        times: times.to_vec(),
        q25: Vec::with_capacity(times.len()),
        median: Vec::with_capacity(times.len()),
        q75: Vec::with_capacity(times.len()),
        mean: Vec::with_capacity(times.len()),
        stdev: Vec::with_capacity(times.len()),
        n_paths: series.len(),
    };
    let mut column = vec![0.0; series.len()];
    for d in 0..times.len() {
        for (c, s) in column.iter_mut().zip(series) {
            *c = s[d];
        }
        if column.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain(format!("non-finite P&L at date {d}")));
        }
        column.sort_by(f64::total_cmp);
        stats.q25.push(quantile(&column, 0.25));
        stats.median.push(quantile(&column, 0.5));
        stats.q75.push(quantile(&column, 0.75));
        let (m, s) = mean_stdev(&column);
        stats.mean.push(m);
        stats.stdev.push(s);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_to_hundred() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(quantile(&xs, 0.25), 25.75);
        assert_eq!(quantile(&xs, 0.5), 50.5);
        assert_eq!(quantile(&xs, 0.75), 75.25);
    }

    #[test]
    fn needs_two_paths() {
        assert!(pnl_quantiles(&[0.0], &[vec![1.0]]).is_err());
        assert!(pnl_quantiles(&[0.0], &[]).is_err());
    }
}
