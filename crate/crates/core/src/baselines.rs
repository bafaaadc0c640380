//! Baseline lead-lag estimators: classic DTW on normalized prices and the
//! thermal optimal path (TOP).

use crate::alignment::{relaxed_dp, AlignmentPath};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// DTW on price levels with squared pointwise cost and the same step and
/// boundary rules as the aligned-correlation path.
pub fn dtw_path(x: &TimeSeries, y: &TimeSeries, psi: usize) -> Result<(AlignmentPath, f64)> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    let (xv, yv) = (x.values(), y.values());
    Ok(relaxed_dp(xv.len(), yv.len(), psi, |i, out| {
        for (o, b) in out.iter_mut().zip(yv) {
            let d = xv[i] - b;
            *o = d * d;
        }
    }))
}

/// How partition weights are rescaled between anti-diagonals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Renormalization {
    /// Divide by the anti-diagonal sum.
    #[default]
    Sum,
    /// Divide by the anti-diagonal maximum.
    Max,
    /// Raw weights; fails with [`Error::NumericalUnderflow`] once a diagonal vanishes.
    None,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TopConfig {
    pub temperature: f64,
    /// Paths may start at any cell with both indices `<= psi`.
    pub psi: usize,
    pub renormalization: Renormalization,
}

impl TopConfig {
    pub const DEFAULT_PSI: usize = 25;

    pub fn new(temperature: f64) -> Self {
        Self { temperature, psi: Self::DEFAULT_PSI, renormalization: Renormalization::Sum }
    }

    /// The four temperatures of the benchmark suite.
    pub fn benchmark_temperatures() -> [f64; 4] {
        [2.0, 1.0, 0.5, 0.2]
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Thermally averaged lag profile `<x(t)>` of length `x.len()`.
///
/// Forward partition weights obey
/// `G(i,j) = exp(-|x_i - y_j| / T) * (G(i-1,j) + G(i,j-1) + G(i-1,j-1) + s(i,j))`
/// with a unit source `s` on start cells. Each anti-diagonal `i + j = k` yields
/// the weighted mean offset `j - i`; the profile at time `t` blends diagonals
/// `2t - 1, 2t, 2t + 1` with weights 1/4, 1/2, 1/4.
///
/// The two most recent anti-diagonals always share one scale factor, so the
/// rescaling constants cancel in every average.
pub fn top_lead_lag(x: &TimeSeries, y: &TimeSeries, cfg: &TopConfig) -> Result<Vec<f64>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if !(cfg.temperature > 0.0 && cfg.temperature.is_finite()) {
        return Err(Error::InvalidConfig(format!("temperature {} must be positive", cfg.temperature)));
    }
    let n = x.len();
    let (xv, yv) = (x.values(), y.values());
    let beta = 1.0 / cfg.temperature;
    let averages = match cfg.renormalization {
        Renormalization::None => raw_diagonal_averages(xv, yv, beta, cfg.psi)?,
        scheme => log_diagonal_averages(xv, yv, beta, cfg.psi, scheme)?,
    };
    let diagonals = averages.len();

    Ok((0..n)
        .map(|t| {
            let (mut acc, mut wsum) = (0.0, 0.0);
            for (offset, wt) in [(-1isize, 0.25), (0, 0.5), (1, 0.25)] {
                let s = 2 * t as isize + offset;
                if s >= 0 && (s as usize) < diagonals {
                    acc += wt * averages[s as usize];
                    wsum += wt;
                }
            }
            acc / wsum
        })
        .collect())
}

/// Weighted mean offset `j - i` of one anti-diagonal from per-row weights.
fn offset_average(s: usize, rows: std::ops::RangeInclusive<usize>, weight: impl Fn(usize) -> f64) -> Result<f64> {
    let (mut w, mut wl) = (0.0, 0.0);
    for i in rows {
        let g = weight(i);
        w += g;
        wl += g * ((s - i) as f64 - i as f64);
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(Error::NumericalUnderflow(s));
    }
    Ok(wl / w)
}

/// Partition weights kept as logarithms, shifted per anti-diagonal by its
/// log-sum or log-max. Arrays are indexed by row `i`; entries off the current
/// anti-diagonal hold `-inf`.
fn log_diagonal_averages(xv: &[f64], yv: &[f64], beta: f64, psi: usize, scheme: Renormalization) -> Result<Vec<f64>> {
    let n = xv.len();
    let mut l2 = vec![f64::NEG_INFINITY; n];
    let mut l1 = vec![f64::NEG_INFINITY; n];
    let mut l0 = vec![f64::NEG_INFINITY; n];
    // log of the common factor by which stored weights exceed the true ones
    let mut ln_scale = 0.0f64;
    let mut averages = Vec::with_capacity(2 * n - 1);
    for s in 0..2 * n - 1 {
        let (lo, hi) = (s.saturating_sub(n - 1), s.min(n - 1));
        l0.iter_mut().for_each(|v| *v = f64::NEG_INFINITY);
        for i in lo..=hi {
            let j = s - i;
            let mut pred = l1[i];
            if i > 0 {
                pred = log_add_exp(pred, log_add_exp(l1[i - 1], l2[i - 1]));
            }
            if i <= psi && j <= psi {
                pred = log_add_exp(pred, ln_scale);
            }
            l0[i] = pred - (xv[i] - yv[j]).abs() * beta;
        }
        let ln_c = match scheme {
            Renormalization::Max => l0[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max),
            _ => l0[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, log_add_exp),
        };
        if !ln_c.is_finite() {
            return Err(Error::NumericalUnderflow(s));
        }
        for v in l0[lo..=hi].iter_mut().chain(l1.iter_mut()) {
            *v -= ln_c;
        }
        ln_scale -= ln_c;
        averages.push(offset_average(s, lo..=hi, |i| l0[i].exp())?);
        std::mem::swap(&mut l2, &mut l1);
        std::mem::swap(&mut l1, &mut l0);
    }
    Ok(averages)
}

/// Unscaled linear weights; fails once a whole anti-diagonal underflows.
fn raw_diagonal_averages(xv: &[f64], yv: &[f64], beta: f64, psi: usize) -> Result<Vec<f64>> {
    let n = xv.len();
    let mut d2 = vec![0.0; n];
    let mut d1 = vec![0.0; n];
    let mut d0 = vec![0.0; n];
    let mut averages = Vec::with_capacity(2 * n - 1);
    for s in 0..2 * n - 1 {
        let (lo, hi) = (s.saturating_sub(n - 1), s.min(n - 1));
        d0.iter_mut().for_each(|v| *v = 0.0);
        for i in lo..=hi {
            let j = s - i;
            let mut pred = d1[i];
            if i > 0 {
                pred += d1[i - 1] + d2[i - 1];
            }
            if i <= psi && j <= psi {
                pred += 1.0;
            }
            d0[i] = (-(xv[i] - yv[j]).abs() * beta).exp() * pred;
        }
        averages.push(offset_average(s, lo..=hi, |i| d0[i])?);
        std::mem::swap(&mut d2, &mut d1);
        std::mem::swap(&mut d1, &mut d0);
    }
    Ok(averages)
}
