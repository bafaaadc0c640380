//! Synthetic series with known piecewise-constant lead-lag schedules.
//!
//! `X` is a stationary AR(1) process and `Y(t) = a X(t - lag(t)) + eta` with
//! Gaussian `eta` of standard deviation `f * sigma_xi`. All randomness comes from
//! a single `ChaCha8Rng` seeded with `seed_from_u64(seed)`: first the `X` path
//! (including pre- and post-roll), then `eta`.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// Segment start indices (1-based, for length 300) and lags of each schedule.
/// Where two displayed segments share an endpoint the later one owns it.
const SCHEDULES: [(&[usize], &[i64]); 4] = [
    (&[1, 50, 101, 151, 201, 251], &[0, 5, 10, -10, -5, 0]),
    (&[1, 26, 51, 76, 101, 126, 151, 176, 201, 226, 251, 276], &[0, 5, 10, 15, 10, 5, -5, -10, -15, -10, -5, 0]),
    (&[1, 50, 101, 151, 201, 251], &[0, 5, 10, 15, 10, 5]),
    (&[1, 26, 51, 76, 101, 126, 151, 176, 201, 226, 251, 276], &[0, 5, 10, 15, 20, 25, 30, 25, 20, 15, 10, 5]),
];

const REFERENCE_LEN: usize = 300;

/// Lag at every (0-based) time index for schedule 1..=4.
///
/// For `n != 300` segment boundaries scale proportionally:
/// a segment starting at 1-based index `s` starts at 0-based `(s - 1) * n / 300`.
pub fn lag_schedule(schedule_id: u8, n: usize) -> Result<Vec<i64>> {
    let (starts, lags) =
        SCHEDULES.get(usize::from(schedule_id).wrapping_sub(1)).ok_or(Error::UnknownSchedule(schedule_id))?;
    let bounds: Vec<usize> = starts.iter().map(|s| (s - 1) * n / REFERENCE_LEN).collect();
    Ok((0..n)
        .map(|t| {
            let seg = bounds.iter().rposition(|&b| b <= t).unwrap_or(0);
            lags[seg]
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StsConfig {
    pub a: f64,
    pub b: f64,
    /// Noise ratio `sigma_eta / sigma_xi`.
    pub f: f64,
    pub sigma_xi: f64,
    pub n: usize,
    pub schedule_id: u8,
    pub seed: u64,
}

impl Default for StsConfig {
    fn default() -> Self {
        Self { a: 0.8, b: 0.7, f: 0.5, sigma_xi: 1.0, n: 300, schedule_id: 1, seed: 0 }
    }
}

impl StsConfig {
    pub fn schedule(schedule_id: u8, seed: u64) -> Self {
        Self { schedule_id, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("|b| = {} must be below 1", self.b.abs())));
        }
        if !(self.f >= 0.0) || !(self.sigma_xi > 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidConfig("need f >= 0, sigma_xi > 0 and finite a".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!("n = {} must be at least 2", self.n)));
        }
        if !(1..=4).contains(&self.schedule_id) {
            return Err(Error::UnknownSchedule(self.schedule_id));
        }
        Ok(())
    }

    /// `sigma_xi^2 / (1 - b^2)`
    pub fn var_x(&self) -> f64 {
        self.sigma_xi * self.sigma_xi / (1.0 - self.b * self.b)
    }

    /// `sigma_xi^2 (a^2 / (1 - b^2) + f^2)`
    pub fn var_y(&self) -> f64 {
        self.sigma_xi * self.sigma_xi * (self.a * self.a / (1.0 - self.b * self.b) + self.f * self.f)
    }
}

#[derive(Clone, Debug)]
pub struct StsInstance {
    pub x: TimeSeries,
    pub y: TimeSeries,
    pub true_lags: Vec<i64>,
    pub config: StsConfig,
}

impl StsInstance {
    /// CSV with columns `t, X, Y, true_lag`; `t` is 1-based.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "X", "Y", "true_lag"])?;
        for (t, ((x, y), lag)) in self.x.values().iter().zip(self.y.values()).zip(&self.true_lags).enumerate() {
            out.write_record([(t + 1).to_string(), format!("{x:.6}"), format!("{y:.6}"), lag.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn ar1_path(rng: &mut ChaCha8Rng, len: usize, b: f64, sigma_xi: f64) -> Vec<f64> {
    let innov = Normal::new(0.0, sigma_xi).expect("sigma_xi is positive");
    let stationary = Normal::new(0.0, sigma_xi / (1.0 - b * b).sqrt()).expect("|b| < 1");
    let mut out = Vec::with_capacity(len);
    let mut prev = stationary.sample(rng);
    out.push(prev);
    for _ in 1..len {
        prev = b * prev + innov.sample(rng);
        out.push(prev);
    }
    out
}

/// Stationary AR(1) realization: `X(1) ~ N(0, sigma_xi^2 / (1 - b^2))`.
pub fn gen_ar1(n: usize, b: f64, sigma_xi: f64, seed: u64) -> Result<TimeSeries> {
    if !(b.abs() < 1.0) || !(sigma_xi > 0.0) {
        return Err(Error::InvalidConfig("need |b| < 1 and sigma_xi > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    TimeSeries::new("X", ar1_path(&mut rng, n, b, sigma_xi))
}

pub fn gen_sts(cfg: &StsConfig) -> Result<StsInstance> {
    cfg.validate()?;
    let lags = lag_schedule(cfg.schedule_id, cfg.n)?;
    let back = lags.iter().copied().max().unwrap_or(0).max(0) as usize;
    let fwd = lags.iter().copied().min().unwrap_or(0).min(0).unsigned_abs() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    // ext[k] holds X at time k - back
    let ext = ar1_path(&mut rng, back + cfg.n + fwd, cfg.b, cfg.sigma_xi);
    let noise = Normal::new(0.0, cfg.f * cfg.sigma_xi).expect("f * sigma_xi is non-negative");

    let y: Vec<f64> = lags
        .iter()
        .enumerate()
        .map(|(t, &lag)| {
            let source = (t as i64 - lag + back as i64) as usize;
            cfg.a * ext[source] + noise.sample(&mut rng)
        })
        .collect();
    Ok(StsInstance {
        x: TimeSeries::new("X", ext[back..back + cfg.n].to_vec())?,
        y: TimeSeries::new("Y", y)?,
        true_lags: lags,
        config: cfg.clone(),
    })
}
