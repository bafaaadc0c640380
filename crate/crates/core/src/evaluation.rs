//! Self-consistency (windowed slope significance) and one-step forecast MAD
//! protocols for comparing lead-lag estimators on synthetic instances.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::alignment::{aligned_correlation, lead_lag_series, AcConfig, LagAxis};
use crate::baselines::{dtw_path, top_lead_lag, TopConfig};
use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::series::normalize;
use crate::synthetic::StsInstance;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Ac,
    Top(f64),
    Dtw,
    Actual,
    Unsynced,
}

impl Model {
    /// Row set of the comparison tables, in table order.
    pub fn table_set() -> Vec<Model> {
        let mut v = vec![Model::Ac];
        v.extend(TopConfig::benchmark_temperatures().map(Model::Top));
        v.extend([Model::Dtw, Model::Actual, Model::Unsynced]);
        v
    }

    pub fn parse_list(s: &str) -> Result<Vec<Model>> {
        s.split(',').map(str::trim).filter(|t| !t.is_empty()).map(str::parse).collect()
    }

    pub fn is_estimator(&self) -> bool {
        matches!(self, Model::Ac | Model::Top(_) | Model::Dtw)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Ac => f.write_str("AC"),
            Model::Top(t) => write!(f, "TOP, T={t}"),
            Model::Dtw => f.write_str("DTW"),
            Model::Actual => f.write_str("Actual path"),
            Model::Unsynced => f.write_str("Unsynced Path"),
        }
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Ok(match lower.as_str() {
            "ac" => Model::Ac,
            "dtw" => Model::Dtw,
            "actual" => Model::Actual,
            "unsynced" => Model::Unsynced,
            _ => match lower.strip_prefix("top:").map(str::parse::<f64>) {
                Some(Ok(t)) if t > 0.0 && t.is_finite() => Model::Top(t),
                _ => return Err(Error::InvalidConfig(format!("unknown model `{s}`"))),
            },
        })
    }
}

#[derive(Clone, Debug)]
pub struct EstimatorSettings {
    pub ac: AcConfig,
    pub dtw_psi: usize,
    pub top_psi: usize,
    pub execution: Execution,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self { ac: AcConfig::default(), dtw_psi: 25, top_psi: TopConfig::DEFAULT_PSI, execution: Execution::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ModelProfile {
    pub model: Model,
    /// Lag per time index of `Y`, length `n`.
    pub lags: Vec<f64>,
}

/// Lag profile of one model on an instance. Estimators see z-scored series.
pub fn estimate_profile(instance: &StsInstance, model: Model, settings: &EstimatorSettings) -> Result<Vec<f64>> {
    let n = instance.x.len();
    Ok(match model {
        Model::Actual => instance.true_lags.iter().map(|&l| l as f64).collect(),
        Model::Unsynced => vec![0.0; n],
        _ => {
            let (zx, zy) = (normalize(&instance.x)?, normalize(&instance.y)?);
            match model {
                Model::Ac => aligned_correlation(&zx, &zy, &settings.ac)?.price_lag_profile(LagAxis::Y),
                Model::Dtw => lead_lag_series(&dtw_path(&zx, &zy, settings.dtw_psi)?.0, n, LagAxis::Y),
                Model::Top(t) => top_lead_lag(&zx, &zy, &TopConfig { psi: settings.top_psi, ..TopConfig::new(t) })?,
                Model::Actual | Model::Unsynced => unreachable!(),
            }
        }
    })
}

pub fn estimate_profiles(
    instance: &StsInstance,
    models: &[Model],
    settings: &EstimatorSettings,
) -> Result<Vec<ModelProfile>> {
    par::try_map(settings.execution, models, |&model| {
        Ok(ModelProfile { model, lags: estimate_profile(instance, model, settings)? })
    })
}

/// Pairs `(X(t - round(lag(t))), Y(t))` for every `t` whose shifted index is in range.
pub fn synchronize(x: &[f64], y: &[f64], lag_profile: &[f64]) -> Result<Vec<(f64, f64)>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    if lag_profile.len() != y.len() {
        return Err(Error::LengthMismatch { left: lag_profile.len(), right: y.len() });
    }
    let pairs = synchronize_range(x, y, lag_profile, 0..y.len(), SyncMode::PerTime);
    if pairs.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    Ok(pairs)
}

/// How lags are read inside a regression window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SyncMode {
    /// Each `t` uses its own rounded lag.
    #[default]
    PerTime,
    /// Every `t` in the window uses the rounded window-mean lag.
    WindowMean,
}

fn synchronize_range(x: &[f64], y: &[f64], profile: &[f64], range: Range<usize>, mode: SyncMode) -> Vec<(f64, f64)> {
    let mean_lag = match mode {
        SyncMode::WindowMean => Some(profile[range.clone()].iter().sum::<f64>() / range.len() as f64),
        SyncMode::PerTime => None,
    };
    range
        .filter_map(|t| {
            let lag = mean_lag.unwrap_or(profile[t]).round() as i64;
            let src = t as i64 - lag;
            (0..x.len() as i64).contains(&src).then(|| (x[src as usize], y[t]))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Alternative {
    #[default]
    TwoSided,
    /// Slope greater than zero.
    Greater,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlopeTest {
    pub slope: f64,
    pub intercept: f64,
    pub t_stat: f64,
    pub critical: f64,
    pub significant: bool,
}

/// OLS of `y` on `x` with intercept and a two-sided t-test of the slope at
/// `alpha = 1 - confidence`.
pub fn ols_slope_test(pairs: &[(f64, f64)], confidence: f64) -> Result<SlopeTest> {
    ols_slope_test_with(pairs, confidence, Alternative::TwoSided)
}

pub fn ols_slope_test_with(pairs: &[(f64, f64)], confidence: f64, alternative: Alternative) -> Result<SlopeTest> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidConfig(format!("confidence {confidence} must lie in (0, 1)")));
    }
    let m = pairs.len();
    if m < 3 {
        return Err(Error::DegenerateRegressor);
    }
    let mf = m as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / mf;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / mf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in pairs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateRegressor);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pairs.iter().map(|&(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let df = mf - 2.0;
    let se = (sse / df / sxx).sqrt();
    let t_stat = if se > 0.0 {
        slope / se
    } else if slope != 0.0 {
        slope.signum() * f64::INFINITY
    } else {
        0.0
    };
    let alpha = 1.0 - confidence;
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let (critical, significant) = match alternative {
        Alternative::TwoSided => {
            let c = dist.inverse_cdf(1.0 - alpha / 2.0);
            (c, t_stat.abs() > c)
        }
        Alternative::Greater => {
            let c = dist.inverse_cdf(1.0 - alpha);
            (c, t_stat > c)
        }
    };
    Ok(SlopeTest { slope, intercept, t_stat, critical, significant })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignificanceReport {
    pub model: String,
    pub windows_total: usize,
    pub windows_significant: usize,
    /// Mean slope over significant windows.
    pub mean_a: Option<f64>,
    /// Sample standard deviation of the slope over significant windows.
    pub std_a: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForecastReport {
    pub model: String,
    pub mad: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SelfConsistencyConfig {
    pub window: usize,
    pub confidence: f64,
    pub mode: SyncMode,
    pub alternative: Alternative,
    pub execution: Execution,
}

impl Default for SelfConsistencyConfig {
    fn default() -> Self {
        Self {
            window: 100,
            confidence: 0.975,
            mode: SyncMode::PerTime,
            alternative: Alternative::TwoSided,
            execution: Execution::default(),
        }
    }
}

/// Moving-window regression of `Y` on lag-synchronized `X` for every profile.
///
/// Both series are z-scored first. Windows advance one step, giving
/// `n - window + 1` of them. A window whose regression is degenerate (fewer than
/// three in-range pairs or a constant regressor) counts as not significant.
pub fn self_consistency(
    instance: &StsInstance,
    profiles: &[ModelProfile],
    cfg: &SelfConsistencyConfig,
) -> Result<Vec<SignificanceReport>> {
    let n = instance.x.len();
    if cfg.window < 3 || cfg.window > n {
        return Err(Error::InvalidConfig(format!("significance window {} must lie in 3..={n}", cfg.window)));
    }
    let (zx, zy) = (normalize(&instance.x)?, normalize(&instance.y)?);
    let (xv, yv) = (zx.values(), zy.values());
    let total = n - cfg.window + 1;

    profiles
        .iter()
        .map(|mp| {
            if mp.lags.len() != n {
                return Err(Error::LengthMismatch { left: mp.lags.len(), right: n });
            }
            let outcomes = par::map_range(cfg.execution, total, |start| {
                let pairs = synchronize_range(xv, yv, &mp.lags, start..start + cfg.window, cfg.mode);
                match ols_slope_test_with(&pairs, cfg.confidence, cfg.alternative) {
                    Ok(t) => Ok(t.significant.then_some(t.slope)),
                    Err(Error::DegenerateRegressor) => Ok(None),
                    Err(e) => Err(e),
                }
            });
            let slopes: Vec<f64> = outcomes.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
            let k = slopes.len();
            let mean_a = (k > 0).then(|| slopes.iter().sum::<f64>() / k as f64);
            let std_a = mean_a
                .filter(|_| k > 1)
                .map(|m| (slopes.iter().map(|s| (s - m) * (s - m)).sum::<f64>() / (k as f64 - 1.0)).sqrt());
            Ok(SignificanceReport {
                model: mp.model.to_string(),
                windows_total: total,
                windows_significant: k,
                mean_a,
                std_a,
            })
        })
        .collect()
}

/// One-step forecast `Yhat(i+1) = a X(i + 1 - tau(i))`, `tau(i) = max(trunc(lag(i)), 0)`,
/// scored by mean absolute deviation on the raw series.
///
/// `tau(i)` reads only `lag[i]`; forecasts whose source index falls before the
/// start of `X` are skipped.
pub fn forecast_mad(instance: &StsInstance, model: &str, lag_profile: &[f64]) -> Result<ForecastReport> {
    let (x, y) = (instance.x.values(), instance.y.values());
    if lag_profile.len() != y.len() {
        return Err(Error::LengthMismatch { left: lag_profile.len(), right: y.len() });
    }
    let a = instance.config.a;
    let (mut sum, mut count) = (0.0, 0usize);
    for i in 0..y.len() - 1 {
        let tau = lag_profile[i].trunc().max(0.0) as usize;
        if let Some(src) = (i + 1).checked_sub(tau) {
            sum += (a * x[src] - y[i + 1]).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyOverlap);
    }
    Ok(ForecastReport { model: model.to_string(), mad: sum / count as f64 })
}
