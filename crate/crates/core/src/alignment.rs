//! Aligned correlation: a windowed-correlation cost inside an endpoint-relaxed
//! DTW, followed by candidate selection on the correlation read along each path.
//!
//! Indices are zero-based. With relaxation `psi`, a path may start at any cell
//! `(i, j)` with `i <= psi && j <= psi` and end at any cell with
//! `i >= rows - 1 - psi && j >= cols - 1 - psi`; `psi = 0` pins both corners.
//!
//! Lags are `q - p` for a pair `(p, q)` where `p` indexes `x` and `q` indexes `y`.
//! A positive lag means `y[q]` matches `x[q - lag]`, i.e. `x` leads.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{self, Execution};
use crate::series::{pearson, returns, uncentered_corr, PaddedReturnSeries, ReturnSeries, TimeSeries};

/// Endpoint relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Psi {
    /// `psi = p` for each window's path computation.
    Auto,
    Fixed(usize),
}

#[derive(Clone, Debug)]
pub struct AcConfig {
    /// Odd window lengths, each at least 3.
    pub windows: Vec<usize>,
    pub psi: Psi,
    /// Also score the plain zero-lag diagonal as a candidate path.
    pub include_identity_candidate: bool,
    pub execution: Execution,
}

impl Default for AcConfig {
    fn default() -> Self {
        Self {
            windows: vec![25, 51, 101],
            psi: Psi::Auto,
            include_identity_candidate: true,
            execution: Execution::default(),
        }
    }
}

impl AcConfig {
    pub fn with_windows(windows: Vec<usize>) -> Self {
        Self { windows, ..Self::default() }
    }

    pub fn psi_for(&self, window: usize) -> usize {
        match self.psi {
            Psi::Auto => window,
            Psi::Fixed(v) => v,
        }
    }

    /// Checks the configuration against a price series of length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.windows.is_empty() {
            return Err(Error::InvalidConfig("at least one window is required".into()));
        }
        for &p in &self.windows {
            if p < 3 || p % 2 == 0 {
                return Err(Error::InvalidConfig(format!("window {p} must be odd and >= 3")));
            }
            // returns have n - 1 entries and every window must fit inside them
            if p >= n {
                return Err(Error::SeriesTooShort { len: n, window: p });
            }
            let psi = self.psi_for(p);
            if psi >= n {
                return Err(Error::InvalidConfig(format!("psi {psi} must be below series length {n}")));
            }
        }
        Ok(())
    }
}

/// Monotone sequence of index pairs with unit steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlignmentPath {
    pairs: Vec<(usize, usize)>,
}

impl AlignmentPath {
    /// Builds a path, checking that it is non-empty and that every step is
    /// `(1,0)`, `(0,1)` or `(1,1)`.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidConfig("alignment path is empty".into()));
        }
        for w in pairs.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ok = matches!((b.0.checked_sub(a.0), b.1.checked_sub(a.1)), (Some(di), Some(dj)) if di <= 1 && dj <= 1 && di + dj >= 1);
            if !ok {
                return Err(Error::InvalidConfig(format!("illegal step {a:?} -> {b:?}")));
            }
        }
        Ok(Self { pairs })
    }

    /// The zero-lag path `(0,0), (1,1), ..., (len-1, len-1)`.
    pub fn diagonal(len: usize) -> Self {
        Self { pairs: (0..len).map(|i| (i, i)).collect() }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Boundary condition under relaxation `psi` on a `rows x cols` grid.
    pub fn satisfies_boundary(&self, rows: usize, cols: usize, psi: usize) -> bool {
        let (first, last) = (self.pairs[0], self.pairs[self.pairs.len() - 1]);
        first.0 <= psi
            && first.1 <= psi
            && last.0 + psi + 1 >= rows
            && last.1 + psi + 1 >= cols
            && last.0 < rows
            && last.1 < cols
    }

    pub fn lags(&self) -> Vec<i64> {
        self.pairs.iter().map(|&(p, q)| q as i64 - p as i64).collect()
    }

    pub fn profile(&self) -> LeadLagProfile {
        LeadLagProfile::from_lags(self.lags())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeadLagProfile {
    pub lags: Vec<i64>,
    pub average_lag: f64,
    pub nonzero_ratio: f64,
}

impl LeadLagProfile {
    pub fn from_lags(lags: Vec<i64>) -> Self {
        let len = lags.len().max(1) as f64;
        let average_lag = lags.iter().sum::<i64>() as f64 / len;
        let nonzero_ratio = lags.iter().filter(|&&l| l != 0).count() as f64 / len;
        Self { lags, average_lag, nonzero_ratio }
    }
}

/// Which series' time axis a per-time lag series is indexed by.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LagAxis {
    X,
    #[default]
    Y,
}

/// Per-time lag estimate along `axis`, `len` entries long.
///
/// Each covered index gets the mean of `q - p` over the pairs that visit it;
/// indices before the first or after the last covered index copy the nearest
/// covered value.
pub fn lead_lag_series(path: &AlignmentPath, len: usize, axis: LagAxis) -> Vec<f64> {
    let mut sum = vec![0.0; len];
    let mut count = vec![0usize; len];
    for &(p, q) in path.pairs() {
        let t = match axis {
            LagAxis::X => p,
            LagAxis::Y => q,
        };
        if t < len {
            sum[t] += q as f64 - p as f64;
            count[t] += 1;
        }
    }
    let mut out: Vec<Option<f64>> = sum.iter().zip(&count).map(|(s, &c)| (c > 0).then(|| s / c as f64)).collect();
    let Some(first) = out.iter().position(Option::is_some) else {
        return vec![0.0; len];
    };
    let last = out.iter().rposition(Option::is_some).unwrap_or(first);
    let (head, tail) = (out[first], out[last]);
    for v in &mut out[..first] {
        *v = head;
    }
    for v in &mut out[last + 1..] {
        *v = tail;
    }
    // unit steps leave no interior holes, but carry forward if a caller hands us one
    let mut prev = head.unwrap_or(0.0);
    out.into_iter()
        .map(|v| {
            let v = v.unwrap_or(prev);
            prev = v;
            v
        })
        .collect()
}

/// Local cost `2 (1 - cos)` between the length-`p` windows centered at `i` in `rx`
/// and `j` in `ry`. A window with zero norm counts as uncorrelated (cost 2).
pub fn cr_cost(rx: &PaddedReturnSeries, ry: &PaddedReturnSeries, i: usize, j: usize, p: usize) -> Result<f64> {
    if p == 0 || p.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("window {p} must be odd")));
    }
    let half = p / 2;
    if rx.pad() < half || ry.pad() < half {
        return Err(Error::InvalidConfig(format!("padding too small for window {p}")));
    }
    if i >= rx.inner().len() || j >= ry.inner().len() {
        return Err(Error::InvalidConfig(format!("cell ({i}, {j}) outside the return series")));
    }
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for k in -(half as isize)..=(half as isize) {
        let a = rx.at(i as isize + k);
        let b = ry.at(j as isize + k);
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    Ok(cost_from_sums(sxy, sxx.sqrt(), syy.sqrt()))
}

#[inline]
fn cost_from_sums(dot: f64, norm_x: f64, norm_y: f64) -> f64 {
    if norm_x == 0.0 || norm_y == 0.0 {
        return 2.0;
    }
    2.0 * (1.0 - (dot / (norm_x * norm_y)).clamp(-1.0, 1.0))
}

/// Row-by-row generator of the CR cost grid.
///
/// Window dot products follow the diagonal recurrence
/// `dot(i, j) = dot(i-1, j-1) - x[i-1] y[j-1] + x[i+p-1] y[j+p-1]` on padded
/// buffers and are recomputed from scratch every `REFRESH` rows to bound drift.
struct CrRows<'a> {
    xp: &'a [f64],
    yp: &'a [f64],
    p: usize,
    norm_x: Vec<f64>,
    norm_y: Vec<f64>,
    dots: Vec<f64>,
    next_row: usize,
}

const REFRESH: usize = 32;

impl<'a> CrRows<'a> {
    fn new(xp: &'a PaddedReturnSeries, yp: &'a PaddedReturnSeries, p: usize) -> Self {
        let window_norms = |s: &PaddedReturnSeries| -> Vec<f64> {
            let buf = s.as_padded_slice();
            (0..s.inner().len()).map(|i| buf[i..i + p].iter().map(|v| v * v).sum::<f64>().sqrt()).collect()
        };
        Self {
            xp: xp.as_padded_slice(),
            yp: yp.as_padded_slice(),
            p,
            norm_x: window_norms(xp),
            norm_y: window_norms(yp),
            dots: vec![0.0; yp.inner().len()],
            next_row: 0,
        }
    }

    fn direct_dot(&self, i: usize, j: usize) -> f64 {
        self.xp[i..i + self.p].iter().zip(&self.yp[j..j + self.p]).map(|(a, b)| a * b).sum()
    }

    /// Fills `out` with the costs of row `i`. Rows must be requested in order.
    fn fill(&mut self, i: usize, out: &mut [f64]) {
        debug_assert_eq!(i, self.next_row);
        let cols = self.dots.len();
        if i.is_multiple_of(REFRESH) {
            for j in 0..cols {
                self.dots[j] = self.direct_dot(i, j);
            }
        } else {
            let (enter, leave) = (self.xp[i + self.p - 1], self.xp[i - 1]);
            for j in (1..cols).rev() {
                self.dots[j] = self.dots[j - 1] - leave * self.yp[j - 1] + enter * self.yp[j + self.p - 1];
            }
            self.dots[0] = self.direct_dot(i, 0);
        }
        for j in 0..cols {
            out[j] = cost_from_sums(self.dots[j], self.norm_x[i], self.norm_y[j]);
        }
        self.next_row += 1;
    }
}

const START: u8 = 0;
const DIAG: u8 = 1;
const UP: u8 = 2; // from (i-1, j)
const LEFT: u8 = 3; // from (i, j-1)

/// Minimum-cost path over a `rows x cols` grid with endpoint relaxation `psi`.
///
/// `row_cost(i, out)` fills the local costs of row `i`; rows are visited in order.
/// Predecessor ties prefer the diagonal step, then `(1,0)`, then `(0,1)`, then a
/// fresh start. Terminal ties prefer the smallest `i + j`, then the smallest
/// `|i - j|`, then the smallest `i`.
pub(crate) fn relaxed_dp<F>(rows: usize, cols: usize, psi: usize, mut row_cost: F) -> (AlignmentPath, f64)
where
    F: FnMut(usize, &mut [f64]),
{
    assert!(rows > 0 && cols > 0);
    let mut back = vec![START; rows * cols];
    let mut prev = vec![f64::INFINITY; cols];
    let mut cur = vec![f64::INFINITY; cols];
    let mut local = vec![0.0; cols];

    let end_i = rows.saturating_sub(psi + 1);
    let end_j = cols.saturating_sub(psi + 1);
    let mut best: Option<(f64, usize, usize)> = None;

    for i in 0..rows {
        row_cost(i, &mut local);
        for j in 0..cols {
            let mut m = f64::INFINITY;
            let mut step = START;
            if i > 0 && j > 0 && prev[j - 1] < m {
                m = prev[j - 1];
                step = DIAG;
            }
            if i > 0 && prev[j] < m {
                m = prev[j];
                step = UP;
            }
            if j > 0 && cur[j - 1] < m {
                m = cur[j - 1];
                step = LEFT;
            }
            if i <= psi && j <= psi && 0.0 < m {
                m = 0.0;
                step = START;
            }
            cur[j] = local[j] + m;
            back[i * cols + j] = step;

            if i >= end_i && j >= end_j && cur[j].is_finite() {
                let better = match best {
                    None => true,
                    Some((c, bi, bj)) => {
                        let key = (i + j, i.abs_diff(j), i);
                        let bkey = (bi + bj, bi.abs_diff(bj), bi);
                        cur[j] < c || (cur[j] == c && key < bkey)
                    }
                };
                if better {
                    best = Some((cur[j], i, j));
                }
            }
        }
        std::mem::swap(&mut prev, &mut cur);
        cur.fill(f64::INFINITY);
    }

    let (cost, mut i, mut j) = best.expect("terminal region is reachable from the start region");
    let mut pairs = vec![(i, j)];
    loop {
        match back[i * cols + j] {
            START => break,
            DIAG => {
                i -= 1;
                j -= 1;
            }
            UP => i -= 1,
            _ => j -= 1,
        }
        pairs.push((i, j));
    }
    pairs.reverse();
    (AlignmentPath { pairs }, cost)
}

/// The DP-optimal path for one window size.
#[derive(Clone, Debug)]
pub struct WindowAlignment {
    pub window: usize,
    pub psi: usize,
    pub path: AlignmentPath,
    /// Cumulative CR along the path. Only comparable between paths of the same window.
    pub total_cost: f64,
}

pub fn optimal_path_for_window(rx: &ReturnSeries, ry: &ReturnSeries, p: usize, psi: usize) -> Result<WindowAlignment> {
    if p < 1 || p.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!("window {p} must be odd")));
    }
    for r in [rx, ry] {
        if r.len() < p {
            return Err(Error::SeriesTooShort { len: r.len(), window: p });
        }
    }
    let (xp, yp) = (rx.padded(p / 2), ry.padded(p / 2));
    let mut rows = CrRows::new(&xp, &yp, p);
    let (path, total_cost) = relaxed_dp(rx.len(), ry.len(), psi, |i, out| rows.fill(i, out));
    Ok(WindowAlignment { window: p, psi, path, total_cost })
}

/// `2 (1 - cos)` of the two return vectors read along `path`.
pub fn global_path_score(rx: &ReturnSeries, ry: &ReturnSeries, path: &AlignmentPath) -> Result<f64> {
    let (a, b): (Vec<f64>, Vec<f64>) = path
        .pairs()
        .iter()
        .map(|&(p, q)| {
            let x = rx.values().get(p).copied();
            let y = ry.values().get(q).copied();
            x.zip(y).ok_or_else(|| Error::InvalidConfig(format!("pair ({p}, {q}) outside the return series")))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    Ok(2.0 * (1.0 - uncentered_corr(&a, &b)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Candidate {
    Window(usize),
    Identity,
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Candidate::Window(p) => write!(f, "{p}"),
            Candidate::Identity => f.write_str("identity"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateScore {
    pub candidate: Candidate,
    pub score: f64,
    /// Cumulative CR for window candidates.
    pub dp_cost: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct AcResult {
    pub path: AlignmentPath,
    pub aligned_correlation: f64,
    pub ac_distance: f64,
    pub chosen: Candidate,
    pub profile: LeadLagProfile,
    pub candidates: Vec<CandidateScore>,
    /// Length of the return series the path indexes.
    pub return_len: usize,
}

impl AcResult {
    /// Lag per return index along `axis`.
    pub fn return_lag_series(&self, axis: LagAxis) -> Vec<f64> {
        lead_lag_series(&self.path, self.return_len, axis)
    }

    /// Lag per price index along `axis`: the return between prices `t-1` and `t`
    /// is attributed to price `t`, and price 0 copies price 1.
    pub fn price_lag_profile(&self, axis: LagAxis) -> Vec<f64> {
        let r = self.return_lag_series(axis);
        let mut out = Vec::with_capacity(r.len() + 1);
        out.push(r.first().copied().unwrap_or(0.0));
        out.extend(r);
        out
    }
}

/// Aligned correlation between two equal-length (normalized) price series.
///
/// Every window in `cfg` produces its DP-optimal path; the diagonal is added when
/// `include_identity_candidate` is set. The winner minimizes [`global_path_score`];
/// cumulative CR values are never compared across windows. Score ties go to the
/// earlier candidate (windows in configuration order, identity last).
pub fn aligned_correlation(x: &TimeSeries, y: &TimeSeries, cfg: &AcConfig) -> Result<AcResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { left: x.len(), right: y.len() });
    }
    cfg.validate(x.len())?;
    let (rx, ry) = (returns(x)?, returns(y)?);

    let windows = par::try_map(cfg.execution, &cfg.windows, |&p| optimal_path_for_window(&rx, &ry, p, cfg.psi_for(p)))?;

    let mut paths: Vec<(Candidate, AlignmentPath, Option<f64>)> =
        windows.into_iter().map(|w| (Candidate::Window(w.window), w.path, Some(w.total_cost))).collect();
    if cfg.include_identity_candidate {
        paths.push((Candidate::Identity, AlignmentPath::diagonal(rx.len()), None));
    }

    let mut candidates = Vec::with_capacity(paths.len());
    let mut best = 0usize;
    for (k, (candidate, path, dp_cost)) in paths.iter().enumerate() {
        let score = global_path_score(&rx, &ry, path)?;
        if score < candidates.get(best).map_or(f64::INFINITY, |c: &CandidateScore| c.score) {
            best = k;
        }
        candidates.push(CandidateScore { candidate: *candidate, score, dp_cost: *dp_cost });
    }

    let score = candidates[best].score.clamp(0.0, 4.0);
    let (chosen, path, _) = paths.swap_remove(best);
    let aligned_correlation = 1.0 - score / 2.0;
    Ok(AcResult {
        profile: path.profile(),
        path,
        aligned_correlation,
        ac_distance: score.sqrt(),
        chosen,
        candidates,
        return_len: rx.len(),
    })
}

/// Centered correlation of the two return series at lag zero.
pub fn zero_lag_return_correlation(x: &TimeSeries, y: &TimeSeries) -> Result<f64> {
    pearson(returns(x)?.values(), returns(y)?.values())
}
