//! CSV panel ingestion and report serialization.
//!
//! A panel CSV has a timestamp in the first column and one column per series.
//! Rows with any missing or unparseable value are dropped; retained timestamps
//! must be strictly increasing. CSV numbers are written with 6 decimals, JSON
//! numbers at full precision.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};

use crate::alignment::AlignmentPath;
use crate::error::{Error, Result};
use crate::evaluation::{ForecastReport, SignificanceReport};
use crate::network::{MsTree, NetworkMetrics};
use crate::series::{normalize, TimeSeries};

/// Timestamp syntax of the first CSV column.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum TimestampFormat {
    /// `YYYY-MM-DD`, optionally followed by `T` or a space and `HH:MM[:SS[.f]]`.
    #[default]
    Iso,
    /// `dd-mm-yyyy hh:mm`.
    DayMonthYear,
    /// Any chrono `strftime` pattern including a time component.
    Custom(String),
}

impl FromStr for TimestampFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "iso" | "ISO" => TimestampFormat::Iso,
            "dmy" | "dd-mm-yyyy" | "dd-mm-yyyy hh:mm" => TimestampFormat::DayMonthYear,
            other if other.contains('%') => TimestampFormat::Custom(other.to_string()),
            other => return Err(Error::InvalidConfig(format!("unknown timestamp format `{other}`"))),
        })
    }
}

impl TimestampFormat {
    pub fn parse(&self, raw: &str) -> Option<NaiveDateTime> {
        let s = raw.trim();
        match self {
            TimestampFormat::Iso => {
                for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
                    if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
                        return Some(t);
                    }
                }
                NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0))
            }
            TimestampFormat::DayMonthYear => NaiveDateTime::parse_from_str(s, "%d-%m-%Y %H:%M")
                .ok()
                .or_else(|| NaiveDate::parse_from_str(s, "%d-%m-%Y").ok().and_then(|d| d.and_hms_opt(0, 0, 0))),
            TimestampFormat::Custom(fmt) => NaiveDateTime::parse_from_str(s, fmt).ok(),
        }
    }
}

/// `START..END` (end exclusive) or `START..=END` (end inclusive); either bound may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DateRange {
    pub start: Option<NaiveDateTime>,
    pub end: Option<NaiveDateTime>,
    pub inclusive_end: bool,
    pub text: String,
}

impl DateRange {
    pub fn all() -> Self {
        Self { start: None, end: None, inclusive_end: false, text: "..".into() }
    }

    /// Bounds are read with `format`, falling back to ISO.
    pub fn parse(text: &str, format: &TimestampFormat) -> Result<Self> {
        let (a, b, inclusive_end) = if let Some((a, b)) = text.split_once("..=") {
            (a, b, true)
        } else if let Some((a, b)) = text.split_once("..") {
            (a, b, false)
        } else {
            return Err(Error::InvalidConfig(format!("range `{text}` must look like START..END or START..=END")));
        };
        let bound = |s: &str| -> Result<Option<NaiveDateTime>> {
            if s.trim().is_empty() {
                return Ok(None);
            }
            format
                .parse(s)
                .or_else(|| TimestampFormat::Iso.parse(s))
                .map(Some)
                .ok_or_else(|| Error::InvalidConfig(format!("cannot parse range bound `{s}`")))
        };
        Ok(Self { start: bound(a)?, end: bound(b)?, inclusive_end, text: text.to_string() })
    }

    pub fn contains(&self, t: &NaiveDateTime) -> bool {
        self.start.is_none_or(|s| *t >= s) && self.end.is_none_or(|e| if self.inclusive_end { *t <= e } else { *t < e })
    }
}

/// Complete rows of a panel file before normalization.
#[derive(Clone, Debug)]
pub struct RawPanel {
    pub labels: Vec<String>,
    pub timestamps: Vec<NaiveDateTime>,
    /// `columns[k][r]` is series `k` at retained row `r`.
    pub columns: Vec<Vec<f64>>,
    pub rows_read: usize,
    pub rows_dropped: usize,
}

impl RawPanel {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.labels.iter().position(|l| l == label).map(|k| self.columns[k].as_slice())
    }

    /// Rows whose timestamp falls in `range`.
    pub fn restrict(&self, range: &DateRange) -> RawPanel {
        let keep: Vec<usize> = (0..self.len()).filter(|&r| range.contains(&self.timestamps[r])).collect();
        RawPanel {
            labels: self.labels.clone(),
            timestamps: keep.iter().map(|&r| self.timestamps[r]).collect(),
            columns: self.columns.iter().map(|c| keep.iter().map(|&r| c[r]).collect()).collect(),
            rows_read: self.rows_read,
            rows_dropped: self.rows_dropped,
        }
    }

    /// Z-scored series, one per column. Needs at least two rows.
    pub fn normalized(&self) -> Result<Vec<TimeSeries>> {
        if self.len() < 2 {
            return Err(Error::InsufficientData(format!("{} complete rows in range, need at least 2", self.len())));
        }
        self.labels.iter().zip(&self.columns).map(|(l, c)| normalize(&TimeSeries::new(l.clone(), c.clone())?)).collect()
    }
}

pub fn read_panel<R: Read>(reader: R, source: &Path, format: &TimestampFormat) -> Result<RawPanel> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(reader);
    let parse_err = |line: usize, msg: String| Error::Parse { path: source.to_path_buf(), line, msg };
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.len() < 2 {
        return Err(parse_err(1, "need a timestamp column and at least one series column".into()));
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut panel = RawPanel {
        columns: vec![Vec::new(); labels.len()],
        labels,
        timestamps: Vec::new(),
        rows_read: 0,
        rows_dropped: 0,
    };
    let mut last_seen: Option<NaiveDateTime> = None;
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        panel.rows_read += 1;
        let ts_text = rec.get(0).unwrap_or("");
        let ts = format.parse(ts_text).ok_or_else(|| parse_err(line, format!("unparseable timestamp `{ts_text}`")))?;
        if last_seen.is_some_and(|prev| ts <= prev) {
            return Err(Error::NonMonotoneTimestamps { path: source.to_path_buf(), line });
        }
        last_seen = Some(ts);
        let values: Option<Vec<f64>> = (1..=panel.labels.len())
            .map(|c| rec.get(c).and_then(|v| v.parse::<f64>().ok()).filter(|v| v.is_finite()))
            .collect();
        match values {
            Some(vals) => {
                panel.timestamps.push(ts);
                for (col, v) in panel.columns.iter_mut().zip(vals) {
                    col.push(v);
                }
            }
            None => panel.rows_dropped += 1,
        }
    }
    Ok(panel)
}

pub fn read_panel_file(path: &Path, format: &TimestampFormat) -> Result<RawPanel> {
    let file = File::open(path).map_err(|e| Error::Parse { path: path.to_path_buf(), line: 0, msg: e.to_string() })?;
    read_panel(BufReader::new(file), path, format)
}

/// Reads, drops incomplete rows, restricts to `range` and z-scores each column.
pub fn ingest_panel(path: &Path, range: Option<&DateRange>, format: &TimestampFormat) -> Result<Vec<TimeSeries>> {
    let raw = read_panel_file(path, format)?;
    match range {
        Some(r) => raw.restrict(r).normalized(),
        None => raw.normalized(),
    }
}

/// Inner join of two single columns on timestamp.
pub fn join_columns(a: (&RawPanel, usize), b: (&RawPanel, usize)) -> RawPanel {
    let (pa, ka) = a;
    let (pb, kb) = b;
    let (mut i, mut j) = (0, 0);
    let mut out = RawPanel {
        labels: vec![pa.labels[ka].clone(), pb.labels[kb].clone()],
        timestamps: Vec::new(),
        columns: vec![Vec::new(), Vec::new()],
        rows_read: pa.rows_read.max(pb.rows_read),
        rows_dropped: 0,
    };
    while i < pa.len() && j < pb.len() {
        match pa.timestamps[i].cmp(&pb.timestamps[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.timestamps.push(pa.timestamps[i]);
                out.columns[0].push(pa.columns[ka][i]);
                out.columns[1].push(pb.columns[kb][j]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt6_opt(v: Option<f64>) -> String {
    v.map(fmt6).unwrap_or_default()
}

pub fn write_significance_csv<W: Write>(w: W, reports: &[SignificanceReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "Model",
        "No. of Windows Significant",
        "Mean a value",
        "Standard Deviation of a values",
        "Windows",
    ])?;
    for r in reports {
        out.write_record([
            r.model.clone(),
            r.windows_significant.to_string(),
            fmt6_opt(r.mean_a),
            fmt6_opt(r.std_a),
            r.windows_total.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_forecast_csv<W: Write>(w: W, reports: &[ForecastReport]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["Model", "MAD"])?;
    for r in reports {
        out.write_record([r.model.clone(), fmt6(r.mad)])?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `t, true_lag, <model>...` with `t` 1-based.
pub fn write_lag_profiles_csv<W: Write>(w: W, true_lags: &[i64], profiles: &[(String, Vec<f64>)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string(), "true_lag".to_string()];
    header.extend(profiles.iter().map(|(name, _)| name.clone()));
    out.write_record(&header)?;
    for (t, lag) in true_lags.iter().enumerate() {
        let mut row = vec![(t + 1).to_string(), lag.to_string()];
        row.extend(profiles.iter().map(|(_, p)| fmt6(p[t])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Columns `l, p_l, q_l, lag` with `l` 1-based and indices 0-based.
pub fn write_path_csv<W: Write>(w: W, path: &AlignmentPath) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["l", "p_l", "q_l", "lag"])?;
    for (l, &(p, q)) in path.pairs().iter().enumerate() {
        out.write_record([(l + 1).to_string(), p.to_string(), q.to_string(), (q as i64 - p as i64).to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_edges_csv<W: Write>(w: W, labels: &[String], tree: &MsTree) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["source", "target", "weight"])?;
    for e in &tree.edges {
        out.write_record([labels[e.source].clone(), labels[e.target].clone(), fmt6(e.weight)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_metrics_csv<W: Write>(w: W, rows: &[(String, NetworkMetrics)]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "range",
        "Mean Dissimilarity Measure",
        "Normalised Tree Length",
        "Characterised Path Length",
        "Non-leaf Nodes",
    ])?;
    for (range, m) in rows {
        out.write_record([
            range.clone(),
            fmt6(m.mean_dissimilarity),
            fmt6(m.normalized_tree_length),
            fmt6(m.characterized_path_length),
            m.non_leaf_nodes.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<std::io::BufWriter<File>> {
    Ok(std::io::BufWriter::new(File::create(path)?))
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
