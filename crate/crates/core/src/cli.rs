//! Command-line front end: `align`, `synth-eval` and `network`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::alignment::{
    aligned_correlation, lead_lag_series, zero_lag_return_correlation, AcConfig, Candidate, LagAxis, Psi,
};
use crate::baselines::{dtw_path, top_lead_lag, TopConfig};
use crate::error::{Error, Result};
use crate::evaluation::{
    estimate_profiles, forecast_mad, self_consistency, Alternative, EstimatorSettings, Model, SelfConsistencyConfig,
    SyncMode,
};
use crate::io::{self, DateRange, RawPanel, TimestampFormat};
use crate::network::{build_distance_matrix, minimum_spanning_tree, network_metrics, triangle_audit, PathGraph};
use crate::par::Execution;
use crate::synthetic::{gen_sts, StsConfig};

#[derive(Parser, Debug)]
#[command(name = "leadlag", version, about = "Lead-lag estimation with aligned correlation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Align two series and write the path and a summary.
    Align(AlignArgs),
    /// Generate a synthetic instance and compare estimators on it.
    SynthEval(SynthEvalArgs),
    /// Build distance matrices, spanning trees and metrics over a panel.
    Network(NetworkArgs),
}

fn parse_psi(s: &str) -> std::result::Result<Psi, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Psi::Auto);
    }
    s.parse::<usize>().map(Psi::Fixed).map_err(|_| format!("expected a non-negative integer or `auto`, got `{s}`"))
}

#[derive(Args, Debug, Clone)]
pub struct AcArgs {
    /// Odd CR window lengths.
    #[arg(long, value_delimiter = ',', default_value = "25,51,101")]
    pub windows: Vec<usize>,
    /// Endpoint relaxation: an integer, or `auto` for psi = window.
    #[arg(long, default_value = "auto", value_parser = parse_psi)]
    pub psi: Psi,
    /// Drop the zero-lag diagonal from the candidate set.
    #[arg(long)]
    pub no_identity_candidate: bool,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl AcArgs {
    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    fn config(&self) -> AcConfig {
        AcConfig {
            windows: self.windows.clone(),
            psi: self.psi,
            include_identity_candidate: !self.no_identity_candidate,
            execution: self.execution(),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Timestamp syntax: `iso`, `dmy` (dd-mm-yyyy hh:mm) or a strftime pattern.
    #[arg(long, default_value = "iso")]
    pub format: String,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

impl InputArgs {
    fn timestamp_format(&self) -> Result<TimestampFormat> {
        self.format.parse()
    }
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    /// One panel file, or two files joined on timestamp.
    #[arg(required = true, num_args = 1..=2)]
    pub inputs: Vec<PathBuf>,
    /// Column names `X,Y`. Defaults to the first two series columns of a panel,
    /// or the first series column of each file.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,
    /// Restrict to `START..END` or `START..=END`.
    #[arg(long)]
    pub range: Option<String>,
    /// Also write the DTW lag profile.
    #[arg(long)]
    pub dtw: bool,
    #[arg(long, default_value_t = 25)]
    pub dtw_psi: usize,
    /// TOP temperatures whose lag profiles are also written.
    #[arg(long, value_delimiter = ',')]
    pub top: Vec<f64>,
    #[arg(long, default_value_t = TopConfig::DEFAULT_PSI)]
    pub top_psi: usize,
    #[command(flatten)]
    pub ac: AcArgs,
    #[command(flatten)]
    pub io: InputArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum SyncArg {
    PerTime,
    WindowMean,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum AlternativeArg {
    TwoSided,
    Greater,
}

#[derive(Args, Debug)]
pub struct SynthEvalArgs {
    /// Lag schedule 1..=4.
    #[arg(long, default_value_t = 1)]
    pub schedule: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma list of ac, dtw, actual, unsynced, top:T.
    #[arg(long, default_value = "ac,top:2,top:1,top:0.5,top:0.2,dtw,actual,unsynced")]
    pub models: String,
    /// Self-consistency window length.
    #[arg(long, default_value_t = 100)]
    pub window_size: usize,
    #[arg(long, default_value_t = 0.975)]
    pub confidence: f64,
    #[arg(long, value_enum, default_value = "per-time")]
    pub sync: SyncArg,
    #[arg(long, value_enum, default_value = "two-sided")]
    pub alternative: AlternativeArg,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 0.8)]
    pub a: f64,
    #[arg(long, default_value_t = 0.7)]
    pub b: f64,
    /// Noise ratio sigma_eta / sigma_xi.
    #[arg(long, default_value_t = 0.5)]
    pub f: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_xi: f64,
    #[arg(long, default_value_t = 25)]
    pub dtw_psi: usize,
    #[arg(long, default_value_t = TopConfig::DEFAULT_PSI)]
    pub top_psi: usize,
    #[command(flatten)]
    pub ac: AcArgs,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct NetworkArgs {
    pub panel: PathBuf,
    /// Date range `START..END` or `START..=END`; repeat for several networks.
    #[arg(long)]
    pub range: Vec<String>,
    /// Emit pair statistics for every pair instead of only tree edges.
    #[arg(long)]
    pub all_pairs: bool,
    /// Characterised path length over the complete distance graph instead of the tree.
    #[arg(long)]
    pub full_graph_cpl: bool,
    #[command(flatten)]
    pub ac: AcArgs,
    #[command(flatten)]
    pub io: InputArgs,
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Align(a) => cmd_align(&a),
        Command::SynthEval(a) => cmd_synth_eval(&a),
        Command::Network(a) => cmd_network(&a),
    }
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn candidate_json(c: Candidate) -> Value {
    match c {
        Candidate::Window(p) => json!(p),
        Candidate::Identity => json!("identity"),
    }
}

fn column_index(panel: &RawPanel, name: Option<&String>, fallback: usize, path: &Path) -> Result<usize> {
    match name {
        Some(n) => panel.labels.iter().position(|l| l == n).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("no column `{n}`"),
        }),
        None if fallback < panel.labels.len() => Ok(fallback),
        None => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("need at least {} series columns", fallback + 1),
        }),
    }
}

fn load_pair(args: &AlignArgs, format: &TimestampFormat) -> Result<RawPanel> {
    if args.columns.len() > 2 {
        return Err(Error::InvalidConfig("--columns takes two names".into()));
    }
    let first = io::read_panel_file(&args.inputs[0], format)?;
    let joined = match args.inputs.get(1) {
        None => {
            let kx = column_index(&first, args.columns.first(), 0, &args.inputs[0])?;
            let ky = column_index(&first, args.columns.get(1), 1, &args.inputs[0])?;
            io::join_columns((&first, kx), (&first, ky))
        }
        Some(second_path) => {
            let second = io::read_panel_file(second_path, format)?;
            let kx = column_index(&first, args.columns.first(), 0, &args.inputs[0])?;
            let ky = column_index(&second, args.columns.get(1), 0, second_path)?;
            io::join_columns((&first, kx), (&second, ky))
        }
    };
    Ok(match &args.range {
        Some(r) => joined.restrict(&DateRange::parse(r, format)?),
        None => joined,
    })
}

pub fn cmd_align(args: &AlignArgs) -> Result<()> {
    let format = args.io.timestamp_format()?;
    let cfg = args.ac.config();
    let series = load_pair(args, &format)?.normalized()?;
    let (x, y) = (&series[0], &series[1]);
    let res = aligned_correlation(x, y, &cfg)?;
    let zero_lag = zero_lag_return_correlation(x, y)?;

    prepare_out_dir(&args.io.out_dir)?;
    io::write_path_csv(io::create(&args.io.out_dir.join("path.csv"))?, &res.path)?;
    let summary = json!({
        "x": x.label(),
        "y": y.label(),
        "observations": x.len(),
        "ac_distance": res.ac_distance,
        "aligned_correlation": res.aligned_correlation,
        "chosen_window": candidate_json(res.chosen),
        "average_lag": res.profile.average_lag,
        "nonzero_ratio": res.profile.nonzero_ratio,
        "zero_lag_correlation": zero_lag,
        "candidates": res.candidates,
    });
    write_json(&args.io.out_dir.join("summary.json"), &summary)?;

    if args.dtw || !args.top.is_empty() {
        let n = x.len();
        let mut profiles = vec![("AC".to_string(), res.price_lag_profile(LagAxis::Y))];
        if args.dtw {
            let (path, _) = dtw_path(x, y, args.dtw_psi)?;
            profiles.push(("DTW".into(), lead_lag_series(&path, n, LagAxis::Y)));
        }
        for &t in &args.top {
            let top = TopConfig { psi: args.top_psi, ..TopConfig::new(t) };
            profiles.push((Model::Top(t).to_string(), top_lead_lag(x, y, &top)?));
        }
        let mut out = csv::Writer::from_writer(io::create(&args.io.out_dir.join("lag_profiles.csv"))?);
        let mut header = vec!["t".to_string()];
        header.extend(profiles.iter().map(|(name, _)| name.clone()));
        out.write_record(&header)?;
        for t in 0..n {
            let mut row = vec![(t + 1).to_string()];
            row.extend(profiles.iter().map(|(_, p)| format!("{:.6}", p[t])));
            out.write_record(&row)?;
        }
        out.flush()?;
    }
    Ok(())
}

pub fn cmd_synth_eval(args: &SynthEvalArgs) -> Result<()> {
    let models = Model::parse_list(&args.models)?;
    if models.is_empty() {
        return Err(Error::InvalidConfig("no models selected".into()));
    }
    let sts = StsConfig {
        a: args.a,
        b: args.b,
        f: args.f,
        sigma_xi: args.sigma_xi,
        n: args.n,
        schedule_id: args.schedule,
        seed: args.seed,
    };
    let instance = gen_sts(&sts)?;
    let execution = args.ac.execution();
    let settings = EstimatorSettings { ac: args.ac.config(), dtw_psi: args.dtw_psi, top_psi: args.top_psi, execution };
    let profiles = estimate_profiles(&instance, &models, &settings)?;
    let sc = SelfConsistencyConfig {
        window: args.window_size,
        confidence: args.confidence,
        mode: match args.sync {
            SyncArg::PerTime => SyncMode::PerTime,
            SyncArg::WindowMean => SyncMode::WindowMean,
        },
        alternative: match args.alternative {
            AlternativeArg::TwoSided => Alternative::TwoSided,
            AlternativeArg::Greater => Alternative::Greater,
        },
        execution,
    };
    let significance = self_consistency(&instance, &profiles, &sc)?;
    let forecasts =
        profiles.iter().map(|p| forecast_mad(&instance, &p.model.to_string(), &p.lags)).collect::<Result<Vec<_>>>()?;

    let dir = &args.out_dir;
    prepare_out_dir(dir)?;
    io::write_significance_csv(io::create(&dir.join("significance.csv"))?, &significance)?;
    io::write_forecast_csv(io::create(&dir.join("forecast.csv"))?, &forecasts)?;
    let named: Vec<(String, Vec<f64>)> = profiles.into_iter().map(|p| (p.model.to_string(), p.lags)).collect();
    io::write_lag_profiles_csv(io::create(&dir.join("lag_paths.csv"))?, &instance.true_lags, &named)?;
    instance.write_csv(io::create(&dir.join("sts.csv"))?)?;
    Ok(())
}

pub fn cmd_network(args: &NetworkArgs) -> Result<()> {
    let format = args.io.timestamp_format()?;
    let cfg = args.ac.config();
    let ranges = if args.range.is_empty() {
        vec![DateRange::all()]
    } else {
        args.range.iter().map(|r| DateRange::parse(r, &format)).collect::<Result<Vec<_>>>()?
    };
    let raw = io::read_panel_file(&args.panel, &format)?;
    let paths = if args.full_graph_cpl { PathGraph::Complete } else { PathGraph::Tree };

    prepare_out_dir(&args.io.out_dir)?;
    let mut metric_rows = Vec::with_capacity(ranges.len());
    for (k, range) in ranges.iter().enumerate() {
        let sub = raw.restrict(range);
        let panel = sub.normalized()?;
        let m = build_distance_matrix(&panel, &cfg)?;
        let audit = triangle_audit(&m);
        let tree = minimum_spanning_tree(&m);
        let metrics = network_metrics(&m, &tree, paths)?;
        let labels = m.labels();

        let pair_stats: Vec<_> = if args.all_pairs {
            m.pair_stats().iter().collect()
        } else {
            tree.edges.iter().filter_map(|e| m.pair(e.source, e.target)).collect()
        };
        let edges: Vec<Value> = tree
            .edges
            .iter()
            .map(|e| json!({"source": labels[e.source], "target": labels[e.target], "weight": e.weight}))
            .collect();
        let doc = json!({
            "range": range.text,
            "observations": sub.len(),
            "labels": labels,
            "distance_matrix": m.rows(),
            "mst_edges": edges,
            "metrics": metrics,
            "triangle_audit": {
                "violations": audit.violations,
                "triples_checked": audit.triples_checked,
                "worst": audit.worst.map(|(i, j, l, excess)| json!({
                    "triple": [labels[i], labels[j], labels[l]],
                    "excess": excess,
                })),
            },
            "pair_stats": pair_stats,
        });
        let tag = k + 1;
        write_json(&args.io.out_dir.join(format!("network_{tag}.json")), &doc)?;
        io::write_edges_csv(io::create(&args.io.out_dir.join(format!("edges_{tag}.csv")))?, labels, &tree)?;
        metric_rows.push((range.text.clone(), metrics));
    }
    io::write_metrics_csv(io::create(&args.io.out_dir.join("metrics.csv"))?, &metric_rows)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_flag() {
        assert_eq!(parse_psi("auto"), Ok(Psi::Auto));
        assert_eq!(parse_psi("7"), Ok(Psi::Fixed(7)));
        assert!(parse_psi("-1").is_err());
    }

    #[test]
    fn defaults_parse() {
        let cli = Cli::try_parse_from(["leadlag", "synth-eval"]).unwrap();
        let Command::SynthEval(a) = cli.command else { panic!() };
        assert_eq!(a.ac.windows, vec![25, 51, 101]);
        assert_eq!(a.window_size, 100);
        assert_eq!(Model::parse_list(&a.models).unwrap(), Model::table_set());
    }

    #[test]
    fn bad_usage_is_rejected() {
        assert!(Cli::try_parse_from(["leadlag", "bogus"]).is_err());
        assert!(Cli::try_parse_from(["leadlag", "synth-eval", "--psi", "x"]).is_err());
        assert!(Cli::try_parse_from(["leadlag", "align"]).is_err());
    }
}
