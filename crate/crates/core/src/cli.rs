//! Batch command-line front end.
//!
//! Every artifact embeds the resolved run configuration: CSV output starts
//! with a `# run_config: {...}` comment line, JSON output carries a
//! `run_config` key and SVG output a `<metadata>` element. Corpus JSONL
//! written by `synth` stays plain so it can be ingested again.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::corpus::{load_corpus, write_jsonl, BinScheme, CorpusIndex, InputFormat, TermQuery};
use crate::diffusion::{fit, trajectory_closed_form, trajectory_euler, AdoptionTrajectory, DiffusionParams};
use crate::measure::{hardness_ranking, m_delta, write_reports_csv, AnnotationSet};
use crate::migration::{classify_roles, detect_succession, StrongThreshold};
use crate::plot::{plot_growth, PlotOptions};
use crate::rank::{rank_terms, write_ranks_csv, Dictionary, PercentileConfig};
use crate::synth::{generate, presets, ScenarioSpec};
use crate::trend::{analyze, GrowthSeries, SmoothingOrder, TrendConfig};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "termflow", version, about = "Term-frequency time series analytics for discipline-labelled corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a corpus and summarize documents per discipline and bin.
    Ingest(IngestArgs),
    /// Rank a discipline's vocabulary by Poisson percentile.
    Rank(RankArgs),
    /// M-top, M-bottom and M-delta per discipline.
    Mdelta(MdeltaArgs),
    /// Frequency and smoothed log growth rate for one term in one discipline.
    Trend(TrendArgs),
    /// Growth peaks, lags and temporal donor/borrower roles for a term.
    Migrate(MigrateArgs),
    /// Fit the logistic adoption model to a trajectory.
    Fit(FitArgs),
    /// Generate a logistic adoption trajectory.
    Simulate(SimulateArgs),
    /// Generate a synthetic corpus and its ground truth.
    Synth(SynthArgs),
    /// Render growth-rate lines as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    Relative,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderArg {
    DifferenceThenSmooth,
    SmoothThenDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Chaos,
    Nonlinear,
    Succession,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMethod {
    Closed,
    Euler,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CorpusArgs {
    /// JSON-lines or CSV corpus; `-` reads standard input
    #[arg(long)]
    pub corpus: PathBuf,
    /// input format; inferred from the extension when omitted
    #[arg(long, value_enum)]
    pub format: Option<CorpusFormat>,
    #[arg(long, default_value_t = 2)]
    pub bin_width: u32,
    /// year that bins align to; multiples of the width by default
    #[arg(long)]
    pub bin_anchor: Option<i32>,
}

impl CorpusArgs {
    fn scheme(&self) -> Result<BinScheme> {
        let scheme = BinScheme::new(self.bin_width)?;
        Ok(match self.bin_anchor {
            Some(anchor) => scheme.with_anchor(anchor),
            None => scheme,
        })
    }

    fn load(&self) -> Result<CorpusIndex> {
        let format = self.format.map(|f| match f {
            CorpusFormat::Jsonl => InputFormat::Jsonl,
            CorpusFormat::Csv => InputFormat::Csv,
        });
        Ok(load_corpus(&self.corpus, format, self.scheme()?)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrendOptions {
    #[arg(long, default_value_t = 3)]
    pub smoothing_window: usize,
    #[arg(long, default_value_t = 8)]
    pub support_threshold: u32,
    #[arg(long, value_enum, default_value_t = OrderArg::DifferenceThenSmooth)]
    pub order: OrderArg,
}

impl TrendOptions {
    fn config(&self) -> TrendConfig {
        TrendConfig {
            smoothing_window: self.smoothing_window,
            support_threshold: self.support_threshold,
            order: match self.order {
                OrderArg::DifferenceThenSmooth => SmoothingOrder::DifferenceThenSmooth,
                OrderArg::SmoothThenDifference => SmoothingOrder::SmoothThenDifference,
            },
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// output file; standard output when omitted
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RankArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub discipline: String,
    /// restrict output to terms listed in this file
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    /// keep only the first N ranked terms
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long, default_value_t = 50.0)]
    pub normal_threshold: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output_format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MdeltaArgs {
    /// CSV with columns term,discipline,technical
    #[arg(long)]
    pub annotations: PathBuf,
    /// CSV with columns discipline,list,term where list is top or bottom
    #[arg(long, conflicts_with_all = ["corpus", "dictionary"])]
    pub lists: Option<PathBuf>,
    /// derive the lists from a corpus ranking instead
    #[arg(long, requires = "dictionary")]
    pub corpus: Option<PathBuf>,
    /// DISCIPLINE=PATH, repeatable; one dictionary per ranked discipline
    #[arg(long)]
    pub dictionary: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub bin_width: u32,
    /// terms per top and bottom list
    #[arg(long, default_value_t = 20)]
    pub list_size: usize,
    /// Laplace-smooth zero M values instead of failing
    #[arg(long)]
    pub smoothing: bool,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output_format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QueryArgs {
    /// word or phrase
    #[arg(long)]
    pub term: String,
    /// further tokens a matching document must contain, repeatable
    #[arg(long)]
    pub coterm: Vec<String>,
}

impl QueryArgs {
    fn query(&self) -> Result<TermQuery> {
        Ok(TermQuery::new(&self.term, &self.coterm)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrendArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub query: QueryArgs,
    #[arg(long)]
    pub discipline: String,
    #[command(flatten)]
    pub trend: TrendOptions,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output_format: OutputFormat,
    /// also write an SVG chart here
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MigrateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub query: QueryArgs,
    /// disciplines to compare, repeatable; all by default
    #[arg(long)]
    pub discipline: Vec<String>,
    #[command(flatten)]
    pub trend: TrendOptions,
    #[arg(long, value_enum, default_value_t = ThresholdMode::Relative)]
    pub strong_threshold_mode: ThresholdMode,
    #[arg(long, default_value_t = 0.5)]
    pub strong_threshold: f64,
    /// also look for this successor term replacing the query
    #[arg(long)]
    pub successor: Option<String>,
    /// bins either side searched for the predecessor's decline
    #[arg(long, default_value_t = 1)]
    pub succession_window: usize,
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    /// CSV with columns t,p
    #[arg(long, conflicts_with = "corpus")]
    pub trajectory: Option<PathBuf>,
    /// fit a term's per-bin frequency instead
    #[arg(long, requires_all = ["term", "discipline"])]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub term: Option<String>,
    #[arg(long)]
    pub coterm: Vec<String>,
    #[arg(long)]
    pub discipline: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub bin_width: u32,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output_format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.6)]
    pub c: f64,
    #[arg(long, default_value_t = 1000.0)]
    pub p_m: f64,
    #[arg(long, default_value_t = 10.0)]
    pub p_0: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
    #[arg(long, value_enum, default_value_t = SimMethod::Closed)]
    pub method: SimMethod,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub output_format: OutputFormat,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SynthArgs {
    /// scenario JSON
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// overrides the scenario's seed
    #[arg(long, env = "TERMFLOW_SEED")]
    pub seed: Option<u64>,
    /// scale every discipline's documents per bin
    #[arg(long)]
    pub docs_per_bin: Option<usize>,
    /// ground-truth sidecar JSON
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PlotArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// repeatable; one line per term and discipline
    #[arg(long, required = true)]
    pub term: Vec<String>,
    #[arg(long, required = true)]
    pub discipline: Vec<String>,
    #[command(flatten)]
    pub trend: TrendOptions,
    #[arg(long)]
    pub title: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Fully resolved settings echoed into every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub subcommand: &'static str,
    pub inputs: Vec<String>,
    pub bin_width: u32,
    pub smoothing_window: usize,
    pub support_threshold: u32,
    pub strong_threshold: StrongThreshold,
    pub output_format: &'static str,
    pub plot: Option<String>,
    pub seed: Option<u64>,
    /// every other argument of the subcommand
    pub arguments: Value,
}

impl RunConfig {
    fn new(subcommand: &'static str, args: &impl Serialize) -> Self {
        RunConfig {
            subcommand,
            inputs: Vec::new(),
            bin_width: 2,
            smoothing_window: 3,
            support_threshold: 8,
            strong_threshold: StrongThreshold::default(),
            output_format: "csv",
            plot: None,
            seed: None,
            arguments: serde_json::to_value(args).unwrap_or(Value::Null),
        }
    }

    fn with_trend(mut self, trend: &TrendOptions) -> Self {
        self.smoothing_window = trend.smoothing_window;
        self.support_threshold = trend.support_threshold;
        self
    }

    fn with_format(mut self, format: OutputFormat) -> Self {
        self.output_format = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        self
    }

    fn input(mut self, path: &Path) -> Self {
        self.inputs.push(path.display().to_string());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        None => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) if p.as_os_str() == "-" => Box::new(BufWriter::new(io::stdout().lock())),
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
    })
}

fn write_csv_artifact(
    out: Option<&Path>,
    config: &RunConfig,
    body: impl FnOnce(&mut dyn Write) -> std::result::Result<(), csv::Error>,
) -> Result<()> {
    let mut writer = open_output(out)?;
    writeln!(writer, "# run_config: {}", config.to_json())?;
    body(&mut writer)?;
    writer.flush()?;
    Ok(())
}

fn write_json_artifact(out: Option<&Path>, config: &RunConfig, body: Value) -> Result<()> {
    let mut object = match body {
        Value::Object(map) => map,
        other => {
            let mut map = serde_json::Map::new();
            map.insert("result".into(), other);
            map
        }
    };
    object.insert("run_config".into(), serde_json::to_value(config)?);
    let mut writer = open_output(out)?;
    serde_json::to_writer_pretty(&mut writer, &Value::Object(object))?;
    writeln!(writer)?;
    writer.flush()?;
    Ok(())
}

fn write_plot(path: &Path, series: &[GrowthSeries], config: &RunConfig, title: Option<String>) -> Result<()> {
    let svg = plot_growth(
        series,
        &PlotOptions {
            title,
            metadata: Some(config.to_json()),
        },
    )?;
    std::fs::write(path, svg)?;
    Ok(())
}

fn run_ingest(args: &IngestArgs) -> Result<()> {
    let config = RunConfig::new("ingest", args).input(&args.corpus.corpus).with_format(OutputFormat::Json);
    let config = RunConfig { bin_width: args.corpus.bin_width, ..config };
    let index = args.corpus.load()?;
    let mut disciplines = Vec::new();
    for label in index.disciplines() {
        let per_bin = index.doc_counts_for(label)?;
        let total: u64 = per_bin.iter().map(|&n| n as u64).sum();
        disciplines.push(json!({"label": label, "documents": total, "per_bin": per_bin}));
    }
    let summary = json!({
        "documents": index.total_documents(),
        "vocabulary_size": index.vocabulary().len(),
        "bins": index.bins().iter().map(|b| b.start_year).collect::<Vec<_>>(),
        "bin_width": index.scheme().width_years,
        "disciplines": disciplines,
    });
    write_json_artifact(args.output.out.as_deref(), &config, summary)
}

fn run_rank(args: &RankArgs) -> Result<()> {
    let mut config = RunConfig::new("rank", args)
        .input(&args.corpus.corpus)
        .with_format(args.output_format);
    config.bin_width = args.corpus.bin_width;
    let dictionary = match &args.dictionary {
        Some(path) => {
            config = config.input(path);
            Some(Dictionary::load(&args.discipline, path)?)
        }
        None => None,
    };
    let index = args.corpus.load()?;
    let percentile = PercentileConfig {
        normal_threshold: args.normal_threshold,
    };
    let ranking = rank_terms(&index, &args.discipline, dictionary.as_ref(), &percentile)?;
    let limit = args.limit.unwrap_or(usize::MAX);
    let entries = ranking.top(limit);
    match args.output_format {
        OutputFormat::Csv => write_csv_artifact(args.output.out.as_deref(), &config, |w| {
            write_ranks_csv(entries.iter().copied(), w)
        }),
        OutputFormat::Json => write_json_artifact(
            args.output.out.as_deref(),
            &config,
            json!({"target_discipline": ranking.target_discipline, "ranks": entries}),
        ),
    }
}

/// discipline → (top terms, bottom terms)
type TermLists = BTreeMap<String, (Vec<String>, Vec<String>)>;

fn read_lists(path: &Path) -> Result<TermLists> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Invalid(format!("{}: missing column '{name}'", path.display())))
    };
    let (d, l, t) = (column("discipline")?, column("list")?, column("term")?);
    let mut lists = TermLists::new();
    for record in reader.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let entry = lists.entry(field(d)).or_default();
        match field(l).as_str() {
            "top" => entry.0.push(field(t)),
            "bottom" => entry.1.push(field(t)),
            other => return Err(Error::Invalid(format!("list must be top or bottom, got '{other}'"))),
        }
    }
    Ok(lists)
}

fn run_mdelta(args: &MdeltaArgs) -> Result<()> {
    let mut config = RunConfig::new("mdelta", args).input(&args.annotations).with_format(args.output_format);
    config.bin_width = args.bin_width;
    let annotations = AnnotationSet::load(&args.annotations)?;
    let lists = match (&args.lists, &args.corpus) {
        (Some(path), _) => {
            config = config.input(path);
            read_lists(path)?
        }
        (None, Some(corpus)) => {
            config = config.input(corpus);
            let index = load_corpus(corpus, None, BinScheme::new(args.bin_width)?)?;
            let mut lists = TermLists::new();
            for spec in &args.dictionary {
                let (discipline, path) = spec
                    .split_once('=')
                    .ok_or_else(|| Error::Invalid(format!("--dictionary expects DISCIPLINE=PATH, got '{spec}'")))?;
                config = config.input(Path::new(path));
                let dictionary = Dictionary::load(discipline, Path::new(path))?;
                let ranking = rank_terms(&index, discipline, Some(&dictionary), &PercentileConfig::default())?;
                let names = |ranks: Vec<&crate::rank::PoissonRank>| ranks.into_iter().map(|r| r.term.clone()).collect();
                lists.insert(
                    discipline.to_string(),
                    (names(ranking.top(args.list_size)), names(ranking.bottom(args.list_size))),
                );
            }
            lists
        }
        (None, None) => return Err(Error::Invalid("mdelta needs --lists or --corpus with --dictionary".into())),
    };
    let mut reports = Vec::new();
    for (discipline, (top, bottom)) in &lists {
        reports.push(m_delta(top, bottom, discipline, &annotations, args.smoothing)?);
    }
    let reports = hardness_ranking(&reports);
    match args.output_format {
        OutputFormat::Csv => write_csv_artifact(args.output.out.as_deref(), &config, |w| write_reports_csv(&reports, w)),
        OutputFormat::Json => write_json_artifact(args.output.out.as_deref(), &config, json!({"reports": reports})),
    }
}

fn run_trend(args: &TrendArgs) -> Result<()> {
    let mut config = RunConfig::new("trend", args)
        .input(&args.corpus.corpus)
        .with_trend(&args.trend)
        .with_format(args.output_format);
    config.bin_width = args.corpus.bin_width;
    config.plot = args.plot.as_deref().map(display);
    let index = args.corpus.load()?;
    let series = analyze(&index, &args.query.query()?, &args.discipline, &args.trend.config())?;
    if let Some(path) = &args.plot {
        write_plot(path, std::slice::from_ref(&series), &config, None)?;
    }
    match args.output_format {
        OutputFormat::Csv => write_csv_artifact(args.output.out.as_deref(), &config, |w| series.write_csv(w)),
        OutputFormat::Json => write_json_artifact(args.output.out.as_deref(), &config, serde_json::to_value(&series)?),
    }
}

fn run_migrate(args: &MigrateArgs) -> Result<()> {
    let strong = match args.strong_threshold_mode {
        ThresholdMode::Relative => StrongThreshold::Relative(args.strong_threshold),
        ThresholdMode::Absolute => StrongThreshold::Absolute(args.strong_threshold),
    };
    let mut config = RunConfig::new("migrate", args)
        .input(&args.corpus.corpus)
        .with_trend(&args.trend)
        .with_format(OutputFormat::Json);
    config.bin_width = args.corpus.bin_width;
    config.strong_threshold = strong;
    config.plot = args.plot.as_deref().map(display);
    let index = args.corpus.load()?;
    let disciplines: Vec<String> = if args.discipline.is_empty() {
        index.disciplines().to_vec()
    } else {
        args.discipline.clone()
    };
    let query = args.query.query()?;
    let trend = args.trend.config();
    let series = disciplines
        .iter()
        .map(|d| analyze(&index, &query, d, &trend))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let report = classify_roles(&series, strong)?;
    let mut body = serde_json::to_value(&report)?;
    let mut plotted = series.clone();
    if let Some(successor) = &args.successor {
        let successor_query = TermQuery::new(successor, &args.query.coterm)?;
        let mut events = Vec::new();
        for (discipline, old) in disciplines.iter().zip(&series) {
            let new = analyze(&index, &successor_query, discipline, &trend)?;
            let event = detect_succession(old, &new, args.succession_window).ok();
            events.push(json!({"discipline": discipline, "event": event}));
            plotted.push(new);
        }
        body["succession"] = Value::Array(events);
    }
    if let Some(path) = &args.plot {
        write_plot(path, &plotted, &config, Some(format!("{} ({})", query, report.roles)))?;
    }
    write_json_artifact(args.output.out.as_deref(), &config, body)
}

fn read_trajectory(path: &Path) -> Result<AdoptionTrajectory> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Invalid(format!("{}: missing column '{name}'", path.display())))
    };
    let (t_col, p_col) = (column("t")?, column("p")?);
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let number = |i: usize| -> Result<f64> {
            record
                .get(i)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|_| Error::Invalid(format!("{}: row {} is not numeric", path.display(), line + 2)))
        };
        times.push(number(t_col)?);
        values.push(number(p_col)?);
    }
    Ok(AdoptionTrajectory::new(times, values)?)
}

fn run_fit(args: &FitArgs) -> Result<()> {
    let mut config = RunConfig::new("fit", args).with_format(args.output_format);
    config.bin_width = args.bin_width;
    let trajectory = match (&args.trajectory, &args.corpus) {
        (Some(path), _) => {
            config = config.input(path);
            read_trajectory(path)?
        }
        (None, Some(corpus)) => {
            config = config.input(corpus);
            let index = load_corpus(corpus, None, BinScheme::new(args.bin_width)?)?;
            let term = args.term.as_deref().unwrap_or_default();
            let discipline = args.discipline.as_deref().unwrap_or_default();
            let freq = crate::trend::frequency_series(&index, &TermQuery::new(term, &args.coterm)?, discipline)?;
            let (times, values) = freq
                .bins
                .iter()
                .zip(&freq.f)
                .filter_map(|(bin, f)| f.map(|f| (bin.start_year as f64, f)))
                .unzip();
            AdoptionTrajectory::new(times, values)?
        }
        (None, None) => return Err(Error::Invalid("fit needs --trajectory or --corpus".into())),
    };
    let report = fit(&trajectory)?;
    match args.output_format {
        OutputFormat::Json => write_json_artifact(args.output.out.as_deref(), &config, serde_json::to_value(report)?),
        OutputFormat::Csv => write_csv_artifact(args.output.out.as_deref(), &config, |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["c", "p_m", "p_0", "rmse", "n_points", "t0"])?;
            out.write_record([
                report.c.to_string(),
                report.p_m.to_string(),
                report.p_0.to_string(),
                report.rmse.to_string(),
                report.n_points.to_string(),
                report.t0.to_string(),
            ])?;
            out.flush()?;
            Ok(())
        }),
    }
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let config = RunConfig::new("simulate", args).with_format(args.output_format);
    let params = DiffusionParams::new(args.c, args.p_m, args.p_0)?;
    if !(args.dt > 0.0 && args.dt.is_finite() && args.t_end >= 0.0) {
        return Err(Error::Invalid("dt must be positive and t_end non-negative".into()));
    }
    let trajectory = match args.method {
        SimMethod::Euler => trajectory_euler(&params, args.t_end, args.dt)?,
        SimMethod::Closed => {
            let steps = (args.t_end / args.dt).round() as usize;
            let times: Vec<f64> = (0..=steps).map(|i| i as f64 * args.dt).collect();
            trajectory_closed_form(&params, &times)?
        }
    };
    let rates: Vec<f64> = trajectory
        .p
        .iter()
        .map(|&p| params.c * p * (params.p_m - p) / params.p_m)
        .collect();
    match args.output_format {
        OutputFormat::Csv => write_csv_artifact(args.output.out.as_deref(), &config, |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["t", "p", "rate"])?;
            for ((t, p), r) in trajectory.times.iter().zip(&trajectory.p).zip(&rates) {
                out.write_record([t.to_string(), p.to_string(), r.to_string()])?;
            }
            out.flush()?;
            Ok(())
        }),
        OutputFormat::Json => write_json_artifact(
            args.output.out.as_deref(),
            &config,
            json!({"params": params, "t": trajectory.times, "p": trajectory.p, "rate": rates}),
        ),
    }
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let mut spec: ScenarioSpec = match (&args.spec, args.preset) {
        (Some(path), _) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        (None, Some(Preset::Chaos)) => presets::chaos(0),
        (None, Some(Preset::Nonlinear)) => presets::nonlinear(0),
        (None, Some(Preset::Succession)) => presets::succession(0),
        (None, None) => return Err(Error::Invalid("synth needs --spec or --preset".into())),
    };
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(n) = args.docs_per_bin {
        for d in spec.disciplines.iter_mut() {
            d.docs_per_bin = n;
        }
    }
    let scenario = generate(&spec)?;
    let mut writer = open_output(args.output.out.as_deref())?;
    write_jsonl(&scenario.documents, &mut writer)?;
    writer.flush()?;
    if let Some(path) = &args.truth {
        let mut config = RunConfig::new("synth", args).with_format(OutputFormat::Json);
        config.bin_width = spec.bin_width;
        config.seed = Some(spec.seed);
        if let Some(p) = &args.spec {
            config = config.input(p);
        }
        let body = json!({"scenario": spec, "truth": scenario.truth});
        write_json_artifact(Some(path), &config, body)?;
    }
    Ok(())
}

fn run_plot(args: &PlotArgs) -> Result<()> {
    let mut config = RunConfig::new("plot", args).input(&args.corpus.corpus).with_trend(&args.trend);
    config.bin_width = args.corpus.bin_width;
    config.output_format = "svg";
    config.plot = args.output.out.as_deref().map(display);
    let index = args.corpus.load()?;
    let trend = args.trend.config();
    let mut series = Vec::new();
    for term in &args.term {
        let query = TermQuery::single(term)?;
        for discipline in &args.discipline {
            series.push(analyze(&index, &query, discipline, &trend)?);
        }
    }
    let svg = plot_growth(
        &series,
        &PlotOptions {
            title: args.title.clone(),
            metadata: Some(config.to_json()),
        },
    )?;
    let mut writer = open_output(args.output.out.as_deref())?;
    writer.write_all(svg.as_bytes())?;
    writer.flush()?;
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Ingest(a) => run_ingest(a),
        Command::Rank(a) => run_rank(a),
        Command::Mdelta(a) => run_mdelta(a),
        Command::Trend(a) => run_trend(a),
        Command::Migrate(a) => run_migrate(a),
        Command::Fit(a) => run_fit(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Synth(a) => run_synth(a),
        Command::Plot(a) => run_plot(a),
    }
}

/// Single-line JSON error for standard error.
pub fn error_line(code: &str, message: &str) -> String {
    json!({"error": {"code": code, "message": message}}).to_string()
}

/// Parse `argv`, run the subcommand and return the process exit code:
/// 0 on success, 1 on failure, 2 on a usage error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("usage error").trim_start_matches("error: ");
            eprintln!("{}", error_line("cli.usage", first));
            return 2;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(&e.code(), &e.to_string()));
            1
        }
    }
}
