//! The `cwe-senses` command line: one subcommand per analysis, each writing
//! its outputs plus a `<out>.manifest.json` run manifest.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::{self, filter_records, load_dataset, Dataset, LabelRanking};
use crate::lsc::{self, LogBase};
use crate::purity::{self, Sigma};
use crate::stopwords::StopWords;
use crate::vectormath::acs_isotropy;
use crate::wsd::{self, SplitProtocol};
use crate::wsi::{self, ClusteringSolution, Init, KMeansParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cwe-senses",
    version,
    about = "Sense analytics over contextualized word embeddings"
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag of the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a dataset and summarise its contents.
    IngestCheck(IngestArgs),
    /// Prototype 1NN sense prediction scored by weighted F1.
    WsdEval(WsdArgs),
    /// Best-of-N K-means with cluster profiles and heatmap.
    Cluster(ClusterArgs),
    /// CV purity of a clustering against gold labels.
    Purity(PurityArgs),
    /// AIS/APS cohesion-separation heatmap of a clustering.
    Cohesion(CohesionArgs),
    /// Yearly cluster frequencies, JSD and CDPT.
    Lsc(LscArgs),
    /// Average cosine similarity over random pairs.
    Isotropy(IsotropyArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DatasetArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Expected vector dimension.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct IngestArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct WsdArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Number of most frequent labels to predict.
    #[arg(long)]
    pub labels: usize,
    #[arg(long, value_enum, default_value = "none")]
    pub split: SplitProtocol,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Number of clusters; defaults to `--labels`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Restrict to the records of the most frequent labels.
    #[arg(long)]
    pub labels: Option<usize>,
    /// Inclusive year range `FROM:TO`.
    #[arg(long, value_parser = parse_years)]
    pub years: Option<YearRange>,
    #[arg(long, default_value_t = 100)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value = "forgy")]
    pub init: Init,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PurityArgs {
    #[arg(long)]
    pub solution: PathBuf,
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub labels: usize,
    #[arg(long, value_enum, default_value = "population")]
    pub sigma: Sigma,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct CohesionArgs {
    #[arg(long)]
    pub solution: PathBuf,
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct LscArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long)]
    pub solution: PathBuf,
    /// Yearly series CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Change CSV; defaults to `<out stem>.change.csv`.
    #[arg(long)]
    pub change_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "two")]
    pub log_base: LogBase,
}

#[derive(Debug, Args, Serialize)]
pub struct IsotropyArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, default_value_t = 200_000)]
    pub tokens: usize,
    /// Defaults to half the token count.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct YearRange {
    pub from: i32,
    pub to: i32,
}

impl YearRange {
    pub fn range(self) -> RangeInclusive<i32> {
        self.from..=self.to
    }
}

fn parse_years(s: &str) -> std::result::Result<YearRange, String> {
    let (a, b) = s.split_once(':').ok_or("expected FROM:TO")?;
    let from = a.trim().parse().map_err(|e| format!("{e}"))?;
    let to = b.trim().parse().map_err(|e| format!("{e}"))?;
    if from > to {
        return Err(format!("empty year range {from}:{to}"));
    }
    Ok(YearRange { from, to })
}

/// Configuration captured next to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub flags: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub stopwords_sha256: String,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    pub timestamp_unix: u64,
}

const SUBCOMMANDS: &[&str] = &[
    "ingest-check",
    "wsd-eval",
    "cluster",
    "purity",
    "cohesion",
    "lsc",
    "isotropy",
];

/// Appends `--key value` for every config entry whose flag is absent from
/// `argv`. Top-level keys apply to every subcommand; a `[subcommand]` table
/// applies to that subcommand only.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = argv
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))
    else {
        return Ok(argv);
    };
    let path = match argv[pos].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => argv
            .get(pos + 1)
            .cloned()
            .ok_or_else(|| Error::InvalidParameter("--config needs a path".into()))?,
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::InvalidParameter(format!("config {path}: {e}")))?;
    let sub = argv
        .iter()
        .find(|a| SUBCOMMANDS.contains(&a.as_str()))
        .cloned();

    let mut entries: Vec<(String, toml::Value)> = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(t) if Some(key) == sub.as_ref() => {
                entries.extend(t.iter().map(|(k, v)| (k.clone(), v.clone())));
            }
            toml::Value::Table(_) => {}
            v => entries.push((key.clone(), v.clone())),
        }
    }

    let mut out = argv.clone();
    for (key, value) in entries {
        let flag = format!("--{}", key.replace('_', "-"));
        let present = argv
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")));
        if present {
            continue;
        }
        match value {
            toml::Value::Boolean(true) => out.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => out.extend([flag, s]),
            toml::Value::Integer(i) => out.extend([flag, i.to_string()]),
            toml::Value::Float(f) => out.extend([flag, f.to_string()]),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "config key {key}: unsupported value {other}"
                )))
            }
        }
    }
    Ok(out)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// `dir/stem<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let name = out
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{name}.manifest.json"))
}

struct Run {
    subcommand: &'static str,
    argv: Vec<String>,
    inputs: BTreeMap<String, String>,
}

impl Run {
    fn dataset(&mut self, args: &DatasetArgs) -> Result<Dataset> {
        let ds = load_dataset(&args.dataset, args.dim)?;
        self.inputs
            .insert("dataset_sha256".into(), sha256_file(&args.dataset)?);
        let hp = ingest::header_path(&args.dataset);
        if hp.exists() {
            self.inputs
                .insert("dataset_header_sha256".into(), sha256_file(&hp)?);
        }
        Ok(ds)
    }

    fn solution(&mut self, path: &Path) -> Result<ClusteringSolution> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.inputs
            .insert("solution_sha256".into(), sha256_file(path)?);
        // Accept either a bare solution or a full `cluster` report.
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let inner = value.get("solution").cloned().unwrap_or(value);
        Ok(serde_json::from_value(inner)?)
    }

    fn finish<F: Serialize>(&self, out: &Path, flags: &F, seeds: Vec<u64>) -> Result<()> {
        let manifest = RunManifest {
            subcommand: self.subcommand.to_string(),
            argv: self.argv.clone(),
            flags: serde_json::to_value(flags)?,
            inputs: self.inputs.clone(),
            stopwords_sha256: StopWords::english().sha256().to_string(),
            seeds,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        write_json(&manifest_path(out), &manifest)
    }
}

/// Records of `dataset` that the solution assigns, in dataset order.
fn restrict_to_solution(dataset: &Dataset, solution: &ClusteringSolution) -> Result<Dataset> {
    if let Some(id) = solution
        .assignment
        .keys()
        .find(|id| dataset.get(id).is_none())
    {
        return Err(Error::InvalidParameter(format!(
            "solution assigns {id:?}, which is not in the dataset"
        )));
    }
    let records = dataset
        .records()
        .iter()
        .filter(|r| solution.assignment.contains_key(&r.occurrence_id))
        .cloned()
        .collect();
    Dataset::new(records, dataset.source_path())
}

#[derive(Serialize)]
struct IngestSummary {
    source: String,
    records: usize,
    dim: usize,
    corpus_ids: Vec<String>,
    labels: LabelRanking,
    unlabeled: usize,
    year_min: Option<i32>,
    year_max: Option<i32>,
    undated: usize,
    with_context: usize,
}

fn ingest_check(run: &mut Run, args: &IngestArgs) -> Result<()> {
    let ds = run.dataset(&args.data)?;
    let years: Vec<i32> = ds.records().iter().filter_map(|r| r.year).collect();
    let summary = IngestSummary {
        source: args.data.dataset.display().to_string(),
        records: ds.len(),
        dim: ds.dim(),
        corpus_ids: ingest::corpus_ids(&ds),
        labels: LabelRanking::from_dataset(&ds),
        unlabeled: ds.records().iter().filter(|r| r.label.is_none()).count(),
        year_min: years.iter().min().copied(),
        year_max: years.iter().max().copied(),
        undated: ds.len() - years.len(),
        with_context: ds
            .records()
            .iter()
            .filter(|r| r.context_tokens.is_some())
            .count(),
    };
    println!(
        "{}: {} records, dim {}",
        summary.source, summary.records, summary.dim
    );
    if let Some(out) = &args.out {
        write_json(out, &summary)?;
        run.finish(out, args, vec![])?;
    }
    Ok(())
}

fn wsd_eval(run: &mut Run, args: &WsdArgs) -> Result<()> {
    let ds = run.dataset(&args.data)?;
    let outcome = wsd::run(&ds, args.labels, args.split, args.seed)?;
    println!("weighted_f1 {}", outcome.report.weighted_f1);
    write_json(&args.out, &outcome)?;
    run.finish(&args.out, args, vec![args.seed])
}

fn cluster(run: &mut Run, args: &ClusterArgs) -> Result<()> {
    let ds = run.dataset(&args.data)?;
    let subset = args
        .labels
        .map(|k| ingest::build_label_subset(&ds, k))
        .transpose()?;
    let ds =
        filter_records(&ds, subset.as_ref(), args.years.map(YearRange::range)).into_dataset()?;
    let k = args
        .k
        .or(args.labels)
        .ok_or_else(|| Error::InvalidParameter("either --k or --labels is required".into()))?;
    let params = KMeansParams {
        max_iter: args.max_iter,
        tol: args.tol,
        init: args.init,
    };
    let report = wsi::induce(
        &ds,
        k,
        args.restarts,
        args.seed,
        &params,
        StopWords::english(),
    )?;
    println!(
        "k {} inertia {} seed {} permutation {}",
        k, report.solution.inertia, report.solution.seed, report.permutation
    );
    write_json(&args.out, &report)?;
    write_text(
        &sibling(&args.out, ".heatmap.csv"),
        &report.heatmap.to_csv(),
    )?;
    let seeds = report.restarts.iter().map(|r| r.seed).collect();
    run.finish(&args.out, args, seeds)
}

fn purity_cmd(run: &mut Run, args: &PurityArgs) -> Result<()> {
    let solution = run.solution(&args.solution)?;
    let full = run.dataset(&args.data)?;
    let subset = ingest::build_label_subset(&full, args.labels)?;
    let ds = restrict_to_solution(&full, &solution)?;
    let report = purity::purity_score(&solution, &ds, &subset, args.sigma)?;
    println!(
        "purity {} permutation {}",
        report.purity, report.permutation
    );
    write_json(&args.out, &report)?;
    run.finish(&args.out, args, vec![solution.seed])
}

fn cohesion(run: &mut Run, args: &CohesionArgs) -> Result<()> {
    let solution = run.solution(&args.solution)?;
    let ds = restrict_to_solution(&run.dataset(&args.data)?, &solution)?;
    let heatmap = wsi::heatmap_data(&solution, &ds)?;
    match heatmap.ais_minus_aps {
        Some(d) => println!("mean AIS - APS {d}"),
        None => println!("mean AIS - APS undefined"),
    }
    write_json(&args.out, &heatmap)?;
    write_text(&sibling(&args.out, ".csv"), &heatmap.to_csv())?;
    run.finish(&args.out, args, vec![solution.seed])
}

fn lsc_cmd(run: &mut Run, args: &LscArgs) -> Result<()> {
    let solution = run.solution(&args.solution)?;
    let ds = restrict_to_solution(&run.dataset(&args.data)?, &solution)?;
    let series = lsc::year_series(&ds, &solution)?;
    let change = lsc::change_series(&ds, &solution, args.log_base)?;
    write_text(&args.out, &series.to_csv())?;
    let change_out = args
        .change_out
        .clone()
        .unwrap_or_else(|| sibling(&args.out, ".change.csv"));
    write_text(&change_out, &change.to_csv())?;
    println!(
        "{} years, {} change points, {} undated",
        series.years.len(),
        change.entries.len(),
        series.undated
    );
    run.finish(&args.out, args, vec![solution.seed])
}

fn isotropy(run: &mut Run, args: &IsotropyArgs) -> Result<()> {
    let ds = run.dataset(&args.data)?;
    let pairs = args.pairs.unwrap_or(args.tokens / 2);
    let summary = acs_isotropy(&ds, args.tokens, pairs, args.seed)?;
    println!(
        "ACS {} over {} pairs{}",
        summary.mean,
        summary.n_pairs,
        if summary.with_replacement {
            " (sampled with replacement)"
        } else {
            ""
        }
    );
    write_json(&args.out, &summary)?;
    run.finish(&args.out, args, vec![args.seed])
}

fn dispatch(run: &mut Run, command: &Command) -> Result<()> {
    match command {
        Command::IngestCheck(a) => ingest_check(run, a),
        Command::WsdEval(a) => wsd_eval(run, a),
        Command::Cluster(a) => cluster(run, a),
        Command::Purity(a) => purity_cmd(run, a),
        Command::Cohesion(a) => cohesion(run, a),
        Command::Lsc(a) => lsc_cmd(run, a),
        Command::Isotropy(a) => isotropy(run, a),
    }
}

fn name_of(command: &Command) -> &'static str {
    match command {
        Command::IngestCheck(_) => "ingest-check",
        Command::WsdEval(_) => "wsd-eval",
        Command::Cluster(_) => "cluster",
        Command::Purity(_) => "purity",
        Command::Cohesion(_) => "cohesion",
        Command::Lsc(_) => "lsc",
        Command::Isotropy(_) => "isotropy",
    }
}

fn exit_code(err: &Error) -> i32 {
    if err.is_io() {
        EXIT_IO
    } else {
        EXIT_VALIDATION
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_VALIDATION
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    let mut run = Run {
        subcommand: name_of(&cli.command),
        argv: argv.into_iter().skip(1).collect(),
        inputs: BTreeMap::new(),
    };
    match dispatch(&mut run, &cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
