//! The `droidlens` command line.
//!
//! Exit codes: 0 on success, 1 when reading, processing or writing data
//! fails, 2 for usage errors (bad flags, unreadable or invalid config).

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomic::write_atomically;
use crate::clustering::sse_curve;
use crate::dataset::{
    extract_corpus,
    oracle::{label_features, OracleClient},
    read_dataset, read_features, write_dataset, write_features, DatasetError, ExtractOptions,
};
use crate::eval::{
    self, compare_clusterings, report, Aggregation, ClusterGrid, EvalConfig, EvalError, Protocol,
};
use crate::learn::{ClassifierKind, ClassifierSpec};

#[derive(Debug, Parser)]
#[command(
    name = "droidlens",
    version,
    about = "Opcode-frequency malware detection for DEX files"
)]
struct Cli {
    /// Append timestamped logs to this file instead of stderr.
    #[arg(long, global = true)]
    log_file: Option<PathBuf>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count opcodes in every .dex file (or multi-dex app directory) under DEX_DIR.
    Extract {
        dex_dir: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        verify_checksum: bool,
        /// Drop apps whose files fail to parse instead of aborting.
        #[arg(long)]
        skip_invalid: bool,
    },
    /// Label a features CSV by engine consensus from a report oracle.
    Label {
        features: PathBuf,
        /// Base URL (http:// or https://) or a directory of <sha256>.json reports.
        #[arg(long)]
        oracle: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Detections needed to call a file malware.
        #[arg(long)]
        threshold: Option<usize>,
        /// Request budget for HTTP mode; 0 disables throttling.
        #[arg(long)]
        requests_per_minute: Option<u32>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Score the five clustering algorithms over their parameter grids.
    ClusterCompare {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// k-means SSE for a range of k.
    Elbow {
        input: Option<PathBuf>,
        /// Inclusive range `a..b` or a comma-separated list [default: 1..10].
        #[arg(long)]
        k: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Cross-validated evaluation of the classifiers.
    Eval {
        pipeline: PipelineArg,
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pipeline_args: PipelineArgs,
    },
    /// Run both pipelines and write a markdown summary.
    Compare {
        input: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        pipeline_args: PipelineArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PipelineArg {
    Plain,
    Clustered,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long)]
    cv_k: Option<usize>,
    #[arg(long)]
    cluster_k: Option<usize>,
    #[arg(long)]
    no_smote: bool,
    /// Fit the routing clusters once on the full dataset, test rows included.
    #[arg(long)]
    paper_protocol: bool,
    #[arg(long, value_enum)]
    aggregation: Option<AggregationArg>,
    /// Restrict to these classifiers (default hyperparameters).
    #[arg(long, value_enum, value_delimiter = ',')]
    classifiers: Vec<KindArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum AggregationArg {
    Pooled,
    PerFoldMean,
}

// Same spelling as the config file.
#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum KindArg {
    LogisticRegression,
    GaussianNb,
    LinearSvm,
    DecisionTree,
    RandomForest,
}

impl From<KindArg> for ClassifierKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::LogisticRegression => ClassifierKind::LogisticRegression,
            KindArg::GaussianNb => ClassifierKind::GaussianNb,
            KindArg::LinearSvm => ClassifierKind::LinearSvm,
            KindArg::DecisionTree => ClassifierKind::DecisionTree,
            KindArg::RandomForest => ClassifierKind::RandomForest,
        }
    }
}

/// Contents of `--config`. Every field is optional; unknown keys are errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub cv_k: usize,
    pub stratified: bool,
    pub aggregation: Aggregation,
    pub cluster_k: usize,
    pub smote: bool,
    pub smote_k: usize,
    pub protocol: Protocol,
    pub standardize_clustering: bool,
    pub cluster_restarts: usize,
    pub classifiers: Vec<ClassifierSpec>,
    pub cluster_grid: ClusterGrid,
    pub elbow_k: Vec<usize>,
    pub label_threshold: usize,
    pub requests_per_minute: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        let eval = EvalConfig::default();
        Self {
            input: None,
            output: None,
            seed: eval.seed,
            cv_k: eval.cv_k,
            stratified: eval.stratified,
            aggregation: eval.aggregation,
            cluster_k: eval.cluster_k,
            smote: eval.smote,
            smote_k: eval.smote_k,
            protocol: eval.protocol,
            standardize_clustering: eval.standardize_clustering,
            cluster_restarts: eval.cluster_restarts,
            classifiers: ClassifierKind::ALL
                .iter()
                .map(|&k| ClassifierSpec::new(k))
                .collect(),
            cluster_grid: ClusterGrid::default(),
            elbow_k: (1..=10).collect(),
            label_threshold: 1,
            requests_per_minute: 4,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            cv_k: self.cv_k,
            seed: self.seed,
            stratified: self.stratified,
            aggregation: self.aggregation,
            cluster_k: self.cluster_k,
            smote: self.smote,
            smote_k: self.smote_k,
            protocol: self.protocol,
            standardize_clustering: self.standardize_clustering,
            cluster_restarts: self.cluster_restarts,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Cluster(#[from] crate::clustering::ClusterError),
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn init_logging(cli: &Cli) -> Result<(), CliError> {
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let mut builder = env_logger::Builder::new();
    builder.filter_level(level).parse_default_env();
    match &cli.log_file {
        Some(path) => {
            let file = fs::OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| CliError::Usage(format!("log file {}: {e}", path.display())))?;
            builder.target(env_logger::Target::Pipe(Box::new(file)));
        }
        None => {
            builder.format_timestamp(None);
        }
    }
    // A logger may already be installed when running in-process (tests).
    let _ = builder.try_init();
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match init_logging(&cli).and_then(|()| run(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("droidlens: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Input(format!("{}: no such file", path.display())))
    }
}

fn require_output(path: &Path) -> Result<(), CliError> {
    if path.is_dir() {
        return Err(CliError::Input(format!(
            "{}: output path is a directory",
            path.display()
        )));
    }
    let parent = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{}: output directory does not exist",
            parent.display()
        )))
    }
}

/// Positional/flag value, else the config value, else a usage error.
fn resolve(
    flag: Option<PathBuf>,
    config: &Option<PathBuf>,
    what: &str,
) -> Result<PathBuf, CliError> {
    flag.or_else(|| config.clone())
        .ok_or_else(|| CliError::Usage(format!("no {what} given (argument or config)")))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomically(path, |w| w.write_all(text.as_bytes())).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn apply_pipeline_args(cfg: &mut RunConfig, args: &PipelineArgs) {
    if let Some(k) = args.cv_k {
        cfg.cv_k = k;
    }
    if let Some(k) = args.cluster_k {
        cfg.cluster_k = k;
    }
    if args.no_smote {
        cfg.smote = false;
    }
    if args.paper_protocol {
        cfg.protocol = Protocol::FullDataset;
    }
    if let Some(a) = args.aggregation {
        cfg.aggregation = match a {
            AggregationArg::Pooled => Aggregation::Pooled,
            AggregationArg::PerFoldMean => Aggregation::PerFoldMean,
        };
    }
    if !args.classifiers.is_empty() {
        cfg.classifiers = args
            .classifiers
            .iter()
            .map(|&k| ClassifierSpec::new(k.into()))
            .collect();
    }
}

fn prepare(
    input: Option<PathBuf>,
    output: Option<PathBuf>,
    common: &CommonArgs,
) -> Result<(RunConfig, PathBuf, PathBuf), CliError> {
    let mut cfg = load_config(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let input = resolve(input, &cfg.input, "input file")?;
    let output = resolve(output, &cfg.output, "output path (-o)")?;
    require_file(&input)?;
    require_output(&output)?;
    for spec in &cfg.classifiers {
        spec.validate()
            .map_err(|e| CliError::Usage(format!("config: {e}")))?;
    }
    Ok((cfg, input, output))
}

/// Accepts `a..b` (inclusive) or `a,b,c`.
fn parse_k_list(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || {
        CliError::Usage(format!(
            "--k {s:?}: expected `a..b` or a comma-separated list"
        ))
    };
    let ks: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        );
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if ks.is_empty() || ks.contains(&0) {
        return Err(bad());
    }
    Ok(ks)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Extract {
            dex_dir,
            output,
            verify_checksum,
            skip_invalid,
        } => {
            if !dex_dir.is_dir() {
                return Err(CliError::Input(format!(
                    "{}: no such directory",
                    dex_dir.display()
                )));
            }
            require_output(&output)?;
            let out = extract_corpus(
                &dex_dir,
                ExtractOptions {
                    verify_checksum,
                    skip_invalid,
                },
            )?;
            write_features(&out.ids, &out.rows(), &output)?;
            eprintln!(
                "extracted {} apps ({} skipped) to {}",
                out.ids.len(),
                out.skipped.len(),
                output.display()
            );
        }
        Command::Label {
            features,
            oracle,
            output,
            threshold,
            requests_per_minute,
            config,
        } => {
            let cfg = load_config(config.as_deref())?;
            require_file(&features)?;
            require_output(&output)?;
            let threshold = threshold.unwrap_or(cfg.label_threshold);
            if threshold == 0 {
                return Err(CliError::Usage("--threshold must be at least 1".into()));
            }
            let mut client = OracleClient::from_location(
                &oracle,
                requests_per_minute.unwrap_or(cfg.requests_per_minute),
            )?;
            let (ids, rows) = read_features(&features)?;
            let ds = label_features(&mut client, &ids, &rows, threshold)?;
            write_dataset(&ds, &output)?;
            let (benign, malware) = ds.class_counts();
            eprintln!(
                "labeled {} rows: {benign} benign, {malware} malware",
                ds.len()
            );
        }
        Command::ClusterCompare {
            input,
            output,
            common,
        } => {
            let (cfg, input, output) = prepare(input, output, &common)?;
            let ds = read_dataset(&input)?;
            let cmp = compare_clusterings(ds.features(), &cfg.cluster_grid, cfg.seed)?;
            write_text(&output, &report::comparison_csv(&cmp))?;
            print!("{}", report::comparison_table(&cmp));
        }
        Command::Elbow {
            input,
            k,
            output,
            common,
        } => {
            let (cfg, input, output) = prepare(input, output, &common)?;
            let ks = match k {
                Some(k) => parse_k_list(&k)?,
                None => cfg.elbow_k.clone(),
            };
            let ds = read_dataset(&input)?;
            let curve = sse_curve(ds.features(), &ks, cfg.seed)?;
            let text = report::sse_csv(&curve);
            write_text(&output, &text)?;
            print!("{text}");
        }
        Command::Eval {
            pipeline,
            input,
            output,
            common,
            pipeline_args,
        } => {
            let (mut cfg, input, output) = prepare(input, output, &common)?;
            apply_pipeline_args(&mut cfg, &pipeline_args);
            let ds = read_dataset(&input)?;
            let eval_cfg = cfg.eval_config();
            let rep = match pipeline {
                PipelineArg::Plain => eval::run_plain_pipeline(&ds, &cfg.classifiers, &eval_cfg)?,
                PipelineArg::Clustered => {
                    eval::run_clustered_pipeline(&ds, &cfg.classifiers, &eval_cfg)?
                }
            };
            write_text(&output, &report::report_csv(&rep))?;
            print!("{}", report::report_table(&rep));
        }
        Command::Compare {
            input,
            output,
            common,
            pipeline_args,
        } => {
            let (mut cfg, input, output) = prepare(input, output, &common)?;
            apply_pipeline_args(&mut cfg, &pipeline_args);
            let ds = read_dataset(&input)?;
            let eval_cfg = cfg.eval_config();
            let plain = eval::run_plain_pipeline(&ds, &cfg.classifiers, &eval_cfg)?;
            let clustered = eval::run_clustered_pipeline(&ds, &cfg.classifiers, &eval_cfg)?;
            let text = report::summary_markdown(&plain, &clustered);
            write_text(&output, &text)?;
            print!("{text}");
        }
    }
    Ok(())
}
