//! `anchorscope`: simulate, ingest, fit, score, report and serve.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anchorscope::anomaly::Detectors;
use anchorscope::event_log::OperationCatalog;
use anchorscope::pipeline::{
    anchors_table, dataset_catalog, export_table, fit_detectors, fit_scoring, ingest_dataset, load_normal_space,
    load_scoring_context, load_transition_model, rank_anchors, save_normal_space, save_scoring_context,
    save_transition_model, score_corpus, FitPlan, NormalSelector, PipelineConfig, PipelineError,
    ServiceSummary, SessionMeta, Workspace,
};
use anchorscope::sim::{generate_corpus, write_corpus, CorpusConfig, SimError};
use anchorscope_server::{ServerConfig, ServerError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "anchorscope", version, about = "Operational and behavioral anchors for service videos and logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset.
    Simulate(SimulateArgs),
    /// Parse logs, align features and store the ingested sessions.
    Ingest(CommonArgs),
    /// Fit the anomaly detectors and scoring statistics.
    Fit(FitArgs),
    /// Score every session with the fitted models.
    Score(CommonArgs),
    /// List the strongest per-operation anchors.
    Anchors(AnchorsArgs),
    /// Print the corpus summary.
    Export(ExportArgs),
    /// Start the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Structured,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Sessions per scenario type, e.g. ST=10,NM=10,DA=10,DP=10.
    #[arg(long, default_value = "ST=10,NM=10,DA=10,DP=10")]
    counts: String,
    #[arg(long)]
    seed: u64,
    /// Output dataset directory.
    #[arg(long, default_value = "dataset")]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    agents: usize,
    /// Pipeline config; only its log grammar is used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long, default_value = "dataset")]
    dataset: PathBuf,
    /// Pipeline and scoring config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for model files; defaults to `<dataset>/models`.
    #[arg(long)]
    models: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Train the transition model on the catalog order.
    #[arg(long)]
    guideline: bool,
    /// Comma-separated session ids to treat as normal.
    #[arg(long, value_delimiter = ',')]
    normal_sessions: Vec<String>,
}

#[derive(Debug, Args)]
struct AnchorsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 20)]
    top: usize,
    /// Restrict to one session.
    #[arg(long)]
    session: Option<String>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Server config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    host: Option<String>,
    #[arg(long)]
    port: Option<u16>,
    /// Pipeline and scoring config (TOML).
    #[arg(long)]
    scoring_config: Option<PathBuf>,
    #[arg(long)]
    guideline: bool,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ServerError> for CliError {
    fn from(e: ServerError) -> Self {
        match e {
            ServerError::Pipeline(p) => p.into(),
            ServerError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn,anchorscope=info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let reason = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
            let detail = text
                .lines()
                .skip_while(|l| !l.starts_with("error:"))
                .skip(1)
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with("Usage:") && !l.starts_with("For more"))
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("{} {detail}", reason.trim_end());
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Ingest(a) => ingest(a),
        Command::Fit(a) => fit(a),
        Command::Score(a) => score(a),
        Command::Anchors(a) => anchors(a),
        Command::Export(a) => export(a),
        Command::Serve(a) => serve(a),
    }
}

fn pipeline_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    match path {
        Some(p) => {
            if !p.is_file() {
                return Err(CliError::Io(format!("config {} not found", p.display())));
            }
            Ok(PipelineConfig::load(p)?)
        }
        None => Ok(PipelineConfig::default()),
    }
}

fn dataset_dir(dir: &Path) -> Result<(), CliError> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(CliError::Io(format!("dataset directory {} not found", dir.display())))
    }
}

fn print_structured<T: Serialize + ?Sized>(value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    text.push('\n');
    emit(&text)
}

/// Writes to stdout; a closed pipe ends output quietly.
fn emit(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

struct ModelPaths {
    normal_space: PathBuf,
    transitions: PathBuf,
    scoring: PathBuf,
}

impl ModelPaths {
    fn new(workspace: &Workspace, models: Option<&Path>) -> Self {
        let defaults = [
            workspace.normal_space_path(),
            workspace.transition_model_path(),
            workspace.scoring_context_path(),
        ];
        let [normal_space, transitions, scoring] = match models {
            Some(dir) => defaults.map(|p| dir.join(p.file_name().expect("model file name"))),
            None => defaults,
        };
        ModelPaths {
            normal_space,
            transitions,
            scoring,
        }
    }

    fn load_detectors(&self) -> Result<Detectors, CliError> {
        Ok(Detectors {
            normal_space: load_normal_space(&self.normal_space)?,
            transitions: load_transition_model(&self.transitions)?,
        })
    }
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let counts = CorpusConfig::parse_counts(&a.counts).map_err(CliError::Validation)?;
    let mut config = CorpusConfig::with_counts(&counts, a.seed);
    config.agents = a.agents;
    if config.total() == 0 {
        return Err(CliError::Validation("--counts selects no sessions".into()));
    }
    let pipeline = pipeline_config(a.config.as_deref())?;
    let catalog = OperationCatalog::default();
    let sessions = generate_corpus(&config, &catalog, &pipeline.grammar)?;
    let manifest = write_corpus(&a.out, &sessions, &config, &catalog, &pipeline.grammar)?;
    match a.format {
        Format::Structured => print_structured(&manifest),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "{:<12} {:<5} {:<6} {:<6} {:>20}", "session", "label", "agent", "client", "seed");
            for e in &manifest.sessions {
                let _ = writeln!(
                    out,
                    "{:<12} {:<5} {:<6} {:<6} {:>20}",
                    e.session_id, e.label, e.agent_id, e.client_id, e.seed
                );
            }
            let _ = writeln!(out, "wrote {} sessions to {}", manifest.sessions.len(), a.out.display());
            emit(&out)
        }
    }
}

fn run_ingest(dir: &Path, cfg: &PipelineConfig) -> Result<Vec<SessionMeta>, CliError> {
    let corpus = ingest_dataset(dir, cfg)?;
    let workspace = Workspace::new(dir);
    let metas = corpus.metas();
    workspace.save_ingest(&metas, &corpus.diagnostics)?;
    for issue in &corpus.diagnostics.issues {
        tracing::warn!(issue = %serde_json::to_string(issue).unwrap_or_default(), "ingest diagnostic");
    }
    Ok(metas)
}

fn ingest(a: CommonArgs) -> Result<(), CliError> {
    dataset_dir(&a.dataset)?;
    let cfg = pipeline_config(a.config.as_deref())?;
    let corpus = ingest_dataset(&a.dataset, &cfg)?;
    let metas = corpus.metas();
    Workspace::new(&a.dataset).save_ingest(&metas, &corpus.diagnostics)?;
    match a.format {
        Format::Structured => print_structured(&corpus.diagnostics),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<12} {:<5} {:>5} {:>10} {:>10} {:>8}",
                "session", "label", "runs", "face", "speech", "low_conf"
            );
            for m in &metas {
                let runs = m.coverage.len().max(1) as f64;
                let face = m.coverage.iter().map(|c| c.face).sum::<f64>() / runs;
                let speech = m.coverage.iter().map(|c| c.speech).sum::<f64>() / runs;
                let _ = writeln!(
                    out,
                    "{:<12} {:<5} {:>5} {:>10.6} {:>10.6} {:>8}",
                    m.session_id,
                    m.label.map(|l| l.as_str()).unwrap_or("-"),
                    m.record.items.len(),
                    face,
                    speech,
                    if m.speaker_low_confidence { "yes" } else { "no" }
                );
            }
            let _ = writeln!(
                out,
                "{} log files, {} sessions, {} issues",
                corpus.diagnostics.log_files,
                corpus.diagnostics.sessions,
                corpus.diagnostics.issues.len()
            );
            for issue in &corpus.diagnostics.issues {
                let _ = writeln!(out, "issue {}", serde_json::to_string(issue).unwrap_or_default());
            }
            emit(&out)
        }
    }
}

fn load_or_ingest(dir: &Path, cfg: &PipelineConfig) -> Result<Vec<SessionMeta>, CliError> {
    let workspace = Workspace::new(dir);
    if workspace.sessions_path().is_file() {
        Ok(workspace.load_sessions()?)
    } else {
        tracing::info!("no ingest output found; ingesting {}", dir.display());
        run_ingest(dir, cfg)
    }
}

#[derive(Debug, Serialize)]
struct FitSummary {
    sessions: usize,
    pca_k: usize,
    q_threshold: f64,
    training_size: usize,
    epsilon: f64,
    window: usize,
    train_transitions: usize,
    service_threshold: f64,
    normal_space: PathBuf,
    transition_model: PathBuf,
    scoring_context: PathBuf,
}

fn fit(a: FitArgs) -> Result<(), CliError> {
    let c = &a.common;
    dataset_dir(&c.dataset)?;
    let cfg = pipeline_config(c.config.as_deref())?;
    let metas = load_or_ingest(&c.dataset, &cfg)?;
    if metas.is_empty() {
        return Err(CliError::Validation(format!("{} holds no services", c.dataset.display())));
    }
    let catalog = dataset_catalog(&c.dataset)?;
    let plan = FitPlan {
        normals: if a.normal_sessions.is_empty() {
            NormalSelector::Labeled
        } else {
            NormalSelector::Sessions(a.normal_sessions.clone())
        },
        sequential_from_guideline: a.guideline,
    };
    let detectors = fit_detectors(&metas, &catalog, &plan, &cfg)?;
    let scoring = fit_scoring(&metas, &cfg);
    let paths = ModelPaths::new(&Workspace::new(&c.dataset), c.models.as_deref());
    save_normal_space(&paths.normal_space, &detectors.normal_space)?;
    save_transition_model(&paths.transitions, &detectors.transitions)?;
    save_scoring_context(&paths.scoring, &scoring)?;
    let ns = &detectors.normal_space;
    let tm = &detectors.transitions;
    let summary = FitSummary {
        sessions: metas.len(),
        pca_k: ns.k,
        q_threshold: ns.q_threshold,
        training_size: ns.training_size,
        epsilon: tm.epsilon,
        window: tm.window,
        train_transitions: tm.train_transitions,
        service_threshold: tm.service_threshold,
        normal_space: paths.normal_space,
        transition_model: paths.transitions,
        scoring_context: paths.scoring,
    };
    match c.format {
        Format::Structured => print_structured(&summary),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "sessions           {}", summary.sessions);
            let _ = writeln!(out, "pca_k              {}", summary.pca_k);
            let _ = writeln!(out, "q_threshold        {:.6}", summary.q_threshold);
            let _ = writeln!(out, "training_size      {}", summary.training_size);
            let _ = writeln!(out, "epsilon            {:.6}", summary.epsilon);
            let _ = writeln!(out, "window             {}", summary.window);
            let _ = writeln!(out, "train_transitions  {}", summary.train_transitions);
            let _ = writeln!(out, "service_threshold  {:.6e}", summary.service_threshold);
            emit(&out)
        }
    }
}

fn summaries(metas: &[SessionMeta], reports: &[anchorscope::pipeline::ServiceReport], d: &Detectors) -> Vec<ServiceSummary> {
    metas
        .iter()
        .filter_map(|m| {
            reports
                .iter()
                .find(|r| r.session_id == m.session_id)
                .map(|r| ServiceSummary::new(m, r, d))
        })
        .collect()
}

fn score(a: CommonArgs) -> Result<(), CliError> {
    dataset_dir(&a.dataset)?;
    let cfg = pipeline_config(a.config.as_deref())?;
    let workspace = Workspace::new(&a.dataset);
    let metas = load_or_ingest(&a.dataset, &cfg)?;
    let paths = ModelPaths::new(&workspace, a.models.as_deref());
    let detectors = paths.load_detectors()?;
    let scoring = load_scoring_context(&paths.scoring)?;
    let reports = score_corpus(&metas, &detectors, &scoring)?;
    workspace.save_reports(&reports)?;
    match a.format {
        Format::Structured => print_structured(&summaries(&metas, &reports, &detectors)),
        Format::Table => {
            emit(&export_table(&reports))
        }
    }
}

fn anchors(a: AnchorsArgs) -> Result<(), CliError> {
    let c = &a.common;
    dataset_dir(&c.dataset)?;
    let reports = Workspace::new(&c.dataset).load_reports()?;
    let mut rows = rank_anchors(&reports);
    if let Some(id) = &a.session {
        if !reports.iter().any(|r| &r.session_id == id) {
            return Err(CliError::Validation(format!("unknown session {id}")));
        }
        rows.retain(|r| &r.session_id == id);
    }
    rows.truncate(a.top);
    match c.format {
        Format::Structured => print_structured(&rows),
        Format::Table => {
            emit(&anchors_table(&rows))
        }
    }
}

fn export(a: ExportArgs) -> Result<(), CliError> {
    let c = &a.common;
    dataset_dir(&c.dataset)?;
    let workspace = Workspace::new(&c.dataset);
    let reports = workspace.load_reports()?;
    let text = match c.format {
        Format::Table => export_table(&reports),
        Format::Structured => {
            let metas = workspace.load_sessions()?;
            let detectors = ModelPaths::new(&workspace, c.models.as_deref()).load_detectors()?;
            let rows = summaries(&metas, &reports, &detectors);
            let mut s = serde_json::to_string_pretty(&rows).map_err(|e| CliError::Validation(e.to_string()))?;
            s.push('\n');
            s
        }
    };
    match &a.out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        None => emit(&text)?,
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), CliError> {
    let mut config = match &a.config {
        Some(p) => ServerConfig::load(p)?,
        None => ServerConfig::default(),
    }
    .with_env();
    if let Some(d) = a.dataset {
        config.dataset_dir = d;
    }
    if let Some(h) = a.host {
        config.host = h;
    }
    if let Some(p) = a.port {
        config.port = p;
    }
    if let Some(s) = a.scoring_config {
        config.scoring_config = Some(s);
    }
    config.guideline |= a.guideline;
    dataset_dir(&config.dataset_dir)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(anchorscope_server::serve(config))?;
    Ok(())
}
