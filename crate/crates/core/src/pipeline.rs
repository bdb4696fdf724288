//! Staged runs driven by a TOML config. Every stage reads its inputs from and
//! writes its outputs to one output directory, so any stage can be rerun on
//! its own.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autoencoder::{
    embed_all, read_loss_trace, train, write_loss_trace, AeError, ModelWeights, TrainConfig,
};
use crate::clustering::{
    label_anomalies, read_assignment, spectral_cluster, write_assignment, ClusterError,
    SpectralConfig, Verdict,
};
use crate::datasets::{load_dataset, parse_window, DatasetError, DatasetManifest};
use crate::encoder::VectorTable;
use crate::graph::{
    build_graph_set, partition, read_graph_set, write_graph_set, ChainRecurrence, WindowGraph,
    WindowSpec, DEFAULT_RADIUS,
};
use crate::metrics::{self, MetricReport};
use crate::parser::{
    read_structured_csv, read_template_table, write_structured_csv, write_template_table,
    DrainConfig, LogTemplate, ParseTree, StructuredLine,
};

pub const TEMPLATES: &str = "templates.tsv";
pub const STRUCTURED: &str = "structured.csv";
pub const VECTORS: &str = "vectors.vec";
pub const GRAPHS: &str = "graphs.jsonl";
pub const WEIGHTS: &str = "weights.bin";
pub const LOSS: &str = "loss.csv";
pub const ASSIGNMENT: &str = "assignment.csv";
pub const DETECT: &str = "detect.json";
pub const REPORT: &str = "report.json";
pub const TIMINGS: &str = "timings.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Parse,
    Encode,
    Graph,
    Train,
    Detect,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Parse,
        Stage::Encode,
        Stage::Graph,
        Stage::Train,
        Stage::Detect,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Encode => "encode",
            Stage::Graph => "graph",
            Stage::Train => "train",
            Stage::Detect => "detect",
            Stage::Report => "report",
        }
    }

    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Parse => &[TEMPLATES, STRUCTURED],
            Stage::Encode => &[VECTORS],
            Stage::Graph => &[GRAPHS],
            Stage::Train => &[WEIGHTS, LOSS],
            Stage::Detect => &[ASSIGNMENT, DETECT],
            Stage::Report => &[REPORT],
        }
    }

    pub fn inputs(self) -> &'static [&'static str] {
        match self {
            Stage::Parse => &[],
            Stage::Encode => &[TEMPLATES],
            Stage::Graph => &[STRUCTURED, VECTORS],
            Stage::Train => &[GRAPHS, VECTORS],
            Stage::Detect => &[GRAPHS, VECTORS, WEIGHTS],
            Stage::Report => &[
                TEMPLATES, STRUCTURED, VECTORS, GRAPHS, WEIGHTS, LOSS, ASSIGNMENT, DETECT,
            ],
        }
    }

    /// The stage that writes `artifact`.
    pub fn producer(artifact: &str) -> Option<Stage> {
        Stage::ALL
            .into_iter()
            .find(|s| s.outputs().contains(&artifact))
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing {}; run `logloom {command}` first", artifact.display())]
    Dependency { artifact: PathBuf, command: Stage },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Data(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl PipelineError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Dependency { .. } => 3,
            PipelineError::Numeric(_) => 4,
            PipelineError::Data(_) | PipelineError::Io { .. } => 1,
        }
    }
}

impl From<AeError> for PipelineError {
    fn from(e: AeError) -> Self {
        match e {
            AeError::Numerical { .. } | AeError::TrainingDiverged { .. } => {
                PipelineError::Numeric(e.to_string())
            }
            _ => PipelineError::Data(e.to_string()),
        }
    }
}

impl From<ClusterError> for PipelineError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::DegenerateEmbedding(_) | ClusterError::EigenFailure { .. } => {
                PipelineError::Numeric(e.to_string())
            }
            ClusterError::Config(_) => PipelineError::Config(e.to_string()),
            _ => PipelineError::Data(e.to_string()),
        }
    }
}

impl From<DatasetError> for PipelineError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Label { .. } => PipelineError::Data(e.to_string()),
            _ => PipelineError::Config(e.to_string()),
        }
    }
}

fn data_err<E: fmt::Display>(path: &Path) -> impl FnOnce(E) -> PipelineError + '_ {
    move |e| PipelineError::Data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    #[default]
    Builtin,
    Import,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub kind: EncoderKind,
    pub dim: usize,
    /// Vector file to import; relative to the config file.
    pub vectors: Option<PathBuf>,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            kind: EncoderKind::Builtin,
            dim: 64,
            vectors: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub radius: usize,
    /// `count:N` or `session:REGEX`; overrides the manifest window.
    pub window: Option<String>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
            window: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// Minkowski order of the Davies-Bouldin index.
    pub q: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { q: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectConfig {
    /// Above this many nodes, whole windows are sampled (seeded) until the
    /// cap is reached.
    pub max_rows: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self { max_rows: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset manifest; relative to the config file.
    pub manifest: PathBuf,
    /// Output directory; relative to the config file.
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Overrides the train and cluster seeds and drives window sampling.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub parser: DrainConfig,
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub cluster: SpectralConfig,
    #[serde(default)]
    pub metrics: MetricConfig,
    #[serde(default)]
    pub detect: DetectConfig,
    #[serde(skip)]
    base: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, &base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self, PipelineError> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base = base.to_path_buf();
        if let Some(seed) = cfg.seed {
            cfg.set_seed(seed);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        self.train.seed = seed;
        self.cluster.seed = seed;
    }

    /// `dir` is taken as given, not relative to the config file.
    pub fn set_out(&mut self, dir: &Path) {
        self.out = std::path::absolute(dir).unwrap_or_else(|_| dir.to_path_buf());
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = PipelineError::Config;
        self.parser
            .validate()
            .map_err(|e| bad(format!("parser: {e}")))?;
        self.train
            .validate()
            .map_err(|e| bad(format!("train: {e}")))?;
        self.cluster
            .validate()
            .map_err(|e| bad(format!("cluster: {e}")))?;
        match (self.encoder.kind, &self.encoder.vectors) {
            (EncoderKind::Import, None) => {
                return Err(bad("encoder: kind = \"import\" needs `vectors`".into()))
            }
            (EncoderKind::Builtin, _) if self.encoder.dim < crate::encoder::MIN_BUILTIN_DIM => {
                return Err(bad(format!(
                    "encoder: dim must be >= {}, got {}",
                    crate::encoder::MIN_BUILTIN_DIM,
                    self.encoder.dim
                )))
            }
            _ => {}
        }
        if self.graph.radius < 1 {
            return Err(bad("graph: radius must be >= 1".into()));
        }
        if let Some(w) = &self.graph.window {
            parse_window(w).map_err(|e| bad(format!("graph: {e}")))?;
        }
        if !(self.metrics.q >= 1.0 && self.metrics.q.is_finite()) {
            return Err(bad(format!(
                "metrics: q must be >= 1, got {}",
                self.metrics.q
            )));
        }
        if self.detect.max_rows < self.cluster.k {
            return Err(bad("detect: max_rows must be at least cluster.k".into()));
        }
        Ok(())
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        self.base.join(p)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.resolve(&self.manifest)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out)
    }

    /// Seed for window sampling in the detect stage.
    pub fn sample_seed(&self) -> u64 {
        self.seed.unwrap_or(self.cluster.seed)
    }
}

/// Side results of the detect stage needed by the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectSummary {
    pub rows: usize,
    /// Windows clustered, when fewer than all were sampled.
    pub sampled_windows: Option<usize>,
    pub sigma: f64,
    pub eigenvalues: Vec<f64>,
    pub cluster_sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counts {
    pub lines: usize,
    pub templates: usize,
    pub windows: usize,
    pub nodes: usize,
    pub edges: usize,
    pub clustered: usize,
    pub labelled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossSummary {
    pub epochs: usize,
    pub first: f64,
    pub last: f64,
    pub min: f64,
    /// `(first - last) / first`.
    pub relative_decrease: f64,
}

impl LossSummary {
    pub fn of(trace: &[f64]) -> Option<Self> {
        let first = *trace.first()?;
        let last = *trace.last()?;
        Some(Self {
            epochs: trace.len(),
            first,
            last,
            min: trace.iter().copied().fold(f64::INFINITY, f64::min),
            relative_decrease: (first - last) / first,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub dataset: String,
    pub counts: Counts,
    pub loss: LossSummary,
    pub cluster_sizes: Vec<usize>,
    pub abnormal_lines: usize,
    pub abnormal_fraction: f64,
    pub sigma: f64,
    pub eigenvalues: Vec<f64>,
    pub metrics: MetricReport,
    pub config: RunConfig,
    /// Seconds per stage from the latest run of each.
    pub wall_times: BTreeMap<String, f64>,
}

/// One configured run over one output directory.
#[derive(Debug, Clone)]
pub struct Pipeline {
    cfg: RunConfig,
    out: PathBuf,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Self {
        let out = cfg.out_dir();
        Self { cfg, out }
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn out_dir(&self) -> &Path {
        &self.out
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn require(&self, stage: Stage) -> Result<(), PipelineError> {
        for name in stage.inputs() {
            let path = self.artifact(name);
            if !path.is_file() {
                return Err(PipelineError::Dependency {
                    artifact: path,
                    command: Stage::producer(name).expect("every input has a producer"),
                });
            }
        }
        Ok(())
    }

    /// Run one stage and return a one-line summary.
    pub fn run_stage(&self, stage: Stage) -> Result<String, PipelineError> {
        self.require(stage)?;
        fs::create_dir_all(&self.out).map_err(|source| PipelineError::Io {
            path: self.out.clone(),
            source,
        })?;
        let t0 = Instant::now();
        let summary = match stage {
            Stage::Parse => self.parse()?,
            Stage::Encode => self.encode()?,
            Stage::Graph => self.graph()?,
            Stage::Train => self.train()?,
            Stage::Detect => self.detect()?,
            Stage::Report => self.report(t0)?,
        };
        if stage != Stage::Report {
            self.record_time(stage, t0.elapsed().as_secs_f64())?;
        }
        Ok(summary)
    }

    /// Run stages in order. Without `all`, a stage is skipped while its
    /// outputs exist and nothing before it was rerun.
    pub fn run(&self, all: bool) -> Result<Vec<String>, PipelineError> {
        let mut dirty = all;
        let mut done = Vec::new();
        for stage in Stage::ALL {
            let missing = stage.outputs().iter().any(|o| !self.artifact(o).is_file());
            if dirty || missing {
                done.push(format!("{stage}: {}", self.run_stage(stage)?));
                dirty = true;
            } else {
                done.push(format!("{stage}: up to date"));
            }
        }
        Ok(done)
    }

    fn create(&self, name: &str) -> Result<BufWriter<fs::File>, PipelineError> {
        let path = self.artifact(name);
        fs::File::create(&path)
            .map(BufWriter::new)
            .map_err(|source| PipelineError::Io { path, source })
    }

    fn write_with<F>(&self, name: &str, f: F) -> Result<(), PipelineError>
    where
        F: FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
    {
        let mut w = self.create(name)?;
        f(&mut w)
            .and_then(|_| w.flush())
            .map_err(|source| PipelineError::Io {
                path: self.artifact(name),
                source,
            })
    }

    fn open(&self, name: &str) -> Result<BufReader<fs::File>, PipelineError> {
        let path = self.artifact(name);
        fs::File::open(&path)
            .map(BufReader::new)
            .map_err(|source| PipelineError::Io { path, source })
    }

    fn read_string(&self, name: &str) -> Result<String, PipelineError> {
        let path = self.artifact(name);
        fs::read_to_string(&path).map_err(|source| PipelineError::Io { path, source })
    }

    fn record_time(&self, stage: Stage, secs: f64) -> Result<(), PipelineError> {
        let mut times = self.timings();
        times.insert(stage.name().to_string(), secs);
        let json = serde_json::to_string_pretty(&times).expect("map of floats");
        self.write_with(TIMINGS, |w| writeln!(w, "{json}"))
    }

    fn timings(&self) -> BTreeMap<String, f64> {
        self.read_string(TIMINGS)
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default()
    }

    fn manifest(&self) -> Result<DatasetManifest, PipelineError> {
        Ok(DatasetManifest::load(&self.cfg.manifest_path())?)
    }

    fn window(&self, manifest: &DatasetManifest) -> Result<WindowSpec, PipelineError> {
        match &self.cfg.graph.window {
            Some(w) => parse_window(w).map_err(PipelineError::Config),
            None => Ok(manifest.window.clone()),
        }
    }

    fn templates(&self) -> Result<Vec<LogTemplate>, PipelineError> {
        read_template_table(self.open(TEMPLATES)?).map_err(data_err(&self.artifact(TEMPLATES)))
    }

    fn structured(&self) -> Result<Vec<StructuredLine>, PipelineError> {
        read_structured_csv(self.open(STRUCTURED)?).map_err(data_err(&self.artifact(STRUCTURED)))
    }

    fn vectors(&self) -> Result<VectorTable, PipelineError> {
        VectorTable::import(self.open(VECTORS)?).map_err(data_err(&self.artifact(VECTORS)))
    }

    fn graphs(&self, vectors: &VectorTable) -> Result<Vec<WindowGraph>, PipelineError> {
        read_graph_set(self.open(GRAPHS)?, vectors).map_err(data_err(&self.artifact(GRAPHS)))
    }

    fn weights(&self, dim: usize) -> Result<ModelWeights, PipelineError> {
        let w = ModelWeights::read(&mut self.open(WEIGHTS)?)?;
        if w.dim() != dim {
            return Err(PipelineError::Data(format!(
                "{WEIGHTS} expects {} input features, vectors have {dim}; rerun train",
                w.dim()
            )));
        }
        Ok(w)
    }

    fn parse(&self) -> Result<String, PipelineError> {
        let manifest = self.manifest()?;
        let data = load_dataset(&manifest)?;
        let mut tree = ParseTree::new(self.cfg.parser);
        let lines: Vec<StructuredLine> = data
            .records
            .iter()
            .enumerate()
            .map(|(i, r)| StructuredLine {
                line_no: r.line_no,
                template_id: tree.parse(r),
                label: data.labels.as_ref().map(|l| l[i]),
            })
            .collect();
        self.write_with(TEMPLATES, |w| write_template_table(w, tree.templates()))?;
        self.write_with(STRUCTURED, |w| write_structured_csv(w, &lines))?;
        Ok(format!(
            "{} lines ({} malformed), {} templates",
            lines.len(),
            data.malformed,
            tree.templates().len()
        ))
    }

    fn encode(&self) -> Result<String, PipelineError> {
        let templates = self.templates()?;
        let table = match self.cfg.encoder.kind {
            EncoderKind::Builtin => VectorTable::builtin(&templates, self.cfg.encoder.dim)
                .map_err(|e| PipelineError::Config(e.to_string()))?,
            EncoderKind::Import => {
                let path = self
                    .cfg
                    .resolve(self.cfg.encoder.vectors.as_ref().expect("validated"));
                let file = fs::File::open(&path)
                    .map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
                let table = VectorTable::import(BufReader::new(file)).map_err(data_err(&path))?;
                table
                    .check_coverage(templates.iter().map(|t| t.template_id))
                    .map_err(data_err(&path))?;
                table
            }
        };
        self.write_with(VECTORS, |w| table.write(w))?;
        Ok(format!(
            "{} vectors of dimension {}",
            table.len(),
            table.dim()
        ))
    }

    fn graph(&self) -> Result<String, PipelineError> {
        let lines = self.structured()?;
        let vectors = self.vectors()?;
        let manifest = self.manifest()?;
        let window = self.window(&manifest)?;
        let keys = match &window {
            WindowSpec::Count(_) => None,
            WindowSpec::Session(ex) => {
                let data = load_dataset(&manifest)?;
                let by_line: HashMap<usize, Option<String>> = data
                    .records
                    .iter()
                    .map(|r| (r.line_no, ex.extract(&r.content)))
                    .collect();
                Some(
                    lines
                        .iter()
                        .map(|l| by_line.get(&l.line_no).cloned().flatten())
                        .collect::<Vec<_>>(),
                )
            }
        };
        let part = partition(&lines, &window, keys.as_deref())
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        let strategy = ChainRecurrence {
            radius: self.cfg.graph.radius,
        };
        let graphs = build_graph_set(&part, &vectors, &strategy)
            .map_err(|e| PipelineError::Data(e.to_string()))?;
        if graphs.is_empty() {
            return Err(PipelineError::Data(
                "no window holds two or more lines".into(),
            ));
        }
        self.write_with(GRAPHS, |w| write_graph_set(w, &graphs, vectors.dim()))?;
        Ok(format!(
            "{} windows, {} lines dropped, {} unkeyed",
            graphs.len(),
            part.dropped,
            part.unkeyed
        ))
    }

    fn train(&self) -> Result<String, PipelineError> {
        let vectors = self.vectors()?;
        let graphs = self.graphs(&vectors)?;
        let outcome = train(&graphs, &self.cfg.train)?;
        self.write_with(WEIGHTS, |w| outcome.weights.write(w))?;
        self.write_with(LOSS, |w| write_loss_trace(w, &outcome.loss_trace))?;
        let s = LossSummary::of(&outcome.loss_trace).expect("at least one epoch");
        Ok(format!(
            "{} epochs, loss {:.5} -> {:.5}",
            s.epochs, s.first, s.last
        ))
    }

    /// Whole windows to cluster, in graph order.
    fn select_windows<'a>(&self, graphs: &'a [WindowGraph]) -> (Vec<&'a WindowGraph>, bool) {
        let total: usize = graphs.iter().map(WindowGraph::len).sum();
        if total <= self.cfg.detect.max_rows {
            return (graphs.iter().collect(), false);
        }
        let mut order: Vec<usize> = (0..graphs.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(self.cfg.sample_seed()));
        let mut taken = Vec::new();
        let mut rows = 0;
        for i in order {
            if rows + graphs[i].len() <= self.cfg.detect.max_rows {
                rows += graphs[i].len();
                taken.push(i);
            }
        }
        taken.sort_unstable();
        (taken.into_iter().map(|i| &graphs[i]).collect(), true)
    }

    fn detect(&self) -> Result<String, PipelineError> {
        let vectors = self.vectors()?;
        let graphs = self.graphs(&vectors)?;
        let weights = self.weights(vectors.dim())?;
        let (chosen, sampled) = self.select_windows(&graphs);
        let chosen: Vec<WindowGraph> = chosen.into_iter().cloned().collect();
        let emb = embed_all(&chosen, &weights)?;
        let run = spectral_cluster(&emb.rows, emb.provenance, &self.cfg.cluster)?;
        let verdicts = label_anomalies(&run.assignment);
        self.write_with(ASSIGNMENT, |w| {
            write_assignment(w, &run.assignment, &verdicts)
        })?;
        let summary = DetectSummary {
            rows: verdicts.len(),
            sampled_windows: sampled.then_some(chosen.len()),
            sigma: run.sigma,
            eigenvalues: run.eigenvalues,
            cluster_sizes: run.assignment.sizes(),
        };
        let json = serde_json::to_string_pretty(&summary).expect("plain data");
        self.write_with(DETECT, |w| writeln!(w, "{json}"))?;
        let abnormal = verdicts.iter().filter(|v| **v == Verdict::Abnormal).count();
        Ok(format!(
            "{} rows, cluster sizes {:?}, {} abnormal",
            summary.rows, summary.cluster_sizes, abnormal
        ))
    }

    fn report(&self, t0: Instant) -> Result<String, PipelineError> {
        let templates = self.templates()?;
        let lines = self.structured()?;
        let vectors = self.vectors()?;
        let graphs = self.graphs(&vectors)?;
        let weights = self.weights(vectors.dim())?;
        let trace = read_loss_trace(self.open(LOSS)?)?;
        let loss = LossSummary::of(&trace)
            .ok_or_else(|| PipelineError::Data(format!("{LOSS} is empty")))?;
        let rows = read_assignment(&self.read_string(ASSIGNMENT)?)
            .map_err(data_err(&self.artifact(ASSIGNMENT)))?;
        let detect: DetectSummary = serde_json::from_str(&self.read_string(DETECT)?)
            .map_err(data_err(&self.artifact(DETECT)))?;
        if rows.len() != detect.rows {
            return Err(PipelineError::Data(format!(
                "{ASSIGNMENT} has {} rows, {DETECT} says {}; rerun detect",
                rows.len(),
                detect.rows
            )));
        }

        let emb = embed_all(&graphs, &weights)?;
        let row_of: HashMap<usize, usize> = emb
            .provenance
            .iter()
            .enumerate()
            .map(|(i, p)| (p.line_no, i))
            .collect();
        let truth_of: HashMap<usize, Option<u8>> =
            lines.iter().map(|l| (l.line_no, l.label)).collect();
        let dim = emb.rows.ncols();
        let mut points = Array2::zeros((rows.len(), dim));
        let mut labels = Vec::with_capacity(rows.len());
        let mut verdicts = Vec::with_capacity(rows.len());
        let mut truth = Vec::with_capacity(rows.len());
        for (k, &(line_no, cluster, verdict)) in rows.iter().enumerate() {
            let i = *row_of.get(&line_no).ok_or_else(|| {
                PipelineError::Data(format!(
                    "{ASSIGNMENT} names line {line_no}, which no graph holds; rerun detect"
                ))
            })?;
            points.row_mut(k).assign(&emb.rows.row(i));
            labels.push(cluster);
            verdicts.push(verdict);
            truth.push(truth_of.get(&line_no).copied().flatten());
        }
        let k = detect.cluster_sizes.len();
        let metrics = metrics::report(&points, &labels, k, self.cfg.metrics.q, &verdicts, &truth)
            .map_err(|e| PipelineError::Numeric(e.to_string()))?;
        let abnormal_lines = verdicts.iter().filter(|v| **v == Verdict::Abnormal).count();

        let mut wall_times = self.timings();
        wall_times.insert(Stage::Report.name().into(), t0.elapsed().as_secs_f64());
        let report = RunReport {
            dataset: self.manifest()?.name,
            counts: Counts {
                lines: lines.len(),
                templates: templates.len(),
                windows: graphs.len(),
                nodes: emb.rows.nrows(),
                edges: graphs.iter().map(WindowGraph::edge_count).sum(),
                clustered: rows.len(),
                labelled: truth.iter().filter(|t| t.is_some()).count(),
            },
            loss,
            cluster_sizes: detect.cluster_sizes,
            abnormal_lines,
            abnormal_fraction: abnormal_lines as f64 / rows.len() as f64,
            sigma: detect.sigma,
            eigenvalues: detect.eigenvalues,
            metrics,
            config: self.cfg.clone(),
            wall_times,
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        self.write_with(REPORT, |w| writeln!(w, "{json}"))?;
        self.record_time(Stage::Report, t0.elapsed().as_secs_f64())?;
        Ok(match report.metrics.accuracy {
            Some(a) => format!(
                "{abnormal_lines} abnormal of {} ({:.2}%), accuracy {a:.4}",
                rows.len(),
                100.0 * report.abnormal_fraction
            ),
            None => format!(
                "{abnormal_lines} abnormal of {} ({:.2}%), no labels",
                rows.len(),
                100.0 * report.abnormal_fraction
            ),
        })
    }
}
