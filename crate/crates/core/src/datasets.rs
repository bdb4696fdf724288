//! Dataset manifests, raw-log ingestion with optional labels, and a seeded
//! synthetic corpus with planted anomaly bursts.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{SessionExtractor, WindowSpec, DEFAULT_COUNT};
use crate::parser::{split_header, HeaderFormat, ParseError, RawLogRecord};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("label error at line {line_no}: {reason}")]
    Label { line_no: usize, reason: String },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Where per-line labels come from.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelSource {
    None,
    /// CSV of `line_no,label`.
    PerLine(PathBuf),
    /// CSV of `session_key,label`; lines inherit the label of their session.
    PerSession(PathBuf),
}

/// Parameters of the synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_templates_normal: usize,
    pub n_templates_anomalous: usize,
    pub total_lines: usize,
    pub anomaly_rate: f64,
    pub min_burst: usize,
    pub max_burst: usize,
    /// Words every skeleton of a class carries (normal and anomalous draw
    /// from separate fixed lists), so templates resemble their own class.
    pub shared_words: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_templates_normal: 12,
            n_templates_anomalous: 4,
            total_lines: 5000,
            anomaly_rate: 0.03,
            min_burst: 4,
            max_burst: 10,
            shared_words: 3,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.anomaly_rate > 0.0 && self.anomaly_rate < 0.5) {
            return Err(format!(
                "anomaly_rate must lie in (0, 0.5), got {}",
                self.anomaly_rate
            ));
        }
        if self.n_templates_normal < 2 || self.n_templates_anomalous < 1 {
            return Err("need at least 2 normal and 1 anomalous template".into());
        }
        if self.n_templates_normal > NORMAL_HEADS.len()
            || self.n_templates_anomalous > ANOMALY_HEADS.len()
        {
            return Err(format!(
                "at most {} normal and {} anomalous templates are available",
                NORMAL_HEADS.len(),
                ANOMALY_HEADS.len()
            ));
        }
        if self.min_burst < 1 || self.min_burst > self.max_burst {
            return Err("burst lengths must satisfy 1 <= min_burst <= max_burst".into());
        }
        if self.shared_words > SHARED_WORDS.len() {
            return Err(format!(
                "at most {} shared words are available",
                SHARED_WORDS.len()
            ));
        }
        if self.anomaly_count() < self.min_burst {
            return Err("too few anomaly lines for a single burst".into());
        }
        Ok(())
    }

    /// `round(total_lines * anomaly_rate)`, halves rounded away from zero.
    pub fn anomaly_count(&self) -> usize {
        (self.total_lines as f64 * self.anomaly_rate).round() as usize
    }
}

#[derive(Debug, Clone)]
pub enum DatasetSource {
    Raw(PathBuf),
    Synthetic(SyntheticSpec),
}

/// A dataset description read from a flat `key = value` file.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub name: String,
    pub source: DatasetSource,
    pub format: HeaderFormat,
    pub window: WindowSpec,
    pub labels: LabelSource,
    pub seed: u64,
}

/// Header layout of generated lines.
pub const SYNTHETIC_FORMAT: &str = "<Date> <Time> <Level> <Component>: <Content>";

impl DatasetManifest {
    pub fn synthetic(spec: SyntheticSpec) -> Self {
        Self {
            name: "synthetic".into(),
            seed: spec.seed,
            source: DatasetSource::Synthetic(spec),
            format: HeaderFormat::new(SYNTHETIC_FORMAT).expect("static format"),
            window: WindowSpec::Count(DEFAULT_COUNT),
            labels: LabelSource::None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, DatasetError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    /// Parse manifest text; relative paths resolve against `base`.
    ///
    /// Keys: `name`, `source` (`raw` | `synthetic`), `raw_path`, `log_format`,
    /// `window` (`count:N` | `session:REGEX`), `labels` (`none` |
    /// `line:PATH` | `session:PATH`), `seed`, and `synthetic.*` overrides.
    pub fn parse(text: &str, base: &Path) -> Result<Self, DatasetError> {
        let bad = |m: String| DatasetError::Manifest(m);
        let mut kv = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", i + 1)))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |kv: &mut BTreeMap<String, String>, k: &str| kv.remove(k);
        let seed: u64 = match take(&mut kv, "seed") {
            Some(s) => s.parse().map_err(|_| bad(format!("bad seed `{s}`")))?,
            None => 0,
        };
        let source = take(&mut kv, "source").unwrap_or_else(|| "raw".into());
        let source = match source.as_str() {
            "raw" => {
                let p =
                    take(&mut kv, "raw_path").ok_or_else(|| bad("raw_path is required".into()))?;
                DatasetSource::Raw(base.join(p))
            }
            "synthetic" => {
                let mut spec = SyntheticSpec {
                    seed,
                    ..SyntheticSpec::default()
                };
                let num = |kv: &mut BTreeMap<String, String>,
                           k: &str|
                 -> Result<Option<f64>, DatasetError> {
                    match kv.remove(k) {
                        Some(v) => v.parse::<f64>().map(Some).map_err(|_| {
                            DatasetError::Manifest(format!("bad number for {k}: `{v}`"))
                        }),
                        None => Ok(None),
                    }
                };
                if let Some(v) = num(&mut kv, "synthetic.total_lines")? {
                    spec.total_lines = v as usize;
                }
                if let Some(v) = num(&mut kv, "synthetic.anomaly_rate")? {
                    spec.anomaly_rate = v;
                }
                if let Some(v) = num(&mut kv, "synthetic.normal_templates")? {
                    spec.n_templates_normal = v as usize;
                }
                if let Some(v) = num(&mut kv, "synthetic.anomalous_templates")? {
                    spec.n_templates_anomalous = v as usize;
                }
                if let Some(v) = num(&mut kv, "synthetic.shared_words")? {
                    spec.shared_words = v as usize;
                }
                if let Some(v) = num(&mut kv, "synthetic.min_burst")? {
                    spec.min_burst = v as usize;
                }
                if let Some(v) = num(&mut kv, "synthetic.max_burst")? {
                    spec.max_burst = v as usize;
                }
                spec.validate().map_err(bad)?;
                DatasetSource::Synthetic(spec)
            }
            other => return Err(bad(format!("unknown source `{other}`"))),
        };
        let default_format = match source {
            DatasetSource::Synthetic(_) => SYNTHETIC_FORMAT,
            DatasetSource::Raw(_) => "<Content>",
        };
        let format = HeaderFormat::new(
            &take(&mut kv, "log_format").unwrap_or_else(|| default_format.into()),
        )?;
        let window = match take(&mut kv, "window") {
            None => WindowSpec::Count(DEFAULT_COUNT),
            Some(w) => parse_window(&w).map_err(bad)?,
        };
        window.validate().map_err(|e| bad(e.to_string()))?;
        let labels = match take(&mut kv, "labels").as_deref() {
            None | Some("none") => LabelSource::None,
            Some(l) => match l.split_once(':') {
                Some(("line", p)) => LabelSource::PerLine(base.join(p.trim())),
                Some(("session", p)) => LabelSource::PerSession(base.join(p.trim())),
                _ => return Err(bad(format!("bad labels `{l}`"))),
            },
        };
        let name = take(&mut kv, "name").unwrap_or_else(|| "dataset".into());
        if let Some(k) = kv.keys().next() {
            return Err(bad(format!("unknown key `{k}`")));
        }
        Ok(Self {
            name,
            source,
            format,
            window,
            labels,
            seed,
        })
    }
}

/// Parse `count:N` or `session:REGEX`.
pub fn parse_window(w: &str) -> Result<WindowSpec, String> {
    match w.split_once(':') {
        Some(("count", n)) => n
            .trim()
            .parse()
            .map(WindowSpec::Count)
            .map_err(|_| format!("bad window count `{n}`")),
        Some(("session", re)) => SessionExtractor::new(re.trim())
            .map(WindowSpec::Session)
            .map_err(|e| e.to_string()),
        _ => Err(format!(
            "bad window `{w}` (expected count:N or session:REGEX)"
        )),
    }
}

/// Records of one dataset, with labels aligned index-for-index when present.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub records: Vec<RawLogRecord>,
    pub labels: Option<Vec<u8>>,
    pub malformed: usize,
    pub consumed: usize,
}

/// Raw lines and their 0/1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub lines: Vec<String>,
    pub labels: Vec<u8>,
    /// Skeletons in the order normal then anomalous; `#` marks a numeric slot.
    pub skeletons: Vec<String>,
}

pub fn load_dataset(manifest: &DatasetManifest) -> Result<Dataset, DatasetError> {
    let (lines, mut line_labels): (Vec<String>, Option<BTreeMap<usize, u8>>) =
        match &manifest.source {
            DatasetSource::Raw(path) => {
                let file = fs::File::open(path).map_err(io_err(path))?;
                let lines = BufReader::new(file)
                    .lines()
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(io_err(path))?;
                (lines, None)
            }
            DatasetSource::Synthetic(spec) => {
                let corpus = generate_synthetic(spec);
                let labels = corpus.labels.iter().copied().enumerate().collect();
                (corpus.lines, Some(labels))
            }
        };
    let mut records = Vec::with_capacity(lines.len());
    let mut malformed = 0;
    for (line_no, line) in lines.iter().enumerate() {
        match split_header(line_no, line, &manifest.format) {
            Ok(r) => records.push(r),
            Err(_) => malformed += 1,
        }
    }
    let labels = match &manifest.labels {
        LabelSource::None => line_labels
            .take()
            .map(|m| align_line_labels(&records, &m))
            .transpose()?,
        LabelSource::PerLine(path) => {
            let map = read_label_csv(path)?
                .into_iter()
                .map(|(k, v)| {
                    k.parse::<usize>()
                        .map(|n| (n, v))
                        .map_err(|_| DatasetError::Label {
                            line_no: 0,
                            reason: format!("`{k}` is not a line number"),
                        })
                })
                .collect::<Result<BTreeMap<_, _>, _>>()?;
            Some(align_line_labels(&records, &map)?)
        }
        LabelSource::PerSession(path) => {
            let map: HashMap<String, u8> = read_label_csv(path)?.into_iter().collect();
            let extractor = match &manifest.window {
                WindowSpec::Session(ex) => ex.clone(),
                WindowSpec::Count(_) => SessionExtractor::hdfs_block(),
            };
            let mut out = Vec::with_capacity(records.len());
            for r in &records {
                let label = extractor
                    .extract(&r.content)
                    .and_then(|k| map.get(&k).copied())
                    .ok_or_else(|| DatasetError::Label {
                        line_no: r.line_no,
                        reason: "no session label for this line".into(),
                    })?;
                out.push(label);
            }
            Some(out)
        }
    };
    Ok(Dataset {
        records,
        labels,
        malformed,
        consumed: lines.len(),
    })
}

fn align_line_labels(
    records: &[RawLogRecord],
    map: &BTreeMap<usize, u8>,
) -> Result<Vec<u8>, DatasetError> {
    records
        .iter()
        .map(|r| {
            map.get(&r.line_no)
                .copied()
                .ok_or_else(|| DatasetError::Label {
                    line_no: r.line_no,
                    reason: "line has no label".into(),
                })
        })
        .collect()
}

fn parse_label(v: &str) -> Option<u8> {
    match v.trim().to_ascii_lowercase().as_str() {
        "0" | "normal" | "-" => Some(0),
        "1" | "anomaly" | "abnormal" => Some(1),
        _ => None,
    }
}

/// Read `key,label` rows; a header row is skipped when its label column is
/// not a recognised label.
pub fn read_label_csv(path: &Path) -> Result<Vec<(String, u8)>, DatasetError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once(',').ok_or_else(|| DatasetError::Label {
            line_no: i,
            reason: format!("expected key,label in `{line}`"),
        })?;
        match parse_label(v) {
            Some(l) => out.push((k.trim().to_string(), l)),
            None if i == 0 => continue,
            None => {
                return Err(DatasetError::Label {
                    line_no: i,
                    reason: format!("unrecognised label `{v}`"),
                })
            }
        }
    }
    Ok(out)
}

// Leading words are unique per skeleton, so every skeleton lands in its own
// prefix-tree branch. Normal and anomalous vocabularies are disjoint.
const NORMAL_HEADS: &[&str] = &[
    "Receiving",
    "Served",
    "Verification",
    "Deleting",
    "PacketResponder",
    "Starting",
    "Allocated",
    "Transmitted",
    "Registered",
    "Completed",
    "Scheduled",
    "Committed",
    "Flushed",
    "Opened",
    "Closed",
    "Heartbeat",
];
const SHARED_WORDS: &[&str] = &["block", "datanode", "replica", "stream", "size"];
const SHARED_ANOMALY_WORDS: &[&str] = &["error", "failed", "exception", "fault", "critical"];
const NORMAL_WORDS: &[&str] = &[
    "from",
    "to",
    "node",
    "request",
    "for",
    "with",
    "succeeded",
    "file",
    "volume",
    "storage",
    "session",
    "task",
    "offset",
    "bytes",
    "peer",
];
const ANOMALY_HEADS: &[&str] = &[
    "Exception",
    "Interrupted",
    "Corrupted",
    "Timeout",
    "Panic",
    "Unreachable",
    "Refused",
    "Overflow",
];
const ANOMALY_WORDS: &[&str] = &[
    "fatal",
    "broken",
    "pipe",
    "lost",
    "checksum",
    "mismatch",
    "aborting",
    "unexpected",
    "kernel",
    "denied",
    "stalled",
    "retry",
];

fn make_skeleton(head: &str, words: &[&str], shared: &[&str], rng: &mut ChaCha8Rng) -> String {
    let n_words = rng.random_range(3..=5);
    let n_slots = rng.random_range(1..=2);
    let mut body: Vec<String> = words
        .choose_multiple(rng, n_words)
        .map(|w| w.to_string())
        .collect();
    for _ in 0..n_slots {
        let at = rng.random_range(1..=body.len());
        body.insert(at, "#".into());
    }
    body.extend(shared.iter().map(|w| w.to_string()));
    format!("{head} {}", body.join(" "))
}

fn fill(skeleton: &str, rng: &mut ChaCha8Rng) -> String {
    skeleton
        .split(' ')
        .map(|t| {
            if t == "#" {
                rng.random_range(0..100_000u32).to_string()
            } else {
                t.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Generate a corpus: normal lines follow a sparse Markov chain over the
/// normal skeletons, anomalies arrive as contiguous bursts of anomalous
/// skeletons. Deterministic in `spec.seed`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal: Vec<String> = NORMAL_HEADS[..spec.n_templates_normal]
        .iter()
        .map(|h| {
            make_skeleton(
                h,
                NORMAL_WORDS,
                &SHARED_WORDS[..spec.shared_words],
                &mut rng,
            )
        })
        .collect();
    let anomalous: Vec<String> = ANOMALY_HEADS[..spec.n_templates_anomalous]
        .iter()
        .map(|h| {
            make_skeleton(
                h,
                ANOMALY_WORDS,
                &SHARED_ANOMALY_WORDS[..spec.shared_words],
                &mut rng,
            )
        })
        .collect();

    // each normal state prefers two successors
    let k = normal.len();
    let successors: Vec<[usize; 2]> = (0..k)
        .map(|i| [(i + 1) % k, rng.random_range(0..k)])
        .collect();

    // burst lengths summing exactly to the anomaly count
    let total_anomalies = spec.anomaly_count().min(spec.total_lines);
    let mut bursts = Vec::new();
    let mut left = total_anomalies;
    while left > 0 {
        let mut len = rng.random_range(spec.min_burst..=spec.max_burst).min(left);
        if left - len > 0 && left - len < spec.min_burst {
            len = left;
        }
        bursts.push(len);
        left -= len;
    }
    // spread burst starts over the normal stream
    let normal_total = spec.total_lines - total_anomalies;
    let mut starts: Vec<usize> = (0..bursts.len())
        .map(|_| rng.random_range(0..=normal_total))
        .collect();
    starts.sort_unstable();

    let mut lines = Vec::with_capacity(spec.total_lines);
    let mut labels = Vec::with_capacity(spec.total_lines);
    let mut state = 0usize;
    let mut next_burst = 0;
    let emit = |content: String, label: u8, lines: &mut Vec<String>, labels: &mut Vec<u8>| {
        let i = lines.len();
        let level = if label == 1 { "WARN" } else { "INFO" };
        lines.push(format!(
            "081109 {:06} {level} svc.Worker: {content}",
            i % 1_000_000
        ));
        labels.push(label);
    };
    for produced in 0..=normal_total {
        while next_burst < bursts.len() && starts[next_burst] == produced {
            let mut a = rng.random_range(0..anomalous.len());
            for _ in 0..bursts[next_burst] {
                let content = fill(&anomalous[a], &mut rng);
                emit(content, 1, &mut lines, &mut labels);
                a = if rng.random_bool(0.6) {
                    a
                } else {
                    rng.random_range(0..anomalous.len())
                };
            }
            next_burst += 1;
        }
        if produced == normal_total {
            break;
        }
        let content = fill(&normal[state], &mut rng);
        emit(content, 0, &mut lines, &mut labels);
        state = if rng.random_bool(0.9) {
            successors[state][rng.random_range(0..2)]
        } else {
            rng.random_range(0..k)
        };
    }
    let mut skeletons = normal;
    skeletons.extend(anomalous);
    SyntheticCorpus {
        lines,
        labels,
        skeletons,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn anomaly_count_is_exact() {
        let spec = SyntheticSpec {
            total_lines: 1000,
            ..SyntheticSpec::default()
        };
        let c = generate_synthetic(&spec);
        assert_eq!(c.lines.len(), 1000);
        assert_eq!(c.labels.iter().filter(|&&l| l == 1).count(), 30);
    }

    #[test]
    fn same_seed_same_corpus() {
        let spec = SyntheticSpec::default();
        assert_eq!(generate_synthetic(&spec), generate_synthetic(&spec));
        let other = SyntheticSpec {
            seed: 8,
            ..spec.clone()
        };
        assert_ne!(
            generate_synthetic(&spec).lines,
            generate_synthetic(&other).lines
        );
    }

    #[test]
    fn anomalies_come_in_bursts() {
        let c = generate_synthetic(&SyntheticSpec::default());
        let mut runs = Vec::new();
        let mut cur = 0;
        for &l in &c.labels {
            if l == 1 {
                cur += 1;
            } else if cur > 0 {
                runs.push(cur);
                cur = 0;
            }
        }
        if cur > 0 {
            runs.push(cur);
        }
        // adjacent bursts may touch, so only the lower bound is strict
        assert!(runs.iter().all(|&r| r >= 4));
    }

    #[test]
    fn invalid_rate_rejected() {
        let spec = SyntheticSpec {
            anomaly_rate: 0.5,
            ..SyntheticSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn manifest_parses_all_keys() {
        let text = "name = hdfs\nsource = raw\nraw_path = HDFS.log\n\
                    log_format = <Date> <Time> <Pid> <Level> <Component>: <Content>\n\
                    window = session:(blk_-?\\d+)\nlabels = session:anomaly_label.csv\nseed = 3\n";
        let m = DatasetManifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.name, "hdfs");
        assert!(matches!(m.source, DatasetSource::Raw(ref p) if p == Path::new("/data/HDFS.log")));
        assert!(matches!(m.window, WindowSpec::Session(_)));
        assert_eq!(
            m.labels,
            LabelSource::PerSession(PathBuf::from("/data/anomaly_label.csv"))
        );
        assert_eq!(m.seed, 3);
        assert!(DatasetManifest::parse("bogus = 1\nraw_path = x", Path::new(".")).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let m = DatasetManifest::parse("raw_path = /nonexistent/xyz.log", Path::new("/")).unwrap();
        assert!(matches!(load_dataset(&m), Err(DatasetError::Io { .. })));
    }

    #[test]
    fn per_line_labels_align() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = fs::File::create(dir.path().join("app.log")).unwrap();
        let mut lab = fs::File::create(dir.path().join("labels.csv")).unwrap();
        writeln!(lab, "line_no,label").unwrap();
        for i in 0..100 {
            writeln!(log, "job {i} finished in state ok").unwrap();
            writeln!(lab, "{i},{}", u8::from(i % 40 == 7)).unwrap();
        }
        let text = "raw_path = app.log\nlabels = line:labels.csv\n";
        let m = DatasetManifest::parse(text, dir.path()).unwrap();
        let d = load_dataset(&m).unwrap();
        assert_eq!(d.records.len(), 100);
        assert_eq!(d.labels.unwrap().iter().filter(|&&l| l == 1).count(), 3);
    }

    #[test]
    fn unlabeled_line_reports_first_offender() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("app.log"), "a 1\nb 2\nc 3\n").unwrap();
        fs::write(dir.path().join("labels.csv"), "0,0\n2,1\n").unwrap();
        let m = DatasetManifest::parse("raw_path = app.log\nlabels = line:labels.csv", dir.path())
            .unwrap();
        assert!(matches!(
            load_dataset(&m),
            Err(DatasetError::Label { line_no: 1, .. })
        ));
    }

    #[test]
    fn hdfs_sample_contents() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("HDFS.log"),
            "081109 204015 308 INFO dfs.DataNode$PacketResponder: PacketResponder 2 for block blk_8229193803249955061 terminating\n\
             081109 203521 1438 INFO dfs.DataNode$DataXceiver: Received block blk_-1608999687919862906 src: /10.251.215.16:52002 dest: /10.251.215.16:50010 of size 911784\n",
        )
        .unwrap();
        fs::write(
            dir.path().join("anomaly_label.csv"),
            "BlockId,Label\nblk_8229193803249955061,Normal\nblk_-1608999687919862906,Anomaly\n",
        )
        .unwrap();
        let text = "raw_path = HDFS.log\nlog_format = <Date> <Time> <Pid> <Level> <Component>: <Content>\n\
                    window = session:(blk_-?\\d+)\nlabels = session:anomaly_label.csv\n";
        let d = load_dataset(&DatasetManifest::parse(text, dir.path()).unwrap()).unwrap();
        assert_eq!(
            d.records[0].content,
            "PacketResponder 2 for block blk_8229193803249955061 terminating"
        );
        assert_eq!(
            d.records[1].content,
            "Received block blk_-1608999687919862906 src: /10.251.215.16:52002 dest: /10.251.215.16:50010 of size 911784"
        );
        assert_eq!(d.labels, Some(vec![0, 1]));
    }
}
