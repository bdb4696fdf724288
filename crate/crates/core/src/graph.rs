//! Window partitioning and per-window event graphs.
//!
//! Each window becomes an undirected graph whose nodes are the window's log
//! lines in order. Which pairs are joined, and with what weight, is decided
//! by an [`EdgeStrategy`]; the default [`ChainRecurrence`] links consecutive
//! lines and nearby repeats of the same template.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use ndarray::Array2;
use regex::Regex;
use serde_json::{json, Value};
use thiserror::Error;

use crate::encoder::{EncodeError, VectorTable};
use crate::parser::{StructuredLine, TemplateId};

pub const UNKEYED: &str = "_unkeyed";
pub const DEFAULT_COUNT: usize = 100;
pub const DEFAULT_RADIUS: usize = 10;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Vector(#[from] EncodeError),
    #[error("window {0} has {1} records, need at least 2")]
    TooSmall(usize, usize),
    #[error("invalid window spec: {0}")]
    InvalidSpec(String),
    #[error("graph file line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("session mode needs one key per record ({keys} keys for {records} records)")]
    KeyCount { keys: usize, records: usize },
}

/// Pulls a session key (e.g. an HDFS block id) out of a message.
#[derive(Debug, Clone)]
pub struct SessionExtractor {
    regex: Regex,
}

impl SessionExtractor {
    pub fn new(pattern: &str) -> Result<Self, GraphError> {
        Regex::new(pattern)
            .map(|regex| Self { regex })
            .map_err(|e| GraphError::InvalidSpec(e.to_string()))
    }

    pub fn hdfs_block() -> Self {
        Self::new(r"(blk_-?\d+)").expect("static regex")
    }

    /// First capture group if the pattern has one, otherwise the whole match.
    pub fn extract(&self, content: &str) -> Option<String> {
        let caps = self.regex.captures(content)?;
        caps.get(1)
            .or_else(|| caps.get(0))
            .map(|m| m.as_str().to_string())
    }

    pub fn pattern(&self) -> &str {
        self.regex.as_str()
    }
}

#[derive(Debug, Clone)]
pub enum WindowSpec {
    Count(usize),
    Session(SessionExtractor),
}

impl WindowSpec {
    pub fn validate(&self) -> Result<(), GraphError> {
        match self {
            WindowSpec::Count(c) if *c < 2 => Err(GraphError::InvalidSpec(format!(
                "count must be >= 2, got {c}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Result of windowing a record stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Partition {
    pub windows: Vec<Vec<StructuredLine>>,
    /// Records discarded because their window held fewer than two lines.
    pub dropped: usize,
    /// Records whose session key could not be extracted.
    pub unkeyed: usize,
}

/// Split records into windows. `keys` must hold one entry per record in
/// session mode and is ignored in count mode.
pub fn partition(
    records: &[StructuredLine],
    spec: &WindowSpec,
    keys: Option<&[Option<String>]>,
) -> Result<Partition, GraphError> {
    spec.validate()?;
    match spec {
        WindowSpec::Count(count) => Ok(partition_by_count(records, *count)),
        WindowSpec::Session(_) => {
            let keys = keys.unwrap_or(&[]);
            if keys.len() != records.len() {
                return Err(GraphError::KeyCount {
                    keys: keys.len(),
                    records: records.len(),
                });
            }
            Ok(partition_by_session(records, keys))
        }
    }
}

fn partition_by_count(records: &[StructuredLine], count: usize) -> Partition {
    let mut out = Partition::default();
    for chunk in records.chunks(count) {
        if chunk.len() >= 2 {
            out.windows.push(chunk.to_vec());
        } else {
            out.dropped += chunk.len();
        }
    }
    out
}

fn partition_by_session(records: &[StructuredLine], keys: &[Option<String>]) -> Partition {
    let mut out = Partition::default();
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<StructuredLine>> = HashMap::new();
    for (rec, key) in records.iter().zip(keys) {
        let key = match key {
            Some(k) => k.clone(),
            None => {
                out.unkeyed += 1;
                UNKEYED.to_string()
            }
        };
        groups
            .entry(key.clone())
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(*rec);
    }
    for key in order {
        let window = groups.remove(&key).unwrap_or_default();
        if window.len() >= 2 {
            out.windows.push(window);
        } else {
            out.dropped += window.len();
        }
    }
    out
}

/// Decides the weighted edge list of a window from its template sequence.
pub trait EdgeStrategy {
    /// Edges as `(i, j, weight)` with `i < j`; repeated pairs are summed.
    fn edges(&self, templates: &[TemplateId]) -> Vec<(usize, usize, f64)>;
}

/// Consecutive lines joined with weight 1, plus lines sharing a template
/// at most `radius` positions apart joined with weight `1 / gap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRecurrence {
    pub radius: usize,
}

impl Default for ChainRecurrence {
    fn default() -> Self {
        Self {
            radius: DEFAULT_RADIUS,
        }
    }
}

impl EdgeStrategy for ChainRecurrence {
    fn edges(&self, templates: &[TemplateId]) -> Vec<(usize, usize, f64)> {
        let n = templates.len();
        let mut out = Vec::new();
        for i in 1..n {
            out.push((i - 1, i, 1.0));
        }
        for i in 0..n {
            for j in (i + 1)..n.min(i + self.radius + 1) {
                if templates[i] == templates[j] {
                    out.push((i, j, 1.0 / (j - i) as f64));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphNode {
    pub node_index: usize,
    pub line_no: usize,
    pub template_id: TemplateId,
    pub label: Option<u8>,
}

/// One window's graph with dense node features, adjacency and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowGraph {
    pub graph_id: usize,
    pub nodes: Vec<GraphNode>,
    pub features: Array2<f64>,
    pub adjacency: Array2<f64>,
    pub weights: Array2<f64>,
}

impl WindowGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().filter(|&&a| a > 0.0).count() / 2
    }

    /// Upper-triangle edges `(i, j, weight)` in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weights[[i, j]];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Assemble a graph from nodes and an edge list, pulling features from `vectors`.
    pub fn from_edges(
        graph_id: usize,
        nodes: Vec<GraphNode>,
        edges: &[(usize, usize, f64)],
        vectors: &VectorTable,
    ) -> Result<Self, GraphError> {
        let n = nodes.len();
        if n < 2 {
            return Err(GraphError::TooSmall(graph_id, n));
        }
        let dim = vectors.dim();
        let mut features = Array2::zeros((n, dim));
        for (row, node) in nodes.iter().enumerate() {
            let v = vectors.get(node.template_id)?;
            features.row_mut(row).assign(&ndarray::ArrayView1::from(v));
        }
        let mut weights = Array2::zeros((n, n));
        for &(i, j, w) in edges {
            if i == j || i >= n || j >= n {
                return Err(GraphError::InvalidSpec(format!(
                    "edge ({i}, {j}) invalid for {n} nodes"
                )));
            }
            weights[[i, j]] += w;
            weights[[j, i]] += w;
        }
        let adjacency = weights.mapv(|w: f64| if w > 0.0 { 1.0 } else { 0.0 });
        Ok(Self {
            graph_id,
            nodes,
            features,
            adjacency,
            weights,
        })
    }
}

/// Build the graph for one window.
pub fn build_graph(
    graph_id: usize,
    window: &[StructuredLine],
    vectors: &VectorTable,
    strategy: &dyn EdgeStrategy,
) -> Result<WindowGraph, GraphError> {
    if window.len() < 2 {
        return Err(GraphError::TooSmall(graph_id, window.len()));
    }
    let templates: Vec<TemplateId> = window.iter().map(|r| r.template_id).collect();
    let nodes = window
        .iter()
        .enumerate()
        .map(|(i, r)| GraphNode {
            node_index: i,
            line_no: r.line_no,
            template_id: r.template_id,
            label: r.label,
        })
        .collect();
    WindowGraph::from_edges(graph_id, nodes, &strategy.edges(&templates), vectors)
}

/// Build every window in order; graph ids follow window order.
pub fn build_graph_set(
    partition: &Partition,
    vectors: &VectorTable,
    strategy: &dyn EdgeStrategy,
) -> Result<Vec<WindowGraph>, GraphError> {
    partition
        .windows
        .iter()
        .enumerate()
        .map(|(id, w)| build_graph(id, w, vectors, strategy))
        .collect()
}

/// One JSON object per line; features are not stored.
pub fn write_graph_set<W: Write>(
    out: &mut W,
    graphs: &[WindowGraph],
    dim: usize,
) -> std::io::Result<()> {
    for g in graphs {
        let nodes: Vec<Value> = g
            .nodes
            .iter()
            .map(|n| match n.label {
                Some(l) => json!([n.node_index, n.line_no, n.template_id, l]),
                None => json!([n.node_index, n.line_no, n.template_id]),
            })
            .collect();
        let edges: Vec<Value> = g
            .edges()
            .iter()
            .map(|&(i, j, w)| json!([i, j, w]))
            .collect();
        let obj = json!({
            "graph_id": g.graph_id,
            "nodes": nodes,
            "edges": edges,
            "dim": dim,
        });
        writeln!(out, "{obj}")?;
    }
    Ok(())
}

pub fn read_graph_set<R: BufRead>(
    input: R,
    vectors: &VectorTable,
) -> Result<Vec<WindowGraph>, GraphError> {
    let mut graphs = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let bad = |reason: String| GraphError::Format {
            line: i + 1,
            reason,
        };
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let dim = v["dim"].as_u64().ok_or_else(|| bad("missing dim".into()))? as usize;
        if dim != vectors.dim() {
            return Err(bad(format!(
                "graph dim {dim} differs from vector dim {}",
                vectors.dim()
            )));
        }
        let graph_id = v["graph_id"]
            .as_u64()
            .ok_or_else(|| bad("missing graph_id".into()))? as usize;
        let as_usize = |x: &Value| x.as_u64().map(|u| u as usize);
        let mut nodes = Vec::new();
        for n in v["nodes"]
            .as_array()
            .ok_or_else(|| bad("missing nodes".into()))?
        {
            let a = n
                .as_array()
                .ok_or_else(|| bad("node is not an array".into()))?;
            let field = |k: usize| {
                a.get(k)
                    .and_then(as_usize)
                    .ok_or_else(|| bad("bad node".into()))
            };
            nodes.push(GraphNode {
                node_index: field(0)?,
                line_no: field(1)?,
                template_id: field(2)? as TemplateId,
                label: a.get(3).and_then(|l| l.as_u64()).map(|l| l as u8),
            });
        }
        let mut edges = Vec::new();
        for e in v["edges"]
            .as_array()
            .ok_or_else(|| bad("missing edges".into()))?
        {
            let a = e
                .as_array()
                .ok_or_else(|| bad("edge is not an array".into()))?;
            match (
                a.first().and_then(as_usize),
                a.get(1).and_then(as_usize),
                a.get(2).and_then(Value::as_f64),
            ) {
                (Some(i), Some(j), Some(w)) if i < j => edges.push((i, j, w)),
                _ => return Err(bad("bad edge".into())),
            }
        }
        graphs.push(WindowGraph::from_edges(graph_id, nodes, &edges, vectors)?);
    }
    Ok(graphs)
}

/// Count how many lines each template contributes across a graph set.
pub fn template_histogram(graphs: &[WindowGraph]) -> BTreeMap<TemplateId, usize> {
    let mut out = BTreeMap::new();
    for g in graphs {
        for n in &g.nodes {
            *out.entry(n.template_id).or_default() += 1;
        }
    }
    out
}
