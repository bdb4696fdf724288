//! Two-layer GCN encoder / two-layer GCN decoder over window graphs.
//!
//! Forward pass for one graph with propagation matrix `P = D̃^{-1/2}(W + I)D̃^{-1/2}`:
//!
//! ```text
//! H1  = relu(P X W0)        Z    = P H1 W1
//! H1d = relu(P Z V0)        Xrec = P H1d V1
//! Arec = sigmoid(H1d H1dᵀ)
//! ```
//!
//! The loss adds feature MSE, adjacency cross-entropy against `A + I`,
//! edge-weight MSE on existing edges, and `λ·tr(Zᵀ L Z)/n` with the
//! unnormalised weighted Laplacian `L = D − W`. Gradients are written out by
//! hand; `tests/gradient.rs` checks them against central differences.

use std::io::{BufRead, Read, Write};

use ndarray::{Array2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::WindowGraph;

/// Graphs above this many nodes are rejected (dense kernels throughout).
pub const MAX_NODES: usize = 5000;
const WEIGHTS_MAGIC: &[u8; 5] = b"DGAE1";
const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Error)]
pub enum AeError {
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("non-finite value in {stage} (graph {graph_id}{})", epoch.map(|e| format!(", epoch {e}")).unwrap_or_default())]
    Numerical {
        stage: &'static str,
        graph_id: usize,
        epoch: Option<usize>,
    },
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    TrainingDiverged { epoch: usize, loss: f64 },
    #[error("graph {0} has {1} nodes; the limit is {MAX_NODES}")]
    GraphTooLarge(usize, usize),
    #[error("empty graph set")]
    EmptyGraphSet,
    #[error("weights file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// `D̃^{-1/2}(W + I)D̃^{-1/2}` for a symmetric, hollow, nonnegative `W`.
pub fn normalize(weights: &Array2<f64>) -> Result<Array2<f64>, AeError> {
    let (n, m) = weights.dim();
    if n != m {
        return Err(AeError::ContractViolation(format!("adjacency is {n}x{m}")));
    }
    for i in 0..n {
        if weights[[i, i]] != 0.0 {
            return Err(AeError::ContractViolation(format!(
                "adjacency has a nonzero diagonal at {i}"
            )));
        }
        for j in (i + 1)..n {
            if weights[[i, j]] != weights[[j, i]] {
                return Err(AeError::ContractViolation(format!(
                    "adjacency is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut tilde = weights.clone();
    tilde.diag_mut().fill(1.0);
    let inv_sqrt: Vec<f64> = tilde
        .sum_axis(Axis(1))
        .iter()
        .map(|d| 1.0 / d.sqrt())
        .collect();
    Zip::indexed(&mut tilde).for_each(|(i, j), v| *v *= inv_sqrt[i] * inv_sqrt[j]);
    Ok(tilde)
}

/// Encoder and decoder weight matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    /// D × h1
    pub enc0: Array2<f64>,
    /// h1 × h2
    pub enc1: Array2<f64>,
    /// h2 × h1
    pub dec0: Array2<f64>,
    /// h1 × D
    pub dec1: Array2<f64>,
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit))
}

impl ModelWeights {
    /// Glorot-uniform initialisation, drawn in the order enc0, enc1, dec0, dec1.
    pub fn init(dim: usize, hidden1: usize, hidden2: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self {
            enc0: glorot(dim, hidden1, &mut rng),
            enc1: glorot(hidden1, hidden2, &mut rng),
            dec0: glorot(hidden2, hidden1, &mut rng),
            dec1: glorot(hidden1, dim, &mut rng),
        }
    }

    pub fn zeros(dim: usize, hidden1: usize, hidden2: usize) -> Self {
        Self {
            enc0: Array2::zeros((dim, hidden1)),
            enc1: Array2::zeros((hidden1, hidden2)),
            dec0: Array2::zeros((hidden2, hidden1)),
            dec1: Array2::zeros((hidden1, dim)),
        }
    }

    pub fn dim(&self) -> usize {
        self.enc0.nrows()
    }

    pub fn hidden1(&self) -> usize {
        self.enc0.ncols()
    }

    pub fn hidden2(&self) -> usize {
        self.enc1.ncols()
    }

    pub fn matrices(&self) -> [&Array2<f64>; 4] {
        [&self.enc0, &self.enc1, &self.dec0, &self.dec1]
    }

    pub fn matrices_mut(&mut self) -> [&mut Array2<f64>; 4] {
        [
            &mut self.enc0,
            &mut self.enc1,
            &mut self.dec0,
            &mut self.dec1,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.matrices()
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()))
    }

    fn check_shapes(&self) -> Result<(), AeError> {
        let (d, h1, h2) = (self.dim(), self.hidden1(), self.hidden2());
        let ok =
            self.enc1.nrows() == h1 && self.dec0.dim() == (h2, h1) && self.dec1.dim() == (h1, d);
        if ok {
            Ok(())
        } else {
            Err(AeError::ContractViolation(
                "inconsistent weight shapes".into(),
            ))
        }
    }

    /// `DGAE1`, then D, h1, h2 as little-endian u32, then the four matrices
    /// row-major as little-endian f64.
    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        out.write_all(WEIGHTS_MAGIC)?;
        for n in [self.dim(), self.hidden1(), self.hidden2()] {
            out.write_all(&(n as u32).to_le_bytes())?;
        }
        for m in self.matrices() {
            for v in m.iter() {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(input: &mut R) -> Result<Self, AeError> {
        let mut magic = [0u8; 5];
        input.read_exact(&mut magic)?;
        if &magic != WEIGHTS_MAGIC {
            return Err(AeError::Format("bad magic".into()));
        }
        let mut dims = [0usize; 3];
        for d in dims.iter_mut() {
            let mut b = [0u8; 4];
            input.read_exact(&mut b)?;
            *d = u32::from_le_bytes(b) as usize;
        }
        let [dim, h1, h2] = dims;
        let mut w = Self::zeros(dim, h1, h2);
        for m in w.matrices_mut() {
            for v in m.iter_mut() {
                let mut b = [0u8; 8];
                input.read_exact(&mut b)?;
                *v = f64::from_le_bytes(b);
            }
        }
        let mut rest = Vec::new();
        input.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(AeError::Format(format!("{} trailing bytes", rest.len())));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub lambda: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub hidden1: usize,
    pub hidden2: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            learning_rate: 0.01,
            epochs: 200,
            seed: 0,
            hidden1: 32,
            hidden2: 16,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(format!(
                "learning_rate must be > 0, got {}",
                self.learning_rate
            ));
        }
        if self.epochs < 1 {
            return Err("epochs must be >= 1".into());
        }
        if self.hidden1 == 0 || self.hidden2 == 0 {
            return Err("hidden sizes must be positive".into());
        }
        Ok(())
    }
}

/// Everything about a graph the model needs, precomputed once.
#[derive(Debug, Clone)]
pub struct GraphInputs {
    pub graph_id: usize,
    pub features: Array2<f64>,
    pub propagation: Array2<f64>,
    /// `P X`, reused by every forward pass.
    prop_features: Array2<f64>,
    /// `A + I`, the cross-entropy target.
    adjacency_target: Array2<f64>,
    /// Weights scaled into (0, 1] by the graph's largest weight.
    weight_target: Array2<f64>,
    adjacency: Array2<f64>,
    edge_entries: usize,
    laplacian: Array2<f64>,
}

impl GraphInputs {
    pub fn new(graph: &WindowGraph) -> Result<Self, AeError> {
        let n = graph.len();
        if n > MAX_NODES {
            return Err(AeError::GraphTooLarge(graph.graph_id, n));
        }
        let propagation = normalize(&graph.weights)?;
        let prop_features = propagation.dot(&graph.features);
        let mut adjacency_target = graph.adjacency.clone();
        adjacency_target.diag_mut().fill(1.0);
        let max_w = graph.weights.iter().cloned().fold(0.0, f64::max);
        let weight_target = if max_w > 0.0 {
            graph.weights.mapv(|w| w / max_w)
        } else {
            graph.weights.clone()
        };
        let mut laplacian = -&graph.weights;
        for (i, d) in graph.weights.sum_axis(Axis(1)).iter().enumerate() {
            laplacian[[i, i]] = *d;
        }
        let edge_entries = graph.adjacency.iter().filter(|&&a| a > 0.0).count();
        Ok(Self {
            graph_id: graph.graph_id,
            features: graph.features.clone(),
            propagation,
            prop_features,
            adjacency_target,
            weight_target,
            adjacency: graph.adjacency.clone(),
            edge_entries,
            laplacian,
        })
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }
}

/// Intermediate activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    pub enc_pre: Array2<f64>,
    pub enc_hidden: Array2<f64>,
    pub z: Array2<f64>,
    pub dec_pre: Array2<f64>,
    pub dec_hidden: Array2<f64>,
    pub x_rec: Array2<f64>,
    pub logits: Array2<f64>,
    pub a_rec: Array2<f64>,
}

fn relu(m: &Array2<f64>) -> Array2<f64> {
    m.mapv(|v| v.max(0.0))
}

fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn softplus(v: f64) -> f64 {
    v.max(0.0) + (-v.abs()).exp().ln_1p()
}

fn all_finite(m: &Array2<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

/// Node embeddings `Z = P relu(P X W0) W1`.
pub fn encode(inputs: &GraphInputs, weights: &ModelWeights) -> Result<Array2<f64>, AeError> {
    weights.check_shapes()?;
    if inputs.features.ncols() != weights.dim() {
        return Err(AeError::ContractViolation(format!(
            "features have {} columns, model expects {}",
            inputs.features.ncols(),
            weights.dim()
        )));
    }
    let hidden = relu(&inputs.prop_features.dot(&weights.enc0));
    let z = inputs.propagation.dot(&hidden).dot(&weights.enc1);
    if !all_finite(&z) {
        return Err(AeError::Numerical {
            stage: "encode",
            graph_id: inputs.graph_id,
            epoch: None,
        });
    }
    Ok(z)
}

/// Reconstruct features and adjacency from embeddings on the same graph.
pub fn decode(
    z: &Array2<f64>,
    propagation: &Array2<f64>,
    weights: &ModelWeights,
) -> (Array2<f64>, Array2<f64>) {
    let hidden = relu(&propagation.dot(z).dot(&weights.dec0));
    let x_rec = propagation.dot(&hidden).dot(&weights.dec1);
    let a_rec = hidden.dot(&hidden.t()).mapv(sigmoid);
    (x_rec, a_rec)
}

pub fn forward(inputs: &GraphInputs, weights: &ModelWeights) -> Result<Forward, AeError> {
    weights.check_shapes()?;
    let p = &inputs.propagation;
    let enc_pre = inputs.prop_features.dot(&weights.enc0);
    let enc_hidden = relu(&enc_pre);
    let z = p.dot(&enc_hidden).dot(&weights.enc1);
    let dec_pre = p.dot(&z).dot(&weights.dec0);
    let dec_hidden = relu(&dec_pre);
    let x_rec = p.dot(&dec_hidden).dot(&weights.dec1);
    let logits = dec_hidden.dot(&dec_hidden.t());
    let a_rec = logits.mapv(sigmoid);
    if !all_finite(&x_rec) || !all_finite(&logits) {
        return Err(AeError::Numerical {
            stage: "forward",
            graph_id: inputs.graph_id,
            epoch: None,
        });
    }
    Ok(Forward {
        enc_pre,
        enc_hidden,
        z,
        dec_pre,
        dec_hidden,
        x_rec,
        logits,
        a_rec,
    })
}

/// The individual loss terms for one graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossParts {
    pub feature: f64,
    pub adjacency: f64,
    pub weight: f64,
    pub regularizer: f64,
    pub total: f64,
}

/// Evaluate the loss from a forward pass.
pub fn loss(inputs: &GraphInputs, fwd: &Forward, lambda: f64) -> LossParts {
    let n = inputs.len() as f64;
    let feature = (&fwd.x_rec - &inputs.features)
        .mapv(|d| d * d)
        .mean()
        .unwrap_or(0.0);
    let adjacency = Zip::from(&fwd.logits)
        .and(&inputs.adjacency_target)
        .fold(0.0, |acc, &s, &t| acc + softplus(s) - t * s)
        / (n * n);
    let weight = if inputs.edge_entries > 0 {
        Zip::from(&fwd.a_rec)
            .and(&inputs.adjacency)
            .and(&inputs.weight_target)
            .fold(0.0, |acc, &r, &a, &w| {
                let e = r * a - w;
                if a > 0.0 {
                    acc + e * e
                } else {
                    acc
                }
            })
            / inputs.edge_entries as f64
    } else {
        0.0
    };
    let regularizer = (&fwd.z * &inputs.laplacian.dot(&fwd.z)).sum() / n;
    LossParts {
        feature,
        adjacency,
        weight,
        regularizer,
        total: feature + adjacency + weight + lambda * regularizer,
    }
}

/// Loss and its gradient with respect to every weight matrix.
pub fn gradients(
    inputs: &GraphInputs,
    weights: &ModelWeights,
    lambda: f64,
) -> Result<(LossParts, ModelWeights), AeError> {
    let fwd = forward(inputs, weights)?;
    let parts = loss(inputs, &fwd, lambda);
    let p = &inputs.propagation;
    let n = inputs.len() as f64;
    let d = inputs.features.ncols() as f64;

    let d_xrec = (&fwd.x_rec - &inputs.features) * (2.0 / (n * d));

    // d loss / d logits: cross-entropy plus the edge-weight term through the sigmoid
    let mut d_logits = Array2::zeros(fwd.logits.raw_dim());
    let e_scale = if inputs.edge_entries > 0 {
        2.0 / inputs.edge_entries as f64
    } else {
        0.0
    };
    Zip::from(&mut d_logits)
        .and(&fwd.a_rec)
        .and(&inputs.adjacency_target)
        .and(&inputs.adjacency)
        .and(&inputs.weight_target)
        .for_each(|g, &r, &t, &a, &w| {
            let mut v = (r - t) / (n * n);
            if a > 0.0 {
                v += e_scale * (r - w) * r * (1.0 - r);
            }
            *g = v;
        });

    let p_hd = p.dot(&fwd.dec_hidden);
    let g_dec1 = p_hd.t().dot(&d_xrec);
    let mut d_hd = p.dot(&d_xrec).dot(&weights.dec1.t());
    d_hd = d_hd + (&d_logits + &d_logits.t()).dot(&fwd.dec_hidden);
    let d_dec_pre = d_hd * fwd.dec_pre.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });

    let p_z = p.dot(&fwd.z);
    let g_dec0 = p_z.t().dot(&d_dec_pre);
    let mut d_z = p.dot(&d_dec_pre).dot(&weights.dec0.t());
    if lambda != 0.0 {
        d_z = d_z + inputs.laplacian.dot(&fwd.z) * (2.0 * lambda / n);
    }

    let p_h = p.dot(&fwd.enc_hidden);
    let g_enc1 = p_h.t().dot(&d_z);
    let d_h = p.dot(&d_z).dot(&weights.enc1.t());
    let d_enc_pre = d_h * fwd.enc_pre.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
    let g_enc0 = inputs.prop_features.t().dot(&d_enc_pre);

    Ok((
        parts,
        ModelWeights {
            enc0: g_enc0,
            enc1: g_enc1,
            dec0: g_dec0,
            dec1: g_dec1,
        },
    ))
}

/// Weights after training plus the mean loss of every epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: ModelWeights,
    pub loss_trace: Vec<f64>,
}

/// Gradient descent with one update per graph, graphs visited in order.
pub fn train(graphs: &[WindowGraph], cfg: &TrainConfig) -> Result<TrainOutcome, AeError> {
    cfg.validate().map_err(AeError::ContractViolation)?;
    let first = graphs.first().ok_or(AeError::EmptyGraphSet)?;
    let dim = first.features.ncols();
    let inputs = graphs
        .iter()
        .map(GraphInputs::new)
        .collect::<Result<Vec<_>, _>>()?;
    let mut weights = ModelWeights::init(dim, cfg.hidden1, cfg.hidden2, cfg.seed);
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let mut total = 0.0;
        for g in &inputs {
            let (parts, grad) = gradients(g, &weights, cfg.lambda).map_err(|e| match e {
                AeError::Numerical {
                    stage, graph_id, ..
                } => AeError::Numerical {
                    stage,
                    graph_id,
                    epoch: Some(epoch),
                },
                other => other,
            })?;
            if !parts.total.is_finite() || parts.total > DIVERGENCE_LIMIT {
                return Err(AeError::TrainingDiverged {
                    epoch,
                    loss: parts.total,
                });
            }
            total += parts.total;
            for (w, g) in weights.matrices_mut().into_iter().zip(grad.matrices()) {
                w.scaled_add(-cfg.learning_rate, g);
            }
        }
        let mean = total / inputs.len() as f64;
        if !weights.is_finite() {
            return Err(AeError::TrainingDiverged { epoch, loss: mean });
        }
        trace.push(mean);
    }
    Ok(TrainOutcome {
        weights,
        loss_trace: trace,
    })
}

/// Where an embedding row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRef {
    pub graph_id: usize,
    pub node_index: usize,
    pub line_no: usize,
    pub label: Option<u8>,
}

/// Node embeddings of a whole graph set, stacked graph-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEmbeddings {
    pub rows: Array2<f64>,
    pub provenance: Vec<NodeRef>,
}

pub fn embed_all(
    graphs: &[WindowGraph],
    weights: &ModelWeights,
) -> Result<NodeEmbeddings, AeError> {
    let total: usize = graphs.iter().map(WindowGraph::len).sum();
    let mut rows = Array2::zeros((total, weights.hidden2()));
    let mut provenance = Vec::with_capacity(total);
    let mut offset = 0;
    for g in graphs {
        let z = encode(&GraphInputs::new(g)?, weights)?;
        rows.slice_mut(ndarray::s![offset..offset + g.len(), ..])
            .assign(&z);
        offset += g.len();
        provenance.extend(g.nodes.iter().map(|n| NodeRef {
            graph_id: g.graph_id,
            node_index: n.node_index,
            line_no: n.line_no,
            label: n.label,
        }));
    }
    Ok(NodeEmbeddings { rows, provenance })
}

pub fn write_loss_trace<W: Write>(out: &mut W, trace: &[f64]) -> std::io::Result<()> {
    writeln!(out, "epoch,loss")?;
    for (i, l) in trace.iter().enumerate() {
        writeln!(out, "{},{l:.17e}", i + 1)?;
    }
    Ok(())
}

pub fn read_loss_trace<R: BufRead>(input: R) -> Result<Vec<f64>, AeError> {
    let mut out = Vec::new();
    for line in input.lines().skip(1) {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v = line
            .split(',')
            .nth(1)
            .and_then(|s| s.parse::<f64>().ok())
            .ok_or_else(|| AeError::Format(format!("bad loss row `{line}`")))?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn path(n: usize) -> Array2<f64> {
        let mut a = Array2::zeros((n, n));
        for i in 1..n {
            a[[i - 1, i]] = 1.0;
            a[[i, i - 1]] = 1.0;
        }
        a
    }

    fn close(a: &Array2<f64>, b: &Array2<f64>, tol: f64) -> bool {
        a.dim() == b.dim() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn isolated_nodes_normalize_to_identity() {
        let p = normalize(&Array2::zeros((2, 2))).unwrap();
        assert_eq!(p, Array2::<f64>::eye(2));
    }

    #[test]
    fn two_node_path() {
        let p = normalize(&path(2)).unwrap();
        assert!(close(&p, &arr2(&[[0.5, 0.5], [0.5, 0.5]]), 1e-15));
    }

    #[test]
    fn three_node_path_matches_direct_formula() {
        // degrees with self loops: 2, 3, 2
        let p = normalize(&path(3)).unwrap();
        let (a, b) = (0.5, 1.0 / 6f64.sqrt());
        let expected = arr2(&[[a, b, 0.0], [b, 1.0 / 3.0, b], [0.0, b, a]]);
        assert!(close(&p, &expected, 1e-12));
    }

    #[test]
    fn asymmetric_is_rejected() {
        let a = arr2(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(normalize(&a), Err(AeError::ContractViolation(_))));
    }

    #[test]
    fn weights_binary_round_trip() {
        let w = ModelWeights::init(5, 4, 3, 9);
        let mut buf = Vec::new();
        w.write(&mut buf).unwrap();
        assert_eq!(&buf[..5], b"DGAE1");
        assert_eq!(buf.len(), 5 + 12 + 8 * (5 * 4 + 4 * 3 + 3 * 4 + 4 * 5));
        let back = ModelWeights::read(&mut &buf[..]).unwrap();
        assert_eq!(back, w);
        assert!(ModelWeights::read(&mut &buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn glorot_range() {
        let w = ModelWeights::init(64, 32, 16, 1);
        let lim = (6.0f64 / 96.0).sqrt();
        assert!(w.enc0.iter().all(|v| v.abs() <= lim));
        assert_eq!(ModelWeights::init(64, 32, 16, 1), w);
        assert_ne!(ModelWeights::init(64, 32, 16, 2), w);
    }

    #[test]
    fn loss_trace_csv() {
        let mut buf = Vec::new();
        write_loss_trace(&mut buf, &[1.5, 0.25]).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("epoch,loss\n1,"));
        assert_eq!(read_loss_trace(&buf[..]).unwrap(), vec![1.5, 0.25]);
    }
}
