//! Spectral clustering of node embeddings into `K` groups.
//!
//! The similarity graph is a Gaussian kernel restricted to k-nearest
//! neighbours, so it is stored sparsely. Small problems are diagonalised
//! densely with cyclic Jacobi rotations; larger ones use a restarted block
//! Lanczos iteration whose Ritz problem is again solved by Jacobi.

use std::io::Write;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autoencoder::NodeRef;

pub const JACOBI_MAX_SWEEPS: usize = 100;
pub const JACOBI_TOL: f64 = 1e-10;
/// Above this many rows the eigenproblem goes through block Lanczos.
pub const DENSE_EIGEN_LIMIT: usize = 400;
/// Above this many point pairs the bandwidth median is taken from a sample.
const MEDIAN_PAIR_LIMIT: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("all {0} embedding rows are identical; nothing to cluster")]
    DegenerateEmbedding(usize),
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    EigenFailure {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("need at least {k} rows, got {rows}")]
    TooFewRows { rows: usize, k: usize },
    #[error("invalid clustering config: {0}")]
    Config(String),
    #[error("{0} provenance entries for {1} rows")]
    Provenance(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectralConfig {
    pub k: usize,
    pub knn: usize,
    /// Fixed kernel bandwidth. When absent the bandwidth is `sigma_scale`
    /// times the median pairwise distance.
    pub sigma: Option<f64>,
    pub sigma_scale: f64,
    /// Add minimum-spanning-tree edges so the similarity graph is connected.
    pub connect: bool,
    pub kmeans_restarts: usize,
    pub kmeans_iters: usize,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            k: 2,
            knn: 10,
            sigma: None,
            sigma_scale: 0.35,
            connect: true,
            kmeans_restarts: 10,
            kmeans_iters: 100,
            seed: 0,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.k < 2 {
            return Err(ClusterError::Config(format!(
                "k must be >= 2, got {}",
                self.k
            )));
        }
        if self.knn < 1 {
            return Err(ClusterError::Config("knn must be >= 1".into()));
        }
        if self.kmeans_restarts < 1 || self.kmeans_iters < 1 {
            return Err(ClusterError::Config(
                "kmeans_restarts and kmeans_iters must be >= 1".into(),
            ));
        }
        if !(self.sigma_scale > 0.0 && self.sigma_scale.is_finite()) {
            return Err(ClusterError::Config(format!(
                "sigma_scale must be > 0, got {}",
                self.sigma_scale
            )));
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return Err(ClusterError::Config(format!("sigma must be > 0, got {s}")));
            }
        }
        Ok(())
    }
}

/// Symmetric sparse matrix as sorted adjacency lists (diagonal included
/// when nonzero).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSym {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(0.0)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let n = self.len();
        let mut d = Array2::zeros((n, n));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                d[[i, j]] = v;
            }
        }
        d
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    pub s: SparseSym,
    pub sigma: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn rows_of(points: &Array2<f64>) -> Vec<Vec<f64>> {
    points.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, &mut hi, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = values[..mid]
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Median Euclidean distance over all pairs, or over a seeded sample of
/// pairs when there are too many to hold. Falls back to the mean of the
/// nonzero distances when more than half the pairs coincide.
pub fn median_pairwise_distance(points: &Array2<f64>, seed: u64) -> f64 {
    let rows = rows_of(points);
    let m = rows.len();
    let pairs = m * (m - 1) / 2;
    let mut d: Vec<f64> = if pairs <= MEDIAN_PAIR_LIMIT {
        let mut d = Vec::with_capacity(pairs);
        for i in 0..m {
            for j in i + 1..m {
                d.push(sq_dist(&rows[i], &rows[j]).sqrt());
            }
        }
        d
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..MEDIAN_PAIR_LIMIT)
            .map(|_| {
                let i = rng.random_range(0..m);
                let mut j = rng.random_range(0..m - 1);
                if j >= i {
                    j += 1;
                }
                sq_dist(&rows[i], &rows[j]).sqrt()
            })
            .collect()
    };
    let med = median(&mut d);
    if med > 0.0 {
        return med;
    }
    let nonzero: Vec<f64> = d.into_iter().filter(|&v| v > 0.0).collect();
    if nonzero.is_empty() {
        0.0
    } else {
        nonzero.iter().sum::<f64>() / nonzero.len() as f64
    }
}

/// Indices of the `k` nearest other rows of `i`, nearer first, ties to the
/// lower index.
fn nearest(rows: &[Vec<f64>], i: usize, k: usize) -> Vec<(usize, f64)> {
    let mut d: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(j, r)| (j, sq_dist(&rows[i], r)))
        .collect();
    let by = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    let k = k.min(d.len());
    if k < d.len() {
        d.select_nth_unstable_by(k, by);
        d.truncate(k);
    }
    d.sort_by(by);
    d
}

/// Edges of a Euclidean minimum spanning tree as `(i, j, squared distance)`,
/// by Prim's algorithm on the implicit complete graph.
pub fn spanning_tree(rows: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let m = rows.len();
    let mut edges = Vec::with_capacity(m.saturating_sub(1));
    if m == 0 {
        return edges;
    }
    let mut in_tree = vec![false; m];
    let mut best = vec![(f64::INFINITY, 0usize); m];
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..m {
        let mut next = usize::MAX;
        for j in 0..m {
            if in_tree[j] {
                continue;
            }
            let d = sq_dist(&rows[current], &rows[j]);
            if d < best[j].0 {
                best[j] = (d, current);
            }
            if next == usize::MAX || best[j].0 < best[next].0 {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((best[next].1, next, best[next].0));
        current = next;
    }
    edges
}

/// Gaussian kernel on the union of each row's k-nearest-neighbour pairs,
/// optionally joined with a spanning tree.
pub fn similarity(
    points: &Array2<f64>,
    cfg: &SpectralConfig,
) -> Result<SimilarityMatrix, ClusterError> {
    cfg.validate()?;
    let m = points.nrows();
    if m < cfg.k {
        return Err(ClusterError::TooFewRows { rows: m, k: cfg.k });
    }
    let rows = rows_of(points);
    if rows.iter().all(|r| r == &rows[0]) {
        return Err(ClusterError::DegenerateEmbedding(m));
    }
    let sigma = match cfg.sigma {
        Some(s) => s,
        None => cfg.sigma_scale * median_pairwise_distance(points, cfg.seed),
    };
    let kernel = |d2: f64| (-d2 / (2.0 * sigma * sigma)).exp();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    let mut link = |i: usize, j: usize, d2: f64| {
        adj[i].push((j, kernel(d2)));
        adj[j].push((i, kernel(d2)));
    };
    for i in 0..m {
        for (j, d2) in nearest(&rows, i, cfg.knn) {
            link(i, j, d2);
        }
    }
    if cfg.connect {
        for (i, j, d2) in spanning_tree(&rows) {
            link(i, j, d2);
        }
    }
    for row in &mut adj {
        row.sort_by_key(|e| e.0);
        // both endpoints may list the pair; the kernel value is the same
        row.dedup_by_key(|e| e.0);
    }
    Ok(SimilarityMatrix {
        s: SparseSym { rows: adj },
        sigma,
    })
}

/// `I - D^-1/2 S D^-1/2`; isolated rows keep a unit diagonal.
pub fn laplacian(s: &SparseSym) -> SparseSym {
    let deg: Vec<f64> = s.rows.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
    let inv: Vec<f64> = deg
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let rows = s
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut out: Vec<(usize, f64)> = row
                .iter()
                .filter(|&&(j, _)| j != i)
                .map(|&(j, v)| (j, -v * inv[i] * inv[j]))
                .collect();
            let self_loop = s.get(i, i);
            out.push((i, 1.0 - self_loop * inv[i] * inv[i]));
            out.sort_by_key(|e| e.0);
            out
        })
        .collect();
    SparseSym { rows }
}

/// Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. Eigenvalues ascend; eigenvectors are the matching columns.
pub fn jacobi_eigen(a: &Array2<f64>) -> Result<(Vec<f64>, Array2<f64>), ClusterError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "jacobi_eigen needs a square matrix");
    let mut m: Vec<f64> = a.iter().copied().collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let off = |m: &[f64]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i * n + j] * m[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    loop {
        let o = off(&m);
        if o < JACOBI_TOL {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(ClusterError::EigenFailure {
                method: "jacobi",
                iterations: sweeps,
                residual: o,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * kp - s * kq;
                    m[k * n + q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * pk - s * qk;
                    m[q * n + k] = s * pk + c * qk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let (kp, kq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * kp - s * kq;
                    v[k * n + q] = s * kp + c * kq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i * n + i].total_cmp(&m[j * n + j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[i * n + i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[r * n + order[c]]);
    Ok((values, vectors))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthogonalise `x` against `basis` twice, then normalise. `None` when
/// nothing independent is left.
fn orthonormalize(x: &mut [f64], basis: &[Vec<f64>]) -> Option<()> {
    let before = dot(x, x).sqrt();
    for _ in 0..2 {
        for b in basis {
            let c = dot(x, b);
            x.iter_mut().zip(b).for_each(|(xi, bi)| *xi -= c * bi);
        }
    }
    let norm = dot(x, x).sqrt();
    if norm <= 1e-10 * before.max(1e-300) {
        return None;
    }
    x.iter_mut().for_each(|xi| *xi /= norm);
    Some(())
}

const LANCZOS_BASIS: usize = 240;
const LANCZOS_RESTARTS: usize = 40;
const LANCZOS_TOL: f64 = 1e-9;
const LANCZOS_ACCEPT: f64 = 1e-6;

/// The `k` smallest eigenpairs of a sparse symmetric matrix by restarted
/// block Lanczos with full reorthogonalisation.
pub fn lanczos_smallest(
    a: &SparseSym,
    k: usize,
    seed: u64,
) -> Result<(Vec<f64>, Array2<f64>), ClusterError> {
    let n = a.len();
    let block = (k + 2).min(n);
    let cap = LANCZOS_BASIS.max(4 * block).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut worst = f64::INFINITY;
    let mut best: Option<(Vec<f64>, Vec<Vec<f64>>)> = None;
    for _ in 0..LANCZOS_RESTARTS {
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(cap);
        let mut aq: Vec<Vec<f64>> = Vec::with_capacity(cap);
        let mut pending = std::mem::take(&mut start);
        while q.len() < cap && !pending.is_empty() {
            let mut next = Vec::new();
            for mut x in pending {
                if q.len() == cap {
                    break;
                }
                if orthonormalize(&mut x, &q).is_none() {
                    continue;
                }
                let mut y = vec![0.0; n];
                a.matvec(&x, &mut y);
                q.push(x);
                aq.push(y.clone());
                next.push(y);
            }
            pending = next;
        }
        let s = q.len();
        let t = Array2::from_shape_fn((s, s), |(i, j)| {
            0.5 * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i]))
        });
        let (theta, u) = jacobi_eigen(&t)?;
        let ritz = |c: usize, basis: &[Vec<f64>]| {
            let mut y = vec![0.0; n];
            for (b, col) in basis.iter().zip(u.column(c)) {
                y.iter_mut().zip(b).for_each(|(yi, bi)| *yi += col * bi);
            }
            y
        };
        let take = block.min(s);
        let vectors: Vec<Vec<f64>> = (0..take).map(|c| ritz(c, &q)).collect();
        let images: Vec<Vec<f64>> = (0..take).map(|c| ritz(c, &aq)).collect();
        let residual = (0..k.min(take))
            .map(|c| {
                images[c]
                    .iter()
                    .zip(&vectors[c])
                    .map(|(ay, y)| (ay - theta[c] * y).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if residual < worst {
            worst = residual;
            best = Some((theta[..take].to_vec(), vectors.clone()));
        }
        if worst < LANCZOS_TOL || s == n {
            break;
        }
        start = vectors;
    }
    match best {
        Some((values, vectors)) if worst < LANCZOS_ACCEPT && vectors.len() >= k => {
            let out = Array2::from_shape_fn((n, k), |(r, c)| vectors[c][r]);
            Ok((values[..k].to_vec(), out))
        }
        _ => Err(ClusterError::EigenFailure {
            method: "lanczos",
            iterations: LANCZOS_RESTARTS,
            residual: worst,
        }),
    }
}

/// Eigenvectors of the `k` smallest eigenvalues, ascending, with each row
/// scaled to unit length (zero rows stay zero).
pub fn smallest_eigenvectors(
    l: &SparseSym,
    k: usize,
    seed: u64,
) -> Result<(Vec<f64>, Array2<f64>), ClusterError> {
    let n = l.len();
    let (values, mut vectors) = if n <= DENSE_EIGEN_LIMIT {
        let (values, vectors) = jacobi_eigen(&l.to_dense())?;
        let k = k.min(n);
        (
            values[..k].to_vec(),
            vectors.slice(ndarray::s![.., ..k]).to_owned(),
        )
    } else {
        lanczos_smallest(l, k, seed)?
    };
    for mut row in vectors.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row /= norm;
        }
    }
    Ok((values, vectors))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Array2<f64>,
    pub sse: f64,
    /// SSE after each Lloyd iteration of the winning restart.
    pub sse_trace: Vec<f64>,
}

fn plus_plus_init(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let m = rows.len();
    let mut centers = vec![rows[rng.random_range(0..m)].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = m - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..m)
        };
        centers.push(rows[pick].clone());
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &centers[centers.len() - 1]));
        }
    }
    centers
}

fn closest(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(row, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn means(rows: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = rows[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (r, &l) in rows.iter().zip(labels) {
        counts[l] += 1;
        sums[l].iter_mut().zip(r).for_each(|(s, x)| *s += x);
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    sums
}

fn sse(rows: &[Vec<f64>], labels: &[usize], centers: &[Vec<f64>]) -> f64 {
    rows.iter()
        .zip(labels)
        .map(|(r, &l)| sq_dist(r, &centers[l]))
        .sum()
}

/// Lloyd iterations from the given centres. A cluster left empty takes the
/// point farthest from its own centre.
pub fn lloyd(
    rows: &[Vec<f64>],
    mut centers: Vec<Vec<f64>>,
    max_iters: usize,
) -> (Vec<usize>, Vec<Vec<f64>>, Vec<f64>) {
    let k = centers.len();
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    for _ in 0..max_iters {
        let mut next: Vec<usize> = rows.iter().map(|r| closest(r, &centers).0).collect();
        let mut counts = vec![0usize; k];
        next.iter().for_each(|&l| counts[l] += 1);
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..rows.len())
                .filter(|&i| counts[next[i]] > 1)
                .max_by(|&i, &j| {
                    sq_dist(&rows[i], &centers[next[i]])
                        .total_cmp(&sq_dist(&rows[j], &centers[next[j]]))
                        .then(j.cmp(&i))
                });
            if let Some(i) = far {
                counts[next[i]] -= 1;
                next[i] = c;
                counts[c] = 1;
            }
        }
        let done = next == labels;
        labels = next;
        let fresh = means(rows, &labels, k);
        for (c, f) in fresh.into_iter().enumerate() {
            if counts[c] > 0 {
                centers[c] = f;
            }
        }
        trace.push(sse(rows, &labels, &centers));
        if done {
            break;
        }
    }
    (labels, centers, trace)
}

/// Best of several k-means++ seeded Lloyd runs by within-cluster SSE; the
/// earliest restart wins ties.
pub fn kmeans(points: &Array2<f64>, cfg: &SpectralConfig) -> Result<KMeansResult, ClusterError> {
    cfg.validate()?;
    let m = points.nrows();
    if m < cfg.k {
        return Err(ClusterError::TooFewRows { rows: m, k: cfg.k });
    }
    let rows = rows_of(points);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..cfg.kmeans_restarts {
        let init = plus_plus_init(&rows, cfg.k, &mut rng);
        let (labels, centers, trace) = lloyd(&rows, init, cfg.kmeans_iters);
        let total = *trace.last().expect("at least one iteration");
        if best.as_ref().is_none_or(|b| total < b.sse) {
            let dim = rows[0].len();
            best = Some(KMeansResult {
                labels,
                centroids: Array2::from_shape_fn((cfg.k, dim), |(c, j)| centers[c][j]),
                sse: total,
                sse_trace: trace,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub k: usize,
    pub labels: Vec<usize>,
    pub provenance: Vec<NodeRef>,
}

impl ClusterAssignment {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        self.labels.iter().for_each(|&l| s[l] += 1);
        s
    }
}

/// Intermediate results of one spectral clustering run.
#[derive(Debug, Clone)]
pub struct SpectralRun {
    pub assignment: ClusterAssignment,
    pub sigma: f64,
    pub eigenvalues: Vec<f64>,
    pub spectral_rows: Array2<f64>,
}

pub fn spectral_cluster(
    points: &Array2<f64>,
    provenance: Vec<NodeRef>,
    cfg: &SpectralConfig,
) -> Result<SpectralRun, ClusterError> {
    if provenance.len() != points.nrows() {
        return Err(ClusterError::Provenance(provenance.len(), points.nrows()));
    }
    let sim = similarity(points, cfg)?;
    let l = laplacian(&sim.s);
    let (eigenvalues, spectral_rows) = smallest_eigenvectors(&l, cfg.k, cfg.seed)?;
    let km = kmeans(&spectral_rows, cfg)?;
    Ok(SpectralRun {
        assignment: ClusterAssignment {
            k: cfg.k,
            labels: km.labels,
            provenance,
        },
        sigma: sim.sigma,
        eigenvalues,
        spectral_rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Normal,
    Abnormal,
}

impl Verdict {
    pub fn as_label(self) -> u8 {
        match self {
            Verdict::Normal => 0,
            Verdict::Abnormal => 1,
        }
    }
}

/// The largest cluster; the lowest id on a tie.
pub fn normal_cluster(sizes: &[usize]) -> usize {
    sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(c, _)| c)
        .unwrap_or(0)
}

/// Everything outside the largest cluster is abnormal.
pub fn label_anomalies(assign: &ClusterAssignment) -> Vec<Verdict> {
    let normal = normal_cluster(&assign.sizes());
    assign
        .labels
        .iter()
        .map(|&c| {
            if c == normal {
                Verdict::Normal
            } else {
                Verdict::Abnormal
            }
        })
        .collect()
}

pub fn write_assignment<W: Write>(
    out: &mut W,
    assign: &ClusterAssignment,
    verdicts: &[Verdict],
) -> std::io::Result<()> {
    writeln!(out, "line_no,graph_id,node_index,cluster,verdict")?;
    let mut order: Vec<usize> = (0..assign.labels.len()).collect();
    order.sort_by_key(|&i| assign.provenance[i].line_no);
    for i in order {
        let p = &assign.provenance[i];
        let v = match verdicts[i] {
            Verdict::Normal => "normal",
            Verdict::Abnormal => "abnormal",
        };
        writeln!(
            out,
            "{},{},{},{},{v}",
            p.line_no, p.graph_id, p.node_index, assign.labels[i]
        )?;
    }
    Ok(())
}

/// Rows of `(line_no, cluster, verdict)` from an assignment file.
pub fn read_assignment(text: &str) -> Result<Vec<(usize, usize, Verdict)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || format!("assignment line {}: `{line}`", i + 1);
        if f.len() != 5 {
            return Err(bad());
        }
        let verdict = match f[4] {
            "normal" => Verdict::Normal,
            "abnormal" => Verdict::Abnormal,
            _ => return Err(bad()),
        };
        out.push((
            f[0].parse().map_err(|_| bad())?,
            f[3].parse().map_err(|_| bad())?,
            verdict,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn refs(m: usize) -> Vec<NodeRef> {
        (0..m)
            .map(|i| NodeRef {
                graph_id: 0,
                node_index: i,
                line_no: i + 1,
                label: None,
            })
            .collect()
    }

    #[test]
    fn kernel_closed_forms() {
        let pts = arr2(&[[0.0, 0.0], [0.0, 0.0], [2.0f64.sqrt(), 0.0]]);
        let cfg = SpectralConfig {
            sigma: Some(1.0),
            knn: 2,
            ..SpectralConfig::default()
        };
        let s = similarity(&pts, &cfg).unwrap().s;
        assert_eq!(s.get(0, 1), 1.0);
        assert!((s.get(0, 2) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(s.get(0, 0), 0.0);
    }

    #[test]
    fn identical_rows_are_degenerate() {
        let pts = Array2::ones((4, 3));
        assert!(matches!(
            similarity(&pts, &SpectralConfig::default()),
            Err(ClusterError::DegenerateEmbedding(4))
        ));
    }

    #[test]
    fn laplacian_small_cases() {
        let zero = SparseSym {
            rows: vec![Vec::new(); 3],
        };
        assert_eq!(laplacian(&zero).to_dense(), Array2::<f64>::eye(3));
        let pair = SparseSym {
            rows: vec![vec![(1, 1.0)], vec![(0, 1.0)]],
        };
        assert_eq!(
            laplacian(&pair).to_dense(),
            arr2(&[[1.0, -1.0], [-1.0, 1.0]])
        );
    }

    #[test]
    fn path_laplacian_spectrum() {
        let l = arr2(&[[1.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]]);
        let (vals, _) = jacobi_eigen(&l).unwrap();
        for (v, want) in vals.iter().zip([0.0, 1.0, 3.0]) {
            assert!((v - want).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let (vals, _) = jacobi_eigen(&Array2::eye(5)).unwrap();
        assert!(vals.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn kmeans_separable_and_degenerate() {
        let mut pts = Array2::zeros((10, 2));
        for i in 5..10 {
            pts[[i, 0]] = 10.0;
            pts[[i, 1]] = 10.0;
        }
        let r = kmeans(&pts, &SpectralConfig::default()).unwrap();
        assert!(r.labels[..5].iter().all(|&l| l == r.labels[0]));
        assert!(r.labels[5..].iter().all(|&l| l == r.labels[5]));
        assert_ne!(r.labels[0], r.labels[5]);

        let same = Array2::ones((6, 2));
        let a = kmeans(&same, &SpectralConfig::default()).unwrap();
        let b = kmeans(&same, &SpectralConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.labels.contains(&0) && a.labels.contains(&1));
    }

    #[test]
    fn verdicts_follow_cluster_size() {
        let assign = |sizes: [usize; 2]| ClusterAssignment {
            k: 2,
            labels: std::iter::repeat_n(0, sizes[0])
                .chain(std::iter::repeat_n(1, sizes[1]))
                .collect(),
            provenance: refs(sizes[0] + sizes[1]),
        };
        let v = label_anomalies(&assign([11101, 204]));
        assert_eq!(v[11101], Verdict::Abnormal);
        assert_eq!(v[0], Verdict::Normal);
        let v = label_anomalies(&assign([791, 9309]));
        assert_eq!(v.iter().filter(|&&x| x == Verdict::Abnormal).count(), 791);
        let v = label_anomalies(&assign([5, 5]));
        assert_eq!(v[0], Verdict::Normal);
        assert_eq!(v[5], Verdict::Abnormal);
    }

    #[test]
    fn assignment_csv_round_trip() {
        let a = ClusterAssignment {
            k: 2,
            labels: vec![1, 0, 0],
            provenance: refs(3),
        };
        let v = label_anomalies(&a);
        let mut buf = Vec::new();
        write_assignment(&mut buf, &a, &v).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("line_no,graph_id,node_index,cluster,verdict\n1,0,0,1,abnormal"));
        let back = read_assignment(&text).unwrap();
        assert_eq!(back[1], (2, 0, Verdict::Normal));
    }
}
