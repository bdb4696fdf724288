//! Internal clustering indices and supervised accuracy.

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::clustering::Verdict;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("metric undefined: {0}")]
    Undefined(String),
    #[error("within-cluster scatter is zero")]
    Infinite,
}

fn dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Sizes of clusters `0..k`; fails unless `k >= 2` and none is empty.
fn cluster_sizes(
    points: &Array2<f64>,
    labels: &[usize],
    k: usize,
) -> Result<Vec<usize>, MetricError> {
    if labels.len() != points.nrows() {
        return Err(MetricError::Undefined(format!(
            "{} labels for {} points",
            labels.len(),
            points.nrows()
        )));
    }
    if k < 2 {
        return Err(MetricError::Undefined("fewer than two clusters".into()));
    }
    let mut sizes = vec![0; k];
    for &l in labels {
        if l >= k {
            return Err(MetricError::Undefined(format!("label {l} outside 0..{k}")));
        }
        sizes[l] += 1;
    }
    if let Some(c) = sizes.iter().position(|&s| s == 0) {
        return Err(MetricError::Undefined(format!("cluster {c} is empty")));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(MetricError::Undefined("non-finite coordinate".into()));
    }
    Ok(sizes)
}

fn centroids(points: &Array2<f64>, labels: &[usize], sizes: &[usize]) -> Array2<f64> {
    let mut c = Array2::zeros((sizes.len(), points.ncols()));
    for (row, &l) in points.rows().into_iter().zip(labels) {
        let mut target = c.row_mut(l);
        target += &row;
    }
    for (mut row, &n) in c.rows_mut().into_iter().zip(sizes) {
        row /= n as f64;
    }
    c
}

/// Mean silhouette width. Members of singleton clusters score 0.
pub fn silhouette(points: &Array2<f64>, labels: &[usize], k: usize) -> Result<f64, MetricError> {
    let sizes = cluster_sizes(points, labels, k)?;
    let m = points.nrows();
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..m {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..m {
            if i != j {
                sums[labels[j]] += dist(points.row(i), points.row(j));
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / m as f64)
}

/// Davies-Bouldin index with Minkowski order `q` for both the scatter and
/// the centroid separation.
pub fn davies_bouldin(
    points: &Array2<f64>,
    labels: &[usize],
    k: usize,
    q: f64,
) -> Result<f64, MetricError> {
    if !(q >= 1.0 && q.is_finite()) {
        return Err(MetricError::Undefined(format!("q must be >= 1, got {q}")));
    }
    let sizes = cluster_sizes(points, labels, k)?;
    let c = centroids(points, labels, &sizes);
    let minkowski = |a: ArrayView1<f64>, b: ArrayView1<f64>| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs().powf(q))
            .sum::<f64>()
            .powf(1.0 / q)
    };
    let mut scatter = vec![0.0; k];
    for (row, &l) in points.rows().into_iter().zip(labels) {
        scatter[l] += dist(row, c.row(l)).powf(q);
    }
    for (s, &n) in scatter.iter_mut().zip(&sizes) {
        *s = (*s / n as f64).powf(1.0 / q);
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst: f64 = 0.0;
        for j in 0..k {
            if i == j {
                continue;
            }
            let sep = minkowski(c.row(i), c.row(j));
            if sep == 0.0 {
                return Err(MetricError::Undefined(format!(
                    "clusters {i} and {j} share a centroid"
                )));
            }
            worst = worst.max((scatter[i] + scatter[j]) / sep);
        }
        total += worst;
    }
    Ok(total / k as f64)
}

/// Calinski-Harabasz variance ratio `tr(B)(N-K) / (tr(W)(K-1))`.
pub fn calinski_harabasz(
    points: &Array2<f64>,
    labels: &[usize],
    k: usize,
) -> Result<f64, MetricError> {
    let sizes = cluster_sizes(points, labels, k)?;
    let n = points.nrows();
    if n <= k {
        return Err(MetricError::Undefined(format!("need more than {k} points")));
    }
    let c = centroids(points, labels, &sizes);
    let overall: Array1<f64> = points.mean_axis(ndarray::Axis(0)).expect("nonempty");
    let between: f64 = c
        .rows()
        .into_iter()
        .zip(&sizes)
        .map(|(row, &s)| s as f64 * dist(row, overall.view()).powi(2))
        .sum();
    let within: f64 = points
        .rows()
        .into_iter()
        .zip(labels)
        .map(|(row, &l)| dist(row, c.row(l)).powi(2))
        .sum();
    if within == 0.0 {
        return Err(MetricError::Infinite);
    }
    Ok(between * (n - k) as f64 / (within * (k - 1) as f64))
}

/// Fraction of labelled lines whose verdict agrees with the label, and the
/// number of lines skipped for want of a label.
pub fn accuracy(verdicts: &[Verdict], labels: &[Option<u8>]) -> Option<(f64, usize)> {
    let mut hits = 0usize;
    let mut seen = 0usize;
    for (v, l) in verdicts.iter().zip(labels) {
        if let Some(l) = l {
            seen += 1;
            if v.as_label() == *l {
                hits += 1;
            }
        }
    }
    let skipped = verdicts.len() - seen;
    (seen > 0).then(|| (hits as f64 / seen as f64, skipped))
}

fn finite_or_tag<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub silhouette: f64,
    pub davies_bouldin: f64,
    /// `+inf` (written as `"inf"`) when every cluster is a single point.
    #[serde(serialize_with = "finite_or_tag")]
    pub calinski_harabasz: f64,
    #[serde(serialize_with = "finite_or_tag")]
    pub log_calinski_harabasz: f64,
    pub accuracy: Option<f64>,
    pub unlabelled: usize,
}

pub fn report(
    points: &Array2<f64>,
    labels: &[usize],
    k: usize,
    q: f64,
    verdicts: &[Verdict],
    truth: &[Option<u8>],
) -> Result<MetricReport, MetricError> {
    let calinski_harabasz = match calinski_harabasz(points, labels, k) {
        Err(MetricError::Infinite) => f64::INFINITY,
        other => other?,
    };
    let acc = accuracy(verdicts, truth);
    Ok(MetricReport {
        silhouette: silhouette(points, labels, k)?,
        davies_bouldin: davies_bouldin(points, labels, k, q)?,
        calinski_harabasz,
        log_calinski_harabasz: calinski_harabasz.ln(),
        accuracy: acc.map(|a| a.0),
        unlabelled: acc.map_or(verdicts.len(), |a| a.1),
    })
}
