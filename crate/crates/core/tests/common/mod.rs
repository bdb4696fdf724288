#![allow(dead_code)]

use logloom::autoencoder::NodeRef;
use logloom::graph::{GraphNode, WindowGraph};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_graph(n: usize, dim: usize, seed: u64) -> WindowGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = Array2::from_shape_fn((n, dim), |_| rng.random_range(-1.0..1.0));
    let mut adjacency = Array2::zeros((n, n));
    let mut weights = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || rng.random_bool(0.3) {
                let w = rng.random_range(0.1..2.0);
                adjacency[[i, j]] = 1.0;
                adjacency[[j, i]] = 1.0;
                weights[[i, j]] = w;
                weights[[j, i]] = w;
            }
        }
    }
    WindowGraph {
        graph_id: seed as usize,
        nodes: (0..n)
            .map(|i| GraphNode {
                node_index: i,
                line_no: i + 1,
                template_id: 1,
                label: None,
            })
            .collect(),
        features,
        adjacency,
        weights,
    }
}

pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let v = rng.random_range(-1.0..1.0);
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    a
}

pub fn blobs(sizes: &[usize], centers: &[[f64; 2]], spread: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total: usize = sizes.iter().sum();
    let mut pts = Array2::zeros((total, 2));
    let mut row = 0;
    for (&n, c) in sizes.iter().zip(centers) {
        for _ in 0..n {
            pts[[row, 0]] = c[0] + rng.random_range(-spread..spread);
            pts[[row, 1]] = c[1] + rng.random_range(-spread..spread);
            row += 1;
        }
    }
    pts
}

pub fn refs(m: usize) -> Vec<NodeRef> {
    (0..m)
        .map(|i| NodeRef {
            graph_id: i / 10,
            node_index: i % 10,
            line_no: i + 1,
            label: None,
        })
        .collect()
}

pub fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Eigenvalues of a symmetric 3x3 matrix from the trigonometric solution of
/// its characteristic cubic.
pub fn cubic_roots(a: &Array2<f64>) -> [f64; 3] {
    let p1 = a[[0, 1]].powi(2) + a[[0, 2]].powi(2) + a[[1, 2]].powi(2);
    let q = (a[[0, 0]] + a[[1, 1]] + a[[2, 2]]) / 3.0;
    let p2 = (a[[0, 0]] - q).powi(2) + (a[[1, 1]] - q).powi(2) + (a[[2, 2]] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (a - &(Array2::<f64>::eye(3) * q)) / p;
    let det = b[[0, 0]] * (b[[1, 1]] * b[[2, 2]] - b[[1, 2]] * b[[2, 1]])
        - b[[0, 1]] * (b[[1, 0]] * b[[2, 2]] - b[[1, 2]] * b[[2, 0]])
        + b[[0, 2]] * (b[[1, 0]] * b[[2, 1]] - b[[1, 1]] * b[[2, 0]]);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let mut r = [lo, 3.0 * q - hi - lo, hi];
    r.sort_by(f64::total_cmp);
    r
}

pub struct Instance {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub k: usize,
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(2..=4);
    let d = rng.random_range(1..=5);
    let n = rng.random_range(k + 2..=40);
    // every cluster gets at least one point, the rest are random
    let mut labels: Vec<usize> = (0..n)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    labels.rotate_left(rng.random_range(0..n));
    let points = labels
        .iter()
        .map(|&l| {
            (0..d)
                .map(|_| l as f64 * 2.0 + rng.random_range(-1.5..1.5))
                .collect()
        })
        .collect();
    Instance { points, labels, k }
}

pub fn array(points: &[Vec<f64>]) -> Array2<f64> {
    Array2::from_shape_fn((points.len(), points[0].len()), |(i, j)| points[i][j])
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn mean_of(points: &[&Vec<f64>]) -> Vec<f64> {
    let d = points[0].len();
    (0..d)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / points.len() as f64)
        .collect()
}

pub fn members(inst: &Instance, c: usize) -> Vec<&Vec<f64>> {
    inst.points
        .iter()
        .zip(&inst.labels)
        .filter(|(_, &l)| l == c)
        .map(|(p, _)| p)
        .collect()
}

pub fn brute_silhouette(inst: &Instance) -> f64 {
    let mut total = 0.0;
    for (i, p) in inst.points.iter().enumerate() {
        let own = inst.labels[i];
        let mates: Vec<f64> = inst
            .points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i && inst.labels[j] == own)
            .map(|(_, q)| euclid(p, q))
            .collect();
        if mates.is_empty() {
            continue;
        }
        let a = mates.iter().sum::<f64>() / mates.len() as f64;
        let b = (0..inst.k)
            .filter(|&c| c != own)
            .map(|c| {
                let m = members(inst, c);
                m.iter().map(|q| euclid(p, q)).sum::<f64>() / m.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        total += (b - a) / a.max(b);
    }
    total / inst.points.len() as f64
}

pub fn brute_db(inst: &Instance) -> f64 {
    let cents: Vec<Vec<f64>> = (0..inst.k).map(|c| mean_of(&members(inst, c))).collect();
    let scatter: Vec<f64> = (0..inst.k)
        .map(|c| {
            let m = members(inst, c);
            (m.iter().map(|p| euclid(p, &cents[c]).powi(2)).sum::<f64>() / m.len() as f64).sqrt()
        })
        .collect();
    (0..inst.k)
        .map(|i| {
            (0..inst.k)
                .filter(|&j| j != i)
                .map(|j| (scatter[i] + scatter[j]) / euclid(&cents[i], &cents[j]))
                .fold(0.0, f64::max)
        })
        .sum::<f64>()
        / inst.k as f64
}

pub fn brute_ch(inst: &Instance) -> f64 {
    let all: Vec<&Vec<f64>> = inst.points.iter().collect();
    let overall = mean_of(&all);
    let (mut b, mut w) = (0.0, 0.0);
    for c in 0..inst.k {
        let m = members(inst, c);
        let cent = mean_of(&m);
        b += m.len() as f64 * euclid(&cent, &overall).powi(2);
        w += m.iter().map(|p| euclid(p, &cent).powi(2)).sum::<f64>();
    }
    let n = inst.points.len() as f64;
    let k = inst.k as f64;
    (b / (k - 1.0)) / (w / (n - k))
}
