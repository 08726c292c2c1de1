//! K-means over item color vectors, followed by soft memberships derived from
//! each item's distance to every center relative to that center's farthest item.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("k must be at least 1")]
    ZeroClusters,
    #[error("k = {k} exceeds the number of points ({points})")]
    TooFewPoints { k: usize, points: usize },
    #[error("points must have at least one dimension")]
    ZeroDimension,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once no center moves farther than this.
    pub tol: f64,
    /// Independent seeded restarts; the lowest final SSE wins.
    pub restarts: usize,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: 100,
            tol: 1e-6,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub centers: Vec<Vec<f64>>,
    /// Squared-error criterion at termination.
    pub sse: f64,
    pub iterations: usize,
    pub seed: u64,
    pub tol: f64,
    /// Point indices used as initial centers by the winning restart.
    pub initial: Vec<usize>,
    /// SSE after each iteration of the winning restart.
    pub sse_history: Vec<f64>,
}

/// Euclidean distance between an item vector and a center.
pub fn counter_similarity(point: &[f64], center: &[f64]) -> Result<f64, ClusterError> {
    if point.len() != center.len() {
        return Err(ClusterError::DimensionMismatch {
            expected: center.len(),
            found: point.len(),
        });
    }
    Ok(squared_distance(point, center).sqrt())
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = squared_distance(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn validate<P: AsRef<[f64]>>(points: &[P], k: usize) -> Result<usize, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if points.len() < k {
        return Err(ClusterError::TooFewPoints {
            k,
            points: points.len(),
        });
    }
    let dim = points[0].as_ref().len();
    if dim == 0 {
        return Err(ClusterError::ZeroDimension);
    }
    if let Some(p) = points.iter().find(|p| p.as_ref().len() != dim) {
        return Err(ClusterError::DimensionMismatch {
            expected: dim,
            found: p.as_ref().len(),
        });
    }
    Ok(dim)
}

pub fn kmeans<P: AsRef<[f64]> + Sync>(points: &[P], params: &KMeansParams) -> Result<ClusterModel, ClusterError> {
    let dim = validate(points, params.k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<ClusterModel> = None;
    for _ in 0..params.restarts.max(1) {
        let initial = rand::seq::index::sample(&mut rng, points.len(), params.k).into_vec();
        let run = lloyd(points, dim, initial, params);
        if best.as_ref().is_none_or(|b| run.sse < b.sse) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd<P: AsRef<[f64]> + Sync>(points: &[P], dim: usize, initial: Vec<usize>, params: &KMeansParams) -> ClusterModel {
    let k = params.k;
    let mut centers: Vec<Vec<f64>> = initial.iter().map(|&i| points[i].as_ref().to_vec()).collect();
    let mut sse_history = Vec::new();
    let mut iterations = 0;

    while iterations < params.max_iter {
        iterations += 1;
        let mut assigned: Vec<(usize, f64)> = points.par_iter().map(|p| nearest(p.as_ref(), &centers)).collect();

        let mut sizes = vec![0usize; k];
        assigned.iter().for_each(|&(c, _)| sizes[c] += 1);
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            // the farthest point among clusters that can spare one
            let donor = assigned
                .iter()
                .enumerate()
                .filter(|(_, (c, _))| sizes[*c] > 1)
                .fold(None, |acc: Option<(usize, f64)>, (i, &(_, d))| match acc {
                    Some((_, best)) if d <= best => acc,
                    _ => Some((i, d)),
                })
                .map(|(i, _)| i)
                .expect("n >= k leaves a cluster with two or more points");
            sizes[assigned[donor].0] -= 1;
            sizes[empty] += 1;
            assigned[donor] = (empty, 0.0);
        }

        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &(c, _)) in points.iter().zip(&assigned) {
            sums[c].iter_mut().zip(p.as_ref()).for_each(|(s, x)| *s += x);
        }
        let mut movement = 0.0f64;
        for (c, sum) in sums.into_iter().enumerate() {
            let n = sizes[c] as f64;
            let updated: Vec<f64> = sum.into_iter().map(|s| s / n).collect();
            movement = movement.max(squared_distance(&updated, &centers[c]).sqrt());
            centers[c] = updated;
        }
        let sse: f64 = points
            .iter()
            .zip(&assigned)
            .map(|(p, &(c, _))| squared_distance(p.as_ref(), &centers[c]))
            .sum();
        sse_history.push(sse);
        if movement < params.tol {
            break;
        }
    }

    ClusterModel {
        k,
        centers,
        sse: sse_history.last().copied().unwrap_or(0.0),
        iterations,
        seed: params.seed,
        tol: params.tol,
        initial,
        sse_history,
    }
}

/// Soft memberships `Pro(j, k) = 1 - CS(j, k) / MaxCS(k)` with the
/// distances that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    pro: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
    max_cs: Vec<f64>,
}

impl MembershipMatrix {
    /// Wraps a precomputed items x clusters table of memberships.
    pub fn from_pro(pro: Vec<Vec<f64>>) -> Option<Self> {
        let k = pro.first().map_or(0, Vec::len);
        if pro.iter().any(|row| row.len() != k || row.iter().any(|p| !(0.0..=1.0).contains(p))) {
            return None;
        }
        Some(Self {
            cs: Vec::new(),
            max_cs: Vec::new(),
            pro,
        })
    }

    pub fn items(&self) -> usize {
        self.pro.len()
    }

    pub fn clusters(&self) -> usize {
        self.pro.first().map_or(0, Vec::len)
    }

    pub fn pro(&self, item: usize, cluster: usize) -> f64 {
        self.pro[item][cluster]
    }

    pub fn row(&self, item: usize) -> &[f64] {
        &self.pro[item]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.pro
    }

    /// Distance from item to center; empty when built with [`Self::from_pro`].
    pub fn counter_similarity(&self, item: usize, cluster: usize) -> Option<f64> {
        self.cs.get(item).map(|row| row[cluster])
    }

    pub fn max_counter_similarity(&self, cluster: usize) -> Option<f64> {
        self.max_cs.get(cluster).copied()
    }
}

/// Computes memberships of every point for every center of `model`.
///
/// When all points sit on a center (`MaxCS = 0`) they all get membership 1.
pub fn membership<P: AsRef<[f64]> + Sync>(points: &[P], model: &ClusterModel) -> Result<MembershipMatrix, ClusterError> {
    if let (Some(p), Some(c)) = (points.first(), model.centers.first()) {
        if p.as_ref().len() != c.len() {
            return Err(ClusterError::DimensionMismatch {
                expected: c.len(),
                found: p.as_ref().len(),
            });
        }
    }
    let cs = points
        .par_iter()
        .map(|p| {
            model
                .centers
                .iter()
                .map(|c| counter_similarity(p.as_ref(), c))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let max_cs: Vec<f64> = (0..model.k)
        .map(|c| cs.iter().map(|row| row[c]).fold(0.0, f64::max))
        .collect();
    let pro = cs
        .iter()
        .map(|row| {
            row.iter()
                .zip(&max_cs)
                .map(|(&d, &max)| if max == 0.0 { 1.0 } else { 1.0 - d / max })
                .collect()
        })
        .collect();
    Ok(MembershipMatrix { pro, cs, max_cs })
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    k: usize,
    seed: u64,
    tol: f64,
    iterations: usize,
    sse: f64,
}

/// Writes centers as headerless CSV (k rows) and run metadata as JSON.
pub fn save_model(model: &ClusterModel, centers_path: impl AsRef<Path>, sidecar_path: impl AsRef<Path>) -> Result<(), ClusterError> {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(centers_path)?;
    for center in &model.centers {
        writer.write_record(center.iter().map(f64::to_string))?;
    }
    writer.flush()?;
    let sidecar = Sidecar {
        k: model.k,
        seed: model.seed,
        tol: model.tol,
        iterations: model.iterations,
        sse: model.sse,
    };
    fs::write(sidecar_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(())
}
