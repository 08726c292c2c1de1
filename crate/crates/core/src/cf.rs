//! Item-neighbourhood collaborative filtering over the extended matrix.
//!
//! Similarities are between items. Pearson correlation is taken over the user
//! columns, adjusted cosine over the group columns, and the two are blended
//! linearly. Predictions are the target item's mean plus the similarity-
//! weighted average of the user's deviations on the nearest rated neighbours.

use std::cmp::Ordering;

use rayon::prelude::*;
use thiserror::Error;

use crate::ratings::ExtendedMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum CfError {
    #[error("item {0} has no user ratings")]
    ColdItem(String),
    #[error("unknown item index {0}")]
    UnknownItem(usize),
    #[error("unknown user index {0}")]
    UnknownUser(usize),
    #[error("combination weight {0} is outside [0, 1]")]
    BadWeight(f64),
}

/// Pearson correlation of two items over users who rated both.
///
/// Returns 0 with fewer than two co-raters or when either side is constant.
pub fn pearson_sim(a: usize, b: usize, matrix: &ExtendedMatrix) -> f64 {
    let ratings = matrix.ratings();
    let (ra, rb) = (ratings.item_ratings(a), ratings.item_ratings(b));
    let pairs: Vec<(f64, f64)> = ra
        .iter()
        .filter_map(|(u, &x)| rb.get(u).map(|&y| (x, y)))
        .collect();
    if pairs.len() < 2 {
        return 0.0;
    }
    let n = pairs.len() as f64;
    let mean_a = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_b = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut cov, mut var_a, mut var_b) = (0.0, 0.0, 0.0);
    for &(x, y) in &pairs {
        let (dx, dy) = (x - mean_a, y - mean_b);
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return 0.0;
    }
    (cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0)
}

/// Group columns with each column's mean over all items subtracted.
fn centered_groups(matrix: &ExtendedMatrix) -> Vec<Vec<f64>> {
    let n = matrix.ratings().n_items();
    let k = matrix.n_groups();
    if k == 0 || n == 0 {
        return vec![Vec::new(); n];
    }
    let mut means = vec![0.0; k];
    for i in 0..n {
        means.iter_mut().zip(matrix.group_row(i)).for_each(|(m, v)| *m += v);
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    (0..n)
        .map(|i| matrix.group_row(i).iter().zip(&means).map(|(v, m)| v - m).collect())
        .collect()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb).sqrt()).clamp(-1.0, 1.0)
}

/// Adjusted cosine of two items over the group columns; 0 without groups
/// or when either centered row is zero.
pub fn adjusted_cosine_sim(a: usize, b: usize, matrix: &ExtendedMatrix) -> f64 {
    let centered = centered_groups(matrix);
    cosine(&centered[a], &centered[b])
}

/// `w * pearson + (1 - w) * adjusted_cosine`.
pub fn combined_sim(a: usize, b: usize, weight: f64, matrix: &ExtendedMatrix) -> Result<f64, CfError> {
    check_weight(weight)?;
    Ok(blend(weight, pearson_sim(a, b, matrix), adjusted_cosine_sim(a, b, matrix)))
}

fn check_weight(weight: f64) -> Result<(), CfError> {
    if (0.0..=1.0).contains(&weight) {
        Ok(())
    } else {
        Err(CfError::BadWeight(weight))
    }
}

fn blend(weight: f64, pearson: f64, cosine: f64) -> f64 {
    weight * pearson + (1.0 - weight) * cosine
}

/// Symmetric item x item similarities with a unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn n_items(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.values[a * self.n..(a + 1) * self.n]
    }

    /// Builds the matrix from the upper triangle of `sim`; values are clamped to `[-1, 1]`.
    pub fn from_fn(n: usize, sim: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let upper: Vec<f64> = pairs.par_iter().map(|&(a, b)| sim(a, b).clamp(-1.0, 1.0)).collect();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = 1.0;
        }
        for (&(a, b), &s) in pairs.iter().zip(&upper) {
            values[a * n + b] = s;
            values[b * n + a] = s;
        }
        Self { n, values }
    }
}

/// All pairwise combined similarities of the matrix's items.
pub fn similarity_matrix(matrix: &ExtendedMatrix, weight: f64) -> Result<SimilarityMatrix, CfError> {
    check_weight(weight)?;
    let centered = centered_groups(matrix);
    Ok(SimilarityMatrix::from_fn(matrix.ratings().n_items(), |a, b| {
        blend(weight, pearson_sim(a, b, matrix), cosine(&centered[a], &centered[b]))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborOptions {
    /// Maximum number of neighbours (`N`).
    pub neighbors: usize,
    /// Drop neighbours whose similarity is not positive.
    pub exclude_negative: bool,
}

impl NeighborOptions {
    pub fn new(neighbors: usize) -> Self {
        Self {
            neighbors,
            exclude_negative: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub user_id: String,
    pub item_id: String,
    /// Clamped to the rating scale.
    pub value: f64,
    pub neighbor_count: usize,
}

/// Predicted rating of `item` by `user` using precomputed similarities.
pub fn predict(
    item: usize,
    user: usize,
    sims: &SimilarityMatrix,
    options: &NeighborOptions,
    matrix: &ExtendedMatrix,
) -> Result<Prediction, CfError> {
    predict_with(item, user, |a, b| sims.get(a, b), options, matrix)
}

/// As [`predict`], with similarities supplied by a function.
pub fn predict_with(
    item: usize,
    user: usize,
    sim: impl Fn(usize, usize) -> f64,
    options: &NeighborOptions,
    matrix: &ExtendedMatrix,
) -> Result<Prediction, CfError> {
    let ratings = matrix.ratings();
    if item >= ratings.n_items() {
        return Err(CfError::UnknownItem(item));
    }
    if user >= ratings.n_users() {
        return Err(CfError::UnknownUser(user));
    }
    let item_mean = ratings
        .item_mean(item)
        .ok_or_else(|| CfError::ColdItem(ratings.item_ids()[item].clone()))?;

    let mut candidates: Vec<(usize, f64, f64)> = ratings
        .user_ratings(user)
        .iter()
        .filter(|(&u, _)| u != item)
        .map(|(&u, &r)| (u, r, sim(item, u)))
        .filter(|&(_, _, s)| !options.exclude_negative || s > 0.0)
        .collect();
    candidates.sort_by(|a, b| b.2.abs().total_cmp(&a.2.abs()).then(a.0.cmp(&b.0)));
    candidates.truncate(options.neighbors);

    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for &(u, r, s) in &candidates {
        let neighbor_mean = ratings.item_mean(u).expect("neighbour is rated by the user");
        numerator += (r - neighbor_mean) * s;
        denominator += s.abs();
    }
    let raw = if denominator == 0.0 {
        item_mean
    } else {
        item_mean + numerator / denominator
    };
    Ok(Prediction {
        user_id: ratings.user_ids()[user].clone(),
        item_id: ratings.item_ids()[item].clone(),
        value: ratings.scale().clamp(raw),
        neighbor_count: candidates.len(),
    })
}

/// Top `count` predictions over the items `user` has not rated.
///
/// Cold items (no ratings at all) cannot be predicted and are skipped. Ties
/// in predicted value are broken by item id.
pub fn recommend(
    user: usize,
    count: usize,
    sims: &SimilarityMatrix,
    options: &NeighborOptions,
    matrix: &ExtendedMatrix,
) -> Result<Vec<Prediction>, CfError> {
    let ratings = matrix.ratings();
    if user >= ratings.n_users() {
        return Err(CfError::UnknownUser(user));
    }
    let rated = ratings.user_ratings(user);
    let mut predictions = Vec::new();
    for item in (0..ratings.n_items()).filter(|i| !rated.contains_key(i)) {
        match predict(item, user, sims, options, matrix) {
            Ok(p) => predictions.push(p),
            Err(CfError::ColdItem(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    predictions.sort_by(|a, b| match b.value.total_cmp(&a.value) {
        Ordering::Equal => a.item_id.cmp(&b.item_id),
        other => other,
    });
    predictions.truncate(count);
    Ok(predictions)
}
