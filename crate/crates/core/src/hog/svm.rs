use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{HogDescriptor, HogError, DESCRIPTOR_LEN};

/// Linear decision function `w . x + b` over 64x128 window descriptors.
///
/// Serialized as `{"dim": int, "weights": [...], "bias": real}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct LinearSvmModel {
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    dim: usize,
    weights: Vec<f64>,
    bias: f64,
}

impl TryFrom<ModelRecord> for LinearSvmModel {
    type Error = HogError;

    fn try_from(r: ModelRecord) -> Result<Self, HogError> {
        if r.dim != r.weights.len() {
            return Err(HogError::DimensionMismatch {
                expected: r.dim,
                found: r.weights.len(),
            });
        }
        LinearSvmModel::new(r.weights, r.bias)
    }
}

impl From<LinearSvmModel> for ModelRecord {
    fn from(m: LinearSvmModel) -> Self {
        ModelRecord {
            dim: m.weights.len(),
            weights: m.weights,
            bias: m.bias,
        }
    }
}

impl LinearSvmModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> Result<Self, HogError> {
        if weights.len() != DESCRIPTOR_LEN {
            return Err(HogError::DimensionMismatch {
                expected: DESCRIPTOR_LEN,
                found: weights.len(),
            });
        }
        Ok(Self { weights, bias })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Signed margin `w . x + b`.
    pub fn score(&self, descriptor: &HogDescriptor) -> f64 {
        dot(&self.weights, descriptor.values()) + self.bias
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub epochs: usize,
    pub learning_rate: f64,
    /// L2 penalty `lambda` in `lambda/2 |w|^2 + mean hinge`.
    pub regularization: f64,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            epochs: 50,
            learning_rate: 0.01,
            regularization: 1e-3,
            seed: 0,
        }
    }
}

/// Regularized hinge objective over the full training set (bias unpenalized).
pub fn svm_objective(
    model: &LinearSvmModel,
    positives: &[HogDescriptor],
    negatives: &[HogDescriptor],
    regularization: f64,
) -> f64 {
    let hinge: f64 = labelled(positives, negatives)
        .map(|(x, y)| (1.0 - y * model.score(x)).max(0.0))
        .sum();
    let n = (positives.len() + negatives.len()) as f64;
    0.5 * regularization * dot(&model.weights, &model.weights) + hinge / n
}

fn labelled<'a>(
    positives: &'a [HogDescriptor],
    negatives: &'a [HogDescriptor],
) -> impl Iterator<Item = (&'a HogDescriptor, f64)> {
    positives
        .iter()
        .map(|d| (d, 1.0))
        .chain(negatives.iter().map(|d| (d, -1.0)))
}

/// Stochastic subgradient descent on the L2-regularized hinge loss.
///
/// Examples are visited in a freshly shuffled order each epoch; the shuffle
/// is the only randomness, so equal seeds give bitwise-equal models.
pub fn train_svm(
    positives: &[HogDescriptor],
    negatives: &[HogDescriptor],
    params: &SvmParams,
) -> Result<LinearSvmModel, HogError> {
    if positives.is_empty() {
        return Err(HogError::EmptyClass("positive"));
    }
    if negatives.is_empty() {
        return Err(HogError::EmptyClass("negative"));
    }
    if let Some(bad) = labelled(positives, negatives).find(|(d, _)| d.len() != DESCRIPTOR_LEN) {
        return Err(HogError::DimensionMismatch {
            expected: DESCRIPTOR_LEN,
            found: bad.0.len(),
        });
    }

    let examples: Vec<(&HogDescriptor, f64)> = labelled(positives, negatives).collect();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut weights = vec![0.0; DESCRIPTOR_LEN];
    let mut bias = 0.0;
    let eta = params.learning_rate;
    let shrink = 1.0 - eta * params.regularization;

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, y) = examples[i];
            let margin = y * (dot(&weights, x.values()) + bias);
            weights.iter_mut().for_each(|w| *w *= shrink);
            if margin < 1.0 {
                for (w, v) in weights.iter_mut().zip(x.values()) {
                    *w += eta * y * v;
                }
                bias += eta * y;
            }
        }
    }
    LinearSvmModel::new(weights, bias)
}
