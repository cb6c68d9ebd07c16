use ndarray::{Array2, ArrayView2};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::params::{BoostParams, Task};
use super::tree::{DecisionTree, FeatureMatrix, TreeBuilder, TreeParams};
use crate::error::{Error, Result};

/// Hessians below this are clamped for numerical safety.
const MIN_HESSIAN: f64 = 1e-16;

/// A fitted gradient-boosted tree ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct BoostModel {
    pub task: Task,
    /// One entry for regression, K log-priors for classification.
    pub base_score: Vec<f64>,
    /// Round-major; K consecutive trees per round for classification.
    pub trees: Vec<DecisionTree>,
    pub params: BoostParams,
    pub seed: u64,
    pub n_features: usize,
    /// Training loss before the first round and after each round
    /// (mean squared error or mean log-loss).
    pub train_loss: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Values(Vec<f64>),
    Classes {
        /// n × K, rows sum to one.
        probabilities: Array2<f64>,
        labels: Vec<usize>,
    },
}

impl Prediction {
    /// Regression values, or class codes as floats.
    pub fn point_values(&self) -> Vec<f64> {
        match self {
            Prediction::Values(v) => v.clone(),
            Prediction::Classes { labels, .. } => labels.iter().map(|&c| c as f64).collect(),
        }
    }
}

/// Mean written as `first + mean(y - first)`, exact for constant inputs.
fn stable_mean(y: &[f64]) -> f64 {
    let first = y[0];
    first + y.iter().map(|v| v - first).sum::<f64>() / y.len() as f64
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Negative log-likelihood of `label` under softmax(logits).
pub fn softmax_log_loss(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

/// Gradient `p - onehot` and diagonal Hessian `p(1 - p)` of the log-loss.
pub fn softmax_grad_hess(logits: &[f64], label: usize) -> (Vec<f64>, Vec<f64>) {
    let p = softmax(logits);
    let grad = p
        .iter()
        .enumerate()
        .map(|(k, &pk)| pk - if k == label { 1.0 } else { 0.0 })
        .collect();
    let hess = p.iter().map(|&pk| pk * (1.0 - pk)).collect();
    (grad, hess)
}

fn check_matrix(x: ArrayView2<f64>, n_targets: usize) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::InvalidData("empty training matrix".into()));
    }
    if x.nrows() != n_targets {
        return Err(Error::Shape(format!("{} rows but {} targets", x.nrows(), n_targets)));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("training matrix contains non-finite values".into()));
    }
    Ok(())
}

struct RoundSampler {
    rng: ChaCha8Rng,
    n_rows: usize,
    n_features: usize,
    row_count: usize,
    feature_count: usize,
}

impl RoundSampler {
    fn new(params: &BoostParams, n_rows: usize, n_features: usize, seed: u64) -> Self {
        let row_count = ((params.row_subsample * n_rows as f64).round() as usize).clamp(1, n_rows);
        let feature_count = if n_features == 0 {
            0
        } else {
            ((params.column_subsample * n_features as f64).round() as usize).clamp(1, n_features)
        };
        RoundSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            n_rows,
            n_features,
            row_count,
            feature_count,
        }
    }

    fn rows(&mut self) -> Vec<u32> {
        if self.row_count == self.n_rows {
            return (0..self.n_rows as u32).collect();
        }
        let mut rows: Vec<u32> = sample(&mut self.rng, self.n_rows, self.row_count)
            .into_iter()
            .map(|r| r as u32)
            .collect();
        rows.sort_unstable();
        rows
    }

    fn features(&mut self) -> Vec<usize> {
        if self.feature_count == self.n_features {
            return (0..self.n_features).collect();
        }
        let mut f = sample(&mut self.rng, self.n_features, self.feature_count).into_vec();
        f.sort_unstable();
        f
    }
}

fn tree_params(p: &BoostParams) -> TreeParams {
    TreeParams {
        max_depth: p.max_depth,
        min_samples_leaf: p.min_samples_leaf,
        l2_leaf: p.l2_leaf,
    }
}

/// Squared-error boosting.
pub fn fit_regressor(x: ArrayView2<f64>, y: &[f64], params: &BoostParams, seed: u64) -> Result<BoostModel> {
    params.validate()?;
    check_matrix(x, y.len())?;
    if y.len() < 2 {
        return Err(Error::InvalidData("need at least two training rows".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidData("target contains non-finite values".into()));
    }
    let n = y.len();
    let data = FeatureMatrix::new(x);
    let base = stable_mean(y);
    let mut pred = vec![base; n];
    let mse = |pred: &[f64]| pred.iter().zip(y).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n as f64;
    let mut train_loss = vec![mse(&pred)];
    let hess = vec![1.0; n];
    let mut grad = vec![0.0; n];
    let mut sampler = RoundSampler::new(params, n, data.n_features(), seed);
    let mut trees = Vec::with_capacity(params.n_trees);

    for _ in 0..params.n_trees {
        for i in 0..n {
            grad[i] = pred[i] - y[i];
        }
        let rows = sampler.rows();
        let features = sampler.features();
        let tree = TreeBuilder::new(&data, &grad, &hess, tree_params(params), features).build(&rows);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += params.learning_rate * tree.predict_with(|f| data.value(i, f));
        }
        trees.push(tree);
        train_loss.push(mse(&pred));
    }

    Ok(BoostModel {
        task: Task::Regression,
        base_score: vec![base],
        trees,
        params: *params,
        seed,
        n_features: data.n_features(),
        train_loss,
    })
}

/// Softmax boosting with one tree per class and round.
///
/// `labels` are codes in `0..n_classes`; every class must occur.
pub fn fit_classifier(
    x: ArrayView2<f64>,
    labels: &[usize],
    n_classes: usize,
    params: &BoostParams,
    seed: u64,
) -> Result<BoostModel> {
    params.validate()?;
    check_matrix(x, labels.len())?;
    if n_classes < 2 {
        return Err(Error::InvalidData(format!("need at least two classes, got {n_classes}")));
    }
    if let Some(&bad) = labels.iter().find(|&&c| c >= n_classes) {
        return Err(Error::InvalidData(format!("label {bad} outside 0..{n_classes}")));
    }
    let mut counts = vec![0usize; n_classes];
    for &c in labels {
        counts[c] += 1;
    }
    let absent: Vec<usize> = (0..n_classes).filter(|&k| counts[k] == 0).collect();
    if !absent.is_empty() {
        return Err(Error::MissingClasses(absent));
    }

    let n = labels.len();
    let k = n_classes;
    let data = FeatureMatrix::new(x);
    let base: Vec<f64> = counts.iter().map(|&c| (c as f64 / n as f64).ln()).collect();
    let mut logits: Vec<Vec<f64>> = vec![base.clone(); n];
    let log_loss = |logits: &[Vec<f64>]| {
        logits
            .iter()
            .zip(labels)
            .map(|(l, &c)| softmax_log_loss(l, c))
            .sum::<f64>()
            / n as f64
    };
    let mut train_loss = vec![log_loss(&logits)];
    let mut sampler = RoundSampler::new(params, n, data.n_features(), seed);
    let mut trees = Vec::with_capacity(params.n_trees * k);
    let mut grad = vec![vec![0.0; n]; k];
    let mut hess = vec![vec![0.0; n]; k];

    for _ in 0..params.n_trees {
        for i in 0..n {
            let (g, h) = softmax_grad_hess(&logits[i], labels[i]);
            for c in 0..k {
                grad[c][i] = g[c];
                hess[c][i] = h[c].max(MIN_HESSIAN);
            }
        }
        let rows = sampler.rows();
        let mut round = Vec::with_capacity(k);
        for c in 0..k {
            let features = sampler.features();
            round.push(TreeBuilder::new(&data, &grad[c], &hess[c], tree_params(params), features).build(&rows));
        }
        for (i, l) in logits.iter_mut().enumerate() {
            for (c, tree) in round.iter().enumerate() {
                l[c] += params.learning_rate * tree.predict_with(|f| data.value(i, f));
            }
        }
        trees.extend(round);
        train_loss.push(log_loss(&logits));
    }

    Ok(BoostModel {
        task: Task::Classification(k),
        base_score: base,
        trees,
        params: *params,
        seed,
        n_features: data.n_features(),
        train_loss,
    })
}

impl BoostModel {
    /// Raw scores: one column for regression, K logits for classification.
    pub fn raw_scores(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features {
            return Err(Error::Shape(format!(
                "model expects {} features, got {}",
                self.n_features,
                x.ncols()
            )));
        }
        let k = self.base_score.len();
        let lr = self.params.learning_rate;
        let mut out = Array2::<f64>::zeros((x.nrows(), k));
        for (i, row) in x.rows().into_iter().enumerate() {
            let mut acc = self.base_score.clone();
            for (t, tree) in self.trees.iter().enumerate() {
                acc[t % k] += lr * tree.predict_with(|f| row[f]);
            }
            for c in 0..k {
                out[[i, c]] = acc[c];
            }
        }
        Ok(out)
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Prediction> {
        let raw = self.raw_scores(x)?;
        match self.task {
            Task::Regression => Ok(Prediction::Values(raw.column(0).to_vec())),
            Task::Classification(k) => {
                let mut probabilities = Array2::<f64>::zeros((raw.nrows(), k));
                let mut labels = Vec::with_capacity(raw.nrows());
                for (i, row) in raw.rows().into_iter().enumerate() {
                    let p = softmax(row.as_slice().expect("row-major scores"));
                    labels.push(argmax(&p));
                    for c in 0..k {
                        probabilities[[i, c]] = p[c];
                    }
                }
                Ok(Prediction::Classes { probabilities, labels })
            }
        }
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
