//! Seeded random search over boosting parameters.
//!
//! Each trial is scored on a held-out 20% split by its validation loss plus
//! the amount by which validation loss exceeds training loss, which
//! penalizes configurations that overfit.

use ndarray::{ArrayView2, Axis};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::model::{fit_classifier, fit_regressor, BoostModel, Prediction};
use super::params::{BoostParams, Task, ROW_SUBSAMPLE};
use crate::error::{Error, Result};

pub const MIN_TRIALS: usize = 5;
pub const MAX_TRIALS: usize = 50;
const VALIDATION_SHARE: f64 = 0.2;
const MIN_LEAF_CHOICES: [usize; 4] = [1, 5, 10, 20];

/// Training target for one column.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Values(&'a [f64]),
    Classes { labels: &'a [usize], n_classes: usize },
}

impl Target<'_> {
    pub fn len(&self) -> usize {
        match self {
            Target::Values(v) => v.len(),
            Target::Classes { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn task(&self) -> Task {
        match self {
            Target::Values(_) => Task::Regression,
            Target::Classes { n_classes, .. } => Task::Classification(*n_classes),
        }
    }
}

/// Fit a regressor or classifier depending on the target.
pub fn fit(x: ArrayView2<f64>, target: Target<'_>, params: &BoostParams, seed: u64) -> Result<BoostModel> {
    match target {
        Target::Values(y) => fit_regressor(x, y, params, seed),
        Target::Classes { labels, n_classes } => fit_classifier(x, labels, n_classes, params, seed),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trial {
    pub params: BoostParams,
    pub train_loss: f64,
    pub val_loss: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub best: BoostParams,
    pub best_trial: usize,
    pub trials: Vec<Trial>,
}

/// Draw one candidate configuration.
pub fn sample_params(rng: &mut impl Rng) -> BoostParams {
    let log_uniform = |rng: &mut dyn rand::RngCore, lo: f64, hi: f64| {
        let u: f64 = rng.random();
        (lo.ln() + u * (hi.ln() - lo.ln())).exp()
    };
    let learning_rate = log_uniform(rng, 0.01, 0.3);
    let max_depth = rng.random_range(2..=8);
    let n_trees = rng.random_range(50..=300);
    let min_samples_leaf = *MIN_LEAF_CHOICES.choose(rng).expect("non-empty");
    let l2_leaf = log_uniform(rng, 0.1, 10.0);
    BoostParams {
        n_trees,
        learning_rate,
        max_depth,
        min_samples_leaf,
        row_subsample: ROW_SUBSAMPLE,
        column_subsample: 1.0,
        l2_leaf,
    }
}

/// Index of the smallest objective; NaN never wins, ties go to the earliest.
pub fn select_best(objectives: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &o) in objectives.iter().enumerate() {
        if o.is_nan() {
            continue;
        }
        if best.is_none_or(|b| o < objectives[b]) {
            best = Some(i);
        }
    }
    best
}

/// Seeded 80/20 split; classification splits per class so every class
/// stays in the training part.
pub fn holdout_split(target: Target<'_>, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = target.len();
    let groups: Vec<Vec<usize>> = match target {
        Target::Values(_) => vec![(0..n).collect()],
        Target::Classes { labels, n_classes } => {
            let mut g = vec![Vec::new(); n_classes];
            for (i, &c) in labels.iter().enumerate() {
                g[c].push(i);
            }
            g
        }
    };
    let mut train = Vec::new();
    let mut val = Vec::new();
    for mut group in groups {
        if group.is_empty() {
            continue;
        }
        group.shuffle(&mut rng);
        let n_val = ((group.len() as f64) * VALIDATION_SHARE).round() as usize;
        let n_val = n_val.min(group.len() - 1);
        val.extend_from_slice(&group[..n_val]);
        train.extend_from_slice(&group[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn subset(target: Target<'_>, idx: &[usize]) -> OwnedTarget {
    match target {
        Target::Values(y) => OwnedTarget::Values(idx.iter().map(|&i| y[i]).collect()),
        Target::Classes { labels, n_classes } => OwnedTarget::Classes(idx.iter().map(|&i| labels[i]).collect(), n_classes),
    }
}

enum OwnedTarget {
    Values(Vec<f64>),
    Classes(Vec<usize>, usize),
}

impl OwnedTarget {
    fn view(&self) -> Target<'_> {
        match self {
            OwnedTarget::Values(v) => Target::Values(v),
            OwnedTarget::Classes(l, k) => Target::Classes { labels: l, n_classes: *k },
        }
    }
}

/// Mean squared error or mean log-loss of a model on a labelled set.
pub fn evaluate_loss(model: &BoostModel, x: ArrayView2<f64>, target: Target<'_>) -> Result<f64> {
    let n = target.len().max(1) as f64;
    match (model.predict(x)?, target) {
        (Prediction::Values(p), Target::Values(y)) => {
            Ok(p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / n)
        }
        (Prediction::Classes { probabilities, .. }, Target::Classes { labels, .. }) => Ok(labels
            .iter()
            .enumerate()
            .map(|(i, &c)| -probabilities[[i, c]].max(1e-15).ln())
            .sum::<f64>()
            / n),
        _ => Err(Error::InvalidData("target does not match model task".into())),
    }
}

/// Run `n_trials` random trials and return the best configuration.
pub fn search_params(x: ArrayView2<f64>, target: Target<'_>, n_trials: usize, seed: u64) -> Result<BoostParams> {
    run_search(x, target, n_trials, seed).map(|o| o.best)
}

pub fn run_search(x: ArrayView2<f64>, target: Target<'_>, n_trials: usize, seed: u64) -> Result<SearchOutcome> {
    if !(MIN_TRIALS..=MAX_TRIALS).contains(&n_trials) {
        return Err(Error::range("search_trials", n_trials, format!("{MIN_TRIALS}..={MAX_TRIALS}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates: Vec<BoostParams> = (0..n_trials).map(|_| sample_params(&mut rng)).collect();

    let (train_idx, mut val_idx) = holdout_split(target, seed ^ 0x5eed);
    if val_idx.is_empty() {
        val_idx = train_idx.clone();
    }
    let x_train = x.select(Axis(0), &train_idx);
    let x_val = x.select(Axis(0), &val_idx);
    let y_train = subset(target, &train_idx);
    let y_val = subset(target, &val_idx);

    let trials = candidates
        .par_iter()
        .enumerate()
        .map(|(t, params)| {
            let model = fit(x_train.view(), y_train.view(), params, seed.wrapping_add(t as u64 + 1))?;
            let train_loss = evaluate_loss(&model, x_train.view(), y_train.view())?;
            let val_loss = evaluate_loss(&model, x_val.view(), y_val.view())?;
            Ok(Trial {
                params: *params,
                train_loss,
                val_loss,
                objective: val_loss + (val_loss - train_loss).max(0.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let objectives: Vec<f64> = trials.iter().map(|t| t.objective).collect();
    let best_trial = select_best(&objectives).unwrap_or(0);
    Ok(SearchOutcome {
        best: trials[best_trial].params,
        best_trial,
        trials,
    })
}
