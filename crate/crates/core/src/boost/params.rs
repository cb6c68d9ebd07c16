use serde::Serialize;

use crate::error::{Error, Result};

/// What a model predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Task {
    Regression,
    /// K-class classification.
    Classification(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoostParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub row_subsample: f64,
    pub column_subsample: f64,
    pub l2_leaf: f64,
}

/// Row share drawn for every boosting round.
pub const ROW_SUBSAMPLE: f64 = 0.7;

/// Below this many samples trees are capped at depth 3.
pub const SMALL_SAMPLE: usize = 100;

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_trees: 100,
            learning_rate: 0.3,
            max_depth: 6,
            min_samples_leaf: 1,
            row_subsample: ROW_SUBSAMPLE,
            column_subsample: 1.0,
            l2_leaf: 1.0,
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::range("n_trees", self.n_trees, ">= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::range("learning_rate", self.learning_rate, "> 0"));
        }
        if self.max_depth == 0 {
            return Err(Error::range("max_depth", self.max_depth, ">= 1"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::range("min_samples_leaf", self.min_samples_leaf, ">= 1"));
        }
        if !(self.row_subsample > 0.0 && self.row_subsample <= 1.0) {
            return Err(Error::range("row_subsample", self.row_subsample, "(0, 1]"));
        }
        if !(self.column_subsample > 0.0 && self.column_subsample <= 1.0) {
            return Err(Error::range("column_subsample", self.column_subsample, "(0, 1]"));
        }
        if !(self.l2_leaf >= 0.0 && self.l2_leaf.is_finite()) {
            return Err(Error::range("l2_leaf", self.l2_leaf, ">= 0"));
        }
        Ok(())
    }
}

/// Out-of-the-box parameters, with shallower trees on small samples.
pub fn default_params(_task: Task, n_samples: usize, _n_features: usize) -> BoostParams {
    let mut p = BoostParams::default();
    if n_samples < SMALL_SAMPLE {
        p.max_depth = 3;
    }
    p
}
