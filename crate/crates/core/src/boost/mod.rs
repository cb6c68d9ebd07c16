//! Gradient-boosted decision trees for regression and K-class classification.

mod model;
mod params;
mod search;
mod tree;

pub use model::{
    argmax, fit_classifier, fit_regressor, softmax, softmax_grad_hess, softmax_log_loss, BoostModel, Prediction,
};
pub use params::{default_params, BoostParams, Task, ROW_SUBSAMPLE, SMALL_SAMPLE};
pub use search::{
    evaluate_loss, fit, holdout_split, run_search, sample_params, search_params, select_best, SearchOutcome, Target,
    Trial, MAX_TRIALS, MIN_TRIALS,
};
pub use tree::{DecisionTree, FeatureMatrix, Node, TreeBuilder, TreeParams, LOOKAHEAD_ROWS};
