use serde::Serialize;

use crate::error::{Error, Result};
use crate::preprocess::PreImputeStrategy;

pub const ENSEMBLE_RANGE: (usize, usize) = (3, 9);
pub const SEARCH_TRIALS_RANGE: (usize, usize) = (5, 50);
pub const ITERATIONS_RANGE: (usize, usize) = (1, 9);

/// Run configuration for [`xpute`](super::xpute).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImputeConfig {
    /// Treat exact zeros as missing.
    pub impute_zeros: bool,
    pub pre_imputation: PreImputeStrategy,
    /// Boosted models averaged per column, 3..=9.
    pub ensemble_size: usize,
    /// Train on the factorization output spliced into the gaps only.
    pub mf_nan_replace: bool,
    /// Train on the full factorization reconstruction.
    pub use_full_transform: bool,
    pub search_enabled: bool,
    /// 5..=50.
    pub search_trials: usize,
    /// 1..=9.
    pub n_iterations: usize,
    pub export_intermediates: bool,
    /// Kept for parity with the parameter list; the CLI always writes results.
    pub save_result: bool,
    pub save_plots: bool,
    pub seed: u64,
}

impl Default for ImputeConfig {
    fn default() -> Self {
        ImputeConfig {
            impute_zeros: false,
            pre_imputation: PreImputeStrategy::default(),
            ensemble_size: 3,
            mf_nan_replace: false,
            use_full_transform: false,
            search_enabled: false,
            search_trials: 5,
            n_iterations: 1,
            export_intermediates: false,
            save_result: false,
            save_plots: false,
            seed: 42,
        }
    }
}

fn check(name: &'static str, value: usize, (lo, hi): (usize, usize)) -> Result<()> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Error::range(name, value, format!("{lo}..={hi}")))
    }
}

impl ImputeConfig {
    pub fn validate(&self) -> Result<()> {
        check("ensemble_size", self.ensemble_size, ENSEMBLE_RANGE)?;
        check("search_trials", self.search_trials, SEARCH_TRIALS_RANGE)?;
        check("n_iterations", self.n_iterations, ITERATIONS_RANGE)?;
        if let Some(k) = self.pre_imputation.k() {
            check("k", k, (1, usize::MAX))?;
        }
        if self.mf_nan_replace && self.use_full_transform {
            return Err(Error::range(
                "use_full_transform",
                "true",
                "false when mf_nan_replace is set (the two are exclusive)",
            ));
        }
        Ok(())
    }
}
