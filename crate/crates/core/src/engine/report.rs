use serde::Serialize;

use crate::boost::BoostParams;
use crate::factorize::FactorMethod;
use crate::profile::ColumnKind;

#[derive(Debug, Clone, Serialize)]
pub struct ColumnReport {
    pub name: String,
    pub kind: ColumnKind,
    pub n_missing: usize,
    pub params: Option<BoostParams>,
    pub searched: bool,
    pub models_trained: usize,
    /// Wall time spent on this column in each pass.
    pub pass_ms: Vec<f64>,
}

/// Summary of one [`xpute`](super::xpute) run, serialized as JSON.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub design: String,
    pub factorization_method: Option<FactorMethod>,
    pub factorization_rank: Option<usize>,
    pub search_gate_passed: bool,
    pub columns: Vec<ColumnReport>,
    /// Mean absolute change of the imputed cells in each pass.
    pub pass_deltas: Vec<f64>,
    pub pass_ms: Vec<f64>,
    pub preprocess_ms: f64,
    pub total_ms: f64,
    pub models_trained: usize,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
