//! Table cleaning, column typing, label encoding and the first dense fill.
//!
//! [`preprocessing_df`] runs the whole chain and returns the cleaned table,
//! the encoded matrix (NaN where missing) and the pre-imputed dense matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::knn::{column_mean, knn_impute, knn_impute_columns};
use crate::labels::{encode_labels, LabelMap};
use crate::profile::{profile_column, ColumnKind, ColumnProfile};
use crate::table::{Cell, Table};

/// Spreadsheet and dataframe spellings of "no value".
pub const MISSING_TOKENS: [&str; 10] = [
    "NaN", "NAN", "Nan", "nan", "NA", "#NA", "N/A", "NA#", "#VALUE!", "#DIV/0!",
];

pub const DEFAULT_K: usize = 5;

/// How the first dense fill is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PreImputeStrategy {
    /// Mean for continuous columns, mode for categorical ones.
    ColumnMean,
    /// Nearest-neighbour mean for every column.
    Knn { k: usize },
    /// Mean for continuous columns, nearest neighbours for categorical ones.
    MixType { k: usize },
}

impl Default for PreImputeStrategy {
    fn default() -> Self {
        PreImputeStrategy::MixType { k: DEFAULT_K }
    }
}

impl PreImputeStrategy {
    pub fn k(&self) -> Option<usize> {
        match *self {
            PreImputeStrategy::ColumnMean => None,
            PreImputeStrategy::Knn { k } | PreImputeStrategy::MixType { k } => Some(k),
        }
    }

    /// Same strategy with a different neighbour count.
    pub fn with_k(self, k: usize) -> Self {
        match self {
            PreImputeStrategy::ColumnMean => self,
            PreImputeStrategy::Knn { .. } => PreImputeStrategy::Knn { k },
            PreImputeStrategy::MixType { .. } => PreImputeStrategy::MixType { k },
        }
    }

    fn validate(&self, n_rows: usize) -> Result<()> {
        match self.k() {
            Some(k) if k == 0 || k >= n_rows => Err(Error::range(
                "k",
                k,
                format!("1..{} (below the row count)", n_rows.saturating_sub(1)),
            )),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for PreImputeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PreImputeStrategy::ColumnMean => f.write_str("ColumnMean"),
            PreImputeStrategy::Knn { k } => write!(f, "KNNImputer:{k}"),
            PreImputeStrategy::MixType { k } => write!(f, "MixType:{k}"),
        }
    }
}

impl FromStr for PreImputeStrategy {
    type Err = Error;

    /// Accepts `ColumnMean`, `KNNImputer`, `MixType`, optionally `:k`.
    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::range("pre_imputation", s, "ColumnMean, KNNImputer[:k] or MixType[:k]");
        let (name, k) = match s.trim().split_once(':') {
            Some((name, k)) => (name, Some(k.trim().parse::<usize>().map_err(|_| invalid())?)),
            None => (s.trim(), None),
        };
        let k = k.unwrap_or(DEFAULT_K);
        match name.to_ascii_lowercase().as_str() {
            "columnmean" | "mean" => Ok(PreImputeStrategy::ColumnMean),
            "knnimputer" | "knn" => Ok(PreImputeStrategy::Knn { k }),
            "mixtype" | "mix" => Ok(PreImputeStrategy::MixType { k }),
            _ => Err(invalid()),
        }
    }
}

/// Everything the later stages need from preprocessing.
#[derive(Debug, Clone)]
pub struct PreprocessedTriple {
    /// Tokens normalized and cells coerced to their column's kind.
    pub clean: Table,
    /// Imputable columns only; NaN marks a missing entry.
    pub encoded: Array2<f64>,
    /// `encoded` with every NaN filled.
    pub preimputed: Array2<f64>,
    /// One profile per table column.
    pub profiles: Vec<ColumnProfile>,
    /// One label map per table column, for categorical columns only.
    pub maps: Vec<Option<LabelMap>>,
    /// Table column index of each encoded column.
    pub columns: Vec<usize>,
    pub warnings: Vec<String>,
}

impl PreprocessedTriple {
    pub fn encoded_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .map(|&c| self.clean.column_names()[c].clone())
            .collect()
    }

    pub fn encoded_kinds(&self) -> Vec<ColumnKind> {
        self.columns.iter().map(|&c| self.profiles[c].kind).collect()
    }
}

pub fn is_missing_token(s: &str) -> bool {
    MISSING_TOKENS.contains(&s.trim())
}

pub fn normalize_missing_tokens(table: &Table) -> Table {
    table.map_cells(|cell| match cell {
        Cell::Text(s) if is_missing_token(s) => Cell::Missing,
        other => other.clone(),
    })
}

pub fn zeros_to_missing(table: &Table) -> Table {
    table.map_cells(|cell| match cell {
        Cell::Number(v) if *v == 0.0 => Cell::Missing,
        other => other.clone(),
    })
}

/// Type every column and coerce minority cells to missing.
///
/// Continuous columns lose their text cells, categorical columns their
/// numbers; excluded columns are left as they are. Returned profiles
/// describe the coerced columns, so the operation is idempotent.
pub fn classify_columns(table: &Table) -> (Table, Vec<ColumnProfile>) {
    let mut out = table.clone();
    let mut profiles = Vec::with_capacity(table.n_cols());
    for j in 0..table.n_cols() {
        let column = table.column(j);
        let kind = profile_column(&column).kind;
        let coerced: Vec<Cell> = column
            .into_iter()
            .map(|cell| match (kind, cell) {
                (ColumnKind::Continuous, Cell::Text(_)) => Cell::Missing,
                (ColumnKind::Categorical | ColumnKind::Boolean, Cell::Number(_)) => Cell::Missing,
                (_, cell) => cell,
            })
            .collect();
        profiles.push(profile_column(&coerced));
        out.set_column(j, coerced);
    }
    (out, profiles)
}

/// Densify `encoded` with the chosen strategy.
///
/// `kinds` gives the kind of each encoded column. Observed entries are never
/// changed. Returns the filled matrix and any warnings raised on the way.
pub fn pre_impute(
    encoded: ArrayView2<f64>,
    kinds: &[ColumnKind],
    strategy: PreImputeStrategy,
) -> Result<(Array2<f64>, Vec<String>)> {
    let (n, m) = encoded.dim();
    if kinds.len() != m {
        return Err(Error::Shape(format!("{} kinds for {m} columns", kinds.len())));
    }
    for j in 0..m {
        if encoded.column(j).iter().all(|v| v.is_nan()) {
            return Err(Error::NoObservedValues(format!("#{j}")));
        }
    }
    strategy.validate(n)?;

    let mut warnings = Vec::new();
    let mut note_fallbacks = |fallbacks: &[(usize, usize)]| {
        for &(i, j) in fallbacks {
            warnings.push(format!(
                "row {i}, column #{j}: no eligible neighbour, filled with the column mean"
            ));
        }
    };

    let filled = match strategy {
        PreImputeStrategy::ColumnMean => fill_simple(encoded, kinds, |_| true),
        PreImputeStrategy::Knn { k } => {
            let out = knn_impute(encoded, k)?;
            note_fallbacks(&out.fallbacks);
            out.values
        }
        PreImputeStrategy::MixType { k } => {
            let targets: Vec<bool> = kinds.iter().map(|k| k.is_categorical()).collect();
            let mut out = if targets.iter().any(|&t| t) {
                let knn = knn_impute_columns(encoded, k, &targets)?;
                note_fallbacks(&knn.fallbacks);
                knn.values
            } else {
                encoded.to_owned()
            };
            let means = fill_simple(encoded, kinds, |kind| !kind.is_categorical());
            for j in (0..m).filter(|&j| !targets[j]) {
                out.column_mut(j).assign(&means.column(j));
            }
            out
        }
    };
    Ok((filled, warnings))
}

/// Mean/mode fill for the columns selected by `which`.
fn fill_simple(encoded: ArrayView2<f64>, kinds: &[ColumnKind], which: impl Fn(ColumnKind) -> bool) -> Array2<f64> {
    let mut out = encoded.to_owned();
    for (j, &kind) in kinds.iter().enumerate() {
        if !which(kind) {
            continue;
        }
        let fill = if kind.is_categorical() {
            column_mode(encoded, j)
        } else {
            column_mean(encoded, j)
        };
        let Some(fill) = fill else { continue };
        out.column_mut(j).mapv_inplace(|v| if v.is_nan() { fill } else { v });
    }
    out
}

/// Most frequent observed value of column `j`; ties go to the smallest value.
pub fn column_mode(matrix: ArrayView2<f64>, j: usize) -> Option<f64> {
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for &v in matrix.column(j).iter().filter(|v| !v.is_nan()) {
        *counts.entry(v.round() as i64).or_default() += 1;
    }
    // max_by_key keeps the last maximum, so scan in reverse for the lowest code.
    counts
        .into_iter()
        .rev()
        .max_by_key(|&(_, c)| c)
        .map(|(code, _)| code as f64)
}

/// The full preprocessing chain.
pub fn preprocessing_df(table: &Table, impute_zeros: bool, strategy: PreImputeStrategy) -> Result<PreprocessedTriple> {
    let mut clean = normalize_missing_tokens(table);
    if impute_zeros {
        clean = zeros_to_missing(&clean);
    }
    let (clean, profiles) = classify_columns(&clean);

    let columns: Vec<usize> = (0..clean.n_cols())
        .filter(|&j| profiles[j].kind.is_imputable())
        .collect();
    if columns.is_empty() {
        return Err(Error::NothingToImpute);
    }

    let n = clean.n_rows();
    let mut encoded = Array2::from_elem((n, columns.len()), f64::NAN);
    let mut maps = vec![None; clean.n_cols()];
    for (e, &j) in columns.iter().enumerate() {
        let column = clean.column(j);
        let cells = if profiles[j].kind.is_categorical() {
            let (cells, map) = encode_labels(&column, &profiles[j])?;
            maps[j] = Some(map);
            cells
        } else {
            column
        };
        for (i, cell) in cells.iter().enumerate() {
            if let Cell::Number(v) = cell {
                encoded[[i, e]] = *v;
            }
        }
    }

    let mut clamp_warning = None;
    let strategy = match strategy {
        PreImputeStrategy::Knn { k } | PreImputeStrategy::MixType { k } if k >= n && n >= 2 => {
            clamp_warning = Some(format!("k = {k} is not below the row count {n}; using k = {}", n - 1));
            strategy.with_k(n - 1)
        }
        other => other,
    };

    let kinds: Vec<ColumnKind> = columns.iter().map(|&j| profiles[j].kind).collect();
    let names = |msg: String| {
        // Swap "#e" column references for real column names.
        let mut msg = msg;
        for (e, &j) in columns.iter().enumerate().rev() {
            msg = msg.replace(&format!("#{e}"), &format!("`{}`", clean.column_names()[j]));
        }
        msg
    };
    let (preimputed, warnings) = match pre_impute(encoded.view(), &kinds, strategy) {
        Ok(out) => out,
        Err(Error::NoObservedValues(col)) => {
            let e: usize = col.trim_start_matches('#').parse().unwrap_or(0);
            return Err(Error::NoObservedValues(clean.column_names()[columns[e]].clone()));
        }
        Err(err) => return Err(err),
    };
    let warnings = clamp_warning.into_iter().chain(warnings.into_iter().map(names)).collect();

    Ok(PreprocessedTriple {
        clean,
        encoded,
        preimputed,
        profiles,
        maps,
        columns,
        warnings,
    })
}
