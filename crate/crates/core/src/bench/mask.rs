use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::preprocess::{classify_columns, normalize_missing_tokens};
use crate::profile::ColumnKind;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaskScope {
    AllImputable,
    ContinuousOnly,
    CategoricalOnly,
}

impl MaskScope {
    fn admits(self, kind: ColumnKind) -> bool {
        match self {
            MaskScope::AllImputable => kind.is_imputable(),
            MaskScope::ContinuousOnly => kind == ColumnKind::Continuous,
            MaskScope::CategoricalOnly => kind.is_categorical(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskSpec {
    /// Share of eligible cells to hide, strictly inside (0, 1).
    pub fraction: f64,
    pub seed: u64,
    pub scope: MaskScope,
}

/// A hidden cell and its original content.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedCell {
    pub row: usize,
    pub col: usize,
    pub original: Cell,
}

/// Hide `floor(fraction × eligible)` observed cells chosen uniformly.
///
/// Eligible cells are observed cells of in-scope columns that survive
/// column typing. A draw that would leave its column without any observed
/// value is rejected and the next candidate taken.
pub fn mask_random(table: &Table, spec: &MaskSpec) -> Result<(Table, Vec<MaskedCell>)> {
    if !(spec.fraction > 0.0 && spec.fraction < 1.0) {
        return Err(Error::range("fraction", spec.fraction, "(0, 1)"));
    }
    let (clean, profiles) = classify_columns(&normalize_missing_tokens(table));
    let mut remaining: Vec<usize> = (0..clean.n_cols())
        .map(|j| (0..clean.n_rows()).filter(|&i| !clean.get(i, j).is_missing()).count())
        .collect();
    let mut eligible: Vec<(usize, usize)> = Vec::new();
    for i in 0..clean.n_rows() {
        for (j, profile) in profiles.iter().enumerate() {
            if spec.scope.admits(profile.kind) && !clean.get(i, j).is_missing() {
                eligible.push((i, j));
            }
        }
    }
    if eligible.is_empty() {
        return Err(Error::InvalidData("no observed cells in the masking scope".into()));
    }
    let target = (spec.fraction * eligible.len() as f64).floor() as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    eligible.shuffle(&mut rng);
    let mut chosen = Vec::with_capacity(target);
    for (i, j) in eligible {
        if chosen.len() == target {
            break;
        }
        if remaining[j] > 1 {
            remaining[j] -= 1;
            chosen.push((i, j));
        }
    }
    if chosen.len() < target {
        return Err(Error::range(
            "fraction",
            spec.fraction,
            "small enough that every column keeps an observed value",
        ));
    }
    chosen.sort_unstable();

    let mut masked = table.clone();
    let truth = chosen
        .into_iter()
        .map(|(row, col)| {
            let original = table.get(row, col).clone();
            masked.set(row, col, Cell::Missing);
            MaskedCell { row, col, original }
        })
        .collect();
    Ok((masked, truth))
}

/// Put the hidden cells back.
pub fn unmask(table: &Table, truth: &[MaskedCell]) -> Table {
    let mut out = table.clone();
    for t in truth {
        out.set(t.row, t.col, t.original.clone());
    }
    out
}
