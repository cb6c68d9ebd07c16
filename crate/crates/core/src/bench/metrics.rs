use crate::error::{Error, Result};
use crate::table::Cell;
use crate::table::Table;

use super::mask::MaskedCell;

fn numeric_errors(imputed: &Table, truth: &[MaskedCell]) -> Result<Vec<f64>> {
    let errors = truth
        .iter()
        .filter_map(|t| t.original.as_number().map(|orig| (t, orig)))
        .map(|(t, orig)| match imputed.get(t.row, t.col) {
            Cell::Number(v) => Ok(v - orig),
            other => Err(Error::InvalidData(format!(
                "cell ({}, {}) was not imputed with a number: {other:?}",
                t.row, t.col
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    if errors.is_empty() {
        return Err(Error::InvalidData("no continuous ground-truth cells".into()));
    }
    Ok(errors)
}

/// Mean squared error over the numeric ground-truth cells.
pub fn mse(imputed: &Table, truth: &[MaskedCell]) -> Result<f64> {
    let errors = numeric_errors(imputed, truth)?;
    Ok(errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64)
}

pub fn rmse(imputed: &Table, truth: &[MaskedCell]) -> Result<f64> {
    mse(imputed, truth).map(f64::sqrt)
}

/// Share of text ground-truth cells recovered exactly.
pub fn categorical_accuracy(imputed: &Table, truth: &[MaskedCell]) -> Result<f64> {
    let mut total = 0usize;
    let mut hits = 0usize;
    for t in truth {
        if let Cell::Text(orig) = &t.original {
            total += 1;
            if imputed.get(t.row, t.col).as_text() == Some(orig.as_str()) {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::InvalidData("no categorical ground-truth cells".into()));
    }
    Ok(hits as f64 / total as f64)
}
