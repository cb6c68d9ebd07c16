//! Deterministic label encoding for categorical columns.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{ColumnKind, ColumnProfile};
use crate::table::Cell;

/// Bijection between text labels and codes `0..K`, codes in label byte order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelMap {
    labels: Vec<String>,
    #[serde(skip)]
    codes: HashMap<String, usize>,
}

impl LabelMap {
    /// Build a map from any collection of labels; duplicates collapse.
    pub fn new<I, S>(labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort_unstable();
        labels.dedup();
        let codes = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        LabelMap { labels, codes }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn code(&self, label: &str) -> Option<usize> {
        self.codes.get(label).copied()
    }

    pub fn label(&self, code: usize) -> Option<&str> {
        self.labels.get(code).map(String::as_str)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Map a real-valued prediction to a label: round half up, then clamp.
    pub fn decode_value(&self, value: f64) -> Result<&str> {
        if !value.is_finite() {
            return Err(Error::NonFinite(value));
        }
        let top = self.labels.len().saturating_sub(1) as f64;
        let code = (value + 0.5).floor().clamp(0.0, top) as usize;
        Ok(&self.labels[code])
    }
}

/// Replace text cells by their codes.
///
/// The map is built from `profile.categories`; missing cells pass through.
pub fn encode_labels(column: &[Cell], profile: &ColumnProfile) -> Result<(Vec<Cell>, LabelMap)> {
    debug_assert!(matches!(
        profile.kind,
        ColumnKind::Categorical | ColumnKind::Boolean
    ));
    let map = LabelMap::new(profile.categories.iter().cloned());
    let encoded = column
        .iter()
        .map(|cell| match cell {
            Cell::Text(s) => map
                .code(s)
                .map(|c| Cell::Number(c as f64))
                .ok_or_else(|| Error::UnknownLabel(s.clone())),
            Cell::Missing => Ok(Cell::Missing),
            // Classification coerces stray numbers to missing beforehand.
            Cell::Number(v) => Err(Error::UnknownLabel(v.to_string())),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((encoded, map))
}

/// Inverse of [`encode_labels`] for real-valued (possibly fractional) codes.
pub fn decode_labels(values: &[f64], map: &LabelMap) -> Result<Vec<Cell>> {
    values
        .iter()
        .map(|&v| map.decode_value(v).map(|l| Cell::Text(l.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::profile_column;
    use proptest::prelude::*;

    fn text(s: &str) -> Cell {
        Cell::Text(s.into())
    }

    #[test]
    fn codes_follow_byte_order() {
        let col = vec![text("b"), text("a"), text("b")];
        let (enc, map) = encode_labels(&col, &profile_column(&col)).unwrap();
        assert_eq!(enc, vec![Cell::Number(1.0), Cell::Number(0.0), Cell::Number(1.0)]);
        assert_eq!(map.code("a"), Some(0));
        assert_eq!(map.code("b"), Some(1));
    }

    #[test]
    fn missing_passthrough() {
        let col = vec![text("x"), Cell::Missing];
        let (enc, _) = encode_labels(&col, &profile_column(&col)).unwrap();
        assert_eq!(enc, vec![Cell::Number(0.0), Cell::Missing]);
    }

    #[test]
    fn unknown_label_is_an_error() {
        let col = vec![text("a"), text("b"), text("c")];
        let mut profile = profile_column(&col);
        profile.categories.pop();
        assert!(matches!(encode_labels(&col, &profile), Err(Error::UnknownLabel(l)) if l == "c"));
    }

    #[test]
    fn decode_rounds_and_clamps() {
        let map = LabelMap::new(["a", "b"]);
        let out = decode_labels(&[1.0, 0.0, 0.6, -0.4, 0.5, 7.2], &map).unwrap();
        let got: Vec<_> = out.iter().map(|c| c.as_text().unwrap()).collect();
        assert_eq!(got, vec!["b", "a", "b", "a", "b", "b"]);
        assert!(matches!(decode_labels(&[f64::NAN], &map), Err(Error::NonFinite(_))));
    }

    proptest! {
        #[test]
        fn round_trip_on_observed_columns(labels in proptest::collection::vec("[a-e]{1,2}", 1..30)) {
            let col: Vec<Cell> = labels.iter().map(|l| text(l)).collect();
            let profile = profile_column(&col);
            let (enc, map) = encode_labels(&col, &profile).unwrap();
            let values: Vec<f64> = enc.iter().map(|c| c.as_number().unwrap()).collect();
            prop_assert_eq!(decode_labels(&values, &map).unwrap(), col);
        }

        #[test]
        fn map_ignores_row_order(mut labels in proptest::collection::vec("[a-z]{1,3}", 1..20), seed in any::<u64>()) {
            let a = LabelMap::new(labels.clone());
            let k = labels.len();
            labels.rotate_left((seed as usize) % k);
            prop_assert_eq!(a, LabelMap::new(labels));
        }
    }
}
