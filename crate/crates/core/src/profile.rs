//! Per-column type profiling.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::table::Cell;

/// How a column takes part in imputation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ColumnKind {
    Continuous,
    Categorical,
    /// Categorical with exactly two labels; handled as a 2-class column.
    Boolean,
    /// Neither numeric nor textual enough; carried through untouched.
    Excluded,
}

impl ColumnKind {
    pub fn is_categorical(self) -> bool {
        matches!(self, ColumnKind::Categorical | ColumnKind::Boolean)
    }

    pub fn is_imputable(self) -> bool {
        !matches!(self, ColumnKind::Excluded)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnProfile {
    pub kind: ColumnKind,
    /// Numeric cells over all cells.
    pub frac_numeric: f64,
    /// Text cells over all cells.
    pub frac_text: f64,
    pub n_missing: usize,
    /// Distinct text labels in byte order; empty unless categorical.
    pub categories: Vec<String>,
}

/// Share of observed cells one type must exceed to claim a column.
pub const TYPE_MAJORITY: f64 = 0.6;

/// Count cell types and assign a kind by the majority rule.
///
/// A column is continuous when numbers make up more than 60% of its observed
/// cells and categorical when text does; otherwise it is excluded. A column
/// with no observed cells is excluded.
pub fn profile_column(cells: &[Cell]) -> ColumnProfile {
    let total = cells.len();
    let mut n_numeric = 0usize;
    let mut n_missing = 0usize;
    let mut labels = BTreeSet::new();
    let mut n_text = 0usize;
    for cell in cells {
        match cell {
            Cell::Number(_) => n_numeric += 1,
            Cell::Text(s) => {
                n_text += 1;
                labels.insert(s.as_str());
            }
            Cell::Missing => n_missing += 1,
        }
    }
    let observed = n_numeric + n_text;
    // Integer form of `count / observed > 0.6`, exact at the boundary.
    let dominates = |count: usize| observed > 0 && count * 5 > observed * 3;
    let kind = if dominates(n_numeric) {
        ColumnKind::Continuous
    } else if dominates(n_text) {
        if labels.len() == 2 {
            ColumnKind::Boolean
        } else {
            ColumnKind::Categorical
        }
    } else {
        ColumnKind::Excluded
    };
    let categories = if kind.is_categorical() {
        labels.into_iter().map(str::to_string).collect()
    } else {
        Vec::new()
    };
    let frac = |count: usize| if total == 0 { 0.0 } else { count as f64 / total as f64 };
    ColumnProfile {
        kind,
        frac_numeric: frac(n_numeric),
        frac_text: frac(n_text),
        n_missing,
        categories,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nums(n: usize) -> Vec<Cell> {
        (0..n).map(|i| Cell::Number(i as f64)).collect()
    }

    fn texts(n: usize) -> Vec<Cell> {
        (0..n).map(|i| Cell::Text(format!("t{}", i % 3))).collect()
    }

    #[test]
    fn counts_fractions() {
        let mut cells = nums(7);
        cells.extend(texts(3));
        let p = profile_column(&cells);
        assert_eq!(p.frac_numeric, 0.7);
        assert!((p.frac_text - 0.3).abs() < 1e-15);
        assert_eq!(p.kind, ColumnKind::Continuous);
        assert!(p.categories.is_empty());
    }

    #[test]
    fn all_missing_is_excluded() {
        let p = profile_column(&vec![Cell::Missing; 4]);
        assert_eq!(p.frac_numeric, 0.0);
        assert_eq!(p.frac_text, 0.0);
        assert_eq!(p.n_missing, 4);
        assert_eq!(p.kind, ColumnKind::Excluded);
    }

    #[test]
    fn two_labels_make_boolean() {
        let cells = vec![
            Cell::Text("yes".into()),
            Cell::Text("no".into()),
            Cell::Text("yes".into()),
            Cell::Missing,
        ];
        let p = profile_column(&cells);
        // distinct-count oracle
        let distinct: BTreeSet<_> = cells.iter().filter_map(Cell::as_text).collect();
        assert_eq!(distinct.len(), 2);
        assert_eq!(p.kind, ColumnKind::Boolean);
        assert_eq!(p.categories, vec!["no".to_string(), "yes".to_string()]);
    }

    #[test]
    fn sixty_percent_exactly_is_excluded() {
        let mut cells = nums(6);
        cells.extend(texts(4));
        assert_eq!(profile_column(&cells).kind, ColumnKind::Excluded);
    }

    #[test]
    fn missing_cells_do_not_dilute_the_majority() {
        // 5 numbers, 1 text, 4 missing: 5/6 of observed cells are numeric.
        let mut cells = nums(5);
        cells.push(Cell::Text("x".into()));
        cells.extend(vec![Cell::Missing; 4]);
        let p = profile_column(&cells);
        assert_eq!(p.kind, ColumnKind::Continuous);
        assert_eq!(p.frac_numeric, 0.5);
        assert_eq!(p.n_missing, 4);
    }

    #[test]
    fn single_label_column_is_categorical() {
        let cells = vec![Cell::Text("a".into()), Cell::Text("a".into())];
        let p = profile_column(&cells);
        assert_eq!(p.kind, ColumnKind::Categorical);
        assert_eq!(p.categories, vec!["a".to_string()]);
    }
}
