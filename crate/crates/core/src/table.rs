//! In-memory representation of a mixed-type table.
//!
//! Cells are either finite numbers, non-empty text, or missing. The first
//! column of an input file holds sample identifiers and is kept apart from
//! the data grid; identifiers are carried through untouched and need not be
//! unique.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// A single table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
    Missing,
}

impl Cell {
    /// Lex a raw field: finite float, else text, else missing when blank.
    ///
    /// Floats may carry surrounding whitespace and exponents. Tokens that
    /// parse to a non-finite float (`inf`, `NaN`) become `Missing`.
    pub fn lex(field: &str) -> Cell {
        let trimmed = field.trim();
        if trimmed.is_empty() {
            return Cell::Missing;
        }
        match trimmed.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Number(v),
            Ok(_) => Cell::Missing,
            Err(_) => Cell::Text(field.to_string()),
        }
    }

    /// Build a numeric cell; non-finite values collapse to `Missing`.
    pub fn number(v: f64) -> Cell {
        if v.is_finite() {
            Cell::Number(v)
        } else {
            Cell::Missing
        }
    }

    /// Build a text cell; the empty string collapses to `Missing`.
    pub fn text(s: impl Into<String>) -> Cell {
        let s = s.into();
        if s.is_empty() {
            Cell::Missing
        } else {
            Cell::Text(s)
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Number(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Missing => Ok(()),
        }
    }
}

/// Row-major grid of cells with row identifiers and a header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    id_name: String,
    row_ids: Vec<String>,
    column_names: Vec<String>,
    cells: Vec<Cell>,
}

impl Table {
    /// Assemble a table, checking shape and header uniqueness.
    pub fn new(
        id_name: impl Into<String>,
        row_ids: Vec<String>,
        column_names: Vec<String>,
        cells: Vec<Cell>,
    ) -> Result<Self> {
        let mut seen = HashSet::with_capacity(column_names.len());
        for name in &column_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        if row_ids.len() * column_names.len() != cells.len() {
            return Err(Error::Shape(format!(
                "{} rows x {} columns but {} cells",
                row_ids.len(),
                column_names.len(),
                cells.len()
            )));
        }
        Ok(Table {
            id_name: id_name.into(),
            row_ids,
            column_names,
            cells,
        })
    }

    /// Build from per-column cell vectors.
    pub fn from_columns(
        id_name: impl Into<String>,
        row_ids: Vec<String>,
        columns: Vec<(String, Vec<Cell>)>,
    ) -> Result<Self> {
        let n = row_ids.len();
        if let Some((name, col)) = columns.iter().find(|(_, c)| c.len() != n) {
            return Err(Error::Shape(format!(
                "column `{name}` has {} cells, expected {n}",
                col.len()
            )));
        }
        let m = columns.len();
        let mut cells = vec![Cell::Missing; n * m];
        let mut names = Vec::with_capacity(m);
        for (j, (name, col)) in columns.into_iter().enumerate() {
            names.push(name);
            for (i, cell) in col.into_iter().enumerate() {
                cells[i * m + j] = cell;
            }
        }
        Table::new(id_name, row_ids, names, cells)
    }

    pub fn id_name(&self) -> &str {
        &self.id_name
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.column_names.len()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.column_names.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, col: usize) -> &Cell {
        &self.cells[row * self.n_cols() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, cell: Cell) {
        let m = self.n_cols();
        self.cells[row * m + col] = cell;
    }

    pub fn row(&self, row: usize) -> &[Cell] {
        let m = self.n_cols();
        &self.cells[row * m..(row + 1) * m]
    }

    /// Cloned cells of one column, top to bottom.
    pub fn column(&self, col: usize) -> Vec<Cell> {
        (0..self.n_rows()).map(|i| self.get(i, col).clone()).collect()
    }

    pub fn set_column(&mut self, col: usize, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.n_rows(), "column length mismatch");
        for (i, cell) in cells.into_iter().enumerate() {
            self.set(i, col, cell);
        }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Apply `f` to every cell, producing a new table of the same shape.
    pub fn map_cells(&self, mut f: impl FnMut(&Cell) -> Cell) -> Table {
        Table {
            id_name: self.id_name.clone(),
            row_ids: self.row_ids.clone(),
            column_names: self.column_names.clone(),
            cells: self.cells.iter().map(&mut f).collect(),
        }
    }

    pub fn n_missing(&self) -> usize {
        self.cells.iter().filter(|c| c.is_missing()).count()
    }
}
