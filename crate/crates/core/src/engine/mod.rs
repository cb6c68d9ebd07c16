//! Pipeline orchestration: per-column boosted imputation, sequential
//! in-pass updates and iterative refinement.

mod config;
mod report;

pub use config::{ImputeConfig, ENSEMBLE_RANGE, ITERATIONS_RANGE, SEARCH_TRIALS_RANGE};
pub use report::{ColumnReport, RunReport};

use std::path::Path;
use std::time::Instant;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use crate::boost::{default_params, fit, search_params, BoostParams, Target, Task};
use crate::csvio::write_csv_file;
use crate::error::{Error, Result};
use crate::factorize::adaptive_factorize;
use crate::labels::LabelMap;
use crate::preprocess::{preprocessing_df, PreprocessedTriple};
use crate::profile::ColumnKind;
use crate::table::{Cell, Table};

/// Minimum sample count (exclusive) for hyperparameter search.
pub const SEARCH_MIN_SAMPLES: usize = 50;
/// Minimum samples-per-feature ratio for hyperparameter search.
pub const SEARCH_MIN_RATIO: usize = 4;
/// Maximum number of incomplete columns for hyperparameter search.
pub const SEARCH_MAX_MISSING_COLUMNS: usize = 100;

/// Whether a dataset is large and narrow enough for hyperparameter search.
pub fn gate_search(n_samples: usize, n_features: usize, n_missing_columns: usize) -> bool {
    n_samples > SEARCH_MIN_SAMPLES
        && n_samples >= SEARCH_MIN_RATIO * n_features
        && n_missing_columns <= SEARCH_MAX_MISSING_COLUMNS
}

/// Seeds of the ensemble members for one column.
pub fn member_seeds(seed: u64, column: usize, ensemble_size: usize) -> Vec<u64> {
    (0..ensemble_size)
        .map(|m| seed.wrapping_add(1000 * column as u64 + m as u64))
        .collect()
}

fn search_seed(seed: u64, column: usize) -> u64 {
    seed.wrapping_add(1000 * column as u64 + 500)
}

/// Mean absolute difference over the positions flagged in `mask`.
pub fn iteration_delta(previous: ArrayView2<f64>, current: ArrayView2<f64>, mask: ArrayView2<bool>) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    ndarray::Zip::from(previous)
        .and(current)
        .and(mask)
        .for_each(|&p, &c, &m| {
            if m {
                sum += (p - c).abs();
                count += 1;
            }
        });
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Majority vote; ties go to the lowest code.
pub fn majority_vote(codes: &[usize]) -> usize {
    let k = codes.iter().copied().max().map_or(1, |m| m + 1);
    let mut counts = vec![0usize; k];
    for &c in codes {
        counts[c] += 1;
    }
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

/// An incomplete column scheduled for imputation.
#[derive(Debug, Clone)]
pub struct ColumnPlan {
    /// Index into the encoded matrix.
    pub column: usize,
    /// Index into the table.
    pub table_column: usize,
    pub kind: ColumnKind,
    pub task: Task,
    pub missing_rows: Vec<usize>,
    pub cached_params: Option<BoostParams>,
}

/// What one call to [`impute_column`] produced.
#[derive(Debug, Clone)]
pub struct ColumnOutcome {
    pub predictions: Vec<f64>,
    pub params: Option<BoostParams>,
    pub searched: bool,
    pub models_trained: usize,
    pub warning: Option<String>,
}

/// Mutable state threaded through the passes.
#[derive(Debug, Clone)]
pub struct ImputeState {
    pub clean: Table,
    /// Encoded values; missing positions hold the latest predictions
    /// (NaN until first imputed).
    pub encoded: Array2<f64>,
    /// Dense training matrix.
    pub design: Array2<f64>,
    /// Originally missing positions of `encoded`.
    pub missing: Array2<bool>,
    pub plans: Vec<ColumnPlan>,
    /// Label map per encoded column.
    pub maps: Vec<Option<LabelMap>>,
    /// Whether search may run for columns without cached parameters.
    pub search_allowed: bool,
}

impl ImputeState {
    /// Build plans for every incomplete column of `triple`, training on `design`.
    pub fn new(triple: &PreprocessedTriple, design: Array2<f64>, config: &ImputeConfig) -> Result<Self> {
        if design.dim() != triple.encoded.dim() {
            return Err(Error::Shape("design and encoded matrices differ in shape".into()));
        }
        let missing = triple.encoded.mapv(f64::is_nan);
        let maps: Vec<Option<LabelMap>> = triple.columns.iter().map(|&j| triple.maps[j].clone()).collect();
        let plans: Vec<ColumnPlan> = triple
            .columns
            .iter()
            .enumerate()
            .filter_map(|(e, &j)| {
                let missing_rows: Vec<usize> = (0..missing.nrows()).filter(|&i| missing[[i, e]]).collect();
                if missing_rows.is_empty() {
                    return None;
                }
                let kind = triple.profiles[j].kind;
                let task = match &maps[e] {
                    Some(map) => Task::Classification(map.len()),
                    None => Task::Regression,
                };
                Some(ColumnPlan {
                    column: e,
                    table_column: j,
                    kind,
                    task,
                    missing_rows,
                    cached_params: None,
                })
            })
            .collect();
        let (n, m) = design.dim();
        let search_allowed = config.search_enabled && gate_search(n, m.saturating_sub(1), plans.len());
        Ok(ImputeState {
            clean: triple.clean.clone(),
            encoded: triple.encoded.clone(),
            design,
            missing,
            plans,
            maps,
            search_allowed,
        })
    }

    /// Encoded values with not-yet-imputed gaps taken from the design.
    pub fn current_values(&self) -> Array2<f64> {
        let mut out = self.encoded.clone();
        ndarray::Zip::from(&mut out).and(&self.design).for_each(|o, &d| {
            if o.is_nan() {
                *o = d;
            }
        });
        out
    }

    fn write(&mut self, plan: &ColumnPlan, predictions: &[f64]) -> Result<()> {
        let e = plan.column;
        for (&i, &v) in plan.missing_rows.iter().zip(predictions) {
            self.encoded[[i, e]] = v;
            self.design[[i, e]] = v;
            let cell = match &self.maps[e] {
                Some(map) => Cell::Text(map.decode_value(v)?.to_string()),
                None => Cell::number(v),
            };
            self.clean.set(i, plan.table_column, cell);
        }
        Ok(())
    }
}

/// Impute one planned column from all other design columns.
pub fn impute_column(state: &mut ImputeState, plan_index: usize, config: &ImputeConfig) -> Result<ColumnOutcome> {
    let plan = state.plans[plan_index].clone();
    let e = plan.column;
    let (n, m) = state.design.dim();
    let others: Vec<usize> = (0..m).filter(|&c| c != e).collect();
    let train_rows: Vec<usize> = (0..n).filter(|&i| !state.missing[[i, e]]).collect();

    if train_rows.len() < 2 {
        let predictions: Vec<f64> = plan.missing_rows.iter().map(|&i| state.design[[i, e]]).collect();
        state.write(&plan, &predictions)?;
        return Ok(ColumnOutcome {
            predictions,
            params: None,
            searched: false,
            models_trained: 0,
            warning: Some(format!(
                "column `{}`: fewer than two observed rows, kept the pre-imputed values",
                state.clean.column_names()[plan.table_column]
            )),
        });
    }

    let features = state.design.select(Axis(1), &others);
    let x_train = features.select(Axis(0), &train_rows);
    let x_pred = features.select(Axis(0), &plan.missing_rows);

    // Classification targets are compacted to the classes present.
    let observed: Vec<f64> = train_rows.iter().map(|&i| state.encoded[[i, e]]).collect();
    let (values, labels, present) = match plan.task {
        Task::Regression => (observed, Vec::new(), Vec::new()),
        Task::Classification(k) => {
            let codes: Vec<usize> = observed.iter().map(|v| v.round().max(0.0) as usize).collect();
            let mut seen = vec![false; k.max(codes.iter().copied().max().unwrap_or(0) + 1)];
            for &c in &codes {
                seen[c] = true;
            }
            let present: Vec<usize> = (0..seen.len()).filter(|&c| seen[c]).collect();
            let compact: Vec<usize> = codes
                .iter()
                .map(|c| present.binary_search(c).expect("present class"))
                .collect();
            (Vec::new(), compact, present)
        }
    };

    if matches!(plan.task, Task::Classification(_)) && present.len() < 2 {
        let only = present.first().copied().unwrap_or(0) as f64;
        let predictions = vec![only; plan.missing_rows.len()];
        state.write(&plan, &predictions)?;
        return Ok(ColumnOutcome {
            predictions,
            params: None,
            searched: false,
            models_trained: 0,
            warning: None,
        });
    }

    let target = match plan.task {
        Task::Regression => Target::Values(&values),
        Task::Classification(_) => Target::Classes {
            labels: &labels,
            n_classes: present.len(),
        },
    };

    let mut searched = false;
    let params = match plan.cached_params {
        Some(p) => p,
        None if state.search_allowed => {
            searched = true;
            search_params(x_train.view(), target, config.search_trials, search_seed(config.seed, e))?
        }
        None => default_params(target.task(), train_rows.len(), others.len()),
    };

    let seeds = member_seeds(config.seed, e, config.ensemble_size);
    let member_predictions = seeds
        .par_iter()
        .map(|&seed| {
            let model = fit(x_train.view(), target, &params, seed)?;
            Ok(model.predict(x_pred.view())?.point_values())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let predictions: Vec<f64> = (0..plan.missing_rows.len())
        .map(|r| match plan.task {
            Task::Regression => {
                member_predictions.iter().map(|p| p[r]).sum::<f64>() / member_predictions.len() as f64
            }
            Task::Classification(_) => {
                let votes: Vec<usize> = member_predictions.iter().map(|p| p[r] as usize).collect();
                present[majority_vote(&votes)] as f64
            }
        })
        .collect();

    state.plans[plan_index].cached_params = Some(params);
    state.write(&plan, &predictions)?;
    Ok(ColumnOutcome {
        predictions,
        params: Some(params),
        searched,
        models_trained: seeds.len(),
        warning: None,
    })
}

/// Summary of one pass.
#[derive(Debug, Clone, Default)]
pub struct PassSummary {
    pub outcomes: Vec<ColumnOutcome>,
    pub column_ms: Vec<f64>,
}

/// Impute every planned column once, in ascending column order.
///
/// Each column sees the predictions already written by earlier columns.
pub fn run_pass(state: &mut ImputeState, config: &ImputeConfig, pass_index: usize) -> Result<PassSummary> {
    let mut summary = PassSummary::default();
    for p in 0..state.plans.len() {
        let started = Instant::now();
        let outcome = impute_column(state, p, config)?;
        let ms = started.elapsed().as_secs_f64() * 1e3;
        log::info!(
            "pass {} column `{}`: {} cells, {:.1} ms",
            pass_index + 1,
            state.clean.column_names()[state.plans[p].table_column],
            state.plans[p].missing_rows.len(),
            ms
        );
        summary.outcomes.push(outcome);
        summary.column_ms.push(ms);
    }
    Ok(summary)
}

/// Which matrix the boosted models train on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignSource {
    Preimputed,
    NanReplaced,
    FullyTransformed,
}

impl DesignSource {
    pub fn from_config(config: &ImputeConfig) -> Self {
        if config.use_full_transform {
            DesignSource::FullyTransformed
        } else if config.mf_nan_replace {
            DesignSource::NanReplaced
        } else {
            DesignSource::Preimputed
        }
    }

    fn name(self) -> &'static str {
        match self {
            DesignSource::Preimputed => "preimputed",
            DesignSource::NanReplaced => "nan_replaced",
            DesignSource::FullyTransformed => "fully_transformed",
        }
    }
}

/// Impute `table` and return the completed table with a run report.
pub fn xpute(table: &Table, config: &ImputeConfig) -> Result<(Table, RunReport)> {
    xpute_with_output(table, config, None)
}

/// Like [`xpute`], writing intermediates and plots under `out_dir` when
/// the configuration asks for them.
pub fn xpute_with_output(table: &Table, config: &ImputeConfig, out_dir: Option<&Path>) -> Result<(Table, RunReport)> {
    config.validate()?;
    if table.n_rows() == 0 || table.n_cols() == 0 {
        return Err(Error::EmptyTable);
    }
    let started = Instant::now();
    let triple = preprocessing_df(table, config.impute_zeros, config.pre_imputation)?;
    let mut report = RunReport {
        warnings: triple.warnings.clone(),
        ..Default::default()
    };

    let source = DesignSource::from_config(config);
    report.design = source.name().to_string();
    let design = match source {
        DesignSource::Preimputed => triple.preimputed.clone(),
        _ => {
            let f = adaptive_factorize(triple.encoded.view(), triple.preimputed.view(), config.seed)?;
            report.factorization_method = Some(f.method);
            report.factorization_rank = Some(f.rank);
            if source == DesignSource::FullyTransformed {
                f.fully_transformed
            } else {
                f.nan_replaced
            }
        }
    };
    report.preprocess_ms = started.elapsed().as_secs_f64() * 1e3;

    let exports = out_dir.filter(|_| config.export_intermediates);
    if let Some(dir) = exports {
        let names = triple.encoded_names();
        write_csv_file(&triple.clean, dir.join("clean.csv"))?;
        write_csv_file(&matrix_table(table, &names, triple.encoded.view())?, dir.join("encoded.csv"))?;
        write_csv_file(&matrix_table(table, &names, triple.preimputed.view())?, dir.join("preimputed.csv"))?;
        write_csv_file(&matrix_table(table, &names, design.view())?, dir.join("design.csv"))?;
    }

    let mut state = ImputeState::new(&triple, design, config)?;
    report.search_gate_passed = state.search_allowed;
    report.columns = state
        .plans
        .iter()
        .map(|p| ColumnReport {
            name: table.column_names()[p.table_column].clone(),
            kind: p.kind,
            n_missing: p.missing_rows.len(),
            params: None,
            searched: false,
            models_trained: 0,
            pass_ms: Vec::new(),
        })
        .collect();

    for pass in 0..config.n_iterations {
        let pass_started = Instant::now();
        let before = state.current_values();
        let summary = run_pass(&mut state, config, pass)?;
        report
            .pass_deltas
            .push(iteration_delta(before.view(), state.current_values().view(), state.missing.view()));
        report.pass_ms.push(pass_started.elapsed().as_secs_f64() * 1e3);
        for ((col, outcome), ms) in report.columns.iter_mut().zip(&summary.outcomes).zip(&summary.column_ms) {
            col.params = outcome.params.or(col.params);
            col.searched |= outcome.searched;
            col.models_trained += outcome.models_trained;
            col.pass_ms.push(*ms);
            report.models_trained += outcome.models_trained;
            if let Some(w) = &outcome.warning {
                report.warnings.push(w.clone());
            }
        }
        if let Some(dir) = exports {
            let names = triple.encoded_names();
            let snapshot = matrix_table(table, &names, state.current_values().view())?;
            write_csv_file(&snapshot, dir.join(format!("encoded_pass_{}.csv", pass + 1)))?;
        }
    }

    let output = restore_excluded(state.clean, table, &triple);
    if let (Some(dir), true) = (out_dir, config.save_plots) {
        crate::bench::write_imputation_plots(&output, &triple, &state.missing, dir)?;
    }
    report.total_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok((output, report))
}

/// Excluded columns go back to the caller's cells untouched.
fn restore_excluded(mut clean: Table, original: &Table, triple: &PreprocessedTriple) -> Table {
    for (j, profile) in triple.profiles.iter().enumerate() {
        if profile.kind == ColumnKind::Excluded {
            clean.set_column(j, original.column(j));
        }
    }
    clean
}

/// Wrap a numeric matrix as a table with the source's row ids.
pub fn matrix_table(source: &Table, names: &[String], matrix: ArrayView2<f64>) -> Result<Table> {
    let cells = matrix.iter().map(|&v| Cell::number(v)).collect();
    Table::new(source.id_name(), source.row_ids().to_vec(), names.to_vec(), cells)
}
