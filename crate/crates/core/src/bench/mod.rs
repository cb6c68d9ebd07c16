//! Evaluation harness: hide known cells, impute, and score the result
//! against the hidden values.

mod density;
mod mask;
mod metrics;

pub use density::{density_curve, density_svg, gaussian_kde, silverman_bandwidth, DensityCurve, DENSITY_POINTS};
pub use mask::{mask_random, unmask, MaskScope, MaskSpec, MaskedCell};
pub use metrics::{categorical_accuracy, mse, rmse};

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use ndarray::Array2;
use serde::Serialize;

use crate::engine::{xpute, ImputeConfig};
use crate::error::{Error, Result};
use crate::preprocess::{preprocessing_df, PreImputeStrategy, PreprocessedTriple};
use crate::profile::ColumnKind;
use crate::table::{Cell, Table};

/// An imputer the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    /// The full boosted pipeline.
    Engine,
    /// Column mean / mode.
    Mean,
    Knn(usize),
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Engine => f.write_str("engine"),
            Method::Mean => f.write_str("mean"),
            Method::Knn(k) => write!(f, "knn:{k}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "engine" => Ok(Method::Engine),
            "mean" => Ok(Method::Mean),
            "knn" => Ok(Method::Knn(crate::preprocess::DEFAULT_K)),
            _ => s
                .strip_prefix("knn:")
                .and_then(|k| k.parse().ok())
                .filter(|&k| k > 0)
                .map(Method::Knn)
                .ok_or_else(|| Error::range("method", s.clone(), "engine, mean, knn or knn:<k>")),
        }
    }
}

/// Write a dense fill back into the cleaned table, decoding labels, and
/// restore excluded columns from `original`.
pub fn fill_table(original: &Table, triple: &PreprocessedTriple, values: &Array2<f64>) -> Result<Table> {
    let mut out = triple.clean.clone();
    for (e, &j) in triple.columns.iter().enumerate() {
        for i in 0..out.n_rows() {
            if !triple.encoded[[i, e]].is_nan() {
                continue;
            }
            let v = values[[i, e]];
            let cell = match &triple.maps[j] {
                Some(map) => Cell::Text(map.decode_value(v)?.to_string()),
                None => Cell::number(v),
            };
            out.set(i, j, cell);
        }
    }
    for (j, p) in triple.profiles.iter().enumerate() {
        if p.kind == ColumnKind::Excluded {
            out.set_column(j, original.column(j));
        }
    }
    Ok(out)
}

/// Impute with a pre-imputation strategy alone.
pub fn baseline_impute(table: &Table, method: Method) -> Result<Table> {
    let strategy = match method {
        Method::Mean => PreImputeStrategy::ColumnMean,
        Method::Knn(k) => PreImputeStrategy::Knn { k },
        Method::Engine => {
            return Err(Error::InvalidData("the engine is not a baseline method".into()));
        }
    };
    let triple = preprocessing_df(table, false, strategy)?;
    fill_table(table, &triple, &triple.preimputed)
}

pub fn impute_with(table: &Table, method: Method, config: &ImputeConfig) -> Result<Table> {
    match method {
        Method::Engine => xpute(table, config).map(|(t, _)| t),
        baseline => baseline_impute(table, baseline),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub fraction: f64,
    pub method: String,
    pub n_masked: usize,
    pub rmse: Option<f64>,
    pub mse: Option<f64>,
    pub categorical_accuracy: Option<f64>,
    /// Median over repetitions.
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchFailure {
    pub fraction: f64,
    pub method: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityRecord {
    pub fraction: f64,
    pub method: String,
    pub curve: DensityCurve,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub failures: Vec<BenchFailure>,
    pub densities: Vec<DensityRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub seed: u64,
    pub scope: MaskScope,
    /// Timed repetitions per cell; the median is reported.
    pub repetitions: usize,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            seed: 42,
            scope: MaskScope::AllImputable,
            repetitions: 1,
        }
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

fn numeric_column(table: &Table, col: usize) -> Vec<f64> {
    (0..table.n_rows()).filter_map(|i| table.get(i, col).as_number()).collect()
}

/// Mask at every fraction, run every method on the same masked table and
/// score it.
pub fn run_benchmark(
    table: &Table,
    fractions: &[f64],
    methods: &[Method],
    config: &ImputeConfig,
    options: &BenchOptions,
) -> Result<BenchReport> {
    if let Some(&bad) = fractions.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
        return Err(Error::range("fraction", bad, "(0, 1)"));
    }
    config.validate()?;
    let repetitions = options.repetitions.max(1);
    let mut report = BenchReport::default();

    for (fi, &fraction) in fractions.iter().enumerate() {
        let spec = MaskSpec {
            fraction,
            seed: options.seed.wrapping_add(fi as u64),
            scope: options.scope,
        };
        let (masked, truth) = match mask_random(table, &spec) {
            Ok(m) => m,
            Err(err) => {
                for m in methods {
                    report.failures.push(BenchFailure {
                        fraction,
                        method: m.to_string(),
                        message: err.to_string(),
                    });
                }
                continue;
            }
        };
        let masked_cols: Vec<usize> = {
            let mut c: Vec<usize> = truth.iter().filter(|t| t.original.as_number().is_some()).map(|t| t.col).collect();
            c.sort_unstable();
            c.dedup();
            c
        };

        for &method in methods {
            let mut times = Vec::with_capacity(repetitions);
            let mut result = None;
            for _ in 0..repetitions {
                let started = Instant::now();
                let out = impute_with(&masked, method, config);
                times.push(started.elapsed().as_secs_f64() * 1e3);
                result = Some(out);
            }
            let imputed = match result.expect("at least one repetition") {
                Ok(t) => t,
                Err(err) => {
                    log::warn!("{method} at {fraction}: {err}");
                    report.failures.push(BenchFailure {
                        fraction,
                        method: method.to_string(),
                        message: err.to_string(),
                    });
                    continue;
                }
            };
            let has_numeric = truth.iter().any(|t| t.original.as_number().is_some());
            let has_text = truth.iter().any(|t| t.original.as_text().is_some());
            let scored = (|| -> Result<BenchRow> {
                Ok(BenchRow {
                    fraction,
                    method: method.to_string(),
                    n_masked: truth.len(),
                    rmse: has_numeric.then(|| rmse(&imputed, &truth)).transpose()?,
                    mse: has_numeric.then(|| mse(&imputed, &truth)).transpose()?,
                    categorical_accuracy: has_text.then(|| categorical_accuracy(&imputed, &truth)).transpose()?,
                    wall_time_ms: median(&mut times),
                })
            })();
            match scored {
                Ok(row) => report.rows.push(row),
                Err(err) => {
                    report.failures.push(BenchFailure {
                        fraction,
                        method: method.to_string(),
                        message: err.to_string(),
                    });
                    continue;
                }
            }
            for &col in &masked_cols {
                let name = &table.column_names()[col];
                if let Some(curve) = density_curve(name, &numeric_column(table, col), &numeric_column(&imputed, col)) {
                    report.densities.push(DensityRecord {
                        fraction,
                        method: method.to_string(),
                        curve,
                    });
                }
            }
        }
    }
    Ok(report)
}

impl BenchReport {
    pub fn row(&self, fraction: f64, method: Method) -> Option<&BenchRow> {
        let name = method.to_string();
        self.rows.iter().find(|r| r.fraction == fraction && r.method == name)
    }

    /// Long format: one line per fraction, method and metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fraction,method,metric,value\n");
        for r in &self.rows {
            let metrics = [
                ("n_masked", Some(r.n_masked as f64)),
                ("rmse", r.rmse),
                ("mse", r.mse),
                ("categorical_accuracy", r.categorical_accuracy),
                ("wall_time_ms", Some(r.wall_time_ms)),
            ];
            for (name, value) in metrics {
                if let Some(v) = value {
                    out.push_str(&format!("{},{},{},{}\n", r.fraction, r.method, name, v));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// Write `bench_report.csv`, `bench_report.json`, one density CSV per
    /// fraction and method, and SVG plots when `plots` is set.
    pub fn write_to(&self, dir: &Path, plots: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("bench_report.csv"), self.to_csv())?;
        fs::write(dir.join("bench_report.json"), self.to_json()?)?;
        let mut groups: Vec<(f64, &str)> = self.densities.iter().map(|d| (d.fraction, d.method.as_str())).collect();
        groups.dedup();
        for (fraction, method) in groups {
            let tag = format!("{}_{}", sanitize(method), (fraction * 100.0).round() as i64);
            let mut csv = String::from("column,abscissa,density_original,density_imputed\n");
            for d in self.densities.iter().filter(|d| d.fraction == fraction && d.method == method) {
                let c = &d.curve;
                for i in 0..c.abscissa.len() {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        csv_field(&c.column),
                        c.abscissa[i],
                        c.density_original[i],
                        c.density_imputed[i]
                    ));
                }
                if plots {
                    let svg = density_svg(c, "original", &format!("{method} imputed"));
                    fs::write(dir.join(format!("density_{tag}_{}.svg", sanitize(&c.column))), svg)?;
                }
            }
            fs::write(dir.join(format!("density_{tag}.csv")), csv)?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Density plots of observed versus imputed values for every continuous
/// column that had gaps.
pub fn write_imputation_plots(
    output: &Table,
    triple: &PreprocessedTriple,
    missing: &Array2<bool>,
    dir: &Path,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (e, &j) in triple.columns.iter().enumerate() {
        if triple.profiles[j].kind != ColumnKind::Continuous {
            continue;
        }
        let (mut observed, mut imputed) = (Vec::new(), Vec::new());
        for i in 0..output.n_rows() {
            if let Some(v) = output.get(i, j).as_number() {
                if missing[[i, e]] {
                    imputed.push(v);
                } else {
                    observed.push(v);
                }
            }
        }
        let name = &output.column_names()[j];
        if let Some(curve) = density_curve(name, &observed, &imputed) {
            fs::write(
                dir.join(format!("density_{}.svg", sanitize(name))),
                density_svg(&curve, "observed", "imputed"),
            )?;
        }
    }
    Ok(())
}
