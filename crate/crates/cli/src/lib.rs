//! Command-line front end: `impute`, `bench` and `inspect`.

pub mod config_file;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use tabfill::bench::{run_benchmark, BenchOptions, MaskScope, Method};
use tabfill::engine::{xpute_with_output, ENSEMBLE_RANGE, ITERATIONS_RANGE, SEARCH_TRIALS_RANGE};
use tabfill::preprocess::{classify_columns, normalize_missing_tokens};
use tabfill::{parse_csv, write_csv_file, ImputeConfig, PreImputeStrategy, Table};

pub use config_file::{load_config_file, parse_config};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "TABFILL_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{flag}: {message}")]
    Flag { flag: &'static str, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("cannot read input: {0}")]
    Input(String),

    #[error(transparent)]
    Runtime(#[from] tabfill::Error),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) | CliError::Output(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tabfill", version, about = "Impute missing values in mixed-type CSV tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Impute a CSV file and write `<stem>_imputed.csv` and `report.json`.
    Impute {
        input: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
        /// Defaults to $TABFILL_OUTPUT_DIR, then the input's directory.
        #[arg(long, value_name = "DIR")]
        output_dir: Option<PathBuf>,
    },
    /// Mask a complete CSV file, impute it with each method and score the result.
    Bench {
        input: PathBuf,
        #[command(flatten)]
        flags: ConfigFlags,
        #[arg(long, value_name = "DIR")]
        output_dir: Option<PathBuf>,
        /// Comma-separated masking fractions in (0, 1).
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4")]
        fractions: Vec<f64>,
        /// Comma-separated methods: engine, mean, knn or knn:<k>.
        #[arg(long, value_delimiter = ',', default_value = "engine,mean,knn:5")]
        methods: Vec<String>,
        /// Which cells may be masked: all, continuous or categorical.
        #[arg(long, default_value = "all")]
        scope: String,
        /// Timed runs per cell; the median time is reported.
        #[arg(long, default_value_t = 1)]
        repetitions: usize,
    },
    /// Print each column's inferred kind, missing count and category count.
    Inspect { input: PathBuf },
}

/// Flags mirroring the configuration keys. Unset flags leave the file or
/// default value in place.
#[derive(Debug, Default, Args)]
struct ConfigFlags {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Boosted models per column (3..9).
    #[arg(long, value_name = "N")]
    ensemble_size: Option<usize>,
    /// ColumnMean, KNNImputer[:k] or MixType[:k].
    #[arg(long, value_name = "STRATEGY")]
    pre_imputation: Option<String>,
    /// Hyperparameter search trials (5..50).
    #[arg(long, value_name = "N")]
    search_trials: Option<usize>,
    /// Imputation passes (1..9).
    #[arg(long, value_name = "N")]
    iterations: Option<usize>,
    /// Treat zeros as missing.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, require_equals = true, default_missing_value = "true", value_parser = parse_switch)]
    impute_zeros: Option<bool>,
    /// Train on the factorization output at the gaps.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, require_equals = true, default_missing_value = "true", value_parser = parse_switch)]
    mf_nan_replace: Option<bool>,
    /// Train on the full factorization reconstruction.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, require_equals = true, default_missing_value = "true", value_parser = parse_switch)]
    full_transform: Option<bool>,
    /// Enable hyperparameter search where the dataset allows it.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, require_equals = true, default_missing_value = "true", value_parser = parse_switch)]
    search: Option<bool>,
    /// Write intermediate matrices to the output directory.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, require_equals = true, default_missing_value = "true", value_parser = parse_switch)]
    export_intermediates: Option<bool>,
    /// Write density plots to the output directory.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, require_equals = true, default_missing_value = "true", value_parser = parse_switch)]
    save_plots: Option<bool>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn parse_switch(s: &str) -> Result<bool, String> {
    config_file::parse_bool(s).ok_or_else(|| format!("expected true or false, got `{s}`"))
}

fn flag_for(name: &str) -> &'static str {
    match name {
        "ensemble_size" => "--ensemble-size",
        "search_trials" => "--search-trials",
        "n_iterations" => "--iterations",
        "k" | "pre_imputation" => "--pre-imputation",
        "use_full_transform" | "mf_nan_replace" => "--full-transform",
        _ => "--config",
    }
}

fn range_error(flag: &'static str, value: usize, (lo, hi): (usize, usize)) -> CliError {
    CliError::Flag {
        flag,
        message: format!("{value} is out of range, expected {lo}..{hi}"),
    }
}

impl ConfigFlags {
    /// Defaults, then the config file, then flags.
    fn resolve(&self) -> Result<ImputeConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => load_config_file(path)?,
            None => ImputeConfig::default(),
        };
        if let Some(v) = self.ensemble_size {
            config.ensemble_size = v;
        }
        if let Some(v) = &self.pre_imputation {
            config.pre_imputation = v.parse::<PreImputeStrategy>().map_err(|e| CliError::Flag {
                flag: "--pre-imputation",
                message: e.to_string(),
            })?;
        }
        if let Some(v) = self.search_trials {
            config.search_trials = v;
        }
        if let Some(v) = self.iterations {
            config.n_iterations = v;
        }
        let switches = [
            (self.impute_zeros, &mut config.impute_zeros),
            (self.mf_nan_replace, &mut config.mf_nan_replace),
            (self.full_transform, &mut config.use_full_transform),
            (self.search, &mut config.search_enabled),
            (self.export_intermediates, &mut config.export_intermediates),
            (self.save_plots, &mut config.save_plots),
        ];
        for (flag, field) in switches {
            if let Some(v) = flag {
                *field = v;
            }
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }

        let checks = [
            ("--ensemble-size", config.ensemble_size, ENSEMBLE_RANGE),
            ("--search-trials", config.search_trials, SEARCH_TRIALS_RANGE),
            ("--iterations", config.n_iterations, ITERATIONS_RANGE),
        ];
        for (flag, value, range) in checks {
            if value < range.0 || value > range.1 {
                return Err(range_error(flag, value, range));
            }
        }
        if config.mf_nan_replace && config.use_full_transform {
            return Err(CliError::Flag {
                flag: "--full-transform",
                message: "cannot be combined with --mf-nan-replace".into(),
            });
        }
        config.validate().map_err(|e| match e {
            tabfill::Error::OutOfRange { name, .. } => CliError::Flag {
                flag: flag_for(name),
                message: e.to_string(),
            },
            other => CliError::Runtime(other),
        })?;
        Ok(config)
    }
}

fn read_input(path: &Path) -> Result<Table, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_csv(&bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// `--output-dir`, else the environment default, else the input's directory.
pub fn resolve_output_dir(flag: Option<&Path>, env: Option<OsString>, input: &Path) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = env.filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    match input.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn output_dir(flag: Option<&Path>, input: &Path) -> Result<PathBuf, CliError> {
    let dir = resolve_output_dir(flag, std::env::var_os(OUTPUT_DIR_ENV), input);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn parse_scope(s: &str) -> Result<MaskScope, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "all" => Ok(MaskScope::AllImputable),
        "continuous" => Ok(MaskScope::ContinuousOnly),
        "categorical" => Ok(MaskScope::CategoricalOnly),
        _ => Err(CliError::Flag {
            flag: "--scope",
            message: format!("`{s}` is not one of all, continuous, categorical"),
        }),
    }
}

fn impute(input: &Path, flags: &ConfigFlags, out_flag: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let config = flags.resolve()?;
    let table = read_input(input)?;
    let dir = output_dir(out_flag, input)?;
    let (imputed, report) = xpute_with_output(&table, &config, Some(&dir))?;
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "table".into());
    let result = dir.join(format!("{stem}_imputed.csv"));
    write_csv_file(&imputed, &result)?;
    let report_path = dir.join("report.json");
    fs::write(&report_path, report.to_json().map_err(tabfill::Error::from)?)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    writeln!(out, "imputed {} column(s); wrote {}", report.columns.len(), result.display())?;
    writeln!(out, "report: {}", report_path.display())?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench(
    input: &Path,
    flags: &ConfigFlags,
    out_flag: Option<&Path>,
    fractions: &[f64],
    methods: &[String],
    scope: &str,
    repetitions: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let config = flags.resolve()?;
    if let Some(&f) = fractions.iter().find(|&&f| !(f > 0.0 && f < 1.0)) {
        return Err(CliError::Flag {
            flag: "--fractions",
            message: format!("{f} is out of range, expected values strictly between 0 and 1"),
        });
    }
    let methods = methods
        .iter()
        .map(|m| {
            m.parse::<Method>().map_err(|e| CliError::Flag {
                flag: "--methods",
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if repetitions == 0 {
        return Err(CliError::Flag {
            flag: "--repetitions",
            message: "0 is out of range, expected at least 1".into(),
        });
    }
    let scope = parse_scope(scope)?;
    let table = read_input(input)?;
    let dir = output_dir(out_flag, input)?;
    let options = BenchOptions {
        seed: config.seed,
        scope,
        repetitions,
    };
    let report = run_benchmark(&table, fractions, &methods, &config, &options)?;
    report.write_to(&dir, config.save_plots)?;
    for r in &report.rows {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        writeln!(
            out,
            "{:>5} {:<8} rmse {} accuracy {} ({:.1} ms)",
            r.fraction,
            r.method,
            fmt(r.rmse),
            fmt(r.categorical_accuracy),
            r.wall_time_ms
        )?;
    }
    writeln!(out, "report: {}", dir.join("bench_report.csv").display())?;
    if let Some(first) = report.failures.first() {
        return Err(CliError::Runtime(tabfill::Error::InvalidData(format!(
            "{} benchmark cell(s) failed; first: {} at {}: {}",
            report.failures.len(),
            first.method,
            first.fraction,
            first.message
        ))));
    }
    Ok(())
}

fn inspect(input: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let table = read_input(input)?;
    let (_, profiles) = classify_columns(&normalize_missing_tokens(&table));
    writeln!(out, "{} rows, {} columns (id column `{}`)", table.n_rows(), table.n_cols(), table.id_name())?;
    writeln!(out, "{:<24} {:<12} {:>8} {:>10}", "column", "kind", "missing", "categories")?;
    for (name, p) in table.column_names().iter().zip(&profiles) {
        writeln!(out, "{:<24} {:<12} {:>8} {:>10}", name, format!("{:?}", p.kind), p.n_missing, p.categories.len())?;
    }
    Ok(())
}

/// Run with explicit output streams; returns the process exit code.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Impute {
            input,
            flags,
            output_dir,
        } => impute(input, flags, output_dir.as_deref(), out),
        Command::Bench {
            input,
            flags,
            output_dir,
            fractions,
            methods,
            scope,
            repetitions,
        } => bench(input, flags, output_dir.as_deref(), fractions, methods, scope, *repetitions, out),
        Command::Inspect { input } => inspect(input, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Run against the process's stdout and stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_dir_precedence() {
        let input = Path::new("/data/in/table.csv");
        assert_eq!(resolve_output_dir(None, None, input), PathBuf::from("/data/in"));
        assert_eq!(resolve_output_dir(None, Some("/env".into()), input), PathBuf::from("/env"));
        assert_eq!(
            resolve_output_dir(Some(Path::new("/flag")), Some("/env".into()), input),
            PathBuf::from("/flag")
        );
        assert_eq!(resolve_output_dir(None, None, Path::new("t.csv")), PathBuf::from("."));
    }

    #[test]
    fn flag_errors_name_the_flag() {
        let flags = ConfigFlags {
            ensemble_size: Some(10),
            ..Default::default()
        };
        let msg = flags.resolve().unwrap_err().to_string();
        assert!(msg.contains("--ensemble-size") && msg.contains("3..9"), "{msg}");
        let flags = ConfigFlags {
            pre_imputation: Some("KNNImputer:0".into()),
            ..Default::default()
        };
        assert!(flags.resolve().unwrap_err().to_string().contains("--pre-imputation"));
    }

    #[test]
    fn help_and_version_exit_zero() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run_cli_with(["tabfill", "--version"], &mut out, &mut err), 0);
        assert!(String::from_utf8_lossy(&out).contains(env!("CARGO_PKG_VERSION")));
        assert_eq!(run_cli_with(["tabfill", "impute", "--help"], &mut out, &mut err), 0);
        assert_eq!(run_cli_with(["tabfill", "impute", "x.csv", "--bogus"], &mut out, &mut err), 1);
        assert!(String::from_utf8_lossy(&err).contains("Usage"));
    }
}
