//! Flat `key = value` configuration files.

use std::fs;
use std::path::Path;

use tabfill::{ImputeConfig, PreImputeStrategy};

use crate::CliError;

/// Parse a boolean written as true/false, yes/no, on/off or 1/0.
pub fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

/// Canonical key for a configuration key or one of its alternative names.
pub fn canonical_key(key: &str) -> Option<&'static str> {
    Some(match key {
        "impute_zeros" => "impute_zeros",
        "pre_imputation" => "pre_imputation",
        "ensemble_size" | "xgb_models" => "ensemble_size",
        "mf_nan_replace" | "mf_for_xgb" => "mf_nan_replace",
        "use_full_transform" | "use_transformed_df" => "use_full_transform",
        "search_enabled" | "search" | "optuna_for_xgb" => "search_enabled",
        "search_trials" | "optuna_n_trials" => "search_trials",
        "n_iterations" | "iterations" => "n_iterations",
        "export_intermediates" => "export_intermediates",
        "save_result" | "save_imputed_df" => "save_result",
        "save_plots" => "save_plots",
        "seed" => "seed",
        _ => return None,
    })
}

/// Apply one `key = value` setting to `config`.
pub fn apply_setting(config: &mut ImputeConfig, key: &'static str, value: &str) -> Result<(), String> {
    let flag = |v: &str| parse_bool(v).ok_or_else(|| format!("expected true or false, got `{v}`"));
    let count = |v: &str| v.parse::<usize>().map_err(|_| format!("expected a non-negative integer, got `{v}`"));
    match key {
        "impute_zeros" => config.impute_zeros = flag(value)?,
        "pre_imputation" => {
            config.pre_imputation = value.parse::<PreImputeStrategy>().map_err(|e| e.to_string())?;
        }
        "ensemble_size" => config.ensemble_size = count(value)?,
        "mf_nan_replace" => config.mf_nan_replace = flag(value)?,
        "use_full_transform" => config.use_full_transform = flag(value)?,
        "search_enabled" => config.search_enabled = flag(value)?,
        "search_trials" => config.search_trials = count(value)?,
        "n_iterations" => config.n_iterations = count(value)?,
        "export_intermediates" => config.export_intermediates = flag(value)?,
        "save_result" => config.save_result = flag(value)?,
        "save_plots" => config.save_plots = flag(value)?,
        "seed" => config.seed = value.parse().map_err(|_| format!("expected an unsigned integer, got `{value}`"))?,
        _ => unreachable!("keys are canonicalized first"),
    }
    Ok(())
}

/// Parse configuration text on top of the defaults. Every line is checked
/// as it is applied so errors carry its number.
pub fn parse_config(text: &str) -> Result<ImputeConfig, CliError> {
    let mut config = ImputeConfig::default();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| CliError::Config { line: line_no, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let canonical = canonical_key(key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
        apply_setting(&mut config, canonical, value).map_err(|m| err(format!("{key}: {m}")))?;
        config.validate().map_err(|e| err(e.to_string()))?;
    }
    Ok(config)
}

/// Read and validate a configuration file.
pub fn load_config_file(path: impl AsRef<Path>) -> Result<ImputeConfig, CliError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_of(text: &str) -> usize {
        match parse_config(text) {
            Err(CliError::Config { line, .. }) => line,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_defaults() {
        assert_eq!(parse_config("").unwrap(), ImputeConfig::default());
        assert_eq!(parse_config("# nothing\n\n   \n").unwrap(), ImputeConfig::default());
    }

    #[test]
    fn values_and_aliases() {
        let c = parse_config(
            "n_iterations = 9\nxgb_models = 5 # more members\noptuna_for_xgb = yes\n\
             optuna_n_trials=20\npre_imputation = KNNImputer:7\nmf_for_xgb = true\nseed = 3\n",
        )
        .unwrap();
        assert_eq!(c.n_iterations, 9);
        assert_eq!(c.ensemble_size, 5);
        assert!(c.search_enabled && c.mf_nan_replace);
        assert_eq!(c.search_trials, 20);
        assert_eq!(c.pre_imputation, PreImputeStrategy::Knn { k: 7 });
        assert_eq!(c.seed, 3);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of("seed = 1\n\nn_iterations = 0\n"), 3);
        assert_eq!(line_of("colour = red\n"), 1);
        assert_eq!(line_of("# c\nensemble_size = three\n"), 2);
        assert_eq!(line_of("impute_zeros\n"), 1);
        assert_eq!(line_of("mf_nan_replace = true\nuse_full_transform = true\n"), 2);
        let msg = parse_config("colour = red").unwrap_err().to_string();
        assert!(msg.contains("colour") && msg.contains("line 1"), "{msg}");
    }
}
