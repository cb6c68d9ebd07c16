use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tabfill::engine::{impute_column, run_pass, xpute, ImputeConfig, ImputeState};
use tabfill::preprocess::{classify_columns, normalize_missing_tokens, preprocessing_df};
use tabfill::{parse_csv, to_csv_string, Cell, ColumnKind, Table};

/// Mixed table: two continuous columns, a 3-level label, a flag and a
/// free-text column, with gaps everywhere but the id column.
fn mixed(n: usize, missing: f64, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("id,a,b,colour,flag,note,c\n");
    for i in 0..n {
        let a: f64 = rng.random::<f64>() * 10.0;
        let b = 2.0 * a + rng.random::<f64>();
        let colour = ["red", "green", "blue"][(a / 3.34) as usize];
        let flag = if b > 10.0 { "yes" } else { "no" };
        let note = if i % 2 == 0 { format!("n{i}") } else { format!("{i}") };
        let c = a - b;
        let mut fields = [format!("{a:.3}"), format!("{b:.3}"), colour.to_string(), flag.to_string(), note, format!("{c:.3}")];
        for (j, f) in fields.iter_mut().enumerate() {
            if j != 4 && rng.random::<f64>() < missing {
                *f = if j % 2 == 0 { String::new() } else { "NA".into() };
            }
        }
        csv.push_str(&format!("r{i},{}\n", fields.join(",")));
    }
    parse_csv(csv.as_bytes()).unwrap()
}

fn quick() -> ImputeConfig {
    ImputeConfig::default()
}

#[test]
fn observed_cells_are_kept_and_gaps_filled() {
    for seed in 0..4 {
        let table = mixed(80, 0.15, seed);
        let (clean, profiles) = classify_columns(&normalize_missing_tokens(&table));
        let (out, report) = xpute(&table, &quick()).unwrap();
        assert_eq!(out.row_ids(), table.row_ids());
        for (j, profile) in profiles.iter().enumerate() {
            let kind = profile.kind;
            for i in 0..table.n_rows() {
                if kind == ColumnKind::Excluded {
                    assert_eq!(out.get(i, j), table.get(i, j));
                } else if !clean.get(i, j).is_missing() {
                    assert_eq!(out.get(i, j), clean.get(i, j), "cell ({i}, {j})");
                } else {
                    assert!(!out.get(i, j).is_missing(), "gap left at ({i}, {j})");
                }
            }
            if kind.is_categorical() {
                let observed: Vec<&Cell> = (0..table.n_rows()).map(|i| clean.get(i, j)).collect();
                for i in 0..table.n_rows() {
                    assert!(observed.contains(&out.get(i, j)), "label {:?} not observed", out.get(i, j));
                }
            }
        }
        assert_eq!(profiles[4].kind, ColumnKind::Excluded);
        assert!(report.models_trained > 0);
    }
}

#[test]
fn identical_runs_give_identical_csv() {
    let table = mixed(70, 0.2, 9);
    let config = ImputeConfig { n_iterations: 2, ..quick() };
    let (a, _) = xpute(&table, &config).unwrap();
    let (b, _) = xpute(&table, &config).unwrap();
    assert_eq!(to_csv_string(&a).unwrap(), to_csv_string(&b).unwrap());
    let (c, _) = xpute(&table, &ImputeConfig { seed: 7, ..config }).unwrap();
    assert_ne!(to_csv_string(&a).unwrap(), to_csv_string(&c).unwrap());
}

#[test]
fn complete_table_is_returned_as_cleaned() {
    let table = mixed(30, 0.0, 1);
    let (out, report) = xpute(&table, &quick()).unwrap();
    assert_eq!(out, table);
    assert_eq!(report.models_trained, 0);
    assert!(report.columns.is_empty());
}

#[test]
fn later_columns_train_on_earlier_predictions() {
    let table = mixed(60, 0.25, 3);
    let config = quick();
    let triple = preprocessing_df(&table, false, config.pre_imputation).unwrap();
    let mut state = ImputeState::new(&triple, triple.preimputed.clone(), &config).unwrap();
    assert!(state.plans.len() >= 2);
    let first = state.plans[0].clone();
    let later = state.plans[1].column;

    let untouched = state.clone();
    let outcome = impute_column(&mut state, 0, &config).unwrap();
    for (&i, &p) in first.missing_rows.iter().zip(&outcome.predictions) {
        assert_eq!(state.design[[i, first.column]], p);
        assert_eq!(state.encoded[[i, first.column]], p);
    }
    let changed = first
        .missing_rows
        .iter()
        .any(|&i| state.design[[i, first.column]] != untouched.design[[i, first.column]]);
    assert!(changed, "first column predictions equal the pre-imputed fill");

    let sequential = impute_column(&mut state, 1, &config).unwrap();
    let mut isolated = untouched;
    let without = impute_column(&mut isolated, 1, &config).unwrap();
    assert_ne!(sequential.predictions, without.predictions, "column {later} ignored the update");
}

#[test]
fn second_pass_reuses_parameters() {
    let table = mixed(120, 0.1, 4);
    let config = ImputeConfig { search_enabled: true, search_trials: 5, ..quick() };
    let triple = preprocessing_df(&table, false, config.pre_imputation).unwrap();
    let mut state = ImputeState::new(&triple, triple.preimputed.clone(), &config).unwrap();
    assert!(state.search_allowed);
    let first = run_pass(&mut state, &config, 0).unwrap();
    assert!(first.outcomes.iter().any(|o| o.searched));
    let cached: Vec<_> = state.plans.iter().map(|p| p.cached_params).collect();
    let second = run_pass(&mut state, &config, 1).unwrap();
    assert!(second.outcomes.iter().all(|o| !o.searched));
    assert_eq!(cached, state.plans.iter().map(|p| p.cached_params).collect::<Vec<_>>());
}

#[test]
fn no_plans_leave_state_unchanged() {
    let table = mixed(20, 0.0, 2);
    let config = quick();
    let triple = preprocessing_df(&table, false, config.pre_imputation);
    assert!(triple.is_ok());
    let triple = triple.unwrap();
    let mut state = ImputeState::new(&triple, triple.preimputed.clone(), &config).unwrap();
    let before = state.clone();
    let summary = run_pass(&mut state, &config, 0).unwrap();
    assert!(summary.outcomes.is_empty());
    assert_eq!(state.encoded, before.encoded);
    assert_eq!(state.clean, before.clean);
}

#[test]
fn invalid_configs_name_the_parameter() {
    let table = mixed(20, 0.1, 2);
    let cases = [
        (ImputeConfig { ensemble_size: 2, ..quick() }, "ensemble_size"),
        (ImputeConfig { ensemble_size: 10, ..quick() }, "ensemble_size"),
        (ImputeConfig { search_trials: 4, ..quick() }, "search_trials"),
        (ImputeConfig { search_trials: 51, ..quick() }, "search_trials"),
        (ImputeConfig { n_iterations: 0, ..quick() }, "n_iterations"),
        (ImputeConfig { n_iterations: 10, ..quick() }, "n_iterations"),
        (ImputeConfig { mf_nan_replace: true, use_full_transform: true, ..quick() }, "use_full_transform"),
    ];
    for (config, name) in cases {
        let err = xpute(&table, &config).unwrap_err().to_string();
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn factorized_designs_run() {
    let table = mixed(60, 0.15, 5);
    for config in [
        ImputeConfig { mf_nan_replace: true, ..quick() },
        ImputeConfig { use_full_transform: true, ..quick() },
    ] {
        let (out, report) = xpute(&table, &config).unwrap();
        assert!(report.factorization_method.is_some());
        assert!(report.factorization_rank.unwrap() >= 2);
        assert_eq!(out.n_rows(), 60);
    }
}

#[test]
fn intermediates_are_exported() {
    let dir = tempfile::tempdir().unwrap();
    let table = mixed(40, 0.15, 6);
    let config = ImputeConfig { export_intermediates: true, save_plots: true, n_iterations: 2, ..quick() };
    let (_, report) = tabfill::engine::xpute_with_output(&table, &config, Some(dir.path())).unwrap();
    for name in ["clean.csv", "encoded.csv", "preimputed.csv", "design.csv", "encoded_pass_1.csv", "encoded_pass_2.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().ends_with(".svg")));
    assert_eq!(report.pass_deltas.len(), 2);
    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert!(json.get("pass_deltas").is_some());
}
