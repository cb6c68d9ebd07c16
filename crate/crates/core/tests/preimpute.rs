use std::collections::HashMap;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tabfill::knn::knn_impute;
use tabfill::preprocess::{pre_impute, PreImputeStrategy};
use tabfill::ColumnKind;

fn holey(n: usize, m: usize, rate: f64, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::from_shape_simple_fn((n, m), || (rng.random::<f64>() * 20.0 - 10.0).round() / 4.0);
    for v in x.iter_mut() {
        if rng.random::<f64>() < rate {
            *v = f64::NAN;
        }
    }
    // keep one value per column
    for j in 0..m {
        if x.column(j).iter().all(|v| v.is_nan()) {
            x[[0, j]] = 1.0;
        }
    }
    x
}

/// All-pairs nearest-neighbour fill written directly from the definition.
fn brute_force_knn(x: &Array2<f64>, k: usize) -> Array2<f64> {
    let (n, m) = x.dim();
    let mut out = x.clone();
    for i in 0..n {
        for j in 0..m {
            if !x[[i, j]].is_nan() {
                continue;
            }
            let mut donors = Vec::new();
            for r in 0..n {
                if r == i || x[[r, j]].is_nan() {
                    continue;
                }
                let both: Vec<usize> = (0..m).filter(|&c| !x[[i, c]].is_nan() && !x[[r, c]].is_nan()).collect();
                if both.is_empty() {
                    continue;
                }
                let sq: f64 = both.iter().map(|&c| (x[[i, c]] - x[[r, c]]).powi(2)).sum();
                donors.push(((m as f64 / both.len() as f64 * sq).sqrt(), r));
            }
            if donors.is_empty() {
                let obs: Vec<f64> = x.column(j).iter().copied().filter(|v| !v.is_nan()).collect();
                out[[i, j]] = obs.iter().sum::<f64>() / obs.len() as f64;
                continue;
            }
            // order by distance, then row
            donors.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut chosen: Vec<usize> = donors.iter().take(k).map(|d| d.1).collect();
            chosen.sort();
            out[[i, j]] = chosen.iter().map(|&r| x[[r, j]]).sum::<f64>() / chosen.len() as f64;
        }
    }
    out
}

fn same(a: &Array2<f64>, b: &Array2<f64>) -> bool {
    a.dim() == b.dim() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

#[test]
fn knn_matches_brute_force() {
    for seed in 0..10 {
        let x = holey(20, 6, 0.15, seed);
        for k in [1, 3, 5] {
            let fast = knn_impute(x.view(), k).unwrap().values;
            assert!(same(&fast, &brute_force_knn(&x, k)), "seed {seed}, k {k}");
        }
        let (via_pre, _) = pre_impute(x.view(), &[ColumnKind::Continuous; 6], PreImputeStrategy::Knn { k: 5 }).unwrap();
        assert!(same(&via_pre, &brute_force_knn(&x, 5)));
    }
}

#[test]
fn column_mean_and_mode_match_direct_computation() {
    for seed in 0..10 {
        let mut x = holey(20, 6, 0.15, seed);
        // columns 4 and 5 become label codes
        for j in 4..6 {
            x.column_mut(j).mapv_inplace(|v| if v.is_nan() { v } else { (v.abs() as i64 % 3) as f64 });
        }
        let kinds = [
            ColumnKind::Continuous,
            ColumnKind::Continuous,
            ColumnKind::Continuous,
            ColumnKind::Continuous,
            ColumnKind::Categorical,
            ColumnKind::Boolean,
        ];
        let (filled, warnings) = pre_impute(x.view(), &kinds, PreImputeStrategy::ColumnMean).unwrap();
        assert!(warnings.is_empty());
        for j in 0..6 {
            let obs: Vec<f64> = x.column(j).iter().copied().filter(|v| !v.is_nan()).collect();
            let expected = if j < 4 {
                let mut s = 0.0;
                for v in &obs {
                    s += v;
                }
                s / obs.len() as f64
            } else {
                let mut counts: HashMap<i64, usize> = HashMap::new();
                for v in &obs {
                    *counts.entry(*v as i64).or_default() += 1;
                }
                let top = *counts.values().max().unwrap();
                *counts.iter().filter(|(_, &c)| c == top).map(|(k, _)| k).min().unwrap() as f64
            };
            for i in 0..20 {
                if x[[i, j]].is_nan() {
                    assert_eq!(filled[[i, j]].to_bits(), expected.to_bits(), "seed {seed} ({i}, {j})");
                } else {
                    assert_eq!(filled[[i, j]], x[[i, j]]);
                }
            }
        }
    }
}

#[test]
fn mixed_strategy_uses_neighbours_only_for_labels() {
    let x = holey(20, 4, 0.2, 77);
    let kinds = [ColumnKind::Continuous, ColumnKind::Continuous, ColumnKind::Categorical, ColumnKind::Continuous];
    let (mix, _) = pre_impute(x.view(), &kinds, PreImputeStrategy::MixType { k: 3 }).unwrap();
    let (mean, _) = pre_impute(x.view(), &kinds, PreImputeStrategy::ColumnMean).unwrap();
    let knn = brute_force_knn(&x, 3);
    for i in 0..20 {
        for j in [0, 1, 3] {
            assert_eq!(mix[[i, j]].to_bits(), mean[[i, j]].to_bits());
        }
        assert_eq!(mix[[i, 2]].to_bits(), knn[[i, 2]].to_bits());
    }
}
