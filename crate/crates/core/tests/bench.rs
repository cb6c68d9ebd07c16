use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tabfill::bench::{
    mask_random, rmse, run_benchmark, unmask, BenchOptions, MaskScope, MaskSpec, Method, DENSITY_POINTS,
};
use tabfill::{parse_csv, Cell, ImputeConfig, Table};

fn table(n: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("id,x,y,z,kind\n");
    for i in 0..n {
        let x: f64 = rng.random();
        let y = x * 2.0 + rng.random::<f64>() * 0.1;
        let kind = if x > 0.5 { "hi" } else { "lo" };
        csv.push_str(&format!("r{i},{x},{y},{},{kind}\n", x - y));
    }
    parse_csv(csv.as_bytes()).unwrap()
}

#[test]
fn rmse_matches_a_summing_loop() {
    let original = table(50, 1);
    let spec = MaskSpec { fraction: 0.3, seed: 2, scope: MaskScope::ContinuousOnly };
    let (_, truth) = mask_random(&original, &spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut guess = original.clone();
    for t in &truth {
        guess.set(t.row, t.col, Cell::Number(rng.random::<f64>()));
    }
    let mut total = 0.0;
    let mut count = 0.0;
    for t in &truth {
        let a = match guess.get(t.row, t.col) {
            Cell::Number(v) => *v,
            _ => unreachable!(),
        };
        let b = match &t.original {
            Cell::Number(v) => *v,
            _ => unreachable!(),
        };
        total += (a - b) * (a - b);
        count += 1.0;
    }
    let oracle = (total / count).sqrt();
    assert!((rmse(&guess, &truth).unwrap() - oracle).abs() <= 1e-12);
    assert_eq!(rmse(&original, &truth).unwrap(), 0.0);
}

#[test]
fn masking_round_trips() {
    let original = table(40, 4);
    for seed in 0..20 {
        for fraction in [0.05, 0.25, 0.5] {
            let spec = MaskSpec { fraction, seed, scope: MaskScope::AllImputable };
            let (masked, truth) = mask_random(&original, &spec).unwrap();
            assert_eq!(truth.len(), (fraction * 160.0).floor() as usize);
            assert_eq!(unmask(&masked, &truth), original);
        }
    }
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let data = table(60, 5);
    let methods = [Method::Engine, Method::Mean, Method::Knn(3)];
    let run = || {
        run_benchmark(&data, &[0.1, 0.3], &methods, &ImputeConfig::default(), &BenchOptions::default()).unwrap()
    };
    let (mut a, mut b) = (run(), run());
    assert!(a.failures.is_empty(), "{:?}", a.failures);
    assert_eq!(a.rows.len(), 6);
    for r in a.rows.iter_mut().chain(b.rows.iter_mut()) {
        r.wall_time_ms = 0.0;
        assert!(r.rmse.unwrap() >= 0.0);
        let acc = r.categorical_accuracy.unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.densities, b.densities);
    assert!(a.densities.iter().all(|d| d.curve.density_imputed.len() == DENSITY_POINTS));

    let dir = tempfile::tempdir().unwrap();
    a.write_to(dir.path(), true).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("bench_report.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("0.3,engine,rmse,")));
    assert!(dir.path().join("bench_report.json").exists());
    assert!(dir.path().join("density_engine_10.csv").exists());
    assert!(dir.path().join("density_knn_3_30.csv").exists());
}

#[test]
fn mean_only_report_has_no_engine_rows() {
    let data = table(30, 6);
    let report =
        run_benchmark(&data, &[0.2], &[Method::Mean], &ImputeConfig::default(), &BenchOptions::default()).unwrap();
    assert!(report.rows.iter().all(|r| r.method == "mean"));
    assert!(run_benchmark(&data, &[1.0], &[Method::Mean], &ImputeConfig::default(), &BenchOptions::default()).is_err());
}
