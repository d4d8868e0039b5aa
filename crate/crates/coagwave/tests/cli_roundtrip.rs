//! End-to-end CLI drives: each subcommand writes its artifacts, the
//! artifacts parse back, and identical inputs reproduce identical bytes.

use std::fs;
use std::path::PathBuf;

use coagwave::cli::main_with_args;
use coagwave::io;

fn out_dir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    if dir.exists() {
        fs::remove_dir_all(&dir).expect("clean output dir");
    }
    dir
}

fn run(args: &[&str]) {
    main_with_args(std::iter::once("coagwave").chain(args.iter().copied()))
        .unwrap_or_else(|e| panic!("coagwave {}: {e}", args.join(" ")));
}

/// CSV body without the commented manifest header (whose timestamp differs
/// between runs by design).
fn body(path: &PathBuf) -> String {
    fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn simulate_writes_parseable_and_reproducible_artifacts() {
    let dir = out_dir("sim_a");
    let dir_b = out_dir("sim_b");
    // a short run keeps the test quick; the fit window needs the denser
    // snapshots
    let overrides = [
        "--param",
        "domain.t_end=20",
        "--param",
        "domain.snapshot_every=0.25",
    ];
    let mut args = vec![
        "simulate",
        "--model",
        "reduced6",
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(&overrides);
    run(&args);
    let mut args_b = vec![
        "simulate",
        "--model",
        "reduced6",
        "--out",
        dir_b.to_str().unwrap(),
    ];
    args_b.extend_from_slice(&overrides);
    run(&args_b);

    let profiles = io::read_csv(dir.join("profiles.csv")).expect("profiles parse");
    assert_eq!(profiles.columns, vec!["t", "x", "component", "value"]);
    assert!(profiles.manifest.contains_key("config_hash"));
    assert!(profiles.manifest.contains_key("speed"));
    let (t_last, xs, rho) = io::read_last_profile(&profiles, &coagwave::models::REDUCED6_NAMES)
        .expect("final snapshot reconstructs");
    assert!((t_last - 20.0).abs() < 1e-9);
    assert_eq!(rho.len(), 6 * xs.len());

    let speed = io::read_csv(dir.join("speed.csv")).expect("speed parse");
    let c: f64 = speed.manifest["speed"].parse().expect("speed value");
    assert!((c - 0.05).abs() < 0.015, "speed {c}");
    assert!(!speed.f64_column("x_front").expect("trace").is_empty());

    // identical config and version give identical bodies
    for name in ["profiles.csv", "speed.csv"] {
        assert_eq!(
            body(&dir.join(name)),
            body(&dir_b.join(name)),
            "{name} bodies differ between identical runs"
        );
    }
}

#[test]
fn bounds_contains_speed_from_stored_profile() {
    let dir = out_dir("bounds");
    run(&[
        "simulate",
        "--model",
        "reduced6",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let profile = dir.join("profiles.csv");
    // exits nonzero (Err) if the stored speed falls outside the bracket
    run(&[
        "bounds",
        "--model",
        "reduced6",
        "--profile",
        profile.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
}

#[test]
fn sweep_csv_has_every_series_and_sorted_values() {
    let dir = out_dir("sweep");
    run(&[
        "sweep",
        "--parameter",
        "D",
        "--values",
        "0.002,0.008",
        "--models",
        "one_eq,two_eq",
        "--estimates",
        "--out",
        dir.to_str().unwrap(),
        "--param",
        "domain.snapshot_every=0.2",
    ]);
    let table = io::read_csv(dir.join("sweep.csv")).expect("sweep parse");
    assert_eq!(table.columns, vec!["value", "series", "speed", "converged"]);
    let series_col = table.column("series").unwrap();
    let series: Vec<&str> = table.rows.iter().map(|r| r[series_col].as_str()).collect();
    for want in ["one_eq", "two_eq", "c1_narrow_zone", "c2_piecewise_linear"] {
        assert!(series.contains(&want), "missing series {want}");
    }
    let values = table.f64_column("value").expect("values");
    assert!(
        values.windows(2).all(|w| w[1] >= w[0]),
        "rows sorted by value"
    );
}

#[test]
fn equilibria_csv_lists_both_roots() {
    let dir = out_dir("equilibria");
    run(&["equilibria", "--csv", "--out", dir.to_str().unwrap()]);
    let table = io::read_csv(dir.join("equilibria.csv")).expect("equilibria parse");
    let roots = table.f64_column("t").expect("roots");
    assert_eq!(roots.len(), 2);
    assert!((roots[0] - 97.434792).abs() < 1e-4);
    assert!((roots[1] - 1393.611253).abs() < 1e-4);
    let stable = table.column("stable").unwrap();
    assert_eq!(table.rows[0][stable], "false");
    assert_eq!(table.rows[1][stable], "true");
}

#[test]
fn speed_subcommand_reuses_stored_measurement() {
    let dir = out_dir("speed_cmd");
    run(&[
        "simulate",
        "--model",
        "reduced6",
        "--out",
        dir.to_str().unwrap(),
    ]);
    run(&["speed", "--out", dir.to_str().unwrap()]);
}
