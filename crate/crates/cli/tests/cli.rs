use std::path::Path;
use std::process::{Command, Output};

fn corrconv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrconv"))
        .args(args)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SWEEP: &str = r#"{"experiment": "oversmoothing", "n": 60, "p": 0.4, "q": 0.1, "sigma": 0.5,
    "k_max": 4, "trials": 3, "kinds": ["corrected_unnormalized", "vanilla_rw"], "master_seed": 11}"#;

#[test]
fn run_writes_csv_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let out = dir.path().join("out");
    let res = corrconv(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let csv = std::fs::read_to_string(out.join("oversmoothing.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 5);
    for name in ["error_vs_k.svg", "exact_rate_vs_k.svg"] {
        let svg = std::fs::read_to_string(out.join(name)).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert_eq!(svg.matches("<polyline").count(), 2, "{name}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let strip = |path: &Path| -> Vec<String> {
        std::fs::read_to_string(path)
            .unwrap()
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    let mut runs = Vec::new();
    for (i, seed) in ["11", "11", "12"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let res = corrconv(&[
            "run",
            "--config",
            &cfg,
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(res.status.success());
        runs.push(strip(&out.join("oversmoothing.csv")));
    }
    assert_eq!(runs[0], runs[1]);
    assert_ne!(runs[0], runs[2]);
}

#[test]
fn plot_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "").unwrap();
    let res = corrconv(&[
        "plot",
        "--csv",
        csv.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!res.status.success());
}

#[test]
fn bad_config_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "partial_sweep"}"#);
    let res = corrconv(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!res.status.success());
}

#[test]
fn walk_audit_prints_table() {
    let res = corrconv(&["oracle", "walk-audit", "--n", "4", "--k", "2", "--t", "2"]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let out = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "ell,count,bound");
    assert_eq!(lines.len(), 1 + 8);
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        let ell: usize = f[0].parse().unwrap();
        let count: u128 = f[1].parse().unwrap();
        let bound: u128 = f[2].parse().unwrap();
        assert!(count <= bound);
        if ell > 4 {
            assert_eq!(count, 0);
        }
    }
}

#[test]
fn walk_audit_size_guard() {
    let res = corrconv(&["oracle", "walk-audit", "--n", "50", "--k", "4", "--t", "4"]);
    assert!(!res.status.success());
}

#[test]
fn shipped_configs_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            corrconv_core::experiments::ExperimentConfig::from_path(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
