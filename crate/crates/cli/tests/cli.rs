use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn divsparse(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_divsparse"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("run divsparse")
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().into_string().unwrap(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn bounds_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsparse(
        &[
            "bounds",
            "--kappa",
            "1e-4",
            "--J",
            "1",
            "--alpha",
            "0.1",
            "--sweep",
            "snr_db:0:60:13:lin",
            "--estimators",
            "thm1",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "thm1.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("abscissa,ordinate,source,kappa,snr_db,J,alpha"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 13);
    let ordinates: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(ordinates.windows(2).all(|w| w[1] <= w[0]), "{ordinates:?}");
    let abscissae: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(abscissae.windows(2).all(|w| w[0] < w[1]));
    assert!(!csv.contains("NaN") && !csv.contains("inf") && !csv.contains('\r'));
}

#[test]
fn zero_estimators_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsparse(&["bounds", "--estimators", ""], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = divsparse(&["bounds", "--estimators", "thm9"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = divsparse(&["bounds", "--sweep", "rho:0:1:1:lin"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = divsparse(&["bounds", "--bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_identical() {
    let args = [
        "bounds",
        "--kappa",
        "1e-3",
        "--snr-db",
        "30",
        "--J",
        "2",
        "--sweep",
        "rho:0.05:1:4:log",
        "--estimators",
        "thm1,mf",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(divsparse(&args, a.path()).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_divsparse"))
        .args(args)
        .args(["--threads", "3", "--out"])
        .arg(b.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(files(a.path()), files(b.path()));
}

#[test]
fn simulate_writes_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsparse(
        &[
            "simulate", "--kappa", "0.1", "--snr-db", "20", "--rho", "1", "--n", "40", "--trials", "3", "--seed", "7",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "trials_mf.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("trial,seed,distortion,threshold,support_size"));
    let distortions: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(distortions.len(), 3);

    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "summary_mf.json")).unwrap();
    let mean = distortions.iter().sum::<f64>() / 3.0;
    assert!((summary["mean_distortion"].as_f64().unwrap() - mean).abs() < 1e-15);
    let achieved = distortions.iter().filter(|&&d| d <= 0.1).count() as f64 / 3.0;
    assert_eq!(summary["achieved_fraction"].as_f64().unwrap(), achieved);
    for key in [
        "q05",
        "q50",
        "q95",
        "trials",
        "seed",
        "pipeline",
        "theory_sigma2",
        "theory_threshold",
    ] {
        assert!(!summary[key].is_null(), "{key}");
    }
    assert_eq!(summary["trials"], 3);
}

#[test]
fn scalar_pipeline_needs_sigma2() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsparse(
        &["simulate", "--estimators", "scalar", "--n", "100", "--trials", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let out = divsparse(
        &[
            "simulate",
            "--estimators",
            "scalar",
            "--sigma2",
            "0.01",
            "--kappa",
            "0.05",
            "--n",
            "200",
            "--trials",
            "2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "bounds", "kappa": 1e-3, "snr_db": 30, "J": 4, "sweep": "snr_db:10:30:3:lin", "estimators": ["thm2"]}"#,
    )
    .unwrap();
    let out = divsparse(&["bounds", "--config", cfg.to_str().unwrap(), "--J", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "thm2.csv");
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(5) == Some("2")));
}

#[test]
fn plot_script_references_produced_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsparse(&["figures", "--points", "3"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let present = files(dir.path());
    let script = read(dir.path(), "plot.gp");
    let referenced: Vec<&str> = script
        .split('\'')
        .skip(1)
        .step_by(2)
        .filter(|s| s.ends_with(".csv"))
        .collect();
    assert_eq!(referenced.len(), present.len() - 1);
    for f in referenced {
        assert!(present.contains_key(f), "{f}");
    }
    for j in [1, 4, 16] {
        assert!(present.contains_key(&format!("fig3_J{j}_thm1.csv")));
    }
    // below every bound the distortion saturates at 1 - κ
    let fig4 = read(dir.path(), "fig4_J1_thm1.csv");
    let first: f64 = fig4.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(first, 1.0 - 1e-4);
}

#[test]
fn selfcheck_tolerances_are_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let out = divsparse(&["selfcheck"], dir.path());
    assert!(out.status.success());
    let report = read(dir.path(), "selfcheck.csv");
    assert!(report.lines().skip(1).count() >= 20);
    assert!(report.lines().skip(1).all(|l| l.ends_with(",PASS")));

    let out = divsparse(&["selfcheck", "--tol", "xi2_closed_form=1e-15"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    let report = read(dir.path(), "selfcheck.csv");
    let failing: Vec<&str> = report.lines().filter(|l| l.ends_with(",FAIL")).collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0].starts_with("xi2_closed_form,"));

    let out = divsparse(&["selfcheck", "--tol", "no_such_check=1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
