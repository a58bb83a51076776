use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use moevcs::objectives::price_at;
use moevcs::TariffParams;

fn moevcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moevcs"))
        .args(args)
        .output()
        .expect("spawn moevcs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn exit_codes() {
    assert_eq!(moevcs(&["--help"]).status.code(), Some(0));
    assert_eq!(moevcs(&["run", "--help"]).status.code(), Some(0));
    assert_eq!(
        moevcs(&["run", "--set", "5", "--out", "x"]).status.code(),
        Some(1)
    );
    assert_eq!(moevcs(&["run", "--out", "x"]).status.code(), Some(1));
    assert_eq!(moevcs(&["bogus"]).status.code(), Some(1));
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(
        moevcs(&[
            "run",
            "--set",
            "1",
            "--pop",
            "7",
            "--gens",
            "2",
            "--out",
            arg(&out)
        ])
        .status
        .code(),
        Some(1)
    );
    let missing = tmp.path().join("missing.json");
    assert_eq!(
        moevcs(&[
            "run",
            "--scenario",
            arg(&missing),
            "--pop",
            "8",
            "--gens",
            "2",
            "--out",
            arg(&out)
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn scenario_export_and_validate() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a.json");
    let b = tmp.path().join("b.json");
    for p in [&a, &b] {
        let o = moevcs(&[
            "scenario",
            "export",
            "--set",
            "2",
            "--seed",
            "4",
            "--out",
            arg(p),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let o = moevcs(&["scenario", "validate", arg(&a)]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("valid: true"));
    assert!(stdout.contains("genome_dim: 1200"));

    let corrupt = tmp.path().join("corrupt.json");
    fs::write(&corrupt, "{ not json").unwrap();
    assert_eq!(
        moevcs(&["scenario", "validate", arg(&corrupt)])
            .status
            .code(),
        Some(2)
    );

    let text = fs::read_to_string(&a).unwrap().replacen(
        "\"soc_required\": 50.0",
        "\"soc_required\": 80.0",
        1,
    );
    let invalid = tmp.path().join("invalid.json");
    fs::write(&invalid, text).unwrap();
    let o = moevcs(&["scenario", "validate", arg(&invalid)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("valid: false"));
}

#[test]
fn run_writes_consistent_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("r");
    let o = moevcs(&[
        "run",
        "--set",
        "1",
        "--pop",
        "20",
        "--gens",
        "10",
        "--seed",
        "7",
        "--out",
        arg(&out),
        "--baselines",
        "b1,B2",
        "--progress",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let progress = String::from_utf8(o.stderr).unwrap();
    assert!(progress.starts_with("gen,n_feasible,best_f1,best_f2,best_f3,hypervolume\n1,"));
    assert_eq!(progress.lines().filter(|l| !l.starts_with('[')).count(), 11);

    let front = rows(&out.join("pareto_front.csv"));
    assert!(!front.is_empty());
    assert!(front.iter().all(|r| r.len() == 4 && r[3] == 0.0));

    let tariff = TariffParams::default();
    for label in ["MOMinObj13", "MOMinObj2", "B1", "B2"] {
        let load = rows(&out.join(format!("load_profile_{label}.csv")));
        let price = rows(&out.join(format!("tou_tariff_{label}.csv")));
        let schedule = rows(&out.join(format!("schedule_{label}.csv")));
        assert_eq!(load.len(), 29);
        for (t, (l, p)) in load.iter().zip(&price).enumerate() {
            assert_eq!(l[0], (t + 1) as f64);
            assert!(l[3] <= 0.0);
            assert!((l[4] - (l[1] + l[2] + l[3])).abs() < 1e-9);
            // columns agree with the schedule rows for the slot
            let slot_rows = schedule.iter().filter(|r| r[1] == l[0]);
            let (c, d) = slot_rows.fold((0.0, 0.0), |(c, d), r| (c + r[3], d + r[4]));
            assert!((c - l[2]).abs() < 1e-9 && (d - l[3]).abs() < 1e-9);
            assert!((price_at(l[1], l[2], l[3], &tariff) - p[1]).abs() < 1e-9);
        }
    }

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["feasible"], true);
    assert_eq!(summary["evaluations"], 200);
    assert_eq!(summary["scenario"]["genome_dim"], 960);
    assert_eq!(summary["hypervolume_history"].as_array().unwrap().len(), 10);
    let labels: Vec<&str> = summary["solutions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["label"].as_str().unwrap())
        .collect();
    assert_eq!(labels, ["MOMinObj13", "MOMinObj2", "B1", "B2"]);
}

#[test]
fn base_load_override() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("base.csv");
    let body: String = (1..=29).map(|t| format!("{t},{}\n", 50 + t)).collect();
    fs::write(&csv, format!("slot,kw\n{body}")).unwrap();
    let scenario = tmp.path().join("s.json");
    let o = moevcs(&[
        "scenario",
        "export",
        "--set",
        "1",
        "--out",
        arg(&scenario),
        "--base-load",
        arg(&csv),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = moevcs::Scenario::load(&scenario).unwrap();
    assert_eq!(s.base_load[0], 51.0);
    assert_eq!(s.base_load[28], 79.0);

    fs::write(&csv, "slot,kw\n1,30\n").unwrap();
    let o = moevcs(&[
        "scenario",
        "export",
        "--set",
        "1",
        "--out",
        arg(&scenario),
        "--base-load",
        arg(&csv),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
