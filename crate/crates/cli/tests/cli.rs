use std::path::Path;
use std::process::{Command, Output};

fn pollgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pollgame")).args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).expect("column");
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn simulate_is_byte_stable() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = pollgame(&["simulate", "--tmax", "3", "--samples", "31", "--out", d.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for s in ["pi1", "pi2", "pi3", "pi41", "pi42"] {
        let name = format!("simulate_{s}.csv");
        assert_eq!(read(a.path(), &name), read(b.path(), &name));
    }
    let csv = read(a.path(), "simulate_pi2.csv");
    assert_eq!(csv.lines().next(), Some("t,v1,v2,v3,z,zbar,zstar"));
    assert_eq!(csv.lines().count(), 32);
    // the myopic player emits at its maximum outside the coalition
    assert!(column(&csv, "v3").iter().all(|&v| v == 10.0));
}

#[test]
fn simulate_oracle_column_tracks_closed_form() {
    let out = pollgame(&["simulate", "--structure", "pi41", "--tmax", "2", "--samples", "9", "--oracle"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let csv = text.split("# simulate_pi41.csv\n").nth(1).unwrap();
    for (z, zo) in column(csv, "z").iter().zip(column(csv, "z_oracle")) {
        assert!((z - zo).abs() < 1e-8, "{z} vs {zo}");
    }
}

#[test]
fn unsustainable_input_names_player_and_margin() {
    let out = pollgame(&["simulate", "--xi1", "8", "--structure", "pi1", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("player 1") && err.contains("margin -3.5"), "{err}");
}

#[test]
fn stability_reference_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = pollgame(&["stability", "--tmax", "2", "--samples", "5", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "stability.json")).unwrap();
    assert_eq!(report["satisfied"], true);
    assert!((report["Y"].as_f64().unwrap() - 6.565).abs() < 1e-12);
    let zset = read(dir.path(), "zset.csv");
    assert!(column(&zset, "surplus").iter().all(|&s| s > 0.0));
}

#[test]
fn malformed_config_exits_2_with_the_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "delta1 = 0.45\ntau = 1.5\n").unwrap();
    let out = pollgame(&["stability", "--params", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tau"));

    std::fs::write(&cfg, "delta1 0.45\n").unwrap();
    assert_eq!(pollgame(&["simulate", "--params", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.cfg");
    std::fs::write(&cfg, "q2 = 1\n").unwrap();
    let from_file = pollgame(&["stability", "--params", cfg.to_str().unwrap(), "--samples", "2", "--format", "json"]);
    let overridden =
        pollgame(&["stability", "--params", cfg.to_str().unwrap(), "--q2", "5", "--samples", "2", "--format", "json"]);
    let y = |o: &Output| {
        let text = String::from_utf8_lossy(&o.stdout).into_owned();
        let doc = text.split("# stability.json\n").nth(1).unwrap().split("# zset.json").next().unwrap().to_string();
        serde_json::from_str::<serde_json::Value>(&doc).unwrap()["Y"].as_f64().unwrap()
    };
    assert!((y(&overridden) - 6.565).abs() < 1e-12);
    assert!((y(&from_file) - 6.565).abs() > 1.0);
}

#[test]
fn allocate_residuals_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let out = pollgame(&[
        "allocate", "--tmax", "3", "--samples", "13", "--alpha", "0.5,0.3,0.2", "--strong-tc", "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(&read(dir.path(), "allocation_summary.json")).unwrap();
    assert!(summary["max_abs_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(summary["strong_tc"]["found"], false);
    assert!(summary["strong_tc"]["min_gap"].as_f64().unwrap() > 0.0);
    let alloc = read(dir.path(), "allocation.csv");
    for (z, l) in column(&alloc, "zeta1").iter().zip(column(&alloc, "lower1")) {
        assert!(*z >= l);
    }
}

#[test]
fn bad_weights_exit_2() {
    assert_eq!(pollgame(&["allocate", "--alpha", "0.5,0.6,0.1"]).status.code(), Some(2));
    assert_eq!(pollgame(&["allocate", "--alpha", "a,b"]).status.code(), Some(2));
}

#[test]
fn sweep_is_ordered_and_reproducible() {
    let run = |extra: &[&str]| {
        let mut args = vec!["sweep", "--sweep", "q2=0.5:20:24"];
        args.extend_from_slice(extra);
        let out = pollgame(&args);
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let grid = run(&[]);
    assert_eq!(grid, run(&[]));
    let body = grid.split("# sweep.csv\n").nth(1).unwrap();
    let q2 = column(body, "q2");
    assert_eq!(q2.len(), 24);
    assert_eq!((q2[0], q2[23]), (0.5, 20.0));
    assert!(body.lines().skip(1).all(|l| l.contains(",ok,true,")));

    let seeded = run(&["--seed", "11"]);
    assert_eq!(seeded, run(&["--seed", "11"]));
    assert_ne!(seeded, run(&["--seed", "12"]));
    let s = column(seeded.split("# sweep.csv\n").nth(1).unwrap(), "q2");
    assert!(s.windows(2).all(|w| w[0] <= w[1]) && s.iter().all(|&x| (0.5..=20.0).contains(&x)));
}

#[test]
fn sweep_reports_unsustainable_points() {
    let out = pollgame(&["sweep", "--sweep", "xi1=0.1:8:3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("not_sustainable"));
    assert_eq!(pollgame(&["sweep", "--sweep", "nope=0:1:3"]).status.code(), Some(2));
    assert_eq!(pollgame(&["sweep"]).status.code(), Some(2));
}

#[test]
fn verify_passes_on_reference() {
    let out = pollgame(&["verify"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains(",false\n"));
}
