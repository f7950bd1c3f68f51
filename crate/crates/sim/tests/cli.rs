use std::path::PathBuf;
use std::process::{Command, Output};

fn gfcsa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfcsa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn csv_is_identical_across_worker_counts_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("small.toml");
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "2", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}.csv"));
        let trace = dir.path().join(format!("trace{i}.txt"));
        let o = gfcsa(&[
            "simulate",
            "--config",
            &cfg,
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
            "--trace",
            trace.to_str().unwrap(),
        ]);
        stdout(&o);
        outputs.push((std::fs::read(&out).unwrap(), std::fs::read(&trace).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let csv = String::from_utf8(outputs[0].0.clone()).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "k_a,protocol,sic,instantaneous,coherence,frames,users_total,users_lost,plr,plr_ci_lo,plr_ci_hi,\
         sum_rate_bpcu,sum_rate_bps,decode_attempts,subtractions,wall_s"
    );
    // 3 points, (chb, pab) x (plain, ic) plus two logical modes
    assert_eq!(csv.lines().count(), 1 + 3 * 6);
    let trace = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(trace
        .lines()
        .all(|l| l.starts_with("k_a=") && l.contains(" event=")));
}

#[test]
fn seed_changes_the_output() {
    let cfg = fixture("small.toml");
    let a = stdout(&gfcsa(&["simulate", "-c", &cfg, "--seed", "1"]));
    let b = stdout(&gfcsa(&["simulate", "-c", &cfg, "--seed", "2"]));
    assert_ne!(a, b);
}

#[test]
fn flags_override_the_file() {
    let cfg = fixture("small.toml");
    let out = stdout(&gfcsa(&[
        "simulate", "-c", &cfg, "--set", "k_a=12", "--set", "sic=prce", "--frames", "3", "--json",
    ]));
    let rows: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["k_a"], 12);
    assert_eq!(rows[0]["frames"], 3);
    assert_eq!(rows[1]["sic"], "prce");
}

#[test]
fn configuration_errors_exit_with_2() {
    let cfg = fixture("small.toml");
    for args in [
        vec!["simulate", "--set", "antenas=4"],
        vec!["simulate", "--set", "latency_budget=0.0001"],
        vec!["simulate", "-c", &cfg, "--set", "protocol=sc_ack"],
        vec!["simulate", "-c", "/nonexistent.toml"],
        vec!["fixture", "/nonexistent.txt"],
        vec!["simulate", "--bogus-flag"],
    ] {
        let o = gfcsa(&args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn peeling_fixture_file() {
    let out = stdout(&gfcsa(&["fixture", &fixture("peeling_example.txt")]));
    assert!(
        out.contains("wave 1: 2@(4,1) 6@(5,1) 8@(5,2) 4@(6,1)\n"),
        "{out}"
    );
    assert!(out.contains("sic decoded 8/8: 2 6 8 4 7 5 1 3\n"));
    assert!(out.contains("no-sic decoded 4/8: 2 4 6 8\n"));
    assert_eq!(out, stdout(&gfcsa(&["fixture", "--builtin", "peeling"])));
}

#[test]
fn slot_fixture_lists_events() {
    let out = stdout(&gfcsa(&["fixture", "--builtin", "slot"]));
    assert!(out.contains("mode=Chb/Plain decoded=2/3"));
    assert!(out.contains("mode=Chb/Instantaneous decoded=3/3"));
    assert!(out.contains("  frame=0 slot=0 pilot=6 user=2 event=decode phase=init iter=0"));
}

#[test]
fn analytic_curves() {
    let out = stdout(&gfcsa(&[
        "analytic",
        "plr-no-sic",
        "--set",
        "k_a=[180,500]",
    ]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "k_a,plr_no_sic");
    let v: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((v / 1.0617e-3 - 1.0).abs() < 1e-3);
    let out = stdout(&gfcsa(&[
        "analytic",
        "pfail",
        "--noise",
        "1",
        "--pilot-users",
        "1",
        "--slot-users",
        "36",
    ]));
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    let p: f64 = row[4].parse().unwrap();
    assert!((p / 1.621_538e-3 - 1.0).abs() < 1e-5);
}

#[test]
fn bench_logical_has_closed_form_column() {
    let out = stdout(&gfcsa(&[
        "bench-logical",
        "--set",
        "k_a=[300]",
        "--min-users",
        "3000",
    ]));
    let mut lines = out.lines();
    assert!(lines.next().unwrap().ends_with("plr_nosic_analytic"));
    assert_eq!(lines.count(), 1);
}
