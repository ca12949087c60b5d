use std::fs;
use std::process::Command;

use vrp_core::cli::{run, EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED};

fn vrp(args: &[&str]) -> (u8, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("vrp").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn help_and_version_succeed() {
    let (code, out, _) = vrp(&["--help"]);
    assert_eq!(code, EXIT_OK);
    for sub in ["thresholds", "simulate", "sweep", "verify"] {
        assert!(out.contains(sub), "{out}");
    }
    assert_eq!(vrp(&["--version"]).0, EXIT_OK);
    assert_eq!(vrp(&["simulate", "--help"]).0, EXIT_OK);
}

#[test]
fn usage_errors_exit_one() {
    let (code, _, err) = vrp(&["thresholds", "beta:0,1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("beta:0,1"), "{err}");
    assert_eq!(vrp(&["thresholds"]).0, EXIT_USAGE);
    assert_eq!(vrp(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(vrp(&["simulate", "uniform", "--q1", "1.5"]).0, EXIT_USAGE);
    assert_eq!(vrp(&["simulate", "uniform", "--q1", "0.8:0.2"]).0, EXIT_USAGE);
    assert_eq!(vrp(&["simulate", "uniform", "--reps", "0"]).0, EXIT_USAGE);
    assert_eq!(vrp(&["simulate", "uniform", "--threads", "0"]).0, EXIT_USAGE);
    assert_eq!(vrp(&["verify", "uniform", "--N", "21", "--M", "10"]).0, EXIT_USAGE);
    assert_eq!(vrp(&["thresholds", "beta:1,2", "--dist", "beta:2,1"]).0, EXIT_USAGE);
}

#[test]
fn thresholds_formats() {
    let (code, out, _) = vrp(&["thresholds", "beta:20,2", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    let lower = v["thresholds"]["theta_lower"].as_f64().unwrap();
    assert!((lower - 0.77295).abs() < 5e-4);
    assert_eq!(v["two_round"]["holds"], false);

    let (_, text, _) = vrp(&["thresholds", "--dist", "beta:4,2", "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].len(), header.len());
    let col = |name: &str| &rows[0][header.iter().position(|h| h == name).unwrap()];
    assert_eq!(col("distribution"), "beta:4,2");
    assert_eq!(col("theta_lower").parse::<f64>().unwrap(), 0.0);
    assert!((col("theta_mu").parse::<f64>().unwrap() - 0.68619).abs() < 1e-4);

    let (_, text, _) = vrp(&["thresholds", "uniform"]);
    assert!(text.contains("median"), "{text}");
}

#[test]
fn simulate_is_reproducible_and_seed_sensitive() {
    let args = ["simulate", "beta:0.3,0.2", "--T", "2", "--reps", "20000", "--seed", "5", "--format", "json"];
    let (code, a, _) = vrp(&args);
    assert_eq!(code, EXIT_OK);
    let (_, b, _) = vrp(&args);
    assert_eq!(a, b);
    let mut other = args;
    other[7] = "6";
    let (_, c, _) = vrp(&other);
    assert_ne!(json(&a)["p_hat"], json(&c)["p_hat"]);
    let v = json(&a);
    let z = v["z_score"].as_f64().unwrap();
    assert!(z.abs() < 4.0, "{z}");
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# defaults\ndist = beta:20,2\nT = 3\nreps = 500\nseed = 9\nformat = json\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let (code, out, _) = vrp(&["simulate", "--config", cfg]);
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["config"]["replications"], 500);
    assert_eq!(v["config"]["rounds"], 3);
    assert_eq!(v["config"]["distribution"], "beta:20,2");

    let (_, out, _) = vrp(&["simulate", "--config", cfg, "--reps", "700", "uniform"]);
    let v = json(&out);
    assert_eq!(v["config"]["replications"], 700);
    assert_eq!(v["config"]["distribution"], "uniform");
    assert_eq!(v["config"]["seed"], 9);
}

#[test]
fn config_file_rejects_foreign_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "dist = uniform\nN = 51\n").unwrap();
    let (code, _, err) = vrp(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("N"), "{err}");

    fs::write(&cfg, "dist uniform\n").unwrap();
    assert_eq!(vrp(&["thresholds", "--config", cfg.to_str().unwrap()]).0, EXIT_USAGE);
    assert_eq!(vrp(&["thresholds", "--config", "/nonexistent/vrp.cfg"]).0, EXIT_USAGE);
}

#[test]
fn out_file_and_trajectory_dump() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let dump = dir.path().join("paths.csv");
    let (code, out, _) = vrp(&[
        "simulate",
        "beta:20,2",
        "--T",
        "3",
        "--reps",
        "50",
        "--format",
        "json",
        "--out",
        report.to_str().unwrap(),
        "--dump-trajectories",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    assert!(json(&fs::read_to_string(&report).unwrap())["successes"].as_u64().unwrap() <= 50);
    let csv = fs::read_to_string(&dump).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("replication,t,proposer_type,proposal,status_quo,winner"));
    assert_eq!(lines.count(), 150);
}

#[test]
fn sweep_reports_every_horizon() {
    let (code, out, _) = vrp(&["sweep", "beta:20,2", "--Tmax", "5", "--reps", "4000", "--seed", "3", "--format", "csv"]);
    assert_eq!(code, EXIT_OK);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("T,closed_form,monte_carlo,stderr"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        let t = i as f64 + 2.0;
        assert_eq!(row[0], t);
        assert!((row[1] - (1.0 - 0.03210800826907127f64.powf(t - 1.0))).abs() < 2e-4);
        assert!((row[2] - row[1]).abs() <= 4.0 * row[3] + 1e-3);
    }
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
}

#[test]
fn verify_exit_status_reflects_the_checks() {
    let (code, out, _) = vrp(&["verify", "uniform", "--N", "21", "--M", "101", "--K", "41", "--T", "2"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("pass"));

    let (code, out, _) =
        vrp(&["verify", "beta:20,2", "--N", "41", "--M", "101", "--K", "81", "--T", "2", "--format", "csv"]);
    assert_eq!(code, EXIT_VERIFY_FAILED);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("round,type_index,q_index,analytic,oracle,gap"));
    assert!(lines.next().is_some());
}

#[test]
fn binary_thread_count_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_vrp"))
            .args(["simulate", "beta:0.3,0.2", "--T", "4", "--reps", "100000", "--q1", "0.2:0.9"])
            .args(["--format", "csv", "--threads", threads])
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("3");
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut reader = csv::Reader::from_reader(a.stdout.as_slice());
    let row = reader.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "beta:0.3,0.2");
}

#[test]
fn binary_usage_error_status() {
    let out = Command::new(env!("CARGO_BIN_EXE_vrp")).args(["thresholds", "beta:0,1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
