use std::path::Path;
use std::process::{Command, Output};

use gsd::dataset::parse_scores_csv;
use gsd::dist::{self, GsdParams};
use gsd::simstudy::record_seed;
use gsd::CsvFormat;
use serde_json::Value;

fn gsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsd"))
        .args(args)
        .env_remove("GSD_LOG_LEVEL")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn json_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn pmf_prints_table() {
    let text = stdout(&gsd(&["pmf", "--psi", "3", "--rho", "1"]));
    assert_eq!(text, "1:0.0\n2:0.0\n3:1.0\n4:0.0\n5:0.0\n");
    let text = stdout(&gsd(&["pmf", "--psi", "3", "--rho", "0.75"]));
    assert_eq!(text, "1:0.0625\n2:0.25\n3:0.375\n4:0.25\n5:0.0625\n");
    let text = stdout(&gsd(&["pmf", "--model", "qnormal", "--psi", "3", "--sigma", "1", "--M", "7"]));
    assert_eq!(text.lines().count(), 7);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["pmf", "--psi", "3"][..],
        &["pmf", "--psi", "6", "--rho", "0.5"],
        &["pmf", "--psi", "3", "--rho", "0"],
        &["pmf", "--model", "normal", "--psi", "3", "--rho", "0.5"],
        &["fit"],
        &["nonsense"],
        &["curves", "--points", "1"],
        &["sample", "--psi", "3", "--rho", "0.5", "--n", "0"],
    ] {
        assert_eq!(gsd(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = gsd(&["fit", "--input", "/nonexistent/x.csv"]);
    assert_eq!(out.status.code(), Some(3));

    let bad = write(dir.path(), "bad.csv", "pvs_id,subject_id,score\np1,s1,3\np1,s2,6\n");
    let out = gsd(&["fit", "--input", &bad]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");

    let empty = write(dir.path(), "empty.csv", "");
    assert_eq!(gsd(&["batch", "--input", &empty]).status.code(), Some(3));
}

#[test]
fn curves_are_symmetric_at_center() {
    let text = stdout(&gsd(&["curves", "--sigma", "1"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sigma_o,psi_o,psi_u,sigma_u_sq"));
    let center: Vec<&str> = lines.find(|l| l.split(',').nth(1) == Some("3.0")).unwrap().split(',').collect();
    assert_eq!(center[2], "3.0");

    let text = stdout(&gsd(&["curves", "--sigma", "0.5,2", "--points", "9"]));
    assert_eq!(text.lines().count(), 1 + 18);

    let text = stdout(&gsd(&["curves", "--ceiling", "--points", "5"]));
    assert_eq!(text.lines().next(), Some("psi_o,v_max,sigma_u_sq"));
    assert!(text.contains("3.0,4.0,2.16235146"));
}

#[test]
fn sample_round_trips_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["long", "wide"] {
        let path = dir.path().join(format!("{format}.csv"));
        let path = path.to_str().unwrap();
        let args = [
            "sample", "--psi", "2.6", "--rho", "0.4", "--n", "24", "--count", "4", "--seed", "9", "--format", format,
            "--output", path,
        ];
        stdout(&gsd(&args));
        let first = std::fs::read(path).unwrap();
        stdout(&gsd(&args));
        assert_eq!(first, std::fs::read(path).unwrap());

        let csv_format: CsvFormat = format.parse().unwrap();
        let d = parse_scores_csv(path, csv_format, 5).unwrap();
        assert_eq!(d.len(), 4);
        let truth = GsdParams::new(2.6, 0.4, 5).unwrap();
        for (i, s) in d.samples.iter().enumerate() {
            let want = dist::sample_with_id(&format!("s{}", i + 1), &truth, 24, record_seed(9, i as u64)).unwrap();
            assert_eq!(s.id(), want.id());
            assert_eq!(s.counts(), want.counts());
        }
    }
}

#[test]
fn fit_flags_degenerate_samples() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "s.csv",
        "pvs_id,subject_id,score\nones,a,1\nones,b,1\nones,c,1\nmixed,a,2\nmixed,b,4\nmixed,c,3\nmixed,d,5\n",
    );
    let rows = json_lines(&stdout(&gsd(&["fit", "--input", &input, "--model", "gsd"])));
    assert_eq!(rows.len(), 2);
    let ones = rows.iter().find(|r| r["id"] == "ones").unwrap();
    assert_eq!((ones["psi"].as_f64(), ones["rho"].as_f64()), (Some(1.0), Some(1.0)));
    assert_eq!(ones["degenerate"], true);
    let mixed = rows.iter().find(|r| r["id"] == "mixed").unwrap();
    assert_eq!(mixed["degenerate"], false);
    assert_eq!(mixed["model"], "GSD");

    let rows = json_lines(&stdout(&gsd(&["fit", "--input", &input, "--model", "normal"])));
    let ones = rows.iter().find(|r| r["id"] == "ones").unwrap();
    assert_eq!(ones["degenerate"], true);
    assert!(ones["sigma_o"].is_null());
}

#[test]
fn gof_against_fixed_and_fitted_models() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("pvs_id,subject_id,score\n");
    for (score, count) in [(1, 10), (2, 40), (3, 60), (4, 40), (5, 10)] {
        for j in 0..count {
            text += &format!("p,{score}_{j},{score}\n");
        }
    }
    let input = write(dir.path(), "b.csv", &text);
    let rows = json_lines(&stdout(&gsd(&["gof", "--input", &input, "--psi", "3", "--rho", "0.75"])));
    assert!(rows[0]["statistic"].as_f64().unwrap() < 1e-20);
    assert_eq!(rows[0]["p_value"].as_f64(), Some(1.0));
    assert_eq!(rows[0]["df"].as_u64(), Some(4));
    assert_eq!(rows[0]["reject"], false);

    let rows = json_lines(&stdout(&gsd(&["gof", "--input", &input, "--model", "qnormal"])));
    assert_eq!(rows[0]["df"].as_u64(), Some(2));
    assert!(rows[0]["p_value"].as_f64().unwrap() > 0.05);
}

#[test]
fn batch_writes_consistent_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores.csv");
    let scores = scores.to_str().unwrap();
    stdout(&gsd(&[
        "sample", "--psi", "3.4", "--rho", "0.8", "--n", "24", "--count", "30", "--seed", "2", "--output", scores,
    ]));
    let json_path = dir.path().join("report.json");
    let csv_path = dir.path().join("rows.csv");
    let run = || {
        stdout(&gsd(&[
            "batch",
            "--input",
            scores,
            "--alpha",
            "0.05",
            "--seed",
            "3",
            "--output",
            json_path.to_str().unwrap(),
            "--csv",
            csv_path.to_str().unwrap(),
        ]));
        (std::fs::read(&json_path).unwrap(), std::fs::read(&csv_path).unwrap())
    };
    let first = run();
    assert_eq!(first, run());

    let report: Value = serde_json::from_slice(&first.0).unwrap();
    assert_eq!(report["n_samples"], 30);
    assert_eq!(report["config"]["seed"], 3);
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 90);
    for summary in report["global"].as_array().unwrap() {
        let model = &summary["model"];
        let mine: Vec<&Value> = rows.iter().filter(|r| &r["model"] == model).collect();
        let tested = mine.iter().filter(|r| !r["p_value"].is_null()).count();
        let below = mine.iter().filter(|r| r["p_value"].as_f64().is_some_and(|p| p < 0.05)).count();
        assert_eq!(summary["n_tests"].as_u64(), Some(tested as u64));
        assert_eq!(summary["n_below_alpha"].as_u64(), Some(below as u64));
    }

    let csv = String::from_utf8(first.1).unwrap();
    assert_eq!(csv.lines().next(), Some("id,n,model,location,spread,loglik,chi2,df,p_value,flags"));
    assert_eq!(csv.lines().count(), 91);
}

#[test]
fn simstudy_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let design = write(
        dir.path(),
        "d.toml",
        "n_values = [6, 12]\npsi_grid = [2.0, 3.5]\nrho_grid = [0.3, 0.9]\nrepetitions = 3\n\n[fit]\nn_restarts = 2\n",
    );
    let a = stdout(&gsd(&["simstudy", "--design", &design, "--seed", "7"]));
    let b = stdout(&gsd(&["simstudy", "--design", &design, "--seed", "7"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().next(), Some("n,true_psi,true_rho,rep,est_psi,est_rho,converged,loglik"));
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 2 * 3);
    let c = stdout(&gsd(&["simstudy", "--design", &design, "--seed", "8"]));
    assert_ne!(a, c);

    let summary = dir.path().join("summary.json");
    stdout(&gsd(&["simstudy", "--design", &design, "--summary", summary.to_str().unwrap()]));
    let v: Value = serde_json::from_slice(&std::fs::read(&summary).unwrap()).unwrap();
    assert_eq!(v["per_n"].as_array().unwrap().len(), 2);

    let bad = write(dir.path(), "bad.toml", "n_values = [6]\nflavour = 1\n");
    assert_eq!(gsd(&["simstudy", "--design", &bad]).status.code(), Some(2));
}

#[test]
fn log_level_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "s.csv", "pvs_id,subject_id,score\np,a,2\np,b,3\n");
    let quiet = gsd(&["fit", "--input", &input]);
    assert!(quiet.stderr.is_empty());
    let loud = Command::new(env!("CARGO_BIN_EXE_gsd"))
        .args(["fit", "--input", &input])
        .env("GSD_LOG_LEVEL", "info")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&loud.stderr).contains("read 1 samples"));
}
