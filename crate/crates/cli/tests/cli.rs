use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

fn secmimo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secmimo")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const GOOD: &str = "M = 2\nK = 10\nN_T = 100\nN_E = 10\nP_T_dB = 10\nphi = 0.75\nrho = 0.3\n";

#[test]
fn list_names_ten_scenarios() {
    let out = secmimo(&["list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().map(|l| l.split('\t').next().unwrap()).collect();
    assert_eq!(names, ["fig0", "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"]);
}

#[test]
fn validate_reports_invariants_with_lines() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(dir.path(), "ok.cfg", GOOD);
    assert_eq!(secmimo(&["validate", "--config", &ok]).status.code(), Some(0));

    let bad_phi = write(dir.path(), "phi.cfg", &GOOD.replace("phi = 0.75", "phi = 1.5"));
    let out = secmimo(&["validate", "--config", &bad_phi]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("line 6") && text.contains("phi"), "{text}");

    let bad_k = write(dir.path(), "k.cfg", &GOOD.replace("K = 10", "K = 120"));
    let text = String::from_utf8(secmimo(&["validate", "--config", &bad_k]).stdout).unwrap();
    assert!(text.contains("line 2") && text.contains("K"), "{text}");

    let missing = dir.path().join("nope.cfg");
    let out = secmimo(&["validate", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("nope.cfg"));
}

#[test]
fn custom_single_point_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", GOOD);
    let csv = dir.path().join("out.csv");
    let start = Instant::now();
    let out = secmimo(&[
        "run", "--scenario", "custom", "--config", &cfg, "--out", csv.to_str().unwrap(),
        "--data", "SZF", "--an", "SNS", "--evaluator", "analytic", "--no-header-timestamp",
    ]);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("scenario,sweep_var,sweep_value,data_precoder,an_precoder,evaluator,phi,"));
    assert!(lines[1].starts_with("custom,none,0.75,SZF,SNS,analytic,0.75,"));
    assert!(lines[1].ends_with(",0,0,OK"));
}

#[test]
fn same_seed_same_bytes_at_any_job_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", &GOOD.replace("N_T = 100", "N_T = 40").replace("N_E = 10", "N_E = 4").replace("K = 10", "K = 4"));
    let run = |name: &str, jobs: &str, seed: &str| {
        let csv = dir.path().join(name);
        let out = secmimo(&[
            "run", "--scenario", "custom", "--config", &cfg, "--out", csv.to_str().unwrap(), "--data", "MF,SZF",
            "--an", "SNS,RANDOM", "--evaluator", "analytic,monte_carlo", "--realizations", "30", "--jobs", jobs,
            "--seed", seed, "--no-header-timestamp",
        ]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(csv).unwrap()
    };
    let a = run("a.csv", "1", "5");
    assert_eq!(a, run("b.csv", "3", "5"));
    assert_ne!(a, run("c.csv", "1", "6"));
}

#[test]
fn timestamp_header_is_optional() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig5.csv");
    let out = secmimo(&["run", "--scenario", "fig5", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# generated "));
    assert!(text.lines().skip(2).all(|l| l.ends_with(",OK")));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    assert_eq!(secmimo(&["run", "--scenario", "fig42", "--out", csv.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(secmimo(&["run", "--scenario", "custom", "--out", csv.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(secmimo(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn all_skipped_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.cfg", &GOOD.replace("K = 10", "K = 60"));
    let csv = dir.path().join("x.csv");
    let out = secmimo(&["run", "--scenario", "custom", "--config", &cfg, "--out", csv.to_str().unwrap(), "--data", "CZF", "--an", "CNS"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(fs::read_to_string(csv).unwrap().contains("SKIPPED"));
}
