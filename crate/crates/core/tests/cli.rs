//! The `hdlab` binary: artifacts, exit codes and side outputs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hdlab::cli::{BoundsResult, ColorResult, EnumerateResult, PlanResult, SupersatResult, EXIT_CAP, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};
use hdlab::planar::{PiercingCertificate, PqVerdict};
use hdlab::randcon::{ConstructionReport, IndependentSearch};
use hdlab::report::{schema_id, Artifact};
use serde::de::DeserializeOwned;

fn hdlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdlab"))
        .args(args)
        .env_remove("HDLAB_BUDGET")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn run_to<T: DeserializeOwned>(dir: &Path, name: &str, kind: &str, args: &[&str]) -> (i32, Artifact<T>) {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let p = path.display().to_string();
    full.extend(["--no-timestamp", "--out", &p]);
    let out = hdlab(&full);
    let art = Artifact::<T>::read(&path, kind).unwrap_or_else(|e| panic!("{args:?}: {e}; stderr {}", String::from_utf8_lossy(&out.stderr)));
    (code(&out), art)
}

fn construct(dir: &Path, name: &str, mode: &str) -> (i32, PathBuf, ConstructionReport) {
    let (c, art) = run_to::<ConstructionReport>(
        dir,
        name,
        "construct",
        &["construct", "--q", "3", "--eta", "0.4", "--n", "3", "--seed", "9", "--mode", mode],
    );
    (c, dir.join(name), art.result)
}

#[test]
fn enumerate_artifact_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (c, art) = run_to::<EnumerateResult>(dir.path(), "e.json", "enumerate", &["enumerate", "--n", "4", "--k", "2", "--r", "3"]);
    assert_eq!(c, EXIT_OK);
    assert_eq!(art.schema, schema_id("enumerate"));
    assert_eq!(art.created_unix, None);
    assert_eq!(art.config["command"]["command"], "enumerate");
    assert!(art.result.count_bound.is_some());
    let text = std::fs::read_to_string(dir.path().join("e.json")).unwrap();
    assert_eq!(Artifact::<EnumerateResult>::from_json(&text, "enumerate").unwrap().to_json().unwrap(), text);
}

#[test]
fn stdout_carries_the_artifact_with_a_timestamp() {
    let out = hdlab(&["plan", "--q", "4", "--eta", "1/4"]);
    assert_eq!(code(&out), EXIT_OK);
    let art = Artifact::<PlanResult>::from_json(&String::from_utf8(out.stdout).unwrap(), "plan").unwrap();
    assert!(art.created_unix.is_some());
    assert_eq!(art.result.plan.q, 4);
    assert!(art.result.coloring_exponents.is_none());
}

#[test]
fn artifacts_reject_the_wrong_kind() {
    let dir = tempfile::tempdir().unwrap();
    let (_, _) = run_to::<PlanResult>(dir.path(), "p.json", "plan", &["plan", "--q", "3", "--eta", "0.4", "--coloring"]);
    let path = dir.path().join("p.json");
    assert!(Artifact::<PlanResult>::read(&path, "enumerate").is_err());
    let out = hdlab(&["pierce", "--in", &path.display().to_string()]);
    assert_eq!(code(&out), EXIT_VERIFY);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&hdlab(&["enumerate", "--n", "4"])), EXIT_USAGE);
    assert_eq!(code(&hdlab(&["frobnicate"])), EXIT_USAGE);
    assert_eq!(code(&hdlab(&["plan", "--q", "2", "--eta", "0.3"])), EXIT_USAGE);
    assert_eq!(code(&hdlab(&["plan", "--q", "3", "--eta", "0.7"])), EXIT_USAGE);
    assert_eq!(code(&hdlab(&["plan", "--q", "3", "--eta", "x"])), EXIT_USAGE);
    assert_eq!(code(&hdlab(&["bounds", "--k", "4", "--r", "3", "--s0", "0.5", "--f", "0.02"])), EXIT_USAGE);
    assert_eq!(code(&hdlab(&["--help"])), EXIT_OK);
}

#[test]
fn resource_caps_exit_three() {
    let out = hdlab(&["enumerate", "--n", "30", "--k", "3", "--r", "3", "--max-work", "1000"]);
    assert_eq!(code(&out), EXIT_CAP);
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource limit"));
    let out = hdlab(&["supersat", "--n", "32", "--k", "3", "--r", "3", "--t", "2", "--max-lines", "10000"]);
    assert_eq!(code(&out), EXIT_CAP);
}

#[test]
fn bounds_follow_the_mode() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bounds", "--n", "1e6", "--k", "4", "--r", "3", "--s0", "0.5", "--f", "0.025", "--m", "10"];
    let (strict, art) = run_to::<BoundsResult>(dir.path(), "s.json", "bounds", &args);
    assert!(!art.result.count.hypotheses.holds);
    assert_eq!(strict, EXIT_VERIFY);
    let mut formula = args.to_vec();
    formula.extend(["--mode", "formula-only"]);
    let (c, _) = run_to::<BoundsResult>(dir.path(), "f.json", "bounds", &formula);
    assert_eq!(c, EXIT_OK);
}

#[test]
fn supersat_reports_its_claims() {
    let dir = tempfile::tempdir().unwrap();
    let (c, art) = run_to::<SupersatResult>(
        dir.path(),
        "s.json",
        "supersat",
        &["supersat", "--n", "12", "--k", "2", "--r", "3", "--t", "4", "--samples", "5", "--sample-size", "6"],
    );
    assert_eq!(art.result.samples.len(), 5);
    assert!(art.result.samples.iter().all(|s| s.size == 6 && s.holds == (s.incidences >= s.required)));
    assert_eq!(c, if art.result.all_hold { EXIT_OK } else { EXIT_VERIFY });
}

#[test]
fn refuted_plan_fails_strict_and_passes_formula_only() {
    let dir = tempfile::tempdir().unwrap();
    let (strict, _, rep) = construct(dir.path(), "strict.json", "strict");
    let (formula, path, again) = construct(dir.path(), "formula.json", "formula-only");
    assert_eq!(rep, again);
    assert!(rep.no_u_collinear);
    let IndependentSearch::Witness { points } = &rep.independent else { panic!("small grid should refute the plan") };
    assert_eq!(strict, EXIT_VERIFY);
    assert_eq!(formula, EXIT_OK);
    assert!(!points.is_empty());

    let input = path.display().to_string();
    let csv = dir.path().join("hist.csv");
    let csv_arg = csv.display().to_string();
    let (c, art) = run_to::<PiercingCertificate>(dir.path(), "cert.json", "certificate", &["pierce", "--in", &input, "--csv", &csv_arg]);
    let cert = art.result;
    assert!(cert.validate().is_ok());
    assert_eq!(hdlab::cli::read_certificate(&dir.path().join("cert.json")).unwrap(), cert);
    match &cert.pq_at_plan {
        PqVerdict::Refuted { witness } => {
            assert_eq!(witness.len(), cert.p_plan);
            assert_eq!(c, EXIT_VERIFY);
        }
        _ => assert_eq!(c, EXIT_OK),
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("size,count"));
    let total: usize = rows.map(|r| r.split(',').nth(1).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(total, cert.concurrency_histogram.values().sum::<usize>());
}

#[test]
fn color_reports_pigeonhole_and_greedy_trials() {
    let dir = tempfile::tempdir().unwrap();
    let (c, art) = run_to::<ColorResult>(
        dir.path(),
        "c.json",
        "color",
        &["color", "--q", "3", "--m", "20", "--eta", "0.4", "--seed", "2", "--greedy-trials", "3"],
    );
    assert_eq!(c, EXIT_OK);
    assert!(art.result.report.pigeonhole_holds);
    assert_eq!(art.result.greedy.unwrap().trials.len(), 3);
}

#[test]
fn budget_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_hdlab"))
        .args(["plan", "--q", "3", "--eta", "0.4", "--no-timestamp"])
        .env("HDLAB_BUDGET", "77")
        .output()
        .unwrap();
    let art = Artifact::<PlanResult>::from_json(&String::from_utf8(out.stdout).unwrap(), "plan").unwrap();
    assert_eq!(art.config["global"]["budget"], 77);
    assert_eq!(code(&hdlab(&["plan", "--q", "3", "--eta", "0.4", "--budget", "nope"])), EXIT_USAGE);
}
