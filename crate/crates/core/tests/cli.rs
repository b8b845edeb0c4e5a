use std::process::{Command, Output};

fn popsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_popsim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn two_agent_epidemic_run() {
    let o = popsim(&["run", "--protocol", "epidemic", "--n", "2", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("parallel_time=0.5"), "{text}");
    assert!(text.contains("stop_reason=stabilized"), "{text}");
}

#[test]
fn pse_run_prints_estimate() {
    let o = popsim(&["run", "--protocol", "pse", "--n", "1024", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("estimate=2^(c_q+1)="));
}

#[test]
fn pse_repeat_prints_median() {
    let o = popsim(&["run", "--protocol", "pse", "--n", "256", "--repeat", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("median_estimate(k=5)="));
    assert_eq!(popsim(&["run", "--protocol", "pse", "--n", "256", "--repeat", "4"]).status.code(), Some(1));
}

#[test]
fn le_run_reports_parameters() {
    let o = popsim(&["run", "--protocol", "le", "--n", "1024", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("threshold=20 round_cap=10"), "{text}");
    assert!(text.contains("leaders_final=1"), "{text}");
}

#[test]
fn invalid_input_exits_one() {
    let o = popsim(&["run", "--protocol", "le", "--n", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert_eq!(popsim(&["run", "--bogus"]).status.code(), Some(1));
    assert_eq!(popsim(&["run", "--protocol", "nope"]).status.code(), Some(1));
}

#[test]
fn exhausted_budget_exits_two() {
    let o = popsim(&["run", "--protocol", "epidemic", "--n", "512", "--max-steps", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("stop_reason=max_steps"));
}

#[test]
fn oracles() {
    let o = popsim(&["oracle", "epidemic_time", "--n", "3"]);
    assert_eq!(stdout(&o).trim(), "interactions=3.0 parallel_time=1.0");
    let o = popsim(&["oracle", "le_round_cap", "--n", "1024"]);
    assert_eq!(stdout(&o).trim(), "round_cap=10 threshold=20");
    let o = popsim(&["oracle", "pse_counters", "--n", "8"]);
    assert!(stdout(&o).starts_with("cq_half=2.08333"));
}

#[test]
fn help_lists_defaults() {
    let o = popsim(&["run", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for flag in ["--protocol", "--reps", "--deadline-mode", "--max-steps", "[default: 10]"] {
        assert!(text.contains(flag), "missing {flag}");
    }
}

#[test]
fn figure_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig");
    let o = popsim(&[
        "figure", "fig3", "--n-min", "16", "--n-max", "64", "--reps", "3", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 3 * 3);
    assert!(out.join("summary.csv").exists());
}

#[test]
fn config_file_merges_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(&cfg, "protocol = \"elimination\"\nn = 32\nreps = 4\nseed = 9\n").unwrap();
    let out = dir.path().join("out");
    let o = popsim(&["sweep", "--config", cfg.to_str().unwrap(), "--reps", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    assert!(runs.lines().nth(1).unwrap().starts_with("elimination,32,"));

    std::fs::write(&cfg, "unknown-key = 1\n").unwrap();
    assert_eq!(popsim(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}
