use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scl")).args(args).output().expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn gen_small(dir: &Path, name: &str, extra: &str) -> String {
    let cfg = write(
        dir,
        &format!("{name}.toml"),
        &format!("seed = 5\n[instance]\nn_nodes = 8\np0 = 30\np1 = 30\n{extra}"),
    );
    let out = dir.join(name);
    ok(&scl(&["generate", "--config", &cfg, "--out", out.to_str().unwrap()]));
    out.display().to_string()
}

#[test]
fn generate_default_config_writes_full_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bundle");
    ok(&scl(&["generate", "--out", out.to_str().unwrap()]));
    for f in ["complex.json", "x0.csv", "x1_obs.csv", "observed_edges.csv", "meta.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let x0 = fs::read_to_string(out.join("x0.csv")).unwrap();
    assert_eq!(x0.lines().count(), 20);
    assert_eq!(x0.lines().next().unwrap().split(',').count(), 100);
    let x1 = fs::read_to_string(out.join("x1_obs.csv")).unwrap();
    assert_eq!(x1.lines().next().unwrap().split(',').count(), 100);
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_small(dir.path(), "a", "");
    let b = gen_small(dir.path(), "b", "");
    for f in ["complex.json", "x0.csv", "x1_obs.csv", "observed_edges.csv", "meta.json"] {
        assert_eq!(
            fs::read(Path::new(&a).join(f)).unwrap(),
            fs::read(Path::new(&b).join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn generate_with_zero_edge_probability_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.toml", "[instance]\nn_nodes = 6\nedge_prob = 0.0\n");
    let out = scl(&["generate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error: "), "{err}");
    assert!(err.to_lowercase().contains("generation"), "{err}");
}

#[test]
fn config_errors_name_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "seed = 1\n[instance]\nn_nodes = 6\nnode_count = 3\n");
    let out = scl(&["generate", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.toml:4:"), "{}", stderr(&out));
}

#[test]
fn greedy_recovers_edges_on_clean_observed_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_small(dir.path(), "clean", "observed_fraction = 1.0\n");
    let result = dir.path().join("r.json");
    let x1 = dir.path().join("x1.csv");
    let out = scl(&[
        "learn",
        &bundle,
        "--method",
        "GreedySCL",
        "--out",
        result.to_str().unwrap(),
        "--write-x1",
        x1.to_str().unwrap(),
    ]);
    ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("edge_f1=1.0000"), "{stdout}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(json["method"], "GreedySCL");
    assert_eq!(json["eval"]["edge_f1"], 1.0);
    assert_eq!(json["closure_violations"], 0);
    assert_eq!(fs::read_to_string(&x1).unwrap().lines().count(), 28);

    // Re-scoring the written result reproduces the embedded evaluation.
    let eval = scl(&["eval", result.to_str().unwrap(), &bundle]);
    ok(&eval);
    let report: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert_eq!(report, json["eval"]);
}

#[test]
fn rc_result_names_method() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_small(dir.path(), "b", "");
    let out = scl(&["learn", &bundle, "--method", "rc"]);
    ok(&out);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["method"], "RC");
    assert_eq!(json["iterations_run"], 0);
}

#[test]
fn learn_flags_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_small(dir.path(), "b", "node_noise_std = 0.1\n");
    let out = scl(&["learn", &bundle, "--strict-lemma", "--no-prune-closure"]);
    ok(&out);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(Path::new(&bundle).join("complex.json")).unwrap()).unwrap();
    // Strict mode selects exactly the ground-truth edge budget.
    assert_eq!(json["complex"]["edges"].as_array().unwrap().len(), truth["edges"].as_array().unwrap().len());
}

#[test]
fn unknown_method_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_small(dir.path(), "b", "");
    let out = scl(&["learn", &bundle, "--method", "Lasso"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Lasso"));
}

#[test]
fn missing_dataset_file_exits_one_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_small(dir.path(), "b", "");
    fs::remove_file(Path::new(&bundle).join("x0.csv")).unwrap();
    let out = scl(&["learn", &bundle]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.starts_with("error: ") && err.contains("x0.csv"), "{err}");
}

#[test]
fn learn_without_truth_needs_budgets() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = gen_small(dir.path(), "b", "");
    fs::remove_file(Path::new(&bundle).join("complex.json")).unwrap();
    let out = scl(&["learn", &bundle]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write(dir.path(), "l.toml", "[params]\ne_min = 14\nt_min = 3\n");
    let out = scl(&["learn", &bundle, "--config", &cfg]);
    ok(&out);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(json.get("eval").is_none());
}

const SWEEP: &str = r#"
variable = "node_noise_std"
grid = [0.0, 0.1]
n_trials = 2
base_seed = 9
methods = ["GreedySCL", "SepSCL", "RC"]
[instance]
n_nodes = 8
p0 = 20
p1 = 20
"#;

#[test]
fn sweep_writes_reproducible_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SWEEP);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&scl(&["sweep", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1", "--no-timing"]));
    let out = Command::new(env!("CARGO_BIN_EXE_scl"))
        .args(["sweep", "--config", &cfg, "--out", b.to_str().unwrap(), "--no-timing"])
        .env("SCL_JOBS", "3")
        .output()
        .unwrap();
    ok(&out);
    for f in ["results.csv", "summary.csv", "nerr_l0.svg", "nerr_lu.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let csv = fs::read_to_string(a.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("sweep_value,trial,method,nerr_l0,nerr_lu,edge_f1,triangle_f1,closure_violations,seconds"));
    assert_eq!(lines.count(), 2 * 2 * 3);
}

#[test]
fn single_point_sweep_has_one_row_per_method() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SWEEP.replace("grid = [0.0, 0.1]", "grid = [0.05]").replace("n_trials = 2", "n_trials = 1");
    let cfg = write(dir.path(), "s.toml", &spec);
    let out = dir.path().join("o");
    ok(&scl(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
}

#[test]
fn invalid_sweep_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", &SWEEP.replace("[0.0, 0.1]", "[0.1, 0.0]"));
    let out = scl(&["sweep", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("strictly increasing"));
}
