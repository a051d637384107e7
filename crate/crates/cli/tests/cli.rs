use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use quboforge::bench::{knapsack_dp, synthetic_cflp, write_orlib_cap, KnapsackInstance};
use quboforge::milp::serialize_model;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quboforge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn knapsack_file(dir: &Path, n: usize, seed: u64) -> (PathBuf, KnapsackInstance) {
    let inst = KnapsackInstance::random(n, seed);
    let path = dir.join(format!("knap{n}_{seed}.json"));
    fs::write(&path, serialize_model(&inst.to_milp("knap"))).unwrap();
    (path, inst)
}

const TWO_BY_TWO: &str = "2 2\n10 100\n10 100\n5 1 2\n5 2 1\n";

#[test]
fn compile_knapsack_counts_slack_bits() {
    let t = TempDir::new().unwrap();
    let (model, inst) = knapsack_file(t.path(), 6, 1);
    let out = t.path().join("c");
    let o = run(&["compile", s(&model), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    // Slack of `w·x ≤ C` spans 0..=C.
    let slack = 64 - inst.capacity.leading_zeros() as usize;
    let text = fs::read_to_string(out.join("artifact.qubo")).unwrap();
    assert_eq!(text.lines().next().unwrap(), format!("#vars {}", 6 + slack));
    let plan = json(&out.join("plan.json"));
    assert_eq!(plan["slack_bits"], slack);
    assert_eq!(plan["variable_bits"], 6);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["outputs"], serde_json::json!(["artifact.qubo", "plan.json"]));
}

#[test]
fn budget_error_exits_three() {
    let t = TempDir::new().unwrap();
    let (model, _) = knapsack_file(t.path(), 6, 1);
    let out = t.path().join("c");
    let o = run(&["compile", s(&model), "--budget", "4", "--out", s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("compile: budget"), "{}", stderr(&o));
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["exit_code"], 3);
    assert_eq!(manifest["config"]["budget"], 4);
}

#[test]
fn cflp_twenty_follows_size_law() {
    let t = TempDir::new().unwrap();
    let cap = t.path().join("cflp20.cap");
    fs::write(&cap, write_orlib_cap(&synthetic_cflp(20, 20, 1))).unwrap();
    let out = t.path().join("c");
    let o = run(&["compile", s(&cap), "--continuous-bits", "4", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let plan = json(&out.join("plan.json"));
    assert_eq!(plan["variable_bits"], 20 + 20 * 20 * 4);
    let total = plan["total_bits"].as_u64().unwrap();
    assert_eq!(total, 1620 + plan["slack_bits"].as_u64().unwrap());
}

#[test]
fn exhaustive_solve_matches_dp() {
    let t = TempDir::new().unwrap();
    for seed in 1..4 {
        let (model, inst) = knapsack_file(t.path(), 7, seed);
        let c = t.path().join(format!("c{seed}"));
        assert_eq!(code(&run(&["compile", s(&model), "--out", s(&c)])), 0);
        let out = t.path().join(format!("s{seed}"));
        let o = run(&[
            "solve",
            s(&c.join("artifact.qubo")),
            "--model",
            s(&model),
            "--method",
            "exhaustive",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let sol = json(&out.join("solution.json"));
        assert_eq!(sol["proven_optimal"], true);
        assert_eq!(sol["feasible"], true);
        assert_eq!(sol["objective"], knapsack_dp(&inst).to_string());
        let picked: u64 = (0..7)
            .filter(|i| sol["variables"][format!("item{i}")] == "1")
            .map(|i| inst.values[i])
            .sum();
        assert_eq!(picked, knapsack_dp(&inst));
    }
}

#[test]
fn annealing_is_reproducible() {
    let t = TempDir::new().unwrap();
    let (model, _) = knapsack_file(t.path(), 10, 2);
    let c = t.path().join("c");
    assert_eq!(code(&run(&["compile", s(&model), "--out", s(&c)])), 0);
    let artifact = c.join("artifact.qubo");
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = t.path().join(format!("s{k}"));
        let o = run(&["solve", s(&artifact), "--method", "sa", "--seed", "1", "--sweeps", "200", "--out", s(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        outputs.push((
            fs::read(out.join("solution.json")).unwrap(),
            fs::read(out.join("trace.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let header = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(header.starts_with("sweep,best_energy,current_energy,temperature\n"));
}

#[test]
fn manifest_reproduces_the_run() {
    let t = TempDir::new().unwrap();
    let (model, _) = knapsack_file(t.path(), 9, 5);
    let c = t.path().join("c");
    assert_eq!(code(&run(&["compile", s(&model), "--out", s(&c)])), 0);
    let first = t.path().join("a");
    let o = run(&[
        "solve",
        s(&c.join("artifact.qubo")),
        "--method",
        "sa",
        "--seed",
        "7",
        "--sweeps",
        "150",
        "--restarts",
        "3",
        "--out",
        s(&first),
    ]);
    assert_eq!(code(&o), 0);
    let m = json(&first.join("manifest.json"));
    let cfg = &m["config"];
    let second = t.path().join("b");
    let o = run(&[
        m["command"].as_str().unwrap(),
        m["input"].as_str().unwrap(),
        "--method",
        cfg["method"].as_str().unwrap(),
        "--seed",
        &cfg["seed"].to_string(),
        "--sweeps",
        &cfg["sweeps"].to_string(),
        "--restarts",
        &cfg["restarts"].to_string(),
        "--out",
        s(&second),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(first.join("solution.json")).unwrap(), fs::read(second.join("solution.json")).unwrap());
}

#[test]
fn benders_two_by_two_converges() {
    let t = TempDir::new().unwrap();
    let cap = t.path().join("two.cap");
    fs::write(&cap, TWO_BY_TWO).unwrap();
    let out = t.path().join("b");
    let o = run(&["benders", s(&cap), "--tol", "0.000001", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = json(&out.join("report.json"));
    assert_eq!(r["status"], "converged");
    assert_eq!(r["best_ub"], "103");
    assert_eq!(r["gap"], "0");
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(csv.starts_with("iter,lb,ub,best_ub,master_obj,sub_cost,cut_kind,master_bits,elapsed_s\n"));
    assert_eq!(csv.lines().count(), 1 + r["iterations"].as_u64().unwrap() as usize);
}

#[test]
fn pure_binary_benders_points_to_monolithic() {
    let t = TempDir::new().unwrap();
    let (model, _) = knapsack_file(t.path(), 4, 1);
    let o = run(&["benders", s(&model), "--out", s(&t.path().join("b"))]);
    assert_eq!(code(&o), 5);
    assert!(stderr(&o).contains("monolithic"), "{}", stderr(&o));
}

#[test]
fn benders_sixteen_by_fifty_reports_gap() {
    let t = TempDir::new().unwrap();
    let dir = t.path().join("inst");
    fs::create_dir(&dir).unwrap();
    fs::write(dir.join("cap16x50.cap"), write_orlib_cap(&synthetic_cflp(16, 50, 2))).unwrap();
    let out = t.path().join("bench");
    let o = run(&["bench", s(&dir), "--methods", "hybrid-benders", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("suite.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "instance,method,objective,oracle,gap,wall_s,total_bits,master_bits,iters");
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&row[..2], &["cap16x50", "hybrid-benders"]);
    assert!(row[4].parse::<f64>().unwrap() <= 1e-6);
    assert!(row[8].parse::<usize>().unwrap() >= 1);
    assert!(out.join("convergence/cap16x50.csv").exists());
}

#[test]
fn bench_runs_three_methods_in_order() {
    let t = TempDir::new().unwrap();
    let dir = t.path().join("inst");
    fs::create_dir(&dir).unwrap();
    fs::write(dir.join("a_two.cap"), TWO_BY_TWO).unwrap();
    fs::write(dir.join("b_small.cap"), write_orlib_cap(&synthetic_cflp(3, 4, 1))).unwrap();
    fs::write(dir.join("notes.txt"), "ignored").unwrap();
    let out = t.path().join("bench");
    let o = run(&["bench", s(&dir), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("suite.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let ids: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[1])).collect();
    assert_eq!(
        ids,
        vec![
            ("a_two", "direct-oracle"),
            ("a_two", "monolithic-qubo"),
            ("a_two", "hybrid-benders"),
            ("b_small", "direct-oracle"),
            ("b_small", "monolithic-qubo"),
            ("b_small", "hybrid-benders"),
        ]
    );
    assert_eq!(rows[0][2], "103");
    assert_eq!(rows[2][4].parse::<f64>().unwrap(), 0.0);
    let audit = fs::read_to_string(out.join("size_audit.csv")).unwrap();
    assert_eq!(audit.lines().count(), 3);
}

#[test]
fn parse_errors_exit_two() {
    let t = TempDir::new().unwrap();
    let bad = t.path().join("bad.json");
    fs::write(&bad, "{\"name\": \"x\", \"variables\": [").unwrap();
    let o = run(&["compile", s(&bad), "--out", s(&t.path().join("c"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("parse:"), "{}", stderr(&o));

    let cap = t.path().join("short.cap");
    fs::write(&cap, "2 2\n10 100\n10 100\n5 1 2\n5 2").unwrap();
    let o = run(&["benders", s(&cap), "--out", s(&t.path().join("b"))]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("token 11"), "{}", stderr(&o));

    let artifact = t.path().join("bad.qubo");
    fs::write(&artifact, "#vars 2\n0 5 1\n").unwrap();
    let o = run(&["solve", s(&artifact), "--out", s(&t.path().join("s"))]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn infeasible_model_exits_four() {
    let t = TempDir::new().unwrap();
    let model = t.path().join("inf.json");
    fs::write(
        &model,
        r#"{"name": "inf", "sense": "min",
            "variables": [{"name": "a", "kind": "binary"}, {"name": "b", "kind": "binary"}],
            "objective": {"terms": [{"var": "a", "coef": "1"}]},
            "constraints": [{"name": "c", "sense": ">=", "rhs": "3",
                             "terms": [{"var": "a", "coef": "1"}, {"var": "b", "coef": "1"}]}]}"#,
    )
    .unwrap();
    let o = run(&["compile", s(&model), "--out", s(&t.path().join("c"))]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));

    let cap = t.path().join("inf.cap");
    fs::write(&cap, "2 1 3 1 3 1 10 1 1").unwrap();
    let out = t.path().join("b");
    let o = run(&["benders", s(&cap), "--out", s(&out)]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert_eq!(json(&out.join("report.json"))["status"], "infeasible");
}

#[test]
fn flags_are_validated_before_work() {
    let t = TempDir::new().unwrap();
    let (model, _) = knapsack_file(t.path(), 4, 1);
    for args in [
        vec!["compile", s(&model), "--penalty", "-3"],
        vec!["compile", s(&model), "--continuous-bits", "0"],
        vec!["benders", s(&model), "--tol", "abc"],
        vec!["benders", s(&model), "--eta-bits", "0"],
        vec!["bench", s(t.path()), "--methods", "quantum"],
        vec!["solve", "missing.qubo", "--sweeps", "0"],
    ] {
        let out = t.path().join("v");
        let _ = fs::remove_dir_all(&out);
        let mut full = args.clone();
        full.extend(["--out", s(&out)]);
        let o = run(&full);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).contains("flags:"), "{args:?}: {}", stderr(&o));
        let m = json(&out.join("manifest.json"));
        assert_eq!(m["outputs"], serde_json::json!([]));
    }
    assert_eq!(code(&run(&["compile"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn generate_writes_loadable_models() {
    let t = TempDir::new().unwrap();
    for (p, file) in [("tsp_mtz", "tsp_mtz_4_3.json"), ("cflp", "cflp_4_3.cap"), ("mis", "mis_4_3.json")] {
        let o = run(&["generate", p, "--size", "4", "--seed", "3", "--out", s(t.path())]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let c = t.path().join(format!("c_{p}"));
        let o = run(&["compile", s(&t.path().join(file)), "--out", s(&c)]);
        assert_eq!(code(&o), 0, "{p}: {}", stderr(&o));
    }
    assert_eq!(code(&run(&["generate", "vrp", "--size", "3", "--out", s(t.path())])), 1);
}

#[test]
fn bench_skips_manifest_left_by_generate() {
    let t = TempDir::new().unwrap();
    let inst = t.path().join("inst");
    for (p, size) in [("knapsack", "5"), ("cflp", "2")] {
        let o = run(&["generate", p, "--size", size, "--seed", "1", "--out", s(&inst)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    assert!(inst.join("manifest.json").exists());
    let out = t.path().join("r");
    let o = run(&["bench", s(&inst), "--methods", "direct-oracle", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let suite = fs::read_to_string(out.join("suite.csv")).unwrap();
    assert_eq!(suite.lines().count(), 3, "{suite}");
}
