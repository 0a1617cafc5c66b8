use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use regpan::graph::io::{parse_graph, write_bigraph};
use regpan::graph::random_bipartite;
use regpan::sbm::{parse_labels, sample_sbm, SbmParams};
use regpan::BipartiteGraph;
use serde_json::Value;
use tempfile::TempDir;

fn regpan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regpan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = regpan(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    regpan(args).status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn complete_bigraph(nl: usize, nr: usize) -> BipartiteGraph {
    BipartiteGraph::from_edges(nl, nr, (0..nl).flat_map(|a| (0..nr).map(move |b| (a, b)))).unwrap()
}

#[test]
fn complete_graph_is_regular() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "k.txt", &write_bigraph(&complete_bigraph(5, 6)));
    for solver in ["exhaustive", "sa", "greedy", "decomposed"] {
        let v: Value = serde_json::from_str(&ok(&[
            "check-regularity",
            "--input",
            s(&input),
            "--epsilon",
            "0.01",
            "--solver",
            solver,
        ]))
        .unwrap();
        assert_eq!(v["is_regular"], true, "{solver}");
        assert_eq!(v["minL"], 0.0);
    }
}

#[test]
fn exhaustive_and_sa_agree_on_g88() {
    let dir = TempDir::new().unwrap();
    for seed in 0..3 {
        let g = random_bipartite(8, 8, 0.5, seed).unwrap();
        let input = write(&dir, "g.txt", &write_bigraph(&g));
        let run = |solver| -> Value {
            serde_json::from_str(&ok(&[
                "check-regularity",
                "--input",
                s(&input),
                "--epsilon",
                "0.05",
                "--solver",
                solver,
            ]))
            .unwrap()
        };
        let (ex, sa) = (run("exhaustive"), run("sa"));
        for key in ["minL", "maxL", "is_regular"] {
            assert_eq!(ex[key], sa[key], "seed {seed} {key}");
        }
        assert_eq!(ex["kind"], "exact");
        assert_eq!(sa["kind"], "lower-bound witness");
    }
}

#[test]
fn exit_codes_by_error_class() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.txt");
    assert_eq!(code(&["check-regularity", "--input", s(&missing), "--epsilon", "0.1"]), 2);

    let garbage = write(&dir, "bad.txt", "bigraph 2 2\n0 x\n");
    assert_eq!(code(&["check-regularity", "--input", s(&garbage), "--epsilon", "0.1"]), 1);

    let big = write(&dir, "big.txt", &write_bigraph(&random_bipartite(13, 13, 0.5, 1).unwrap()));
    let args = ["check-regularity", "--input", s(&big), "--epsilon", "0.1", "--solver", "exhaustive"];
    assert_eq!(code(&args), 3);
    assert_eq!(code(&["qexist", "--input", s(&big), "--epsilon", "0.1"]), 3);

    let small = write(&dir, "small.txt", "bigraph 1 1\n0 0\n");
    assert_eq!(code(&["check-regularity", "--input", s(&small)]), 1);
    assert_eq!(code(&["check-regularity", "--input", s(&small), "--epsilon", "-1"]), 1);
    assert_eq!(code(&["no-such-command"]), 1);
    assert_eq!(code(&["pan", "--seed", "soon"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn gen_sbm_outputs_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.txt");
    let summary: Value = serde_json::from_str(&ok(&[
        "gen-sbm",
        "--n",
        "40",
        "--probs",
        "0.3,0.7",
        "--densities",
        "0.7,0.1;0.1,0.5",
        "--output",
        s(&out),
        "--seed",
        "11",
    ]))
    .unwrap();
    let params = SbmParams::new(40, vec![0.3, 0.7], vec![vec![0.7, 0.1], vec![0.1, 0.5]]).unwrap();
    let pg = sample_sbm(&params, 11).unwrap();
    assert_eq!(parse_graph(&fs::read_to_string(&out).unwrap()).unwrap(), pg.graph);
    let labels = parse_labels(&fs::read_to_string(out.with_extension("labels")).unwrap()).unwrap();
    assert_eq!(labels.iter().map(|&(_, l)| l).collect::<Vec<_>>(), pg.labels);
    assert_eq!(summary["edges"], pg.graph.edge_count());
    assert_eq!(summary["k"], 2);
}

#[test]
fn gen_sbm_trivial_models() {
    let dir = TempDir::new().unwrap();
    let one = dir.path().join("one.txt");
    ok(&["gen-sbm", "--n", "12", "--probs", "1", "--densities", "0.5", "--output", s(&one)]);
    let labels = parse_labels(&fs::read_to_string(one.with_extension("labels")).unwrap()).unwrap();
    assert_eq!(labels.len(), 12);
    assert!(labels.iter().all(|&(_, l)| l == 0));

    let empty = dir.path().join("empty.txt");
    let cfg = r#"{"sbm": {"n": 15, "k": 3, "P": [0.2, 0.3, 0.5], "D": [[0,0,0],[0,0,0],[0,0,0]]}}"#;
    ok(&["gen-sbm", "--config", cfg, "--output", s(&empty)]);
    assert_eq!(fs::read_to_string(&empty).unwrap(), "graph 15\n");

    assert_eq!(code(&["gen-sbm", "--n", "5", "--probs", "0.5,0.6", "--densities", "1,0;0,1", "--output", s(&empty)]), 1);
    assert_eq!(code(&["gen-sbm", "--probs", "1", "--output", s(&empty)]), 1);
}

fn planted(dir: &TempDir, d: &str, probs: &str, n: &str, seed: &str) -> PathBuf {
    let out = dir.path().join(format!("planted-{seed}.txt"));
    ok(&["gen-sbm", "--n", n, "--probs", probs, "--densities", d, "--output", s(&out), "--seed", seed]);
    out
}

fn planted_communities(graph: &Path) -> Vec<Vec<u64>> {
    let labels = parse_labels(&fs::read_to_string(graph.with_extension("labels")).unwrap()).unwrap();
    let k = labels.iter().map(|&(_, l)| l).max().unwrap() + 1;
    (0..k)
        .map(|c| labels.iter().filter(|&&(_, l)| l == c).map(|&(u, _)| u).collect())
        .collect()
}

#[test]
fn pan_recovers_a_well_separated_community() {
    let dir = TempDir::new().unwrap();
    let g = planted(&dir, "0.9,0.05;0.05,0.9", "0.5,0.5", "100", "21");
    let out = dir.path().join("pan");
    let text = ok(&["pan", "--input", s(&g), "--output", s(&out), "--seed", "4"]);
    let t: Value = serde_json::from_str(&text).unwrap();
    let found: Vec<u64> = serde_json::from_value(t["community"].clone()).unwrap();
    assert!(planted_communities(&g).contains(&found), "{found:?}");
    assert_eq!(fs::read_to_string(out.join("trajectory.json")).unwrap(), text);
    let csv = fs::read_to_string(out.join("stages.csv")).unwrap();
    assert!(csv.starts_with("stage,density,energy,energy_per_node\n"));
    assert_eq!(ok(&["pan", "--input", s(&g), "--seed", "4"]), text);
}

#[test]
fn pan_all_on_one_community_returns_everything() {
    let dir = TempDir::new().unwrap();
    let g = planted(&dir, "1", "1", "20", "1");
    let out = dir.path().join("all");
    let r: Value = serde_json::from_str(&ok(&["pan-all", "--input", s(&g), "--output", s(&out)])).unwrap();
    assert_eq!(r["communities"].as_array().unwrap().len(), 1);
    assert_eq!(r["communities"][0].as_array().unwrap().len(), 20);
    assert!(fs::read_to_string(out.join("rounds.csv"))
        .unwrap()
        .starts_with("round,energy_per_node,community_size\n"));
}

#[test]
fn qexist_matches_brute_force_on_two_by_two() {
    let dir = TempDir::new().unwrap();
    for mask in 0..16u32 {
        let edges: Vec<_> = (0..4).filter(|k| mask >> k & 1 == 1).map(|k| (k / 2, k % 2)).collect();
        let input = write(&dir, "q.txt", &write_bigraph(&BipartiteGraph::from_edges(2, 2, edges).unwrap()));
        let v: Value = serde_json::from_str(&ok(&["qexist", "--input", s(&input), "--epsilon", "0.2"])).unwrap();
        assert_eq!(v["agreement"], true, "mask {mask}");
    }
}

#[test]
fn qexist_schema_and_huge_epsilon() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "q.txt", &write_bigraph(&random_bipartite(3, 3, 0.5, 2).unwrap()));
    let v: Value = serde_json::from_str(&ok(&["qexist", "--input", s(&input), "--epsilon", "100"])).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["M_estimate", "agreement", "classical_exists", "exists", "ops_count", "phase_bits", "theta_hat"]
    );
    assert_eq!(v["exists"], false);
    assert_eq!(v["ops_count"], 15);
    let fast: Value =
        serde_json::from_str(&ok(&["qexist", "--input", s(&input), "--epsilon", "100", "--fast"])).unwrap();
    assert_eq!(fast, v);
}

#[test]
fn solve_qubo_from_json() {
    let dir = TempDir::new().unwrap();
    let q = r#"{"n": 3, "linear": [1.0, -2.0, 0.5], "quadratic": [[0, 1, -3.0], [1, 2, 2.0]], "offset": 1.0}"#;
    let input = write(&dir, "q.json", q);
    for solver in ["exhaustive", "sa", "greedy", "decomposed"] {
        let v: Value = serde_json::from_str(&ok(&["solve-qubo", "--input", s(&input), "--solver", solver])).unwrap();
        assert_eq!(v["best"]["assignment"], serde_json::json!([1, 1, 0]), "{solver}");
        assert_eq!(v["best"]["energy"], -3.0);
    }
}

#[test]
fn bench_csv_shape() {
    let csv = ok(&["bench", "--sizes", "26,8,16", "--solvers", "exhaustive,sa,greedy"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("size,solver,seconds,best_energy"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let sizes: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
    assert!(rows.iter().all(|r| r.len() == 4 && r[3].parse::<f64>().is_ok()));
    assert!(!rows.iter().any(|r| r[0] == "26" && r[1] == "exhaustive"));
    assert!(rows.iter().any(|r| r[0] == "24" || r[0] == "16"));
    // the exhaustive optimum is a lower bound for every heuristic
    for n in ["8", "16"] {
        let best = |name: &str| -> f64 {
            rows.iter().find(|r| r[0] == n && r[1] == name).unwrap()[3].parse().unwrap()
        };
        assert!(best("sa") >= best("exhaustive") - 1e-9);
        assert!(best("greedy") >= best("exhaustive") - 1e-9);
    }

    let cut = ok(&[
        "bench",
        "--sizes",
        "30",
        "--solvers",
        "sa",
        "--config",
        r#"{"solver_config": {"time_budget_ms": 0}}"#,
    ]);
    assert!(cut.lines().nth(1).unwrap().starts_with("30,sa:truncated,"));
}

#[test]
fn outputs_are_reproducible_and_configs_replay() {
    let dir = TempDir::new().unwrap();
    let g = planted(&dir, "0.8,0.1;0.1,0.8", "0.5,0.5", "50", "5");
    let saved = dir.path().join("run.json");
    let first = ok(&["pan-all", "--input", s(&g), "--seed", "random", "--save-config", s(&saved)]);
    let replay = ok(&["pan-all", "--config", s(&saved)]);
    assert_eq!(first, replay);
    let a = ok(&["pan-all", "--input", s(&g), "--seed", "9"]);
    assert_eq!(a, ok(&["pan-all", "--input", s(&g), "--seed", "9"]));

    let input = write(&dir, "b.txt", &write_bigraph(&random_bipartite(10, 10, 0.3, 3).unwrap()));
    let args = ["check-regularity", "--input", s(&input), "--epsilon", "0.1", "--seed", "17"];
    assert_eq!(ok(&args), ok(&args));

    let bi = dir.path().join("bi.txt");
    ok(&["bipartize", "--input", s(&g), "--output", s(&bi), "--seed", "2"]);
    let text = fs::read_to_string(&bi).unwrap();
    let parsed = regpan::graph::io::parse_bigraph(&text).unwrap();
    assert_eq!(parsed.n_left() + parsed.n_right(), 50);
    assert_eq!(ok(&["bipartize", "--input", s(&g), "--seed", "2"]), text);
}

#[test]
fn unknown_config_fields_are_rejected() {
    assert_eq!(code(&["bench", "--config", r#"{"sweeps": 10}"#]), 1);
}
