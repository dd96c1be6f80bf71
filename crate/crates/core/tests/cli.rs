//! Integration test of the command-line pipeline: generate a graph, embed
//! it, render it, run checks and solvers, and drive a convergence plan, all
//! through the binary with files in a temporary directory.

use std::path::Path;
use std::process::Command;

fn tma(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_tma"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "tma {args:?} failed:\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn pipeline_gen_embed_render_check_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    tma(
        dir,
        &[
            "gen",
            "--family",
            "perturbed:0.5,2",
            "--delta",
            "0.125",
            "--region",
            "disc:0,0,1",
            "--seed",
            "3",
            "--out",
            "g.json",
        ],
    );
    let graph: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("g.json")).unwrap()).unwrap();
    assert!(graph["vertices"].as_array().unwrap().len() > 50);

    tma(dir, &["embed", "--graph", "g.json", "--out", "emb.json"]);
    let emb: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("emb.json")).unwrap()).unwrap();
    let n = emb["H"].as_array().unwrap().len();
    assert_eq!(n, graph["vertices"].as_array().unwrap().len());
    assert!(emb["residual"].as_f64().unwrap() <= 1e-10);

    for what in ["embedding", "dual", "tembedding"] {
        let svg = format!("{what}.svg");
        tma(dir, &["render", "--emb", "emb.json", "--what", what, "--svg", &svg]);
        let content = std::fs::read_to_string(dir.join(&svg)).unwrap();
        assert!(content.starts_with("<svg "), "{what} renders");
    }

    tma(
        dir,
        &[
            "check", "--property", "conv", "--emb", "emb.json", "--delta", "0.125",
            "--out", "conv.json",
        ],
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("conv.json")).unwrap())
            .unwrap();
    assert_eq!(report["property"], "conv");
    assert!(report["constant"].as_f64().unwrap() > 0.0);

    tma(
        dir,
        &[
            "dirichlet", "--emb", "emb.json", "--omega", "disc:0,0,0.9", "--g",
            "re(w^2)", "--out", "field.json",
        ],
    );
    let field: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("field.json")).unwrap())
            .unwrap();
    assert_eq!(field["values"].as_array().unwrap().len(), n);

    // Pole: first listed interior vertex of the solved slice.
    let pole = field["interior"].as_array().unwrap()[0].as_u64().unwrap().to_string();
    tma(dir, &["green", "--emb", "emb.json", "--pole", &pole, "--out", "green.json"]);

    tma(
        dir,
        &[
            "walk", "--emb", "emb.json", "--start", &pole, "--stop", "disc:0,0,0.8",
            "--n", "300", "--seed", "5", "--out", "walk.json",
        ],
    );
    let est: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("walk.json")).unwrap())
            .unwrap();
    assert!(est["mean_exit_time"]["estimate"].as_f64().unwrap() > 0.0);
}

#[test]
fn pipeline_continuum_and_plans() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    tma(
        dir,
        &[
            "pde", "--potential", "aniso:1,0.5", "--omega", "square:-1,1", "--g",
            "2*x^2 - y^2", "--h", "0.125", "--out", "pde.json",
        ],
    );
    let sol: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("pde.json")).unwrap()).unwrap();
    assert_eq!(
        sol["values"].as_array().unwrap().len(),
        sol["nodes"].as_array().unwrap().len()
    );

    let flat = tma(dir, &["macheck", "--potential", "expshear:0.1", "--region", "square:-1,1"]);
    let flat: serde_json::Value = serde_json::from_str(&flat).unwrap();
    assert_eq!(flat["flat"], false);

    std::fs::write(
        dir.join("plan.json"),
        serde_json::json!({
            "family": {"kind": "square"},
            "omega": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 1.0},
            "compact": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 0.7},
            "deltas": [0.125, 0.0625],
            "boundary": "re(w^4)",
            "exact": "re(w^4)",
            "seed": 1
        })
        .to_string(),
    )
    .unwrap();
    let out = tma(
        dir,
        &["converge", "--mode", "dirichlet", "--plan", "plan.json", "--out", "rep.csv"],
    );
    assert!(out.contains("pass true"), "{out}");
    let csv = std::fs::read_to_string(dir.join("rep.csv")).unwrap();
    assert!(csv.starts_with("delta,sup_err,l2_err,grad_sup_err,conj_err,runtime_ms\n"));
    assert_eq!(csv.lines().count(), 3);

    std::fs::write(
        dir.join("cplan.json"),
        serde_json::json!({
            "family": {"kind": "perturbed", "lo": 0.5, "hi": 2.0},
            "omega": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 1.0},
            "compact": {"kind": "disc", "cx": 0.0, "cy": 0.0, "r": 0.7},
            "deltas": [0.125],
            "seed": 5,
            "crosscheck": {"n_seeds": 2, "delta": 0.125, "walk_budget": 500}
        })
        .to_string(),
    )
    .unwrap();
    let out = tma(dir, &["crosscheck", "--plan", "cplan.json"]);
    assert!(out.contains("consistent: true"), "{out}");
}

#[test]
fn bad_inputs_fail_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let out = Command::new(env!("CARGO_BIN_EXE_tma"))
        .current_dir(dir)
        .args(["dirichlet", "--emb", "missing.json", "--omega", "disc:0,0,1", "--g", "x", "--out", "f.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = Command::new(env!("CARGO_BIN_EXE_tma"))
        .current_dir(dir)
        .args(["gen", "--family", "nonsense", "--delta", "0.1", "--region", "disc:0,0,1", "--out", "g.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown family"));
}
