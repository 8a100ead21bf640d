use std::process::{Command, Output};

use serde_json::Value;

fn freelip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freelip")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("freelip-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn gen_laakso_has_six_edges() {
    let v = json(&freelip(&["gen", "--family", "laakso", "--level", "1"]));
    assert_eq!(v["schema"], "freelip/1");
    assert_eq!(v["edges"].as_array().unwrap().len(), 6);
}

#[test]
fn gen_counts_without_building() {
    let v = json(&freelip(&["gen", "--family", "diamond", "--level", "30", "--counts"]));
    assert_eq!(v["edges"], (1u128 << 60).to_string());
}

#[test]
fn haar_row() {
    let out = freelip(&["haar", "--n", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,k,lower_bound,witness_value,upper_bound,exact_orth_norm"));
    assert!(lines.next().unwrap().starts_with("3,2,7/3,"));
}

#[test]
fn haar_report_and_plot_files() {
    let (csv, plot) = (tmp("bounds.csv"), tmp("bounds.dat"));
    let v = json(&freelip(&["haar", "--n", "2", "--report", csv.to_str().unwrap(), "--plot", plot.to_str().unwrap()]));
    assert_eq!(v["row"]["witness_value"], "7/4");
    assert!(std::fs::read_to_string(&csv).unwrap().contains("2,2,5/3,7/4"));
    assert_eq!(std::fs::read_to_string(&plot).unwrap().lines().count(), 3);
}

#[test]
fn same_seed_same_bytes() {
    let a = freelip(&["gen", "--family", "random-metric", "--size", "9", "--seed", "11"]);
    let b = freelip(&["gen", "--family", "random-metric", "--size", "9", "--seed", "11"]);
    let c = freelip(&["gen", "--family", "random-metric", "--size", "9", "--seed", "12"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn norm_with_certificate() {
    let space = tmp("s.json");
    std::fs::write(&space, r#"{"points":["a","b","c"],"dist":[[0,1,2],[1,0,1],[2,1,0]]}"#).unwrap();
    let mol = tmp("m.json");
    std::fs::write(&mol, r#"{"a":"1","c":"-1"}"#).unwrap();
    let v = json(&freelip(&["norm", "--space", space.to_str().unwrap(), "--molecule", mol.to_str().unwrap()]));
    assert_eq!(v["value"], "2");
    assert_eq!(v["dual"]["value"], "2");
    let f = json(&freelip(&["norm", "--space", space.to_str().unwrap(), "--molecule", mol.to_str().unwrap(), "--mode", "float"]));
    assert!((f["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn graph_commands() {
    let g = tmp("d2.json");
    assert!(freelip(&["gen", "--family", "diamond", "--level", "2", "--out", g.to_str().unwrap()]).status.success());
    let basis = tmp("basis.json");
    let v = json(&freelip(&["cyclespace", "--graph", g.to_str().unwrap(), "--basis", basis.to_str().unwrap()]));
    assert_eq!(v["mu"], 5);
    assert!(v["greedy_packing"].as_u64().unwrap() >= 4);
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&basis).unwrap()).unwrap();
    assert_eq!(b["dimension"], 5);
    let p = json(&freelip(&["projconst", "--graph", g.to_str().unwrap(), "--mode", "orthogonal"]));
    assert_eq!(p["norm_l1"], "7/4");
    assert_eq!(p["is_projection"], true);
    let e = json(&freelip(&["embed", "--graph", g.to_str().unwrap(), "--strategy", "modp:2"]));
    assert_eq!(e["schema"], "freelip/1");
}

#[test]
fn recursive_and_witness() {
    let v = json(&freelip(&["recursive", "--base", "k2n:3", "--check-conditions"]));
    assert_eq!(v["conditions"]["all_pass"], true);
    assert_eq!(v["profile"]["alpha"], "4/3");
    let w = json(&freelip(&["witness", "--base", "square", "--r", "2"]));
    assert_eq!(w["norm_sum"], "1");
    assert_eq!(w["norm_C"], "15/8");
    assert_eq!(w["level"], 5);
}

#[test]
fn exit_codes() {
    assert_eq!(freelip(&["nonsense"]).status.code(), Some(1));
    assert_eq!(freelip(&["--help"]).status.code(), Some(0));
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{").unwrap();
    let out = freelip(&["cyclespace", "--graph", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_freelip"))
        .args(["gen", "--family", "diamond", "--level", "4"])
        .env("FREELIP_CAP_EDGES", "100")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(4));
    assert_eq!(freelip(&["witness", "--base", "square", "--r", "2", "--schedule", "0"]).status.code(), Some(2));
}
