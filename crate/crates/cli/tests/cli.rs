use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steklov-trace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn sigmas(csv: &[u8]) -> Vec<f64> {
    steklov_trace::io::parse_spectrum_csv(csv)
        .unwrap()
        .into_iter()
        .map(|r| r.1)
        .collect()
}

#[test]
fn disk_harmonic_csv() {
    let out = run(&["solve", "--domain", "disk:1", "--k", "1", "--modes", "7"]);
    assert!(out.status.success());
    let s = sigmas(&out.stdout);
    for (a, b) in s.iter().zip([0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0]) {
        assert!((a - b).abs() < 1e-12, "{s:?}");
    }
    assert_eq!(s.len(), 7);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let csv = dir.path().join(format!("s{i}.csv"));
        let tr = dir.path().join(format!("t{i}.json"));
        let out = run(&[
            "solve",
            "--domain",
            "square:1:6",
            "--k",
            "2",
            "--ell",
            "1",
            "--modes",
            "8",
            "--out",
            csv.to_str().unwrap(),
            "--traces",
            tr.to_str().unwrap(),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        files.push((fs::read(csv).unwrap(), fs::read(tr).unwrap()));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn hadamard_verdicts() {
    let v = json(&run(&["hadamard", "--N", "100"]));
    assert_eq!(v["L2"], "in");
    assert_eq!(v["H12A"], "out");
}

#[test]
fn zero_pair_is_compatible() {
    let v = json(&run(&["check-pair", "--zero", "--modes", "16"]));
    assert_eq!(v["verdict"], "in");
    assert_eq!(v["consistent"], true);
    assert_eq!(v["routes"].as_array().unwrap().len(), 2);
}

#[test]
fn rough_normal_data_is_rejected() {
    let v = json(&run(&[
        "check-pair",
        "--modes",
        "128",
        "--function1",
        "hadamard:120",
    ]));
    assert_eq!(v["verdict"], "out");
}

#[test]
fn auxiliary_disk_values() {
    let out = run(&[
        "solve-aux",
        "--domain",
        "disk:1",
        "--ell",
        "0",
        "--m",
        "1",
        "--modes",
        "5",
    ]);
    assert!(out.status.success());
    let s = sigmas(&out.stdout);
    for (a, b) in s.iter().zip([1.0, 3.0, 3.0, 5.0, 5.0]) {
        assert!((a - b).abs() < 1e-10, "{s:?}");
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"domain": "disk:2", "k": 1, "modes": 3}"#).unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "solve", "--modes", "5"]);
    assert!(out.status.success());
    let s = sigmas(&out.stdout);
    assert_eq!(s.len(), 5);
    assert!((s[4] - 1.0).abs() < 1e-12, "{s:?}");
    fs::write(&cfg, r#"{"domian": "disk:2"}"#).unwrap();
    assert_eq!(
        run(&["--config", cfg.to_str().unwrap(), "solve"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn corrupted_mesh_exits_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.json");
    fs::write(
        &mesh,
        r#"{"vertices": [[0, 0], [1, 0]], "cells": [[0, 1, 7]], "element_type": "P1"}"#,
    )
    .unwrap();
    let out = run(&["solve", "--domain", &format!("mesh:{}", mesh.display())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mesh.json"));
}

#[test]
fn mesh_file_domain() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("mesh.json");
    let (m, _) = steklov_core::geometry::build_rect_mesh(
        1.0,
        1.0,
        4,
        4,
        steklov_core::ElementType::P1Triangle,
    )
    .unwrap();
    fs::write(
        &mesh,
        steklov_trace::io::to_json(&steklov_trace::io::mesh_file(&m)).unwrap(),
    )
    .unwrap();
    let out = run(&[
        "solve",
        "--domain",
        &format!("mesh:{}", mesh.display()),
        "--modes",
        "3",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(sigmas(&out.stdout)[0], 0.0);
}

#[test]
fn invalid_flags_and_invariants() {
    assert_eq!(
        run(&["solve", "--k", "3", "--ell", "5"]).status.code(),
        Some(1)
    );
    assert_eq!(
        run(&["hadamard", "--tail-tol", "-1"]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let out = run(&[
        "solve",
        "--domain",
        "square:1:4",
        "--k",
        "1",
        "--modes",
        "6",
        "--gram-tol",
        "1e-300",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("trace_gram_deviation"));
}

#[test]
fn expand_then_extend_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("c.json");
    let v = json(&run(&[
        "expand",
        "--domain",
        "disk:1",
        "--k",
        "2",
        "--ell",
        "0",
        "--modes",
        "12",
        "--function",
        "cos:2",
    ]));
    let c: Vec<f64> = v["coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(v["membership"]["verdict"], "in");
    fs::write(
        &coeffs,
        serde_json::to_vec(&serde_json::json!({"basis": v["basis"], "coeffs": c})).unwrap(),
    )
    .unwrap();
    let e = json(&run(&[
        "extend",
        "--domain",
        "disk:1",
        "--k",
        "2",
        "--ell",
        "0",
        "--modes",
        "12",
        "--input",
        coeffs.to_str().unwrap(),
    ]));
    let trace = e["trace"].as_array().unwrap();
    let s = e["boundary"]["s"].as_array().unwrap();
    for (t, s) in trace.iter().zip(s) {
        assert!((t.as_f64().unwrap() - (2.0 * s.as_f64().unwrap()).cos()).abs() < 1e-10);
    }
    let wrong = run(&[
        "extend",
        "--domain",
        "disk:1",
        "--k",
        "1",
        "--modes",
        "12",
        "--input",
        coeffs.to_str().unwrap(),
    ]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn geymonat_and_vertex_commands() {
    let v = json(&run(&[
        "check-geymonat",
        "--domain",
        "square:1:1",
        "--function",
        "x",
        "--function1",
        "nx",
    ]));
    assert!(v["total"]["limit"].as_str().unwrap().starts_with("finite"));
    let v = json(&run(&[
        "check-geymonat",
        "--domain",
        "square:1:1",
        "--function",
        "x",
    ]));
    assert_eq!(v["total"]["limit"], "divergent");
    let v = json(&run(&[
        "check-polygon",
        "--domain",
        "square:1:1",
        "--function",
        "x2",
        "--samples",
        "128",
    ]));
    assert!(v
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["limit"].as_str().unwrap().starts_with("finite")));
}

#[test]
fn oracle_and_weyl() {
    let v = json(&run(&["oracle", "--function", "step", "--modes", "256"]));
    assert_eq!(v["gagliardo"]["limit"], "divergent");
    assert_eq!(v["spectral_membership"]["verdict"], "out");
    let v = json(&run(&[
        "weyl", "--domain", "disk:1", "--k", "1", "--modes", "200",
    ]));
    assert!((v["exponent"].as_f64().unwrap() - 1.0).abs() < 0.05);
}
