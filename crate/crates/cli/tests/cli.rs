use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn torlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write_matrix(path: &Path, labels: &[&str], rows: &[&[f64]]) {
    let mut text = labels.join(",") + "\n";
    for row in rows {
        text += &row.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        text += "\n";
    }
    fs::write(path, text).unwrap();
}

const CYCLE: [&[f64]; 4] = [
    &[0.0, 1.0, 2.0, 1.0],
    &[1.0, 0.0, 1.0, 2.0],
    &[2.0, 1.0, 0.0, 1.0],
    &[1.0, 2.0, 1.0, 0.0],
];

#[test]
fn farey_distances_and_paths() {
    let o = torlab(&["farey", "dist", "3/5", "1/0", "--path"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3\n3/5 1/2 0/1 1/0\n");

    let o = torlab(&["farey", "dist", "-2/3", "7/4"]);
    assert_eq!(stdout(&o).trim(), "4");

    let o = torlab(&["farey", "dist", "0/1", "1/1", "--threshold", "2"]);
    assert_eq!(o.status.code(), Some(3), "different parity classes never meet");
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn farey_ball_exports() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("edges.csv");
    let dists = dir.path().join("dist.csv");
    let o = torlab(&[
        "farey",
        "ball",
        "1/0",
        "--radius",
        "1",
        "--bound",
        "1",
        "--edges",
        edges.to_str().unwrap(),
        "--distances",
        dists.to_str().unwrap(),
        "--delta",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["vertices"], 4);
    // The hub and the 4-cycle -1/1, 0/1, 1/1, 1/0 give the product-form value 1/2.
    assert_eq!(v["delta"]["delta"], 0.5);
    assert_eq!(
        fs::read_to_string(edges).unwrap(),
        "vertex1,vertex2\n1/0,-1/1\n1/0,0/1\n1/0,1/1\n-1/1,0/1\n0/1,1/1\n"
    );
    assert!(fs::read_to_string(dists).unwrap().starts_with("vertex,dist\n1/0,0\n"));
}

#[test]
fn gromov_matrix_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cycle = dir.path().join("cycle.csv");
    write_matrix(&cycle, &["a", "b", "c", "d"], &CYCLE);
    let o = torlab(&["gromov", "delta", "--matrix", cycle.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["delta"], 1.0);
    assert_eq!(v["witness_labels"].as_array().unwrap().len(), 4);

    let doubled = dir.path().join("doubled.csv");
    let rows: Vec<Vec<f64>> = CYCLE.iter().map(|r| r.iter().map(|x| 2.0 * x).collect()).collect();
    let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    write_matrix(&doubled, &["a", "b", "c", "d"], &rows);
    let o = torlab(&["gromov", "qi-fit", "--d0", cycle.to_str().unwrap(), "--d1", doubled.to_str().unwrap()]);
    let v = json(&o);
    assert_eq!((v["k"].as_f64(), v["mu"].as_f64()), (Some(2.0), Some(0.0)));

    let line = dir.path().join("line.csv");
    let n = 12;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| (i as f64 - j as f64).abs()).collect()).collect();
    let rows: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
    write_matrix(&line, &labels, &rows);
    let o = torlab(&["gromov", "converge", "--matrix", line.to_str().unwrap(), "--sequence", "1,2,3,4,5,6,7,8,9,10,11", "--threshold", "2"]);
    assert_eq!(json(&o)["verdict"], "diverging");
}

#[test]
fn malformed_matrix_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b\n0,1\n2,0\n").unwrap();
    let o = torlab(&["gromov", "delta", "--matrix", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn lab_ray_reports_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = torlab(&["lab", "ray", "--target", "[0]", "--T", "6", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["outcome"], "bounded");
    assert_eq!(fs::read_to_string(&out).unwrap().trim_end(), stdout(&o).trim_end());

    // A short golden ray has not yet left its first few cusps and looks bounded.
    let o = torlab(&["lab", "ray", "--target", "[1;(1)]", "--T", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["outcome"], "bounded");
    let o = torlab(&["lab", "ray", "--target", "[1;(1)]", "--T", "0"]);
    assert_eq!(o.status.code(), Some(2));

    let o = torlab(&["lab", "ray", "--target", "[1;(1)]", "--T", "4", "--grid", "0.1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn lab_flags_reach_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"epsilon": 0.05, "seed": 9}"#).unwrap();
    let o = torlab(&["lab", "ray", "--target", "[0]", "--T", "2", "--config", cfg.to_str().unwrap(), "--seed", "4"]);
    let v = json(&o);
    assert_eq!(v["provenance"]["epsilon"], 0.05);
    assert_eq!(v["provenance"]["seed"], 4);
}

#[test]
fn lab_separate_and_segments() {
    let o = torlab(&["lab", "separate", "--f", "[1;(1)]", "--g", "[1;(2)]", "--n", "16"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = torlab(&["lab", "segments", "--f", "[1;(1)]", "--g", "[1;(2)]", "--n", "8"]);
    assert_eq!(json(&o)["outcome"], "converges");
    let o = torlab(&["lab", "segments", "--f", "[1;2]", "--g", "[1;(2)]"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn lab_qi_and_boundary_map() {
    let o = torlab(&["lab", "qi-audit", "--denom", "5", "--window", "-1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["experiment"], "qi_audit");
    let o = torlab(&["lab", "qi-audit", "--denom", "8", "--compare", "5"]);
    assert_eq!(json(&o)["experiment"], "qi_stability");

    let o = torlab(&["lab", "boundary-map", "--slopes", "1/1,1/2,1/3,1/4,1/5,1/6,1/7,1/8"]);
    assert_eq!(json(&o)["outcome"], "bounded");
    let o = torlab(&["lab", "boundary-map"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn electric_commands() {
    let o = torlab(&["electric", "profile", "--ray", "[0]", "--T", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("t,d_el\n0,0\n"), "{text}");
    assert_eq!(text.lines().count(), 10);

    let o = torlab(&["electric", "dist", "--from", "0,1", "--to", "0,1000"]);
    let v = json(&o);
    let (d, d_el) = (v["teich_distance"].as_f64().unwrap(), v["d_el"].as_f64().unwrap());
    assert!(d_el < d, "the thin region of 1/0 shortcuts the climb: {d_el} vs {d}");

    let o = torlab(&["electric", "edges", "--region=-1,1,0.5,14", "--grid", "0.125"]);
    let text = stdout(&o);
    assert!(text.starts_with("source,target,weight\n"));
    assert!(text.contains("cone:1/0"));
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(torlab(&["--help"]).status.code(), Some(0));
    assert_eq!(torlab(&["lab", "nope"]).status.code(), Some(3));
}
