use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use vertexnet_core::bench::{read_summary_csv, read_trials_csv, TrialStatus};
use vertexnet_core::dataset::Manifest;
use vertexnet_core::gridmap::read_map;
use vertexnet_core::guidance::read_guidance;

fn vertexnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vertexnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Vec<u8> {
    let out = vertexnet(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).unwrap()
}

fn small_maps(dir: &Path, count: usize, seed: &str) {
    ok(&[
        "gen-maps", "--count", &count.to_string(), "--width", "60", "--height", "60",
        "--min-obstacles", "2", "--max-obstacles", "5", "--min-size", "6", "--max-size", "16",
        "--seed", seed, "--out", dir.to_str().unwrap(),
    ]);
}

#[test]
fn gen_maps_writes_parseable_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let listing = json(&ok(&["gen-maps", "--count", "5", "--width", "200", "--height", "200", "--seed", "1", "--out", d]));
    assert_eq!(listing["maps"].as_array().unwrap().len(), 5);
    let mut names: Vec<_> = fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5);
    for name in &names {
        let map = read_map(&fs::read(dir.path().join(name)).unwrap()).unwrap();
        assert_eq!((map.width(), map.height()), (200, 200));
        assert!(map.is_connected(map.start(), map.goal()));
    }

    let again = tempfile::tempdir().unwrap();
    ok(&["gen-maps", "--count", "5", "--seed", "1", "--out", again.path().to_str().unwrap()]);
    for name in &names {
        assert_eq!(fs::read(dir.path().join(name)).unwrap(), fs::read(again.path().join(name)).unwrap());
    }
}

#[test]
fn plan_prints_result_json() {
    let dir = tempfile::tempdir().unwrap();
    small_maps(dir.path(), 1, "4");
    let map = dir.path().join("map_00000.vmap");
    let m = map.to_str().unwrap();
    let a = ok(&["plan", "--map", m, "--algo", "vnrrt", "--termination", "initial", "--seed", "9", "--no-timing"]);
    let v = json(&a);
    assert_eq!(v["status"], "solved");
    assert!(v["wall_time_s"].is_null());
    assert!(v["path"].as_array().unwrap().len() >= 2);
    assert!(v["best_cost"].as_f64().unwrap() > 0.0);
    let text = String::from_utf8(a.clone()).unwrap();
    let keys = ["\"status\"", "\"best_cost\"", "\"iterations_used\"", "\"iterations_to_first_solution\"", "\"wall_time_s\"", "\"path\""];
    let positions: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
    assert!(positions.windows(2).all(|w| w[0] < w[1]));

    let b = ok(&["plan", "--map", m, "--algo", "vnrrt", "--termination", "initial", "--seed", "9", "--no-timing"]);
    assert_eq!(a, b);

    for algo in ["rrt", "nrrt", "m-vnrrt"] {
        let mut args = vec!["plan", "--map", m, "--algo", algo, "--termination", "optimal", "--epsilon", "0.3", "--seed", "2"];
        if algo == "m-vnrrt" {
            args.extend(["--tau", "0.9"]);
        }
        let v = json(&ok(&args));
        assert!(v["wall_time_s"].as_f64().is_some());
        assert!(v["iterations_used"].as_u64().unwrap() >= 1);
    }
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.vmap");
    let out = vertexnet(&["plan", "--map", missing.to_str().unwrap(), "--algo", "vnrrt"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let bad = dir.path().join("bad.vmap");
    fs::write(&bad, "VMAP1\n2 2\n04\n23\n").unwrap();
    let out = vertexnet(&["extract-vertices", "--map", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // Start and goal walled off from each other.
    let walled = dir.path().join("walled.vmap");
    fs::write(&walled, "VMAP1\n3 3\n201\n111\n103\n").unwrap();
    let out = vertexnet(&["extract-vertices", "--map", walled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    assert_eq!(vertexnet(&["plan", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(vertexnet(&["frobnicate"]).status.code(), Some(2));
    let two = dir.path().join("two.vmap");
    fs::write(&two, "VMAP1\n2 2\n01\n23\n").unwrap();
    let t = two.to_str().unwrap();
    assert_eq!(vertexnet(&["plan", "--map", t, "--algo", "m-vnrrt"]).status.code(), Some(2));
    assert_eq!(vertexnet(&["plan", "--map", t, "--algo", "rrt", "--guidance", "oracle-path"]).status.code(), Some(2));
    assert_eq!(vertexnet(&["plan", "--map", t, "--guidance", "bogus"]).status.code(), Some(2));
    assert_eq!(vertexnet(&["gen-maps", "--count", "1"]).status.code(), Some(2));
    let out = vertexnet(&["gen-maps", "--width", "4", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extract_vertices_on_a_chamfered_corner() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("l.vmap");
    // East along the bottom row, one diagonal step around the wall corner, then north.
    fs::write(&file, "VMAP1\n5 5\n11113\n11110\n11110\n11110\n20000\n").unwrap();
    let v = json(&ok(&["extract-vertices", "--map", file.to_str().unwrap()]));
    assert_eq!(v["cost"], 6.0 + std::f64::consts::SQRT_2);
    assert_eq!(v["path"].as_array().unwrap().len(), 8);
    assert_eq!(v["vertices"], serde_json::json!([[0, 4], [3, 4], [4, 3], [4, 0]]));
}

#[test]
fn make_guidance_and_plan_from_file() {
    let dir = tempfile::tempdir().unwrap();
    small_maps(dir.path(), 2, "8");
    let map = dir.path().join("map_00001.vmap");
    let m = map.to_str().unwrap();
    let vgm = dir.path().join("map_00001.vgm");
    let path_info = json(&ok(&["make-guidance", "--map", m, "--mode", "path", "--out", vgm.to_str().unwrap()]));
    let vertex_info = json(&ok(&["make-guidance", "--map", m, "--mode", "vertex", "--out", vgm.to_str().unwrap()]));
    assert!(vertex_info["support"].as_u64() < path_info["support"].as_u64());
    let g = read_guidance(&fs::read(&vgm).unwrap()).unwrap();
    assert_eq!((g.width(), g.height()), (60, 60));
    assert_eq!(g.support_size() as u64, vertex_info["support"].as_u64().unwrap());

    let masked = json(&ok(&["make-guidance", "--map", m, "--tau", "0.5", "--out", vgm.to_str().unwrap()]));
    assert!(masked["support"].as_u64() < vertex_info["support"].as_u64());

    let source = format!("file:{}", vgm.display());
    let v = json(&ok(&["plan", "--map", m, "--guidance", &source, "--no-timing"]));
    assert_eq!(v["status"], "solved");
    let missing = format!("file:{}", dir.path().join("nope.vgm").display());
    assert_eq!(vertexnet(&["plan", "--map", m, "--guidance", &missing]).status.code(), Some(1));
}

#[test]
fn bench_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("maps");
    small_maps(&maps, 2, "3");
    let csv = dir.path().join("trials.csv");
    let summary = dir.path().join("summary.csv");
    ok(&[
        "bench", "--maps", maps.to_str().unwrap(), "--algo", "rrt,vnrrt,m-vnrrt", "--tau", "0.5,0.99",
        "--trials", "3", "--jobs", "2", "--seed", "5", "--out", csv.to_str().unwrap(),
        "--summary", summary.to_str().unwrap(),
    ]);
    let records = read_trials_csv(fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(records.len(), 2 * 4 * 3);
    assert!(records.iter().all(|r| r.time_s.is_some()));
    assert!(records.iter().all(|r| r.status == TrialStatus::Solved));
    let rows = read_summary_csv(fs::File::open(&summary).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r.map_set == "maps"));
    let labels: Vec<&str> = rows.iter().map(|r| r.algorithm.as_str()).collect();
    for l in ["rrt_star", "vnrrt_star", "m_vnrrt_star_tau0.5", "m_vnrrt_star_tau0.99"] {
        assert!(labels.contains(&l), "{l} missing");
    }

    let out = ok(&["summarize", "--input", csv.to_str().unwrap(), "--map-set", "maps"]);
    assert_eq!(out, fs::read(&summary).unwrap());

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "map_id,algorithm,tau,trial,seed,status,path_length,time_s,iterations,iters_to_first\n").unwrap();
    assert_eq!(vertexnet(&["summarize", "--input", empty.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn export_dataset_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ds");
    let args = [
        "export-dataset", "--count", "10", "--starts", "2", "--goals", "2", "--width", "48", "--height", "48",
        "--min-obstacles", "1", "--max-obstacles", "4", "--min-size", "5", "--max-size", "12",
        "--seed", "21", "--out", out.to_str().unwrap(),
    ];
    let v = json(&ok(&args));
    assert_eq!((v["instances"].as_u64(), v["train"].as_u64(), v["test"].as_u64()), (Some(40), Some(28), Some(12)));
    let manifest: Manifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.seed, 21);
    assert_eq!(manifest.instances.len(), 40);
    for inst in &manifest.instances {
        let map = read_map(&fs::read(out.join(&inst.map_file)).unwrap()).unwrap();
        assert_eq!((map.start(), map.goal()), (inst.start, inst.goal));
        read_guidance(&fs::read(out.join(&inst.target_file)).unwrap()).unwrap();
    }
}
