use std::path::Path;
use std::process::{Command, Output};

use premax::closure::SetApprox;
use premax::io::write_set_csv;
use premax::suite::{battery, BatterySettings};
use premax::symbolic::{even_shift, full_shift, golden_mean};
use premax::torus::TorusPoint;
use serde_json::Value;

fn premax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_premax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn orbit_csv(points: &[[f64; 2]]) -> String {
    let mut s = String::from("j,x0,x1\n");
    for (j, p) in points.iter().enumerate() {
        s.push_str(&format!("{j},{},{}\n", p[0], p[1]));
    }
    s
}

#[test]
fn shadow_of_a_true_orbit_is_itself() {
    let dir = tempfile::tempdir().unwrap();
    let pts: Vec<[f64; 2]> = (0..20).map(|j| if j % 2 == 0 { [0.2, 0.4] } else { [0.8, 0.6] }).collect();
    let input = write(dir.path(), "orbit.csv", &orbit_csv(&pts));
    for method in ["operator", "newton", "linear"] {
        let out = premax(&["shadow", "--input", &input, "--method", method]);
        assert_eq!(out.status.code(), Some(0), "{method}");
        let v = json(&out);
        assert!(v["sup_distance"].as_f64().unwrap() < 1e-12, "{method}: {v}");
    }
}

#[test]
fn large_defect_is_refused_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let pts: Vec<[f64; 2]> = (0..10).map(|j| [0.1 * j as f64, 0.37]).collect();
    let input = write(dir.path(), "bad.csv", &orbit_csv(&pts));
    let out = premax(&["shadow", "--input", &input]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert!(v["error"]["message"].as_str().unwrap().contains("defect too large"), "{v}");
}

#[test]
fn malformed_row_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "m.csv", "j,x0,x1\n0,0,0\n1,zero,0\n");
    let out = premax(&["shadow", "--input", &input]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["line"], 3);
}

#[test]
fn config_violations_are_reported_together() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "delta = -1.0\nresolution = 0.0\n");
    let out = premax(&["--config", &cfg, "suite"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert!(v["error"]["violations"].as_array().unwrap().len() >= 2, "{v}");
    // flags override the file
    let out = premax(&["--config", &cfg, "--delta", "0.04", "--resolution", "0.004", "sft", "--input", "/nonexistent"]);
    let v = json(&out);
    assert!(v["error"]["violations"].as_array().is_none_or(|a| a.is_empty()), "{v}");
}

#[test]
fn unknown_config_key_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "deltta = 0.1\n");
    let out = premax(&["--config", &cfg, "suite"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn closure_on_a_fixed_point_stabilizes_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "fixed.csv", "x0,x1\n0,0\n");
    let out_dir = dir.path().join("out");
    let out = premax(&["--out", out_dir.to_str().unwrap(), "closure", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], serde_json::json!({ "kind": "stabilized", "at": 0 }));
    for f in ["trace.json", "trace.csv", "final_set.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn closure_of_a_homoclinic_loop_grows_and_stabilizes() {
    let out = premax(&["closure", "--case", "homoclinic_loop"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"]["kind"], "stabilized");
    let sizes: Vec<u64> = v["iterates"].as_array().unwrap().iter().map(|s| s["points"].as_array().unwrap().len() as u64).collect();
    assert!(sizes.last() > sizes.first(), "{sizes:?}");
}

#[test]
fn crovisier_closure_is_refused_not_stabilized() {
    let out = premax(&["crovisier", "--depth", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["closure"]["status"], "refused");
    assert_eq!(v["total_cells"], 4096);
}

#[test]
fn crovisier_without_v_keeps_the_full_grid() {
    let out = premax(&["crovisier", "--depth", "2", "--v-cells", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["kept_cells"], v["total_cells"]);
}

#[test]
fn sft_queries() {
    let dir = tempfile::tempdir().unwrap();
    let golden = write(dir.path(), "golden.txt", &golden_mean().to_string());
    let full = write(dir.path(), "full.txt", &full_shift(2).unwrap().to_string());
    let even = write(dir.path(), "even.txt", &even_shift().to_string());

    assert_eq!(json(&premax(&["sft", "--input", &golden]))["k"], 2);
    assert_eq!(json(&premax(&["sft", "--input", &full]))["k"], 1);
    let v = json(&premax(&["sft", "--input", &even]));
    assert!(v["k"].is_null());
    assert!(v["message"].as_str().unwrap().contains("not SFT up to kmax 8"));
    let w = v["odd_run_witness"].as_str().unwrap();
    assert!(w.contains('1'), "{w}");

    let v = json(&premax(&["sft", "--input", &golden, "--query", "language", "--k", "2"]));
    assert_eq!(v["words"], serde_json::json!(["00", "01", "10"]));
    let v = json(&premax(&["sft", "--input", &golden, "--query", "stabilization", "--k", "3"]));
    assert_eq!(v["stabilizes"], true);
}

#[test]
fn sft_parse_error_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "alphabet 2\n(0\n");
    assert_eq!(premax(&["sft", "--input", &bad]).status.code(), Some(1));
}

fn net_csv(points: Vec<TorusPoint>, res: f64) -> String {
    write_set_csv(&SetApprox::new(points, res, "net").unwrap())
}

#[test]
fn maximality_of_the_full_torus_net_passes() {
    let dir = tempfile::tempdir().unwrap();
    let n = 40;
    let pts = (0..n * n)
        .map(|k| TorusPoint::new(vec![(k % n) as f64 / n as f64, (k / n) as f64 / n as f64]))
        .collect();
    let input = write(dir.path(), "net.csv", &net_csv(pts, 0.025));
    let out = premax(&["--resolution", "0.025", "--membership-tol", "0.05", "maximality", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["pairs_tested"].as_u64().unwrap() > 0);
    assert_eq!(v["failures"].as_array().unwrap().len(), 0, "{v}");
}

#[test]
fn maximality_flags_an_unclosed_heteroclinic_cycle() {
    // both legs between the fixed point and a period-2 orbit, before closure:
    // brackets of the two legs near either end leave the net
    let case = battery(&BatterySettings::default(), 0)
        .into_iter()
        .find(|c| c.name == "heteroclinic_cycle")
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "het.csv", &write_set_csv(&case.lambda0));
    let out = premax(&["maximality", "--input", &input]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(!v["failures"].as_array().unwrap().is_empty(), "{v}");
}

#[test]
fn bad_thread_count_is_an_input_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_premax"))
        .args(["crovisier", "--depth", "2"])
        .env("PREMAX_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exhausted_budget_exits_with_code_3() {
    let out = premax(&["--max-iter", "1", "closure", "--case", "homoclinic_loop"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["verdict"]["kind"], "budget_exhausted");
}
