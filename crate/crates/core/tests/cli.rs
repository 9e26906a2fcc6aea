#![allow(clippy::approx_constant)]

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const EQUILATERAL: &str = "1.0471975511965976,1.0471975511965976,1.0471975511965976";
const ORTHOGONAL: &str = "1.5707963267948966,1.5707963267948966,1.5707963267948966";

fn trifit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trifit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn error_kind(out: &Output) -> String {
    json(&out.stderr)["error"]["kind"].as_str().unwrap_or_default().to_string()
}

#[test]
fn solve_worked_example_with_rounded_input() {
    let out = trifit(&["solve", "--angles", "1.0472,1.0472,1.0472", "--sides", "1.5708,1.5708,1.5708"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out.stdout);
    assert_eq!(doc["schema"], "trifit/1");
    let sols = doc["solutions"].as_array().unwrap();
    let hit = sols.iter().any(|s| {
        let c = &s["C"];
        (s["theta"].as_f64().unwrap() - 0.7854).abs() < 1e-4
            && (s["psi"].as_f64().unwrap() - 0.95532).abs() < 1e-4
            && (c[2].as_f64().unwrap() - 0.70711).abs() < 1e-4
    });
    assert!(hit, "{doc}");
}

#[test]
fn solve_rejects_bad_angle_sum() {
    let out = trifit(&["solve", "--angles", "1,1,1", "--sides", ORTHOGONAL]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_kind(&out), "invalid_input");
    assert!(out.stdout.is_empty());
}

#[test]
fn solve_obtuse_on_orthogonal_lines_finds_nothing() {
    let out = trifit(&["solve", "--angles", "1.9,0.7,0.5416", "--sides", "1.5708,1.5708,1.5708"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stdout)["solutions"].as_array().unwrap().len(), 0);
}

#[test]
fn invalid_flags_and_configs_exit_2_with_json() {
    for args in [
        vec!["solve", "--angles", "1,1"],
        vec!["solve", "--angles", EQUILATERAL, "--sides", "2,1,1"],
        vec!["solve", "--angles", EQUILATERAL, "--sides", ORTHOGONAL, "--scan-n", "4"],
        vec!["solve", "--angles", EQUILATERAL, "--sides", ORTHOGONAL, "--mode", "planes"],
        vec!["frobnicate"],
        vec!["sweep", "--vary", "angC=1:2:1", "--sides", ORTHOGONAL],
        vec!["sweep", "--vary", "angC=1:2:5", "--sides", ORTHOGONAL],
        vec!["elliptic", "--points", "1,0,0;0,1,0", "--sides", ORTHOGONAL],
        vec!["elliptic", "--points", "1,0,0;0,1,0;0,0,1", "--sides", ORTHOGONAL],
    ] {
        let out = trifit(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert_eq!(error_kind(&out), "invalid_input", "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_4() {
    let out = trifit(&[
        "solve", "--angles", EQUILATERAL, "--sides", ORTHOGONAL, "--out", "/nonexistent/dir/sol.json",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_kind(&out), "io");
    let out = trifit(&["verify", "--solution", "/nonexistent/sol.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn help_exits_0() {
    let out = trifit(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("sweep"));
}

#[test]
fn verify_flags_tampered_file() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let good = fs::read_to_string(fixture("solve_equilateral_orthogonal.json")).unwrap();
    let mut doc: Value = serde_json::from_str(&good).unwrap();
    let x = doc["solutions"][0]["C"][0].as_f64().unwrap();
    doc["solutions"][0]["C"][0] = (x + 1e-3).into();
    fs::write(&sol, doc.to_string()).unwrap();
    let out = trifit(&["verify", "--solution", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let rep = json(&out.stdout);
    assert_eq!(rep["pass"], false);
    assert_eq!(rep["reports"][0]["pass"], false);
    assert_eq!(rep["reports"][1]["pass"], true);
    let d = rep["reports"][0]["line_distances"][2].as_f64().unwrap();
    assert!((d - 1e-3).abs() < 1e-6, "{d}");

    fs::write(&sol, "{\"schema\":\"other/9\"}").unwrap();
    let out = trifit(&["verify", "--solution", sol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outputs_match_golden_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let at = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let sol = fixture("solve_equilateral_orthogonal.json");
    let sol = sol.to_str().unwrap();
    let runs: [(&str, Vec<String>); 5] = [
        (
            "solve_equilateral_orthogonal.json",
            ["solve", "--angles", EQUILATERAL, "--sides", ORTHOGONAL, "--out"]
                .map(String::from)
                .into_iter()
                .chain([at("solve_equilateral_orthogonal.json")])
                .collect(),
        ),
        (
            "verify_equilateral_orthogonal.json",
            ["verify", "--solution", sol, "--out"]
                .map(String::from)
                .into_iter()
                .chain([at("verify_equilateral_orthogonal.json")])
                .collect(),
        ),
        (
            "spherical_equilateral_orthogonal.json",
            ["spherical", "--solution", sol, "--out"]
                .map(String::from)
                .into_iter()
                .chain([at("spherical_equilateral_orthogonal.json")])
                .collect(),
        ),
        (
            "sweep_isosceles_orthogonal.csv",
            ["sweep", "--vary", "angC=1.0:2.0:11", "--link", "angA=angB=(pi-angC)/2", "--sides", ORTHOGONAL, "--out"]
                .map(String::from)
                .into_iter()
                .chain([at("sweep_isosceles_orthogonal.csv")])
                .collect(),
        ),
        (
            "plot_equilateral_quarter_turn.svg",
            ["plot", "--angles", EQUILATERAL, "--sides", ORTHOGONAL, "--theta", "0.7853981633974483", "--svg"]
                .map(String::from)
                .into_iter()
                .chain([at("plot_equilateral_quarter_turn.svg")])
                .collect(),
        ),
    ];
    for (name, args) in runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = trifit(&args);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let got = fs::read(dir.path().join(name)).unwrap();
        let want = fs::read(fixture(name)).unwrap();
        assert!(got == want, "{name} differs from its golden fixture");
    }
}

#[test]
fn sweep_feasibility_flips_at_right_angle() {
    let out = trifit(&[
        "sweep", "--vary", "angC=1.0:2.0:101", "--link", "angA=angB=(pi-angC)/2", "--sides", "1.5708,1.5708,1.5708",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let header = rdr.headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["angC", "angA", "angB", "n_solutions", "best_residual", "pred_ii", "pred_iii", "pred_iv"]
    );
    let rows: Vec<(f64, usize)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 101);
    let last_feasible = rows.iter().filter(|(_, n)| *n > 0).map(|(c, _)| *c).fold(0.0, f64::max);
    let first_empty = rows.iter().filter(|(_, n)| *n == 0).map(|(c, _)| *c).fold(f64::INFINITY, f64::min);
    assert!(last_feasible <= FRAC_PI_2 && FRAC_PI_2 - last_feasible <= 0.01);
    assert!(first_empty > FRAC_PI_2 && first_empty - FRAC_PI_2 <= 0.01);
}

#[test]
fn sweep_marks_invalid_cells() {
    let out = trifit(&["sweep", "--vary", "alpha=0.5:3.0:6", "--angles", EQUILATERAL, "--sides", "9,1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows[..3] {
        assert!(r.ends_with(",true,true,true"), "{r}");
    }
    // alpha = beta + gamma is already degenerate.
    for r in &rows[3..] {
        assert!(r.ends_with(",invalid,,,,"), "{r}");
    }
}

#[test]
fn plot_svg_has_construction_elements() {
    let out = trifit(&["plot", "--angles", "1.0472,1.0472,1.0472", "--sides", "1.5708,1.5708,1.5708", "--theta", "0.7854"]);
    assert_eq!(out.status.code(), Some(0));
    let svg = String::from_utf8(out.stdout).unwrap();
    for id in ["circle-oab", "segment-ab", "segment-cp-cpp"] {
        assert!(svg.contains(&format!("id=\"{id}\"")), "missing {id}");
    }
    assert_eq!(svg.matches("class=\"point\"").count(), 6);
}

#[test]
fn degrees_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("deg.json");
    let sol = sol.to_str().unwrap();
    let out = trifit(&["--degrees", "solve", "--angles", "60,60,60", "--sides", "90,90,90", "--out", sol]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&fs::read(sol).unwrap());
    assert_eq!(doc["units"], "degrees");
    assert!((doc["request"]["angles"][0].as_f64().unwrap() - 60.0).abs() < 1e-9);
    let theta = doc["solutions"][0]["theta"].as_f64().unwrap();
    assert!((theta - 45.0).abs() < 1e-6, "{theta}");
    let out = trifit(&["verify", "--solution", sol]);
    assert_eq!(out.status.code(), Some(0));
    let out = trifit(&["spherical", "--solution", sol]);
    assert_eq!(out.status.code(), Some(0));
    let arcs = &json(&out.stdout)["scenes"][0]["arcs"];
    assert!((arcs[0].as_f64().unwrap() - 60.0).abs() < 1e-9);
}

#[test]
fn rays_mode_and_spherical_from_flags() {
    let out = trifit(&["solve", "--angles", EQUILATERAL, "--sides", ORTHOGONAL, "--mode", "rays"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out.stdout);
    assert_eq!(doc["request"]["mode"], "rays");
    for s in doc["solutions"].as_array().unwrap() {
        for v in ["A", "B", "C"] {
            assert!(s[v].as_array().unwrap().iter().all(|x| x.as_f64().unwrap() >= -1e-9));
        }
    }
    let out = trifit(&["spherical", "--angles", "1.2,1.1,0.8415926535897931", "--sides", "1.3,1.9,1.1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out.stdout)["pass"], true);
}

#[test]
fn oracle_and_elliptic_commands() {
    let out = trifit(&["oracle", "--angles", EQUILATERAL, "--sides", ORTHOGONAL, "--grid", "2000"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out.stdout);
    assert!(doc["deviation"].as_f64().unwrap() < 1e-6);
    let n: Vec<f64> = doc["normal"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    let s = 1.0 / 3f64.sqrt();
    assert!(n.iter().all(|x| (x.abs() - s).abs() < 1e-6), "{n:?}");

    let h = (PI / 3.0).sin();
    let pts = format!("1,0,0;0.5,{h},0;-0.5,{h},0");
    let out = trifit(&["elliptic", "--points", &pts, "--sides", ORTHOGONAL]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out.stdout);
    assert_eq!(doc["pass"], true);
    for i in 0..3 {
        assert!(doc["collinearity"][i].as_f64().unwrap() < 1e-9);
        assert!((doc["distances"][i].as_f64().unwrap() - FRAC_PI_2).abs() < 1e-7);
    }

    let out = trifit(&["elliptic", "--points", "1,0,0;0.8253,0.5646,0;0.3624,0.9320,0", "--sides", ORTHOGONAL]);
    assert_eq!(out.status.code(), Some(2), "distances that do not sum to pi");
}

#[test]
fn in_process_run_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = trifit::cli::run(
        ["trifit", "solve", "--angles", EQUILATERAL, "--sides", ORTHOGONAL],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    let bin = trifit(&["solve", "--angles", EQUILATERAL, "--sides", ORTHOGONAL]);
    assert_eq!(out, bin.stdout);
}
