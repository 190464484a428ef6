use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use algebroid_cli::{cmd_check, cmd_describe, cmd_simulate, parse_config};
use algebroid_core::expr::{parse, Env};

fn write(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_algebroid")).args(args).env("ALGEBROID_THREADS", "2").output().unwrap()
}

fn shipped(name: &str) -> String {
    format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn model(json: &str) -> algebroid_cli::Model {
    parse_config(json).unwrap().build().unwrap()
}

const TANGENT: &str = r#"{"base_dim": 2, "fiber_rank": 2, "preset": {"kind": "tangent_bundle"},
    "lagrangian": "0.5*(y1^2 + y2^2)", "check": {"checks": ["skew", "lie"]}}"#;

const NON_JACOBI: &str = r#"{"base_dim": 0, "fiber_rank": 3, "preset": {"kind": "lie_algebra",
    "structure_constants": [
        [[0, 0, 1], [0, 0, 1], [-1, -1, 0]],
        [[0, 0, 0], [0, 0, 0], [0, 0, 0]],
        [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]]}}"#;

const ISOTROPIC: &str = r#"{"base_dim": 0, "fiber_rank": 3,
    "preset": {"kind": "lie_algebra", "algebra": "so3", "inertia": [1, 1, 1]},
    "noether": {"section": ["0", "0", "1"]},
    "simulate": {"t0": 0, "t1": 2, "h": 0.001, "x": [], "y": [0.3, -1, 0.8], "monitors": ["noether", "momentum_norm"]}}"#;

#[test]
fn tangent_bundle_checks_pass() {
    let report = cmd_check(&model(TANGENT)).unwrap();
    assert_eq!(report.checks.len(), 2);
    assert!(report.passed());
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn non_jacobi_fixture_fails_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.json", NON_JACOBI);
    let out = run(&["check", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL lie"));
}

#[test]
fn isotropic_noether_pair_passes_and_is_conserved() {
    let m = model(ISOTROPIC);
    let report = cmd_check(&m).unwrap();
    let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, ["lie", "noether"]);
    assert!(report.passed(), "{report}");
    let out = cmd_simulate(&m).unwrap();
    let drift = out.report.drifts.iter().find(|d| d.0 == "noether").unwrap();
    assert!(drift.1 < 1e-8);
}

#[test]
fn rigid_body_simulation_has_one_row_per_step_and_conserves_energy() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("out.csv");
    let out = run(&["simulate", &shipped("rigid_body.json"), "-o", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,y1,y2,y3,H,momentum_norm"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 10001);
    assert_eq!(rows.last().unwrap()[0], 10.0);
    assert!((rows.last().unwrap()[4] - rows[0][4]).abs() < 1e-8);
}

#[test]
fn free_particle_positions_form_an_arithmetic_progression() {
    let m = model(
        r#"{"base_dim": 1, "fiber_rank": 1, "preset": {"kind": "tangent_bundle"}, "lagrangian": "0.5*y1^2",
            "simulate": {"t0": 0, "t1": 1, "h": 0.125, "x": [2], "y": [0.5]}}"#,
    );
    let csv = cmd_simulate(&m).unwrap().csv;
    let xs: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(xs.len(), 9);
    for (k, x) in xs.iter().enumerate() {
        assert_eq!(*x, 2.0 + 0.0625 * k as f64);
    }
}

#[test]
fn wong_charge_norm_is_conserved() {
    let out = cmd_simulate(&algebroid_cli::load(Path::new(&shipped("wong.json"))).unwrap()).unwrap();
    assert!(out.error.is_none());
    let drift = out.report.drifts.iter().find(|d| d.0 == "charge_norm").unwrap();
    assert!(drift.1 < 1e-8, "{drift:?}");
}

#[test]
fn phase_space_flows_agree_with_velocity_flows() {
    // p = I y for the rigid body; compare the two final rows
    let vel = model(r#"{"base_dim": 0, "fiber_rank": 3, "preset": {"kind": "lie_algebra", "algebra": "so3", "inertia": [1, 2, 3]},
        "simulate": {"t0": 0, "t1": 1, "h": 0.001, "x": [], "y": [1, 1, 1]}}"#);
    let numeric = model(r#"{"base_dim": 0, "fiber_rank": 3, "preset": {"kind": "lie_algebra", "algebra": "so3", "inertia": [1, 2, 3]},
        "simulate": {"t0": 0, "t1": 1, "h": 0.001, "x": [], "xi": [1, 2, 3]}}"#);
    let symbolic = model(r#"{"base_dim": 0, "fiber_rank": 3, "preset": {"kind": "lie_algebra", "algebra": "so3"},
        "hamiltonian": "0.5*(xi1^2 + xi2^2/2 + xi3^2/3)",
        "simulate": {"t0": 0, "t1": 1, "h": 0.001, "x": [], "xi": [1, 2, 3]}}"#);
    let last = |m: &algebroid_cli::Model| -> Vec<f64> {
        let csv = cmd_simulate(m).unwrap().csv;
        csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect()
    };
    let (v, p, s) = (last(&vel), last(&numeric), last(&symbolic));
    for i in 0..3 {
        assert!((p[1 + i] - (i + 1) as f64 * v[1 + i]).abs() < 1e-9);
        assert!((p[1 + i] - s[1 + i]).abs() < 1e-9);
    }
    // H columns agree
    assert!((v[4] - p[4]).abs() < 1e-9 && (p[4] - s[4]).abs() < 1e-9);
}

#[test]
fn geodesic_phase_flow_keeps_the_equator() {
    let m = model(r#"{"base_dim": 2, "fiber_rank": 2, "preset": {"kind": "geodesic", "metric": [["1", "0"], ["0", "sin(x1)^2"]]},
        "simulate": {"t0": 0, "t1": 5, "h": 0.001, "x": [1.5707963267948966, 0], "xi": [0, 1]}}"#);
    let csv = cmd_simulate(&m).unwrap().csv;
    for line in csv.lines().skip(1) {
        let x1: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((x1 - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
    }
}

#[test]
fn degenerate_lagrangian_aborts_with_partial_csv_and_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "degenerate.json",
        r#"{"base_dim": 1, "fiber_rank": 1, "preset": {"kind": "tangent_bundle"}, "lagrangian": "y1^3/6",
            "simulate": {"t0": 0, "t1": 1, "h": 0.1, "x": [0], "y": [0]}}"#,
    );
    let out = run(&["simulate", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().next(), Some("t,x1,y1,H"));
    assert_eq!(stdout.lines().count(), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn config_errors_exit_2_with_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"base_dim": 1, "fiber_rank": 1, "preset": {"kind": "tangent_bundle"}, "extra": 1}"#, "extra"),
        (r#"{"base_dim": 1, "fiber_rank": 2, "preset": {"kind": "tangent_bundle"}}"#, "fiber_rank"),
        (r#"{"base_dim": 1, "fiber_rank": 1, "structure": {"rho": [["1"]], "sigma": [["1", "0"]], "c": [[["0"]]]}}"#, "structure.sigma"),
        (r#"{"base_dim": 1, "fiber_rank": 1, "structure": {"rho": [["y1"]], "sigma": [["1"]], "c": [[["0"]]]}}"#, "structure.rho[0][0]"),
        (r#"{"base_dim": 1, "fiber_rank": 1, "preset": {"kind": "tangent_bundle"}, "lagrangian": "0.5*y1^"}"#, "lagrangian"),
        (r#"{"base_dim": 1, "fiber_rank": 1, "preset": {"kind": "tangent_bundle"}, "check": {"checks": ["jacobi"]}}"#, "check.checks[0]"),
        (r#"{"base_dim": 1, "fiber_rank": 1, "preset": {"kind": "tangent_bundle"},
            "simulate": {"t0": 0, "t1": 1, "h": 0.1, "x": [0], "y": [1]}}"#, "simulate.y"),
        (r#"{"base_dim": 2, "fiber_rank": 2, "preset": {"kind": "geodesic", "metric": [["1", "0"], ["0", "-1"]]}}"#, "preset.metric"),
        (r#"{"base_dim": 0, "fiber_rank": 3, "preset": {"kind": "lie_algebra", "algebra": "so4"}}"#, "preset.algebra"),
        (r#"{"base_dim": 0, "fiber_rank": 3, "preset": {"kind": "lie_algebra", "algebra": "so3"}, "check": {"checks": ["gamma"]}}"#, "check.checks[0]"),
    ];
    for (i, (json, path)) in cases.iter().enumerate() {
        let p = write(dir.path(), &format!("c{i}.json"), json);
        let out = run(&["check", p.to_str().unwrap()]);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(out.status.code(), Some(2), "case {i}: {stderr}");
        assert!(stderr.contains(path), "case {i}: {stderr}");
    }
    let out = run(&["describe", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

/// The right-hand side of the first line starting with `lhs = `.
fn rhs<'a>(text: &'a str, lhs: &str) -> &'a str {
    let prefix = format!("{lhs} = ");
    text.lines().map(str::trim).find_map(|l| l.strip_prefix(prefix.as_str())).unwrap_or_else(|| panic!("no {lhs} in\n{text}"))
}

#[test]
fn describe_sphere_prints_christoffel_symbols() {
    let text = cmd_describe(&algebroid_cli::load(Path::new(&shipped("sphere_geodesic.json"))).unwrap()).unwrap();
    let g = parse(rhs(&text, "Gamma^1_22")).unwrap();
    for t in [0.4, 1.1, 2.5] {
        let v = g.eval(&Env::from_slots(&["x1".to_string()], &[t])).unwrap();
        assert!((v + t.sin() * t.cos()).abs() < 1e-14);
    }
}

#[test]
fn describe_free_particle_prints_zero_acceleration() {
    let m = model(r#"{"base_dim": 1, "fiber_rank": 1, "preset": {"kind": "tangent_bundle"}, "lagrangian": "0.5*y1^2"}"#);
    let text = cmd_describe(&m).unwrap();
    assert!(text.lines().any(|l| l.trim() == "ydot1 = 0"), "{text}");
    assert!(text.lines().any(|l| l.trim() == "xdot1 = y1"), "{text}");
}

#[test]
fn describe_so3_prints_the_epsilon_pattern() {
    let text = cmd_describe(&model(r#"{"base_dim": 0, "fiber_rank": 3, "preset": {"kind": "lie_algebra", "algebra": "so3"}}"#)).unwrap();
    for (lhs, r) in [
        ("{xi1, xi2}", "xi3"),
        ("{xi2, xi3}", "xi1"),
        ("{xi3, xi1}", "xi2"),
        ("{xi2, xi1}", "-xi3"),
        ("{xi1, xi1}", "0"),
    ] {
        assert_eq!(rhs(&text, lhs), r);
    }
}

#[test]
fn describe_wong_prints_curvature() {
    let out = run(&["describe", &shipped("wong.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    // F^1_12 = d_1 A^1_2 - d_2 A^1_1 + A^i_1 A^j_2 C^1_ij = -1 - x1^2 x2
    let f = parse(rhs(&text, "F^1_12")).unwrap();
    let names = ["x1".to_string(), "x2".to_string()];
    let (x1, x2) = (0.3, -0.7);
    let v = f.eval(&Env::from_slots(&names, &[x1, x2])).unwrap();
    assert!((v - (-1.0 - x1 * x1 * x2)).abs() < 1e-14, "{v}");
}

#[test]
fn shipped_configs_pass_their_checks() {
    for name in ["sphere_geodesic.json", "rigid_body.json", "wong.json"] {
        let out = run(&["check", &shipped(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
    }
}
