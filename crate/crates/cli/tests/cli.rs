use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadradyn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_quadradyn"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn classify_family_one_is_a_cusp() {
    let v = json(&run(&["classify", "--family", "I", "--c", "1"]));
    assert_eq!(v["tool"], "quadradyn");
    assert_eq!(v["command"], "classify");
    assert_eq!(v["result"]["finite_points"][0]["label"], "Cusp");
    assert!((v["thresholds"]["tau0"].as_f64().unwrap() - 1e-12).abs() < 1e-24);
    assert!(v["result"].get("infinite_points").is_none());
}

#[test]
fn infinity_adds_equator_points_and_notes() {
    let v = json(&run(&[
        "classify",
        "--family",
        "II",
        "--b",
        "1",
        "--infinity",
    ]));
    let inf = v["result"]["infinite_points"].as_array().unwrap();
    assert!(inf
        .iter()
        .any(|p| p["classification"]["label"] == "EllipticHyperbolicSector"));
    assert!(!v["notes"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_spec_exits_two() {
    let out = run(&[
        "classify", "--family", "V", "--b", "0", "--c", "1", "--s", "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = run(&["classify", "--family", "I", "--c", "1", "--b", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["classify", "--family", "VI", "--c", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_exits_64_with_usage() {
    let out = run(&["classify", "--family", "I", "--c", "1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(run(&["nonsense"]).status.code(), Some(64));
}

#[test]
fn spec_json_round_trip() {
    let first = run(&[
        "classify",
        "--family",
        "V",
        "--b",
        "1",
        "--c",
        "-2",
        "--s",
        "1",
        "--infinity",
    ]);
    let v = json(&first);
    let echo = serde_json::to_string(&v["input"]).unwrap();
    let second = run_stdin(&["classify", "--spec-json", "-", "--infinity"], &echo);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn field_json_classifies_a_point() {
    // ẋ = y, ẏ = −x: a linear center.
    let field = r#"{"p": {"terms": [{"i": 0, "j": 1, "c": 1}]}, "q": {"terms": [{"i": 1, "j": 0, "c": -1}]}}"#;
    let out = run_stdin(&["classify", "--field-json", "-", "--point", "0,0"], field);
    let v = json(&out);
    assert_eq!(
        v["result"]["finite_points"][0]["label"],
        "LinearCenterOrFocusOrCenter"
    );
    let out = run_stdin(&["classify", "--field-json", "-", "--point", "1,0"], field);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_csv_and_companion_events() {
    let args = [
        "--b", "1", "--d", "2", "--param", "c", "--from", "-1", "--to", "1", "--steps", "41",
    ];
    let mut sweep_args = vec!["sweep", "--family", "V"];
    sweep_args.extend_from_slice(&args);
    let out = run(&sweep_args);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 42);
    assert!(lines[0].starts_with("param,b,c,d,region"));
    assert!(lines[1].starts_with("-1,1,-1,2,"));
    // c = 0 row: the second point has left the plane
    assert!(lines[21].ends_with(",,,"));

    let mut ev_args = vec!["events"];
    ev_args.extend_from_slice(&args);
    let v = json(&run(&ev_args));
    let events = v["result"]["events"].as_array().unwrap();
    assert_eq!(events.len(), 1);
    assert_eq!(events[0]["kind"], "SaddleFocusSaddle");
    assert_eq!(v["input"]["param"], "c");
}

#[test]
fn strict_family_rules() {
    let out = run(&[
        "sweep",
        "--b",
        "1",
        "--c",
        "1",
        "--param",
        "d",
        "--from",
        "0",
        "--to",
        "1",
        "--s",
        "0",
        "--strict-family",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "sweep",
        "--c",
        "1",
        "--s",
        "2",
        "--param",
        "b",
        "--from",
        "0.5",
        "--to",
        "1.5",
        "--steps",
        "3",
        "--strict-family",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.lines().nth(2).unwrap().starts_with("1,1,1,6,"));
}

#[test]
fn solve_plain_and_closed_form() {
    let out = run(&[
        "solve", "--family", "II", "--b", "1", "--x0", "0", "--y0", "1", "--t-max", "0.5", "--h",
        "0.01",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x,y"));
    assert_eq!(csv.lines().count(), 52);

    let out = run(&[
        "solve",
        "--family",
        "II",
        "--b",
        "1",
        "--x0",
        "0",
        "--y0",
        "1",
        "--t-max",
        "1",
        "--h",
        "0.001",
        "--closed-form",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("t,x_closed,y_closed,x_rk4,y_rk4,abs_err")
    );
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - cols[0].tan()).abs() < 1e-12);
        assert!(cols[5] < 1e-9);
    }
}

#[test]
fn blow_up_truncates_before_the_pole() {
    let out = run(&[
        "solve",
        "--family",
        "II",
        "--b",
        "1",
        "--x0",
        "0",
        "--y0",
        "1",
        "--t-max",
        "2",
        "--closed-form",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("BlowUp"));
    let csv = String::from_utf8(out.stdout).unwrap();
    let last_t: f64 = csv
        .lines()
        .last()
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(last_t < std::f64::consts::FRAC_PI_2);
}

#[test]
fn integrals_report() {
    let v = json(&run(&[
        "integrals",
        "--family",
        "I",
        "--c",
        "1",
        "--t-max",
        "0.5",
    ]));
    let r = &v["result"];
    assert_eq!(r["first_integral"]["kind"], "Hamiltonian");
    assert!(r["conservation"]["max_rel_drift"].as_f64().unwrap() <= 1e-8);
    assert_eq!(r["integral_curve"]["kind"], "PCurve");
    assert!(!v["notes"].as_array().unwrap().is_empty());
    let out = run(&[
        "integrals",
        "--family",
        "IV",
        "--a",
        "1",
        "--c",
        "1",
        "--p",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn portrait_writes_svg_file() {
    let dir = std::env::temp_dir().join(format!("quadradyn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("p.svg");
    let out = run(&[
        "portrait",
        "--family",
        "I",
        "--c",
        "1",
        "--window",
        "-2,2,-2,2",
        "--seeds",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.contains(r#"data-label="Cusp""#));
    assert!(!svg.contains("class=\"equator\""));
    std::fs::remove_dir_all(&dir).unwrap();
    let out = run(&[
        "portrait",
        "--family",
        "I",
        "--c",
        "1",
        "--window",
        "2,-2,-2,2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numbers_use_seventeen_digits() {
    let out = run(&[
        "solve", "--family", "I", "--c", "1", "--x0", "0.1", "--y0", "0", "--t-max", "0.1", "--h",
        "0.1",
    ]);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().nth(1), Some("0,0.10000000000000001,0"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_quadradyn"))
        .args(["classify", "--family", "I", "--c", "1"])
        .env("QUADRADYN_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
