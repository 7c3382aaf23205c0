use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clonoids"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn theta_verify_small_field_passes() {
    let o = run(&["theta-verify", "--p", "2", "--e", "1", "--k", "1", "--mod", "3"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("theta counts: [2, 1]"), "{s}");
    assert!(s.contains("PASS"));
}

#[test]
fn theta_verify_rejects_shared_characteristic() {
    let o = run(&["theta-verify", "--p", "2", "--k", "2", "--mod", "2"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn theta_verify_q3_k2_mod2_passes() {
    let o = run(&["theta-verify", "--p", "3", "--k", "2", "--mod", "2"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn certify_then_check_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["constructive", "solver"] {
        let file = dir.path().join(format!("{method}.json"));
        let o = run(&["certify", "--p", "2", "--k", "2", "--mod", "3", "--method", method, "--out", path(&file)]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        let o = run(&["check-cert", "--in", path(&file)]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        let o = run(&["check-cert", "--in", path(&file), "--samples", "20", "--seed", "3"]);
        assert_eq!(code(&o), 0);
    }
}

#[test]
fn tampered_coefficient_fails_check() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    assert_eq!(code(&run(&["certify", "--p", "2", "--k", "1", "--mod", "3", "--out", path(&file)])), 0);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let c = v["terms"][0]["coeff"].as_u64().unwrap();
    v["terms"][0]["coeff"] = ((c + 1) % 3).into();
    std::fs::write(&file, v.to_string()).unwrap();
    let o = run(&["check-cert", "--in", path(&file)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAILED"));
}

#[test]
fn malformed_certificate_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, r#"{"q": 2}"#).unwrap();
    assert_eq!(code(&run(&["check-cert", "--in", path(&file)])), 3);
}

#[test]
fn rank_bound_below_k_is_infeasible() {
    let o = run(&["certify", "--p", "2", "--k", "2", "--mod", "3", "--rank-bound", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("infeasible"));
}

#[test]
fn lattice_counts_four() {
    let o = run(&["lattice", "--p", "2", "--k", "1", "--mod", "3", "--brute-force"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.lines().any(|l| l == "clonoids: 4"), "{s}");
}

#[test]
fn bounds_prints_two() {
    let o = run(&["bounds", "--size-a", "4", "--size-r", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().last(), Some("2"));
}

const GEN: &str = r#"{"field":{"p":2,"e":1},"k":2,"m":1,"module":[3],"values":[1,0,0,2]}"#;

#[test]
fn zero_is_a_member() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("m.json");
    let zero = r#"{"field":{"p":2,"e":1},"k":2,"m":2,"module":[3],"values":[0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0]}"#;
    std::fs::write(&file, format!(r#"{{"generators":[{GEN}],"candidate":{zero}}}"#)).unwrap();
    let o = run(&["member", "--in", path(&file)]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "yes");
}

#[test]
fn comprep_matches_brute_force_and_coords_route() {
    let dir = tempfile::tempdir().unwrap();
    let gens = dir.path().join("g.json");
    let coords = dir.path().join("co.json");
    let inst = dir.path().join("i.json");
    std::fs::write(&gens, format!(r#"{{"generators":[{GEN}]}}"#)).unwrap();
    std::fs::write(&inst, r#"{"inputs":[[[1,0],[0,1]],[[1,1],[0,0]],[[0,1],[0,1]]]}"#).unwrap();
    let o = run(&["closure", "--in", path(&gens), "--coords-out", path(&coords)]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("cardinality:"));
    let a = run(&["comprep", "--generators", path(&gens), "--in", path(&inst)]);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    assert!(stdout(&a).contains("brute-force image agrees"));
    let b = run(&["comprep", "--coords", path(&coords), "--in", path(&inst)]);
    assert_eq!(code(&b), 0);
    let basis = |s: String| s.lines().filter(|l| l.starts_with("  [")).map(String::from).collect::<Vec<_>>();
    assert_eq!(basis(stdout(&a)), basis(stdout(&b)));
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let args = ["lattice", "--p", "3", "--k", "1", "--mod", "2"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let four = run(&[&args[..], &["--threads", "4"]].concat());
    assert_eq!(one.stdout, four.stdout);
    let args = ["check-cert", "--samples", "30", "--seed", "9"];
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    assert_eq!(code(&run(&["certify", "--p", "3", "--k", "1", "--mod", "2", "--out", path(&file)])), 0);
    let a = run(&[&args[..], &["--in", path(&file), "--threads", "1"]].concat());
    let b = run(&[&args[..], &["--in", path(&file), "--threads", "3"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_subcommand_exits_three() {
    assert_eq!(code(&run(&["frobnicate"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
}
