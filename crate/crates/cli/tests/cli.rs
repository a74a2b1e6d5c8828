use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eulercalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("eulercalc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn verify_exported_beta() {
    let o = run(&["export", "--instance", "classical2", "--named", "beta"]);
    assert_eq!(o.status.code(), Some(0));
    let path = scratch("beta.json");
    std::fs::write(&path, &o.stdout).unwrap();
    let o = run(&[
        "verify",
        "--instance",
        "classical2",
        "--sequence",
        path.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).starts_with("holds"));
}

#[test]
fn enumerate_lists_beta_shifts() {
    let o = run(&[
        "enumerate",
        "--instance",
        "classical2",
        "--weight",
        "2",
        "--max",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for k in 0..=20 {
        assert!(
            out.contains(&format!(": beta[{k}] = ")),
            "missing beta[{k}]"
        );
    }
    assert!(out.trim_end().ends_with("21 sequence(s)"));
    assert!(!out.contains("unnamed"));
}

#[test]
fn corrupt_sequence_reports_line() {
    let path = scratch("corrupt.json");
    std::fs::write(&path, "{\n  \"weight\": 2,\n  \"stability\": \"1\",\n  \"euler\": [[\"e1\", 1]],\n  \"entries\": [[[\"b0\", 1]]\n").unwrap();
    let o = run(&[
        "verify",
        "--instance",
        "classical2",
        "--sequence",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("corrupt.json:6:"), "{err}");
}

#[test]
fn falsified_sequence_exits_one() {
    let path = scratch("false.json");
    std::fs::write(&path, r#"{"weight": 2, "stability": "1", "euler": [["e1", 1]], "entries": [[["b1", 1]], [["b2", 1]]]}"#)
        .unwrap();
    let o = run(&[
        "verify",
        "--instance",
        "classical2",
        "--sequence",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fails at index 0"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        run(&["verify", "--instance", "classical2", "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["verify", "--instance", "nowhere", "--named", "beta"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["ops", "degree", "--label", "Sq[k=1,G=C3,lambda=sgn]"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["--data-dir", "/nonexistent/dir", "instances"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn json_reports_are_versioned_and_deterministic() {
    let args = [
        "--json",
        "enumerate",
        "--instance",
        "c2equivariant",
        "--weight",
        "2",
        "--degrees",
        "0,1,sigma-1",
        "--horizon",
        "6",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], "eulercalc.report/1");
    assert_eq!(v["command"], "enumerate");
    for cmd in [
        vec![
            "--json",
            "verify",
            "--instance",
            "classical_p3",
            "--named",
            "zeta",
        ],
        vec![
            "--json",
            "ops",
            "fix",
            "--label",
            "Sq[k=1,G=C2,lambda=sigma]",
            "--to",
            "C2",
        ],
        vec!["--json", "repring", "fold", "--group", "C3", "--p", "3"],
        vec!["--json", "oracle", "adem", "--word", "Sq1 Sq2 Sq3"],
    ] {
        let o = run(&cmd);
        assert_eq!(o.status.code(), Some(0), "{cmd:?}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["schema"], "eulercalc.report/1", "{cmd:?}");
    }
}

#[test]
fn label_commands() {
    let o = run(&[
        "ops",
        "restrict",
        "--label",
        "Sq[k=2,G=C4,lambda=sgn]",
        "--to",
        "C2",
    ]);
    assert_eq!(stdout(&o).trim(), "Sq[k=4,G=C2,lambda=1]");
    let o = run(&[
        "ops",
        "fix",
        "--label",
        "Sq[k=3,G=C2,lambda=sigma]",
        "--to",
        "C2",
    ]);
    assert!(stdout(&o).starts_with("0 (trivial"));
    let o = run(&["ops", "fix", "--label", "Sq[k=3,G=C2,+1]", "--to", "C2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["ops", "underlying", "--label", "Sq[k=2,G=C2,+1]"]);
    assert_eq!(stdout(&o).trim(), "Sq5");
}

#[test]
fn wreath_product_on_synthetic_data() {
    let o = run(&["validate-wreath", "--synthetic", "2,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let x = scratch("x.json");
    let y = scratch("y.json");
    std::fs::write(&x, r#"{"weight": 2, "stability": "1", "euler": [["e1", 1]], "entries": [[["b0", 1]], [["b1", 1]], [["b2", 1]], [["b3", 1]], [["b4", 1]], [["b5", 1]]]}"#).unwrap();
    std::fs::write(&y, r#"{"weight": 3, "stability": "1", "euler": [["e1", 1]], "entries": [[], [["b0", 1]], [["b2", 1]]]}"#).unwrap();
    let o = run(&[
        "product",
        "--synthetic",
        "2,3",
        "--left",
        x.to_str().unwrap(),
        "--right",
        y.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).contains("degree: 2"), "{}", stdout(&o));
}

#[test]
fn structure_maps_and_diagonal() {
    let o = run(&[
        "restrict",
        "--instance",
        "c2equivariant",
        "--named",
        "beta",
        "--shift",
        "1",
        "--to",
        "e",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("degree: 2"));
    let o = run(&[
        "diagonal",
        "--instance",
        "classical2",
        "--named",
        "beta",
        "--shift",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&[
        "grouphom", "compute", "--group", "C3", "--p", "3", "--max", "6",
    ]);
    assert!(stdout(&o).contains("[1, 1, 1, 1, 1, 1, 1]"));
}
