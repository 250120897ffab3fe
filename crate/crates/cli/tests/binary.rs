use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

fn structure(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn ncw(args: &[&str], input: &NamedTempFile) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncw"))
        .args(args)
        .arg("--input")
        .arg(input.path())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn validate_flat_passes() {
    let f = structure("flat n=2\n");
    let o = ncw(&["validate"], &f);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("valid: yes"), "{out}");
    assert!(!out.contains("passed: no"), "{out}");
}

#[test]
fn validate_bad_connection_exits_one() {
    let f = structure("n = 1\ngamma[1][1] = 1\ntheta[0] = 1\nGamma[0][0][0] = 1\n");
    let o = ncw(&["validate"], &f);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stdout(&o).contains("label: nabla theta = 0\n    passed: no"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn input_errors_exit_two() {
    let f = structure("n = 1\ngamma[1][1] = 1\n");
    let o = ncw(&["validate"], &f);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("theta missing"), "{err}");

    let f = structure("n = 1\ngamma[1][1] = 2 *\n");
    let o = ncw(&["validate"], &f);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("line 2, column 18"));

    let f = structure("flat n=1\n");
    let o = ncw(&["classify", "--field", "1, x3"], &f);
    assert_eq!(o.status.code(), Some(2));

    let o = ncw(&["solve", "--flavor", "xyz"], &f);
    assert_eq!(o.status.code(), Some(2));
    let o = ncw(&["explode"], &f);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn solve_flat_three_has_ten_generators() {
    let f = structure("flat n=3\n");
    let o = ncw(&["solve", "--flavor", "gal", "--degree", "1"], &f);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("dimension: 10\n"));
}

#[test]
fn extend_gal_flat_two() {
    let f = structure("flat n=2\n");
    let o = ncw(&["extend", "--flavor", "gal"], &f);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("central extension: NONTRIVIAL"), "{out}");
    assert!(out.contains("pair: [P1, K1]\n    bracket: M\n"), "{out}");
}

#[test]
fn check_commands_exit_one_on_false_verdict() {
    let f = structure("flat n=2\n");
    assert_eq!(ncw(&["classify", "--field", "x1, 0, 0"], &f).status.code(), Some(1));
    assert_eq!(ncw(&["classify", "--field", "0, -x2, x1"], &f).status.code(), Some(0));
    // time-dependent rotation: torsion-free and compatible, but not Newtonian
    let g =
        structure("n = 2\ngamma[1][1] = 1\ngamma[2][2] = 1\ntheta[0] = 1\nGamma[0][1][2] = t\nGamma[0][2][1] = -t\n");
    assert_eq!(ncw(&["curvature"], &g).status.code(), Some(1));
}

#[test]
fn gauge_invariance_exit_code() {
    let f = structure("standard n=2 phi = x1*x2\n");
    let o = ncw(&["gauge", "--psi", "0, t, x2", "--f", "t*x1 - 1/2*x2^2"], &f);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("connection invariant: yes"));
}

#[test]
fn json_output_is_byte_deterministic() {
    let f = structure("standard n=2 phi = x1^2\n");
    for args in [
        &["solve", "--flavor", "mil", "--degree", "2", "--format", "json"][..],
        &["extend", "--flavor", "gal", "--format", "json"][..],
        &["brackets", "--flavor", "cor", "--format", "json"][..],
    ] {
        let a = ncw(args, &f);
        let b = ncw(args, &f);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
        let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["schema", "command", "structure", "results"]);
        assert_eq!(v["schema"], "ncw-report/1");
    }
}

#[test]
fn sample_structures_validate() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../structures");
    for (file, code) in [
        ("flat2.ncw", 0),
        ("standard3.ncw", 0),
        ("observer.ncw", 0),
        ("rotating.ncw", 1),
    ] {
        let o = Command::new(env!("CARGO_BIN_EXE_ncw"))
            .args(["validate", "--input"])
            .arg(dir.join(file))
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(code), "{file}");
    }
}
