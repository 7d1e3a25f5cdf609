//! Acceptance criterion 10: byte-identical reports across repeated runs for
//! the standard specs, and the 0/1/2 exit-status contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const S1: &str = r#"{"kind":"finite","field":"rational","masses":["1","2","1"],"phi":[0,0,1],"usq":["1","1","4"]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wco"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_spec(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn generate_example(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    let mut args = vec!["example", name];
    args.extend_from_slice(extra);
    args.push("-o");
    let path_str = path.to_str().unwrap().to_owned();
    args.push(&path_str);
    let out = run(&args);
    assert!(out.status.success(), "example {name} failed");
    path
}

fn check(name: &str, pass: bool, detail: &str) {
    if pass {
        println!("ACCEPTANCE {name}: PASS ({detail})");
    } else {
        println!("ACCEPTANCE {name}: FAIL ({detail})");
    }
    assert!(pass, "{name}: {detail}");
}

#[test]
fn criterion_10_report_determinism_and_exit_codes() {
    let dir = TempDir::new().unwrap();
    let s1 = write_spec(dir.path(), "s1.json", S1);
    let identity = generate_example(dir.path(), "identity", &[]);
    let dirichlet = generate_example(dir.path(), "dirichlet", &["--n", "8"]);
    let star_tail = generate_example(dir.path(), "star-tail", &["--rho", "1/2", "--beta", "1"]);

    // Byte-identical reports across two runs, in both formats.
    let mut deterministic = true;
    for spec in [&s1, &identity, &dirichlet, &star_tail] {
        for format in ["text", "json"] {
            let args = ["classify", spec.to_str().unwrap(), "--format", format];
            let first = run(&args);
            let second = run(&args);
            assert!(
                first.status.success(),
                "classify {spec:?} failed: {}",
                String::from_utf8_lossy(&first.stderr)
            );
            deterministic &= first.stdout == second.stdout;
        }
    }

    // Oracle reports are deterministic given a seed.
    let oracle_args = [
        "oracle",
        s1.to_str().unwrap(),
        "--trials",
        "100",
        "--seed",
        "42",
    ];
    let first = run(&oracle_args);
    let second = run(&oracle_args);
    assert!(first.status.success());
    deterministic &= first.stdout == second.stdout;
    let oracle_text = String::from_utf8_lossy(&first.stdout).to_string();
    deterministic &= oracle_text.contains("agreement with criteria: full");

    check(
        "C10a golden-report-byte-equality",
        deterministic,
        "classify x4 specs x2 formats, oracle with seed 42",
    );

    // Exit code 0: a clean run.
    let ok = run(&["classify", s1.to_str().unwrap()]);
    let code0 = ok.status.code() == Some(0);

    // Exit code 1: validation error (zero mass), parse error, missing file,
    // tail space fed to the oracle, and missing seed with nonzero trials.
    let bad_mass = write_spec(
        dir.path(),
        "bad_mass.json",
        r#"{"kind":"finite","field":"rational","masses":["1","0","1"],"phi":[0,0,1],"usq":["1","1","4"]}"#,
    );
    let garbage = write_spec(dir.path(), "garbage.json", "{not json");
    let code1 = run(&["classify", bad_mass.to_str().unwrap()]).status.code() == Some(1)
        && run(&["classify", garbage.to_str().unwrap()]).status.code() == Some(1)
        && run(&["classify", dir.path().join("missing.json").to_str().unwrap()])
            .status
            .code()
            == Some(1)
        && run(&["oracle", star_tail.to_str().unwrap()]).status.code() == Some(1)
        && run(&["oracle", s1.to_str().unwrap(), "--trials", "5"]).status.code() == Some(1);

    // Exit code 2: a report carrying a finding.
    let code2 = run(&["classify", s1.to_str().unwrap(), "--inject-finding"])
        .status
        .code()
        == Some(2)
        && run(&[
            "oracle",
            s1.to_str().unwrap(),
            "--inject-finding",
        ])
        .status
        .code()
            == Some(2);

    check(
        "C10b exit-status-contract",
        code0 && code1 && code2,
        "0 on success, 1 on input errors, 2 on findings",
    );
}

#[test]
fn example_documents_classify_cleanly() {
    let dir = TempDir::new().unwrap();

    // identity: isometry at every tested order, c* = 1/2.
    let identity = generate_example(dir.path(), "identity", &[]);
    let out = run(&["classify", identity.to_str().unwrap(), "--max-order", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("domain invariant: yes (c* = 1/2"), "{text}");
    for order in 1..=3 {
        assert!(text.contains(&format!("order {order}: isometry")), "{text}");
    }

    // constant-mult(1) is an isometry at all orders.
    let mult = generate_example(dir.path(), "constant-mult", &["--c", "1"]);
    let out = run(&["classify", mult.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for order in 1..=4 {
        assert!(
            text.contains(&format!("order {order}: isometry")),
            "constant-mult(1) order {order}: {text}"
        );
    }

    // two-cycle is unitary: every audit passes.
    let two_cycle = generate_example(dir.path(), "two-cycle", &[]);
    let out = run(&["classify", two_cycle.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("injective-nonvanishing-weight-forces-unitarity: pass"));
    assert!(text.contains("findings: none"));

    // star-tail(1, 1) is not densely defined: everything is blocked.
    let divergent = generate_example(dir.path(), "star-tail", &["--rho", "1", "--beta", "1"]);
    let out = run(&["classify", divergent.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("densely defined: no (J_1 = inf at atom 0)"));
    assert!(text.contains("order verdicts: blocked"));
}

#[test]
fn oracle_report_shows_verdicts_and_diagonals() {
    let dir = TempDir::new().unwrap();
    let s1 = write_spec(dir.path(), "s1.json", S1);
    let out = run(&[
        "oracle",
        s1.to_str().unwrap(),
        "--max-order",
        "2",
        "--trials",
        "50",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("order 1: not expansive (diagonal [-2, -1, 1])"), "{text}");
    assert!(text.contains("agreement with criteria: full"));
    assert!(text.contains("theta trial failures: 0"));
}

#[test]
fn unknown_example_fails_with_input_error() {
    let out = run(&["example", "moebius"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown example"));
}
