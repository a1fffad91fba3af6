//! End-to-end tests of the `msinv` binary: pipelines, exit codes, output.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn msinv(args: &[&str], stdin: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_msinv"));
    cmd.args(args);
    cmd.stdin(if stdin.is_some() {
        Stdio::piped()
    } else {
        Stdio::null()
    });
    cmd.stdout(Stdio::piped());
    cmd.stderr(Stdio::piped());
    let mut child = cmd.spawn().expect("binary runs");
    if let Some(input) = stdin {
        child
            .stdin
            .as_mut()
            .unwrap()
            .write_all(input.as_bytes())
            .unwrap();
    }
    child.wait_with_output().expect("binary exits")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmpfile(name: &str, content: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("msinv-test-{}-{name}", std::process::id()));
    std::fs::write(&path, content).unwrap();
    path
}

#[test]
fn demo_expand_check_pipeline_passes() {
    let demo = msinv(&["demo", "sphere"], None);
    assert!(demo.status.success());
    let demo_text = stdout_of(&demo);
    assert!(demo_text.contains("graph {"));

    let expand = msinv(&["expand", "-"], Some(&demo_text));
    assert!(expand.status.success(), "{}", String::from_utf8_lossy(&expand.stderr));
    let expanded_text = stdout_of(&expand);
    assert!(expanded_text.contains("extended {"));

    let check = msinv(&["check", "-"], Some(&expanded_text));
    assert!(
        check.status.success(),
        "check failed:\n{}\n{}",
        stdout_of(&check),
        String::from_utf8_lossy(&check.stderr)
    );
    let report = stdout_of(&check);
    for name in [
        "graph: ok",
        "basic: ok",
        "injectivity: ok",
        "equivariance: ok",
        "additivity: ok",
        "type-1 residues: ok",
        "accumulation: ok",
        "roundtrip: ok",
    ] {
        assert!(report.contains(name), "missing `{name}` in:\n{report}");
    }
}

#[test]
fn conjugate_with_itself_reports_identity_witness() {
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    let path = tmpfile("self.msinv", &demo);
    let out = msinv(&[
        "conjugate",
        path.to_str().unwrap(),
        path.to_str().unwrap(),
    ], None);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("conjugate"));
    assert!(text.contains("r = +1"));
    assert!(text.contains("x1 -> x1"));
    let _ = std::fs::remove_file(path);
}

#[test]
fn conjugate_crosscheck_confirms_witness() {
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    let path = tmpfile("crosscheck.msinv", &demo);
    let out = msinv(
        &[
            "conjugate",
            path.to_str().unwrap(),
            path.to_str().unwrap(),
            "--crosscheck",
        ],
        None,
    );
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("crosscheck: extended clouds agree"));
    let _ = std::fs::remove_file(path);
}

#[test]
fn conjugate_perturbed_pair_exits_one() {
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    // Flip one orientation component in the basic section.
    let perturbed = demo.replacen(
        "(u.1.x1[2n], s.1.x2[2n], +1)",
        "(u.1.x1[2n], s.1.x2[2n], -1)",
        1,
    );
    assert_ne!(demo, perturbed);
    let a = tmpfile("orig.msinv", &demo);
    let b = tmpfile("pert.msinv", &perturbed);
    let out = msinv(
        &["conjugate", a.to_str().unwrap(), b.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("not conjugate"));
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn enumerate_rejects_empty_range() {
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    let path = tmpfile("enum.msinv", &demo);
    let out = msinv(
        &["enumerate", path.to_str().unwrap(), "--t", "3:1", "--k", "2"],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(path);
}

#[test]
fn enumerate_lists_sorted_points() {
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    let out = msinv(&["enumerate", "-", "--t", "0:0", "--k", "1"], Some(&demo));
    assert!(out.status.success());
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(!lines.is_empty());
    let mut sorted = lines.clone();
    sorted.sort();
    assert_eq!(lines, sorted, "listing must be sorted");
    assert!(text.contains("(u.1.x1[0, -1], s.1.x3[2, 1], +1)"));
}

#[test]
fn enumerate_manifold_view_orders_positions() {
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    let out = msinv(
        &[
            "enumerate",
            "-",
            "--t",
            "0:1",
            "--k",
            "1",
            "--manifold",
            "s.1.x3",
        ],
        Some(&demo),
    );
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.lines().count() > 4);
    assert!(text.contains("s-side"));
}

#[test]
fn check_fails_on_inconsistent_extended_section() {
    // An extended section claiming the same unstable addresses twice must
    // drive `check` to exit 1 via the injectivity detector.
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    let extended = "extended {\n  \
        (u.1.x1[2n], s.1.x2[2n], +1)\n  \
        (u.1.x1[2n+1], s.1.x2[2n+1], -1)\n  \
        (u.1.x2[2n], s.1.x3[2n], +1)\n  \
        (u.1.x2[2n+1], s.1.x3[2n+1], -1)\n  \
        (u.1.x1[2n+2k1, -2k1-1], s.1.x3[2n+2, 2k1+1], +1; k1>=0)\n  \
        (u.1.x1[2n+2k1+1, 2k1+1], s.1.x3[2n+2, 2k1+2], -1; k1>=0)\n  \
        (u.1.x1[2n+2k1, -2k1-2], s.1.x3[2n+1, -2k1-1], +1; k1>=0)\n  \
        (u.1.x1[2n+2k1+1, 2k1+1], s.1.x3[2n+1, -2k1-2], -1; k1>=0)\n}\n";
    let doc = format!("{demo}{extended}");
    let out = msinv(&["check", "-"], Some(&doc));
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout_of(&out).contains("injectivity: FAILED"));
}

#[test]
fn parse_error_exits_two_with_location() {
    let out = msinv(&["validate", "-"], Some("graph {\n"));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn validate_dot_renders_graph() {
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    let out = msinv(&["validate", "-", "--dot"], Some(&demo));
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("digraph"));
    assert!(text.contains("x1"));
}

#[test]
fn expand_writes_output_file() {
    let demo = stdout_of(&msinv(&["demo", "sphere"], None));
    let input = tmpfile("in.msinv", &demo);
    let output = std::env::temp_dir().join(format!("msinv-test-{}-out.msinv", std::process::id()));
    let out = msinv(
        &[
            "expand",
            input.to_str().unwrap(),
            "--out",
            output.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    let written = std::fs::read_to_string(&output).unwrap();
    assert!(written.contains("extended {"));
    // Deterministic: expanding again writes identical bytes.
    let again = msinv(
        &[
            "expand",
            input.to_str().unwrap(),
            "--out",
            output.to_str().unwrap(),
        ],
        None,
    );
    assert!(again.status.success());
    assert_eq!(std::fs::read_to_string(&output).unwrap(), written);
    let _ = std::fs::remove_file(input);
    let _ = std::fs::remove_file(output);
}
