use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use summaprob::cli::{run_cli_with, CAP_VAR};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn run(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("summaprob").chain(args.iter().copied());
    let code = run_cli_with(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn binary(args: &[&str], cap: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_summaprob"));
    cmd.args(args).env_remove(CAP_VAR);
    if let Some(c) = cap {
        cmd.env(CAP_VAR, c);
    }
    cmd.output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SLOW: &str = "scenario \"slow\" {\n  limit = \"0\";\n  index_set = empty;\n  on_tail = 1;\n  off_tail = pow(k, -1/100);\n  alpha = 1;\n  eps = 1/2;\n  delta = 1/4;\n}\n";

#[test]
fn eval_writes_csv_with_seventeen_digits() {
    let r = run(&[
        "eval", "--corpus", "ex-2.2", "--method", "ps", "--alpha", "1/2", "--grid", "100:10:3",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    let mut lines = r.out.lines();
    assert_eq!(
        lines.next(),
        Some("abscissa,value,method,alpha,eps,delta,p,scenario")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    for (row, n) in rows.iter().zip(["100", "1000", "10000"]) {
        assert_eq!(row[0], n);
        let mantissa = row[1].split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17, "{}", row[1]);
        assert_eq!(&row[2..], ["ps", "1/2", "1/2", "1/2", "1", "ex-2.2"]);
    }
    // k in {1, 2, 3, 4, 27} qualify up to 100, over 100^(1/2)
    assert_eq!(rows[0][1], "5.0000000000000000e-1");
    assert!(r.err.contains("runtime"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("run{i}.csv"));
        let o = binary(
            &[
                "eval",
                "--corpus",
                "ex-3.1-lim1",
                "--method",
                "pw",
                "--alpha",
                "1",
                "--grid",
                "1000:2:8",
                "--out",
                path.to_str().unwrap(),
            ],
            None,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        files.push(fs::read(&path).unwrap());
    }
    assert!(!files[0].is_empty());
    assert_eq!(files[0], files[1]);
    let args = [
        "eval",
        "--corpus",
        "thm-3.2-ex",
        "--method",
        "stheta",
        "--alpha",
        "7/10",
        "--theta",
        "pow2",
        "--blocks",
        "2:20",
    ];
    assert_eq!(run(&args).out, run(&args).out);
}

#[test]
fn verdict_exit_codes_follow_the_class() {
    let conv = run(&[
        "verdict", "--corpus", "ex-2.1", "--method", "ps", "--alpha", "3/5",
    ]);
    assert_eq!(conv.code, 0, "{}", conv.err);
    assert!(conv.out.starts_with("converges slope="), "{}", conv.out);
    let fails = run(&[
        "verdict", "--corpus", "ex-2.1", "--method", "ps", "--alpha", "2/5",
    ]);
    assert_eq!(fails.code, 3, "{}", fails.err);
    assert!(fails.out.starts_with("fails"));

    let dir = tempfile::tempdir().unwrap();
    let slow = write(dir.path(), "slow.sumprob", SLOW);
    let few = run(&[
        "verdict",
        "--scenario",
        &slow,
        "--method",
        "pw",
        "--grid",
        "100:10:3",
    ]);
    assert_eq!(few.code, 4, "{}{}", few.out, few.err);
    assert!(few.out.starts_with("inconclusive"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(
        dir.path(),
        "broken.sumprob",
        &SLOW.replace("index_set", "index_sat"),
    );
    let cases: Vec<Vec<&str>> = vec![
        vec!["eval", "--bogus"],
        vec!["eval", "--method", "ps"],
        vec![
            "eval", "--corpus", "ex-2.2", "--method", "nope", "--alpha", "1",
        ],
        vec![
            "eval", "--corpus", "ex-2.2", "--method", "ps", "--alpha", "x/2",
        ],
        vec![
            "eval", "--corpus", "ex-2.2", "--method", "stheta", "--alpha", "1", "--theta", "pow2",
            "--grid", "10:2:5",
        ],
        vec![
            "eval", "--corpus", "ex-2.2", "--method", "ps", "--alpha", "1", "--blocks", "1:5",
        ],
        vec![
            "eval", "--corpus", "ex-2.2", "--method", "ntheta", "--alpha", "1",
        ],
        vec![
            "eval", "--corpus", "no-such", "--method", "ps", "--alpha", "1",
        ],
        vec![
            "eval", "--corpus", "ex-2.1", "--param", "s=0", "--method", "ps", "--alpha", "1",
        ],
        vec![
            "eval",
            "--scenario",
            "/nonexistent/x.sumprob",
            "--method",
            "ps",
        ],
        vec!["eval", "--scenario", &broken, "--method", "ps"],
        vec!["check", "--id", "thm-9.9"],
        vec!["check"],
        vec!["liminf", "--theta", "list:1,2,4,8", "--window", "1:4"],
        vec!["liminf", "--theta", "pow2", "--window", "3:2"],
        vec!["parse", "--scenario", &broken],
    ];
    for args in cases {
        let r = run(&args);
        assert_eq!(r.code, 2, "{args:?}: {}{}", r.out, r.err);
        assert!(!r.err.is_empty(), "{args:?}");
    }
    let r = run(&["parse", "--scenario", &broken]);
    assert!(r.err.contains("3:3"), "{}", r.err);
}

#[test]
fn domain_errors_exit_with_six() {
    let r = run(&[
        "eval", "--corpus", "ex-2.2", "--method", "ps", "--alpha", "1", "--eps", "3",
    ]);
    assert_eq!(r.code, 6, "{}", r.err);
    let r = run(&[
        "eval", "--corpus", "ex-2.2", "--method", "ps", "--alpha", "0",
    ]);
    assert_eq!(r.code, 6, "{}", r.err);
}

#[test]
fn help_goes_to_stdout() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("verdict"));
    assert!(r.err.is_empty());
}

#[test]
fn liminf_prints_exact_ratios() {
    for (theta, window, want) in [
        ("pow2", "1:20", "2"),
        ("pow:7", "3:9", "7"),
        ("fact_even", "1:6", "2"),
        ("fact_even", "2:6", "12"),
        ("list:1,2,5,8", "1:3", "8/5"),
        // terms 2, 3, 7, 10, 31, 39, ...
        ("ratio:3", "1:6", "39/31"),
        ("ratio:3", "1:4", "10/7"),
    ] {
        let r = run(&["liminf", "--theta", theta, "--window", window]);
        assert_eq!(r.code, 0, "{theta}: {}", r.err);
        assert_eq!(r.out.trim(), want, "{theta} {window}");
    }
}

#[test]
fn canonical_form_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let messy = "scenario \"slow\" { delta = 2/8; eps = 1/2;\n off_tail = pow(k, -1/100); on_tail = 1;\n index_set = empty; limit = \"0\"; alpha = 1; }";
    let first = write(dir.path(), "a.sumprob", messy);
    let r = run(&["parse", "--scenario", &first, "--canonical"]);
    assert_eq!(r.code, 0, "{}", r.err);
    let canonical = "scenario \"slow\" {\n  alpha = 1;\n  delta = 1/4;\n  eps = 1/2;\n  index_set = empty;\n  limit = \"0\";\n  off_tail = pow(k, -1/100);\n  on_tail = 1;\n}\n";
    assert_eq!(r.out, canonical);
    let second = write(dir.path(), "b.sumprob", &r.out);
    assert_eq!(
        run(&["parse", "--scenario", &second, "--canonical"]).out,
        r.out
    );
    assert_eq!(
        run(&["parse", "--scenario", &second]).out,
        "ok: scenario \"slow\"\n"
    );
}

#[test]
fn check_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("summary.csv");
    let r = run(&["check", "--id", "ex-2.1", "--out", out.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}{}", r.out, r.err);
    assert!(r.out.starts_with("ex-2.1 pass probes=3"), "{}", r.out);
    let csv = fs::read_to_string(out).unwrap();
    assert_eq!(
        csv,
        "id,outcome,probes,witnesses,unsettled,capped,scenarios\nex-2.1,pass,3,0,0,0,ex-2.1\n"
    );
}

#[test]
fn cap_variable_limits_enumeration() {
    let args = [
        "eval", "--corpus", "ex-2.1", "--method", "pw", "--alpha", "1", "--grid", "100:10:4",
    ];
    let full = binary(&args, None);
    assert!(full.status.success());
    assert_eq!(String::from_utf8_lossy(&full.stdout).lines().count(), 5);
    let capped = binary(&args, Some("100"));
    assert!(capped.status.success());
    let err = String::from_utf8_lossy(&capped.stderr);
    assert_eq!(err.matches("gap at").count(), 3, "{err}");
    assert_eq!(String::from_utf8_lossy(&capped.stdout).lines().count(), 2);

    let truncated = binary(&["check", "--id", "thm-2.3-ex"], Some("1000"));
    assert_eq!(truncated.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&truncated.stdout).contains("truncated by the enumeration cap"));
    assert_eq!(
        binary(&["check", "--id", "thm-2.3-ex"], None).status.code(),
        Some(0)
    );

    assert_eq!(binary(&args, Some("lots")).status.code(), Some(2));
}
