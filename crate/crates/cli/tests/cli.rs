use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use attrisk_cli::report::{parse_estimates_csv, render_estimates};
use attrisk_cli::{OutputFormat, ReportRow};
use proptest::prelude::*;

const HEADER: &str = "stratum,cases_exposed,controls_exposed,cases_unexposed,controls_unexposed";

fn attrisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_attrisk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn attrisk_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_attrisk"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn table1_csv_matches_golden() {
    let out = attrisk(&["--output", "csv", "table1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), golden("table1.csv"));
}

#[test]
fn table1_text_matches_golden() {
    let out = attrisk(&["table1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), golden("table1.txt"));
    assert!(stdout(&out).contains("0.0859*"));
}

#[test]
fn estimate_from_file() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/strata.csv");
    let out = attrisk(&["--output", "csv", "estimate", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = parse_estimates_csv(&stdout(&out)).unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0].ar_corrected, -0.2571);
    assert_eq!(rows[0].ar_standard, Some(-0.3333));
    assert_eq!(rows[1].ar_standard, None);
    assert_eq!(rows[1].ar_corrected, -8.9);
    assert_eq!(rows[2].ar_standard, Some(0.3));
    assert_eq!(rows[2].ar_corrected, 0.3);
}

#[test]
fn each_zero_d_stratum_warns_exactly_once() {
    let input = format!("{HEADER}\na,1,10,9,0\nb,2,4,8,6\nc,4,3,1,0\n");
    let out = attrisk_stdin(&["estimate", "-"], &input);
    assert!(out.status.success());
    let err = stderr(&out);
    let fallback: Vec<&str> = err.lines().filter(|l| l.contains("d = 0")).collect();
    assert_eq!(fallback.len(), 2, "{err}");
    assert!(fallback[0].contains("'a'") && fallback[1].contains("'c'"));
    assert!(stdout(&out).contains("NA"));
}

#[test]
fn parse_errors_exit_with_one() {
    for input in [
        format!("{HEADER}\nx,-1,2,3,4\n"),
        format!("{HEADER}\ns1,1,1,1,1\ns1,2,2,2,2\n"),
        "wrong,header\nx,1,1,1,1\n".to_string(),
        format!("{HEADER}\nx,1,1,1\n"),
        format!("{HEADER}\n"),
    ] {
        let out = attrisk_stdin(&["estimate", "-"], &input);
        assert_eq!(out.status.code(), Some(1), "input {input:?}");
        assert!(stderr(&out).starts_with("error:"));
    }
    let out = attrisk_stdin(&["estimate", "-"], &format!("{HEADER}\nx,1,1,1,1\ny,-1,2,3,4\n"));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
    assert_eq!(attrisk(&["estimate", "/nonexistent/file.csv"]).status.code(), Some(1));
}

#[test]
fn parameter_and_computation_exit_codes() {
    let bad_p = attrisk(&["exact-bias", "--q", "0.2", "--p", "1.0", "--m", "10", "--n", "10"]);
    assert_eq!(bad_p.status.code(), Some(1));
    let zero_reps = attrisk(&[
        "simulate", "--q", "0.2", "--p", "0.4", "--m", "10", "--n", "10", "--reps", "0", "--seed", "1",
    ]);
    assert_eq!(zero_reps.status.code(), Some(1));
    let all_discarded = attrisk(&[
        "simulate", "--q", "0.5", "--p", "0.999", "--m", "3", "--n", "1", "--reps", "3", "--seed", "1",
        "--condition-d-nonzero",
    ]);
    assert_eq!(all_discarded.status.code(), Some(2));
    let too_big = attrisk(&["exact-bias", "--q", "0.5", "--p", "0.5", "--m", "20000", "--n", "20000"]);
    assert_eq!(too_big.status.code(), Some(2));
    assert_eq!(attrisk(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(attrisk(&["--help"]).status.code(), Some(0));
}

#[test]
fn exact_bias_reports_closed_form_agreement() {
    let out = attrisk(&["--output", "csv", "exact-bias", "--q", "0.2", "--p", "0.8", "--m", "10", "--n", "10"]);
    let text = stdout(&out);
    assert!(text.contains("bias_corrected,0.3436"));
    assert!(text.contains("bias_standard,-1.0640"));
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("residual,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-12);
    assert!(attrisk(&["exact-bias", "--q", "0.5", "--p", "0.5", "--m", "1", "--n", "1"]).status.success());
}

#[test]
fn min_controls_output() {
    let out = attrisk(&["--output", "csv", "min-controls", "--q", "0.5", "--p", "0.5"]);
    let text = stdout(&out);
    assert!(text.contains("min_controls,7"));
    assert!(text.contains("bias_bound_at_n=7,0.0039"));
    assert!(text.contains("bias_bound_at_n=6,0.0078"));
    let out = attrisk(&["--output", "csv", "min-controls", "--q", "0.2", "--p", "0.8", "--tol", "0.005"]);
    assert!(stdout(&out).contains("min_controls,29"));
    let out = attrisk(&["--output", "csv", "min-controls", "--q", "0.8", "--p", "0.2", "--tol", "1"]);
    assert!(stdout(&out).contains("min_controls,1"));
}

#[test]
fn simulate_flags_nothing_on_a_table_row() {
    let out = attrisk(&[
        "--output", "csv", "simulate", "--q", "0.6", "--p", "0.6", "--m", "10", "--n", "10", "--reps", "200000",
        "--seed", "42",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    assert!(!text.contains("OUTSIDE"), "{text}");
}

#[test]
fn precision_flag() {
    let out = attrisk(&["--precision", "2", "--output", "csv", "table1"]);
    assert!(stdout(&out).contains("0.20,0.40,-0.33,-0.12,0.00"));
}

fn report_row() -> impl Strategy<Value = ReportRow> {
    (
        "[a-z][a-z0-9_]{0,8}",
        proptest::option::of(-50.0f64..1.0),
        -50.0f64..1.0,
        proptest::option::of(0.0f64..100.0),
        0.0f64..100.0,
        proptest::collection::vec("[a-z =()]{1,20}", 0..3),
    )
        .prop_map(|(label, ar_standard, ar_corrected, or_plugin, or_jewell, warnings)| ReportRow {
            label,
            ar_standard,
            ar_corrected,
            or_plugin,
            or_jewell,
            warnings,
        })
}

proptest! {
    #[test]
    fn csv_round_trip_to_printed_precision(rows in proptest::collection::vec(report_row(), 1..6), precision in 0usize..8) {
        let text = render_estimates(&rows, OutputFormat::Csv, precision);
        let back = parse_estimates_csv(&text).unwrap();
        let r = |x: f64| attrisk::round_half_away(x, precision as u32);
        prop_assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            prop_assert_eq!(&a.label, &b.label);
            prop_assert_eq!(a.ar_standard.map(r), b.ar_standard);
            prop_assert_eq!(r(a.ar_corrected), b.ar_corrected);
            prop_assert_eq!(a.or_plugin.map(r), b.or_plugin);
            prop_assert_eq!(r(a.or_jewell), b.or_jewell);
            prop_assert_eq!(&a.warnings, &b.warnings);
        }
    }
}
