use std::fs;
use std::process::{Command, Output};

use eit_qfc::cli::{parse_config, EXIT_CONFIG, EXIT_NUMERICAL};

fn qfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfc"))
        .args(args)
        .output()
        .expect("spawn qfc")
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn fig2_writes_header_and_default_grid() {
    let out = qfc(&["fig2", "--grid-points", "5", "--alpha-max", "200"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "alpha,T_p_quantum,CE_quantum,T_p_semiclassical,CE_semiclassical"
    );
    let r = rows(&text);
    assert_eq!(r.len(), 5);
    assert_eq!(r[4][0], 200.0);
    assert!((r[4][2] - 0.9612).abs() < 1e-4);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sweep\nalpha-max = 40\ngrid_points = 3\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let from_file = rows(&String::from_utf8(qfc(&["fig2", "--config", cfg]).stdout).unwrap());
    assert_eq!(
        from_file.iter().map(|r| r[0]).collect::<Vec<_>>(),
        [0.0, 20.0, 40.0]
    );

    let out = qfc(&["fig2", "--config", cfg, "--alpha-max", "100"]);
    assert!(out.status.success());
    let overridden = rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(
        overridden.iter().map(|r| r[0]).collect::<Vec<_>>(),
        [0.0, 50.0, 100.0]
    );
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.csv");
    let out = qfc(&[
        "fig3",
        "--grid-points",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn fig4_variants_select_input_state() {
    let a = rows(&String::from_utf8(qfc(&["fig4", "--grid-points", "2"]).stdout).unwrap());
    assert_eq!(a[0][1..], [0.25, 0.25]);
    assert!((a[1][1] - 1.0).abs() < 1e-14 && (a[1][2] - 0.0625).abs() < 1e-15);
    let b = rows(
        &String::from_utf8(qfc(&["fig4", "--variant", "b", "--grid-points", "2"]).stdout).unwrap(),
    );
    assert_eq!(b[1][1..], [0.75, 0.75]);
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "alpha-max = lots\n").unwrap();
    let missing = dir.path().join("missing.cfg");
    for args in [
        vec!["fig3", "--grid-points", "0"],
        vec!["custom", "--grid-points", "2", "--gamma21", "-1"],
        vec!["fig2", "--config", bad.to_str().unwrap()],
        vec!["fig2", "--config", missing.to_str().unwrap()],
        vec!["fig4", "--variant", "c"],
        vec!["bogus"],
    ] {
        let out = qfc(&args);
        assert_eq!(out.status.code(), Some(EXIT_CONFIG), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn numerical_and_io_errors_exit_3() {
    let singular = qfc(&[
        "custom",
        "--grid-points",
        "3",
        "--omega-c",
        "0",
        "--omega-d",
        "0",
        "--gamma21",
        "0",
    ]);
    assert_eq!(singular.status.code(), Some(EXIT_NUMERICAL));
    let unwritable = qfc(&[
        "fig3",
        "--grid-points",
        "3",
        "--out",
        "/nonexistent/dir/x.csv",
    ]);
    assert_eq!(unwritable.status.code(), Some(EXIT_NUMERICAL));
}

#[test]
fn config_parser_normalizes_keys() {
    let map = parse_config("Alpha_Max = 12\n\n# note\nomega-c = 1,0.5\n").unwrap();
    assert_eq!(map["alpha-max"], "12");
    assert_eq!(map["omega-c"], "1,0.5");
    assert!(parse_config("no equals sign").is_err());
}
