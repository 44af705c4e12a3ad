use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tfilter_cli::ode::ode_convergence;

fn tfilter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfilter"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn ode_converge_is_deterministic_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "ode-converge",
        "--problem",
        "cubic",
        "--dts",
        "0.1,0.05,0.025",
        "-o",
        "a.csv",
    ];
    assert!(tfilter(dir.path(), &args).status.success());
    let mut again = args;
    again[6] = "b.csv";
    assert!(tfilter(dir.path(), &again).status.success());
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());

    let expected = ode_convergence("cubic", &[0.1, 0.05, 0.025], 1.0).unwrap();
    let mut reader = csv::Reader::from_reader(a.as_slice());
    let header = reader.headers().unwrap().clone();
    assert_eq!(&header[0], "dt");
    assert_eq!(&header[2], "err_filtered");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), header.len());
        assert_eq!(row[1].parse::<f64>().unwrap().to_bits(), expected.be[i].to_bits());
        assert_eq!(row[2].parse::<f64>().unwrap().to_bits(), expected.filtered[i].to_bits());
        assert_eq!(row[3].parse::<f64>().unwrap().to_bits(), expected.double[i].to_bits());
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.cfg"),
        "problem = cubic\ndts = 0.1, 0.05\noutput = from_file.csv\n",
    )
    .unwrap();
    let out = tfilter(
        dir.path(),
        &["ode-converge", "--config", "run.cfg", "--problem", "decay"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("from_file.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    let expected = ode_convergence("decay", &[0.1, 0.05], 1.0).unwrap();
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[1].parse::<f64>().unwrap(), expected.be[0]);
}

#[test]
fn timestamps_live_in_the_log() {
    let dir = tempfile::tempdir().unwrap();
    assert!(tfilter(dir.path(), &["verify", "--trials", "50"]).status.success());
    let log = fs::read_to_string(dir.path().join("run.log")).unwrap();
    assert_eq!(log.lines().count(), 2);
    assert!(log.lines().all(|l| l.starts_with("20")));
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.starts_with("check,value,threshold,pass\n"));
    assert!(!csv.contains("false"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["adapt", "--tol", "abc"][..],
        &["adapt", "--tol", "-1"],
        &["nse-converge", "--n", "48"],
        &["ode-converge", "--problem", "nope"],
        &["ode-converge", "--config", "missing.cfg"],
        &["bogus"],
    ] {
        assert_eq!(tfilter(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn numerical_failure_exits_with_three_and_keeps_partial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = tfilter(
        dir.path(),
        &[
            "nse-converge",
            "--nu",
            "1e-3",
            "--n",
            "16",
            "--t-end",
            "50",
            "--dts",
            "50,25",
            "-o",
            "tg.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("tg.csv").exists());
    let partial = fs::read_to_string(dir.path().join("tg.partial.csv")).unwrap();
    assert_eq!(partial.lines().count(), 2);
    assert!(partial.lines().nth(1).unwrap().starts_with("5.0000000000000000e1,"));
}
