use std::path::Path;
use std::process::{Command, Output};

fn levgrav(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levgrav"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn validate_writes_manifested_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = levgrav(dir.path(), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&dir.path().join("validate.csv"));
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    assert_eq!(lines.next(), Some("name,pinned,recomputed,rel_dev"));
    let json: serde_json::Value = serde_json::from_str(&read(&dir.path().join("validate.json"))).unwrap();
    assert_eq!(json["manifest"]["subcommand"], "validate");
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(levgrav(dir.path(), &["validate", "--bogus"]).status.code(), Some(64));
    assert_eq!(levgrav(dir.path(), &["frobnicate"]).status.code(), Some(64));
    assert_eq!(levgrav(dir.path(), &["sweep", "--variable", "nope", "--min", "1", "--max", "2"]).status.code(), Some(64));
}

#[test]
fn bad_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "ring_radius = banana\n").unwrap();
    let o = levgrav(dir.path(), &["validate", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("absent.cfg");
    assert_eq!(levgrav(dir.path(), &["budget", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn report_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(levgrav(a.path(), &["report"]).status.code(), Some(0));
    assert_eq!(levgrav(b.path(), &["report"]).status.code(), Some(0));
    let names = [
        "fig2_lambda_vs_qubit_radius.csv",
        "fig3_lambda_vs_scale.csv",
        "fig4_cooling.csv",
        "fig5_wire_radius.csv",
        "fig6_wire_radius.csv",
    ];
    for n in names {
        let x = read(&a.path().join(n));
        let y = read(&b.path().join(n));
        // the manifest names the output directory, everything after it must agree
        assert_eq!(x.lines().skip(1).collect::<Vec<_>>(), y.lines().skip(1).collect::<Vec<_>>(), "{n}");
    }
    let fig5 = read(&a.path().join("fig5_wire_radius.csv"));
    assert_eq!(fig5.lines().nth(1), Some("a,omega_hz,ideal_prhz"));
    let cool = read(&a.path().join("fig4_cooling.csv"));
    assert_eq!(cool.lines().nth(1), Some("N_th,n_LD,n_f"));
    let row = fig5.lines().nth(2).unwrap();
    assert!(row.split(',').all(|v| v.contains('e') && v.parse::<f64>().is_ok()), "{row}");
}

#[test]
fn protocol_runs_are_seed_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["protocol", "--K", "4", "--trials", "50", "--seed", "9"];
    assert_eq!(levgrav(a.path(), &args).status.code(), Some(0));
    assert_eq!(levgrav(b.path(), &args).status.code(), Some(0));
    let x = read(&a.path().join("protocol_trials.csv"));
    let y = read(&b.path().join("protocol_trials.csv"));
    assert_eq!(x.lines().skip(1).collect::<Vec<_>>(), y.lines().skip(1).collect::<Vec<_>>());
    assert_eq!(x.lines().nth(1), Some("trial,phi_true,estimate,error"));
    assert_eq!(x.lines().count(), 52);
}

#[test]
fn cool_and_sweep_columns() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(levgrav(dir.path(), &["cool", "--points", "7"]).status.code(), Some(0));
    assert_eq!(read(&dir.path().join("cool.csv")).lines().nth(1), Some("N_th,n_LD,n_f"));
    let o = levgrav(dir.path(), &["sweep", "--variable", "qubit_radius", "--min", "1e-6", "--max", "1e-5", "--points", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let s = read(&dir.path().join("sweep_qubit_radius.csv"));
    assert_eq!(s.lines().count(), 7);
}

#[test]
fn in_process_entry_point_matches_binary_codes() {
    let mut out = vec![];
    let mut err = vec![];
    assert_eq!(levgrav::cli::run(["levgrav", "--help"], &mut out, &mut err), 0);
    assert_eq!(levgrav::cli::run(["levgrav"], &mut out, &mut err), 64);
}
