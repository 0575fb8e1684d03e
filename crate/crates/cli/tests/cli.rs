use std::fs;
use std::path::Path;
use std::process::Command;

use schottky_cli::{parse_config, parse_config_with_overrides, run, CliError, Subcommand};

const BASE: &str = "[group]\nlengths = [7.0, 8.0]\n\n[numerics]\ndegree = 12\n";

fn config_in(dir: &Path, extra: &[&str]) -> schottky_cli::ExperimentConfig {
    let mut overrides = vec![format!("output.dir={}", dir.display())];
    overrides.extend(extra.iter().map(|s| s.to_string()));
    parse_config_with_overrides(BASE, &overrides).unwrap()
}

/// Data rows of a CSV: everything after the comment line and the header.
fn data_rows(text: &str) -> Vec<&str> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config_hash="));
    lines.next().expect("header");
    lines.collect()
}

fn file_with(out: &schottky_cli::Outcome, needle: &str) -> String {
    let p = out
        .files
        .iter()
        .find(|p| p.file_name().unwrap().to_string_lossy().contains(needle))
        .unwrap_or_else(|| panic!("no file matching {needle}"));
    fs::read_to_string(p).unwrap()
}

#[test]
fn delta_csv_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    let a = run(Subcommand::Delta, &config_in(&d.path().join("a"), &[])).unwrap();
    let b = run(Subcommand::Delta, &config_in(&d.path().join("b"), &[])).unwrap();
    let (x, y) = (file_with(&a, "delta"), file_with(&b, "delta"));
    assert_eq!(x, y);
    let row = data_rows(&x)[0];
    let delta: f64 = row.split(',').next().unwrap().parse().unwrap();
    assert!((delta - 0.159833983398245).abs() < 1e-12, "{delta}");
}

#[test]
fn file_names_carry_the_config_hash() {
    let d = tempfile::tempdir().unwrap();
    let c = config_in(d.path(), &[]);
    let out = run(Subcommand::Delta, &c).unwrap();
    let name = out.files[0].file_name().unwrap().to_string_lossy().into_owned();
    assert_eq!(name, format!("delta-{}.csv", c.short_hash()));
    let text = fs::read_to_string(&out.files[0]).unwrap();
    assert_eq!(text.lines().next().unwrap(), format!("# config_hash={}", c.hash()));
}

#[test]
fn scan_trivial_modulus() {
    let d = tempfile::tempdir().unwrap();
    let c = config_in(d.path(), &["scan.n_list=[1]", "scan.search_radius=0.6"]);
    let out = run(Subcommand::Scan, &c).unwrap();
    let summary = file_with(&out, "scan-summary");
    let rows = data_rows(&summary);
    assert_eq!(rows.len(), 1);
    let cols: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(cols[0], "1");
    let gap: f64 = cols[3].parse().unwrap();
    assert!((gap - 0.5685).abs() < 1e-3, "{gap}");
    // δ itself is the only zero within ε
    assert_eq!(cols[5], "1");

    let zeros = file_with(&out, &format!("scan-{}.csv", c.short_hash()));
    let svg = file_with(&out, "svg");
    assert_eq!(svg.matches("<circle").count(), data_rows(&zeros).len());
    assert!(!svg.contains("<script"));
}

#[test]
fn factor_check_modulus_two() {
    let d = tempfile::tempdir().unwrap();
    let c = config_in(d.path(), &["factor_check.n_list=[2]"]);
    let out = run(Subcommand::FactorCheck, &c).unwrap();
    let csv = file_with(&out, "factor-check");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 6);
    for r in rows {
        let residual: f64 = r.rsplit(',').next().unwrap().parse().unwrap();
        assert!(residual < 1e-9, "{r}");
    }
}

#[test]
fn empty_box_gives_header_only_csv() {
    let d = tempfile::tempdir().unwrap();
    let c = config_in(d.path(), &["zeros.box=[0.6, 0.9, 0.1, 0.3]"]);
    let out = run(Subcommand::Zeros, &c).unwrap();
    let csv = file_with(&out, "csv");
    assert!(data_rows(&csv).is_empty());
    assert_eq!(csv.lines().count(), 2);
    let svg = file_with(&out, "svg");
    assert_eq!(svg.matches("<circle").count(), 0);
    assert_eq!(svg.matches(r#"class="delta""#).count(), 1);
}

#[test]
fn svg_marker_count_matches_rows() {
    let d = tempfile::tempdir().unwrap();
    let c = config_in(d.path(), &["zeros.modulus=4", "zeros.a=[1, 0]", "zeros.radius=0.3"]);
    let out = run(Subcommand::Zeros, &c).unwrap();
    let rows = data_rows(&file_with(&out, "csv")).len();
    assert!(rows >= 2);
    let svg = file_with(&out, "svg");
    assert_eq!(svg.matches("<circle").count(), rows);
    assert!(svg.contains(&format!("<!-- config_hash={} -->", c.hash())));
}

#[test]
fn expander_rows_and_triple() {
    let d = tempfile::tempdir().unwrap();
    let c = config_in(d.path(), &["expander.n_list=[8]", "expander.rank=1"]);
    let csv = file_with(&run(Subcommand::Expander, &c).unwrap(), "expander");
    let cols: Vec<f64> = data_rows(&csv)[0]
        .split(',')
        .enumerate()
        .filter(|(i, _)| [3, 6, 8].contains(i))
        .map(|(_, x)| x.parse().unwrap())
        .collect();
    assert!((cols[0] - 0.292893).abs() < 1e-6);
    assert!((cols[1] - 0.5).abs() < 1e-12);
    assert!((cols[2] - 0.910180).abs() < 1e-6);
}

#[test]
fn emitted_config_is_byte_identical() {
    let c = parse_config(BASE).unwrap();
    let once = c.emit();
    let twice = parse_config(&once).unwrap().emit();
    assert_eq!(once, twice);
}

#[test]
fn invalid_group_is_reported() {
    let d = tempfile::tempdir().unwrap();
    // disks 0 and 1 overlap
    let text = format!(
        "[group]\ndisks = [[-3.0, 1.0], [-2.5, 1.0], [3.0, 1.0], [6.0, 1.0]]\n[output]\ndir = \"{}\"\n",
        d.path().display()
    );
    let c = parse_config(&text).unwrap();
    assert!(run(Subcommand::Delta, &c).is_err());
    assert!(matches!(run(Subcommand::Validate, &c), Err(CliError::Certificate(_)) | Err(CliError::Engine(_))));
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_schottky-gap"))
}

#[test]
fn binary_reports_parse_errors_as_json() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("bad.toml");
    fs::write(&p, "[group]\nlengths = [7.0, 8.0\n").unwrap();
    let out = binary().arg("delta").arg("--config").arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(v["error"], "parse");
    assert_eq!(v["subcommand"], "delta");
}

#[test]
fn binary_reports_semantic_errors() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("c.toml");
    fs::write(&p, BASE).unwrap();
    let out = binary()
        .args(["expander", "--config"])
        .arg(&p)
        .args(["--set", "expander.n_list=[1]"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("expander.n_list"), "{err}");
}

#[test]
fn binary_runs_expander() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path().join("c.toml");
    fs::write(&p, BASE).unwrap();
    let out = binary()
        .args(["expander", "--config"])
        .arg(&p)
        .arg("--set")
        .arg(format!("output.dir={}", d.path().join("out").display()))
        .args(["--set", "expander.n_list=[4, 8]"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let listing: Vec<_> = fs::read_dir(d.path().join("out")).unwrap().collect();
    assert_eq!(listing.len(), 1);
}
