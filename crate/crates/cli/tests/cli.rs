use cassini_core::model::BodyParams;
use cassini_stab::config::{parse_config, MANDATORY};
use cassini_stab::exit;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn titan_cfg() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/titan.cfg")
}

/// titan.cfg cut down to a cheap order and grid.
fn small_cfg(dir: &Path, edits: &[(&str, &str)]) -> PathBuf {
    let mut text = std::fs::read_to_string(titan_cfg()).unwrap();
    let base = [
        ("sqrtU_degree", "9"),
        ("poly_degree", "9"),
        ("r", "6"),
        ("curve_orders", "4, 6"),
        ("curve_points", "9"),
        ("scan_grid", "3, 2"),
        ("scan_order", "4"),
        ("integrate_years", "50"),
        ("integrate_samples", "4"),
        ("integrate_degree", "6"),
    ];
    for (k, v) in base.iter().chain(edits) {
        text = text
            .lines()
            .map(|l| if l.split('=').next().map(str::trim) == Some(*k) { format!("{k} = {v}") } else { l.to_string() })
            .collect::<Vec<_>>()
            .join("\n");
    }
    let path = dir.join("small.cfg");
    std::fs::write(&path, text + "\n").unwrap();
    path
}

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cassini-stab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("CASSINI_STAB_CONFIG")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows of a CSV file, skipping the provenance and header lines.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# cassini-stab "), "{} has no provenance line", path.display());
    lines.skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn shipped_config_holds_titan_parameters() {
    let p = parse_config(&titan_cfg()).unwrap();
    assert!(p.warnings.is_empty(), "{:?}", p.warnings);
    assert_eq!(p.config.params, BodyParams::titan());
    assert_eq!(p.config.order, 30);
    assert_eq!(p.config.trunc.max_sqrtu_degree, 33);
    assert_eq!(p.config.trunc.max_ecc_degree, 8);
    assert_eq!(p.config.c, 2.0);
}

#[test]
fn empty_config_names_every_mandatory_key() {
    let tmp = TempDir::new().unwrap();
    std::fs::write(tmp.path().join("empty.cfg"), "").unwrap();
    let o = run(&["model", "--config", "empty.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    let err = stderr(&o);
    for k in MANDATORY {
        assert!(err.contains(k), "{k} missing from: {err}");
    }
}

#[test]
fn malformed_value_reports_its_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), &[("rho0", "1.o")]);
    let line = std::fs::read_to_string(&cfg).unwrap().lines().position(|l| l.starts_with("rho0")).unwrap() + 1;
    let o = run(&["model", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    assert!(stderr(&o).contains(&format!("line {line}")), "{}", stderr(&o));
}

#[test]
fn duplicate_and_unknown_keys_only_warn() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), &[]);
    let mut text = std::fs::read_to_string(&cfg).unwrap();
    text.push_str("rho0 = 0.5\nfavourite_moon = titan\n");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["stability", "--config", "small.cfg"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("duplicate key `rho0`") && err.contains("unknown key `favourite_moon`"), "{err}");
    assert!(String::from_utf8_lossy(&o.stdout).contains("T(0.5)"));
}

#[test]
fn identical_config_gives_identical_files() {
    let tmp = TempDir::new().unwrap();
    small_cfg(tmp.path(), &[]);
    for (out, threads) in [("a", "1"), ("b", "2")] {
        let o = run(&["all", "--config", "small.cfg", "--out", out, "--threads", threads], tmp.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (a, b) = (read_dir(&tmp.path().join("a")), read_dir(&tmp.path().join("b")));
    assert_eq!(a.len(), 14);
    assert_eq!(a, b);
    for (name, bytes) in &a {
        assert!(bytes.starts_with(b"# cassini-stab "), "{name} lacks provenance");
    }
}

#[test]
fn config_path_can_come_from_the_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = small_cfg(tmp.path(), &[]);
    let o = Command::new(env!("CARGO_BIN_EXE_cassini-stab"))
        .args(["equilibrium", "--format", "json"])
        .current_dir(tmp.path())
        .env("CASSINI_STAB_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("out/equilibrium.json")).unwrap()).unwrap();
    assert_eq!(v["provenance"]["command"], "equilibrium");
    assert_eq!(v["columns"][0], "key");
}

#[test]
fn one_cell_scan_matches_stability() {
    let tmp = TempDir::new().unwrap();
    let b = BodyParams::titan();
    let (i, c) = (format!("{:e}, 1", b.i_rad), format!("{:e}, 1", b.c_norm));
    small_cfg(tmp.path(), &[("scan_axes", "i, C_norm"), ("scan_x_range", &i), ("scan_y_range", &c), ("scan_order", "6")]);
    let o = run(&["stability", "--config", "small.cfg"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["scan", "--config", "small.cfg", "--grid", "1,1"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let t: f64 = csv_rows(&tmp.path().join("out/stability_table.csv"))
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    let scan = csv_rows(&tmp.path().join("out/scan.csv"));
    assert_eq!(scan.len(), 1);
    let v: f64 = scan[0][2].parse().unwrap();
    assert!((v - t.log10()).abs() < 1e-11, "{v} vs {}", t.log10());
}

#[test]
fn titan_stability_curve_is_monotone_and_led_by_high_order() {
    let tmp = TempDir::new().unwrap();
    let cfg = titan_cfg();
    let o = run(&["stability", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&tmp.path().join("out/stability.csv"));
    let col = |j: usize| rows.iter().map(|r| r[j].parse::<f64>().unwrap()).collect::<Vec<_>>();
    let (t, t10, t20) = (col(1), col(3), col(4));
    assert!(t.windows(2).all(|w| w[1] <= w[0]), "log10 T increases somewhere");
    assert!(t[0] > t20[0] && t20[0] > t10[0], "r = 30 does not dominate at small rho0");
    assert!(rows[0][2] == "30");
}

#[test]
fn normalform_reports_consistent_term_counts() {
    let tmp = TempDir::new().unwrap();
    small_cfg(tmp.path(), &[("sqrtU_degree", "16"), ("poly_degree", "16"), ("r", "12"), ("curve_orders", "10")]);
    let o = run(&["normalform", "--config", "small.cfg"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let counts: Vec<usize> =
        csv_rows(&tmp.path().join("out/h0_terms.csv")).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(counts.len(), 15);
    assert_eq!(&counts[..5], &[2, 10, 19, 28, 44]);
    for row in csv_rows(&tmp.path().join("out/normalform.csv")) {
        let (s, z): (usize, usize) = (row[0].parse().unwrap(), row[2].parse().unwrap());
        // degree s + 2 = 2r' holds r' + 1 action monomials
        assert_eq!(z, if s % 2 == 0 { s / 2 + 2 } else { 0 }, "order {s}");
    }
}

#[test]
fn error_classes_have_distinct_exit_codes() {
    let tmp = TempDir::new().unwrap();
    small_cfg(tmp.path(), &[("i_rad", "0")]);
    let o = run(&["equilibrium", "--config", "small.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(exit::EQUIL), "{}", stderr(&o));
    assert!(stderr(&o).contains("equil:"));

    small_cfg(tmp.path(), &[]);
    let o = run(&["model", "--config", "small.cfg", "--order", "12"], tmp.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG), "{}", stderr(&o));

    std::fs::write(tmp.path().join("blocker"), "").unwrap();
    let o = run(&["model", "--config", "small.cfg", "--out", "blocker"], tmp.path());
    assert_eq!(o.status.code(), Some(exit::OUTPUT), "{}", stderr(&o));

    let o = run(&["model", "--config", "missing.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    let o = run(&["bogus", "--config", "small.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gnuplot_scan_is_a_nonuniform_matrix() {
    let tmp = TempDir::new().unwrap();
    small_cfg(tmp.path(), &[]);
    let o = run(&["scan", "--config", "small.cfg", "--format", "gnuplot"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(tmp.path().join("out/scan.dat")).unwrap();
    let lines: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("3 "));
    assert!(lines.iter().all(|l| l.split(' ').count() == 4));
}
