use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn quench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quench")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV table as (header, rows).
fn csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn diag(text: &str, key: &str) -> String {
    let prefix = format!("# diag {key} = ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no diagnostic {key}")).to_string()
}

#[test]
fn single_mode_initial_value() {
    let text = stdout(&quench(&["propagator", "--mode", "--k", "1", "--m0", "5", "--m", "1", "--t1", "0", "--t2", "0"]));
    let (h, rows) = csv(&text);
    assert_eq!(h, ["t1", "t2", "k", "re", "im"]);
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0][3]) - 1.0 / (2.0 * 26f64.sqrt())).abs() < 1e-15);
    assert_eq!(num(&rows[0][4]), 0.0);
}

#[test]
fn missing_mass_is_a_usage_error() {
    let out = quench(&["propagator", "--mode", "--k", "1", "--m", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--m0"));
    assert_eq!(quench(&["propagator", "--k", "1", "--m0", "1"]).status.code(), Some(2));
    assert_eq!(quench(&["mstar", "--d", "4", "--m", "1"]).status.code(), Some(2));
}

#[test]
fn deep_quench_profile_has_a_horizon() {
    let text = stdout(&quench(&["propagator", "--deep", "--d", "1", "--m0", "1", "--r-max", "6", "--t", "1"]));
    let (h, rows) = csv(&text);
    let (r, v, c) = (col(&h, "r"), col(&h, "value"), col(&h, "closed_form"));
    assert_eq!(rows.len(), 61);
    for row in &rows {
        let (r, v, c) = (num(&row[r]), num(&row[v]), num(&row[c]));
        assert!((v - c).abs() < 1e-3, "r={r}: {v} vs {c}");
        if r > 2.0 {
            assert_eq!(c, 0.0);
            assert!(v.abs() < 1e-3);
        } else {
            assert!((c - (2.0 - r) / 8.0).abs() < 1e-15);
        }
    }
}

#[test]
fn slab_and_vertex_tables() {
    let text = stdout(&quench(&["propagator", "--slab", "--k", "1", "--m0", "5", "--m", "1", "--t-sweep", "0:10:11"]));
    assert_eq!(csv(&text).1.len(), 11);
    assert!(num(&diag(&text, "max_abs_difference_from_quench")) < 1e-12);
    assert!(text.contains("# param slab_boundary = dirichlet"));
    let text = stdout(&quench(&["propagator", "--vertex", "--m0", "1", "--t", "1", "--q", "2", "--r-max", "4", "--r-points", "9"]));
    let (h, rows) = csv(&text);
    for row in rows {
        assert!((num(&row[col(&h, "value")]) - num(&row[col(&h, "from_propagator")])).abs() < 1e-12);
    }
    assert_eq!(quench(&["propagator", "--thermal", "--k", "1", "--m0", "1", "--m", "1"]).status.code(), Some(2));
}

#[test]
fn beta_sweep_intercept_and_sentinel() {
    let text = stdout(&quench(&["beta", "--d", "3", "--sweep", "0.001:0.9:64"]));
    let (h, rows) = csv(&text);
    assert_eq!(rows.len(), 64);
    assert!((num(&rows[0][col(&h, "beta_m0")]) - 3.6276).abs() < 0.01);
    let xs: Vec<f64> = rows.iter().map(|r| num(&r[col(&h, "x")])).collect();
    assert!(xs.windows(2).all(|w| w[1] > w[0]));

    let text = stdout(&quench(&["beta", "--d", "1", "--m", "1", "--m0", "1"]));
    let (h, rows) = csv(&text);
    assert_eq!(rows[0][col(&h, "beta_m0")], "inf");
}

#[test]
fn mstar_examples() {
    let text = stdout(&quench(&["mstar", "--d", "2", "--m", "0", "--lambda-sweep", "1e-3:1e6:log:40", "--threads", "2"]));
    let (h, rows) = csv(&text);
    let m: Vec<f64> = rows.iter().map(|r| num(&r[col(&h, "m_star")])).collect();
    assert_eq!(m.len(), 40);
    assert!(m.windows(2).all(|w| w[1] >= w[0]));
    assert!((m[39] - 0.24954).abs() < 1e-3);

    let text = stdout(&quench(&["mstar", "--d", "1", "--m", "0", "--lambda", "5"]));
    let (h, rows) = csv(&text);
    assert_eq!(num(&rows[0][col(&h, "m_star")]), 0.0);
    assert_eq!(rows[0][col(&h, "branch")], "massless_1d");

    let at = |cutoff: &str| {
        let text = stdout(&quench(&["mstar", "--d", "3", "--m", "2", "--lambda", "10", "--cutoff", cutoff]));
        let (h, rows) = csv(&text);
        num(&rows[0][col(&h, "m_star")])
    };
    let (a, b) = (at("1e4"), at("1e7"));
    assert!(a > 2.0 && b > 2.0 && (a - b).abs() < 0.05 * a, "{a} {b}");
    assert_eq!(quench(&["mstar", "--d", "3", "--m", "2", "--lambda", "1"]).status.code(), Some(2));
}

#[test]
fn evolve_reaches_the_gap_solution() {
    let text = stdout(&quench(&["evolve", "--d", "1", "--m0", "1", "--m", "2", "--lambda", "10", "--t-max", "100"]));
    let m_inf = num(&diag(&text, "m_inf"));
    let m_star = num(&diag(&text, "m_star_grid"));
    assert!((m_inf / m_star - 1.0).abs() < 0.01);
    assert!((m_star / num(&diag(&text, "m_star_continuum")) - 1.0).abs() < 1e-3);
    let (h, rows) = csv(&text);
    let fit = num(&rows[0][col(&h, "m_inf_sq_fit")]);
    assert!((fit.sqrt() / m_star - 1.0).abs() < 0.01);
    assert!(num(&diag(&text, "energy_drift")) < 1e-4);
    assert!(num(&diag(&text, "max_wronskian_deviation")) < 1e-8);
}

#[test]
fn evolve_recovers_from_an_unstable_start() {
    let text = stdout(&quench(&["evolve", "--d", "1", "--m0", "1", "--m", "0.5", "--lambda", "10", "--format", "json"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    let cols: Vec<&str> = v["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let i = cols.iter().position(|&c| c == "m_eff_sq").unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert!(rows[0][i].as_f64().unwrap() < 0.0);
    assert!(rows.last().unwrap()[i].as_f64().unwrap() > 0.0);
    assert!(v["diagnostics"]["positive_from"].as_f64().unwrap() < 10.0);
    assert_eq!(v["params"]["t_max"], 100.0);
}

#[test]
fn evolve_rejects_unstable_step() {
    let out = quench(&["evolve", "--d", "1", "--m0", "1", "--m", "2", "--lambda", "10", "--dt", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("need dt <"), "{err}");
}

#[test]
fn fast_verification_suite_passes() {
    let start = std::time::Instant::now();
    let text = stdout(&quench(&["verify", "--suite", "fast"]));
    assert!(start.elapsed().as_secs() < 120);
    let (h, rows) = csv(&text);
    assert!(rows.len() >= 10);
    assert!(rows.iter().all(|r| r[col(&h, "pass")] == "true"), "{text}");
    assert_eq!(diag(&text, "failed"), "0");
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn config_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "m0 = [1,\n");
    assert_eq!(quench(&["--config", &bad, "verify"]).status.code(), Some(2));
    let unknown = write(dir.path(), "unknown.toml", "mass = 3.0\n");
    assert_eq!(quench(&["--config", &unknown, "beta", "--m", "0.5"]).status.code(), Some(2));

    let good = write(dir.path(), "good.toml", "d = 2\nm0 = 5.0\nm = 1.0\nformat = \"json\"\n");
    let text = stdout(&quench(&["--config", &good, "propagator", "--mode", "--k", "0"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["params"]["d"], 2);
    assert_eq!(v["params"]["m0"], 5.0);
    let text = stdout(&quench(&["--config", &good, "propagator", "--mode", "--k", "0", "--m0", "2", "--format", "csv"]));
    assert!(text.contains("# param m0 = 2.0000000000000000e0"));
    assert!(text.contains("# param d = 2"));
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = quench(&["beta", "--d", "2", "--sweep", "0.01:0.5:12", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!x.is_empty());
    // the --out path is echoed, so compare everything else
    let strip = |v: &[u8]| String::from_utf8_lossy(v).lines().filter(|l| !l.starts_with("# param out")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&x), strip(&y));

    let unwritable = quench(&["beta", "--d", "2", "--m", "0.5", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(unwritable.status.code(), Some(2));
}

#[test]
fn json_layout() {
    let text = stdout(&quench(&["mstar", "--d", "2", "--m", "1", "--lambda", "3", "--format", "json"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    for key in ["params", "columns", "rows", "diagnostics"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["rows"][0].as_array().unwrap().len(), v["columns"].as_array().unwrap().len());
    assert_eq!(v["params"]["command"], "mstar");
}
