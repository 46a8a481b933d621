use std::path::Path;
use std::process::{Command, Output};

fn groupnet(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_groupnet"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("GROUPNET_OUT")
        .output()
        .unwrap()
}

/// Data rows of a CSV written by the tool, header line and column names removed.
fn csv_rows(path: &Path) -> (String, Vec<csv::StringRecord>) {
    let text = std::fs::read_to_string(path).unwrap();
    let (first, body) = text.split_once('\n').unwrap();
    let rows = csv::Reader::from_reader(body.as_bytes()).records().map(Result::unwrap).collect();
    (first.to_string(), rows)
}

#[test]
fn density_sweep_covers_every_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = groupnet(
        dir.path(),
        &[
            "density", "--group", "Z2..Z8", "--family", "affine-end", "--family", "translations", "--activation",
            "logistic", "--activation", "delta0", "--activation", "cos-char",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (first, rows) = csv_rows(&dir.path().join("density.csv"));
    assert!(first.starts_with("# groupnet ") && first.contains("config_sha256="));
    assert_eq!(rows.len(), 7 * 3 * 2);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("density.json")).unwrap()).unwrap();
    assert_eq!(json["tool"], "groupnet");
    assert_eq!(json["rows"].as_array().unwrap().len(), 42);
    assert!(first.ends_with(json["config_sha256"].as_str().unwrap()));
    // affine-end with delta0 is dense on every cyclic group
    for r in rows.iter().filter(|r| &r[1] == "affine-end" && &r[2] == "delta0") {
        assert_eq!(&r[6], "true", "{r:?}");
    }
}

#[test]
fn approx_fits_full_rank_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = groupnet(dir.path(), &["approx", "--group", "Z5,Z2xZ3", "--family", "affine-end", "--p", "inf"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = csv_rows(&dir.path().join("approx.csv"));
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(&r[5], &r[6], "full rank expected: {r:?}");
        assert!(r[10].parse::<f64>().unwrap() < 1e-8, "{r:?}");
    }
}

#[test]
fn fourier_check_default_battery_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = groupnet(dir.path(), &["fourier-check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let (_, rows) = csv_rows(&dir.path().join("fourier_check.csv"));
    assert!(rows.iter().all(|r| &r[5] == "true"));
    assert!(rows.len() >= 13 * 5);
}

#[test]
fn enumerate_lists_automorphisms() {
    let dir = tempfile::tempdir().unwrap();
    let out = groupnet(dir.path(), &["enumerate", "--group", "Z2xZ2,Z8"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("enumerate.json")).unwrap()).unwrap();
    let counts: Vec<u64> = json["rows"].as_array().unwrap().iter().map(|r| r["count"].as_u64().unwrap()).collect();
    assert_eq!(counts, vec![6, 4]);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["density", "--group", "Z4", "--seed", "1", "--seed", "1"][..],
        &["density", "--group", "Z4", "--family", "bogus"],
        &["approx", "--group", "Z4", "--p", "0.5"],
        &["density"],
    ] {
        assert_eq!(groupnet(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"command": "density", "groups": ["Z3"], "families": ["translations"], "seed": 4}"#).unwrap();
    let a = groupnet(&dir.path().join("a"), &["density", "--config", cfg.to_str().unwrap()]);
    let b = groupnet(&dir.path().join("b"), &["density", "--config", cfg.to_str().unwrap(), "--seed", "5"]);
    assert_eq!((a.status.code(), b.status.code()), (Some(0), Some(0)));
    let (ha, _) = csv_rows(&dir.path().join("a/density.csv"));
    let (hb, _) = csv_rows(&dir.path().join("b/density.csv"));
    assert_ne!(ha, hb);
    let wrong = groupnet(dir.path(), &["approx", "--config", cfg.to_str().unwrap()]);
    assert_eq!(wrong.status.code(), Some(2));
}
