// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use wearsim::report::parse_report_csv;
use wearsim::scenario::ResourceCategory;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn wearsim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wearsim"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .env_remove("WEARSIM_OUT")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn validate_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let ok = wearsim(tmp.path(), &["validate", data("aria2_like.scenario").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{}", text(&ok.stderr));

    let bad = tmp.path().join("bad.scenario");
    let broken = wearsim::bundled::ARIA2_LIKE.replacen("device = \"cpu\"", "device = \"cpu9\"", 1);
    std::fs::write(&bad, broken).unwrap();
    let out = wearsim(tmp.path(), &["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("cpu9"));

    let missing = wearsim(tmp.path(), &["validate", "/no/such/dir/thing.scenario"]);
    assert_eq!(missing.status.code(), Some(2));

    let usage = wearsim(tmp.path(), &["frobnicate"]);
    assert_eq!(usage.status.code(), Some(1));
}

#[test]
fn bundled_scenarios_resolve_by_name() {
    let tmp = TempDir::new().unwrap();
    for name in ["aria2_like.scenario", "heavytail_145.scenario", "empty.scenario"] {
        let out = wearsim(tmp.path(), &["validate", name]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", text(&out.stderr));
        assert!(text(&out.stdout).contains("bundled:"));
    }
}

#[test]
fn unknown_keys_need_lenient() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("extra.scenario");
    std::fs::write(&path, format!("colour = \"blue\"\n{}", wearsim::bundled::EMPTY)).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(wearsim(tmp.path(), &["validate", p]).status.code(), Some(1));
    assert_eq!(wearsim(tmp.path(), &["--lenient", "validate", p]).status.code(), Some(0));
}

#[test]
fn simulate_offload_versus_on_device() {
    let off = TempDir::new().unwrap();
    let on = TempDir::new().unwrap();
    let run = |dir: &Path, placement: &str| {
        let out = wearsim(
            dir,
            &["--duration-s", "10", "simulate", "aria2_like.scenario", "--placement", placement],
        );
        assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
        for f in ["report.csv", "report.md", "composition.svg", "manifest.json"] {
            assert!(dir.join(f).exists(), "{f}");
        }
        parse_report_csv(&read(dir, "report.csv")).unwrap()
    };
    let offload = run(off.path(), "full_offload");
    let local = run(on.path(), "full_on_device");

    let mut ranked: Vec<(ResourceCategory, f64)> = offload.per_category.iter().map(|(c, v)| (*c, *v)).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    assert!(ranked[..3].iter().any(|(c, _)| *c == ResourceCategory::Radio), "{ranked:?}");
    assert!(ranked.iter().all(|(_, v)| *v / offload.total <= 0.5));

    assert!(local.share(ResourceCategory::Radio) < offload.share(ResourceCategory::Radio));
    assert!(local.share(ResourceCategory::Compute) > offload.share(ResourceCategory::Compute));
}

#[test]
fn simulate_empty_scenario() {
    let tmp = TempDir::new().unwrap();
    let out = wearsim(tmp.path(), &["simulate", "empty.scenario"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let report = parse_report_csv(&read(tmp.path(), "report.csv")).unwrap();
    assert_eq!(report.total, 0.0);
    assert!(read(tmp.path(), "composition.svg").contains("<svg"));
}

#[test]
fn trace_file_and_manifest_hashes() {
    let tmp = TempDir::new().unwrap();
    let trace = tmp.path().join("trace.csv");
    let out = wearsim(
        tmp.path(),
        &["--duration-s", "1", "--trace", trace.to_str().unwrap(), "simulate", "aria2_like.scenario"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert!(trace_text.lines().count() > 10);

    let manifest: serde_json::Value = serde_json::from_str(&read(tmp.path(), "manifest.json")).unwrap();
    let report_hash = manifest["outputs"]["report.csv"].as_str().unwrap();
    assert_eq!(report_hash, wearsim::report::sha256_hex(read(tmp.path(), "report.csv").as_bytes()));
    let input_hash = manifest["inputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(input_hash, wearsim::report::sha256_hex(wearsim::bundled::ARIA2_LIKE.as_bytes()));
    assert_eq!(manifest["tool"], "wearsim");
}

#[test]
fn out_dir_from_environment() {
    let tmp = TempDir::new().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_wearsim"))
        .args(["simulate", "empty.scenario"])
        .env("WEARSIM_OUT", tmp.path())
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(tmp.path().join("report.csv").exists());
}

#[test]
fn placement_sweep_is_deterministic_across_job_counts() {
    let one = TempDir::new().unwrap();
    let eight = TempDir::new().unwrap();
    let args = ["--duration-s", "5", "sweep", "placement", "aria2_like.scenario", "--primitives", "ht,et,vio,asr"];
    let a = wearsim(one.path(), &[&["--jobs", "1"], &args[..]].concat());
    let b = wearsim(eight.path(), &[&["--jobs", "8"], &args[..]].concat());
    assert_eq!(a.status.code(), Some(0), "{}", text(&a.stderr));
    assert_eq!(b.status.code(), Some(0), "{}", text(&b.stderr));
    let csv = read(one.path(), "sweep_placement.csv");
    assert_eq!(csv.lines().count(), 17);
    assert_eq!(csv, read(eight.path(), "sweep_placement.csv"));
    assert_eq!(read(one.path(), "sweep_placement.svg"), read(eight.path(), "sweep_placement.svg"));
}

#[test]
fn nine_primitives_trip_the_guard() {
    let tmp = TempDir::new().unwrap();
    let out = wearsim(
        tmp.path(),
        &["sweep", "placement", "aria2_like.scenario", "--primitives", "a,b,c,d,e,f,g,h,i"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(text(&out.stderr).contains("combinatorial guard"));
}

#[test]
fn compression_sweep_default_grid() {
    let tmp = TempDir::new().unwrap();
    let out = wearsim(tmp.path(), &["--duration-s", "2", "sweep", "compression", "aria2_like.scenario"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = read(tmp.path(), "sweep_compression.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("ratio,divisor,total_mw,radio_mw,selected_profile"));
    assert_eq!(lines.count(), 48);
}

#[test]
fn projection_rows() {
    let tmp = TempDir::new().unwrap();
    let out = wearsim(tmp.path(), &["--duration-s", "2", "project", "aria2_like.scenario", "--horizon", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(read(tmp.path(), "scaling.csv").lines().count(), 2);

    let table = tmp.path().join("ones.toml");
    std::fs::write(&table, "digital_dynamic = 1.0\ndigital_leakage = 1.0\nanalog = 1.0\nrf = 1.0\n").unwrap();
    let out = wearsim(
        tmp.path(),
        &["--duration-s", "2", "project", "aria2_like.scenario", "--table", table.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = read(tmp.path(), "scaling.csv");
    let totals: Vec<&str> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(totals.len(), 9);
    assert!(totals.iter().all(|t| *t == totals[0]), "{totals:?}");
}

#[test]
fn amdahl_on_heavy_tail() {
    let tmp = TempDir::new().unwrap();
    let out = wearsim(tmp.path(), &["amdahl", "heavytail_145.scenario"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let csv = read(tmp.path(), "amdahl.csv");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows, ["0.1,82,1.47", "0.5,118,9.47", "1,129,17.49", "5,140,43.29", "10,143,61.60", "25,145,100.00"]);
    assert!(text(&out.stdout).contains("bound: 1.62x"));

    let out = wearsim(tmp.path(), &["amdahl", "heavytail_145.scenario", "--thresholds", "50"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read(tmp.path(), "amdahl.csv").lines().skip(1).collect::<Vec<_>>(), ["50,145,100.00"]);
}

#[test]
fn amdahl_from_report_csv() {
    let tmp = TempDir::new().unwrap();
    let csv = tmp.path().join("one.csv");
    std::fs::write(&csv, "component,category,mW,percent\nonly,compute,5,100.00\n").unwrap();
    let out = wearsim(tmp.path(), &["amdahl", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("bound: infx"));
}
