use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn netsimp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netsimp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = netsimp(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn lines_geojson(lines: &[&[(f64, f64)]], crs: Option<&str>) -> String {
    let feats: Vec<String> = lines
        .iter()
        .map(|l| {
            let coords: Vec<String> = l.iter().map(|(x, y)| format!("[{x},{y}]")).collect();
            format!(
                r#"{{"type":"Feature","geometry":{{"type":"LineString","coordinates":[{}]}},"properties":{{}}}}"#,
                coords.join(",")
            )
        })
        .collect();
    let crs = crs
        .map(|c| format!(r#""crs":{{"type":"name","properties":{{"name":"{c}"}}}},"#))
        .unwrap_or_default();
    format!(
        r#"{{"type":"FeatureCollection",{crs}"features":[{}]}}"#,
        feats.join(",")
    )
}

fn fixture(dir: &TempDir, name: &str) -> PathBuf {
    let path = p(dir, &format!("{}.geojson", name.replace(' ', "_")));
    ok(&["fixture", name, "-o", s(&path)]);
    path
}

#[test]
fn missing_input_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let out = netsimp(&[
        "simplify",
        "-i",
        "/no/such/file.geojson",
        "-o",
        s(&p(&dir, "o.geojson")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("file.geojson"));
    let out = netsimp(&["evaluate", "-r", "/no/such/a.geojson", "-c", "/no/such/b.geojson"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let bad = p(&dir, "bad.geojson");
    fs::write(&bad, r#"{"type":"FeatureCollection","features":[{"type":"Feature","geometry":{"type":"Point","coordinates":[0,0]}}]}"#).unwrap();
    let out = netsimp(&["simplify", "-i", s(&bad), "-o", s(&p(&dir, "o.geojson"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = netsimp(&["simplify", "-i", s(&bad), "-o", "x", "--loops", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn geographic_input_is_a_crs_error() {
    let dir = TempDir::new().unwrap();
    let degrees = p(&dir, "deg.geojson");
    fs::write(&degrees, lines_geojson(&[&[(4.35, 50.85), (4.3501, 50.8502)]], None)).unwrap();
    let out = netsimp(&["simplify", "-i", s(&degrees), "-o", s(&p(&dir, "o.geojson"))]);
    assert_eq!(out.status.code(), Some(3));
    let declared = p(&dir, "wgs.geojson");
    fs::write(
        &declared,
        lines_geojson(&[&[(0.0, 0.0), (100.0, 0.0)]], Some("EPSG:4326")),
    )
    .unwrap();
    let out = netsimp(&["artifacts", "-i", s(&declared)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn evaluate_crs_mismatch() {
    let dir = TempDir::new().unwrap();
    let a = p(&dir, "a.geojson");
    let b = p(&dir, "b.geojson");
    fs::write(&a, lines_geojson(&[&[(0.0, 0.0), (500.0, 300.0)]], Some("EPSG:3857"))).unwrap();
    fs::write(&b, lines_geojson(&[&[(0.0, 0.0), (500.0, 300.0)]], Some("EPSG:27700"))).unwrap();
    let out = netsimp(&["evaluate", "-r", s(&a), "-c", s(&b)]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn evaluate_identical_networks() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "Parallel edges");
    let cells = p(&dir, "cells.csv");
    let summary = ok(&["evaluate", "-r", s(&input), "-c", s(&input), "-o", s(&cells)]);
    let mut rows = summary.lines();
    assert_eq!(rows.next(), Some("metric,d,xi"));
    let rows: Vec<&str> = rows.collect();
    assert_eq!(rows.len(), 7);
    for r in rows {
        assert_eq!(r.split(',').nth(1), Some("0"), "{r}");
    }
    let csv = fs::read_to_string(cells).unwrap();
    assert!(csv.starts_with("network,cell_id,metric,value\n"));
    assert!(csv.contains(",total_length,"));
}

#[test]
fn evaluate_optional_statistics() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "Parallel edges");
    let goal = p(&dir, "goal.geojson");
    ok(&["fixture", "Parallel edges", "--goal", "-o", s(&goal)]);
    let report = p(&dir, "cmp.json");
    let summary = ok(&[
        "evaluate",
        "-r",
        s(&goal),
        "-c",
        s(&input),
        "--stats",
        "pearson,spearman",
        "--report",
        s(&report),
    ]);
    assert!(summary.starts_with("metric,d,xi,pearson,spearman\n"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["metrics"].as_array().unwrap().len(), 7);
}

#[test]
fn simplify_round_trip_and_determinism() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "Roundabouts");
    let (o1, o2, o3) = (p(&dir, "o1.geojson"), p(&dir, "o2.geojson"), p(&dir, "o3.geojson"));
    let report = p(&dir, "report.json");
    ok(&["simplify", "-i", s(&input), "-o", s(&o1), "--report", s(&report)]);
    ok(&["simplify", "-i", s(&input), "-o", s(&o2)]);
    assert_eq!(fs::read(&o1).unwrap(), fs::read(&o2).unwrap());

    // already simplified: a second run rewrites the same bytes
    ok(&["simplify", "-i", s(&o1), "-o", s(&o3)]);
    assert_eq!(fs::read(&o1).unwrap(), fs::read(&o3).unwrap());

    let text = fs::read_to_string(&o1).unwrap();
    assert_eq!(text.matches("\"type\":\"Feature\"").count(), 4);
    assert!(text.contains("\"_status\":\"extended\""));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["loops"][0]["artifacts"], 1);
}

#[test]
fn attributes_survive() {
    let dir = TempDir::new().unwrap();
    let input = p(&dir, "in.geojson");
    fs::write(
        &input,
        r#"{"type":"FeatureCollection","features":[
        {"type":"Feature","id":3,"geometry":{"type":"LineString","coordinates":[[0.1,0.2],[250.123456789,0.2]]},"properties":{"name":"Rue Haute","lanes":2}},
        {"type":"Feature","id":9,"geometry":{"type":"LineString","coordinates":[[250.123456789,0.2],[250.123456789,300.7]]},"properties":{"name":"Quai","tags":{"a":[1,2]}}},
        {"type":"Feature","id":4,"geometry":{"type":"LineString","coordinates":[[250.123456789,0.2],[500.5,0.2]]},"properties":null}]}"#,
    )
    .unwrap();
    let out = p(&dir, "out.geojson");
    ok(&["simplify", "-i", s(&input), "-o", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"name\":\"Rue Haute\""));
    assert!(text.contains("\"tags\":{\"a\":[1,2]}"));
    assert!(text.contains("250.123456789"));
}

#[test]
fn strokes_on_a_grid() {
    let dir = TempDir::new().unwrap();
    let mut lines: Vec<Vec<(f64, f64)>> = Vec::new();
    for i in 0..3 {
        for j in 0..2 {
            let (a, b0, b1) = (i as f64 * 100.0, j as f64 * 100.0, (j + 1) as f64 * 100.0);
            lines.push(vec![(a, b0), (a, b1)]);
            lines.push(vec![(b0, a), (b1, a)]);
        }
    }
    let refs: Vec<&[(f64, f64)]> = lines.iter().map(|l| l.as_slice()).collect();
    let input = p(&dir, "grid.geojson");
    fs::write(&input, lines_geojson(&refs, None)).unwrap();
    let csv = ok(&["strokes", "-i", s(&input)]);
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 12);
    let strokes: std::collections::BTreeSet<&str> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(strokes.len(), 6);
    assert!(rows.iter().all(|r| r[2] == "200"));
}

#[test]
fn artifact_table() {
    let dir = TempDir::new().unwrap();
    // dual carriageway with a 150 m block on its north side
    let input = p(&dir, "dual.geojson");
    let lines: Vec<&[(f64, f64)]> = vec![
        &[(0.0, 0.0), (10.0, 5.0), (200.0, 5.0)],
        &[(200.0, 5.0), (350.0, 5.0)],
        &[(350.0, 5.0), (490.0, 5.0), (500.0, 0.0)],
        &[(0.0, 0.0), (10.0, -5.0), (490.0, -5.0), (500.0, 0.0)],
        &[(200.0, 5.0), (200.0, 155.0), (350.0, 155.0), (350.0, 5.0)],
        &[(-100.0, 0.0), (0.0, 0.0)],
        &[(500.0, 0.0), (600.0, 0.0)],
    ];
    fs::write(&input, lines_geojson(&lines, None)).unwrap();
    let csv = ok(&["artifacts", "-i", s(&input)]);
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("face_id,fai,is_artifact,group_kind,ces_type"));
    let rows: Vec<Vec<&str>> = rows.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let flagged: Vec<bool> = rows.iter().map(|r| r[2] == "true").collect();
    assert_eq!(flagged.iter().filter(|&&f| f).count(), 1);
    for r in &rows {
        let fai: f64 = r[1].parse().unwrap();
        assert_eq!(r[2] == "true", fai < 3.0, "{r:?}");
        if r[2] == "true" {
            assert_eq!(r[3], "isolate");
            assert!(!r[4].is_empty());
        }
    }
    // an explicit threshold below every face flags nothing
    let csv = ok(&["artifacts", "-i", s(&input), "--threshold", "1.0"]);
    assert!(!csv.contains(",true,"));
}

#[test]
fn exclusion_mask_flag() {
    let dir = TempDir::new().unwrap();
    let input = fixture(&dir, "Roundabouts");
    let mask = p(&dir, "mask.geojson");
    fs::write(
        &mask,
        r#"{"type":"FeatureCollection","features":[{"type":"Feature","geometry":{"type":"Polygon","coordinates":[[[-3,-3],[3,-3],[3,3],[-3,3],[-3,-3]]]},"properties":{}}]}"#,
    )
    .unwrap();
    let out = p(&dir, "out.geojson");
    ok(&["simplify", "-i", s(&input), "-o", s(&out), "--exclusion-mask", s(&mask)]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches("\"type\":\"Feature\"").count(), 8);
    assert!(!text.contains("\"new\""));
}

#[test]
fn fixture_listing() {
    let list = ok(&["fixture", "--list"]);
    assert_eq!(list.lines().count(), 19);
    let out = netsimp(&["fixture", "no such case"]);
    assert_eq!(out.status.code(), Some(2));
}
