use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cases() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../cases")
}

fn case(name: &str) -> PathBuf {
    cases().join(format!("{name}.m"))
}

fn drr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drr"))
        .args(args)
        .env_remove("DRR_THREADS")
        .output()
        .expect("spawn drr")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn compute(name: &str, method: &str, threads: &str, out: &Path) -> Output {
    drr(&[
        "compute",
        "--case",
        s(&case(name)),
        "--method",
        method,
        "--threads",
        threads,
        "--out",
        s(out),
    ])
}

/// Copies a case and its sidecar into `dir`, editing the case text.
fn variant(dir: &Path, name: &str, edit: impl Fn(String) -> String, rens: Option<&str>) -> PathBuf {
    let text = fs::read_to_string(case(name)).unwrap();
    let path = dir.join(format!("{name}_v.m"));
    fs::write(&path, edit(text)).unwrap();
    let sidecar = match rens {
        Some(r) => r.to_string(),
        None => fs::read_to_string(cases().join(format!("{name}_rens.json"))).unwrap(),
    };
    fs::write(dir.join(format!("{name}_v_rens.json")), sidecar).unwrap();
    path
}

#[test]
fn two_bus_compute_writes_every_artifact() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let o = compute("twobus", "milp", "1", &out);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "trace.csv",
        "region.json",
        "binding.json",
        "event.json",
        "manifest.json",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    // one farm: nothing to plot
    assert!(!out.join("region.svg").exists());
    let m = manifest(&out);
    assert_eq!(m["status"], "ok");
    assert_eq!(m["exit_code"], 0);
    assert_eq!(m["svg_skipped"], true);
    let event: Value =
        serde_json::from_str(&fs::read_to_string(out.join("event.json")).unwrap()).unwrap();
    let text = event.to_string();
    assert!(text.contains("50") && text.contains("45"), "{text}");
    assert!(stdout(&o).contains("high-risk event"));
}

#[test]
fn pjm5_iblp_region_and_event() {
    let tmp = TempDir::new().unwrap();
    let o = compute("pjm5", "iblp", "4", tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().skip(1).filter(|l| !l.is_empty()).count(), 3);
    let svg = fs::read_to_string(tmp.path().join("region.svg")).unwrap();
    assert_eq!(svg.matches("<line class=\"event\"").count(), 1);
    let d = svg
        .split("<path class=\"region\" d=\"")
        .nth(1)
        .and_then(|r| r.split('"').next())
        .unwrap();
    let vertices = d.matches(['M', 'L']).count();
    assert_eq!(vertices, 7, "{d}");
    let m = manifest(tmp.path());
    assert_eq!(m["threads"], 4);
    assert_eq!(m["svg_skipped"], false);
}

#[test]
fn milp_ignores_extra_threads_with_a_warning() {
    let tmp = TempDir::new().unwrap();
    let o = compute("twobus", "milp", "8", tmp.path());
    assert!(o.status.success());
    let msg = "the MILP oracle is serial; --threads is ignored";
    assert!(stderr(&o).contains(msg));
    let m = manifest(tmp.path());
    assert_eq!(m["threads"], 1);
    assert!(m["warnings"].as_array().unwrap().iter().any(|w| w == msg));
}

#[test]
fn missing_case_fails_with_only_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let missing = tmp.path().join("nowhere.m");
    let o = drr(&["compute", "--case", s(&missing), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"));
    let names: Vec<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(names, ["manifest.json"]);
    let m = manifest(&out);
    assert_eq!(m["status"], "error");
    assert!(m["error"].as_str().unwrap().contains("nowhere.m"));
}

#[test]
fn validate_reports_the_violation() {
    let tmp = TempDir::new().unwrap();
    let o = drr(&[
        "validate",
        "--case",
        s(&case("twobus")),
        "--w",
        "70",
        "--out",
        s(tmp.path()),
    ]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(!text.contains("FAIL"), "{text}");
    assert!(
        text.contains("violation at w = [70.0] MW: 5.000000 MW"),
        "{text}"
    );

    let o = drr(&[
        "validate",
        "--case",
        s(&case("twobus")),
        "--w",
        "50",
        "--out",
        s(tmp.path()),
    ]);
    assert!(stdout(&o).contains("MW: 0.000000 MW"));

    let o = drr(&[
        "validate",
        "--case",
        s(&case("twobus")),
        "--w",
        "1,2",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn zero_reactance_is_a_singular_network() {
    let tmp = TempDir::new().unwrap();
    let path = variant(
        tmp.path(),
        "twobus",
        |t| t.replace("1\t2\t0\t0.1\t0", "1\t2\t0\t0\t0"),
        None,
    );
    let out = tmp.path().join("out");
    let o = drr(&["compute", "--case", s(&path), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).to_lowercase().contains("singular"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn binding_from_a_saved_region() {
    let tmp = TempDir::new().unwrap();
    let first = tmp.path().join("first");
    assert!(compute("pjm5", "milp", "1", &first).status.success());
    let second = tmp.path().join("second");
    let o = drr(&[
        "binding",
        "--case",
        s(&case("pjm5")),
        "--region",
        s(&first.join("region.json")),
        "--out",
        s(&second),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(second.join("binding.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["facets"].as_array().unwrap().len(), 7);
    assert!(stdout(&o).contains("thermal limit of line 4-5"));
}

#[test]
fn three_farms_skip_the_plot() {
    let tmp = TempDir::new().unwrap();
    let rens = r#"[{"gen_index": 6, "forecast_mw": 100}, {"gen_index": 7, "forecast_mw": 90}, {"gen_index": 8, "forecast_mw": 40}]"#;
    let path = variant(
        tmp.path(),
        "pjm5",
        |t| {
            t.replacen(
                "\t5\t0\t0\t0\t0\t1\t100\t1\t200\t0;\n",
                "\t5\t0\t0\t0\t0\t1\t100\t1\t200\t0;\n\t3\t0\t0\t0\t0\t1\t100\t1\t100\t0;\n",
                1,
            )
            .replacen(
                "\t2\t0\t0\t3\t0\t0\t0;\n];",
                "\t2\t0\t0\t3\t0\t0\t0;\n\t2\t0\t0\t3\t0\t0\t0;\n];",
                1,
            )
        },
        Some(rens),
    );
    let out = tmp.path().join("out");
    let o = drr(&[
        "compute",
        "--case",
        s(&path),
        "--threads",
        "2",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!out.join("region.svg").exists());
    assert_eq!(manifest(&out)["svg_skipped"], true);
    let region: Value =
        serde_json::from_str(&fs::read_to_string(out.join("region.json")).unwrap()).unwrap();
    assert_eq!(region["dim"], 3);
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let tmp = TempDir::new().unwrap();
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (dir, threads) in dirs.iter().zip(["1", "1", "4"]) {
        assert!(compute("pjm5", "iblp", threads, dir).status.success());
    }
    for f in ["region.json", "binding.json"] {
        let first = fs::read(dirs[0].join(f)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(
                first,
                fs::read(d.join(f)).unwrap(),
                "{f} differs in {}",
                d.display()
            );
        }
    }
}

#[test]
fn bench_smoke() {
    let tmp = TempDir::new().unwrap();
    let o = drr(&[
        "bench",
        "--case",
        s(&case("twobus")),
        "--reps",
        "1",
        "--threads",
        "2",
        "--out",
        s(tmp.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("bench.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "case,method,threads,median_s,iterations");
    assert_eq!(rows.len(), 4);
    for (row, label) in rows[1..].iter().zip(["milp", "iblp-st", "iblp-mt"]) {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!((cols[0], cols[1]), ("twobus", label));
        assert!(cols[3].parse::<f64>().is_ok(), "{row}");
        assert!(cols[4].parse::<usize>().unwrap() >= 1);
    }
}

#[test]
fn bench_timeout_marks_the_cell() {
    let tmp = TempDir::new().unwrap();
    let o = drr(&[
        "bench",
        "--case",
        s(&case("ieee39")),
        "--reps",
        "1",
        "--timeout",
        "0",
        "--out",
        s(tmp.path()),
    ]);
    assert!(o.status.success());
    let csv = fs::read_to_string(tmp.path().join("bench.csv")).unwrap();
    assert!(
        csv.lines()
            .skip(1)
            .all(|l| l.ends_with("\u{2014},\u{2014}")),
        "{csv}"
    );
}
