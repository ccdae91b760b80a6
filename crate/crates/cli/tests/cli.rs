use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/skewed10.json");

fn eglb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eglb")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, days: usize, seed: u64) -> PathBuf {
    let out = dir.join(format!("trace-{days}-{seed}"));
    let r = eglb(&["gen", "--days", &days.to_string(), "--seed", &seed.to_string(), "--profile", FIXTURE, "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    out
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn gen_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = gen(tmp.path(), 2, 7);
    let b = tmp.path().join("again");
    fs::rename(&a, &b).unwrap();
    let a = gen(tmp.path(), 2, 7);
    assert_eq!(files(&a), files(&b));
    let names: Vec<String> = files(&a).into_iter().map(|(n, _)| n).collect();
    assert!(names.contains(&"workloads.csv".to_string()) && names.contains(&"trace.json".to_string()));
}

#[test]
fn run_writes_report_and_schedule() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = gen(tmp.path(), 1, 3);
    let out = tmp.path().join("energy");
    let r = eglb(&["run", "--trace", s(&trace), "--algo", "energy", "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["algorithm"], "energy");
    assert!(out.join("schedule.csv").exists());
}

#[test]
fn unknown_algorithm_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = gen(tmp.path(), 1, 3);
    let r = eglb(&["run", "--trace", s(&trace), "--algo", "nosuch", "--out", s(&tmp.path().join("x"))]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("eglb-off"));
}

#[test]
fn missing_trace_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let r = eglb(&["compare", "--trace", s(&tmp.path().join("nowhere"))]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn verify_bound_passes_and_catches_tampered_multipliers() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = gen(tmp.path(), 2, 4);
    let out = tmp.path().join("eglb");
    let r = eglb(&["run", "--trace", s(&trace), "--algo", "eglb", "--eta", "2.5", "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let ok = eglb(&["verify-bound", "--run", s(&out)]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("theorem: pass") && stdout.contains("dual norm: pass"), "{stdout}");

    let duals = out.join("duals.csv");
    let text = fs::read_to_string(&duals).unwrap();
    let mut lines = text.lines();
    let mut scaled = format!("{}\n", lines.next().unwrap());
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let kc: f64 = f[2].parse().unwrap();
        let kw: f64 = f[3].parse().unwrap();
        scaled.push_str(&format!("{},{},{},{}\n", f[0], f[1], kc * 1e4, kw * 1e4));
    }
    fs::write(&duals, scaled).unwrap();
    let bad = eglb(&["verify-bound", "--run", s(&out)]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("dual norm: FAIL"));
}

#[test]
fn verify_bound_rejects_baseline_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = gen(tmp.path(), 1, 5);
    let out = tmp.path().join("water");
    assert!(eglb(&["run", "--trace", s(&trace), "--algo", "water", "--out", s(&out)]).status.success());
    assert_eq!(eglb(&["verify-bound", "--run", s(&out)]).status.code(), Some(2));
}

#[test]
fn compare_on_skewed_fixture_favours_equity() {
    let tmp = tempfile::tempdir().unwrap();
    let trace = gen(tmp.path(), 18, 1);
    let out = tmp.path().join("cmp");
    let r = eglb(&["compare", "--trace", s(&trace), "--eta", "2.5", "--out", s(&out)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));

    let mut rdr = csv::Reader::from_path(out.join("compare.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(header.len(), 2 + 9);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        if &rec[1] != "max/avg" {
            continue;
        }
        let ratios: Vec<f64> = (2..header.len()).map(|k| rec[k].parse().unwrap()).collect();
        assert!(ratios.iter().all(|&v| v >= 1.0), "{rec:?}");
        let e: f64 = rec[col("eGLB")].parse().unwrap();
        let g: f64 = rec[col("GLB-Energy")].parse().unwrap();
        assert!(e <= g, "{}: eGLB {e} vs GLB-Energy {g}", &rec[0]);
    }
    let stdout = String::from_utf8_lossy(&r.stdout);
    assert!(stdout.contains("eGLB-Off") && stdout.contains("GLB-Nearest"));
}
