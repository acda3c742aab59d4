use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use cogsec_cli::run;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/dmc").join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Runs the library entry point and returns `(code, stdout, stderr)`.
fn cogsec(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut full = vec!["cogsec"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const SMALL: &str = "
[scenario]
p1 = 10 lin
p2 = 20 lin

[gains]
c11 = 1
c12 = 0.9
c21 = 0.3
c22 = 0.8
ctt = 10

[optimizer]
scheme = dpc_3phase
starts = 2
evals_per_start = 200
";

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.ini", "[scenario]\np1 = 10\n");
    let (code, _, err) = cogsec(&["--config", bad.to_str().unwrap(), "rates"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("p1"), "{err}");

    let unknown = write(dir.path(), "unknown.ini", &format!("{SMALL}\n[optimizer2]\nstarts = 1\n"));
    assert_eq!(cogsec(&["--config", unknown.to_str().unwrap(), "optimize"]).0, 2);
    assert_eq!(cogsec(&["--config", "/nonexistent/x.ini", "rates"]).0, 2);
    assert_eq!(cogsec(&["rates"]).0, 2);
    assert_eq!(cogsec(&["no-such-command"]).0, 2);
}

#[test]
fn missing_or_broken_pmf_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = write(dir.path(), "m.ini", "[dmc]\nactive = nope.csv\nsilent = nope.csv\n");
    assert_eq!(cogsec(&["--config", missing.to_str().unwrap(), "dmc"]).0, 2);

    write(dir.path(), "bad.csv", "V1,X1,Y1,Y2,p\n0,0,0,0,0.7\n1,1,1,1,0.7\n");
    fs::copy(data("binary_active.csv"), dir.path().join("a.csv")).unwrap();
    let broken = write(dir.path(), "b.ini", "[dmc]\nactive = a.csv\nsilent = bad.csv\n");
    let (code, _, err) = cogsec(&["--config", broken.to_str().unwrap(), "dmc"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn undecodable_optimize_exits_3_and_names_the_cause() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "u.ini", &SMALL.replace("ctt = 10", "ctt = 0.5"));
    let (code, _, err) = cogsec(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "optimize"]);
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("decode"), "{err}");
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.ini", SMALL);
    let blocker = write(dir.path(), "file", "");
    let out = blocker.join("sub");
    let (code, _, err) = cogsec(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "optimize"]);
    assert_eq!(code, 4, "{err}");
}

#[test]
fn zero_budget_optimum_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "z.ini", &SMALL.replace("p2 = 20 lin", "p2 = 0 lin"));
    let (code, out, err) = cogsec(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "optimize"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("FEASIBLE_OPT"), "{out}");
    let r2 = out.lines().find_map(|l| l.strip_prefix("r2 = ")).expect("r2 line");
    assert_eq!(r2.trim().parse::<f64>().unwrap(), 0.0);
}

fn single_point_sweep(dir: &Path) -> PathBuf {
    write(
        dir,
        "sw.ini",
        "[scenario]\np1 = 10 lin\np2 = 20 db\n\n[geometry]\nt2 = 0.5, 0\n\n[optimizer]\nstarts = 2\nevals_per_start = 200\n\n\
         [sweep]\nx_min = 0.5\nx_max = 0.5\ny_min = 0\ny_max = 0\nstep = 0.05\nschemes = dpc_3phase, nodpc_3phase\n",
    )
}

fn csvs(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).filter(|p| p.extension().is_some_and(|e| e == "csv")).collect();
    v.sort();
    v
}

#[test]
fn one_point_sweep_writes_one_record_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = single_point_sweep(dir.path());
    let mut files = Vec::new();
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let (code, _, err) = cogsec(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "7", "sweep"]);
        assert_eq!(code, 0, "{err}");
        let found = csvs(&out);
        assert_eq!(found.len(), 1);
        files.push(found[0].clone());
    }
    let (a, b) = (fs::read(&files[0]).unwrap(), fs::read(&files[1]).unwrap());
    assert_eq!(a, b);
    assert_eq!(files[0].file_name(), files[1].file_name());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 2);
}

#[test]
fn dmc_reports_match_the_independent_goldens() {
    for name in ["binary", "ternary"] {
        let ini = data(&format!("{name}.ini"));
        let (code, out, err) = cogsec(&["--config", ini.to_str().unwrap(), "dmc"]);
        assert_eq!(code, 0, "{name}: {err}");
        let golden = fs::read_to_string(data(&format!("{name}.golden"))).unwrap();
        assert_eq!(out.trim_end(), golden.trim_end(), "{name}");
    }
}

#[test]
fn binary_sets_the_process_exit_code() {
    let exe = env!("CARGO_BIN_EXE_cogsec");
    let ok = Command::new(exe).args(["--config", data("binary.ini").to_str().unwrap(), "dmc"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(exe).args(["--config", "/nonexistent.ini", "dmc"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(Command::new(exe).arg("--help").output().unwrap().status.success());
}
