use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const PARAMS: &str = r#"{"n_levels":3,"n_atoms":2,"eps":[-1,0,1],"gamma":1,"gamma0":1,"p":0.5}"#;

struct Run {
    dir: tempfile::TempDir,
    out: Output,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join("out").join(name)
    }
    fn text(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }
    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.text(name)).unwrap()
    }
    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }
}

fn crg(params: Option<&str>, env: &[(&str, &str)], args: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_crg"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("CRG_")) {
        cmd.env_remove(k);
    }
    if let Some(p) = params {
        let cfg = dir.path().join("params.json");
        std::fs::write(&cfg, p).unwrap();
        cmd.arg("--config").arg(cfg);
    }
    cmd.arg("--out").arg(dir.path().join("out")).args(args).envs(env.iter().copied());
    let out = cmd.output().unwrap();
    Run { dir, out }
}

fn sha(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

fn json_hash_ok(text: &str) -> bool {
    let mut v: Value = serde_json::from_str(text).unwrap();
    let o = v.as_object_mut().unwrap();
    let stored = o.remove("content_hash").unwrap();
    assert!(o.remove("run_config").is_some());
    stored.as_str() == Some(sha(v.to_string().as_bytes()).as_str())
}

/// Splits a CSV output into (run_config, hash, body).
fn csv_parts(text: &str) -> (Value, String, String) {
    let mut it = text.splitn(3, '\n');
    let cfg = it.next().unwrap().strip_prefix("# run_config: ").expect("run_config line");
    let hash = it.next().unwrap().strip_prefix("# content_hash: ").expect("hash line");
    (serde_json::from_str(cfg).unwrap(), hash.to_string(), it.next().unwrap_or("").to_string())
}

fn data_rows(body: &str) -> Vec<Vec<String>> {
    body.lines().skip(1).filter(|l| !l.is_empty()).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn all_outputs_verify(dir: &Path) {
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => assert!(json_hash_ok(&text), "{}", path.display()),
            Some("csv") => {
                let (_, hash, body) = csv_parts(&text);
                assert_eq!(hash, sha(body.as_bytes()), "{}", path.display());
            }
            _ => panic!("unexpected file {}", path.display()),
        }
    }
}

#[test]
fn spectrum_writes_complete_hashed_csv() {
    let r = crg(Some(PARAMS), &[], &["spectrum"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let (cfg, _, body) = csv_parts(&r.text("spectrum.csv"));
    assert_eq!(body.lines().next().unwrap(), "s1,s2,s3,re,im,method,residual");
    assert_eq!(cfg["command"], "spectrum");
    assert_eq!(cfg["params"]["n_atoms"], 2);
    // (L+1)(L+2)/2 = 6 states per copy
    let rows = data_rows(&body);
    assert_eq!(rows.len(), 36);
    assert!(rows.iter().all(|r| r.len() == 7));
    let (_, _, one) = csv_parts(&r.text("spectrum_1_m1_0.csv"));
    assert!(data_rows(&one).iter().all(|r| r[..3] == ["1", "-1", "0"]));
    let summary = r.json("summary.json");
    assert!(summary["checks"]["max_re"].as_f64().unwrap() <= 1e-12);
    let manifest = r.json("manifest.json");
    assert!(manifest["files"].as_array().unwrap().len() >= 3);
    all_outputs_verify(&r.path(""));
}

#[test]
fn rg_and_ed_agree_in_the_cli() {
    let r = crg(Some(PARAMS), &[("CRG_N_ATOMS", "4")], &["--method", "both", "--tol", "1e-8", "spectrum"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let s = r.json("summary.json");
    assert!(s["max_rg_to_ed_distance"].as_f64().unwrap() < 1e-8);
    assert!(s["rg_eigenvalues"].as_u64().unwrap() > 0);
    let (_, _, body) = csv_parts(&r.text("spectrum.csv"));
    assert!(data_rows(&body).iter().any(|r| r[5] == "rg"));
}

#[test]
fn environment_overrides_the_config_file() {
    let r = crg(Some(PARAMS), &[("CRG_P", "0.25"), ("CRG_N_ATOMS", "1")], &["spectrum"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let s = r.json("summary.json");
    assert_eq!(s["run_config"]["params"]["p"], 0.25);
    assert_eq!(s["run_config"]["params"]["n_atoms"], 1);
}

#[test]
fn validation_errors_exit_two() {
    let r = crg(None, &[], &["spectrum"]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("missing parameters"));
    let r = crg(Some(PARAMS), &[], &["spectrum", "--sector", "1,1,1"]);
    assert_eq!(r.code(), 2);
    let r = crg(Some(r#"{"n_levels":3,"n_atoms":2,"eps":[0,1],"gamma":1,"gamma0":1,"p":0.5}"#), &[], &["spectrum"]);
    assert_eq!(r.code(), 2);
    let r = crg(Some(PARAMS), &[], &["--method", "sideways", "spectrum"]);
    assert_eq!(r.code(), 2);
}

#[test]
fn oversized_sector_exits_four() {
    let r = crg(Some(PARAMS), &[("CRG_N_ATOMS", "300")], &["spectrum", "--sector", "0,0,0"]);
    assert_eq!(r.code(), 4);
    assert!(r.stderr().contains("(0,0,0)"));
}

#[test]
fn oracle_check_passes_and_catches_a_flipped_family() {
    let r = crg(Some(PARAMS), &[("CRG_N_ATOMS", "3")], &["oracle-check"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("oracle_check.json");
    assert_eq!(v["pass"], true);
    assert!(v["integrability"].is_object());
    let r = crg(Some(PARAMS), &[("CRG_N_ATOMS", "3")], &["oracle-check", "--flip", "1,3"]);
    assert_eq!(r.code(), 3);
    assert_eq!(r.json("oracle_check.json")["pass"], false);
}

#[test]
fn rg_solve_writes_a_solution_record() {
    let r = crg(Some(PARAMS), &[("CRG_N_ATOMS", "4")], &["rg-solve", "--sector", "1,-1,0"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("solution.json");
    for key in ["sector", "e", "w", "residual", "eigenvalue", "params"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["sector"], serde_json::json!([1, -1, 0]));
    assert_eq!(v["bethe_check"]["status"], "physical");
    let (_, _, roots) = csv_parts(&r.text("solution_roots.csv"));
    assert_eq!(roots.lines().next().unwrap(), "re,im,family");
    let fams: Vec<String> = data_rows(&roots).into_iter().map(|r| r[2].clone()).collect();
    assert_eq!(fams.len(), v["e"].as_array().unwrap().len() + v["w"].as_array().unwrap().len());

    // a saved record is accepted as an initial guess
    let guess = r.path("solution.json");
    let again = crg(Some(PARAMS), &[("CRG_N_ATOMS", "4")], &["rg-solve", "--guess", guess.to_str().unwrap()]);
    assert_eq!(again.code(), 0, "{}", again.stderr());
    let a = again.json("solution.json")["eigenvalue"].clone();
    let b = v["eigenvalue"].clone();
    assert!((a["re"].as_f64().unwrap() - b["re"].as_f64().unwrap()).abs() < 1e-10);
    assert!((a["im"].as_f64().unwrap() - b["im"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn rg_solve_rejects_vanishing_bethe_vectors() {
    // the only root set reached in this sector has a null Bethe vector
    let r = crg(Some(PARAMS), &[("CRG_N_ATOMS", "4"), ("CRG_GAMMA0", "0")], &["rg-solve", "--sector", "0,-2,2"]);
    assert_eq!(r.code(), 3, "{}", r.stderr());
    assert_eq!(r.json("solution.json")["bethe_check"]["status"], "spurious");
}

#[test]
fn steady_state_methods_agree() {
    let r = crg(Some(PARAMS), &[("CRG_N_ATOMS", "4")], &["--method", "both", "--tol", "1e-7", "steady-state"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let ed = r.json("steady_state.json");
    assert!(ed["eigenvalue"]["re"].as_f64().unwrap().abs() < 1e-10);
    let f: f64 = ed["level_fractions"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((f - 1.0).abs() < 1e-10);
    let rg = r.json("steady_state_rg.json");
    assert!(rg["bethe_check"]["max_population_delta_vs_ed"].as_f64().unwrap() < 1e-7);
    let (_, _, pops) = csv_parts(&r.text("steady_state_rg_populations.csv"));
    assert_eq!(pops.lines().next().unwrap(), "k1,k2,k3,re,im");
    assert_eq!(data_rows(&pops).len(), 15);
}

#[test]
fn gap_scan_needs_five_sizes() {
    let r = crg(Some(PARAMS), &[], &["gap-scan", "--sizes", "4,6,8", "--sectors", "1,-1,0"]);
    assert_eq!(r.code(), 3, "{}", r.stderr());
}

#[test]
fn gap_scan_writes_fit_files() {
    let r = crg(Some(PARAMS), &[], &["gap-scan", "--sizes", "6,8,10,12,14", "--sectors", "1,-1,0"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let fit = r.json("fit_1_m1_0.json");
    for key in ["sector", "coefficients", "stderr", "samples"] {
        assert!(fit.get(key).is_some(), "missing {key}");
    }
    let samples = fit["samples"].as_array().unwrap();
    let ls: Vec<u64> = samples.iter().map(|s| s["n_atoms"].as_u64().unwrap()).collect();
    assert_eq!(ls, vec![6, 8, 10, 12, 14]);
    let tl = r.json("tl_prediction.json");
    assert!((tl["gap_per_atom"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    all_outputs_verify(&r.path(""));
}

#[test]
fn evolve_starts_at_the_initial_occupation_and_keeps_trace() {
    let r = crg(Some(PARAMS), &[], &["evolve", "--initial", "0,0,2", "--level", "3", "--steps", "10", "--t-max", "2"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let (_, _, body) = csv_parts(&r.text("evolution.csv"));
    assert_eq!(body.lines().next().unwrap(), "t,re,im,trace_re,trace_im");
    let rows = data_rows(&body);
    assert_eq!(rows.len(), 11);
    let num = |s: &str| s.parse::<f64>().unwrap();
    assert!((num(&rows[0][1]) - 2.0).abs() < 1e-10);
    for row in &rows {
        assert!((num(&row[3]) - 1.0).abs() < 1e-9 && num(&row[4]).abs() < 1e-9);
    }
    let bad = crg(Some(PARAMS), &[], &["evolve", "--initial", "1,0,0"]);
    assert_eq!(bad.code(), 2);
}

#[test]
fn p_sweep_writes_one_file_per_value() {
    let r = crg(Some(PARAMS), &[], &["spectrum", "--p-sweep", "0,0.5,1"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    for tag in ["0", "0.5", "1"] {
        let (cfg, _, body) = csv_parts(&r.text(&format!("spectrum_p{tag}.csv")));
        assert_eq!(cfg["options"]["p_sweep"], "0,0.5,1");
        assert_eq!(data_rows(&body).len(), 36);
    }
    assert_eq!(r.json("summary.json")["sweep"].as_array().unwrap().len(), 3);
}

#[test]
fn coo_dump_lists_matrix_entries() {
    let r = crg(Some(PARAMS), &[], &["spectrum", "--sector", "0,0,0", "--dump-coo"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let (_, _, body) = csv_parts(&r.text("matrix_0_0_0.csv"));
    let mut lines = body.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "row,col,re,im");
    let n = lines.filter(|l| l.split(',').count() == 4).count();
    assert!(n >= 6);
}
