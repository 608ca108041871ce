use std::path::Path;
use std::process::{Command, Output};

fn swp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swp")).env_remove("SWP_CACHE").args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Runs without a cache and returns stdout, asserting success.
fn ok(args: &[&str]) -> String {
    let mut full = vec!["--no-cache"];
    full.extend_from_slice(args);
    let o = swp(&full);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

fn code(args: &[&str]) -> i32 {
    let mut full = vec!["--no-cache"];
    full.extend_from_slice(args);
    swp(&full).status.code().unwrap()
}

#[test]
fn corr_goldens() {
    assert_eq!(ok(&["corr", "-g", "3", "--kappa", "", "--psi", "1,1"]), "63/512\n");
    assert_eq!(ok(&["corr", "-g", "2", "--kappa", "1:1", "--psi", ""]), "3/128\n");
    assert_eq!(ok(&["corr", "-g", "1", "--psi", "1"]), "0\n");
    assert_eq!(ok(&["corr", "-g", "1", "--psi", "0"]), "1/8\n");
}

#[test]
fn corr_strategies_and_json() {
    for s in ["auto", "kmz", "thm14", "thm15", "closed"] {
        assert_eq!(ok(&["corr", "-g", "6", "--psi", "2,3", "-s", s]), "7949025/2097152\n", "{s}");
    }
    assert_eq!(
        ok(&["corr", "-g", "3", "--psi", "1,1", "-f", "json"]),
        "{\"genus\":3,\"kappa\":\"\",\"psi\":\"1,1\",\"value\":\"63/512\"}\n"
    );
    assert_eq!(
        ok(&["corr", "-g", "1", "--psi", "0,0", "-f", "json"]),
        "{\"genus\":1,\"kappa\":\"\",\"psi\":\"0,0\",\"value\":\"1/8\"}\n"
    );
    assert_eq!(
        ok(&["corr", "-g", "4", "--kappa", "2:1", "--psi", "0,1"]),
        ok(&["corr", "-g", "4", "--kappa", "2:1", "--psi", "1,0"])
    );
}

#[test]
fn volume_goldens() {
    assert_eq!(ok(&["volume", "-g", "1", "-n", "1", "-v", "normalized"]), "1/8\n");
    assert_eq!(ok(&["volume", "-g", "2", "-n", "1", "-v", "normalized"]), "9/128 + 3/128*L1^2\n");
    assert_eq!(ok(&["volume", "-g", "2", "-n", "1", "-v", "plain"]), "9/64*pi^2 + 3/256*L1^2\n");
    let json = ok(&["volume", "-g", "2", "-n", "1", "-v", "super", "-f", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["variant"], "super");
    assert_eq!(v["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["corr", "-g", "1"]), 3);
    assert_eq!(code(&["volume", "-g", "1", "-n", "0"]), 3);
    assert_eq!(code(&["corr", "-g", "x"]), 2);
    assert_eq!(code(&["corr", "-g", "3", "--kappa", "1"]), 2);
    assert_eq!(code(&["corr", "-g", "3", "--psi", "1,,1"]), 2);
    assert_eq!(code(&["corr", "-g", "3", "--kappa", "1:1", "--psi", "1", "-s", "closed"]), 2);
    assert_eq!(code(&["table", "--g-max", "0", "--weight-max", "2"]), 2);
    assert_eq!(code(&["bogus"]), 2);
}

#[test]
fn table_examples() {
    let g1 = ok(&["table", "--g-max", "1", "--weight-max", "2"]);
    assert!(g1.lines().any(|l| l == "1,,0,1/8"), "{g1}");
    let g2 = ok(&["table", "--g-max", "2", "--weight-max", "2"]);
    assert_eq!(
        g2,
        "g,kappa,psi,value\n1,,0,1/8\n1,,\"0,0\",1/8\n2,,1,3/128\n2,,\"1,0\",9/128\n2,1:1,,3/128\n2,1:1,0,9/128\n"
    );
    let mut reader = csv::Reader::from_reader(g2.as_bytes());
    let rows: Vec<Vec<String>> = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
    assert!(rows.contains(&vec!["2".into(), "1:1".into(), "".into(), "3/128".into()]));

    let big = ok(&["table", "--g-max", "4", "--weight-max", "3"]);
    let keys: Vec<&str> = big.lines().map(|l| l.rsplit_once(',').unwrap().0).collect();
    let mut unique = keys.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), keys.len());
    assert_eq!(big, ok(&["--jobs", "1", "table", "--g-max", "4", "--weight-max", "3"]));
}

#[test]
fn table_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let out = ok(&["table", "--g-max", "2", "--weight-max", "1", "-f", "json", "-o", path.to_str().unwrap()]);
    assert!(out.is_empty());
    let rows: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows[0], serde_json::json!({"g": 1, "kappa": "", "psi": "0", "value": "1/8"}));
    assert!(rows.iter().all(|r| r["value"].as_str().unwrap().contains('/')));
    let bad = dir.path().join("missing").join("t.csv");
    assert_eq!(code(&["table", "--g-max", "1", "--weight-max", "1", "-o", bad.to_str().unwrap()]), 1);
}

#[test]
fn series_golden() {
    let dump = ok(&["series", "--max-genus", "2", "--max-points", "2", "--max-t-index", "1", "--max-s-weight", "1"]);
    assert_eq!(
        dump,
        "hbar^0 t[0,0] s[] = 1/16\n\
         hbar^0 t[0] s[] = 1/8\n\
         hbar^1 t[0,0] s[(1,1)] = 9/64\n\
         hbar^1 t[0,1] s[] = 9/128\n\
         hbar^1 t[0] s[(1,1)] = 9/128\n\
         hbar^1 t[1] s[] = 3/128\n\
         hbar^1 t[] s[(1,1)] = 3/128\n"
    );
    let tau = ok(&[
        "series",
        "--max-genus",
        "1",
        "--max-points",
        "2",
        "--max-t-index",
        "0",
        "--max-s-weight",
        "0",
        "-k",
        "tau",
    ]);
    assert_eq!(tau, "hbar^0 t[0,0] s[] = 9/128\nhbar^0 t[0] s[] = 1/8\nhbar^0 t[] s[] = 1/1\n");
}

fn cached(cache: &Path, args: &[&str]) -> (String, String) {
    let mut full = vec!["--cache", cache.to_str().unwrap(), "--stats"];
    full.extend_from_slice(args);
    let o = swp(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (stdout(&o), String::from_utf8(o.stderr).unwrap())
}

#[test]
fn cache_hits_skip_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let (v1, s1) = cached(&path, &["corr", "-g", "5", "--psi", "2,2"]);
    assert!(s1.contains("cache_hits=0 computed=3"), "{s1}");
    let (v2, s2) = cached(&path, &["corr", "-g", "5", "--psi", "2,2"]);
    assert_eq!(v1, v2);
    assert!(s2.contains("cache_loaded=1 cache_hits=1 computed=0"), "{s2}");
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "{\"genus\":5,\"kappa\":[],\"psi\":[2,2],\"value\":\"125565/131072\"}\n"
    );
}

#[test]
fn cache_path_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env_path = dir.path().join("env.jsonl");
    let flag_path = dir.path().join("flag.jsonl");
    let run = |extra: &[&str]| {
        let mut args = extra.to_vec();
        args.extend(["corr", "-g", "3", "--psi", "1,1"]);
        let o = Command::new(env!("CARGO_BIN_EXE_swp")).env("SWP_CACHE", &env_path).args(&args).output().unwrap();
        assert!(o.status.success());
    };
    run(&[]);
    assert!(env_path.exists());
    std::fs::remove_file(&env_path).unwrap();
    run(&["--cache", flag_path.to_str().unwrap()]);
    assert!(flag_path.exists() && !env_path.exists());
    std::fs::remove_file(&flag_path).unwrap();
    run(&["--no-cache"]);
    assert!(!flag_path.exists() && !env_path.exists());
}

#[test]
fn conflicting_cache_is_a_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let line = "{\"genus\":3,\"kappa\":[],\"psi\":[1,1],\"value\":\"1/2\"}\n";
    std::fs::write(&path, line).unwrap();
    for s in ["kmz", "thm14", "thm15", "closed"] {
        let o = swp(&["--cache", path.to_str().unwrap(), "corr", "-g", "3", "--psi", "1,1", "-s", s]);
        assert_eq!(o.status.code(), Some(4), "{s}");
    }
    assert_eq!(std::fs::read_to_string(&path).unwrap(), line);
    std::fs::write(&path, "not json\n").unwrap();
    assert_eq!(swp(&["--cache", path.to_str().unwrap(), "corr", "-g", "3", "--psi", "1,1"]).status.code(), Some(1));
}

fn report(suite: &str, extra: &[&str]) -> (i32, serde_json::Value) {
    let mut args = vec!["--no-cache", "verify", "--suite", suite];
    args.extend_from_slice(extra);
    let o = swp(&args);
    (o.status.code().unwrap(), serde_json::from_slice(&o.stdout).unwrap())
}

#[test]
fn verify_examples() {
    let (code, r) = report("closed", &["--max-genus", "9"]);
    assert_eq!(code, 0);
    assert_eq!(r["passed"], true);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"published_constants_closed"));

    let (code, r) = report("cross", &["--max-genus", "5"]);
    assert_eq!(code, 0);
    assert!(r["checks"][0]["count"].as_u64().unwrap() > 100);

    let (code, r) = report("appendix", &[]);
    assert_eq!(code, 0);
    assert_eq!(r["findings"]["c_d"], "1");
}

#[test]
fn verify_report_is_deterministic() {
    let strip = |mut v: serde_json::Value| {
        v.as_object_mut().unwrap().remove("timings_ms");
        v
    };
    let (code, a) = report("volumes", &["--max-genus", "4"]);
    let (_, b) = report("volumes", &["--max-genus", "4"]);
    assert_eq!(code, 0);
    assert_eq!(strip(a.clone()), strip(b));
    assert_eq!(a["findings"]["thm17_variant"], "with_binomial");
    let (code, small) = report("volumes", &["--max-genus", "3"]);
    assert_ne!(code, 0);
    assert_eq!(small["findings"]["thm17_variant"], serde_json::json!(["as_stated", "with_binomial"]));
}

#[test]
fn verify_failure_exits_nonzero() {
    let (code, r) = report("closed", &["--max-genus", "0"]);
    assert_ne!(code, 0);
    assert_eq!(r["passed"], false);
}
