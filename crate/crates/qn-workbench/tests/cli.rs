//! Exit-code contract, envelope schema, cache round-trip, and
//! field-independence checks, driven through the installed binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use qn_workbench::freealg::Polynomial;
use qn_workbench::groebner::RewriteSystem;
use qn_workbench::qn::{self, Variant};
use qn_workbench::scalar::FieldSpec;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qn-workbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qn-workbench"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a json envelope")
}

fn temp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qn-wb-{}-{}", std::process::id(), name));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const NON_KOSZUL: &str = "generators: x, y, z\nx*y - z*z\ny*x\n";

#[test]
fn help_exits_zero_and_usage_errors_exit_one() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["gb", "--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["gb"]).status.code(), Some(1), "missing --n");
    assert_eq!(run(&["gb", "--n", "0"]).status.code(), Some(1), "rank out of range");
    assert_eq!(run(&["gb", "--n", "2", "--algebra", "zzz"]).status.code(), Some(1));
    assert_eq!(run(&["hilbert", "--max-degree", "4"]).status.code(), Some(1), "no source");
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["hilbert", "--n", "2", "--field", "fp:6"]).status.code(), Some(1));
}

#[test]
fn pass_fail_and_truncation_exit_codes() {
    assert_eq!(run(&["hilbert", "--n", "2"]).status.code(), Some(0));
    let out = run(&["dual", "--n", "3", "--max-degree", "4", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3), "truncation below the visible top degree");
    assert_eq!(json_of(&out)["verdict"], "insufficient-truncation");

    let dir = temp_dir("nk");
    let pres = dir.join("nk.txt");
    std::fs::write(&pres, NON_KOSZUL).unwrap();
    let p = pres.to_str().unwrap();
    assert_eq!(
        run(&["froberg", "--presentation", p, "--max-degree", "6"]).status.code(),
        Some(2),
        "convolution failure must exit 2"
    );
    assert_eq!(
        run(&["tor", "--presentation", p, "--i-max", "4", "--j-max", "6"]).status.code(),
        Some(2),
        "off-diagonal Tor must exit 2"
    );
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_envelope_is_schema_stable() {
    let commands: Vec<Vec<&str>> = vec![
        vec!["gb", "--n", "2", "--max-degree", "4"],
        vec!["hilbert", "--n", "2", "--max-degree", "4"],
        vec!["dual", "--n", "2"],
        vec!["froberg", "--n", "2", "--max-degree", "4"],
        vec!["complex", "--n", "2", "--max-degree", "4"],
        vec!["tor", "--n", "2", "--i-max", "3", "--j-max", "4"],
        vec!["verify-all", "--n", "2"],
        vec!["export", "--what", "presentation", "--n", "2"],
    ];
    for mut args in commands {
        let name = args[0].to_string();
        args.push("--format");
        args.push("json");
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let v = json_of(&out);
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["command", "config", "data", "elapsed_ms", "verdict"], "{name}");
        assert_eq!(v["command"], name);
        assert!(v["config"].is_object(), "{name}");
        assert!(v["elapsed_ms"].is_u64(), "{name}");
        assert_eq!(v["verdict"], "pass", "{name}");
    }
}

#[test]
fn homology_and_tor_tables_carry_i_j_dim_entries() {
    let out = run(&["complex", "--n", "2", "--max-degree", "4", "--format", "json"]);
    let v = json_of(&out);
    let table = v["data"]["table"].as_array().unwrap();
    assert!(!table.is_empty());
    for entry in table {
        let keys: Vec<&str> = entry.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, ["dim", "i", "j"]);
        assert_eq!(entry["dim"], 0);
    }
    let out = run(&["tor", "--n", "2", "--i-max", "3", "--j-max", "4", "--format", "json"]);
    let v = json_of(&out);
    let table = v["data"]["table"].as_array().unwrap();
    let diag: Vec<(u64, u64, u64)> = table
        .iter()
        .map(|e| (e["i"].as_u64().unwrap(), e["j"].as_u64().unwrap(), e["dim"].as_u64().unwrap()))
        .collect();
    assert_eq!(diag, vec![(0, 0, 1), (1, 1, 3), (2, 2, 1)]);
}

#[test]
fn cache_round_trip_reproduces_normal_forms() {
    let dir = temp_dir("cache");
    let d = dir.to_str().unwrap();
    let args = ["gb", "--n", "3", "--algebra", "q", "--max-degree", "5", "--format", "json"];

    let first = run_env(&args, "QN_WORKBENCH_CACHE", d);
    assert_eq!(first.status.code(), Some(0));
    let v = json_of(&first);
    assert_eq!(v["data"]["cache"], "miss");
    let path = PathBuf::from(v["data"]["cache_path"].as_str().unwrap());
    assert!(path.starts_with(&dir), "env variable sets the default cache dir");

    let second = run_env(&args, "QN_WORKBENCH_CACHE", d);
    assert_eq!(json_of(&second)["data"]["cache"], "hit");

    // the cached system must reduce like a freshly completed one, byte for byte
    let field = FieldSpec::Rational;
    let alph = qn::alphabet(3);
    let text = std::fs::read_to_string(&path).unwrap();
    let (_, cached) = RewriteSystem::parse_cache(&text, &alph).unwrap();
    let fresh = qn::family_system(3, Variant::Q, 5, field).unwrap();
    let mut state = 0x243F_6A88_85A3_08D3u64;
    let mut next = move |m: usize| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) as usize) % m
    };
    for _ in 0..200 {
        let len = 1 + next(5);
        let ids: Vec<u16> = (0..len).map(|_| next(alph.len()) as u16).collect();
        let w = qn_workbench::freealg::Word::from_ids(&ids);
        let p = Polynomial::monomial(w, field.one());
        let a = fresh.normal_form(&p).display(&alph).to_string();
        let b = cached.normal_form(&p).display(&alph).to_string();
        assert_eq!(a, b);
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn dimension_tables_are_field_independent() {
    let pairs: Vec<(Vec<&str>, &str)> = vec![
        (vec!["hilbert", "--n", "3", "--max-degree", "5"], "data"),
        (vec!["dual", "--n", "3"], "data"),
        (vec!["froberg", "--n", "3", "--max-degree", "5"], "data"),
        (vec!["complex", "--n", "3", "--max-degree", "4"], "data"),
        (vec!["tor", "--n", "3", "--i-max", "3", "--j-max", "4"], "data"),
    ];
    for (base, key) in pairs {
        let mut rational = base.clone();
        rational.extend(["--format", "json", "--field", "rational"]);
        let mut modular = base.clone();
        modular.extend(["--format", "json", "--field", "fp:32003"]);
        let a = run(&rational);
        let b = run(&modular);
        assert_eq!(a.status.code(), Some(0), "{base:?}");
        assert_eq!(b.status.code(), Some(0), "{base:?}");
        assert_eq!(json_of(&a)[key], json_of(&b)[key], "{base:?}");
    }
}

#[test]
fn exported_rewrite_system_parses_back() {
    let dir = temp_dir("export");
    let out_path = dir.join("system.gb");
    let out = run(&[
        "export", "--what", "gb", "--n", "2", "--algebra", "gr", "--max-degree", "5",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let (header, rs) = RewriteSystem::parse_cache(&text, &qn::alphabet(2)).unwrap();
    assert_eq!(header.n, 2);
    assert_eq!(rs.rules().len(), 1);

    let dump = run(&["export", "--what", "complex", "--n", "3"]);
    let body = String::from_utf8(dump.stdout).unwrap();
    assert!(body.contains("S({1,2,3}:{2,3})"));
    std::fs::remove_dir_all(&dir).ok();
}
