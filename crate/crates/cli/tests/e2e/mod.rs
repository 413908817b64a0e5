//! End-to-end runs of the `cvqc` binary.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_cvqc");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("CVQC_SEED").output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json_file(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    let body = text.strip_prefix("# schema=1\n").expect("schema line");
    csv::Reader::from_reader(body.as_bytes()).records().map(Result::unwrap).collect()
}

#[test]
fn sweep_is_deterministic_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = ["sweep", "--variant", "p0", "--alphas", "0:1.5708:5", "--shots", "300", "--lambda", "0.05", "--seed", "17"];
    ok(&[&args[..], &["--out", a.to_str().unwrap()]].concat());
    ok(&[&args[..], &["--out", b.to_str().unwrap()]].concat());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let m = json_file(&dir.path().join("a.csv.manifest.json"));
    assert_eq!(m["subcommand"], "sweep");
    assert_eq!(m["seed"], 17);
    assert_eq!(m["config"]["shots"], 300);
    assert_eq!(m["config"]["mode"], "delegated");
    assert!(m["git_describe"].is_string());
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["outputs"][0], a.to_str().unwrap());

    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.lines().nth(1).unwrap() == "alpha,e_est,e_err,lambda,variant,shots,seed,mode");
    assert_eq!(csv_rows(&text).len(), 5);
}

#[test]
fn seed_falls_back_to_the_environment() {
    let base = ["sweep", "--alphas", "0.3:0.3:1", "--shots", "100"];
    let from_env = Command::new(BIN).args(base).env("CVQC_SEED", "5").output().unwrap();
    let from_flag = ok(&[&base[..], &["--seed", "5"]].concat());
    assert!(from_env.status.success());
    assert_eq!(from_env.stdout, from_flag.stdout);
}

#[test]
fn exact_ideal_sweep_is_sin_squared() {
    let out = ok(&["sweep", "--lambda", "0", "--mode", "exact", "--alphas", "0:1.5707963267948966:9"]);
    for row in csv_rows(&String::from_utf8(out.stdout).unwrap()) {
        let alpha: f64 = row[0].parse().unwrap();
        let e: f64 = row[1].parse().unwrap();
        assert!((e - alpha.sin().powi(2)).abs() < 1e-10);
        assert_eq!(&row[7], "exact");
    }
}

#[test]
fn reduced_noise_verifies_part_of_the_second_variant() {
    let out = ok(&["sweep", "--variant", "p1", "--lambda", "0.035", "--mode", "exact", "--alphas", "1.25:1.57:17"]);
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert!(rows.iter().any(|r| r[1].parse::<f64>().unwrap() < 0.4));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["sweep", "--shots", "many"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--alphas", "0:1"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--lambda", "1.5", "--mode", "exact"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--alpha", "0.1", "--claim", "maybe"]).status.code(), Some(2));
    assert_eq!(run(&["compile-report", "--keys", "2"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.csv");
    let out = run(&["sweep", "--mode", "exact", "--alphas", "0:1:2", "--out", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    assert_eq!(run(&["verify", "--alpha", "0.1", "--n-terms", "5", "--prover", "exec:true"]).status.code(), Some(4));
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let target = format!("tcp:{addr}");
    assert_eq!(run(&["verify", "--alpha", "0.1", "--n-terms", "5", "--prover", &target]).status.code(), Some(4));
}

#[test]
fn verify_verdicts() {
    let out = ok(&["verify", "--alpha", "0", "--claim", "yes", "--lambda", "0", "--n-terms", "10000"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "accept");
    assert!(v["r_est"].as_f64().unwrap() < v["T0"].as_f64().unwrap());

    let out = ok(&["verify", "--alpha", "1.5708", "--claim", "yes", "--variant", "p0", "--lambda", "0", "--n-terms", "2000"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "reject");
    assert_eq!(v["reason"], "energy_too_high");
    for key in ["r_est", "T0", "T1", "p_t", "p_m", "c", "transcript_path"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn guessing_prover_is_caught_in_test_rounds() {
    let out = ok(&["verify", "--alpha", "0.2", "--cheat", "guess", "--round", "test", "--n-terms", "4000", "--seed", "8"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "reject");
    // A guessed (b, x) matches one of 4 preimage slots for a one-to-one key
    // and two of them for a two-to-one key; the round fails if either pair does.
    let p_t = v["p_t"].as_object().unwrap();
    assert_eq!(p_t.len(), 4);
    for (basis, p) in p_t {
        if v["v"][basis].as_f64().unwrap() == 0.0 {
            continue;
        }
        let survive: f64 = basis.bytes().map(|k| if k == b'0' { 0.25 } else { 0.5 }).product();
        let p = p.as_f64().unwrap();
        assert!((p - (1.0 - survive)).abs() < 0.05, "basis {basis}: p_t {p}");
    }
    assert!((p_t["00"].as_f64().unwrap() - 15.0 / 16.0).abs() < 0.02);
}

#[test]
fn external_prover_reproduces_the_in_process_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let inproc = dir.path().join("inproc.json");
    let exec = dir.path().join("exec.json");
    let cap_in = dir.path().join("inproc.cap");
    let cap_ex = dir.path().join("exec.cap");
    let common = ["verify", "--alpha", "0.4", "--n-terms", "300", "--lambda", "0.05", "--seed", "23"];
    let a = ok(&[&common[..], &["--transcript", inproc.to_str().unwrap(), "--capture", cap_in.to_str().unwrap()]].concat());
    let prover = format!("exec:{BIN} prover --lambda 0.05 --seed 23");
    let b = ok(&[&common[..], &["--prover", &prover, "--transcript", exec.to_str().unwrap(), "--capture", cap_ex.to_str().unwrap()]].concat());

    assert_eq!(std::fs::read(&inproc).unwrap(), std::fs::read(&exec).unwrap());
    assert_eq!(std::fs::read(&cap_in).unwrap(), std::fs::read(&cap_ex).unwrap());
    let (va, vb): (Value, Value) = (serde_json::from_slice(&a.stdout).unwrap(), serde_json::from_slice(&b.stdout).unwrap());
    assert_eq!(va["r_est"], vb["r_est"]);
    assert_eq!(va["verdict"], vb["verdict"]);

    // Prover-bound lines carry only public message fields; the sidecar stays local.
    let sidecar_files: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_str().unwrap().contains("sidecar"))
        .collect();
    assert!(!sidecar_files.is_empty());
    let captured = std::fs::read_to_string(&cap_ex).unwrap();
    for line in captured.lines() {
        let msg: Value = serde_json::from_str(line).unwrap();
        for key in msg.as_object().unwrap().keys() {
            assert!(["type", "alpha", "variant", "k1", "k2", "round", "verdict", "reason"].contains(&key.as_str()), "{line}");
        }
    }
    for private in ["decoded", "preimage", "trapdoor", "effective_alpha", "sidecar"] {
        assert!(!captured.contains(private));
    }
}

#[test]
fn external_prover_over_tcp() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let addr = addr.to_string();
    let mut server = Command::new(BIN)
        .args(["prover", "--listen", &addr, "--once", "--seed", "4"])
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let target = format!("tcp:{addr}");
    let mut out = None;
    for _ in 0..100 {
        let o = run(&["verify", "--alpha", "0.3", "--n-terms", "50", "--seed", "4", "--prover", &target]);
        if o.status.success() {
            out = Some(o);
            break;
        }
        std::thread::sleep(std::time::Duration::from_millis(50));
    }
    server.wait().unwrap();
    let tcp: Value = serde_json::from_slice(&out.expect("prover reachable").stdout).unwrap();
    let local: Value = serde_json::from_slice(&ok(&["verify", "--alpha", "0.3", "--n-terms", "50", "--seed", "4"]).stdout).unwrap();
    assert_eq!(tcp, local);
}

#[test]
fn misbehaving_prover_is_a_protocol_error() {
    let out = ok(&["verify", "--alpha", "0.1", "--n-terms", "5", "--prover", "exec:read l; echo '{\"type\":\"NONSENSE\"}'; cat >/dev/null"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "reject");
    assert_eq!(v["reason"], "protocol_error");
}

#[test]
fn rounds_report() {
    let ideal = ok(&["rounds", "--lambda", "0", "--shots", "300", "--round", "test"]);
    for row in csv_rows(&String::from_utf8(ideal.stdout).unwrap()) {
        assert_eq!(&row[4], "0");
        assert_eq!(row[7].parse::<f64>().unwrap(), 0.0);
    }

    let noisy = ok(&["rounds", "--lambda", "0.05", "--shots", "2000", "--round", "measure", "--seed", "3"]);
    let rows = csv_rows(&String::from_utf8(noisy.stdout).unwrap());
    assert_eq!(rows.len(), 4);
    let exact: Vec<f64> = rows.iter().map(|r| r[7].parse().unwrap()).collect();
    assert_eq!(exact[0], 0.0);
    assert_eq!(&rows[0][4], "0");
    assert!(exact[3] >= exact[1] && exact[3] >= exact[2] && exact[1] > 0.0 && exact[2] > 0.0);
    for r in &rows {
        let (p, err, e): (f64, f64, f64) = (r[5].parse().unwrap(), r[6].parse().unwrap(), r[7].parse().unwrap());
        assert!((p - e).abs() <= 4.0 * err.max(1e-3), "sampled {p} +- {err} vs exact {e}");
    }

    let test = ok(&["rounds", "--lambda", "0.05", "--shots", "200", "--round", "test"]);
    for row in csv_rows(&String::from_utf8(test.stdout).unwrap()) {
        assert_eq!(&row[2], "test");
        assert!(row[7].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn compile_report_counts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    ok(&["compile-report", "--keys", "all", "--alpha", "0.6", "--out", path.to_str().unwrap()]);
    let v = json_file(&path);
    let circuits = v["circuits"].as_array().unwrap();
    assert_eq!(circuits.len(), 4);
    for c in circuits {
        assert_eq!(c["ms_count"], 5);
        assert_eq!(c["single_count"], 19);
        assert_eq!(c["ms_pairs"].as_array().unwrap().len(), 5);
    }
    assert!((v["eta_only_budget"]["fidelity"].as_f64().unwrap() - 0.966).abs() < 1e-3);
    assert_eq!(v["bell_fidelity"][0]["estimate"].as_f64().unwrap(), (0.891 + 0.812) / 2.0);
    assert!(dir.path().join("report.json.manifest.json").exists());

    let one = ok(&["compile-report", "--keys", "10"]);
    let v: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert_eq!(v["circuits"].as_array().unwrap().len(), 1);
    assert_eq!(v["circuits"][0]["keys"], "10");
}

#[test]
fn quantumness_report() {
    let out = ok(&["quantumness", "--m-bits", "2", "--trials", "2000", "--prover", "honest", "--lambda", "0"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["p_A"], 1.0);
    assert_eq!(v["p_B"], 1.0);

    let out = ok(&["quantumness", "--trials", "500", "--prover", "classical-baseline"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["p_B"], 1.0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("note:"));

    let out = ok(&["quantumness", "--trials", "4000", "--lambda", "0.3", "--seed", "2"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["p_B"].as_f64().unwrap() < 1.0);
    assert!(v["exact"]["p_B"].as_f64().unwrap() < 1.0);
}
