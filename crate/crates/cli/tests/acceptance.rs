//! Acceptance criteria. Prints one PASS/FAIL line per criterion with the
//! measured value, the tolerance and the wall time, then fails if any
//! criterion did not hold. End-to-end runs of the binary live in `e2e`.

mod e2e;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::process::Command;
use std::time::Instant;

use cvqc::compile::{bell_fidelity_estimate, fidelity_for_counts, lower, verification_circuit, ErrorBudget};
use cvqc::hamiltonian::{build_fixed_h, eta_state, DecisionProblem, Variant};
use cvqc::noise::{energy_crossing, undisturbed_probability, NoiseModel};
use cvqc::protocol::{estimate_energy, exact_energy, exact_round_stats, extended_protocol, ExtendedConfig, SessionConfig};
use cvqc::qsim::{Basis, Gate, QuantumState};

const BIN: &str = env!("CARGO_BIN_EXE_cvqc");
const KEYS: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 0], [1, 1]];

struct Outcome {
    id: &'static str,
    pass: bool,
}

fn criterion(id: &'static str, what: &str, limit_s: Option<f64>, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (ok, detail) = f();
    let secs = t.elapsed().as_secs_f64();
    let in_time = limit_s.is_none_or(|l| secs < l);
    let pass = ok && in_time;
    let budget = limit_s.map(|l| format!(" (limit {l} s)")).unwrap_or_default();
    println!("{} {id:>3} {what}: {detail}; {secs:.2} s{budget}", if pass { "PASS" } else { "FAIL" });
    Outcome { id, pass }
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn problem(alpha: f64, variant: Variant) -> DecisionProblem {
    DecisionProblem::new(alpha, variant).unwrap()
}

fn exact(alpha: f64, variant: Variant, lambda: f64) -> f64 {
    exact_energy(&problem(alpha, variant), lambda).unwrap().energy
}

fn born(alpha: f64, keys: [u8; 2]) -> [f64; 4] {
    let mut s: QuantumState = eta_state(alpha);
    for (q, &k) in keys.iter().enumerate() {
        if k == 1 {
            s.apply_gate(&Gate::H { qubit: q }).unwrap();
        }
    }
    let p = s.outcome_distribution(&[0, 1], Basis::Z).unwrap();
    [p[0], p[1], p[2], p[3]]
}

fn ideal_curve() -> (bool, String) {
    let mut worst_sigma: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    for (i, alpha) in grid(9, 0.0, FRAC_PI_2).into_iter().enumerate() {
        let want = alpha.sin().powi(2);
        let est = estimate_energy(&SessionConfig::new(problem(alpha, Variant::P0), 2000, 0.0, 500 + i as u64)).unwrap();
        let dev = (est.energy - want).abs();
        let z = if est.energy_err > 0.0 { dev / est.energy_err } else if dev < 1e-12 { 0.0 } else { f64::INFINITY };
        worst_sigma = worst_sigma.max(z);
        worst_exact = worst_exact.max((exact(alpha, Variant::P0, 0.0) - want).abs());
    }
    (
        worst_sigma < 3.0 && worst_exact < 1e-10,
        format!("max |dE|/sigma {worst_sigma:.2} (< 3), max exact |dE| {worst_exact:.1e} (< 1e-10)"),
    )
}

fn spectral_bound() -> (bool, String) {
    let mut min_gap = f64::MAX;
    let mut separated = true;
    for variant in [Variant::P0, Variant::P1] {
        for alpha in grid(1000, 0.0, FRAC_PI_2) {
            let p = problem(alpha, variant);
            let h = build_fixed_h(&p);
            let ground = h.ground_energy().unwrap();
            let history = h.expectation(&eta_state(alpha)).unwrap();
            min_gap = min_gap.min(ground - (history - 0.4));
            let (f, g) = p.thresholds();
            if (p.is_yes_instance() && ground >= f) || (p.is_no_instance() && ground <= g) {
                separated = false;
            }
        }
    }
    (
        min_gap > 0.0 && separated,
        format!("min ground - (history - 2/5) = {min_gap:.4} (> 0), thresholds 0.4/0.5 separate: {separated}"),
    )
}

fn noise_threshold() -> (bool, String) {
    let edge = energy_crossing(Variant::P0, 0.05, 0.4, 0.0, FRAC_PI_4).unwrap().unwrap() / FRAC_PI_2;
    let last_grid = grid(9, 0.0, 1.0).into_iter().filter(|&f| exact(f * FRAC_PI_2, Variant::P0, 0.05) < 0.4).fold(0.0, f64::max);
    (
        (edge - 0.12).abs() <= 0.03,
        format!("E = 0.4 crossing at {edge:.4} pi/2 (target 0.12 +- 0.03); last verified 9-point grid angle {last_grid:.3} pi/2"),
    )
}

fn second_variant_at_five_percent() -> (bool, String) {
    let fracs = [0.80, 0.85, 0.90, 0.95, 1.00];
    let energies: Vec<f64> = fracs.iter().map(|f| exact(f * FRAC_PI_2, Variant::P1, 0.05)).collect();
    let verified: Vec<f64> = fracs.iter().zip(&energies).filter(|(_, &e)| e < 0.4).map(|(&f, _)| f).collect();
    let listing: Vec<String> = fracs.iter().zip(&energies).map(|(f, e)| format!("{f:.2}:{e:.3}")).collect();
    (verified == [1.00], format!("E at lambda 0.05 [{}]; verified at {verified:?} (want [1.0])", listing.join(" ")))
}

fn second_variant_at_reduced_noise() -> (bool, String) {
    let verified: Vec<f64> = grid(64, 1.25, 1.57).into_iter().filter(|&a| exact(a, Variant::P1, 0.035) < 0.4).collect();
    match (verified.first(), verified.last()) {
        (Some(lo), Some(hi)) => (true, format!("E < 0.4 on [{lo:.3}, {hi:.3}] rad at lambda 0.035")),
        _ => (false, "no verified angle in [1.25, 1.57] at lambda 0.035".into()),
    }
}

fn gate_counts() -> (bool, String) {
    let mut all = true;
    for keys in KEYS {
        let c = lower(&verification_circuit(FRAC_PI_4, keys).unwrap()).unwrap().counts();
        all &= c.ms == 5 && c.single == 19;
    }
    let endpoint = lower(&verification_circuit(FRAC_PI_2, [0, 0]).unwrap()).unwrap().counts();
    (
        all,
        format!(
            "5 MS + 19 single for all keys at pi/4: {all}; diff at alpha = pi/2: {} single (basis change RY(0) merges away)",
            endpoint.single
        ),
    )
}

fn full_budget() -> (bool, String) {
    let f = fidelity_for_counts(&ErrorBudget::default(), 19, 5).unwrap();
    ((f - 0.869).abs() <= 0.001, format!("0.998^19 x MS product = {f:.4} (target 0.869 +- 0.001)"))
}

fn eta_budget() -> (bool, String) {
    let f = fidelity_for_counts(&ErrorBudget::default(), 8, 1).unwrap();
    ((f - 0.966).abs() <= 0.001, format!("0.998^8 x 0.982 = {f:.4} (target 0.966 +- 0.001)"))
}

fn bell_estimates() -> (bool, String) {
    let a = bell_fidelity_estimate(0.891, 0.812);
    let b = bell_fidelity_estimate(0.955, 0.935);
    ((a - 0.8515).abs() < 1e-12 && (b - 0.945).abs() < 1e-12, format!("{a} and {b} (want 0.8515 and 0.945)"))
}

fn depolarizing_arithmetic() -> (bool, String) {
    let p = undisturbed_probability(0.05, 8);
    let s = eta_state(0.6).into_mixed();
    let (l, m) = (NoiseModel::new(0.05).unwrap(), NoiseModel::new(0.12).unwrap());
    let twice = cvqc::noise::apply_global(&cvqc::noise::apply_global(&s, &l).unwrap(), &m).unwrap();
    let once = cvqc::noise::apply_global(&s, &l.compose(&m)).unwrap();
    let dev = twice.density_matrix().iter().zip(once.density_matrix()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    ((p - 0.6634).abs() < 5e-5 && dev < 1e-10, format!("(1-0.05)^8 = {p:.4}; composition deviation {dev:.1e} (< 1e-10)"))
}

fn rejection_structure() -> (bool, String) {
    let mut ideal_max: f64 = 0.0;
    for alpha in grid(9, 0.0, FRAC_PI_2) {
        for keys in KEYS {
            let s = exact_round_stats(alpha, keys, 0.0).unwrap();
            ideal_max = ideal_max.max(s.test_reject).max(s.measure_reject);
        }
    }
    let mut ordered = true;
    let mut at_zero = [0.0; 4];
    for alpha in grid(9, 0.0, FRAC_PI_2) {
        let p: Vec<f64> = KEYS.iter().map(|&k| exact_round_stats(alpha, k, 0.05).unwrap().measure_reject).collect();
        ordered &= p[0] == 0.0 && p[1] >= p[0] && p[2] >= p[0] && p[3] >= p[1] && p[3] >= p[2];
        if alpha == 0.0 {
            at_zero.copy_from_slice(&p);
        }
    }
    (
        ideal_max == 0.0 && ordered,
        format!("max ideal rejection {ideal_max}; lambda 0.05 measure rates at alpha 0 {at_zero:.5?}; ordering on 9 angles: {ordered}"),
    )
}

fn oracle_equivalence() -> (bool, String) {
    let mut exact_dev: f64 = 0.0;
    let mut worst_tv: f64 = 0.0;
    for (i, alpha) in grid(9, 0.0, FRAC_PI_2).into_iter().enumerate() {
        let shots = 10_000;
        let est = cvqc::protocol::estimate_expectations(&SessionConfig::new(problem(alpha, Variant::P0), shots, 0.0, 900 + i as u64))
            .unwrap();
        for (h, keys) in KEYS.into_iter().enumerate() {
            let want = born(alpha, keys);
            let d = exact_round_stats(alpha, keys, 0.0).unwrap().decoded;
            let got = [d[0][0], d[0][1], d[1][0], d[1][1]];
            exact_dev = exact_dev.max(got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            let c = est.tallies[h].counts;
            let sampled = [c[0][0], c[0][1], c[1][0], c[1][1]];
            let tv = sampled.iter().zip(&want).map(|(n, p)| (n / shots as f64 - p).abs()).sum::<f64>() / 2.0;
            worst_tv = worst_tv.max(tv);
        }
    }
    let mut worst_z: f64 = 0.0;
    for (alpha, seed) in [(0.0, 71u64), (0.5, 72), (1.2, 73)] {
        let stats = extended_protocol(&ExtendedConfig::new(problem(alpha, Variant::P0), 100_000, 0.0, seed)).unwrap();
        let a = stats.effective_alpha;
        let h = build_fixed_h(&problem(a, Variant::P0));
        let target = (1.0 + h.expectation(&eta_state(a)).unwrap() / h.l1_norm()) / 2.0;
        let sigma = (target * (1.0 - target) / stats.r_count as f64).sqrt();
        worst_z = worst_z.max((stats.r_est - target).abs() / sigma);
    }
    (
        exact_dev < 1e-10 && worst_tv < 0.05 && worst_z < 3.0,
        format!("analytic max |dp| {exact_dev:.1e}; sampled max TV {worst_tv:.4} (< 0.05); r_est max deviation {worst_z:.2} sigma (< 3)"),
    )
}

fn protocol_integrity() -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let common = ["verify", "--alpha", "0.5", "--n-terms", "500", "--lambda", "0.05", "--seed", "99"];
    let run = |extra: &[&str]| Command::new(BIN).args(common).args(extra).output().unwrap().status.success();
    let prover = format!("exec:{BIN} prover --lambda 0.05 --seed 99");
    let ok = run(&["--transcript", &path("a.json"), "--capture", &path("a.cap")])
        && run(&["--prover", &prover, "--transcript", &path("b.json"), "--capture", &path("b.cap")]);
    if !ok {
        return (false, "verify run failed".into());
    }
    let same = std::fs::read(path("a.json")).unwrap() == std::fs::read(path("b.json")).unwrap();
    let captured = std::fs::read_to_string(path("b.cap")).unwrap();
    let sidecar = std::fs::read_to_string(dir.path().join("b.json.sidecar.json")).unwrap_or_default();
    let leaks: Vec<&str> = ["decoded", "preimage", "trapdoor", "effective_alpha", "sidecar"]
        .into_iter()
        .filter(|w| captured.contains(w))
        .collect();
    let public_only = captured.lines().all(|l| {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        v.as_object().unwrap().keys().all(|k| ["type", "alpha", "variant", "k1", "k2", "round", "verdict", "reason"].contains(&k.as_str()))
    });
    (
        same && leaks.is_empty() && public_only && sidecar.contains("decoded"),
        format!(
            "transcripts identical: {same}; {} prover-bound lines, private words found {leaks:?}, sidecar {} bytes kept local",
            captured.lines().count(),
            sidecar.len()
        ),
    )
}

#[test]
fn acceptance() {
    let results = [
        criterion("1", "ideal curve E = sin^2 alpha", Some(10.0), ideal_curve),
        criterion("2", "spectral bound and threshold separation", Some(5.0), spectral_bound),
        criterion("3", "P0 yes-region edge at lambda 0.05", Some(30.0), noise_threshold),
        criterion("4a", "P1 verifies only at pi/2 at lambda 0.05", Some(30.0), second_variant_at_five_percent),
        criterion("4b", "P1 verified interval at lambda 0.035", Some(30.0), second_variant_at_reduced_noise),
        criterion("5a", "native gate counts", None, gate_counts),
        criterion("5b", "full-circuit fidelity budget", None, full_budget),
        criterion("5c", "eta-only fidelity budget", None, eta_budget),
        criterion("5d", "Bell fidelity estimates", None, bell_estimates),
        criterion("6", "depolarizing arithmetic", None, depolarizing_arithmetic),
        criterion("7", "rejection statistics structure", None, rejection_structure),
        criterion("8", "decoded statistics and r_est oracles", None, oracle_equivalence),
        criterion("9", "split-process transcripts and no-leak", None, protocol_integrity),
        criterion("10", "hardware data points", None, || {
            (true, "no desk target; covered by the model-curve and arithmetic criteria".into())
        }),
    ];
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
