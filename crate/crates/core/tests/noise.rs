//! Global depolarizing model: channel algebra, noisy curves and lambda fits.

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;

use cvqc::curve::{read_csv, write_csv, CurveMode, COLUMNS, SCHEMA_LINE};
use cvqc::hamiltonian::{DecisionProblem, Variant};
use cvqc::noise::{
    apply_global, apply_global_sampled, compose_rates, curve_point, energy_crossing, fit_lambda, noisy_energy_curve,
    undisturbed_probability, NoiseError, NoiseModel,
};
use cvqc::protocol::exact_energy;
use cvqc::qsim::QuantumState;
use cvqc::rng::substream;

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn bloch_state(x: f64, y: f64, z: f64) -> QuantumState {
    let rho = vec![
        C64::new((1.0 + z) / 2.0, 0.0),
        C64::new(x / 2.0, -y / 2.0),
        C64::new(x / 2.0, y / 2.0),
        C64::new((1.0 - z) / 2.0, 0.0),
    ];
    QuantumState::from_density(rho).unwrap()
}

fn bloch_vector(s: &QuantumState) -> [f64; 3] {
    let r = s.density_matrix();
    [2.0 * r[2].re, 2.0 * r[2].im, (r[0] - r[3]).re]
}

fn arb_bloch() -> impl Strategy<Value = [f64; 3]> {
    (0.0..=1.0f64, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(r, th, ph)| {
        [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]
    })
}

fn arb_two_qubit_state() -> impl Strategy<Value = QuantumState> {
    proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 4).prop_filter_map("non-zero", |v| {
        let amps: Vec<C64> = v.into_iter().map(|(a, b)| C64::new(a, b)).collect();
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (n > 1e-3).then(|| QuantumState::from_amplitudes(amps.iter().map(|a| a / n).collect()).unwrap().into_mixed())
    })
}

proptest! {
    #[test]
    fn depolarizing_contracts_the_bloch_vector(b in arb_bloch(), l in 0.0..=1.0f64, m in 0.0..=1.0f64) {
        let s = bloch_state(b[0], b[1], b[2]);
        let twice = apply_global(&apply_global(&s, &NoiseModel::new(l).unwrap()).unwrap(), &NoiseModel::new(m).unwrap()).unwrap();
        let shrink = (1.0 - l) * (1.0 - m);
        let got = bloch_vector(&twice);
        for i in 0..3 {
            prop_assert!((got[i] - shrink * b[i]).abs() < 1e-10);
        }
        let once = apply_global(&s, &NoiseModel::new(compose_rates(l, m)).unwrap()).unwrap();
        let a = once.density_matrix();
        let c = twice.density_matrix();
        prop_assert!(a.iter().zip(&c).all(|(x, y)| (x - y).norm() < 1e-10));
    }

    #[test]
    fn composition_law_on_two_qubits(s in arb_two_qubit_state(), l in 0.0..=1.0f64, m in 0.0..=1.0f64) {
        let (ml, mm) = (NoiseModel::new(l).unwrap(), NoiseModel::new(m).unwrap());
        let twice = apply_global(&apply_global(&s, &ml).unwrap(), &mm).unwrap();
        let once = apply_global(&s, &ml.compose(&mm)).unwrap();
        let dev = twice.density_matrix().iter().zip(once.density_matrix()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-10, "deviation {}", dev);
    }

    #[test]
    fn rates_outside_the_unit_interval_are_refused(l in prop_oneof![-10.0..-1e-9f64, 1.0 + 1e-9..10.0f64]) {
        prop_assert!(matches!(NoiseModel::new(l), Err(NoiseError::LambdaOutOfRange(_))));
    }
}

#[test]
fn maximally_mixed_state_is_fixed() {
    for l in [0.0, 0.05, 0.5, 1.0] {
        let out = bloch_vector(&apply_global(&bloch_state(0.0, 0.0, 0.0), &NoiseModel::new(l).unwrap()).unwrap());
        assert!(out.iter().all(|v| v.abs() < 1e-10));
    }
}

#[test]
fn zero_rate_is_identity() {
    let s = QuantumState::from_amplitudes(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
    let out = apply_global(&s, &NoiseModel::new(0.0).unwrap()).unwrap();
    assert_eq!(out.density_matrix(), s.density_matrix());
}

#[test]
fn undisturbed_fraction_of_eight_qubits() {
    let p = undisturbed_probability(0.05, 8);
    assert!((p - 0.6634).abs() < 5e-5, "{p}");
    assert_eq!(NoiseModel::new(0.05).unwrap().undisturbed_probability(8), p);

    // Each trajectory keeps the identity Kraus branch with probability 1 - 3l/4.
    let model = NoiseModel::new(0.05).unwrap();
    let zero = QuantumState::zero(8).unwrap();
    let mut rng = substream(7, 0);
    let trials = 20_000;
    let mut clean = 0;
    for _ in 0..trials {
        let (_, picks) = apply_global_sampled(&zero, &model, &mut rng).unwrap();
        assert_eq!(picks.len(), 8);
        if picks.iter().all(|&k| k == 0) {
            clean += 1;
        }
    }
    let want = (1.0f64 - 0.75 * 0.05).powi(8);
    let sigma = (want * (1.0 - want) / trials as f64).sqrt();
    let got = clean as f64 / trials as f64;
    assert!((got - want).abs() < 5.0 * sigma, "{got} vs {want}");
}

#[test]
fn noise_raises_energy_of_a_yes_instance() {
    let model = NoiseModel::new(0.05).unwrap();
    let p = curve_point(Variant::P0, 0.0, &model, CurveMode::Exact, 0, 0).unwrap();
    assert!(p.e_est > 0.0);
    assert!((p.e_est - 0.31394).abs() < 1e-4, "{}", p.e_est);
}

#[test]
fn offset_is_positive_and_roughly_flat() {
    let model = NoiseModel::new(0.05).unwrap();
    let curve = noisy_energy_curve(Variant::P0, &model, &grid(41, 0.0, FRAC_PI_2), CurveMode::Exact, 0, 0).unwrap();
    let offsets: Vec<f64> = curve.iter().map(|p| p.e_est - p.alpha.sin().powi(2)).collect();
    assert!(offsets.iter().all(|&o| o > 0.0));
    let spread = offsets.iter().cloned().fold(f64::MIN, f64::max) - offsets.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 0.1, "spread {spread}");
}

#[test]
fn yes_region_edge_is_a_threshold_crossing() {
    let edge = energy_crossing(Variant::P0, 0.05, 0.4, 0.0, std::f64::consts::FRAC_PI_4).unwrap().unwrap();
    let e = |a: f64| exact_energy(&DecisionProblem::new(a, Variant::P0).unwrap(), 0.05).unwrap().energy;
    assert!((e(edge) - 0.4).abs() < 1e-9);
    assert!(e(edge - 1e-3) < 0.4 && e(edge + 1e-3) > 0.4);
    // The exact curve is increasing on [0, pi/4], so the crossing is unique.
    let scan = grid(200, 0.0, std::f64::consts::FRAC_PI_4);
    assert!(scan.windows(2).all(|w| e(w[0]) < e(w[1])));
    assert_eq!(energy_crossing(Variant::P0, 0.05, 2.0, 0.0, 1.0).unwrap(), None);
}

#[test]
fn second_variant_near_the_right_angle() {
    let model = NoiseModel::new(0.05).unwrap();
    for f in [0.9, 0.95] {
        let e = curve_point(Variant::P1, f * FRAC_PI_2, &model, CurveMode::Exact, 0, 0).unwrap().e_est;
        assert!(e >= 0.4, "{f} pi/2: {e}");
    }
    let reduced = NoiseModel::new(0.035).unwrap();
    let curve = noisy_energy_curve(Variant::P1, &reduced, &grid(33, 1.25, 1.57), CurveMode::Exact, 0, 0).unwrap();
    assert!(curve.iter().any(|p| p.e_est < 0.4));
}

#[test]
fn fits_recover_lambda_from_exact_curves() {
    let alphas = grid(9, 0.0, FRAC_PI_2);
    for truth in [0.05, 0.0] {
        let obs: Vec<(f64, f64)> = alphas
            .iter()
            .map(|&a| (a, exact_energy(&DecisionProblem::new(a, Variant::P0).unwrap(), truth).unwrap().energy))
            .collect();
        let fit = fit_lambda(&obs, Variant::P0).unwrap();
        assert!((fit - truth).abs() < 1e-3, "truth {truth} fit {fit}");
    }
}

#[test]
fn fit_recovers_lambda_from_a_sampled_curve() {
    let model = NoiseModel::new(0.05).unwrap();
    let alphas = grid(9, 0.0, FRAC_PI_2);
    let curve = noisy_energy_curve(Variant::P0, &model, &alphas, CurveMode::Delegated, 2000, 42).unwrap();
    let obs: Vec<(f64, f64)> = curve.iter().map(|p| (p.alpha, p.e_est)).collect();
    let fit = fit_lambda(&obs, Variant::P0).unwrap();
    assert!((fit - 0.05).abs() < 0.01, "fit {fit}");
}

#[test]
fn fit_needs_three_points() {
    assert!(matches!(fit_lambda(&[], Variant::P0), Err(NoiseError::TooFewPoints { needed: 3, got: 0 })));
    assert!(fit_lambda(&[(0.0, 0.3), (0.1, 0.3)], Variant::P0).is_err());
}

#[test]
fn curve_csv_schema() {
    let model = NoiseModel::new(0.05).unwrap();
    let pts = noisy_energy_curve(Variant::P1, &model, &grid(3, 0.0, 1.0), CurveMode::Delegated, 50, 9).unwrap();
    assert!(pts.iter().all(|p| p.seed == 9 && p.shots == 50));
    let mut buf = Vec::new();
    write_csv(&mut buf, &pts).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(SCHEMA_LINE));
    assert_eq!(lines.next(), Some(COLUMNS.join(",").as_str()));
    assert!(text.contains(",p1,50,9,delegated"));
    assert_eq!(read_csv(buf.as_slice()).unwrap(), pts);
    assert!(read_csv("alpha\n0.1\n".as_bytes()).is_err());

    let exact = noisy_energy_curve(Variant::P0, &model, &[0.3], CurveMode::Exact, 50, 9).unwrap();
    assert_eq!((exact[0].shots, exact[0].seed, exact[0].e_err), (0, 0, 0.0));
}

#[test]
fn sampled_curves_are_reproducible() {
    let model = NoiseModel::new(0.05).unwrap();
    let a = noisy_energy_curve(Variant::P0, &model, &[0.2, 0.9], CurveMode::Delegated, 100, 5).unwrap();
    let b = noisy_energy_curve(Variant::P0, &model, &[0.2, 0.9], CurveMode::Delegated, 100, 5).unwrap();
    assert_eq!(a, b);
    let c = noisy_energy_curve(Variant::P0, &model, &[0.2, 0.9], CurveMode::Delegated, 100, 6).unwrap();
    assert_ne!(a, c);
}
