use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tetris_core::chem::*;
use tetris_core::engine::*;
use tetris_core::pauli::{PauliString, PauliSum};
use tetris_core::rng::stream_rng;
use tetris_core::sampler::*;
use tetris_core::schedule::*;

type M = DMatrix<Complex64>;

fn h2() -> Arc<HamiltonianModel> {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/h2_1p11.fcidump")).unwrap();
    Arc::new(model_from_fcidump(&text, ModelOptions::default()).unwrap())
}

fn random_model(seed: u64, qubits: usize, terms: usize) -> Arc<HamiltonianModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letters = ['I', 'X', 'Y', 'Z'];
    let mut items = Vec::new();
    while items.len() < terms {
        let s: String = (0..qubits).map(|_| letters[rng.random_range(0..4)]).collect();
        let p: PauliString = s.parse().unwrap();
        if p.is_identity() || items.iter().any(|(_, q): &(f64, PauliString)| *q == p) {
            continue;
        }
        items.push((rng.random_range(-1.0..1.0), p));
    }
    let h = PauliSum::from_signed(qubits, items).unwrap();
    Arc::new(build_model(&h, None, ModelOptions { reduce: false, ..Default::default() }).unwrap())
}

fn dense_exp(h: &PauliSum, t: f64) -> M {
    let m = h.dense(8).unwrap();
    let eig = m.symmetric_eigen();
    let d = M::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, t * e)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

fn reference_unitary(schedule: &HamiltonianSchedule) -> M {
    let n = schedule.qubit_count();
    let dim = 1usize << n;
    let mut m = M::zeros(dim, dim);
    for col in 0..dim {
        let v = run_exact_reference(schedule, &StateVector::basis(n, col as u64), OdeOptions::default()).unwrap();
        for (row, a) in v.amplitudes().iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    m
}

#[test]
fn constant_path_matches_matrix_exponential() {
    let model = random_model(3, 3, 6);
    let schedule = HamiltonianSchedule::weighted(model.clone(), AdiabaticPath::Constant, 1.7).unwrap();
    let got = reference_unitary(&schedule);
    let want = dense_exp(&model.full, 1.7);
    assert!((got - want).norm() < 1e-8);
}

#[test]
fn sampled_mean_is_unbiased_for_both_variants() {
    let model = random_model(11, 3, 5);
    let path = AdiabaticPath::Linear;
    let t = 2.0;
    let schedule = HamiltonianSchedule::weighted(model.clone(), path.clone(), t).unwrap();
    let exact = reference_unitary(&schedule);
    let n = 20_000;
    for variant in [Variant::Base, Variant::Background] {
        let tau = 1.0 / (path.zeta() * t * model.mu_i());
        let cfg = SamplerConfig { tau, total_time: t, variant };
        let mut sum = M::zeros(8, 8);
        let mut sq = DMatrix::<f64>::zeros(8, 8);
        let mut lambda = 0.0;
        for k in 0..n {
            let mut rng = stream_rng(5, k);
            let c = sample_adiabatic(&model, &path, &cfg, &mut rng, 5).unwrap();
            lambda = c.attenuation;
            let u = sampled_unitary(&c).unwrap() / Complex64::new(c.attenuation, 0.0);
            sq += u.map(|z| z.norm_sqr());
            sum += u;
        }
        let mean = sum / Complex64::new(n as f64, 0.0);
        assert!((lambda - attenuation(&model, &path, &cfg)).abs() < 1e-15);
        for i in 0..8 {
            for j in 0..8 {
                let var = sq[(i, j)] / n as f64 - mean[(i, j)].norm_sqr();
                let sigma = (var / n as f64).sqrt();
                let err = (mean[(i, j)] - exact[(i, j)]).norm();
                assert!(err < 4.0 * sigma + 1e-9, "{variant:?} ({i},{j}): {err} vs σ {sigma}");
            }
        }
    }
}

#[test]
fn trotter_error_shrinks_with_steps() {
    let model = random_model(21, 3, 6);
    let schedule = HamiltonianSchedule::weighted(model, AdiabaticPath::Linear, 3.0).unwrap();
    let psi0 = StateVector::basis(3, 0b101);
    let exact = run_exact_reference(&schedule, &psi0, OdeOptions::default()).unwrap();
    let err = |steps| {
        let v = run_trotter_asp(&schedule, steps, &psi0, None).unwrap();
        (1.0 - exact.inner(&v).norm()).abs()
    };
    let (e10, e40, e160) = (err(10), err(40), err(160));
    assert!(e40 < e10 && e160 < e40, "{e10} {e40} {e160}");
    assert!(e160 < 1e-3);
}

fn asp_error(model: &Arc<HamiltonianModel>, path: AdiabaticPath, t: f64) -> f64 {
    let init = initial_state(model, 2).unwrap().state;
    let (egs, _) = model.sector_ground_state(&init, 12).unwrap();
    let schedule = HamiltonianSchedule::weighted(model.clone(), path, t).unwrap();
    let v = run_exact_reference(&schedule, &StateVector::basis(4, init.bits), OdeOptions::default()).unwrap();
    model.full.expectation(v.amplitudes()) - egs
}

/// Largest error over a window of times; the error oscillates in `T`.
fn envelope(model: &Arc<HamiltonianModel>, path: AdiabaticPath, lo: f64, hi: f64) -> f64 {
    (0..=16).map(|k| asp_error(model, path.clone(), lo + (hi - lo) * k as f64 / 16.0)).fold(0.0, f64::max)
}

#[test]
fn adiabatic_error_envelope_decays_faster_on_quadratic_path() {
    let model = h2();
    for path in [AdiabaticPath::Linear, AdiabaticPath::Quadratic] {
        assert!(asp_error(&model, path.clone(), 15.0) > -1e-9);
        let early = envelope(&model, path.clone(), 2.0, 4.0);
        let late = envelope(&model, path.clone(), 16.0, 32.0);
        assert!(late < early / 10.0, "{path:?}: {early} -> {late}");
    }
    let lin = envelope(&model, AdiabaticPath::Linear, 16.0, 32.0);
    let quad = envelope(&model, AdiabaticPath::Quadratic, 16.0, 32.0);
    assert!(quad < lin, "{quad} vs {lin}");
}

#[test]
fn zero_time_reference_is_the_initial_energy() {
    let model = h2();
    let init = initial_state(&model, 2).unwrap().state;
    let schedule = HamiltonianSchedule::weighted(model.clone(), AdiabaticPath::Linear, 0.0).unwrap();
    let v = run_exact_reference(&schedule, &StateVector::basis(4, init.bits), OdeOptions::default()).unwrap();
    let e = model.full.expectation(v.amplitudes());
    assert!((e - model.full.diagonal_entry(init.bits)).abs() < 1e-12);
}

#[test]
fn sampled_energy_matches_reference() {
    let model = h2();
    let init = initial_state(&model, 2).unwrap().state;
    let t = 5.0;
    let schedule = HamiltonianSchedule::weighted(model.clone(), AdiabaticPath::Linear, t).unwrap();
    let v = run_exact_reference(&schedule, &StateVector::basis(4, init.bits), OdeOptions::default()).unwrap();
    let want = model.reported_energy(model.full.expectation(v.amplitudes()));
    let tau = 1.0 / (AdiabaticPath::Linear.zeta() * t * model.mu_i());
    let setup = RhoSetup::new(model, init, AdiabaticPath::Linear, t, tau).unwrap();
    let (e, err) = tetris_energy(&setup, 20_000, 9).unwrap();
    assert!((e - want).abs() < 4.0 * err, "{e} ± {err} vs {want}");
}

#[test]
fn analytic_and_circuit_modes_agree() {
    let model = h2();
    let init = initial_state(&model, 2).unwrap().state;
    let mut setup = RhoSetup::new(model.clone(), init, AdiabaticPath::Linear, 4.0, 0.4).unwrap();
    setup.shots_per_circuit = 4;
    let e = -1.05;
    let a = estimate_rho(&setup, e, 5.0, 3000, 1).unwrap();
    setup.mode = ExecutionMode::Circuit;
    let c = estimate_rho(&setup, e, 5.0, 3000, 2).unwrap();
    assert_eq!(c.shots_filtered, 0);
    let sigma = (a.variance() + c.variance()).sqrt();
    assert!((a.mean - c.mean).abs() < 4.0 * sigma, "{a:?} {c:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tabulated_inverse_round_trips(mids in prop::collection::vec(0.01f64..3.0, 1..5), v in 0.0f64..1.0) {
        let n = mids.len() + 1;
        let mut pts = vec![(0.0, 0.0)];
        for (k, w) in mids.iter().enumerate() {
            pts.push(((k + 1) as f64 / n as f64, *w));
        }
        pts.push((1.0, 1.0));
        let path = AdiabaticPath::Tabulated(TabulatedPath::new(&pts).unwrap());
        let target = v * path.zeta();
        let u = path.z_inverse(target);
        prop_assert!((path.z(u) - target).abs() < 1e-10);
    }

    #[test]
    fn sampled_events_stay_in_time_order(seed in any::<u64>(), tau in 0.05f64..1.5, t in 0.0f64..6.0) {
        let model = random_model(seed % 7, 3, 5);
        let cfg = SamplerConfig { tau, total_time: t, variant: Variant::Background };
        let mut rng = stream_rng(seed, 0);
        let c = sample_adiabatic(&model, &AdiabaticPath::Quadratic, &cfg, &mut rng, seed).unwrap();
        prop_assert!(c.events.windows(2).all(|w| w[0].time <= w[1].time));
        prop_assert!(c.events.iter().all(|e| e.time >= 0.0 && e.time <= t && e.angle.abs() == tau));
        prop_assert!(c.attenuation > 0.0 && c.attenuation <= 1.0);
    }

    #[test]
    fn sampled_circuits_conserve_spin_parity(seed in any::<u64>()) {
        let model = h2();
        let cfg = SamplerConfig { tau: 0.3, total_time: 6.0, variant: Variant::Background };
        let mut rng = stream_rng(seed, 0);
        let c = sample_adiabatic(&model, &AdiabaticPath::Linear, &cfg, &mut rng, seed).unwrap();
        let init = initial_state(&model, 2).unwrap().state;
        let mut v = StateVector::basis(4, init.bits);
        apply_sampled(&c, &mut v, None).unwrap();
        let p0 = model.partition.parities(init.bits);
        for (b, a) in v.amplitudes().iter().enumerate() {
            if a.norm() > 1e-12 {
                prop_assert_eq!(model.partition.parities(b as u64), p0);
            }
        }
    }
}
