use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tetris_core::chem::{build_model, initial_state, model_from_fcidump, BackgroundRule, HamiltonianModel, ModelOptions};
use tetris_core::engine::hadamard::{build_program, program_shots};
use tetris_core::engine::{
    analytic_amplitude, hadamard_test_shot, sampled_unitary, ControlLayout, HadamardContext, NoiseModel, Part,
};
use tetris_core::pauli::PauliSum;
use tetris_core::sampler::{sample_adiabatic, sample_constant_model, SamplerConfig, Variant};
use tetris_core::schedule::AdiabaticPath;

fn toy(rule: BackgroundRule, layout: ControlLayout) -> HamiltonianModel {
    let h = PauliSum::from_signed(
        3,
        [
            (-0.3, "III"),
            (0.4, "ZII"),
            (-0.25, "IZI"),
            (0.15, "IIZ"),
            (0.2, "ZZI"),
            (-0.1, "IZZ"),
            (0.35, "XXI"),
            (-0.2, "IYY"),
            (0.12, "XZX"),
            (0.05, "ZZZ"),
        ]
        .iter()
        .map(|(c, s)| (*c, s.parse().unwrap())),
    )
    .unwrap();
    let opts = ModelOptions { rule, layout, reduce: false, ..ModelOptions::default() };
    build_model(&h, Some(1), opts).unwrap()
}

fn h2() -> HamiltonianModel {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/h2_1p11.fcidump")).unwrap();
    model_from_fcidump(&text, ModelOptions::default()).unwrap()
}

fn dense_amplitude(
    model: &HamiltonianModel,
    init: u64,
    f: &tetris_core::sampler::SampledCircuit,
    b: &tetris_core::sampler::SampledCircuit,
    c: Option<&tetris_core::sampler::SampledCircuit>,
    phase: f64,
) -> Complex64 {
    let u2 = sampled_unitary(f).unwrap();
    let u1 = sampled_unitary(b).unwrap();
    let dim = 1 << model.qubit_count();
    let uc = c.map_or_else(|| DMatrix::identity(dim, dim), |c| sampled_unitary(c).unwrap());
    let m = u1.adjoint() * uc * u2;
    m[(init as usize, init as usize)] * Complex64::from_polar(1.0, phase)
}

#[test]
fn compiled_test_matches_dense_amplitude() {
    let cases = [
        (toy(BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder), Variant::Background),
        (toy(BackgroundRule::ZWeightLe2, ControlLayout::SharedLadder), Variant::Background),
        (toy(BackgroundRule::ZWeightLe1, ControlLayout::Composed), Variant::Background),
        (toy(BackgroundRule::ZWeightLe2, ControlLayout::Composed), Variant::Base),
        (h2(), Variant::Background),
        (h2(), Variant::Base),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (model, variant) in cases {
        let init = initial_state(&model, model.electrons.unwrap()).unwrap().state;
        let ctx = HadamardContext::new(&model, init).unwrap();
        let cfg = SamplerConfig { tau: 0.4, total_time: 1.3, variant };
        for trial in 0..6 {
            let f = sample_adiabatic(&model, &AdiabaticPath::Quadratic, &cfg, &mut rng, 0).unwrap();
            let b = sample_adiabatic(&model, &AdiabaticPath::Quadratic, &cfg, &mut rng, 0).unwrap();
            let c = sample_constant_model(&model, 0.9, 0.3, -1.0, variant, &mut rng, 0).unwrap();
            let central = if trial % 2 == 0 { Some(&c) } else { None };
            let phase = 0.37 * trial as f64;
            let want = dense_amplitude(&model, init.bits, &f, &b, central, phase);
            let direct = analytic_amplitude(&ctx, &f, &b, central, phase).unwrap();
            let program = build_program(&ctx, &f, &b, central, phase).unwrap();
            let compiled = program.noiseless_amplitude();
            assert!((direct - want).norm() < 1e-10, "{direct} vs {want}");
            assert!((compiled - want).norm() < 1e-10, "{:?} {variant:?}: {compiled} vs {want}", model.rule);
        }
    }
}

#[test]
fn identity_circuits_give_deterministic_outcomes() {
    let model = toy(BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder);
    let init = initial_state(&model, 1).unwrap().state;
    let ctx = HadamardContext::new(&model, init).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = SamplerConfig { tau: 0.4, total_time: 0.0, variant: Variant::Background };
    let f = sample_adiabatic(&model, &AdiabaticPath::Linear, &cfg, &mut rng, 0).unwrap();
    assert!(f.events.is_empty());
    for _ in 0..200 {
        let r = hadamard_test_shot(&ctx, &f, &f, None, 0.0, NoiseModel::off(), Part::Real, &mut rng).unwrap();
        assert_eq!(r.ancilla, 1);
        assert!(r.parity_ok());
        let r = hadamard_test_shot(
            &ctx,
            &f,
            &f,
            None,
            std::f64::consts::FRAC_PI_2,
            NoiseModel::off(),
            Part::Imag,
            &mut rng,
        )
        .unwrap();
        assert_eq!(r.ancilla, 1);
    }
}

#[test]
fn shot_statistics_match_amplitude() {
    let model = Arc::new(h2());
    let init = initial_state(&model, 2).unwrap().state;
    let ctx = HadamardContext::new(&model, init).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = SamplerConfig { tau: 0.3, total_time: 2.0, variant: Variant::Background };
    let f = sample_adiabatic(&model, &AdiabaticPath::Linear, &cfg, &mut rng, 0).unwrap();
    let b = sample_adiabatic(&model, &AdiabaticPath::Linear, &cfg, &mut rng, 0).unwrap();
    let program = build_program(&ctx, &f, &b, None, 0.8).unwrap();
    let amp = program.noiseless_amplitude();
    for part in [Part::Real, Part::Imag] {
        let n = 40000;
        let shots = program_shots(&ctx, &program, NoiseModel::off(), part, n, 1.0, &mut rng);
        assert!(shots.iter().all(|s| s.parity_ok()));
        let mean = shots.iter().map(|s| s.ancilla as f64).sum::<f64>() / n as f64;
        assert!((mean - part.of(amp)).abs() < 5.0 / (n as f64).sqrt(), "{mean} vs {amp}");
    }
}

#[test]
fn noise_flags_parity_violations() {
    let model = Arc::new(h2());
    let init = initial_state(&model, 2).unwrap().state;
    let ctx = HadamardContext::new(&model, init).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = SamplerConfig { tau: 0.2, total_time: 3.0, variant: Variant::Background };
    let f = sample_adiabatic(&model, &AdiabaticPath::Linear, &cfg, &mut rng, 0).unwrap();
    let b = sample_adiabatic(&model, &AdiabaticPath::Linear, &cfg, &mut rng, 0).unwrap();
    let program = build_program(&ctx, &f, &b, None, 0.0).unwrap();
    let noise = NoiseModel::trajectory(0.05).unwrap();
    let shots = program_shots(&ctx, &program, noise, Part::Real, 2000, 1.0, &mut rng);
    assert!(shots.iter().any(|s| !s.parity_ok()));
}
