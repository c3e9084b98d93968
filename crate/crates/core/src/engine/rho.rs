//! Monte-Carlo drivers: `ρ(s)` estimation, prepared-state energies and the
//! attenuation-normalised overlap used for variance studies.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use super::circuits::apply_sampled;
use super::hadamard::{analytic_amplitude, build_program, program_shots, HadamardContext, Part};
use super::noise::NoiseModel;
use super::shots::{mean_and_error, parity_filter, AmplitudeEstimate, FilterPolicy, ShotRecord};
use super::statevector::StateVector;
use super::EngineError;
use crate::chem::{BasisState, HamiltonianModel};
use crate::rng::stream_rng;
use crate::sampler::{sample_adiabatic, sample_constant_model, SampledCircuit, SamplerConfig, Variant};
use crate::schedule::AdiabaticPath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    /// Amplitude of each sampled triple computed directly, one Bernoulli draw per shot.
    #[default]
    Analytic,
    /// Native-gate Hadamard test with trajectory noise.
    Circuit,
}

impl ExecutionMode {
    pub fn name(self) -> &'static str {
        match self {
            ExecutionMode::Analytic => "analytic",
            ExecutionMode::Circuit => "circuit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "analytic" => Some(ExecutionMode::Analytic),
            "circuit" => Some(ExecutionMode::Circuit),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RhoSetup {
    pub model: Arc<HamiltonianModel>,
    pub ctx: HadamardContext,
    pub path: AdiabaticPath,
    pub total_time: f64,
    /// Gate angle of the adiabatic circuits.
    pub tau: f64,
    /// Gate angle of the central evolution.
    pub central_tau: f64,
    pub variant: Variant,
    pub noise: NoiseModel,
    pub policy: FilterPolicy,
    pub mode: ExecutionMode,
    pub shots_per_circuit: usize,
}

impl RhoSetup {
    /// Noiseless analytic defaults with one shot per circuit.
    pub fn new(
        model: Arc<HamiltonianModel>,
        initial: BasisState,
        path: AdiabaticPath,
        total_time: f64,
        tau: f64,
    ) -> Result<Self, EngineError> {
        let ctx = HadamardContext::new(&model, initial)?;
        Ok(RhoSetup {
            model,
            ctx,
            path,
            total_time,
            tau,
            central_tau: tau,
            variant: Variant::Background,
            noise: NoiseModel::off(),
            policy: FilterPolicy::DiscardParityViolations,
            mode: ExecutionMode::Analytic,
            shots_per_circuit: 1,
        })
    }

    fn sampler(&self) -> SamplerConfig {
        SamplerConfig { tau: self.tau, total_time: self.total_time, variant: self.variant }
    }

    fn adiabatic_pair<R: Rng + ?Sized>(&self, rng: &mut R, seed: u64) -> Result<(SampledCircuit, SampledCircuit), EngineError> {
        let cfg = self.sampler();
        let forward = sample_adiabatic(&self.model, &self.path, &cfg, rng, seed)?;
        let backward = sample_adiabatic(&self.model, &self.path, &cfg, rng, seed)?;
        Ok((forward, backward))
    }

    fn triple<R: Rng + ?Sized>(
        &self,
        s: f64,
        rng: &mut R,
        seed: u64,
    ) -> Result<(SampledCircuit, SampledCircuit, Option<SampledCircuit>), EngineError> {
        let (forward, backward) = self.adiabatic_pair(rng, seed)?;
        let central = if s > 0.0 {
            Some(sample_constant_model(&self.model, s, self.central_tau, -1.0, self.variant, rng, seed)?)
        } else {
            None
        };
        Ok((forward, backward, central))
    }

    /// Mean native two-qubit gate count of the Hadamard-test circuits drawn
    /// by [`RhoSetup::records`] with the same `seed`.
    pub fn mean_two_qubit_gates(&self, s: f64, circuits: usize, seed: u64) -> Result<f64, EngineError> {
        if circuits == 0 {
            return Err(EngineError::InvalidArgument("need at least one circuit".into()));
        }
        let counts: Vec<usize> = (0..circuits)
            .into_par_iter()
            .map(|c| -> Result<usize, EngineError> {
                let mut rng = stream_rng(seed, c as u64);
                let (forward, backward, central) = self.triple(s, &mut rng, seed)?;
                Ok(build_program(&self.ctx, &forward, &backward, central.as_ref(), 0.0)?.two_qubit_count())
            })
            .collect::<Result<_, _>>()?;
        Ok(counts.iter().sum::<usize>() as f64 / circuits as f64)
    }

    /// Shots for `⟨ini|A† e^{is(E−H)} A|ini⟩`, with `E` in the reported frame.
    pub fn records(&self, energy: f64, s: f64, part: Part, circuits: usize, seed: u64) -> Result<Vec<ShotRecord>, EngineError> {
        if self.shots_per_circuit == 0 {
            return Err(EngineError::InvalidArgument("shots per circuit must be positive".into()));
        }
        let phase = s * (self.model.simulated_energy(energy) - self.model.constant);
        let per_circuit = |c: usize| -> Result<Vec<ShotRecord>, EngineError> {
            let mut rng = stream_rng(seed, c as u64);
            let (forward, backward, central) = self.triple(s, &mut rng, seed)?;
            let lambda = forward.attenuation * backward.attenuation * central.as_ref().map_or(1.0, |c| c.attenuation);
            let weight = 1.0 / lambda;
            match self.mode {
                ExecutionMode::Analytic => {
                    let amp = analytic_amplitude(&self.ctx, &forward, &backward, central.as_ref(), phase)?;
                    let p_plus = 0.5 * (1.0 + part.of(amp));
                    Ok((0..self.shots_per_circuit)
                        .map(|_| {
                            let a = if rng.random::<f64>() < p_plus { 1 } else { -1 };
                            self.ctx.record(a, self.ctx.initial.bits, weight)
                        })
                        .collect())
                }
                ExecutionMode::Circuit => {
                    let program = build_program(&self.ctx, &forward, &backward, central.as_ref(), phase)?;
                    Ok(program_shots(&self.ctx, &program, self.noise, part, self.shots_per_circuit, weight, &mut rng))
                }
            }
        };
        let batches: Vec<Vec<ShotRecord>> = (0..circuits).into_par_iter().map(per_circuit).collect::<Result<_, _>>()?;
        Ok(batches.into_iter().flatten().collect())
    }
}

/// `ρ(s)`: the imaginary part of `⟨ini|A† e^{is(E−H)} A|ini⟩` from
/// `circuits` sampled triples.
pub fn estimate_rho(setup: &RhoSetup, energy: f64, s: f64, circuits: usize, seed: u64) -> Result<AmplitudeEstimate, EngineError> {
    let records = setup.records(energy, s, Part::Imag, circuits, seed)?;
    parity_filter(&records, setup.policy)
}

/// Estimate of `⟨ini|A†A|ini⟩ = 1` whose single-shot variance is `λ⁻² − 1`
/// in analytic mode.
pub fn norm_check(setup: &RhoSetup, circuits: usize, seed: u64) -> Result<AmplitudeEstimate, EngineError> {
    let records = setup.records(0.0, 0.0, Part::Real, circuits, seed)?;
    parity_filter(&records, setup.policy)
}

/// Energy of the prepared state from independent pairs of sampled
/// circuits: `λ⁻²·Re⟨ini|U₂† H U₁|ini⟩`, reported frame.
pub fn tetris_energy(setup: &RhoSetup, circuits: usize, seed: u64) -> Result<(f64, f64), EngineError> {
    let diag = setup.ctx.background_diag.as_slice();
    let init = setup.ctx.initial;
    let h = &setup.model.full;
    let values: Vec<f64> = (0..circuits)
        .into_par_iter()
        .map(|c| -> Result<f64, EngineError> {
            let mut rng = stream_rng(seed, c as u64);
            let (u1, u2) = setup.adiabatic_pair(&mut rng, seed)?;
            let mut a = StateVector::basis(init.qubits, init.bits);
            apply_sampled(&u1, &mut a, Some(diag))?;
            let mut b = StateVector::basis(init.qubits, init.bits);
            apply_sampled(&u2, &mut b, Some(diag))?;
            let m: Complex64 = h.matrix_element(b.amplitudes(), a.amplitudes());
            Ok(m.re / (u1.attenuation * u2.attenuation))
        })
        .collect::<Result<_, _>>()?;
    let (mean, err) = mean_and_error(&values);
    Ok((setup.model.reported_energy(mean), err))
}
