//! Ancilla Hadamard test for `⟨ini|U₁† e^{iφ} U′ U₂|ini⟩`, compiled to native
//! gates and sampled with Pauli-trajectory noise.
//!
//! `U₁` is controlled on ancilla |0⟩ and `U′U₂` on |1⟩. Background
//! evolution is moved into the interaction picture: each rotation becomes
//! `e^{−iF·H_B} e^{iθP} e^{iF·H_B}`, where only the `H_B` terms anticommuting
//! with `P` need gates and these frame gates act on both branches. The
//! final shared `e^{iT·H_B}` drops out of the overlap, and the residual
//! diagonal of the central evolution is applied as a classical phase
//! conditioned on the measured system bits.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::circuits::apply_sampled;
use super::native::{compile_rotation, Control, ControlLayout, NativeGate};
use super::noise::NoiseModel;
use super::shots::ShotRecord;
use super::statevector::StateVector;
use super::{check_size, EngineError};
use crate::chem::{BasisState, HamiltonianModel};
use crate::pauli::{PauliString, SpinPartition};
use crate::sampler::{SampledCircuit, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Part {
    #[default]
    Real,
    Imag,
}

impl Part {
    pub fn name(self) -> &'static str {
        match self {
            Part::Real => "real",
            Part::Imag => "imag",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "real" => Some(Part::Real),
            "imag" => Some(Part::Imag),
            _ => None,
        }
    }

    pub fn of(self, z: Complex64) -> f64 {
        match self {
            Part::Real => z.re,
            Part::Imag => z.im,
        }
    }
}

/// System-register data shared by every shot of an experiment.
#[derive(Clone, Debug)]
pub struct HadamardContext {
    pub qubits: usize,
    pub initial: BasisState,
    pub partition: SpinPartition,
    /// Signed Z-only terms of `H_B`.
    pub background_terms: Vec<(f64, PauliString)>,
    /// `E_B(x)` for every system basis state.
    pub background_diag: Arc<Vec<f64>>,
    pub layout: ControlLayout,
    pub order: BranchOrder,
}

/// Gate order of the two controlled branches.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BranchOrder {
    /// Forward, central, then backward rotations.
    #[default]
    Sequential,
    /// Forward and backward rotations merged by time, then central.
    Interleaved,
}

impl BranchOrder {
    pub fn name(self) -> &'static str {
        match self {
            BranchOrder::Sequential => "sequential",
            BranchOrder::Interleaved => "interleaved",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sequential" => Some(BranchOrder::Sequential),
            "interleaved" => Some(BranchOrder::Interleaved),
            _ => None,
        }
    }
}

impl HadamardContext {
    pub fn new(model: &HamiltonianModel, initial: BasisState) -> Result<Self, EngineError> {
        let qubits = model.qubit_count();
        check_size(qubits + 1)?;
        if initial.qubits != qubits {
            return Err(EngineError::QubitMismatch { expected: qubits, found: initial.qubits });
        }
        let layout = match model.layout {
            ControlLayout::Uncontrolled => ControlLayout::Composed,
            l => l,
        };
        Ok(HadamardContext {
            qubits,
            initial,
            partition: model.partition,
            background_terms: model.background.signed_terms().collect(),
            background_diag: Arc::new(model.background.diagonal().unwrap_or_else(|| vec![0.0; 1 << qubits])),
            layout,
            order: BranchOrder::default(),
        })
    }

    pub fn ancilla(&self) -> usize {
        self.qubits
    }

    pub fn record(&self, ancilla: i8, bits: u64, weight: f64) -> ShotRecord {
        let (u0, d0) = self.partition.parities(self.initial.bits);
        let (u, d) = self.partition.parities(bits);
        ShotRecord {
            ancilla,
            system_bits: BasisState { bits, qubits: self.qubits },
            up_ok: u == u0,
            down_ok: d == d0,
            weight,
        }
    }
}

/// Native Hadamard-test circuit plus the classically applied branch phase
/// `φ(x) = phase + diag_scale·E_B(x)`.
#[derive(Clone, Debug)]
pub struct HadamardProgram {
    pub qubits: usize,
    pub gates: Vec<NativeGate>,
    pub phase: f64,
    pub diag_scale: f64,
    pub initial: u64,
    diag: Arc<Vec<f64>>,
}

impl HadamardProgram {
    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    /// Ancilla |+⟩ times the initial system state.
    fn start(&self) -> StateVector {
        let mut v = StateVector::basis(self.qubits, self.initial);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let anc = 1usize << (self.qubits - 1);
        let a = v.amplitudes_mut();
        a[self.initial as usize] = Complex64::new(r, 0.0);
        a[self.initial as usize | anc] = Complex64::new(r, 0.0);
        v
    }

    fn branch_phase(&self, x: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.phase + self.diag_scale * self.diag[x])
    }

    /// `Σ_x 2·conj(α₀(x))·α₁(x)·e^{iφ(x)}` of a final state.
    pub fn overlap(&self, v: &StateVector) -> Complex64 {
        let half = 1usize << (self.qubits - 1);
        let a = v.amplitudes();
        (0..half).map(|x| 2.0 * a[x].conj() * a[x | half] * self.branch_phase(x)).sum()
    }

    pub fn noiseless_amplitude(&self) -> Complex64 {
        let mut v = self.start();
        for g in &self.gates {
            g.apply(&mut v);
        }
        self.overlap(&v)
    }

    /// Joint outcome probabilities `(P(+1, x), P(−1, x))` for each system state.
    fn outcome_weights(&self, v: &StateVector, part: Part) -> Vec<f64> {
        let half = 1usize << (self.qubits - 1);
        let a = v.amplitudes();
        let c = match part {
            Part::Real => Complex64::new(1.0, 0.0),
            Part::Imag => Complex64::new(0.0, -1.0),
        };
        let mut out = Vec::with_capacity(2 * half);
        for x in 0..half {
            let a0 = a[x];
            let a1 = a[x | half] * self.branch_phase(x) * c;
            out.push((a0 + a1).norm_sqr() / 2.0);
            out.push((a0 - a1).norm_sqr() / 2.0);
        }
        out
    }
}

fn sample_outcome<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> (i8, u64) {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut pick = weights.len() - 1;
    for (k, w) in weights.iter().enumerate() {
        if u < *w {
            pick = k;
            break;
        }
        u -= w;
    }
    (if pick % 2 == 0 { 1 } else { -1 }, (pick / 2) as u64)
}

struct Event<'a> {
    time: f64,
    frame: f64,
    string: &'a PauliString,
    angle: f64,
    on_one: bool,
}

fn events_of(c: &SampledCircuit, on_one: bool, offset: f64) -> impl Iterator<Item = Event<'_>> {
    let background = c.variant == Variant::Background;
    c.events.iter().map(move |e| Event {
        time: e.time,
        frame: offset + if background { c.direction * e.time } else { 0.0 },
        string: &e.string,
        angle: e.angle,
        on_one,
    })
}

fn frame_gates(ctx: &HadamardContext, p: &PauliString, frame: f64, out: &mut Vec<NativeGate>) -> Result<(), EngineError> {
    if frame == 0.0 {
        return Ok(());
    }
    for (c, z) in &ctx.background_terms {
        if z.commutes_unchecked(p) {
            continue;
        }
        let theta = frame * c * z.sign();
        let support = z.support();
        match z.weight() {
            1 => out.push(NativeGate::Rz(support.trailing_zeros() as usize, theta)),
            2 => {
                let a = support.trailing_zeros() as usize;
                let b = 63 - support.leading_zeros() as usize;
                out.push(NativeGate::Zz(a, b, theta));
            }
            _ => out.extend(compile_rotation(&z.unsigned(), theta, None, ControlLayout::Uncontrolled, ctx.qubits + 1)?.gates),
        }
    }
    Ok(())
}

/// Compile the Hadamard test for `⟨ini|U₁† e^{i·phase} U′ U₂|ini⟩`.
pub fn build_program(
    ctx: &HadamardContext,
    forward: &SampledCircuit,
    backward: &SampledCircuit,
    central: Option<&SampledCircuit>,
    phase: f64,
) -> Result<HadamardProgram, EngineError> {
    for c in [Some(forward), Some(backward), central].into_iter().flatten() {
        if c.qubits != ctx.qubits {
            return Err(EngineError::QubitMismatch { expected: ctx.qubits, found: c.qubits });
        }
    }
    if forward.variant != backward.variant || forward.duration != backward.duration {
        return Err(EngineError::InvalidArgument("forward and backward circuits must share variant and duration".into()));
    }
    let offset = if forward.variant == Variant::Background { forward.duration } else { 0.0 };
    let central_events = central.into_iter().flat_map(|c| events_of(c, true, offset));
    let timeline: Vec<Event> = match ctx.order {
        BranchOrder::Sequential => {
            events_of(forward, true, 0.0).chain(central_events).chain(events_of(backward, false, 0.0)).collect()
        }
        BranchOrder::Interleaved => {
            let mut t: Vec<Event> = events_of(backward, false, 0.0).chain(events_of(forward, true, 0.0)).collect();
            t.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));
            t.extend(central_events);
            t
        }
    };
    let n = ctx.qubits + 1;
    let mut gates = Vec::new();
    for e in &timeline {
        let mut pre = Vec::new();
        frame_gates(ctx, e.string, e.frame, &mut pre)?;
        gates.extend_from_slice(&pre);
        let ctrl = Control { qubit: ctx.ancilla(), on_one: e.on_one };
        let rot = compile_rotation(e.string, e.angle, Some(ctrl), ctx.layout, n)?;
        gates.extend(rot.gates);
        if rot.global_phase != 0.0 {
            return Err(EngineError::InvalidArgument("identity rotation in a sampled circuit".into()));
        }
        gates.extend(pre.iter().rev().map(|g| g.inverse()));
    }
    let diag_scale = match central {
        Some(c) if c.variant == Variant::Background => c.direction * c.duration,
        _ => 0.0,
    };
    Ok(HadamardProgram { qubits: n, gates, phase, diag_scale, initial: ctx.initial.bits, diag: ctx.background_diag.clone() })
}

/// Dense `⟨ini|U₁† e^{i·phase} U′ U₂|ini⟩` from direct circuit application.
pub fn analytic_amplitude(
    ctx: &HadamardContext,
    forward: &SampledCircuit,
    backward: &SampledCircuit,
    central: Option<&SampledCircuit>,
    phase: f64,
) -> Result<Complex64, EngineError> {
    let diag = Some(ctx.background_diag.as_slice());
    let mut a = StateVector::basis(ctx.qubits, ctx.initial.bits);
    apply_sampled(forward, &mut a, diag)?;
    if let Some(c) = central {
        apply_sampled(c, &mut a, diag)?;
    }
    let mut b = StateVector::basis(ctx.qubits, ctx.initial.bits);
    apply_sampled(backward, &mut b, diag)?;
    Ok(b.inner(&a) * Complex64::from_polar(1.0, phase))
}

/// Noisy execution of one program with cached noiseless prefixes.
pub struct TrajectoryRunner<'a> {
    program: &'a HadamardProgram,
    noise: NoiseModel,
    zz: Vec<usize>,
    snapshots: Vec<StateVector>,
    clean: StateVector,
    clean_weights: [Option<Vec<f64>>; 2],
}

/// Largest snapshot cache in amplitudes.
const SNAPSHOT_BUDGET: usize = 1 << 24;

impl<'a> TrajectoryRunner<'a> {
    /// `cache` stores the state after every two-qubit gate so that noisy
    /// shots restart from their first error; worthwhile for many shots.
    pub fn new(program: &'a HadamardProgram, noise: NoiseModel, cache: bool) -> Self {
        let zz: Vec<usize> =
            program.gates.iter().enumerate().filter(|(_, g)| g.is_two_qubit()).map(|(i, _)| i).collect();
        let keep = cache && noise.is_active() && zz.len() << program.qubits <= SNAPSHOT_BUDGET;
        let mut v = program.start();
        let mut snapshots = Vec::new();
        for g in &program.gates {
            g.apply(&mut v);
            if keep && g.is_two_qubit() {
                snapshots.push(v.clone());
            }
        }
        TrajectoryRunner { program, noise, zz, snapshots, clean: v, clean_weights: [None, None] }
    }

    pub fn noiseless_state(&self) -> &StateVector {
        &self.clean
    }

    fn clean_weights(&mut self, part: Part) -> &[f64] {
        let slot = part as usize;
        if self.clean_weights[slot].is_none() {
            self.clean_weights[slot] = Some(self.program.outcome_weights(&self.clean, part));
        }
        self.clean_weights[slot].as_deref().expect("filled above")
    }

    fn depolarize<R: Rng + ?Sized>(v: &mut StateVector, gate: &NativeGate, rng: &mut R) {
        if let NativeGate::Zz(a, b, _) = *gate {
            let r: u8 = rng.random_range(1..16);
            v.apply_pauli_pair(a, r / 4, b, r % 4);
        }
    }

    /// One shot: `(ancilla outcome, system bits)`.
    pub fn shot<R: Rng + ?Sized>(&mut self, part: Part, rng: &mut R) -> (i8, u64) {
        if !self.noise.is_active() {
            return sample_outcome(self.clean_weights(part), rng);
        }
        let geo = Geometric::new(self.noise.p_depol).expect("p in (0, 1]");
        let first = geo.sample(rng) as usize;
        if first >= self.zz.len() {
            return sample_outcome(self.clean_weights(part), rng);
        }
        let gates = &self.program.gates;
        let (mut v, from, mut seen, mut next) = if self.snapshots.is_empty() {
            (self.program.start(), 0, 0, first)
        } else {
            let mut v = self.snapshots[first].clone();
            Self::depolarize(&mut v, &gates[self.zz[first]], rng);
            let next = (first + 1).saturating_add(geo.sample(rng) as usize);
            (v, self.zz[first] + 1, first + 1, next)
        };
        for g in &gates[from..] {
            g.apply(&mut v);
            if g.is_two_qubit() {
                if seen == next {
                    Self::depolarize(&mut v, g, rng);
                    next = (seen + 1).saturating_add(geo.sample(rng) as usize);
                }
                seen += 1;
            }
        }
        sample_outcome(&self.program.outcome_weights(&v, part), rng)
    }
}

/// One Hadamard-test shot on freshly compiled circuits.
#[allow(clippy::too_many_arguments)]
pub fn hadamard_test_shot<R: Rng + ?Sized>(
    ctx: &HadamardContext,
    forward: &SampledCircuit,
    backward: &SampledCircuit,
    central: Option<&SampledCircuit>,
    phase: f64,
    noise: NoiseModel,
    part: Part,
    rng: &mut R,
) -> Result<ShotRecord, EngineError> {
    let program = build_program(ctx, forward, backward, central, phase)?;
    let mut runner = TrajectoryRunner::new(&program, noise, false);
    let (ancilla, bits) = runner.shot(part, rng);
    let lambda = forward.attenuation * backward.attenuation * central.map_or(1.0, |c| c.attenuation);
    Ok(ctx.record(ancilla, bits, 1.0 / lambda))
}

/// Shots of one compiled program, all weighted by `weight`.
pub fn program_shots<R: Rng + ?Sized>(
    ctx: &HadamardContext,
    program: &HadamardProgram,
    noise: NoiseModel,
    part: Part,
    shots: usize,
    weight: f64,
    rng: &mut R,
) -> Vec<ShotRecord> {
    let mut runner = TrajectoryRunner::new(program, noise, shots > 1);
    (0..shots)
        .map(|_| {
            let (a, x) = runner.shot(part, rng);
            ctx.record(a, x, weight)
        })
        .collect()
}
