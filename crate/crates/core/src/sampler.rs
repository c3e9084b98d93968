//! Random rotation circuits whose average is the adiabatic evolution
//! (or a constant-Hamiltonian evolution) up to a known attenuation factor.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::chem::HamiltonianModel;
use crate::pauli::{PauliString, PauliSum};
use crate::schedule::AdiabaticPath;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("gate angle {0} must lie in (0, π/2]")]
    InvalidTau(f64),
    #[error("duration {0} must be non-negative and finite")]
    InvalidDuration(f64),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Variant {
    /// Every non-identity term is randomised.
    Base,
    /// `H_B` is evolved exactly between randomised interaction rotations.
    #[default]
    Background,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Background => "background",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "base" => Some(Variant::Base),
            "background" => Some(Variant::Background),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub tau: f64,
    pub total_time: f64,
    pub variant: Variant,
}

impl SamplerConfig {
    fn validate(&self) -> Result<(), SamplerError> {
        validate_tau(self.tau)?;
        validate_duration(self.total_time)
    }
}

fn validate_tau(tau: f64) -> Result<(), SamplerError> {
    if !(tau > 0.0 && tau <= std::f64::consts::FRAC_PI_2) {
        return Err(SamplerError::InvalidTau(tau));
    }
    Ok(())
}

fn validate_duration(t: f64) -> Result<(), SamplerError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(SamplerError::InvalidDuration(t));
    }
    Ok(())
}

/// One rotation `exp(i·angle·string)` at time `time`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateEvent {
    pub time: f64,
    pub term: usize,
    pub angle: f64,
    pub string: PauliString,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledCircuit {
    pub qubits: usize,
    pub variant: Variant,
    pub duration: f64,
    pub events: Vec<GateEvent>,
    /// Background generator evolved between events in the background variant.
    pub background: Option<Arc<PauliSum>>,
    /// `+1`: segments are `exp(+i·dt·H_B)`; `−1`: `exp(−i·dt·H_B)`.
    pub direction: f64,
    pub attenuation: f64,
    pub seed: u64,
}

impl SampledCircuit {
    pub fn rotation_count(&self) -> usize {
        self.events.len()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("# variant {}\n", self.variant.name()));
        s.push_str(&format!("# duration {:.16e}\n", self.duration));
        s.push_str(&format!("# attenuation {:.16e}\n", self.attenuation));
        s.push_str(&format!("# direction {}\n", self.direction));
        s.push_str(&format!("# seed {}\n", self.seed));
        for e in &self.events {
            s.push_str(&format!("{:.16e} {} {:.16e}\n", e.time, e.term, e.angle));
        }
        s
    }

    /// Inverse of [`SampledCircuit::to_text`]; term indices resolve against `terms`.
    pub fn from_text(
        text: &str,
        qubits: usize,
        terms: &[PauliString],
        background: Option<Arc<PauliSum>>,
    ) -> Result<Self, SamplerError> {
        let mut c = SampledCircuit {
            qubits,
            variant: Variant::Base,
            duration: 0.0,
            events: Vec::new(),
            background,
            direction: 1.0,
            attenuation: 1.0,
            seed: 0,
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |m: String| SamplerError::Parse { line: i + 1, message: m };
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                let mut w = h.split_whitespace();
                let (Some(k), Some(v)) = (w.next(), w.next()) else { continue };
                let num = || v.parse::<f64>().map_err(|_| err(format!("bad {k}")));
                match k {
                    "variant" => c.variant = Variant::parse(v).ok_or_else(|| err(format!("unknown variant {v}")))?,
                    "duration" => c.duration = num()?,
                    "attenuation" => c.attenuation = num()?,
                    "direction" => c.direction = num()?,
                    "seed" => c.seed = v.parse().map_err(|_| err("bad seed".into()))?,
                    _ => {}
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(err("expected `t n angle`".into()));
            }
            let time: f64 = f[0].parse().map_err(|_| err("bad time".into()))?;
            let term: usize = f[1].parse().map_err(|_| err("bad term index".into()))?;
            let angle: f64 = f[2].parse().map_err(|_| err("bad angle".into()))?;
            let string = *terms.get(term).ok_or_else(|| err(format!("term {term} out of range")))?;
            c.events.push(GateEvent { time, term, angle, string });
        }
        if c.variant == Variant::Background && c.background.is_none() {
            return Err(SamplerError::Parse { line: 0, message: "background circuit without H_B".into() });
        }
        Ok(c)
    }
}

/// Strings of the randomised terms in the order used for event indices.
pub fn term_strings(model: &HamiltonianModel, variant: Variant) -> Vec<PauliString> {
    let mut out: Vec<PauliString> = model.interaction.terms().iter().map(|t| t.string).collect();
    if variant == Variant::Base {
        out.extend(model.background.terms().iter().map(|t| t.string));
    }
    out
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

fn sort_events(events: &mut [GateEvent]) {
    events.sort_by(|a, b| a.time.partial_cmp(&b.time).expect("finite times"));
}

/// `λ` for one adiabatic circuit.
pub fn attenuation(model: &HamiltonianModel, path: &AdiabaticPath, cfg: &SamplerConfig) -> f64 {
    let t = (cfg.tau / 2.0).tan();
    let zeta = path.zeta();
    match cfg.variant {
        Variant::Base => (-t * cfg.total_time * (zeta * model.mu_i() + model.mu_b())).exp(),
        Variant::Background => (-t * zeta * cfg.total_time * model.mu_i()).exp(),
    }
}

/// One random circuit for `A(T) = 𝒯 exp(i∫H(t/T)dt)`.
pub fn sample_adiabatic<R: Rng + ?Sized>(
    model: &HamiltonianModel,
    path: &AdiabaticPath,
    cfg: &SamplerConfig,
    rng: &mut R,
    seed: u64,
) -> Result<SampledCircuit, SamplerError> {
    cfg.validate()?;
    let sin = cfg.tau.sin();
    let zeta = path.zeta();
    let big_t = cfg.total_time;
    let mut events = Vec::new();
    for (n, term) in model.interaction.terms().iter().enumerate() {
        let m = poisson(term.coefficient * zeta * big_t / sin, rng);
        for _ in 0..m {
            let v: f64 = rng.random::<f64>() * zeta;
            events.push(GateEvent { time: big_t * path.z_inverse(v), term: n, angle: cfg.tau, string: term.string });
        }
    }
    let mut background = None;
    match cfg.variant {
        Variant::Base => {
            let offset = model.interaction.len();
            for (k, term) in model.background.terms().iter().enumerate() {
                let m = poisson(term.coefficient * big_t / sin, rng);
                for _ in 0..m {
                    let time = rng.random::<f64>() * big_t;
                    events.push(GateEvent { time, term: offset + k, angle: cfg.tau, string: term.string });
                }
            }
        }
        Variant::Background => background = Some(Arc::new(model.background.clone())),
    }
    sort_events(&mut events);
    Ok(SampledCircuit {
        qubits: model.qubit_count(),
        variant: cfg.variant,
        duration: big_t,
        events,
        background,
        direction: 1.0,
        attenuation: attenuation(model, path, cfg),
        seed,
    })
}

/// Random circuit for `exp(i·sign·s·h)` with every non-identity term of
/// `h` randomised. The identity term is left to the caller.
pub fn sample_constant<R: Rng + ?Sized>(
    h: &PauliSum,
    s: f64,
    tau: f64,
    sign: f64,
    rng: &mut R,
    seed: u64,
) -> Result<SampledCircuit, SamplerError> {
    validate_tau(tau)?;
    validate_duration(s)?;
    let sin = tau.sin();
    let mut events = Vec::new();
    let mut mu = 0.0;
    for (n, term) in h.terms().iter().enumerate() {
        if term.string.is_identity() {
            continue;
        }
        mu += term.coefficient;
        for _ in 0..poisson(term.coefficient * s / sin, rng) {
            let time = rng.random::<f64>() * s;
            events.push(GateEvent { time, term: n, angle: sign * tau, string: term.string });
        }
    }
    sort_events(&mut events);
    Ok(SampledCircuit {
        qubits: h.qubit_count(),
        variant: Variant::Base,
        duration: s,
        events,
        background: None,
        direction: sign,
        attenuation: (-(tau / 2.0).tan() * s * mu).exp(),
        seed,
    })
}

/// Random circuit for `exp(i·sign·s·(H − constant))` using the model's split.
pub fn sample_constant_model<R: Rng + ?Sized>(
    model: &HamiltonianModel,
    s: f64,
    tau: f64,
    sign: f64,
    variant: Variant,
    rng: &mut R,
    seed: u64,
) -> Result<SampledCircuit, SamplerError> {
    validate_tau(tau)?;
    validate_duration(s)?;
    let sin = tau.sin();
    let mut events = Vec::new();
    for (n, term) in model.interaction.terms().iter().enumerate() {
        for _ in 0..poisson(term.coefficient * s / sin, rng) {
            let time = rng.random::<f64>() * s;
            events.push(GateEvent { time, term: n, angle: sign * tau, string: term.string });
        }
    }
    let t = (tau / 2.0).tan();
    let (background, attenuation) = match variant {
        Variant::Base => {
            let offset = model.interaction.len();
            for (k, term) in model.background.terms().iter().enumerate() {
                for _ in 0..poisson(term.coefficient * s / sin, rng) {
                    let time = rng.random::<f64>() * s;
                    events.push(GateEvent { time, term: offset + k, angle: sign * tau, string: term.string });
                }
            }
            (None, (-t * s * model.mu()).exp())
        }
        Variant::Background => (Some(Arc::new(model.background.clone())), (-t * s * model.mu_i()).exp()),
    };
    sort_events(&mut events);
    Ok(SampledCircuit {
        qubits: model.qubit_count(),
        variant,
        duration: s,
        events,
        background,
        direction: sign,
        attenuation,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateCounts {
    pub rotations: f64,
    pub two_qubit_gates: f64,
}

/// Mean rotation and two-qubit gate counts of one adiabatic circuit.
pub fn expected_gate_counts(model: &HamiltonianModel, path: &AdiabaticPath, cfg: &SamplerConfig) -> GateCounts {
    let sin = cfg.tau.sin();
    let zeta = path.zeta();
    let t = cfg.total_time;
    let interaction_cost = model.g_avg() * model.mu_i();
    match cfg.variant {
        Variant::Background => GateCounts {
            rotations: zeta * t * model.mu_i() / sin,
            two_qubit_gates: zeta * t * interaction_cost / sin,
        },
        Variant::Base => GateCounts {
            rotations: t * (zeta * model.mu_i() + model.mu_b()) / sin,
            two_qubit_gates: t * (zeta * interaction_cost + model.background_cost_weight()) / sin,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::BackgroundRule;
    use crate::engine::native::ControlLayout;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> HamiltonianModel {
        let h = PauliSum::from_signed(
            3,
            [(0.4, "ZII"), (-0.3, "IZI"), (0.5, "XXI"), (-0.2, "IYY"), (0.1, "ZZZ")]
                .iter()
                .map(|(c, s)| (*c, s.parse().unwrap())),
        )
        .unwrap();
        HamiltonianModel::split(&h, BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder)
    }

    #[test]
    fn rejects_bad_tau() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for tau in [0.0, -0.1, 2.0] {
            let cfg = SamplerConfig { tau, total_time: 1.0, variant: Variant::Background };
            assert_eq!(
                sample_adiabatic(&m, &AdiabaticPath::Linear, &cfg, &mut rng, 0),
                Err(SamplerError::InvalidTau(tau))
            );
        }
    }

    #[test]
    fn events_sorted_and_in_range() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = SamplerConfig { tau: 0.05, total_time: 3.0, variant: Variant::Base };
        let c = sample_adiabatic(&m, &AdiabaticPath::Quadratic, &cfg, &mut rng, 0).unwrap();
        assert!(!c.events.is_empty());
        assert!(c.events.windows(2).all(|w| w[0].time <= w[1].time));
        assert!(c.events.iter().all(|e| (0.0..=3.0).contains(&e.time)));
    }

    #[test]
    fn mean_count_matches_expectation() {
        let m = model();
        let cfg = SamplerConfig { tau: 0.2, total_time: 4.0, variant: Variant::Background };
        let want = expected_gate_counts(&m, &AdiabaticPath::Linear, &cfg).rotations;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20000;
        let total: usize = (0..n)
            .map(|_| sample_adiabatic(&m, &AdiabaticPath::Linear, &cfg, &mut rng, 0).unwrap().rotation_count())
            .sum();
        let mean = total as f64 / n as f64;
        let sigma = (want / n as f64).sqrt();
        assert!((mean - want).abs() < 5.0 * sigma, "{mean} vs {want}");
    }

    #[test]
    fn text_round_trip() {
        let m = model();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = SamplerConfig { tau: 0.1, total_time: 2.0, variant: Variant::Background };
        let c = sample_adiabatic(&m, &AdiabaticPath::Linear, &cfg, &mut rng, 9).unwrap();
        let back = SampledCircuit::from_text(
            &c.to_text(),
            3,
            &term_strings(&m, Variant::Background),
            c.background.clone(),
        )
        .unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn optimal_angle_count_matches_half_mu_squared_t_squared() {
        // ζ = 1/2, T = 7, μ_I = 11.7 with τ = 1/(2ζTμ_I).
        let (zeta, t, mu) = (0.5f64, 7.0f64, 11.7f64);
        let tau = 1.0 / (2.0 * zeta * t * mu);
        let rotations = zeta * t * mu / tau.sin();
        assert!((rotations / (0.5 * mu * mu * t * t) - 1.0).abs() < 1e-3);
    }
}
