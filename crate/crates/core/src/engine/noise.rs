//! Two-qubit depolarising noise on native `Z⊗Z` gates.

use super::EngineError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NoiseMode {
    #[default]
    Off,
    /// Pauli-trajectory sampling.
    Trajectory,
}

impl NoiseMode {
    pub fn name(self) -> &'static str {
        match self {
            NoiseMode::Off => "off",
            NoiseMode::Trajectory => "trajectory",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "off" => Some(NoiseMode::Off),
            "trajectory" => Some(NoiseMode::Trajectory),
            _ => None,
        }
    }
}

/// How a quoted error figure maps to `p_depol`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseConvention {
    /// The figure is `p_depol` itself.
    Probability,
    /// Depolarising amplitude; read as `p_depol`.
    Amplitude,
    /// Process fidelity `F`; `p_depol = 1 − F`.
    Fidelity,
}

impl NoiseConvention {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "probability" => Some(NoiseConvention::Probability),
            "amplitude" => Some(NoiseConvention::Amplitude),
            "fidelity" => Some(NoiseConvention::Fidelity),
            _ => None,
        }
    }
}

/// After each two-qubit gate, with probability `p_depol`, one of the 15
/// non-identity two-qubit Paulis chosen uniformly.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct NoiseModel {
    pub p_depol: f64,
    pub mode: NoiseMode,
}

impl NoiseModel {
    pub fn off() -> Self {
        NoiseModel::default()
    }

    pub fn trajectory(p_depol: f64) -> Result<Self, EngineError> {
        if !(0.0..=1.0).contains(&p_depol) {
            return Err(EngineError::InvalidArgument(format!("p_depol = {p_depol} outside [0, 1]")));
        }
        Ok(NoiseModel { p_depol, mode: NoiseMode::Trajectory })
    }

    pub fn from_convention(value: f64, convention: NoiseConvention) -> Result<Self, EngineError> {
        match convention {
            NoiseConvention::Probability | NoiseConvention::Amplitude => NoiseModel::trajectory(value),
            NoiseConvention::Fidelity => NoiseModel::trajectory(1.0 - value),
        }
    }

    pub fn is_active(&self) -> bool {
        self.mode == NoiseMode::Trajectory && self.p_depol > 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_convention() {
        let n = NoiseModel::from_convention(0.9982, NoiseConvention::Fidelity).unwrap();
        assert!((n.p_depol - 0.0018).abs() < 1e-12);
        assert!(NoiseModel::trajectory(1.5).is_err());
        assert!(!NoiseModel::off().is_active());
    }
}
