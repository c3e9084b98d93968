//! Shot records, the single-shot estimator and symmetry filtering.

use std::fmt;

use super::EngineError;
use crate::chem::BasisState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotRecord {
    /// `+1` or `−1`.
    pub ancilla: i8,
    pub system_bits: BasisState,
    pub up_ok: bool,
    pub down_ok: bool,
    /// `1/λ_total` of the circuit that produced the shot.
    pub weight: f64,
}

impl ShotRecord {
    pub fn parity_ok(&self) -> bool {
        self.up_ok && self.down_ok
    }

    /// `ancilla system_bits up_ok down_ok`.
    pub fn to_line(&self) -> String {
        format!("{:+} {} {} {}", self.ancilla, self.system_bits, self.up_ok as u8, self.down_ok as u8)
    }

    /// Inverse of [`ShotRecord::to_line`]; the weight is not logged.
    pub fn parse_line(line: &str, weight: f64) -> Option<ShotRecord> {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return None;
        }
        let ancilla = match f[0] {
            "+1" | "1" => 1,
            "-1" => -1,
            _ => return None,
        };
        let flag = |s: &str| match s {
            "1" => Some(true),
            "0" => Some(false),
            _ => None,
        };
        Some(ShotRecord {
            ancilla,
            system_bits: BasisState::parse(f[1])?,
            up_ok: flag(f[2])?,
            down_ok: flag(f[3])?,
            weight,
        })
    }
}

impl fmt::Display for ShotRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

/// `X = λ⁻¹·(±1)`.
pub fn single_shot_estimator(record: &ShotRecord, lambda_total: f64) -> f64 {
    record.ancilla as f64 / lambda_total
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FilterPolicy {
    /// Drop parity-violating shots entirely.
    #[default]
    DiscardParityViolations,
    /// Keep them in the denominator with value zero.
    ParticleNumberZeroContribution,
    None,
}

impl FilterPolicy {
    pub fn name(self) -> &'static str {
        match self {
            FilterPolicy::DiscardParityViolations => "discard_parity_violations",
            FilterPolicy::ParticleNumberZeroContribution => "particle_number_zero_contribution",
            FilterPolicy::None => "none",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "discard_parity_violations" => Some(FilterPolicy::DiscardParityViolations),
            "particle_number_zero_contribution" => Some(FilterPolicy::ParticleNumberZeroContribution),
            "none" => Some(FilterPolicy::None),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub shots_used: usize,
    pub shots_filtered: usize,
}

impl AmplitudeEstimate {
    /// Sample variance of the single-shot values.
    pub fn variance(&self) -> f64 {
        self.std_error * self.std_error * self.shots_used as f64
    }
}

/// Mean and standard error of `weight·ancilla` under `policy`.
pub fn parity_filter(records: &[ShotRecord], policy: FilterPolicy) -> Result<AmplitudeEstimate, EngineError> {
    let mut values = Vec::with_capacity(records.len());
    let mut filtered = 0;
    for r in records {
        if r.parity_ok() || policy == FilterPolicy::None {
            values.push(single_shot_estimator(r, 1.0 / r.weight));
            continue;
        }
        filtered += 1;
        if policy == FilterPolicy::ParticleNumberZeroContribution {
            values.push(0.0);
        }
    }
    if values.is_empty() || filtered == records.len() {
        return Err(EngineError::AllShotsFiltered);
    }
    let (mean, std_error) = mean_and_error(&values);
    Ok(AmplitudeEstimate { mean, std_error, shots_used: values.len(), shots_filtered: filtered })
}

/// Sample mean and `sd/√n`; the error is zero for a single value.
pub fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
