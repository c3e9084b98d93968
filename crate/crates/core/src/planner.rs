//! Closed-form resource model: runtimes, optimal gate angle, measurement
//! costs and comparisons with product formulas and LCU.

use std::collections::BTreeMap;
use std::f64::consts::{E, FRAC_PI_2, PI};

use thiserror::Error;

use crate::estimators::{central_time_s, central_time_u};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("τ = {0} outside (0, π/2)")]
    TauOutOfRange(f64),
    #[error("sin(sδ) vanishes at s = {s}, δ = {delta}")]
    VanishingSignal { s: f64, delta: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostInputs {
    pub mu_i: f64,
    pub mu_b: f64,
    pub zeta: f64,
    pub total_time: f64,
    /// Mean two-qubit gates per rotation.
    pub g: f64,
    /// Noise exponent per two-qubit gate (gate fidelity `e^{−r}`).
    pub r: f64,
    pub delta: f64,
    pub delta0: f64,
    pub qubits: usize,
}

impl Default for CostInputs {
    fn default() -> Self {
        CostInputs {
            mu_i: 1.0,
            mu_b: 0.0,
            zeta: 0.5,
            total_time: 10.0,
            g: 1.0,
            r: 0.0,
            delta: 1e-3,
            delta0: 1e-3,
            qubits: 4,
        }
    }
}

impl CostInputs {
    /// `ζ·T·μ_I`.
    pub fn k(&self) -> f64 {
        self.zeta * self.total_time * self.mu_i
    }

    fn validate(&self) -> Result<(), PlannerError> {
        let vals = [self.mu_i, self.mu_b, self.zeta, self.total_time, self.g, self.r, self.delta0];
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(PlannerError::Invalid("inputs must be finite and non-negative".into()));
        }
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<(), PlannerError> {
    if !(tau > 0.0 && tau < FRAC_PI_2) {
        return Err(PlannerError::TauOutOfRange(tau));
    }
    Ok(())
}

/// `R(τ) = 2ζTμ_I g/sin τ · exp(4rζTμ_I g/sin τ + 4tan(τ/2)ζTμ_I)`.
pub fn runtime_r(inputs: &CostInputs, tau: f64) -> Result<f64, PlannerError> {
    check_tau(tau)?;
    Ok(log_runtime_r(inputs, tau).exp())
}

fn log_runtime_r(i: &CostInputs, tau: f64) -> f64 {
    let k = i.k();
    (2.0 * k * i.g / tau.sin()).ln() + 4.0 * i.r * k * i.g / tau.sin() + 4.0 * (tau / 2.0).tan() * k
}

/// Minimiser of `f` over `τ ∈ (0, π/2)`: log-spaced grid scan, then
/// golden-section search in `ln τ` around the best grid point.
pub fn minimize_over_tau<F: Fn(f64) -> f64>(f: F) -> f64 {
    const GRID: usize = 600;
    let (lo, hi) = (1e-9f64.ln(), (FRAC_PI_2 * (1.0 - 1e-9)).ln());
    let at = |k: usize| lo + (hi - lo) * k as f64 / GRID as f64;
    let g = |x: f64| f(x.exp());
    let best = (0..=GRID).min_by(|&a, &b| g(at(a)).total_cmp(&g(at(b)))).expect("non-empty grid");
    let (mut a, mut b) = (at(best.saturating_sub(1)), at((best + 1).min(GRID)));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    while (b.exp() - a.exp()).abs() > 1e-12 && b - a > 1e-15 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = g(d);
        }
    }
    (0.5 * (a + b)).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub tau_star: f64,
    pub r_star: f64,
    /// Two-qubit gates in one adiabatic circuit pair at `τ*`.
    pub per_circuit_gates: f64,
    /// `R*/per_circuit_gates`: shots per unit precision².
    pub shots: f64,
    pub breakdown: BTreeMap<String, f64>,
}

impl CostReport {
    pub fn to_text(&self) -> String {
        let mut rows = vec![
            ("tau_star".to_string(), self.tau_star),
            ("R_star".to_string(), self.r_star),
            ("per_circuit_gates".to_string(), self.per_circuit_gates),
            ("shots".to_string(), self.shots),
        ];
        rows.extend(self.breakdown.iter().map(|(k, v)| (k.clone(), *v)));
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter().map(|(k, v)| format!("{k:<width$}  {v:.6e}\n")).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("quantity,value\n");
        for (k, v) in [
            ("tau_star", self.tau_star),
            ("R_star", self.r_star),
            ("per_circuit_gates", self.per_circuit_gates),
            ("shots", self.shots),
        ] {
            s.push_str(&format!("{k},{v:.12e}\n"));
        }
        for (k, v) in &self.breakdown {
            s.push_str(&format!("{k},{v:.12e}\n"));
        }
        s
    }
}

/// `τ*` by direct minimisation of `R(τ)`, with the quartic residuals at
/// `x = tan(τ*/2)` kept as diagnostics.
pub fn optimal_gate_angle(inputs: &CostInputs) -> Result<CostReport, PlannerError> {
    inputs.validate()?;
    if inputs.k() == 0.0 || inputs.g == 0.0 {
        return Err(PlannerError::Invalid("ζTμ_I and g must be positive".into()));
    }
    let tau = minimize_over_tau(|t| log_runtime_r(inputs, t));
    let r_star = runtime_r(inputs, tau)?;
    let per_circuit = 2.0 * inputs.k() * inputs.g / tau.sin();
    let x = (tau / 2.0).tan();
    let mut breakdown = BTreeMap::new();
    breakdown.insert("noiseless_asymptote".into(), 1.0 / (2.0 * inputs.k()));
    breakdown.insert("noisy_asymptote".into(), (2.0 * inputs.r * inputs.g).sqrt());
    breakdown.insert("quartic_residual_derived".into(), quartic(inputs, x, QuarticSigns::Derived));
    breakdown.insert("quartic_residual_printed".into(), quartic(inputs, x, QuarticSigns::Printed));
    breakdown.insert("attenuation_inverse_squared".into(), r_star / per_circuit);
    Ok(CostReport { tau_star: tau, r_star, per_circuit_gates: per_circuit, shots: r_star / per_circuit, breakdown })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuarticSigns {
    /// Stationarity of `ln R`: `(4+2rg)K x⁴ + x³ + 4K x² − x − 2rgK`.
    Derived,
    /// The alternative sign pattern `(4+2rg)K x⁴ − x³ + 4K x² + x − 2rgK`.
    Printed,
}

/// Quartic in `x = tan(τ/2)` whose root is the stationary point of `R`.
pub fn quartic(inputs: &CostInputs, x: f64, signs: QuarticSigns) -> f64 {
    let k = inputs.k();
    let rg = inputs.r * inputs.g;
    let s = match signs {
        QuarticSigns::Derived => 1.0,
        QuarticSigns::Printed => -1.0,
    };
    (4.0 + 2.0 * rg) * k * x.powi(4) + s * x.powi(3) + 4.0 * k * x * x - s * x - 2.0 * rg * k
}

/// `R^Q(τ) = (s+2ζT)/sin²(sδ) · μ_I g/sin τ · exp[2(s+2ζT)u(τ)]` with
/// `s = central_time_s(δ₀, u(τ))`.
pub fn runtime_rq(inputs: &CostInputs, tau: f64) -> Result<f64, PlannerError> {
    check_tau(tau)?;
    let u = central_time_u(tau, inputs.mu_i, inputs.r, inputs.g);
    runtime_rq_at(inputs, tau, central_time_s(inputs.delta0, u))
}

/// `R^Q(τ)` with the central time held at `s`.
pub fn runtime_rq_at(inputs: &CostInputs, tau: f64, s: f64) -> Result<f64, PlannerError> {
    check_tau(tau)?;
    let u = central_time_u(tau, inputs.mu_i, inputs.r, inputs.g);
    let sin = (s * inputs.delta).sin();
    if sin.abs() < 1e-15 {
        return Err(PlannerError::VanishingSignal { s, delta: inputs.delta });
    }
    let span = s + 2.0 * inputs.zeta * inputs.total_time;
    Ok(span / (sin * sin) * inputs.mu_i * inputs.g / tau.sin() * (2.0 * span * u).exp())
}

/// Minimum over `τ` of `R^Q`; `fixed_s` pins the central time.
pub fn minimal_rq(inputs: &CostInputs, fixed_s: Option<f64>) -> Result<(f64, f64), PlannerError> {
    let eval = |t: f64| match fixed_s {
        Some(s) => runtime_rq_at(inputs, t, s),
        None => runtime_rq(inputs, t),
    };
    let tau = minimize_over_tau(|t| eval(t).map(f64::ln).unwrap_or(f64::INFINITY));
    Ok((tau, eval(tau)?))
}

/// `10·e·g·μ_I²·(π/(2δ) + 2ζT)²`: ten noiseless queries at `s = π/(2δ)`.
pub fn binary_search_closed_form(inputs: &CostInputs) -> f64 {
    let span = PI / (2.0 * inputs.delta) + 2.0 * inputs.zeta * inputs.total_time;
    10.0 * E * inputs.g * inputs.mu_i.powi(2) * span * span
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AspCosts {
    pub prepare: f64,
    pub measure: f64,
    pub total: f64,
}

/// `C_prepare = Lμ_I²T²`, `C_measure = 10⁶Lμ_I²` (with `g = L/2`, `ζ = 1/2`).
pub fn asp_costs(l: usize, mu_i: f64, total_time: f64) -> AspCosts {
    let base = l as f64 * mu_i * mu_i;
    let prepare = base * total_time * total_time;
    let measure = 1e6 * base;
    AspCosts { prepare, measure, total: prepare + measure }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingPreset {
    /// `μ_I ≈ 0.2·L^2.13`, `T ≈ L/2`.
    HydrogenChain,
    /// `μ_I ≈ 0.007·L^2.84`.
    Generic,
}

impl ScalingPreset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hydrogen_chain" => Some(ScalingPreset::HydrogenChain),
            "generic" => Some(ScalingPreset::Generic),
            _ => None,
        }
    }

    pub fn mu_i(self, l: usize) -> f64 {
        let l = l as f64;
        match self {
            ScalingPreset::HydrogenChain => 0.2 * l.powf(2.13),
            ScalingPreset::Generic => 0.007 * l.powf(2.84),
        }
    }
}

/// Component costs for a hydrogen chain of `l` qubits with `T = L/2`.
pub fn hydrogen_chain_costs(l: usize) -> AspCosts {
    asp_costs(l, ScalingPreset::HydrogenChain.mu_i(l), l as f64 / 2.0)
}

/// The quoted summary law `10⁻³·L^6.6·(10³+L)²`.
pub fn hydrogen_chain_summary(l: usize) -> f64 {
    let l = l as f64;
    1e-3 * l.powf(6.6) * (1e3 + l).powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationComparison {
    pub trotter: f64,
    pub tetris: f64,
    pub ratio: f64,
    /// `C·L⁴·μ·T`.
    pub lcu_cost: f64,
    /// `C·L⁴/μ`: TETRIS wins below this time.
    pub lcu_crossover_time: f64,
    pub tetris_beats_lcu: bool,
}

/// Trotter `steps × N_terms` against TETRIS `½μ_I²T²` rotations, and the
/// LCU crossover with prefactor `c`.
pub fn compare_trotter_lcu(
    l: usize,
    mu: f64,
    mu_i: f64,
    total_time: f64,
    trotter_steps: usize,
    n_terms: usize,
    c: f64,
) -> RotationComparison {
    let trotter = (trotter_steps * n_terms) as f64;
    let tetris = 0.5 * mu_i * mu_i * total_time * total_time;
    let l4 = (l as f64).powi(4);
    let crossover = c * l4 / mu;
    RotationComparison {
        trotter,
        tetris,
        ratio: if tetris > 0.0 { trotter / tetris } else { f64::INFINITY },
        lcu_cost: c * l4 * mu * total_time,
        lcu_crossover_time: crossover,
        tetris_beats_lcu: total_time < crossover,
    }
}

/// `T ≲ 100·C·L`, the crossover when `μ ≈ L³/100`.
pub fn lcu_rule_of_thumb(l: usize, c: f64) -> f64 {
    100.0 * c * l as f64
}

/// Named comparison inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComparisonPreset {
    pub name: &'static str,
    pub qubits: usize,
    pub mu_i: f64,
    pub total_time: f64,
    pub trotter_steps: usize,
    pub n_terms: usize,
}

/// H₆ chain in STO-3G: 12 qubits, 919 terms, `μ_I = 11.7`, `T = 7`, 200 steps.
pub const H6: ComparisonPreset =
    ComparisonPreset { name: "H6", qubits: 12, mu_i: 11.7, total_time: 7.0, trotter_steps: 200, n_terms: 919 };

impl ComparisonPreset {
    pub fn compare(&self, mu: f64, c: f64) -> RotationComparison {
        compare_trotter_lcu(self.qubits, mu, self.mu_i, self.total_time, self.trotter_steps, self.n_terms, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_min<F: Fn(f64) -> f64>(f: F) -> f64 {
        let n = 200_000;
        (1..n)
            .map(|k| FRAC_PI_2 * (k as f64 / n as f64).powi(3))
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    }

    #[test]
    fn minimiser_agrees_with_grid() {
        for (k, rg) in [(20.0, 0.0), (60.0, 1e-3), (300.0, 1e-2), (5.0, 0.05)] {
            let i = CostInputs { mu_i: k / 5.0, total_time: 10.0, zeta: 0.5, g: 2.0, r: rg / 2.0, ..Default::default() };
            let t = optimal_gate_angle(&i).unwrap().tau_star;
            let g = grid_min(|x| log_runtime_r(&i, x));
            assert!((t / g - 1.0).abs() < 0.05, "{t} vs {g}");
            let r = runtime_r(&i, t).unwrap();
            assert!(r <= runtime_r(&i, t * 1.5).unwrap() && r <= runtime_r(&i, t / 1.5).unwrap());
        }
    }

    #[test]
    fn derived_quartic_vanishes_at_optimum() {
        let i = CostInputs { mu_i: 7.0, total_time: 9.0, g: 3.0, r: 2e-3, ..Default::default() };
        let rep = optimal_gate_angle(&i).unwrap();
        let x = (rep.tau_star / 2.0).tan();
        let scale = 4.0 * i.k() * x * x;
        assert!(rep.breakdown["quartic_residual_derived"].abs() < 1e-6 * scale);
        assert!(quartic(&i, x, QuarticSigns::Printed).abs() > 1e-3 * scale);
    }

    #[test]
    fn asp_cost_ratio() {
        let c = asp_costs(12, 39.6, 5.0);
        assert!((c.measure / c.prepare - 1e6 / 25.0).abs() < 1e-6);
        assert!((ScalingPreset::HydrogenChain.mu_i(12) - 39.6).abs() < 0.5);
    }

    #[test]
    fn degenerate_trotter() {
        let r = compare_trotter_lcu(4, 2.0, 1.0, 3.0, 0, 10, 1.0);
        assert_eq!(r.trotter, 0.0);
        assert_eq!(lcu_rule_of_thumb(10, 2.0), 2000.0);
    }
}
