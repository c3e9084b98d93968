//! Ground-state energy from `ρ(s)` queries: binary search, the arctan
//! two-point fit and Robbins-Monro, plus direct Pauli averaging.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::engine::{estimate_rho, AmplitudeEstimate, EngineError, RhoSetup, StateVector};
use crate::pauli::PauliSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("ρ₊ and ρ₋ coincide; the fit is degenerate")]
    Degenerate,
    #[error("s·δ is outside the principal branch")]
    OutOfBranch,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `u(τ) = r·g·μ_I/sin τ + tan(τ/2)·μ_I`.
pub fn central_time_u(tau: f64, mu_i: f64, r: f64, g: f64) -> f64 {
    r * g * mu_i / tau.sin() + (tau / 2.0).tan() * mu_i
}

/// `s = arctan(δ₀/u)/δ₀`, tending to `π/(2δ₀)` as `u → 0`.
pub fn central_time_s(delta0: f64, u: f64) -> f64 {
    if u <= 0.0 {
        return FRAC_PI_2 / delta0;
    }
    (delta0 / u).atan() / delta0
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyWindow {
    pub lo: f64,
    pub hi: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self, EstimatorError> {
        if !(lo < hi) {
            return Err(EstimatorError::Invalid(format!("empty window [{lo}, {hi}]")));
        }
        Ok(EnergyWindow { lo, hi })
    }

    pub fn centred(centre: f64, half_width: f64) -> Result<Self, EstimatorError> {
        EnergyWindow::new(centre - half_width, centre + half_width)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn delta0(&self) -> f64 {
        self.width() / 2.0
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, e: f64) -> bool {
        self.lo <= e && e <= self.hi
    }
}

/// Source of `ρ(s)` at a test energy.
pub trait RhoOracle {
    /// Estimate from `samples` independent circuits.
    fn query(&mut self, energy: f64, s: f64, samples: usize) -> Result<AmplitudeEstimate, EstimatorError>;
}

/// `q·sin(s(E − E_GS))` with no statistical error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineOracle {
    pub ground_energy: f64,
    pub damping: f64,
}

impl RhoOracle for SineOracle {
    fn query(&mut self, energy: f64, s: f64, samples: usize) -> Result<AmplitudeEstimate, EstimatorError> {
        Ok(AmplitudeEstimate {
            mean: self.damping * (s * (energy - self.ground_energy)).sin(),
            std_error: 0.0,
            shots_used: samples,
            shots_filtered: 0,
        })
    }
}

/// Monte-Carlo `ρ(s)` from the simulator; each query uses a fresh seed.
pub struct SimulatedOracle<'a> {
    pub setup: &'a RhoSetup,
    pub seed: u64,
    pub queries: u64,
    /// Draw the same circuits and shots for every query, so that only the
    /// classical phase `sE` differs between energies.
    pub common_circuits: bool,
}

impl<'a> SimulatedOracle<'a> {
    pub fn new(setup: &'a RhoSetup, seed: u64) -> Self {
        SimulatedOracle { setup, seed, queries: 0, common_circuits: false }
    }

    pub fn with_common_circuits(mut self, on: bool) -> Self {
        self.common_circuits = on;
        self
    }
}

impl RhoOracle for SimulatedOracle<'_> {
    fn query(&mut self, energy: f64, s: f64, samples: usize) -> Result<AmplitudeEstimate, EstimatorError> {
        let seed = if self.common_circuits {
            self.seed
        } else {
            self.seed.wrapping_add(self.queries.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        };
        self.queries += 1;
        Ok(estimate_rho(self.setup, energy, s, samples, seed)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Above,
    Below,
    Undetermined,
}

impl Decision {
    pub fn name(self) -> &'static str {
        match self {
            Decision::Above => "above",
            Decision::Below => "below",
            Decision::Undetermined => "undetermined",
        }
    }
}

/// One oracle call in an estimator trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueryRecord {
    pub iteration: usize,
    pub energy: f64,
    pub s: f64,
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub decision: Option<Decision>,
}

impl QueryRecord {
    pub const CSV_HEADER: &'static str = "iteration,E,s,mean,std_error,decision";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.12},{:.8},{:.10},{:.10},{}",
            self.iteration,
            self.energy,
            self.s,
            self.mean,
            self.std_error,
            self.decision.map_or("", |d| d.name())
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyEstimate {
    pub energy: f64,
    /// Half-width of the final window or a standard error.
    pub uncertainty: f64,
    pub queries: usize,
    pub samples: usize,
    pub flags: Vec<String>,
    pub trace: Vec<QueryRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConfidenceRule {
    /// Declare a sign once `|mean| ≥ sigmas·std_error`.
    pub sigmas: f64,
    /// Largest per-query sample count reached by doubling.
    pub max_samples: usize,
}

impl Default for ConfidenceRule {
    fn default() -> Self {
        ConfidenceRule { sigmas: 3.0, max_samples: 1 << 20 }
    }
}

/// Number of sign queries needed to shrink `width` below `eps`.
pub fn binary_search_queries(width: f64, eps: f64) -> usize {
    if width <= eps {
        return 0;
    }
    ((width / eps).log2() - 1e-9).ceil() as usize
}

/// Bisection on the sign of `ρ(s)` at the window midpoint. `u` is the
/// damping rate of [`central_time_u`]; `s` is recomputed from the current
/// half-width before every query.
pub fn binary_search_energy<O: RhoOracle>(
    oracle: &mut O,
    window: EnergyWindow,
    eps: f64,
    samples_per_query: usize,
    u: f64,
    rule: ConfidenceRule,
) -> Result<EnergyEstimate, EstimatorError> {
    if !(eps > 0.0) || samples_per_query == 0 {
        return Err(EstimatorError::Invalid("precision and samples must be positive".into()));
    }
    let k = binary_search_queries(window.width(), eps);
    let mut w = window;
    let mut trace = Vec::with_capacity(k);
    let mut flags = Vec::new();
    let mut total = 0;
    for iteration in 0..k {
        let mid = w.mid();
        let s = central_time_s(w.delta0(), u);
        let mut n = samples_per_query;
        let (est, decision) = loop {
            let est = oracle.query(mid, s, n)?;
            total += n;
            if est.mean.abs() >= rule.sigmas * est.std_error && !(est.mean == 0.0 && est.std_error > 0.0) {
                break (est, if est.mean >= 0.0 { Decision::Above } else { Decision::Below });
            }
            if n * 2 > rule.max_samples {
                break (est, Decision::Undetermined);
            }
            n *= 2;
        };
        trace.push(QueryRecord {
            iteration,
            energy: mid,
            s,
            mean: est.mean,
            std_error: est.std_error,
            samples: n,
            decision: Some(decision),
        });
        match decision {
            Decision::Above => w.hi = mid,
            Decision::Below => w.lo = mid,
            Decision::Undetermined => {
                flags.push(format!("sign undetermined at E = {mid} after {n} samples"));
                break;
            }
        }
    }
    Ok(EnergyEstimate { energy: w.mid(), uncertainty: w.delta0(), queries: trace.len(), samples: total, flags, trace })
}

/// `E_test + arctan(tan(sε)·(ρ₊+ρ₋)/(ρ₋−ρ₊))/s`, exact for
/// `ρ± = q·sin(s(E_test ± ε − E_GS))` with any `q > 0`.
pub fn arctan_fit_energy(rho_plus: f64, rho_minus: f64, e_test: f64, eps: f64, s: f64) -> Result<f64, EstimatorError> {
    if !(s > 0.0 && eps > 0.0 && s * eps < FRAC_PI_2) {
        return Err(EstimatorError::Invalid(format!("need 0 < s·ε < π/2, got s = {s}, ε = {eps}")));
    }
    let denom = rho_minus - rho_plus;
    if denom == 0.0 {
        return Err(EstimatorError::Degenerate);
    }
    // ρ₋ − ρ₊ = −2q·cos(sδ)·sin(sε) is negative only on the principal branch.
    if denom > 0.0 {
        return Err(EstimatorError::OutOfBranch);
    }
    Ok(e_test + ((s * eps).tan() * (rho_plus + rho_minus) / denom).atan() / s)
}

/// Two `ρ` queries at `E_test ± ε` and the arctan fit. Out-of-branch
/// results halve `s` (and the result is flagged) down to `min_s`.
pub fn arctan_fit_run<O: RhoOracle>(
    oracle: &mut O,
    e_test: f64,
    eps: f64,
    s: f64,
    samples: usize,
    min_s: f64,
) -> Result<EnergyEstimate, EstimatorError> {
    let mut s = s;
    let mut trace = Vec::new();
    let mut flags = Vec::new();
    let mut total = 0;
    loop {
        let plus = oracle.query(e_test + eps, s, samples)?;
        let minus = oracle.query(e_test - eps, s, samples)?;
        total += 2 * samples;
        for (e, r) in [(e_test + eps, plus), (e_test - eps, minus)] {
            trace.push(QueryRecord {
                iteration: trace.len(),
                energy: e,
                s,
                mean: r.mean,
                std_error: r.std_error,
                samples,
                decision: None,
            });
        }
        match arctan_fit_energy(plus.mean, minus.mean, e_test, eps, s) {
            Ok(energy) => {
                let uncertainty = arctan_fit_error(plus, minus, e_test, eps, s);
                return Ok(EnergyEstimate { energy, uncertainty, queries: trace.len(), samples: total, flags, trace });
            }
            Err(EstimatorError::OutOfBranch) | Err(EstimatorError::Degenerate) if s / 2.0 >= min_s => {
                flags.push(format!("out of branch at s = {s}; halving"));
                s /= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Linearised standard error of the arctan fit.
fn arctan_fit_error(plus: AmplitudeEstimate, minus: AmplitudeEstimate, e_test: f64, eps: f64, s: f64) -> f64 {
    let f = |a: f64, b: f64| arctan_fit_energy(a, b, e_test, eps, s).unwrap_or(f64::NAN);
    let h = 1e-7;
    let dp = (f(plus.mean + h, minus.mean) - f(plus.mean - h, minus.mean)) / (2.0 * h);
    let dm = (f(plus.mean, minus.mean + h) - f(plus.mean, minus.mean - h)) / (2.0 * h);
    ((dp * plus.std_error).powi(2) + (dm * minus.std_error).powi(2)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RmConfig {
    /// `a_n = a / n^β`.
    pub a: f64,
    pub beta: f64,
    pub s: f64,
    pub max_iters: usize,
    /// Energy unit of a step; `1e-3` takes steps in millihartree.
    pub step_unit: f64,
    /// Samples per oracle call.
    pub samples: usize,
}

impl Default for RmConfig {
    fn default() -> Self {
        RmConfig { a: 10.0, beta: 0.75, s: 20.0, max_iters: 1000, step_unit: 1e-3, samples: 1 }
    }
}

impl RmConfig {
    /// `Σa_n = ∞` and `Σa_n² < ∞` hold exactly when `1/2 < β ≤ 1`.
    pub fn steps_converge(&self) -> bool {
        self.a > 0.0 && self.beta > 0.5 && self.beta <= 1.0
    }

    pub fn step(&self, n: usize) -> f64 {
        self.a / (n as f64).powf(self.beta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RmResult {
    /// `E₀, E₁, …`.
    pub iterates: Vec<f64>,
    pub clamped: usize,
    pub trace: Vec<QueryRecord>,
}

impl RmResult {
    pub fn last(&self) -> f64 {
        *self.iterates.last().expect("E₀ is always present")
    }
}

/// `E_{n+1} = E_n − a_n·V_n(E_n)`, clamped to `E₀ ± π/(2s)`.
pub fn robbins_monro_energy<O: RhoOracle>(oracle: &mut O, e0: f64, cfg: &RmConfig) -> Result<RmResult, EstimatorError> {
    if !cfg.steps_converge() {
        return Err(EstimatorError::Invalid(format!("step exponent {} outside (1/2, 1]", cfg.beta)));
    }
    let half = FRAC_PI_2 / cfg.s;
    let (lo, hi) = (e0 - half, e0 + half);
    let mut e = e0;
    let mut out = RmResult { iterates: vec![e0], clamped: 0, trace: Vec::with_capacity(cfg.max_iters) };
    for n in 1..=cfg.max_iters {
        let v = oracle.query(e, cfg.s, cfg.samples)?;
        out.trace.push(QueryRecord {
            iteration: n,
            energy: e,
            s: cfg.s,
            mean: v.mean,
            std_error: v.std_error,
            samples: cfg.samples,
            decision: None,
        });
        let next = e - cfg.step(n) * cfg.step_unit * v.mean;
        e = next.clamp(lo, hi);
        if e != next {
            out.clamped += 1;
        }
        out.iterates.push(e);
    }
    Ok(out)
}

/// `M_S = ⌈μ²/ε²⌉` shots for standard error `ε`.
pub fn direct_shot_count(mu: f64, eps: f64) -> u64 {
    (mu * mu / (eps * eps)).ceil() as u64
}

/// Shots per term proportional to `|c_n|`, summing to about `total`.
pub fn allocate_shots(h: &PauliSum, total: u64) -> Vec<u64> {
    let mu = h.without_identity().one_norm();
    h.terms()
        .iter()
        .map(|t| if t.string.is_identity() || mu == 0.0 { 0 } else { (total as f64 * t.coefficient / mu).round() as u64 })
        .collect()
}

/// `⟨H⟩` by measuring every term separately on copies of `state`, with
/// `μ²/ε²` shots split in proportion to the coefficients.
pub fn direct_pauli_energy<R: Rng + ?Sized>(
    h: &PauliSum,
    state: &StateVector,
    eps: f64,
    rng: &mut R,
) -> Result<EnergyEstimate, EstimatorError> {
    if !(eps > 0.0) {
        return Err(EstimatorError::Invalid("precision must be positive".into()));
    }
    let mu = h.without_identity().one_norm();
    let total = direct_shot_count(mu, eps);
    let alloc = allocate_shots(h, total);
    let amps = state.amplitudes();
    let mut energy = h.identity_coefficient();
    let mut var = 0.0;
    let mut used = 0;
    for (t, &m) in h.terms().iter().zip(&alloc) {
        if t.string.is_identity() || m == 0 {
            continue;
        }
        let single = PauliSum::from_signed(h.qubit_count(), [(1.0, t.string.unsigned())]).map_err(EngineError::from)?;
        let ev = single.expectation(amps) * t.string.sign();
        let p_plus = (0.5 * (1.0 + ev)).clamp(0.0, 1.0);
        let plus = Binomial::new(m, p_plus).map_err(|e| EstimatorError::Invalid(e.to_string()))?.sample(rng);
        let mean = (2.0 * plus as f64 - m as f64) / m as f64;
        energy += t.coefficient * mean;
        let term_var = if m > 1 { (1.0 - mean * mean) * m as f64 / (m as f64 - 1.0) } else { 1.0 };
        var += t.coefficient * t.coefficient * term_var / m as f64;
        used += m as usize;
    }
    Ok(EnergyEstimate { energy, uncertainty: var.sqrt(), queries: 0, samples: used, flags: Vec::new(), trace: Vec::new() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineFit {
    pub damping: f64,
    /// Zero crossing `δ₀`.
    pub offset: f64,
    pub damping_error: f64,
    pub offset_error: f64,
}

/// Weighted least-squares fit of `q·sin(s(δ − δ₀))` to `(δ, ρ, σ)` points,
/// linear in the basis `sin(sδ), cos(sδ)`.
pub fn fit_damped_sine(points: &[(f64, f64, f64)], s: f64) -> Result<SineFit, EstimatorError> {
    if points.len() < 2 {
        return Err(EstimatorError::Invalid("need at least two points".into()));
    }
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(d, y, sigma) in points {
        let w = if sigma > 0.0 { 1.0 / (sigma * sigma) } else { 1.0 };
        let (sn, cs) = (s * d).sin_cos();
        ss += w * sn * sn;
        sc += w * sn * cs;
        cc += w * cs * cs;
        ys += w * y * sn;
        yc += w * y * cs;
    }
    let det = ss * cc - sc * sc;
    if det.abs() < 1e-300 {
        return Err(EstimatorError::Degenerate);
    }
    // ρ = a·sin(sδ) + b·cos(sδ) with a = q·cos(sδ₀), b = −q·sin(sδ₀)
    let a = (cc * ys - sc * yc) / det;
    let b = (ss * yc - sc * ys) / det;
    let (var_a, var_b, cov) = (cc / det, ss / det, -sc / det);
    let q = a.hypot(b);
    let offset = (-b).atan2(a) / s;
    let dq = ((a * a * var_a + b * b * var_b + 2.0 * a * b * cov) / (q * q)).sqrt();
    let dphi = ((b * b * var_a + a * a * var_b - 2.0 * a * b * cov) / (q * q * q * q)).sqrt();
    Ok(SineFit { damping: q, offset, damping_error: dq, offset_error: dphi / s })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_values() {
        assert!((central_time_u(FRAC_PI_2, 1.0, 0.0, 3.0) - 1.0).abs() < 1e-15);
        let u = central_time_u(0.2, 10.0, 2e-2, 1.0);
        let want = 0.02 * 10.0 / 0.2f64.sin() + 0.1f64.tan() * 10.0;
        assert!((u - want).abs() < 1e-14);
        assert!((u - 2.0100).abs() < 1e-4);
        assert!(central_time_u(1e-9, 1.0, 0.0, 1.0) < 1e-9);
    }

    #[test]
    fn s_values() {
        assert!((central_time_s(1e-3, 0.0) - 1570.796).abs() < 1e-3);
        assert!((central_time_s(0.3, 0.3) - std::f64::consts::FRAC_PI_4 / 0.3).abs() < 1e-14);
    }

    #[test]
    fn arctan_examples() {
        assert_eq!(arctan_fit_energy(0.3, -0.3, 0.5, 0.01, 20.0).unwrap(), 0.5);
        for q in [1.0, 0.1, 0.01] {
            let e = arctan_fit_energy(q * 0.6f64.sin(), -q * 0.2f64.sin(), 0.010, 0.020, 20.0).unwrap();
            assert!(e.abs() < 1e-12, "{e}");
        }
        assert_eq!(arctan_fit_energy(0.2, 0.2, 0.0, 0.01, 20.0), Err(EstimatorError::Degenerate));
        assert_eq!(arctan_fit_energy(-0.5, 0.2, 0.0, 0.01, 20.0), Err(EstimatorError::OutOfBranch));
    }

    #[test]
    fn five_queries_for_32_steps() {
        let mut o = SineOracle { ground_energy: -1.1, damping: 1.0 };
        let w = EnergyWindow::centred(-1.105, 0.016).unwrap();
        let r = binary_search_energy(&mut o, w, 1e-3, 1, 0.0, ConfidenceRule::default()).unwrap();
        assert_eq!(r.queries, 5);
        assert!((r.energy - -1.1).abs() <= 5e-4);
    }

    #[test]
    fn zero_signal_keeps_iterates() {
        let mut o = SineOracle { ground_energy: 0.25, damping: 1.0 };
        let r = robbins_monro_energy(&mut o, 0.25, &RmConfig::default()).unwrap();
        assert!(r.iterates.iter().all(|e| *e == 0.25));
    }

    #[test]
    fn step_conditions() {
        let mut c = RmConfig::default();
        for (beta, ok) in [(0.5, false), (0.51, true), (0.75, true), (1.0, true), (1.01, false)] {
            c.beta = beta;
            assert_eq!(c.steps_converge(), ok, "{beta}");
        }
    }

    #[test]
    fn shot_budget() {
        assert_eq!(direct_shot_count(2.0, 1e-3), 4_000_000);
    }

    #[test]
    fn sine_fit_recovers_parameters() {
        let pts: Vec<(f64, f64, f64)> =
            (0..21).map(|k| -0.05 + 0.005 * k as f64).map(|d| (d, 0.46 * (20.0 * (d - 0.98e-3)).sin(), 0.01)).collect();
        let fit = fit_damped_sine(&pts, 20.0).unwrap();
        assert!((fit.damping - 0.46).abs() < 1e-12);
        assert!((fit.offset - 0.98e-3).abs() < 1e-12);
        assert!(fit.damping_error > 0.0 && fit.offset_error > 0.0);
    }
}
