//! Adiabatic weight paths `w(u)`, their integrals `z(u)`, and time-dependent
//! Hamiltonians `H(u) = H_B + w(u)·H_I` or snapshot interpolations.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::chem::HamiltonianModel;
use crate::pauli::{PauliString, PauliSum};

const INVERSE_TOL: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("u = {0} outside [0, 1]")]
    UOutOfRange(f64),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("snapshots disagree: {0}")]
    SnapshotMismatch(String),
    #[error("total time must be finite and non-negative, got {0}")]
    InvalidTime(f64),
}

/// Monotone cubic (Fritsch-Carlson) interpolant through `(u_i, w_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedPath {
    u: Vec<f64>,
    w: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TabulatedPath {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, ScheduleError> {
        let bad = |m: &str| Err(ScheduleError::InvalidPath(m.to_string()));
        if points.len() < 2 {
            return bad("need at least two points");
        }
        let u: Vec<f64> = points.iter().map(|p| p.0).collect();
        let w: Vec<f64> = points.iter().map(|p| p.1).collect();
        if u[0] != 0.0 || *u.last().unwrap() != 1.0 {
            return bad("u must run from 0 to 1");
        }
        if u.windows(2).any(|p| p[1] <= p[0]) {
            return bad("u must be strictly increasing");
        }
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return bad("w must be finite and non-negative");
        }
        if w[0] != 0.0 || *w.last().unwrap() != 1.0 {
            return bad("w(0) must be 0 and w(1) must be 1");
        }
        if w.windows(2).any(|p| p[0] == 0.0 && p[1] == 0.0) {
            return bad("w vanishes on an interval, so z is not invertible");
        }
        let n = u.len();
        let delta: Vec<f64> = (0..n - 1).map(|k| (w[k + 1] - w[k]) / (u[k + 1] - u[k])).collect();
        let mut slopes = vec![0.0; n];
        slopes[0] = delta[0];
        slopes[n - 1] = delta[n - 2];
        for k in 1..n - 1 {
            slopes[k] = if delta[k - 1] * delta[k] <= 0.0 { 0.0 } else { (delta[k - 1] + delta[k]) / 2.0 };
        }
        for k in 0..n - 1 {
            if delta[k] == 0.0 {
                slopes[k] = 0.0;
                slopes[k + 1] = 0.0;
                continue;
            }
            let a = slopes[k] / delta[k];
            let b = slopes[k + 1] / delta[k];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                slopes[k] = t * a * delta[k];
                slopes[k + 1] = t * b * delta[k];
            }
        }
        let mut path = TabulatedPath { u, w, slopes, cumulative: vec![0.0; n] };
        for k in 0..n - 1 {
            path.cumulative[k + 1] = path.cumulative[k] + path.piece_integral(k, 1.0);
        }
        Ok(path)
    }

    /// Whitespace-separated `u w` pairs, `#` comments allowed.
    pub fn parse(text: &str) -> Result<Self, ScheduleError> {
        let mut points = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<f64> = line
                .split_whitespace()
                .map(|w| w.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| ScheduleError::Parse { line: i + 1, message: format!("bad numbers in {line:?}") })?;
            if nums.len() != 2 {
                return Err(ScheduleError::Parse { line: i + 1, message: "expected `u w`".into() });
            }
            points.push((nums[0], nums[1]));
        }
        TabulatedPath::new(&points)
    }

    fn locate(&self, u: f64) -> usize {
        match self.u.binary_search_by(|x| x.partial_cmp(&u).expect("finite")) {
            Ok(k) => k.min(self.u.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.u.len() - 2),
        }
    }

    fn eval(&self, u: f64) -> f64 {
        let k = self.locate(u);
        let h = self.u[k + 1] - self.u[k];
        let t = (u - self.u[k]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.w[k]
            + (t3 - 2.0 * t2 + t) * h * self.slopes[k]
            + (-2.0 * t3 + 3.0 * t2) * self.w[k + 1]
            + (t3 - t2) * h * self.slopes[k + 1]
    }

    /// `∫ w` from knot `k` to the fraction `t` of piece `k`.
    fn piece_integral(&self, k: usize, t: f64) -> f64 {
        let h = self.u[k + 1] - self.u[k];
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        h * ((t4 / 2.0 - t3 + t) * self.w[k]
            + (t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0) * h * self.slopes[k]
            + (-t4 / 2.0 + t3) * self.w[k + 1]
            + (t4 / 4.0 - t3 / 3.0) * h * self.slopes[k + 1])
    }

    fn integral(&self, u: f64) -> f64 {
        let k = self.locate(u);
        let t = (u - self.u[k]) / (self.u[k + 1] - self.u[k]);
        self.cumulative[k] + self.piece_integral(k, t)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.w.iter().copied())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AdiabaticPath {
    /// `w(u) = u`.
    Linear,
    /// `w(u) = 2u² − u⁴`.
    Quadratic,
    /// `w ≡ 1`: the full Hamiltonian at all times.
    Constant,
    Tabulated(TabulatedPath),
}

impl AdiabaticPath {
    pub fn name(&self) -> &'static str {
        match self {
            AdiabaticPath::Linear => "linear",
            AdiabaticPath::Quadratic => "quadratic",
            AdiabaticPath::Constant => "constant",
            AdiabaticPath::Tabulated(_) => "tabulated",
        }
    }

    pub fn w(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            AdiabaticPath::Linear => u,
            AdiabaticPath::Quadratic => 2.0 * u * u - u.powi(4),
            AdiabaticPath::Constant => 1.0,
            AdiabaticPath::Tabulated(t) => t.eval(u),
        }
    }

    /// `z(u) = ∫₀ᵘ w`.
    pub fn z(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            AdiabaticPath::Linear => u * u / 2.0,
            AdiabaticPath::Quadratic => 2.0 * u.powi(3) / 3.0 - u.powi(5) / 5.0,
            AdiabaticPath::Constant => u,
            AdiabaticPath::Tabulated(t) => t.integral(u),
        }
    }

    /// `ζ = z(1)`.
    pub fn zeta(&self) -> f64 {
        self.z(1.0)
    }

    /// Inverse of `z` on `[0, ζ]`.
    pub fn z_inverse(&self, v: f64) -> f64 {
        let v = v.clamp(0.0, self.zeta());
        match self {
            AdiabaticPath::Linear => (2.0 * v).sqrt(),
            AdiabaticPath::Constant => v,
            _ => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                let mut x = 0.5;
                for _ in 0..200 {
                    let f = self.z(x) - v;
                    if f.abs() < 1e-17 {
                        break;
                    }
                    if f > 0.0 {
                        hi = x;
                    } else {
                        lo = x;
                    }
                    let d = self.w(x);
                    let newton = if d > 0.0 { x - f / d } else { f64::NAN };
                    x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                    if hi - lo < INVERSE_TOL {
                        break;
                    }
                }
                x
            }
        }
    }
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleKind {
    Weighted { model: Arc<HamiltonianModel>, path: AdiabaticPath },
    /// Piecewise-linear interpolation between snapshots on a uniform `u` grid.
    Snapshots { strings: Vec<PauliString>, coefficients: Vec<Vec<f64>>, qubits: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSchedule {
    pub kind: ScheduleKind,
    pub total_time: f64,
}

impl HamiltonianSchedule {
    pub fn weighted(model: Arc<HamiltonianModel>, path: AdiabaticPath, total_time: f64) -> Result<Self, ScheduleError> {
        if !(total_time >= 0.0 && total_time.is_finite()) {
            return Err(ScheduleError::InvalidTime(total_time));
        }
        Ok(HamiltonianSchedule { kind: ScheduleKind::Weighted { model, path }, total_time })
    }

    pub fn snapshots(snapshots: &[PauliSum], total_time: f64) -> Result<Self, ScheduleError> {
        if !(total_time >= 0.0 && total_time.is_finite()) {
            return Err(ScheduleError::InvalidTime(total_time));
        }
        if snapshots.len() < 2 {
            return Err(ScheduleError::SnapshotMismatch("need at least two snapshots".into()));
        }
        let qubits = snapshots[0].qubit_count();
        if snapshots.iter().any(|s| s.qubit_count() != qubits) {
            return Err(ScheduleError::SnapshotMismatch("qubit counts differ".into()));
        }
        let mut strings: Vec<PauliString> = Vec::new();
        for s in snapshots {
            for (_, p) in s.signed_terms() {
                if !strings.contains(&p) {
                    strings.push(p);
                }
            }
        }
        let coefficients = snapshots
            .iter()
            .map(|s| {
                let mut row = vec![0.0; strings.len()];
                for (c, p) in s.signed_terms() {
                    let k = strings.iter().position(|q| *q == p).expect("collected above");
                    row[k] = c;
                }
                row
            })
            .collect();
        Ok(HamiltonianSchedule { kind: ScheduleKind::Snapshots { strings, coefficients, qubits }, total_time })
    }

    pub fn qubit_count(&self) -> usize {
        match &self.kind {
            ScheduleKind::Weighted { model, .. } => model.qubit_count(),
            ScheduleKind::Snapshots { qubits, .. } => *qubits,
        }
    }

    /// Signed `(coefficient, string)` pairs of `H(u)`, identity included.
    pub fn terms_at(&self, u: f64) -> Result<Vec<(f64, PauliString)>, ScheduleError> {
        if !(0.0..=1.0).contains(&u) {
            return Err(ScheduleError::UOutOfRange(u));
        }
        Ok(match &self.kind {
            ScheduleKind::Weighted { model, path } => {
                let w = path.w(u);
                let id = PauliString::identity(model.qubit_count()).expect("valid length");
                let mut out = vec![(model.constant, id)];
                out.extend(model.background.signed_terms());
                out.extend(model.interaction.signed_terms().map(|(c, p)| (c * w, p)));
                out
            }
            ScheduleKind::Snapshots { strings, coefficients, .. } => {
                let segments = coefficients.len() - 1;
                let x = u * segments as f64;
                let k = (x.floor() as usize).min(segments - 1);
                let f = x - k as f64;
                strings
                    .iter()
                    .enumerate()
                    .map(|(n, p)| ((1.0 - f) * coefficients[k][n] + f * coefficients[k + 1][n], *p))
                    .collect()
            }
        })
    }

    pub fn hamiltonian_at(&self, u: f64) -> Result<PauliSum, ScheduleError> {
        let terms = self.terms_at(u)?;
        PauliSum::from_signed(self.qubit_count(), terms).map_err(|e| ScheduleError::InvalidPath(e.to_string()))
    }

    /// `out = H(u)·psi`.
    pub fn apply_at(&self, u: f64, psi: &[Complex64], out: &mut [Complex64]) -> Result<(), ScheduleError> {
        out.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for (c, p) in self.terms_at(u)? {
            if c == 0.0 {
                continue;
            }
            for (i, a) in psi.iter().enumerate() {
                let (j, ph) = p.act(i as u64);
                out[j as usize] += ph * a * c;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_values() {
        assert!((AdiabaticPath::Linear.zeta() - 0.5).abs() < 1e-15);
        assert!((AdiabaticPath::Quadratic.zeta() - 7.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_quadrature() {
        for path in [AdiabaticPath::Linear, AdiabaticPath::Quadratic] {
            let q = integrate(&|u| path.w(u), 0.0, 1.0, 1e-13);
            assert!((q - path.zeta()).abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_reproduces_knots_and_integral() {
        let pts: Vec<(f64, f64)> = (0..=10).map(|k| {
            let u = k as f64 / 10.0;
            (u, 2.0 * u * u - u.powi(4))
        }).collect();
        let t = TabulatedPath::new(&pts).unwrap();
        let path = AdiabaticPath::Tabulated(t);
        for (u, w) in &pts {
            assert!((path.w(*u) - w).abs() < 1e-14);
        }
        let q = integrate(&|u| path.w(u), 0.0, 1.0, 1e-13);
        assert!((q - path.zeta()).abs() < 1e-12);
        assert!((path.zeta() - 7.0 / 15.0).abs() < 2e-3);
    }

    #[test]
    fn tabulated_rejects_bad_input() {
        assert!(TabulatedPath::new(&[(0.0, 0.0), (0.5, -0.1), (1.0, 1.0)]).is_err());
        assert!(TabulatedPath::new(&[(0.0, 0.0), (0.5, 0.0), (0.7, 0.0), (1.0, 1.0)]).is_err());
        assert!(TabulatedPath::new(&[(0.0, 0.1), (1.0, 1.0)]).is_err());
        assert!(matches!(TabulatedPath::parse("0 0\n0.5 x\n1 1\n"), Err(ScheduleError::Parse { line: 2, .. })));
    }

    #[test]
    fn inverse_round_trip() {
        for path in [AdiabaticPath::Linear, AdiabaticPath::Quadratic] {
            for k in 1..100 {
                let u = k as f64 / 100.0;
                assert!((path.z_inverse(path.z(u)) - u).abs() < 1e-12, "{} {u} {}", path.name(), path.z_inverse(path.z(u)));
            }
        }
    }
}
