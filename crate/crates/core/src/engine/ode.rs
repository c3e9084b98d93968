//! Adaptive Dormand-Prince 5(4) integration of `dψ/dt = i·H(t/T)·ψ`.

use num_complex::Complex64;

use super::statevector::StateVector;
use super::{check_size, EngineError};
use crate::schedule::HamiltonianSchedule;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest tolerated `|‖ψ(T)‖² − 1|`.
    pub norm_tol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, norm_tol: 1e-8 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// `ψ(T)` for `ψ(0) = psi0`.
pub fn run_exact_reference(
    schedule: &HamiltonianSchedule,
    psi0: &StateVector,
    opts: OdeOptions,
) -> Result<StateVector, EngineError> {
    let n = schedule.qubit_count();
    if psi0.qubits() != n {
        return Err(EngineError::QubitMismatch { expected: n, found: psi0.qubits() });
    }
    check_size(n)?;
    let big_t = schedule.total_time;
    if big_t == 0.0 {
        return Ok(psi0.clone());
    }
    let dim = 1usize << n;
    let rhs = |t: f64, y: &[Complex64], out: &mut [Complex64]| -> Result<(), EngineError> {
        schedule.apply_at((t / big_t).clamp(0.0, 1.0), y, out)?;
        out.iter_mut().for_each(|v| *v *= Complex64::new(0.0, 1.0));
        Ok(())
    };
    let mut y: Vec<Complex64> = psi0.amplitudes().to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); dim]; 7];
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    let mut y_new = vec![Complex64::new(0.0, 0.0); dim];
    let mut t = 0.0;
    let mut h = (big_t / 100.0).min(0.01);
    rhs(0.0, &y, &mut k[0])?;
    while t < big_t {
        if t + h > big_t {
            h = big_t - t;
        }
        if h < 1e-14 * big_t.max(1.0) {
            return Err(EngineError::StepUnderflow(t));
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        acc += kj[i] * (h * A[s][j]);
                    }
                }
                stage[i] = acc;
            }
            rhs(t + C[s] * h, &stage, &mut k[s])?;
            if s == 6 {
                y_new.copy_from_slice(&stage);
            }
        }
        let mut err = 0.0;
        for i in 0..dim {
            let mut e = Complex64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += kj[i] * (h * E[j]);
                }
            }
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / dim as f64).sqrt();
        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            // First-same-as-last: stage 7 was evaluated at the accepted point.
            let last = k.pop().expect("seven stages");
            k.insert(0, last);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    let out = StateVector::from_amplitudes(n, y);
    let drift = (out.norm_sqr() - 1.0).abs();
    if drift > opts.norm_tol {
        return Err(EngineError::NormDrift(drift));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{BackgroundRule, HamiltonianModel};
    use crate::engine::ControlLayout;
    use crate::pauli::PauliSum;
    use crate::schedule::AdiabaticPath;
    use std::sync::Arc;

    #[test]
    fn constant_hamiltonian_matches_phase() {
        let h = PauliSum::from_signed(1, [(0.7, "Z".parse().unwrap())]).unwrap();
        let model = Arc::new(HamiltonianModel::split(&h, BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder));
        let s = HamiltonianSchedule::weighted(model, AdiabaticPath::Linear, 3.0).unwrap();
        let psi = StateVector::basis(1, 1);
        let out = run_exact_reference(&s, &psi, OdeOptions::default()).unwrap();
        let want = Complex64::from_polar(1.0, -0.7 * 3.0);
        assert!((out.amplitudes()[1] - want).norm() < 1e-9);
    }

    #[test]
    fn zero_time_is_identity() {
        let h = PauliSum::from_signed(2, [(0.7, "XX".parse().unwrap())]).unwrap();
        let model = Arc::new(HamiltonianModel::split(&h, BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder));
        let s = HamiltonianSchedule::weighted(model, AdiabaticPath::Linear, 0.0).unwrap();
        let psi = StateVector::basis(2, 2);
        assert_eq!(run_exact_reference(&s, &psi, OdeOptions::default()).unwrap(), psi);
    }

    #[test]
    fn linear_ramp_matches_closed_form() {
        // H(t) = (t/T)·X: the evolution is exp(i·T/2·X).
        let h = PauliSum::from_signed(1, [(1.0, "X".parse().unwrap())]).unwrap();
        let model = Arc::new(HamiltonianModel::split(&h, BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder));
        let s = HamiltonianSchedule::weighted(model, AdiabaticPath::Linear, 2.4).unwrap();
        let out = run_exact_reference(&s, &StateVector::basis(1, 0), OdeOptions::default()).unwrap();
        let a = 1.2f64;
        assert!((out.amplitudes()[0] - Complex64::new(a.cos(), 0.0)).norm() < 1e-9);
        assert!((out.amplitudes()[1] - Complex64::new(0.0, a.sin())).norm() < 1e-9);
    }
}
