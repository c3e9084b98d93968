//! Direct application of sampled rotation circuits on the system register.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::statevector::StateVector;
use super::{check_size, EngineError};
use crate::sampler::{SampledCircuit, Variant};

/// Diagonal of the circuit's background generator, if it has one.
pub fn background_diagonal(c: &SampledCircuit) -> Option<Vec<f64>> {
    c.background.as_ref().and_then(|b| b.diagonal())
}

/// Apply the circuit to `v`. Background circuits need the diagonal of `H_B`
/// in `diag`; it is computed on the fly when omitted.
pub fn apply_sampled(c: &SampledCircuit, v: &mut StateVector, diag: Option<&[f64]>) -> Result<(), EngineError> {
    if v.qubits() != c.qubits {
        return Err(EngineError::QubitMismatch { expected: c.qubits, found: v.qubits() });
    }
    if c.variant == Variant::Base {
        for e in &c.events {
            v.apply_rotation(&e.string, e.angle);
        }
        return Ok(());
    }
    let owned;
    let diag = match diag {
        Some(d) => d,
        None => {
            owned = background_diagonal(c).ok_or(EngineError::MissingBackground)?;
            &owned
        }
    };
    let mut last = 0.0;
    for e in &c.events {
        let dt = e.time - last;
        if dt != 0.0 {
            v.apply_diagonal(diag, c.direction * dt);
        }
        v.apply_rotation(&e.string, e.angle);
        last = e.time;
    }
    let dt = c.duration - last;
    if dt != 0.0 {
        v.apply_diagonal(diag, c.direction * dt);
    }
    Ok(())
}

/// Dense unitary of one sampled circuit.
pub fn sampled_unitary(c: &SampledCircuit) -> Result<DMatrix<Complex64>, EngineError> {
    check_size(c.qubits)?;
    let diag = match c.variant {
        Variant::Background => Some(background_diagonal(c).ok_or(EngineError::MissingBackground)?),
        Variant::Base => None,
    };
    let dim = 1usize << c.qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut v = StateVector::basis(c.qubits, col as u64);
        apply_sampled(c, &mut v, diag.as_deref())?;
        for (row, a) in v.amplitudes().iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    Ok(m)
}
