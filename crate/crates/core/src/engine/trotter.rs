//! First-order product-formula baseline for the adiabatic evolution.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::native::{rotation_two_qubit_count, ControlLayout};
use super::statevector::StateVector;
use super::{check_size, EngineError};
use crate::schedule::HamiltonianSchedule;

/// `steps` first-order steps with `H` frozen at each step's midpoint. Terms
/// are applied in schedule order unless `shuffle` seeds a per-step permutation.
pub fn run_trotter_asp(
    schedule: &HamiltonianSchedule,
    steps: usize,
    psi0: &StateVector,
    shuffle: Option<u64>,
) -> Result<StateVector, EngineError> {
    let n = schedule.qubit_count();
    if psi0.qubits() != n {
        return Err(EngineError::QubitMismatch { expected: n, found: psi0.qubits() });
    }
    check_size(n)?;
    if steps == 0 {
        return Err(EngineError::InvalidArgument("Trotter step count must be positive".into()));
    }
    let dt = schedule.total_time / steps as f64;
    let mut rng = shuffle.map(ChaCha8Rng::seed_from_u64);
    let mut v = psi0.clone();
    for j in 0..steps {
        let u = (j as f64 + 0.5) / steps as f64;
        let mut terms = schedule.terms_at(u)?;
        if let Some(r) = rng.as_mut() {
            terms.shuffle(r);
        }
        for (c, p) in terms {
            if c != 0.0 {
                v.apply_rotation(&p, c * dt);
            }
        }
    }
    Ok(v)
}

/// Native two-qubit gates used by `steps` steps.
pub fn trotter_two_qubit_count(schedule: &HamiltonianSchedule, steps: usize) -> Result<usize, EngineError> {
    let mut total = 0;
    for j in 0..steps {
        let u = (j as f64 + 0.5) / steps as f64;
        total += schedule
            .terms_at(u)?
            .iter()
            .filter(|(c, p)| *c != 0.0 && !p.is_identity())
            .map(|(_, p)| rotation_two_qubit_count(p.weight(), ControlLayout::Uncontrolled))
            .sum::<usize>();
    }
    Ok(total)
}
