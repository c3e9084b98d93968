//! State-vector execution of sampled circuits, exact references, Trotter
//! baselines and the Hadamard-test shot simulator.

pub mod circuits;
pub mod hadamard;
pub mod native;
pub mod noise;
pub mod ode;
pub mod rho;
pub mod shots;
pub mod statevector;
pub mod trotter;

use thiserror::Error;

use crate::chem::ChemError;
use crate::pauli::PauliError;
use crate::sampler::SamplerError;
use crate::schedule::ScheduleError;

pub use circuits::{apply_sampled, sampled_unitary};
pub use hadamard::{analytic_amplitude, hadamard_test_shot, BranchOrder, HadamardContext, HadamardProgram, Part, TrajectoryRunner};
pub use native::{compile_rotation, rotation_two_qubit_count, Control, ControlLayout, NativeCircuit, NativeGate};
pub use noise::{NoiseConvention, NoiseMode, NoiseModel};
pub use ode::{run_exact_reference, OdeOptions};
pub use rho::{estimate_rho, norm_check, tetris_energy, ExecutionMode, RhoSetup};
pub use shots::{parity_filter, single_shot_estimator, AmplitudeEstimate, FilterPolicy, ShotRecord};
pub use statevector::StateVector;
pub use trotter::run_trotter_asp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("expected {expected} qubits, found {found}")]
    QubitMismatch { expected: usize, found: usize },
    #[error("invalid control qubit {0}")]
    InvalidControl(usize),
    #[error("{qubits} qubits exceeds the state-vector cap of {cap}")]
    TooLarge { qubits: usize, cap: usize },
    #[error("norm drifted by {0:e}")]
    NormDrift(f64),
    #[error("step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("every shot was filtered out")]
    AllShotsFiltered,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("background circuit has no background Hamiltonian")]
    MissingBackground,
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Chem(#[from] ChemError),
}

/// Largest register simulated as a dense state vector.
pub const STATE_CAP: usize = 24;

pub(crate) fn check_size(qubits: usize) -> Result<(), EngineError> {
    if qubits > STATE_CAP {
        return Err(EngineError::TooLarge { qubits, cap: STATE_CAP });
    }
    Ok(())
}
