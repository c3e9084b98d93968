//! Randomized adiabatic state preparation and energy estimation for
//! molecular qubit Hamiltonians.

pub mod chem;
pub mod engine;
pub mod pauli;
pub mod rng;
pub mod sampler;
pub mod schedule;
pub mod estimators;
pub mod planner;
