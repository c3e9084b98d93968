//! Molecular integrals to qubit Hamiltonians, background/interaction split,
//! norm reduction and initial basis state.

pub mod fcidump;
pub mod jw;
pub mod model;

use thiserror::Error;

use crate::engine::ControlLayout;
use crate::pauli::{PauliError, PauliSum, SpinPartition};

pub use fcidump::{parse_fcidump, MolecularIntegrals, SpatialIntegrals, SpinOrdering};
pub use jw::jordan_wigner;
pub use model::{
    check_spin_parity, initial_state, reduce_norm, BackgroundRule, BasisState, HamiltonianModel, InitialState,
    ModelMetadata,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChemError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: record {value} conflicts with earlier value {previous}")]
    ConflictingDuplicate { line: usize, previous: f64, value: f64 },
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("{electrons} electrons do not fit in {spin_orbitals} spin-orbitals")]
    InvalidElectronCount { electrons: usize, spin_orbitals: usize },
    #[error("term {string} has imaginary coefficient {imaginary}")]
    NonHermitian { string: String, imaginary: f64 },
    #[error("term {0} changes the parity of a spin sector")]
    SpinParityViolated(String),
    #[error("basis enumeration over {0} qubits is too large")]
    TooLarge(usize),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// FCIDUMP text to a qubit Hamiltonian with its electron count.
pub fn ingest_fcidump(text: &str, ordering: SpinOrdering) -> Result<(PauliSum, MolecularIntegrals), ChemError> {
    let sp = parse_fcidump(text)?;
    let mi = MolecularIntegrals::from_spatial(&sp, ordering);
    let h = jordan_wigner(&mi)?;
    Ok((h, mi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelOptions {
    pub ordering: SpinOrdering,
    pub rule: BackgroundRule,
    pub layout: ControlLayout,
    /// Subtract the median `αN²` shift.
    pub reduce: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            ordering: SpinOrdering::Interleaved,
            rule: BackgroundRule::ZWeightLe1,
            layout: ControlLayout::Composed,
            reduce: true,
        }
    }
}

/// Split a qubit Hamiltonian into a model, optionally norm-reduced.
pub fn build_model(h: &PauliSum, electrons: Option<usize>, opts: ModelOptions) -> Result<HamiltonianModel, ChemError> {
    let partition = match opts.ordering {
        SpinOrdering::Interleaved => SpinPartition::interleaved(h.qubit_count()),
        SpinOrdering::Blocked => SpinPartition::blocked(h.qubit_count()),
    };
    let (reduced, alpha) = if opts.reduce { reduce_norm(h)? } else { (h.clone(), 0.0) };
    let mut model = HamiltonianModel::split(&reduced, opts.rule, opts.layout);
    model.alpha = alpha;
    model.electrons = electrons;
    model.partition = partition;
    model.ordering = opts.ordering;
    Ok(model)
}

/// FCIDUMP text straight to a model; spin-sector parity is verified.
pub fn model_from_fcidump(text: &str, opts: ModelOptions) -> Result<HamiltonianModel, ChemError> {
    let (h, mi) = ingest_fcidump(text, opts.ordering)?;
    let model = build_model(&h, Some(mi.electrons), opts)?;
    check_spin_parity(&model.full, &model.partition)?;
    Ok(model)
}
