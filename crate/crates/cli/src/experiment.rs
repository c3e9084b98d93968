//! A configuration turned into a model, schedule and simulator setup.

use std::path::Path;
use std::sync::Arc;

use tetris_core::chem::*;
use tetris_core::engine::*;
use tetris_core::pauli::PauliSum;
use tetris_core::planner::{optimal_gate_angle, CostInputs};
use tetris_core::sampler::Variant;
use tetris_core::schedule::{AdiabaticPath, TabulatedPath};

use crate::config::{ExperimentConfig, HamiltonianConfig, Tau};
use crate::CliError;

/// Largest register diagonalised for exact ground energies.
pub const DENSE_CAP: usize = 14;

pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub model: Arc<HamiltonianModel>,
    pub initial: BasisState,
    /// Sector ground energy in the reported frame.
    pub ground_energy: Option<f64>,
    pub path: AdiabaticPath,
    pub noise: NoiseModel,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_or<T>(value: Option<T>, what: &str, text: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("unknown {what} {text:?}")))
}

pub fn model_options(h: &HamiltonianConfig, layout: &str) -> Result<ModelOptions, CliError> {
    Ok(ModelOptions {
        ordering: parse_or(SpinOrdering::parse(&h.ordering), "ordering", &h.ordering)?,
        rule: parse_or(BackgroundRule::parse(&h.background_rule), "background rule", &h.background_rule)?,
        layout: parse_or(ControlLayout::parse(layout), "layout", layout)?,
        reduce: h.reduce,
    })
}

pub fn load_pauli(path: &Path) -> Result<PauliSum, CliError> {
    PauliSum::parse(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_model(h: &HamiltonianConfig, opts: ModelOptions) -> Result<HamiltonianModel, CliError> {
    match (&h.fcidump, &h.pauli) {
        (Some(f), None) => {
            let mut model =
                model_from_fcidump(&read(f)?, opts).map_err(|e| CliError::Config(format!("{}: {e}", f.display())))?;
            if let Some(k) = h.electrons {
                model.electrons = Some(k);
            }
            Ok(model)
        }
        (None, Some(p)) => {
            let sum = load_pauli(p)?;
            let k = h.electrons.ok_or_else(|| CliError::Config("a pauli Hamiltonian needs `electrons`".into()))?;
            build_model(&sum, Some(k), opts).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
        (Some(_), Some(_)) => Err(CliError::Config("give either `fcidump` or `pauli`, not both".into())),
        (None, None) => Err(CliError::Config("missing [hamiltonian] fcidump or pauli".into())),
    }
}

pub fn parse_path(text: &str) -> Result<AdiabaticPath, CliError> {
    if let Some(file) = text.strip_prefix("file:") {
        let table = TabulatedPath::parse(&read(Path::new(file))?).map_err(|e| CliError::Config(format!("{file}: {e}")))?;
        return Ok(AdiabaticPath::Tabulated(table));
    }
    match text {
        "linear" => Ok(AdiabaticPath::Linear),
        "quadratic" => Ok(AdiabaticPath::Quadratic),
        "constant" => Ok(AdiabaticPath::Constant),
        _ => Err(CliError::Config(format!("unknown path {text:?}"))),
    }
}

pub fn noise_model(cfg: &ExperimentConfig) -> Result<NoiseModel, CliError> {
    let n = &cfg.noise;
    let model = match (n.p_depol, n.value) {
        (Some(p), _) => NoiseModel::trajectory(p),
        (None, Some(v)) => {
            let name = n.convention.as_deref().unwrap_or("probability");
            let conv = parse_or(NoiseConvention::parse(name), "noise convention", name)?;
            NoiseModel::from_convention(v, conv)
        }
        (None, None) => return Ok(NoiseModel::off()),
    };
    model.map_err(|e| CliError::Config(e.to_string()))
}

/// Noise exponent per gate for the planner: gate fidelity `e^{−r} = 1 − p`.
pub fn noise_exponent(noise: &NoiseModel) -> f64 {
    if noise.is_active() {
        -(1.0 - noise.p_depol).ln()
    } else {
        0.0
    }
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, CliError> {
        let opts = model_options(&cfg.hamiltonian, &cfg.circuit.layout)?;
        let model = Arc::new(load_model(&cfg.hamiltonian, opts)?);
        let electrons = model
            .electrons
            .ok_or_else(|| CliError::Config("electron count unknown; set [hamiltonian] electrons".into()))?;
        let initial = initial_state(&model, electrons).map_err(|e| CliError::Numerical(e.to_string()))?.state;
        let ground_energy = if model.qubit_count() <= DENSE_CAP {
            let (e, _) = model.sector_ground_state(&initial, DENSE_CAP).map_err(|e| CliError::Numerical(e.to_string()))?;
            Some(model.reported_energy(e))
        } else {
            None
        };
        let path = parse_path(&cfg.schedule.path)?;
        let noise = noise_model(&cfg)?;
        Ok(Experiment { cfg, model, initial, ground_energy, path, noise })
    }

    pub fn ground_energy(&self) -> Result<f64, CliError> {
        self.ground_energy
            .ok_or_else(|| CliError::Numerical(format!("{} qubits exceed the dense cap {DENSE_CAP}", self.model.qubit_count())))
    }

    pub fn cost_inputs(&self, path: &AdiabaticPath, total_time: f64) -> CostInputs {
        CostInputs {
            mu_i: self.model.mu_i(),
            mu_b: self.model.mu_b(),
            zeta: path.zeta(),
            total_time,
            g: self.model.g_avg(),
            r: noise_exponent(&self.noise),
            qubits: self.model.qubit_count(),
            ..Default::default()
        }
    }

    /// Configured `τ`, or the planner's optimum for this path and time.
    pub fn tau_for(&self, path: &AdiabaticPath, total_time: f64) -> Result<f64, CliError> {
        if let Some(t) = self.cfg.schedule.tau.fixed()? {
            return Ok(t);
        }
        let report = optimal_gate_angle(&self.cost_inputs(path, total_time)).map_err(|e| CliError::Numerical(e.to_string()))?;
        Ok(report.tau_star)
    }

    pub fn setup(&self, path: &AdiabaticPath, total_time: f64, tau: f64) -> Result<RhoSetup, CliError> {
        let c = &self.cfg.circuit;
        let mut setup = RhoSetup::new(self.model.clone(), self.initial, path.clone(), total_time, tau)
            .map_err(|e| CliError::Numerical(e.to_string()))?;
        setup.ctx.order = parse_or(BranchOrder::parse(&c.order), "order", &c.order)?;
        setup.variant = parse_or(Variant::parse(&self.cfg.schedule.variant), "variant", &self.cfg.schedule.variant)?;
        setup.mode = parse_or(ExecutionMode::parse(&c.mode), "mode", &c.mode)?;
        setup.policy = parse_or(FilterPolicy::parse(&c.filter), "filter", &c.filter)?;
        setup.shots_per_circuit = c.shots_per_circuit;
        setup.central_tau = c.central_tau.unwrap_or(tau);
        setup.noise = self.noise;
        if self.noise.is_active() && setup.mode == ExecutionMode::Analytic {
            return Err(CliError::Config("noise needs circuit mode".into()));
        }
        Ok(setup)
    }

    /// Setup at the configured path and time.
    pub fn default_setup(&self) -> Result<RhoSetup, CliError> {
        let t = self.cfg.schedule.total_time;
        self.setup(&self.path, t, self.tau_for(&self.path, t)?)
    }

    /// The configuration with `auto` values expanded.
    pub fn resolved(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = self.cfg.clone();
        let t = cfg.schedule.total_time;
        cfg.schedule.tau = Tau::Value(self.tau_for(&self.path, t)?);
        cfg.noise.p_depol = Some(if self.noise.is_active() { self.noise.p_depol } else { 0.0 });
        cfg.hamiltonian.electrons = self.model.electrons;
        let absolute = |p: &mut std::path::PathBuf| {
            if let Ok(full) = std::fs::canonicalize(&*p) {
                *p = full;
            }
        };
        cfg.hamiltonian.fcidump.iter_mut().for_each(absolute);
        cfg.hamiltonian.pauli.iter_mut().for_each(absolute);
        cfg.hamiltonian.snapshots.iter_mut().for_each(absolute);
        Ok(cfg)
    }
}
