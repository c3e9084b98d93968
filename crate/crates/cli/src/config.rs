//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub hamiltonian: HamiltonianConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub circuit: CircuitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variance: Option<VarianceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanConfig>,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fcidump: Option<PathBuf>,
    /// Pauli-sum text file; needs `electrons`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pauli: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electrons: Option<usize>,
    #[serde(default = "default_rule")]
    pub background_rule: String,
    #[serde(default = "default_ordering")]
    pub ordering: String,
    #[serde(default = "yes")]
    pub reduce: bool,
    /// Pauli-sum files interpolated linearly in time (ODE and Trotter only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<PathBuf>,
}

impl Default for HamiltonianConfig {
    fn default() -> Self {
        HamiltonianConfig {
            fcidump: None,
            pauli: None,
            electrons: None,
            background_rule: default_rule(),
            ordering: default_ordering(),
            reduce: true,
            snapshots: Vec::new(),
        }
    }
}

fn default_rule() -> String {
    "z_weight_le_1".into()
}

fn default_ordering() -> String {
    "interleaved".into()
}

fn yes() -> bool {
    true
}

/// A number or `"auto"`.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Tau {
    Value(f64),
    Word(String),
}

impl Default for Tau {
    fn default() -> Self {
        Tau::Word("auto".into())
    }
}

impl Tau {
    pub fn fixed(&self) -> Result<Option<f64>, CliError> {
        match self {
            Tau::Value(v) => Ok(Some(*v)),
            Tau::Word(w) if w == "auto" => Ok(None),
            Tau::Word(w) => Err(CliError::Config(format!("tau must be a number or \"auto\", got {w:?}"))),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// `linear`, `quadratic`, `constant` or `file:<path>` with `u w` rows.
    #[serde(default = "default_path")]
    pub path: String,
    #[serde(rename = "T", default = "default_time")]
    pub total_time: f64,
    #[serde(default)]
    pub tau: Tau,
    #[serde(default = "default_variant")]
    pub variant: String,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig { path: default_path(), total_time: default_time(), tau: Tau::default(), variant: default_variant() }
    }
}

fn default_path() -> String {
    "linear".into()
}

fn default_time() -> f64 {
    10.0
}

fn default_variant() -> String {
    "background".into()
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Quoted error figure, read through `convention`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    /// `probability`, `amplitude` or `fidelity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<String>,
    /// Written back in resolved configs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_depol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    /// `analytic` or `circuit`.
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default = "default_layout")]
    pub layout: String,
    #[serde(default = "default_order")]
    pub order: String,
    #[serde(default = "default_filter")]
    pub filter: String,
    #[serde(default = "default_circuits")]
    pub circuits: usize,
    #[serde(default = "one")]
    pub shots_per_circuit: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central_tau: Option<f64>,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        CircuitConfig {
            mode: default_mode(),
            layout: default_layout(),
            order: default_order(),
            filter: default_filter(),
            circuits: default_circuits(),
            shots_per_circuit: 1,
            central_tau: None,
        }
    }
}

fn default_mode() -> String {
    "analytic".into()
}

fn default_layout() -> String {
    "composed".into()
}

fn default_order() -> String {
    "sequential".into()
}

fn default_filter() -> String {
    "discard_parity_violations".into()
}

fn default_circuits() -> usize {
    1000
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    /// `arctan_fit`, `binary_search` or `robbins_monro`.
    pub kind: String,
    /// `simulated`, or `sine` for the closed-form `q·sin(s(E − E_GS))`.
    #[serde(default = "default_oracle")]
    pub oracle: String,
    #[serde(default = "unit")]
    pub damping: f64,
    /// Start or test energy; otherwise `E_GS + offset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_min_s")]
    pub min_s: f64,
    /// Circuits per oracle query.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default = "default_sigmas")]
    pub sigmas: f64,
    #[serde(default = "default_max_samples")]
    pub max_samples: usize,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_step_unit")]
    pub step_unit: f64,
    #[serde(default)]
    pub common_circuits: bool,
}

fn default_oracle() -> String {
    "simulated".into()
}

fn unit() -> f64 {
    1.0
}

fn default_eps() -> f64 {
    0.01
}

fn default_s() -> f64 {
    20.0
}

fn default_min_s() -> f64 {
    1.0
}

fn default_samples() -> usize {
    1000
}

fn default_half_width() -> f64 {
    16e-3
}

fn default_target() -> f64 {
    1e-3
}

fn default_sigmas() -> f64 {
    3.0
}

fn default_max_samples() -> usize {
    1 << 20
}

fn default_a() -> f64 {
    10.0
}

fn default_beta() -> f64 {
    0.75
}

fn default_iterations() -> usize {
    1000
}

fn default_step_unit() -> f64 {
    1e-3
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub paths: Vec<String>,
    #[serde(default = "default_steps")]
    pub trotter_steps: Vec<usize>,
    /// Monte-Carlo circuits per point; 0 skips the sampled column.
    #[serde(default)]
    pub tetris_circuits: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_steps() -> Vec<usize> {
    vec![10]
}

fn default_tolerance() -> f64 {
    1e-3
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_delta_min")]
    pub delta_min: f64,
    #[serde(default = "default_delta_max")]
    pub delta_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_delta_min() -> f64 {
    -0.07
}

fn default_delta_max() -> f64 {
    0.07
}

fn default_points() -> usize {
    15
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    /// `τ = n/(Tμ_I)`.
    #[serde(default = "default_n")]
    pub n: Vec<f64>,
    pub times: Vec<f64>,
    #[serde(default = "default_shots")]
    pub shots: usize,
}

fn default_n() -> Vec<f64> {
    vec![1.0, 2.0]
}

fn default_shots() -> usize {
    100_000
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    /// Overrides for values otherwise taken from the Hamiltonian and schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_i: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_delta")]
    pub delta0: f64,
    /// `ζTμ_I` grid for the gate-angle table.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rg_values: Vec<f64>,
    /// `μ_I` grid for the binary-search cost table.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_values: Vec<f64>,
    #[serde(default = "default_preset")]
    pub scaling: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub l_values: Vec<usize>,
    #[serde(default = "unit")]
    pub lcu_c: f64,
    /// Full 1-norm for the H₆ comparison.
    #[serde(default = "default_lcu_mu")]
    pub lcu_mu: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        toml::from_str("").expect("every plan field has a default")
    }
}

fn default_delta() -> f64 {
    1e-3
}

fn default_preset() -> String {
    "hydrogen_chain".into()
}

fn default_lcu_mu() -> f64 {
    20.0
}

impl ExperimentConfig {
    /// Parse `path`, resolving file references against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output);
        if let Some(p) = self.hamiltonian.fcidump.as_mut() {
            fix(p);
        }
        if let Some(p) = self.hamiltonian.pauli.as_mut() {
            fix(p);
        }
        self.hamiltonian.snapshots.iter_mut().for_each(fix);
        if let Some(rest) = self.schedule.path.strip_prefix("file:") {
            let p = PathBuf::from(rest);
            if p.is_relative() {
                self.schedule.path = format!("file:{}", base.join(p).display());
            }
        }
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string_pretty(self).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg: ExperimentConfig = toml::from_str("[hamiltonian]\nfcidump = \"h.fcidump\"\n").unwrap();
        assert_eq!(cfg.schedule.tau, Tau::Word("auto".into()));
        assert_eq!(cfg.circuit.layout, "composed");
        assert!(cfg.hamiltonian.reduce);
        assert!(cfg.estimator.is_none());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("[schedule]\nspeed = 3\n").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let mut cfg: ExperimentConfig = toml::from_str("[schedule]\nT = 12.0\ntau = 0.3\n").unwrap();
        cfg.noise.p_depol = Some(0.0018);
        let back: ExperimentConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back.schedule.tau, Tau::Value(0.3));
        assert_eq!(back.noise.p_depol, Some(0.0018));
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let mut cfg: ExperimentConfig =
            toml::from_str("[hamiltonian]\nfcidump = \"../f/h.fcidump\"\n[schedule]\npath = \"file:p.txt\"\n").unwrap();
        cfg.rebase(Path::new("/x/exp"));
        assert_eq!(cfg.hamiltonian.fcidump.unwrap(), PathBuf::from("/x/exp/../f/h.fcidump"));
        assert_eq!(cfg.schedule.path, "file:/x/exp/p.txt");
    }
}
