//! Subcommand implementations. Each writes CSV files into the output
//! directory and returns its results for callers that want them in memory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tetris_core::chem::*;
use tetris_core::engine::*;
use tetris_core::estimators::*;
use tetris_core::planner::*;
use tetris_core::sampler::{attenuation, SamplerConfig};
use tetris_core::schedule::HamiltonianSchedule;

use crate::config::ExperimentConfig;
use crate::experiment::{load_pauli, noise_exponent, parse_path, Experiment, DENSE_CAP};
use crate::CliError;

fn num<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

/// Output directory, created on first use.
pub struct Output {
    pub dir: PathBuf,
}

impl Output {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Output { dir: dir.into() }
    }

    pub fn write(&self, name: &str, content: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.dir).map_err(|e| CliError::Io(format!("{}: {e}", self.dir.display())))?;
        let path = self.dir.join(name);
        std::fs::write(&path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

fn seed_for(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn csv<I: IntoIterator<Item = String>>(header: &str, rows: I) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

pub fn write_resolved(exp: &Experiment, out: &Output) -> Result<(), CliError> {
    out.write("config.resolved.toml", &exp.resolved()?.to_toml()?)?;
    Ok(())
}

// ---------------------------------------------------------------- ingest

pub struct IngestResult {
    pub model: HamiltonianModel,
    pub metadata: ModelMetadata,
}

pub fn ingest(input: &Path, opts: ModelOptions, out: &Output) -> Result<IngestResult, CliError> {
    let text = std::fs::read_to_string(input).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let model = model_from_fcidump(&text, opts).map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    let metadata = model.metadata();
    out.write("hamiltonian.pauli", &model.full.to_text())?;
    out.write("metadata.txt", &metadata.to_text())?;
    Ok(IngestResult { model, metadata })
}

// ------------------------------------------------------------------ plan

pub struct PlanResult {
    pub inputs: CostInputs,
    pub report: CostReport,
    pub comparison: RotationComparison,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn or_default<T: Clone>(v: &[T], fallback: Vec<T>) -> Vec<T> {
    if v.is_empty() {
        fallback
    } else {
        v.to_vec()
    }
}

pub fn plan(cfg: &ExperimentConfig, exp: Option<&Experiment>, out: &Output) -> Result<PlanResult, CliError> {
    let p = cfg.plan.clone().unwrap_or_default();
    let t = cfg.schedule.total_time;
    let path = parse_path(&cfg.schedule.path)?;
    let mut inputs = match exp {
        Some(e) => e.cost_inputs(&path, t),
        None => CostInputs { zeta: path.zeta(), total_time: t, ..Default::default() },
    };
    if exp.is_none() {
        inputs.r = noise_exponent(&crate::experiment::noise_model(cfg)?);
    }
    inputs.mu_i = p.mu_i.unwrap_or(inputs.mu_i);
    inputs.g = p.g.unwrap_or(inputs.g);
    inputs.zeta = p.zeta.unwrap_or(inputs.zeta);
    inputs.r = p.r.unwrap_or(inputs.r);
    inputs.delta = p.delta;
    inputs.delta0 = p.delta0;

    let report = optimal_gate_angle(&inputs).map_err(num)?;
    out.write("plan.csv", &report.to_csv())?;

    let s_fixed = std::f64::consts::FRAC_PI_2 / inputs.delta;
    let (tau_fixed, rq_fixed) = minimal_rq(&inputs, Some(s_fixed)).map_err(num)?;
    let (tau_coupled, rq_coupled) = minimal_rq(&inputs, None).map_err(num)?;
    let u = central_time_u(tau_coupled, inputs.mu_i, inputs.r, inputs.g);
    out.write(
        "search_cost.csv",
        &csv(
            "quantity,value",
            [
                format!("closed_form_10RQ,{:.12e}", binary_search_closed_form(&inputs)),
                format!("fixed_s,{s_fixed:.12e}"),
                format!("fixed_s_tau,{tau_fixed:.12e}"),
                format!("fixed_s_10RQ,{:.12e}", 10.0 * rq_fixed),
                format!("coupled_tau,{tau_coupled:.12e}"),
                format!("coupled_s,{:.12e}", central_time_s(inputs.delta0, u)),
                format!("coupled_10RQ,{:.12e}", 10.0 * rq_coupled),
            ],
        ),
    )?;

    let ks = or_default(&p.k_values, log_grid(1.0, 1e4, 41));
    let rgs = or_default(&p.rg_values, vec![0.0, 1e-4, 1e-3, 1e-2]);
    let mut rows = Vec::new();
    for &rg in &rgs {
        for &k in &ks {
            let i = CostInputs { mu_i: 1.0, zeta: 1.0, total_time: k, g: 1.0, r: rg, ..Default::default() };
            let r = optimal_gate_angle(&i).map_err(num)?;
            rows.push(format!(
                "{rg},{k:.6e},{:.10e},{:.10e},{:.10e},{:.10e}",
                r.tau_star,
                r.r_star,
                1.0 / (2.0 * k),
                (2.0 * rg).sqrt()
            ));
        }
    }
    out.write("gate_angles.csv", &csv("rg,K,tau_star,R_star,noiseless_asymptote,noisy_asymptote", rows))?;

    let mus = or_default(&p.mu_values, log_grid(1.0, 1e4, 25));
    let rs = or_default(&p.r_values, vec![0.0, 1e-5, 1e-4, 1e-3]);
    let mut rows = Vec::new();
    for &r in &rs {
        for &mu in &mus {
            let i = CostInputs { mu_i: mu, r, g: 10.0, zeta: 0.5, total_time: t, ..inputs };
            let (tau, rq) = minimal_rq(&i, None).map_err(num)?;
            rows.push(format!("{r},{mu:.6e},{tau:.10e},{:.10e},{:.10e}", 10.0 * rq, binary_search_closed_form(&i)));
        }
    }
    out.write("runtime_vs_mu.csv", &csv("r,mu_I,tau_star,min_10RQ,noiseless_closed_form", rows))?;

    let preset = ScalingPreset::parse(&p.scaling).ok_or_else(|| CliError::Config(format!("unknown scaling {:?}", p.scaling)))?;
    let ls = or_default(&p.l_values, (4..=100).step_by(4).collect());
    let rows = ls.iter().map(|&l| {
        let mu = preset.mu_i(l);
        let c = match preset {
            ScalingPreset::HydrogenChain => hydrogen_chain_costs(l),
            ScalingPreset::Generic => asp_costs(l, mu, l as f64 / 2.0),
        };
        format!("{l},{mu:.8e},{:.8e},{:.8e},{:.8e},{:.8e}", c.prepare, c.measure, c.total, hydrogen_chain_summary(l))
    });
    out.write("scaling.csv", &csv("L,mu_I,prepare,measure,total,summary_law", rows))?;

    let comparison = H6.compare(p.lcu_mu, p.lcu_c);
    out.write(
        "comparison.csv",
        &csv(
            "preset,trotter_rotations,tetris_rotations,ratio,lcu_cost,lcu_crossover_time,tetris_beats_lcu",
            [format!(
                "{},{},{:.6},{:.6},{:.6e},{:.6e},{}",
                H6.name,
                comparison.trotter,
                comparison.tetris,
                comparison.ratio,
                comparison.lcu_cost,
                comparison.lcu_crossover_time,
                comparison.tetris_beats_lcu
            )],
        ),
    )?;
    Ok(PlanResult { inputs, report, comparison })
}

// ------------------------------------------------------------- asp-sweep

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub path: String,
    pub total_time: f64,
    pub exact_error: f64,
    /// Sampled estimate and its standard error.
    pub tetris: Option<(f64, f64)>,
}

pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Smallest grid time from which the exact error stays below tolerance.
    pub t_min: Vec<(String, Option<f64>)>,
}

fn sweep_times(exp: &Experiment) -> Result<(Vec<f64>, crate::config::SweepConfig), CliError> {
    let sweep = exp.cfg.sweep.clone().ok_or_else(|| CliError::Config("missing [sweep] section".into()))?;
    let mut times = sweep.times.clone();
    if times.is_empty() || times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(CliError::Config("[sweep] times must be non-negative".into()));
    }
    times.sort_by(f64::total_cmp);
    Ok((times, sweep))
}

fn evolve_exact(schedule: &HamiltonianSchedule, initial: &BasisState) -> Result<StateVector, CliError> {
    // tighter than the default so that norm drift stays below 1e-8 at long T
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() };
    run_exact_reference(schedule, &StateVector::basis(initial.qubits, initial.bits), opts).map_err(num)
}

fn reported(model: &HamiltonianModel, v: &StateVector) -> f64 {
    model.reported_energy(model.full.expectation(v.amplitudes()))
}

pub fn asp_sweep(exp: &Experiment, out: &Output) -> Result<SweepResult, CliError> {
    let (times, sweep) = sweep_times(exp)?;
    let e_gs = exp.ground_energy()?;
    let names = if sweep.paths.is_empty() { vec![exp.cfg.schedule.path.clone()] } else { sweep.paths.clone() };
    let mut rows = Vec::new();
    for name in &names {
        let path = parse_path(name)?;
        for &t in &times {
            let schedule = HamiltonianSchedule::weighted(exp.model.clone(), path.clone(), t).map_err(num)?;
            let exact_error = reported(&exp.model, &evolve_exact(&schedule, &exp.initial)?) - e_gs;
            let tetris = if sweep.tetris_circuits > 0 && t > 0.0 {
                let setup = exp.setup(&path, t, exp.tau_for(&path, t)?)?;
                let (e, err) = tetris_energy(&setup, sweep.tetris_circuits, seed_for(exp.cfg.seed, rows.len())).map_err(num)?;
                Some((e - e_gs, err))
            } else {
                None
            };
            rows.push(SweepRow { path: name.clone(), total_time: t, exact_error, tetris });
        }
    }
    if !exp.cfg.hamiltonian.snapshots.is_empty() {
        rows.extend(snapshot_rows(exp, &times)?);
    }
    let mut labels: Vec<String> = rows.iter().map(|r| r.path.clone()).collect();
    labels.dedup();
    let t_min = labels
        .into_iter()
        .map(|label| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.path == label).collect();
            let first_ok = (0..mine.len()).find(|&k| mine[k..].iter().all(|r| r.exact_error.abs() <= sweep.tolerance));
            (label, first_ok.map(|k| mine[k].total_time))
        })
        .collect::<Vec<_>>();
    out.write(
        "asp_sweep.csv",
        &csv(
            "path,T,exact_error,tetris_error,tetris_std",
            rows.iter().map(|r| {
                let (a, b) = r.tetris.map_or((String::new(), String::new()), |(e, s)| (format!("{e:.10e}"), format!("{s:.10e}")));
                format!("{},{},{:.10e},{a},{b}", r.path, r.total_time, r.exact_error)
            }),
        ),
    )?;
    out.write(
        "t_min.csv",
        &csv(
            "path,T_min",
            t_min.iter().map(|(p, t)| format!("{p},{}", t.map_or("none".to_string(), |v| v.to_string()))),
        ),
    )?;
    Ok(SweepResult { rows, t_min })
}

/// Linear interpolation between snapshot Hamiltonians; errors against the
/// ground energy of the last snapshot.
fn snapshot_rows(exp: &Experiment, times: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    let sums = exp.cfg.hamiltonian.snapshots.iter().map(|p| load_pauli(p)).collect::<Result<Vec<_>, _>>()?;
    let first = build_model(&sums[0], exp.model.electrons, ModelOptions { reduce: false, ..Default::default() }).map_err(num)?;
    let last = build_model(&sums[sums.len() - 1], exp.model.electrons, ModelOptions { reduce: false, ..Default::default() })
        .map_err(num)?;
    let k = exp.model.electrons.unwrap_or(0);
    let init = initial_state(&first, k).map_err(num)?.state;
    let (e_gs, _) = last.sector_ground_state(&init, DENSE_CAP).map_err(num)?;
    let mut rows = Vec::new();
    for &t in times {
        let schedule = HamiltonianSchedule::snapshots(&sums, t).map_err(num)?;
        let v = evolve_exact(&schedule, &init)?;
        rows.push(SweepRow {
            path: "snapshots".into(),
            total_time: t,
            exact_error: last.full.expectation(v.amplitudes()) - e_gs,
            tetris: None,
        });
    }
    Ok(rows)
}

// ------------------------------------------------------- trotter-compare

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub total_time: f64,
    pub exact_error: f64,
    /// `(steps, error)` per configured step count.
    pub trotter: Vec<(usize, f64)>,
    pub tetris: Option<(f64, f64)>,
    pub tetris_rotations: f64,
}

pub fn trotter_compare(exp: &Experiment, out: &Output) -> Result<Vec<CompareRow>, CliError> {
    let (times, sweep) = sweep_times(exp)?;
    let e_gs = exp.ground_energy()?;
    let terms = exp.model.full.without_identity().len();
    let mut rows = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        let schedule = HamiltonianSchedule::weighted(exp.model.clone(), exp.path.clone(), t).map_err(num)?;
        let exact_error = reported(&exp.model, &evolve_exact(&schedule, &exp.initial)?) - e_gs;
        let psi0 = StateVector::basis(exp.initial.qubits, exp.initial.bits);
        let trotter = sweep
            .trotter_steps
            .iter()
            .map(|&n| Ok((n, reported(&exp.model, &run_trotter_asp(&schedule, n, &psi0, None).map_err(num)?) - e_gs)))
            .collect::<Result<Vec<_>, CliError>>()?;
        let tetris = if sweep.tetris_circuits > 0 && t > 0.0 {
            let setup = exp.setup(&exp.path, t, exp.tau_for(&exp.path, t)?)?;
            let (e, err) = tetris_energy(&setup, sweep.tetris_circuits, seed_for(exp.cfg.seed, k)).map_err(num)?;
            Some((e - e_gs, err))
        } else {
            None
        };
        let tetris_rotations = 0.5 * exp.model.mu_i().powi(2) * t * t;
        rows.push(CompareRow { total_time: t, exact_error, trotter, tetris, tetris_rotations });
    }
    let steps = &sweep.trotter_steps;
    let mut header = String::from("T,exact_error");
    for n in steps {
        let _ = write!(header, ",trotter{n}_error,trotter{n}_rotations");
    }
    header.push_str(",tetris_error,tetris_std,tetris_rotations");
    out.write(
        "trotter_compare.csv",
        &csv(
            &header,
            rows.iter().map(|r| {
                let mut line = format!("{},{:.10e}", r.total_time, r.exact_error);
                for (n, e) in &r.trotter {
                    let _ = write!(line, ",{e:.10e},{}", n * terms);
                }
                match r.tetris {
                    Some((e, s)) => {
                        let _ = write!(line, ",{e:.10e},{s:.10e}");
                    }
                    None => line.push_str(",,"),
                }
                let _ = write!(line, ",{:.6}", r.tetris_rotations);
                line
            }),
        ),
    )?;
    Ok(rows)
}

// -------------------------------------------------------------- rho-scan

#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub delta: f64,
    pub filtered: AmplitudeEstimate,
    pub raw: AmplitudeEstimate,
}

pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    pub filtered_fit: SineFit,
    pub raw_fit: SineFit,
    pub mean_two_qubit_gates: f64,
    pub tau: f64,
}

pub fn rho_scan(exp: &Experiment, out: &Output) -> Result<ScanResult, CliError> {
    let scan = exp.cfg.scan.clone().ok_or_else(|| CliError::Config("missing [scan] section".into()))?;
    if scan.points < 2 || !(scan.delta_max > scan.delta_min) {
        return Err(CliError::Config("[scan] needs at least two points and delta_max > delta_min".into()));
    }
    let e_gs = exp.ground_energy()?;
    let setup = exp.default_setup()?;
    let circuits = exp.cfg.circuit.circuits;
    let mut rows = Vec::with_capacity(scan.points);
    for k in 0..scan.points {
        let delta = scan.delta_min + (scan.delta_max - scan.delta_min) * k as f64 / (scan.points - 1) as f64;
        let records = setup.records(e_gs + delta, scan.s, Part::Imag, circuits, seed_for(exp.cfg.seed, k)).map_err(num)?;
        let filtered = parity_filter(&records, FilterPolicy::DiscardParityViolations).map_err(num)?;
        let raw = parity_filter(&records, FilterPolicy::None).map_err(num)?;
        rows.push(ScanRow { delta, filtered, raw });
    }
    let fit = |pick: fn(&ScanRow) -> AmplitudeEstimate| {
        let pts: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.delta, pick(r).mean, pick(r).std_error)).collect();
        fit_damped_sine(&pts, scan.s).map_err(num)
    };
    let filtered_fit = fit(|r| r.filtered)?;
    let raw_fit = fit(|r| r.raw)?;
    let gates = setup.mean_two_qubit_gates(scan.s, circuits.min(500), exp.cfg.seed).map_err(num)?;
    out.write(
        "rho_scan.csv",
        &csv(
            "delta,E,rho_filtered,err_filtered,rho_raw,err_raw,shots_filtered,shots_total",
            rows.iter().map(|r| {
                format!(
                    "{:.8},{:.10},{:.8},{:.8},{:.8},{:.8},{},{}",
                    r.delta,
                    e_gs + r.delta,
                    r.filtered.mean,
                    r.filtered.std_error,
                    r.raw.mean,
                    r.raw.std_error,
                    r.filtered.shots_filtered,
                    r.raw.shots_used
                )
            }),
        ),
    )?;
    out.write(
        "fit.csv",
        &csv(
            "policy,damping,damping_error,offset,offset_error",
            [("filtered", filtered_fit), ("raw", raw_fit)].iter().map(|(name, f)| {
                format!("{name},{:.8},{:.8},{:.10},{:.10}", f.damping, f.damping_error, f.offset, f.offset_error)
            }),
        ),
    )?;
    out.write(
        "circuit.csv",
        &csv("quantity,value", [format!("tau,{:.10}", setup.tau), format!("mean_two_qubit_gates,{gates:.4}")]),
    )?;
    Ok(ScanResult { rows, filtered_fit, raw_fit, mean_two_qubit_gates: gates, tau: setup.tau })
}

// --------------------------------------------------------------- measure

pub struct MeasureResult {
    pub estimate: f64,
    pub uncertainty: f64,
    pub exact: Option<f64>,
    pub samples: usize,
    pub shots: usize,
    pub two_qubit_gates: Option<f64>,
    pub flags: Vec<String>,
    pub trace: Vec<QueryRecord>,
}

impl MeasureResult {
    pub fn error(&self) -> Option<f64> {
        self.exact.map(|e| self.estimate - e)
    }
}

enum Oracle<'a> {
    Sine(SineOracle),
    Simulated(SimulatedOracle<'a>),
}

impl RhoOracle for Oracle<'_> {
    fn query(&mut self, energy: f64, s: f64, samples: usize) -> Result<AmplitudeEstimate, EstimatorError> {
        match self {
            Oracle::Sine(o) => o.query(energy, s, samples),
            Oracle::Simulated(o) => o.query(energy, s, samples),
        }
    }
}

/// One estimator run with `seed` overriding the configured seed.
pub fn measure_with_seed(exp: &Experiment, seed: u64) -> Result<MeasureResult, CliError> {
    let est = exp.cfg.estimator.clone().ok_or_else(|| CliError::Config("missing [estimator] section".into()))?;
    let setup = exp.default_setup()?;
    let start = match est.energy {
        Some(e) => e,
        None => exp.ground_energy()? + est.offset,
    };
    let mut oracle = match est.oracle.as_str() {
        "sine" => Oracle::Sine(SineOracle { ground_energy: exp.ground_energy()?, damping: est.damping }),
        "simulated" => Oracle::Simulated(SimulatedOracle::new(&setup, seed).with_common_circuits(est.common_circuits)),
        other => return Err(CliError::Config(format!("unknown oracle {other:?}"))),
    };
    let (estimate, uncertainty, samples, flags, trace) = match est.kind.as_str() {
        "arctan_fit" => {
            let r = arctan_fit_run(&mut oracle, start, est.eps, est.s, est.samples, est.min_s).map_err(num)?;
            (r.energy, r.uncertainty, r.samples, r.flags, r.trace)
        }
        "binary_search" => {
            let window = EnergyWindow::centred(start, est.half_width).map_err(|e| CliError::Config(e.to_string()))?;
            let u = central_time_u(setup.tau, exp.model.mu_i(), noise_exponent(&exp.noise), exp.model.g_avg());
            let rule = ConfidenceRule { sigmas: est.sigmas, max_samples: est.max_samples };
            let r = binary_search_energy(&mut oracle, window, est.target, est.samples, u, rule).map_err(num)?;
            (r.energy, r.uncertainty, r.samples, r.flags, r.trace)
        }
        "robbins_monro" => {
            let cfg = RmConfig {
                a: est.a,
                beta: est.beta,
                s: est.s,
                max_iters: est.iterations,
                step_unit: est.step_unit,
                samples: est.samples,
            };
            let r = robbins_monro_energy(&mut oracle, start, &cfg).map_err(num)?;
            let flags = if r.clamped > 0 { vec![format!("{} iterates clamped", r.clamped)] } else { Vec::new() };
            let samples = r.trace.iter().map(|q| q.samples).sum();
            (r.last(), 0.0, samples, flags, r.trace)
        }
        other => return Err(CliError::Config(format!("unknown estimator {other:?}"))),
    };
    let shots = samples * setup.shots_per_circuit;
    let two_qubit_gates = match (&oracle, trace.first()) {
        (Oracle::Simulated(_), Some(q)) => Some(setup.mean_two_qubit_gates(q.s, 200, seed).map_err(num)? * shots as f64),
        _ => None,
    };
    Ok(MeasureResult { estimate, uncertainty, exact: exp.ground_energy, samples, shots, two_qubit_gates, flags, trace })
}

pub fn measure(exp: &Experiment, out: &Output) -> Result<MeasureResult, CliError> {
    let r = measure_with_seed(exp, exp.cfg.seed)?;
    out.write("trace.csv", &csv(QueryRecord::CSV_HEADER, r.trace.iter().map(|q| q.csv_row())))?;
    let mut s = String::new();
    let _ = writeln!(s, "estimate = {:.10}", r.estimate);
    let _ = writeln!(s, "uncertainty = {:.3e}", r.uncertainty);
    if let (Some(e), Some(err)) = (r.exact, r.error()) {
        let _ = writeln!(s, "exact = {e:.10}");
        let _ = writeln!(s, "error = {err:.3e}");
    }
    let _ = writeln!(s, "circuits = {}", r.samples);
    let _ = writeln!(s, "shots = {}", r.shots);
    if let Some(g) = r.two_qubit_gates {
        let _ = writeln!(s, "two_qubit_gates = {g:.4e}");
    }
    for f in &r.flags {
        let _ = writeln!(s, "warning = {f}");
    }
    out.write("summary.txt", &s)?;
    Ok(r)
}

// -------------------------------------------------------- variance-study

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceRow {
    pub n: f64,
    pub total_time: f64,
    pub tau: f64,
    pub variance: f64,
    /// `1/λ²` for the pair of adiabatic circuits.
    pub bound: f64,
    pub mean: f64,
    pub std_error: f64,
}

pub fn variance_study(exp: &Experiment, out: &Output) -> Result<Vec<VarianceRow>, CliError> {
    let v = exp.cfg.variance.clone().ok_or_else(|| CliError::Config("missing [variance] section".into()))?;
    if v.shots < 2 || v.times.iter().any(|t| !(*t > 0.0)) || v.n.iter().any(|n| !(*n > 0.0)) {
        return Err(CliError::Config("[variance] needs positive n, times and at least two shots".into()));
    }
    let mu_i = exp.model.mu_i();
    let mut rows = Vec::new();
    for &n in &v.n {
        for &t in &v.times {
            let tau = n / (t * mu_i);
            let mut setup = exp.setup(&exp.path, t, tau)?;
            setup.shots_per_circuit = 1;
            let est = norm_check(&setup, v.shots, seed_for(exp.cfg.seed, rows.len())).map_err(num)?;
            let lambda = attenuation(&exp.model, &exp.path, &SamplerConfig { tau, total_time: t, variant: setup.variant });
            rows.push(VarianceRow {
                n,
                total_time: t,
                tau,
                variance: est.variance(),
                bound: lambda.powi(-4),
                mean: est.mean,
                std_error: est.std_error,
            });
        }
    }
    let zeta = exp.path.zeta();
    out.write(
        "variance.csv",
        &csv(
            "n,T,tau,variance,bound,plateau,mean,std_error",
            rows.iter().map(|r| {
                format!(
                    "{},{},{:.10e},{:.8},{:.8},{:.8},{:.8},{:.8}",
                    r.n,
                    r.total_time,
                    r.tau,
                    r.variance,
                    r.bound,
                    (2.0 * r.n * zeta).exp(),
                    r.mean,
                    r.std_error
                )
            }),
        ),
    )?;
    Ok(rows)
}

/// Build an experiment when the configuration names a Hamiltonian.
pub fn optional_experiment(cfg: &ExperimentConfig) -> Result<Option<Experiment>, CliError> {
    if cfg.hamiltonian.fcidump.is_none() && cfg.hamiltonian.pauli.is_none() {
        return Ok(None);
    }
    Experiment::new(cfg.clone()).map(Some)
}
