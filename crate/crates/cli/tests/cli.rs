use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn tetris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tetris")).args(args).output().unwrap()
}

fn fcidump() -> String {
    root().join("fixtures/h2_1p11.fcidump").display().to_string()
}

/// Writes `body` as a config in `dir`, naming the fixture FCIDUMP.
fn config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.toml");
    let text = format!("output = \"out\"\nseed = 3\n\n[hamiltonian]\nfcidump = \"{}\"\n\n{body}", fcidump());
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn metadata(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.trim_start().strip_prefix('=')))
        .unwrap_or_else(|| panic!("{key} missing"))
        .trim()
        .parse()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn ingest_writes_pauli_sum_and_metadata() {
    let dir = scratch("ingest");
    let out = dir.join("reduced");
    let text = stdout(&tetris(&["ingest", &fcidump(), "--out", out.to_str().unwrap()]));
    assert_eq!(metadata(&text, "L"), 4.0);
    assert_eq!(metadata(&text, "electrons"), 2.0);
    let (mu, mu_i, mu_b) = (metadata(&text, "mu"), metadata(&text, "mu_I"), metadata(&text, "mu_B"));
    assert!((mu - mu_i - mu_b).abs() < 1e-12);
    assert!(metadata(&text, "alpha") > 0.0);
    assert_eq!(std::fs::read_to_string(out.join("metadata.txt")).unwrap(), text);
    assert!(!std::fs::read_to_string(out.join("hamiltonian.pauli")).unwrap().is_empty());

    let plain = stdout(&tetris(&["ingest", &fcidump(), "--no-reduce", "--out", dir.join("plain").to_str().unwrap()]));
    assert_eq!(metadata(&plain, "alpha"), 0.0);
    assert!(metadata(&plain, "mu_I") >= mu_i);
}

#[test]
fn missing_config_is_a_config_error() {
    let o = tetris(&["measure", "--config", "/no/such/config.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/config.toml"));
}

#[test]
fn bad_values_are_config_errors() {
    let dir = scratch("bad");
    let cfg = config(&dir, "[schedule]\npath = \"cubic\"\n");
    assert_eq!(tetris(&["asp-sweep", "--config", &cfg]).status.code(), Some(2));
    let cfg = config(&dir, "[schedule]\nunknown = 1\n");
    assert_eq!(tetris(&["plan", "--config", &cfg]).status.code(), Some(2));
    let cfg = config(&dir, "[noise]\np_depol = 0.01\n[estimator]\nkind = \"arctan_fit\"\n");
    assert_eq!(tetris(&["measure", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn binary_search_on_sine_oracle_takes_five_queries() {
    let dir = scratch("binary");
    let cfg = config(
        &dir,
        "[estimator]\nkind = \"binary_search\"\noracle = \"sine\"\ndamping = 0.3\noffset = 0.005\nhalf_width = 0.016\ntarget = 0.001\nsamples = 10\n",
    );
    stdout(&tetris(&["measure", "--config", &cfg]));
    let trace = std::fs::read_to_string(dir.join("out/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 6);
    assert!(dir.join("out/config.resolved.toml").exists());
}

#[test]
fn arctan_fit_on_sine_oracle_is_exact() {
    let dir = scratch("arctan");
    let cfg = config(
        &dir,
        "[estimator]\nkind = \"arctan_fit\"\noracle = \"sine\"\ndamping = 0.05\noffset = -0.01\neps = 0.02\ns = 20.0\n",
    );
    let text = stdout(&tetris(&["measure", "--config", &cfg]));
    assert!(metadata(&text, "error").abs() < 1e-9, "{text}");
}

#[test]
fn sweep_starts_at_the_initial_energy_gap() {
    let dir = scratch("sweep");
    let cfg = config(&dir, "[sweep]\ntimes = [0.0, 1.0, 4.0]\n");
    stdout(&tetris(&["asp-sweep", "--config", &cfg]));
    let csv = std::fs::read_to_string(dir.join("out/asp_sweep.csv")).unwrap();
    let first: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[..2], ["linear", "0"]);

    use tetris_core::chem::*;
    use tetris_core::engine::StateVector;
    let model = model_from_fcidump(&std::fs::read_to_string(fcidump()).unwrap(), ModelOptions::default()).unwrap();
    let init = initial_state(&model, 2).unwrap().state;
    let (e_gs, _) = model.sector_ground_state(&init, 12).unwrap();
    let v = StateVector::basis(init.qubits, init.bits);
    let gap = model.full.expectation(v.amplitudes()) - e_gs;
    assert!((first[2].parse::<f64>().unwrap() - gap).abs() < 1e-9);
}

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let dir = scratch("rerun");
    let body = "[schedule]\nT = 4.0\ntau = \"auto\"\n\n[noise]\np_depol = 0.01\n\n[circuit]\nmode = \"circuit\"\ncircuits = 200\nshots_per_circuit = 2\n\n[scan]\npoints = 3\n";
    let cfg = config(&dir, body);
    let files = ["rho_scan.csv", "fit.csv", "circuit.csv", "config.resolved.toml"];
    let read = |d: &str| files.map(|f| std::fs::read(dir.join(d).join(f)).unwrap());
    stdout(&tetris(&["rho-scan", "--config", &cfg, "--out", dir.join("a").to_str().unwrap()]));
    stdout(&tetris(&["rho-scan", "--config", &cfg, "--out", dir.join("b").to_str().unwrap(), "--threads", "1"]));
    stdout(&tetris(&["rho-scan", "--config", &cfg, "--out", dir.join("c").to_str().unwrap(), "--seed", "4"]));
    let (a, b, c) = (read("a"), read("b"), read("c"));
    assert_eq!(a[..3], b[..3]);
    assert_ne!(a[0], c[0]);
}

#[test]
fn plan_runs_without_a_hamiltonian() {
    let dir = scratch("plan");
    let out = dir.join("out");
    stdout(&tetris(&["plan", "--out", out.to_str().unwrap()]));
    for f in ["plan.csv", "search_cost.csv", "gate_angles.csv", "runtime_vs_mu.csv", "scaling.csv", "comparison.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}
