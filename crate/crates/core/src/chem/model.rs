//! Background/interaction split, particle-number norm reduction and the
//! initial basis state.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ChemError, SpinOrdering};
use crate::engine::native::{rotation_two_qubit_count, ControlLayout};
use crate::pauli::{hermitian_ground_state, PauliString, PauliSum, SpinPartition};

/// Which strings form the exactly simulated diagonal part `H_B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BackgroundRule {
    /// Z-only strings of weight at most one.
    #[default]
    ZWeightLe1,
    /// Z-only strings of weight at most two.
    ZWeightLe2,
    /// Everything is interaction.
    Empty,
}

impl BackgroundRule {
    pub fn includes(self, p: &PauliString) -> bool {
        if p.is_identity() || !p.is_z_only() {
            return false;
        }
        match self {
            BackgroundRule::ZWeightLe1 => p.weight() <= 1,
            BackgroundRule::ZWeightLe2 => p.weight() <= 2,
            BackgroundRule::Empty => false,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BackgroundRule::ZWeightLe1 => "z_weight_le_1",
            BackgroundRule::ZWeightLe2 => "z_weight_le_2",
            BackgroundRule::Empty => "empty",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "z_weight_le_1" => Some(BackgroundRule::ZWeightLe1),
            "z_weight_le_2" => Some(BackgroundRule::ZWeightLe2),
            "empty" => Some(BackgroundRule::Empty),
            _ => None,
        }
    }
}

/// `H = constant + H_B + H_I` with per-term two-qubit gate costs.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianModel {
    pub full: PauliSum,
    pub background: PauliSum,
    pub interaction: PauliSum,
    pub constant: f64,
    pub background_costs: Vec<usize>,
    pub interaction_costs: Vec<usize>,
    pub rule: BackgroundRule,
    pub layout: ControlLayout,
    pub electrons: Option<usize>,
    /// Coefficient of the subtracted `αN²`.
    pub alpha: f64,
    pub partition: SpinPartition,
    pub ordering: SpinOrdering,
}

impl HamiltonianModel {
    pub fn split(h: &PauliSum, rule: BackgroundRule, layout: ControlLayout) -> Self {
        let background = h.filter(|t| rule.includes(&t.string));
        let interaction = h.filter(|t| !t.string.is_identity() && !rule.includes(&t.string));
        let cost = |s: &PauliSum| s.terms().iter().map(|t| rotation_two_qubit_count(t.string.weight(), layout)).collect();
        HamiltonianModel {
            background_costs: cost(&background),
            interaction_costs: cost(&interaction),
            full: h.clone(),
            background,
            interaction,
            constant: h.identity_coefficient(),
            rule,
            layout,
            electrons: None,
            alpha: 0.0,
            partition: SpinPartition::interleaved(h.qubit_count()),
            ordering: SpinOrdering::Interleaved,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.full.qubit_count()
    }

    pub fn mu_i(&self) -> f64 {
        self.interaction.one_norm()
    }

    pub fn mu_b(&self) -> f64 {
        self.background.one_norm()
    }

    pub fn mu(&self) -> f64 {
        self.mu_i() + self.mu_b()
    }

    /// Coefficient-weighted mean two-qubit cost of an interaction rotation.
    pub fn g_avg(&self) -> f64 {
        let mu = self.mu_i();
        if mu == 0.0 {
            return 0.0;
        }
        self.interaction
            .terms()
            .iter()
            .zip(&self.interaction_costs)
            .map(|(t, g)| t.coefficient * *g as f64)
            .sum::<f64>()
            / mu
    }

    /// `Σ c_n g_n` over the background terms.
    pub fn background_cost_weight(&self) -> f64 {
        self.background.terms().iter().zip(&self.background_costs).map(|(t, g)| t.coefficient * *g as f64).sum()
    }

    /// Energy offset `αk²` removed by the norm reduction in the electron sector.
    pub fn sector_shift(&self) -> f64 {
        let k = self.electrons.unwrap_or(0) as f64;
        self.alpha * k * k
    }

    /// Simulation-frame energy to the energy of the original Hamiltonian.
    pub fn reported_energy(&self, simulated: f64) -> f64 {
        simulated + self.sector_shift()
    }

    pub fn simulated_energy(&self, reported: f64) -> f64 {
        reported - self.sector_shift()
    }

    pub fn metadata(&self) -> ModelMetadata {
        ModelMetadata {
            qubits: self.qubit_count(),
            electrons: self.electrons,
            mu: self.mu(),
            mu_i: self.mu_i(),
            mu_b: self.mu_b(),
            alpha: self.alpha,
            g_avg: self.g_avg(),
            ordering: self.ordering.name().to_string(),
            rule: self.rule.name().to_string(),
        }
    }

    /// Lowest eigenpair of the simulated Hamiltonian in the spin sector of
    /// `reference`, or in the full space when the Hamiltonian leaks out of it.
    pub fn sector_ground_state(&self, reference: &BasisState, cap: usize) -> Result<(f64, Vec<Complex64>), ChemError> {
        let n = self.qubit_count();
        if n > cap {
            return Err(ChemError::TooLarge(n));
        }
        let (up, down) = sector_counts(reference.bits, &self.partition);
        let sector: Vec<u64> =
            (0..1u64 << n).filter(|&b| sector_counts(b, &self.partition) == (up, down)).collect();
        let position: HashMap<u64, usize> = sector.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let dim = sector.len();
        let mut m = DMatrix::zeros(dim, dim);
        let mut outside: HashMap<(u64, usize), Complex64> = HashMap::new();
        for (col, &b) in sector.iter().enumerate() {
            for t in self.full.terms() {
                let (j, a) = t.string.act(b);
                match position.get(&j) {
                    Some(&row) => m[(row, col)] += a * t.coefficient,
                    None => *outside.entry((j, col)).or_default() += a * t.coefficient,
                }
            }
        }
        if outside.values().any(|v| v.norm() > 1e-10) {
            let dense = self.full.dense(cap)?;
            return Ok(hermitian_ground_state(&dense));
        }
        let (e, v) = hermitian_ground_state(&m);
        let mut full = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (i, b) in sector.iter().enumerate() {
            full[*b as usize] = v[i];
        }
        Ok((e, full))
    }
}

fn sector_counts(bits: u64, part: &SpinPartition) -> (u32, u32) {
    ((bits & part.up).count_ones(), (bits & part.down).count_ones())
}

/// Subtract `αN²`, with `α/2` the lower median of the Z_pZ_q coefficients
/// over all pairs (absent pairs count as zero). Returns the shifted sum and `α`.
pub fn reduce_norm(h: &PauliSum) -> Result<(PauliSum, f64), ChemError> {
    let l = h.qubit_count();
    if l < 2 {
        return Ok((h.clone(), 0.0));
    }
    let mut pair_coeff: HashMap<(usize, usize), f64> = HashMap::new();
    for (c, p) in h.signed_terms() {
        if p.is_z_only() && p.weight() == 2 {
            let z = p.z_mask();
            let a = z.trailing_zeros() as usize;
            let b = 63 - z.leading_zeros() as usize;
            *pair_coeff.entry((a, b)).or_insert(0.0) += c;
        }
    }
    let mut values = Vec::with_capacity(l * (l - 1) / 2);
    for a in 0..l {
        for b in a + 1..l {
            values.push(pair_coeff.get(&(a, b)).copied().unwrap_or(0.0));
        }
    }
    values.sort_by(|x, y| x.partial_cmp(y).expect("finite coefficients"));
    let half_alpha = values[(values.len() - 1) / 2];
    let alpha = 2.0 * half_alpha;
    if alpha == 0.0 {
        return Ok((h.clone(), 0.0));
    }
    let n_sq = number_squared(l)?;
    Ok((h.minus(&n_sq.scaled(alpha))?, alpha))
}

/// `N² = L²/4 + L/4 − (L/2)ΣZ_p + ½Σ_{p<q} Z_pZ_q`.
pub fn number_squared(l: usize) -> Result<PauliSum, ChemError> {
    let lf = l as f64;
    let mut items = vec![(lf * lf / 4.0 + lf / 4.0, PauliString::identity(l)?)];
    for p in 0..l {
        items.push((-lf / 2.0, PauliString::from_masks(l, 0, 1 << p, false)?));
    }
    for p in 0..l {
        for q in p + 1..l {
            items.push((0.5, PauliString::from_masks(l, 0, (1 << p) | (1 << q), false)?));
        }
    }
    Ok(PauliSum::from_signed(l, items)?)
}

/// Fails when a term flips the occupation parity of a spin sector.
pub fn check_spin_parity(h: &PauliSum, partition: &SpinPartition) -> Result<(), ChemError> {
    for t in h.terms() {
        if t.string.spin_sector_parity_signature(partition) != (true, true) {
            return Err(ChemError::SpinParityViolated(t.string.to_string()));
        }
    }
    Ok(())
}

/// A computational basis state; bit `k` is qubit `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub bits: u64,
    pub qubits: usize,
}

impl BasisState {
    pub fn occupation(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn parse(s: &str) -> Option<Self> {
        let mut bits = 0;
        for (q, c) in s.trim().chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << q,
                _ => return None,
            }
        }
        Some(BasisState { bits, qubits: s.trim().len() })
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.qubits {
            write!(f, "{}", (self.bits >> q) & 1)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialState {
    pub state: BasisState,
    pub energy: f64,
    /// All k-hot states tied at the minimum, lexicographically sorted.
    pub minimizers: Vec<BasisState>,
}

const TIE_TOL: f64 = 1e-12;
const ENUMERATION_LIMIT: usize = 24;

/// Lowest-energy `electrons`-hot basis state of `H_B`; ties resolve to the
/// lexicographically smallest q1..qL string.
pub fn initial_state(model: &HamiltonianModel, electrons: usize) -> Result<InitialState, ChemError> {
    let l = model.qubit_count();
    if electrons > l {
        return Err(ChemError::InvalidElectronCount { electrons, spin_orbitals: l });
    }
    let energy_of = |bits: u64| model.background.diagonal_entry(bits);
    if l > ENUMERATION_LIMIT {
        if model.background.terms().iter().any(|t| t.string.weight() > 1) {
            return Err(ChemError::TooLarge(l));
        }
        return Ok(greedy_initial(model, electrons));
    }
    let mut best: Vec<(f64, BasisState)> = Vec::new();
    let mut best_e = f64::INFINITY;
    for bits in 0..1u64 << l {
        if bits.count_ones() as usize != electrons {
            continue;
        }
        let e = energy_of(bits);
        if e < best_e - TIE_TOL {
            best_e = e;
            best.retain(|(x, _)| *x <= e + TIE_TOL);
        }
        if e <= best_e + TIE_TOL {
            best.push((e, BasisState { bits, qubits: l }));
        }
    }
    let mut minimizers: Vec<BasisState> =
        best.into_iter().filter(|(e, _)| *e <= best_e + TIE_TOL).map(|(_, s)| s).collect();
    minimizers.sort_by_key(|s| s.to_string());
    let state = minimizers[0];
    Ok(InitialState { state, energy: energy_of(state.bits), minimizers })
}

/// Occupying qubit `p` changes the single-Z energy by `−2c_p`.
fn greedy_initial(model: &HamiltonianModel, electrons: usize) -> InitialState {
    let l = model.qubit_count();
    let mut field = vec![0.0; l];
    for (c, p) in model.background.signed_terms() {
        if p.weight() == 1 {
            field[p.z_mask().trailing_zeros() as usize] += c;
        }
    }
    let mut order: Vec<usize> = (0..l).collect();
    // Larger field first; among ties the later qubit keeps earlier positions at 0.
    order.sort_by(|&a, &b| {
        let (fa, fb) = (field[a], field[b]);
        if (fa - fb).abs() <= TIE_TOL {
            b.cmp(&a)
        } else {
            fb.partial_cmp(&fa).expect("finite fields")
        }
    });
    let bits = order.iter().take(electrons).fold(0u64, |acc, q| acc | 1 << q);
    let state = BasisState { bits, qubits: l };
    InitialState { state, energy: model.background.diagonal_entry(bits), minimizers: vec![state] }
}

/// Key-value sidecar describing an ingested model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelMetadata {
    pub qubits: usize,
    pub electrons: Option<usize>,
    pub mu: f64,
    pub mu_i: f64,
    pub mu_b: f64,
    pub alpha: f64,
    pub g_avg: f64,
    pub ordering: String,
    pub rule: String,
}

impl ModelMetadata {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("L = {}\n", self.qubits));
        if let Some(k) = self.electrons {
            s.push_str(&format!("electrons = {k}\n"));
        }
        s.push_str(&format!("mu = {:.16e}\n", self.mu));
        s.push_str(&format!("mu_I = {:.16e}\n", self.mu_i));
        s.push_str(&format!("mu_B = {:.16e}\n", self.mu_b));
        s.push_str(&format!("alpha = {:.16e}\n", self.alpha));
        s.push_str(&format!("g_avg = {:.16e}\n", self.g_avg));
        s.push_str(&format!("ordering = {}\n", self.ordering));
        s.push_str(&format!("background_rule = {}\n", self.rule));
        s
    }

    pub fn parse(text: &str) -> Result<Self, ChemError> {
        let mut kv = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ChemError::Parse { line: i + 1, message: "expected `key = value`".into() })?;
            kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
        }
        let num = |key: &str| -> Result<f64, ChemError> {
            let (line, v) = kv.get(key).ok_or(ChemError::Parse { line: 0, message: format!("{key} missing") })?;
            v.parse().map_err(|_| ChemError::Parse { line: *line, message: format!("bad {key}") })
        };
        let text_of = |key: &str| kv.get(key).map(|(_, v)| v.clone()).unwrap_or_default();
        Ok(ModelMetadata {
            qubits: num("L")? as usize,
            electrons: kv.get("electrons").and_then(|(_, v)| v.parse().ok()),
            mu: num("mu")?,
            mu_i: num("mu_I")?,
            mu_b: num("mu_B")?,
            alpha: num("alpha")?,
            g_avg: num("g_avg")?,
            ordering: text_of("ordering"),
            rule: text_of("background_rule"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum(n: usize, items: &[(f64, &str)]) -> PauliSum {
        PauliSum::from_signed(n, items.iter().map(|(c, s)| (*c, s.parse().unwrap()))).unwrap()
    }

    #[test]
    fn median_example() {
        let h = sum(3, &[(0.1, "ZZI"), (0.2, "ZIZ"), (0.7, "IZZ")]);
        let (_, alpha) = reduce_norm(&h).unwrap();
        assert!((alpha - 0.4).abs() < 1e-15);
    }

    #[test]
    fn no_pairs_means_no_shift() {
        let h = sum(3, &[(0.3, "XXI"), (0.2, "ZII")]);
        let (r, alpha) = reduce_norm(&h).unwrap();
        assert_eq!(alpha, 0.0);
        assert_eq!(r, h);
    }

    #[test]
    fn initial_state_example() {
        let h = sum(2, &[(-0.5, "ZI"), (0.5, "IZ")]);
        let m = HamiltonianModel::split(&h, BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder);
        let init = initial_state(&m, 1).unwrap();
        // Occupying q2 flips +0.5 Z2: energy −0.5 − 0.5.
        assert_eq!(init.state.to_string(), "01");
        assert!((init.energy + 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_background_tie_break() {
        let h = sum(4, &[(0.5, "XXII")]);
        let m = HamiltonianModel::split(&h, BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder);
        let init = initial_state(&m, 2).unwrap();
        assert_eq!(init.state.to_string(), "0011");
        assert_eq!(init.minimizers.len(), 6);
        assert_eq!(greedy_initial(&m, 2).state.to_string(), "0011");
    }

    #[test]
    fn greedy_matches_enumeration() {
        let h = sum(5, &[(0.3, "ZIIII"), (-0.2, "IZIII"), (0.7, "IIZII"), (0.3, "IIIZI"), (0.1, "IIIIZ")]);
        let m = HamiltonianModel::split(&h, BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder);
        for k in 0..=5 {
            assert_eq!(initial_state(&m, k).unwrap().state, greedy_initial(&m, k).state);
        }
    }

    #[test]
    fn metadata_round_trip() {
        let h = sum(2, &[(-0.5, "ZI"), (0.25, "XX"), (1.0, "II")]);
        let mut m = HamiltonianModel::split(&h, BackgroundRule::ZWeightLe1, ControlLayout::SharedLadder);
        m.electrons = Some(1);
        let md = m.metadata();
        assert_eq!(ModelMetadata::parse(&md.to_text()).unwrap(), md);
    }
}
