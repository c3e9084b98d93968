//! Compilation of Pauli rotations to single-qubit gates and native
//! `exp(iθ Z⊗Z)` two-qubit gates.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::statevector::StateVector;
use super::EngineError;
use crate::pauli::{Pauli, PauliString};

/// How an ancilla-controlled rotation is laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ControlLayout {
    /// No control.
    Uncontrolled,
    /// `exp(iθ/2 P)` and `exp(∓iθ/2 Z_a⊗P)` compiled as two separate rotations.
    #[default]
    Composed,
    /// Both factors share one basis change and parity ladder.
    SharedLadder,
}

impl ControlLayout {
    pub fn name(self) -> &'static str {
        match self {
            ControlLayout::Uncontrolled => "uncontrolled",
            ControlLayout::Composed => "composed",
            ControlLayout::SharedLadder => "shared_ladder",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uncontrolled" => Some(ControlLayout::Uncontrolled),
            "composed" => Some(ControlLayout::Composed),
            "shared_ladder" => Some(ControlLayout::SharedLadder),
            _ => None,
        }
    }
}

/// Two-qubit gate count of one weight-`w` rotation.
pub fn rotation_two_qubit_count(weight: usize, layout: ControlLayout) -> usize {
    if weight == 0 {
        return 0;
    }
    match layout {
        ControlLayout::Uncontrolled => 2 * (weight - 1),
        ControlLayout::Composed => 2 * (weight - 1) + 2 * weight,
        ControlLayout::SharedLadder => 2 * (weight - 1) + 1,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NativeGate {
    H(usize),
    /// `diag(1, i)`.
    S(usize),
    /// `diag(1, -i)`.
    Sdg(usize),
    X(usize),
    /// `exp(iθ Z_q)`.
    Rz(usize, f64),
    /// `exp(iθ Z_a Z_b)`.
    Zz(usize, usize, f64),
}

impl NativeGate {
    pub fn apply(&self, v: &mut StateVector) {
        match *self {
            NativeGate::H(q) => v.apply_hadamard(q),
            NativeGate::S(q) => v.apply_phase_power(q, 1),
            NativeGate::Sdg(q) => v.apply_phase_power(q, 3),
            NativeGate::X(q) => v.apply_x(q),
            NativeGate::Rz(q, t) => v.apply_rz(q, t),
            NativeGate::Zz(a, b, t) => v.apply_zz(a, b, t),
        }
    }

    pub fn inverse(&self) -> NativeGate {
        match *self {
            NativeGate::S(q) => NativeGate::Sdg(q),
            NativeGate::Sdg(q) => NativeGate::S(q),
            NativeGate::Rz(q, t) => NativeGate::Rz(q, -t),
            NativeGate::Zz(a, b, t) => NativeGate::Zz(a, b, -t),
            g => g,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, NativeGate::Zz(..))
    }
}

/// A gate sequence in time order with a global phase `exp(i·global_phase)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct NativeCircuit {
    pub qubits: usize,
    pub gates: Vec<NativeGate>,
    pub global_phase: f64,
}

impl NativeCircuit {
    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn apply(&self, v: &mut StateVector) {
        for g in &self.gates {
            g.apply(v);
        }
        if self.global_phase != 0.0 {
            v.scale(Complex64::from_polar(1.0, self.global_phase));
        }
    }

    pub fn extend(&mut self, other: &NativeCircuit) {
        self.gates.extend_from_slice(&other.gates);
        self.global_phase += other.global_phase;
    }

    pub fn dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut v = StateVector::basis(self.qubits, col as u64);
            self.apply(&mut v);
            for (row, a) in v.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    /// Act when the control reads |1⟩ (otherwise when it reads |0⟩).
    pub on_one: bool,
}

/// Gates mapping `P` on its support to `Z…Z`, and the support in ascending order.
fn basis_change(p: &PauliString) -> (Vec<NativeGate>, Vec<usize>) {
    let mut gates = Vec::new();
    let mut support = Vec::new();
    for q in 0..p.len() {
        match p.letter(q) {
            Pauli::I => continue,
            Pauli::X => gates.push(NativeGate::H(q)),
            Pauli::Y => {
                gates.push(NativeGate::Sdg(q));
                gates.push(NativeGate::H(q));
            }
            Pauli::Z => {}
        }
        support.push(q);
    }
    (gates, support)
}

/// CNOT chain accumulating the support parity on its last qubit.
fn parity_ladder(support: &[usize]) -> Vec<NativeGate> {
    let mut gates = Vec::new();
    for w in support.windows(2) {
        let (c, t) = (w[0], w[1]);
        gates.push(NativeGate::H(t));
        gates.push(NativeGate::Rz(c, -FRAC_PI_4));
        gates.push(NativeGate::Rz(t, -FRAC_PI_4));
        gates.push(NativeGate::Zz(c, t, FRAC_PI_4));
        gates.push(NativeGate::H(t));
    }
    gates
}

fn inverse_sequence(gates: &[NativeGate]) -> Vec<NativeGate> {
    gates.iter().rev().map(|g| g.inverse()).collect()
}

/// Wrap `centre` (acting on the last support qubit) in basis change and ladder.
fn conjugated(p: &PauliString, centre: impl FnOnce(usize) -> Vec<NativeGate>) -> Vec<NativeGate> {
    let (basis, support) = basis_change(p);
    let ladder = parity_ladder(&support);
    let mut gates = basis.clone();
    gates.extend_from_slice(&ladder);
    gates.extend(centre(*support.last().expect("non-identity string")));
    gates.extend(inverse_sequence(&ladder));
    gates.extend(inverse_sequence(&basis));
    gates
}

/// Native circuit for `exp(i·angle·P)` on `qubits` wires, optionally
/// controlled on an ancilla wire outside the support of `P`.
pub fn compile_rotation(
    p: &PauliString,
    angle: f64,
    control: Option<Control>,
    layout: ControlLayout,
    qubits: usize,
) -> Result<NativeCircuit, EngineError> {
    if p.len() > qubits {
        return Err(EngineError::QubitMismatch { expected: qubits, found: p.len() });
    }
    let theta = angle * p.sign();
    let wide = PauliString::from_masks(qubits, p.x_mask(), p.z_mask(), false)?;
    let mut out = NativeCircuit { qubits, gates: Vec::new(), global_phase: 0.0 };
    let Some(ctrl) = control else {
        if wide.is_identity() {
            out.global_phase = theta;
        } else {
            out.gates = conjugated(&wide, |k| vec![NativeGate::Rz(k, theta)]);
        }
        return Ok(out);
    };
    if ctrl.qubit >= qubits || wide.support() >> ctrl.qubit & 1 == 1 {
        return Err(EngineError::InvalidControl(ctrl.qubit));
    }
    // exp(iθP) on one branch = exp(iθ/2 P)·exp(σ iθ/2 Z_a P), σ = −1 for |1⟩.
    let sigma = if ctrl.on_one { -1.0 } else { 1.0 };
    let half = theta / 2.0;
    if wide.is_identity() {
        out.global_phase = half;
        out.gates.push(NativeGate::Rz(ctrl.qubit, sigma * half));
        return Ok(out);
    }
    match layout {
        ControlLayout::Uncontrolled => return Err(EngineError::InvalidControl(ctrl.qubit)),
        ControlLayout::Composed => {
            let za = wide.with_letter(ctrl.qubit, Pauli::Z);
            out.gates = conjugated(&wide, |k| vec![NativeGate::Rz(k, half)]);
            out.gates.extend(conjugated(&za, |k| vec![NativeGate::Rz(k, sigma * half)]));
        }
        ControlLayout::SharedLadder => {
            out.gates = conjugated(&wide, |k| vec![NativeGate::Rz(k, half), NativeGate::Zz(ctrl.qubit, k, sigma * half)]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expected(p: &PauliString, angle: f64, n: usize) -> DMatrix<Complex64> {
        let wide = PauliString::from_masks(n, p.x_mask(), p.z_mask(), p.is_negative()).unwrap();
        let pm = wide.dense(n).unwrap();
        DMatrix::identity(1 << n, 1 << n) * Complex64::new(angle.cos(), 0.0) + pm * Complex64::new(0.0, angle.sin())
    }

    #[test]
    fn uncontrolled_matches_exponential() {
        for s in ["Z", "XY", "YZX", "-XIZY", "IIII", "YYYY"] {
            let p: PauliString = s.parse().unwrap();
            let n = p.len();
            let c = compile_rotation(&p, 0.3, None, ControlLayout::Uncontrolled, n).unwrap();
            assert!((c.dense() - expected(&p, 0.3, n)).norm() < 1e-12, "{s}");
            assert_eq!(c.two_qubit_count(), rotation_two_qubit_count(p.weight(), ControlLayout::Uncontrolled));
        }
    }

    #[test]
    fn controlled_acts_on_one_branch() {
        for layout in [ControlLayout::Composed, ControlLayout::SharedLadder] {
            for on_one in [true, false] {
                for s in ["Z", "XY", "-YZX", "III"] {
                    let p: PauliString = s.parse().unwrap();
                    let n = p.len() + 1;
                    let ctrl = Control { qubit: n - 1, on_one };
                    let c = compile_rotation(&p, -0.7, Some(ctrl), layout, n).unwrap();
                    let u = expected(&p, -0.7, n);
                    let m = c.dense();
                    for col in 0..1usize << n {
                        let active = (col >> (n - 1) & 1 == 1) == on_one;
                        for row in 0..1usize << n {
                            let want = if active {
                                u[(row, col)]
                            } else if row == col {
                                Complex64::new(1.0, 0.0)
                            } else {
                                Complex64::new(0.0, 0.0)
                            };
                            assert!((m[(row, col)] - want).norm() < 1e-12, "{s} {layout:?} {on_one}");
                        }
                    }
                    assert_eq!(c.two_qubit_count(), rotation_two_qubit_count(p.weight(), layout));
                }
            }
        }
    }
}
