//! Dense state vectors with in-place Pauli-rotation and gate kernels.

use num_complex::Complex64;

use crate::pauli::PauliString;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(qubits: usize, bits: u64) -> Self {
        let mut amps = vec![ZERO; 1 << qubits];
        amps[bits as usize] = Complex64::new(1.0, 0.0);
        StateVector { qubits, amps }
    }

    pub fn from_amplitudes(qubits: usize, amps: Vec<Complex64>) -> Self {
        assert_eq!(amps.len(), 1 << qubits, "amplitude count must be 2^qubits");
        StateVector { qubits, amps }
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&mut self, c: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= c);
    }

    /// `exp(i·angle·P)`.
    #[inline]
    pub fn apply_rotation(&mut self, p: &PauliString, angle: f64) {
        self.apply_rotation_where(p, angle, 0, 0);
    }

    /// `exp(i·angle·P)` on the subspace where `index & mask == value`.
    /// `P` must not act on the masked qubits.
    pub fn apply_rotation_where(&mut self, p: &PauliString, angle: f64, mask: u64, value: u64) {
        let (s, c) = angle.sin_cos();
        let is = Complex64::new(0.0, s);
        let x = p.x_mask();
        if x == 0 {
            for (i, a) in self.amps.iter_mut().enumerate() {
                let i = i as u64;
                if i & mask != value {
                    continue;
                }
                let (_, ph) = p.act(i);
                *a *= c + is * ph;
            }
            return;
        }
        let top = 1u64 << (63 - x.leading_zeros());
        for i in 0..self.amps.len() as u64 {
            if i & top != 0 || i & mask != value {
                continue;
            }
            let (j, ph_i) = p.act(i);
            let (_, ph_j) = p.act(j);
            let ai = self.amps[i as usize];
            let aj = self.amps[j as usize];
            self.amps[i as usize] = ai * c + is * ph_j * aj;
            self.amps[j as usize] = aj * c + is * ph_i * ai;
        }
    }

    /// Multiply by a Pauli string.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let mut out = vec![ZERO; self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let (j, ph) = p.act(i as u64);
            out[j as usize] = ph * a;
        }
        self.amps = out;
    }

    /// `exp(i·t·E_k)` on each basis state `k`.
    pub fn apply_diagonal(&mut self, energies: &[f64], t: f64) {
        for (a, e) in self.amps.iter_mut().zip(energies) {
            *a *= Complex64::from_polar(1.0, t * e);
        }
    }

    pub fn apply_hadamard(&mut self, q: usize) {
        let m = 1usize << q;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                let a = self.amps[i];
                let b = self.amps[i | m];
                self.amps[i] = (a + b) * r;
                self.amps[i | m] = (a - b) * r;
            }
        }
    }

    /// Phase `i^power` on the |1⟩ component of qubit `q` (S for 1, S† for 3).
    pub fn apply_phase_power(&mut self, q: usize, power: u8) {
        let ph = match power % 4 {
            0 => return,
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        let m = 1usize << q;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & m != 0 {
                *a *= ph;
            }
        }
    }

    pub fn apply_x(&mut self, q: usize) {
        let m = 1usize << q;
        for i in 0..self.amps.len() {
            if i & m == 0 {
                self.amps.swap(i, i | m);
            }
        }
    }

    /// `exp(i·angle·Z_q)`.
    pub fn apply_rz(&mut self, q: usize, angle: f64) {
        let m = 1usize << q;
        let p0 = Complex64::from_polar(1.0, angle);
        let p1 = p0.conj();
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if i & m == 0 { p0 } else { p1 };
        }
    }

    /// `exp(i·angle·Z_a Z_b)`.
    pub fn apply_zz(&mut self, a: usize, b: usize, angle: f64) {
        let m = (1usize << a) | (1usize << b);
        let p0 = Complex64::from_polar(1.0, angle);
        let p1 = p0.conj();
        for (i, amp) in self.amps.iter_mut().enumerate() {
            *amp *= if (i & m).count_ones() % 2 == 0 { p0 } else { p1 };
        }
    }

    /// Two-qubit Pauli given as letters `(la, lb)` with 0=I,1=X,2=Y,3=Z.
    pub fn apply_pauli_pair(&mut self, a: usize, la: u8, b: usize, lb: u8) {
        self.apply_single_pauli(a, la);
        self.apply_single_pauli(b, lb);
    }

    pub fn apply_single_pauli(&mut self, q: usize, letter: u8) {
        match letter {
            1 => self.apply_x(q),
            2 => {
                // Y = i X Z
                let m = 1usize << q;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
                self.apply_x(q);
                self.scale(Complex64::new(0.0, 1.0));
            }
            3 => {
                let m = 1usize << q;
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_matches_cos_plus_i_sin() {
        let p: PauliString = "XYZ".parse().unwrap();
        let m = p.dense(3).unwrap();
        let theta = 0.37;
        for b in 0..8u64 {
            let mut v = StateVector::basis(3, b);
            v.apply_rotation(&p, theta);
            for r in 0..8 {
                let expect = if r == b as usize { theta.cos() } else { 0.0 } * Complex64::new(1.0, 0.0)
                    + Complex64::new(0.0, theta.sin()) * m[(r, b as usize)];
                assert!((v.amplitudes()[r] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn single_paulis_match_strings() {
        for (letter, s) in [(1u8, "IX"), (2, "IY"), (3, "IZ")] {
            let p: PauliString = s.parse().unwrap();
            for b in 0..4u64 {
                let mut v = StateVector::basis(2, b);
                v.apply_single_pauli(1, letter);
                let mut w = StateVector::basis(2, b);
                w.apply_pauli(&p);
                assert_eq!(v, w);
            }
        }
    }
}
