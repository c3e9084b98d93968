//! Jordan-Wigner encoding: `c_p = ½(X_p + iY_p) Z_{p-1}…Z_0`, occupied = |1⟩.

use std::collections::HashMap;

use num_complex::Complex64;

use super::fcidump::MolecularIntegrals;
use super::ChemError;
use crate::pauli::{PauliString, PauliSum};

const EPS: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-10;

/// A complex combination of Pauli strings, used for operator products.
#[derive(Clone, Debug, Default)]
pub struct PauliPolynomial {
    pub terms: Vec<(Complex64, PauliString)>,
}

impl PauliPolynomial {
    pub fn mul(&self, other: &PauliPolynomial) -> PauliPolynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, pa) in &self.terms {
            for (b, pb) in &other.terms {
                let (ph, prod) = pa.multiply(pb).expect("equal lengths");
                terms.push((a * b * ph.to_complex(), prod));
            }
        }
        PauliPolynomial { terms }
    }

    fn accumulate_into(&self, scale: f64, acc: &mut HashMap<PauliString, Complex64>, order: &mut Vec<PauliString>) {
        for (c, p) in &self.terms {
            let key = p.unsigned();
            let v = c * p.sign() * scale;
            acc.entry(key)
                .and_modify(|x| *x += v)
                .or_insert_with(|| {
                    order.push(key);
                    v
                });
        }
    }
}

/// Annihilation (`dagger = false`) or creation operator on spin-orbital `p`.
pub fn ladder(qubits: usize, p: usize, dagger: bool) -> PauliPolynomial {
    let below = (1u64 << p) - 1;
    let x = PauliString::from_masks(qubits, 1 << p, below, false).expect("valid masks");
    let y = PauliString::from_masks(qubits, 1 << p, below | (1 << p), false).expect("valid masks");
    let iy = if dagger { Complex64::new(0.0, -0.5) } else { Complex64::new(0.0, 0.5) };
    PauliPolynomial { terms: vec![(Complex64::new(0.5, 0.0), x), (iy, y)] }
}

/// Qubit Hamiltonian of the second-quantised operator, including the core energy.
pub fn jordan_wigner(mi: &MolecularIntegrals) -> Result<PauliSum, ChemError> {
    let l = mi.spin_orbitals;
    let create: Vec<PauliPolynomial> = (0..l).map(|p| ladder(l, p, true)).collect();
    let annihilate: Vec<PauliPolynomial> = (0..l).map(|p| ladder(l, p, false)).collect();
    let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
    let mut order = Vec::new();
    let identity = PauliString::identity(l).map_err(ChemError::Pauli)?;
    acc.insert(identity, Complex64::new(mi.core_energy, 0.0));
    order.push(identity);

    for p in 0..l {
        for q in 0..l {
            let h = mi.h1(p, q);
            if h.abs() < EPS {
                continue;
            }
            create[p].mul(&annihilate[q]).accumulate_into(h, &mut acc, &mut order);
        }
    }
    for p in 0..l {
        for q in 0..l {
            let pq = create[p].mul(&create[q]);
            for r in 0..l {
                let pqr = pq.mul(&annihilate[r]);
                for s in 0..l {
                    let h = mi.h2(p, q, r, s);
                    if h.abs() < EPS {
                        continue;
                    }
                    pqr.mul(&annihilate[s]).accumulate_into(h, &mut acc, &mut order);
                }
            }
        }
    }

    let scale = acc.values().map(|c| c.norm()).fold(1.0, f64::max);
    let mut items = Vec::with_capacity(order.len());
    for key in order {
        let c = acc[&key];
        if c.im.abs() > HERMITIAN_TOL * scale {
            return Err(ChemError::NonHermitian { string: key.to_string(), imaginary: c.im });
        }
        items.push((c.re, key));
    }
    PauliSum::from_signed(l, items).map_err(ChemError::Pauli)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dense(poly: &PauliPolynomial, n: usize) -> DMatrix<Complex64> {
        let dim = 1 << n;
        let mut m = DMatrix::zeros(dim, dim);
        for (c, p) in &poly.terms {
            m += p.dense(n).unwrap() * *c;
        }
        m
    }

    #[test]
    fn number_operator_is_projector_on_one() {
        let n = 3;
        for p in 0..n {
            let num = ladder(n, p, true).mul(&ladder(n, p, false));
            let m = dense(&num, n);
            for i in 0..(1 << n) {
                let occ = (i >> p) & 1;
                assert!((m[(i, i)].re - occ as f64).abs() < 1e-14);
            }
        }
    }
}
