//! FCIDUMP reader and spin-orbital expansion.

use super::ChemError;

/// Spatial-orbital integrals as read from the file.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialIntegrals {
    pub orbitals: usize,
    pub electrons: usize,
    pub ms2: i64,
    pub core_energy: f64,
    /// `h[i*n + j]`.
    pub one_body: Vec<f64>,
    /// Chemist-notation `(ij|kl)` at `((i*n + j)*n + k)*n + l`.
    pub two_body: Vec<f64>,
}

impl SpatialIntegrals {
    pub fn h1(&self, i: usize, j: usize) -> f64 {
        self.one_body[i * self.orbitals + j]
    }

    pub fn eri(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let n = self.orbitals;
        self.two_body[((i * n + j) * n + k) * n + l]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SpinOrdering {
    /// Spatial orbital `i` maps to spin-orbitals `2i` (up) and `2i+1` (down).
    #[default]
    Interleaved,
    /// Up spin-orbitals `0..n`, down spin-orbitals `n..2n`.
    Blocked,
}

impl SpinOrdering {
    pub fn name(self) -> &'static str {
        match self {
            SpinOrdering::Interleaved => "interleaved",
            SpinOrdering::Blocked => "blocked",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "interleaved" => Some(SpinOrdering::Interleaved),
            "blocked" => Some(SpinOrdering::Blocked),
            _ => None,
        }
    }
}

/// Second-quantised Hamiltonian over spin-orbitals:
/// `H = core + Σ h_pq c†_p c_q + Σ h_pqrs c†_p c†_q c_r c_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularIntegrals {
    pub spin_orbitals: usize,
    pub electrons: usize,
    pub ms2: i64,
    pub ordering: SpinOrdering,
    pub core_energy: f64,
    pub one_body: Vec<f64>,
    pub two_body: Vec<f64>,
}

impl MolecularIntegrals {
    pub fn h1(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.spin_orbitals + q]
    }

    pub fn h2(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.spin_orbitals;
        self.two_body[((p * n + q) * n + r) * n + s]
    }

    /// Expand spatial integrals; `h_pqrs = ½ (ps|qr)` when spins match.
    pub fn from_spatial(sp: &SpatialIntegrals, ordering: SpinOrdering) -> Self {
        let n = sp.orbitals;
        let l = 2 * n;
        let locate = |p: usize| -> (usize, usize) {
            match ordering {
                SpinOrdering::Interleaved => (p / 2, p % 2),
                SpinOrdering::Blocked => (p % n, p / n),
            }
        };
        let mut one_body = vec![0.0; l * l];
        let mut two_body = vec![0.0; l * l * l * l];
        for p in 0..l {
            let (i, sp_) = locate(p);
            for q in 0..l {
                let (j, sq) = locate(q);
                if sp_ == sq {
                    one_body[p * l + q] = sp.h1(i, j);
                }
            }
        }
        for p in 0..l {
            let (i, sp_) = locate(p);
            for q in 0..l {
                let (j, sq) = locate(q);
                for r in 0..l {
                    let (k, sr) = locate(r);
                    if sq != sr {
                        continue;
                    }
                    for s in 0..l {
                        let (m, ss) = locate(s);
                        if sp_ != ss || p == q || r == s {
                            continue;
                        }
                        two_body[((p * l + q) * l + r) * l + s] = 0.5 * sp.eri(i, m, j, k);
                    }
                }
            }
        }
        MolecularIntegrals {
            spin_orbitals: l,
            electrons: sp.electrons,
            ms2: sp.ms2,
            ordering,
            core_energy: sp.core_energy,
            one_body,
            two_body,
        }
    }
}

const CONFLICT_TOL: f64 = 1e-10;

/// Parse FCIDUMP text (8-fold symmetric real integrals).
pub fn parse_fcidump(text: &str) -> Result<SpatialIntegrals, ChemError> {
    let mut header = String::new();
    let mut body_start = None;
    let mut in_header = false;
    for (idx, line) in text.lines().enumerate() {
        let upper = line.trim().to_ascii_uppercase();
        if !in_header {
            if upper.is_empty() {
                continue;
            }
            if !upper.starts_with("&FCI") {
                return Err(ChemError::Parse { line: idx + 1, message: "missing &FCI namelist".into() });
            }
            in_header = true;
        }
        let end = upper.contains("&END") || upper == "/" || upper.ends_with(" /");
        header.push_str(&upper);
        header.push(' ');
        if end {
            body_start = Some(idx + 1);
            break;
        }
    }
    let body_start = body_start.ok_or(ChemError::Parse { line: 0, message: "unterminated namelist".into() })?;
    let fields = parse_namelist(&header);
    let get = |key: &str| -> Option<i64> { fields.iter().find(|(k, _)| k == key).and_then(|(_, v)| v.first().copied()) };
    let norb = get("NORB").ok_or(ChemError::Parse { line: 1, message: "NORB missing".into() })?;
    let nelec = get("NELEC").ok_or(ChemError::Parse { line: 1, message: "NELEC missing".into() })?;
    let ms2 = get("MS2").unwrap_or(0);
    if get("IUHF").unwrap_or(0) != 0 {
        return Err(ChemError::Unsupported("unrestricted integrals".into()));
    }
    if norb <= 0 || norb > 32 {
        return Err(ChemError::Parse { line: 1, message: format!("NORB={norb} out of range") });
    }
    let n = norb as usize;
    if nelec < 0 || nelec as usize > 2 * n {
        return Err(ChemError::InvalidElectronCount { electrons: nelec.max(0) as usize, spin_orbitals: 2 * n });
    }

    let mut one: Vec<Option<f64>> = vec![None; n * n];
    let mut two: Vec<Option<f64>> = vec![None; n * n * n * n];
    let mut core: Option<f64> = None;

    for (idx, raw) in text.lines().enumerate().skip(body_start) {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.len() != 5 {
            return Err(ChemError::Parse { line: line_no, message: format!("expected 5 fields, got {}", words.len()) });
        }
        let value: f64 = words[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| ChemError::Parse { line: line_no, message: format!("bad value {:?}", words[0]) })?;
        let mut idx4 = [0usize; 4];
        for (slot, w) in idx4.iter_mut().zip(&words[1..]) {
            let v: i64 = w
                .parse()
                .map_err(|_| ChemError::Parse { line: line_no, message: format!("bad index {w:?}") })?;
            if v < 0 || v > norb {
                return Err(ChemError::Parse { line: line_no, message: format!("index {v} outside 0..={norb}") });
            }
            *slot = v as usize;
        }
        let [i, j, k, l] = idx4;
        let store = |slot: &mut Option<f64>| -> Result<(), ChemError> {
            match *slot {
                Some(old) if (old - value).abs() > CONFLICT_TOL * old.abs().max(1.0) => {
                    Err(ChemError::ConflictingDuplicate { line: line_no, previous: old, value })
                }
                _ => {
                    *slot = Some(value);
                    Ok(())
                }
            }
        };
        match (i, j, k, l) {
            (0, 0, 0, 0) => store(&mut core)?,
            (i, 0, 0, 0) if i > 0 => {}
            (i, j, 0, 0) if i > 0 && j > 0 => {
                let (a, b) = (i - 1, j - 1);
                store(&mut one[a * n + b])?;
                store(&mut one[b * n + a])?;
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                let (a, b, c, d) = (i - 1, j - 1, k - 1, l - 1);
                for (p, q, r, s) in [
                    (a, b, c, d),
                    (b, a, c, d),
                    (a, b, d, c),
                    (b, a, d, c),
                    (c, d, a, b),
                    (d, c, a, b),
                    (c, d, b, a),
                    (d, c, b, a),
                ] {
                    store(&mut two[((p * n + q) * n + r) * n + s])?;
                }
            }
            _ => {
                return Err(ChemError::Parse {
                    line: line_no,
                    message: format!("unrecognised index pattern {i} {j} {k} {l}"),
                })
            }
        }
    }

    Ok(SpatialIntegrals {
        orbitals: n,
        electrons: nelec as usize,
        ms2,
        core_energy: core.unwrap_or(0.0),
        one_body: one.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
        two_body: two.into_iter().map(|v| v.unwrap_or(0.0)).collect(),
    })
}

fn parse_namelist(header: &str) -> Vec<(String, Vec<i64>)> {
    let cleaned = header.replace("&FCI", " ").replace("&END", " ").replace('/', " ");
    let mut fields: Vec<(String, Vec<i64>)> = Vec::new();
    for token in cleaned.split([',', ' ', '\t']).filter(|t| !t.is_empty()) {
        if let Some((key, value)) = token.split_once('=') {
            let mut values = Vec::new();
            if let Ok(v) = value.trim().parse::<i64>() {
                values.push(v);
            }
            fields.push((key.trim().to_string(), values));
        } else if let (Some(last), Ok(v)) = (fields.last_mut(), token.parse::<i64>()) {
            last.1.push(v);
        }
    }
    fields
}

#[cfg(test)]
mod tests {
    use super::*;

    const H2: &str = " &FCI NORB=   2,NELEC= 2,MS2=0,
  ORBSYM=1,1,
  ISYM=1,
 &END
 0.607508394562142    1    1    1    1
 0.6059535158509048    1    1    2    2
 0.2038742785760285    2    1    2    1
 0.6059535158509048    2    2    1    1
 0.6359651697201669    2    2    2    2
-1.058849542494191    1    1  0  0
-0.6169395010345751    2    2  0  0
 0.4767362260540541  0  0  0  0
";

    #[test]
    fn reads_header_and_records() {
        let sp = parse_fcidump(H2).unwrap();
        assert_eq!(sp.orbitals, 2);
        assert_eq!(sp.electrons, 2);
        assert_eq!(sp.core_energy, 0.4767362260540541);
        assert_eq!(sp.eri(0, 1, 0, 1), 0.2038742785760285);
        assert_eq!(sp.eri(1, 0, 1, 0), 0.2038742785760285);
        assert_eq!(sp.eri(0, 0, 1, 1), 0.6059535158509048);
        assert_eq!(sp.h1(1, 1), -0.6169395010345751);
    }

    #[test]
    fn conflicting_duplicate_is_rejected() {
        let bad = H2.replace(" 0.6059535158509048    2    2    1    1", " 0.7    2    2    1    1");
        assert!(matches!(parse_fcidump(&bad), Err(ChemError::ConflictingDuplicate { line: 8, .. })));
    }

    #[test]
    fn bad_index_reports_line() {
        let bad = H2.replace("2    2    2    2", "3    2    2    2");
        assert!(matches!(parse_fcidump(&bad), Err(ChemError::Parse { line: 9, .. })));
    }

    #[test]
    fn spin_expansion_respects_spin() {
        let sp = parse_fcidump(H2).unwrap();
        let mi = MolecularIntegrals::from_spatial(&sp, SpinOrdering::Interleaved);
        assert_eq!(mi.h1(0, 2), 0.0);
        assert_eq!(mi.h1(0, 1), 0.0);
        assert_eq!(mi.h1(2, 2), sp.h1(1, 1));
        // p=0(up), q=1(down), r=1, s=0: ½(ps|qr) = ½(00|00)
        assert_eq!(mi.h2(0, 1, 1, 0), 0.5 * sp.eri(0, 0, 0, 0));
        assert_eq!(mi.h2(0, 1, 0, 1), 0.0);
    }
}
