use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Spin-orbital index `2k + σ`, σ = 0 for up and 1 for down.
pub fn spin_orbital(k: usize, down: bool) -> usize {
    2 * k + down as usize
}

/// Occupation bitstring over spin-orbitals. The canonical order is
/// ascending spin-orbital index (orbital-major, up before down).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Determinant(pub u64);

impl Determinant {
    pub fn from_occupied(occ: &[usize]) -> Result<Determinant> {
        let mut bits = 0u64;
        for &p in occ {
            if p >= 64 || bits & (1 << p) != 0 {
                return Err(Error::ManyBody(format!("invalid occupation {occ:?}")));
            }
            bits |= 1 << p;
        }
        Ok(Determinant(bits))
    }

    pub fn occupied(self) -> Vec<usize> {
        (0..64).filter(|&p| self.0 & (1 << p) != 0).collect()
    }

    pub fn count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn has(self, p: usize) -> bool {
        self.0 & (1 << p) != 0
    }

    fn parity_below(self, p: usize) -> f64 {
        if (self.0 & ((1u64 << p) - 1)).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `a_p |self⟩` as (sign, result).
    pub fn annihilate(self, p: usize) -> Option<(f64, Determinant)> {
        self.has(p).then(|| (self.parity_below(p), Determinant(self.0 & !(1 << p))))
    }

    /// `a†_p |self⟩` as (sign, result).
    pub fn create(self, p: usize) -> Option<(f64, Determinant)> {
        (!self.has(p)).then(|| (self.parity_below(p), Determinant(self.0 | (1 << p))))
    }

    /// `a†_p a_q |self⟩`.
    pub fn excite(self, p: usize, q: usize) -> Option<(f64, Determinant)> {
        let (s1, d) = self.annihilate(q)?;
        let (s2, d) = d.create(p)?;
        Some((s1 * s2, d))
    }

    /// Twice the spin projection (N_up − N_down).
    pub fn two_sz(self) -> i32 {
        let up = (self.0 & 0x5555_5555_5555_5555).count_ones() as i32;
        up - (self.count() as i32 - up)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    FullCi2e,
    Cis,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::FullCi2e => "fullci_2e",
            Scheme::Cis => "cis",
        }
    }

    pub fn parse(s: &str) -> Result<Scheme> {
        match s {
            "fullci_2e" | "fullci" => Ok(Scheme::FullCi2e),
            "cis" => Ok(Scheme::Cis),
            _ => Err(Error::Config(format!("unknown many-body scheme `{s}` (expected fullci_2e or cis)"))),
        }
    }
}

/// Determinants plus an orthonormal configuration basis over them; operator
/// matrices and state vectors live in the configuration basis.
#[derive(Debug, Clone)]
pub struct DeterminantSpace {
    pub scheme: Scheme,
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub determinants: Vec<Determinant>,
    /// Column `c` gives configuration `c` over `determinants`; `None` means
    /// the identity.
    pub configs: Option<DMatrix<f64>>,
    pub labels: Vec<String>,
}

impl DeterminantSpace {
    pub fn dim(&self) -> usize {
        self.configs.as_ref().map_or(self.determinants.len(), |u| u.ncols())
    }

    pub fn index_of(&self, d: Determinant) -> Option<usize> {
        self.determinants.binary_search(&d).ok()
    }

    /// Determinant-basis matrix → configuration basis.
    pub fn restrict(&self, m: DMatrix<f64>) -> DMatrix<f64> {
        match &self.configs {
            None => m,
            Some(u) => u.transpose() * m * u,
        }
    }

    /// Determinant-basis vector → configuration basis.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        match &self.configs {
            None => v.clone(),
            Some(u) => u.transpose() * v,
        }
    }
}

/// Builds a determinant space over `n_orbitals` orthonormal spatial orbitals.
/// `n_occ` is the number of doubly occupied reference orbitals for CIS.
pub fn build_space(scheme: Scheme, n_orbitals: usize, n_electrons: usize) -> Result<DeterminantSpace> {
    if 2 * n_orbitals > 64 {
        return Err(Error::ManyBody(format!("{n_orbitals} orbitals exceed the 32-orbital limit")));
    }
    match scheme {
        Scheme::FullCi2e => {
            if n_electrons != 2 {
                return Err(Error::ManyBody(format!("fullci_2e needs exactly 2 electrons; got {n_electrons}")));
            }
            let m = 2 * n_orbitals;
            let mut dets = Vec::new();
            let mut labels = Vec::new();
            for p in 0..m {
                for q in p + 1..m {
                    dets.push(Determinant((1 << p) | (1 << q)));
                }
            }
            dets.sort();
            for d in &dets {
                labels.push(det_label(*d));
            }
            Ok(DeterminantSpace {
                scheme,
                n_orbitals,
                n_electrons,
                determinants: dets,
                configs: None,
                labels,
            })
        }
        Scheme::Cis => {
            if n_electrons % 2 != 0 || n_electrons == 0 || n_electrons >= 2 * n_orbitals {
                return Err(Error::ManyBody(format!(
                    "cis needs a closed-shell reference with at least one virtual orbital; got {n_electrons} electrons in {n_orbitals} orbitals"
                )));
            }
            let n_occ = n_electrons / 2;
            let reference = Determinant(if n_electrons == 64 { u64::MAX } else { (1u64 << n_electrons) - 1 });
            let mut dets = vec![reference];
            for i in 0..n_occ {
                for a in n_occ..n_orbitals {
                    for down in [false, true] {
                        let (_, d) = reference.excite(spin_orbital(a, down), spin_orbital(i, down)).unwrap();
                        dets.push(d);
                    }
                }
            }
            dets.sort();
            let n_conf = 1 + n_occ * (n_orbitals - n_occ);
            let mut u = DMatrix::zeros(dets.len(), n_conf);
            let mut labels = vec!["ref".to_string()];
            u[(dets.binary_search(&reference).unwrap(), 0)] = 1.0;
            let mut col = 1;
            let w = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..n_occ {
                for a in n_occ..n_orbitals {
                    for down in [false, true] {
                        let (s, d) = reference.excite(spin_orbital(a, down), spin_orbital(i, down)).unwrap();
                        u[(dets.binary_search(&d).unwrap(), col)] += w * s;
                    }
                    labels.push(format!("{i}->{a}"));
                    col += 1;
                }
            }
            Ok(DeterminantSpace {
                scheme,
                n_orbitals,
                n_electrons,
                determinants: dets,
                configs: Some(u),
                labels,
            })
        }
    }
}

fn det_label(d: Determinant) -> String {
    d.occupied()
        .iter()
        .map(|&p| format!("{}{}", p / 2, if p % 2 == 0 { "a" } else { "b" }))
        .collect::<Vec<_>>()
        .join(" ")
}

/// `S²` over the determinants of a space, before configuration restriction.
pub fn spin_squared_determinants(space: &DeterminantSpace) -> DMatrix<f64> {
    let n = space.determinants.len();
    // S² = S₋S₊ + S_z + S_z², with S₊ = Σ_k a†_{k↑} a_{k↓}.
    let raise = |d: Determinant| -> Vec<(f64, Determinant)> {
        (0..space.n_orbitals)
            .filter_map(|k| d.excite(spin_orbital(k, false), spin_orbital(k, true)))
            .collect()
    };
    let raised: Vec<Vec<(f64, Determinant)>> = space.determinants.iter().map(|&d| raise(d)).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let sz = space.determinants[i].two_sz() as f64 / 2.0;
        m[(i, i)] += sz + sz * sz;
        for j in 0..n {
            let mut acc = 0.0;
            for (si, di) in &raised[i] {
                for (sj, dj) in &raised[j] {
                    if di == dj {
                        acc += si * sj;
                    }
                }
            }
            m[(i, j)] += acc;
        }
    }
    m
}

pub fn spin_squared(space: &DeterminantSpace) -> DMatrix<f64> {
    space.restrict(spin_squared_determinants(space))
}
