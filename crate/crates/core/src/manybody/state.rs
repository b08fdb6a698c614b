use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::orbitals::{eigensolve, MoSet};
use super::space::{spin_orbital, spin_squared, Determinant, DeterminantSpace};
use crate::error::{Error, Result};

/// Normalized complex state vector in the configuration basis of a space.
#[derive(Debug, Clone, PartialEq)]
pub struct CiState {
    pub c: DVector<Complex64>,
}

impl CiState {
    pub fn new(c: DVector<Complex64>) -> Result<CiState> {
        let n = c.norm();
        if !(n > 1e-14) {
            return Err(Error::ManyBody("cannot normalize a zero state".into()));
        }
        Ok(CiState { c: c / Complex64::from(n) })
    }

    pub fn from_real(v: &DVector<f64>) -> Result<CiState> {
        CiState::new(v.map(Complex64::from))
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn norm(&self) -> f64 {
        self.c.norm()
    }
}

/// Ascending eigenvalues with eigenvectors in the configuration basis.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigenpairs {
    pub fn of(h: &DMatrix<f64>) -> Eigenpairs {
        let (values, vectors) = eigensolve(h);
        Eigenpairs { values, vectors }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn state(&self, k: usize) -> CiState {
        CiState::from_real(&self.vectors.column(k).into_owned()).expect("eigenvectors are normalized")
    }

    /// Normalized superposition `Σ w_k |k⟩`.
    pub fn superposition(&self, weights: &[(usize, Complex64)]) -> Result<CiState> {
        let mut c = DVector::<Complex64>::zeros(self.vectors.nrows());
        for &(k, w) in weights {
            if k >= self.len() {
                return Err(Error::ManyBody(format!("eigenstate {k} out of range ({} available)", self.len())));
            }
            c += self.vectors.column(k).map(Complex64::from) * w;
        }
        CiState::new(c)
    }

    /// Eigenbasis expansion `V^T c`.
    pub fn expand(&self, state: &CiState) -> DVector<Complex64> {
        self.vectors.map(Complex64::from).transpose() * &state.c
    }
}

/// Eigenpairs of `h` restricted to the singlet subspace of `space`.
pub fn singlet_eigenpairs(space: &DeterminantSpace, h: &DMatrix<f64>) -> Eigenpairs {
    let (s_vals, s_vecs) = eigensolve(&spin_squared(space));
    let keep: Vec<usize> = (0..s_vals.len()).filter(|&i| s_vals[i].abs() < 0.5).collect();
    let b = DMatrix::from_columns(&keep.iter().map(|&i| s_vecs.column(i)).collect::<Vec<_>>());
    let (values, v) = eigensolve(&(b.transpose() * h * &b));
    Eigenpairs { values, vectors: b * v }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinCoupling {
    Singlet,
    Triplet,
    /// Both electrons spin-up: `f↑ ∧ g↑`.
    SpinOrbitalProduct,
}

impl SpinCoupling {
    pub fn name(self) -> &'static str {
        match self {
            SpinCoupling::Singlet => "singlet",
            SpinCoupling::Triplet => "triplet",
            SpinCoupling::SpinOrbitalProduct => "spin_orbital_product",
        }
    }

    pub fn parse(s: &str) -> Result<SpinCoupling> {
        match s {
            "singlet" => Ok(SpinCoupling::Singlet),
            "triplet" => Ok(SpinCoupling::Triplet),
            "spin_orbital_product" | "product" => Ok(SpinCoupling::SpinOrbitalProduct),
            _ => Err(Error::Config(format!(
                "unknown spin coupling `{s}` (expected singlet, triplet or spin_orbital_product)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub state: CiState,
    /// Fraction of the exact norm retained in the space.
    pub retained: f64,
}

/// Antisymmetrized two-electron product of AO-expanded functions `f`, `g`,
/// expanded in the space and renormalized.
pub fn project_product_state(
    space: &DeterminantSpace,
    mos: &MoSet,
    s: &DMatrix<f64>,
    f: &DVector<f64>,
    g: &DVector<f64>,
    coupling: SpinCoupling,
) -> Result<Projection> {
    if space.n_electrons != 2 {
        return Err(Error::ManyBody("product states need a two-electron space".into()));
    }
    let (nf, ng, fg) = ((f.transpose() * s * f)[(0, 0)], (g.transpose() * s * g)[(0, 0)], (f.transpose() * s * g)[(0, 0)]);
    let exact = match coupling {
        SpinCoupling::Singlet => 2.0 * (nf * ng + fg * fg),
        SpinCoupling::Triplet => 2.0 * (nf * ng - fg * fg),
        SpinCoupling::SpinOrbitalProduct => nf * ng - fg * fg,
    };
    if !(exact > 1e-14 * nf.max(1.0) * ng.max(1.0)) {
        return Err(Error::ManyBody(format!(
            "{} product state has zero norm (identical orbitals?)",
            coupling.name()
        )));
    }
    let df = mos.coefficients_of(s, f);
    let dg = mos.coefficients_of(s, g);
    let terms: &[(f64, bool, bool, bool)] = match coupling {
        // (weight, swap f/g, spin of first, spin of second); a†_x a†_y |0⟩
        SpinCoupling::Singlet => &[(1.0, false, false, true), (1.0, true, false, true)],
        SpinCoupling::Triplet => &[(1.0, false, false, true), (-1.0, true, false, true)],
        SpinCoupling::SpinOrbitalProduct => &[(1.0, false, false, false)],
    };
    let mut v = DVector::<f64>::zeros(space.determinants.len());
    let mut lost = 0.0;
    for p in 0..mos.n() {
        for q in 0..mos.n() {
            for &(w, swap, s1, s2) in terms {
                // first operator acts on the f-like index unless swapped
                let (a, b) = if swap { (q, p) } else { (p, q) };
                let amp = w * df[p] * dg[q];
                if amp == 0.0 {
                    continue;
                }
                let Some((sy, d)) = Determinant(0).create(spin_orbital(b, s2)) else { continue };
                let Some((sx, d)) = d.create(spin_orbital(a, s1)) else { continue };
                match space.index_of(d) {
                    Some(i) => v[i] += sx * sy * amp,
                    None => lost += amp * amp,
                }
            }
        }
    }
    let projected = space.project(&v);
    let retained = projected.norm_squared() / exact;
    log::info!(
        "{} product state: retained norm fraction {:.12} ({} configurations)",
        coupling.name(),
        retained,
        space.dim()
    );
    let _ = lost;
    Ok(Projection {
        state: CiState::from_real(&projected)?,
        retained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::geometry::{build_molecule, GeometrySpec};
    use crate::integrals::compute_integrals;
    use crate::manybody::{build_space, hamiltonian, lowdin, rhf, Scheme, ScfOptions};

    fn unit(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    #[test]
    fn covalent_singlet_in_sigma_orbitals() {
        let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
        let b = build_basis(&m, "min-s").unwrap();
        let t = compute_integrals(&b, &m).unwrap();
        let s = t.s[(0, 1)];
        // σg, σu orbitals as the MO set
        let cg = 1.0 / (2.0 * (1.0 + s)).sqrt();
        let cu = 1.0 / (2.0 * (1.0 - s)).sqrt();
        let mos = MoSet {
            c: DMatrix::from_row_slice(2, 2, &[cg, cu, cg, -cu]),
            ..lowdin(&t.s).unwrap()
        };
        let space = build_space(Scheme::FullCi2e, 2, 2).unwrap();
        let p = project_product_state(&space, &mos, &t.s, &unit(2, 0), &unit(2, 1), SpinCoupling::Singlet).unwrap();
        assert!((p.retained - 1.0).abs() < 1e-10);
        // 1sA1sB + 1sB1sA = (1+s)σg² − (1−s)σu² up to normalization
        let gg = space.index_of(Determinant(0b0011)).unwrap();
        let uu = space.index_of(Determinant(0b1100)).unwrap();
        let (wg, wu) = ((1.0 + s), -(1.0 - s));
        let nrm = (wg * wg + wu * wu).sqrt();
        assert!((p.state.c[gg].re - wg / nrm).abs() < 1e-10);
        assert!((p.state.c[uu].re - wu / nrm).abs() < 1e-10);
        let others: f64 = p.state.c.iter().enumerate().filter(|(i, _)| *i != gg && *i != uu).map(|(_, x)| x.norm_sqr()).sum();
        assert!(others < 1e-20);
    }

    #[test]
    fn closed_shell_single_orbital() {
        let mos = lowdin(&DMatrix::identity(1, 1)).unwrap();
        let space = build_space(Scheme::FullCi2e, 1, 2).unwrap();
        let f = unit(1, 0);
        let p = project_product_state(&space, &mos, &DMatrix::identity(1, 1), &f, &f, SpinCoupling::Singlet).unwrap();
        assert_eq!(space.dim(), 1);
        assert!((p.state.c[0].norm() - 1.0).abs() < 1e-14);
        assert!(project_product_state(&space, &mos, &DMatrix::identity(1, 1), &f, &f, SpinCoupling::SpinOrbitalProduct).is_err());
        assert!(project_product_state(&space, &mos, &DMatrix::identity(1, 1), &f, &f, SpinCoupling::Triplet).is_err());
    }

    #[test]
    fn full_ci_below_rhf_and_singlet_ground() {
        let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
        let b = build_basis(&m, "split-s").unwrap();
        let t = compute_integrals(&b, &m).unwrap();
        let hf = rhf(&t, 2, m.nuclear_repulsion(), ScfOptions::default()).unwrap();
        let mos = lowdin(&t.s).unwrap();
        let space = build_space(Scheme::FullCi2e, b.len(), 2).unwrap();
        let h = hamiltonian(&space, &mos.transform(&t.h()), &mos.transform_eri(&t.eri), m.nuclear_repulsion());
        let all = Eigenpairs::of(&h);
        let singlets = singlet_eigenpairs(&space, &h);
        assert!(all.values[0] <= hf.total_energy.unwrap() + 1e-12);
        assert!((all.values[0] - singlets.values[0]).abs() < 1e-10);
        assert_eq!(singlets.len(), b.len() * (b.len() + 1) / 2);
        for k in 0..singlets.len() {
            let v = singlets.vectors.column(k);
            let r = &h * v - v * singlets.values[k];
            assert!(r.norm() < 1e-10 * h.norm());
        }
    }

    #[test]
    fn sp_product_state_spans_several_eigenstates() {
        let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
        let b = build_basis(&m, "sp").unwrap();
        let t = compute_integrals(&b, &m).unwrap();
        let mos = lowdin(&t.s).unwrap();
        let space = build_space(Scheme::FullCi2e, b.len(), 2).unwrap();
        let h = hamiltonian(&space, &mos.transform(&t.h()), &mos.transform_eri(&t.eri), m.nuclear_repulsion());
        let e = Eigenpairs::of(&h);
        let s1 = b.find(0, [0, 0, 0]).unwrap();
        let pz = b.find(1, [0, 0, 1]).unwrap();
        let p = project_product_state(&space, &mos, &t.s, &unit(b.len(), s1), &unit(b.len(), pz), SpinCoupling::Singlet).unwrap();
        assert!((p.retained - 1.0).abs() < 1e-10);
        let w = e.expand(&p.state);
        assert!(w.iter().filter(|x| x.norm_sqr() > 1e-3).count() >= 3);
        assert!((w.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn superposition_normalizes() {
        let e = Eigenpairs::of(&DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, -1.0]));
        let s = e.superposition(&[(0, Complex64::new(1.0, 0.0)), (1, Complex64::new(0.0, 1.0))]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-14);
        assert!(e.superposition(&[(5, Complex64::from(1.0))]).is_err());
    }
}
