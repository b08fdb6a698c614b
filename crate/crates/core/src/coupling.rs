//! Coulomb and exchange couplings between fragment orbitals in the
//! separated-fragment limit.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::integrals::IntegralTables;
use crate::manybody::{project_product_state, CiState, DeterminantSpace, MoSet, SpinCoupling};

/// A normalized function given by its AO coefficients.
#[derive(Debug, Clone)]
pub struct FragmentOrbital {
    pub name: String,
    pub coeffs: DVector<f64>,
}

impl FragmentOrbital {
    pub fn new(name: &str, coeffs: DVector<f64>, s: &DMatrix<f64>) -> FragmentOrbital {
        let n = (coeffs.transpose() * s * &coeffs)[(0, 0)].sqrt();
        FragmentOrbital {
            name: name.to_string(),
            coeffs: coeffs / n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CouplingReport {
    pub a: Vec<String>,
    pub b: Vec<String>,
    /// `⟨a_i|h|a_k⟩` with the full one-electron operator.
    pub eps_a: DMatrix<f64>,
    pub eps_b: DMatrix<f64>,
    /// `J[i][j][k][l] = ⟨a_i b_j|g|a_k b_l⟩`
    pub j: Vec<f64>,
    /// `K[i][j][k][l] = ⟨a_i b_j|g|b_l a_k⟩`
    pub k: Vec<f64>,
    pub max_overlap: f64,
}

impl CouplingReport {
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        let (na, nb) = (self.a.len(), self.b.len());
        ((i * nb + j) * na + k) * nb + l
    }

    pub fn coulomb(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.j[self.idx(i, j, k, l)]
    }

    pub fn exchange(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.k[self.idx(i, j, k, l)]
    }

    /// `V^coul = J + K`.
    pub fn v_coul(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.coulomb(i, j, k, l) + self.exchange(i, j, k, l)
    }

    /// `Σ c*_ij c_kj ε_ik + ½ Σ c*_ij c_kl (J − K)` for amplitudes `c[(i, j)]`.
    pub fn site_energy_a(&self, c: &DMatrix<Complex64>) -> f64 {
        let (na, nb) = (self.a.len(), self.b.len());
        let mut e = Complex64::new(0.0, 0.0);
        for i in 0..na {
            for j in 0..nb {
                for k in 0..na {
                    e += c[(i, j)].conj() * c[(k, j)] * self.eps_a[(i, k)];
                    for l in 0..nb {
                        e += c[(i, j)].conj() * c[(k, l)] * 0.5 * (self.coulomb(i, j, k, l) - self.exchange(i, j, k, l));
                    }
                }
            }
        }
        e.re
    }
}

/// Coulomb and exchange tables for orbitals `a` (fragment A) and `b`
/// (fragment B).
pub fn forster_dexter(tables: &IntegralTables, a: &[FragmentOrbital], b: &[FragmentOrbital]) -> CouplingReport {
    let h = tables.h();
    let el = |m: &DMatrix<f64>, x: &FragmentOrbital, y: &FragmentOrbital| (x.coeffs.transpose() * m * &y.coeffs)[(0, 0)];
    let mut max_overlap: f64 = 0.0;
    for x in a {
        for y in b {
            max_overlap = max_overlap.max(el(&tables.s, x, y).abs());
        }
    }
    if max_overlap > 0.1 {
        log::warn!("fragment overlap {max_overlap:.3e} exceeds 0.1; product states are not renormalized");
    } else {
        log::info!("largest fragment overlap {max_overlap:.3e}");
    }
    let mut j = Vec::with_capacity(a.len() * a.len() * b.len() * b.len());
    let mut k = Vec::with_capacity(j.capacity());
    for ai in a {
        for bj in b {
            for ak in a {
                for bl in b {
                    let (w, x, y, z) = (ai.coeffs.as_slice(), bj.coeffs.as_slice(), ak.coeffs.as_slice(), bl.coeffs.as_slice());
                    j.push(tables.eri.contract(w, x, y, z));
                    k.push(tables.eri.contract(w, x, z, y));
                }
            }
        }
    }
    CouplingReport {
        a: a.iter().map(|o| o.name.clone()).collect(),
        b: b.iter().map(|o| o.name.clone()).collect(),
        eps_a: DMatrix::from_fn(a.len(), a.len(), |i, k| el(&h, &a[i], &a[k])),
        eps_b: DMatrix::from_fn(b.len(), b.len(), |i, k| el(&h, &b[i], &b[k])),
        j,
        k,
        max_overlap,
    }
}

/// Transition dipole `⟨f|r|g⟩` from the three position-moment matrices.
pub fn transition_dipole(moments: &[DMatrix<f64>; 3], f: &FragmentOrbital, g: &FragmentOrbital) -> Vec3 {
    Vec3::from_fn(|ax, _| (f.coeffs.transpose() * &moments[ax] * &g.coeffs)[(0, 0)])
}

/// Point dipole–dipole interaction `(μ_A·μ_B − 3(μ_A·n)(μ_B·n)) / R³`.
pub fn dipole_dipole(mu_a: &Vec3, mu_b: &Vec3, r_ab: &Vec3) -> f64 {
    let r = r_ab.norm();
    let n = r_ab / r;
    (mu_a.dot(mu_b) - 3.0 * mu_a.dot(&n) * mu_b.dot(&n)) / (r * r * r)
}

/// `Σ c_ij ψ_ij` with `ψ_ij` the spin-orbital product `a_i↑ ∧ b_j↑`, each
/// term normalized before summing.
pub fn product_superposition(
    space: &DeterminantSpace,
    mos: &MoSet,
    s: &DMatrix<f64>,
    a: &[FragmentOrbital],
    b: &[FragmentOrbital],
    c: &DMatrix<Complex64>,
) -> Result<CiState> {
    if c.nrows() != a.len() || c.ncols() != b.len() {
        return Err(Error::Dynamics("amplitude table does not match the fragment orbitals".into()));
    }
    let mut v = DVector::<Complex64>::zeros(space.dim());
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            if c[(i, j)] == Complex64::new(0.0, 0.0) {
                continue;
            }
            let p = project_product_state(space, mos, s, &ai.coeffs, &bj.coeffs, SpinCoupling::SpinOrbitalProduct)?;
            v += p.state.c * c[(i, j)];
        }
    }
    CiState::new(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::geometry::{build_molecule, GeometrySpec};
    use crate::integrals::{compute_integrals, dipole_matrix};

    #[test]
    fn coulomb_dominates_exchange_and_approaches_dipole_limit() {
        let r = 20.0;
        let m = build_molecule(&GeometrySpec::h2(r)).unwrap();
        let basis = build_basis(&m, "sp").unwrap();
        let t = compute_integrals(&basis, &m).unwrap();
        let n = basis.len();
        let ao = |atom: usize, p: [u8; 3]| {
            let mut v = DVector::zeros(n);
            v[basis.find(atom, p).unwrap()] = 1.0;
            v
        };
        let a = vec![
            FragmentOrbital::new("1s", ao(0, [0, 0, 0]), &t.s),
            FragmentOrbital::new("2pz", ao(0, [0, 0, 1]), &t.s),
        ];
        let b = vec![
            FragmentOrbital::new("1s", ao(1, [0, 0, 0]), &t.s),
            FragmentOrbital::new("2pz", ao(1, [0, 0, 1]), &t.s),
        ];
        let rep = forster_dexter(&t, &a, &b);
        // transfer 2p_A 1s_B -> 1s_A 2p_B
        let j = rep.coulomb(1, 0, 0, 1);
        let k = rep.exchange(1, 0, 0, 1);
        assert!(k.abs() < 1e-10, "{k}");
        let origin = Vec3::zeros();
        let moments = [0, 1, 2].map(|ax| dipole_matrix(&basis, ax, &origin));
        let mu_a = transition_dipole(&moments, &a[1], &a[0]);
        let mu_b = transition_dipole(&moments, &b[0], &b[1]);
        let jd = dipole_dipole(&mu_a, &mu_b, &Vec3::new(0.0, 0.0, r));
        assert!(((j - jd) / jd).abs() < 0.05, "J {j} dipole {jd}");
        assert_eq!(rep.v_coul(1, 0, 0, 1), j + k);
        // symmetric eps tables
        assert!((rep.eps_a[(0, 1)] - rep.eps_a[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn dipole_formula() {
        let z = Vec3::z();
        assert!((dipole_dipole(&z, &z, &Vec3::new(0.0, 0.0, 2.0)) + 0.25).abs() < 1e-15);
        let x = Vec3::x();
        assert!((dipole_dipole(&x, &x, &Vec3::new(0.0, 0.0, 2.0)) - 0.125).abs() < 1e-15);
    }
}
