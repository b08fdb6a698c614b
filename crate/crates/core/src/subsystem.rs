//! Region operators in the configuration basis: the subsystem Hamiltonian
//! (raw and transpose-symmetrized), the region population, and the naive
//! electron-labeled site energies kept for comparison.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Molecule;
use crate::integrals::IntegralTables;
use crate::manybody::{operator_matrix, CiState, DeterminantSpace, Kernel};
use crate::partitioned::PartitionedIntegrals;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    /// Raw `h_A` as one-body kernel; real only on real states.
    Stationary,
    /// `½(h_A + h_Aᵀ)` as one-body kernel.
    Symmetrized,
    /// `S_A` as one-body kernel, no two-body part.
    Population,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Stationary => "stationary",
            Flavor::Symmetrized => "symmetrized",
            Flavor::Population => "population",
        }
    }
}

/// How the nuclear repulsion enters site energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuclearShare {
    /// Pairs inside the region count fully, straddling pairs one half.
    Partitioned,
    /// Site energies are purely electronic.
    Excluded,
}

impl NuclearShare {
    pub fn name(self) -> &'static str {
        match self {
            NuclearShare::Partitioned => "partitioned",
            NuclearShare::Excluded => "excluded",
        }
    }

    pub fn parse(s: &str) -> Result<NuclearShare> {
        match s {
            "partitioned" => Ok(NuclearShare::Partitioned),
            "excluded" => Ok(NuclearShare::Excluded),
            _ => Err(Error::Config(format!("unknown nuclear repulsion share `{s}` (expected partitioned or excluded)"))),
        }
    }

    pub fn site_constant(self, molecule: &Molecule, region: usize) -> f64 {
        match self {
            NuclearShare::Partitioned => molecule.nuclear_repulsion_share(region),
            NuclearShare::Excluded => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SubsystemOperator {
    pub region: String,
    pub flavor: Flavor,
    pub matrix: DMatrix<f64>,
}

/// Subsystem Hamiltonian of region `label`. `parts` must already be in the
/// orthonormal orbital basis of `space`; `constant` is added on the diagonal.
pub fn subsystem_hamiltonian(
    space: &DeterminantSpace,
    parts: &PartitionedIntegrals,
    label: &str,
    flavor: Flavor,
    constant: f64,
) -> Result<SubsystemOperator> {
    let a = parts.region(label)?;
    check_dims(space, parts)?;
    let h_raw = parts.h(a);
    let h = match flavor {
        Flavor::Stationary => h_raw,
        Flavor::Symmetrized => (&h_raw + h_raw.transpose()) * 0.5,
        Flavor::Population => return population_operator(space, parts, label),
    };
    let g = parts.g_total(a);
    let matrix = operator_matrix(space, &Kernel { h: &h, g: Some(&g), constant });
    Ok(SubsystemOperator {
        region: label.to_string(),
        flavor,
        matrix,
    })
}

/// Region electron count operator with one-body kernel `S_A`.
pub fn population_operator(space: &DeterminantSpace, parts: &PartitionedIntegrals, label: &str) -> Result<SubsystemOperator> {
    let a = parts.region(label)?;
    check_dims(space, parts)?;
    let matrix = operator_matrix(
        space,
        &Kernel {
            h: &parts.s[a],
            g: None,
            constant: 0.0,
        },
    );
    Ok(SubsystemOperator {
        region: label.to_string(),
        flavor: Flavor::Population,
        matrix: (&matrix + matrix.transpose()) * 0.5,
    })
}

fn check_dims(space: &DeterminantSpace, parts: &PartitionedIntegrals) -> Result<()> {
    if parts.n() != space.n_orbitals {
        return Err(Error::Operator(format!(
            "partitioned tables have {} orbitals, space has {}",
            parts.n(),
            space.n_orbitals
        )));
    }
    Ok(())
}

/// `c† M c` without the reality check.
pub fn expectation_complex(state: &CiState, m: &DMatrix<f64>) -> Complex64 {
    let mc: DVector<Complex64> = m.map(Complex64::from) * &state.c;
    state.c.dotc(&mc)
}

/// `Re(c† M c)`. For symmetrized and population operators a non-negligible
/// imaginary part means the operator was built wrong and is an error.
pub fn expectation(state: &CiState, op: &SubsystemOperator) -> Result<f64> {
    if state.dim() != op.matrix.nrows() {
        return Err(Error::Operator(format!(
            "state dimension {} does not match operator dimension {}",
            state.dim(),
            op.matrix.nrows()
        )));
    }
    let z = expectation_complex(state, &op.matrix);
    if op.flavor != Flavor::Stationary {
        let tol = 1e-12 * op.matrix.norm().max(1.0);
        if z.im.abs() > tol {
            return Err(Error::Operator(format!(
                "{} expectation of region {} has imaginary part {:.3e}",
                op.flavor.name(),
                op.region,
                z.im
            )));
        }
    }
    Ok(z.re)
}

/// Electron-labeled site energies of `(a(1)b(2) − b(1)a(2))/√2` for one
/// electron per fragment, with `H_A1 = T + V_A`, `H_B2 = T + V_B` and
/// `V_12 = 1/R + 1/r12 − 1/r_A2 − 1/r_B1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveReport {
    pub e_a: f64,
    pub e_b: f64,
    pub v_ab: f64,
    pub total: f64,
    /// `⟨a|T|a⟩`, `⟨b|T|b⟩`, `⟨a|V_A|a⟩`, `⟨b|V_B|b⟩`.
    pub t_a: f64,
    pub t_b: f64,
    pub v_a: f64,
    pub v_b: f64,
    pub overlap: f64,
}

impl NaiveReport {
    /// Large-separation limits `½(T_A + T_B + V_A)`, `½(T_A + T_B + V_B)`,
    /// `½(V_A + V_B)`.
    pub fn limits(&self) -> (f64, f64, f64) {
        let t = 0.5 * (self.t_a + self.t_b);
        (t + 0.5 * self.v_a, t + 0.5 * self.v_b, 0.5 * (self.v_a + self.v_b))
    }
}

/// Naive site energies for AO-expanded fragment functions `a` (on nucleus
/// `na`) and `b` (on nucleus `nb`).
pub fn naive_site_energy(
    tables: &IntegralTables,
    molecule: &Molecule,
    a: &DVector<f64>,
    b: &DVector<f64>,
    na: usize,
    nb: usize,
) -> NaiveReport {
    let na_ = (a.transpose() * &tables.s * a)[(0, 0)].sqrt();
    let nb_ = (b.transpose() * &tables.s * b)[(0, 0)].sqrt();
    let (a, b) = (a / na_, b / nb_);
    let el = |m: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>| (x.transpose() * m * y)[(0, 0)];
    let s = el(&tables.s, &a, &b);
    if s.abs() > 1e-6 {
        log::warn!("naive site energies at fragment overlap {s:.3e}; the separated-limit formulas do not apply");
    }
    let norm = 2.0 * (1.0 - s * s);
    // ⟨Ψ|O(1)|Ψ⟩ for a one-electron operator
    let one = |m: &DMatrix<f64>| (el(m, &a, &a) + el(m, &b, &b) - 2.0 * s * el(m, &a, &b)) / norm;
    let (va_m, vb_m) = (&tables.v_nuclear[na], &tables.v_nuclear[nb]);
    let t_op = one(&tables.t);
    let e_a = t_op + one(va_m);
    let e_b = t_op + one(vb_m);
    let nuc = molecule.nuclei();
    let r = (nuc[na].position - nuc[nb].position).norm();
    let (av, bv) = (a.as_slice(), b.as_slice());
    let coulomb = tables.eri.contract(av, bv, av, bv);
    let exchange = tables.eri.contract(av, bv, bv, av);
    let g = 2.0 * (coulomb - exchange) / norm;
    let v_ab = nuc[na].charge * nuc[nb].charge / r + g + one(vb_m) + one(va_m);
    NaiveReport {
        e_a,
        e_b,
        v_ab,
        total: e_a + e_b + v_ab,
        t_a: el(&tables.t, &a, &a),
        t_b: el(&tables.t, &b, &b),
        v_a: el(va_m, &a, &a),
        v_b: el(vb_m, &b, &b),
        overlap: s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::geometry::{build_molecule, GeometrySpec};
    use crate::grid::{build_grid, GridLevel};
    use crate::integrals::compute_integrals;
    use crate::manybody::{build_space, hamiltonian, lowdin, Eigenpairs, MoSet, Scheme};
    use crate::partition::build_partition;
    use crate::partitioned::partition_integrals;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Setup {
        molecule: Molecule,
        tables: IntegralTables,
        mos: MoSet,
        space: DeterminantSpace,
        parts: PartitionedIntegrals,
        h: DMatrix<f64>,
    }

    fn setup(spec: GeometrySpec, basis: &str, level: GridLevel, close: bool) -> Setup {
        let molecule = build_molecule(&spec).unwrap();
        let b = build_basis(&molecule, basis).unwrap();
        let tables = compute_integrals(&b, &molecule).unwrap();
        let part = build_partition(&molecule).unwrap();
        let grid = build_grid(&molecule, &part, level);
        let parts = partition_integrals(&b, &molecule, &part, &grid, &tables, close).unwrap();
        let mos = lowdin(&tables.s).unwrap();
        let parts = parts.transform(&mos.c);
        let space = build_space(Scheme::FullCi2e, b.len(), 2).unwrap();
        let h = hamiltonian(&space, &mos.transform(&tables.h()), &mos.transform_eri(&tables.eri), 0.0);
        Setup {
            molecule,
            tables,
            mos,
            space,
            parts,
            h,
        }
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> CiState {
        CiState::new(DVector::from_fn(n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))).unwrap()
    }

    #[test]
    fn one_region_equals_electronic_hamiltonian() {
        let s = setup(GeometrySpec::hydrogens(&[[0.0; 3], [0.0, 0.0, 1.4]], &["A", "A"]), "min-s", GridLevel::Default, false);
        for flavor in [Flavor::Stationary, Flavor::Symmetrized] {
            let op = subsystem_hamiltonian(&s.space, &s.parts, "A", flavor, 0.0).unwrap();
            assert!((&op.matrix - &s.h).amax() < 1e-6);
        }
        let e = Eigenpairs::of(&s.h);
        let op = subsystem_hamiltonian(&s.space, &s.parts, "A", Flavor::Symmetrized, 0.0).unwrap();
        assert!((expectation(&e.state(0), &op).unwrap() - e.values[0]).abs() < 1e-6);
        let _ = (&s.molecule, &s.tables, &s.mos);
    }

    #[test]
    fn symmetric_h2_ground_state_splits_evenly() {
        let s = setup(GeometrySpec::h2(1.4), "min-s", GridLevel::Default, false);
        let e = Eigenpairs::of(&s.h);
        let g = e.state(0);
        let ea = expectation(&g, &subsystem_hamiltonian(&s.space, &s.parts, "A", Flavor::Symmetrized, 0.0).unwrap()).unwrap();
        let eb = expectation(&g, &subsystem_hamiltonian(&s.space, &s.parts, "B", Flavor::Symmetrized, 0.0).unwrap()).unwrap();
        assert!((ea - eb).abs() < 1e-10);
        assert!((ea - 0.5 * e.values[0]).abs() < 1e-6);
        let na = expectation(&g, &population_operator(&s.space, &s.parts, "A").unwrap()).unwrap();
        assert!((na - 1.0).abs() < 1e-6);
        let stat = expectation(&g, &subsystem_hamiltonian(&s.space, &s.parts, "A", Flavor::Stationary, 0.0).unwrap()).unwrap();
        assert!((stat - ea).abs() < 1e-12);
    }

    #[test]
    fn reality_of_symmetrized_flavor_only() {
        let s = setup(GeometrySpec::h2(1.4), "sp", GridLevel::Coarse, false);
        let sym = subsystem_hamiltonian(&s.space, &s.parts, "A", Flavor::Symmetrized, 0.0).unwrap();
        let raw = subsystem_hamiltonian(&s.space, &s.parts, "A", Flavor::Stationary, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut max_raw: f64 = 0.0;
        for _ in 0..20 {
            let c = random_state(s.space.dim(), &mut rng);
            assert!(expectation_complex(&c, &sym.matrix).im.abs() < 1e-12);
            max_raw = max_raw.max(expectation_complex(&c, &raw.matrix).im.abs());
        }
        assert!(max_raw > 1e-6, "{max_raw}");
    }

    #[test]
    fn completeness_and_population_range() {
        let s = setup(GeometrySpec::h2(1.4), "sp", GridLevel::Coarse, true);
        let a = subsystem_hamiltonian(&s.space, &s.parts, "A", Flavor::Symmetrized, 0.0).unwrap();
        let b = subsystem_hamiltonian(&s.space, &s.parts, "B", Flavor::Symmetrized, 0.0).unwrap();
        assert!((&a.matrix + &b.matrix - &s.h).amax() < 1e-12);
        let pa = population_operator(&s.space, &s.parts, "A").unwrap();
        let pb = population_operator(&s.space, &s.parts, "B").unwrap();
        let n = s.space.dim();
        assert!((&pa.matrix + &pb.matrix - DMatrix::identity(n, n) * 2.0).amax() < 1e-12);
        let (ev, _) = crate::manybody::eigensolve(&pa.matrix);
        assert!(ev.min() > -1e-9 && ev.max() < 2.0 + 1e-9);
        assert!(subsystem_hamiltonian(&s.space, &s.parts, "C", Flavor::Symmetrized, 0.0).is_err());
    }

    #[test]
    fn ionic_state_population_at_large_separation() {
        let s = setup(GeometrySpec::h2(20.0), "min-s", GridLevel::Coarse, false);
        let f = DVector::from_vec(vec![1.0, 0.0]);
        let p = crate::manybody::project_product_state(&s.space, &s.mos, &s.tables.s, &f, &f, crate::manybody::SpinCoupling::Singlet).unwrap();
        let na = expectation(&p.state, &population_operator(&s.space, &s.parts, "A").unwrap()).unwrap();
        let nb = expectation(&p.state, &population_operator(&s.space, &s.parts, "B").unwrap()).unwrap();
        assert!((na - 2.0).abs() < 1e-3 && nb.abs() < 1e-3);
    }

    #[test]
    fn naive_energies_add_up() {
        let m = build_molecule(&GeometrySpec::h2(20.0)).unwrap();
        let b = build_basis(&m, "min-s").unwrap();
        let t = compute_integrals(&b, &m).unwrap();
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let bb = DVector::from_vec(vec![0.0, 1.0]);
        let r = naive_site_energy(&t, &m, &a, &bb, 0, 1);
        assert!(r.overlap.abs() < 1e-6);
        let isolated = r.t_a + r.v_a + r.t_b + r.v_b;
        assert!((r.total - isolated).abs() < 1e-10);
        assert!((r.e_a - r.e_b).abs() < 1e-12);
        // E_A^S differs from its limit form by half the attraction of b to A.
        let (la, _, _) = r.limits();
        let vab = t.v_nuclear[0][(1, 1)];
        assert!((r.e_a - la - 0.5 * vab).abs() < 1e-10);
    }
}
