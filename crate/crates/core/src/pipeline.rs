//! End-to-end assembly: geometry → integrals → partition → orbitals and
//! configuration space → region operators, and the scenario runs built on
//! top (dynamics, dephasing, limit checks, the naive comparison).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::basis::{build_basis, BasisSet, Powers};
use crate::coupling::{dipole_dipole, forster_dexter, product_superposition, transition_dipole, CouplingReport, FragmentOrbital};
use crate::decoherence::{averaged_energy, ensemble_cosine, vibronic_site_terms, Averaged, DecoherenceParams, ElectronicPoint, Method, VibronicModel, VibronicTerms};
use crate::dynamics::{default_times, site_series, uniform_times, TimeSeries};
use crate::error::{Error, Result};
use crate::geometry::{build_molecule, GeometrySpec, Molecule, Vec3};
use crate::grid::{build_grid, GridLevel, GridMeta};
use crate::integrals::{compute_integrals, dipole_matrix, IntegralTables};
use crate::manybody::{
    build_space, hamiltonian, lowdin, project_product_state, rhf, singlet_eigenpairs, CiState, DeterminantSpace, Eigenpairs, MoKind, MoSet,
    ScfOptions, Scheme, SpinCoupling,
};
use crate::partition::{build_partition, plane_partition, Partition};
use crate::partitioned::{partition_integrals, PartitionedIntegrals};
use crate::subsystem::{expectation, naive_site_energy, population_operator, subsystem_hamiltonian, Flavor, NaiveReport, NuclearShare, SubsystemOperator};

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionChoice {
    /// Bisector plane for two regions, Voronoi cells otherwise.
    Auto,
    Plane { normal: Vec3, offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemOptions {
    pub basis: String,
    pub partition: PartitionChoice,
    pub grid: GridLevel,
    pub scheme: Scheme,
    /// Defaults to Löwdin orbitals for full CI and RHF orbitals for CIS.
    pub orbitals: Option<MoKind>,
    pub nuclear_share: NuclearShare,
    pub close_sum_rules: bool,
}

impl SystemOptions {
    pub fn new(basis: &str, scheme: Scheme) -> SystemOptions {
        SystemOptions {
            basis: basis.into(),
            partition: PartitionChoice::Auto,
            grid: GridLevel::Default,
            scheme,
            orbitals: None,
            nuclear_share: NuclearShare::Partitioned,
            close_sum_rules: true,
        }
    }

    pub fn with_grid(mut self, grid: GridLevel) -> SystemOptions {
        self.grid = grid;
        self
    }

    pub fn orbital_kind(&self) -> MoKind {
        self.orbitals.unwrap_or(match self.scheme {
            Scheme::FullCi2e => MoKind::Lowdin,
            Scheme::Cis => MoKind::Scf,
        })
    }
}

/// A fully assembled partitioned many-body system.
#[derive(Debug, Clone)]
pub struct System {
    pub molecule: Molecule,
    pub basis: BasisSet,
    pub tables: IntegralTables,
    pub partition: Partition,
    pub grid: GridMeta,
    pub grid_points: usize,
    /// Region tables in the AO basis.
    pub parts_ao: PartitionedIntegrals,
    /// Region tables in the orbital basis of `space`.
    pub parts: PartitionedIntegrals,
    pub mos: MoSet,
    pub space: DeterminantSpace,
    /// Full Hamiltonian including nuclear repulsion.
    pub hamiltonian: DMatrix<f64>,
    pub n_electrons: usize,
    pub options: SystemOptions,
}

fn electron_count(molecule: &Molecule) -> Result<usize> {
    let z = molecule.total_charge();
    if z.fract().abs() > 1e-12 || z < 1.0 {
        return Err(Error::Geometry(format!("total nuclear charge {z} does not give a neutral integer electron count")));
    }
    Ok(z as usize)
}

impl System {
    pub fn build(spec: &GeometrySpec, options: &SystemOptions) -> Result<System> {
        let molecule = build_molecule(spec)?;
        System::from_molecule(molecule, options)
    }

    pub fn from_molecule(molecule: Molecule, options: &SystemOptions) -> Result<System> {
        let n_electrons = electron_count(&molecule)?;
        let basis = build_basis(&molecule, &options.basis)?;
        let tables = compute_integrals(&basis, &molecule)?;
        let partition = match &options.partition {
            PartitionChoice::Auto => build_partition(&molecule)?,
            PartitionChoice::Plane { normal, offset } => plane_partition(&molecule, *normal, *offset)?,
        };
        let grid = build_grid(&molecule, &partition, options.grid);
        log::info!("{} grid points ({}), partition {}", grid.len(), grid.meta.level, partition.describe());
        let parts_ao = partition_integrals(&basis, &molecule, &partition, &grid, &tables, options.close_sum_rules)?;
        let vnn = molecule.nuclear_repulsion();
        let mos = match (options.scheme, options.orbital_kind()) {
            (Scheme::Cis, MoKind::Lowdin) => {
                return Err(Error::Config("the CIS scheme needs SCF orbitals for its reference determinant".into()));
            }
            (_, MoKind::Lowdin) => lowdin(&tables.s)?,
            (_, MoKind::Scf) => rhf(&tables, n_electrons, vnn, ScfOptions::default())?,
        };
        let space = build_space(options.scheme, mos.n(), n_electrons)?;
        let h_mo = mos.transform(&tables.h());
        let g_mo = mos.transform_eri(&tables.eri);
        let hamiltonian = hamiltonian(&space, &h_mo, &g_mo, vnn);
        let parts = parts_ao.transform(&mos.c);
        Ok(System {
            grid_points: grid.len(),
            grid: grid.meta,
            molecule,
            basis,
            tables,
            partition,
            parts_ao,
            parts,
            mos,
            space,
            hamiltonian,
            n_electrons,
            options: options.clone(),
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.parts.labels
    }

    pub fn tau(&self) -> f64 {
        self.parts.tau
    }

    pub fn site_constant(&self, region: usize) -> f64 {
        self.options.nuclear_share.site_constant(&self.molecule, region)
    }

    /// Subsystem Hamiltonians of every region, with the nuclear share.
    pub fn energy_operators(&self, flavor: Flavor) -> Result<Vec<SubsystemOperator>> {
        self.labels()
            .iter()
            .enumerate()
            .map(|(a, l)| subsystem_hamiltonian(&self.space, &self.parts, l, flavor, self.site_constant(a)))
            .collect()
    }

    pub fn population_operators(&self) -> Result<Vec<SubsystemOperator>> {
        self.labels().iter().map(|l| population_operator(&self.space, &self.parts, l)).collect()
    }

    pub fn eigenpairs(&self) -> Eigenpairs {
        Eigenpairs::of(&self.hamiltonian)
    }

    pub fn singlets(&self) -> Eigenpairs {
        singlet_eigenpairs(&self.space, &self.hamiltonian)
    }

    /// AO unit vector of the function with `powers` on the first nucleus of
    /// `region`.
    pub fn ao_vector(&self, region: usize, powers: Powers) -> Result<DVector<f64>> {
        let atom = *self
            .molecule
            .nuclei_in_region(region)
            .first()
            .ok_or_else(|| Error::Geometry(format!("region {region} has no nuclei")))?;
        let k = self.basis.find(atom, powers).ok_or_else(|| {
            Error::Config(format!(
                "basis `{}` has no function with powers {powers:?} on region {}",
                self.basis.name,
                self.labels()[region]
            ))
        })?;
        let mut v = DVector::zeros(self.basis.len());
        v[k] = 1.0;
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// 1s on the first region times 2p_z on the second.
    Product { spin: SpinCoupling },
    /// Weights over singlet eigenstates (ascending energy, 0 = ground).
    Superposition(Vec<(usize, Complex64)>),
}

impl InitialSpec {
    pub fn pair(i: usize, j: usize) -> InitialSpec {
        let w = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
        InitialSpec::Superposition(vec![(i, w), (j, w)])
    }
}

#[derive(Debug, Clone)]
pub struct Prepared {
    pub state: CiState,
    /// Norm fraction kept when projecting a product state into the space.
    pub retained: Option<f64>,
}

pub fn prepare_initial(system: &System, spec: &InitialSpec, singlets: &Eigenpairs) -> Result<Prepared> {
    match spec {
        InitialSpec::Product { spin } => {
            if system.labels().len() != 2 {
                return Err(Error::Config("product initial states need exactly two regions".into()));
            }
            let f = system.ao_vector(0, [0, 0, 0])?;
            let g = system.ao_vector(1, [0, 0, 1])?;
            let p = project_product_state(&system.space, &system.mos, &system.tables.s, &f, &g, *spin)?;
            Ok(Prepared {
                state: p.state,
                retained: Some(p.retained),
            })
        }
        InitialSpec::Superposition(w) => Ok(Prepared {
            state: singlets.superposition(w)?,
            retained: None,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    pub samples: usize,
    pub t_max: Option<f64>,
    pub periods: f64,
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec {
            samples: crate::dynamics::DEFAULT_SAMPLES,
            t_max: None,
            periods: crate::dynamics::DEFAULT_PERIODS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DynamicsRun {
    pub series: TimeSeries,
    pub initial: Prepared,
    pub eigen: Eigenpairs,
    pub singlets: Eigenpairs,
}

/// Exact propagation of the initial state with symmetrized site energies and
/// region populations on every sample.
pub fn run_dynamics(system: &System, initial: &InitialSpec, time: &TimeSpec) -> Result<DynamicsRun> {
    let singlets = system.singlets();
    let initial = prepare_initial(system, initial, &singlets)?;
    let eigen = system.eigenpairs();
    let times = match time.t_max {
        Some(t) => uniform_times(time.samples, t),
        None => default_times(&eigen, &initial.state, time.samples, time.periods),
    };
    let series = site_series(
        &initial.state,
        &eigen,
        &times,
        &system.energy_operators(Flavor::Symmetrized)?,
        &system.population_operators()?,
        &system.hamiltonian,
    )?;
    Ok(DynamicsRun {
        series,
        initial,
        eigen,
        singlets,
    })
}

/// Electronic data of H₂ at bond length `r`: the singlet states, their
/// energies and the symmetrized site operators.
pub fn h2_electronic(options: &SystemOptions, r: f64) -> Result<ElectronicPoint> {
    if options.orbital_kind() != MoKind::Lowdin {
        return Err(Error::Decoherence("state tracking along R needs the smooth Löwdin orbital basis".into()));
    }
    let system = System::build(&GeometrySpec::h2(r), options)?;
    let singlets = system.singlets();
    Ok(ElectronicPoint {
        energies: singlets.values,
        states: singlets.vectors,
        site: system.energy_operators(Flavor::Symmetrized)?.into_iter().map(|o| o.matrix).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct DecoherenceSpec {
    pub model: VibronicModel,
    pub sigma: f64,
    pub samples: usize,
    pub seed: u64,
    pub t_max: f64,
    pub n_times: usize,
}

#[derive(Debug, Clone)]
pub struct DecoherenceRun {
    pub terms: VibronicTerms,
    pub params: DecoherenceParams,
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `⟨cos ωt⟩`, analytic and sampled.
    pub cosine: Averaged,
    pub cosine_mc: Averaged,
    /// Ensemble-averaged site energies per region.
    pub analytic: Vec<Averaged>,
    pub monte_carlo: Vec<Averaged>,
    /// Undamped site energies (σ = 0).
    pub coherent: Vec<Averaged>,
}

impl DecoherenceRun {
    /// `max_t |MC − analytic|` of `⟨cos ωt⟩` and the largest standard error.
    pub fn mc_deviation(&self) -> (f64, f64) {
        let dev = self
            .cosine
            .values
            .iter()
            .zip(&self.cosine_mc.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let se = self.cosine_mc.std_error.iter().cloned().fold(0.0, f64::max);
        (dev, se)
    }
}

pub fn run_decoherence(options: &SystemOptions, spec: &DecoherenceSpec) -> Result<DecoherenceRun> {
    let terms = vibronic_site_terms(&spec.model, |r| h2_electronic(options, r))?;
    let times = uniform_times(spec.n_times, spec.t_max);
    let params = DecoherenceParams {
        omega_eg: terms.omega_eg,
        sigma: spec.sigma,
        samples: spec.samples,
        seed: spec.seed,
    };
    let cosine = ensemble_cosine(&params, &times, Method::Analytic)?;
    let cosine_mc = ensemble_cosine(&params, &times, Method::MonteCarlo)?;
    let undamped = ensemble_cosine(&DecoherenceParams { sigma: 0.0, ..params }, &times, Method::Analytic)?;
    let n_reg = terms.e_g.len();
    let per = |c: &Averaged| (0..n_reg).map(|a| averaged_energy(&terms, a, c)).collect::<Vec<_>>();
    Ok(DecoherenceRun {
        analytic: per(&cosine),
        monte_carlo: per(&cosine_mc),
        coherent: per(&undamped),
        labels: (0..n_reg).map(|a| ["A", "B"].get(a).map_or(format!("R{a}"), |s| s.to_string())).collect(),
        terms,
        params,
        times,
        cosine,
        cosine_mc,
    })
}

/// Orthonormalized functions of the first nucleus of a region.
pub fn fragment_orbitals(system: &System, region: usize) -> Result<Vec<FragmentOrbital>> {
    let atom = *system
        .molecule
        .nuclei_in_region(region)
        .first()
        .ok_or_else(|| Error::Geometry(format!("region {region} has no nuclei")))?;
    let idx = system.basis.functions_on_atom(atom);
    let s = &system.tables.s;
    let sub = DMatrix::from_fn(idx.len(), idx.len(), |i, j| s[(idx[i], idx[j])]);
    let c = lowdin(&sub)?.c;
    let mut names = Vec::new();
    let mut s_count = 0;
    for &k in &idx {
        let f = &system.basis.functions[k];
        names.push(match f.p_axis() {
            None => {
                s_count += 1;
                format!("s{s_count}")
            }
            Some(ax) => format!("p{}", ["x", "y", "z"][ax]),
        });
    }
    let n = system.basis.len();
    Ok((0..idx.len())
        .map(|col| {
            let mut v = DVector::zeros(n);
            for (r, &k) in idx.iter().enumerate() {
                v[k] = c[(r, col)];
            }
            FragmentOrbital::new(&names[col], v, s)
        })
        .collect())
}

/// `s ↔ p_z` excitation-transfer coupling against the point-dipole form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCoupling {
    pub j: f64,
    pub k: f64,
    pub dipole: f64,
}

/// Direct `⟨𝓗_A⟩` on a product superposition against the fragment formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCheck {
    pub direct: f64,
    pub formula: f64,
    /// `Σ|c_ij|² ε_A,ii` part of the formula.
    pub site: f64,
    /// `½Σ c*c (J − K)` part of the formula.
    pub interaction: f64,
}

impl SplitCheck {
    pub fn residual(&self) -> f64 {
        self.direct - self.formula
    }
}

#[derive(Debug, Clone)]
pub struct CouplingRun {
    pub report: CouplingReport,
    pub transfer: Option<TransferCoupling>,
    pub split: SplitCheck,
}

/// Couplings between two one-electron fragments and the site-energy split
/// check on `(ψ_{s,pz} + ψ_{pz,s})/√2` (or `ψ_{s,s}` without p functions).
pub fn run_couplings(system: &System) -> Result<CouplingRun> {
    if system.labels().len() != 2 || system.n_electrons != 2 || system.space.scheme != Scheme::FullCi2e {
        return Err(Error::Config("coupling analysis needs two regions, two electrons and the full CI scheme".into()));
    }
    let a = fragment_orbitals(system, 0)?;
    let b = fragment_orbitals(system, 1)?;
    let report = forster_dexter(&system.tables, &a, &b);
    let pz = |o: &[FragmentOrbital]| o.iter().position(|x| x.name == "pz");
    let s = |o: &[FragmentOrbital]| o.iter().position(|x| x.name == "s1").unwrap_or(0);
    let mut c = DMatrix::<Complex64>::zeros(a.len(), b.len());
    let transfer = match (pz(&a), pz(&b)) {
        (Some(pa), Some(pb)) => {
            let (sa, sb) = (s(&a), s(&b));
            let w = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
            c[(sa, pb)] = w;
            c[(pa, sb)] = w;
            let origin = Vec3::zeros();
            let moments = [0, 1, 2].map(|ax| dipole_matrix(&system.basis, ax, &origin));
            let mu_a = transition_dipole(&moments, &a[pa], &a[sa]);
            let mu_b = transition_dipole(&moments, &b[sb], &b[pb]);
            let r_ab = system.molecule.region_centroid(1) - system.molecule.region_centroid(0);
            Some(TransferCoupling {
                j: report.coulomb(pa, sb, sa, pb),
                k: report.exchange(pa, sb, sa, pb),
                dipole: dipole_dipole(&mu_a, &mu_b, &r_ab),
            })
        }
        _ => {
            c[(s(&a), s(&b))] = Complex64::from(1.0);
            None
        }
    };
    let state = product_superposition(&system.space, &system.mos, &system.tables.s, &a, &b, &c)?;
    let op = subsystem_hamiltonian(&system.space, &system.parts, &system.labels()[0], Flavor::Symmetrized, 0.0)?;
    let direct = expectation(&state, &op)?;
    let formula = report.site_energy_a(&c);
    let mut site = 0.0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            for k in 0..a.len() {
                site += (c[(i, j)].conj() * c[(k, j)]).re * report.eps_a[(i, k)];
            }
        }
    }
    Ok(CouplingRun {
        report,
        transfer,
        split: SplitCheck {
            direct,
            formula,
            site,
            interaction: formula - site,
        },
    })
}

/// One separation of the closed-shell fragment decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitRow {
    pub separation: f64,
    pub e_a: f64,
    pub e_b: f64,
    /// Isolated-fragment energy of A, `T_A + V_AA`.
    pub isolated_a: f64,
    /// `E_A − (T_A + V_AA)`.
    pub half_v_ab: f64,
    pub tau: f64,
}

/// Isolated-fragment RHF energy of `region` (nuclear repulsion included).
pub fn isolated_fragment_energy(molecule: &Molecule, region: usize, basis: &str) -> Result<f64> {
    let frag = molecule.fragment(region);
    let n = electron_count(&frag)?;
    let b = build_basis(&frag, basis)?;
    let t = compute_integrals(&b, &frag)?;
    if n == 1 {
        let (e, _) = crate::manybody::eigensolve(&lowdin(&t.s)?.transform(&t.h()));
        return Ok(e[0] + frag.nuclear_repulsion());
    }
    rhf(&t, n, frag.nuclear_repulsion(), ScfOptions::default())?
        .total_energy
        .ok_or_else(|| Error::ManyBody("RHF returned no energy".into()))
}

/// Ground-state site energies of a closed-shell dimer against the isolated
/// fragment, for each separation `d` of `geometry(d)`.
pub fn multi_electron_limit_check(
    geometry: impl Fn(f64) -> Result<GeometrySpec>,
    separations: &[f64],
    options: &SystemOptions,
) -> Result<Vec<LimitRow>> {
    separations
        .iter()
        .map(|&d| {
            let system = System::build(&geometry(d)?, options)?;
            limit_row(&system, d)
        })
        .collect()
}

/// Ground-state decomposition of an assembled two-region system.
pub fn limit_row(system: &System, separation: f64) -> Result<LimitRow> {
    let ground = system.singlets().state(0);
    let ops = system.energy_operators(Flavor::Symmetrized)?;
    let e_a = expectation(&ground, &ops[0])?;
    let e_b = expectation(&ground, &ops[1])?;
    let isolated_a = isolated_fragment_energy(&system.molecule, 0, &system.options.basis)?;
    Ok(LimitRow {
        separation,
        e_a,
        e_b,
        isolated_a,
        half_v_ab: e_a - isolated_a,
        tau: system.tau(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveRun {
    pub report: NaiveReport,
    /// `⟨𝓗_A⟩`, `⟨𝓗_B⟩` and `⟨H⟩` on the same two-electron state.
    pub e_a: f64,
    pub e_b: f64,
    pub total: f64,
}

/// Electron-labeled site energies of `1s_A 1s_B` next to the subsystem
/// Hamiltonian expectations on the same state.
pub fn run_naive(system: &System) -> Result<NaiveRun> {
    if system.labels().len() != 2 || system.n_electrons != 2 {
        return Err(Error::Config("the naive comparison needs two regions and two electrons".into()));
    }
    let (na, nb) = (system.molecule.nuclei_in_region(0)[0], system.molecule.nuclei_in_region(1)[0]);
    let a = system.ao_vector(0, [0, 0, 0])?;
    let b = system.ao_vector(1, [0, 0, 0])?;
    let report = naive_site_energy(&system.tables, &system.molecule, &a, &b, na, nb);
    let p = project_product_state(&system.space, &system.mos, &system.tables.s, &a, &b, SpinCoupling::SpinOrbitalProduct)?;
    let ops = system.energy_operators(Flavor::Symmetrized)?;
    let total = crate::subsystem::expectation_complex(&p.state, &system.hamiltonian).re;
    Ok(NaiveRun {
        report,
        e_a: expectation(&p.state, &ops[0])?,
        e_b: expectation(&p.state, &ops[1])?,
        total,
    })
}
