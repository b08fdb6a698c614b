//! Acceptance criteria 1-9. Each test writes one `CRITERION n: PASS|FAIL`
//! line straight to stdout (bypassing the harness capture) and then asserts.

use std::io::Write;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use locapart_core::dynamics::pearson;
use locapart_core::geometry::{build_molecule, GeometrySpec};
use locapart_core::grid::GridLevel;
use locapart_core::integrals::Tensor4;
use locapart_core::manybody::{
    determinant_matrix, project_product_state, rhf, Determinant, Kernel, MoKind, ScfOptions, Scheme, SpinCoupling,
};
use locapart_core::pipeline::{
    isolated_fragment_energy, limit_row, run_couplings, run_decoherence, run_dynamics, run_naive, DecoherenceSpec, System,
    SystemOptions,
};
use locapart_core::scenario::{builtin_presets, DecoherenceConfig, Mode};
use locapart_core::subsystem::{expectation, expectation_complex, subsystem_hamiltonian, Flavor};

fn report(n: usize, pass: bool, detail: &str) {
    let line = format!("CRITERION {n}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    out.write_all(line.as_bytes()).unwrap();
    out.flush().unwrap();
}

fn h2(r: f64, basis: &str, grid: GridLevel) -> System {
    System::build(&GeometrySpec::h2(r), &SystemOptions::new(basis, Scheme::FullCi2e).with_grid(grid)).unwrap()
}

#[test]
fn criterion_1_completeness_sum_rules() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    for (level, tol) in [(GridLevel::Coarse, 1e-3), (GridLevel::Fine, 1e-6)] {
        for basis in ["min-s", "sp"] {
            let s = h2(1.4, basis, level);
            let raw = &s.parts_ao.raw;
            let worst = raw.s.relative.max(raw.h.relative).max(raw.g.relative);
            pass &= worst <= tol;
            detail.push(format!(
                "{basis}/{}: S {:.1e} h {:.1e} g {:.1e} (tol {tol:.0e})",
                level.name(),
                raw.s.relative,
                raw.h.relative,
                raw.g.relative
            ));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 300.0;
    detail.push(format!("{secs:.1} s"));
    report(1, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_2_reality_principle() {
    let s = h2(1.4, "sp", GridLevel::Coarse);
    let sym = subsystem_hamiltonian(&s.space, &s.parts, "A", Flavor::Symmetrized, 0.0).unwrap();
    let raw = subsystem_hamiltonian(&s.space, &s.parts, "A", Flavor::Stationary, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_sym, mut best_raw) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let c = DVector::from_fn(s.space.dim(), |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let state = locapart_core::manybody::CiState::new(c).unwrap();
        worst_sym = worst_sym.max(expectation_complex(&state, &sym.matrix).im.abs());
        best_raw = best_raw.max(expectation_complex(&state, &raw.matrix).im.abs());
    }
    let pass = worst_sym <= 1e-12 && best_raw >= 1e-6;
    report(
        2,
        pass,
        &format!("max |Im| symmetrized {worst_sym:.1e} (<= 1e-12); max |Im| stationary {best_raw:.1e} (>= 1e-6)"),
    );
    assert!(pass);
}

#[test]
fn criterion_3_isolated_fragment_limit() {
    let mut pass = true;
    let mut detail = Vec::new();
    for basis in ["min-s", "sp"] {
        let s = h2(20.0, basis, GridLevel::Default);
        let a = s.ao_vector(0, [0, 0, 0]).unwrap();
        let b = s.ao_vector(1, [0, 0, 0]).unwrap();
        let p = project_product_state(&s.space, &s.mos, &s.tables.s, &a, &b, SpinCoupling::Singlet).unwrap();
        let ops = s.energy_operators(Flavor::Symmetrized).unwrap();
        let e_a = expectation(&p.state, &ops[0]).unwrap();
        let atom = isolated_fragment_energy(&s.molecule, 0, basis).unwrap();
        let tol = s.tau().max(1e-4);
        let d = (e_a - atom).abs();
        pass &= d <= tol;
        detail.push(format!("H+H {basis}: E_A {e_a:.8} atom {atom:.8} |diff| {d:.1e} (tol {tol:.0e})"));
    }
    let opts = SystemOptions::new("6-31g", Scheme::Cis);
    let s = System::build(&GeometrySpec::h2_dimer_collinear(1.4, 20.0), &opts).unwrap();
    let row = limit_row(&s, 20.0).unwrap();
    let tol = s.tau().max(1e-4);
    let d = row.half_v_ab.abs();
    pass &= d <= tol;
    detail.push(format!(
        "H2+H2 6-31G: E_A {:.8} isolated {:.8} |diff| {d:.1e} (tol {tol:.0e})",
        row.e_a, row.isolated_a
    ));
    report(3, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_4_naive_partition_pathology() {
    let s = h2(20.0, "min-s", GridLevel::Default);
    let n = run_naive(&s).unwrap();
    let (limit_a, _, _) = n.report.limits();
    let d_limit = (n.report.e_a - limit_a).abs();
    let d_total = (n.report.total - (n.e_a + n.e_b)).abs();
    let pass = d_limit <= 1e-4 && d_total <= 1e-10;
    report(
        4,
        pass,
        &format!(
            "E_A^S {:.8} vs (T_A+T_B+V_A)/2 {limit_a:.8}: |diff| {d_limit:.2e} (tol 1e-4); E^S {:.12} vs E_A+E_B {:.12}: |diff| {d_total:.1e} (tol 1e-10)",
            n.report.e_a,
            n.report.total,
            n.e_a + n.e_b
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_forster_dexter_limit() {
    let near_system = h2(20.0, "sp", GridLevel::Default);
    let near = run_couplings(&near_system).unwrap();
    let t = near.transfer.unwrap();
    let k_ok = t.k.abs() <= 1e-10;
    let j_dev = ((t.j - t.dipole) / t.dipole).abs();
    let mut pass = k_ok && j_dev <= 0.05;
    let mut detail = vec![format!(
        "R=20: K {:.1e} (<= 1e-10), J {:.6e} vs dipole {:.6e} ({:.3}%, <= 5%)",
        t.k,
        t.j,
        t.dipole,
        100.0 * j_dev
    )];
    for (r, run, tau) in [(20.0, near, near_system.tau()), {
        let s = h2(40.0, "sp", GridLevel::Default);
        let tau = s.tau();
        (40.0, run_couplings(&s).unwrap(), tau)
    }] {
        let tol = tau.max(1e-5);
        let split = run.split.residual().abs();
        pass &= split <= tol;
        detail.push(format!(
            "R={r} split: direct {:.10} formula {:.10} (interaction {:.3e}) |diff| {split:.1e} (tol {tol:.0e})",
            run.split.direct, run.split.formula, run.split.interaction
        ));
    }
    report(5, pass, &detail.join("; "));
    assert!(pass);
}

#[test]
fn criterion_6_dynamics_sum_rules() {
    let start = Instant::now();
    let mut pass = true;
    let mut detail = Vec::new();
    let (mut worst_drift, mut worst_pop, mut worst_corr) = (0.0f64, 0.0f64, 1.0f64);
    let mut dimer: Vec<(String, f64, f64)> = Vec::new();
    for p in builtin_presets().into_iter().filter(|p| p.config.mode == Mode::Dynamics) {
        let c = &p.config;
        let system = System::build(&c.geometry.to_spec().unwrap(), &c.system_options().unwrap()).unwrap();
        let run = run_dynamics(&system, &c.initial_spec().unwrap(), &c.time_spec().unwrap()).unwrap();
        let ts = &run.series;
        let drift = ts.energy_sum_drift();
        let pop = ts.population_sum_error(system.n_electrons as f64);
        worst_drift = worst_drift.max(drift);
        worst_pop = worst_pop.max(pop);
        pass &= drift <= 1e-10 && pop <= system.tau();
        if system.molecule.nuclei().len() == 2 {
            let r = pearson(&ts.energies[0].values, &ts.populations[0].values).unwrap_or(f64::NAN);
            worst_corr = worst_corr.min(r);
            pass &= r >= 0.99;
            detail.push(format!("{} corr {r:.4}", p.name));
        }
        if p.name.starts_with("h2_dimer_gs_plus_e1") {
            dimer.push((p.name.clone(), ts.populations[0].amplitude(), ts.energies[0].amplitude()));
        }
    }
    let at = |suffix: &str| dimer.iter().find(|d| d.0.ends_with(suffix)).unwrap();
    let (d2, d10) = (at("_a"), at("_d"));
    let pop_ratio = d10.1 / d2.1;
    let e_ratio = d10.2 / d2.2;
    pass &= pop_ratio <= 0.01 && e_ratio >= 0.10;
    let secs = start.elapsed().as_secs_f64();
    pass &= secs <= 600.0;
    report(
        6,
        pass,
        &format!(
            "max drift {worst_drift:.1e} (<= 1e-10); max |sum N - N| {worst_pop:.1e} (<= tau); min corr(E_A,N_A) {worst_corr:.4} (>= 0.99) [{}]; H2-H2 10/2 a.u. population amplitude ratio {pop_ratio:.2e} (<= 1e-2), energy ratio {e_ratio:.3} (>= 0.10); {secs:.0} s",
            detail.join(", ")
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_decoherence() {
    let start = Instant::now();
    let cfg = DecoherenceConfig::default();
    let spec = DecoherenceSpec {
        model: cfg.model().unwrap(),
        sigma: cfg.sigma,
        samples: cfg.samples,
        seed: cfg.seed,
        t_max: cfg.t_max,
        n_times: 4096,
    };
    let run = run_decoherence(&SystemOptions::new("min-s", Scheme::FullCi2e), &spec).unwrap();
    let (dev, se) = run.mc_deviation();
    let delta = run.terms.delta[0];
    let mean = run.terms.mean(0);
    let late = |v: &[f64]| {
        run.times
            .iter()
            .zip(v)
            .filter(|(t, _)| **t >= 4e6)
            .map(|(_, e)| (e - mean).abs())
            .fold(0.0, f64::max)
            / delta.abs()
    };
    let (late_a, late_mc) = (late(&run.analytic[0].values), late(&run.monte_carlo[0].values));
    let secs = start.elapsed().as_secs_f64();
    let pass = dev <= 3.0 * se && late_a <= 0.05 && late_mc <= 0.05 && secs <= 60.0;
    report(
        7,
        pass,
        &format!(
            "max |MC - analytic| {dev:.2e} vs 3 SE {:.2e}; residual amplitude for t >= 4e6: analytic {late_a:.1e}, MC {late_mc:.1e} (<= 0.05); Delta_A {delta:.4e}; {secs:.1} s",
            3.0 * se
        ),
    );
    assert!(pass);
}

/// Spin-orbital integrals of a spatial kernel.
fn so_one(h: &DMatrix<f64>, p: usize, q: usize) -> f64 {
    if p % 2 != q % 2 {
        0.0
    } else {
        h[(p / 2, q / 2)]
    }
}

fn so_two(g: &Tensor4, p: usize, q: usize, r: usize, s: usize) -> f64 {
    if p % 2 != r % 2 || q % 2 != s % 2 {
        0.0
    } else {
        g.get(p / 2, q / 2, r / 2, s / 2)
    }
}

/// `⟨Φ_bra|Σ_i h(i) + ½Σ_{i≠j} g(i,j) + c|Φ_ket⟩` by expanding both
/// two-electron determinants over all electron permutations.
fn brute_force(bra: &[usize], ket: &[usize], h: &DMatrix<f64>, g: &Tensor4, c: f64) -> f64 {
    let perms: [([usize; 2], f64); 2] = [([0, 1], 1.0), ([1, 0], -1.0)];
    let mut e = 0.0;
    for (pb, sb) in perms {
        for (pk, sk) in perms {
            let (a, b) = (bra[pb[0]], bra[pb[1]]);
            let (x, y) = (ket[pk[0]], ket[pk[1]]);
            let delta = |u: usize, v: usize| if u == v { 1.0 } else { 0.0 };
            let one = so_one(h, a, x) * delta(b, y) + delta(a, x) * so_one(h, b, y);
            let two = 0.5 * (so_two(g, a, b, x, y) + so_two(g, b, a, y, x));
            let ov = delta(a, x) * delta(b, y);
            e += 0.5 * sb * sk * (one + two + c * ov);
        }
    }
    e
}

#[test]
fn criterion_8_oracle_equivalence() {
    let s = h2(1.4, "sp", GridLevel::Coarse);
    let n = s.mos.n();
    let h = s.mos.transform(&s.tables.h());
    let g = s.mos.transform_eri(&s.tables.eri);
    let vnn = s.molecule.nuclear_repulsion();
    let a = s.parts.region("A").unwrap();
    let h_a = s.parts.h(a);
    let g_a = s.parts.g_total(a);
    let full = determinant_matrix(&s.space, &Kernel { h: &h, g: Some(&g), constant: vnn });
    let sub = determinant_matrix(&s.space, &Kernel { h: &h_a, g: Some(&g_a), constant: 0.3 });
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dets: Vec<Determinant> = s.space.determinants.clone();
    let mut worst = 0.0f64;
    let mut kinds = [0usize; 3];
    for k in 0..50 {
        let i = rng.random_range(0..dets.len());
        // mix in pairs sharing an orbital so single excitations are covered
        let j = if k % 2 == 0 {
            rng.random_range(0..dets.len())
        } else {
            let occ = dets[i].occupied();
            let candidates: Vec<usize> = (0..dets.len()).filter(|&j| dets[j].occupied().iter().any(|o| occ.contains(o))).collect();
            candidates[rng.random_range(0..candidates.len())]
        };
        let (bo, ko) = (dets[i].occupied(), dets[j].occupied());
        let common = bo.iter().filter(|o| ko.contains(o)).count();
        kinds[common] += 1;
        let e_h = brute_force(&bo, &ko, &h, &g, vnn);
        let e_a = brute_force(&bo, &ko, &h_a, &g_a, 0.3);
        worst = worst.max((e_h - full[(i, j)]).abs()).max((e_a - sub[(i, j)]).abs());
    }
    let pass = worst <= 1e-12;
    report(
        8,
        pass,
        &format!(
            "50 determinant pairs of {} ({} spatial orbitals; {} double, {} single, {} diagonal-type): max |SC - brute force| {worst:.1e} (<= 1e-12)",
            dets.len(),
            n,
            kinds[0],
            kinds[1],
            kinds[2]
        ),
    );
    assert!(pass);
}

/// Closed-form s-type Gaussian integrals for the reference RHF.
mod reference {
    use std::f64::consts::PI;

    pub struct Prim {
        pub alpha: f64,
        pub coef: f64,
        pub center: f64,
    }

    fn f0(t: f64) -> f64 {
        if t < 1e-12 {
            1.0 - t / 3.0
        } else {
            0.5 * (PI / t).sqrt() * libm::erf(t.sqrt())
        }
    }

    fn s(a: &Prim, b: &Prim) -> f64 {
        let p = a.alpha + b.alpha;
        (PI / p).powf(1.5) * (-a.alpha * b.alpha / p * (a.center - b.center).powi(2)).exp()
    }

    fn t(a: &Prim, b: &Prim) -> f64 {
        let p = a.alpha + b.alpha;
        let mu = a.alpha * b.alpha / p;
        let r2 = (a.center - b.center).powi(2);
        mu * (3.0 - 2.0 * mu * r2) * s(a, b)
    }

    fn v(a: &Prim, b: &Prim, c: f64) -> f64 {
        let p = a.alpha + b.alpha;
        let pc = (a.alpha * a.center + b.alpha * b.center) / p;
        -2.0 * PI / p * (-a.alpha * b.alpha / p * (a.center - b.center).powi(2)).exp() * f0(p * (pc - c).powi(2))
    }

    fn eri(a: &Prim, b: &Prim, c: &Prim, d: &Prim) -> f64 {
        let (p, q) = (a.alpha + b.alpha, c.alpha + d.alpha);
        let pc = (a.alpha * a.center + b.alpha * b.center) / p;
        let qc = (c.alpha * c.center + d.alpha * d.center) / q;
        2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt())
            * (-a.alpha * b.alpha / p * (a.center - b.center).powi(2) - c.alpha * d.alpha / q * (c.center - d.center).powi(2)).exp()
            * f0(p * q / (p + q) * (pc - qc).powi(2))
    }

    /// RHF energy of H₂ with one contracted s function per atom.
    pub fn h2_energy(exponents: &[f64], coefs: &[f64], r: f64) -> f64 {
        let make = |center: f64| -> Vec<Prim> {
            let raw: Vec<Prim> = exponents
                .iter()
                .zip(coefs)
                .map(|(&alpha, &c)| Prim {
                    alpha,
                    coef: c * (2.0 * alpha / PI).powf(0.75),
                    center,
                })
                .collect();
            let norm: f64 = raw.iter().flat_map(|x| raw.iter().map(move |y| x.coef * y.coef * s(x, y))).sum::<f64>().sqrt();
            raw.into_iter().map(|p| Prim { coef: p.coef / norm, ..p }).collect()
        };
        let basis = [make(0.0), make(r)];
        let one = |f: &dyn Fn(&Prim, &Prim) -> f64, i: usize, j: usize| -> f64 {
            basis[i].iter().flat_map(|x| basis[j].iter().map(move |y| x.coef * y.coef * f(x, y))).sum()
        };
        let s12 = one(&s, 0, 1);
        let h = |i: usize, j: usize| one(&t, i, j) + one(&|x, y| v(x, y, 0.0), i, j) + one(&|x, y| v(x, y, r), i, j);
        let g = |i: usize, j: usize, k: usize, l: usize| -> f64 {
            let mut e = 0.0;
            for a in &basis[i] {
                for b in &basis[j] {
                    for c in &basis[k] {
                        for d in &basis[l] {
                            e += a.coef * b.coef * c.coef * d.coef * eri(a, b, c, d);
                        }
                    }
                }
            }
            e
        };
        // σg = (χ1 + χ2)/√(2(1+S)) by symmetry; (ij|kl) chemist order
        let n2 = 1.0 / (2.0 * (1.0 + s12));
        let h_gg = n2 * (h(0, 0) + h(1, 1) + 2.0 * h(0, 1));
        let mut j_gg = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        j_gg += g(i, j, k, l);
                    }
                }
            }
        }
        j_gg *= n2 * n2;
        2.0 * h_gg + j_gg + 1.0 / r
    }
}

#[test]
fn criterion_9_rhf_cross_check() {
    let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
    let basis = locapart_core::basis::build_basis(&m, "min-s").unwrap();
    let tables = locapart_core::integrals::compute_integrals(&basis, &m).unwrap();
    let mo = rhf(&tables, 2, m.nuclear_repulsion(), ScfOptions::default()).unwrap();
    assert_eq!(mo.kind, MoKind::Scf);
    let ours = mo.total_energy.unwrap();
    let shell = &basis.shells[0];
    let reference = reference::h2_energy(&shell.exponents, &shell.coefficients, 1.4);
    let d = (ours - reference).abs();
    let pass = d <= 1e-6;
    report(9, pass, &format!("RHF {ours:.10} vs reference {reference:.10}: |diff| {d:.1e} (<= 1e-6)"));
    assert!(pass);
}
