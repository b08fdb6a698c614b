use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::integrals::{IntegralTables, Tensor4};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoKind {
    Lowdin,
    Scf,
}

impl MoKind {
    pub fn name(self) -> &'static str {
        match self {
            MoKind::Lowdin => "lowdin",
            MoKind::Scf => "scf",
        }
    }
}

/// Orthonormal molecular orbitals; columns of `c` are AO expansions.
#[derive(Debug, Clone)]
pub struct MoSet {
    pub c: DMatrix<f64>,
    pub energies: Option<DVector<f64>>,
    pub kind: MoKind,
    /// Doubly occupied orbitals of the SCF reference.
    pub n_occ: usize,
    /// Total SCF energy including nuclear repulsion.
    pub total_energy: Option<f64>,
    pub iterations: usize,
}

impl MoSet {
    pub fn n(&self) -> usize {
        self.c.ncols()
    }

    /// `Cᵀ M C`.
    pub fn transform(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.c.transpose() * m * &self.c
    }

    pub fn transform_eri(&self, g: &Tensor4) -> Tensor4 {
        g.transform(&self.c)
    }

    /// MO coefficients of an AO-expanded function: `d = Cᵀ S f`.
    pub fn coefficients_of(&self, s: &DMatrix<f64>, f: &DVector<f64>) -> DVector<f64> {
        self.c.transpose() * (s * f)
    }
}

const MIN_OVERLAP_EIG: f64 = 1e-10;

fn inverse_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(s.clone());
    let min = eig.eigenvalues.min();
    if min < MIN_OVERLAP_EIG {
        return Err(Error::DegenerateBasis(min));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()));
    let x = &eig.eigenvectors * d * eig.eigenvectors.transpose();
    Ok((&x + x.transpose()) * 0.5)
}

/// Symmetric orthogonalization `C = S^{-1/2}`.
pub fn lowdin(s: &DMatrix<f64>) -> Result<MoSet> {
    Ok(MoSet {
        c: inverse_sqrt(s)?,
        energies: None,
        kind: MoKind::Lowdin,
        n_occ: 0,
        total_energy: None,
        iterations: 0,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ScfOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Mixing weight of the previous density once damping is switched on.
    pub damping: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        ScfOptions {
            max_iterations: 200,
            tolerance: 1e-8,
            damping: 0.5,
        }
    }
}

fn fock(h: &DMatrix<f64>, eri: &Tensor4, p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut f = h.clone();
    for m in 0..n {
        for v in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                for s in 0..n {
                    // (mv|ls) = <ml|vs>, (ml|vs) = <mv|ls>
                    acc += p[(l, s)] * (eri.get(m, l, v, s) - 0.5 * eri.get(m, v, l, s));
                }
            }
            f[(m, v)] += acc;
        }
    }
    f
}

fn solve_roothaan(f: &DMatrix<f64>, x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let fp = x.transpose() * f * x;
    let (e, v) = eigensolve(&fp);
    (e, x * v)
}

/// Ascending eigenvalues and matching orthonormal eigenvectors of a
/// symmetric matrix.
pub fn eigensolve(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..m.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

/// Restricted closed-shell SCF from the core guess. Damping switches on
/// when the density change stops decreasing.
pub fn rhf(tables: &IntegralTables, n_electrons: usize, nuclear_repulsion: f64, opts: ScfOptions) -> Result<MoSet> {
    let n = tables.n();
    if n_electrons % 2 != 0 || n_electrons == 0 || n_electrons > 2 * n {
        return Err(Error::ManyBody(format!(
            "restricted SCF needs an even electron count between 2 and {}; got {n_electrons}",
            2 * n
        )));
    }
    let n_occ = n_electrons / 2;
    let x = inverse_sqrt(&tables.s)?;
    let h = tables.h();
    let density = |c: &DMatrix<f64>| {
        let occ = c.columns(0, n_occ);
        &occ * occ.transpose() * 2.0
    };
    let (_, c0) = solve_roothaan(&h, &x);
    let mut p = density(&c0);
    let mut beta = 0.0;
    let mut last = f64::INFINITY;
    let mut rising = 0;
    for it in 1..=opts.max_iterations {
        let f = fock(&h, &tables.eri, &p);
        let (e, c) = solve_roothaan(&f, &x);
        let p_new = density(&c);
        let delta = (&p_new - &p).amax();
        log::debug!("scf iteration {it}: density change {delta:.3e}");
        if delta < opts.tolerance {
            let f = fock(&h, &tables.eri, &p_new);
            let energy = 0.5 * p_new.component_mul(&(&h + &f)).sum() + nuclear_repulsion;
            log::info!("scf converged in {it} iterations, E = {energy:.12}");
            let (e, c) = solve_roothaan(&f, &x);
            return Ok(MoSet {
                c,
                energies: Some(e),
                kind: MoKind::Scf,
                n_occ,
                total_energy: Some(energy),
                iterations: it,
            });
        }
        let _ = e;
        if delta >= last {
            rising += 1;
            if rising >= 3 && beta == 0.0 {
                log::info!("scf oscillating; switching on damping {}", opts.damping);
                beta = opts.damping;
            }
        } else {
            rising = 0;
        }
        last = delta;
        p = &p_new * (1.0 - beta) + &p * beta;
    }
    Err(Error::ScfNotConverged {
        iterations: opts.max_iterations,
        delta: last,
    })
}
