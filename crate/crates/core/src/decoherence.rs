//! Two-surface vibronic dephasing model: site terms from an R quadrature
//! of electronic matrix elements, and the Gaussian ensemble average of the
//! site energy.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::gauss_hermite;

/// Reduced mass of H₂ in electron masses.
pub const H2_REDUCED_MASS: f64 = 918.0763;

/// Harmonic surface in its vibrational ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub r_eq: f64,
    /// Vibrational quantum `hν` in hartree.
    pub nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VibronicModel {
    pub ground: Surface,
    pub excited: Surface,
    pub reduced_mass: f64,
    pub nodes: usize,
}

impl VibronicModel {
    pub fn h2_default() -> VibronicModel {
        VibronicModel {
            ground: Surface { r_eq: 1.4, nu: 0.02 },
            excited: Surface { r_eq: 1.6, nu: 0.016 },
            reduced_mass: H2_REDUCED_MASS,
            nodes: 16,
        }
    }

    fn a(&self, s: &Surface) -> f64 {
        self.reduced_mass * s.nu
    }

    /// `χ(R) = (a/π)^{1/4} exp(−a(R−R_eq)²/2)` with `a = μν`.
    pub fn chi(&self, s: &Surface, r: f64) -> f64 {
        let a = self.a(s);
        (a / std::f64::consts::PI).powf(0.25) * (-0.5 * a * (r - s.r_eq).powi(2)).exp()
    }

    /// `∫ χ_g χ_e dR`.
    pub fn franck_condon(&self) -> f64 {
        let (ag, ae) = (self.a(&self.ground), self.a(&self.excited));
        let d = self.ground.r_eq - self.excited.r_eq;
        (2.0 * (ag * ae).sqrt() / (ag + ae)).sqrt() * (-0.5 * ag * ae / (ag + ae) * d * d).exp()
    }

    /// Nodes and weights for `∫ χ_x χ_y f(R) dR ≈ Σ w f(R)`.
    pub fn rule(&self, x: &Surface, y: &Surface) -> Vec<(f64, f64)> {
        let (ax, ay) = (self.a(x), self.a(y));
        let a = 0.5 * (ax + ay);
        let center = (ax * x.r_eq + ay * y.r_eq) / (ax + ay);
        let norm = if x == y { 1.0 } else { self.franck_condon() };
        let (t, w) = gauss_hermite(self.nodes);
        t.iter()
            .zip(&w)
            .map(|(t, w)| (center + t / a.sqrt(), norm * w / std::f64::consts::PI.sqrt()))
            .collect()
    }
}

/// Electronic data at one nuclear geometry: the lowest states (columns, in a
/// configuration basis that varies smoothly with R) and the site operators.
#[derive(Debug, Clone)]
pub struct ElectronicPoint {
    pub energies: DVector<f64>,
    pub states: DMatrix<f64>,
    pub site: Vec<DMatrix<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VibronicTerms {
    /// `∫ χ_g² ⟨ψ_g|𝓗_A|ψ_g⟩ dR` per region.
    pub e_g: Vec<f64>,
    pub e_e: Vec<f64>,
    /// `Re ∫ χ_g χ_e ⟨ψ_g|𝓗_A|ψ_e⟩ dR` per region.
    pub delta: Vec<f64>,
    /// `(E_e − E_g) + ½(ν_e − ν_g)` with surface minima from the electronic
    /// energies at each `R_eq`.
    pub omega_eg: f64,
    pub franck_condon: f64,
    /// Cross term with the electronic element frozen at the ground `R_eq`.
    pub delta_condon: Vec<f64>,
}

impl VibronicTerms {
    pub fn mean(&self, region: usize) -> f64 {
        0.5 * (self.e_g[region] + self.e_e[region])
    }
}

/// Evaluates the site terms. `electronic(R)` must return at least two states;
/// `g` and `e` are states 0 and 1 at every R, which is checked by
/// maximum-overlap tracking along increasing R.
pub fn vibronic_site_terms<F>(model: &VibronicModel, electronic: F) -> Result<VibronicTerms>
where
    F: Fn(f64) -> Result<ElectronicPoint> + Sync,
{
    let (g, e) = (model.ground, model.excited);
    let rules = [model.rule(&g, &g), model.rule(&e, &e), model.rule(&g, &e)];
    let mut rs: Vec<f64> = rules.iter().flatten().map(|x| x.0).chain([g.r_eq, e.r_eq]).collect();
    rs.sort_by(f64::total_cmp);
    rs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut points: Vec<ElectronicPoint> = rs.par_iter().map(|&r| electronic(r)).collect::<Result<_>>()?;
    track(&rs, &mut points)?;
    let at = |r: f64| rs.iter().position(|x| (x - r).abs() < 1e-12).unwrap();
    let n_reg = points[0].site.len();
    let element = |p: &ElectronicPoint, reg: usize, i: usize, j: usize| {
        (p.states.column(i).transpose() * &p.site[reg] * p.states.column(j))[(0, 0)]
    };
    let integrate = |rule: &[(f64, f64)], i: usize, j: usize, reg: usize| {
        rule.iter().map(|&(r, w)| w * element(&points[at(r)], reg, i, j)).sum::<f64>()
    };
    let terms = VibronicTerms {
        e_g: (0..n_reg).map(|a| integrate(&rules[0], 0, 0, a)).collect(),
        e_e: (0..n_reg).map(|a| integrate(&rules[1], 1, 1, a)).collect(),
        delta: (0..n_reg).map(|a| integrate(&rules[2], 0, 1, a)).collect(),
        omega_eg: points[at(e.r_eq)].energies[1] - points[at(g.r_eq)].energies[0] + 0.5 * (e.nu - g.nu),
        franck_condon: model.franck_condon(),
        delta_condon: (0..n_reg).map(|a| model.franck_condon() * element(&points[at(g.r_eq)], a, 0, 1)).collect(),
    };
    log::info!(
        "vibronic terms: omega_eg {:.8}, FC {:.6}, delta {:?}",
        terms.omega_eg,
        terms.franck_condon,
        terms.delta
    );
    Ok(terms)
}

/// Fixes state signs along the R grid and rejects ordering swaps.
fn track(rs: &[f64], points: &mut [ElectronicPoint]) -> Result<()> {
    for p in points.iter() {
        if p.states.ncols() < 2 {
            return Err(Error::Decoherence("need at least two electronic states per geometry".into()));
        }
    }
    let fix = |v: &mut DMatrix<f64>, k: usize, positive: bool| {
        if !positive {
            let mut c = v.column_mut(k);
            c *= -1.0;
        }
    };
    for k in 0..2 {
        let col = points[0].states.column(k);
        let big = col.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        fix(&mut points[0].states, k, big >= 0.0);
    }
    for x in 1..points.len() {
        for k in 0..2 {
            let prev = points[x - 1].states.column(k).into_owned();
            let cur = &points[x].states;
            let m = cur.ncols();
            let ov: Vec<f64> = (0..m).map(|j| prev.dot(&cur.column(j))).collect();
            let best = (0..m).max_by(|&a, &b| ov[a].abs().total_cmp(&ov[b].abs())).unwrap();
            if best != k {
                return Err(Error::Decoherence(format!(
                    "electronic state {k} swaps with state {best} between R = {:.4} and R = {:.4} (overlaps {:?})",
                    rs[x - 1],
                    rs[x],
                    ov
                )));
            }
            fix(&mut points[x].states, k, ov[k] >= 0.0);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceParams {
    pub omega_eg: f64,
    pub sigma: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone)]
pub struct Averaged {
    pub values: Vec<f64>,
    /// Standard error of the Monte Carlo mean (zero for the analytic form).
    pub std_error: Vec<f64>,
}

/// `⟨cos(ω t)⟩` over `ω ~ N(ω_eg, σ²)`, analytic or sampled, with its
/// standard error. The same draws are used for every t.
pub fn ensemble_cosine(params: &DecoherenceParams, times: &[f64], method: Method) -> Result<Averaged> {
    if params.sigma < 0.0 || !params.sigma.is_finite() {
        return Err(Error::Decoherence(format!("sigma must be a finite non-negative number; got {}", params.sigma)));
    }
    if times.iter().any(|&t| t < 0.0) {
        return Err(Error::Decoherence("times must be non-negative".into()));
    }
    match method {
        Method::Analytic => Ok(Averaged {
            values: times
                .iter()
                .map(|&t| (params.omega_eg * t).cos() * (-0.5 * params.sigma * params.sigma * t * t).exp())
                .collect(),
            std_error: vec![0.0; times.len()],
        }),
        Method::MonteCarlo => {
            if params.samples < 2 {
                return Err(Error::Decoherence("Monte Carlo needs at least two samples".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let dist = Normal::new(params.omega_eg, params.sigma).map_err(|e| Error::Decoherence(e.to_string()))?;
            let omegas: Vec<f64> = (0..params.samples).map(|_| dist.sample(&mut rng)).collect();
            let n = omegas.len() as f64;
            let (values, std_error) = times
                .par_iter()
                .map(|&t| {
                    let m = omegas.iter().map(|w| (w * t).cos()).sum::<f64>() / n;
                    let var = omegas.iter().map(|w| ((w * t).cos() - m).powi(2)).sum::<f64>() / (n - 1.0);
                    (m, (var / n).sqrt())
                })
                .unzip();
            Ok(Averaged { values, std_error })
        }
    }
}

/// `Ē_A(t) = ½(E_Ag + E_Ae) + Δ_A ⟨cos(ω t)⟩`.
pub fn averaged_energy(terms: &VibronicTerms, region: usize, cosine: &Averaged) -> Averaged {
    let d = terms.delta[region];
    Averaged {
        values: cosine.values.iter().map(|c| terms.mean(region) + d * c).collect(),
        std_error: cosine.std_error.iter().map(|s| d.abs() * s).collect(),
    }
}
