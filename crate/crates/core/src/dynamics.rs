//! Coherent propagation in the eigenbasis and per-region time series.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manybody::{CiState, Eigenpairs};
use crate::subsystem::{Flavor, SubsystemOperator};

pub const DEFAULT_SAMPLES: usize = 4096;
pub const DEFAULT_PERIODS: f64 = 6.0;

/// Smallest Bohr frequency between eigenstates that both carry amplitude
/// above `threshold`, ignoring degeneracies below 1e-10.
pub fn slowest_bohr_frequency(eigen: &Eigenpairs, coeffs: &DVector<Complex64>, threshold: f64) -> Option<f64> {
    let occupied: Vec<usize> = (0..coeffs.len()).filter(|&k| coeffs[k].norm() > threshold).collect();
    let mut best: Option<f64> = None;
    for (x, &m) in occupied.iter().enumerate() {
        for &n in &occupied[x + 1..] {
            let w = (eigen.values[m] - eigen.values[n]).abs();
            if w > 1e-10 && best.is_none_or(|b| w < b) {
                best = Some(w);
            }
        }
    }
    best
}

/// Uniform grid from 0 with `samples` points spanning `t_max`.
pub fn uniform_times(samples: usize, t_max: f64) -> Vec<f64> {
    if samples < 2 {
        return vec![0.0; samples];
    }
    let dt = t_max / (samples - 1) as f64;
    (0..samples).map(|i| i as f64 * dt).collect()
}

/// Default grid: `samples` points over `periods` periods of the slowest
/// populated Bohr frequency (a single point at t = 0 for an eigenstate).
pub fn default_times(eigen: &Eigenpairs, state: &CiState, samples: usize, periods: f64) -> Vec<f64> {
    let c = eigen.expand(state);
    match slowest_bohr_frequency(eigen, &c, 1e-4) {
        Some(w) => uniform_times(samples, periods * 2.0 * std::f64::consts::PI / w),
        None => uniform_times(samples, 1.0),
    }
}

/// Eigenbasis coefficients `c_n(t) = c_n(0) e^{-i E_n t}`.
pub fn propagate(initial: &DVector<Complex64>, eigen: &Eigenpairs, t: f64) -> DVector<Complex64> {
    DVector::from_fn(initial.len(), |n, _| initial[n] * Complex64::from_polar(1.0, -eigen.values[n] * t))
}

/// State vector at time `t` in the configuration basis.
pub fn state_at(initial: &CiState, eigen: &Eigenpairs, t: f64) -> CiState {
    let c = propagate(&eigen.expand(initial), eigen, t);
    CiState {
        c: eigen.vectors.map(Complex64::from) * c,
    }
}

#[derive(Debug, Clone)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

impl Channel {
    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn amplitude(&self) -> f64 {
        amplitude(&self.values)
    }
}

#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    pub energies: Vec<Channel>,
    pub populations: Vec<Channel>,
    pub total: Channel,
    pub flavor: Flavor,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Max over t of |Σ_A E_A(t) − Σ_A E_A(0)| relative to |Σ_A E_A(0)|.
    pub fn energy_sum_drift(&self) -> f64 {
        let sums: Vec<f64> = (0..self.len()).map(|t| self.energies.iter().map(|c| c.values[t]).sum()).collect();
        let s0 = sums[0];
        sums.iter().map(|s| (s - s0).abs()).fold(0.0, f64::max) / s0.abs().max(1e-300)
    }

    /// Max over t of |Σ_A E_A(t) − E_total(t)|.
    pub fn energy_sum_error(&self) -> f64 {
        (0..self.len())
            .map(|t| (self.energies.iter().map(|c| c.values[t]).sum::<f64>() - self.total.values[t]).abs())
            .fold(0.0, f64::max)
    }

    /// Max over t of |Σ_A N_A(t) − n|.
    pub fn population_sum_error(&self, n: f64) -> f64 {
        (0..self.len())
            .map(|t| (self.populations.iter().map(|c| c.values[t]).sum::<f64>() - n).abs())
            .fold(0.0, f64::max)
    }
}

/// Expectations of every operator along the eigenbasis propagation of
/// `initial`. Raw (stationary) operators are only accepted on stationary
/// states, where they give the same real value as the symmetrized ones.
pub fn site_series(
    initial: &CiState,
    eigen: &Eigenpairs,
    times: &[f64],
    energy_ops: &[SubsystemOperator],
    population_ops: &[SubsystemOperator],
    hamiltonian: &DMatrix<f64>,
) -> Result<TimeSeries> {
    let c0 = eigen.expand(initial);
    if (c0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Dynamics(format!(
            "initial state is not spanned by the eigenvectors (norm {:.3e})",
            c0.norm()
        )));
    }
    let flavor = energy_ops.first().map_or(Flavor::Symmetrized, |o| o.flavor);
    if energy_ops.iter().any(|o| o.flavor != flavor) {
        return Err(Error::Dynamics("energy operators mix flavors".into()));
    }
    if population_ops.iter().any(|o| o.flavor != Flavor::Population) {
        return Err(Error::Dynamics("population channels need population operators".into()));
    }
    if flavor == Flavor::Stationary {
        let occ: Vec<usize> = (0..c0.len()).filter(|&k| c0[k].norm() > 1e-8).collect();
        let e0 = eigen.values[occ[0]];
        if occ.iter().any(|&k| (eigen.values[k] - e0).abs() > 1e-10) {
            return Err(Error::Dynamics(
                "stationary subsystem operators are only valid on eigenstates; use the symmetrized flavor".into(),
            ));
        }
    }
    let v = &eigen.vectors;
    let to_eigen = |m: &DMatrix<f64>| (v.transpose() * m * v).map(Complex64::from);
    let ops: Vec<DMatrix<Complex64>> = energy_ops
        .iter()
        .chain(population_ops)
        .map(|o| to_eigen(&o.matrix))
        .chain(std::iter::once(to_eigen(hamiltonian)))
        .collect();
    let values: Vec<Vec<f64>> = times
        .par_iter()
        .map(|&t| {
            let c = propagate(&c0, eigen, t);
            ops.iter().map(|m| c.dotc(&(m * &c)).re).collect()
        })
        .collect();
    let column = |k: usize| values.iter().map(|row| row[k]).collect::<Vec<f64>>();
    let ne = energy_ops.len();
    Ok(TimeSeries {
        times: times.to_vec(),
        labels: energy_ops.iter().map(|o| o.region.clone()).collect(),
        energies: energy_ops
            .iter()
            .enumerate()
            .map(|(k, o)| Channel {
                name: format!("E_{}", o.region),
                values: column(k),
            })
            .collect(),
        populations: population_ops
            .iter()
            .enumerate()
            .map(|(k, o)| Channel {
                name: format!("N_{}", o.region),
                values: column(ne + k),
            })
            .collect(),
        total: Channel {
            name: "E_total".into(),
            values: column(ne + population_ops.len()),
        },
        flavor,
    })
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Half the peak-to-peak range.
pub fn amplitude(x: &[f64]) -> f64 {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    0.5 * (hi - lo)
}

/// Pearson correlation; `None` when either series is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let scale = mx.abs().max(my.abs()).max(1.0);
    if sxx.sqrt() < 1e-13 * scale * (x.len() as f64).sqrt() || syy.sqrt() < 1e-13 * scale * (y.len() as f64).sqrt() {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// One-sided amplitude spectrum of the mean-removed signal at the DFT
/// frequencies `ω_k = 2πk / (N dt)`, k = 0..N/2.
pub fn spectrum(x: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = x.len();
    let m = mean(x);
    let half = n / 2;
    let amps: Vec<f64> = (0..=half)
        .into_par_iter()
        .map(|k| {
            let w = -2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in x.iter().enumerate() {
                acc += Complex64::from_polar(v - m, w * j as f64);
            }
            2.0 * acc.norm() / n as f64
        })
        .collect();
    let freqs = (0..=half).map(|k| 2.0 * std::f64::consts::PI * k as f64 / (n as f64 * dt)).collect();
    (freqs, amps)
}

/// Angular frequencies of spectral local maxima above `rel` times the
/// largest peak, strongest first.
pub fn spectral_peaks(x: &[f64], dt: f64, rel: f64) -> Vec<f64> {
    let (f, a) = spectrum(x, dt);
    let top = a.iter().skip(1).cloned().fold(0.0, f64::max);
    if top <= 0.0 {
        return Vec::new();
    }
    let mut peaks: Vec<(f64, f64)> = (1..a.len())
        .filter(|&k| a[k] >= rel * top && a[k] >= a[k - 1] && (k + 1 == a.len() || a[k] > a[k + 1]))
        .map(|k| (a[k], f[k]))
        .collect();
    peaks.sort_by(|p, q| q.0.total_cmp(&p.0));
    peaks.into_iter().map(|p| p.1).collect()
}
