//! Atom-centred molecular quadrature grids with Becke fuzzy-cell weights.
//!
//! Each atom carries a radial (Gauss-Legendre in the Becke-mapped variable) times angular
//! (Gauss-Legendre in cos θ, uniform φ) product grid. For a plane partition
//! the polar axis is the plane normal, and every radial shell that crosses
//! the plane gets its cos θ rule split at the crossing (and the radial rule
//! is split at the atom-plane distance). Region integrals
//! then never integrate across the step of the region mask.

use std::f64::consts::PI;

use crate::geometry::{Molecule, Vec3};
use crate::partition::Partition;
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridLevel {
    Coarse,
    Default,
    Fine,
    Explicit {
        n_radial: usize,
        n_theta: usize,
        tau: f64,
    },
}

impl GridLevel {
    pub fn parse(s: &str) -> Option<GridLevel> {
        match s {
            "coarse" => Some(GridLevel::Coarse),
            "default" => Some(GridLevel::Default),
            "fine" => Some(GridLevel::Fine),
            _ => None,
        }
    }

    pub fn params(&self) -> GridParams {
        let (n_radial, n_theta, tau) = match *self {
            GridLevel::Coarse => (40, 10, 1e-3),
            GridLevel::Default => (80, 18, 1e-6),
            GridLevel::Fine => (120, 26, 1e-8),
            GridLevel::Explicit {
                n_radial,
                n_theta,
                tau,
            } => (n_radial, n_theta, tau),
        };
        GridParams {
            n_radial,
            n_theta,
            n_phi: 2 * n_theta,
            radial_scale: 1.0,
            becke_iterations: 3,
            tau,
        }
    }

    pub fn name(&self) -> String {
        match self {
            GridLevel::Coarse => "coarse".into(),
            GridLevel::Default => "default".into(),
            GridLevel::Fine => "fine".into(),
            GridLevel::Explicit { n_radial, n_theta, .. } => format!("explicit-{n_radial}x{n_theta}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridParams {
    pub n_radial: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Midpoint radius `r_m` of the Becke radial map (bohr).
    pub radial_scale: f64,
    pub becke_iterations: usize,
    /// Documented one-electron accuracy of this tier.
    pub tau: f64,
}

#[derive(Debug, Clone)]
pub struct GridMeta {
    pub scheme: String,
    pub level: String,
    pub params: GridParams,
    /// Points discarded because they coincide with a nucleus.
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub points: Vec<Vec3>,
    pub weights: Vec<f64>,
    pub regions: Vec<usize>,
    pub meta: GridMeta,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tau(&self) -> f64 {
        self.meta.params.tau
    }

    /// Quadrature of `f` over the whole grid.
    pub fn integrate(&self, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    /// Quadrature of `f` restricted to one region.
    pub fn integrate_region(&self, region: usize, f: impl Fn(&Vec3) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .zip(&self.regions)
            .filter(|(_, &r)| r == region)
            .map(|((p, w), _)| w * f(p))
            .sum()
    }
}

fn becke_step(mut mu: f64, iterations: usize) -> f64 {
    for _ in 0..iterations {
        mu = 1.5 * mu - 0.5 * mu * mu * mu;
    }
    0.5 * (1.0 - mu)
}

/// Becke partition-of-unity weight of `atom` at `r`.
fn becke_weight(atom: usize, r: &Vec3, centers: &[Vec3], iterations: usize) -> f64 {
    let dist: Vec<f64> = centers.iter().map(|c| (r - c).norm()).collect();
    let mut cell = vec![1.0; centers.len()];
    for i in 0..centers.len() {
        for j in 0..centers.len() {
            if i != j {
                let rij = (centers[i] - centers[j]).norm();
                cell[i] *= becke_step((dist[i] - dist[j]) / rij, iterations);
            }
            if cell[i] == 0.0 {
                break;
            }
        }
    }
    let total: f64 = cell.iter().sum();
    if total == 0.0 {
        0.0
    } else {
        cell[atom] / total
    }
}

/// Radial nodes `(r, weight including r²)` from Gauss-Legendre in the Becke
/// variable `x`, `r = r_m (1+x)/(1-x)`. When a plane crosses at distance
/// `split`, the rule is split there: the region mask makes the angular
/// integral non-smooth in r at the tangent radius.
fn radial_nodes(n: usize, rm: f64, split: Option<f64>) -> Vec<(f64, f64)> {
    let to_x = |r: f64| (r - rm) / (r + rm);
    let mut edges = vec![-1.0];
    let mut counts = vec![n];
    if let Some(d) = split.filter(|&d| d > 1e-10) {
        let xd = to_x(d);
        edges.push(xd);
        let n_in = ((n as f64 * 0.5 * (xd + 1.0)).round() as usize).clamp(8.min(n), n.saturating_sub(8).max(1));
        counts = vec![n_in, n - n_in];
    }
    edges.push(1.0);
    let mut out = Vec::with_capacity(n);
    for (k, &cnt) in counts.iter().enumerate() {
        if cnt == 0 {
            continue;
        }
        let (gx, gw) = gauss_legendre(cnt);
        let (a, b) = (edges[k], edges[k + 1]);
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (x0, w0) in gx.iter().zip(&gw) {
            let x = m + h * x0;
            let r = rm * (1.0 + x) / (1.0 - x);
            let drdx = 2.0 * rm / ((1.0 - x) * (1.0 - x));
            out.push((r, h * w0 * drdx * r * r));
        }
    }
    out
}

fn orthonormal_frame(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (helper - axis * axis.dot(&helper)).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

/// Builds the molecular grid; region indices come from `partition`.
pub fn build_grid(molecule: &Molecule, partition: &Partition, level: GridLevel) -> Grid {
    let params = level.params();
    let centers: Vec<Vec3> = molecule.nuclei().iter().map(|n| n.position).collect();
    let plane = partition.plane();
    let axis = plane.map(|(n, _)| n).unwrap_or_else(Vec3::z);
    let (e1, e2) = orthonormal_frame(&axis);
    let (gl_x, gl_w) = gauss_legendre(params.n_theta);
    let nr = params.n_radial;
    let rm = params.radial_scale;

    let phis: Vec<(f64, f64)> = (0..params.n_phi)
        .map(|k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / params.n_phi as f64;
            (phi.cos(), phi.sin())
        })
        .collect();
    let w_phi = 2.0 * PI / params.n_phi as f64;

    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut regions = Vec::new();
    let mut dropped = 0;
    let mut cos_nodes: Vec<(f64, f64)> = Vec::new();
    for (atom, center) in centers.iter().enumerate() {
        let signed = plane.map(|(n, c)| n.dot(center) - c);
        for &(r, w_rad) in &radial_nodes(nr, rm, signed.map(f64::abs)) {
            cos_nodes.clear();
            let push_interval = |lo: f64, hi: f64, out: &mut Vec<(f64, f64)>| {
                let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
                for (gx, gw) in gl_x.iter().zip(&gl_w) {
                    out.push((m + h * gx, h * gw));
                }
            };
            match signed {
                Some(d) if d.abs() < r => {
                    let cb = -d / r;
                    push_interval(-1.0, cb, &mut cos_nodes);
                    push_interval(cb, 1.0, &mut cos_nodes);
                }
                _ => push_interval(-1.0, 1.0, &mut cos_nodes),
            }

            for &(ct, wt) in &cos_nodes {
                let st = (1.0 - ct * ct).max(0.0).sqrt();
                for &(cp, sp) in &phis {
                    let p = center + r * (st * cp * e1 + st * sp * e2 + ct * axis);
                    if centers.iter().any(|c| (p - c).norm() < 1e-12) {
                        dropped += 1;
                        log::warn!("grid point at a nucleus dropped: ({:.3e}, {:.3e}, {:.3e})", p.x, p.y, p.z);
                        continue;
                    }
                    let wb = becke_weight(atom, &p, &centers, params.becke_iterations);
                    let w = w_rad * wt * w_phi * wb;
                    if w > 0.0 {
                        points.push(p);
                        weights.push(w);
                        regions.push(partition.region_of(&p));
                    }
                }
            }
        }
    }
    log::debug!("grid {}: {} points", level.name(), points.len());
    Grid {
        points,
        weights,
        regions,
        meta: GridMeta {
            scheme: if plane.is_some() {
                "becke-atomic/plane-split".into()
            } else {
                "becke-atomic".into()
            },
            level: level.name(),
            params,
            dropped,
        },
    }
}
