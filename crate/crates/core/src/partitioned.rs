//! Region-restricted one- and two-electron integral tables.
//!
//! One-electron tables are grid quadratures over the points of each region.
//! Two-electron tables use the half-space quadrant integrals when the
//! partition is a plane, the full tensor for a single region, and a
//! same-grid pair sum (diagonal excluded) for Voronoi cells.

use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;

use crate::basis::{build_basis, eval_basis, BasisSet};
use crate::error::{Error, Result};
use crate::geometry::{Molecule, Vec3};
use crate::grid::Grid;
use crate::halfspace::{plane_eri, quadrant};
use crate::integrals::{dump_matrix, eri_tensor, IntegralTables, Tensor4};
use crate::partition::{Partition, PartitionKind};

/// Max-abs and relative deviation of a sum rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residual {
    pub max_abs: f64,
    pub relative: f64,
}

impl Residual {
    fn of(sum: &[f64], reference: &[f64]) -> Residual {
        let max_abs = sum.iter().zip(reference).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let scale = reference.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        Residual {
            max_abs,
            relative: if scale > 0.0 { max_abs / scale } else { max_abs },
        }
    }
}

/// Sum-rule deviations of the raw (unclosed) tables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SumRules {
    pub s: Residual,
    pub h: Residual,
    pub g: Residual,
}

#[derive(Debug, Clone)]
pub struct PartitionedIntegrals {
    pub labels: Vec<String>,
    /// `⟨i|Θ_A|j⟩`
    pub s: Vec<DMatrix<f64>>,
    /// `⟨i|Θ_A (-½∇²)|j⟩`, not symmetric.
    pub t: Vec<DMatrix<f64>>,
    /// `⟨i|Θ_A V_nuc|j⟩`
    pub v: Vec<DMatrix<f64>>,
    /// `g[A][α]` with the symmetric pair projector; `g[A][α] == g[α][A]`.
    pub g: Vec<Vec<Tensor4>>,
    /// Sum-rule deviations before closure.
    pub raw: SumRules,
    /// Whether the residuals were redistributed so the sums are exact.
    pub closed: bool,
    pub tau: f64,
    pub two_electron_scheme: String,
}

impl PartitionedIntegrals {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n(&self) -> usize {
        self.s[0].nrows()
    }

    pub fn region(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::Operator(format!("no region `{label}` in partitioned tables")))
    }

    /// `h_A = T_A + V_A`.
    pub fn h(&self, a: usize) -> DMatrix<f64> {
        &self.t[a] + &self.v[a]
    }

    /// `Σ_α g_{A,α}`, the two-electron kernel of the region operator.
    pub fn g_total(&self, a: usize) -> Tensor4 {
        let mut out = Tensor4::zeros(self.n());
        for g in &self.g[a] {
            out.scaled_add(g, 1.0);
        }
        out
    }

    /// Every table transformed with coefficient matrix `c` (AO rows).
    pub fn transform(&self, c: &DMatrix<f64>) -> PartitionedIntegrals {
        let m1 = |m: &DMatrix<f64>| c.transpose() * m * c;
        PartitionedIntegrals {
            labels: self.labels.clone(),
            s: self.s.iter().map(m1).collect(),
            t: self.t.iter().map(m1).collect(),
            v: self.v.iter().map(m1).collect(),
            g: self
                .g
                .iter()
                .map(|row| row.iter().map(|g| g.transform(c)).collect())
                .collect(),
            raw: self.raw,
            closed: self.closed,
            tau: self.tau,
            two_electron_scheme: self.two_electron_scheme.clone(),
        }
    }

    /// Labeled text dump of all region tables.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (a, label) in self.labels.iter().enumerate() {
            dump_matrix(&mut out, &format!("S[{label}]"), &self.s[a]);
            dump_matrix(&mut out, &format!("T[{label}]"), &self.t[a]);
            dump_matrix(&mut out, &format!("V[{label}]"), &self.v[a]);
        }
        let n = self.n();
        for (a, la) in self.labels.iter().enumerate() {
            for (b, lb) in self.labels.iter().enumerate() {
                let g = &self.g[a][b];
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                out.push_str(&format!("g[{la},{lb}] {i} {j} {k} {l} {:.17e}\n", g.get(i, j, k, l)));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

pub struct OneElectron {
    pub s: Vec<DMatrix<f64>>,
    pub t: Vec<DMatrix<f64>>,
    pub v: Vec<DMatrix<f64>>,
}

const CHUNK: usize = 2048;

/// Grid quadrature of `S_A`, `T_A`, `V_A` for every region.
pub fn partitioned_one_electron(basis: &BasisSet, molecule: &Molecule, grid: &Grid, partition: &Partition) -> OneElectron {
    let n = basis.len();
    let nreg = partition.len();
    let nuclei: Vec<(f64, Vec3)> = molecule.nuclei().iter().map(|x| (x.charge, x.position)).collect();
    let zero = || vec![(DMatrix::<f64>::zeros(n, n), DMatrix::<f64>::zeros(n, n), DMatrix::<f64>::zeros(n, n)); nreg];
    let idx: Vec<usize> = (0..grid.len()).collect();
    let acc = idx
        .par_chunks(CHUNK)
        .fold(zero, |mut acc, chunk| {
            let pts: Vec<Vec3> = chunk.iter().map(|&p| grid.points[p]).collect();
            let tab = eval_basis(basis, &pts);
            for (x, &p) in chunk.iter().enumerate() {
                let w = grid.weights[p];
                let vn: f64 = nuclei.iter().map(|(z, r)| -z / (grid.points[p] - r).norm()).sum();
                let (s, t, v) = &mut acc[grid.regions[p]];
                let phi = tab.values_at(x);
                let lap = tab.laplacians_at(x);
                for i in 0..n {
                    let wi = w * phi[i];
                    if wi == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        s[(i, j)] += wi * phi[j];
                        t[(i, j)] += -0.5 * wi * lap[j];
                        v[(i, j)] += wi * vn * phi[j];
                    }
                }
            }
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                x.0 += y.0;
                x.1 += y.1;
                x.2 += y.2;
            }
            a
        });
    let mut out = OneElectron {
        s: Vec::new(),
        t: Vec::new(),
        v: Vec::new(),
    };
    for (s, t, v) in acc {
        // The overlap and potential kernels are symmetric by construction.
        out.s.push((&s + s.transpose()) * 0.5);
        out.t.push(t);
        out.v.push((&v + v.transpose()) * 0.5);
    }
    out
}

/// Rotation taking `n` to +z.
fn rotation_to_z(n: &Vec3) -> Matrix3<f64> {
    let z = Vec3::z();
    let c = n.dot(&z);
    if c > 1.0 - 1e-14 {
        return Matrix3::identity();
    }
    if c < -1.0 + 1e-14 {
        return Matrix3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0));
    }
    let k = n.cross(&z).normalize();
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    let s = (1.0 - c * c).sqrt();
    Matrix3::identity() + s * kx + (1.0 - c) * kx * kx
}

/// `g_{A,α}` for a plane partition via the half-space quadrant integrals.
fn plane_two_electron(basis: &BasisSet, molecule: &Molecule, normal: &Vec3, offset: f64) -> Result<Vec<Vec<Tensor4>>> {
    let rot = rotation_to_z(normal);
    let rotated = molecule.mapped(|r| rot * r);
    let rbasis = build_basis(&rotated, &basis.name)?;
    let n = basis.len();
    // Original function i = Σ_j u[(j, i)] * rotated function j.
    let mut u = DMatrix::<f64>::zeros(n, n);
    for (i, f) in basis.functions.iter().enumerate() {
        match f.p_axis() {
            None => u[(i, i)] = 1.0,
            Some(a) => {
                for (j, g) in rbasis.functions.iter().enumerate() {
                    if g.shell == f.shell {
                        if let Some(b) = g.p_axis() {
                            u[(j, i)] = rot[(b, a)];
                        }
                    }
                }
            }
        }
    }
    let full = eri_tensor(&rbasis);
    let q = plane_eri(&rbasis, offset, &full);
    let q: Vec<Tensor4> = q.iter().map(|t| t.transform(&u)).collect();
    let mut g = vec![vec![Tensor4::zeros(n), Tensor4::zeros(n)], vec![Tensor4::zeros(n), Tensor4::zeros(n)]];
    for a in 0..2 {
        for b in 0..2 {
            g[a][b].scaled_add(&q[quadrant(a, b)], 0.5);
            g[a][b].scaled_add(&q[quadrant(b, a)], 0.5);
        }
    }
    Ok(g)
}

/// Same-grid pair sum with coincident points excluded.
fn grid_pair_two_electron(basis: &BasisSet, grid: &Grid, nreg: usize) -> Vec<Vec<Tensor4>> {
    let n = basis.len();
    let tab = eval_basis(basis, &grid.points);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |k| (i, k))).collect();
    let keep: Vec<usize> = (0..grid.len())
        .filter(|&p| {
            let m = tab.values_at(p).iter().fold(0.0f64, |m, x| m.max(x.abs()));
            grid.weights[p] * m * m > 1e-14
        })
        .collect();
    log::warn!(
        "two-electron region tables by grid pair sum over {} points (accuracy limited by the grid)",
        keep.len()
    );
    let dens: Vec<Vec<f64>> = keep
        .iter()
        .map(|&p| {
            let v = tab.values_at(p);
            pairs.iter().map(|&(i, k)| grid.weights[p] * v[i] * v[k]).collect()
        })
        .collect();
    let np = pairs.len();
    // pot[region][x][pair]: potential of each region's pair density at point x.
    let pot: Vec<Vec<Vec<f64>>> = (0..nreg)
        .map(|r| {
            keep.par_iter()
                .enumerate()
                .map(|(x, &p)| {
                    let mut acc = vec![0.0; np];
                    for (y, &q) in keep.iter().enumerate() {
                        if x == y || grid.regions[q] != r {
                            continue;
                        }
                        let d = (grid.points[p] - grid.points[q]).norm();
                        if d < 1e-12 {
                            continue;
                        }
                        let inv = 1.0 / d;
                        for (a, v) in acc.iter_mut().zip(&dens[y]) {
                            *a += v * inv;
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut q = vec![vec![Tensor4::zeros(n); nreg]; nreg];
    for r1 in 0..nreg {
        for r2 in 0..nreg {
            let t = &mut q[r1][r2];
            for (x, &p) in keep.iter().enumerate() {
                if grid.regions[p] != r1 {
                    continue;
                }
                for (a, &(i, k)) in pairs.iter().enumerate() {
                    let d = dens[x][a];
                    if d == 0.0 {
                        continue;
                    }
                    for (b, &(j, l)) in pairs.iter().enumerate() {
                        t.add(i, j, k, l, d * pot[r2][x][b]);
                    }
                }
            }
        }
    }
    let mut g = vec![vec![Tensor4::zeros(n); nreg]; nreg];
    for a in 0..nreg {
        for b in 0..nreg {
            g[a][b].scaled_add(&q[a][b], 0.5);
            g[a][b].scaled_add(&q[b][a], 0.5);
        }
    }
    g
}

/// Builds all region tables. With `close_sum_rules` the residual of each
/// sum rule is split equally over the regions (ordered region pairs for the
/// two-electron tables), so the sums hold to rounding; the raw residuals are
/// kept in [`PartitionedIntegrals::raw`] either way.
pub fn partition_integrals(
    basis: &BasisSet,
    molecule: &Molecule,
    partition: &Partition,
    grid: &Grid,
    full: &IntegralTables,
    close_sum_rules: bool,
) -> Result<PartitionedIntegrals> {
    if partition.labels != molecule.regions() {
        return Err(Error::Partition("partition labels do not match the molecule's regions".into()));
    }
    let nreg = partition.len();
    let n = basis.len();
    let one = partitioned_one_electron(basis, molecule, grid, partition);
    let (mut g, scheme) = match &partition.kind {
        PartitionKind::Whole => (vec![vec![full.eri.clone()]], "whole-space".to_string()),
        PartitionKind::Plane { normal, offset } => (
            plane_two_electron(basis, molecule, normal, *offset)?,
            "half-space quadrature".to_string(),
        ),
        PartitionKind::Voronoi { .. } => (grid_pair_two_electron(basis, grid, nreg), "grid pair sum".to_string()),
    };

    let mut s_sum = DMatrix::zeros(n, n);
    let mut h_sum = DMatrix::zeros(n, n);
    let mut g_sum = Tensor4::zeros(n);
    for a in 0..nreg {
        s_sum += &one.s[a];
        h_sum += &one.t[a] + &one.v[a];
        for b in 0..nreg {
            g_sum.scaled_add(&g[a][b], 1.0);
        }
    }
    let h_full = full.h();
    let raw = SumRules {
        s: Residual::of(s_sum.as_slice(), full.s.as_slice()),
        h: Residual::of(h_sum.as_slice(), h_full.as_slice()),
        g: Residual::of(g_sum.as_slice(), full.eri.as_slice()),
    };
    log::info!(
        "sum rules (raw): S {:.2e}, h {:.2e}, g {:.2e} relative",
        raw.s.relative,
        raw.h.relative,
        raw.g.relative
    );
    let (mut s, mut t, v) = (one.s, one.t, one.v);
    if close_sum_rules {
        let f = 1.0 / nreg as f64;
        let ds = (&full.s - &s_sum) * f;
        let dh = (&h_full - &h_sum) * f;
        let mut dg = full.eri.clone();
        dg.scaled_add(&g_sum, -1.0);
        for a in 0..nreg {
            s[a] += &ds;
            t[a] += &dh;
            for b in 0..nreg {
                g[a][b].scaled_add(&dg, f * f);
            }
        }
    }
    Ok(PartitionedIntegrals {
        labels: partition.labels.clone(),
        s,
        t,
        v,
        g,
        raw,
        closed: close_sum_rules,
        tau: grid.tau(),
        two_electron_scheme: scheme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::geometry::{build_molecule, GeometrySpec};
    use crate::grid::{build_grid, GridLevel};
    use crate::integrals::compute_integrals;
    use crate::partition::{build_partition, plane_partition};

    fn setup(spec: GeometrySpec, basis: &str, level: GridLevel) -> (Molecule, BasisSet, IntegralTables, PartitionedIntegrals) {
        let m = build_molecule(&spec).unwrap();
        let b = build_basis(&m, basis).unwrap();
        let full = compute_integrals(&b, &m).unwrap();
        let part = build_partition(&m).unwrap();
        let grid = build_grid(&m, &part, level);
        let p = partition_integrals(&b, &m, &part, &grid, &full, false).unwrap();
        (m, b, full, p)
    }

    #[test]
    fn one_region_reproduces_full_tables() {
        let spec = GeometrySpec::hydrogens(&[[0.0, 0.0, 0.0], [0.0, 0.0, 1.4]], &["A", "A"]);
        let (_, _, full, p) = setup(spec, "min-s", GridLevel::Default);
        assert_eq!(p.len(), 1);
        assert!((p.h(0) - full.h()).amax() < 1e-6);
        assert!((&p.s[0] - &full.s).amax() < 1e-6);
        assert!(p.g[0][0].max_abs_diff(&full.eri) == 0.0);
    }

    #[test]
    fn h2_sum_rules_and_asymmetry() {
        let (_, _, full, p) = setup(GeometrySpec::h2(1.4), "min-s", GridLevel::Default);
        assert!(p.raw.s.relative < 1e-6);
        assert!(p.raw.h.relative < 1e-6);
        assert!(p.raw.g.relative < 1e-10);
        let h_a = p.h(0);
        assert!((&h_a - h_a.transpose()).amax() > 1e-4);
        // σg density splits in half.
        let c = 1.0 / (2.0 * (1.0 + full.s[(0, 1)])).sqrt();
        let sg = nalgebra::DVector::from_vec(vec![c, c]);
        let half = (sg.transpose() * &p.s[0] * &sg)[(0, 0)];
        assert!((half - 0.5).abs() < 1e-6);
    }

    #[test]
    fn mirror_swaps_regions() {
        let (_, _, _, p) = setup(GeometrySpec::h2(1.4), "sp", GridLevel::Coarse);
        // Mirror z -> 1.4 - z maps function on A to the same function on B,
        // with p_z changing sign.
        let map = |i: usize| -> (usize, f64) { ((i + 4) % 8, if i % 4 == 3 { -1.0 } else { 1.0 }) };
        for i in 0..8 {
            for j in 0..8 {
                let (mi, si) = map(i);
                let (mj, sj) = map(j);
                for (x, y) in [(&p.s[0], &p.s[1]), (&p.t[0], &p.t[1]), (&p.v[0], &p.v[1])] {
                    assert!((x[(i, j)] - si * sj * y[(mi, mj)]).abs() < 1e-12);
                }
            }
        }
        for (i, j, k, l) in [(0, 4, 0, 4), (3, 7, 1, 5), (0, 0, 3, 3), (1, 6, 2, 7)] {
            let (a, b, c, d) = (map(i), map(j), map(k), map(l));
            let sign = a.1 * b.1 * c.1 * d.1;
            assert!((p.g[0][0].get(i, j, k, l) - sign * p.g[1][1].get(a.0, b.0, c.0, d.0)).abs() < 1e-12);
            assert!((p.g[0][1].get(i, j, k, l) - sign * p.g[1][0].get(a.0, b.0, c.0, d.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn far_separated_atoms_keep_their_own_repulsion() {
        let (_, _, full, p) = setup(GeometrySpec::h2(20.0), "min-s", GridLevel::Coarse);
        let gaa = p.g[0][0].get(0, 0, 0, 0);
        assert!((gaa - full.eri.get(0, 0, 0, 0)).abs() < 1e-10);
        assert!(p.g[0][0].get(1, 1, 1, 1).abs() < 1e-10);
        assert!((p.g[0][1].get(0, 1, 0, 1) - 0.5 * full.eri.get(0, 1, 0, 1)).abs() < 1e-10);
        assert!(p.g[0][1].get(0, 0, 1, 1).abs() < 1e-10);
        assert_eq!(p.g[0][1], p.g[1][0]);
    }

    #[test]
    fn tilted_plane_matches_axis_plane_by_rotation() {
        // Same physical system along z and along a tilted axis.
        let d = Vec3::new(0.3, -0.5, 0.8).normalize();
        let r = 1.6;
        let m1 = build_molecule(&GeometrySpec::h2(r)).unwrap();
        let m2 = build_molecule(&GeometrySpec::hydrogens(&[[0.0; 3], [r * d.x, r * d.y, r * d.z]], &["A", "B"])).unwrap();
        let mut out = Vec::new();
        for m in [&m1, &m2] {
            let b = build_basis(m, "min-s").unwrap();
            let full = compute_integrals(&b, m).unwrap();
            let part = build_partition(m).unwrap();
            let grid = build_grid(m, &part, GridLevel::Coarse);
            out.push(partition_integrals(&b, m, &part, &grid, &full, false).unwrap());
        }
        assert!(out[0].g[0][1].max_abs_diff(&out[1].g[0][1]) < 1e-11);
        assert!(out[0].g[0][0].max_abs_diff(&out[1].g[0][0]) < 1e-11);
    }

    #[test]
    fn tilted_plane_sp_sum_rule() {
        let m = build_molecule(&GeometrySpec::hydrogens(&[[0.0; 3], [0.5, 0.4, 1.2]], &["A", "B"])).unwrap();
        let b = build_basis(&m, "sp").unwrap();
        let full = compute_integrals(&b, &m).unwrap();
        let part = plane_partition(&m, Vec3::new(0.2, 0.1, 1.0), 0.6).unwrap();
        let grid = build_grid(&m, &part, GridLevel::Coarse);
        let p = partition_integrals(&b, &m, &part, &grid, &full, true).unwrap();
        assert!(p.raw.g.relative < 1e-10, "{:?}", p.raw.g);
    }

    #[test]
    fn closure_makes_sums_exact() {
        let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
        let b = build_basis(&m, "min-s").unwrap();
        let full = compute_integrals(&b, &m).unwrap();
        let part = build_partition(&m).unwrap();
        let grid = build_grid(&m, &part, GridLevel::Coarse);
        let p = partition_integrals(&b, &m, &part, &grid, &full, true).unwrap();
        assert!((&p.s[0] + &p.s[1] - &full.s).amax() < 1e-14);
        assert!((p.h(0) + p.h(1) - full.h()).amax() < 1e-14);
        let mut g = p.g_total(0);
        g.scaled_add(&p.g_total(1), 1.0);
        assert!(g.max_abs_diff(&full.eri) < 1e-14);
        assert!(p.raw.s.max_abs > 0.0);
    }

    #[test]
    fn voronoi_pair_sum_is_complete() {
        let spec = GeometrySpec::hydrogens(&[[0.0, 0.0, 0.0], [1.6, 0.0, 0.0], [0.8, 1.4, 0.0]], &["A", "B", "C"]);
        let level = GridLevel::Explicit { n_radial: 20, n_theta: 6, tau: 1e-2 };
        let (_, _, full, p) = setup(spec, "min-s", level);
        assert_eq!(p.two_electron_scheme, "grid pair sum");
        assert!(p.raw.s.relative < 1e-2);
        assert!(p.raw.g.relative < 5e-2, "{:?}", p.raw.g);
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(p.g[a][b], p.g[b][a]);
            }
        }
        let _ = full;
    }
}
