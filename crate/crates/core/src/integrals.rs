//! Full-space analytic integrals over contracted s/p Cartesian Gaussians
//! (McMurchie-Davidson Hermite expansion).
//!
//! Two-electron integrals are stored in physicist order:
//! `eri.get(i, j, k, l) = ⟨ij|kl⟩ = ∫∫ φi(1) φj(2) r12^-1 φk(1) φl(2)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::basis::{BasisFunction, BasisSet};
use crate::boys::boys_array;
use crate::error::{Error, Result};
use crate::geometry::{Molecule, Vec3};

/// Smallest admissible eigenvalue of the overlap matrix.
pub const LINEAR_DEPENDENCE_TOL: f64 = 1e-10;

/// Dense rank-4 tensor indexed `[i][j][k][l]`, used for every two-electron
/// table in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n + j) * self.n + k) * self.n + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.data[self.idx(i, j, k, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let x = self.idx(i, j, k, l);
        self.data[x] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        let x = self.idx(i, j, k, l);
        self.data[x] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn scaled_add(&mut self, other: &Tensor4, s: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// `out[p,q,r,s] = Σ c[i,p] c[j,q] c[k,r] c[l,s] t[i,j,k,l]`, one index
    /// at a time.
    pub fn transform(&self, c: &DMatrix<f64>) -> Tensor4 {
        let n = self.n;
        let m = c.ncols();
        assert_eq!(c.nrows(), n);
        // Contract the last index first, rotating it to the front each pass.
        let mut cur = self.data.clone();
        let mut dims = [n, n, n, n];
        for _ in 0..4 {
            let [a, b, d, e] = dims;
            let mut next = vec![0.0; m * a * b * d];
            for x in 0..a * b * d {
                let src = &cur[x * e..(x + 1) * e];
                for s in 0..m {
                    let mut acc = 0.0;
                    for (l, v) in src.iter().enumerate() {
                        acc += c[(l, s)] * v;
                    }
                    next[s * a * b * d + x] = acc;
                }
            }
            cur = next;
            dims = [m, a, b, d];
        }
        Tensor4 { n: m, data: cur }
    }

    /// `Σ w_i x_j y_k z_l t[i,j,k,l]` for single vectors.
    pub fn contract(&self, w: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            if w[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                if x[j] == 0.0 {
                    continue;
                }
                for k in 0..n {
                    let base = ((i * n + j) * n + k) * n;
                    let inner: f64 = z.iter().zip(&self.data[base..base + n]).map(|(a, b)| a * b).sum();
                    acc += w[i] * x[j] * y[k] * inner;
                }
            }
        }
        acc
    }
}

#[derive(Debug, Clone)]
pub struct IntegralTables {
    pub s: DMatrix<f64>,
    pub t: DMatrix<f64>,
    pub v: DMatrix<f64>,
    /// Attraction to each nucleus separately, `v = Σ v_nuclear[β]`.
    pub v_nuclear: Vec<DMatrix<f64>>,
    pub eri: Tensor4,
}

impl IntegralTables {
    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    /// Core Hamiltonian `T + V`.
    pub fn h(&self) -> DMatrix<f64> {
        &self.t + &self.v
    }

    /// Labeled text dump, one `name i j [k l] value` line per element.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let n = self.n();
        for (name, m) in [("S", &self.s), ("T", &self.t), ("V", &self.v)] {
            dump_matrix(&mut out, name, m);
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let _ = writeln!(out, "ERI {i} {j} {k} {l} {:.17e}", self.eri.get(i, j, k, l));
                    }
                }
            }
        }
        out
    }
}

pub(crate) fn dump_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let _ = writeln!(out, "{name} {i} {j} {:.17e}", m[(i, j)]);
        }
    }
}

/// Hermite expansion coefficient `E^{ij}_t` for one Cartesian axis;
/// `q = A - B` along that axis.
pub(crate) fn hermite_e(i: i32, j: i32, t: i32, q: f64, a: f64, b: f64) -> f64 {
    let p = a + b;
    let mu = a * b / p;
    if t < 0 || t > i + j {
        0.0
    } else if i == 0 && j == 0 {
        (-mu * q * q).exp()
    } else if j == 0 {
        hermite_e(i - 1, j, t - 1, q, a, b) / (2.0 * p) - mu * q / a * hermite_e(i - 1, j, t, q, a, b)
            + (t + 1) as f64 * hermite_e(i - 1, j, t + 1, q, a, b)
    } else {
        hermite_e(i, j - 1, t - 1, q, a, b) / (2.0 * p) + mu * q / b * hermite_e(i, j - 1, t, q, a, b)
            + (t + 1) as f64 * hermite_e(i, j - 1, t + 1, q, a, b)
    }
}

/// Hermite Coulomb integrals `R^0_{tuv}` for `t+u+v <= l`, stored in a
/// `(l+1)^3` cube.
pub(crate) struct HermiteR {
    l: usize,
    data: Vec<f64>,
}

impl HermiteR {
    pub(crate) fn new(l: usize, p: f64, pc: &Vec3) -> Self {
        let mut f = [0.0; 5];
        boys_array(l, p * pc.norm_squared(), &mut f);
        let d = l + 1;
        // table[n][t][u][v]
        let mut table = vec![0.0; d * d * d * d];
        let at = |n: usize, t: usize, u: usize, v: usize| ((n * d + t) * d + u) * d + v;
        let mut fac = 1.0;
        for n in 0..=l {
            table[at(n, 0, 0, 0)] = fac * f[n];
            fac *= -2.0 * p;
        }
        for total in 1..=l {
            for n in 0..=l - total {
                for t in 0..=total {
                    for u in 0..=total - t {
                        let v = total - t - u;
                        let val = if t > 0 {
                            let mut r = pc.x * table[at(n + 1, t - 1, u, v)];
                            if t > 1 {
                                r += (t - 1) as f64 * table[at(n + 1, t - 2, u, v)];
                            }
                            r
                        } else if u > 0 {
                            let mut r = pc.y * table[at(n + 1, t, u - 1, v)];
                            if u > 1 {
                                r += (u - 1) as f64 * table[at(n + 1, t, u - 2, v)];
                            }
                            r
                        } else {
                            let mut r = pc.z * table[at(n + 1, t, u, v - 1)];
                            if v > 1 {
                                r += (v - 1) as f64 * table[at(n + 1, t, u, v - 2)];
                            }
                            r
                        };
                        table[at(n, t, u, v)] = val;
                    }
                }
            }
        }
        HermiteR {
            l,
            data: table[..d * d * d].to_vec(),
        }
    }

    #[inline]
    pub(crate) fn get(&self, t: usize, u: usize, v: usize) -> f64 {
        let d = self.l + 1;
        self.data[(t * d + u) * d + v]
    }
}

fn pow_i(f: &BasisFunction) -> [i32; 3] {
    [f.powers[0] as i32, f.powers[1] as i32, f.powers[2] as i32]
}

/// Overlap of two primitives with unit coefficients.
fn prim_overlap(a: f64, la: [i32; 3], ca: &Vec3, b: f64, lb: [i32; 3], cb: &Vec3) -> f64 {
    let q = ca - cb;
    let p = a + b;
    (0..3)
        .map(|ax| hermite_e(la[ax], lb[ax], 0, q[ax], a, b))
        .product::<f64>()
        * (PI / p).powf(1.5)
}

fn prim_kinetic(a: f64, la: [i32; 3], ca: &Vec3, b: f64, lb: [i32; 3], cb: &Vec3) -> f64 {
    let q = ca - cb;
    let s1 = |ax: usize, j: i32| -> f64 {
        if j < 0 {
            0.0
        } else {
            hermite_e(la[ax], j, 0, q[ax], a, b)
        }
    };
    let p = a + b;
    let sx = [s1(0, lb[0]), s1(1, lb[1]), s1(2, lb[2])];
    let mut t = 0.0;
    for ax in 0..3 {
        let j = lb[ax];
        let d2 = (j * (j - 1)) as f64 * s1(ax, j - 2) - 2.0 * b * (2 * j + 1) as f64 * s1(ax, j)
            + 4.0 * b * b * s1(ax, j + 2);
        let mut term = d2;
        for o in 0..3 {
            if o != ax {
                term *= sx[o];
            }
        }
        t += term;
    }
    -0.5 * t * (PI / p).powf(1.5)
}

fn prim_attraction(a: f64, la: [i32; 3], ca: &Vec3, b: f64, lb: [i32; 3], cb: &Vec3, c: &Vec3) -> f64 {
    let p = a + b;
    let pp = (a * ca + b * cb) / p;
    let q = ca - cb;
    let l = (la[0] + la[1] + la[2] + lb[0] + lb[1] + lb[2]) as usize;
    let r = HermiteR::new(l, p, &(pp - c));
    let mut sum = 0.0;
    for t in 0..=(la[0] + lb[0]) {
        let ex = hermite_e(la[0], lb[0], t, q.x, a, b);
        for u in 0..=(la[1] + lb[1]) {
            let ey = hermite_e(la[1], lb[1], u, q.y, a, b);
            for v in 0..=(la[2] + lb[2]) {
                let ez = hermite_e(la[2], lb[2], v, q.z, a, b);
                sum += ex * ey * ez * r.get(t as usize, u as usize, v as usize);
            }
        }
    }
    2.0 * PI / p * sum
}

/// Hermite expansion of a primitive product along all three axes:
/// `(t, u, v, coefficient)` with the exponent and centre of the product.
struct HermitePair {
    p: f64,
    center: Vec3,
    terms: Vec<(usize, usize, usize, f64)>,
}

fn hermite_pair(a: f64, la: [i32; 3], ca: &Vec3, b: f64, lb: [i32; 3], cb: &Vec3, scale: f64) -> HermitePair {
    let p = a + b;
    let q = ca - cb;
    let mut terms = Vec::new();
    for t in 0..=(la[0] + lb[0]) {
        let ex = hermite_e(la[0], lb[0], t, q.x, a, b);
        for u in 0..=(la[1] + lb[1]) {
            let ey = hermite_e(la[1], lb[1], u, q.y, a, b);
            for v in 0..=(la[2] + lb[2]) {
                let ez = hermite_e(la[2], lb[2], v, q.z, a, b);
                terms.push((t as usize, u as usize, v as usize, scale * ex * ey * ez));
            }
        }
    }
    HermitePair {
        p,
        center: (a * ca + b * cb) / p,
        terms,
    }
}

fn contracted_pairs(fi: &BasisFunction, fj: &BasisFunction) -> Vec<HermitePair> {
    let (li, lj) = (pow_i(fi), pow_i(fj));
    let mut out = Vec::with_capacity(fi.exps.len() * fj.exps.len());
    for (&a, &ca) in fi.exps.iter().zip(&fi.coefs) {
        for (&b, &cb) in fj.exps.iter().zip(&fj.coefs) {
            out.push(hermite_pair(a, li, &fi.center, b, lj, &fj.center, ca * cb));
        }
    }
    out
}

/// Chemist-order `(ij|kl)` from precomputed Hermite pairs.
fn eri_from_pairs(bra: &[HermitePair], ket: &[HermitePair], l: usize) -> f64 {
    let mut total = 0.0;
    for x in bra {
        for y in ket {
            let alpha = x.p * y.p / (x.p + y.p);
            let r = HermiteR::new(l, alpha, &(x.center - y.center));
            let mut sum = 0.0;
            for &(t, u, v, e1) in &x.terms {
                for &(tt, uu, vv, e2) in &y.terms {
                    let sign = if (tt + uu + vv) % 2 == 0 { 1.0 } else { -1.0 };
                    sum += e1 * e2 * sign * r.get(t + tt, u + uu, v + vv);
                }
            }
            total += 2.0 * PI.powf(2.5) / (x.p * y.p * (x.p + y.p).sqrt()) * sum;
        }
    }
    total
}

fn contract2(fi: &BasisFunction, fj: &BasisFunction, prim: impl Fn(f64, [i32; 3], &Vec3, f64, [i32; 3], &Vec3) -> f64) -> f64 {
    let (li, lj) = (pow_i(fi), pow_i(fj));
    let mut s = 0.0;
    for (&a, &ca) in fi.exps.iter().zip(&fi.coefs) {
        for (&b, &cb) in fj.exps.iter().zip(&fj.coefs) {
            s += ca * cb * prim(a, li, &fi.center, b, lj, &fj.center);
        }
    }
    s
}

pub fn overlap_matrix(basis: &BasisSet) -> DMatrix<f64> {
    let n = basis.len();
    DMatrix::from_fn(n, n, |i, j| contract2(&basis.functions[i], &basis.functions[j], prim_overlap))
}

pub fn kinetic_matrix(basis: &BasisSet) -> DMatrix<f64> {
    let n = basis.len();
    let mut t = DMatrix::from_fn(n, n, |i, j| contract2(&basis.functions[i], &basis.functions[j], prim_kinetic));
    // The two operator placements agree analytically; average away rounding.
    t = (&t + t.transpose()) * 0.5;
    t
}

/// Attraction matrix `⟨i| -Z/|r-C| |j⟩` for a single point charge.
pub fn attraction_matrix(basis: &BasisSet, charge: f64, center: &Vec3) -> DMatrix<f64> {
    let n = basis.len();
    let mut v = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let x = -charge
                * contract2(&basis.functions[i], &basis.functions[j], |a, la, ca, b, lb, cb| {
                    prim_attraction(a, la, ca, b, lb, cb, center)
                });
            v[(i, j)] = x;
            v[(j, i)] = x;
        }
    }
    v
}

/// Position-moment matrix `⟨i| (r - origin)_axis |j⟩`.
pub fn dipole_matrix(basis: &BasisSet, axis: usize, origin: &Vec3) -> DMatrix<f64> {
    let n = basis.len();
    DMatrix::from_fn(n, n, |i, j| {
        contract2(&basis.functions[i], &basis.functions[j], |a, la, ca, b, lb, cb| {
            let q = ca - cb;
            let p = a + b;
            let pc = (a * ca + b * cb) / p - origin;
            let mut val = (PI / p).powf(1.5);
            for ax in 0..3 {
                let e0 = hermite_e(la[ax], lb[ax], 0, q[ax], a, b);
                val *= if ax == axis {
                    hermite_e(la[ax], lb[ax], 1, q[ax], a, b) + pc[ax] * e0
                } else {
                    e0
                };
            }
            val
        })
    })
}

/// Electron repulsion tensor in physicist order, filled using the 8-fold
/// permutational symmetry of real functions.
pub fn eri_tensor(basis: &BasisSet) -> Tensor4 {
    let n = basis.len();
    let fs = &basis.functions;
    let pairs: Vec<Vec<HermitePair>> = (0..n * n)
        .map(|x| contracted_pairs(&fs[x / n], &fs[x % n]))
        .collect();
    let mut eri = Tensor4::zeros(n);
    // Chemist (ik|jl) with ik >= jl canonical ordering.
    for i in 0..n {
        for k in 0..=i {
            let ik = i * (i + 1) / 2 + k;
            for j in 0..n {
                for l in 0..=j {
                    let jl = j * (j + 1) / 2 + l;
                    if jl > ik {
                        continue;
                    }
                    let lsum = (fs[i].l() + fs[j].l() + fs[k].l() + fs[l].l()) as usize;
                    let val = eri_from_pairs(&pairs[i * n + k], &pairs[j * n + l], lsum);
                    for (a, c) in [(i, k), (k, i)] {
                        for (b, d) in [(j, l), (l, j)] {
                            eri.set(a, b, c, d, val);
                            eri.set(b, a, d, c, val);
                        }
                    }
                }
            }
        }
    }
    eri
}

/// All full-space tables; fails if the overlap matrix is numerically singular.
pub fn compute_integrals(basis: &BasisSet, molecule: &Molecule) -> Result<IntegralTables> {
    let s = overlap_matrix(basis);
    let min_eig = SymmetricEigen::new(s.clone())
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |m, &x| m.min(x));
    if min_eig < LINEAR_DEPENDENCE_TOL {
        return Err(Error::DegenerateBasis(min_eig));
    }
    let t = kinetic_matrix(basis);
    let v_nuclear: Vec<DMatrix<f64>> = molecule
        .nuclei()
        .iter()
        .map(|nuc| attraction_matrix(basis, nuc.charge, &nuc.position))
        .collect();
    let mut v = DMatrix::zeros(basis.len(), basis.len());
    for m in &v_nuclear {
        v += m;
    }
    let eri = eri_tensor(basis);
    log::debug!("integrals: n = {}, min eig(S) = {min_eig:.3e}", basis.len());
    Ok(IntegralTables {
        s,
        t,
        v,
        v_nuclear,
        eri,
    })
}
