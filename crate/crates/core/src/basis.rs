//! Contracted Cartesian Gaussian basis sets (s and p shells) and their
//! pointwise evaluation.
//!
//! The built-in registry (hydrogen only):
//!
//! | name      | functions per H | contents                                        |
//! |-----------|-----------------|-------------------------------------------------|
//! | `min-s`   | 1               | STO-3G 1s, Slater exponent 1.24                 |
//! | `sp`      | 4               | STO-3G 1s (exponent 1.0) + STO-3G 2p (exponent 0.5) |
//! | `split-s` | 2               | 6-31G 1s (3-1 split)                            |
//!
//! The `sp` set approximates the exact hydrogenic 1s and 2p orbitals; its p
//! shell is the 2sp STO-3G contraction scaled to a Slater exponent of 1/2.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Molecule, Vec3};

/// Cartesian angular momentum exponents `(lx, ly, lz)`.
pub type Powers = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub center: Vec3,
    pub l: u8,
    pub exponents: Vec<f64>,
    /// Contraction coefficients as tabulated (multiply normalized primitives).
    pub coefficients: Vec<f64>,
    /// Index of the nucleus the shell sits on.
    pub atom: usize,
}

/// One contracted Cartesian function. `coefs` already include primitive and
/// contraction normalization, so `phi(r) = sum_k coefs[k] * poly(r) * exp(-exps[k] |r-c|^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunction {
    pub center: Vec3,
    pub powers: Powers,
    pub exps: Vec<f64>,
    pub coefs: Vec<f64>,
    pub shell: usize,
    pub atom: usize,
}

impl BasisFunction {
    pub fn l(&self) -> u8 {
        self.powers.iter().sum()
    }

    /// Axis index of a p function, `None` for s.
    pub fn p_axis(&self) -> Option<usize> {
        self.powers.iter().position(|&p| p == 1)
    }

    pub fn value(&self, r: &Vec3) -> f64 {
        let d = r - self.center;
        let r2 = d.norm_squared();
        let poly = match self.p_axis() {
            Some(ax) => d[ax],
            None => 1.0,
        };
        poly * self
            .exps
            .iter()
            .zip(&self.coefs)
            .map(|(a, c)| c * (-a * r2).exp())
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    pub name: String,
    pub shells: Vec<Shell>,
    pub functions: Vec<BasisFunction>,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Functions whose shell sits on nucleus `atom`.
    pub fn functions_on_atom(&self, atom: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.functions[i].atom == atom)
            .collect()
    }

    /// Index of the first function on `atom` with the given powers.
    pub fn find(&self, atom: usize, powers: Powers) -> Option<usize> {
        self.functions
            .iter()
            .position(|f| f.atom == atom && f.powers == powers)
    }
}

struct ShellTemplate {
    l: u8,
    exponents: &'static [f64],
    coefficients: &'static [f64],
}

const STO3G_1S_COEF: [f64; 3] = [0.154_328_967_3, 0.535_328_142_3, 0.444_634_542_2];
const STO3G_2P_COEF: [f64; 3] = [0.155_916_275_0, 0.607_683_718_6, 0.391_957_393_1];

// STO-3G 1s for zeta = 1.24 and zeta = 1.0.
const H_1S_124: [f64; 3] = [3.425_250_914, 0.623_913_729_8, 0.168_855_404_0];
const H_1S_100: [f64; 3] = [2.227_660_584, 0.405_771_156_2, 0.109_817_510_4];
// STO-3G 2p scaled to zeta = 0.5 (zeta = 1 exponents times 0.25).
const H_2P_050: [f64; 3] = [0.248_550_682_8, 0.057_757_833_25, 0.018_784_640_0];

const H_631G_INNER: [f64; 3] = [18.731_137_0, 2.825_393_7, 0.640_121_7];
const H_631G_INNER_COEF: [f64; 3] = [0.033_494_60, 0.234_726_95, 0.813_757_33];

fn registry(name: &str) -> Option<Vec<ShellTemplate>> {
    let key = name.to_ascii_lowercase();
    match key.as_str() {
        "min-s" | "sto-3g" => Some(vec![ShellTemplate {
            l: 0,
            exponents: &H_1S_124,
            coefficients: &STO3G_1S_COEF,
        }]),
        "sp" => Some(vec![
            ShellTemplate {
                l: 0,
                exponents: &H_1S_100,
                coefficients: &STO3G_1S_COEF,
            },
            ShellTemplate {
                l: 1,
                exponents: &H_2P_050,
                coefficients: &STO3G_2P_COEF,
            },
        ]),
        "split-s" | "6-31g" => Some(vec![
            ShellTemplate {
                l: 0,
                exponents: &H_631G_INNER,
                coefficients: &H_631G_INNER_COEF,
            },
            ShellTemplate {
                l: 0,
                exponents: &[0.161_277_8],
                coefficients: &[1.0],
            },
        ]),
        _ => None,
    }
}

/// Names accepted by [`build_basis`].
pub const BASIS_NAMES: [&str; 3] = ["min-s", "sp", "split-s"];

/// Norm of a primitive Cartesian Gaussian with `l <= 1`.
pub fn primitive_norm(alpha: f64, l: u8) -> f64 {
    (2.0 * alpha / PI).powf(0.75) * (4.0 * alpha).powf(0.5 * l as f64)
}

fn contracted_self_overlap(exps: &[f64], coefs: &[f64], l: u8) -> f64 {
    let mut s = 0.0;
    for (a, ca) in exps.iter().zip(coefs) {
        for (b, cb) in exps.iter().zip(coefs) {
            let p = a + b;
            s += ca * cb * (PI / p).powf(1.5) * (0.5 / p).powi(l as i32);
        }
    }
    s
}

fn cartesian_components(l: u8) -> Vec<Powers> {
    match l {
        0 => vec![[0, 0, 0]],
        1 => vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        _ => unreachable!("only s and p shells are supported"),
    }
}

/// Places the registry shells of `basis_name` on every nucleus.
pub fn build_basis(molecule: &Molecule, basis_name: &str) -> Result<BasisSet> {
    let templates = registry(basis_name).ok_or_else(|| Error::UnknownBasis(basis_name.into()))?;
    let mut shells = Vec::new();
    let mut functions = Vec::new();
    for (atom, nucleus) in molecule.nuclei().iter().enumerate() {
        for t in &templates {
            let shell_index = shells.len();
            shells.push(Shell {
                center: nucleus.position,
                l: t.l,
                exponents: t.exponents.to_vec(),
                coefficients: t.coefficients.to_vec(),
                atom,
            });
            let mut coefs: Vec<f64> = t
                .exponents
                .iter()
                .zip(t.coefficients)
                .map(|(&a, &c)| c * primitive_norm(a, t.l))
                .collect();
            let norm = contracted_self_overlap(t.exponents, &coefs, t.l).sqrt();
            coefs.iter_mut().for_each(|c| *c /= norm);
            for powers in cartesian_components(t.l) {
                functions.push(BasisFunction {
                    center: nucleus.position,
                    powers,
                    exps: t.exponents.to_vec(),
                    coefs: coefs.clone(),
                    shell: shell_index,
                    atom,
                });
            }
        }
    }
    Ok(BasisSet {
        name: basis_name.to_ascii_lowercase(),
        shells,
        functions,
    })
}

/// Values, gradients and Laplacians of every basis function at a set of
/// points, stored point-major (`index = point * n_functions + function`).
#[derive(Debug, Clone)]
pub struct BasisTable {
    pub n_points: usize,
    pub n_functions: usize,
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 3]>,
    pub laplacians: Vec<f64>,
}

impl BasisTable {
    #[inline]
    pub fn value(&self, point: usize, function: usize) -> f64 {
        self.values[point * self.n_functions + function]
    }

    #[inline]
    pub fn gradient(&self, point: usize, function: usize) -> [f64; 3] {
        self.gradients[point * self.n_functions + function]
    }

    #[inline]
    pub fn laplacian(&self, point: usize, function: usize) -> f64 {
        self.laplacians[point * self.n_functions + function]
    }

    /// Row of values at one point.
    pub fn values_at(&self, point: usize) -> &[f64] {
        &self.values[point * self.n_functions..(point + 1) * self.n_functions]
    }

    pub fn laplacians_at(&self, point: usize) -> &[f64] {
        &self.laplacians[point * self.n_functions..(point + 1) * self.n_functions]
    }
}

/// `(f, f', f'')` of `x^a exp(-alpha x^2)` without the exponential factor.
#[inline]
fn axis_factor(a: u8, alpha: f64, x: f64) -> (f64, f64, f64) {
    match a {
        0 => (1.0, -2.0 * alpha * x, 4.0 * alpha * alpha * x * x - 2.0 * alpha),
        1 => (
            x,
            1.0 - 2.0 * alpha * x * x,
            4.0 * alpha * alpha * x * x * x - 6.0 * alpha * x,
        ),
        _ => unreachable!("only s and p shells are supported"),
    }
}

fn eval_function(f: &BasisFunction, r: &Vec3) -> (f64, [f64; 3], f64) {
    let d = r - f.center;
    let r2 = d.norm_squared();
    let mut val = 0.0;
    let mut grad = [0.0; 3];
    let mut lap = 0.0;
    for (&alpha, &c) in f.exps.iter().zip(&f.coefs) {
        let e = c * (-alpha * r2).exp();
        if e == 0.0 {
            continue;
        }
        let fx = axis_factor(f.powers[0], alpha, d.x);
        let fy = axis_factor(f.powers[1], alpha, d.y);
        let fz = axis_factor(f.powers[2], alpha, d.z);
        val += e * fx.0 * fy.0 * fz.0;
        grad[0] += e * fx.1 * fy.0 * fz.0;
        grad[1] += e * fx.0 * fy.1 * fz.0;
        grad[2] += e * fx.0 * fy.0 * fz.1;
        lap += e * (fx.2 * fy.0 * fz.0 + fx.0 * fy.2 * fz.0 + fx.0 * fy.0 * fz.2);
    }
    (val, grad, lap)
}

/// Evaluates every basis function at every point with analytic derivatives.
pub fn eval_basis(basis: &BasisSet, points: &[Vec3]) -> BasisTable {
    let n = basis.len();
    let mut values = vec![0.0; points.len() * n];
    let mut gradients = vec![[0.0; 3]; points.len() * n];
    let mut laplacians = vec![0.0; points.len() * n];
    for (p, r) in points.iter().enumerate() {
        for (i, f) in basis.functions.iter().enumerate() {
            let (v, g, l) = eval_function(f, r);
            values[p * n + i] = v;
            gradients[p * n + i] = g;
            laplacians[p * n + i] = l;
        }
    }
    BasisTable {
        n_points: points.len(),
        n_functions: n,
        values,
        gradients,
        laplacians,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_molecule, GeometrySpec};

    fn h_atom() -> Molecule {
        build_molecule(&GeometrySpec::hydrogens(&[[0.0; 3]], &["A"])).unwrap()
    }

    #[test]
    fn minimal_set_on_one_atom() {
        let b = build_basis(&h_atom(), "min-s").unwrap();
        assert_eq!(b.len(), 1);
        let f = &b.functions[0];
        let s = contracted_self_overlap(&f.exps, &f.coefs, 0);
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sp_set_expands_shells() {
        let b = build_basis(&h_atom(), "sp").unwrap();
        assert_eq!(b.len(), 4);
        assert_eq!(b.functions[0].powers, [0, 0, 0]);
        assert_eq!(b.functions[3].powers, [0, 0, 1]);
        for f in &b.functions {
            let s = contracted_self_overlap(&f.exps, &f.coefs, f.l());
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn h2_minimal_has_two_functions() {
        let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
        assert_eq!(build_basis(&m, "min-s").unwrap().len(), 2);
        assert_eq!(build_basis(&m, "split-s").unwrap().len(), 4);
        assert!(matches!(build_basis(&m, "cc-pvqz"), Err(Error::UnknownBasis(_))));
    }

    #[test]
    fn s_function_at_center() {
        let b = build_basis(&h_atom(), "min-s").unwrap();
        let t = eval_basis(&b, &[Vec3::zeros()]);
        let expected: f64 = b.functions[0].coefs.iter().sum();
        assert!((t.value(0, 0) - expected).abs() < 1e-15);
        assert_eq!(t.gradient(0, 0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn pz_is_odd_in_z() {
        let b = build_basis(&h_atom(), "sp").unwrap();
        let pz = b.find(0, [0, 0, 1]).unwrap();
        for z in [0.1, 0.7, 2.5, 9.0] {
            let t = eval_basis(&b, &[Vec3::new(0.0, 0.0, z), Vec3::new(0.0, 0.0, -z)]);
            assert!((t.value(0, pz) + t.value(1, pz)).abs() < 1e-16);
            assert!(t.value(0, pz) > 0.0);
        }
    }

    // Fourth-order central differences; h = 1e-3 keeps rounding below 1e-10.
    fn finite_difference_check(b: &BasisSet, r: Vec3) {
        let h = 1e-3;
        let t0 = eval_basis(b, &[r]);
        let shifted = |ax: usize, k: f64| {
            let mut e = Vec3::zeros();
            e[ax] = k * h;
            eval_basis(b, &[r + e])
        };
        for i in 0..b.len() {
            let mut lap_fd = 0.0;
            for ax in 0..3 {
                let v: Vec<f64> = [-2.0, -1.0, 1.0, 2.0]
                    .iter()
                    .map(|&k| shifted(ax, k).value(0, i))
                    .collect();
                let g_fd = (v[0] - 8.0 * v[1] + 8.0 * v[2] - v[3]) / (12.0 * h);
                let g = t0.gradient(0, i)[ax];
                assert!(
                    (g - g_fd).abs() <= 1e-6 * g.abs().max(1e-3),
                    "gradient f{i} axis {ax}: {g} vs {g_fd}"
                );
                lap_fd += (-v[0] + 16.0 * v[1] - 30.0 * t0.value(0, i) + 16.0 * v[2] - v[3])
                    / (12.0 * h * h);
            }
            let lap = t0.laplacian(0, i);
            assert!(
                (lap - lap_fd).abs() <= 1e-6 * lap.abs().max(1e-2),
                "laplacian f{i}: {lap} vs {lap_fd}"
            );
        }
    }

    #[test]
    fn single_primitive_laplacian_step_1e4() {
        let mut b = build_basis(&h_atom(), "min-s").unwrap();
        b.functions[0].exps = vec![0.9];
        b.functions[0].coefs = vec![primitive_norm(0.9, 0)];
        let r = Vec3::new(0.4, -0.3, 0.8);
        let h = 1e-4;
        let mut lap_fd = -6.0 * eval_basis(&b, &[r]).value(0, 0);
        for ax in 0..3 {
            let mut e = Vec3::zeros();
            e[ax] = h;
            lap_fd += eval_basis(&b, &[r + e]).value(0, 0) + eval_basis(&b, &[r - e]).value(0, 0);
        }
        lap_fd /= h * h;
        let lap = eval_basis(&b, &[r]).laplacian(0, 0);
        assert!((lap - lap_fd).abs() <= 1e-6 * lap.abs());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
        let b = build_basis(&m, "sp").unwrap();
        for r in [
            Vec3::new(0.3, -0.2, 0.5),
            Vec3::new(1.1, 0.4, 2.0),
            Vec3::new(-0.6, 0.9, -0.8),
        ] {
            finite_difference_check(&b, r);
        }
    }

    proptest::proptest! {
        #[test]
        fn derivatives_match_fd_random(x in -2.0f64..2.0, y in -2.0f64..2.0, z in -1.5f64..3.0) {
            let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
            let b = build_basis(&m, "sp").unwrap();
            finite_difference_check(&b, Vec3::new(x, y, z));
        }
    }
}
