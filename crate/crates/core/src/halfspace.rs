//! Electron-repulsion integrals with each electron confined to one side of
//! the plane `z = c`.
//!
//! `1/r12 = (2/√π) ∫ exp(-t² r12²) dt` factorizes the six-dimensional
//! integral into three axis factors at fixed t. The two in-plane axes are
//! full-line Gaussian moments; the normal axis gives moments of a bivariate
//! normal truncated to a quadrant, seeded by the bivariate normal CDF and
//! raised by integration-by-parts recurrences. The t integral is done with
//! adaptive Gauss-Kronrod after the map `t² = ρ u²/(1-u²)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::basis::BasisSet;
use crate::geometry::Vec3;
use crate::integrals::Tensor4;
use crate::quadrature::integrate_gk;

/// Sides of the plane: `LO` is `z < c` (region 0), `HI` is `z > c`.
pub const LO: usize = 0;
pub const HI: usize = 1;

/// Quadrant index for (electron-1 side, electron-2 side).
pub fn quadrant(side1: usize, side2: usize) -> usize {
    2 * side1 + side2
}

// Densities with sqrt(p)*|P_z - c| beyond this are treated as one-sided.
const SIDE_SCREEN: f64 = 8.0;
const PRIM_SCREEN: f64 = 1e-17;

fn phid(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `P(X > h, Y > k)` for standard bivariate normal with correlation `r`
/// (Genz's double-precision algorithm).
pub fn bvnu(h: f64, k: f64, r: f64) -> f64 {
    if h == f64::INFINITY || k == f64::INFINITY {
        return 0.0;
    }
    if h == f64::NEG_INFINITY {
        return if k == f64::NEG_INFINITY { 1.0 } else { phid(-k) };
    }
    if k == f64::NEG_INFINITY {
        return phid(-h);
    }
    if r == 0.0 {
        return phid(-h) * phid(-k);
    }
    const W6: [f64; 3] = [0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4];
    const X6: [f64; 3] = [0.932_469_514_203_152_2, 0.661_209_386_466_264_7, 0.238_619_186_083_197];
    const W12: [f64; 6] = [
        0.047_175_336_386_511_77,
        0.106_939_325_995_318_3,
        0.160_078_328_543_346_4,
        0.203_167_426_723_065_9,
        0.233_492_536_538_354_7,
        0.249_147_045_813_402_9,
    ];
    const X12: [f64; 6] = [
        0.981_560_634_246_719_1,
        0.904_117_256_370_475,
        0.769_902_674_194_305,
        0.587_317_954_286_617_1,
        0.367_831_498_998_180_2,
        0.125_233_408_511_469_2,
    ];
    const W20: [f64; 10] = [
        0.017_614_007_139_152_12,
        0.040_601_429_800_386_94,
        0.062_672_048_334_109_06,
        0.083_276_741_576_704_75,
        0.101_930_119_817_240_4,
        0.118_194_531_961_518_4,
        0.131_688_638_449_176_6,
        0.142_096_109_318_382_1,
        0.149_172_986_472_603_7,
        0.152_753_387_130_725_9,
    ];
    const X20: [f64; 10] = [
        0.993_128_599_185_094_9,
        0.963_971_927_277_913_8,
        0.912_234_428_251_325_9,
        0.839_116_971_822_218_8,
        0.746_331_906_460_150_8,
        0.636_053_680_726_515,
        0.510_867_001_950_827_1,
        0.373_706_088_715_419_6,
        0.227_785_851_141_645_1,
        0.076_526_521_133_497_33,
    ];
    let (w, x): (&[f64], &[f64]) = if r.abs() < 0.3 {
        (&W6, &X6)
    } else if r.abs() < 0.75 {
        (&W12, &X12)
    } else {
        (&W20, &X20)
    };
    let tp = 2.0 * PI;
    let (h, mut k) = (h, k);
    let mut hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 0.925 {
        let hs = 0.5 * (h * h + k * k);
        let asr = 0.5 * r.asin();
        for i in 0..w.len() {
            for sgn in [-1.0, 1.0] {
                let sn = (asr * (1.0 + sgn * x[i])).sin();
                bvn += w[i] * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        return (bvn * asr / tp + phid(-h) * phid(-k)).clamp(0.0, 1.0);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    if r.abs() < 1.0 {
        let as_ = 1.0 - r * r;
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 80.0;
        let asr = -0.5 * (bs / as_ + hk);
        if asr > -100.0 {
            bvn = a * asr.exp() * (1.0 - c * (bs - as_) * (1.0 - d * bs) / 3.0 + c * d * as_ * as_);
        }
        if hk > -100.0 {
            let b = bs.sqrt();
            let sp = tp.sqrt() * phid(-b / a);
            bvn -= (-0.5 * hk).exp() * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
        }
        a *= 0.5;
        let mut sum = 0.0;
        for i in 0..w.len() {
            for sgn in [-1.0, 1.0] {
                let xs = (a * (1.0 + sgn * x[i])).powi(2);
                let asr = -0.5 * (bs / xs + hk);
                if asr > -100.0 {
                    let sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                    let rs = (1.0 - xs).sqrt();
                    let ep = (-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))).exp() / rs;
                    sum += w[i] * asr.exp() * (sp - ep);
                }
            }
        }
        bvn = (a * sum - bvn) / tp;
    }
    if r > 0.0 {
        bvn += phid(-h.max(k));
    } else if h >= k {
        bvn = -bvn;
    } else {
        let l = if h < 0.0 { phid(k) - phid(h) } else { phid(-h) - phid(-k) };
        bvn = l - bvn;
    }
    bvn.clamp(0.0, 1.0)
}

type Table = [[f64; 3]; 3];

/// `T_k = ∫_D v^k exp(-α (v-m)²) dv` for k = 0..=2, D = (-∞,0) for `side = LO`
/// and (0,∞) for `HI`.
fn truncated_moments(alpha: f64, m: f64, side: usize) -> [f64; 3] {
    let sigma = if side == LO { 1.0 } else { -1.0 };
    let t0 = 0.5 * (PI / alpha).sqrt() * libm::erfc(sigma * alpha.sqrt() * m);
    let edge = (-alpha * m * m).exp();
    let t1 = m * t0 - sigma * edge / (2.0 * alpha);
    let t2 = m * t1 + t0 / (2.0 * alpha);
    [t0, t1, t2]
}

/// Raises `g[0][0]` to all `g[a][b]` with `a, b <= 2` for the exponent
/// `p(u-P)² + q(v-Q)² + s(u-v)²`. `bu[b]` and `bv[a]` are the boundary
/// moments (already multiplied by their sign), zero for full-line axes.
fn raise(g: &mut Table, p: f64, pp: f64, q: f64, qq: f64, s: f64, bu: &[f64; 3], bv: &[f64; 3]) {
    let det = 4.0 * (p * q + s * (p + q));
    let (m11, m22, m12) = (2.0 * (q + s), 2.0 * (p + s), 2.0 * s);
    let step = |g: &Table, a: usize, b: usize| -> (f64, f64) {
        let mut r1 = 2.0 * p * pp * g[a][b];
        if a > 0 {
            r1 += a as f64 * g[a - 1][b];
        } else {
            r1 -= bu[b];
        }
        let mut r2 = 2.0 * q * qq * g[a][b];
        if b > 0 {
            r2 += b as f64 * g[a][b - 1];
        } else {
            r2 -= bv[a];
        }
        ((m11 * r1 + m12 * r2) / det, (m12 * r1 + m22 * r2) / det)
    };
    let (x, y) = step(g, 0, 0);
    g[1][0] = x;
    g[0][1] = y;
    let (x, y) = step(g, 1, 0);
    g[2][0] = x;
    g[1][1] = y;
    let (_, y) = step(g, 0, 1);
    g[0][2] = y;
    let (x, y) = step(g, 1, 1);
    g[2][1] = x;
    g[1][2] = y;
    let (x, _) = step(g, 1, 2);
    g[2][2] = x;
}

fn full_line(p: f64, pp: f64, q: f64, qq: f64, s: f64) -> Table {
    let det = p * q + s * (p + q);
    let mut g = [[0.0; 3]; 3];
    g[0][0] = PI / det.sqrt() * (-(p * q * s / det) * (pp - qq) * (pp - qq)).exp();
    raise(&mut g, p, pp, q, qq, s, &[0.0; 3], &[0.0; 3]);
    g
}

/// Quadrant tables for all four side combinations (plane at 0).
fn quadrants(p: f64, pp: f64, q: f64, qq: f64, s: f64) -> [Table; 4] {
    let det = p * q + s * (p + q);
    let full = PI / det.sqrt() * (-(p * q * s / det) * (pp - qq) * (pp - qq)).exp();
    // Mean and covariance of the normalized bivariate Gaussian.
    let mu = (p * pp * (q + s) + s * q * qq) / det;
    let mv = (q * qq * (p + s) + s * p * pp) / det;
    let su = ((q + s) / (2.0 * det)).sqrt();
    let sv = ((p + s) / (2.0 * det)).sqrt();
    let rho = s / ((q + s) * (p + s)).sqrt();
    let pu_lo = phid(-mu / su);
    let pv_lo = phid(-mv / sv);
    let p_ll = bvnu(mu / su, mv / sv, rho);
    let probs = [
        p_ll,
        (pu_lo - p_ll).max(0.0),
        (pv_lo - p_ll).max(0.0),
        (1.0 - pu_lo - pv_lo + p_ll).max(0.0),
    ];
    // Boundary moments: u = 0 slice integrated over v, and v = 0 over u.
    let cu = (p * pp * pp + q * s * qq * qq / (q + s)).min(700.0);
    let cv = (q * qq * qq + p * s * pp * pp / (p + s)).min(700.0);
    let eu = (-cu).exp();
    let ev = (-cv).exp();
    let bu_side = [
        truncated_moments(q + s, q * qq / (q + s), LO),
        truncated_moments(q + s, q * qq / (q + s), HI),
    ];
    let bv_side = [
        truncated_moments(p + s, p * pp / (p + s), LO),
        truncated_moments(p + s, p * pp / (p + s), HI),
    ];
    let mut out = [[[0.0; 3]; 3]; 4];
    for s1 in [LO, HI] {
        let sig1 = if s1 == LO { 1.0 } else { -1.0 };
        for s2 in [LO, HI] {
            let sig2 = if s2 == LO { 1.0 } else { -1.0 };
            let qd = quadrant(s1, s2);
            let bu = bu_side[s2].map(|t| sig1 * eu * t);
            let bv = bv_side[s1].map(|t| sig2 * ev * t);
            out[qd][0][0] = full * probs[qd];
            raise(&mut out[qd], p, pp, q, qq, s, &bu, &bv);
        }
    }
    out
}

/// Coefficients of `(u - a)^e (u - b)^f` in powers of u, `e, f <= 1`.
fn poly2(a: f64, e: u8, b: f64, f: u8) -> [f64; 3] {
    match (e, f) {
        (0, 0) => [1.0, 0.0, 0.0],
        (1, 0) => [-a, 1.0, 0.0],
        (0, 1) => [-b, 1.0, 0.0],
        _ => [a * b, -(a + b), 1.0],
    }
}

fn contract(c1: &[f64; 3], c2: &[f64; 3], g: &Table) -> f64 {
    let mut s = 0.0;
    for a in 0..3 {
        if c1[a] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for b in 0..3 {
            row += c2[b] * g[a][b];
        }
        s += c1[a] * row;
    }
    s
}

/// One-sidedness of a contracted density: `Some(side)` when every primitive
/// product lies well inside one half-space.
fn density_side(basis: &BasisSet, i: usize, k: usize, c: f64) -> Option<usize> {
    let (fi, fk) = (&basis.functions[i], &basis.functions[k]);
    let mut side = None;
    for &a in &fi.exps {
        for &b in &fk.exps {
            let p = a + b;
            let pz = (a * fi.center.z + b * fk.center.z) / p;
            let x = p.sqrt() * (pz - c);
            let this = if x < -SIDE_SCREEN {
                LO
            } else if x > SIDE_SCREEN {
                HI
            } else {
                return None;
            };
            if side.is_some_and(|s| s != this) {
                return None;
            }
            side = Some(this);
        }
    }
    side
}

/// Quadrant-restricted repulsion tensors for a basis whose partition plane
/// is `z = c`. Element `[quadrant(s1, s2)].get(i, j, k, l)` is
/// `∫_{s1}∫_{s2} φi(1)φk(1) r12^-1 φj(2)φl(2)`. `full` is the unrestricted
/// tensor, used for densities that lie entirely on one side.
pub fn plane_eri(basis: &BasisSet, c: f64, full: &Tensor4) -> [Tensor4; 4] {
    let n = basis.len();
    let nsh = basis.shells.len();
    let shell_fns: Vec<Vec<usize>> = (0..nsh)
        .map(|s| (0..n).filter(|&f| basis.functions[f].shell == s).collect())
        .collect();
    let mut out = [
        Tensor4::zeros(n),
        Tensor4::zeros(n),
        Tensor4::zeros(n),
        Tensor4::zeros(n),
    ];
    let sides: Vec<Option<usize>> = (0..n * n).map(|x| density_side(basis, x / n, x % n, c)).collect();
    let pairs: Vec<(usize, usize)> = (0..nsh).flat_map(|a| (0..=a).map(move |b| (a, b))).collect();
    let mut budget = Budget::default();
    for (x, &(si, sk)) in pairs.iter().enumerate() {
        for &(sj, sl) in &pairs[..=x] {
            let fi = &shell_fns[si];
            let fk = &shell_fns[sk];
            let fj = &shell_fns[sj];
            let fl = &shell_fns[sl];
            let screened = fi.iter().all(|&i| {
                fk.iter().all(|&k| {
                    sides[i * n + k].is_some()
                        && fj.iter().all(|&j| fl.iter().all(|&l| sides[j * n + l].is_some()))
                })
            });
            let mut block = vec![[0.0; 4]; fi.len() * fj.len() * fk.len() * fl.len()];
            let bidx = |a: usize, b: usize, cc: usize, d: usize| ((a * fj.len() + b) * fk.len() + cc) * fl.len() + d;
            if screened {
                for (a, &i) in fi.iter().enumerate() {
                    for (b, &j) in fj.iter().enumerate() {
                        for (cc, &k) in fk.iter().enumerate() {
                            for (d, &l) in fl.iter().enumerate() {
                                let qd = quadrant(sides[i * n + k].unwrap(), sides[j * n + l].unwrap());
                                block[bidx(a, b, cc, d)][qd] = full.get(i, j, k, l);
                            }
                        }
                    }
                }
            } else {
                shell_quartet(basis, [fi, fj, fk, fl], c, &mut block, &mut budget);
            }
            scatter(&mut out, &block, [fi, fj, fk, fl]);
        }
    }
    if budget.unconverged > 0 {
        log::debug!(
            "half-space ERIs: {} of {} primitive quadratures stopped at the subdivision limit (largest error estimate {:.2e})",
            budget.unconverged,
            budget.total,
            budget.worst_error
        );
    }
    out
}

#[derive(Default)]
struct Budget {
    total: usize,
    unconverged: usize,
    worst_error: f64,
}

/// Writes a computed block and all its permutational images.
fn scatter(out: &mut [Tensor4; 4], block: &[[f64; 4]], f: [&Vec<usize>; 4]) {
    let [fi, fj, fk, fl] = f;
    let mut x = 0;
    for &i in fi {
        for &j in fj {
            for &k in fk {
                for &l in fl {
                    let v = block[x];
                    x += 1;
                    for s1 in [LO, HI] {
                        for s2 in [LO, HI] {
                            let a = v[quadrant(s1, s2)];
                            let t = &mut out[quadrant(s1, s2)];
                            t.set(i, j, k, l, a);
                            t.set(k, j, i, l, a);
                            t.set(i, l, k, j, a);
                            t.set(k, l, i, j, a);
                            // Electron exchange swaps the side labels.
                            let t = &mut out[quadrant(s2, s1)];
                            t.set(j, i, l, k, a);
                            t.set(j, k, l, i, a);
                            t.set(l, i, j, k, a);
                            t.set(l, k, j, i, a);
                        }
                    }
                }
            }
        }
    }
}

fn shell_quartet(basis: &BasisSet, f: [&Vec<usize>; 4], c: f64, block: &mut [[f64; 4]], budget: &mut Budget) {
    let [fi, fj, fk, fl] = f;
    let bf = &basis.functions;
    let (si, sj, sk, sl) = (&bf[fi[0]], &bf[fj[0]], &bf[fk[0]], &bf[fl[0]]);
    let combos: Vec<[usize; 4]> = fi
        .iter()
        .flat_map(|&i| fj.iter().flat_map(move |&j| fk.iter().flat_map(move |&k| fl.iter().map(move |&l| [i, j, k, l]))))
        .collect();
    let dim = combos.len() * 4;
    for (ai, &a) in si.exps.iter().enumerate() {
        for (bi, &b) in sk.exps.iter().enumerate() {
            let p = a + b;
            let pc: Vec3 = (a * si.center + b * sk.center) / p;
            let k1 = (-a * b / p * (si.center - sk.center).norm_squared()).exp();
            for (ci, &cj) in sj.exps.iter().enumerate() {
                for (di, &dl) in sl.exps.iter().enumerate() {
                    let q = cj + dl;
                    let qc: Vec3 = (cj * sj.center + dl * sl.center) / q;
                    let k2 = (-cj * dl / q * (sj.center - sl.center).norm_squared()).exp();
                    let scale = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt());
                    if k1 * k2 * scale < PRIM_SCREEN {
                        continue;
                    }
                    let origin = Vec3::new(pc.x, pc.y, c);
                    // Per-axis polynomial coefficients for each combo.
                    let polys: Vec<[[[f64; 3]; 3]; 2]> = combos
                        .iter()
                        .map(|&[i, j, k, l]| {
                            let mut e1 = [[0.0; 3]; 3];
                            let mut e2 = [[0.0; 3]; 3];
                            for ax in 0..3 {
                                let o = origin[ax];
                                e1[ax] = poly2(bf[i].center[ax] - o, bf[i].powers[ax], bf[k].center[ax] - o, bf[k].powers[ax]);
                                e2[ax] = poly2(bf[j].center[ax] - o, bf[j].powers[ax], bf[l].center[ax] - o, bf[l].powers[ax]);
                            }
                            [e1, e2]
                        })
                        .collect();
                    let rho = p * q / (p + q);
                    let ps = [pc.x - origin.x, pc.y - origin.y, pc.z - c];
                    let qs = [qc.x - origin.x, qc.y - origin.y, qc.z - c];
                    let integrand = |u: f64, outv: &mut [f64]| {
                        let omu = 1.0 - u * u;
                        let s = rho * u * u / omu;
                        let jac = 2.0 / PI.sqrt() * rho.sqrt() / (omu * omu.sqrt());
                        let gx = full_line(p, ps[0], q, qs[0], s);
                        let gy = full_line(p, ps[1], q, qs[1], s);
                        let gz = quadrants(p, ps[2], q, qs[2], s);
                        for (x, pl) in polys.iter().enumerate() {
                            let [e1, e2] = pl;
                            let xy = contract(&e1[0], &e2[0], &gx) * contract(&e1[1], &e2[1], &gy) * jac;
                            for qd in 0..4 {
                                outv[4 * x + qd] = xy * contract(&e1[2], &e2[2], &gz[qd]);
                            }
                        }
                    };
                    let tol = 1e-15 * scale;
                    let r = integrate_gk(integrand, 0.0, 1.0, &[], dim, tol, 1e-12);
                    budget.total += 1;
                    if !r.converged {
                        budget.unconverged += 1;
                        budget.worst_error = budget.worst_error.max(r.error);
                    }
                    let v = r.values;
                    let w = k1 * k2 * si.coefs[ai] * sk.coefs[bi] * sj.coefs[ci] * sl.coefs[di];
                    for x in 0..combos.len() {
                        let [i, j, k, l] = combos[x];
                        let bidx = ((fi.iter().position(|&y| y == i).unwrap() * fj.len()
                            + fj.iter().position(|&y| y == j).unwrap())
                            * fk.len()
                            + fk.iter().position(|&y| y == k).unwrap())
                            * fl.len()
                            + fl.iter().position(|&y| y == l).unwrap();
                        for qd in 0..4 {
                            block[bidx][qd] += w * v[4 * x + qd];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::geometry::{build_molecule, GeometrySpec};
    use crate::integrals::eri_tensor;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn bvn_known_values() {
        // Orthant probability P(X>0,Y>0) = 1/4 + asin(r)/(2π).
        for r in [-0.95, -0.5, 0.0, 0.2, 0.6, 0.8, 0.93, 0.99] {
            let exact = 0.25 + f64::asin(r) / (2.0 * PI);
            assert!((bvnu(0.0, 0.0, r) - exact).abs() < 1e-15, "r={r}");
        }
        // Independence and marginal limits.
        assert!((bvnu(0.3, -1.1, 0.0) - phid(-0.3) * phid(1.1)).abs() < 1e-16);
        assert!((bvnu(0.7, -40.0, 0.5) - phid(-0.7)).abs() < 1e-15);
    }

    #[test]
    fn bvn_against_quadrature() {
        // P(X>h, Y>k) = ∫_h^∞ φ(x) Φ((rx - k)/√(1-r²)) dx.
        let (gx, gw) = gauss_legendre(200);
        for &(h, k, r) in &[(0.3, -0.4, 0.5), (-1.2, 0.8, -0.7), (1.5, 1.1, 0.96), (-0.2, -2.0, -0.97), (2.0, 0.5, 0.3)] {
            let hi = 12.0;
            let mut s = 0.0;
            for (x0, w0) in gx.iter().zip(&gw) {
                let x = h + 0.5 * (hi - h) * (1.0 + x0);
                let dens = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
                s += 0.5 * (hi - h) * w0 * dens * phid((r * x - k) / (1.0 - r * r).sqrt());
            }
            assert!((bvnu(h, k, r) - s).abs() < 1e-13, "{h} {k} {r}: {} vs {s}", bvnu(h, k, r));
        }
    }

    fn brute_table(p: f64, pp: f64, q: f64, qq: f64, s: f64, s1: usize, s2: usize) -> Table {
        let (gx, gw) = gauss_legendre(160);
        let lim = 12.0;
        let range = |side: usize| if side == LO { (-lim, 0.0) } else { (0.0, lim) };
        let (a1, b1) = range(s1);
        let (a2, b2) = range(s2);
        let mut g = [[0.0; 3]; 3];
        for (x0, w0) in gx.iter().zip(&gw) {
            let u = a1 + 0.5 * (b1 - a1) * (1.0 + x0);
            for (y0, w1) in gx.iter().zip(&gw) {
                let v = a2 + 0.5 * (b2 - a2) * (1.0 + y0);
                let e = (-(p * (u - pp).powi(2) + q * (v - qq).powi(2) + s * (u - v).powi(2))).exp()
                    * 0.25 * (b1 - a1) * (b2 - a2) * w0 * w1;
                for a in 0..3 {
                    for b in 0..3 {
                        g[a][b] += e * u.powi(a as i32) * v.powi(b as i32);
                    }
                }
            }
        }
        g
    }

    #[test]
    fn quadrant_moments_match_brute_force() {
        for &(p, pp, q, qq, s) in &[(0.8, -0.3, 1.1, 0.4, 0.5), (2.0, 0.7, 0.6, 0.9, 3.0), (1.3, -1.2, 0.9, -0.5, 0.0), (0.5, 0.1, 0.7, -0.2, 20.0)] {
            let t = quadrants(p, pp, q, qq, s);
            for s1 in [LO, HI] {
                for s2 in [LO, HI] {
                    let b = brute_table(p, pp, q, qq, s, s1, s2);
                    for a in 0..3 {
                        for c in 0..3 {
                            let x = t[quadrant(s1, s2)][a][c];
                            assert!((x - b[a][c]).abs() < 1e-12, "{p} {pp} {q} {qq} {s} q{}{} [{a}][{c}]: {x} vs {}", s1, s2, b[a][c]);
                        }
                    }
                }
            }
            let f = full_line(p, pp, q, qq, s);
            for a in 0..3 {
                for c in 0..3 {
                    let sum: f64 = (0..4).map(|qd| t[qd][a][c]).sum();
                    assert!((sum - f[a][c]).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn quadrants_sum_to_full_eri() {
        let m = build_molecule(&GeometrySpec::hydrogens(&[[0.0, 0.0, 0.0], [0.3, -0.2, 1.4]], &["A", "B"])).unwrap();
        for name in ["min-s", "sp"] {
            let b = build_basis(&m, name).unwrap();
            let full = eri_tensor(&b);
            let q = plane_eri(&b, 0.7, &full);
            let mut sum = Tensor4::zeros(b.len());
            for t in &q {
                sum.scaled_add(t, 1.0);
            }
            let err = sum.max_abs_diff(&full);
            assert!(err < 1e-11, "{name}: {err}");
        }
    }

    #[test]
    fn mirror_symmetry_of_quadrants() {
        let m = build_molecule(&GeometrySpec::h2(1.4)).unwrap();
        let b = build_basis(&m, "min-s").unwrap();
        let full = eri_tensor(&b);
        let q = plane_eri(&b, 0.7, &full);
        let sw = |x: usize| 1 - x;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let a = q[quadrant(LO, HI)].get(i, j, k, l);
                        let bb = q[quadrant(HI, LO)].get(sw(i), sw(j), sw(k), sw(l));
                        assert!((a - bb).abs() < 1e-13);
                        let a = q[quadrant(LO, LO)].get(i, j, k, l);
                        let bb = q[quadrant(HI, HI)].get(sw(i), sw(j), sw(k), sw(l));
                        assert!((a - bb).abs() < 1e-13);
                    }
                }
            }
        }
    }
}
