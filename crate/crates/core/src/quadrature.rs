//! One-dimensional quadrature rules shared by the grid, the half-space
//! integrals and the vibronic model.

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss-Hermite rule for `∫ f(x) exp(-x²) dx` (Golub-Welsch).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Symmetrize away eigen-solver rounding.
    for k in 0..n / 2 {
        let (a, b) = (pairs[k], pairs[n - 1 - k]);
        let x = 0.5 * (b.0 - a.0);
        let w = 0.5 * (a.1 + b.1);
        pairs[k] = (-x, w);
        pairs[n - 1 - k] = (x, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn gk15(f: &mut impl FnMut(f64, &mut [f64]), a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    f(c, buf);
    for d in 0..dim {
        k[d] += WGK[7] * buf[d];
        g[d] += WG[3] * buf[d];
    }
    for i in 0..7 {
        for x in [c - h * XGK[i], c + h * XGK[i]] {
            f(x, buf);
            for d in 0..dim {
                k[d] += WGK[i] * buf[d];
                if i % 2 == 1 {
                    g[d] += WG[i / 2] * buf[d];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for d in 0..dim {
        k[d] *= h;
        g[d] *= h;
        error = error.max((k[d] - g[d]).abs());
    }
    Panel { a, b, value: k, error }
}

/// Globally adaptive vector Gauss-Kronrod (7-15) on `[a, b]`. `f(x, out)`
/// writes all `dim` components at `x`. Stops when the summed max-norm error
/// estimate is below `max(abs_tol, rel_tol * max|I|)`. `breaks` are interior
/// points used as initial panel boundaries.
pub fn integrate_gk(
    mut f: impl FnMut(f64, &mut [f64]),
    a: f64,
    b: f64,
    breaks: &[f64],
    dim: usize,
    abs_tol: f64,
    rel_tol: f64,
) -> Adaptive {
    let mut buf = vec![0.0; dim];
    let mut edges = vec![a];
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    let mut panels: Vec<Panel> = edges
        .windows(2)
        .map(|w| gk15(&mut f, w[0], w[1], dim, &mut buf))
        .collect();
    for _ in 0..200 {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in &panels {
            for d in 0..dim {
                total[d] += p.value[d];
            }
            err += p.error;
        }
        let scale = total.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if err <= abs_tol.max(rel_tol * scale) {
            return Adaptive {
                values: total,
                error: err,
                converged: true,
            };
        }
        let worst = (0..panels.len())
            .max_by(|&i, &j| panels[i].error.total_cmp(&panels[j].error))
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15(&mut f, p.a, mid, dim, &mut buf));
        panels.push(gk15(&mut f, mid, p.b, dim, &mut buf));
    }
    let mut total = vec![0.0; dim];
    for p in &panels {
        for d in 0..dim {
            total[d] += p.value[d];
        }
    }
    Adaptive {
        values: total,
        error: panels.iter().map(|p| p.error).sum(),
        converged: false,
    }
}

/// Result of [`integrate_gk`]; `converged` is false when the subdivision
/// budget ran out before the tolerance was met.
#[derive(Debug, Clone)]
pub struct Adaptive {
    pub values: Vec<f64>,
    pub error: f64,
    pub converged: bool,
}
