//! Boys function `F_m(x) = ∫_0^1 t^{2m} exp(-x t^2) dt` for small orders.

/// Largest order supported; enough for (pp|pp) electron repulsion.
pub const MAX_ORDER: usize = 4;

const CROSSOVER: f64 = 25.0;

/// Single value `F_m(x)`.
pub fn boys(m: usize, x: f64) -> f64 {
    let mut out = [0.0; MAX_ORDER + 1];
    boys_array(m, x, &mut out);
    out[m]
}

/// Fills `out[0..=m_max]` with `F_0(x) .. F_{m_max}(x)`.
///
/// Below the crossover the top order comes from the series and lower orders
/// from downward recursion. Above it every order uses the asymptotic form
/// directly (its error is about `e^-x / 2x`, and downward recursion would
/// amplify that by `2x / (2m+1)` per step).
pub fn boys_array(m_max: usize, x: f64, out: &mut [f64]) {
    assert!(m_max <= MAX_ORDER, "Boys order {m_max} > {MAX_ORDER}");
    debug_assert!(x >= 0.0);
    if x >= CROSSOVER {
        for (m, o) in out.iter_mut().enumerate().take(m_max + 1) {
            *o = asymptotic(m, x);
        }
        return;
    }
    let ex = (-x).exp();
    out[m_max] = series(m_max, x, ex);
    for m in (0..m_max).rev() {
        out[m] = (2.0 * x * out[m + 1] + ex) / (2 * m + 1) as f64;
    }
}

// F_m(x) = e^{-x} sum_k (2x)^k / [(2m+1)(2m+3)...(2m+2k+1)]
fn series(m: usize, x: f64, ex: f64) -> f64 {
    let mut denom = (2 * m + 1) as f64;
    let mut term = 1.0 / denom;
    let mut sum = term;
    for _ in 0..400 {
        denom += 2.0;
        term *= 2.0 * x / denom;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    ex * sum
}

// (2m-1)!! / 2^{m+1} * sqrt(pi / x^{2m+1})
fn asymptotic(m: usize, x: f64) -> f64 {
    let mut dfact = 1.0;
    for k in 1..=m {
        dfact *= (2 * k - 1) as f64;
    }
    dfact / 2f64.powi(m as i32 + 1) * (std::f64::consts::PI / x.powi(2 * m as i32 + 1)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Gauss-Legendre oracle on [0, 1].
    fn quadrature(m: usize, x: f64) -> f64 {
        let nodes = [
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (-0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.0, 0.568_888_888_888_888_9),
            (0.538_469_310_105_683, 0.478_628_670_499_366_5),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let panels = 2000;
        let h = 1.0 / panels as f64;
        let mut s = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            for (xi, wi) in nodes {
                let t: f64 = mid + 0.5 * h * xi;
                s += 0.5 * h * wi * t.powi(2 * m as i32) * (-x * t * t).exp();
            }
        }
        s
    }

    #[test]
    fn values_at_zero() {
        for m in 0..=MAX_ORDER {
            assert!((boys(m, 0.0) - 1.0 / (2 * m + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn order_zero_is_error_function() {
        for x in [1e-3, 0.5, 3.0, 17.0, 24.9, 25.1, 60.0] {
            let exact = 0.5 * (std::f64::consts::PI / x).sqrt() * libm::erf(x.sqrt());
            assert!((boys(0, x) - exact).abs() < 1e-12, "x={x} {} {exact}", boys(0, x));
        }
    }

    #[test]
    fn matches_quadrature() {
        for m in 0..=MAX_ORDER {
            for x in [0.0, 1e-6, 0.3, 1.0, 4.5, 10.0, 24.99, 25.0, 30.0, 45.0, 120.0] {
                let q = quadrature(m, x);
                let b = boys(m, x);
                assert!((b - q).abs() < 1e-12, "m={m} x={x}: {b} vs {q}");
            }
        }
    }

    #[test]
    fn continuous_at_crossover() {
        for m in 0..=MAX_ORDER {
            let x = CROSSOVER;
            let lo = series(m, x, (-x).exp());
            let hi = asymptotic(m, x);
            assert!((lo - hi).abs() < 1e-12, "m={m} {lo} {hi}");
        }
    }
}
