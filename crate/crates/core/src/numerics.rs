//! Scalar numerics shared by the distribution and equilibrium code: adaptive
//! Simpson quadrature, monotone bisection and the regularized incomplete beta
//! function.

use std::sync::OnceLock;

/// Default absolute tolerance for adaptive quadrature.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Tolerance on `|F(x) - p|` accepted when inverting a CDF.
pub const CDF_TOL: f64 = 1e-10;

/// Cap on the number of subintervals adaptive Simpson may create.
pub const MAX_SUBINTERVALS: usize = 1 << 20;

const MAX_DEPTH: u32 = 48;

/// Quadrature tolerance, overridable through `VRP_QUAD_TOL`.
pub fn quad_tol() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("VRP_QUAD_TOL")
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(DEFAULT_QUAD_TOL)
    })
}

/// Integrates `f` over `[a, b]` with adaptive Simpson to absolute tolerance `tol`.
///
/// Reversed bounds give the negated integral. Once the subdivision budget is
/// spent the remaining panels are accepted as they are.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a, tol);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut budget = MAX_SUBINTERVALS;
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut budget)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || *budget == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    *budget -= 1;
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)
}

/// Finds the crossing of a nondecreasing function `g` with zero on `[lo, hi]`.
///
/// Returns the midpoint of the final bracket once it is narrower than `x_tol`.
/// The caller is responsible for `g(lo) <= 0 <= g(hi)`.
pub fn bisect_increasing<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= x_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Inverts a nondecreasing, continuous CDF on `[0, 1]` by bisection.
pub fn invert_cdf<F: Fn(f64) -> f64>(cdf: F, p: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    bisect_increasing(|x| cdf(x) - p, 0.0, 1.0, 1e-15)
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Regularized incomplete beta function `I_x(a, b)` for `a, b > 0`.
///
/// Continued fraction (modified Lentz), with the symmetry
/// `I_x(a, b) = 1 - I_{1-x}(b, a)` to stay in the fast-converging region.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    if x > (a + 1.0) / (a + b + 2.0) {
        1.0 - inc_beta_cf(b, a, 1.0 - x)
    } else {
        inc_beta_cf(a, b, x)
    }
}

fn inc_beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let ln_prefix = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
    let prefix = ln_prefix.exp() / a;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=1000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let even = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + even * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + even / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let odd = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + odd * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + odd / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (prefix * h).clamp(0.0, 1.0)
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal upper tail `1 - Φ(z)`, accurate for large `z`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_polynomials_and_reversed_bounds() {
        let tol = 1e-12;
        assert_abs_diff_eq!(integrate(|x| x * x, 0.0, 1.0, tol), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(integrate(|x| x * x, 1.0, 0.0, tol), -1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(integrate(f64::sin, 0.0, std::f64::consts::PI, tol), 2.0, epsilon = 1e-10);
        assert_eq!(integrate(|x| x, 0.3, 0.3, tol), 0.0);
    }

    #[test]
    fn simpson_handles_sqrt_endpoint() {
        // integrable but non-smooth at 0, as CDFs of Beta(a<1, .) are
        let v = integrate(|x: f64| x.powf(0.3), 0.0, 1.0, 1e-10);
        assert_abs_diff_eq!(v, 1.0 / 1.3, epsilon = 1e-8);
    }

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect_increasing(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert_abs_diff_eq!(r, 2f64.sqrt(), epsilon = 1e-13);
    }

    #[test]
    fn inc_beta_edges_and_symmetry() {
        assert_eq!(inc_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(inc_beta(2.0, 3.0, 1.0), 1.0);
        assert_abs_diff_eq!(inc_beta(1.0, 1.0, 0.37), 0.37, epsilon = 1e-14);
        for &(a, b, x) in &[(0.3, 0.2, 0.4), (20.0, 2.0, 0.9), (4.0, 2.0, 0.25)] {
            let lhs = inc_beta(a, b, x);
            let rhs = 1.0 - inc_beta(b, a, 1.0 - x);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13);
        }
    }

    #[test]
    fn inc_beta_closed_forms() {
        // I_x(a, 1) = x^a and I_x(1, b) = 1 - (1-x)^b
        for &x in &[0.01f64, 0.3, 0.77, 0.999] {
            assert_abs_diff_eq!(inc_beta(3.5, 1.0, x), x.powf(3.5), epsilon = 1e-13);
            assert_abs_diff_eq!(inc_beta(1.0, 0.4, x), 1.0 - (1.0 - x).powf(0.4), epsilon = 1e-13);
        }
        // Beta(4,2): F(x) = 5x^4 - 4x^5
        for &x in &[0.1f64, 0.5, 0.68619, 0.95] {
            let exact = 5.0 * x.powi(4) - 4.0 * x.powi(5);
            assert_abs_diff_eq!(inc_beta(4.0, 2.0, x), exact, epsilon = 1e-14);
        }
    }

    #[test]
    fn inc_beta_matches_quadrature_of_density() {
        // independent route: integrate the Beta(2.5, 3.5) density directly
        let (a, b) = (2.5, 3.5);
        let lb = ln_beta(a, b);
        let dens = |v: f64| ((a - 1.0) * v.ln() + (b - 1.0) * (1.0 - v).ln() - lb).exp();
        for &x in &[0.05, 0.2, 0.5, 0.8, 0.97] {
            let q = integrate(dens, 1e-300, x, 1e-13);
            assert_abs_diff_eq!(inc_beta(a, b, x), q, epsilon = 1e-10);
        }
    }

    #[test]
    fn normal_tails_are_complementary() {
        for &z in &[-6.0, -1.0, 0.0, 0.7, 5.0] {
            assert_abs_diff_eq!(normal_cdf(z) + normal_sf(z), 1.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(normal_cdf(1.959963984540054), 0.975, epsilon = 1e-12);
    }
}
