//! Adaptive Simpson quadrature, used as the reference route wherever a
//! closed form or a Gauss-Laguerre sum needs independent cross-validation.

/// Adaptive Simpson integration of `f` over [a, b] to absolute tolerance
/// `tol`. Recursion splits until the Richardson estimate of the local error
/// is below the local tolerance share or the depth cap is reached.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 64)
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
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// ∫₀^∞ f(u) du via the rational substitution u = t/(1-t) and adaptive
/// Simpson on (0, 1). The integrand must decay at infinity.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: &F, tol: f64) -> f64 {
    let g = |t: f64| {
        if t >= 1.0 - 1e-14 {
            return 0.0;
        }
        let one_minus = 1.0 - t;
        f(t / one_minus) / (one_minus * one_minus)
    };
    adaptive_simpson(&g, 0.0, 1.0, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_integral() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫₀¹ ln(1/x) dx = 1; integrable singularity at 0.
        let v = adaptive_simpson(
            &|x: f64| if x <= 0.0 { 0.0 } else { (1.0 / x).ln() },
            0.0,
            1.0,
            1e-10,
        );
        assert!((v - 1.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn semi_infinite_gaussian_tail() {
        // ∫₀^∞ e^{-u} du = 1 and ∫₀^∞ u e^{-u} du = 1.
        let v0 = integrate_semi_infinite(&|u: f64| (-u).exp(), 1e-12);
        assert!((v0 - 1.0).abs() < 1e-10);
        let v1 = integrate_semi_infinite(&|u: f64| u * (-u).exp(), 1e-12);
        assert!((v1 - 1.0).abs() < 1e-10);
    }
}
