//! Gauss-Laguerre quadrature rules: nodes are the roots of the order-n
//! Laguerre polynomial, weights follow the standard normalized formula
//! w_s = u_s / [(n+1)² L_{n+1}(u_s)²].
//!
//! Rules double as evaluators of ∫₀^∞ f(u) du by weighting the integrand as
//! e^{-u}·[e^{u} f(u)]; the e^{u_s}-scaled weights are precomputed in log
//! space so that rules up to order 200 stay finite even where the raw
//! weights underflow f64.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 200;

#[derive(Debug, Clone)]
pub struct GaussLaguerreRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// w_s * e^{u_s}, the effective weights for ∫₀^∞ f(u) du.
    scaled_weights: Vec<f64>,
}

impl GaussLaguerreRule {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    /// Σ_s w_s e^{u_s} f(u_s) ≈ ∫₀^∞ f(u) du.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&u, &sw)| sw * f(u))
            .sum()
    }

    /// Σ_s w_s g(u_s) ≈ ∫₀^∞ e^{-u} g(u) du.
    pub fn integrate_weighted<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * g(u))
            .sum()
    }
}

/// Evaluates (L_n(x), L_{n-1}(x)) with powers-of-two rescaling so the
/// recurrence survives arguments where |L_n| overflows f64. Returns the
/// scaled pair and the natural log of the applied scale factor.
fn laguerre_pair_scaled(n: usize, x: f64) -> (f64, f64, f64) {
    let mut p_prev = 1.0_f64; // L_0
    if n == 0 {
        return (p_prev, 0.0, 0.0);
    }
    let mut p = 1.0 - x; // L_1
    let mut log_scale = 0.0_f64;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
        let mag = p.abs().max(p_prev.abs());
        if mag > 1e250 {
            p /= 1e250;
            p_prev /= 1e250;
            log_scale += 250.0 * std::f64::consts::LN_10;
        }
    }
    (p, p_prev, log_scale)
}

/// (L_n(x), L'_n(x)) with the derivative carried through its own
/// recurrence, avoiding the cancellation of the n(L_n - L_{n-1})/x form
/// near small roots. Scale handling as above; the common scale cancels in
/// the Newton ratio.
fn laguerre_value_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0_f64;
    let mut d_prev = 0.0_f64;
    if n == 0 {
        return (p_prev, d_prev);
    }
    let mut p = 1.0 - x;
    let mut d = -1.0_f64;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * p - kf * p_prev) / (kf + 1.0);
        let next_d = ((2.0 * kf + 1.0 - x) * d - p - kf * d_prev) / (kf + 1.0);
        p_prev = p;
        d_prev = d;
        p = next;
        d = next_d;
        let mag = p.abs().max(d.abs());
        if mag > 1e250 {
            p /= 1e250;
            d /= 1e250;
            p_prev /= 1e250;
            d_prev /= 1e250;
        }
    }
    (p, d)
}

/// Builds the order-n rule, 1 <= n <= 200.
///
/// Roots by Newton iteration seeded with the usual asymptotic guesses;
/// each root is accurate to ~1e-14 relative.
pub fn laguerre_rule(n: usize) -> Result<GaussLaguerreRule> {
    if n < 1 || n > MAX_ORDER {
        return Err(Error::domain(
            "laguerre_rule",
            format!("order {n} outside [1, {MAX_ORDER}]"),
        ));
    }
    let nf = n as f64;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut scaled_weights = Vec::with_capacity(n);

    for s in 0..n {
        let mut z = match s {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => nodes[0] + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (s - 1) as f64;
                nodes[s - 1] + (1.0 + 2.55 * ai) / (1.9 * ai) * (nodes[s - 1] - nodes[s - 2])
            }
        };

        let mut converged = false;
        let mut prev_step = f64::INFINITY;
        for _ in 0..200 {
            let (p, pp) = laguerre_value_and_derivative(n, z);
            let dz = p / pp;
            z -= dz;
            // Done when the step reaches rounding level or stagnates there.
            if dz.abs() <= 1e-15 * z.abs() || (dz.abs() >= prev_step && prev_step < 1e-11 * z.abs())
            {
                converged = true;
                break;
            }
            prev_step = dz.abs();
        }
        if !converged {
            return Err(Error::NonConvergence {
                context: "laguerre_rule Newton iteration",
                iterations: 200,
            });
        }
        if let Some(&prev) = nodes.last() {
            if z <= prev {
                return Err(Error::NonConvergence {
                    context: "laguerre_rule root ordering",
                    iterations: s,
                });
            }
        }

        // w = u_s / [(n+1) L_{n+1}(u_s)]², in plain arithmetic wherever the
        // denominator is representable (best precision), otherwise through
        // logs; the raw weight may underflow f64 for the outermost nodes of
        // very high orders while w·e^{u} stays O(1).
        let (p_next, _, log_scale) = laguerre_pair_scaled(n + 1, z);
        let w = if log_scale == 0.0 {
            let denom = (nf + 1.0) * p_next;
            z / (denom * denom)
        } else {
            let ln_w = z.ln() - 2.0 * (nf + 1.0).ln() - 2.0 * (p_next.abs().ln() + log_scale);
            ln_w.exp()
        };
        // e^{u/2 - scale} stays finite over the supported orders, so the
        // scaled weight is a plain ratio as well.
        let half = (0.5 * z - log_scale).exp() / ((nf + 1.0) * p_next.abs());
        let scaled = z * half * half;
        nodes.push(z);
        weights.push(w);
        scaled_weights.push(scaled);
    }

    Ok(GaussLaguerreRule {
        order: n,
        nodes,
        weights,
        scaled_weights,
    })
}

/// ∫₀^∞ f(u) du by the order-n rule (weighting the integrand as
/// e^{-u}[e^{u} f(u)]).
pub fn gl_integrate<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<f64> {
    Ok(cached_rule(n)?.integrate(f))
}

/// Process-wide rule cache; rules are built once per order and shared
/// read-only afterwards.
pub fn cached_rule(n: usize) -> Result<Arc<GaussLaguerreRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLaguerreRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&n) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(laguerre_rule(n)?);
    cache
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&rule));
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_1_is_exact() {
        let rule = laguerre_rule(1).unwrap();
        assert!((rule.nodes()[0] - 1.0).abs() < 1e-14);
        assert!((rule.weights()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn order_2_matches_analytic_roots() {
        // L_2(x) = 1 - 2x + x²/2 has roots 2 ± √2; the weight formula gives
        // (2 ∓ √2)/4 ... the larger weight belongs to the smaller node.
        let rule = laguerre_rule(2).unwrap();
        let s2 = 2.0_f64.sqrt();
        assert!((rule.nodes()[0] - (2.0 - s2)).abs() < 1e-13);
        assert!((rule.nodes()[1] - (2.0 + s2)).abs() < 1e-13);
        assert!((rule.weights()[0] - (2.0 + s2) / 4.0).abs() < 1e-13);
        assert!((rule.weights()[1] - (2.0 - s2) / 4.0).abs() < 1e-13);
    }

    #[test]
    fn nodes_increasing_positive_weights_sum_to_one() {
        for &n in &[1, 2, 3, 5, 10, 20, 40, 80, 120, 160, 200] {
            let rule = laguerre_rule(n).unwrap();
            let mut prev = 0.0;
            for &u in rule.nodes() {
                assert!(u > prev, "order {n}: nodes not strictly increasing");
                prev = u;
            }
            // Raw weights underflow f64 for the outermost nodes above order
            // ~170; the scaled weights never do.
            if n <= 150 {
                assert!(rule.weights().iter().all(|&w| w > 0.0), "order {n}");
            }
            assert!(rule.scaled_weights().iter().all(|&w| w > 0.0), "order {n}");
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "order {n}: sum w = {sum}");
        }
    }

    #[test]
    fn moment_identities() {
        // Σ w u^k = k! with relative error 1e-9 for k ≤ 2n-1 (capped at 30
        // to keep k! inside f64).
        for &n in &[2_usize, 5, 10, 20, 40, 80] {
            let rule = laguerre_rule(n).unwrap();
            let kmax = (2 * n - 1).min(30);
            let mut factorial = 1.0_f64;
            for k in 1..=kmax {
                factorial *= k as f64;
                let moment = rule.integrate_weighted(|u| u.powi(k as i32));
                assert!(
                    ((moment - factorial) / factorial).abs() < 1e-9,
                    "order {n}, k={k}: {moment} vs {factorial}"
                );
            }
            // First moment separately at the tighter 1e-10 bar.
            let m1 = rule.integrate_weighted(|u| u);
            assert!((m1 - 1.0).abs() < 1e-10, "order {n}: Σ w u = {m1}");
        }
    }

    #[test]
    fn cubic_exact_from_order_2() {
        for n in 2..=6 {
            let rule = laguerre_rule(n).unwrap();
            let val = rule.integrate_weighted(|u| u * u * u);
            assert!((val - 6.0).abs() < 6.0 * 1e-12, "order {n}: {val}");
        }
    }

    #[test]
    fn gl_integrate_known_integrals() {
        // ∫ e^{-u} du = 1 is exact for every order.
        for &n in &[1, 3, 17] {
            let v = gl_integrate(|u: f64| (-u).exp(), n).unwrap();
            assert!((v - 1.0).abs() < 1e-12, "order {n}: {v}");
        }
        // ∫ u² e^{-u} du = 2 from order 2 on.
        let v = gl_integrate(|u: f64| u * u * (-u).exp(), 2).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_orders() {
        assert!(laguerre_rule(0).is_err());
        assert!(laguerre_rule(MAX_ORDER + 1).is_err());
    }

    #[test]
    fn cache_returns_same_rule() {
        let a = cached_rule(33).unwrap();
        let b = cached_rule(33).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
