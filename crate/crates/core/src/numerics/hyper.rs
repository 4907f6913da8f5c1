//! Confluent (₁F₁) and Gauss (₂F₁) hypergeometric functions for the
//! parameter patterns that appear in the outage expressions: small positive
//! integer numerator/denominator parameters, real argument.

use crate::error::{Error, Result};

const SERIES_MAX_TERMS: usize = 10_000;
/// The mapped series used for strongly negative ₂F₁ arguments has all-positive
/// terms but needs O(|x|) of them; it gets a larger budget than the
/// alternating direct series.
const MAPPED_SERIES_MAX_TERMS: usize = 200_000;
const TERM_EPS: f64 = 1e-14;

fn is_nonpositive_integer(v: f64) -> bool {
    v <= 0.0 && v.fract() == 0.0
}

/// Kummer's confluent hypergeometric function ₁F₁(a; b; x) by direct power
/// series with term-ratio stopping.
pub fn hyp1f1(a: f64, b: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Err(Error::domain(
            "hyp1f1",
            format!("b = {b} is a nonpositive integer"),
        ));
    }
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        if term.abs() <= TERM_EPS * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        context: "hyp1f1 series",
        iterations: SERIES_MAX_TERMS,
    })
}

/// Gauss hypergeometric function ₂F₁(a, b; c; x) for x < 1.
///
/// Direct series inside the unit disk; for x <= -1 the Pfaff map
/// y = x/(x-1) pulls the argument into [1/2, 1) where the transformed
/// series ₂F₁(a, c-b; c; y) has positive terms for the parameter patterns
/// used here.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::domain(
            "hyp2f1",
            format!("c = {c} is a nonpositive integer"),
        ));
    }
    if x >= 1.0 {
        return Err(Error::domain(
            "hyp2f1",
            format!("argument x = {x} outside the supported range x < 1"),
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x > -1.0 {
        hyp2f1_series(a, b, c, x, SERIES_MAX_TERMS)
    } else {
        // Pfaff transformation: (1-x)^{-a} 2F1(a, c-b; c; x/(x-1)).
        let y = x / (x - 1.0);
        let f = hyp2f1_series(a, c - b, c, y, MAPPED_SERIES_MAX_TERMS)?;
        Ok((1.0 - x).powf(-a) * f)
    }
}

fn hyp2f1_series(a: f64, b: f64, c: f64, x: f64, max_terms: usize) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let tail_guard = 1.0 - x.abs();
    for k in 0..max_terms {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / (c + kf) * x / (kf + 1.0);
        sum += term;
        if term == 0.0 || term.abs() <= TERM_EPS * tail_guard * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        context: "hyp2f1 series",
        iterations: max_terms,
    })
}

/// ₂F₁(a, b; a+b; 1-w) for small positive `w`, where the argument sits next
/// to the logarithmic singularity at 1 and the direct series is useless.
/// Uses the standard expansion in powers of `w` with digamma coefficients.
pub fn hyp2f1_near_unit_log_case(a: f64, b: f64, w: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::domain(
            "hyp2f1_near_unit_log_case",
            format!("parameters must be positive, got ({a}, {b})"),
        ));
    }
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::domain(
            "hyp2f1_near_unit_log_case",
            format!("w = {w} must lie in (0, 1)"),
        ));
    }
    let ln_w = w.ln();
    let prefactor = (super::ln_gamma(a + b)? - super::ln_gamma(a)? - super::ln_gamma(b)?).exp();
    let mut poch = 1.0_f64; // (a)_n (b)_n / (n!)^2 * w^n
    let mut sum = 0.0_f64;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        let bracket = 2.0 * digamma(nf + 1.0) - digamma(a + nf) - digamma(b + nf) - ln_w;
        sum += poch * bracket;
        // The bracket may cross zero mid-series, so the stop test bounds
        // the whole tail envelope rather than the current term.
        let bracket_bound = ln_w.abs() + 2.0 * digamma(a.max(b) + nf + 2.0).abs() + 4.0;
        if n > 0 && poch * bracket_bound / (1.0 - w) <= TERM_EPS * sum.abs() {
            return Ok(prefactor * sum);
        }
        poch *= (a + nf) * (b + nf) / ((nf + 1.0) * (nf + 1.0)) * w;
    }
    Err(Error::NonConvergence {
        context: "hyp2f1 log-case series",
        iterations: SERIES_MAX_TERMS,
    })
}

/// Digamma function for positive arguments (recurrence into the asymptotic
/// region, then the standard Bernoulli tail).
fn digamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    while x < 24.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    acc + x.ln() - 0.5 * inv
        - inv2
            * (1.0 / 12.0
                - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))))
}
