//! Analytic outage evaluators for both duplex modes, each paired with an
//! independent numeric-integration route for cross-validation.
//!
//! The analytic constants are assembled from the underlying probability
//! events rather than from any fixed-τ shorthand:
//!
//! - HD uplink: ‖h_ur‖² < x* with x* = (2^{r_sbs/(1-τ)} - 1) σ² / (P_u φ_ur).
//! - HD downlink: ‖h_td‖² < a₂ - b₂ z with a₂ = (2^{r_d/τ} - 1) σ² / (P_RF φ_td)
//!   and b₂ = a₂ τ c, where c = η P φ_g |g|² is the recycling loop constant.
//! - FD downlink: ratio event with a₃ = σ²/(φ_ud P_u) and
//!   b₃ = φ_td P_RF / (φ_ud P_u (2^{r_d} - 1)(1 - c)).
//! - FD uplink: ‖h_ur‖² < a₄ q + γ* b₄ with
//!   a₄ = (2^{r_sbs} - 1) φ_SI ζ |g_s|² P_RF / (P_u φ_ur (1 - c)) and
//!   b₄ = σ²/(P_u φ_ur).
//!
//! The FD forms replace the per-draw recycling denominator (1 - c z) by its
//! unit-mean value (1 - c); the Monte Carlo engine keeps the exact per-draw
//! z, so the cost of that approximation is observable.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fading::{gpd_pdf, q_pdf};
use crate::numerics::{self, adaptive_simpson, hyp1f1, hyp2f1, regularized_gamma_lower};
use crate::sysmodel::{DuplexMode, SystemConfig};

/// Which route produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    NumericIntegral,
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::ClosedForm => write!(f, "closed-form"),
            Method::NumericIntegral => write!(f, "numeric-integral"),
            Method::MonteCarlo => write!(f, "monte-carlo"),
        }
    }
}

/// Paired downlink/uplink outage probabilities with evaluation metadata.
#[derive(Debug, Clone)]
pub struct OutageReport {
    pub p_out_d: f64,
    pub p_out_sbs: f64,
    /// max(p_out_d, p_out_sbs), the fairness objective.
    pub minmax: f64,
    pub method: Method,
    pub diagnostics: BTreeMap<&'static str, f64>,
}

/// Evaluation route for the HD downlink outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HdDownlinkVariant {
    /// Double sum with confluent hypergeometric terms.
    ClosedForm1f1,
    /// Adaptive integration of the gamma CDF against the Z density, with
    /// the threshold clamped at zero.
    NumericZIntegral,
}

/// Tolerance for the two HD downlink routes wherever clamping is inactive.
pub const HD_D_AGREEMENT_TOL: f64 = 1e-6;
/// Tolerance between the Gauss-Laguerre route and the direct q-integral for
/// the FD uplink outage.
pub const FD_SBS_AGREEMENT_TOL: f64 = 1e-5;
/// Order at which the FD uplink cross-check becomes binding.
pub const FD_SBS_CHECK_ORDER: usize = 60;

fn check_mode(config: &SystemConfig, expected: DuplexMode, context: &'static str) -> Result<()> {
    config.validate()?;
    if config.mode != expected {
        return Err(Error::domain(
            context,
            format!("requires {expected} mode, config is {}", config.mode),
        ));
    }
    Ok(())
}

/// Mean-field recycling attenuation 1 - c; errors out when the loop gain
/// reaches unity already at the mean leakage.
fn mean_field_denominator(config: &SystemConfig) -> Result<f64> {
    let c = config.recycling_gain();
    if c >= 1.0 {
        return Err(Error::EnergyLoopDivergence { gain: c });
    }
    Ok(1.0 - c)
}

/// HD uplink outage: P(M, x*). Independent of the supply power.
pub fn outage_hd_sbs(config: &SystemConfig) -> Result<f64> {
    check_mode(config, DuplexMode::Hd, "outage_hd_sbs")?;
    let thr = (config.r_sbs / (1.0 - config.tau)).exp2() - 1.0;
    let x = thr * config.noise_w / (config.p_u_w * config.phi_ur());
    regularized_gamma_lower(config.m_tx as f64, x)
}

fn hd_d_constants(config: &SystemConfig) -> Result<(f64, f64)> {
    let gamma_star = (config.r_d / config.tau).exp2() - 1.0;
    let a2 = gamma_star * config.noise_w / (config.p_rf()? * config.phi_td());
    let b2 = a2 * config.tau * config.recycling_gain();
    Ok((a2, b2))
}

/// HD downlink outage by the requested route.
pub fn outage_hd_d(config: &SystemConfig, variant: HdDownlinkVariant) -> Result<f64> {
    check_mode(config, DuplexMode::Hd, "outage_hd_d")?;
    let (a2, b2) = hd_d_constants(config)?;
    let m = config.m_tx;
    match variant {
        HdDownlinkVariant::NumericZIntegral => hd_d_numeric(a2, b2, m),
        HdDownlinkVariant::ClosedForm1f1 => hd_d_closed_form(a2, b2, m),
    }
}

/// 1 - ∫₀^M Q(M, max(a₂ - b₂ z, 0)) f_Z(z) dz, computed as the equivalent
/// ∫₀^{z_c} P(M, a₂ - b₂ z) f_Z(z) dz with z_c the clamping point, which
/// keeps full relative precision for small outages.
fn hd_d_numeric(a2: f64, b2: f64, m: u32) -> Result<f64> {
    let mf = m as f64;
    if b2 == 0.0 {
        return regularized_gamma_lower(mf, a2);
    }
    let z_clamp = (a2 / b2).min(mf);
    let peak = regularized_gamma_lower(mf, a2)?;
    let tol = (peak * 1e-9).max(1e-14);
    let integrand = |z: f64| {
        let thr = (a2 - b2 * z).max(0.0);
        regularized_gamma_lower(mf, thr).unwrap_or(0.0) * gpd_pdf(z, m).unwrap_or(0.0)
    };
    Ok(adaptive_simpson(&integrand, 0.0, z_clamp, tol).clamp(0.0, 1.0))
}

/// Double sum over (k, j) with ₁F₁ terms:
/// 1 - Σ_k Σ_j e^{-a₂} a₂^{k-j} (-b₂M)^j (M-1)! / ((k-j)! (j+M-1)!)
///     · ₁F₁(1+j; j+M; b₂M).
fn hd_d_closed_form(a2: f64, b2: f64, m: u32) -> Result<f64> {
    let mf = m as f64;
    let mm = m as usize;
    let x = b2 * mf;

    // Poisson partial sums S_t = Σ_{i<=t} e^{-a₂} a₂^i / i!.
    let mut poisson = Vec::with_capacity(mm);
    let mut term = (-a2).exp();
    let mut acc = term;
    poisson.push(acc);
    for i in 1..mm {
        term *= a2 / i as f64;
        acc += term;
        poisson.push(acc);
    }

    // C_j = (-x)^j (M-1)!/(j+M-1)! ₁F₁(1+j; j+M; x).
    let mut sum = 0.0_f64;
    let mut fact_ratio = 1.0_f64; // (M-1)!/(j+M-1)!
    let mut x_pow = 1.0_f64; // (-x)^j
    for j in 0..mm {
        let jf = j as f64;
        if j > 0 {
            fact_ratio /= mf + jf - 1.0;
            x_pow *= -x;
        }
        let f11 = hyp1f1(1.0 + jf, jf + mf, x)?;
        sum += x_pow * fact_ratio * f11 * poisson[mm - 1 - j];
    }
    Ok((1.0 - sum).clamp(0.0, 1.0))
}

/// Both analytic forms of the FD downlink outage. The ratio-density route
/// drops the support shift of the interference term, which splits into two
/// printed variants; the Monte Carlo oracle decides which one holds per
/// regime, so both are reported.
#[derive(Debug, Clone, Copy)]
pub struct FdDownlinkOutage {
    /// 1 - e^{a₃}(1 - (1+b₃)^{-M}), clamped into [0, 1].
    pub direct_form: f64,
    /// e^{a₃}(1+b₃)^{-M}, clamped into [0, 1].
    pub tail_form: f64,
    /// True when the interference-free reduction applied (φ_ud = 0), in
    /// which case both forms coincide and are exact in the mean-field sense.
    pub interference_free: bool,
    /// True when clamping changed the direct form.
    pub clamped: bool,
}

impl FdDownlinkOutage {
    /// The value reported as the downlink outage.
    pub fn headline(&self) -> f64 {
        self.direct_form
    }
}

/// FD downlink outage.
pub fn outage_fd_d(config: &SystemConfig) -> Result<FdDownlinkOutage> {
    check_mode(config, DuplexMode::Fd, "outage_fd_d")?;
    let one_minus_c = mean_field_denominator(config)?;
    let gamma_star = config.r_d.exp2() - 1.0;
    let p_rf = config.p_rf()?;
    if config.phi_ud() == 0.0 {
        let x = gamma_star * config.noise_w * one_minus_c / (config.phi_td() * p_rf);
        let p = regularized_gamma_lower(config.m_tx as f64, x)?;
        return Ok(FdDownlinkOutage {
            direct_form: p,
            tail_form: p,
            interference_free: true,
            clamped: false,
        });
    }
    let interference = config.phi_ud() * config.p_u_w;
    let a3 = config.noise_w / interference;
    let b3 = config.phi_td() * p_rf / (interference * gamma_star * one_minus_c);
    let m = config.m_tx as f64;
    let decay = (1.0 + b3).powf(-m);
    let raw_direct = 1.0 - a3.exp() * (1.0 - decay);
    let direct_form = raw_direct.clamp(0.0, 1.0);
    let tail_form = (a3.exp() * decay).clamp(0.0, 1.0);
    Ok(FdDownlinkOutage {
        direct_form,
        tail_form,
        interference_free: false,
        clamped: raw_direct != direct_form,
    })
}

fn fd_sbs_constants(config: &SystemConfig) -> Result<(f64, f64)> {
    let one_minus_c = mean_field_denominator(config)?;
    let gamma_star = config.r_sbs.exp2() - 1.0;
    let denom = config.p_u_w * config.phi_ur();
    let a4 = gamma_star * config.si_factor() * config.p_rf()? / (denom * one_minus_c);
    // Noise part of the threshold ‖h_ur‖² < a₄ q + γ* b₄ with
    // b₄ = σ²/(P_u φ_ur).
    let noise_term = gamma_star * config.noise_w / denom;
    Ok((a4, noise_term))
}

/// FD uplink outage by the Gauss-Laguerre route at the given order,
/// cross-checked against the direct q-integral whenever the order is at
/// least [`FD_SBS_CHECK_ORDER`].
pub fn outage_fd_sbs(config: &SystemConfig, gl_order: usize) -> Result<f64> {
    check_mode(config, DuplexMode::Fd, "outage_fd_sbs")?;
    let value = fd_sbs_gl_value(config, gl_order)?;
    if gl_order >= FD_SBS_CHECK_ORDER {
        let reference = outage_fd_sbs_numeric(config)?;
        if (value - reference).abs() > FD_SBS_AGREEMENT_TOL {
            return Err(Error::Disagreement {
                context: "outage_fd_sbs GL vs q-integral",
                a: value,
                b: reference,
                tol: FD_SBS_AGREEMENT_TOL,
            });
        }
    }
    Ok(value)
}

/// Triple sum over (i, l, p) with binomials, β(M-1, N-1) and the
/// Gauss-Laguerre evaluation of
/// f(u) = e^{-a₄MN/(1+u)} (1+u)^{N-3-(i-l)-p} ₂F₁(N-1, N-1; M+N-2; -u).
fn fd_sbs_gl_value(config: &SystemConfig, gl_order: usize) -> Result<f64> {
    let (a4, noise_term) = fd_sbs_constants(config)?;
    let n = config.n_rx as usize;
    let nf = config.n_rx as f64;
    let m = config.m_tx as usize;
    let mf = config.m_tx as f64;
    if a4 == 0.0 {
        // No self-interference path: a pure MRC link remains.
        return regularized_gamma_lower(nf, noise_term);
    }

    let rule = numerics::laguerre::cached_rule(gl_order)?;
    let mn = mf * nf;

    // The node-wise ₂F₁ factor is independent of the sum indices.
    let f21: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&u| hyp2f1(nf - 1.0, nf - 1.0, mf + nf - 2.0, -u))
        .collect::<Result<_>>()?;
    let damp: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&u| (-a4 * mn / (1.0 + u)).exp())
        .collect();

    // I_t = ∫ e^{-a₄MN/(1+u)} (1+u)^{N-3-t} ₂F₁(...) du for t = (i-l)+p.
    let t_max = (n - 1) + (m + n - 3);
    let integrals: Vec<f64> = (0..=t_max)
        .map(|t| {
            let expo = nf - 3.0 - t as f64;
            rule.nodes()
                .iter()
                .zip(rule.scaled_weights())
                .enumerate()
                .map(|(s, (&u, &sw))| sw * damp[s] * (1.0 + u).powf(expo) * f21[s])
                .sum()
        })
        .collect();

    let beta = numerics::beta(mf - 1.0, nf - 1.0)?;
    let front = beta * (mf - 1.0) * (nf - 1.0);
    let exp_neg_noise = (-noise_term).exp();

    // Binomials C(M+N-3, p), kept in f64 (p <= 29 for the supported sizes).
    let p_top = m + n - 3;
    let mut binom_p = vec![1.0_f64; p_top + 1];
    for p in 1..=p_top {
        binom_p[p] = binom_p[p - 1] * (p_top - p + 1) as f64 / p as f64;
    }

    let mut total = 0.0_f64;
    let mut inv_i_fact = 1.0_f64;
    for i in 0..n {
        if i > 0 {
            inv_i_fact /= i as f64;
        }
        // C(i, l) B^l (a₄ MN)^{i-l} I_{(i-l)+p}
        let mut binom_il = 1.0_f64;
        for l in 0..=i {
            if l > 0 {
                binom_il = binom_il * (i - l + 1) as f64 / l as f64;
            }
            let d = i - l;
            let coeff = binom_il * noise_term.powi(l as i32) * (a4 * mn).powi(d as i32);
            let mut p_sum = 0.0_f64;
            let mut sign = 1.0_f64;
            for p in 0..=p_top {
                p_sum += sign * binom_p[p] * integrals[d + p];
                sign = -sign;
            }
            total += inv_i_fact * exp_neg_noise * coeff * p_sum;
        }
    }
    Ok((1.0 - front * total).clamp(0.0, 1.0))
}

/// Direct numeric route: ∫₀^{MN} P(N, a₄ q + γ* b₄) f_q(q) dq.
///
/// The q-density has an integrable logarithmic singularity at 0; a
/// geometric midpoint grid covers the leftmost sliver and adaptive Simpson
/// the rest.
pub fn outage_fd_sbs_numeric(config: &SystemConfig) -> Result<f64> {
    check_mode(config, DuplexMode::Fd, "outage_fd_sbs_numeric")?;
    let (a4, noise_term) = fd_sbs_constants(config)?;
    let n = config.n_rx;
    let nf = n as f64;
    let m = config.m_tx;
    let mn = (config.m_tx * config.n_rx) as f64;
    if a4 == 0.0 {
        return regularized_gamma_lower(nf, noise_term);
    }
    let integrand = |q: f64| -> f64 {
        if q <= 0.0 || q >= mn {
            return 0.0;
        }
        let p = regularized_gamma_lower(nf, a4 * q + noise_term).unwrap_or(0.0);
        p * q_pdf(q, m, n).unwrap_or(0.0)
    };

    // Left sliver (0, δ·MN] on a geometric grid.
    let delta = 1e-4;
    let q_lo = mn * 1e-13;
    let q_hi = mn * delta;
    let cells = 400;
    let ratio = (q_hi / q_lo).powf(1.0 / cells as f64);
    let mut left = 0.0;
    let mut a = q_lo;
    for _ in 0..cells {
        let b = a * ratio;
        left += integrand((a * b).sqrt()) * (b - a);
        a = b;
    }
    // Tail below q_lo: the integrand is bounded by
    // P(N, noise_term)·f_q ~ log, negligible at 1e-13·MN.

    let right = adaptive_simpson(&integrand, q_hi, mn, 1e-11);
    Ok((left + right).clamp(0.0, 1.0))
}

/// Result of the order-doubling Gauss-Laguerre evaluation.
struct GlConverged {
    value: f64,
    order: usize,
    rel_change: f64,
}

/// Doubles the order from `start` until the successive relative change
/// drops below 1e-8, capped at the maximum supported order.
fn fd_sbs_gl_converged(config: &SystemConfig, start: usize) -> Result<GlConverged> {
    let mut order = start;
    let mut value = fd_sbs_gl_value(config, order)?;
    let mut rel_change = f64::INFINITY;
    while order < numerics::laguerre::MAX_ORDER {
        let next_order = (2 * order).min(numerics::laguerre::MAX_ORDER);
        let next = fd_sbs_gl_value(config, next_order)?;
        rel_change = if next == 0.0 {
            (value - next).abs()
        } else {
            ((value - next) / next).abs()
        };
        value = next;
        order = next_order;
        if rel_change < 1e-8 {
            break;
        }
    }
    Ok(GlConverged {
        value,
        order,
        rel_change,
    })
}

/// Default starting order for the FD uplink quadrature.
pub const DEFAULT_GL_ORDER: usize = 60;

/// Dispatches on the duplex mode and assembles the full report, running the
/// internal cross-checks of each evaluator.
pub fn evaluate(config: &SystemConfig) -> Result<OutageReport> {
    config.validate()?;
    let mut diagnostics = BTreeMap::new();
    match config.mode {
        DuplexMode::Hd => {
            let (a2, b2) = hd_d_constants(config)?;
            let clamp_active = b2 > 0.0 && b2 * config.m_tx as f64 >= a2;
            let numeric = outage_hd_d(config, HdDownlinkVariant::NumericZIntegral)?;
            let closed = outage_hd_d(config, HdDownlinkVariant::ClosedForm1f1)?;
            if !clamp_active && (numeric - closed).abs() > HD_D_AGREEMENT_TOL {
                return Err(Error::Disagreement {
                    context: "outage_hd_d closed-form vs z-integral",
                    a: closed,
                    b: numeric,
                    tol: HD_D_AGREEMENT_TOL,
                });
            }
            let sbs = outage_hd_sbs(config)?;
            diagnostics.insert("hd_d_closed_form", closed);
            diagnostics.insert("hd_d_numeric", numeric);
            diagnostics.insert("clamp_active", clamp_active as u8 as f64);
            // The clamped z-integral is the reference once the analytic
            // continuation of the double sum stops being a probability.
            let (p_out_d, method) = if clamp_active {
                (numeric, Method::NumericIntegral)
            } else {
                (closed, Method::ClosedForm)
            };
            Ok(OutageReport {
                p_out_d,
                p_out_sbs: sbs,
                minmax: p_out_d.max(sbs),
                method,
                diagnostics,
            })
        }
        DuplexMode::Fd => {
            let d = outage_fd_d(config)?;
            diagnostics.insert("fd_d_direct_form", d.direct_form);
            diagnostics.insert("fd_d_tail_form", d.tail_form);
            diagnostics.insert("fd_d_clamped", d.clamped as u8 as f64);
            let gl = fd_sbs_gl_converged(config, DEFAULT_GL_ORDER)?;
            let reference = outage_fd_sbs_numeric(config)?;
            if (gl.value - reference).abs() > FD_SBS_AGREEMENT_TOL {
                return Err(Error::Disagreement {
                    context: "outage_fd_sbs GL vs q-integral",
                    a: gl.value,
                    b: reference,
                    tol: FD_SBS_AGREEMENT_TOL,
                });
            }
            diagnostics.insert("fd_sbs_gl_order", gl.order as f64);
            diagnostics.insert("fd_sbs_gl_rel_change", gl.rel_change);
            diagnostics.insert("fd_sbs_numeric", reference);
            let p_out_d = d.headline();
            Ok(OutageReport {
                p_out_d,
                p_out_sbs: gl.value,
                minmax: p_out_d.max(gl.value),
                method: Method::ClosedForm,
                diagnostics,
            })
        }
    }
}
