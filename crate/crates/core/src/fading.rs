//! Channel randomness and the distributions induced by it: Rayleigh draws,
//! the beamforming leakage ratio Z, the energy-recycling fixed point, the
//! recycled-power density and the FD leakage product q.
//!
//! Sampling is embarrassingly parallel: every worker derives a private
//! counter-based stream (ChaCha8, one stream id per batch) from the master
//! seed, so results are bit-reproducible for a given (seed, batch layout).

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics;
use crate::sysmodel::{DuplexMode, SystemConfig};

/// Expands a 64-bit master seed into a ChaCha8 key (SplitMix64 chain).
fn expand_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut bytes = [0_u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    bytes
}

/// Independent generator for stream `stream` of master seed `seed`.
/// Stream separation uses the ChaCha 64-bit stream counter, so any number
/// of workers can draw concurrently without coordination.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(expand_seed(seed));
    rng.set_stream(stream);
    rng
}

/// One circularly-symmetric complex Gaussian coefficient with unit variance
/// (real and imaginary parts each of variance 1/2).
pub fn sample_coefficient<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn sample_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<Complex64> {
    (0..len).map(|_| sample_coefficient(rng)).collect()
}

/// |Σᵢ hᵢ|² / ‖h‖² — the coherent-leakage gain of the MRT/MRC direction
/// toward a constant near-field channel. Lies in [0, len(h)].
pub fn coherence_ratio(h: &[Complex64]) -> f64 {
    let sum: Complex64 = h.iter().sum();
    let norm2: f64 = h.iter().map(|c| c.norm_sqr()).sum();
    if norm2 == 0.0 {
        return 0.0;
    }
    let z = sum.norm_sqr() / norm2;

    // MRT/MRC identities: with w = h/‖h‖, w^H h = ‖h‖ and
    // |w^H h|²/‖w‖² = ‖h‖².
    #[cfg(debug_assertions)]
    {
        let norm = norm2.sqrt();
        let w: Vec<Complex64> = h.iter().map(|c| c / norm).collect();
        let wh: Complex64 = w.iter().zip(h).map(|(w, h)| w.conj() * h).sum();
        let w_norm2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
        debug_assert!((wh.re - norm).abs() <= 1e-9 * norm.max(1.0));
        debug_assert!(wh.im.abs() <= 1e-9 * norm.max(1.0));
        debug_assert!((wh.norm_sqr() / w_norm2 - norm2).abs() <= 1e-9 * norm2.max(1.0));
    }

    z
}

/// One block-fading realization with its derived beamforming statistics.
#[derive(Debug, Clone)]
pub struct ChannelDraw {
    pub h_td: Vec<Complex64>,
    pub h_ur: Vec<Complex64>,
    pub h_ud: Complex64,
    pub z_td: f64,
    /// FD only; reception uses the transmit antennas in HD.
    pub z_ur: Option<f64>,
    /// z_td · z_ur, FD only.
    pub q: Option<f64>,
}

/// Samples all channel quantities of one block for the given configuration.
pub fn sample_draw<R: Rng>(config: &SystemConfig, rng: &mut R) -> ChannelDraw {
    match config.mode {
        DuplexMode::Hd => {
            let h_td = sample_vector(rng, config.m_tx as usize);
            let h_ur = sample_vector(rng, config.m_tx as usize);
            let h_ud = sample_coefficient(rng);
            let z_td = coherence_ratio(&h_td);
            ChannelDraw {
                h_td,
                h_ur,
                h_ud,
                z_td,
                z_ur: None,
                q: None,
            }
        }
        DuplexMode::Fd => {
            let h_td = sample_vector(rng, config.m_tx as usize);
            let h_ur = sample_vector(rng, config.n_rx as usize);
            let h_ud = sample_coefficient(rng);
            let z_td = coherence_ratio(&h_td);
            let z_ur = coherence_ratio(&h_ur);
            ChannelDraw {
                h_td,
                h_ur,
                h_ud,
                z_td,
                z_ur: Some(z_ur),
                q: Some(z_td * z_ur),
            }
        }
    }
}

/// Density of Z for an m-antenna array: f_Z(z) = ((m-1)/m)(1 - z/m)^{m-2}
/// on [0, m]. This is the generalized Pareto shape with ξ = -1/(m-1),
/// σ = m/(m-1), μ = 0.
pub fn gpd_pdf(z: f64, m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(
            "gpd_pdf",
            format!("m = {m} must be at least 2"),
        ));
    }
    let mf = m as f64;
    if !(0.0..=mf).contains(&z) {
        return Ok(0.0);
    }
    Ok((mf - 1.0) / mf * (1.0 - z / mf).powi(m as i32 - 2))
}

/// CDF companion of [`gpd_pdf`]: F_Z(z) = 1 - (1 - z/m)^{m-1}.
pub fn gpd_cdf(z: f64, m: u32) -> f64 {
    let mf = m as f64;
    if z <= 0.0 {
        0.0
    } else if z >= mf {
        1.0
    } else {
        1.0 - (1.0 - z / mf).powi(m as i32 - 1)
    }
}

/// Location/scale/shape triple of a generalized Pareto distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdParams {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

/// Maximum-likelihood GPD fit with the location pinned at 0.
///
/// Profiles the likelihood over θ = ξ/σ: given θ, the shape MLE is
/// ξ(θ) = mean(ln(1 + θ xᵢ)) and σ(θ) = ξ(θ)/θ. The shape is constrained
/// to ξ >= -1 where the unconstrained likelihood is unbounded.
pub fn fit_gpd(samples: &[f64]) -> Result<GpdParams> {
    const MIN_SAMPLES: usize = 10_000;
    if samples.len() < MIN_SAMPLES {
        return Err(Error::domain(
            "fit_gpd",
            format!("need at least {MIN_SAMPLES} samples, got {}", samples.len()),
        ));
    }
    if samples.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::domain(
            "fit_gpd",
            "samples must be finite and nonnegative",
        ));
    }
    let n = samples.len() as f64;
    let x_max = samples.iter().cloned().fold(0.0_f64, f64::max);
    let mean = samples.iter().sum::<f64>() / n;
    if x_max <= 0.0 {
        return Err(Error::domain("fit_gpd", "all samples are zero"));
    }

    let xi_of = |theta: f64| -> f64 {
        if theta == 0.0 {
            return 0.0;
        }
        samples.iter().map(|&x| (theta * x).ln_1p()).sum::<f64>() / n
    };
    // Profile log-likelihood per sample, up to a constant.
    let profile = |theta: f64| -> f64 {
        if theta == 0.0 {
            return -mean.ln() - 1.0;
        }
        let xi = xi_of(theta);
        if xi < -1.0 {
            return f64::NEG_INFINITY;
        }
        let sigma = if xi == 0.0 { mean } else { xi / theta };
        if !(sigma > 0.0) {
            return f64::NEG_INFINITY;
        }
        -sigma.ln() - xi - 1.0
    };

    // Lower end of the θ range: where the constrained shape hits -1.
    let mut lo = -(1.0 - 1e-12) / x_max;
    if xi_of(lo) < -1.0 {
        let mut a = lo;
        let mut b = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if xi_of(mid) < -1.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        lo = b;
    }
    let hi = 10.0 / mean;

    // Coarse grid then golden-section refinement around the best cell.
    const GRID: usize = 400;
    let mut best_theta = lo;
    let mut best_val = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let theta = lo + (hi - lo) * i as f64 / GRID as f64;
        let v = profile(theta);
        if v > best_val {
            best_val = v;
            best_theta = theta;
        }
    }
    if !best_val.is_finite() {
        return Err(Error::NonConvergence {
            context: "fit_gpd profile search",
            iterations: GRID,
        });
    }
    let cell = (hi - lo) / GRID as f64;
    let mut a = (best_theta - cell).max(lo);
    let mut b = (best_theta + cell).min(hi);
    let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = profile(c);
    let mut fd = profile(d);
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = profile(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = profile(d);
        }
        if (b - a).abs() < 1e-12 * (1.0 + best_theta.abs()) {
            break;
        }
    }
    let theta = 0.5 * (a + b);
    let xi = xi_of(theta).max(-1.0);
    let sigma = if theta == 0.0 || xi == 0.0 {
        mean
    } else {
        xi / theta
    };
    Ok(GpdParams {
        location: 0.0,
        scale: sigma,
        shape: xi,
    })
}

/// Recycled power for leakage gain `z`: the fixed point of
/// P_EH = τ c z (P_EH + P_RF), i.e. P_EH = τ c z P_RF / (1 - τ c z).
pub fn p_eh(z: f64, config: &SystemConfig) -> Result<f64> {
    if config.p_eh_antennas == 0 {
        return Ok(0.0);
    }
    let m = config.m_tx as f64;
    if !(0.0..=m).contains(&z) {
        return Err(Error::domain(
            "p_eh",
            format!("z = {z} outside [0, {m}]"),
        ));
    }
    let loop_gain = config.tau * config.recycling_gain() * z;
    if loop_gain >= 1.0 {
        return Err(Error::EnergyLoopDivergence { gain: loop_gain });
    }
    Ok(loop_gain * config.p_rf()? / (1.0 - loop_gain))
}

/// Cap-and-count variant used per draw by the Monte Carlo engine: the fixed
/// point diverges for τ c z >= 1, so the draw is capped at `cap` watts and
/// flagged instead of aborting the run.
pub fn p_eh_capped(tau_c: f64, z: f64, p_rf: f64, cap: f64) -> (f64, bool) {
    let loop_gain = tau_c * z;
    if loop_gain >= 1.0 {
        return (cap, true);
    }
    let p = loop_gain * p_rf / (1.0 - loop_gain);
    if p > cap {
        (cap, true)
    } else {
        (p, false)
    }
}

/// Upper end of the recycled-power support, infinite when the loop gain can
/// reach 1 inside the Z support.
pub fn p_eh_support_max(config: &SystemConfig) -> Result<f64> {
    let m = config.m_tx as f64;
    let b1 = config.tau * config.recycling_gain();
    let a1 = b1 * config.p_rf()?;
    if b1 * m >= 1.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(a1 * m / (1.0 - b1 * m))
    }
}

/// Density of the recycled power, by change of variables through the
/// fixed-point map z ↦ a₁ z / (1 - b₁ z) with a₁ = τ c P_RF, b₁ = τ c.
pub fn p_eh_pdf(p: f64, config: &SystemConfig) -> Result<f64> {
    if config.p_eh_antennas == 0 {
        return Err(Error::domain(
            "p_eh_pdf",
            "recycled power is degenerate at 0 without EH antennas",
        ));
    }
    let support_max = p_eh_support_max(config)?;
    if !(0.0..=support_max).contains(&p) {
        return Err(Error::domain(
            "p_eh_pdf",
            format!("p = {p} outside the support [0, {support_max}]"),
        ));
    }
    let b1 = config.tau * config.recycling_gain();
    let a1 = b1 * config.p_rf()?;
    let denom = a1 + b1 * p;
    let z = p / denom;
    Ok(gpd_pdf(z, config.m_tx)? * a1 / (denom * denom))
}

/// Density of q = z_td·z_ur on (0, MN).
///
/// In w = q/(MN) the density reads
/// (M-1)(N-1) β(M-1, N-1) (1-w)^{M+N-3} ₂F₁(N-1, M-1; M+N-2; 1-w) / (MN),
/// which is the Pfaff-transformed form of the ₂F₁(N-1, N-1; M+N-2; 1-MN/q)
/// expression; near w = 0 the hypergeometric factor is evaluated through
/// its logarithmic expansion at unit argument.
pub fn q_pdf(q: f64, m: u32, n: u32) -> Result<f64> {
    if m < 2 || n < 2 {
        return Err(Error::domain(
            "q_pdf",
            format!("antenna counts ({m}, {n}) must both be at least 2"),
        ));
    }
    let mf = m as f64;
    let nf = n as f64;
    let mn = mf * nf;
    if !(q > 0.0 && q < mn) {
        return Err(Error::domain(
            "q_pdf",
            format!("q = {q} outside (0, {mn})"),
        ));
    }
    let w = q / mn;
    let a = nf - 1.0;
    let b = mf - 1.0;
    let f21 = if w < 0.25 {
        numerics::hyp2f1_near_unit_log_case(a, b, w)?
    } else {
        numerics::hyp2f1(a, b, a + b, 1.0 - w)?
    };
    let k = (mf - 1.0) * (nf - 1.0) * numerics::beta(mf - 1.0, nf - 1.0)?;
    Ok(k * (1.0 - w).powi((m + n) as i32 - 3) * f21 / mn)
}
