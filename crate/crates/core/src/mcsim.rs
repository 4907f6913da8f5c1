//! Draw-by-draw Monte Carlo oracle for both duplex modes.
//!
//! Every SNR/SINR chain is simulated literally: per draw the channel
//! vectors are sampled, the beamforming statistics and the recycling fixed
//! point are computed exactly, and the two outage events are counted.
//! This engine arbitrates every analytic evaluator in [`crate::closedform`].
//!
//! Work is partitioned into fixed batches of 2^16 draws; batch `i` owns
//! ChaCha stream `i` of the master seed, and batch results are combined by
//! integer sums. Estimates are therefore bit-identical for a given
//! (config, n_samples, seed) regardless of worker count or scheduling.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::fading::{p_eh_capped, stream_rng};
use crate::sysmodel::{DuplexMode, SystemConfig};

/// Draws per work unit. Fixed so that result partitioning never depends on
/// the machine.
pub const BATCH_SIZE: u64 = 1 << 16;

/// Cap applied to the recycled power when the energy loop diverges,
/// expressed as a multiple of the supply power.
pub const EH_CAP_FACTOR: f64 = 10.0;

/// Frequency estimate of one outage event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub n_samples: u64,
    /// 95% Wald halfwidth; rule-of-three bound 3/n when no events (or only
    /// events) were observed.
    pub ci_halfwidth_95: f64,
    /// Draws where the energy-loop fixed point diverged and the recycled
    /// power was capped.
    pub capped_draws: u64,
    pub seed: u64,
    /// Set by the target-driven runner when the CI goal was not reached
    /// within the sample budget.
    pub budget_exhausted: bool,
}

impl McEstimate {
    fn from_counts(events: u64, n: u64, capped: u64, seed: u64) -> McEstimate {
        let p_hat = events as f64 / n as f64;
        let ci = if events == 0 || events == n {
            3.0 / n as f64
        } else {
            1.96 * (p_hat * (1.0 - p_hat) / n as f64).sqrt()
        };
        McEstimate {
            p_hat,
            n_samples: n,
            ci_halfwidth_95: ci,
            capped_draws: capped,
            seed,
            budget_exhausted: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Counters {
    d_events: u64,
    sbs_events: u64,
    capped: u64,
}

impl Counters {
    fn merge(self, other: Counters) -> Counters {
        Counters {
            d_events: self.d_events + other.d_events,
            sbs_events: self.sbs_events + other.sbs_events,
            capped: self.capped + other.capped,
        }
    }
}

/// Constants hoisted out of the draw loop.
struct Precomputed {
    m: usize,
    n: usize,
    tau_c: f64,
    p_rf: f64,
    cap: f64,
    /// SNR threshold 2^{r_d/τ} - 1 for the downlink event.
    thr_d: f64,
    /// SNR threshold for the uplink event (2^{r_sbs/(1-τ)} - 1 in HD,
    /// 2^{r_sbs} - 1 in FD).
    thr_sbs: f64,
    phi_td: f64,
    phi_ur_pu: f64,
    phi_ud_pu: f64,
    noise: f64,
    si_factor: f64,
}

impl Precomputed {
    fn new(config: &SystemConfig) -> Result<Precomputed> {
        config.validate()?;
        let (thr_d, thr_sbs) = match config.mode {
            DuplexMode::Hd => (
                (config.r_d / config.tau).exp2() - 1.0,
                (config.r_sbs / (1.0 - config.tau)).exp2() - 1.0,
            ),
            DuplexMode::Fd => (config.r_d.exp2() - 1.0, config.r_sbs.exp2() - 1.0),
        };
        Ok(Precomputed {
            m: config.m_tx as usize,
            n: config.n_rx as usize,
            tau_c: config.tau * config.recycling_gain(),
            p_rf: config.p_rf()?,
            cap: EH_CAP_FACTOR * config.p_source_w,
            thr_d,
            thr_sbs,
            phi_td: config.phi_td(),
            phi_ur_pu: config.phi_ur() * config.p_u_w,
            phi_ud_pu: config.phi_ud() * config.p_u_w,
            noise: config.noise_w,
            si_factor: config.si_factor(),
        })
    }
}

/// Norm-square and coherence ratio of a fresh complex Gaussian vector,
/// accumulated without allocation. |h_i|² are unit-mean exponentials, so
/// the norm-square is Gamma(len, 1).
#[inline]
fn sample_stats<R: Rng>(rng: &mut R, len: usize) -> (f64, f64) {
    let mut sum_re = 0.0_f64;
    let mut sum_im = 0.0_f64;
    let mut norm2 = 0.0_f64;
    for _ in 0..len {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        norm2 += 0.5 * (re * re + im * im);
        sum_re += re;
        sum_im += im;
    }
    let z = 0.5 * (sum_re * sum_re + sum_im * sum_im) / norm2;
    (norm2, z)
}

fn run_batch_hd(pre: &Precomputed, seed: u64, batch: u64, count: u64) -> Counters {
    let mut rng = stream_rng(seed, batch);
    let mut counters = Counters::default();
    for _ in 0..count {
        let (norm2_td, z_td) = sample_stats(&mut rng, pre.m);
        let (p_eh, capped) = p_eh_capped(pre.tau_c, z_td, pre.p_rf, pre.cap);
        if capped {
            counters.capped += 1;
        }
        let gamma_d = pre.phi_td * (p_eh + pre.p_rf) * norm2_td / pre.noise;
        if gamma_d < pre.thr_d {
            counters.d_events += 1;
        }
        let (norm2_ur, _z_ur) = sample_stats(&mut rng, pre.m);
        let gamma_sbs = pre.phi_ur_pu * norm2_ur / pre.noise;
        if gamma_sbs < pre.thr_sbs {
            counters.sbs_events += 1;
        }
    }
    counters
}

fn run_batch_fd(pre: &Precomputed, seed: u64, batch: u64, count: u64) -> Counters {
    let mut rng = stream_rng(seed, batch);
    let mut counters = Counters::default();
    for _ in 0..count {
        let (norm2_td, z_td) = sample_stats(&mut rng, pre.m);
        let (norm2_ur, z_ur) = sample_stats(&mut rng, pre.n);
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let h_ud_mag2 = 0.5 * (re * re + im * im);

        let (p_eh, capped) = p_eh_capped(pre.tau_c, z_td, pre.p_rf, pre.cap);
        if capped {
            counters.capped += 1;
        }
        let total_power = p_eh + pre.p_rf;

        let gamma_d =
            pre.phi_td * total_power * norm2_td / (pre.phi_ud_pu * h_ud_mag2 + pre.noise);
        if gamma_d < pre.thr_d {
            counters.d_events += 1;
        }

        let q = z_td * z_ur;
        let gamma_sbs =
            pre.phi_ur_pu * norm2_ur / (pre.si_factor * total_power * q + pre.noise);
        if gamma_sbs < pre.thr_sbs {
            counters.sbs_events += 1;
        }
    }
    counters
}

fn run_range(
    pre: &Precomputed,
    mode: DuplexMode,
    seed: u64,
    first_batch: u64,
    n_samples: u64,
) -> Counters {
    let n_batches = n_samples.div_ceil(BATCH_SIZE);
    (0..n_batches)
        .into_par_iter()
        .map(|i| {
            let count = (n_samples - i * BATCH_SIZE).min(BATCH_SIZE);
            match mode {
                DuplexMode::Hd => run_batch_hd(pre, seed, first_batch + i, count),
                DuplexMode::Fd => run_batch_fd(pre, seed, first_batch + i, count),
            }
        })
        .reduce(Counters::default, Counters::merge)
}

fn estimates(c: Counters, n: u64, seed: u64) -> (McEstimate, McEstimate) {
    (
        McEstimate::from_counts(c.d_events, n, c.capped, seed),
        McEstimate::from_counts(c.sbs_events, n, c.capped, seed),
    )
}

/// HD outage frequencies for downlink and uplink.
pub fn mc_hd(config: &SystemConfig, n_samples: u64, seed: u64) -> Result<(McEstimate, McEstimate)> {
    let pre = Precomputed::new(config)?;
    let c = run_range(&pre, DuplexMode::Hd, seed, 0, n_samples);
    Ok(estimates(c, n_samples, seed))
}

/// FD outage frequencies for downlink and uplink.
pub fn mc_fd(config: &SystemConfig, n_samples: u64, seed: u64) -> Result<(McEstimate, McEstimate)> {
    let pre = Precomputed::new(config)?;
    let c = run_range(&pre, DuplexMode::Fd, seed, 0, n_samples);
    Ok(estimates(c, n_samples, seed))
}

/// Mode dispatch.
pub fn mc_pair(config: &SystemConfig, n_samples: u64, seed: u64) -> Result<(McEstimate, McEstimate)> {
    match config.mode {
        DuplexMode::Hd => mc_hd(config, n_samples, seed),
        DuplexMode::Fd => mc_fd(config, n_samples, seed),
    }
}

/// Runs whole batches until both 95% halfwidths reach `target_ci` or the
/// sample budget is exhausted (then the estimates carry a raised
/// `budget_exhausted` flag). Batch order is fixed, so the outcome is
/// deterministic for a given (config, target, budget, seed).
pub fn mc_estimate_with_target(
    config: &SystemConfig,
    target_ci: f64,
    max_samples: u64,
    seed: u64,
) -> Result<(McEstimate, McEstimate)> {
    if !(target_ci > 0.0) {
        return Err(crate::error::Error::domain(
            "mc_estimate_with_target",
            format!("target_ci = {target_ci} must be positive"),
        ));
    }
    let pre = Precomputed::new(config)?;
    const CHUNK_BATCHES: u64 = 16;
    let mut total = Counters::default();
    let mut drawn = 0_u64;
    let mut next_batch = 0_u64;
    while drawn < max_samples {
        let chunk = (CHUNK_BATCHES * BATCH_SIZE).min(max_samples - drawn);
        let c = run_range(&pre, config.mode, seed, next_batch, chunk);
        next_batch += chunk.div_ceil(BATCH_SIZE);
        drawn += chunk;
        total = total.merge(c);
        let (d, sbs) = estimates(total, drawn, seed);
        if d.ci_halfwidth_95 <= target_ci && sbs.ci_halfwidth_95 <= target_ci {
            return Ok((d, sbs));
        }
    }
    let (mut d, mut sbs) = estimates(total, drawn, seed);
    if d.ci_halfwidth_95 > target_ci || sbs.ci_halfwidth_95 > target_ci {
        d.budget_exhausted = true;
        sbs.budget_exhausted = true;
    }
    Ok((d, sbs))
}
