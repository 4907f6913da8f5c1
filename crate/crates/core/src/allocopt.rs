//! Exhaustive-search solvers for the min-max antenna split and the
//! minimum-RF-chain problem.
//!
//! Splits are evaluated independently (in parallel) and reduced by an
//! associative min, so results never depend on scheduling. The analytic
//! backend is the default; a Monte Carlo backend exists for arbitration
//! runs.

use rayon::prelude::*;

use crate::closedform;
use crate::error::{Error, Result};
use crate::mcsim;
use crate::sysmodel::{DuplexMode, SystemConfig};

/// Evaluator behind the exhaustive search.
#[derive(Debug, Clone, Copy)]
pub enum Backend {
    ClosedForm,
    /// Same seed for every split: common random numbers keep the split
    /// comparison sharp.
    MonteCarlo { samples: u64, seed: u64 },
}

/// One point of the per-split outage curve.
#[derive(Debug, Clone, Copy)]
pub struct SplitPoint {
    pub m_tx: u32,
    pub p_out_d: f64,
    pub p_out_sbs: f64,
}

impl SplitPoint {
    pub fn minmax(&self) -> f64 {
        self.p_out_d.max(self.p_out_sbs)
    }
}

/// Solver output for both problems. `q_min`/`feasible` are meaningful for
/// the minimum-chain problem; the split fields always describe the best
/// split found at the reported chain count.
#[derive(Debug, Clone)]
pub struct AllocationResult {
    pub m_opt: u32,
    pub n_opt: u32,
    pub minmax_outage: f64,
    pub p_out_d: f64,
    pub p_out_sbs: f64,
    /// Exactly q - 3 entries, one per split with m_tx in [2, q-2].
    pub per_split_curve: Vec<SplitPoint>,
    pub q_min: Option<u32>,
    pub feasible: bool,
}

fn evaluate_split(base: &SystemConfig, q: u32, m: u32, backend: Backend) -> Result<SplitPoint> {
    let mut cfg = base.clone();
    cfg.mode = DuplexMode::Fd;
    cfg.tau = 1.0;
    cfg.q_chains = q;
    cfg.m_tx = m;
    cfg.n_rx = q - m;
    match backend {
        Backend::ClosedForm => match closedform::evaluate(&cfg) {
            Ok(report) => Ok(SplitPoint {
                m_tx: m,
                p_out_d: report.p_out_d,
                p_out_sbs: report.p_out_sbs,
            }),
            // A split whose circuit consumes the whole budget cannot
            // transmit at all; it stays in the curve as a certain outage.
            Err(Error::Infeasible(_)) => Ok(SplitPoint {
                m_tx: m,
                p_out_d: 1.0,
                p_out_sbs: 1.0,
            }),
            Err(e) => Err(e),
        },
        Backend::MonteCarlo { samples, seed } => {
            if cfg.p_rf().is_err() {
                return Ok(SplitPoint {
                    m_tx: m,
                    p_out_d: 1.0,
                    p_out_sbs: 1.0,
                });
            }
            let (d, sbs) = mcsim::mc_fd(&cfg, samples, seed)?;
            Ok(SplitPoint {
                m_tx: m,
                p_out_d: d.p_hat,
                p_out_sbs: sbs.p_hat,
            })
        }
    }
}

/// Min-max antenna split at `q` total chains with the given backend.
pub fn solve_p1_with_backend(
    config: &SystemConfig,
    q: u32,
    backend: Backend,
) -> Result<AllocationResult> {
    if q < 4 {
        return Err(Error::Infeasible(format!(
            "q = {q} < 4 leaves no split with at least 2 antennas per side"
        )));
    }
    let curve: Vec<SplitPoint> = (2..=q - 2)
        .into_par_iter()
        .map(|m| evaluate_split(config, q, m, backend))
        .collect::<Result<_>>()?;

    // Ascending scan with strict improvement: ties break toward smaller M.
    let mut best: Option<&SplitPoint> = None;
    for point in &curve {
        let better = match best {
            None => true,
            Some(b) => point.minmax() < b.minmax(),
        };
        if better {
            best = Some(point);
        }
    }
    let best = *best.expect("q >= 4 guarantees at least one split");
    if best.minmax() >= 1.0 {
        return Err(Error::Infeasible(format!(
            "circuit power exceeds the supply at every split of q = {q}"
        )));
    }
    Ok(AllocationResult {
        m_opt: best.m_tx,
        n_opt: q - best.m_tx,
        minmax_outage: best.minmax(),
        p_out_d: best.p_out_d,
        p_out_sbs: best.p_out_sbs,
        per_split_curve: curve,
        q_min: None,
        feasible: true,
    })
}

/// Min-max antenna split on the analytic backend.
pub fn solve_p1(config: &SystemConfig, q: u32) -> Result<AllocationResult> {
    solve_p1_with_backend(config, q, Backend::ClosedForm)
}

/// Smallest chain count in [4, q_max] whose best split meets the outage
/// target `delta`; `feasible = false` when even q_max falls short.
/// Minimality holds by construction: every smaller q was solved and
/// rejected before the returned one.
pub fn solve_p2(config: &SystemConfig, delta: f64, q_max: u32) -> Result<AllocationResult> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain(
            "solve_p2",
            format!("delta = {delta} must lie in (0, 1]"),
        ));
    }
    if q_max < 4 {
        return Err(Error::domain(
            "solve_p2",
            format!("q_max = {q_max} must be at least 4"),
        ));
    }
    let mut last: Option<AllocationResult> = None;
    for q in 4..=q_max {
        match solve_p1(config, q) {
            Ok(mut result) => {
                if result.minmax_outage <= delta {
                    result.q_min = Some(q);
                    result.feasible = true;
                    return Ok(result);
                }
                last = Some(result);
            }
            Err(Error::Infeasible(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    let mut result = last.ok_or_else(|| {
        Error::Infeasible(format!("no feasible split at any q in [4, {q_max}]"))
    })?;
    result.q_min = None;
    result.feasible = false;
    Ok(result)
}

/// Outcome of one point of the EH-antenna sweep.
#[derive(Debug, Clone)]
pub struct EhSweepPoint {
    pub p_eh_antennas: u32,
    pub m_tx: u32,
    pub n_rx: u32,
    pub p_out_d: f64,
    pub p_out_sbs: f64,
    pub minmax: f64,
}

/// Min-max outage across EH-antenna counts at fixed total chains, with the
/// split either fixed at the config's or re-optimized per point.
pub fn sweep_eh_antennas(
    config: &SystemConfig,
    p_values: &[u32],
    optimize_split: bool,
) -> Result<Vec<EhSweepPoint>> {
    p_values
        .iter()
        .map(|&p| {
            let mut cfg = config.clone();
            cfg.p_eh_antennas = p;
            if optimize_split {
                let r = solve_p1(&cfg, cfg.q_chains)?;
                Ok(EhSweepPoint {
                    p_eh_antennas: p,
                    m_tx: r.m_opt,
                    n_rx: r.n_opt,
                    p_out_d: r.p_out_d,
                    p_out_sbs: r.p_out_sbs,
                    minmax: r.minmax_outage,
                })
            } else {
                let report = closedform::evaluate(&cfg)?;
                Ok(EhSweepPoint {
                    p_eh_antennas: p,
                    m_tx: cfg.m_tx,
                    n_rx: cfg.n_rx,
                    p_out_d: report.p_out_d,
                    p_out_sbs: report.p_out_sbs,
                    minmax: report.minmax,
                })
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_base() -> SystemConfig {
        let mut c = SystemConfig::default();
        c.mode = DuplexMode::Fd;
        c.tau = 1.0;
        c.q_chains = 16;
        c.m_tx = 8;
        c.n_rx = 8;
        c.phi_ud_db = f64::NEG_INFINITY;
        c
    }

    #[test]
    fn symmetric_link_optimum_at_half() {
        // Equal rates, equal path gains, no self-interference, no
        // recycling and ideal power make the problem exactly M ↔ N
        // symmetric.
        let mut cfg = fd_base();
        cfg.zeta_db = f64::NEG_INFINITY;
        cfg.ideal_rf = true;
        cfg.r_d = 4.0;
        cfg.r_sbs = 4.0;
        cfg.phi_td_db = -80.0;
        cfg.phi_ur_db = -80.0 + (cfg.p_u_w / cfg.p_source_w).log10() * -10.0;
        // φ_ur chosen so that P_u φ_ur = P_RF φ_td: thresholds coincide.
        let result = solve_p1(&cfg, 16).unwrap();
        assert_eq!(result.per_split_curve.len(), 13);
        assert_eq!(result.m_opt, 8);
        assert_eq!(result.n_opt, 8);
        for (i, p) in result.per_split_curve.iter().enumerate() {
            let mirror = &result.per_split_curve[result.per_split_curve.len() - 1 - i];
            assert!(
                (p.minmax() - mirror.minmax()).abs() <= 1e-9 * p.minmax().max(1e-300),
                "curve not symmetric at m={}",
                p.m_tx
            );
        }
    }

    #[test]
    fn optimality_by_construction() {
        let mut cfg = fd_base();
        cfg.phi_si_db = -10.0;
        cfg.r_d = 5.0;
        cfg.r_sbs = 3.0;
        let result = solve_p1(&cfg, 16).unwrap();
        for p in &result.per_split_curve {
            assert!(result.minmax_outage <= p.minmax() + 1e-300);
        }
        assert_eq!(
            result.minmax_outage,
            result.p_out_d.max(result.p_out_sbs)
        );
    }

    #[test]
    fn optimum_adjacent_to_curve_crossing() {
        // Along increasing M the downlink improves and the uplink worsens;
        // the argmin must sit next to the sign change of their difference.
        let mut cfg = fd_base();
        cfg.phi_si_db = -10.0;
        cfg.r_d = 5.0;
        cfg.r_sbs = 3.0;
        let result = solve_p1(&cfg, 16).unwrap();
        let curve = &result.per_split_curve;
        let mut crossing = None;
        for w in curve.windows(2) {
            let s0 = curve_sign(&w[0]);
            let s1 = curve_sign(&w[1]);
            if s0 != s1 {
                crossing = Some(w[0].m_tx);
                break;
            }
        }
        let crossing = crossing.expect("difference must change sign");
        assert!(
            (result.m_opt as i64 - crossing as i64).abs() <= 1,
            "m_opt {} not adjacent to crossing at {}",
            result.m_opt,
            crossing
        );
        // Monotone structure on each side.
        for w in curve.windows(2) {
            assert!(
                w[1].p_out_d <= w[0].p_out_d * (1.0 + 1e-9) + 1e-300,
                "downlink not nonincreasing in M"
            );
            assert!(
                w[1].p_out_sbs + 1e-300 >= w[0].p_out_sbs * (1.0 - 1e-9),
                "uplink not nondecreasing in M"
            );
        }
    }

    fn curve_sign(p: &SplitPoint) -> bool {
        p.p_out_d >= p.p_out_sbs
    }

    #[test]
    fn p1_rejects_tiny_q() {
        let cfg = fd_base();
        assert!(matches!(solve_p1(&cfg, 3), Err(Error::Infeasible(_))));
    }

    #[test]
    fn p2_vacuous_target_needs_four_chains() {
        let cfg = fd_base();
        let r = solve_p2(&cfg, 1.0, 16).unwrap();
        assert_eq!(r.q_min, Some(4));
        assert!(r.feasible);
    }

    #[test]
    fn p2_minimality_and_infeasibility() {
        let mut cfg = fd_base();
        cfg.phi_si_db = -10.0;
        cfg.r_d = 3.0;
        cfg.r_sbs = 2.0;
        let r = solve_p2(&cfg, 1e-4, 16).unwrap();
        assert!(r.feasible);
        let q_min = r.q_min.unwrap();
        assert!(r.minmax_outage <= 1e-4);
        if q_min > 4 {
            let prev = solve_p1(&cfg, q_min - 1).unwrap();
            assert!(
                prev.per_split_curve.iter().all(|p| p.minmax() > 1e-4),
                "q_min - 1 should violate the target at every split"
            );
        }
        // A target below what q_max can reach is reported infeasible.
        let hopeless = solve_p2(&cfg, 1e-300, 6).unwrap();
        assert!(!hopeless.feasible);
        assert_eq!(hopeless.q_min, None);
    }

    #[test]
    fn eh_sweep_baseline_matches_no_recycling() {
        let mut cfg = fd_base();
        cfg.q_chains = 8;
        cfg.m_tx = 4;
        cfg.n_rx = 4;
        cfg.phi_si_db = -10.0;
        let points = sweep_eh_antennas(&cfg, &[0, 2, 4], false).unwrap();
        assert_eq!(points.len(), 3);
        let direct = closedform::evaluate(&cfg).unwrap();
        assert_eq!(points[0].minmax, direct.minmax);
        assert_eq!(points[0].p_eh_antennas, 0);
    }

    #[test]
    fn solver_is_deterministic() {
        let mut cfg = fd_base();
        cfg.phi_si_db = -10.0;
        let a = solve_p1(&cfg, 16).unwrap();
        let b = solve_p1(&cfg, 16).unwrap();
        assert_eq!(a.m_opt, b.m_opt);
        assert_eq!(a.minmax_outage, b.minmax_outage);
    }
}
