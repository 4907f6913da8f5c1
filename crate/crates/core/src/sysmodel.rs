//! System configuration, unit handling and the transceiver
//! power-consumption model.
//!
//! All computation inside the crate happens in watts and linear gains; dB
//! values appear only at the configuration boundary, where `*_db` keys are
//! converted as 10^(dB/10).

use std::fmt;

use crate::error::{Error, Result};

/// Duplexing scheme of the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplexMode {
    Hd,
    Fd,
}

impl fmt::Display for DuplexMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DuplexMode::Hd => write!(f, "HD"),
            DuplexMode::Fd => write!(f, "FD"),
        }
    }
}

/// Which convention relates the radiated power to the supply budget.
///
/// `Paper` uses P_RF = (P_G - P_c)/(1 - α); `Conserving` uses the
/// energy-balance form P_RF = (P_G - P_c)/(1 + α). The two coincide at
/// α = 0, the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaVariant {
    #[default]
    Paper,
    Conserving,
}

impl fmt::Display for AlphaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaVariant::Paper => write!(f, "paper"),
            AlphaVariant::Conserving => write!(f, "conserving"),
        }
    }
}

/// Per-block power consumption of the RF chain elements, in watts.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitProfile {
    pub p_dac_w: f64,
    pub p_adc_w: f64,
    pub p_mix_w: f64,
    pub p_lna_w: f64,
    pub p_ifa_w: f64,
    pub p_filt_w: f64,
    pub p_filr_w: f64,
    pub p_syn_w: f64,
}

impl Default for CircuitProfile {
    fn default() -> Self {
        CircuitProfile {
            p_dac_w: 1.0e-3,
            p_adc_w: 1.0e-3,
            p_mix_w: 30.3e-3,
            p_lna_w: 20.0e-3,
            p_ifa_w: 3.0e-3,
            p_filt_w: 2.5e-3,
            p_filr_w: 2.5e-3,
            p_syn_w: 50.0e-3,
        }
    }
}

/// Total circuit consumption for `m_tx` transmit and `n_rx` receive chains:
/// P_c = M(P_dac + P_mix + P_filt) + 2 P_syn + N(P_lna + P_mix + P_ifa + P_filr + P_adc).
pub fn circuit_power(m_tx: u32, n_rx: u32, circuit: &CircuitProfile) -> f64 {
    let tx = circuit.p_dac_w + circuit.p_mix_w + circuit.p_filt_w;
    let rx =
        circuit.p_lna_w + circuit.p_mix_w + circuit.p_ifa_w + circuit.p_filr_w + circuit.p_adc_w;
    m_tx as f64 * tx + 2.0 * circuit.p_syn_w + n_rx as f64 * rx
}

/// α = ε/η_pa - 1 from the peak-to-average ratio and the amplifier drain
/// efficiency.
pub fn amp_alpha_from(epsilon: f64, eta_pa: f64) -> Result<f64> {
    if !(eta_pa > 0.0 && eta_pa <= 1.0) {
        return Err(Error::domain(
            "amp_alpha_from",
            format!("eta_pa = {eta_pa} must lie in (0, 1]"),
        ));
    }
    let alpha = epsilon / eta_pa - 1.0;
    if alpha < 0.0 {
        return Err(Error::domain(
            "amp_alpha_from",
            format!("epsilon = {epsilon} below eta_pa = {eta_pa} gives negative alpha"),
        ));
    }
    Ok(alpha)
}

/// Radiated power left after circuit consumption.
pub fn transmit_power_rf(
    p_source_w: f64,
    p_c_w: f64,
    amp_alpha: f64,
    variant: AlphaVariant,
) -> Result<f64> {
    if p_c_w >= p_source_w {
        return Err(Error::Infeasible(format!(
            "circuit power {p_c_w} W consumes the whole {p_source_w} W budget"
        )));
    }
    match variant {
        AlphaVariant::Paper => {
            if amp_alpha >= 1.0 {
                return Err(Error::Infeasible(format!(
                    "alpha = {amp_alpha} >= 1 leaves no transmit power under the paper variant"
                )));
            }
            Ok((p_source_w - p_c_w) / (1.0 - amp_alpha))
        }
        AlphaVariant::Conserving => Ok((p_source_w - p_c_w) / (1.0 + amp_alpha)),
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10.0_f64.powf(db / 10.0)
}

/// Validation failures carry one distinct code per violated constraint.
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("E_FD_SPLIT: m_tx + n_rx = {m} + {n} must equal q_chains = {q} in FD")]
    FdSplitMismatch { m: u32, n: u32, q: u32 },
    #[error("E_FD_TX_MIN: FD requires m_tx >= 2, got {0}")]
    FdTxTooFew(u32),
    #[error("E_FD_RX_MIN: FD requires n_rx >= 2, got {0}")]
    FdRxTooFew(u32),
    #[error("E_HD_SPLIT: HD uses all chains for both directions; m_tx = {m} must equal q_chains = {q}")]
    HdAntennaMismatch { m: u32, q: u32 },
    #[error("E_HD_RX: HD reception uses the same antennas; n_rx = {n} must equal q_chains = {q}")]
    HdRxMismatch { n: u32, q: u32 },
    #[error("E_HD_MIN: HD requires at least 2 antennas, got {0}")]
    HdTooFewAntennas(u32),
    #[error("E_TAU_HD: tau = {0} must lie in (0, 1) for HD")]
    TauOutOfRangeHd(f64),
    #[error("E_TAU_FD: tau = {0} must equal 1 for FD")]
    TauNotUnityFd(f64),
    #[error("E_P_SOURCE: p_source_w = {0} must be positive")]
    NonPositiveSourcePower(f64),
    #[error("E_P_U: p_u_w = {0} must be positive")]
    NonPositiveUplinkPower(f64),
    #[error("E_NOISE: noise_w = {0} must be positive")]
    NonPositiveNoise(f64),
    #[error("E_ETA: eta = {0} must lie in (0, 1]")]
    EtaOutOfRange(f64),
    #[error("E_ZETA: zeta_db = {0} must be <= 0")]
    ZetaPositiveDb(f64),
    #[error("E_G_MAG: g_mag2 = {0} must be positive")]
    NonPositiveGMag(f64),
    #[error("E_GS_MAG: gs_mag2 = {0} must be positive")]
    NonPositiveGsMag(f64),
    #[error("E_RATE_D: r_d = {0} must be positive")]
    NonPositiveRateD(f64),
    #[error("E_RATE_SBS: r_sbs = {0} must be positive")]
    NonPositiveRateSbs(f64),
    #[error("E_ALPHA: amp_alpha = {0} must be nonnegative")]
    NegativeAmpAlpha(f64),
    #[error("E_CIRCUIT: circuit element {name} = {value} must be positive")]
    NonPositiveCircuitPower { name: &'static str, value: f64 },
    #[error("E_PARSE: line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("E_UNKNOWN_KEY: line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("E_BAD_FIELD: {key}: {message}")]
    BadFieldValue { key: String, message: String },
}

/// Full parameter set of the link. Immutable after validation; share freely
/// across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub q_chains: u32,
    pub m_tx: u32,
    pub n_rx: u32,
    pub p_eh_antennas: u32,
    pub mode: DuplexMode,
    pub tau: f64,
    pub p_source_w: f64,
    pub p_u_w: f64,
    pub noise_w: f64,
    pub eta: f64,
    pub zeta_db: f64,
    pub phi_td_db: f64,
    pub phi_ur_db: f64,
    pub phi_ud_db: f64,
    pub phi_g_db: f64,
    pub phi_si_db: f64,
    pub g_mag2: f64,
    pub gs_mag2: f64,
    pub r_d: f64,
    pub r_sbs: f64,
    pub amp_alpha: f64,
    pub alpha_variant: AlphaVariant,
    /// When set, the radiated power equals the full supply budget
    /// (no circuit accounting); for idealized comparisons.
    pub ideal_rf: bool,
    /// Receive chains counted in HD circuit accounting. HD uses all Q
    /// antennas for both directions, so the default counts Q; time-shared
    /// accounting can be modeled by overriding this.
    pub hd_circuit_rx_chains: Option<u32>,
    pub circuit: CircuitProfile,
}

impl Default for SystemConfig {
    /// Baseline values of the reference setup: Q = 16 HD, 15 W supply,
    /// -80 dB link path gains, 4 bps/Hz each way, recycling disabled.
    fn default() -> Self {
        SystemConfig {
            q_chains: 16,
            m_tx: 16,
            n_rx: 16,
            p_eh_antennas: 0,
            mode: DuplexMode::Hd,
            tau: 0.5,
            p_source_w: 15.0,
            p_u_w: 0.2,
            noise_w: 1.0e-10,
            eta: 0.6,
            zeta_db: -100.0,
            phi_td_db: -80.0,
            phi_ur_db: -80.0,
            phi_ud_db: -60.0,
            phi_g_db: -15.0,
            phi_si_db: 0.0,
            g_mag2: 1.0,
            gs_mag2: 1.0,
            r_d: 4.0,
            r_sbs: 4.0,
            amp_alpha: 0.0,
            alpha_variant: AlphaVariant::Paper,
            ideal_rf: false,
            hd_circuit_rx_chains: None,
            circuit: CircuitProfile::default(),
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        match self.mode {
            DuplexMode::Fd => {
                if self.m_tx < 2 {
                    return Err(ConfigError::FdTxTooFew(self.m_tx));
                }
                if self.n_rx < 2 {
                    return Err(ConfigError::FdRxTooFew(self.n_rx));
                }
                if self.m_tx + self.n_rx != self.q_chains {
                    return Err(ConfigError::FdSplitMismatch {
                        m: self.m_tx,
                        n: self.n_rx,
                        q: self.q_chains,
                    });
                }
                if self.tau != 1.0 {
                    return Err(ConfigError::TauNotUnityFd(self.tau));
                }
            }
            DuplexMode::Hd => {
                if self.m_tx < 2 {
                    return Err(ConfigError::HdTooFewAntennas(self.m_tx));
                }
                if self.m_tx != self.q_chains {
                    return Err(ConfigError::HdAntennaMismatch {
                        m: self.m_tx,
                        q: self.q_chains,
                    });
                }
                if self.n_rx != self.q_chains {
                    return Err(ConfigError::HdRxMismatch {
                        n: self.n_rx,
                        q: self.q_chains,
                    });
                }
                if !(self.tau > 0.0 && self.tau < 1.0) {
                    return Err(ConfigError::TauOutOfRangeHd(self.tau));
                }
            }
        }
        if !(self.p_source_w > 0.0) {
            return Err(ConfigError::NonPositiveSourcePower(self.p_source_w));
        }
        if !(self.p_u_w > 0.0) {
            return Err(ConfigError::NonPositiveUplinkPower(self.p_u_w));
        }
        if !(self.noise_w > 0.0) {
            return Err(ConfigError::NonPositiveNoise(self.noise_w));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(ConfigError::EtaOutOfRange(self.eta));
        }
        if self.zeta_db > 0.0 {
            return Err(ConfigError::ZetaPositiveDb(self.zeta_db));
        }
        if !(self.g_mag2 > 0.0) {
            return Err(ConfigError::NonPositiveGMag(self.g_mag2));
        }
        if !(self.gs_mag2 > 0.0) {
            return Err(ConfigError::NonPositiveGsMag(self.gs_mag2));
        }
        if !(self.r_d > 0.0) {
            return Err(ConfigError::NonPositiveRateD(self.r_d));
        }
        if !(self.r_sbs > 0.0) {
            return Err(ConfigError::NonPositiveRateSbs(self.r_sbs));
        }
        if self.amp_alpha < 0.0 {
            return Err(ConfigError::NegativeAmpAlpha(self.amp_alpha));
        }
        for (name, value) in [
            ("p_dac_w", self.circuit.p_dac_w),
            ("p_adc_w", self.circuit.p_adc_w),
            ("p_mix_w", self.circuit.p_mix_w),
            ("p_lna_w", self.circuit.p_lna_w),
            ("p_ifa_w", self.circuit.p_ifa_w),
            ("p_filt_w", self.circuit.p_filt_w),
            ("p_filr_w", self.circuit.p_filr_w),
            ("p_syn_w", self.circuit.p_syn_w),
        ] {
            if !(value > 0.0) {
                return Err(ConfigError::NonPositiveCircuitPower { name, value });
            }
        }
        Ok(())
    }

    // Linear-scale accessors.

    pub fn zeta(&self) -> f64 {
        db_to_linear(self.zeta_db)
    }
    pub fn phi_td(&self) -> f64 {
        db_to_linear(self.phi_td_db)
    }
    pub fn phi_ur(&self) -> f64 {
        db_to_linear(self.phi_ur_db)
    }
    pub fn phi_ud(&self) -> f64 {
        db_to_linear(self.phi_ud_db)
    }
    pub fn phi_g(&self) -> f64 {
        db_to_linear(self.phi_g_db)
    }
    pub fn phi_si(&self) -> f64 {
        db_to_linear(self.phi_si_db)
    }

    /// Linear recycling loop constant c = η P φ_g |g|²; zero when no EH
    /// antennas are installed.
    pub fn recycling_gain(&self) -> f64 {
        self.eta * self.p_eh_antennas as f64 * self.phi_g() * self.g_mag2
    }

    /// Combined linear self-interference factor φ_SI ζ |g_s|².
    pub fn si_factor(&self) -> f64 {
        self.phi_si() * self.zeta() * self.gs_mag2
    }

    /// Circuit power for this configuration. HD counts transmit and receive
    /// paths on all Q chains unless overridden.
    pub fn circuit_power_w(&self) -> f64 {
        match self.mode {
            DuplexMode::Fd => circuit_power(self.m_tx, self.n_rx, &self.circuit),
            DuplexMode::Hd => {
                let rx = self.hd_circuit_rx_chains.unwrap_or(self.q_chains);
                circuit_power(self.q_chains, rx, &self.circuit)
            }
        }
    }

    /// Radiated power for this configuration.
    pub fn p_rf(&self) -> Result<f64> {
        if self.ideal_rf {
            return Ok(self.p_source_w);
        }
        transmit_power_rf(
            self.p_source_w,
            self.circuit_power_w(),
            self.amp_alpha,
            self.alpha_variant,
        )
    }

    /// Returns a copy with a different FD antenna split, keeping Q fixed.
    pub fn with_split(&self, m_tx: u32, n_rx: u32) -> SystemConfig {
        let mut c = self.clone();
        c.m_tx = m_tx;
        c.n_rx = n_rx;
        c
    }

    /// Sets a numeric field by its config-file key (sweep axes).
    pub fn set_field(&mut self, key: &str, value: f64) -> std::result::Result<(), ConfigError> {
        let as_u32 = |key: &str, v: f64| -> std::result::Result<u32, ConfigError> {
            if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                return Err(ConfigError::BadFieldValue {
                    key: key.to_string(),
                    message: format!("{v} is not a nonnegative integer"),
                });
            }
            Ok(v as u32)
        };
        match key {
            "q_chains" => self.q_chains = as_u32(key, value)?,
            "m_tx" => self.m_tx = as_u32(key, value)?,
            "n_rx" => self.n_rx = as_u32(key, value)?,
            "p_eh_antennas" => self.p_eh_antennas = as_u32(key, value)?,
            "tau" => self.tau = value,
            "p_source_w" => self.p_source_w = value,
            "p_u_w" => self.p_u_w = value,
            "noise_w" => self.noise_w = value,
            "eta" => self.eta = value,
            "zeta_db" => self.zeta_db = value,
            "phi_td_db" => self.phi_td_db = value,
            "phi_ur_db" => self.phi_ur_db = value,
            "phi_ud_db" => self.phi_ud_db = value,
            "phi_g_db" => self.phi_g_db = value,
            "phi_si_db" => self.phi_si_db = value,
            "g_mag2" => self.g_mag2 = value,
            "gs_mag2" => self.gs_mag2 = value,
            "r_d" => self.r_d = value,
            "r_sbs" => self.r_sbs = value,
            "amp_alpha" => self.amp_alpha = value,
            "p_dac_w" => self.circuit.p_dac_w = value,
            "p_adc_w" => self.circuit.p_adc_w = value,
            "p_mix_w" => self.circuit.p_mix_w = value,
            "p_lna_w" => self.circuit.p_lna_w = value,
            "p_ifa_w" => self.circuit.p_ifa_w = value,
            "p_filt_w" => self.circuit.p_filt_w = value,
            "p_filr_w" => self.circuit.p_filr_w = value,
            "p_syn_w" => self.circuit.p_syn_w = value,
            _ => {
                return Err(ConfigError::BadFieldValue {
                    key: key.to_string(),
                    message: "not a sweepable numeric field".to_string(),
                })
            }
        }
        Ok(())
    }

    /// Parses the flat `key = value` format. `#` starts a comment, blank
    /// lines are skipped, unknown keys are rejected. Keys not present keep
    /// their defaults; `tau` and the antenna counts default per mode.
    pub fn parse_str(text: &str) -> std::result::Result<SystemConfig, ConfigError> {
        let mut cfg = SystemConfig::default();
        let mut saw_tau = false;
        let mut saw_m = false;
        let mut saw_n = false;
        let mut pending: Vec<(usize, String, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            pending.push((line_no, key.trim().to_string(), value.trim().to_string()));
        }

        // Mode first so the per-mode defaults apply to omitted keys.
        for (line_no, key, value) in &pending {
            if key == "mode" {
                cfg.mode = match value.to_ascii_uppercase().as_str() {
                    "HD" => DuplexMode::Hd,
                    "FD" => DuplexMode::Fd,
                    other => {
                        return Err(ConfigError::Parse {
                            line: *line_no,
                            message: format!("mode must be HD or FD, got '{other}'"),
                        })
                    }
                };
            }
        }

        let parse_f64 = |line: usize, key: &str, v: &str| -> std::result::Result<f64, ConfigError> {
            match v {
                "-inf" | "-INF" => Ok(f64::NEG_INFINITY),
                _ => v.parse::<f64>().map_err(|_| ConfigError::Parse {
                    line,
                    message: format!("{key}: '{v}' is not a number"),
                }),
            }
        };
        let parse_u32 = |line: usize, key: &str, v: &str| -> std::result::Result<u32, ConfigError> {
            v.parse::<u32>().map_err(|_| ConfigError::Parse {
                line,
                message: format!("{key}: '{v}' is not a nonnegative integer"),
            })
        };

        for (line_no, key, value) in &pending {
            let line_no = *line_no;
            match key.as_str() {
                "mode" => {}
                "q_chains" => cfg.q_chains = parse_u32(line_no, key, value)?,
                "m_tx" => {
                    cfg.m_tx = parse_u32(line_no, key, value)?;
                    saw_m = true;
                }
                "n_rx" => {
                    cfg.n_rx = parse_u32(line_no, key, value)?;
                    saw_n = true;
                }
                "p_eh_antennas" => cfg.p_eh_antennas = parse_u32(line_no, key, value)?,
                "hd_circuit_rx_chains" => {
                    cfg.hd_circuit_rx_chains = Some(parse_u32(line_no, key, value)?)
                }
                "tau" => {
                    cfg.tau = parse_f64(line_no, key, value)?;
                    saw_tau = true;
                }
                "p_source_w" => cfg.p_source_w = parse_f64(line_no, key, value)?,
                "p_u_w" => cfg.p_u_w = parse_f64(line_no, key, value)?,
                "noise_w" => cfg.noise_w = parse_f64(line_no, key, value)?,
                "eta" => cfg.eta = parse_f64(line_no, key, value)?,
                "zeta_db" => cfg.zeta_db = parse_f64(line_no, key, value)?,
                "phi_td_db" => cfg.phi_td_db = parse_f64(line_no, key, value)?,
                "phi_ur_db" => cfg.phi_ur_db = parse_f64(line_no, key, value)?,
                "phi_ud_db" => cfg.phi_ud_db = parse_f64(line_no, key, value)?,
                "phi_g_db" => cfg.phi_g_db = parse_f64(line_no, key, value)?,
                "phi_si_db" => cfg.phi_si_db = parse_f64(line_no, key, value)?,
                "g_mag2" => cfg.g_mag2 = parse_f64(line_no, key, value)?,
                "gs_mag2" => cfg.gs_mag2 = parse_f64(line_no, key, value)?,
                "r_d" => cfg.r_d = parse_f64(line_no, key, value)?,
                "r_sbs" => cfg.r_sbs = parse_f64(line_no, key, value)?,
                "amp_alpha" => cfg.amp_alpha = parse_f64(line_no, key, value)?,
                "alpha_variant" => {
                    cfg.alpha_variant = match value.to_ascii_lowercase().as_str() {
                        "paper" => AlphaVariant::Paper,
                        "conserving" => AlphaVariant::Conserving,
                        other => {
                            return Err(ConfigError::Parse {
                                line: line_no,
                                message: format!(
                                    "alpha_variant must be paper or conserving, got '{other}'"
                                ),
                            })
                        }
                    }
                }
                "ideal_rf" => {
                    cfg.ideal_rf = match value.to_ascii_lowercase().as_str() {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        other => {
                            return Err(ConfigError::Parse {
                                line: line_no,
                                message: format!("ideal_rf must be true or false, got '{other}'"),
                            })
                        }
                    }
                }
                "p_dac_w" => cfg.circuit.p_dac_w = parse_f64(line_no, key, value)?,
                "p_adc_w" => cfg.circuit.p_adc_w = parse_f64(line_no, key, value)?,
                "p_mix_w" => cfg.circuit.p_mix_w = parse_f64(line_no, key, value)?,
                "p_lna_w" => cfg.circuit.p_lna_w = parse_f64(line_no, key, value)?,
                "p_ifa_w" => cfg.circuit.p_ifa_w = parse_f64(line_no, key, value)?,
                "p_filt_w" => cfg.circuit.p_filt_w = parse_f64(line_no, key, value)?,
                "p_filr_w" => cfg.circuit.p_filr_w = parse_f64(line_no, key, value)?,
                "p_syn_w" => cfg.circuit.p_syn_w = parse_f64(line_no, key, value)?,
                other => {
                    return Err(ConfigError::UnknownKey {
                        line: line_no,
                        key: other.to_string(),
                    })
                }
            }
        }

        if !saw_tau {
            cfg.tau = match cfg.mode {
                DuplexMode::Hd => 0.5,
                DuplexMode::Fd => 1.0,
            };
        }
        match cfg.mode {
            DuplexMode::Hd => {
                if !saw_m {
                    cfg.m_tx = cfg.q_chains;
                }
                if !saw_n {
                    cfg.n_rx = cfg.q_chains;
                }
            }
            DuplexMode::Fd => {
                if !saw_m && !saw_n {
                    cfg.m_tx = cfg.q_chains / 2;
                    cfg.n_rx = cfg.q_chains - cfg.m_tx;
                } else if !saw_n {
                    cfg.n_rx = cfg.q_chains.saturating_sub(cfg.m_tx);
                } else if !saw_m {
                    cfg.m_tx = cfg.q_chains.saturating_sub(cfg.n_rx);
                }
            }
        }
        Ok(cfg)
    }

    /// Serializes to the same flat format `parse_str` accepts.
    pub fn to_config_string(&self) -> String {
        fn num(v: f64) -> String {
            if v == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                format!("{v}")
            }
        }
        let mut s = String::new();
        s.push_str(&format!("mode = {}\n", self.mode));
        s.push_str(&format!("q_chains = {}\n", self.q_chains));
        s.push_str(&format!("m_tx = {}\n", self.m_tx));
        s.push_str(&format!("n_rx = {}\n", self.n_rx));
        s.push_str(&format!("p_eh_antennas = {}\n", self.p_eh_antennas));
        s.push_str(&format!("tau = {}\n", num(self.tau)));
        s.push_str(&format!("p_source_w = {}\n", num(self.p_source_w)));
        s.push_str(&format!("p_u_w = {}\n", num(self.p_u_w)));
        s.push_str(&format!("noise_w = {}\n", num(self.noise_w)));
        s.push_str(&format!("eta = {}\n", num(self.eta)));
        s.push_str(&format!("zeta_db = {}\n", num(self.zeta_db)));
        s.push_str(&format!("phi_td_db = {}\n", num(self.phi_td_db)));
        s.push_str(&format!("phi_ur_db = {}\n", num(self.phi_ur_db)));
        s.push_str(&format!("phi_ud_db = {}\n", num(self.phi_ud_db)));
        s.push_str(&format!("phi_g_db = {}\n", num(self.phi_g_db)));
        s.push_str(&format!("phi_si_db = {}\n", num(self.phi_si_db)));
        s.push_str(&format!("g_mag2 = {}\n", num(self.g_mag2)));
        s.push_str(&format!("gs_mag2 = {}\n", num(self.gs_mag2)));
        s.push_str(&format!("r_d = {}\n", num(self.r_d)));
        s.push_str(&format!("r_sbs = {}\n", num(self.r_sbs)));
        s.push_str(&format!("amp_alpha = {}\n", num(self.amp_alpha)));
        s.push_str(&format!("alpha_variant = {}\n", self.alpha_variant));
        s.push_str(&format!("ideal_rf = {}\n", self.ideal_rf));
        if let Some(rx) = self.hd_circuit_rx_chains {
            s.push_str(&format!("hd_circuit_rx_chains = {rx}\n"));
        }
        s.push_str(&format!("p_dac_w = {}\n", num(self.circuit.p_dac_w)));
        s.push_str(&format!("p_adc_w = {}\n", num(self.circuit.p_adc_w)));
        s.push_str(&format!("p_mix_w = {}\n", num(self.circuit.p_mix_w)));
        s.push_str(&format!("p_lna_w = {}\n", num(self.circuit.p_lna_w)));
        s.push_str(&format!("p_ifa_w = {}\n", num(self.circuit.p_ifa_w)));
        s.push_str(&format!("p_filt_w = {}\n", num(self.circuit.p_filt_w)));
        s.push_str(&format!("p_filr_w = {}\n", num(self.circuit.p_filr_w)));
        s.push_str(&format!("p_syn_w = {}\n", num(self.circuit.p_syn_w)));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_profile() -> CircuitProfile {
        CircuitProfile::default()
    }

    #[test]
    fn circuit_power_only_synthesizers_at_zero_chains() {
        let p = circuit_power(0, 0, &table_profile());
        assert!((p - 0.1).abs() < 1e-15);
    }

    #[test]
    fn circuit_power_hand_sums() {
        // 8·33.8 mW + 100 mW + 8·56.8 mW = 824.8 mW.
        let p8 = circuit_power(8, 8, &table_profile());
        assert!((p8 - 0.8248).abs() < 1e-12, "{p8}");
        let p16 = circuit_power(16, 16, &table_profile());
        assert!((p16 - 1.5496).abs() < 1e-12, "{p16}");
    }

    #[test]
    fn circuit_power_linear_and_monotone() {
        let c = table_profile();
        let base = circuit_power(3, 5, &c);
        let plus_tx = circuit_power(4, 5, &c);
        let plus_rx = circuit_power(3, 6, &c);
        assert!(plus_tx > base && plus_rx > base);
        // Linearity: increments are constant.
        assert!(
            ((plus_tx - base) - (circuit_power(5, 5, &c) - plus_tx)).abs() < 1e-15,
            "tx increment not constant"
        );
        assert!(
            ((plus_rx - base) - (circuit_power(3, 7, &c) - plus_rx)).abs() < 1e-15,
            "rx increment not constant"
        );
    }

    #[test]
    fn transmit_power_accounting() {
        let p = transmit_power_rf(15.0, 0.0, 0.0, AlphaVariant::Paper).unwrap();
        assert_eq!(p, 15.0);
        let p = transmit_power_rf(15.0, 1.5496, 0.0, AlphaVariant::Paper).unwrap();
        assert!((p - 13.4504).abs() < 1e-12);
        let p = transmit_power_rf(15.0, 0.8248, 0.0, AlphaVariant::Paper).unwrap();
        assert!((p - 14.1752).abs() < 1e-12);
        // Both variants coincide at alpha = 0.
        let c = transmit_power_rf(15.0, 0.8248, 0.0, AlphaVariant::Conserving).unwrap();
        assert_eq!(p, c);
        // Monotone decreasing in circuit power.
        assert!(
            transmit_power_rf(15.0, 2.0, 0.0, AlphaVariant::Paper).unwrap()
                < transmit_power_rf(15.0, 1.0, 0.0, AlphaVariant::Paper).unwrap()
        );
    }

    #[test]
    fn transmit_power_infeasibility() {
        assert!(transmit_power_rf(1.0, 1.0, 0.0, AlphaVariant::Paper).is_err());
        assert!(transmit_power_rf(1.0, 2.0, 0.0, AlphaVariant::Paper).is_err());
        assert!(transmit_power_rf(15.0, 1.0, 1.0, AlphaVariant::Paper).is_err());
        // The conserving variant tolerates alpha >= 1.
        assert!(transmit_power_rf(15.0, 1.0, 3.0, AlphaVariant::Conserving).is_ok());
    }

    #[test]
    fn amp_alpha_values() {
        assert_eq!(amp_alpha_from(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(amp_alpha_from(0.35, 0.35).unwrap(), 0.0);
        assert!((amp_alpha_from(1.4, 0.35).unwrap() - 3.0).abs() < 1e-12);
        assert!(amp_alpha_from(0.2, 0.35).is_err());
        assert!(amp_alpha_from(1.0, 0.0).is_err());
    }

    #[test]
    fn default_config_validates() {
        assert!(SystemConfig::default().validate().is_ok());
    }

    #[test]
    fn validation_rejects_each_constraint_with_distinct_code() {
        let base = SystemConfig::default();

        let mut c = base.clone();
        c.mode = DuplexMode::Fd;
        c.tau = 1.0;
        c.m_tx = 8;
        c.n_rx = 7;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::FdSplitMismatch { .. })
        ));

        let mut c = base.clone();
        c.mode = DuplexMode::Fd;
        c.tau = 1.0;
        c.m_tx = 1;
        c.n_rx = 15;
        assert!(matches!(c.validate(), Err(ConfigError::FdTxTooFew(1))));

        let mut c = base.clone();
        c.mode = DuplexMode::Fd;
        c.tau = 1.0;
        c.m_tx = 15;
        c.n_rx = 1;
        assert!(matches!(c.validate(), Err(ConfigError::FdRxTooFew(1))));

        let mut c = base.clone();
        c.mode = DuplexMode::Fd;
        c.m_tx = 8;
        c.n_rx = 8;
        c.tau = 0.5;
        assert!(matches!(c.validate(), Err(ConfigError::TauNotUnityFd(_))));

        let mut c = base.clone();
        c.m_tx = 8;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::HdAntennaMismatch { .. })
        ));

        let mut c = base.clone();
        c.tau = 1.0;
        assert!(matches!(c.validate(), Err(ConfigError::TauOutOfRangeHd(_))));

        let mut c = base.clone();
        c.p_source_w = 0.0;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::NonPositiveSourcePower(_))
        ));

        let mut c = base.clone();
        c.p_u_w = -1.0;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::NonPositiveUplinkPower(_))
        ));

        let mut c = base.clone();
        c.noise_w = 0.0;
        assert!(matches!(c.validate(), Err(ConfigError::NonPositiveNoise(_))));

        let mut c = base.clone();
        c.eta = 1.5;
        assert!(matches!(c.validate(), Err(ConfigError::EtaOutOfRange(_))));

        let mut c = base.clone();
        c.zeta_db = 3.0;
        assert!(matches!(c.validate(), Err(ConfigError::ZetaPositiveDb(_))));

        let mut c = base.clone();
        c.r_d = 0.0;
        assert!(matches!(c.validate(), Err(ConfigError::NonPositiveRateD(_))));

        let mut c = base.clone();
        c.r_sbs = -2.0;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::NonPositiveRateSbs(_))
        ));

        let mut c = base.clone();
        c.amp_alpha = -0.1;
        assert!(matches!(c.validate(), Err(ConfigError::NegativeAmpAlpha(_))));

        let mut c = base.clone();
        c.circuit.p_syn_w = 0.0;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::NonPositiveCircuitPower { .. })
        ));
    }

    #[test]
    fn parse_minimal_hd_config() {
        let cfg = SystemConfig::parse_str("mode = HD\nq_chains = 8\n").unwrap();
        assert_eq!(cfg.m_tx, 8);
        assert_eq!(cfg.n_rx, 8);
        assert_eq!(cfg.tau, 0.5);
        cfg.validate().unwrap();
    }

    #[test]
    fn parse_fd_defaults_and_comments() {
        let text = "# comment line\nmode = FD\nq_chains = 16\nm_tx = 6 # trailing comment\n";
        let cfg = SystemConfig::parse_str(text).unwrap();
        assert_eq!(cfg.m_tx, 6);
        assert_eq!(cfg.n_rx, 10);
        assert_eq!(cfg.tau, 1.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn parse_rejects_unknown_keys_and_garbage() {
        let err = SystemConfig::parse_str("mode = HD\nbogus_key = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { .. }));
        let err = SystemConfig::parse_str("just some words\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
    }

    #[test]
    fn parse_negative_infinity_path_gain() {
        let cfg = SystemConfig::parse_str("mode = HD\nphi_ud_db = -inf\n").unwrap();
        assert_eq!(cfg.phi_ud(), 0.0);
    }

    #[test]
    fn config_round_trip() {
        let mut cfg = SystemConfig::default();
        cfg.mode = DuplexMode::Fd;
        cfg.tau = 1.0;
        cfg.m_tx = 5;
        cfg.n_rx = 11;
        cfg.p_eh_antennas = 6;
        cfg.phi_ud_db = f64::NEG_INFINITY;
        cfg.alpha_variant = AlphaVariant::Conserving;
        let text = cfg.to_config_string();
        let back = SystemConfig::parse_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn recycling_gain_zero_without_eh_antennas() {
        let cfg = SystemConfig::default();
        assert_eq!(cfg.recycling_gain(), 0.0);
        let mut cfg6 = cfg;
        cfg6.p_eh_antennas = 6;
        let expect = 0.6 * 6.0 * db_to_linear(-15.0);
        assert!((cfg6.recycling_gain() - expect).abs() < 1e-15);
    }

    #[test]
    fn p_rf_uses_mode_specific_circuit_accounting() {
        let hd = SystemConfig::default();
        assert!((hd.p_rf().unwrap() - (15.0 - 1.5496)).abs() < 1e-12);

        let mut fd = SystemConfig::default();
        fd.mode = DuplexMode::Fd;
        fd.tau = 1.0;
        fd.m_tx = 8;
        fd.n_rx = 8;
        assert!((fd.p_rf().unwrap() - (15.0 - 0.8248)).abs() < 1e-12);

        let mut ideal = hd.clone();
        ideal.ideal_rf = true;
        assert_eq!(ideal.p_rf().unwrap(), 15.0);

        let mut tiny = hd;
        tiny.p_source_w = 1.0;
        assert!(tiny.p_rf().is_err());
    }
}
