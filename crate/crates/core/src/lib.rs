//! Link-level outage analysis for a multi-antenna small base station with
//! self-energy recycling.
//!
//! The crate models one downlink device and one uplink device served by a
//! base station that recovers part of its own transmit energy through
//! dedicated harvesting antennas. Both half-duplex and full-duplex operation
//! are covered, each with three evaluation routes:
//!
//! - closed-form expressions ([`closedform`]),
//! - direct numeric integration fallbacks (same module), and
//! - a draw-by-draw Monte Carlo oracle ([`mcsim`]) that arbitrates the
//!   analytic routes.
//!
//! On top of the evaluators, [`allocopt`] solves the min-max antenna-split
//! problem and the minimum-RF-chain problem by exhaustive search.
//!
//! Supporting layers: [`numerics`] (incomplete gamma, beta, ₁F₁, ₂F₁,
//! Gauss-Laguerre rules, adaptive quadrature), [`sysmodel`] (configuration,
//! unit handling, transceiver power accounting) and [`fading`] (channel
//! sampling, the recycling fixed point and the associated distributions).

pub mod allocopt;
pub mod closedform;
pub mod error;
pub mod fading;
pub mod mcsim;
pub mod numerics;
pub mod sysmodel;

pub use error::{Error, Result};
pub use sysmodel::{CircuitProfile, DuplexMode, SystemConfig};
