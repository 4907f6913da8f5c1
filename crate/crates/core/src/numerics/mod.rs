//! Special functions and quadrature rules used by the closed-form outage
//! expressions.
//!
//! Everything here is a pure function of its inputs. Gauss-Laguerre rules
//! are immutable once built and may be shared freely across threads
//! (see [`laguerre::rule_cache`]).

mod gamma;
mod hyper;
pub mod laguerre;
pub mod quad;

pub use gamma::{beta, ln_beta, ln_gamma, regularized_gamma_lower, regularized_gamma_upper};
pub use hyper::{hyp1f1, hyp2f1, hyp2f1_near_unit_log_case};
pub use laguerre::{gl_integrate, laguerre_rule, GaussLaguerreRule};
pub use quad::{adaptive_simpson, integrate_semi_infinite};
