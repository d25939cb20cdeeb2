//! Ergodic-rate analysis of a semi-grant-free NOMA uplink.
//!
//! One grant-based (GB) user holds a channel; one grant-free (GF) user is
//! admitted onto it when its received power at the base station is below the
//! GB user's (the dynamic admission rule). The base station decodes the GB
//! signal first, treating the GF signal as interference, and the GF signal
//! is decodable only if GB decoding succeeded.
//!
//! The crate evaluates the ergodic rates of both users three independent
//! ways and is built so the three paths can be cross-checked:
//!
//! * [`analytic`] — closed-form Chebyshev–Gauss double sums,
//! * [`oracle`] — nested adaptive Gauss–Kronrod integration of the defining
//!   integrals (deterministic ground truth),
//! * [`montecarlo`] — seeded, parallel link-level simulation of the system
//!   model in [`model`].
//!
//! [`specfun`] provides the special functions the closed forms need
//! (Chebyshev–Gauss nodes, a Gauss hypergeometric ray, the exponential
//! integral and a finite-interval exponential kernel).

pub mod analytic;
mod error;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{ChannelDraw, LinkOutcome, SystemParams};
pub use montecarlo::RateEstimate;
pub use oracle::{Estimate, IntegrationConfig};
pub use specfun::QuadratureSpec;
