//! Simulation library for position-based physical-layer authentication of
//! vehicles in V2I networks.
//!
//! A transmitter's position, recovered from noisy time-of-arrival measurements
//! at roadside units, serves as its device fingerprint. A regression model
//! tracks the legitimate vehicle's mobility and supplies the ground-truth
//! position against which each new transmission is tested. The distance
//! between the estimated and predicted positions is thresholded to classify
//! the transmitter as legitimate or impersonating.
//!
//! Modules follow the processing pipeline:
//!
//! * [`scenario`] — road geometry, RSU placement, vehicle kinematics.
//! * [`channel`] — path loss, link quality, and CRB-variance ToA sampling.
//! * [`localizer`] — linearized squared-range least squares and a brute-force
//!   grid oracle.
//! * [`tracker`] — mobility dataset generation, decision-tree and SVR
//!   regressors, regression metrics.
//! * [`authenticator`] — test statistic, binary hypothesis test, error rates,
//!   ROC sweeps, and the angle-of-arrival baseline.
//! * [`harness`] — configuration, seeded Monte Carlo experiments, CSV output.

pub mod authenticator;
pub mod channel;
mod error;
pub mod harness;
pub mod localizer;
pub mod rng;
pub mod scenario;
pub mod tracker;
mod vec2;

pub use error::{Error, Result};
pub use vec2::Vec2;
