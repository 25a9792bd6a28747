//! Location-aided pilot decontamination for multi-cell MIMO uplinks.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: cell layouts, positions, angle-of-arrival bookkeeping and
//!   wrapped angular supports.
//! * [`channel`]: ULA steering vectors, multipath channel draws, path-loss
//!   gains and location-aided covariance matrices.
//! * [`estimator`]: pilot sequences, received pilot blocks, MMSE channel
//!   estimation and the normalized error metric.
//! * [`angular`]: the finite-array cost function, its zeros, the desired
//!   angular region and the pairwise interference costs.
//! * [`assignment`]: pilot-assignment problems (multi-cell, QoS, single-cell)
//!   and their solvers.
//! * [`harness`]: Monte Carlo experiment driver, scenario files and CSV output.

pub mod angular;
pub mod assignment;
pub mod channel;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod harness;
pub mod quadrature;

pub use error::{Error, Result};
