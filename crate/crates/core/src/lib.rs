//! Two-photon Hong-Ou-Mandel detection statistics.
//!
//! The crate is split along the path a computation takes:
//!
//! * [`model`] builds photon-pair spectra and pushes them through a 50:50
//!   beam splitter, producing a [`model::JointWaveFunction`].
//! * [`engine`] turns a joint wave function into detection probabilities by
//!   symmetrizing it and integrating numerically.
//! * [`closedform`] holds the analytic interference patterns for
//!   frequency-entangled and frequency-detuned sinc sources.
//! * [`oracle`] recomputes the same overlap integrals by an unrelated route
//!   (exact boxcar overlaps in the time domain) so the other two can be checked.
//! * [`experiments`] runs delay and detuning sweeps on top of all of the above.
//! * [`cli`] is the command-line front end used by the `hom` binary.
//!
//! Units are fixed throughout: angular frequencies in rad/ps, delays in ps.

pub mod cli;
pub mod closedform;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod special;

pub use error::{Error, Result};
