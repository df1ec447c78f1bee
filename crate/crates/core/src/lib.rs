//! Simulation of synchronized, independent pulsed photon-pair sources and of
//! two-photon (Hong-Ou-Mandel) interference between them under timing jitter.
//!
//! The crate is organised bottom-up:
//!
//! * [`wavepacket`] – pulse shapes, spectra and the coherence-length relation.
//! * [`jitterchain`] – trigger-path jitter budgets, fiber loss and thermal drift.
//! * [`correlator`] – intensity auto/cross-correlation, analytic and Monte Carlo.
//! * [`pairsource`] – down-conversion pair sources and their photon statistics.
//! * [`hom_engine`] – beamsplitter algebra, jitter-averaged visibility and the
//!   photon-number enumeration of multi-pair events.
//! * [`coincidence`] – end-to-end Monte Carlo of a delay-scanned HOM dip.
//! * [`budget`] – composition of independent visibility penalties.
//! * [`scenario`] – TOML scenario files, named runners and CSV export.
//!
//! Durations are picoseconds and lengths millimetres unless a name says
//! otherwise (`*_km`, `*_nm`, `*_pm`, `*_s`).

// Parameter checks are written `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod coincidence;
pub mod correlator;
pub mod error;
pub mod fit;
pub mod hom_engine;
pub mod jitterchain;
pub mod pairsource;
pub mod rng;
pub mod scenario;
pub mod units;
pub mod wavepacket;

pub use error::{Error, Result};
