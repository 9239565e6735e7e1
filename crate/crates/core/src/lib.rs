//! Link-level and radar-sensing simulation of chirped DFT-s-OFDM.
//!
//! The library models a single-carrier chirping waveform built by
//! multiplying a DFT-s-OFDM signal with a linear chirp whose starting
//! frequency can carry extra bits, and compares it against OFDM, AFDM,
//! OTFS and FMCW baselines from both a communication perspective
//! (PAPR/CCDF, spectral efficiency, modulation complexity, ML/LMMSE
//! detection and BER) and a sensing perspective (beat-frequency ranging by
//! conjugate mixing, matched-filter range-velocity maps, PMSR, detection
//! probability and resolution).
//!
//! Module map:
//! - [`dsp`]: unitary transforms, circular correlation, power statistics;
//! - [`config`]: frame parameters and validation;
//! - [`constellation`]: Gray-labeled PSK/QAM alphabets;
//! - [`waveform`]: modulators and reference demodulators;
//! - [`channel`]: multipath, noise, interference, clipping, radar echoes;
//! - [`rx`]: equivalent channels, ML/LMMSE detection, error counting;
//! - [`sensing`]: mixing and matched-filter chains, PMSR, resolutions;
//! - [`metrics`]: PAPR, CCDF, spectral efficiency, complexity model;
//! - [`sim`]: seeded Monte Carlo engines;
//! - [`harness`]: named experiments, config parsing, CSV/JSON output.

pub mod channel;
pub mod config;
pub mod constellation;
pub mod dsp;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod rx;
pub mod sensing;
pub mod sim;
pub mod waveform;

pub use config::{ChirpSpec, ConstellationKind, WaveformConfig, WaveformKind};
pub use error::{Error, Result};
pub use waveform::BasebandFrame;
