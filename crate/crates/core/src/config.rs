//! Frame parameters shared by the modulators, channel, receivers and
//! sensing processors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact speed of light used for all range/velocity conversions.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformKind {
    DftSOfdm,
    ChirpedDftSOfdm,
    DftSOfdmCm,
    Ofdm,
    Afdm,
    Otfs,
    Fmcw,
}

impl WaveformKind {
    pub fn label(&self) -> &'static str {
        match self {
            WaveformKind::DftSOfdm => "dft_s_ofdm",
            WaveformKind::ChirpedDftSOfdm => "chirped_dft_s_ofdm",
            WaveformKind::DftSOfdmCm => "dft_s_ofdm_cm",
            WaveformKind::Ofdm => "ofdm",
            WaveformKind::Afdm => "afdm",
            WaveformKind::Otfs => "otfs",
            WaveformKind::Fmcw => "fmcw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstellationKind {
    Psk,
    Qam,
}

/// Chirp shape hook. Only linear sweeps are implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChirpShape {
    Linear,
}

/// A chirp with a selectable starting frequency.
///
/// `start_index` p selects the starting frequency p/P of the normalized
/// band; p = 0 starts the sweep at the lowest frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChirpSpec {
    pub shape: ChirpShape,
    pub start_index: usize,
}

impl ChirpSpec {
    pub fn unmodulated() -> Self {
        ChirpSpec {
            shape: ChirpShape::Linear,
            start_index: 0,
        }
    }

    pub fn with_start(start_index: usize) -> Self {
        ChirpSpec {
            shape: ChirpShape::Linear,
            start_index,
        }
    }
}

/// All frame parameters for one transmission burst.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveformConfig {
    /// IFFT size / subcarrier count; samples per symbol body.
    pub n: usize,
    /// DFT-spread size; M ≤ N and M | N.
    pub m: usize,
    /// Constellation order.
    pub q: usize,
    /// Chirp-modulation order; P = 1 means an unmodulated chirp.
    pub p: usize,
    /// Cyclic-prefix length in samples.
    pub l_cp: usize,
    /// Slow-time symbol count per burst.
    pub k: usize,
    /// Bandwidth in Hz; the sample rate equals B.
    pub bandwidth_hz: f64,
    /// Carrier frequency in Hz.
    pub carrier_hz: f64,
    pub constellation: ConstellationKind,
    pub waveform: WaveformKind,
    /// OTFS delay-grid size; M_otfs · N_otfs = N.
    pub m_otfs: usize,
    /// OTFS Doppler-grid size.
    pub n_otfs: usize,
}

impl WaveformConfig {
    /// Scenario-I defaults: N=256, M=128, 4-QAM, L_CP=32, K=64, B=50 MHz,
    /// f_c=30 GHz, OTFS grid 128x2.
    pub fn scenario_i() -> Self {
        WaveformConfig {
            n: 256,
            m: 128,
            q: 4,
            p: 1,
            l_cp: 32,
            k: 64,
            bandwidth_hz: 50e6,
            carrier_hz: 30e9,
            constellation: ConstellationKind::Qam,
            waveform: WaveformKind::DftSOfdm,
            m_otfs: 128,
            n_otfs: 2,
        }
    }

    /// Scenario-II defaults for ML-detection link studies: N=16, M=4, QPSK.
    pub fn scenario_ii() -> Self {
        WaveformConfig {
            n: 16,
            m: 4,
            q: 4,
            p: 1,
            l_cp: 4,
            k: 1,
            bandwidth_hz: 50e6,
            carrier_hz: 30e9,
            constellation: ConstellationKind::Psk,
            waveform: WaveformKind::DftSOfdm,
            m_otfs: 4,
            n_otfs: 4,
        }
    }

    pub fn with_waveform(mut self, waveform: WaveformKind) -> Self {
        self.waveform = waveform;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn power_of_two(name: &str, v: usize) -> Result<()> {
            if v == 0 || !v.is_power_of_two() {
                return Err(Error::Config(format!(
                    "{name} must be a power of two, got {v}"
                )));
            }
            Ok(())
        }
        power_of_two("n", self.n)?;
        power_of_two("m", self.m)?;
        power_of_two("q", self.q)?;
        power_of_two("p", self.p)?;
        power_of_two("m_otfs", self.m_otfs)?;
        power_of_two("n_otfs", self.n_otfs)?;
        if self.q < 2 {
            return Err(Error::Config(format!("q must be at least 2, got {}", self.q)));
        }
        if self.m > self.n || !self.n.is_multiple_of(self.m) {
            return Err(Error::Config(format!(
                "m must divide n (m={}, n={})",
                self.m, self.n
            )));
        }
        if self.p > self.n || !self.n.is_multiple_of(self.p) {
            return Err(Error::Config(format!(
                "p must divide n (p={}, n={})",
                self.p, self.n
            )));
        }
        if self.m_otfs * self.n_otfs != self.n {
            return Err(Error::Config(format!(
                "m_otfs * n_otfs must equal n ({} * {} != {})",
                self.m_otfs, self.n_otfs, self.n
            )));
        }
        if self.constellation == ConstellationKind::Qam && !self.q.trailing_zeros().is_multiple_of(2)
        {
            return Err(Error::Config(format!(
                "q must be a square QAM order, got {}",
                self.q
            )));
        }
        if self.l_cp >= self.n {
            return Err(Error::Config(format!(
                "l_cp must be smaller than n (l_cp={}, n={})",
                self.l_cp, self.n
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.bandwidth_hz <= 0.0 {
            return Err(Error::Config(format!(
                "bandwidth_hz must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        if self.carrier_hz <= 0.0 {
            return Err(Error::Config(format!(
                "carrier_hz must be positive, got {}",
                self.carrier_hz
            )));
        }
        Ok(())
    }

    /// Samples per symbol including the cyclic prefix.
    pub fn symbol_len(&self) -> usize {
        self.n + self.l_cp
    }

    /// Sample period T_s = 1/B in seconds.
    pub fn sample_period(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    pub fn bits_per_constellation_symbol(&self) -> usize {
        self.q.trailing_zeros() as usize
    }

    pub fn chirp_bits_per_symbol(&self) -> usize {
        if self.waveform == WaveformKind::DftSOfdmCm {
            self.p.trailing_zeros() as usize
        } else {
            0
        }
    }

    /// Payload bits carried by one slow-time symbol.
    pub fn bits_per_symbol(&self) -> usize {
        match self.waveform {
            WaveformKind::DftSOfdm | WaveformKind::ChirpedDftSOfdm => {
                self.m * self.bits_per_constellation_symbol()
            }
            WaveformKind::DftSOfdmCm => {
                self.m * self.bits_per_constellation_symbol() + self.chirp_bits_per_symbol()
            }
            WaveformKind::Ofdm | WaveformKind::Afdm => self.n * self.bits_per_constellation_symbol(),
            WaveformKind::Otfs => {
                self.m_otfs * self.n_otfs * self.bits_per_constellation_symbol()
            }
            WaveformKind::Fmcw => 0,
        }
    }

    pub fn bits_per_frame(&self) -> usize {
        self.k * self.bits_per_symbol()
    }
}
