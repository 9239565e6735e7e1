//! Doubly-selective multipath propagation, additive noise, co-channel
//! interference and transmit-PA clipping; also synthesizes monostatic radar
//! echo taps.
//!
//! SNR and ISR are referenced to the mean power of the frame entering the
//! channel unless `noise_ref_power` pins an absolute reference (radar
//! scenarios pin it to the nominal unit transmit power so that echo gains
//! below unity and PA clipping losses show up as real SNR loss).

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use crate::config::{WaveformConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::waveform::BasebandFrame;

/// One propagation path: integer-sample delay, complex gain, Doppler shift.
#[derive(Debug, Clone, Copy)]
pub struct PathTap {
    pub delay: usize,
    pub gain: Complex64,
    pub doppler_hz: f64,
}

impl PathTap {
    pub fn identity() -> Self {
        PathTap {
            delay: 0,
            gain: Complex64::new(1.0, 0.0),
            doppler_hz: 0.0,
        }
    }
}

/// A co-channel emitter. The interfering frame is injected with a cyclic
/// start offset over the burst timeline; `None` draws the offset uniformly
/// at random per propagation call.
#[derive(Debug, Clone)]
pub struct Interferer {
    pub frame: BasebandFrame,
    pub isr_db: f64,
    pub offset: Option<usize>,
}

/// Channel description for one propagation run.
#[derive(Debug, Clone)]
pub struct ChannelProfile {
    pub taps: Vec<PathTap>,
    /// Signal-to-noise ratio in dB; `f64::INFINITY` disables noise.
    pub snr_db: f64,
    pub interferers: Vec<Interferer>,
    /// PA clipping ratio in dB relative to RMS amplitude; `f64::INFINITY`
    /// disables clipping. Applied by `transmit`, before propagation.
    pub clipping_ratio_db: f64,
    /// Absolute signal-power reference for SNR/ISR scaling; `None` measures
    /// the input frame.
    pub noise_ref_power: Option<f64>,
}

impl ChannelProfile {
    pub fn clean(taps: Vec<PathTap>) -> Self {
        ChannelProfile {
            taps,
            snr_db: f64::INFINITY,
            interferers: Vec::new(),
            clipping_ratio_db: f64::INFINITY,
            noise_ref_power: None,
        }
    }

    pub fn with_snr(mut self, snr_db: f64) -> Self {
        self.snr_db = snr_db;
        self
    }

    fn max_delay(&self) -> usize {
        self.taps.iter().map(|t| t.delay).max().unwrap_or(0)
    }
}

/// Amplitude clipping with phase preserved: samples with |x| > A are pulled
/// back to A·x/|x|, where A = rms · 10^(CR/20).
pub fn clip(frame: &BasebandFrame, clipping_ratio_db: f64) -> BasebandFrame {
    if clipping_ratio_db.is_infinite() {
        return frame.clone();
    }
    let rms = frame.mean_power().sqrt();
    let limit = rms * 10f64.powf(clipping_ratio_db / 20.0);
    let mut out = frame.clone();
    for x in &mut out.samples {
        let mag = x.norm();
        if mag > limit {
            *x *= limit / mag;
        }
    }
    out
}

/// Complex circular Gaussian sample with unit variance.
fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) / 2f64.sqrt()
}

/// Apply multipath, Doppler, interference and noise to a frame.
///
/// y[n] = Σ_ℓ gain_ℓ · e^{j2π·doppler_ℓ·n·T_s} · x[n-delay_ℓ]
///        + Σ_i scale_i · interferer_i[(n+off_i) mod len] + noise[n]
///
/// The Doppler ramp runs over the whole burst (fast and slow time), so a
/// slow-time transform recovers it. Deterministic for a fixed seed.
pub fn propagate(
    frame: &BasebandFrame,
    profile: &ChannelProfile,
    cfg: &WaveformConfig,
    seed: u64,
) -> Result<BasebandFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    propagate_with_rng(frame, profile, cfg, &mut rng)
}

#[allow(clippy::needless_range_loop)]
pub fn propagate_with_rng(
    frame: &BasebandFrame,
    profile: &ChannelProfile,
    cfg: &WaveformConfig,
    rng: &mut impl Rng,
) -> Result<BasebandFrame> {
    if profile.max_delay() > frame.l_cp {
        return Err(Error::Config(format!(
            "path delay {} exceeds cyclic prefix {}",
            profile.max_delay(),
            frame.l_cp
        )));
    }
    let ts = cfg.sample_period();
    let len = frame.samples.len();
    let p_ref = profile
        .noise_ref_power
        .unwrap_or_else(|| frame.mean_power());

    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for tap in &profile.taps {
        let rate = 2.0 * PI * tap.doppler_hz * ts;
        for n in tap.delay..len {
            let ramp = Complex64::from_polar(1.0, rate * n as f64);
            out[n] += tap.gain * ramp * frame.samples[n - tap.delay];
        }
    }

    for interferer in &profile.interferers {
        if !interferer.isr_db.is_finite() {
            return Err(Error::Config("interferer ISR must be finite".into()));
        }
        let src = &interferer.frame.samples;
        if src.is_empty() {
            continue;
        }
        let offset = match interferer.offset {
            Some(o) => o % src.len(),
            None => rng.random_range(0..src.len()),
        };
        let p_int = crate::dsp::mean_power(src);
        let scale = (p_ref * 10f64.powf(interferer.isr_db / 10.0) / p_int).sqrt();
        for n in 0..len {
            out[n] += scale * src[(n + offset) % src.len()];
        }
    }

    if profile.snr_db.is_finite() {
        let sigma = (p_ref * 10f64.powf(-profile.snr_db / 10.0)).sqrt();
        for x in &mut out {
            *x += sigma * complex_gaussian(rng);
        }
    }

    Ok(BasebandFrame {
        samples: out,
        n: frame.n,
        l_cp: frame.l_cp,
        k: frame.k,
        payload_bits: frame.payload_bits.clone(),
    })
}

/// PA clipping followed by propagation; the full transmit path of one trial.
pub fn transmit(
    frame: &BasebandFrame,
    profile: &ChannelProfile,
    cfg: &WaveformConfig,
    rng: &mut impl Rng,
) -> Result<BasebandFrame> {
    let clipped = clip(frame, profile.clipping_ratio_db);
    propagate_with_rng(&clipped, profile, cfg, rng)
}

/// Monostatic echo tap for a point target: round-trip delay in samples,
/// reflection gain, and Doppler 2·v·f_c/c.
pub fn radar_echo(
    range_m: f64,
    velocity_mps: f64,
    rcs_gain: Complex64,
    cfg: &WaveformConfig,
) -> Result<PathTap> {
    if range_m < 0.0 {
        return Err(Error::Config(format!("range must be >= 0, got {range_m}")));
    }
    let delay = (2.0 * range_m * cfg.bandwidth_hz / SPEED_OF_LIGHT).round() as usize;
    if delay > cfg.l_cp {
        return Err(Error::Config(format!(
            "range {range_m} m needs delay {delay} > unambiguous window {}",
            cfg.l_cp
        )));
    }
    Ok(PathTap {
        delay,
        gain: rcs_gain,
        doppler_hz: 2.0 * velocity_mps * cfg.carrier_hz / SPEED_OF_LIGHT,
    })
}

/// L equal-power taps at delays 0..L-1 with uniformly random phases; total
/// power one. The standard multipath draw for the link-level studies.
pub fn random_phase_taps(l_paths: usize, rng: &mut impl Rng) -> Vec<PathTap> {
    let amp = 1.0 / (l_paths as f64).sqrt();
    (0..l_paths)
        .map(|d| PathTap {
            delay: d,
            gain: Complex64::from_polar(amp, rng.random::<f64>() * 2.0 * PI),
            doppler_hz: 0.0,
        })
        .collect()
}
