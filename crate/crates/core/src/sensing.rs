//! Radar processing chains: conjugate mixing for beat-frequency ranging
//! (the digital realization of an analog mixer plus low-pass filter) and
//! matched filtering for range-velocity maps, with PMSR, detection and
//! resolution calculators.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{WaveformConfig, SPEED_OF_LIGHT};
use crate::dsp::{self, dft, Direction};
use crate::error::{Error, Result};
use crate::waveform::BasebandFrame;

/// One-dimensional beat-spectrum magnitude profile over N range bins.
#[derive(Debug, Clone)]
pub struct RangeProfile {
    pub magnitudes: Vec<f64>,
    /// Range per bin: c/(2B) meters.
    pub bin_to_meters: f64,
}

/// Magnitude surface over N range bins x K velocity bins.
#[derive(Debug, Clone)]
pub struct RangeVelocityMap {
    /// Row-major: `magnitudes[range_bin * n_velocity + velocity_bin]`.
    pub magnitudes: Vec<f64>,
    pub n_range: usize,
    pub n_velocity: usize,
    /// Range per bin: c/(2B) meters.
    pub bin_to_meters: f64,
    /// Velocity per bin: B·c/(2·f_c·(N+L_CP)·K) meters per second.
    pub bin_to_mps: f64,
}

/// Outcome of peak detection on a range or range-velocity map.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub peak_range_bin: usize,
    pub peak_velocity_bin: Option<usize>,
    pub range_m: f64,
    pub velocity_mps: Option<f64>,
    pub pmsr_db: f64,
    pub detected: bool,
}

/// Conjugate mixing followed by an N-point spectrum: m[n] = rx[n]·conj(tx[n]).
///
/// In complex baseband the conjugate product produces only the
/// difference-frequency component, so the low-pass filter of the analog
/// chain is realized implicitly. The spectrum is taken with the transform
/// orientation under which a cyclic delay of d samples lands on bin +d, so
/// peak bin b maps to range b·c/(2B).
pub fn mix_and_range(
    tx_body: &[Complex64],
    rx_body: &[Complex64],
    cfg: &WaveformConfig,
) -> Result<RangeProfile> {
    if tx_body.len() != rx_body.len() || tx_body.len() != cfg.n {
        return Err(Error::Dimension(format!(
            "mixer inputs must both have N = {} samples (got {} and {})",
            cfg.n,
            tx_body.len(),
            rx_body.len()
        )));
    }
    let mixed: Vec<Complex64> = rx_body
        .iter()
        .zip(tx_body)
        .map(|(r, t)| r * t.conj())
        .collect();
    let spectrum = dft(&mixed, Direction::Inverse)?;
    Ok(RangeProfile {
        magnitudes: spectrum.iter().map(|v| v.norm()).collect(),
        bin_to_meters: SPEED_OF_LIGHT / (2.0 * cfg.bandwidth_hz),
    })
}

/// Noncoherent average of per-symbol beat spectra over a whole burst:
/// power-averaged `mix_and_range` across the K slow-time symbols.
pub fn mix_and_range_frame(
    tx: &BasebandFrame,
    rx: &BasebandFrame,
    cfg: &WaveformConfig,
) -> Result<RangeProfile> {
    if tx.k != rx.k {
        return Err(Error::Dimension(format!(
            "burst lengths differ ({} vs {} symbols)",
            tx.k, rx.k
        )));
    }
    let mut power = vec![0.0f64; cfg.n];
    for k in 0..tx.k {
        let profile = mix_and_range(tx.body(k), rx.body(k), cfg)?;
        for (acc, v) in power.iter_mut().zip(&profile.magnitudes) {
            *acc += v * v;
        }
    }
    Ok(RangeProfile {
        magnitudes: power
            .iter()
            .map(|p| (p / tx.k as f64).sqrt())
            .collect(),
        bin_to_meters: SPEED_OF_LIGHT / (2.0 * cfg.bandwidth_hz),
    })
}

/// Matched-filter range-velocity map: per slow-time symbol the circular
/// correlation of the received body against the transmitted body, then a
/// K-point transform across slow time per range bin.
pub fn matched_filter_map(
    tx: &BasebandFrame,
    rx: &BasebandFrame,
    cfg: &WaveformConfig,
) -> Result<RangeVelocityMap> {
    if tx.k != rx.k || tx.n != rx.n {
        return Err(Error::Dimension(format!(
            "grids must match ({}x{} vs {}x{})",
            tx.k, tx.n, rx.k, rx.n
        )));
    }
    let k_count = tx.k;
    let mut rows = Vec::with_capacity(k_count);
    for k in 0..k_count {
        rows.push(dsp::circular_correlate(rx.body(k), tx.body(k))?);
    }
    let mut magnitudes = vec![0.0f64; cfg.n * k_count];
    for range_bin in 0..cfg.n {
        let slow: Vec<Complex64> = rows.iter().map(|r| r[range_bin]).collect();
        let doppler = dft(&slow, Direction::Forward)?;
        for (vbin, v) in doppler.iter().enumerate() {
            magnitudes[range_bin * k_count + vbin] = v.norm();
        }
    }
    Ok(RangeVelocityMap {
        magnitudes,
        n_range: cfg.n,
        n_velocity: k_count,
        bin_to_meters: SPEED_OF_LIGHT / (2.0 * cfg.bandwidth_hz),
        bin_to_mps: cfg.bandwidth_hz * SPEED_OF_LIGHT
            / (2.0 * cfg.carrier_hz * (cfg.n + cfg.l_cp) as f64 * k_count as f64),
    })
}

fn cyclic_distance(a: usize, b: usize, len: usize) -> usize {
    let d = (a as i64 - b as i64).rem_euclid(len as i64) as usize;
    d.min(len - d)
}

fn pmsr_from_values(
    values: &[f64],
    peak_index: usize,
    dims: (usize, usize),
    exclusion_radius_bins: usize,
) -> Result<f64> {
    let (rows, cols) = dims;
    let peak = values[peak_index];
    if peak <= 0.0 {
        return Err(Error::UndefinedMetric("PMSR of an all-zero map".into()));
    }
    let (pr, pc) = (peak_index / cols, peak_index % cols);
    let mut max_side = 0.0f64;
    for (i, &v) in values.iter().enumerate() {
        let (r, c) = (i / cols, i % cols);
        let inside = cyclic_distance(r, pr, rows) <= exclusion_radius_bins
            && cyclic_distance(c, pc, cols) <= exclusion_radius_bins;
        if !inside && v > max_side {
            max_side = v;
        }
    }
    if max_side <= 0.0 {
        // A lone impulse has no sidelobe; report the +inf sentinel.
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * (peak / max_side).log10())
}

fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0)
}

impl RangeProfile {
    pub fn peak_bin(&self) -> usize {
        argmax(&self.magnitudes)
    }

    /// Peak-to-max-sidelobe ratio in dB, excluding a cyclic neighborhood of
    /// ±`exclusion_radius_bins` around the peak.
    pub fn pmsr_db(&self, exclusion_radius_bins: usize) -> Result<f64> {
        if self.magnitudes.is_empty() {
            return Err(Error::UndefinedMetric("PMSR of an empty profile".into()));
        }
        pmsr_from_values(
            &self.magnitudes,
            self.peak_bin(),
            (1, self.magnitudes.len()),
            exclusion_radius_bins,
        )
    }

    pub fn value_db(&self, bin: usize) -> f64 {
        20.0 * self.magnitudes[bin].log10()
    }
}

impl RangeVelocityMap {
    pub fn value(&self, range_bin: usize, velocity_bin: usize) -> f64 {
        self.magnitudes[range_bin * self.n_velocity + velocity_bin]
    }

    pub fn peak_bins(&self) -> (usize, usize) {
        let i = argmax(&self.magnitudes);
        (i / self.n_velocity, i % self.n_velocity)
    }

    pub fn pmsr_db(&self, exclusion_radius_bins: usize) -> Result<f64> {
        if self.magnitudes.is_empty() {
            return Err(Error::UndefinedMetric("PMSR of an empty map".into()));
        }
        pmsr_from_values(
            &self.magnitudes,
            argmax(&self.magnitudes),
            (self.n_range, self.n_velocity),
            exclusion_radius_bins,
        )
    }

    /// Range cut at a fixed velocity bin.
    pub fn range_cut(&self, velocity_bin: usize) -> Vec<f64> {
        (0..self.n_range)
            .map(|r| self.value(r, velocity_bin))
            .collect()
    }
}

/// Global-argmax detection: declared when the map peak lies within
/// ±`tolerance_bins` (cyclic, per axis) of the true target cell.
pub fn detect(
    map: &RangeVelocityMap,
    truth: (usize, usize),
    tolerance_bins: usize,
) -> Result<DetectionReport> {
    let (tr, tv) = truth;
    if tr >= map.n_range || tv >= map.n_velocity {
        return Err(Error::Dimension(format!(
            "truth cell ({tr}, {tv}) outside {}x{} map",
            map.n_range, map.n_velocity
        )));
    }
    let (pr, pv) = map.peak_bins();
    let detected = cyclic_distance(pr, tr, map.n_range) <= tolerance_bins
        && cyclic_distance(pv, tv, map.n_velocity) <= tolerance_bins;
    Ok(DetectionReport {
        peak_range_bin: pr,
        peak_velocity_bin: Some(pv),
        range_m: pr as f64 * map.bin_to_meters,
        velocity_mps: Some(pv as f64 * map.bin_to_mps),
        pmsr_db: map.pmsr_db(1)?,
        detected,
    })
}

/// Range and velocity resolution implied by the frame parameters:
/// (c/(2B), B·c/(2·f_c·(N+L_CP)·K)).
pub fn resolutions(cfg: &WaveformConfig) -> Result<(f64, f64)> {
    if cfg.bandwidth_hz <= 0.0 || cfg.carrier_hz <= 0.0 {
        return Err(Error::Config(
            "bandwidth and carrier frequency must be positive".into(),
        ));
    }
    if cfg.n == 0 || cfg.k == 0 {
        return Err(Error::Config("n and k must be positive".into()));
    }
    let range = SPEED_OF_LIGHT / (2.0 * cfg.bandwidth_hz);
    let velocity = cfg.bandwidth_hz * SPEED_OF_LIGHT
        / (2.0 * cfg.carrier_hz * (cfg.n + cfg.l_cp) as f64 * cfg.k as f64);
    Ok((range, velocity))
}
