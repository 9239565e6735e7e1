//! Communication metrics: symbol-level PAPR, empirical CCDF, spectral
//! efficiency, and the transmitter modulation-complexity model normalized
//! to OFDM.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{WaveformConfig, WaveformKind};
use crate::dsp;
use crate::error::{Error, Result};

/// An (x, y) series, x strictly increasing.
#[derive(Debug, Clone, Serialize)]
pub struct MetricSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub x_unit: String,
    pub y_unit: String,
}

/// Symbol-level PAPR in dB: 10·log10(max|x|² / mean|x|²). Computed over the
/// symbol body; the cyclic prefix duplicates body samples and cannot change
/// the ratio.
pub fn papr_db(body: &[Complex64]) -> Result<f64> {
    if body.is_empty() {
        return Err(Error::UndefinedMetric("PAPR of an empty symbol".into()));
    }
    let mean = dsp::mean_power(body);
    if mean <= 0.0 {
        return Err(Error::UndefinedMetric("PAPR of a zero-power symbol".into()));
    }
    Ok(10.0 * (dsp::peak_power(body) / mean).log10())
}

/// Empirical CCDF(λ) = Pr(PAPR > λ) over the given thresholds.
pub fn ccdf(papr_samples_db: &[f64], thresholds_db: &[f64]) -> Result<MetricSeries> {
    if papr_samples_db.is_empty() {
        return Err(Error::UndefinedMetric("CCDF of an empty sample set".into()));
    }
    let mut xs = thresholds_db.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let n = papr_samples_db.len() as f64;
    let points = xs
        .into_iter()
        .map(|lambda| {
            let exceed = papr_samples_db.iter().filter(|&&p| p > lambda).count();
            (lambda, exceed as f64 / n)
        })
        .collect();
    Ok(MetricSeries {
        label: "ccdf".into(),
        points,
        x_unit: "dB".into(),
        y_unit: "probability".into(),
    })
}

/// Smallest sample value λ with empirical CCDF(λ) <= target: the PAPR level
/// read off a CCDF curve at a given probability.
pub fn lambda_at_ccdf(papr_samples_db: &[f64], target: f64) -> Result<f64> {
    if papr_samples_db.is_empty() {
        return Err(Error::UndefinedMetric("empty sample set".into()));
    }
    let mut sorted = papr_samples_db.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let allowed = (target * sorted.len() as f64).floor() as usize;
    Ok(sorted[allowed.min(sorted.len() - 1)])
}

/// Spectral efficiency in bits/s/Hz.
pub fn spectral_efficiency(cfg: &WaveformConfig) -> f64 {
    let log2q = cfg.q.trailing_zeros() as f64;
    match cfg.waveform {
        WaveformKind::DftSOfdm | WaveformKind::ChirpedDftSOfdm => {
            cfg.m as f64 * log2q / cfg.n as f64
        }
        WaveformKind::DftSOfdmCm => {
            (cfg.m as f64 * log2q + (cfg.p.trailing_zeros() as f64)) / cfg.n as f64
        }
        WaveformKind::Ofdm | WaveformKind::Afdm | WaveformKind::Otfs => log2q,
        WaveformKind::Fmcw => 0.0,
    }
}

/// Transmitter-side complex-multiplication count and its value normalized
/// to OFDM.
#[derive(Debug, Clone, Serialize)]
pub struct ComplexityReport {
    pub waveform: WaveformKind,
    pub multiplications: u64,
    pub normalized_to_ofdm: f64,
}

/// Complexity model: one complex multiplication per butterfly-stage sample
/// (a size-L transform costs L·log2 L) and one per elementwise chirp
/// sample.
///
/// - OFDM:              N log2 N
/// - DFT-s-OFDM:        M log2 M + N log2 N
/// - chirped / CM:      M log2 M + N log2 N + N
/// - AFDM:              N log2 N + 2N
/// - OTFS:              N log2 N + N log2 M_otfs
pub fn modulation_complexity(cfg: &WaveformConfig) -> Result<ComplexityReport> {
    cfg.validate()?;
    let n = cfg.n as u64;
    let m = cfg.m as u64;
    let log2 = |v: u64| v.trailing_zeros() as u64;
    let ofdm = n * log2(n);
    let multiplications = match cfg.waveform {
        WaveformKind::Ofdm => ofdm,
        WaveformKind::DftSOfdm => m * log2(m) + ofdm,
        WaveformKind::ChirpedDftSOfdm | WaveformKind::DftSOfdmCm => m * log2(m) + ofdm + n,
        WaveformKind::Afdm => ofdm + 2 * n,
        WaveformKind::Otfs => ofdm + n * log2(cfg.m_otfs as u64),
        WaveformKind::Fmcw => n,
    };
    Ok(ComplexityReport {
        waveform: cfg.waveform,
        multiplications,
        normalized_to_ofdm: multiplications as f64 / ofdm as f64,
    })
}
