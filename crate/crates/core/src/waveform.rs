//! Transmit-side modulators for every waveform family in the comparison:
//! DFT-s-OFDM with and without chirping, chirp-modulated DFT-s-OFDM,
//! plain OFDM, AFDM, OTFS and FMCW.
//!
//! Conventions shared by all modulators:
//! - one slow-time symbol occupies N body samples plus an L_CP-sample
//!   cyclic prefix copied from the end of the (already chirped) body;
//! - interleaved subcarrier mapping: the M spread outputs sit on every
//!   (N/M)-th subcarrier starting at subcarrier 0, which makes the body an
//!   exact (N/M)-fold repetition of the constellation symbols;
//! - bodies are scaled to unit mean power for unit-energy constellations.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

use crate::config::{ChirpSpec, WaveformConfig, WaveformKind};
use crate::constellation::{
    alphabet, bits_of, gray_decode, label_of, map_bits, rotation_order, slice_symbol,
};
use crate::dsp::{self, dft, Direction};
use crate::error::{Error, Result};

/// Complex fast-time x slow-time sample grid for one transmission burst.
#[derive(Debug, Clone)]
pub struct BasebandFrame {
    /// K·(N + L_CP) samples, symbol-major.
    pub samples: Vec<Complex64>,
    pub n: usize,
    pub l_cp: usize,
    pub k: usize,
    /// The bit sequence encoded: per symbol, chirp-index bits (CM only)
    /// followed by constellation bits.
    pub payload_bits: Vec<u8>,
}

impl BasebandFrame {
    pub fn symbol_len(&self) -> usize {
        self.n + self.l_cp
    }

    /// One symbol including its cyclic prefix.
    pub fn symbol(&self, k: usize) -> &[Complex64] {
        let s = self.symbol_len();
        &self.samples[k * s..(k + 1) * s]
    }

    /// One symbol body with the cyclic prefix removed.
    pub fn body(&self, k: usize) -> &[Complex64] {
        &self.symbol(k)[self.l_cp..]
    }

    pub fn mean_power(&self) -> f64 {
        dsp::mean_power(&self.samples)
    }
}

/// Linear chirp with selectable starting frequency.
///
/// c[n] = exp(j(2π(p·n/P + n²/(2N)) + θ_p)): unit modulus, instantaneous
/// normalized frequency (p/P + n/N) mod 1 — a full-band sweep, cyclically
/// wrapped, starting at p/P. For even N the sequence is N-periodic, so a
/// cyclic delay of the chirp equals the chirp times a single tone.
///
/// θ_p = 2πp/(P·R), with R the rotational symmetry order of the configured
/// constellation, is a start-index-dependent initial phase. It keeps every
/// (start index, data) pair distinguishable: without it, a start-frequency
/// step whose tone is M-periodic coincides with a data rotation that maps
/// the constellation onto itself, and distinct hypotheses would emit
/// identical waveforms.
pub fn make_chirp(spec: &ChirpSpec, cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    if spec.start_index >= cfg.p {
        return Err(Error::Config(format!(
            "chirp start index {} out of range [0, {})",
            spec.start_index, cfg.p
        )));
    }
    let n = cfg.n as f64;
    let p_order = cfg.p as f64;
    let p = spec.start_index as f64;
    let rot = rotation_order(cfg.q, cfg.constellation) as f64;
    let theta = 2.0 * PI * p / (p_order * rot);
    Ok((0..cfg.n)
        .map(|i| {
            let i = i as f64;
            let phase = 2.0 * PI * (p * i / p_order + i * i / (2.0 * n)) + theta;
            Complex64::from_polar(1.0, phase)
        })
        .collect())
}

fn add_cp(body: &[Complex64], l_cp: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(body.len() + l_cp);
    out.extend_from_slice(&body[body.len() - l_cp..]);
    out.extend_from_slice(body);
    out
}

/// DFT-s-OFDM body: M-point DFT, interleaved mapping onto every (N/M)-th
/// subcarrier, N-point IFFT, scaled to unit mean power.
pub fn dft_s_ofdm_body(symbols: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    if symbols.len() != cfg.m {
        return Err(Error::Dimension(format!(
            "expected {} constellation symbols, got {}",
            cfg.m,
            symbols.len()
        )));
    }
    let spread = dft(symbols, Direction::Forward)?;
    let step = cfg.n / cfg.m;
    let mut grid = vec![Complex64::new(0.0, 0.0); cfg.n];
    for (q, v) in spread.iter().enumerate() {
        grid[q * step] = *v;
    }
    let mut body = dft(&grid, Direction::Inverse)?;
    let scale = (cfg.n as f64 / cfg.m as f64).sqrt();
    for x in &mut body {
        *x *= scale;
    }
    Ok(body)
}

/// DFT-s-OFDM symbol: body plus cyclic prefix.
pub fn modulate_dft_s_ofdm(symbols: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    Ok(add_cp(&dft_s_ofdm_body(symbols, cfg)?, cfg.l_cp))
}

/// Multiply a DFT-s-OFDM body with a chirp and prepend a chirp-consistent
/// prefix (the prefix carries the last L_CP samples of the product).
///
/// `chirp_bits` must be empty for the unmodulated chirp and log2 P bits for
/// chirp modulation; the bits Gray-select the starting frequency.
pub fn modulate_with_chirp(
    symbols: &[Complex64],
    chirp_bits: &[u8],
    cfg: &WaveformConfig,
) -> Result<Vec<Complex64>> {
    let spec = chirp_spec_from_bits(chirp_bits, cfg)?;
    let chirp = make_chirp(&spec, cfg)?;
    let body = dsp::hadamard(&dft_s_ofdm_body(symbols, cfg)?, &chirp)?;
    Ok(add_cp(&body, cfg.l_cp))
}

fn chirp_spec_from_bits(chirp_bits: &[u8], cfg: &WaveformConfig) -> Result<ChirpSpec> {
    match cfg.waveform {
        WaveformKind::DftSOfdmCm => {
            let want = cfg.chirp_bits_per_symbol();
            if chirp_bits.len() != want {
                return Err(Error::Payload(format!(
                    "chirp modulation needs {want} bits, got {}",
                    chirp_bits.len()
                )));
            }
            Ok(ChirpSpec::with_start(gray_decode(label_of(chirp_bits))))
        }
        _ => {
            if !chirp_bits.is_empty() {
                return Err(Error::Payload(format!(
                    "unmodulated chirp takes no chirp bits, got {}",
                    chirp_bits.len()
                )));
            }
            Ok(ChirpSpec::unmodulated())
        }
    }
}

fn ofdm_body(symbols: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    if symbols.len() != cfg.n {
        return Err(Error::Dimension(format!(
            "OFDM needs {} symbols, got {}",
            cfg.n,
            symbols.len()
        )));
    }
    dft(symbols, Direction::Inverse)
}

/// AFDM body: frequency-domain quadratic chirp, N-point IFFT, then the
/// time-domain chirp stage. The second chirp rate is zero here, which keeps
/// the waveform a Doppler-resilient comparison baseline without extra
/// parameters.
fn afdm_body(symbols: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    if symbols.len() != cfg.n {
        return Err(Error::Dimension(format!(
            "AFDM needs {} symbols, got {}",
            cfg.n,
            symbols.len()
        )));
    }
    let n = cfg.n as f64;
    let pre: Vec<Complex64> = (0..cfg.n)
        .map(|m| Complex64::from_polar(1.0, PI * (m * m) as f64 / n))
        .collect();
    let chirped = dsp::hadamard(symbols, &pre)?;
    dft(&chirped, Direction::Inverse)
}

/// OTFS body: inverse symplectic transform of the M_otfs x N_otfs
/// delay-Doppler grid, then a Heisenberg transform realized as per-column
/// M_otfs-point inverse transforms (rectangular pulse), serialized.
#[allow(clippy::needless_range_loop)]
fn otfs_body(symbols: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    let (md, nd) = (cfg.m_otfs, cfg.n_otfs);
    if symbols.len() != md * nd {
        return Err(Error::Dimension(format!(
            "OTFS needs {} symbols, got {}",
            md * nd,
            symbols.len()
        )));
    }
    // Delay-Doppler grid, delay-major: grid[l][kk] = symbols[l*nd + kk].
    // ISFFT: inverse transform along Doppler, forward transform along delay.
    let mut tf = vec![vec![Complex64::new(0.0, 0.0); nd]; md];
    for l in 0..md {
        let row: Vec<Complex64> = (0..nd).map(|kk| symbols[l * nd + kk]).collect();
        let t = dft(&row, Direction::Inverse)?;
        tf[l] = t;
    }
    for slot in 0..nd {
        let col: Vec<Complex64> = (0..md).map(|l| tf[l][slot]).collect();
        let f = dft(&col, Direction::Forward)?;
        for l in 0..md {
            tf[l][slot] = f[l];
        }
    }
    // Heisenberg transform: per time slot an M_otfs-point inverse transform.
    let mut body = vec![Complex64::new(0.0, 0.0); md * nd];
    for slot in 0..nd {
        let col: Vec<Complex64> = (0..md).map(|l| tf[l][slot]).collect();
        let time = dft(&col, Direction::Inverse)?;
        body[slot * md..(slot + 1) * md].copy_from_slice(&time);
    }
    Ok(body)
}

fn fmcw_body(cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    make_chirp(&ChirpSpec::unmodulated(), cfg)
}

/// Modulate the payload bits of one slow-time symbol into N + L_CP samples.
pub fn modulate_symbol(bits: &[u8], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    let want = cfg.bits_per_symbol();
    if bits.len() != want {
        return Err(Error::Payload(format!(
            "{} expects {want} bits per symbol, got {}",
            cfg.waveform.label(),
            bits.len()
        )));
    }
    match cfg.waveform {
        WaveformKind::DftSOfdm => {
            let syms = map_bits(bits, cfg.q, cfg.constellation)?;
            modulate_dft_s_ofdm(&syms, cfg)
        }
        WaveformKind::ChirpedDftSOfdm => {
            let syms = map_bits(bits, cfg.q, cfg.constellation)?;
            modulate_with_chirp(&syms, &[], cfg)
        }
        WaveformKind::DftSOfdmCm => {
            let nc = cfg.chirp_bits_per_symbol();
            let syms = map_bits(&bits[nc..], cfg.q, cfg.constellation)?;
            modulate_with_chirp(&syms, &bits[..nc], cfg)
        }
        WaveformKind::Ofdm => {
            let syms = map_bits(bits, cfg.q, cfg.constellation)?;
            Ok(add_cp(&ofdm_body(&syms, cfg)?, cfg.l_cp))
        }
        WaveformKind::Afdm => {
            let syms = map_bits(bits, cfg.q, cfg.constellation)?;
            Ok(add_cp(&afdm_body(&syms, cfg)?, cfg.l_cp))
        }
        WaveformKind::Otfs => {
            let syms = map_bits(bits, cfg.q, cfg.constellation)?;
            Ok(add_cp(&otfs_body(&syms, cfg)?, cfg.l_cp))
        }
        WaveformKind::Fmcw => Ok(add_cp(&fmcw_body(cfg)?, cfg.l_cp)),
    }
}

/// Modulate a whole burst of K slow-time symbols. For chirp modulation the
/// chirp index changes per slow-time symbol.
pub fn modulate_frame(bits: &[u8], cfg: &WaveformConfig) -> Result<BasebandFrame> {
    cfg.validate()?;
    let want = cfg.bits_per_frame();
    if bits.len() != want {
        return Err(Error::Payload(format!(
            "{} expects {want} bits per frame, got {}",
            cfg.waveform.label(),
            bits.len()
        )));
    }
    let per = cfg.bits_per_symbol();
    let mut samples = Vec::with_capacity(cfg.k * cfg.symbol_len());
    for k in 0..cfg.k {
        let chunk = &bits[k * per..(k + 1) * per];
        samples.extend(modulate_symbol(chunk, cfg)?);
    }
    Ok(BasebandFrame {
        samples,
        n: cfg.n,
        l_cp: cfg.l_cp,
        k: cfg.k,
        payload_bits: bits.to_vec(),
    })
}

pub fn random_bits(count: usize, rng: &mut impl Rng) -> Vec<u8> {
    (0..count).map(|_| rng.random_range(0..2u8)).collect()
}

pub fn random_frame(cfg: &WaveformConfig, rng: &mut impl Rng) -> Result<BasebandFrame> {
    let bits = random_bits(cfg.bits_per_frame(), rng);
    modulate_frame(&bits, cfg)
}

/// Reference demodulator for an identity channel: inverts each modulation
/// stage and slices to the nearest constellation point. For chirp modulation
/// the start index is recovered by picking the dechirp hypothesis with the
/// smallest reconstruction residual (ties broken toward the smaller label).
pub fn demodulate_frame(frame: &BasebandFrame, cfg: &WaveformConfig) -> Result<Vec<u8>> {
    let mut bits = Vec::with_capacity(cfg.bits_per_frame());
    for k in 0..frame.k {
        bits.extend(demodulate_body(frame.body(k), cfg)?);
    }
    Ok(bits)
}

fn demodulate_body(body: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<u8>> {
    let table = alphabet(cfg.q, cfg.constellation)?;
    let bits_per = cfg.bits_per_constellation_symbol();
    let slice_all = |syms: &[Complex64]| -> Vec<u8> {
        syms.iter()
            .flat_map(|&s| bits_of(slice_symbol(s, &table), bits_per))
            .collect()
    };
    match cfg.waveform {
        WaveformKind::DftSOfdm => Ok(slice_all(&despread(body, cfg)?)),
        WaveformKind::ChirpedDftSOfdm => {
            let chirp = make_chirp(&ChirpSpec::unmodulated(), cfg)?;
            let dechirped: Vec<Complex64> =
                body.iter().zip(&chirp).map(|(y, c)| y * c.conj()).collect();
            Ok(slice_all(&despread(&dechirped, cfg)?))
        }
        WaveformKind::DftSOfdmCm => {
            let nc = cfg.chirp_bits_per_symbol();
            let mut best: Option<(f64, Vec<u8>)> = None;
            for label in 0..cfg.p {
                let spec = ChirpSpec::with_start(gray_decode(label));
                let chirp = make_chirp(&spec, cfg)?;
                let dechirped: Vec<Complex64> =
                    body.iter().zip(&chirp).map(|(y, c)| y * c.conj()).collect();
                let syms = despread(&dechirped, cfg)?;
                let sliced: Vec<Complex64> = syms
                    .iter()
                    .map(|&s| table[slice_symbol(s, &table)])
                    .collect();
                let rebuilt = dsp::hadamard(&dft_s_ofdm_body(&sliced, cfg)?, &chirp)?;
                let residual: f64 = body
                    .iter()
                    .zip(&rebuilt)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum();
                if best.as_ref().is_none_or(|(r, _)| residual < *r) {
                    let mut b = bits_of(label, nc);
                    b.extend(slice_all(&syms));
                    best = Some((residual, b));
                }
            }
            Ok(best.expect("p >= 1").1)
        }
        WaveformKind::Ofdm => Ok(slice_all(&dft(body, Direction::Forward)?)),
        WaveformKind::Afdm => {
            let spectrum = dft(body, Direction::Forward)?;
            let n = cfg.n as f64;
            let syms: Vec<Complex64> = spectrum
                .iter()
                .enumerate()
                .map(|(m, v)| v * Complex64::from_polar(1.0, -PI * (m * m) as f64 / n))
                .collect();
            Ok(slice_all(&syms))
        }
        #[allow(clippy::needless_range_loop)]
        WaveformKind::Otfs => {
            let (md, nd) = (cfg.m_otfs, cfg.n_otfs);
            // Invert the Heisenberg transform, then the ISFFT.
            let mut tf = vec![vec![Complex64::new(0.0, 0.0); nd]; md];
            for slot in 0..nd {
                let f = dft(&body[slot * md..(slot + 1) * md], Direction::Forward)?;
                for l in 0..md {
                    tf[l][slot] = f[l];
                }
            }
            for slot in 0..nd {
                let col: Vec<Complex64> = (0..md).map(|l| tf[l][slot]).collect();
                let t = dft(&col, Direction::Inverse)?;
                for l in 0..md {
                    tf[l][slot] = t[l];
                }
            }
            let mut syms = vec![Complex64::new(0.0, 0.0); md * nd];
            for l in 0..md {
                let row = dft(&tf[l], Direction::Forward)?;
                for kk in 0..nd {
                    syms[l * nd + kk] = row[kk];
                }
            }
            Ok(slice_all(&syms))
        }
        WaveformKind::Fmcw => Ok(Vec::new()),
    }
}

/// Undo spreading: N-point transform, pick the interleaved subcarriers,
/// M-point inverse transform, undo the power normalization.
fn despread(body: &[Complex64], cfg: &WaveformConfig) -> Result<Vec<Complex64>> {
    let spectrum = dft(body, Direction::Forward)?;
    let step = cfg.n / cfg.m;
    let scale = (cfg.m as f64 / cfg.n as f64).sqrt();
    let spread: Vec<Complex64> = (0..cfg.m).map(|q| spectrum[q * step] * scale).collect();
    dft(&spread, Direction::Inverse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ConstellationKind;
    use crate::metrics::papr_db;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qpsk_cfg(waveform: WaveformKind) -> WaveformConfig {
        let mut cfg = WaveformConfig::scenario_ii();
        cfg.waveform = waveform;
        cfg.n = 32;
        cfg.m = 8;
        cfg.l_cp = 8;
        cfg.k = 2;
        cfg.m_otfs = 8;
        cfg.n_otfs = 4;
        cfg
    }

    #[test]
    fn chirp_is_unit_modulus() {
        let mut cfg = WaveformConfig::scenario_i();
        cfg.p = 4;
        for p in 0..4 {
            let c = make_chirp(&ChirpSpec::with_start(p), &cfg).unwrap();
            for x in c {
                assert!((x.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chirp_instantaneous_frequency_sweeps_one_bin_per_sample() {
        let cfg = WaveformConfig::scenario_i();
        let c = make_chirp(&ChirpSpec::unmodulated(), &cfg).unwrap();
        let n = cfg.n as f64;
        // Phase increment between consecutive samples is 2π(n + 1/2)/N:
        // the instantaneous frequency advances by exactly one bin (1/N of
        // the band) per sample.
        for i in 0..cfg.n - 1 {
            let delta = (c[i + 1] * c[i].conj()).arg();
            let expect = 2.0 * PI * ((i as f64 + 0.5) / n);
            let wrapped = (expect + PI).rem_euclid(2.0 * PI) - PI;
            assert!(
                (delta - wrapped).abs() < 1e-9,
                "sample {i}: {delta} vs {wrapped}"
            );
        }
    }

    #[test]
    fn delayed_chirp_mixes_to_single_tone() {
        let cfg = WaveformConfig::scenario_i();
        let c = make_chirp(&ChirpSpec::unmodulated(), &cfg).unwrap();
        for d in [1usize, 7, 100] {
            let delayed = dsp::cyclic_shift(&c, d);
            let mix: Vec<Complex64> = c.iter().zip(&delayed).map(|(a, b)| a * b.conj()).collect();
            let spectrum = dft(&mix, Direction::Forward).unwrap();
            let peak = spectrum
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
                .unwrap();
            assert_eq!(peak.0, d, "tone should sit at bin d");
            assert!(
                (peak.1.norm() - (cfg.n as f64).sqrt()).abs() < 1e-9,
                "all energy in one bin"
            );
        }
    }

    #[test]
    fn no_spreading_is_transparent() {
        let mut cfg = qpsk_cfg(WaveformKind::DftSOfdm);
        cfg.m = cfg.n;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bits = random_bits(cfg.n * 2, &mut rng);
        let syms = map_bits(&bits, 4, ConstellationKind::Psk).unwrap();
        let out = modulate_dft_s_ofdm(&syms, &cfg).unwrap();
        for (a, b) in syms.iter().zip(&out[cfg.l_cp..]) {
            assert!((a - b).norm() < 1e-12, "M == N cancels both transforms");
        }
    }

    #[test]
    fn interleaved_mapping_repeats_the_symbols() {
        let cfg = qpsk_cfg(WaveformKind::DftSOfdm);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let bits = random_bits(cfg.m * 2, &mut rng);
        let syms = map_bits(&bits, 4, ConstellationKind::Psk).unwrap();
        let body = dft_s_ofdm_body(&syms, &cfg).unwrap();
        for n in 0..cfg.n {
            assert!(
                (body[n] - syms[n % cfg.m]).norm() < 1e-12,
                "body is the symbol sequence repeated N/M times"
            );
        }
    }

    #[test]
    fn repetition_magnitudes_with_half_spread() {
        let mut cfg = qpsk_cfg(WaveformKind::DftSOfdm);
        cfg.m = cfg.n / 2;
        cfg.q = 16;
        cfg.constellation = ConstellationKind::Qam;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let bits = random_bits(cfg.m * 4, &mut rng);
        let syms = map_bits(&bits, 16, ConstellationKind::Qam).unwrap();
        let body = dft_s_ofdm_body(&syms, &cfg).unwrap();
        for n in 0..cfg.m {
            assert!(
                (body[n].norm() - body[n + cfg.m].norm()).abs() < 1e-12,
                "|x[n]| == |x[n+M]| for M = N/2"
            );
        }
    }

    #[test]
    fn psk_bodies_are_constant_modulus() {
        for kind in [
            WaveformKind::DftSOfdm,
            WaveformKind::ChirpedDftSOfdm,
            WaveformKind::DftSOfdmCm,
            WaveformKind::Fmcw,
        ] {
            let mut cfg = qpsk_cfg(kind);
            if kind == WaveformKind::DftSOfdmCm {
                cfg.p = 4;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(10);
            let frame = random_frame(&cfg, &mut rng).unwrap();
            for k in 0..frame.k {
                let mags: Vec<f64> = frame.body(k).iter().map(|x| x.norm()).collect();
                let max = mags.iter().cloned().fold(0.0, f64::max);
                let min = mags.iter().cloned().fold(f64::INFINITY, f64::min);
                assert!(max / min < 1.0 + 1e-9, "{kind:?}: {max} / {min}");
            }
        }
    }

    #[test]
    fn chirping_preserves_papr_exactly() {
        let mut cfg = qpsk_cfg(WaveformKind::DftSOfdm);
        cfg.q = 16;
        cfg.constellation = ConstellationKind::Qam;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bits = random_bits(cfg.bits_per_frame(), &mut rng);
        let plain = modulate_frame(&bits, &cfg).unwrap();
        cfg.waveform = WaveformKind::ChirpedDftSOfdm;
        let chirped = modulate_frame(&bits, &cfg).unwrap();
        for k in 0..cfg.k {
            let a = papr_db(plain.body(k)).unwrap();
            let b = papr_db(chirped.body(k)).unwrap();
            assert!((a - b).abs() < 1e-12, "unit-modulus chirp: {a} vs {b}");
        }
    }

    #[test]
    fn chirp_start_indices_differ_by_a_tone() {
        let mut cfg = qpsk_cfg(WaveformKind::DftSOfdmCm);
        cfg.p = 4;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let data = random_bits(cfg.m * 2, &mut rng);
        let with_p = |label: usize| {
            let mut bits = bits_of(label, 2);
            bits.extend_from_slice(&data);
            modulate_symbol(&bits, &cfg).unwrap()
        };
        let a = with_p(0b00);
        let b = with_p(0b01);
        let pa = gray_decode(0b00) as i64;
        let pb = gray_decode(0b01) as i64;
        // Bodies differ by the tone exp(j2π(pa-pb)n/P) times a constant
        // unit-modulus start phase.
        let tone: Vec<Complex64> = (0..cfg.n)
            .map(|i| {
                Complex64::from_polar(1.0, 2.0 * PI * (pa - pb) as f64 * i as f64 / cfg.p as f64)
            })
            .collect();
        let residual: Vec<Complex64> = (0..cfg.n)
            .map(|i| a[cfg.l_cp + i] / b[cfg.l_cp + i] * tone[i].conj())
            .collect();
        let first = residual[0];
        assert!((first.norm() - 1.0).abs() < 1e-9);
        for r in residual {
            assert!((r - first).norm() < 1e-9, "constant ratio");
        }
    }

    #[test]
    fn modulators_preserve_energy() {
        for kind in [
            WaveformKind::DftSOfdm,
            WaveformKind::ChirpedDftSOfdm,
            WaveformKind::Ofdm,
            WaveformKind::Afdm,
            WaveformKind::Otfs,
            WaveformKind::Fmcw,
        ] {
            let cfg = qpsk_cfg(kind);
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            let frame = random_frame(&cfg, &mut rng).unwrap();
            for k in 0..frame.k {
                let p = dsp::mean_power(frame.body(k));
                assert!((p - 1.0).abs() < 1e-9, "{kind:?}: mean power {p}");
            }
        }
    }

    #[test]
    fn ofdm_coherent_input_hits_peak_papr() {
        let mut cfg = qpsk_cfg(WaveformKind::Ofdm);
        cfg.n = 256;
        cfg.m = 256;
        cfg.l_cp = 32;
        cfg.k = 1;
        cfg.m_otfs = 128;
        cfg.n_otfs = 2;
        // All-identical QPSK symbols transform to a single impulse.
        let bits: Vec<u8> = std::iter::repeat_n([0u8, 0u8], cfg.n).flatten().collect();
        let frame = modulate_frame(&bits, &cfg).unwrap();
        let papr = papr_db(frame.body(0)).unwrap();
        assert!(
            (papr - 10.0 * (cfg.n as f64).log10()).abs() < 1e-9,
            "coherent peak: {papr}"
        );
    }

    #[test]
    fn otfs_single_grid_point_is_a_pulse_train() {
        let mut cfg = qpsk_cfg(WaveformKind::Otfs);
        cfg.k = 1;
        let mut symbols = vec![Complex64::new(0.0, 0.0); cfg.n];
        symbols[5 * cfg.n_otfs] = Complex64::new(1.0, 0.0); // delay bin 5, Doppler 0
        let body = otfs_body(&symbols, &cfg).unwrap();
        let nonzero: Vec<usize> = (0..cfg.n).filter(|&i| body[i].norm() > 1e-9).collect();
        assert_eq!(
            nonzero,
            (0..cfg.n_otfs)
                .map(|s| s * cfg.m_otfs + 5)
                .collect::<Vec<_>>(),
            "one pulse per time slot at the delay offset"
        );
        assert!((dsp::energy(&body) - 1.0).abs() < 1e-10, "energy preserved");
    }

    #[test]
    fn fmcw_carries_no_data_and_zero_papr() {
        let cfg = qpsk_cfg(WaveformKind::Fmcw);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let frame = random_frame(&cfg, &mut rng).unwrap();
        assert!(frame.payload_bits.is_empty());
        assert!(papr_db(frame.body(0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn every_waveform_demodulates_in_identity_channel() {
        for kind in [
            WaveformKind::DftSOfdm,
            WaveformKind::ChirpedDftSOfdm,
            WaveformKind::DftSOfdmCm,
            WaveformKind::Ofdm,
            WaveformKind::Afdm,
            WaveformKind::Otfs,
            WaveformKind::Fmcw,
        ] {
            let mut cfg = qpsk_cfg(kind);
            if kind == WaveformKind::DftSOfdmCm {
                cfg.p = 8;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(15);
            for trial in 0..1000 {
                let frame = random_frame(&cfg, &mut rng).unwrap();
                let bits = demodulate_frame(&frame, &cfg).unwrap();
                assert_eq!(bits, frame.payload_bits, "{kind:?} trial {trial}");
            }
        }
    }

    #[test]
    fn cm_codebook_has_no_duplicate_waveforms() {
        // A start-frequency step whose tone is M-periodic coincides with a
        // constellation-preserving data rotation; the start-phase term must
        // keep those hypothesis pairs apart. Checked exhaustively on two
        // configurations that collide without it.
        for (m, q, p) in [(2usize, 4usize, 4usize), (4, 2, 16)] {
            let mut cfg = WaveformConfig::scenario_ii();
            cfg.waveform = WaveformKind::DftSOfdmCm;
            cfg.m = m;
            cfg.q = q;
            cfg.p = p;
            cfg.k = 1;
            let total = cfg.bits_per_symbol();
            let count = 1usize << total;
            let bodies: Vec<Vec<Complex64>> = (0..count)
                .map(|label| {
                    let bits = bits_of(label, total);
                    let sym = modulate_symbol(&bits, &cfg).unwrap();
                    sym[cfg.l_cp..].to_vec()
                })
                .collect();
            let mut min_dist = f64::INFINITY;
            for i in 0..count {
                for j in i + 1..count {
                    let d: f64 = bodies[i]
                        .iter()
                        .zip(&bodies[j])
                        .map(|(a, b)| (a - b).norm_sqr())
                        .sum();
                    min_dist = min_dist.min(d);
                }
            }
            assert!(
                min_dist > 1e-6,
                "(M={m}, Q={q}, P={p}): closest pair distance {min_dist}"
            );
        }
    }

    #[test]
    fn payload_size_mismatch_rejected() {
        let cfg = qpsk_cfg(WaveformKind::Ofdm);
        let err = modulate_frame(&[0, 1, 0], &cfg);
        assert!(matches!(err, Err(Error::Payload(_))));
    }
}
