//! Seeded Monte Carlo engines behind the experiment runner: PAPR sampling,
//! ML bit-error curves, ghost-target trials, PMSR-vs-ISR sweeps and the
//! clipping study.
//!
//! Every engine derives one independent RNG stream per trial from
//! (seed, trial index), so results are reproducible and independent of the
//! worker count; aggregation is order-independent.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    propagate_with_rng, radar_echo, random_phase_taps, transmit, ChannelProfile, Interferer,
    PathTap,
};
use crate::config::{ChirpSpec, WaveformConfig, WaveformKind};
use crate::error::{Error, Result};
use crate::metrics::papr_db;
use crate::rx::{build_equivalent_channel, count_errors, ml_detect, ml_detect_cm};
use crate::sensing::{detect, matched_filter_map, mix_and_range_frame};
use crate::waveform::{modulate_frame, random_bits, random_frame};

/// SplitMix64 step; decorrelates per-trial seeds derived from a base seed.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn trial_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

/// One symbol-level PAPR sample per trial (a fresh random single-symbol
/// frame each time).
pub fn papr_samples(cfg: &WaveformConfig, trials: u64, seed: u64) -> Result<Vec<f64>> {
    let mut one = cfg.clone();
    one.k = 1;
    one.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, 1, t);
            let frame = random_frame(&one, &mut rng)?;
            papr_db(frame.body(0))
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub bits: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        self.bit_errors as f64 / self.bits as f64
    }
}

/// ML-detection bit-error rate over L equal-power random-phase taps, one
/// independent channel draw per frame. Supported for the DFT-s-OFDM family
/// (plain, chirped, chirp-modulated).
pub fn ber_curve(
    cfg: &WaveformConfig,
    l_paths: usize,
    snr_grid_db: &[f64],
    frames_per_point: u64,
    seed: u64,
) -> Result<Vec<BerPoint>> {
    let mut cfg = cfg.clone();
    cfg.k = 1;
    cfg.validate()?;
    if !matches!(
        cfg.waveform,
        WaveformKind::DftSOfdm | WaveformKind::ChirpedDftSOfdm | WaveformKind::DftSOfdmCm
    ) {
        return Err(Error::Config(format!(
            "ber_curve supports the DFT-s-OFDM family, not {}",
            cfg.waveform.label()
        )));
    }
    if l_paths == 0 || l_paths > cfg.l_cp + 1 {
        return Err(Error::Config(format!(
            "l_paths must be in [1, l_cp + 1], got {l_paths}"
        )));
    }
    let mut points = Vec::with_capacity(snr_grid_db.len());
    for (pi, &snr_db) in snr_grid_db.iter().enumerate() {
        let (bit_errors, bits) = (0..frames_per_point)
            .into_par_iter()
            .map(|t| -> Result<(u64, u64)> {
                let mut rng = trial_rng(seed, 1000 + pi as u64, t);
                let taps = random_phase_taps(l_paths, &mut rng);
                let bits = random_bits(cfg.bits_per_frame(), &mut rng);
                let frame = modulate_frame(&bits, &cfg)?;
                let profile = ChannelProfile::clean(taps.clone()).with_snr(snr_db);
                let received = propagate_with_rng(&frame, &profile, &cfg, &mut rng)?;
                let detected = match cfg.waveform {
                    WaveformKind::DftSOfdm => {
                        let eqch = build_equivalent_channel(&cfg, &taps, None, 0.0)?;
                        ml_detect(received.body(0), &eqch, &cfg)?
                    }
                    WaveformKind::ChirpedDftSOfdm => {
                        let eqch = build_equivalent_channel(
                            &cfg,
                            &taps,
                            Some(&ChirpSpec::unmodulated()),
                            0.0,
                        )?;
                        ml_detect(received.body(0), &eqch, &cfg)?
                    }
                    _ => ml_detect_cm(received.body(0), &cfg, &taps)?,
                };
                count_errors(&bits, &detected)
            })
            .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
        points.push(BerPoint {
            snr_db,
            bit_errors,
            bits,
        });
    }
    Ok(points)
}

/// Interpolated SNR (dB) at which the measured curve crosses `target_ber`,
/// assuming log-linear BER between grid points.
pub fn snr_at_ber(points: &[BerPoint], target_ber: f64) -> Option<f64> {
    let log_t = target_ber.log10();
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.ber() <= 0.0 || b.ber() <= 0.0 {
            continue;
        }
        let (la, lb) = (a.ber().log10(), b.ber().log10());
        if (la >= log_t && lb <= log_t) || (la <= log_t && lb >= log_t) {
            if (lb - la).abs() < 1e-12 {
                return Some(a.snr_db);
            }
            let frac = (log_t - la) / (lb - la);
            return Some(a.snr_db + frac * (b.snr_db - a.snr_db));
        }
    }
    None
}

/// Diversity order estimate: decades of BER per 10 dB of SNR between the
/// curve's 1e-2 and 1e-4 crossings.
pub fn diversity_slope(points: &[BerPoint]) -> Option<f64> {
    let s_hi = snr_at_ber(points, 1e-2)?;
    let s_lo = snr_at_ber(points, 1e-4)?;
    if s_lo <= s_hi {
        return None;
    }
    Some(2.0 / ((s_lo - s_hi) / 10.0))
}

/// Scenario knobs for the sensing experiments.
#[derive(Debug, Clone)]
pub struct SensingScenario {
    pub snr_db: f64,
    pub isr_db: f64,
    /// Round-trip reflection gain of the own echo, in dB.
    pub echo_gain_db: f64,
    pub target_range_m: f64,
    pub target_velocity_mps: f64,
    /// Bin position of the interfering emitter's beat line, expressed as a
    /// range through the same delay mapping.
    pub interferer_range_m: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct GhostTrial {
    /// Profile peak relative to the value at the interferer bin, in dB.
    pub fmcw_interferer_gap_db: f64,
    pub fmcw_pmsr_db: f64,
    pub chirped_pmsr_db: f64,
}

fn echo_profile(
    cfg: &WaveformConfig,
    scen: &SensingScenario,
    interferer: Interferer,
) -> Result<ChannelProfile> {
    let gain = Complex64::new(10f64.powf(scen.echo_gain_db / 20.0), 0.0);
    let echo = radar_echo(scen.target_range_m, scen.target_velocity_mps, gain, cfg)?;
    Ok(ChannelProfile {
        taps: vec![echo],
        snr_db: scen.snr_db,
        interferers: vec![interferer],
        clipping_ratio_db: f64::INFINITY,
        noise_ref_power: Some(1.0),
    })
}

/// One draw of the two-emitter ranging scenario: the own echo plus a
/// co-channel emitter of the same waveform family, observed through the
/// averaged beat spectrum of a whole burst.
pub fn ghost_trial(cfg: &WaveformConfig, scen: &SensingScenario, seed: u64) -> Result<GhostTrial> {
    let interferer_delay =
        (2.0 * scen.interferer_range_m * cfg.bandwidth_hz / crate::config::SPEED_OF_LIGHT).round()
            as usize;

    // FMCW: both emitters send the identical chirp burst.
    let mut fmcw_cfg = cfg.clone();
    fmcw_cfg.waveform = WaveformKind::Fmcw;
    let mut rng = trial_rng(seed, 2, 0);
    let fmcw_tx = random_frame(&fmcw_cfg, &mut rng)?;
    let fmcw_int = delayed_copy(&fmcw_tx, &fmcw_cfg, interferer_delay)?;
    let profile = echo_profile(
        &fmcw_cfg,
        scen,
        Interferer {
            frame: fmcw_int,
            isr_db: scen.isr_db,
            offset: Some(0),
        },
    )?;
    let fmcw_rx = propagate_with_rng(&fmcw_tx, &profile, &fmcw_cfg, &mut rng)?;
    let fmcw_profile = mix_and_range_frame(&fmcw_tx, &fmcw_rx, &fmcw_cfg)?;
    let peak = fmcw_profile.magnitudes[fmcw_profile.peak_bin()];
    let at_int = fmcw_profile.magnitudes[interferer_delay].max(1e-300);
    let fmcw_gap = 20.0 * (peak / at_int).log10();
    let fmcw_pmsr = fmcw_profile.pmsr_db(1)?;

    // Chirped DFT-s-OFDM: each emitter carries its own random payload.
    let mut chirped_cfg = cfg.clone();
    chirped_cfg.waveform = WaveformKind::ChirpedDftSOfdm;
    let chirped_tx = random_frame(&chirped_cfg, &mut rng)?;
    let other = random_frame(&chirped_cfg, &mut rng)?;
    let chirped_int = delayed_copy(&other, &chirped_cfg, interferer_delay)?;
    let profile = echo_profile(
        &chirped_cfg,
        scen,
        Interferer {
            frame: chirped_int,
            isr_db: scen.isr_db,
            offset: Some(0),
        },
    )?;
    let chirped_rx = propagate_with_rng(&chirped_tx, &profile, &chirped_cfg, &mut rng)?;
    let chirped_profile = mix_and_range_frame(&chirped_tx, &chirped_rx, &chirped_cfg)?;
    let chirped_pmsr = chirped_profile.pmsr_db(1)?;

    Ok(GhostTrial {
        fmcw_interferer_gap_db: fmcw_gap,
        fmcw_pmsr_db: fmcw_pmsr,
        chirped_pmsr_db: chirped_pmsr,
    })
}

/// The emitter's frame as seen after its own propagation delay.
fn delayed_copy(
    frame: &crate::waveform::BasebandFrame,
    cfg: &WaveformConfig,
    delay: usize,
) -> Result<crate::waveform::BasebandFrame> {
    let profile = ChannelProfile::clean(vec![PathTap {
        delay,
        gain: Complex64::new(1.0, 0.0),
        doppler_hz: 0.0,
    }]);
    crate::channel::propagate(frame, &profile, cfg, 0)
}

pub fn ghost_trials(
    cfg: &WaveformConfig,
    scen: &SensingScenario,
    trials: u64,
    seed: u64,
) -> Result<Vec<GhostTrial>> {
    (0..trials)
        .into_par_iter()
        .map(|t| ghost_trial(cfg, scen, derive_seed(seed, 3, t)))
        .collect()
}

/// Mean FMCW and chirped PMSR per ISR value.
pub fn pmsr_vs_isr(
    cfg: &WaveformConfig,
    scen: &SensingScenario,
    isr_grid_db: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, f64, f64)>> {
    isr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &isr_db)| {
            let mut point = scen.clone();
            point.isr_db = isr_db;
            let runs = (0..trials)
                .into_par_iter()
                .map(|t| ghost_trial(cfg, &point, derive_seed(seed, 10 + i as u64, t)))
                .collect::<Result<Vec<_>>>()?;
            let n = runs.len() as f64;
            Ok((
                isr_db,
                runs.iter().map(|r| r.fmcw_pmsr_db).sum::<f64>() / n,
                runs.iter().map(|r| r.chirped_pmsr_db).sum::<f64>() / n,
            ))
        })
        .collect()
}

/// Averaged beat-spectrum profiles (in dB, normalized to each waveform's
/// peak) for the two-emitter scenario; used for the range-profile figure.
pub fn ghost_profiles(
    cfg: &WaveformConfig,
    scen: &SensingScenario,
    trials: u64,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut fmcw_power = vec![0.0f64; cfg.n];
    let mut chirped_power = vec![0.0f64; cfg.n];
    for t in 0..trials {
        let trial_seed = derive_seed(seed, 4, t);
        let interferer_delay = (2.0 * scen.interferer_range_m * cfg.bandwidth_hz
            / crate::config::SPEED_OF_LIGHT)
            .round() as usize;

        let mut fmcw_cfg = cfg.clone();
        fmcw_cfg.waveform = WaveformKind::Fmcw;
        let mut rng = trial_rng(trial_seed, 2, 0);
        let tx = random_frame(&fmcw_cfg, &mut rng)?;
        let int = delayed_copy(&tx, &fmcw_cfg, interferer_delay)?;
        let profile = echo_profile(
            &fmcw_cfg,
            scen,
            Interferer {
                frame: int,
                isr_db: scen.isr_db,
                offset: Some(0),
            },
        )?;
        let rx = propagate_with_rng(&tx, &profile, &fmcw_cfg, &mut rng)?;
        let range = mix_and_range_frame(&tx, &rx, &fmcw_cfg)?;
        for (acc, v) in fmcw_power.iter_mut().zip(&range.magnitudes) {
            *acc += v * v;
        }

        let mut ch_cfg = cfg.clone();
        ch_cfg.waveform = WaveformKind::ChirpedDftSOfdm;
        let tx = random_frame(&ch_cfg, &mut rng)?;
        let other = random_frame(&ch_cfg, &mut rng)?;
        let int = delayed_copy(&other, &ch_cfg, interferer_delay)?;
        let profile = echo_profile(
            &ch_cfg,
            scen,
            Interferer {
                frame: int,
                isr_db: scen.isr_db,
                offset: Some(0),
            },
        )?;
        let rx = propagate_with_rng(&tx, &profile, &ch_cfg, &mut rng)?;
        let range = mix_and_range_frame(&tx, &rx, &ch_cfg)?;
        for (acc, v) in chirped_power.iter_mut().zip(&range.magnitudes) {
            *acc += v * v;
        }
    }
    let to_db = |power: Vec<f64>| -> Vec<f64> {
        let peak = power.iter().cloned().fold(0.0, f64::max).max(1e-300);
        power.iter().map(|p| 10.0 * (p / peak).log10()).collect()
    };
    Ok((to_db(fmcw_power), to_db(chirped_power)))
}

fn scenario_echo(cfg: &WaveformConfig, scen: &SensingScenario) -> Result<PathTap> {
    let gain = Complex64::new(10f64.powf(scen.echo_gain_db / 20.0), 0.0);
    radar_echo(scen.target_range_m, scen.target_velocity_mps, gain, cfg)
}

/// Mean matched-filter PMSR per clipping ratio for one waveform. The
/// receiver correlates against the ideal (unclipped) reference, and every
/// clipping value reuses the same per-trial payload and noise draws
/// (common random numbers), so a clipping-transparent waveform reports an
/// exactly unchanged PMSR.
pub fn clipping_pmsr(
    cfg: &WaveformConfig,
    scen: &SensingScenario,
    clipping_grid_db: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let echo = scenario_echo(cfg, scen)?;
    clipping_grid_db
        .iter()
        .map(|&cr_db| {
            // Ordered collect + sequential sum keeps the float accumulation
            // independent of the worker count.
            let values = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<f64> {
                    let mut rng = trial_rng(seed, 20, t);
                    let tx = random_frame(cfg, &mut rng)?;
                    let profile = ChannelProfile {
                        taps: vec![echo],
                        snr_db: scen.snr_db,
                        interferers: vec![],
                        clipping_ratio_db: cr_db,
                        noise_ref_power: Some(1.0),
                    };
                    let rx = transmit(&tx, &profile, cfg, &mut rng)?;
                    matched_filter_map(&tx, &rx, cfg)?.pmsr_db(1)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((cr_db, values.iter().sum::<f64>() / trials as f64))
        })
        .collect()
}

/// Detection probability per clipping ratio for one waveform, at
/// `pd_snr_db` with `pd_slow_symbols` slow-time symbols. Common random
/// numbers across clipping values, as in `clipping_pmsr`.
pub fn clipping_pd(
    cfg: &WaveformConfig,
    scen: &SensingScenario,
    pd_snr_db: f64,
    pd_slow_symbols: usize,
    clipping_grid_db: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let mut pd_cfg = cfg.clone();
    pd_cfg.k = pd_slow_symbols;
    let echo = scenario_echo(&pd_cfg, scen)?;
    let truth = (echo.delay, 0usize);
    clipping_grid_db
        .iter()
        .map(|&cr_db| {
            let hits: u64 = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<u64> {
                    let mut rng = trial_rng(seed, 21, t);
                    let tx = random_frame(&pd_cfg, &mut rng)?;
                    let profile = ChannelProfile {
                        taps: vec![echo],
                        snr_db: pd_snr_db,
                        interferers: vec![],
                        clipping_ratio_db: cr_db,
                        noise_ref_power: Some(1.0),
                    };
                    let rx = transmit(&tx, &profile, &pd_cfg, &mut rng)?;
                    let map = matched_filter_map(&tx, &rx, &pd_cfg)?;
                    Ok(detect(&map, truth, 1)?.detected as u64)
                })
                .try_reduce(|| 0, |a, b| Ok(a + b))?;
            Ok((cr_db, hits as f64 / trials as f64))
        })
        .collect()
}
