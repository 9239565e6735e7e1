//! Communication receivers: equivalent-channel construction with a known
//! chirp, exhaustive ML and LMMSE equalization, joint ML over data and
//! chirp index for chirp modulation, and bit-error accounting.

use num_complex::Complex64;

use crate::channel::{ChannelProfile, PathTap};
use crate::config::{ChirpSpec, WaveformConfig};
use crate::constellation::{alphabet, bits_of, gray_decode};
use crate::dsp;
use crate::error::{Error, Result};
use crate::waveform::{dft_s_ofdm_body, make_chirp, BasebandFrame};

/// Default cap on the number of ML hypotheses (Q^M, or P·Q^M for joint
/// detection).
pub const DEFAULT_HYPOTHESIS_BUDGET_BITS: usize = 20;

/// Linear map from the M constellation symbols of one slow-time symbol to
/// the received, CP-removed body samples, with chirp, spreading, mapping,
/// transform and channel taps folded in.
#[derive(Debug, Clone)]
pub struct EquivalentChannel {
    /// M columns of length N; column m is the response to a unit impulse at
    /// constellation position m.
    pub columns: Vec<Vec<Complex64>>,
    pub noise_var: f64,
}

impl EquivalentChannel {
    pub fn n(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn m(&self) -> usize {
        self.columns.len()
    }

    /// H·s for a candidate symbol vector.
    pub fn apply(&self, s: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n()];
        for (sym, col) in s.iter().zip(&self.columns) {
            for (o, c) in out.iter_mut().zip(col) {
                *o += sym * c;
            }
        }
        out
    }

    /// ||y - H·s||² without allocating the intermediate product.
    pub fn distance_sq(&self, y: &[Complex64], s: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for n in 0..self.n() {
            let mut v = y[n];
            for (sym, col) in s.iter().zip(&self.columns) {
                v -= sym * col[n];
            }
            acc += v.norm_sqr();
        }
        acc
    }
}

/// Build the equivalent channel by column probing: column m is the
/// noiseless CP-removed body received when the constellation vector is a
/// unit impulse at position m, obtained by running the modulator and the
/// tap channel. `chirp` is `None` for plain DFT-s-OFDM and the known (or
/// hypothesized) chirp otherwise.
pub fn build_equivalent_channel(
    cfg: &WaveformConfig,
    taps: &[PathTap],
    chirp: Option<&ChirpSpec>,
    noise_var: f64,
) -> Result<EquivalentChannel> {
    let chirp_vec = match chirp {
        Some(spec) => Some(make_chirp(spec, cfg)?),
        None => None,
    };
    let profile = ChannelProfile::clean(taps.to_vec());
    let mut columns = Vec::with_capacity(cfg.m);
    for m in 0..cfg.m {
        let mut impulse = vec![Complex64::new(0.0, 0.0); cfg.m];
        impulse[m] = Complex64::new(1.0, 0.0);
        let mut body = dft_s_ofdm_body(&impulse, cfg)?;
        if let Some(c) = &chirp_vec {
            body = dsp::hadamard(&body, c)?;
        }
        let mut samples = Vec::with_capacity(cfg.symbol_len());
        samples.extend_from_slice(&body[cfg.n - cfg.l_cp..]);
        samples.extend_from_slice(&body);
        let frame = BasebandFrame {
            samples,
            n: cfg.n,
            l_cp: cfg.l_cp,
            k: 1,
            payload_bits: Vec::new(),
        };
        let received = crate::channel::propagate(&frame, &profile, cfg, 0)?;
        columns.push(received.body(0).to_vec());
    }
    Ok(EquivalentChannel { columns, noise_var })
}

fn check_budget(hypothesis_bits: usize) -> Result<()> {
    if hypothesis_bits > DEFAULT_HYPOTHESIS_BUDGET_BITS {
        return Err(Error::Budget(format!(
            "2^{hypothesis_bits} hypotheses exceed 2^{DEFAULT_HYPOTHESIS_BUDGET_BITS}"
        )));
    }
    Ok(())
}

/// Exhaustive ML detection: argmin over all Q^M constellation vectors of
/// ||y - H·s||². Candidates are scanned in lexicographic bit order with a
/// strict improvement test, so ties resolve to the lowest bit pattern.
#[allow(clippy::needless_range_loop)]
pub fn ml_detect(
    y: &[Complex64],
    eqch: &EquivalentChannel,
    cfg: &WaveformConfig,
) -> Result<Vec<u8>> {
    if y.len() != eqch.n() {
        return Err(Error::Dimension(format!(
            "observation length {} does not match channel rows {}",
            y.len(),
            eqch.n()
        )));
    }
    let bits_per = cfg.bits_per_constellation_symbol();
    let total_bits = cfg.m * bits_per;
    check_budget(total_bits)?;
    let table = alphabet(cfg.q, cfg.constellation)?;
    let mut best_label = 0usize;
    let mut best_metric = f64::INFINITY;
    let mut symbols = vec![Complex64::new(0.0, 0.0); cfg.m];
    for label in 0..(1usize << total_bits) {
        for m in 0..cfg.m {
            let chunk = (label >> ((cfg.m - 1 - m) * bits_per)) & ((1 << bits_per) - 1);
            symbols[m] = table[chunk];
        }
        let d = eqch.distance_sq(y, &symbols);
        if d < best_metric {
            best_metric = d;
            best_label = label;
        }
    }
    Ok(bits_of(best_label, total_bits))
}

/// Joint ML over chirp start index and data for chirp modulation: minimizes
/// ||y - H(p)·s||² over p in [0, P) and all constellation vectors, returning
/// the concatenated (chirp bits, data bits). Chirp labels are scanned in
/// lexicographic order so the tie-break matches `ml_detect`.
#[allow(clippy::needless_range_loop)]
pub fn ml_detect_cm(y: &[Complex64], cfg: &WaveformConfig, taps: &[PathTap]) -> Result<Vec<u8>> {
    let bits_per = cfg.bits_per_constellation_symbol();
    let data_bits = cfg.m * bits_per;
    let chirp_bits = cfg.p.trailing_zeros() as usize;
    check_budget(data_bits + chirp_bits)?;
    let table = alphabet(cfg.q, cfg.constellation)?;
    let mut best: Option<(f64, usize, usize)> = None;
    let mut symbols = vec![Complex64::new(0.0, 0.0); cfg.m];
    for chirp_label in 0..cfg.p {
        let spec = ChirpSpec::with_start(gray_decode(chirp_label));
        let eqch = build_equivalent_channel(cfg, taps, Some(&spec), 0.0)?;
        if y.len() != eqch.n() {
            return Err(Error::Dimension(format!(
                "observation length {} does not match channel rows {}",
                y.len(),
                eqch.n()
            )));
        }
        for label in 0..(1usize << data_bits) {
            for m in 0..cfg.m {
                let chunk = (label >> ((cfg.m - 1 - m) * bits_per)) & ((1 << bits_per) - 1);
                symbols[m] = table[chunk];
            }
            let d = eqch.distance_sq(y, &symbols);
            if best.as_ref().is_none_or(|(b, _, _)| d < *b) {
                best = Some((d, chirp_label, label));
            }
        }
    }
    let (_, chirp_label, data_label) = best.expect("P >= 1 and Q >= 2");
    let mut bits = bits_of(chirp_label, chirp_bits);
    bits.extend(bits_of(data_label, data_bits));
    Ok(bits)
}

/// LMMSE symbol estimate: (HᴴH + noise_var·I)⁻¹ Hᴴ y, assuming unit-energy
/// symbols.
#[allow(clippy::needless_range_loop)]
pub fn lmmse_estimate(y: &[Complex64], eqch: &EquivalentChannel) -> Result<Vec<Complex64>> {
    if y.len() != eqch.n() {
        return Err(Error::Dimension(format!(
            "observation length {} does not match channel rows {}",
            y.len(),
            eqch.n()
        )));
    }
    let m = eqch.m();
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); m]; m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for n in 0..eqch.n() {
                acc += eqch.columns[i][n].conj() * eqch.columns[j][n];
            }
            gram[i][j] = acc;
        }
        gram[i][i] += eqch.noise_var;
    }
    let rhs: Vec<Complex64> = (0..m)
        .map(|i| {
            eqch.columns[i]
                .iter()
                .zip(y)
                .map(|(h, v)| h.conj() * v)
                .sum()
        })
        .collect();
    cholesky_solve(&gram, &rhs)
}

/// Nearest-constellation slicing of the LMMSE estimate.
pub fn lmmse_detect(
    y: &[Complex64],
    eqch: &EquivalentChannel,
    cfg: &WaveformConfig,
) -> Result<Vec<u8>> {
    let estimate = lmmse_estimate(y, eqch)?;
    let table = alphabet(cfg.q, cfg.constellation)?;
    let bits_per = cfg.bits_per_constellation_symbol();
    Ok(estimate
        .iter()
        .flat_map(|&s| bits_of(crate::constellation::slice_symbol(s, &table), bits_per))
        .collect())
}

/// Hermitian positive-definite solve via Cholesky factorization.
#[allow(clippy::needless_range_loop)]
fn cholesky_solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = a.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let mut d = a[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Numerical(
                "normal matrix is singular or indefinite; LMMSE needs noise_var > 0".into(),
            ));
        }
        l[j][j] = Complex64::new(d.sqrt(), 0.0);
        for i in j + 1..n {
            let mut acc = a[i][j];
            for k in 0..j {
                acc -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = acc / l[j][j];
        }
    }
    // Forward then backward substitution.
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= l[i][k] * u[k];
        }
        u[i] = acc / l[i][i];
    }
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut acc = u[i];
        for k in i + 1..n {
            acc -= l[k][i].conj() * z[k];
        }
        z[i] = acc / l[i][i];
    }
    Ok(z)
}

/// Hamming distance and sequence length.
pub fn count_errors(tx_bits: &[u8], rx_bits: &[u8]) -> Result<(u64, u64)> {
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::Dimension(format!(
            "bit sequences differ in length ({} vs {})",
            tx_bits.len(),
            rx_bits.len()
        )));
    }
    let errors = tx_bits
        .iter()
        .zip(rx_bits)
        .filter(|(a, b)| a != b)
        .count() as u64;
    Ok((errors, tx_bits.len() as u64))
}
