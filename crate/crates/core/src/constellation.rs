//! Gray-labeled PSK and square-QAM alphabets with unit average energy.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::config::ConstellationKind;
use crate::error::{Error, Result};

/// Binary-reflected Gray decode: recovers the sequence position from a label.
pub fn gray_decode(mut g: usize) -> usize {
    let mut v = g;
    while g > 1 {
        g >>= 1;
        v ^= g;
    }
    v
}

pub fn gray_encode(v: usize) -> usize {
    v ^ (v >> 1)
}

fn check_order(q: usize, kind: ConstellationKind) -> Result<u32> {
    if q < 2 || !q.is_power_of_two() {
        return Err(Error::Config(format!(
            "constellation order must be a power of two >= 2, got {q}"
        )));
    }
    let bits = q.trailing_zeros();
    if kind == ConstellationKind::Qam && !bits.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "QAM order must be square, got {q}"
        )));
    }
    Ok(bits)
}

/// Alphabet indexed by bit label (MSB first). Unit average energy.
///
/// PSK places the Gray sequence on the unit circle with a π/Q offset; QAM
/// uses per-axis reflected-Gray labels over levels {±1, ±3, ...}.
pub fn alphabet(q: usize, kind: ConstellationKind) -> Result<Vec<Complex64>> {
    let bits = check_order(q, kind)?;
    let mut points = Vec::with_capacity(q);
    match kind {
        ConstellationKind::Psk => {
            for label in 0..q {
                let pos = gray_decode(label) as f64;
                let phase = 2.0 * PI * (pos + 0.5) / q as f64;
                points.push(Complex64::from_polar(1.0, phase));
            }
        }
        ConstellationKind::Qam => {
            let side = 1usize << (bits / 2);
            // Mean power of {±1, ±3, ..} per axis is (side² - 1)/3.
            let norm = (2.0 * (side * side - 1) as f64 / 3.0).sqrt();
            let half = bits / 2;
            for label in 0..q {
                let i_label = label >> half;
                let q_label = label & ((1 << half) - 1);
                let i_pos = gray_decode(i_label) as f64;
                let q_pos = gray_decode(q_label) as f64;
                let re = 2.0 * i_pos + 1.0 - side as f64;
                let im = 2.0 * q_pos + 1.0 - side as f64;
                points.push(Complex64::new(re, im) / norm);
            }
        }
    }
    Ok(points)
}

/// Map a bit sequence onto constellation symbols. The bit count must be a
/// multiple of log2 Q.
pub fn map_bits(bits: &[u8], q: usize, kind: ConstellationKind) -> Result<Vec<Complex64>> {
    let per = check_order(q, kind)? as usize;
    if !bits.len().is_multiple_of(per) {
        return Err(Error::Payload(format!(
            "bit count {} is not a multiple of log2(Q) = {per}",
            bits.len()
        )));
    }
    let table = alphabet(q, kind)?;
    Ok(bits
        .chunks(per)
        .map(|chunk| table[label_of(chunk)])
        .collect())
}

/// Nearest-point slicing; returns the bit label of the closest symbol.
pub fn slice_symbol(s: Complex64, table: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in table.iter().enumerate() {
        let d = (s - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Interpret a bit chunk (MSB first) as an integer label.
pub fn label_of(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// Expand an integer label into `width` bits, MSB first.
pub fn bits_of(label: usize, width: usize) -> Vec<u8> {
    (0..width)
        .rev()
        .map(|i| ((label >> i) & 1) as u8)
        .collect()
}

/// Order of the rotational symmetry group of the constellation: Q for PSK,
/// 4 for square QAM. Used to pick chirp start phases that keep joint
/// chirp/data hypotheses distinguishable.
pub fn rotation_order(q: usize, kind: ConstellationKind) -> usize {
    match kind {
        ConstellationKind::Psk => q,
        ConstellationKind::Qam => 4,
    }
}
