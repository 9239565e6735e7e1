//! Complex-vector primitives used by every other module: unitary discrete
//! Fourier transforms, circular cross-correlation, cyclic shifts and power
//! statistics.
//!
//! All transforms use the symmetric 1/√N normalization in both directions so
//! that energy is preserved and energy metrics (PAPR, PMSR) need no
//! compensation factors. Only power-of-two sizes are supported.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Transform direction. `Forward` uses the e^{-j2πkn/N} kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: Direction) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        match direction {
            Direction::Forward => planner.plan_fft_forward(len),
            Direction::Inverse => planner.plan_fft_inverse(len),
        }
    })
}

fn check_power_of_two(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Config(format!(
            "transform length must be a power of two, got {len}"
        )));
    }
    Ok(())
}

/// Unitary DFT of a complex vector.
///
/// Forward: X[k] = 1/√N Σ x[n] e^{-j2πkn/N}; inverse uses the conjugate
/// kernel with the same 1/√N scale, so `dft(dft(v), Inverse) == v`.
pub fn dft(v: &[Complex64], direction: Direction) -> Result<Vec<Complex64>> {
    check_power_of_two(v.len())?;
    let mut buf = v.to_vec();
    plan(v.len(), direction).process(&mut buf);
    let scale = 1.0 / (v.len() as f64).sqrt();
    for x in &mut buf {
        *x *= scale;
    }
    Ok(buf)
}

/// Circular cross-correlation r[d] = Σ_n y[n]·conj(x[(n-d) mod N]),
/// computed with two transforms, one elementwise product and one inverse
/// transform.
pub fn circular_correlate(y: &[Complex64], x: &[Complex64]) -> Result<Vec<Complex64>> {
    if y.len() != x.len() {
        return Err(Error::Dimension(format!(
            "correlation inputs must have equal length ({} vs {})",
            y.len(),
            x.len()
        )));
    }
    let yf = dft(y, Direction::Forward)?;
    let xf = dft(x, Direction::Forward)?;
    let prod: Vec<Complex64> = yf.iter().zip(&xf).map(|(a, b)| a * b.conj()).collect();
    let mut r = dft(&prod, Direction::Inverse)?;
    // Unitary scaling leaves a residual 1/√N on the correlation identity.
    let scale = (y.len() as f64).sqrt();
    for v in &mut r {
        *v *= scale;
    }
    Ok(r)
}

/// Cyclic delay: out[n] = x[(n - shift) mod N].
pub fn cyclic_shift(x: &[Complex64], shift: usize) -> Vec<Complex64> {
    let n = x.len();
    let shift = shift % n;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&x[n - shift..]);
    out.extend_from_slice(&x[..n - shift]);
    out
}

/// Elementwise product of two equal-length vectors.
pub fn hadamard(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "elementwise product needs equal lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| x * y).collect())
}

pub fn energy(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

pub fn mean_power(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    energy(v) / v.len() as f64
}

pub fn peak_power(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }

    /// O(N²) reference for the transform-based correlation.
    fn correlate_direct(y: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
        let n = y.len();
        (0..n)
            .map(|d| {
                (0..n)
                    .map(|i| y[i] * x[(i + n - d) % n].conj())
                    .sum::<Complex64>()
            })
            .collect()
    }

    #[test]
    fn impulse_transforms_to_flat_spectrum() {
        let v = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let out = dft(&v, Direction::Forward).unwrap();
        for x in out {
            assert!((x - Complex64::new(0.5, 0.0)).norm() < 1e-15, "got {x}");
        }
    }

    #[test]
    fn round_trip_identity() {
        let v = random_vec(256, 1);
        let fwd = dft(&v, Direction::Forward).unwrap();
        let back = dft(&fwd, Direction::Inverse).unwrap();
        let scale = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).norm() / scale < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn round_trip_across_lengths() {
        for n in [8usize, 64, 256, 1024] {
            let v = random_vec(n, n as u64);
            let back = dft(&dft(&v, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
            let err = v
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "N={n}: max error {err}");
        }
    }

    #[test]
    fn parseval_energy_preserved() {
        let v = random_vec(128, 2);
        let f = dft(&v, Direction::Forward).unwrap();
        assert!((energy(&v) - energy(&f)).abs() / energy(&v) < 1e-12);
    }

    #[test]
    fn non_power_of_two_rejected() {
        let v = vec![Complex64::new(1.0, 0.0); 12];
        assert!(matches!(dft(&v, Direction::Forward), Err(Error::Config(_))));
    }

    #[test]
    fn zero_lag_autocorrelation_is_energy() {
        let x = random_vec(64, 3);
        let r = circular_correlate(&x, &x).unwrap();
        assert!((r[0].re - energy(&x)).abs() < 1e-9);
        assert!(r[0].im.abs() < 1e-9);
    }

    #[test]
    fn shifted_input_peaks_at_lag() {
        let x = random_vec(64, 4);
        let y = cyclic_shift(&x, 5);
        let r = circular_correlate(&y, &x).unwrap();
        let direct = correlate_direct(&y, &x);
        let peak = r
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, 5);
        for (a, b) in r.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn impulse_pair_peaks_at_cyclic_lag() {
        let y = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let x = [
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let r = circular_correlate(&y, &x).unwrap();
        let peak = r
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, 3, "delta correlation wraps to lag 3");
    }

    #[test]
    fn correlation_matches_direct_summation() {
        for n in [8usize, 32, 128] {
            let y = random_vec(n, 10 + n as u64);
            let x = random_vec(n, 20 + n as u64);
            let fast = circular_correlate(&y, &x).unwrap();
            let slow = correlate_direct(&y, &x);
            let err = fast
                .iter()
                .zip(&slow)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-9, "N={n}: max error {err}");
        }
    }

    #[test]
    fn length_mismatch_rejected() {
        let a = random_vec(8, 5);
        let b = random_vec(16, 6);
        assert!(matches!(
            circular_correlate(&a, &b),
            Err(Error::Dimension(_))
        ));
    }

    proptest! {
        #[test]
        fn round_trip_property(seed in 0u64..1000, log_n in 3u32..9) {
            let n = 1usize << log_n;
            let v = random_vec(n, seed);
            let back = dft(&dft(&v, Direction::Forward).unwrap(), Direction::Inverse).unwrap();
            let err = v.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-10);
        }
    }
}
