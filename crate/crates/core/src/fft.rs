//! Iterative radix-2 FFT.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{invalid, Result};

/// In-place forward DFT, `X_k = Σ_j x_j e^{-2πi jk/N}`. `N` must be a power of two.
pub fn fft_forward(data: &mut [Complex64]) -> Result<()> {
    let n = data.len();
    if !n.is_power_of_two() {
        return Err(invalid("fft size", alloc::format!("{n} is not a power of two")));
    }
    if n == 1 {
        return Ok(());
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }

    // Twiddles from direct evaluation, no recurrence drift.
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let (s, c) = libm::sincos(-TAU * k as f64 / n as f64);
            Complex64::new(c, s)
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let a = data[start + k];
                let b = data[start + k + half] * w;
                data[start + k] = a + b;
                data[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, v)| {
                    let (s, c) = libm::sincos(-TAU * ((j * k) % n) as f64 / n as f64);
                    acc + v * Complex64::new(c, s)
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1usize, 2, 4, 8, 64, 256] {
            let x: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new(libm::sin(j as f64 * 0.7) + 0.1, libm::cos(j as f64 * 1.3)))
                .collect();
            let mut y = x.clone();
            fft_forward(&mut y).unwrap();
            let z = naive_dft(&x);
            for (a, b) in y.iter().zip(&z) {
                assert!((a - b).norm() < 1e-11, "n = {n}");
            }
        }
    }

    #[test]
    fn impulse_is_flat() {
        let mut x = vec![Complex64::new(0.0, 0.0); 16];
        x[0] = Complex64::new(1.0, 0.0);
        fft_forward(&mut x).unwrap();
        assert!(x.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn rejects_non_power_of_two() {
        let mut x = vec![Complex64::new(0.0, 0.0); 12];
        assert!(fft_forward(&mut x).is_err());
    }
}
