//! Brute-force reference computations for the test suites.
//!
//! Deliberately independent of the production peak search: the dense
//! grid is evaluated with a self-contained radix-2 transform (or plain
//! term-by-term summation when the grid length is not a power of two)
//! and no refinement is applied. Compiled only under the `test-oracle`
//! feature.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::ofdm::Codeword;

/// Crest factor by exhaustive evaluation of `|s|` on the dense uniform
/// grid of `oversampling · n` points, with no local refinement.
pub fn dense_grid_crest_factor(codeword: &Codeword, oversampling: usize) -> f64 {
    let symbols = codeword.symbols();
    let n = symbols.len();
    let grid_len = n * oversampling;
    let scale = 1.0 / (n as f64).sqrt();
    let max_sq = if grid_len.is_power_of_two() {
        let mut buf = vec![Complex64::new(0.0, 0.0); grid_len];
        for (slot, &x) in buf.iter_mut().zip(symbols) {
            *slot = x * scale;
        }
        radix2_inverse_dft(&mut buf);
        buf.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max)
    } else {
        (0..grid_len)
            .map(|k| {
                let s: Complex64 = symbols
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| x * Complex64::from_polar(1.0, TAU * (i * k) as f64 / grid_len as f64))
                    .sum();
                (s * scale).norm_sqr()
            })
            .fold(0.0, f64::max)
    };
    max_sq.sqrt()
}

/// In-place unnormalized inverse DFT (`out_k = Σ_j in_j e^{+2πijk/N}`)
/// for power-of-two lengths: iterative Cooley–Tukey with a precomputed
/// twiddle table.
fn radix2_inverse_dft(buf: &mut [Complex64]) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n < 2 {
        return;
    }

    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i.reverse_bits() >> (usize::BITS - bits)) as usize;
        if j > i {
            buf.swap(i, j);
        }
    }

    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|r| Complex64::from_polar(1.0, TAU * r as f64 / n as f64))
        .collect();

    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        for start in (0..n).step_by(2 * half) {
            for j in 0..half {
                let w = twiddles[j * stride];
                let a = buf[start + j];
                let b = buf[start + j + half] * w;
                buf[start + j] = a + b;
                buf[start + j + half] = a - b;
            }
        }
        half *= 2;
    }
}
