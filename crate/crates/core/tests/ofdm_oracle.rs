//! Peak-search validation against the dense-grid oracle, plus the
//! Lipschitz and bounded-difference properties of the crest factor.
//!
//! The heavyweight versions of these checks (10³ random codewords,
//! exhaustive BPSK up to n = 10) live in the acceptance suite; here the
//! same properties run at reduced sizes.

use cf_lab_core::ofdm::{
    average_power, crest_factor, sample_codeword, Codeword, Constellation, SignalParams,
};
use cf_lab_core::oracle::dense_grid_crest_factor;
use cf_lab_core::seed::stream_rng;

const ORACLE_OVERSAMPLING: usize = 4096;
const ORACLE_TOLERANCE: f64 = 1e-6;

#[test]
fn refined_search_matches_dense_oracle_on_random_codewords() {
    for n in [8usize, 64] {
        let c = Constellation::mpsk(4).unwrap();
        let params = SignalParams::new(n, 16).unwrap();
        for trial in 0..100u64 {
            let mut rng = stream_rng(1000 + n as u64, &[trial]);
            let cw = sample_codeword(&c, n, &mut rng).unwrap();
            let fast = crest_factor(&cw, &params).unwrap();
            let dense = dense_grid_crest_factor(&cw, ORACLE_OVERSAMPLING);
            assert!(
                (fast - dense).abs() <= ORACLE_TOLERANCE,
                "n={n} trial={trial}: refined {fast} vs dense {dense}"
            );
        }
    }
}

#[test]
fn refined_search_matches_dense_oracle_exhaustive_bpsk() {
    // All 2ⁿ BPSK codewords for n up to 6 (n up to 10 in acceptance).
    let c = Constellation::mpsk(2).unwrap();
    for n in 1..=6usize {
        let params = SignalParams::new(n, 16).unwrap();
        for idx in 0..(1usize << n) {
            let digits: Vec<usize> = (0..n).map(|b| (idx >> b) & 1).collect();
            let cw = Codeword::from_indices(&c, &digits).unwrap();
            let fast = crest_factor(&cw, &params).unwrap();
            let dense = dense_grid_crest_factor(&cw, ORACLE_OVERSAMPLING);
            assert!(
                (fast - dense).abs() <= ORACLE_TOLERANCE,
                "n={n} idx={idx}: refined {fast} vs dense {dense}"
            );
        }
    }
}

#[test]
fn single_coordinate_change_bounded_by_two_over_sqrt_n() {
    for n in [4usize, 16, 64] {
        let c = Constellation::mpsk(8).unwrap();
        let params = SignalParams::new(n, 16).unwrap();
        let bound = 2.0 / (n as f64).sqrt() + 1e-8;
        for trial in 0..100u64 {
            let mut rng = stream_rng(77, &[n as u64, trial]);
            let x = sample_codeword(&c, n, &mut rng).unwrap();
            let mut symbols = x.symbols().to_vec();
            let coord = trial as usize % n;
            let old_idx = c.index_of(symbols[coord]).unwrap();
            let shift = 1 + trial as usize % (c.size() - 1);
            symbols[coord] = c.points()[(old_idx + shift) % c.size()];
            let y = Codeword::new(symbols).unwrap();
            let diff = (crest_factor(&x, &params).unwrap() - crest_factor(&y, &params).unwrap()).abs();
            assert!(diff <= bound, "n={n} trial={trial}: |ΔCF| = {diff} > {bound}");
        }
    }
}

#[test]
fn crest_factor_is_lipschitz_in_signal_distance() {
    use cf_lab_core::ofdm::signal_distance_bound;
    let c = Constellation::mpsk(4).unwrap();
    for n in [4usize, 32] {
        let params = SignalParams::new(n, 16).unwrap();
        for trial in 0..100u64 {
            let mut rng = stream_rng(99, &[n as u64, trial]);
            let x = sample_codeword(&c, n, &mut rng).unwrap();
            let y = sample_codeword(&c, n, &mut rng).unwrap();
            let diff = (crest_factor(&x, &params).unwrap() - crest_factor(&y, &params).unwrap()).abs();
            let lip = signal_distance_bound(&x, &y).unwrap();
            assert!(diff <= lip + 1e-8, "n={n} trial={trial}: {diff} > {lip}");

            // the distance bound itself is at most 2·d_a with uniform a
            let hamming = x
                .symbols()
                .iter()
                .zip(y.symbols())
                .filter(|(a, b)| a != b)
                .count();
            assert!(lip <= 2.0 * hamming as f64 / (n as f64).sqrt() + 1e-12);
        }
    }
}

#[test]
fn power_normalization_over_random_codewords() {
    let c = Constellation::mpsk(4).unwrap();
    for n in [4usize, 64, 256] {
        for trial in 0..100u64 {
            let mut rng = stream_rng(123, &[n as u64, trial]);
            let cw = sample_codeword(&c, n, &mut rng).unwrap();
            assert!((average_power(&cw) - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn mpsk_crest_factor_at_least_one() {
    let c = Constellation::mpsk(2).unwrap();
    for n in [2usize, 8, 32] {
        let params = SignalParams::new(n, 16).unwrap();
        for trial in 0..200u64 {
            let mut rng = stream_rng(7, &[n as u64, trial]);
            let cw = sample_codeword(&c, n, &mut rng).unwrap();
            let cf = crest_factor(&cw, &params).unwrap();
            assert!(cf >= 1.0 - 1e-9, "n={n}: crest factor {cf} below 1");
        }
    }
}
