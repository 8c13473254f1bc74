//! OFDM baseband signal synthesis and crest-factor computation.
//!
//! A codeword `X_0..X_{n−1}` modulates `n` orthonormal sub-carriers over
//! one symbol interval (time normalized to the symbol duration):
//!
//! ```text
//! s(t) = (1/√n) Σ_{i=0}^{n−1} X_i exp(j 2π i t),   0 ≤ t ≤ 1
//! ```
//!
//! and the crest factor is `CF_n(s) = max_t |s(t)|`. The peak search
//! evaluates `|s|` on a uniform grid of `L·n` points (one inverse DFT of
//! the zero-padded symbol vector), then polishes every grid-local
//! maximum within 2% of the grid peak by golden-section search on
//! `|s(t)|²`; see [`crest_factor`].

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest accepted oversampling factor.
pub const MIN_OVERSAMPLING: usize = 4;

/// Grid-local maxima within this fraction of the grid peak (on the
/// envelope scale) are polished by golden-section refinement. The
/// window is wider than the worst-case sampling undershoot of an
/// oversampled degree-(n−1) trigonometric polynomial at `L ≥ 4`.
const REFINE_WINDOW: f64 = 0.98;

/// Time tolerance of the golden-section peak refinement.
const REFINE_TOLERANCE: f64 = 1e-10;

/// Iteration cap of the golden-section peak refinement.
const REFINE_MAX_ITERS: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Constellation family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConstellationKind {
    /// `M` unit-modulus points `e^{j(2l+1)π/M}`, `l = 0..M−1`.
    Mpsk { m: usize },
    /// `√M × √M` odd-integer grid scaled to unit average energy.
    SquareQam { m: usize },
}

/// A finite symbol set with uniform symbol probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
}

impl Constellation {
    /// M-ary PSK with points `e^{j(2l+1)π/M}`.
    pub fn mpsk(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidConfig(format!("MPSK needs M >= 2, got {m}")));
        }
        let points = (0..m)
            .map(|l| Complex64::from_polar(1.0, (2 * l + 1) as f64 * PI / m as f64))
            .collect();
        Ok(Self {
            kind: ConstellationKind::Mpsk { m },
            points,
        })
    }

    /// Square QAM of order `m` (a perfect square ≥ 4), normalized to
    /// unit average energy.
    pub fn square_qam(m: usize) -> Result<Self> {
        let side = (m as f64).sqrt().round() as usize;
        if m < 4 || side * side != m {
            return Err(Error::InvalidConfig(format!(
                "square QAM needs a perfect-square M >= 4, got {m}"
            )));
        }
        let levels: Vec<f64> = (0..side).map(|k| (2 * k + 1) as f64 - side as f64).collect();
        let mut points = Vec::with_capacity(m);
        for re in &levels {
            for im in &levels {
                points.push(Complex64::new(*re, *im));
            }
        }
        let energy: f64 = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
        let scale = 1.0 / energy.sqrt();
        for p in &mut points {
            *p *= scale;
        }
        Ok(Self {
            kind: ConstellationKind::SquareQam { m },
            points,
        })
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    /// Number of constellation points `M`.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Index of `symbol` among the points (exact match), if present.
    pub fn index_of(&self, symbol: Complex64) -> Option<usize> {
        self.points.iter().position(|p| *p == symbol)
    }

    /// Largest point modulus: 1 for PSK, `> 1` for QAM corners. The
    /// per-coordinate crest-factor variation is at most twice this.
    pub fn modulus_bound(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }
}

/// A length-`n` vector of modulation symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    symbols: Vec<Complex64>,
}

impl Codeword {
    pub fn new(symbols: Vec<Complex64>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Domain("codeword must have at least one symbol".into()));
        }
        Ok(Self { symbols })
    }

    /// Codeword assembled from constellation point indices.
    pub fn from_indices(constellation: &Constellation, indices: &[usize]) -> Result<Self> {
        let m = constellation.size();
        let symbols = indices
            .iter()
            .map(|&i| {
                if i < m {
                    Ok(constellation.points()[i])
                } else {
                    Err(Error::InvalidConfig(format!("symbol index {i} out of range for M = {m}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(symbols)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }
}

/// Peak-search parameters: `n` sub-carriers evaluated on a grid of
/// `oversampling · n` points per symbol interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SignalParams {
    n: usize,
    oversampling: usize,
}

impl SignalParams {
    pub fn new(n: usize, oversampling: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if oversampling < MIN_OVERSAMPLING {
            return Err(Error::InvalidConfig(format!(
                "oversampling must be at least {MIN_OVERSAMPLING}, got {oversampling}"
            )));
        }
        Ok(Self { n, oversampling })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    pub fn grid_len(&self) -> usize {
        self.n * self.oversampling
    }
}

/// Draw `n` i.i.d. symbols uniformly from the constellation.
pub fn sample_codeword<R: Rng>(
    constellation: &Constellation,
    n: usize,
    rng: &mut R,
) -> Result<Codeword> {
    if n == 0 {
        return Err(Error::Domain("codeword length must be at least 1".into()));
    }
    let m = constellation.size();
    let symbols = (0..n)
        .map(|_| constellation.points()[rng.random_range(0..m)])
        .collect();
    Codeword::new(symbols)
}

/// `s(t)` by Horner evaluation of `(1/√n) Σ X_i wⁱ` with `w = e^{j2πt}`.
/// `w` is periodic in `t` with period 1, so any real `t` is accepted.
fn signal_value(symbols: &[Complex64], t: f64) -> Complex64 {
    let w = Complex64::from_polar(1.0, TAU * t);
    let mut acc = Complex64::new(0.0, 0.0);
    for &x in symbols.iter().rev() {
        acc = acc * w + x;
    }
    acc / (symbols.len() as f64).sqrt()
}

fn envelope_sq(symbols: &[Complex64], t: f64) -> f64 {
    signal_value(symbols, t).norm_sqr()
}

/// The baseband signal value `s(t; X_0..X_{n−1})` at `t ∈ [0, 1]`.
pub fn evaluate_signal(codeword: &Codeword, t: f64) -> Result<Complex64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t must lie in [0, 1], got {t}")));
    }
    Ok(signal_value(codeword.symbols(), t))
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `|s(t_k)|²` on the uniform grid `t_k = k/(L·n)` via one inverse DFT
/// of the zero-padded, `1/√n`-scaled symbol vector.
fn grid_envelope_sq(symbols: &[Complex64], grid_len: usize) -> Vec<f64> {
    let scale = 1.0 / (symbols.len() as f64).sqrt();
    let mut buf = vec![Complex64::new(0.0, 0.0); grid_len];
    for (slot, &x) in buf.iter_mut().zip(symbols) {
        *slot = x * scale;
    }
    PLANNER.with(|planner| {
        let fft = planner.borrow_mut().plan_fft_inverse(grid_len);
        fft.process(&mut buf);
    });
    buf.iter().map(|z| z.norm_sqr()).collect()
}

/// Golden-section maximization of `f` on `[a, b]`, returning the best
/// value seen (including the bracket seed `f_mid`).
fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, f_mid: f64) -> f64 {
    let mut lo = a;
    let mut hi = b;
    let mut best = f_mid;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..REFINE_MAX_ITERS {
        best = best.max(fc).max(fd);
        if hi - lo <= REFINE_TOLERANCE {
            break;
        }
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}

/// Crest factor `CF_n(s) = max_{0≤t≤1} |s(t)|`.
///
/// Grid search on `L·n` points followed by golden-section polishing of
/// every grid-local maximum within [`REFINE_WINDOW`] of the grid peak.
/// The result is never below the grid maximum, hence never below the
/// `t = 0` value `(1/√n)|Σ X_i|`.
pub fn crest_factor(codeword: &Codeword, params: &SignalParams) -> Result<f64> {
    if params.n() != codeword.len() {
        return Err(Error::InvalidConfig(format!(
            "params.n = {} does not match codeword length {}",
            params.n(),
            codeword.len()
        )));
    }
    let symbols = codeword.symbols();
    let grid = grid_envelope_sq(symbols, params.grid_len());
    let len = grid.len();
    let grid_max = grid.iter().copied().fold(0.0, f64::max);
    let threshold = REFINE_WINDOW * REFINE_WINDOW * grid_max;
    let spacing = 1.0 / len as f64;

    let mut best = grid_max;
    for k in 0..len {
        let prev = grid[(k + len - 1) % len];
        let next = grid[(k + 1) % len];
        if grid[k] >= prev && grid[k] >= next && grid[k] >= threshold {
            let center = k as f64 * spacing;
            let refined = golden_section_max(
                |t| envelope_sq(symbols, t),
                center - spacing,
                center + spacing,
                grid[k],
            );
            best = best.max(refined);
        }
    }
    Ok(best.sqrt())
}

/// Time-average power `(1/n) Σ |X_i|²`, which equals the average power
/// of `s` over the symbol interval by orthonormality of the carriers.
pub fn average_power(codeword: &Codeword) -> f64 {
    let n = codeword.len() as f64;
    codeword.symbols().iter().map(|x| x.norm_sqr()).sum::<f64>() / n
}

/// `(1/√n) Σ |xᵢ − yᵢ|`, an upper bound on `|CF(x) − CF(y)|`. For
/// unit-modulus symbols it is at most `2·d_a(x, y)` with uniform `a`.
pub fn signal_distance_bound(x: &Codeword, y: &Codeword) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let sum: f64 = x
        .symbols()
        .iter()
        .zip(y.symbols())
        .map(|(a, b)| (a - b).norm())
        .sum();
    Ok(sum / (x.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;
    use approx::assert_abs_diff_eq;

    const SQRT_2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn mpsk_points_on_unit_circle() {
        for m in [2usize, 3, 4, 8, 16] {
            let c = Constellation::mpsk(m).unwrap();
            assert_eq!(c.size(), m);
            for p in c.points() {
                assert_abs_diff_eq!(p.norm(), 1.0, epsilon = 1e-12);
            }
            // pairwise distinct
            for i in 0..m {
                for j in (i + 1)..m {
                    assert_ne!(c.points()[i], c.points()[j]);
                }
            }
        }
        // M = 2 sits on the imaginary axis: e^{jπ/2}, e^{j3π/2}.
        let c = Constellation::mpsk(2).unwrap();
        assert_abs_diff_eq!(c.points()[0].im, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c.points()[1].im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn mpsk_rejects_small_m() {
        assert!(Constellation::mpsk(1).is_err());
    }

    #[test]
    fn qam_unit_average_energy() {
        for m in [4usize, 16, 64] {
            let c = Constellation::square_qam(m).unwrap();
            assert_eq!(c.size(), m);
            let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert_abs_diff_eq!(e, 1.0, epsilon = 1e-12);
        }
        assert!(Constellation::square_qam(8).is_err());
        assert!(Constellation::square_qam(2).is_err());
    }

    #[test]
    fn sampled_codeword_is_deterministic_and_member() {
        let c = Constellation::mpsk(2).unwrap();
        let mut rng = stream_rng(11, &[0]);
        let a = sample_codeword(&c, 4, &mut rng).unwrap();
        let mut rng = stream_rng(11, &[0]);
        let b = sample_codeword(&c, 4, &mut rng).unwrap();
        assert_eq!(a, b);
        for s in a.symbols() {
            assert!(c.index_of(*s).is_some());
        }
        assert!(sample_codeword(&c, 0, &mut rng).is_err());
    }

    #[test]
    fn sampled_symbols_are_uniform() {
        // 10⁵ draws: each of M = 4 frequencies within 3σ of 1/4.
        let c = Constellation::mpsk(4).unwrap();
        let n = 100_000;
        let mut rng = stream_rng(2024, &[1]);
        let cw = sample_codeword(&c, n, &mut rng).unwrap();
        let sigma = (0.25 * 0.75 / n as f64).sqrt();
        for p in c.points() {
            let count = cw.symbols().iter().filter(|s| *s == p).count();
            let freq = count as f64 / n as f64;
            assert!(
                (freq - 0.25).abs() <= 3.0 * sigma,
                "frequency {freq} too far from 1/4"
            );
        }
    }

    #[test]
    fn signal_single_carrier_is_constant() {
        let cw = Codeword::new(vec![Complex64::from_polar(1.0, 0.3)]).unwrap();
        for t in [0.0, 0.25, 0.9, 1.0] {
            assert_abs_diff_eq!(evaluate_signal(&cw, t).unwrap().norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn signal_aligned_symbols_peak_at_zero() {
        let c = Complex64::from_polar(1.0, 1.1);
        let cw = Codeword::new(vec![c; 9]).unwrap();
        let s0 = evaluate_signal(&cw, 0.0).unwrap();
        assert_abs_diff_eq!((s0 - c * 3.0).norm(), 0.0, epsilon = 1e-13);
    }

    #[test]
    fn signal_two_tone_value() {
        let cw = Codeword::new(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]).unwrap();
        let s = evaluate_signal(&cw, 0.5).unwrap();
        assert_abs_diff_eq!(s.norm(), SQRT_2, epsilon = 1e-14);
        assert!(evaluate_signal(&cw, 1.5).is_err());
        assert!(evaluate_signal(&cw, -0.1).is_err());
    }

    #[test]
    fn crest_factor_aligned_is_sqrt_n() {
        for n in [1usize, 4, 9, 25] {
            let cw = Codeword::new(vec![Complex64::new(0.0, 1.0); n]).unwrap();
            let params = SignalParams::new(n, 16).unwrap();
            let cf = crest_factor(&cw, &params).unwrap();
            assert_abs_diff_eq!(cf, (n as f64).sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn crest_factor_two_tone() {
        // |s(t)|² = 1 − cos(2πt), maximized at t = 1/2.
        let cw = Codeword::new(vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]).unwrap();
        let params = SignalParams::new(2, 16).unwrap();
        assert_abs_diff_eq!(crest_factor(&cw, &params).unwrap(), SQRT_2, epsilon = 1e-10);
    }

    #[test]
    fn crest_factor_dominates_grid_and_dc() {
        let c = Constellation::mpsk(8).unwrap();
        let params = SignalParams::new(24, 16).unwrap();
        for trial in 0..20u64 {
            let mut rng = stream_rng(5, &[trial]);
            let cw = sample_codeword(&c, 24, &mut rng).unwrap();
            let cf = crest_factor(&cw, &params).unwrap();
            let dc = evaluate_signal(&cw, 0.0).unwrap().norm();
            assert!(cf >= dc - 1e-12);
            assert!(cf >= 1.0 - 1e-9, "MPSK crest factor below 1: {cf}");
            assert!(cf <= (24f64).sqrt() + 1e-9);
        }
    }

    #[test]
    fn crest_factor_checks_params() {
        let cw = Codeword::new(vec![Complex64::new(0.0, 1.0); 4]).unwrap();
        let params = SignalParams::new(8, 16).unwrap();
        assert!(crest_factor(&cw, &params).is_err());
        assert!(SignalParams::new(4, 3).is_err());
        assert!(SignalParams::new(0, 16).is_err());
    }

    #[test]
    fn average_power_mpsk_is_one() {
        let c = Constellation::mpsk(8).unwrap();
        let mut rng = stream_rng(3, &[0]);
        for n in [4usize, 64, 256] {
            let cw = sample_codeword(&c, n, &mut rng).unwrap();
            assert_abs_diff_eq!(average_power(&cw), 1.0, epsilon = 1e-12);
        }
        let single = Codeword::new(vec![Complex64::from_polar(1.0, PI / 4.0)]).unwrap();
        assert_abs_diff_eq!(average_power(&single), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn qam_mean_power_near_one() {
        // Unit-energy constellation: mean codeword power over many draws
        // concentrates at 1.
        let c = Constellation::square_qam(16).unwrap();
        let trials = 10_000;
        let n = 16;
        let mut total = 0.0;
        for trial in 0..trials {
            let mut rng = stream_rng(17, &[trial]);
            let cw = sample_codeword(&c, n, &mut rng).unwrap();
            total += average_power(&cw);
        }
        let mean = total / trials as f64;
        // Var of one symbol's |X|² for 16-QAM is 0.32; 3σ band.
        let se = (0.32 / (trials * n as u64) as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "mean power {mean}");
    }

    #[test]
    fn distance_bound_basics() {
        let x = Codeword::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        let y = Codeword::new(vec![Complex64::new(-1.0, 0.0)]).unwrap();
        assert_abs_diff_eq!(signal_distance_bound(&x, &y).unwrap(), 2.0, epsilon = 1e-15);
        assert_eq!(signal_distance_bound(&x, &x).unwrap(), 0.0);

        // k disagreements in MPSK cost at most 2k/√n.
        let c = Constellation::mpsk(4).unwrap();
        let a = Codeword::from_indices(&c, &[0, 1, 2, 3]).unwrap();
        let b = Codeword::from_indices(&c, &[0, 3, 2, 1]).unwrap();
        assert!(signal_distance_bound(&a, &b).unwrap() <= 2.0 * 2.0 / 2.0 + 1e-12);

        let short = Codeword::new(vec![Complex64::new(1.0, 0.0)]).unwrap();
        assert!(signal_distance_bound(&a, &short).is_err());
    }

    #[test]
    fn codeword_construction_errors() {
        assert!(Codeword::new(vec![]).is_err());
        let c = Constellation::mpsk(2).unwrap();
        assert!(Codeword::from_indices(&c, &[0, 2]).is_err());
        assert!(Codeword::from_indices(&c, &[]).is_err());
    }
}
