//! The Doob martingale of the crest factor.
//!
//! Revealing the codeword one symbol at a time defines
//!
//! ```text
//! Y_i = E[ CF_n(s) | X_0, ..., X_{i−1} ],   i = 0..n
//! ```
//!
//! so `Y_0 = E[CF_n]` and `Y_n = CF_n(s)`. For the uniform product
//! measure on a constellation this martingale has jumps bounded by
//! `2/√n` and conditional second moments bounded by `2/n`; this module
//! computes the sequence exactly (by enumerating all completions of a
//! prefix) on small instances and by Monte Carlo otherwise, and checks
//! those bounds.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ofdm::{crest_factor, sample_codeword, Codeword, Constellation, SignalParams};
use crate::seed::{derive_seed, stream_rng};
use crate::stats;

/// Default cap on the number of codewords an exact enumeration may
/// evaluate. Above the cap, operations refuse instead of silently
/// falling back to sampling.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Environment variable overriding [`DEFAULT_ENUMERATION_CAP`].
pub const ENUMERATION_CAP_ENV: &str = "CF_LAB_MAX_ENUM";

/// The enumeration cap currently in effect.
pub fn enumeration_cap() -> u128 {
    std::env::var(ENUMERATION_CAP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ENUMERATION_CAP)
}

pub(crate) fn run_in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::InvalidConfig("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("failed to build thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn checked_power(m: usize, n: usize) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc
            .checked_mul(m as u128)
            .ok_or(Error::EnumerationCap {
                evaluations: u128::MAX,
                cap: enumeration_cap(),
            })?;
    }
    Ok(acc)
}

fn ensure_within_cap(evaluations: u128) -> Result<usize> {
    let cap = enumeration_cap();
    if evaluations > cap {
        return Err(Error::EnumerationCap { evaluations, cap });
    }
    usize::try_from(evaluations).map_err(|_| Error::EnumerationCap {
        evaluations,
        cap,
    })
}

/// How a [`DoobTrace`] was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TraceMode {
    Exact,
    MonteCarlo { inner_samples: usize },
}

/// One realization of the Doob martingale `Y_0..Y_n`.
#[derive(Debug, Clone, Serialize)]
pub struct DoobTrace {
    /// `Y_0..Y_n`; `Y_n` is the crest factor of the revealed codeword.
    pub values: Vec<f64>,
    /// `Y_i − Y_{i−1}` for `i = 1..n`.
    pub increments: Vec<f64>,
    /// `E[(Y_i − Y_{i−1})² | F_{i−1}]` along the revealed prefix.
    pub cond_second_moments: Vec<f64>,
    /// Standard error of each `values` entry; zeros in exact mode.
    pub standard_errors: Vec<f64>,
    pub mode: TraceMode,
}

impl DoobTrace {
    /// Number of martingale steps (`values.len() − 1`).
    pub fn n(&self) -> usize {
        self.increments.len()
    }
}

/// Bounded-differences check of a trace against `2/√n`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundedDifferencesReport {
    pub max_increment: f64,
    pub bound: f64,
    /// Statistical slack added to the bound: zero in exact mode, four
    /// combined standard errors per step in Monte Carlo mode.
    pub slack: f64,
    pub satisfied: bool,
}

/// `|Y_i − Y_{i−1}| ≤ 2/√n` verification.
pub fn verify_bounded_differences(trace: &DoobTrace) -> BoundedDifferencesReport {
    let n = trace.n();
    let bound = 2.0 / (n as f64).sqrt();
    let mut max_increment: f64 = 0.0;
    let mut max_slack: f64 = 0.0;
    let mut satisfied = true;
    for (i, inc) in trace.increments.iter().enumerate() {
        let slack = match trace.mode {
            TraceMode::Exact => 0.0,
            TraceMode::MonteCarlo { .. } => {
                let a = trace.standard_errors[i];
                let b = trace.standard_errors[i + 1];
                4.0 * (a * a + b * b).sqrt()
            }
        };
        max_increment = max_increment.max(inc.abs());
        max_slack = max_slack.max(slack);
        if inc.abs() > bound + slack {
            satisfied = false;
        }
    }
    BoundedDifferencesReport {
        max_increment,
        bound,
        slack: max_slack,
        satisfied,
    }
}

fn digits_to_symbols(constellation: &Constellation, digits: &[usize]) -> Vec<Complex64> {
    digits.iter().map(|&d| constellation.points()[d]).collect()
}

fn symbols_to_digits(constellation: &Constellation, symbols: &[Complex64]) -> Result<Vec<usize>> {
    symbols
        .iter()
        .map(|s| {
            constellation.index_of(*s).ok_or(Error::NotInConstellation {
                re: s.re,
                im: s.im,
            })
        })
        .collect()
}

/// Exact conditional-expectation tables `Y_i(prefix)` for every prefix
/// of every length, built by enumerating all `Mⁿ` codewords.
///
/// `level(i)` holds `Y_i` for the `Mⁱ` prefixes of length `i`, indexed
/// by the mixed-radix value of the prefix digits (first symbol most
/// significant); each entry is the average crest factor over every
/// completion of that prefix.
pub struct ExactEnumeration {
    m: usize,
    n: usize,
    levels: Vec<Vec<f64>>,
}

impl ExactEnumeration {
    pub fn build(
        constellation: &Constellation,
        params: &SignalParams,
        workers: usize,
    ) -> Result<Self> {
        let m = constellation.size();
        let n = params.n();
        let total = ensure_within_cap(checked_power(m, n)?)?;

        let cf = run_in_pool(workers, || {
            (0..total)
                .into_par_iter()
                .map(|idx| {
                    let mut digits = vec![0usize; n];
                    let mut rem = idx;
                    for d in digits.iter_mut().rev() {
                        *d = rem % m;
                        rem /= m;
                    }
                    let cw = Codeword::new(digits_to_symbols(constellation, &digits))?;
                    crest_factor(&cw, params)
                })
                .collect::<Result<Vec<f64>>>()
        })??;

        // Each level is averaged directly over the full-codeword table,
        // i.e. over all M^{n−i} completions of the prefix.
        let mut levels = vec![Vec::new(); n + 1];
        for (i, level) in levels.iter_mut().enumerate().take(n) {
            let prefixes = m.pow(i as u32);
            let block = total / prefixes;
            *level = (0..prefixes)
                .map(|p| stats::mean(&cf[p * block..(p + 1) * block]))
                .collect();
        }
        levels[n] = cf;
        Ok(Self { m, n, levels })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `E[CF_n]` under the uniform product measure.
    pub fn expected_cf(&self) -> f64 {
        self.levels[0][0]
    }

    /// `Y_i` for every length-`i` prefix.
    pub fn level(&self, i: usize) -> &[f64] {
        &self.levels[i]
    }

    /// Largest `|mean over X_i of Y_{i+1} − Y_i|` over all prefixes:
    /// the tower-property residual, which is pure rounding noise.
    pub fn max_tower_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (p, y) in self.levels[i].iter().enumerate() {
                let children = &self.levels[i + 1][p * self.m..(p + 1) * self.m];
                worst = worst.max((stats::mean(children) - y).abs());
            }
        }
        worst
    }

    /// Largest `|Y_i − Y_{i−1}|` over all codewords and steps.
    pub fn max_increment(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..=self.n {
            for (p, y) in self.levels[i].iter().enumerate() {
                worst = worst.max((y - self.levels[i - 1][p / self.m]).abs());
            }
        }
        worst
    }

    /// Largest `E[(Y_i − Y_{i−1})² | F_{i−1}]` over all steps and
    /// prefixes.
    pub fn max_cond_second_moment(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 1..=self.n {
            for (q, y_prev) in self.levels[i - 1].iter().enumerate() {
                worst = worst.max(self.cond_second_moment_at(i, q, *y_prev));
            }
        }
        worst
    }

    fn cond_second_moment_at(&self, i: usize, prefix_index: usize, y_prev: f64) -> f64 {
        let children = &self.levels[i][prefix_index * self.m..(prefix_index + 1) * self.m];
        stats::kahan_sum(children.iter().map(|y| {
            let d = y - y_prev;
            d * d
        })) / self.m as f64
    }

    /// Doob trace along one codeword given by its digit path.
    pub fn trace_for_indices(&self, digits: &[usize]) -> Result<DoobTrace> {
        if digits.len() != self.n {
            return Err(Error::LengthMismatch {
                left: digits.len(),
                right: self.n,
            });
        }
        if let Some(bad) = digits.iter().find(|d| **d >= self.m) {
            return Err(Error::InvalidConfig(format!(
                "symbol index {bad} out of range for M = {}",
                self.m
            )));
        }
        let mut values = Vec::with_capacity(self.n + 1);
        let mut cond_second_moments = Vec::with_capacity(self.n);
        let mut prefix = 0usize;
        values.push(self.levels[0][0]);
        for (i, &d) in digits.iter().enumerate() {
            cond_second_moments.push(self.cond_second_moment_at(i + 1, prefix, self.levels[i][prefix]));
            prefix = prefix * self.m + d;
            values.push(self.levels[i + 1][prefix]);
        }
        let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
        Ok(DoobTrace {
            increments,
            cond_second_moments,
            standard_errors: vec![0.0; self.n + 1],
            values,
            mode: TraceMode::Exact,
        })
    }
}

/// Exact `E[CF_n | prefix]` by enumerating every completion.
pub fn exact_expected_cf(
    constellation: &Constellation,
    prefix: &[Complex64],
    params: &SignalParams,
    workers: usize,
) -> Result<f64> {
    let n = params.n();
    if prefix.len() > n {
        return Err(Error::InvalidConfig(format!(
            "prefix length {} exceeds n = {n}",
            prefix.len()
        )));
    }
    symbols_to_digits(constellation, prefix)?;
    let m = constellation.size();
    let free = n - prefix.len();
    let total = ensure_within_cap(checked_power(m, free)?)?;

    let values = run_in_pool(workers, || {
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut symbols = Vec::with_capacity(n);
                symbols.extend_from_slice(prefix);
                let mut rem = idx;
                let mut tail = vec![0usize; free];
                for d in tail.iter_mut().rev() {
                    *d = rem % m;
                    rem /= m;
                }
                symbols.extend(digits_to_symbols(constellation, &tail));
                let cw = Codeword::new(symbols)?;
                crest_factor(&cw, params)
            })
            .collect::<Result<Vec<f64>>>()
    })??;
    Ok(stats::mean(&values))
}

/// Exact Doob trace for one codeword. Builds the full enumeration
/// table, so it is subject to the enumeration cap.
pub fn exact_doob_trace(
    constellation: &Constellation,
    codeword: &Codeword,
    params: &SignalParams,
    workers: usize,
) -> Result<DoobTrace> {
    if params.n() != codeword.len() {
        return Err(Error::InvalidConfig(format!(
            "params.n = {} does not match codeword length {}",
            params.n(),
            codeword.len()
        )));
    }
    let digits = symbols_to_digits(constellation, codeword.symbols())?;
    let tables = ExactEnumeration::build(constellation, params, workers)?;
    tables.trace_for_indices(&digits)
}

/// Exact `E[(Y_i − Y_{i−1})² | X_0..X_{i−2} = prefix]` for the step
/// `i = prefix.len() + 1`, enumerating `X_{i−1}` and all completions.
pub fn exact_conditional_second_moment(
    constellation: &Constellation,
    prefix: &[Complex64],
    params: &SignalParams,
    workers: usize,
) -> Result<f64> {
    let n = params.n();
    if prefix.len() >= n {
        return Err(Error::InvalidConfig(format!(
            "prefix length {} leaves no step to take for n = {n}",
            prefix.len()
        )));
    }
    let y_prev = exact_expected_cf(constellation, prefix, params, workers)?;
    let m = constellation.size();
    let mut extended = Vec::with_capacity(prefix.len() + 1);
    extended.extend_from_slice(prefix);
    let sq_devs = constellation
        .points()
        .iter()
        .map(|&x| {
            let mut with_x = extended.clone();
            with_x.push(x);
            let y_i = exact_expected_cf(constellation, &with_x, params, workers)?;
            let d = y_i - y_prev;
            Ok(d * d)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(stats::kahan_sum(sq_devs.into_iter()) / m as f64)
}

/// Monte Carlo estimate of `E[CF_n | prefix]`, averaging the crest
/// factor over `inner_samples` uniform completions. Returns the
/// estimate and its standard error. Deterministic in `seed` and
/// independent of `workers`.
pub fn mc_expected_cf(
    constellation: &Constellation,
    prefix: &[Complex64],
    params: &SignalParams,
    inner_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<(f64, f64)> {
    let n = params.n();
    if prefix.len() > n {
        return Err(Error::InvalidConfig(format!(
            "prefix length {} exceeds n = {n}",
            prefix.len()
        )));
    }
    if inner_samples == 0 {
        return Err(Error::Domain("inner_samples must be positive".into()));
    }
    symbols_to_digits(constellation, prefix)?;
    let free = n - prefix.len();

    let values = run_in_pool(workers, || {
        (0..inner_samples as u64)
            .into_par_iter()
            .map(|s| {
                let mut rng = stream_rng(seed, &[s]);
                let mut symbols = Vec::with_capacity(n);
                symbols.extend_from_slice(prefix);
                if free > 0 {
                    let tail = sample_codeword(constellation, free, &mut rng)?;
                    symbols.extend_from_slice(tail.symbols());
                }
                let cw = Codeword::new(symbols)?;
                crest_factor(&cw, params)
            })
            .collect::<Result<Vec<f64>>>()
    })??;
    Ok(stats::mean_and_se(&values))
}

const STREAM_TRACE_VALUE: u64 = 1;
const STREAM_TRACE_MOMENT: u64 = 2;

/// Monte Carlo Doob trace: each `Y_i` is estimated from
/// `inner_samples` completions (`Y_n` is computed exactly), and each
/// conditional second moment enumerates `X_{i−1}` over the
/// constellation with a Monte Carlo estimate per branch.
pub fn mc_doob_trace(
    constellation: &Constellation,
    codeword: &Codeword,
    params: &SignalParams,
    inner_samples: usize,
    seed: u64,
    workers: usize,
) -> Result<DoobTrace> {
    if inner_samples < 1_000 {
        return Err(Error::Domain(format!(
            "inner_samples must be at least 1000, got {inner_samples}"
        )));
    }
    let n = params.n();
    if n != codeword.len() {
        return Err(Error::InvalidConfig(format!(
            "params.n = {n} does not match codeword length {}",
            codeword.len()
        )));
    }
    symbols_to_digits(constellation, codeword.symbols())?;

    let mut values = Vec::with_capacity(n + 1);
    let mut standard_errors = Vec::with_capacity(n + 1);
    for i in 0..n {
        let (y, se) = mc_expected_cf(
            constellation,
            &codeword.symbols()[..i],
            params,
            inner_samples,
            derive_seed(seed, &[STREAM_TRACE_VALUE, i as u64]),
            workers,
        )?;
        values.push(y);
        standard_errors.push(se);
    }
    values.push(crest_factor(codeword, params)?);
    standard_errors.push(0.0);

    let mut cond_second_moments = Vec::with_capacity(n);
    for i in 1..=n {
        let prefix = &codeword.symbols()[..i - 1];
        let y_prev = values[i - 1];
        let branch_sq: Vec<f64> = constellation
            .points()
            .iter()
            .enumerate()
            .map(|(xi, &x)| {
                let mut with_x = prefix.to_vec();
                with_x.push(x);
                let (y_i, _) = mc_expected_cf(
                    constellation,
                    &with_x,
                    params,
                    inner_samples,
                    derive_seed(seed, &[STREAM_TRACE_MOMENT, i as u64, xi as u64]),
                    workers,
                )?;
                let d = y_i - y_prev;
                Ok(d * d)
            })
            .collect::<Result<Vec<f64>>>()?;
        cond_second_moments.push(stats::kahan_sum(branch_sq.into_iter()) / constellation.size() as f64);
    }

    let increments = values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(DoobTrace {
        values,
        increments,
        cond_second_moments,
        standard_errors,
        mode: TraceMode::MonteCarlo { inner_samples },
    })
}

/// `(4/M) Σ_{l=1}^{M−1} sin²(πl/M)`: the constellation factor of the
/// conditional-variance bound, equal to 2 for every `M ≥ 2`.
pub fn psk_variance_identity(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::Domain(format!("M must be at least 2, got {m}")));
    }
    let sum = stats::kahan_sum((1..m).map(|l| {
        let s = (std::f64::consts::PI * l as f64 / m as f64).sin();
        s * s
    }));
    Ok(4.0 * sum / m as f64)
}

/// `(1/M) Σ_p |fixed − p|²` over the constellation points: the
/// conditional second moment of a symbol swap. Equals 2 for every
/// M-PSK point by the rotational symmetry of the constellation.
pub fn pairwise_symbol_second_moment(
    constellation: &Constellation,
    fixed_symbol: Complex64,
) -> Result<f64> {
    if constellation.index_of(fixed_symbol).is_none() {
        return Err(Error::NotInConstellation {
            re: fixed_symbol.re,
            im: fixed_symbol.im,
        });
    }
    let sum = stats::kahan_sum(
        constellation
            .points()
            .iter()
            .map(|p| (fixed_symbol - p).norm_sqr()),
    );
    Ok(sum / constellation.size() as f64)
}
