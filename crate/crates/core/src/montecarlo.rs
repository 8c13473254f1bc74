//! Large-sample crest-factor simulation and tail comparison.
//!
//! [`run_cf_simulation`] draws i.i.d. codewords and computes one crest
//! factor per trial. Empirical deviation tails around the sample mean
//! are then compared with the Azuma, refined-Azuma and McDiarmid
//! bounds, and tails around the sample median with the Talagrand
//! bound, all in capped form (a probability can never usefully exceed
//! 1). A violation is flagged only beyond three binomial standard
//! errors, which also absorbs the sample-median substitution for the
//! true median.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{ofdm_bounds, OfdmBounds};
use crate::error::{Error, Result};
use crate::martingale::run_in_pool;
use crate::ofdm::{crest_factor, sample_codeword, Constellation, SignalParams};
use crate::seed::stream_rng;
use crate::stats;

/// Cap on `trials · n · oversampling`, the grid-evaluation work of one
/// simulation.
pub const DEFAULT_COST_BUDGET: u128 = 20_000_000_000;

/// Quantile probabilities reported in a [`CfSample`].
pub const QUANTILE_PROBS: [f64; 9] = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];

const STREAM_TRIAL: u64 = 0x10;

/// Configuration of one crest-factor simulation.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub n: usize,
    pub constellation: Constellation,
    pub trials: usize,
    pub seed: u64,
    pub oversampling: usize,
    /// Deviation grid for the tail comparison; strictly increasing,
    /// all positive.
    pub alphas: Vec<f64>,
    pub workers: usize,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if self.trials < 100 {
            return Err(Error::InvalidConfig(format!(
                "trials must be at least 100, got {}",
                self.trials
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        self.signal_params()?;
        if self.alphas.is_empty() {
            return Err(Error::InvalidConfig("alpha grid must be non-empty".into()));
        }
        for pair in self.alphas.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidConfig(
                    "alpha grid must be strictly increasing".into(),
                ));
            }
        }
        if !(self.alphas[0] > 0.0) {
            return Err(Error::InvalidConfig("alphas must be positive".into()));
        }
        let cost = self.cost();
        if cost > DEFAULT_COST_BUDGET {
            return Err(Error::CostBudget {
                cost,
                budget: DEFAULT_COST_BUDGET,
            });
        }
        Ok(())
    }

    pub fn signal_params(&self) -> Result<SignalParams> {
        SignalParams::new(self.n, self.oversampling)
    }

    /// Grid-evaluation work estimate used against the budget.
    pub fn cost(&self) -> u128 {
        self.trials as u128 * self.n as u128 * self.oversampling as u128
    }
}

/// The default deviation grid 0.25, 0.5, ..., 4.0.
pub fn default_alpha_grid() -> Vec<f64> {
    (1..=16).map(|k| k as f64 * 0.25).collect()
}

/// One reported quantile of a crest-factor sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantilePoint {
    pub probability: f64,
    pub value: f64,
}

/// Crest-factor draws plus their summary statistics.
///
/// `median` is the lower order-statistic median, the center used by
/// the Talagrand comparison.
#[derive(Debug, Clone)]
pub struct CfSample {
    pub values: Vec<f64>,
    pub mean: f64,
    pub median: f64,
    pub variance: f64,
    pub quantiles: Vec<QuantilePoint>,
}

impl CfSample {
    pub fn trials(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Draw `trials` codewords and compute one crest factor each.
///
/// Trial `t` uses the stream `(seed, [STREAM_TRIAL, n, t])`, so the
/// sample depends only on `(seed, n, constellation, trials)` and never
/// on the worker count.
pub fn run_cf_simulation(config: &SimulationConfig) -> Result<CfSample> {
    config.validate()?;
    let params = config.signal_params()?;
    let values = run_in_pool(config.workers, || {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream_rng(config.seed, &[STREAM_TRIAL, config.n as u64, t]);
                let cw = sample_codeword(&config.constellation, config.n, &mut rng)?;
                crest_factor(&cw, &params)
            })
            .collect::<Result<Vec<f64>>>()
    })??;

    let mean = stats::mean(&values);
    let variance = stats::sample_variance(&values, mean);
    let mut sorted = values.clone();
    sorted.sort_by(f64::total_cmp);
    let median = stats::lower_median(&sorted);
    let quantiles = QUANTILE_PROBS
        .iter()
        .map(|&p| QuantilePoint {
            probability: p,
            value: stats::quantile(&sorted, p),
        })
        .collect();
    Ok(CfSample {
        values,
        mean,
        median,
        variance,
        quantiles,
    })
}

/// Empirical tail probability with its binomial standard error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailEstimate {
    pub probability: f64,
    pub standard_error: f64,
}

/// `P(|CF − center| ≥ α)` estimated from the sample.
pub fn empirical_tail(sample: &CfSample, center: f64, alpha: f64) -> Result<TailEstimate> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let trials = sample.trials() as f64;
    let hits = sample
        .values
        .iter()
        .filter(|v| (*v - center).abs() >= alpha)
        .count();
    let p = hits as f64 / trials;
    Ok(TailEstimate {
        probability: p,
        standard_error: (p * (1.0 - p) / trials).sqrt(),
    })
}

/// Which of the four bounds an empirical tail exceeded.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ViolationFlags {
    pub azuma: bool,
    pub refined: bool,
    pub mcdiarmid: bool,
    pub talagrand: bool,
}

impl ViolationFlags {
    pub fn any(&self) -> bool {
        self.azuma || self.refined || self.mcdiarmid || self.talagrand
    }

    pub fn count(&self) -> usize {
        usize::from(self.azuma)
            + usize::from(self.refined)
            + usize::from(self.mcdiarmid)
            + usize::from(self.talagrand)
    }
}

/// Tail-versus-bound comparison at one deviation `α`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailRecord {
    pub alpha: f64,
    /// `P(|CF − mean| ≥ α)` and its standard error.
    pub tail_mean: f64,
    pub se_mean: f64,
    /// `P(|CF − median| ≥ α)` and its standard error.
    pub tail_median: f64,
    pub se_median: f64,
    pub bounds: OfdmBounds,
    pub violations: ViolationFlags,
}

/// Full tail report over a deviation grid.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    pub records: Vec<TailRecord>,
    /// The refined bound is compared in leading-order form; its
    /// `1 + O(n^{−1/2})` factor is not available at finite `n`.
    pub refined_bound_asymptotic: bool,
}

impl TailReport {
    pub fn total_violations(&self) -> usize {
        self.records.iter().map(|r| r.violations.count()).sum()
    }

    pub fn has_violations(&self) -> bool {
        self.records.iter().any(|r| r.violations.any())
    }
}

/// Compare mean-centered tails against the capped Azuma, refined and
/// McDiarmid bounds and median-centered tails against the capped
/// Talagrand bound, flagging exceedances beyond three standard errors.
pub fn compare_bounds(sample: &CfSample, alphas: &[f64]) -> Result<TailReport> {
    let records = alphas
        .iter()
        .map(|&alpha| {
            let around_mean = empirical_tail(sample, sample.mean, alpha)?;
            let around_median = empirical_tail(sample, sample.median, alpha)?;
            let bounds = ofdm_bounds(alpha)?;
            let exceeds = |tail: TailEstimate, capped: f64| {
                tail.probability > capped + 3.0 * tail.standard_error
            };
            let violations = ViolationFlags {
                azuma: exceeds(around_mean, bounds.azuma.capped),
                refined: exceeds(around_mean, bounds.refined.capped),
                mcdiarmid: exceeds(around_mean, bounds.mcdiarmid.capped),
                talagrand: exceeds(around_median, bounds.talagrand.capped),
            };
            Ok(TailRecord {
                alpha,
                tail_mean: around_mean.probability,
                se_mean: around_mean.standard_error,
                tail_median: around_median.probability,
                se_median: around_median.standard_error,
                bounds,
                violations,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TailReport {
        records,
        refined_bound_asymptotic: true,
    })
}

/// Sample median–mean gap against its Talagrand-implied bound `8√π`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MedianMeanGap {
    pub gap: f64,
    pub bound: f64,
    pub satisfied: bool,
}

pub fn median_mean_gap(sample: &CfSample) -> MedianMeanGap {
    let gap = (sample.mean - sample.median).abs();
    let bound = 8.0 * std::f64::consts::PI.sqrt();
    MedianMeanGap {
        gap,
        bound,
        satisfied: gap <= bound,
    }
}

/// One row of a scaling study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub mean_cf: f64,
    pub median_cf: f64,
    /// `mean / √(ln n)`; `None` when `ln n = 0`.
    pub ratio_ln: Option<f64>,
    /// `mean / √(log₂ n)`; `None` when `log₂ n = 0`.
    pub ratio_log2: Option<f64>,
    /// Whether `|mean − √(ln n)| < 2.5·ln(ln n)/√(ln n)`; informational
    /// only, the underlying result needs distributional assumptions
    /// that are not checked here.
    pub in_litsyn_wunder_band: bool,
}

/// Scaling study over several sub-carrier counts.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// Whether `mean_cf` is nondecreasing in `n` (reported, not
    /// asserted).
    pub mean_nondecreasing: bool,
}

/// Run one simulation per `n` and report mean/median crest factors
/// with their `√(log n)` ratios.
pub fn scaling_study(n_list: &[usize], base: &SimulationConfig) -> Result<ScalingTable> {
    if n_list.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "scaling study needs at least 3 sizes, got {}",
            n_list.len()
        )));
    }
    for pair in n_list.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidConfig(
                "n_list must be strictly ascending".into(),
            ));
        }
    }
    let rows = n_list
        .iter()
        .map(|&n| {
            let config = SimulationConfig {
                n,
                ..base.clone()
            };
            let sample = run_cf_simulation(&config)?;
            let ln_n = (n as f64).ln();
            let log2_n = (n as f64).log2();
            let band = 2.5 * ln_n.ln() / ln_n.sqrt();
            Ok(ScalingRow {
                n,
                mean_cf: sample.mean,
                median_cf: sample.median,
                ratio_ln: (ln_n > 0.0).then(|| sample.mean / ln_n.sqrt()),
                ratio_log2: (log2_n > 0.0).then(|| sample.mean / log2_n.sqrt()),
                in_litsyn_wunder_band: (sample.mean - ln_n.sqrt()).abs() < band,
            })
        })
        .collect::<Result<Vec<ScalingRow>>>()?;
    let mean_nondecreasing = rows.windows(2).all(|w| w[1].mean_cf >= w[0].mean_cf);
    Ok(ScalingTable {
        rows,
        mean_nondecreasing,
    })
}
