//! Implementations of the four subcommands.

use cf_lab_core::bounds::{
    ofdm_bounds, refined_azuma_asymptotic, refined_azuma_bound, MartingaleParams,
};
use cf_lab_core::martingale::{
    mc_doob_trace, psk_variance_identity, verify_bounded_differences, ExactEnumeration, TraceMode,
};
use cf_lab_core::montecarlo::{
    compare_bounds, default_alpha_grid, median_mean_gap, run_cf_simulation, scaling_study,
};
use cf_lab_core::ofdm::{crest_factor, sample_codeword, Constellation, SignalParams};
use cf_lab_core::seed::stream_rng;
use cf_lab_core::{DoobTrace, MedianMeanGap, SimulationConfig};
use serde::Serialize;
use serde_json::json;

use crate::report::{
    bounds_csv, psk_identity_csv, scaling_csv, tails_csv, trace_csv, trace_mode_name, BoundsRow,
    Manifest, OutputDir,
};
use crate::{BoundsArgs, CliError, Format, MartingaleArgs, Mode, ScalingArgs, SimulateArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 3;

/// Tolerance used when checking the PSK variance identity against 2.
const PSK_IDENTITY_TOLERANCE: f64 = 1e-12;

const STREAM_TRACE_CODEWORD: u64 = 0x7ace;

fn map_core(err: cf_lab_core::Error) -> CliError {
    use cf_lab_core::Error;
    match err {
        Error::EnumerationCap { .. } | Error::CostBudget { .. } => {
            CliError::Feasibility(err.to_string())
        }
        other => CliError::Usage(other.to_string()),
    }
}

fn resolve_workers(flag: Option<usize>) -> usize {
    flag.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
    })
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<i32, CliError> {
    let alphas = args.alphas.clone().unwrap_or_else(default_alpha_grid);
    let params = match (args.d, args.sigma2, args.n) {
        (None, None, None) => None,
        (Some(d), Some(sigma2), Some(n)) => {
            Some(MartingaleParams::new(d, sigma2, n).map_err(map_core)?)
        }
        _ => {
            return Err(CliError::Usage(
                "--d, --sigma2 and --n must be given together".into(),
            ))
        }
    };

    let rows = alphas
        .iter()
        .map(|&alpha| {
            let ofdm = ofdm_bounds(alpha).map_err(map_core)?;
            let (refined_general, refined_asymptotic) = match &params {
                Some(p) => (
                    Some(refined_azuma_bound(alpha, p).map_err(map_core)?),
                    Some(refined_azuma_asymptotic(alpha, p).map_err(map_core)?),
                ),
                None => (None, None),
            };
            Ok(BoundsRow {
                alpha,
                ofdm,
                refined_general,
                refined_asymptotic,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;

    let csv = bounds_csv(&rows, params.is_some());
    print!("{csv}");

    if let Some(dir) = &args.out {
        let manifest = Manifest::new(
            "bounds",
            json!({
                "alphas": alphas,
                "d": args.d,
                "sigma2": args.sigma2,
                "n": args.n,
                "format": args.format.name(),
            }),
            0,
        );
        let mut out = OutputDir::create(dir, manifest)?;
        if args.format.wants_csv() {
            out.write("bounds.csv", &csv)?;
        }
        if args.format.wants_json() {
            #[derive(Serialize)]
            struct JsonRow {
                alpha: f64,
                ofdm: cf_lab_core::OfdmBounds,
                refined_general: Option<cf_lab_core::BoundValue>,
                refined_asymptotic: Option<cf_lab_core::BoundValue>,
            }
            let body: Vec<JsonRow> = rows
                .iter()
                .map(|r| JsonRow {
                    alpha: r.alpha,
                    ofdm: r.ofdm,
                    refined_general: r.refined_general,
                    refined_asymptotic: r.refined_asymptotic,
                })
                .collect();
            out.write_json("bounds.json", &body)?;
        }
        out.finish()?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    command: &'static str,
    n: usize,
    modulation: usize,
    trials: usize,
    seed: u64,
    oversampling: usize,
    mean: f64,
    median: f64,
    variance: f64,
    min: f64,
    max: f64,
    quantiles: &'a [cf_lab_core::montecarlo::QuantilePoint],
    median_mean_gap: MedianMeanGap,
    refined_bound_asymptotic: bool,
    total_violations: usize,
    records: &'a [cf_lab_core::TailRecord],
}

fn build_simulation_config(
    n: usize,
    modulation: usize,
    trials: usize,
    seed: u64,
    oversample: usize,
    alphas: Option<&[f64]>,
    workers: Option<usize>,
) -> Result<SimulationConfig, CliError> {
    let constellation = Constellation::mpsk(modulation).map_err(map_core)?;
    let config = SimulationConfig {
        n,
        constellation,
        trials,
        seed,
        oversampling: oversample,
        alphas: alphas.map(<[f64]>::to_vec).unwrap_or_else(default_alpha_grid),
        workers: resolve_workers(workers),
    };
    config.validate().map_err(map_core)?;
    Ok(config)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let config = build_simulation_config(
        args.n,
        args.modulation,
        args.trials,
        args.seed,
        args.oversample,
        args.alphas.as_deref(),
        args.workers,
    )?;
    let sample = run_cf_simulation(&config).map_err(map_core)?;
    let report = compare_bounds(&sample, &config.alphas).map_err(map_core)?;
    let gap = median_mean_gap(&sample);

    let manifest = Manifest::new(
        "simulate",
        json!({
            "n": args.n,
            "mod": args.modulation,
            "trials": args.trials,
            "seed": args.seed,
            "alphas": config.alphas,
            "oversample": args.oversample,
            "workers": config.workers,
            "format": args.format.name(),
        }),
        args.seed,
    );
    let mut out = OutputDir::create(&args.out, manifest)?;
    if args.format.wants_csv() {
        out.write("tails.csv", &tails_csv(&report))?;
    }
    if args.format.wants_json() {
        let summary = SimulateSummary {
            command: "simulate",
            n: args.n,
            modulation: args.modulation,
            trials: args.trials,
            seed: args.seed,
            oversampling: args.oversample,
            mean: sample.mean,
            median: sample.median,
            variance: sample.variance,
            min: sample.min(),
            max: sample.max(),
            quantiles: &sample.quantiles,
            median_mean_gap: gap,
            refined_bound_asymptotic: report.refined_bound_asymptotic,
            total_violations: report.total_violations(),
            records: &report.records,
        };
        out.write_json("summary.json", &summary)?;
    }
    out.finish()?;

    println!(
        "simulate: n={} M={} trials={} mean={:.6} median={:.6} gap={:.6} violations={}",
        args.n,
        args.modulation,
        args.trials,
        sample.mean,
        sample.median,
        gap.gap,
        report.total_violations()
    );
    Ok(if report.has_violations() {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

#[derive(Serialize)]
struct MartingaleSummary {
    command: &'static str,
    n: usize,
    modulation: usize,
    mode: &'static str,
    seed: u64,
    inner_samples: Option<usize>,
    expected_cf: f64,
    trace_codeword_cf: f64,
    increment_bound: f64,
    max_increment: f64,
    bounded_differences_satisfied: bool,
    slack: f64,
    second_moment_bound: f64,
    max_cond_second_moment: f64,
    /// Exact mode only: the two enumeration-wide checks.
    exhaustive: Option<ExhaustiveChecks>,
    all_satisfied: bool,
}

#[derive(Serialize)]
struct ExhaustiveChecks {
    tower_tolerance: f64,
    max_tower_residual: f64,
    tower_satisfied: bool,
    max_increment_all_codewords: f64,
    increments_satisfied: bool,
    max_cond_second_moment_all_prefixes: f64,
    second_moments_satisfied: bool,
}

const TOWER_TOLERANCE: f64 = 1e-10;

fn psk_identity_report(ms: &[usize], out_dir: Option<&std::path::Path>) -> Result<i32, CliError> {
    let rows = ms
        .iter()
        .map(|&m| Ok((m, psk_variance_identity(m).map_err(map_core)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut all_ok = true;
    println!("m,value");
    for (m, v) in &rows {
        println!("{m},{v}");
        if (v - 2.0).abs() > PSK_IDENTITY_TOLERANCE {
            all_ok = false;
        }
    }
    if let Some(dir) = out_dir {
        let manifest = Manifest::new("martingale", json!({ "psk_identity": ms }), 0);
        let mut out = OutputDir::create(dir, manifest)?;
        out.write("psk_identity.csv", &psk_identity_csv(&rows))?;
        out.finish()?;
    }
    Ok(if all_ok { EXIT_OK } else { EXIT_VIOLATION })
}

pub fn cmd_martingale(args: &MartingaleArgs) -> Result<i32, CliError> {
    if let Some(ms) = &args.psk_identity {
        return psk_identity_report(ms, args.out.as_deref());
    }
    let n = args
        .n
        .ok_or_else(|| CliError::Usage("--n is required unless --psk-identity is given".into()))?;
    let constellation = Constellation::mpsk(args.modulation).map_err(map_core)?;
    let params = SignalParams::new(n, args.oversample).map_err(map_core)?;
    let workers = resolve_workers(args.workers);

    // The traced codeword is sampled from the master seed.
    let mut rng = stream_rng(args.seed, &[STREAM_TRACE_CODEWORD]);
    let codeword = sample_codeword(&constellation, n, &mut rng).map_err(map_core)?;
    let codeword_cf = crest_factor(&codeword, &params).map_err(map_core)?;

    let (trace, exhaustive): (DoobTrace, Option<ExhaustiveChecks>) = match args.mode {
        Mode::Exact => {
            let tables = ExactEnumeration::build(&constellation, &params, workers).map_err(map_core)?;
            let digits: Vec<usize> = codeword
                .symbols()
                .iter()
                .map(|s| constellation.index_of(*s).expect("sampled symbol"))
                .collect();
            let trace = tables.trace_for_indices(&digits).map_err(map_core)?;
            let checks = ExhaustiveChecks {
                tower_tolerance: TOWER_TOLERANCE,
                max_tower_residual: tables.max_tower_residual(),
                tower_satisfied: tables.max_tower_residual() <= TOWER_TOLERANCE,
                max_increment_all_codewords: tables.max_increment(),
                increments_satisfied: tables.max_increment() <= 2.0 / (n as f64).sqrt(),
                max_cond_second_moment_all_prefixes: tables.max_cond_second_moment(),
                second_moments_satisfied: tables.max_cond_second_moment() <= 2.0 / n as f64,
            };
            (trace, Some(checks))
        }
        Mode::Mc => {
            let trace = mc_doob_trace(
                &constellation,
                &codeword,
                &params,
                args.inner_samples,
                args.seed,
                workers,
            )
            .map_err(map_core)?;
            (trace, None)
        }
    };

    let bd = verify_bounded_differences(&trace);
    let max_sm = trace.cond_second_moments.iter().copied().fold(0.0, f64::max);
    let all_satisfied = bd.satisfied
        && exhaustive.as_ref().map_or(true, |e| {
            e.tower_satisfied && e.increments_satisfied && e.second_moments_satisfied
        });

    let summary = MartingaleSummary {
        command: "martingale",
        n,
        modulation: args.modulation,
        mode: trace_mode_name(trace.mode),
        seed: args.seed,
        inner_samples: match trace.mode {
            TraceMode::MonteCarlo { inner_samples } => Some(inner_samples),
            TraceMode::Exact => None,
        },
        expected_cf: trace.values[0],
        trace_codeword_cf: codeword_cf,
        increment_bound: bd.bound,
        max_increment: bd.max_increment,
        bounded_differences_satisfied: bd.satisfied,
        slack: bd.slack,
        second_moment_bound: 2.0 / n as f64,
        max_cond_second_moment: max_sm,
        exhaustive,
        all_satisfied,
    };

    if let Some(dir) = &args.out {
        let manifest = Manifest::new(
            "martingale",
            json!({
                "n": n,
                "mod": args.modulation,
                "mode": trace_mode_name(trace.mode),
                "inner_samples": args.inner_samples,
                "seed": args.seed,
                "oversample": args.oversample,
                "workers": workers,
                "format": args.format.name(),
            }),
            args.seed,
        );
        let mut out = OutputDir::create(dir, manifest)?;
        if args.format.wants_csv() {
            out.write("trace.csv", &trace_csv(&trace))?;
        }
        if args.format.wants_json() {
            out.write_json("summary.json", &summary)?;
        }
        out.finish()?;
    }

    println!(
        "martingale: n={n} M={} mode={} max|ΔY|={:.6} bound={:.6} satisfied={}",
        args.modulation,
        trace_mode_name(trace.mode),
        bd.max_increment,
        bd.bound,
        all_satisfied
    );
    Ok(if all_satisfied { EXIT_OK } else { EXIT_VIOLATION })
}

#[derive(Serialize)]
struct ScalingSummary<'a> {
    command: &'static str,
    modulation: usize,
    trials: usize,
    seed: u64,
    table: &'a cf_lab_core::ScalingTable,
}

pub fn cmd_scaling(args: &ScalingArgs) -> Result<i32, CliError> {
    let base = build_simulation_config(
        args.n_list.first().copied().unwrap_or(1),
        args.modulation,
        args.trials,
        args.seed,
        args.oversample,
        None,
        args.workers,
    )?;
    let table = scaling_study(&args.n_list, &base).map_err(map_core)?;

    let manifest = Manifest::new(
        "scaling",
        json!({
            "n_list": args.n_list,
            "mod": args.modulation,
            "trials": args.trials,
            "seed": args.seed,
            "oversample": args.oversample,
            "workers": base.workers,
            "format": args.format.name(),
        }),
        args.seed,
    );
    let mut out = OutputDir::create(&args.out, manifest)?;
    let csv = scaling_csv(&table);
    if args.format.wants_csv() {
        out.write("scaling.csv", &csv)?;
    }
    if args.format.wants_json() {
        let summary = ScalingSummary {
            command: "scaling",
            modulation: args.modulation,
            trials: args.trials,
            seed: args.seed,
            table: &table,
        };
        out.write_json("summary.json", &summary)?;
    }
    out.finish()?;

    print!("{csv}");
    println!("mean_nondecreasing={}", table.mean_nondecreasing);
    Ok(EXIT_OK)
}

impl Format {
    pub fn wants_csv(&self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn wants_json(&self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Both => "both",
        }
    }
}
