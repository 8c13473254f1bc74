//! Output formatting: fixed-layout CSV, JSON summaries and run
//! manifests.
//!
//! CSV files are the reproducibility surface: fixed column order,
//! floating point at 17 significant digits, `\n` line endings and no
//! locale formatting, so identical flags and seed produce byte-identical
//! files. `manifest.json` carries the wall-clock duration and is the
//! only output that varies between identical runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cf_lab_core::{BoundValue, DoobTrace, ScalingTable, TailReport, TraceMode};
use serde::Serialize;

use crate::CliError;

/// Floating-point cell: 17 significant digits, scientific notation.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// Run metadata written next to every output file.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub duration_seconds: f64,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, params: serde_json::Value, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            params,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: 0.0,
            outputs: Vec::new(),
        }
    }
}

/// Collects output files for one command run and writes the manifest
/// last, stamped with the elapsed wall-clock time.
pub struct OutputDir {
    dir: PathBuf,
    manifest: Manifest,
    started: Instant,
}

impl OutputDir {
    pub fn create(dir: &Path, manifest: Manifest) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            started: Instant::now(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("cannot serialize {name}: {e}")))?;
        self.write(name, &format!("{body}\n"))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.manifest.duration_seconds = self.started.elapsed().as_secs_f64();
        let body = serde_json::to_string_pretty(&self.manifest)
            .map_err(|e| CliError::Io(format!("cannot serialize manifest: {e}")))?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, format!("{body}\n"))
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        Ok(())
    }
}

/// One row of the bounds table.
pub struct BoundsRow {
    pub alpha: f64,
    pub ofdm: cf_lab_core::OfdmBounds,
    /// General refined bound (deviation αn) when martingale parameters
    /// were supplied.
    pub refined_general: Option<BoundValue>,
    /// Leading-order refined bound (deviation α√n).
    pub refined_asymptotic: Option<BoundValue>,
}

pub fn bounds_csv(rows: &[BoundsRow], with_general: bool) -> String {
    let mut out = String::from(
        "alpha,azuma_raw,azuma_capped,refined_raw,refined_capped,mcdiarmid_raw,\
         mcdiarmid_capped,talagrand_raw,talagrand_capped",
    );
    if with_general {
        out.push_str(
            ",refined_general_raw,refined_general_capped,refined_asymptotic_raw,\
             refined_asymptotic_capped",
        );
    }
    out.push('\n');
    for row in rows {
        let b = &row.ofdm;
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            fmt_float(row.alpha),
            fmt_float(b.azuma.raw),
            fmt_float(b.azuma.capped),
            fmt_float(b.refined.raw),
            fmt_float(b.refined.capped),
            fmt_float(b.mcdiarmid.raw),
            fmt_float(b.mcdiarmid.capped),
            fmt_float(b.talagrand.raw),
            fmt_float(b.talagrand.capped),
        );
        if with_general {
            let _ = write!(
                out,
                ",{},{},{},{}",
                fmt_opt(row.refined_general.map(|v| v.raw)),
                fmt_opt(row.refined_general.map(|v| v.capped)),
                fmt_opt(row.refined_asymptotic.map(|v| v.raw)),
                fmt_opt(row.refined_asymptotic.map(|v| v.capped)),
            );
        }
        out.push('\n');
    }
    out
}

pub fn tails_csv(report: &TailReport) -> String {
    let mut out = String::from(
        "alpha,tail_mean,se_mean,tail_median,se_median,azuma_raw,azuma_capped,\
         refined_raw,refined_capped,mcdiarmid_raw,mcdiarmid_capped,talagrand_raw,\
         talagrand_capped,viol_azuma,viol_refined,viol_mcdiarmid,viol_talagrand\n",
    );
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt_float(r.alpha),
            fmt_float(r.tail_mean),
            fmt_float(r.se_mean),
            fmt_float(r.tail_median),
            fmt_float(r.se_median),
            fmt_float(r.bounds.azuma.raw),
            fmt_float(r.bounds.azuma.capped),
            fmt_float(r.bounds.refined.raw),
            fmt_float(r.bounds.refined.capped),
            fmt_float(r.bounds.mcdiarmid.raw),
            fmt_float(r.bounds.mcdiarmid.capped),
            fmt_float(r.bounds.talagrand.raw),
            fmt_float(r.bounds.talagrand.capped),
            r.violations.azuma,
            r.violations.refined,
            r.violations.mcdiarmid,
            r.violations.talagrand,
        );
    }
    out
}

pub fn trace_csv(trace: &DoobTrace) -> String {
    let mut out = String::from("step,y,se,increment,cond_second_moment\n");
    for (i, y) in trace.values.iter().enumerate() {
        let (inc, sm) = if i == 0 {
            (String::new(), String::new())
        } else {
            (
                fmt_float(trace.increments[i - 1]),
                fmt_float(trace.cond_second_moments[i - 1]),
            )
        };
        let _ = writeln!(
            out,
            "{i},{},{},{inc},{sm}",
            fmt_float(*y),
            fmt_float(trace.standard_errors[i]),
        );
    }
    out
}

pub fn trace_mode_name(mode: TraceMode) -> &'static str {
    match mode {
        TraceMode::Exact => "exact",
        TraceMode::MonteCarlo { .. } => "mc",
    }
}

pub fn scaling_csv(table: &ScalingTable) -> String {
    let mut out = String::from("n,mean_cf,median_cf,ratio_ln,ratio_log2,in_lw_band\n");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n,
            fmt_float(r.mean_cf),
            fmt_float(r.median_cf),
            fmt_opt(r.ratio_ln),
            fmt_opt(r.ratio_log2),
            r.in_litsyn_wunder_band,
        );
    }
    out
}

pub fn psk_identity_csv(rows: &[(usize, f64)]) -> String {
    let mut out = String::from("m,value\n");
    for (m, v) in rows {
        let _ = writeln!(out, "{m},{}", fmt_float(*v));
    }
    out
}
