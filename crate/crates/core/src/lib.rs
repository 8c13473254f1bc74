//! Concentration-of-measure laboratory for the crest factor of OFDM signals.
//!
//! The crate has four parts:
//!
//! * [`bounds`] — closed-form evaluators for the Azuma, refined-Azuma,
//!   McDiarmid and Talagrand tail bounds, plus their OFDM specializations
//!   and the median–mean gap bound.
//! * [`ofdm`] — PSK/QAM constellations, baseband signal synthesis and the
//!   crest factor (peak of the signal envelope over one symbol interval).
//! * [`martingale`] — the Doob martingale obtained by revealing codeword
//!   symbols one at a time, with exact enumeration on small instances and
//!   Monte Carlo estimation otherwise.
//! * [`montecarlo`] — large-sample crest-factor simulation, empirical tail
//!   estimation and systematic comparison against the bounds.
//!
//! All randomness flows through [`seed`], which derives one independent
//! stream per logical task so that results never depend on scheduling or
//! worker count.

pub mod bounds;
mod error;
pub mod martingale;
pub mod montecarlo;
pub mod ofdm;
#[cfg(feature = "test-oracle")]
pub mod oracle;
pub mod seed;
mod stats;

pub use bounds::{BoundValue, MartingaleParams, OfdmBounds, WeightVector};
pub use error::{Error, Result};
pub use martingale::{BoundedDifferencesReport, DoobTrace, ExactEnumeration, TraceMode};
pub use montecarlo::{
    CfSample, MedianMeanGap, ScalingRow, ScalingTable, SimulationConfig, TailEstimate, TailRecord,
    TailReport,
};
pub use ofdm::{Codeword, Constellation, ConstellationKind, SignalParams};
