//! Closed-form concentration bounds and the distance metrics they use.
//!
//! The four tail bounds implemented here, for a martingale `X_0..X_n`
//! (or a function of independent coordinates), are
//!
//! ```text
//! Azuma:      P(|X_n − X_0| ≥ r)  ≤ 2 exp(−r² / (2 Σ d_k²))
//! refined:    P(|X_n − X_0| ≥ αn) ≤ 2 exp(−n D((δ+γ)/(1+γ) ‖ γ/(1+γ)))
//! McDiarmid:  P(|f − E f| ≥ α)    ≤ 2 exp(−2α² / Σ c_k²)
//! Talagrand:  P(|f − median| ≥ α) ≤ 4 exp(−α² / (4σ²))
//! ```
//!
//! with `γ = σ²/d²`, `δ = α/d` and `D(p‖q)` the Bernoulli relative
//! entropy. [`ofdm_bounds`] evaluates all four in the OFDM crest-factor
//! setting, where the per-coordinate jump is `2/√n` and the conditional
//! variance is `2/n`, making every exponent independent of `n`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Right-hand side of a concentration inequality.
///
/// `raw` is the closed-form value, which exceeds 1 for small deviations;
/// `capped` clips it to `[0, 1]` so it can be read as a probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    pub raw: f64,
    pub capped: f64,
}

impl BoundValue {
    pub fn from_raw(raw: f64) -> Self {
        Self {
            raw,
            capped: raw.min(1.0),
        }
    }
}

/// Jump and conditional-variance parameters of a bounded-difference
/// martingale: `|X_k − X_{k−1}| ≤ d` and `Var(X_k | F_{k−1}) ≤ σ²`
/// almost surely, over `n` steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MartingaleParams {
    d: f64,
    sigma2: f64,
    n: usize,
}

impl MartingaleParams {
    pub fn new(d: f64, sigma2: f64, n: usize) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Domain(format!("jump bound d must be positive, got {d}")));
        }
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::Domain(format!(
                "variance bound sigma2 must be nonnegative, got {sigma2}"
            )));
        }
        if n == 0 {
            return Err(Error::Domain("step count n must be at least 1".into()));
        }
        Ok(Self { d, sigma2, n })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// γ = σ²/d².
    pub fn gamma(&self) -> f64 {
        self.sigma2 / (self.d * self.d)
    }

    /// δ = α/d.
    pub fn delta(&self, alpha: f64) -> f64 {
        alpha / self.d
    }
}

/// Non-negative unit-norm weights for the weighted Hamming distance.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    a: Vec<f64>,
}

impl WeightVector {
    /// Absolute tolerance on `Σ aᵢ² − 1` accepted at construction.
    pub const NORM_TOLERANCE: f64 = 1e-12;

    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Domain("weight vector must be non-empty".into()));
        }
        if let Some(bad) = a.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::Domain(format!("weights must be nonnegative, got {bad}")));
        }
        let sum_sq: f64 = a.iter().map(|w| w * w).sum();
        if (sum_sq - 1.0).abs() > Self::NORM_TOLERANCE {
            return Err(Error::NotNormalized { sum_sq });
        }
        Ok(Self { a })
    }

    /// The uniform vector `(1/√n, ..., 1/√n)`, for which the weighted
    /// distance is `hamming/√n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("weight vector must be non-empty".into()));
        }
        let w = 1.0 / (n as f64).sqrt();
        Self::new(vec![w; n])
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }
}

/// The four OFDM crest-factor bounds at one deviation `α`.
///
/// `refined` is the leading-order value of the refined Azuma bound; its
/// `1 + O(n^{−1/2})` correction factor is not computable from the
/// parameters available here and is reported as 1 (see
/// [`REFINED_BOUND_IS_ASYMPTOTIC`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OfdmBounds {
    pub azuma: BoundValue,
    pub refined: BoundValue,
    pub mcdiarmid: BoundValue,
    pub talagrand: BoundValue,
}

/// The `refined` field of [`OfdmBounds`] is a leading-order bound only.
pub const REFINED_BOUND_IS_ASYMPTOTIC: bool = true;

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("{name} must be nonnegative, got {v}")));
    }
    Ok(())
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
    }
    Ok(())
}

/// Relative entropy `D(p‖q)` between Bernoulli(p) and Bernoulli(q).
///
/// Uses the conventions `0·ln(0/q) = 0` and `x·ln(x/0) = +∞` for
/// `x > 0`, so the result is `+∞` (not an error) when `q ∈ {0, 1}` and
/// `p ≠ q`. The result is nonnegative and zero exactly when `p = q`.
pub fn kl_divergence(p: f64, q: f64) -> Result<f64> {
    check_unit_interval("p", p)?;
    check_unit_interval("q", q)?;
    fn term(p: f64, q: f64) -> f64 {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    }
    Ok(term(p, q) + term(1.0 - p, 1.0 - q))
}

/// Azuma's inequality: `2 exp(−r² / (2 Σ d_k²))` for per-step jump
/// bounds `d_k`.
pub fn azuma_bound(r: f64, d_list: &[f64]) -> Result<BoundValue> {
    check_nonnegative("r", r)?;
    if d_list.is_empty() {
        return Err(Error::Domain("d_list must be non-empty".into()));
    }
    if let Some(bad) = d_list.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
        return Err(Error::Domain(format!("jump bounds must be positive, got {bad}")));
    }
    let sum_sq: f64 = d_list.iter().map(|d| d * d).sum();
    Ok(BoundValue::from_raw(2.0 * (-r * r / (2.0 * sum_sq)).exp()))
}

/// Refined Azuma bound for the deviation `P(|X_n − X_0| ≥ αn)`:
/// `2 exp(−n D((δ+γ)/(1+γ) ‖ γ/(1+γ)))`, and exactly 0 when `δ > 1`
/// (a jump bound of `d` makes larger deviations impossible).
pub fn refined_azuma_bound(alpha: f64, params: &MartingaleParams) -> Result<BoundValue> {
    check_nonnegative("alpha", alpha)?;
    let gamma = params.gamma();
    let delta = params.delta(alpha);
    if delta > 1.0 {
        return Ok(BoundValue::from_raw(0.0));
    }
    let p = (delta + gamma) / (1.0 + gamma);
    let q = gamma / (1.0 + gamma);
    let divergence = kl_divergence(p, q)?;
    // exp(−n·∞) = 0 covers the degenerate γ = 0, δ > 0 case.
    Ok(BoundValue::from_raw(2.0 * (-(params.n() as f64) * divergence).exp()))
}

/// Leading-order refined bound for the deviation
/// `P(|X_n − X_0| ≥ α√n)`: `2 exp(−δ²/(2γ))`, without its
/// `1 + O(n^{−1/2})` correction factor.
pub fn refined_azuma_asymptotic(alpha: f64, params: &MartingaleParams) -> Result<BoundValue> {
    check_nonnegative("alpha", alpha)?;
    let gamma = params.gamma();
    if gamma == 0.0 {
        return Err(Error::Singular(
            "gamma = sigma2/d^2 must be positive for the asymptotic form".into(),
        ));
    }
    let delta = params.delta(alpha);
    Ok(BoundValue::from_raw(2.0 * (-delta * delta / (2.0 * gamma)).exp()))
}

/// McDiarmid's inequality: `2 exp(−2α² / Σ c_k²)` for coordinate-wise
/// variation bounds `c_k`.
pub fn mcdiarmid_bound(alpha: f64, c_list: &[f64]) -> Result<BoundValue> {
    check_nonnegative("alpha", alpha)?;
    if c_list.is_empty() {
        return Err(Error::Domain("c_list must be non-empty".into()));
    }
    if let Some(bad) = c_list.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
        return Err(Error::Domain(format!("variation bounds must be positive, got {bad}")));
    }
    let sum_sq: f64 = c_list.iter().map(|c| c * c).sum();
    Ok(BoundValue::from_raw(2.0 * (-2.0 * alpha * alpha / sum_sq).exp()))
}

/// Talagrand's inequality around the median: `4 exp(−α²/(4σ²))`.
pub fn talagrand_bound(alpha: f64, sigma: f64) -> Result<BoundValue> {
    check_nonnegative("alpha", alpha)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(BoundValue::from_raw(4.0 * (-alpha * alpha / (4.0 * sigma * sigma)).exp()))
}

/// Bound on the gap between mean and median implied by the Talagrand
/// tail: `|E f − median| ≤ 4σ√π`.
pub fn median_mean_gap_bound(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(4.0 * sigma * std::f64::consts::PI.sqrt())
}

/// All four crest-factor bounds at deviation `α`. The OFDM martingale
/// has jump bound `2/√n` and conditional variance `2/n`, so the four
/// exponents `α²/8`, `α²/4`, `α²/2` and `α²/16` do not depend on `n`.
pub fn ofdm_bounds(alpha: f64) -> Result<OfdmBounds> {
    check_nonnegative("alpha", alpha)?;
    let a2 = alpha * alpha;
    Ok(OfdmBounds {
        azuma: BoundValue::from_raw(2.0 * (-a2 / 8.0).exp()),
        refined: BoundValue::from_raw(2.0 * (-a2 / 4.0).exp()),
        mcdiarmid: BoundValue::from_raw(2.0 * (-a2 / 2.0).exp()),
        talagrand: BoundValue::from_raw(4.0 * (-a2 / 16.0).exp()),
    })
}

/// Number of coordinates where `x` and `y` disagree.
pub fn hamming_distance<T: PartialEq>(x: &[T], y: &[T]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(x.iter().zip(y).filter(|(a, b)| a != b).count())
}

/// Weighted disagreement count `Σ aᵢ·1{xᵢ ≠ yᵢ}`. With uniform weights
/// this equals `hamming_distance / √n`.
pub fn weighted_distance<T: PartialEq>(a: &WeightVector, x: &[T], y: &[T]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if a.len() != x.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: x.len(),
        });
    }
    Ok(a.weights()
        .iter()
        .zip(x.iter().zip(y))
        .filter(|(_, (xi, yi))| xi != yi)
        .map(|(w, _)| w)
        .sum())
}
