//! Distance profiles for the numeric side: the homogeneous connection
//! functions, and the weight-averaged profile of the inhomogeneous kernel.

use super::quad::{integrate_tail, integrate_with_splits};
use crate::models::ConnectionFunction;
use crate::sampling::product_weight_density;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum AnalysisError {
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("invalid analysis parameter: {0}")]
    InvalidParameter(String),
}

/// Tail behaviour of a distance profile, for convergence checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailDecay {
    /// Zero beyond a finite radius.
    Compact(f64),
    /// `~ r^{-p}` (up to logarithmic factors).
    Polynomial(f64),
    /// Faster than any polynomial.
    Exponential,
}

/// A nonnegative non-increasing profile `g(r)` with known kinks and tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GSpec {
    Indicator { r0: f64 },
    PowerMin { c: f64 },
    Exponential { mu: f64 },
    /// `E[1 - exp(-eta W1 W2 / r^alpha)]` over independent Pareto(beta)
    /// weights; decays like `r^{-min(alpha, alpha*beta)}` with a log factor.
    InhomogeneousMean { eta: f64, alpha: f64, beta: f64 },
}

impl GSpec {
    pub fn from_connection(cf: &ConnectionFunction, weight_beta: Option<f64>) -> Result<GSpec, AnalysisError> {
        Ok(match *cf {
            ConnectionFunction::Indicator { r0 } => GSpec::Indicator { r0 },
            ConnectionFunction::PowerMin { c } => GSpec::PowerMin { c },
            ConnectionFunction::Exponential { mu } => GSpec::Exponential { mu },
            ConnectionFunction::Inhomogeneous { eta, alpha } => {
                let beta = weight_beta.ok_or_else(|| {
                    AnalysisError::InvalidParameter(
                        "weight tail exponent beta required for the inhomogeneous kernel".into(),
                    )
                })?;
                GSpec::InhomogeneousMean { eta, alpha, beta }
            }
        })
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            GSpec::Indicator { r0 } => {
                if r <= r0 {
                    1.0
                } else {
                    0.0
                }
            }
            GSpec::PowerMin { c } => r.powf(-c).min(1.0),
            GSpec::Exponential { mu } => (-mu * r).exp(),
            GSpec::InhomogeneousMean { eta, alpha, beta } => expected_connection(eta, alpha, beta, r),
        }
    }

    /// Interior points where the profile is non-smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match *self {
            GSpec::Indicator { r0 } => vec![r0],
            GSpec::PowerMin { .. } => vec![1.0],
            _ => Vec::new(),
        }
    }

    pub fn tail_decay(&self) -> TailDecay {
        match *self {
            GSpec::Indicator { r0 } => TailDecay::Compact(r0),
            GSpec::PowerMin { c } => TailDecay::Polynomial(c),
            GSpec::Exponential { .. } => TailDecay::Exponential,
            GSpec::InhomogeneousMean { alpha, beta, .. } => {
                TailDecay::Polynomial(alpha.min(alpha * beta))
            }
        }
    }

    /// Does `int r^j g(r) dr` converge? Strict polynomial margin is
    /// required; a borderline log-divergent case counts as divergent.
    pub fn moment_converges(&self, j: u32) -> bool {
        match self.tail_decay() {
            TailDecay::Compact(_) | TailDecay::Exponential => true,
            TailDecay::Polynomial(p) => p > j as f64 + 1.0,
        }
    }
}

/// `E[g(r; W1, W2)] = int_1^inf (1 - e^{-eta w / r^alpha}) f(w) dw` with the
/// product-weight density `f`. The integrand changes character near
/// `w = r^alpha / eta`, so panels are forced there.
pub fn expected_connection(eta: f64, alpha: f64, beta: f64, r: f64) -> f64 {
    assert!(eta > 0.0 && alpha > 0.0 && beta > 0.0 && r > 0.0);
    let d = r.powf(alpha) / eta;
    let f = move |w: f64| (-(-w / d).exp_m1()) * product_weight_density(w, beta);
    let mut splits: Vec<f64> = vec![10.0, d.sqrt(), d, 10.0 * d, 100.0 * d];
    splits.retain(|&s| s > 1.0);
    splits.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let hi = splits.last().copied().unwrap_or(1.0).max(2.0);
    let finite = integrate_with_splits(&f, 1.0, hi, &splits, 1e-11);
    let tail = integrate_tail(&f, hi, 1e-11);
    finite.value + tail.value
}
