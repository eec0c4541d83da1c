//! Model and experiment configuration: validated parameter sets with
//! defaulting rules for truncation and padding, plus serializable event
//! descriptions.

use crate::analysis::{tail_mass, GSpec};
use crate::events::{ArmSpec, CrossingSpec};
use crate::geometry::{Annulus, Box2};
use crate::models::ConnectionFunction;
use crate::sampling::{HalfLengthLaw, StickLaw};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("missing field `{field}`: {reason}")]
    Missing { field: String, reason: String },
}

fn invalid(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Random connection model; events use only direct edge connectivity.
    Rcm,
    /// Enhanced RCM: crossing edges also merge components.
    Ercm,
    /// Inhomogeneous enhanced RCM with Pareto vertex weights.
    Iercm,
    /// Poisson stick model.
    Sticks,
}

/// Expected number of discarded edges tolerated by the default truncation
/// radius.
pub const TRUNCATION_BUDGET: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub lambda: f64,
    /// Connection function for the RCM kinds; ignored for sticks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<ConnectionFunction>,
    /// Pareto tail exponent of the vertex weights (ieRCM only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_beta: Option<f64>,
    /// Stick law (stick model only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stick: Option<StickLaw>,
    /// Core window half-size: events live inside `[-s, s]^2`.
    pub core_half: f64,
    /// Extra margin around the core in which points are still sampled.
    /// Defaults to a model-derived value (see `effective_padding`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub padding: Option<f64>,
    /// Pair-distance cutoff for edge proposals. Defaults to a radius with
    /// tail mass below `TRUNCATION_BUDGET` expected lost edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
}

impl ModelConfig {
    pub fn core_window(&self) -> Box2 {
        Box2::centered(self.core_half)
    }

    pub fn is_rcm_kind(&self) -> bool {
        matches!(self.model, ModelKind::Rcm | ModelKind::Ercm | ModelKind::Iercm)
    }

    /// Whether crossing segments link components under this model.
    pub fn enhanced(&self) -> bool {
        self.model != ModelKind::Rcm
    }

    /// The distance profile used for truncation and bias reports.
    pub fn g_spec(&self) -> Result<Option<GSpec>, ConfigError> {
        if !self.is_rcm_kind() {
            return Ok(None);
        }
        let cf = self.connection.as_ref().ok_or_else(|| ConfigError::Missing {
            field: "connection".into(),
            reason: "RCM kinds need a connection function".into(),
        })?;
        GSpec::from_connection(cf, self.weight_beta)
            .map(Some)
            .map_err(|e| invalid("connection", e.to_string()))
    }

    /// Validate and return hypothesis warnings (never silently dropped).
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        let mut warnings = Vec::new();
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(invalid("lambda", format!("must be >= 0, got {}", self.lambda)));
        }
        if !(self.core_half > 0.0) {
            return Err(invalid("core_half", format!("must be > 0, got {}", self.core_half)));
        }
        if let Some(p) = self.padding {
            if !(p >= 0.0) {
                return Err(invalid("padding", format!("must be >= 0, got {p}")));
            }
        }
        if let Some(t) = self.truncation {
            if !(t > 0.0) {
                return Err(invalid("truncation", format!("must be > 0, got {t}")));
            }
        }
        match self.model {
            ModelKind::Rcm | ModelKind::Ercm => {
                let cf = self.connection.as_ref().ok_or_else(|| ConfigError::Missing {
                    field: "connection".into(),
                    reason: "RCM kinds need a connection function".into(),
                })?;
                cf.validate().map_err(|e| invalid("connection", e.to_string()))?;
                if matches!(cf, ConnectionFunction::Inhomogeneous { .. }) {
                    return Err(invalid(
                        "connection",
                        "the weighted kernel requires model = iercm",
                    ));
                }
                if self.model == ModelKind::Ercm {
                    if let ConnectionFunction::PowerMin { c } = cf {
                        if *c <= 4.0 {
                            warnings.push(format!(
                                "connection tail exponent c = {c} is outside the c > 4 \
                                 hypothesis for enhanced-model scale invariance probes"
                            ));
                        }
                    }
                }
            }
            ModelKind::Iercm => {
                let cf = self.connection.as_ref().ok_or_else(|| ConfigError::Missing {
                    field: "connection".into(),
                    reason: "iercm needs the inhomogeneous connection kernel".into(),
                })?;
                cf.validate().map_err(|e| invalid("connection", e.to_string()))?;
                let (eta, alpha) = match cf {
                    ConnectionFunction::Inhomogeneous { eta, alpha } => (*eta, *alpha),
                    _ => {
                        return Err(invalid(
                            "connection",
                            "iercm requires the inhomogeneous kernel",
                        ))
                    }
                };
                let _ = eta;
                let beta = self.weight_beta.ok_or_else(|| ConfigError::Missing {
                    field: "weight_beta".into(),
                    reason: "iercm needs the Pareto weight exponent".into(),
                })?;
                if beta <= 0.0 {
                    return Err(invalid("weight_beta", format!("must be > 0, got {beta}")));
                }
                if alpha.min(alpha * beta) <= 4.0 {
                    warnings.push(format!(
                        "min(alpha, alpha*beta) = {} is outside the > 4 hypothesis \
                         for weighted-model probes",
                        alpha.min(alpha * beta)
                    ));
                }
            }
            ModelKind::Sticks => {
                let law = self.stick.as_ref().ok_or_else(|| ConfigError::Missing {
                    field: "stick".into(),
                    reason: "stick model needs half-length and orientation laws".into(),
                })?;
                law.validate().map_err(|e| invalid("stick", e.to_string()))?;
                if let HalfLengthLaw::PowerLaw { c, .. } = law.half_length {
                    if c <= 3.0 {
                        warnings.push(format!(
                            "half-length tail exponent c = {c} is outside the c > 3 \
                             hypothesis for stick-model probes"
                        ));
                    }
                }
            }
        }
        Ok(warnings)
    }

    /// Truncation radius actually used: the explicit one, or the smallest
    /// radius whose expected number of discarded edges over the padded
    /// window is below `TRUNCATION_BUDGET`. Compact-support profiles
    /// truncate at their support radius; sticks have no pair truncation.
    pub fn effective_truncation(&self) -> Result<Option<f64>, ConfigError> {
        if let Some(t) = self.truncation {
            return Ok(Some(t));
        }
        let g = match self.g_spec()? {
            Some(g) => g,
            None => return Ok(None),
        };
        if let GSpec::Indicator { r0 } = g {
            return Ok(Some(r0));
        }
        // expected discarded edges: lambda^2/2 * |padded window| * tail_mass(R).
        // With defaulted padding the window itself grows with R, so solve the
        // self-consistent inequality.
        let lam = self.lambda.max(1e-6);
        let lost = |r: f64| -> Result<f64, ConfigError> {
            let pad = self.padding.unwrap_or(r);
            let w = 2.0 * (self.core_half + pad);
            let mass = tail_mass(&g, r).map_err(|e| invalid("truncation", e.to_string()))?;
            Ok(0.5 * lam * lam * w * w * mass)
        };
        let mut lo = 1e-3;
        let mut hi = 1.0;
        while lost(hi)? > TRUNCATION_BUDGET {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(invalid("truncation", "no finite default truncation radius"));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lost(mid)? > TRUNCATION_BUDGET {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-9 * hi {
                break;
            }
        }
        Ok(Some(hi))
    }

    /// Sampling margin actually used: the explicit one, or
    /// `max(truncation radius, 99.9% quantile of the stick full length)`.
    pub fn effective_padding(&self) -> Result<f64, ConfigError> {
        if let Some(p) = self.padding {
            return Ok(p);
        }
        match self.model {
            ModelKind::Sticks => {
                let law = self.stick.as_ref().ok_or_else(|| ConfigError::Missing {
                    field: "stick".into(),
                    reason: "stick model needs half-length and orientation laws".into(),
                })?;
                Ok(law.half_length.full_length_quantile(0.999))
            }
            _ => Ok(self.effective_truncation()?.unwrap_or(0.0)),
        }
    }
}

/// An event to estimate, in core-window coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventSpec {
    Crossing { spec: CrossingSpec },
    Circuit { annulus: Annulus },
    Arm { spec: ArmSpec },
    /// Glued crossing event of aspect `rho` at scale `s` (origin-cornered).
    CompositeCrossing { s: f64, rho: f64 },
    /// Longest edge (stick half-length) intersecting `region` exceeds
    /// `threshold`.
    LongestEdgeExceeds { region: Box2, threshold: f64 },
    LongEdgeInAnnulus { annulus: Annulus, threshold: f64 },
}

impl EventSpec {
    /// Smallest box containing the event's region of interest.
    pub fn outer_box(&self) -> Box2 {
        match self {
            EventSpec::Crossing { spec } => spec.rect,
            EventSpec::Circuit { annulus } | EventSpec::LongEdgeInAnnulus { annulus, .. } => {
                annulus.outer
            }
            EventSpec::Arm { spec } => spec.confinement,
            EventSpec::CompositeCrossing { s, rho } => {
                let n = crate::events::composite_shift_count(*rho);
                Box2::from_coords(0.0, 0.0, (n as f64 + 2.0) * s, *s)
            }
            EventSpec::LongestEdgeExceeds { region, .. } => *region,
        }
    }

    /// Evaluate the event. `enhanced` selects the connectivity rule for
    /// connectivity events: enhanced (crossing segments link) or plain graph
    /// connectivity. Edge-length events ignore the flag.
    pub fn evaluate_in(
        &self,
        r: &crate::models::Realization,
        enhanced: bool,
    ) -> Result<bool, crate::events::EventError> {
        use crate::events;
        Ok(match self {
            EventSpec::Crossing { spec } => if enhanced {
                events::detect_crossing(r, spec)?
            } else {
                events::detect_crossing_direct(r, spec)?
            }
            .occurred,
            EventSpec::Circuit { annulus } => if enhanced {
                events::detect_circuit(r, annulus)?
            } else {
                events::detect_circuit_direct(r, annulus)?
            }
            .occurred,
            EventSpec::Arm { spec } => if enhanced {
                events::detect_arm(r, spec)?
            } else {
                events::detect_arm_direct(r, spec)?
            }
            .occurred,
            EventSpec::CompositeCrossing { s, rho } => if enhanced {
                events::detect_composite_f(r, *s, *rho)?
            } else {
                events::detect_composite_f_direct(r, *s, *rho)?
            }
            .occurred,
            EventSpec::LongestEdgeExceeds { region, threshold } => {
                events::longest_edge_in_box(r, region) > *threshold
            }
            EventSpec::LongEdgeInAnnulus { annulus, threshold } => {
                events::long_edge_in_annulus(r, annulus, *threshold)
            }
        })
    }

    /// Evaluate with enhanced connectivity.
    pub fn evaluate(&self, r: &crate::models::Realization) -> Result<bool, crate::events::EventError> {
        self.evaluate_in(r, true)
    }

    /// Check the event region fits inside the core window.
    pub fn validate_against(&self, cfg: &ModelConfig) -> Result<(), ConfigError> {
        let outer = self.outer_box();
        if cfg.core_window().contains_box(&outer) {
            Ok(())
        } else {
            Err(invalid(
                "event",
                format!(
                    "event region [{}, {}] x [{}, {}] exceeds the core window half-size {}",
                    outer.lo.x, outer.hi.x, outer.lo.y, outer.hi.y, cfg.core_half
                ),
            ))
        }
    }
}
