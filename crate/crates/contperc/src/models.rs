//! Graph-model construction: homogeneous RCM, inhomogeneous RCM with Pareto
//! weights, and the Poisson stick model. A built [`Realization`] is an
//! immutable bag of points, marks, and accepted segments.

use crate::geometry::{Box2, Point, Segment};
use crate::sampling::{RngStream, StickLaw};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),
    #[error("inhomogeneous connection function requires per-point weights")]
    MissingWeights,
    #[error("weights length {got} does not match point count {expected}")]
    WeightCountMismatch { got: usize, expected: usize },
    #[error("invalid connection parameter: {0}")]
    InvalidParameter(String),
}

/// Distance-based connection probability `g`, or the weight-dependent kernel
/// `1 - exp(-eta w1 w2 / r^alpha)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConnectionFunction {
    /// `g(r) = 1_{r <= r0}`.
    Indicator { r0: f64 },
    /// `g(r) = min(1, r^{-c})`.
    PowerMin { c: f64 },
    /// `g(r) = exp(-mu r)`.
    Exponential { mu: f64 },
    /// `g(r; w1, w2) = 1 - exp(-eta w1 w2 / r^alpha)`.
    Inhomogeneous { eta: f64, alpha: f64 },
}

impl ConnectionFunction {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidParameter(msg));
        match *self {
            ConnectionFunction::Indicator { r0 } => {
                if r0 < 0.0 {
                    return bad(format!("indicator radius must be nonnegative, got {r0}"));
                }
            }
            ConnectionFunction::PowerMin { c } => {
                if c <= 0.0 {
                    return bad(format!("power exponent must be positive, got {c}"));
                }
            }
            ConnectionFunction::Exponential { mu } => {
                if mu <= 0.0 {
                    return bad(format!("exponential rate must be positive, got {mu}"));
                }
            }
            ConnectionFunction::Inhomogeneous { eta, alpha } => {
                if eta <= 0.0 || alpha <= 0.0 {
                    return bad(format!("need eta > 0 and alpha > 0, got eta={eta}, alpha={alpha}"));
                }
            }
        }
        Ok(())
    }

    pub fn needs_weights(&self) -> bool {
        matches!(self, ConnectionFunction::Inhomogeneous { .. })
    }
}

/// `P(edge | dist, weights)`. Weights are ignored for the homogeneous kinds.
pub fn connection_probability(
    cf: &ConnectionFunction,
    dist: f64,
    w1: f64,
    w2: f64,
) -> Result<f64, ModelError> {
    if dist <= 0.0 {
        return Err(ModelError::NonPositiveDistance(dist));
    }
    Ok(match *cf {
        ConnectionFunction::Indicator { r0 } => {
            if dist <= r0 {
                1.0
            } else {
                0.0
            }
        }
        ConnectionFunction::PowerMin { c } => dist.powf(-c).min(1.0),
        ConnectionFunction::Exponential { mu } => (-mu * dist).exp(),
        ConnectionFunction::Inhomogeneous { eta, alpha } => {
            -(-eta * w1 * w2 / dist.powf(alpha)).exp_m1()
        }
    })
}

/// Per-point mark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mark {
    None,
    Weight { w: f64 },
    Stick { half_length: f64, theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub seg: Segment,
}

/// One sampled world. For RCM kinds, `segments` are the straight edges
/// between connected point pairs; for the stick model they are the sticks
/// (one per point, same index).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub points: Vec<Point>,
    pub marks: Vec<Mark>,
    pub edges: Vec<Edge>,
    pub sticks: Vec<Segment>,
    pub window: Box2,
    pub padding: f64,
    pub truncation_radius: Option<f64>,
}

impl Realization {
    /// All segments of the realization, regardless of model kind.
    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.edges.iter().map(|e| &e.seg).chain(self.sticks.iter())
    }

    pub fn segment_count(&self) -> usize {
        self.edges.len() + self.sticks.len()
    }

    pub fn is_stick_model(&self) -> bool {
        !self.sticks.is_empty() || self.edges.is_empty() && self.points.len() == self.sticks.len()
    }
}

/// Deterministic per-pair key, symmetric in the two point keys. Pair
/// uniforms derived from it are shared across thinning-coupled intensities.
fn pair_stream(stream: &RngStream, ka: u64, kb: u64) -> RngStream {
    let (lo, hi) = if ka <= kb { (ka, kb) } else { (kb, ka) };
    stream.substream(lo.wrapping_mul(0x100000001b3).wrapping_add(hi) ^ hi.rotate_left(29))
}

/// The uniform driving the pair `(ka, kb)`; exposed so couplings can be
/// checked independently.
pub fn pair_uniform(stream: &RngStream, ka: u64, kb: u64) -> f64 {
    pair_stream(stream, ka, kb).unit_uniform()
}

fn grid_index(p: &Point, origin: &Point, cell: f64) -> (i64, i64) {
    (
        ((p.x - origin.x) / cell).floor() as i64,
        ((p.y - origin.y) / cell).floor() as i64,
    )
}

/// Candidate pairs within `radius`, via grid buckets of side `radius`.
/// Each unordered pair is reported once with `i < j`.
fn pairs_within(points: &[Point], radius: f64) -> Vec<(usize, usize)> {
    use std::collections::HashMap;
    let mut out = Vec::new();
    if points.is_empty() {
        return out;
    }
    let origin = points.iter().fold(Point::new(f64::MAX, f64::MAX), |acc, p| {
        Point { x: acc.x.min(p.x), y: acc.y.min(p.y) }
    });
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(grid_index(p, &origin, radius)).or_default().push(i);
    }
    let r2 = radius * radius;
    for (&(cx, cy), cell_pts) in &grid {
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if let Some(other) = grid.get(&(cx + dx, cy + dy)) {
                    for &i in cell_pts {
                        for &j in other {
                            if i < j {
                                let d = points[i].dist(&points[j]);
                                if d * d <= r2 * (1.0 + 1e-12) || d <= radius {
                                    out.push((i, j));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out
}

/// Build an RCM / ieRCM realization over given points. Pair uniforms are
/// keyed by `keys` (defaults to point indices), so realizations built from
/// thinned subsets of one master process share edge decisions.
#[allow(clippy::too_many_arguments)]
pub fn build_rcm_keyed(
    points: Vec<Point>,
    keys: Option<&[u64]>,
    cf: &ConnectionFunction,
    weights: Option<Vec<f64>>,
    trunc: Option<f64>,
    window: Box2,
    padding: f64,
    stream: RngStream,
) -> Result<Realization, ModelError> {
    cf.validate()?;
    let n = points.len();
    if cf.needs_weights() && weights.is_none() {
        return Err(ModelError::MissingWeights);
    }
    if let Some(w) = &weights {
        if w.len() != n {
            return Err(ModelError::WeightCountMismatch { got: w.len(), expected: n });
        }
    }
    let unit = vec![1.0f64; if weights.is_none() { n } else { 0 }];
    let w: &[f64] = weights.as_deref().unwrap_or(&unit);
    let own_keys: Vec<u64>;
    let keys: &[u64] = match keys {
        Some(k) => k,
        None => {
            own_keys = (0..n as u64).collect();
            &own_keys
        }
    };
    let mut edges = Vec::new();
    let consider = |i: usize, j: usize, edges: &mut Vec<Edge>| {
        let d = points[i].dist(&points[j]);
        if d <= 0.0 {
            return; // coincident points: a.s. never, skip
        }
        if let Some(r) = trunc {
            if d > r {
                return;
            }
        }
        let p = connection_probability(cf, d, w[i], w[j]).expect("positive distance");
        if p > 0.0 && pair_uniform(&stream, keys[i], keys[j]) < p {
            edges.push(Edge { i, j, seg: Segment::new(points[i], points[j]) });
        }
    };
    match trunc {
        Some(r) if n > 64 => {
            for (i, j) in pairs_within(&points, r) {
                consider(i, j, &mut edges);
            }
        }
        _ => {
            for i in 0..n {
                for j in (i + 1)..n {
                    consider(i, j, &mut edges);
                }
            }
        }
    }
    let marks = match weights {
        Some(w) => w.into_iter().map(|w| Mark::Weight { w }).collect(),
        None => vec![Mark::None; n],
    };
    Ok(Realization {
        points,
        marks,
        edges,
        sticks: Vec::new(),
        window,
        padding,
        truncation_radius: trunc,
    })
}

pub fn build_rcm(
    points: Vec<Point>,
    cf: &ConnectionFunction,
    weights: Option<Vec<f64>>,
    trunc: Option<f64>,
    window: Box2,
    padding: f64,
    stream: RngStream,
) -> Result<Realization, ModelError> {
    build_rcm_keyed(points, None, cf, weights, trunc, window, padding, stream)
}

/// One stick per point; midpoints at the points, half-length and angle from
/// the law. Stick `k` uses a substream keyed by `keys[k]` (default: its
/// index), so marks stay attached to points under thinning couplings.
pub fn build_sticks_keyed(
    points: Vec<Point>,
    keys: Option<&[u64]>,
    law: &StickLaw,
    window: Box2,
    padding: f64,
    stream: RngStream,
) -> Result<Realization, ModelError> {
    law.validate()
        .map_err(|e| ModelError::InvalidParameter(e.to_string()))?;
    let mut sticks = Vec::with_capacity(points.len());
    let mut marks = Vec::with_capacity(points.len());
    for (k, p) in points.iter().enumerate() {
        let key = keys.map_or(k as u64, |ks| ks[k]);
        let mut rng = stream.substream(key).rng();
        let half_length = law.half_length.sample(&mut rng);
        let theta = law.orientation.sample(&mut rng);
        marks.push(Mark::Stick { half_length, theta });
        sticks.push(crate::sampling::stick_segment(*p, half_length, theta));
    }
    Ok(Realization {
        points,
        marks,
        edges: Vec::new(),
        sticks,
        window,
        padding,
        truncation_radius: None,
    })
}

pub fn build_sticks(
    points: Vec<Point>,
    law: &StickLaw,
    window: Box2,
    padding: f64,
    stream: RngStream,
) -> Result<Realization, ModelError> {
    build_sticks_keyed(points, None, law, window, padding, stream)
}
