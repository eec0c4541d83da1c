//! Seeded random generation: Poisson point processes, Pareto weights,
//! sticks, and deterministic counter-based stream splitting.
//!
//! Every sampling call is a pure function of its inputs and an [`RngStream`];
//! trial `t` of an experiment always uses `stream_id = t`, so results are
//! identical for any thread count.

use crate::geometry::{Box2, Point, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A named position in the randomness tree: `(master_seed, stream_id)`
/// fully determines every draw, so trial `t` of a run can be replayed in
/// isolation.
///
/// ```
/// use contperc::sampling::RngStream;
/// use rand::Rng;
/// let mut a = RngStream::new(42, 3).rng();
/// let mut b = RngStream::new(42, 3).rng();
/// assert_eq!(a.gen::<u64>(), b.gen::<u64>());
/// let mut c = RngStream::new(42, 4).rng();
/// assert_ne!(a.gen::<u64>(), c.gen::<u64>());
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_id: u64,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        RngStream { master_seed, stream_id }
    }

    /// A further independent substream, e.g. one per point or per pair.
    pub fn substream(&self, id: u64) -> RngStream {
        let mut st = self.master_seed ^ self.stream_id.rotate_left(17);
        let mixed = splitmix64(&mut st) ^ id.wrapping_mul(0xa24baed4963ee407);
        RngStream::new(self.master_seed.wrapping_add(splitmix64(&mut st)), mixed)
    }

    /// Instantiate the generator. ChaCha8 keyed from (master_seed, stream_id)
    /// via splitmix64 is platform independent.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self
            .master_seed
            .wrapping_mul(0x9e3779b97f4a7c15)
            .wrapping_add(self.stream_id.rotate_left(32) ^ 0x6a09e667f3bcc909);
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    /// One uniform in (0, 1] keyed to this stream without constructing a
    /// full generator state; used for per-pair edge coupling.
    pub fn unit_uniform(&self) -> f64 {
        let mut st = self
            .master_seed
            .rotate_left(13)
            .wrapping_mul(0xd1342543de82ef95)
            .wrapping_add(self.stream_id ^ 0x2545f4914f6cdd1d);
        let bits = splitmix64(&mut st) >> 11; // 53 random bits
        (bits as f64 + 1.0) / 9007199254740992.0
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum SamplingError {
    #[error("intensity must be nonnegative, got {0}")]
    NegativeIntensity(f64),
    #[error("pareto exponent beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("invalid distribution parameter: {0}")]
    InvalidParameter(String),
}

/// Pareto weight law `P(W > w) = w^{-beta}` on `[1, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightLaw {
    pub beta: f64,
}

impl WeightLaw {
    pub fn new(beta: f64) -> Result<Self, SamplingError> {
        if beta > 0.0 {
            Ok(WeightLaw { beta })
        } else {
            Err(SamplingError::NonPositiveBeta(beta))
        }
    }
}

/// Built-in half-length densities for the stick model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HalfLengthLaw {
    /// Uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// `h(l) = (c-1) l0^{c-1} l^{-c}` on `[l0, inf)`, `c > 1`.
    PowerLaw { c: f64, l0: f64 },
    /// `h(l) = rate e^{-rate l}` on `[0, inf)`.
    Exponential { rate: f64 },
    /// Every stick has the same half-length.
    Fixed { value: f64 },
}

impl HalfLengthLaw {
    pub fn validate(&self) -> Result<(), SamplingError> {
        match *self {
            HalfLengthLaw::Uniform { lo, hi } => {
                if lo < 0.0 || hi <= lo {
                    return Err(SamplingError::InvalidParameter(format!(
                        "uniform half-length needs 0 <= lo < hi, got [{lo}, {hi}]"
                    )));
                }
            }
            HalfLengthLaw::PowerLaw { c, l0 } => {
                if c <= 1.0 || l0 <= 0.0 {
                    return Err(SamplingError::InvalidParameter(format!(
                        "power-law half-length needs c > 1 and l0 > 0, got c={c}, l0={l0}"
                    )));
                }
            }
            HalfLengthLaw::Exponential { rate } => {
                if rate <= 0.0 {
                    return Err(SamplingError::InvalidParameter(format!(
                        "exponential half-length needs rate > 0, got {rate}"
                    )));
                }
            }
            HalfLengthLaw::Fixed { value } => {
                if value < 0.0 {
                    return Err(SamplingError::InvalidParameter(format!(
                        "fixed half-length must be nonnegative, got {value}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen_range(0.0..1.0);
        match *self {
            HalfLengthLaw::Uniform { lo, hi } => lo + u * (hi - lo),
            // inverse CDF of the Pareto tail
            HalfLengthLaw::PowerLaw { c, l0 } => l0 * (1.0 - u).powf(-1.0 / (c - 1.0)),
            HalfLengthLaw::Exponential { rate } => -(1.0 - u).ln() / rate,
            HalfLengthLaw::Fixed { value } => value,
        }
    }

    /// `P(L > l)`.
    pub fn survival(&self, l: f64) -> f64 {
        match *self {
            HalfLengthLaw::Uniform { lo, hi } => {
                if l <= lo {
                    1.0
                } else if l >= hi {
                    0.0
                } else {
                    (hi - l) / (hi - lo)
                }
            }
            HalfLengthLaw::PowerLaw { c, l0 } => {
                if l <= l0 {
                    1.0
                } else {
                    (l / l0).powf(-(c - 1.0))
                }
            }
            HalfLengthLaw::Exponential { rate } => (-rate * l.max(0.0)).exp(),
            HalfLengthLaw::Fixed { value } => {
                if l < value {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Quantile of the *full* stick length `2L`; used for padding defaults.
    pub fn full_length_quantile(&self, q: f64) -> f64 {
        let target = 1.0 - q;
        match *self {
            HalfLengthLaw::Uniform { lo, hi } => 2.0 * (lo + q * (hi - lo)),
            HalfLengthLaw::PowerLaw { c, l0 } => 2.0 * l0 * target.powf(-1.0 / (c - 1.0)),
            HalfLengthLaw::Exponential { rate } => 2.0 * (-target.ln() / rate),
            HalfLengthLaw::Fixed { value } => 2.0 * value,
        }
    }

    pub fn lower_support(&self) -> f64 {
        match *self {
            HalfLengthLaw::Uniform { lo, .. } => lo,
            HalfLengthLaw::PowerLaw { l0, .. } => l0,
            HalfLengthLaw::Exponential { .. } => 0.0,
            HalfLengthLaw::Fixed { value } => value,
        }
    }
}

/// Built-in orientation laws on `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrientationLaw {
    Uniform,
    /// `theta1` with probability `p`, else `theta2`; non-degenerate requires
    /// `theta1 != theta2` and `p` in (0,1).
    TwoPoint { theta1: f64, theta2: f64, p: f64 },
    /// Von Mises on the circle, folded to `[0, pi)`.
    VonMises { mu: f64, kappa: f64 },
    /// Degenerate: every stick parallel. Allowed for fixtures, rejected by
    /// model validation.
    Fixed { theta: f64 },
}

impl OrientationLaw {
    pub fn validate(&self) -> Result<(), SamplingError> {
        match *self {
            OrientationLaw::TwoPoint { theta1, theta2, p } => {
                if theta1 == theta2 || !(0.0 < p && p < 1.0) {
                    return Err(SamplingError::InvalidParameter(
                        "two-point orientation law must be non-degenerate".into(),
                    ));
                }
            }
            OrientationLaw::VonMises { kappa, .. } => {
                if kappa < 0.0 {
                    return Err(SamplingError::InvalidParameter(format!(
                        "von Mises concentration must be nonnegative, got {kappa}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            OrientationLaw::Uniform => rng.gen_range(0.0..std::f64::consts::PI),
            OrientationLaw::TwoPoint { theta1, theta2, p } => {
                if rng.gen_range(0.0..1.0) < p {
                    theta1
                } else {
                    theta2
                }
            }
            OrientationLaw::VonMises { mu, kappa } => {
                sample_von_mises(mu, kappa, rng).rem_euclid(std::f64::consts::PI)
            }
            OrientationLaw::Fixed { theta } => theta,
        }
    }
}

/// Best–Fisher rejection sampler for the von Mises distribution on
/// `(-pi, pi]` centered at `mu`.
fn sample_von_mises<R: Rng>(mu: f64, kappa: f64, rng: &mut R) -> f64 {
    use std::f64::consts::PI;
    if kappa < 1e-8 {
        return rng.gen_range(-PI..PI) + mu;
    }
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.gen_range(0.0..1.0);
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        let u2: f64 = rng.gen_range(0.0..1.0);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.gen_range(0.0..1.0);
            let sign = if u3 > 0.5 { 1.0 } else { -1.0 };
            return mu + sign * f.acos();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StickLaw {
    pub half_length: HalfLengthLaw,
    pub orientation: OrientationLaw,
}

impl StickLaw {
    pub fn validate(&self) -> Result<(), SamplingError> {
        self.half_length.validate()?;
        self.orientation.validate()
    }
}

/// Poisson count by inversion (sequential search) for small means.
fn poisson_inversion<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.gen_range(0.0..1.0);
    let mut p = (-mean).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf && k < 1000 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

fn ln_factorial(k: f64) -> f64 {
    // Stirling series; adequate for the PTRS acceptance test
    if k < 10.0 {
        let mut acc = 0.0;
        let mut i = 2.0;
        while i <= k {
            acc += i.ln();
            i += 1.0;
        }
        return acc;
    }
    let k1 = k + 1.0;
    k1 * k1.ln() - k1 + 0.5 * (2.0 * std::f64::consts::PI / k1).ln() + 1.0 / (12.0 * k1)
        - 1.0 / (360.0 * k1 * k1 * k1)
}

/// Hörmann's PTRS transformed-rejection sampler for large means.
fn poisson_ptrs<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    let b = 0.931 + 2.53 * mean.sqrt();
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u: f64 = rng.gen_range(0.0..1.0) - 0.5;
        let v: f64 = rng.gen_range(0.0..1.0);
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = (v * inv_alpha / (a / (us * us) + b)).ln();
        let rhs = -mean + k * mean.ln() - ln_factorial(k);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

pub fn sample_poisson<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean == 0.0 {
        0
    } else if mean < 30.0 {
        poisson_inversion(mean, rng)
    } else {
        poisson_ptrs(mean, rng)
    }
}

/// Homogeneous Poisson point process of intensity `lambda` in `window`.
pub fn sample_ppp(window: &Box2, lambda: f64, stream: RngStream) -> Result<Vec<Point>, SamplingError> {
    if lambda < 0.0 {
        return Err(SamplingError::NegativeIntensity(lambda));
    }
    let mut rng = stream.rng();
    let n = sample_poisson(lambda * window.area(), &mut rng);
    let mut pts = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let x = rng.gen_range(window.lo.x..window.hi.x);
        let y = rng.gen_range(window.lo.y..window.hi.y);
        pts.push(Point::new(x, y));
    }
    Ok(pts)
}

/// One Pareto weight `W = U^{-1/beta} >= 1`.
pub fn sample_pareto<R: Rng>(beta: f64, rng: &mut R) -> Result<f64, SamplingError> {
    if beta <= 0.0 {
        return Err(SamplingError::NonPositiveBeta(beta));
    }
    let u: f64 = 1.0 - rng.gen_range(0.0..1.0); // U in (0, 1]
    Ok(pareto_from_uniform(beta, u))
}

pub fn pareto_from_uniform(beta: f64, u: f64) -> f64 {
    u.powf(-1.0 / beta)
}

/// Density of the product `W1 W2` of two independent Pareto(beta) weights:
/// `f(w) = beta^2 w^{-beta-1} log w` on `[1, inf)`.
pub fn product_weight_density(w: f64, beta: f64) -> f64 {
    if w < 1.0 {
        0.0
    } else {
        beta * beta * w.powf(-beta - 1.0) * w.ln()
    }
}

/// CDF of the product `W1 W2`: `P(W1 W2 <= w) = 1 - w^{-beta}(1 + beta log w)`.
pub fn product_weight_cdf(w: f64, beta: f64) -> f64 {
    if w < 1.0 {
        0.0
    } else {
        1.0 - w.powf(-beta) * (1.0 + beta * w.ln())
    }
}

/// A stick: segment of half-length `l ~ h` and angle `theta ~ F` centered at
/// `center`.
pub fn sample_stick<R: Rng>(center: Point, law: &StickLaw, rng: &mut R) -> Segment {
    let l = law.half_length.sample(rng);
    let theta = law.orientation.sample(rng);
    stick_segment(center, l, theta)
}

pub fn stick_segment(center: Point, half_length: f64, theta: f64) -> Segment {
    let dx = half_length * theta.cos();
    let dy = half_length * theta.sin();
    Segment::new(
        Point::new(center.x - dx, center.y - dy),
        Point::new(center.x + dx, center.y + dy),
    )
}
