//! Deterministic numerics: moment integrals of the connection profile, the
//! heavy-tail kernel bound, path-counting (block) bound series, tail mass
//! for truncation bias, and the expected-connection decay table.

use super::gspec::{AnalysisError, GSpec, TailDecay};
use super::quad::{integrate_half_line, integrate_tail};
use crate::sampling::RngStream;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub j: u32,
    pub value: f64,
    pub abs_error_bound: f64,
    pub g: GSpec,
}

/// `int_0^inf r^j g(r) dr` by adaptive quadrature, with the divergent cases
/// rejected up front.
///
/// ```
/// use contperc::analysis::{moment_integral, GSpec};
/// // int_0^inf r e^{-2r} dr = 1/4
/// let m = moment_integral(&GSpec::Exponential { mu: 2.0 }, 1).unwrap();
/// assert!((m.value - 0.25).abs() < 1e-10);
/// // min(1, r^-2) has a divergent first moment
/// assert!(moment_integral(&GSpec::PowerMin { c: 2.0 }, 1).is_err());
/// ```
pub fn moment_integral(g: &GSpec, j: u32) -> Result<MomentReport, AnalysisError> {
    if !g.moment_converges(j) {
        return Err(AnalysisError::Divergent(format!(
            "moment j={j} of {g:?}: tail decays too slowly"
        )));
    }
    let f = move |r: f64| r.powi(j as i32) * g.eval(r);
    let q = integrate_half_line(&f, &g.kinks(), 1e-11);
    Ok(MomentReport { j, value: q.value, abs_error_bound: q.abs_error, g: *g })
}

/// Expected number weight of discarded long edges per unit intensity-squared
/// area: `2 pi int_radius^inf r g(r) dr`.
pub fn tail_mass(g: &GSpec, radius: f64) -> Result<f64, AnalysisError> {
    if radius <= 0.0 {
        return Err(AnalysisError::InvalidParameter(format!(
            "tail mass needs a positive radius, got {radius}"
        )));
    }
    match g.tail_decay() {
        TailDecay::Compact(r0) if radius >= r0 => return Ok(0.0),
        TailDecay::Polynomial(p) if p <= 2.0 => {
            return Err(AnalysisError::Divergent(format!(
                "tail mass of {g:?}: r g(r) not integrable"
            )));
        }
        _ => {}
    }
    let f = move |r: f64| r * g.eval(r);
    Ok(2.0 * PI * integrate_tail(&f, radius, 1e-11).value)
}

/// The heavy-tail kernel bound
/// `1_{t<1} + c (1 + (beta v 2) log t) t^{-(beta/2 ^ 1)}` for `t >= 1`, with
/// `c = (1 + 2/(beta-2))^{1/2}` for `beta != 2` and `c = 1` at `beta = 2`.
/// The constant is real only for `beta >= 2`.
pub fn deijfen_bound(t: f64, beta: f64) -> f64 {
    assert!(t > 0.0 && beta > 0.0);
    if t < 1.0 {
        return 1.0;
    }
    let c = if beta == 2.0 { 1.0 } else { (1.0 + 2.0 / (beta - 2.0)).sqrt() };
    c * (1.0 + beta.max(2.0) * t.ln()) * t.powf(-(beta / 2.0).min(1.0))
}

/// Per-block contribution of a size-`2m+2` block:
/// `m = 0` gives `2 pi M1`; `m >= 1` gives `2^{m+1} pi M2^2 M3^{m-1}` where
/// `Mj` is the j-th moment of `g`.
pub fn block_contribution(m: u32, g: &GSpec) -> Result<f64, AnalysisError> {
    if m == 0 {
        return Ok(2.0 * PI * moment_integral(g, 1)?.value);
    }
    let m2 = moment_integral(g, 2)?.value;
    let m3 = moment_integral(g, 3)?.value;
    Ok(2f64.powi(m as i32 + 1) * PI * m2 * m2 * m3.powi(m as i32 - 1))
}

/// Number of block structures with `k` block boundaries on an `n`-step
/// path: `binom(n-1, k)`.
pub fn block_structures_count(n: u32, k: u32) -> u128 {
    assert!(n >= 1 && k <= n - 1, "need 1 <= n and 0 <= k <= n-1");
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - 1 - i) / (i + 1);
    }
    acc
}

/// Coefficient of a block consuming `gap` path steps (`gap = 2m+1` odd):
/// the combinatorial factor `2^{m+1} pi` of the uniform-moment series.
fn gap_coefficient(gap: u32) -> f64 {
    debug_assert!(gap % 2 == 1);
    2f64.powi(((gap + 1) / 2) as i32) * PI
}

/// Same gap, with the block's own moment factors attached.
fn gap_coefficient_moments(gap: u32, m1: f64, m2: f64, m3: f64) -> f64 {
    debug_assert!(gap % 2 == 1);
    if gap == 1 {
        2.0 * PI * m1
    } else {
        let m = (gap - 1) / 2;
        2f64.powi(m as i32 + 1) * PI * m2 * m2 * m3.powi(m as i32 - 1)
    }
}

/// `T_n = sum over odd-gap compositions of n of the product of gap
/// coefficients`, by the renewal recursion.
fn uniform_series(n_max: u32) -> Vec<f64> {
    let mut t = vec![0.0f64; n_max as usize + 1];
    t[0] = 1.0;
    for n in 1..=n_max as usize {
        let mut acc = 0.0;
        let mut g = 1usize;
        while g <= n {
            acc += gap_coefficient(g as u32) * t[n - g];
            g += 2;
        }
        t[n] = acc;
    }
    t
}

fn moment_series(n_max: u32, m1: f64, m2: f64, m3: f64) -> Vec<f64> {
    let mut t = vec![0.0f64; n_max as usize + 1];
    t[0] = 1.0;
    for n in 1..=n_max as usize {
        let mut acc = 0.0;
        let mut g = 1usize;
        while g <= n {
            acc += gap_coefficient_moments(g as u32, m1, m2, m3) * t[n - g];
            g += 2;
        }
        t[n] = acc;
    }
    t
}

/// Growth root of the uniform series: the unique positive solution of
/// `2 pi z / (1 - 2 z^2) = 1` is `z* = (-pi + sqrt(pi^2 + 2)) / 2`, and the
/// series grows like `(1/z*)^n`.
pub fn uniform_series_growth() -> f64 {
    let z = (-PI + (PI * PI + 2.0).sqrt()) / 2.0;
    1.0 / z
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSeries {
    pub lambda: f64,
    pub n_max: u32,
    /// Path-counting upper bound per path length: `lambda^n C1^{4n} T_n`
    /// exactly enumerated up to `n = 12`, continued by `(C lambda)^n`.
    pub per_n: Vec<f64>,
    /// Sharper variant with each block's own moment factors in place of the
    /// uniform `C1^{4n}` envelope; its first entry is `lambda 2 pi M1`.
    pub refined_per_n: Vec<f64>,
    /// Geometric-rate constant: `C = C1^4 / z*`.
    pub constant: f64,
    /// `C1 = max(M1, M2, M3)`.
    pub c1: f64,
}

pub const EXACT_ENUMERATION_LIMIT: u32 = 12;

/// Upper-bound series for the enhanced percolation probability. For each
/// path length `n` the bound is `lambda^n C1^{4n} T_n`; beyond the exact
/// enumeration limit the closed geometric envelope `(C lambda)^n` is used.
pub fn theta_upper_bound(lambda: f64, n_max: u32, g: &GSpec) -> Result<BoundSeries, AnalysisError> {
    if lambda < 0.0 {
        return Err(AnalysisError::InvalidParameter(format!(
            "intensity must be nonnegative, got {lambda}"
        )));
    }
    if n_max < 1 {
        return Err(AnalysisError::InvalidParameter("need n_max >= 1".into()));
    }
    let m1 = moment_integral(g, 1)?.value;
    let m2 = moment_integral(g, 2)?.value;
    let m3 = moment_integral(g, 3)?.value;
    let c1 = m1.max(m2).max(m3);
    let constant = c1.powi(4) * uniform_series_growth();
    let enum_to = n_max.min(EXACT_ENUMERATION_LIMIT);
    let t = uniform_series(enum_to);
    let r = moment_series(enum_to, m1, m2, m3);
    let mut per_n = Vec::with_capacity(n_max as usize);
    let mut refined_per_n = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        if n <= enum_to {
            let ln = lambda.powi(n as i32);
            per_n.push(ln * c1.powi(4 * n as i32) * t[n as usize]);
            refined_per_n.push(ln * r[n as usize]);
        } else {
            per_n.push((constant * lambda).powi(n as i32));
            refined_per_n.push((constant * lambda).powi(n as i32));
        }
    }
    Ok(BoundSeries { lambda, n_max, per_n, refined_per_n, constant, c1 })
}

/// `max P(A_i) >= 1 - (1 - P(union))^{1/kappa}` for `kappa` events of equal
/// probability (positively associated increasing events).
pub fn square_root_trick_bound(p_union: f64, kappa: u32) -> f64 {
    assert!((0.0..=1.0).contains(&p_union) && kappa >= 1);
    1.0 - (1.0 - p_union).powf(1.0 / kappa as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionIntegralCheck {
    pub mc_value: f64,
    pub mc_sigma: f64,
    pub analytic: f64,
    pub samples: u64,
}

/// Monte Carlo check of the size-4 block geometry: the measure of placements
/// of a displaced segment crossing a fixed segment of length `ell`, with the
/// moving endpoint confined to a half plane, against the closed form
/// `2 ell int r^2 g(r) dr`.
///
/// Importance sampling: displacement length `r` from a per-kind proposal,
/// angle uniform, base point uniform in the reachability box
/// `[-r, ell + r] x [0, r]`; crossing decided by the segment predicate.
pub fn size4_region_integral_check(
    g: &GSpec,
    ell: f64,
    samples: u64,
    seed: u64,
) -> Result<RegionIntegralCheck, AnalysisError> {
    use crate::geometry::{segments_intersect_decision, Point, Segment};
    if ell <= 0.0 {
        return Err(AnalysisError::InvalidParameter(format!("need ell > 0, got {ell}")));
    }
    let analytic = 2.0 * ell * moment_integral(g, 2)?.value;
    // proposal density q(r) on (0, inf) with an easy inverse CDF and a
    // bounded weight r g(r) (ell + 2r) r / q(r)
    enum Proposal {
        Uniform { hi: f64 },
        Exp { mu: f64 },
        // mix: U(0,1) with prob 1/2, else Pareto with survival r^{-a}
        PowerMix { a: f64 },
    }
    let proposal = match *g {
        GSpec::Indicator { r0 } => Proposal::Uniform { hi: r0 },
        GSpec::Exponential { mu } => Proposal::Exp { mu },
        GSpec::PowerMin { c } => {
            if c <= 4.0 {
                return Err(AnalysisError::Divergent(
                    "second moment too heavy for the sampler: need c > 4".into(),
                ));
            }
            Proposal::PowerMix { a: c - 4.0 }
        }
        GSpec::InhomogeneousMean { .. } => {
            return Err(AnalysisError::InvalidParameter(
                "region integral check supports distance-only profiles".into(),
            ));
        }
    };
    let mut rng = RngStream::new(seed, 0).rng();
    let base = Segment::new(Point::new(0.0, 0.0), Point::new(ell, 0.0));
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..samples {
        let u: f64 = rng.gen_range(0.0..1.0);
        let (r, q) = match proposal {
            Proposal::Uniform { hi } => (u * hi, 1.0 / hi),
            Proposal::Exp { mu } => {
                let r = -(1.0 - u).ln() / mu;
                (r, mu * (-mu * r).exp())
            }
            Proposal::PowerMix { a } => {
                if u < 0.5 {
                    (rng.gen_range(0.0..1.0), 0.5)
                } else {
                    let v: f64 = 1.0 - rng.gen_range(0.0..1.0);
                    let r = v.powf(-1.0 / a);
                    (r, 0.5 * a * r.powf(-a - 1.0))
                }
            }
        };
        if r <= 0.0 || q <= 0.0 {
            sum2 += 0.0;
            continue;
        }
        let theta = rng.gen_range(0.0..2.0 * PI);
        let w = (r * theta.cos(), r * theta.sin());
        let x = Point::new(rng.gen_range(-r..ell + r), rng.gen_range(0.0..r));
        let moving = Segment::new(x, Point::new(x.x + w.0, x.y + w.1));
        let box_area = (ell + 2.0 * r) * r;
        // dw = r dr dtheta; importance weight = g r / (q(r) * (1/2pi) * (1/area))
        let est = if segments_intersect_decision(&base, &moving) {
            g.eval(r) * r * 2.0 * PI * box_area / q
        } else {
            0.0
        };
        sum += est;
        sum2 += est * est;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0);
    Ok(RegionIntegralCheck { mc_value: mean, mc_sigma: (var / n).sqrt(), analytic, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub dist: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    /// Fitted polynomial decay exponent (positive, i.e. value ~ d^{-fit}).
    pub fitted_exponent: f64,
    /// Structural prediction `min(alpha, alpha beta)`.
    pub expected_exponent: f64,
}

/// Tabulate the weight-averaged connection probability on a distance grid
/// and fit its polynomial decay exponent.
///
/// The profile carries a `log d` correction whenever the `alpha beta` branch
/// dominates, so a raw log-log regression is biased at desk scales. Local
/// slopes between consecutive grid points are instead extrapolated linearly
/// in `1/log d` to their limit.
pub fn expected_connection_vs_distance(
    eta: f64,
    alpha: f64,
    beta: f64,
    dist_grid: &[f64],
) -> Result<DecayTable, AnalysisError> {
    if dist_grid.len() < 3 {
        return Err(AnalysisError::InvalidParameter(
            "need at least 3 grid distances for the decay fit".into(),
        ));
    }
    let mut grid = dist_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &d in &grid {
        if d.powf(alpha) <= eta {
            return Err(AnalysisError::InvalidParameter(format!(
                "grid distance {d} violates d^alpha > eta"
            )));
        }
    }
    let rows: Vec<DecayRow> = grid
        .iter()
        .map(|&d| DecayRow { dist: d, value: super::gspec::expected_connection(eta, alpha, beta, d) })
        .collect();
    // local slopes at geometric midpoints, regressed on x = 1/log(mid);
    // the intercept at x = 0 is the asymptotic exponent
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for w in rows.windows(2) {
        let slope = (w[1].value.ln() - w[0].value.ln()) / (w[1].dist.ln() - w[0].dist.ln());
        let mid = (w[0].dist * w[1].dist).sqrt();
        xs.push(1.0 / mid.ln());
        ys.push(slope);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let intercept = my - b * mx;
    Ok(DecayTable {
        rows,
        fitted_exponent: -intercept,
        expected_exponent: alpha.min(alpha * beta),
    })
}
