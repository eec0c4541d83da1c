//! Monte Carlo estimation: event probabilities with Wilson intervals,
//! thinning-coupled intensity ladders, longest-edge tail scans, and
//! critical-intensity bisection. All estimators are deterministic functions
//! of `(config, master_seed)` regardless of worker count: trial `t` draws
//! from stream `t` of the master seed and results are reduced in trial
//! order.

use crate::config::{ConfigError, EventSpec, ModelConfig, ModelKind};
use crate::events::EventError;
use crate::geometry::{Box2, Point, Segment};
use crate::models::{
    build_rcm_keyed, build_sticks_keyed, connection_probability, ConnectionFunction, ModelError,
    Realization,
};
use crate::sampling::{
    sample_pareto, sample_poisson, sample_ppp, stick_segment, HalfLengthLaw, RngStream,
    SamplingError,
};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, thiserror::Error)]
pub enum EstimateError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error("invalid estimation parameter: {0}")]
    InvalidParameter(String),
}

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion at 95% confidence.
/// Always contains the point estimate; `(0, 1)` when there are no trials.
pub fn wilson_ci(hits: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = hits as f64 / n;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (WILSON_Z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub trials: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub master_seed: u64,
    pub wall_seconds: f64,
}

impl EstimateResult {
    pub fn from_counts(trials: u64, hits: u64, master_seed: u64, wall_seconds: f64) -> Self {
        assert!(hits <= trials);
        let p_hat = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        let (ci_low, ci_high) = wilson_ci(hits, trials);
        EstimateResult { trials, hits, p_hat, ci_low, ci_high, master_seed, wall_seconds }
    }
}

/// A validated model with its derived padding and truncation, ready to
/// sample worlds. Trial substreams: 0 points, 1 weights, 2 edges or sticks,
/// 3 thinning marks.
///
/// ```
/// use contperc::analysis::PreparedModel;
/// use contperc::config::{ModelConfig, ModelKind};
/// use contperc::sampling::{HalfLengthLaw, OrientationLaw, RngStream, StickLaw};
///
/// let cfg = ModelConfig {
///     model: ModelKind::Sticks,
///     lambda: 0.8,
///     connection: None,
///     weight_beta: None,
///     stick: Some(StickLaw {
///         half_length: HalfLengthLaw::Uniform { lo: 0.2, hi: 0.6 },
///         orientation: OrientationLaw::Uniform,
///     }),
///     core_half: 5.0,
///     padding: None,
///     truncation: None,
/// };
/// let prepared = PreparedModel::new(&cfg).unwrap();
/// let r = prepared.sample(RngStream::new(1, 0)).unwrap();
/// assert_eq!(r.sticks.len(), r.points.len()); // one stick per center
/// assert!(r.edges.is_empty());
/// ```
pub struct PreparedModel {
    pub cfg: ModelConfig,
    pub padding: f64,
    pub truncation: Option<f64>,
    pub warnings: Vec<String>,
}

impl PreparedModel {
    pub fn new(cfg: &ModelConfig) -> Result<Self, EstimateError> {
        let warnings = cfg.validate()?;
        let padding = cfg.effective_padding()?;
        let truncation = cfg.effective_truncation()?;
        Ok(PreparedModel { cfg: cfg.clone(), padding, truncation, warnings })
    }

    pub fn window(&self) -> Box2 {
        self.cfg.core_window()
    }

    pub fn padded_window(&self) -> Box2 {
        self.window().grow(self.padding)
    }

    /// One world at the configured intensity.
    pub fn sample(&self, trial: RngStream) -> Result<Realization, EstimateError> {
        let pts = sample_ppp(&self.padded_window(), self.cfg.lambda, trial.substream(0))?;
        self.assemble(pts, None, trial)
    }

    /// Attach marks and edges to an already-sampled point set. `keys` are
    /// stable per-point identities (master point indices under thinning), so
    /// coupled subsets reuse weights, pair uniforms, and stick marks exactly.
    fn assemble(
        &self,
        points: Vec<Point>,
        keys: Option<&[u64]>,
        trial: RngStream,
    ) -> Result<Realization, EstimateError> {
        match self.cfg.model {
            ModelKind::Sticks => {
                let law = self.cfg.stick.as_ref().expect("validated stick law");
                Ok(build_sticks_keyed(
                    points,
                    keys,
                    law,
                    self.window(),
                    self.padding,
                    trial.substream(2),
                )?)
            }
            _ => {
                let cf = self.cfg.connection.as_ref().expect("validated connection");
                let weights = if cf.needs_weights() {
                    let beta = self.cfg.weight_beta.expect("validated beta");
                    let wstream = trial.substream(1);
                    let mut ws = Vec::with_capacity(points.len());
                    for i in 0..points.len() {
                        let key = keys.map_or(i as u64, |k| k[i]);
                        ws.push(sample_pareto(beta, &mut wstream.substream(key).rng())?);
                    }
                    Some(ws)
                } else {
                    None
                };
                Ok(build_rcm_keyed(
                    points,
                    keys,
                    cf,
                    weights,
                    self.truncation,
                    self.window(),
                    self.padding,
                    trial.substream(2),
                )?)
            }
        }
    }
}

/// Estimate `P(event)` over i.i.d. trials. Deterministic in
/// `(cfg, event, trials, master_seed)`; the worker count never changes the
/// outcome of any trial.
pub fn estimate_event_probability(
    cfg: &ModelConfig,
    event: &EventSpec,
    trials: u64,
    master_seed: u64,
) -> Result<EstimateResult, EstimateError> {
    let prepared = PreparedModel::new(cfg)?;
    event.validate_against(cfg)?;
    let enhanced = cfg.enhanced();
    let start = Instant::now();
    let outcomes: Result<Vec<bool>, EstimateError> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let r = prepared.sample(RngStream::new(master_seed, t))?;
            Ok(event.evaluate_in(&r, enhanced)?)
        })
        .collect();
    let hits = outcomes?.iter().filter(|&&b| b).count() as u64;
    Ok(EstimateResult::from_counts(trials, hits, master_seed, start.elapsed().as_secs_f64()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderResult {
    pub lambdas: Vec<f64>,
    pub estimates: Vec<EstimateResult>,
    /// True when no trial's outcome ever flips from hit to miss as the
    /// intensity grows. Exact thinning coupling makes this hold with zero
    /// violations for increasing events.
    pub trialwise_monotone: bool,
}

/// Estimate the event along an intensity ladder with one coupled point
/// process per trial: points are sampled at the top intensity and each rung
/// keeps point `i` iff its thinning mark is below `lambda / lambda_max`.
/// Marks, weights, and pair uniforms are keyed by master point index, so
/// rungs share them exactly and hits are trialwise nested for increasing
/// events.
pub fn estimate_lambda_ladder(
    cfg: &ModelConfig,
    lambdas: &[f64],
    event: &EventSpec,
    trials: u64,
    master_seed: u64,
) -> Result<LadderResult, EstimateError> {
    if lambdas.is_empty() {
        return Err(EstimateError::InvalidParameter("empty intensity ladder".into()));
    }
    if lambdas.windows(2).any(|w| !(w[0] <= w[1])) || lambdas.iter().any(|l| !(*l >= 0.0)) {
        return Err(EstimateError::InvalidParameter(
            "intensity ladder must be nonnegative and non-decreasing".into(),
        ));
    }
    let lambda_max = *lambdas.last().unwrap();
    let mut top_cfg = cfg.clone();
    top_cfg.lambda = lambda_max;
    let prepared = PreparedModel::new(&top_cfg)?;
    event.validate_against(cfg)?;
    let enhanced = cfg.enhanced();
    let start = Instant::now();
    let rows: Result<Vec<Vec<bool>>, EstimateError> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial = RngStream::new(master_seed, t);
            let pts = sample_ppp(&prepared.padded_window(), lambda_max, trial.substream(0))?;
            let thin_stream = trial.substream(3);
            let marks: Vec<f64> = (0..pts.len())
                .map(|i| thin_stream.substream(i as u64).unit_uniform())
                .collect();
            let mut row = Vec::with_capacity(lambdas.len());
            for &lam in lambdas {
                let mut sub = Vec::new();
                let mut keys = Vec::new();
                for (i, p) in pts.iter().enumerate() {
                    if marks[i] * lambda_max < lam {
                        sub.push(*p);
                        keys.push(i as u64);
                    }
                }
                let r = prepared.assemble(sub, Some(&keys), trial)?;
                row.push(event.evaluate_in(&r, enhanced)?);
            }
            Ok(row)
        })
        .collect();
    let rows = rows?;
    let wall = start.elapsed().as_secs_f64();
    let mut monotone = true;
    let mut hits = vec![0u64; lambdas.len()];
    for row in &rows {
        for k in 0..row.len() {
            if row[k] {
                hits[k] += 1;
            }
            if k + 1 < row.len() && row[k] && !row[k + 1] {
                monotone = false;
            }
        }
    }
    let estimates = hits
        .iter()
        .map(|&h| EstimateResult::from_counts(trials, h, master_seed, wall))
        .collect();
    Ok(LadderResult { lambdas: lambdas.to_vec(), estimates, trialwise_monotone: monotone })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailScanRow {
    pub s: f64,
    /// Edge-length threshold `s^tau` (half-length for sticks).
    pub threshold: f64,
    /// The threshold exceeds a hard cutoff of the configured model, so the
    /// probability is structurally zero; no trials are run.
    pub censored: bool,
    pub estimate: EstimateResult,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailScanResult {
    pub t: f64,
    pub tau: f64,
    pub rows: Vec<TailScanRow>,
    pub warnings: Vec<String>,
}

/// Sampling margin used by the tail scan around the observation box, in
/// units of the length threshold. Segments long enough to matter but
/// anchored further out than this are vanishingly rare under the scan's
/// tail hypotheses.
const SCAN_PADDING_FACTOR: f64 = 3.0;

/// Scan `P(longest edge meeting the box of side t*s exceeds s^tau)` over a
/// grid of scales. Only the sub-threshold-free part of the model matters, so
/// the sampler visits candidate long pairs (or long sticks) directly instead
/// of building whole graphs: cells of side `s^tau` bound the per-pair
/// connection probability and a geometric skip walks the candidate pairs.
/// Hypothesis violations produce warnings and the scan still runs.
pub fn longest_edge_tail_scan(
    cfg: &ModelConfig,
    t: f64,
    tau: f64,
    s_grid: &[f64],
    trials: u64,
    master_seed: u64,
) -> Result<TailScanResult, EstimateError> {
    let mut warnings = cfg.validate()?;
    if !(t > 0.0) || !(tau > 0.0) || !tau.is_finite() || !t.is_finite() {
        return Err(EstimateError::InvalidParameter(format!(
            "tail scan needs finite t > 0 and tau > 0, got t={t}, tau={tau}"
        )));
    }
    if s_grid.iter().any(|s| !(*s > 1.0)) {
        return Err(EstimateError::InvalidParameter("scales must be > 1".into()));
    }
    // tail hypothesis: tau large enough that the threshold outruns the
    // longest edge near the box
    match cfg.model {
        ModelKind::Sticks => {
            if let Some(law) = &cfg.stick {
                if let HalfLengthLaw::PowerLaw { c, .. } = law.half_length {
                    if c <= 1.0 || tau <= 2.0 / (c - 1.0) {
                        warnings.push(format!(
                            "tau = {tau} violates tau > 2/(c-1) = {} for the stick tail",
                            2.0 / (c - 1.0)
                        ));
                    }
                }
            }
        }
        _ => {
            if let Some(g) = cfg.g_spec()? {
                if let crate::analysis::TailDecay::Polynomial(p) = g.tail_decay() {
                    if p <= 2.0 {
                        warnings.push(format!(
                            "connection tail exponent {p} <= 2: the longest-edge tail need not vanish"
                        ));
                    } else if tau <= 2.0 / (p - 2.0) {
                        warnings.push(format!(
                            "tau = {tau} violates tau > 2/(p-2) = {} for tail exponent {p}",
                            2.0 / (p - 2.0)
                        ));
                    }
                }
            }
        }
    }
    let mut rows = Vec::with_capacity(s_grid.len());
    for (row_id, &s) in s_grid.iter().enumerate() {
        let threshold = s.powf(tau);
        let region = Box2::centered(t * s / 2.0);
        let censored = scan_censored(cfg, threshold);
        let estimate = if censored {
            EstimateResult::from_counts(0, 0, master_seed, 0.0)
        } else {
            match cfg.model {
                ModelKind::Sticks => {
                    scan_sticks_row(cfg, &region, threshold, trials, master_seed, row_id as u64)?
                }
                _ => scan_pairs_row(cfg, &region, threshold, trials, master_seed, row_id as u64)?,
            }
        };
        rows.push(TailScanRow { s, threshold, censored, estimate });
    }
    Ok(TailScanResult { t, tau, rows, warnings })
}

/// Is the probability structurally zero under a hard model cutoff? Only
/// explicit truncation radii and bounded-support laws censor; the derived
/// default truncation is a bias-control device for whole-graph estimates and
/// is deliberately not applied to the tail sampler.
fn scan_censored(cfg: &ModelConfig, threshold: f64) -> bool {
    if let Some(tr) = cfg.truncation {
        if threshold >= tr {
            return true;
        }
    }
    match cfg.model {
        ModelKind::Sticks => {
            cfg.stick.as_ref().map_or(false, |law| law.half_length.survival(threshold) == 0.0)
        }
        _ => match cfg.connection {
            Some(ConnectionFunction::Indicator { r0 }) => threshold >= r0,
            _ => false,
        },
    }
}

/// Upper bound on the connection probability between any point of two cells,
/// given both cell max-weights and the minimum admissible distance.
fn pair_probability_bound(cf: &ConnectionFunction, dmin: f64, wa: f64, wb: f64) -> f64 {
    match *cf {
        ConnectionFunction::Indicator { r0 } => {
            if dmin <= r0 {
                1.0
            } else {
                0.0
            }
        }
        ConnectionFunction::PowerMin { c } => dmin.powf(-c).min(1.0),
        ConnectionFunction::Exponential { mu } => (-mu * dmin).exp(),
        ConnectionFunction::Inhomogeneous { eta, alpha } => {
            (eta * wa * wb / dmin.powf(alpha)).min(1.0)
        }
    }
}

/// One scan row for the point-pair models. Candidate pairs are walked per
/// cell pair with a geometric skip at the cell-pair probability bound, then
/// thinned to the exact per-pair probability; a pair hits when its distance
/// exceeds the threshold and the segment meets the observation box.
fn scan_pairs_row(
    cfg: &ModelConfig,
    region: &Box2,
    threshold: f64,
    trials: u64,
    master_seed: u64,
    row_id: u64,
) -> Result<EstimateResult, EstimateError> {
    let cf = cfg.connection.as_ref().expect("validated connection");
    let beta = cfg.weight_beta;
    let lambda = cfg.lambda;
    let padded = region.grow(SCAN_PADDING_FACTOR * threshold);
    let cell = threshold;
    let ncells = ((padded.hi.x - padded.lo.x) / cell).ceil() as i64;
    let trunc = cfg.truncation;
    let start = Instant::now();
    let outcomes: Result<Vec<bool>, EstimateError> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = RngStream::new(master_seed, trial).substream(1000 + row_id).rng();
            let n = sample_poisson(lambda * padded.area(), &mut rng) as usize;
            let mut pts = Vec::with_capacity(n);
            for _ in 0..n {
                pts.push(Point::new(
                    rng.gen_range(padded.lo.x..padded.hi.x),
                    rng.gen_range(padded.lo.y..padded.hi.y),
                ));
            }
            let weights: Option<Vec<f64>> = match beta {
                Some(b) if cf.needs_weights() => {
                    let mut ws = Vec::with_capacity(n);
                    for _ in 0..n {
                        ws.push(sample_pareto(b, &mut rng)?);
                    }
                    Some(ws)
                }
                _ => None,
            };
            // bucket points; track the max weight per cell for the bound
            let mut cells: std::collections::HashMap<(i64, i64), (Vec<usize>, f64)> =
                std::collections::HashMap::new();
            for (i, p) in pts.iter().enumerate() {
                let cx = (((p.x - padded.lo.x) / cell) as i64).min(ncells - 1);
                let cy = (((p.y - padded.lo.y) / cell) as i64).min(ncells - 1);
                let e = cells.entry((cx, cy)).or_insert((Vec::new(), 1.0));
                e.0.push(i);
                if let Some(ws) = &weights {
                    e.1 = e.1.max(ws[i]);
                }
            }
            let mut keys: Vec<(i64, i64)> = cells.keys().copied().collect();
            keys.sort_unstable();
            for (a_idx, &ka) in keys.iter().enumerate() {
                for &kb in &keys[a_idx..] {
                    let (ia, wa) = &cells[&ka];
                    let (ib, wb) = &cells[&kb];
                    let gapx = ((ka.0 - kb.0).abs() - 1).max(0) as f64 * cell;
                    let gapy = ((ka.1 - kb.1).abs() - 1).max(0) as f64 * cell;
                    let dmin = (gapx * gapx + gapy * gapy).sqrt().max(threshold);
                    let p_max = pair_probability_bound(cf, dmin, *wa, *wb);
                    if p_max <= 0.0 {
                        continue;
                    }
                    let total: u64 = if ka == kb {
                        (ia.len() * ia.len()) as u64
                    } else {
                        (ia.len() * ib.len()) as u64
                    };
                    let ln_skip = (1.0 - p_max).ln(); // -inf when p_max = 1 => dense walk
                    let mut m: i64 = -1;
                    loop {
                        let u: f64 = rng.gen_range(0.0..1.0);
                        let jump = if ln_skip == f64::NEG_INFINITY {
                            0
                        } else {
                            ((1.0 - u).ln() / ln_skip).floor() as i64
                        };
                        m += 1 + jump.max(0);
                        if m as u64 >= total {
                            break;
                        }
                        let (i, j) = if ka == kb {
                            let (i, j) = ((m as usize) / ia.len(), (m as usize) % ia.len());
                            if j <= i {
                                continue; // unordered same-cell pairs only
                            }
                            (ia[i], ia[j])
                        } else {
                            (ia[(m as usize) / ib.len()], ib[(m as usize) % ib.len()])
                        };
                        let d = pts[i].dist(&pts[j]);
                        if d <= threshold {
                            continue;
                        }
                        if let Some(tr) = trunc {
                            if d > tr {
                                continue;
                            }
                        }
                        let (w1, w2) = match &weights {
                            Some(ws) => (ws[i], ws[j]),
                            None => (1.0, 1.0),
                        };
                        let p = connection_probability(cf, d, w1, w2)?;
                        if rng.gen_range(0.0..1.0) * p_max < p {
                            let seg = Segment::new(pts[i], pts[j]);
                            if region.intersects_segment(&seg) {
                                return Ok(true);
                            }
                        }
                    }
                }
            }
            Ok(false)
        })
        .collect();
    let hits = outcomes?.iter().filter(|&&b| b).count() as u64;
    Ok(EstimateResult::from_counts(trials, hits, master_seed, start.elapsed().as_secs_f64()))
}

/// Half-length sample conditioned on exceeding `thr` (caller guarantees the
/// conditional event has positive probability).
fn sample_half_length_above<R: Rng>(law: &HalfLengthLaw, thr: f64, rng: &mut R) -> f64 {
    match *law {
        HalfLengthLaw::Uniform { lo, hi } => rng.gen_range(lo.max(thr)..hi),
        HalfLengthLaw::PowerLaw { c, l0 } => {
            let u: f64 = 1.0 - rng.gen_range(0.0..1.0);
            l0.max(thr) * u.powf(-1.0 / (c - 1.0))
        }
        // memoryless beyond the threshold
        HalfLengthLaw::Exponential { rate } => {
            thr.max(0.0) - (1.0 - rng.gen_range(0.0..1.0f64)).ln() / rate
        }
        HalfLengthLaw::Fixed { value } => value,
    }
}

/// One scan row for the stick model: the sticks with half-length above the
/// threshold form a Poisson subprocess of intensity `lambda * survival`, so
/// only those are sampled, with tail-conditioned half-lengths.
fn scan_sticks_row(
    cfg: &ModelConfig,
    region: &Box2,
    threshold: f64,
    trials: u64,
    master_seed: u64,
    row_id: u64,
) -> Result<EstimateResult, EstimateError> {
    let law = cfg.stick.as_ref().expect("validated stick law").clone();
    let surv = law.half_length.survival(threshold);
    let padded = region.grow(SCAN_PADDING_FACTOR * threshold);
    let mean = cfg.lambda * padded.area() * surv;
    let start = Instant::now();
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = RngStream::new(master_seed, trial).substream(1000 + row_id).rng();
            let n = sample_poisson(mean, &mut rng);
            for _ in 0..n {
                let center = Point::new(
                    rng.gen_range(padded.lo.x..padded.hi.x),
                    rng.gen_range(padded.lo.y..padded.hi.y),
                );
                let l = sample_half_length_above(&law.half_length, threshold, &mut rng);
                let theta = law.orientation.sample(&mut rng);
                if region.intersects_segment(&stick_segment(center, l, theta)) {
                    return 1u64;
                }
            }
            0u64
        })
        .sum();
    Ok(EstimateResult::from_counts(trials, hits, master_seed, start.elapsed().as_secs_f64()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalSearchResult {
    pub bracket_low: f64,
    pub bracket_high: f64,
    pub p_star: f64,
    pub iterations: u32,
    /// Every estimate made, in order, with its intensity.
    pub estimates: Vec<(f64, EstimateResult)>,
    /// False when the bracket could not be separated or the trial budget ran
    /// out before the bracket reached the tolerance.
    pub converged: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
enum SideOfStar {
    Below,
    Above,
    Straddle,
}

fn classify(est: &EstimateResult, p_star: f64) -> SideOfStar {
    if est.ci_high < p_star {
        SideOfStar::Below
    } else if est.ci_low > p_star {
        SideOfStar::Above
    } else {
        SideOfStar::Straddle
    }
}

/// Bisect for the intensity where `P(event) = p_star` at this scale. The
/// bracket moves only when the Wilson interval at the midpoint excludes
/// `p_star`; otherwise the midpoint trial count doubles, all within a total
/// trial budget. An unseparable bracket or an exhausted budget yields an
/// inconclusive result with diagnostics rather than an error.
#[allow(clippy::too_many_arguments)]
pub fn bisect_critical_intensity(
    cfg: &ModelConfig,
    event: &EventSpec,
    p_star: f64,
    bracket: (f64, f64),
    trials: u64,
    tolerance: f64,
    max_total_trials: u64,
    master_seed: u64,
) -> Result<CriticalSearchResult, EstimateError> {
    if !(0.0 < p_star && p_star < 1.0) {
        return Err(EstimateError::InvalidParameter(format!("p_star must be in (0,1), got {p_star}")));
    }
    let (mut lo, mut hi) = bracket;
    if !(0.0 <= lo && lo < hi) || !(tolerance > 0.0) || trials == 0 {
        return Err(EstimateError::InvalidParameter(
            "need 0 <= bracket_low < bracket_high, tolerance > 0, trials > 0".into(),
        ));
    }
    let mut spent = 0u64;
    let mut estimates: Vec<(f64, EstimateResult)> = Vec::new();
    let mut diagnostics: Vec<String> = Vec::new();
    let mut iterations = 0u32;

    let estimate_at = |lam: f64,
                           n: u64,
                           spent: &mut u64,
                           estimates: &mut Vec<(f64, EstimateResult)>|
     -> Result<EstimateResult, EstimateError> {
        let mut c = cfg.clone();
        c.lambda = lam;
        let est = estimate_event_probability(&c, event, n, master_seed)?;
        *spent += n;
        estimates.push((lam, est.clone()));
        Ok(est)
    };

    // endpoint separation, doubling trials within budget
    for (lam, want_below) in [(lo, true), (hi, false)] {
        let mut n = trials;
        loop {
            if spent + n > max_total_trials {
                diagnostics.push(format!(
                    "budget exhausted separating the bracket endpoint {lam} from p* = {p_star}"
                ));
                return Ok(CriticalSearchResult {
                    bracket_low: lo,
                    bracket_high: hi,
                    p_star,
                    iterations,
                    estimates,
                    converged: false,
                    diagnostics,
                });
            }
            let est = estimate_at(lam, n, &mut spent, &mut estimates)?;
            match (classify(&est, p_star), want_below) {
                (SideOfStar::Below, true) | (SideOfStar::Above, false) => break,
                (SideOfStar::Above, true) | (SideOfStar::Below, false) => {
                    diagnostics.push(format!(
                        "bracket endpoint {lam} lies on the wrong side of p* = {p_star} \
                         (estimate {} with CI [{}, {}])",
                        est.p_hat, est.ci_low, est.ci_high
                    ));
                    return Ok(CriticalSearchResult {
                        bracket_low: lo,
                        bracket_high: hi,
                        p_star,
                        iterations,
                        estimates,
                        converged: false,
                        diagnostics,
                    });
                }
                (SideOfStar::Straddle, _) => n *= 2,
            }
        }
    }

    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let mut n = trials;
        loop {
            if spent + n > max_total_trials {
                diagnostics.push(format!(
                    "budget exhausted at midpoint {mid} with bracket [{lo}, {hi}]"
                ));
                return Ok(CriticalSearchResult {
                    bracket_low: lo,
                    bracket_high: hi,
                    p_star,
                    iterations,
                    estimates,
                    converged: false,
                    diagnostics,
                });
            }
            let est = estimate_at(mid, n, &mut spent, &mut estimates)?;
            match classify(&est, p_star) {
                SideOfStar::Below => {
                    lo = mid;
                    break;
                }
                SideOfStar::Above => {
                    hi = mid;
                    break;
                }
                SideOfStar::Straddle => n *= 2,
            }
        }
        iterations += 1;
    }

    Ok(CriticalSearchResult {
        bracket_low: lo,
        bracket_high: hi,
        p_star,
        iterations,
        estimates,
        converged: true,
        diagnostics,
    })
}
