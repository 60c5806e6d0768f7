//! The follow-probability law and the burst predictor built on it.
//!
//! The probability that a 2-hop neighbor `j` follows `i` shortly after `i`
//! tweets is modeled as `p = C * exp(alpha * Y_ij)` with `Y_ij` the
//! standardized log tweet similarity. A retweet burst is scored by the
//! fraction of that probability mass sitting on the exposed 2-hop neighbors.

use rand::rngs::StdRng;
use rand::seq::index;
use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{Timestamp, UserId};
use crate::store::TemporalGraph;
use crate::textsim::{cosine, similarity_stats, y_score, TfIdfTable};

/// Probabilities are clamped at this value during fitting.
const P_CEIL: f64 = 1.0 - 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("all {0} observations carry the same label")]
    AllOneLabel(usize),
    #[error("complete separation: labels are perfectly ordered by Y")]
    CompleteSeparation,
    #[error("need at least {need} observations with both labels, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("Newton iterations did not converge (gradient norm {0:.3e})")]
    DidNotConverge(f64),
}

/// Fitted law constants plus the label horizon used for fitting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelParams {
    pub c: f64,
    pub alpha: f64,
    pub fit_window_hours: u32,
}

impl ModelParams {
    /// The constants reported for the full-scale fit.
    pub fn reference() -> Self {
        ModelParams {
            c: 3.32e-4,
            alpha: 0.6445,
            fit_window_hours: 72,
        }
    }
}

/// `min(C * exp(alpha * Y), 1)`.
pub fn p_hat(params: &ModelParams, y: f64) -> f64 {
    (params.c * (params.alpha * y).exp()).min(1.0)
}

/// One `(target, candidate)` pair: the candidate's standardized similarity
/// and whether it followed the target within the fit window.
#[derive(Debug, Clone, Copy)]
pub struct FollowObservation {
    pub target: UserId,
    pub candidate: UserId,
    pub y: f64,
    pub label: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct ObservationConfig {
    /// Horizon for the positive label, hours.
    pub window_hours: u32,
    /// Two-hop candidate cap per (target, time) pair; larger sets are
    /// uniformly sampled.
    pub candidate_cap: usize,
    pub seed: u64,
}

impl Default for ObservationConfig {
    fn default() -> Self {
        ObservationConfig {
            window_hours: 72,
            candidate_cap: 200_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Default)]
pub struct Observations {
    pub obs: Vec<FollowObservation>,
    /// Candidates skipped because Y was undefined (zero similarity or
    /// unusable stats).
    pub skipped_undefined: usize,
}

/// For each `(target, t)` pair, score every 2-hop candidate (uniformly
/// capped for hubs) and label it by whether it followed the target within
/// the window.
pub fn collect_observations(
    g: &TemporalGraph,
    table: &TfIdfTable,
    pairs: &[(UserId, Timestamp)],
    cfg: &ObservationConfig,
) -> Observations {
    let items: Vec<(UserId, Timestamp, Vec<UserId>)> = pairs
        .iter()
        .enumerate()
        .map(|(k, &(target, t))| {
            let mut candidates = g.two_hop_at(target, t);
            if candidates.len() > cfg.candidate_cap {
                let mut rng =
                    StdRng::seed_from_u64(cfg.seed ^ (k as u64).wrapping_mul(0x9e37_79b9));
                let idx = index::sample(&mut rng, candidates.len(), cfg.candidate_cap);
                let mut sampled: Vec<UserId> = idx.iter().map(|i| candidates[i]).collect();
                sampled.sort_unstable();
                candidates = sampled;
            }
            (target, t, candidates)
        })
        .collect();
    observations_for_candidates(g, table, &items, cfg)
}

/// Like [`collect_observations`], but with an explicit candidate list per
/// `(target, t)` item instead of the full 2-hop enumeration.
pub fn observations_for_candidates(
    g: &TemporalGraph,
    table: &TfIdfTable,
    items: &[(UserId, Timestamp, Vec<UserId>)],
    cfg: &ObservationConfig,
) -> Observations {
    let mut out = Observations::default();
    let horizon = i64::from(cfg.window_hours) * 3600;
    for (target, t, candidates) in items {
        let Ok(stats) = similarity_stats(g, *target, *t, table) else {
            out.skipped_undefined += 1;
            continue;
        };
        if stats.is_degenerate() {
            out.skipped_undefined += 1;
            continue;
        }
        let target_vec = table.get(*target);
        for &j in candidates {
            let s = cosine(target_vec, table.get(j));
            match y_score(s, &stats) {
                Ok(y) => out.obs.push(FollowObservation {
                    target: *target,
                    candidate: j,
                    y,
                    label: g.followed_within(j, *target, *t, horizon),
                }),
                Err(_) => out.skipped_undefined += 1,
            }
        }
    }
    out
}

/// Draw observations straight from the law: `Y ~ N(0,1)`,
/// `label ~ Bernoulli(min(C exp(alpha Y), 1))`.
pub fn simulate_observations(c: f64, alpha: f64, n: usize, seed: u64) -> Vec<FollowObservation> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let y: f64 = StandardNormal.sample(&mut rng);
            let p = (c * (alpha * y).exp()).min(1.0);
            FollowObservation {
                target: UserId(0),
                candidate: UserId(1),
                y,
                label: rng.random_range(0.0..1.0) < p,
            }
        })
        .collect()
}

/// Bernoulli log-likelihood at `(ln C, alpha)` with the ceiling clamp.
fn log_likelihood(obs: &[FollowObservation], ln_c: f64, alpha: f64) -> f64 {
    let eta_max = P_CEIL.ln();
    obs.iter()
        .map(|o| {
            let eta = (ln_c + alpha * o.y).min(eta_max);
            if o.label {
                eta
            } else {
                (-eta.exp()).ln_1p()
            }
        })
        .sum()
}

/// Maximum-likelihood fit of `(C, alpha)` by Newton iteration on
/// `(ln C, alpha)`, initialized from a least-squares line through binned
/// log positive rates.
pub fn fit(obs: &[FollowObservation], fit_window_hours: u32) -> Result<ModelParams, ModelError> {
    let n_pos = obs.iter().filter(|o| o.label).count();
    let n_neg = obs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(ModelError::AllOneLabel(obs.len()));
    }
    if obs.len() < 4 {
        return Err(ModelError::TooFewObservations {
            need: 4,
            got: obs.len(),
        });
    }
    let min_pos_y = obs
        .iter()
        .filter(|o| o.label)
        .map(|o| o.y)
        .fold(f64::INFINITY, f64::min);
    let max_pos_y = obs
        .iter()
        .filter(|o| o.label)
        .map(|o| o.y)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_neg_y = obs
        .iter()
        .filter(|o| !o.label)
        .map(|o| o.y)
        .fold(f64::INFINITY, f64::min);
    let max_neg_y = obs
        .iter()
        .filter(|o| !o.label)
        .map(|o| o.y)
        .fold(f64::NEG_INFINITY, f64::max);
    if min_pos_y > max_neg_y || max_pos_y < min_neg_y {
        return Err(ModelError::CompleteSeparation);
    }

    let (mut ln_c, mut alpha) = binned_init(obs);
    let mut ll = log_likelihood(obs, ln_c, alpha);
    let eta_max = P_CEIL.ln();
    let mut grad_norm = f64::INFINITY;
    for _ in 0..60 {
        let mut gb = 0.0;
        let mut ga = 0.0;
        let mut hbb = 0.0;
        let mut hba = 0.0;
        let mut haa = 0.0;
        for o in obs {
            let eta = ln_c + alpha * o.y;
            if eta >= eta_max {
                continue; // clamped: flat in the parameters
            }
            let p = eta.exp();
            let lab = f64::from(o.label);
            let r = (lab - p) / (1.0 - p);
            gb += r;
            ga += r * o.y;
            if !o.label {
                let w = p / ((1.0 - p) * (1.0 - p));
                hbb -= w;
                hba -= w * o.y;
                haa -= w * o.y * o.y;
            }
        }
        grad_norm = gb.abs().max(ga.abs());
        if grad_norm < 1e-10 {
            break;
        }
        let det = hbb * haa - hba * hba;
        if det.abs() < 1e-300 {
            return Err(ModelError::DidNotConverge(grad_norm));
        }
        // Newton step: -H^-1 g.
        let mut db = -(haa * gb - hba * ga) / det;
        let mut da = -(hbb * ga - hba * gb) / det;
        let step = db.abs().max(da.abs());
        if step < 1e-11 {
            break; // parameters stable well past any useful precision
        }
        if step > 1e-6 {
            // Backtrack only outside the quadratic basin; near the optimum
            // the likelihood difference drowns in float noise and the raw
            // Newton step is the right move on a concave problem.
            let mut halvings = 0;
            while halvings < 40 {
                let cand = log_likelihood(obs, ln_c + db, alpha + da);
                if cand >= ll - 1e-9 * ll.abs().max(1.0) {
                    break;
                }
                db *= 0.5;
                da *= 0.5;
                halvings += 1;
            }
        }
        ln_c += db;
        alpha += da;
        ll = log_likelihood(obs, ln_c, alpha);
    }
    if grad_norm > 1e-6 {
        return Err(ModelError::DidNotConverge(grad_norm));
    }
    Ok(ModelParams {
        c: ln_c.exp(),
        alpha,
        fit_window_hours,
    })
}

/// Least-squares line through `ln(positive rate)` per Y bin; falls back to a
/// flat line at the global rate.
fn binned_init(obs: &[FollowObservation]) -> (f64, f64) {
    let global = obs.iter().filter(|o| o.label).count() as f64 / obs.len() as f64;
    let fallback = (global.max(1e-12).ln(), 0.0);
    let lo = obs.iter().map(|o| o.y).fold(f64::INFINITY, f64::min);
    let hi = obs.iter().map(|o| o.y).fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        return fallback;
    }
    const BINS: usize = 24;
    let width = (hi - lo) / BINS as f64;
    let mut count = [0usize; BINS];
    let mut pos = [0usize; BINS];
    let mut y_sum = [0.0f64; BINS];
    for o in obs {
        let b = (((o.y - lo) / width) as usize).min(BINS - 1);
        count[b] += 1;
        pos[b] += usize::from(o.label);
        y_sum[b] += o.y;
    }
    let pts: Vec<(f64, f64)> = (0..BINS)
        .filter(|&b| count[b] >= 20 && pos[b] >= 1)
        .map(|b| {
            let mean_y = y_sum[b] / count[b] as f64;
            let rate = pos[b] as f64 / count[b] as f64;
            (mean_y, rate.ln())
        })
        .collect();
    if pts.len() < 2 {
        return fallback;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return fallback;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// The 2-hop neighbors of `target` (at the interval start) who follow
/// someone that retweeted `target` during the interval. Followership of the
/// retweeter is taken at the interval end, so mid-burst arrivals count.
#[derive(Debug, Clone)]
pub struct ExposureSet {
    pub target: UserId,
    pub interval: (Timestamp, Timestamp),
    /// Ascending by id.
    pub users: Vec<UserId>,
}

pub fn exposure_set(
    g: &TemporalGraph,
    target: UserId,
    interval: (Timestamp, Timestamp),
) -> ExposureSet {
    let (t0, t1) = interval;
    let mut retweeters: Vec<UserId> = g
        .retweets_of_in(target, t0, t1)
        .into_iter()
        .map(|(_, r)| r)
        .collect();
    retweeters.sort_unstable();
    retweeters.dedup();
    let mut exposed = vec![false; g.n_users()];
    for r in retweeters {
        for f in g.followers_at(r, t1) {
            exposed[f.index()] = true;
        }
    }
    let users = g
        .two_hop_at(target, t0)
        .into_iter()
        .filter(|j| exposed[j.index()])
        .collect();
    ExposureSet {
        target,
        interval,
        users,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScoreConfig {
    /// Two-hop enumeration cap; beyond it the denominator is estimated from
    /// a uniform sample scaled by the sampling fraction.
    pub two_hop_cap: usize,
    pub seed: u64,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig {
            two_hop_cap: 200_000,
            seed: 0,
        }
    }
}

/// Fraction of new-follow probability mass on the exposed 2-hop neighbors:
/// `sum_{j in N_RT} p_hat / sum_{j in N_2} p_hat`. `None` when the
/// denominator is empty or zero.
pub fn burst_score(
    params: &ModelParams,
    g: &TemporalGraph,
    table: &TfIdfTable,
    exposure: &ExposureSet,
) -> Option<f64> {
    burst_score_with(params, g, table, exposure, &ScoreConfig::default())
}

pub fn burst_score_with(
    params: &ModelParams,
    g: &TemporalGraph,
    table: &TfIdfTable,
    exposure: &ExposureSet,
    cfg: &ScoreConfig,
) -> Option<f64> {
    let target = exposure.target;
    let t0 = exposure.interval.0;
    let stats = similarity_stats(g, target, t0, table).ok()?;
    if stats.is_degenerate() {
        return None;
    }
    let target_vec = table.get(target);
    let phat_of = |j: UserId| -> Option<f64> {
        let s = cosine(target_vec, table.get(j));
        y_score(s, &stats).ok().map(|y| p_hat(params, y))
    };
    let two_hop = g.two_hop_at(target, t0);
    if two_hop.is_empty() {
        return None;
    }
    let (den_sum, scale) = if two_hop.len() > cfg.two_hop_cap {
        let mut rng = StdRng::seed_from_u64(cfg.seed ^ u64::from(target.0));
        let idx = index::sample(&mut rng, two_hop.len(), cfg.two_hop_cap);
        let sum: f64 = idx.iter().filter_map(|i| phat_of(two_hop[i])).sum();
        (sum, two_hop.len() as f64 / cfg.two_hop_cap as f64)
    } else {
        let sum: f64 = two_hop.iter().filter_map(|&j| phat_of(j)).sum();
        (sum, 1.0)
    };
    let den = den_sum * scale;
    if den <= 0.0 {
        return None;
    }
    let num: f64 = exposure.users.iter().filter_map(|&j| phat_of(j)).sum();
    Some((num / den).min(1.0))
}
