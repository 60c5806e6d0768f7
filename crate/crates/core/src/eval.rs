//! Evaluation: precision-recall scoring of burst predictors against
//! baselines, burst-magnitude correlation, and dataset-level descriptive
//! statistics.

use std::collections::{HashMap, HashSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::burst::DeseasonalizedSeries;
use crate::event::{EventKind, HourlySeries, Timestamp, UserId};
use crate::model::{burst_score_with, exposure_set, ModelParams, ScoreConfig};
use crate::store::TemporalGraph;
use crate::textsim::TfIdfTable;

/// How far back a retweet still counts as a recent exposure.
pub const EXPOSURE_RECENCY_HOURS: i64 = 24;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("burst {0} appears in both the training and evaluation sets")]
    TrainTestOverlap(u64),
    #[error("no bursts to evaluate")]
    NoBursts,
    #[error("no positive labels; average precision undefined")]
    NoPositives,
}

/// A retweet burst to be ranked. The label comes from the co-burst pairing,
/// never from a scorer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LabeledBurst {
    pub id: u64,
    pub user: UserId,
    /// Trigger interval `[t0, t1)` in absolute time.
    pub t0: Timestamp,
    pub t1: Timestamp,
    pub label: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Method {
    Model,
    RetweetExposures,
    RetweetCount,
    FollowerCount,
    Random,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Model,
        Method::RetweetExposures,
        Method::RetweetCount,
        Method::FollowerCount,
        Method::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Model => "model",
            Method::RetweetExposures => "retweet_exposures",
            Method::RetweetCount => "retweet_count",
            Method::FollowerCount => "follower_count",
            Method::Random => "random",
        }
    }
}

/// Which quantity the follower baseline ranks by. The default ranks by
/// follower count at the burst start; the alternative ranks by the number of
/// earlier follow bursts the user had.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FollowerBaseline {
    #[default]
    CountAtBurstStart,
    PreviousFollowBursts,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub follower_baseline: FollowerBaseline,
    /// Follow-burst start hours per user; only consulted by
    /// [`FollowerBaseline::PreviousFollowBursts`].
    pub follow_burst_hours: HashMap<UserId, Vec<usize>>,
    pub score: ScoreConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct PrResult {
    pub method: Method,
    pub average_precision: f64,
    pub n: usize,
    pub n_positive: usize,
    /// Bursts the method could not score; ranked last.
    pub n_undefined: usize,
    /// `(recall, precision)` after each rank.
    pub curve: Vec<(f64, f64)>,
}

/// Mean precision at the rank of each positive. `None` without positives.
pub fn average_precision(ranked_labels: &[bool]) -> Option<f64> {
    let n_pos = ranked_labels.iter().filter(|&&l| l).count();
    if n_pos == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, &label) in ranked_labels.iter().enumerate() {
        if label {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Some(sum / n_pos as f64)
}

/// Order items by descending score with seeded tie-breaking; undefined
/// scores rank last. Returns the permutation.
pub fn rank_by_score(scores: &[Option<f64>], seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    let mut rng = StdRng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    // Stable sort after the shuffle: equal scores keep their shuffled order.
    order.sort_by(|&a, &b| match (scores[a], scores[b]) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    order
}

fn pr_curve(ranked_labels: &[bool]) -> Vec<(f64, f64)> {
    let n_pos = ranked_labels.iter().filter(|&&l| l).count().max(1);
    let mut hits = 0usize;
    ranked_labels
        .iter()
        .enumerate()
        .map(|(k, &label)| {
            hits += usize::from(label);
            (hits as f64 / n_pos as f64, hits as f64 / (k + 1) as f64)
        })
        .collect()
}

/// Rank the held-out bursts under every method and compute the area under
/// the precision-recall curve for each. `train_ids` are the bursts whose
/// observations fed the model fit; any overlap is a hard error.
pub fn run_experiment(
    g: &TemporalGraph,
    table: &TfIdfTable,
    params: &ModelParams,
    bursts: &[LabeledBurst],
    train_ids: &HashSet<u64>,
    cfg: &ExperimentConfig,
) -> Result<Vec<PrResult>, EvalError> {
    if bursts.is_empty() {
        return Err(EvalError::NoBursts);
    }
    for b in bursts {
        if train_ids.contains(&b.id) {
            return Err(EvalError::TrainTestOverlap(b.id));
        }
    }
    let labels: Vec<bool> = bursts.iter().map(|b| b.label).collect();
    if labels.iter().all(|&l| !l) {
        return Err(EvalError::NoPositives);
    }
    let mut rng = StdRng::seed_from_u64(cfg.seed ^ 0x5eed);
    let random_scores: Vec<Option<f64>> = bursts
        .iter()
        .map(|_| Some(rng.random_range(0.0..1.0)))
        .collect();

    let mut results = Vec::new();
    for method in Method::ALL {
        let scores: Vec<Option<f64>> = match method {
            Method::Random => random_scores.clone(),
            _ => bursts
                .iter()
                .map(|b| score_burst(g, table, params, b, method, cfg))
                .collect(),
        };
        let order = rank_by_score(&scores, cfg.seed ^ method_salt(method));
        let ranked: Vec<bool> = order.iter().map(|&i| labels[i]).collect();
        let ap = average_precision(&ranked).ok_or(EvalError::NoPositives)?;
        results.push(PrResult {
            method,
            average_precision: ap,
            n: bursts.len(),
            n_positive: labels.iter().filter(|&&l| l).count(),
            n_undefined: scores.iter().filter(|s| s.is_none()).count(),
            curve: pr_curve(&ranked),
        });
    }
    Ok(results)
}

fn method_salt(method: Method) -> u64 {
    match method {
        Method::Model => 1,
        Method::RetweetExposures => 2,
        Method::RetweetCount => 3,
        Method::FollowerCount => 4,
        Method::Random => 5,
    }
}

fn score_burst(
    g: &TemporalGraph,
    table: &TfIdfTable,
    params: &ModelParams,
    b: &LabeledBurst,
    method: Method,
    cfg: &ExperimentConfig,
) -> Option<f64> {
    match method {
        Method::Model => {
            let es = exposure_set(g, b.user, (b.t0, b.t1));
            burst_score_with(params, g, table, &es, &cfg.score)
        }
        Method::RetweetExposures => {
            Some(exposure_set(g, b.user, (b.t0, b.t1)).users.len() as f64)
        }
        Method::RetweetCount => Some(g.retweets_of_in(b.user, b.t0, b.t1).len() as f64),
        Method::FollowerCount => match cfg.follower_baseline {
            FollowerBaseline::CountAtBurstStart => Some(g.indegree_at(b.user, b.t0) as f64),
            FollowerBaseline::PreviousFollowBursts => {
                let burst_hour = g.window().hour_of(b.t0)?;
                let prior = cfg
                    .follow_burst_hours
                    .get(&b.user)
                    .map(|hours| hours.iter().filter(|&&h| h < burst_hour).count())
                    .unwrap_or(0);
                Some(prior as f64)
            }
        },
        Method::Random => unreachable!("random scores are drawn up front"),
    }
}

/// `(retweet sigma at h, follow sigma at h+1)` for hours with at least one
/// retweet and defined residuals on both series.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MagnitudePair {
    pub user: UserId,
    pub hour: usize,
    pub retweet_sigma: f64,
    pub follow_sigma: f64,
}

pub fn magnitude_pairs(
    retweet_series: &HourlySeries,
    retweet_d: &DeseasonalizedSeries,
    follow_d: &DeseasonalizedSeries,
) -> Vec<MagnitudePair> {
    if retweet_d.sigma <= 0.0 || follow_d.sigma <= 0.0 {
        return Vec::new();
    }
    let n = retweet_series.counts.len();
    (0..n.saturating_sub(1))
        .filter(|&h| {
            retweet_series.counts[h] >= 1 && retweet_d.defined[h] && follow_d.defined[h + 1]
        })
        .map(|h| MagnitudePair {
            user: retweet_series.user,
            hour: h,
            retweet_sigma: retweet_d.residuals[h] / retweet_d.sigma,
            follow_sigma: follow_d.residuals[h + 1] / follow_d.sigma,
        })
        .collect()
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeBin {
    pub degree_lo: usize,
    pub degree_hi: usize,
    pub n_users: usize,
    pub mean_follows: f64,
    pub mean_unfollows: f64,
    pub mean_tweets: f64,
    pub mean_retweets: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TweetActivityBin {
    pub tweets_lo: usize,
    pub tweets_hi: usize,
    pub n_users: usize,
    pub mean_unfollows: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryStats {
    pub n_users: usize,
    pub initial_edges: usize,
    pub follows: u64,
    pub unfollows: u64,
    pub tweets: u64,
    pub retweets: u64,
    /// New edges relative to the initial edge set.
    pub churn_added_frac: f64,
    /// Removed edges relative to the initial edge set.
    pub churn_removed_frac: f64,
    pub churn_total_frac: f64,
    /// Unfollows per follow.
    pub deletion_creation_ratio: f64,
    /// Share of follow+unfollow events received by the top 20% of users by
    /// initial indegree.
    pub top_quintile_share: f64,
    /// Follows preceded by a recent retweet exposure of the followee.
    pub exposure_driven_follow_frac: f64,
    pub degree_bins: Vec<DegreeBin>,
    pub unfollows_by_tweets: Vec<TweetActivityBin>,
}

/// Dataset-level summary over the full window.
pub fn descriptive_stats(g: &TemporalGraph) -> SummaryStats {
    let counts = *g.counts();
    let initial = g.initial_edge_count();
    let n_users = g.n_users();
    let start = g.window().start;

    let mut indegree0 = vec![0usize; n_users];
    let mut follows_recv = vec![0u64; n_users];
    let mut unfollows_recv = vec![0u64; n_users];
    let mut retweets_recv = vec![0u64; n_users];
    let mut tweets_auth = vec![0u64; n_users];
    for u in g.users() {
        indegree0[u.index()] = g.indegree_at(u, start);
    }
    for ev in g.events() {
        match ev.kind {
            EventKind::Follow => follows_recv[ev.target.expect("follow").index()] += 1,
            EventKind::Unfollow => unfollows_recv[ev.target.expect("unfollow").index()] += 1,
            EventKind::Retweet => retweets_recv[ev.target.expect("retweet").index()] += 1,
            EventKind::Tweet => tweets_auth[ev.actor.index()] += 1,
        }
    }

    let mut by_degree: Vec<usize> = (0..n_users).collect();
    by_degree.sort_by_key(|&i| std::cmp::Reverse(indegree0[i]));
    let top_n = n_users.div_ceil(5);
    let churn_events = counts.follows + counts.unfollows;
    let top_events: u64 = by_degree
        .iter()
        .take(top_n)
        .map(|&i| follows_recv[i] + unfollows_recv[i])
        .sum();
    let top_quintile_share = if churn_events > 0 {
        top_events as f64 / churn_events as f64
    } else {
        0.0
    };

    let exposure_driven = g
        .events()
        .iter()
        .filter(|ev| ev.kind == EventKind::Follow)
        .filter(|ev| follow_is_exposure_driven(g, ev.actor, ev.target.expect("follow"), ev.ts))
        .count() as u64;
    let exposure_driven_follow_frac = if counts.follows > 0 {
        exposure_driven as f64 / counts.follows as f64
    } else {
        0.0
    };

    // Powers-of-two degree bins, then one bin for the zero-degree users.
    let mut degree_bins = Vec::new();
    let max_deg = indegree0.iter().copied().max().unwrap_or(0);
    let mut edges = vec![(0usize, 0usize)];
    let mut lo = 1usize;
    while lo <= max_deg {
        let hi = (lo * 2 - 1).min(max_deg.max(lo));
        edges.push((lo, hi));
        lo *= 2;
    }
    for (lo, hi) in edges {
        let users: Vec<usize> = (0..n_users)
            .filter(|&i| indegree0[i] >= lo && indegree0[i] <= hi)
            .collect();
        if users.is_empty() {
            continue;
        }
        let k = users.len() as f64;
        degree_bins.push(DegreeBin {
            degree_lo: lo,
            degree_hi: hi,
            n_users: users.len(),
            mean_follows: users.iter().map(|&i| follows_recv[i] as f64).sum::<f64>() / k,
            mean_unfollows: users.iter().map(|&i| unfollows_recv[i] as f64).sum::<f64>() / k,
            mean_tweets: users.iter().map(|&i| tweets_auth[i] as f64).sum::<f64>() / k,
            mean_retweets: users.iter().map(|&i| retweets_recv[i] as f64).sum::<f64>() / k,
        });
    }

    let tweet_edges = [
        (0usize, 0usize),
        (1, 2),
        (3, 5),
        (6, 10),
        (11, 20),
        (21, 50),
        (51, usize::MAX),
    ];
    let unfollows_by_tweets = tweet_edges
        .iter()
        .filter_map(|&(lo, hi)| {
            let users: Vec<usize> = (0..n_users)
                .filter(|&i| (tweets_auth[i] as usize) >= lo && (tweets_auth[i] as usize) <= hi)
                .collect();
            if users.is_empty() {
                return None;
            }
            let k = users.len() as f64;
            Some(TweetActivityBin {
                tweets_lo: lo,
                tweets_hi: hi,
                n_users: users.len(),
                mean_unfollows: users.iter().map(|&i| unfollows_recv[i] as f64).sum::<f64>()
                    / k,
            })
        })
        .collect();

    let initial_f = initial.max(1) as f64;
    SummaryStats {
        n_users,
        initial_edges: initial,
        follows: counts.follows,
        unfollows: counts.unfollows,
        tweets: counts.tweets,
        retweets: counts.retweets,
        churn_added_frac: counts.follows as f64 / initial_f,
        churn_removed_frac: counts.unfollows as f64 / initial_f,
        churn_total_frac: (counts.follows + counts.unfollows) as f64 / initial_f,
        deletion_creation_ratio: if counts.follows > 0 {
            counts.unfollows as f64 / counts.follows as f64
        } else {
            0.0
        },
        top_quintile_share,
        exposure_driven_follow_frac,
        degree_bins,
        unfollows_by_tweets,
    }
}

/// Post-hoc path query: did the follower see a retweet of the followee in
/// the 24 hours before following, via someone they followed at retweet time?
pub fn follow_is_exposure_driven(
    g: &TemporalGraph,
    follower: UserId,
    followee: UserId,
    t: Timestamp,
) -> bool {
    let lo = Timestamp(t.0 - EXPOSURE_RECENCY_HOURS * 3600);
    g.retweets_of_in(followee, lo, Timestamp(t.0 + 1))
        .into_iter()
        .any(|(rt_ts, retweeter)| {
            retweeter != follower && g.edge_live_at(follower, retweeter, rt_ts)
        })
}
