//! End-to-end orchestration: detect bursts for every user, pair co-bursts,
//! label retweet bursts, and run the train/test prediction experiment.

use std::collections::{HashMap, HashSet};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use thiserror::Error;

use crate::burst::{
    detect_series_bursts, fit_decay, pair_cobursts, Burst, BurstError, CoBurst, CoBurstKind,
    DetectConfig,
};
use crate::eval::{run_experiment, EvalError, ExperimentConfig, FollowerBaseline, LabeledBurst, MagnitudePair, PrResult};
use crate::event::{SeriesKind, Timestamp, UserId};
use crate::model::{fit, observations_for_candidates, exposure_set, ModelError, ModelParams, ObservationConfig};
use crate::store::TemporalGraph;
use crate::textsim::TfIdfTable;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Burst(#[from] BurstError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("experiment needs at least {need} labeled bursts, got {got}")]
    TooFewBursts { need: usize, got: usize },
}

/// Detect bursts on all four series of every user. Users whose series never
/// reach `min_count` in any hour are skipped outright.
pub fn detect_all_bursts(
    g: &TemporalGraph,
    cfg: &DetectConfig,
) -> Result<Vec<Burst>, BurstError> {
    let users: Vec<UserId> = g.users().collect();
    let per_user: Vec<Result<Vec<Burst>, BurstError>> = users
        .par_iter()
        .map(|&u| {
            let mut out = Vec::new();
            for kind in SeriesKind::ALL {
                let series = g.hourly_series(u, kind);
                out.extend(detect_series_bursts(&series, cfg)?);
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per_user {
        all.extend(r?);
    }
    Ok(all)
}

/// Pair each user's trigger and response bursts.
pub fn all_cobursts(bursts: &[Burst]) -> Vec<CoBurst> {
    let mut by_user: HashMap<UserId, [Vec<Burst>; 4]> = HashMap::new();
    for b in bursts {
        let slot = match b.kind {
            SeriesKind::RetweetsReceived => 0,
            SeriesKind::FollowsReceived => 1,
            SeriesKind::TweetsAuthored => 2,
            SeriesKind::UnfollowsReceived => 3,
        };
        by_user.entry(b.user).or_default()[slot].push(b.clone());
    }
    let mut users: Vec<UserId> = by_user.keys().copied().collect();
    users.sort_unstable();
    let mut out = Vec::new();
    for u in users {
        let kinds = &by_user[&u];
        out.extend(pair_cobursts(&kinds[0], &kinds[1], &kinds[2], &kinds[3]));
    }
    out
}

/// Every detected retweet burst becomes a labeled instance; the label says
/// whether the co-burst pairing matched it with a follow burst. Ids are
/// stable across reruns (sorted by user then hour).
pub fn labeled_retweet_bursts(
    g: &TemporalGraph,
    bursts: &[Burst],
    cobursts: &[CoBurst],
) -> Vec<LabeledBurst> {
    let positives: HashSet<(UserId, usize)> = cobursts
        .iter()
        .filter(|cb| cb.kind == CoBurstKind::RetweetFollow)
        .map(|cb| (cb.trigger.user, cb.trigger.hour_start))
        .collect();
    let mut triggers: Vec<&Burst> = bursts
        .iter()
        .filter(|b| b.kind == SeriesKind::RetweetsReceived)
        .collect();
    triggers.sort_by_key(|b| (b.user, b.hour_start));
    let window = g.window();
    triggers
        .iter()
        .enumerate()
        .map(|(id, b)| LabeledBurst {
            id: id as u64,
            user: b.user,
            t0: window.hour_start(b.hour_start),
            t1: window.hour_start(b.hour_end + 1),
            label: positives.contains(&(b.user, b.hour_start)),
        })
        .collect()
}

/// Seeded 50/50 split into fit and held-out halves.
pub fn split_bursts(
    labeled: &[LabeledBurst],
    seed: u64,
) -> (Vec<LabeledBurst>, Vec<LabeledBurst>) {
    let mut shuffled: Vec<LabeledBurst> = labeled.to_vec();
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5117);
    shuffled.shuffle(&mut rng);
    let mid = shuffled.len() / 2;
    let test = shuffled.split_off(mid);
    (shuffled, test)
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub seed: u64,
    pub fit_window_hours: u32,
    pub follower_baseline: FollowerBaseline,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            seed: 0,
            fit_window_hours: 72,
            follower_baseline: FollowerBaseline::CountAtBurstStart,
        }
    }
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub results: Vec<PrResult>,
    pub params: ModelParams,
    pub n_train: usize,
    pub n_test: usize,
    pub n_observations: usize,
    pub positive_rate: f64,
    pub train_ids: HashSet<u64>,
}

/// Split the labeled bursts, fit the law on observations collected from the
/// fit half's exposure sets, and rank the held-out half under every method.
pub fn full_experiment(
    g: &TemporalGraph,
    table: &TfIdfTable,
    follow_burst_hours: HashMap<UserId, Vec<usize>>,
    labeled: &[LabeledBurst],
    plan: &ExperimentPlan,
) -> Result<ExperimentOutput, PipelineError> {
    if labeled.len() < 20 {
        return Err(PipelineError::TooFewBursts {
            need: 20,
            got: labeled.len(),
        });
    }
    let (train, test) = split_bursts(labeled, plan.seed);
    let items: Vec<(UserId, Timestamp, Vec<UserId>)> = train
        .iter()
        .map(|b| {
            let exposure = exposure_set(g, b.user, (b.t0, b.t1));
            (b.user, b.t0, exposure.users)
        })
        .collect();
    let obs_cfg = ObservationConfig {
        window_hours: plan.fit_window_hours,
        seed: plan.seed,
        ..Default::default()
    };
    let observations = observations_for_candidates(g, table, &items, &obs_cfg);
    let params = fit(&observations.obs, plan.fit_window_hours)?;
    let train_ids: HashSet<u64> = train.iter().map(|b| b.id).collect();
    let cfg = ExperimentConfig {
        seed: plan.seed,
        follower_baseline: plan.follower_baseline,
        follow_burst_hours,
        score: Default::default(),
    };
    let results = run_experiment(g, table, &params, &test, &train_ids, &cfg)?;
    let positives = test.iter().filter(|b| b.label).count();
    Ok(ExperimentOutput {
        results,
        params,
        n_train: train.len(),
        n_test: test.len(),
        n_observations: observations.obs.len(),
        positive_rate: positives as f64 / test.len() as f64,
        train_ids,
    })
}

/// Follow-burst start hours per user, for the prose variant of the follower
/// baseline.
pub fn follow_burst_hours(bursts: &[Burst]) -> HashMap<UserId, Vec<usize>> {
    let mut map: HashMap<UserId, Vec<usize>> = HashMap::new();
    for b in bursts {
        if b.kind == SeriesKind::FollowsReceived {
            map.entry(b.user).or_default().push(b.hour_start);
        }
    }
    for hours in map.values_mut() {
        hours.sort_unstable();
    }
    map
}

/// Per-user deseasonalized burst-magnitude pairs (retweets at h vs follows
/// at h+1) pooled across users, plus their Pearson correlation.
pub fn magnitude_correlation(
    g: &TemporalGraph,
) -> Result<(Vec<MagnitudePair>, Option<f64>), BurstError> {
    let users: Vec<UserId> = g.users().collect();
    let per_user: Vec<Result<Vec<MagnitudePair>, BurstError>> = users
        .par_iter()
        .map(|&u| {
            let rt = g.hourly_series(u, SeriesKind::RetweetsReceived);
            let fl = g.hourly_series(u, SeriesKind::FollowsReceived);
            if rt.max() == 0 || fl.max() == 0 {
                return Ok(Vec::new());
            }
            let rt_d = crate::burst::deseasonalize(&rt, fit_decay(&rt)?);
            let fl_d = crate::burst::deseasonalize(&fl, fit_decay(&fl)?);
            Ok(crate::eval::magnitude_pairs(&rt, &rt_d, &fl_d))
        })
        .collect();
    let mut pairs = Vec::new();
    for r in per_user {
        pairs.extend(r?);
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.retweet_sigma).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.follow_sigma).collect();
    let corr = crate::eval::pearson(&xs, &ys);
    Ok((pairs, corr))
}
