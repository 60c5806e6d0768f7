//! Deterministic synthetic event-log generator with ground truth.
//!
//! The generated month mirrors the statistical regularities the pipeline is
//! built to measure: a heavy-tailed initial follower graph, diurnal
//! background follow/unfollow churn scaling with indegree (about one
//! deletion per three creations), interest-driven tweets that give users
//! TF-IDF-comparable documents, retweet diffusion that triggers a tunable
//! fraction of new follows, and planted retweet bursts.
//!
//! Users live on a toroidal interest plane; the true similarity between two
//! users is `exp(-eta * distance)`. Followers sit at a tight distance band
//! from the followee (drawn from a half-plane arc so two-hop neighborhoods
//! do not fold back onto the user), which makes follower log-similarity
//! normal by construction. A coupled planted burst wires a cohort of quiet
//! "latent" users very close to the target onto one amplifier follower;
//! when the amplifier retweets, the cohort is exposed for the first time
//! and follows with probability `min(C* exp(alpha* Y_true), 1)`, which is
//! what turns some retweet bursts into follow bursts. Ordinary two-hop
//! neighbors count as already exposed by the target's regular activity, so
//! uncoupled bursts reach no fresh similar audience.
//!
//! Everything runs off per-phase seeded generators, so one config maps to
//! byte-identical output files.

use std::collections::{HashMap, HashSet};
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use rand_distr::{Distribution, Exp, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{EventKind, TimeWindow};
use crate::store::RawEvent;
use crate::textsim::stats_from_similarities;
use crate::UserId;

/// Window start, aligned to a whole hour.
pub const BASE_TS: i64 = 1_699_999_200;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LawParams {
    pub c: f64,
    pub alpha: f64,
}

/// One planted retweet burst. `user: None` lets the generator pick from the
/// high-degree pool.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantedBurst {
    #[serde(default)]
    pub user: Option<u32>,
    pub hour: u32,
    /// Retweets injected during the trigger hour.
    pub magnitude: u32,
    /// Interest radius of the exposed cohort around the target; smaller
    /// means more similar.
    pub cohort_boost: f64,
    pub couples_follow: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_users: u32,
    pub n_days: u32,
    pub seed: u64,
    /// Multiplicative hour-of-day activity shape, mean about 1.
    pub diurnal_profile: Vec<f64>,
    /// Per-user per-hour follow arrival scale at degree 0.
    pub base_follow_rate: f64,
    /// Received-event rates scale with `(1 + indegree)^exponent`.
    pub degree_rate_exponent: f64,
    /// Unfollows per follow.
    pub deletion_ratio: f64,
    /// Initial indegree tail exponent.
    pub indegree_exponent: f64,
    pub min_indegree: u32,
    /// Side length of the square toroidal interest plane; token topics are
    /// its unit cells.
    pub n_topics: u32,
    pub tokens_per_topic: u32,
    pub common_tokens: u32,
    /// True similarity is `exp(-eta * interest distance)`.
    pub similarity_decay: f64,
    /// Follower interest distance: folded normal around this mean.
    pub follower_distance_mean: f64,
    pub follower_distance_sd: f64,
    /// Spread of tweet token topics around the author's interest point.
    pub tweet_topic_spread: f64,
    pub mean_tweets_per_user: f64,
    pub tweets_degree_exponent: f64,
    pub tokens_per_tweet: u32,
    /// Background retweets per tweet at degree 0.
    pub retweet_rate_base: f64,
    /// Probability that a background retweet exposure schedules a follow.
    pub exposure_follow_prob: f64,
    /// Target fraction of follows driven by recent retweet exposure.
    pub exposure_fraction: f64,
    /// Law applied to exposed users during planted bursts.
    pub law: LawParams,
    /// Latent users reserved per coupled burst for the cohort (upper
    /// bound; the effective cohort scales with the target's degree).
    pub cohort_size: u32,
    /// Latent users reserved per coupled burst for spillover arrivals.
    pub spillover_pool: u32,
    /// Out-of-2-hop arrivals per scheduled law follow in coupled bursts.
    pub spillover_per_follow: f64,
    pub spillover_radius: f64,
    pub hot_token: String,
    pub hot_rate_coupled: f64,
    pub hot_rate_uncoupled: f64,
    /// Planted bursts land on users whose initial degree sits inside this
    /// band; small egos keep the burst's relative impact visible.
    pub min_burst_user_degree: usize,
    pub max_burst_user_degree: usize,
    pub planted: Vec<PlantedBurst>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let profile: Vec<f64> = (0..24)
            .map(|h| 1.0 + 0.8 * (2.0 * std::f64::consts::PI * (h as f64 - 9.0) / 24.0).sin())
            .collect();
        SynthConfig {
            n_users: 2000,
            n_days: 14,
            seed: 1,
            diurnal_profile: profile,
            base_follow_rate: 0.003,
            degree_rate_exponent: 0.3,
            deletion_ratio: 1.0 / 3.0,
            indegree_exponent: 2.2,
            min_indegree: 3,
            n_topics: 24,
            tokens_per_topic: 12,
            common_tokens: 40,
            similarity_decay: 1.0,
            follower_distance_mean: 4.0,
            follower_distance_sd: 0.5,
            tweet_topic_spread: 1.2,
            mean_tweets_per_user: 20.0,
            tweets_degree_exponent: 0.3,
            tokens_per_tweet: 8,
            retweet_rate_base: 0.02,
            exposure_follow_prob: 0.07,
            exposure_fraction: 0.21,
            law: LawParams {
                c: 0.02,
                alpha: 0.6445,
            },
            cohort_size: 44,
            spillover_pool: 12,
            spillover_per_follow: 0.5,
            spillover_radius: 1.5,
            hot_token: "quakewire".to_string(),
            hot_rate_coupled: 0.557,
            hot_rate_uncoupled: 0.2316,
            min_burst_user_degree: 30,
            max_burst_user_degree: 90,
            planted: Vec::new(),
        }
    }
}

impl SynthConfig {
    /// The desk-scale configuration used by the end-to-end tests: planted
    /// bursts on high-degree users, 21% of them coupled to follow bursts.
    pub fn standard(n_users: u32, n_days: u32, seed: u64) -> Self {
        // Cohort provisioning and the burst-user degree band scale with the
        // population so small scenes stay feasible.
        let big = n_users >= 8000;
        let mut cfg = SynthConfig {
            n_users,
            n_days,
            seed,
            cohort_size: if big { 44 } else { 16 },
            spillover_pool: if big { 12 } else { 8 },
            min_burst_user_degree: if big { 30 } else { 12 },
            max_burst_user_degree: if big { 90 } else { 60 },
            ..Default::default()
        };
        let n_hours = n_days * 24;
        let n_bursts = (n_users / 16).max(8);
        let mut rng = StdRng::seed_from_u64(mix(seed, 0xb1));
        let mut planted = Vec::with_capacity(n_bursts as usize);
        for k in 0..n_bursts {
            let coupled = (k as f64 + 0.5) / n_bursts as f64 <= 0.21;
            let hour = rng.random_range(72..n_hours.saturating_sub(40));
            // Nearly identical supports with a small mean shift: the raw
            // magnitude hints at coupling without giving it away.
            let magnitude = if coupled {
                9 + rng.random_range(0..11u32)
            } else {
                8 + rng.random_range(0..12u32)
            };
            planted.push(PlantedBurst {
                user: None,
                hour,
                magnitude,
                cohort_boost: 0.45,
                couples_follow: coupled,
            });
        }
        // Interleave coupled/uncoupled in hour order.
        planted.sort_by_key(|p| p.hour);
        cfg.planted = planted;
        cfg
    }

    /// Background only; used to measure detector false positives.
    pub fn null_model(n_users: u32, n_days: u32, seed: u64) -> Self {
        SynthConfig {
            n_users,
            n_days,
            seed,
            planted: Vec::new(),
            ..Default::default()
        }
    }

    pub fn window(&self) -> TimeWindow {
        TimeWindow::new(BASE_TS, BASE_TS + i64::from(self.n_days) * 86_400)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: &str| Err(SynthError::InvalidConfig(msg.to_string()));
        if self.n_users < 20 {
            return fail("need at least 20 users");
        }
        if self.n_days < 4 {
            return fail("need at least 4 days");
        }
        if self.diurnal_profile.len() != 24 {
            return fail("diurnal profile must have 24 entries");
        }
        if self.diurnal_profile.iter().any(|&p| p < 0.0 || !p.is_finite()) {
            return fail("diurnal profile must be non-negative and finite");
        }
        if self.diurnal_profile.iter().sum::<f64>() <= 0.0 {
            return fail("diurnal profile must not be all zero");
        }
        if !(0.0..1.0).contains(&self.deletion_ratio) {
            return fail("deletion ratio must be in [0, 1)");
        }
        for f in [
            self.base_follow_rate,
            self.retweet_rate_base,
            self.mean_tweets_per_user,
            self.spillover_per_follow,
            self.similarity_decay,
            self.follower_distance_sd,
            self.tweet_topic_spread,
        ] {
            if f < 0.0 || !f.is_finite() {
                return fail("rates must be non-negative and finite");
            }
        }
        if !(self.law.c > 0.0 && self.law.c <= 1.0) {
            return fail("law C must be in (0, 1]");
        }
        if self.n_topics < 4 {
            return fail("need at least 4 topics");
        }
        if self.follower_distance_mean <= 0.0
            || self.follower_distance_mean >= f64::from(self.n_topics) / 2.0
        {
            return fail("follower distance mean must fit on the interest circle");
        }
        let n_hours = self.n_days * 24;
        for (k, p) in self.planted.iter().enumerate() {
            if p.hour >= n_hours {
                return fail(&format!("planted burst {k} hour {} outside window", p.hour));
            }
            if p.magnitude == 0 {
                return fail(&format!("planted burst {k} has zero magnitude"));
            }
            if p.cohort_boost <= 0.0 || !p.cohort_boost.is_finite() {
                return fail(&format!("planted burst {k} cohort radius must be positive"));
            }
            if let Some(u) = p.user {
                if u >= self.n_users {
                    return fail(&format!("planted burst {k} user {u} out of range"));
                }
            }
        }
        Ok(())
    }

    /// Stable digest of the serialized config (FNV-1a).
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

fn mix(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Everything the generator knows that the pipeline must rediscover.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub config_digest: String,
    pub window_start: i64,
    pub window_end: i64,
    pub law: LawParams,
    pub counts: GtCounts,
    pub bursts: Vec<GtBurst>,
    pub exposures: Vec<GtExposure>,
    /// Per-user topic mixtures (interest profile over topics), indexed by
    /// user.
    pub mixtures: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct GtCounts {
    pub follows: u64,
    pub unfollows: u64,
    pub tweets: u64,
    pub retweets: u64,
    /// Follows emitted through a retweet-exposure path.
    pub exposure_driven_follows: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GtBurst {
    pub id: u32,
    pub user: String,
    pub hour: u32,
    pub trigger_ts: i64,
    pub magnitude: u32,
    pub coupled: bool,
    pub hot_token: bool,
    pub n_exposed: u32,
    pub n_cohort: u32,
    /// Law-driven follows scheduled during the burst.
    pub scheduled_follows: u32,
    pub spillover_follows: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GtExposure {
    pub burst_id: u32,
    pub user: u32,
    pub y_true: f64,
    pub followed: bool,
}

pub struct SynthOutput {
    pub snapshot: Vec<(String, String)>,
    pub events: Vec<RawEvent>,
    pub truth: GroundTruth,
}

#[derive(Clone, Copy, PartialEq)]
enum Origin {
    Background,
    ExposureScheduled,
    Law,
    Spillover,
}

struct Intent {
    ts: i64,
    phase: u8,
    counter: u32,
    kind: EventKind,
    actor: u32,
    target: Option<u32>,
    text: Option<String>,
    origin: Origin,
}

fn user_name(u: u32) -> String {
    format!("u{u:05}")
}

fn poisson_draw(rng: &mut StdRng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).map(|p| p.sample(rng) as u64).unwrap_or(0)
}

fn normal(rng: &mut StdRng) -> f64 {
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

/// Interest geometry: users on a square torus, similarity decaying with
/// Euclidean distance.
struct InterestSpace {
    pos: Vec<(f64, f64)>,
    side: f64,
    decay: f64,
    /// Active users bucketed into unit cells for nearest-neighbor lookups.
    grid: Vec<Vec<u32>>,
    cells: usize,
}

impl InterestSpace {
    fn new(side: f64) -> Self {
        let cells = side.ceil() as usize;
        InterestSpace {
            pos: Vec::new(),
            side,
            decay: 1.0,
            grid: vec![Vec::new(); cells * cells],
            cells,
        }
    }

    fn axis_dist(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(self.side);
        d.min(self.side - d)
    }

    fn dist_points(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let dx = self.axis_dist(a.0, b.0);
        let dy = self.axis_dist(a.1, b.1);
        (dx * dx + dy * dy).sqrt()
    }

    fn dist(&self, u: u32, v: u32) -> f64 {
        self.dist_points(self.pos[u as usize], self.pos[v as usize])
    }

    fn similarity(&self, u: u32, v: u32) -> f64 {
        (-self.decay * self.dist(u, v)).exp()
    }

    fn cell_of(&self, p: (f64, f64)) -> (usize, usize) {
        let cx = (p.0.rem_euclid(self.side) as usize).min(self.cells - 1);
        let cy = (p.1.rem_euclid(self.side) as usize).min(self.cells - 1);
        (cx, cy)
    }

    fn index_user(&mut self, u: u32) {
        let (cx, cy) = self.cell_of(self.pos[u as usize]);
        self.grid[cx * self.cells + cy].push(u);
    }

    /// Nearest indexed user to `p`, excluding `exclude`; scans expanding
    /// cell rings.
    fn nearest(&self, p: (f64, f64), exclude: u32) -> Option<u32> {
        let (cx, cy) = self.cell_of(p);
        let c = self.cells as i64;
        let mut best: Option<(f64, u32)> = None;
        for ring in 0..=3i64 {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let gx = (cx as i64 + dx).rem_euclid(c) as usize;
                    let gy = (cy as i64 + dy).rem_euclid(c) as usize;
                    for &u in &self.grid[gx * self.cells + gy] {
                        if u == exclude {
                            continue;
                        }
                        let d = self.dist_points(p, self.pos[u as usize]);
                        if best.is_none_or(|(bd, bu)| d < bd || (d == bd && u < bu)) {
                            best = Some((d, u));
                        }
                    }
                }
            }
            // One extra ring after the first hit guards against a closer
            // user in the next shell.
            if let Some((d, _)) = best {
                if d + 1.0 < ring as f64 {
                    break;
                }
            }
        }
        best.map(|(_, u)| u)
    }
}

/// Generate the snapshot, event log and ground truth for a config.
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput, SynthError> {
    cfg.validate()?;
    let n = cfg.n_users as usize;
    let window = cfg.window();
    let profile_sum: f64 = cfg.diurnal_profile.iter().sum();

    // Latent users host cohorts and spillover; they start with no edges.
    let n_coupled = cfg.planted.iter().filter(|p| p.couples_follow).count();
    let latent_per_burst = (cfg.cohort_size + cfg.spillover_pool) as usize;
    let n_latent = n_coupled * latent_per_burst;
    if n_latent * 4 > n * 3 {
        return Err(SynthError::InvalidConfig(format!(
            "{n_latent} latent users needed for {n_coupled} coupled bursts exceeds 75% of {n}"
        )));
    }
    let n_active = n - n_latent;

    // Hour-of-day sampling table proportional to the diurnal profile.
    let hour_cdf: Vec<f64> = {
        let mut acc = 0.0;
        cfg.diurnal_profile
            .iter()
            .map(|p| {
                acc += p / profile_sum;
                acc
            })
            .collect()
    };
    let draw_event_ts = |rng: &mut StdRng| -> i64 {
        let day = rng.random_range(0..cfg.n_days) as i64;
        let x: f64 = rng.random_range(0.0..1.0);
        let hour = hour_cdf.partition_point(|&c| c < x).min(23) as i64;
        let sec = rng.random_range(0..3600i64);
        BASE_TS + day * 86_400 + hour * 3600 + sec
    };

    // Phase 1: initial indegrees for active users, truncated discrete
    // Pareto; latent users start at zero.
    let mut rng_deg = StdRng::seed_from_u64(mix(cfg.seed, 1));
    let cap = (cfg.n_users / 10).max(cfg.min_indegree + 1);
    let tail = cfg.indegree_exponent - 1.0;
    let mut degrees = vec![0u32; n];
    for d in degrees.iter_mut().take(n_active) {
        let u: f64 = rng_deg.random_range(f64::EPSILON..1.0);
        *d = ((f64::from(cfg.min_indegree) * u.powf(-1.0 / tail)).floor() as u32)
            .min(cap)
            .max(cfg.min_indegree);
    }

    // Phase 2: interest positions for active users; latent positions are
    // assigned next to their burst targets later.
    let mut rng_topics = StdRng::seed_from_u64(mix(cfg.seed, 2));
    let side = f64::from(cfg.n_topics);
    let mut space = InterestSpace::new(side);
    space.decay = cfg.similarity_decay;
    space.pos = vec![(0.0, 0.0); n];
    for u in 0..n_active {
        space.pos[u] = (
            rng_topics.random_range(0.0..side),
            rng_topics.random_range(0.0..side),
        );
    }
    for u in 0..n_active as u32 {
        space.index_user(u);
    }

    // Phase 3: snapshot edges among active users. Followers sit at a tight
    // distance band, drawn from a half-plane arc so followers-of-followers
    // stay far from the followee.
    let mut rng_snap = StdRng::seed_from_u64(mix(cfg.seed, 3));
    let mut edge_set: HashSet<(u32, u32)> = HashSet::new();
    let mut followers: Vec<Vec<u32>> = vec![Vec::new(); n];
    for u in 0..n_active as u32 {
        let want = degrees[u as usize] as usize;
        let (px, py) = space.pos[u as usize];
        let mut attempts = 0;
        while followers[u as usize].len() < want && attempts < want * 30 {
            attempts += 1;
            let r = (cfg.follower_distance_mean
                + cfg.follower_distance_sd * normal(&mut rng_snap))
            .abs();
            let phi = rng_snap.random_range(0.0..std::f64::consts::PI);
            let p = (px + r * phi.cos(), py + r * phi.sin());
            let Some(f) = space.nearest(p, u) else { break };
            if edge_set.contains(&(f, u)) {
                continue;
            }
            edge_set.insert((f, u));
            followers[u as usize].push(f);
        }
    }

    // Phase 4: resolve planted bursts onto mid-degree users and wire each
    // coupled burst's latent cohort to one amplifier follower.
    let mut rng_plant = StdRng::seed_from_u64(mix(cfg.seed, 4));
    let mut pool: Vec<u32> = (0..n_active as u32)
        .filter(|&u| {
            let d = followers[u as usize].len();
            d >= cfg.min_burst_user_degree && d <= cfg.max_burst_user_degree
        })
        .collect();
    // Id order keeps the coupled-burst probing degree-neutral, so the
    // follower-count baseline carries no signal.
    pool.sort_unstable();
    if !cfg.planted.is_empty() && pool.is_empty() {
        return Err(SynthError::InvalidConfig(
            "no user has a degree inside the burst-user band".into(),
        ));
    }
    struct ResolvedBurst {
        id: u32,
        user: u32,
        hour: u32,
        magnitude: u32,
        radius: f64,
        coupled: bool,
        hot: bool,
        amplifier: u32,
        cohort: Vec<u32>,
        spill_pool: Vec<u32>,
    }
    let mut coupled_per_user: HashMap<u32, u32> = HashMap::new();
    let mut user_hours: HashSet<(u32, u32)> = HashSet::new();
    let mut user_amplifiers: HashMap<u32, HashSet<u32>> = HashMap::new();
    let mut latent_cursor = n_active as u32;
    let mut resolved: Vec<ResolvedBurst> = Vec::new();
    for (id, p) in cfg.planted.iter().enumerate() {
        let user = match p.user {
            Some(u) => u,
            None => {
                let mut pick = None;
                for probe in 0..pool.len() {
                    let cand = pool[(id + probe) % pool.len()];
                    let coupled_count = coupled_per_user.get(&cand).copied().unwrap_or(0);
                    if p.couples_follow && coupled_count >= 2 {
                        continue;
                    }
                    if user_hours.contains(&(cand, p.hour / 48)) {
                        continue;
                    }
                    pick = Some(cand);
                    break;
                }
                pick.ok_or_else(|| {
                    SynthError::InvalidConfig(format!(
                        "planted burst {id}: burst-user pool exhausted"
                    ))
                })?
            }
        };
        if followers[user as usize].is_empty() {
            return Err(SynthError::InvalidConfig(format!(
                "planted burst {id}: user {user} has no followers"
            )));
        }
        user_hours.insert((user, p.hour / 48));
        if p.couples_follow {
            *coupled_per_user.entry(user).or_insert(0) += 1;
        }
        // One amplifier per burst, distinct within a user, so cascades of
        // one burst cannot reach another burst's still-fresh cohort. A
        // coupled burst rides a well-followed amplifier: reach is what lets
        // a fresh audience see the retweet.
        let taken = user_amplifiers.entry(user).or_default();
        let flist = &followers[user as usize];
        let mut amplifier = None;
        let probes = if p.couples_follow { 5 } else { 1 };
        let mut tries = 0;
        while tries < flist.len() * 4 {
            let mut best: Option<u32> = None;
            for _ in 0..probes {
                let cand = flist[rng_plant.random_range(0..flist.len())];
                if best.is_none_or(|b| {
                    followers[cand as usize].len() > followers[b as usize].len()
                }) {
                    best = Some(cand);
                }
            }
            let cand = best.expect("at least one probe");
            tries += probes;
            if !taken.contains(&cand) {
                amplifier = Some(cand);
                break;
            }
        }
        let Some(amplifier) = amplifier else {
            return Err(SynthError::InvalidConfig(format!(
                "planted burst {id}: user {user} has no unused follower to amplify"
            )));
        };
        taken.insert(amplifier);
        let hot_rate = if p.couples_follow {
            cfg.hot_rate_coupled
        } else {
            cfg.hot_rate_uncoupled
        };
        let hot = rng_plant.random_range(0.0..1.0) < hot_rate;
        let mut cohort = Vec::new();
        let mut spill_pool = Vec::new();
        if p.couples_follow {
            let eff_cohort = cfg.cohort_size as usize;
            let block: Vec<u32> =
                (latent_cursor..latent_cursor + latent_per_burst as u32).collect();
            latent_cursor += latent_per_burst as u32;
            let (cx, cy) = space.pos[user as usize];
            for (k, &l) in block.iter().enumerate() {
                let in_cohort = k < eff_cohort;
                let (lo, hi) = if in_cohort {
                    (0.0, p.cohort_boost)
                } else {
                    (p.cohort_boost, cfg.spillover_radius)
                };
                let r = (lo * lo + rng_plant.random_range(0.0..1.0) * (hi * hi - lo * lo))
                    .sqrt();
                let ang = rng_plant.random_range(0.0..std::f64::consts::TAU);
                space.pos[l as usize] = (
                    (cx + r * ang.cos()).rem_euclid(side),
                    (cy + r * ang.sin()).rem_euclid(side),
                );
                if in_cohort {
                    cohort.push(l);
                    edge_set.insert((l, amplifier));
                    followers[amplifier as usize].push(l);
                } else if k < eff_cohort + cfg.spillover_pool as usize {
                    spill_pool.push(l);
                }
            }
        }
        resolved.push(ResolvedBurst {
            id: id as u32,
            user,
            hour: p.hour,
            magnitude: p.magnitude,
            radius: p.cohort_boost,
            coupled: p.couples_follow,
            hot,
            amplifier,
            cohort,
            spill_pool,
        });
    }
    // Any remaining latent users scatter uniformly.
    let mut rng_scatter = StdRng::seed_from_u64(mix(cfg.seed, 11));
    for l in latent_cursor..n as u32 {
        space.pos[l as usize] = (
            rng_scatter.random_range(0.0..side),
            rng_scatter.random_range(0.0..side),
        );
    }

    // Follower log-similarity moments for burst targets.
    let mut burst_stats: Vec<Option<(f64, f64)>> = Vec::with_capacity(resolved.len());
    for rb in &resolved {
        let sims: Vec<f64> = followers[rb.user as usize]
            .iter()
            .map(|&f| space.similarity(rb.user, f))
            .collect();
        let st = stats_from_similarities(UserId(rb.user), &sims)
            .ok()
            .filter(|s| s.sigma > 0.0)
            .map(|s| (s.mu, s.sigma));
        burst_stats.push(st);
    }

    // Phase 5: pre-consume ordinary two-hop exposures. A burst target's
    // regular activity has long since reached everyone reachable through
    // followers other than the amplifier, so only the amplifier's audience
    // counts as fresh when the cascade fires.
    let mut first_exposure: HashSet<(u32, u32)> = HashSet::new();
    let empty: HashSet<u32> = HashSet::new();
    let burst_users: HashSet<u32> = resolved.iter().map(|rb| rb.user).collect();
    for &u in burst_users.iter().collect::<std::collections::BTreeSet<_>>() {
        let amps = user_amplifiers.get(&u).unwrap_or(&empty);
        let n1: HashSet<u32> = followers[u as usize].iter().copied().collect();
        for &v in &followers[u as usize] {
            if amps.contains(&v) {
                continue;
            }
            for &j in &followers[v as usize] {
                if j != u && !n1.contains(&j) {
                    first_exposure.insert((j, u));
                }
            }
        }
    }

    // Phase 6: tweets.
    let mut rng_tweets = StdRng::seed_from_u64(mix(cfg.seed, 5));
    let mut intents: Vec<Intent> = Vec::new();
    let mut counter: u32 = 0;
    let mean_deg_factor: f64 = (0..n)
        .map(|u| (1.0 + degrees[u] as f64).powf(cfg.tweets_degree_exponent))
        .sum::<f64>()
        / n as f64;
    let mut tweet_refs: Vec<(u32, i64)> = Vec::new(); // (author, ts) for cascades
    for u in 0..n as u32 {
        let scale =
            (1.0 + degrees[u as usize] as f64).powf(cfg.tweets_degree_exponent) / mean_deg_factor;
        let n_tweets = poisson_draw(&mut rng_tweets, cfg.mean_tweets_per_user * scale);
        for _ in 0..n_tweets {
            let ts = draw_event_ts(&mut rng_tweets);
            let text = tweet_text(&mut rng_tweets, &space, u, cfg);
            tweet_refs.push((u, ts));
            intents.push(Intent {
                ts,
                phase: 1,
                counter,
                kind: EventKind::Tweet,
                actor: u,
                target: None,
                text: Some(text),
                origin: Origin::Background,
            });
            counter += 1;
        }
    }

    // Phase 7: planted cascades, law-driven responses, spillover.
    let mut rng_burst = StdRng::seed_from_u64(mix(cfg.seed, 6));
    let mut gt_bursts: Vec<GtBurst> = Vec::new();
    let mut gt_exposures: Vec<GtExposure> = Vec::new();
    let mut scheduled_follow: HashSet<(u32, u32)> = HashSet::new();
    for rb in &resolved {
        let hour_ts = BASE_TS + i64::from(rb.hour) * 3600;
        let trigger_ts = hour_ts + 60;
        let mut text = tweet_text(&mut rng_burst, &space, rb.user, cfg);
        if rb.hot {
            text.push(' ');
            text.push_str(&cfg.hot_token);
        }
        intents.push(Intent {
            ts: trigger_ts,
            phase: 2,
            counter,
            kind: EventKind::Tweet,
            actor: rb.user,
            target: None,
            text: Some(text.clone()),
            origin: Origin::Background,
        });
        counter += 1;

        // Retweeters: this burst's amplifier first, then other followers.
        // Other bursts' amplifiers never retweet here, keeping their
        // cohorts unexposed.
        let other_amps = user_amplifiers.get(&rb.user).unwrap_or(&empty);
        let flist = &followers[rb.user as usize];
        let mut retweeters = vec![rb.amplifier];
        let mut tries = 0;
        while retweeters.len() < rb.magnitude as usize && tries < rb.magnitude as usize * 20 {
            tries += 1;
            let r = flist[rng_burst.random_range(0..flist.len())];
            if !retweeters.contains(&r) && (r == rb.amplifier || !other_amps.contains(&r)) {
                retweeters.push(r);
            }
        }
        let mut exposed: Vec<(u32, i64)> = Vec::new(); // (user, exposure ts)
        let mut exposed_seen: HashSet<u32> = HashSet::new();
        let n1: HashSet<u32> = flist.iter().copied().collect();
        for (ri, &r) in retweeters.iter().enumerate() {
            let rt_ts = trigger_ts + 120 + (ri as i64 * 3000) / retweeters.len() as i64
                + rng_burst.random_range(0..180i64);
            intents.push(Intent {
                ts: rt_ts,
                phase: 2,
                counter,
                kind: EventKind::Retweet,
                actor: r,
                target: Some(rb.user),
                text: Some(text.clone()),
                origin: Origin::Background,
            });
            counter += 1;
            for &j in &followers[r as usize] {
                if j != rb.user && !n1.contains(&j) && exposed_seen.insert(j) {
                    exposed.push((j, rt_ts));
                }
            }
        }

        let mut scheduled = 0u32;
        if let Some((mu, sigma)) = burst_stats[rb.id as usize] {
            for &(j, exp_ts) in &exposed {
                if !first_exposure.insert((j, rb.user)) {
                    continue; // already exposed before this cascade
                }
                let s = space.similarity(rb.user, j);
                if s <= 0.0 {
                    continue;
                }
                let y = (s.ln() - mu) / sigma;
                let p = (cfg.law.c * (cfg.law.alpha * y).exp()).min(1.0);
                let followed = rng_burst.random_range(0.0..1.0) < p;
                gt_exposures.push(GtExposure {
                    burst_id: rb.id,
                    user: j,
                    y_true: y,
                    followed,
                });
                if followed && scheduled_follow.insert((j, rb.user)) {
                    let delay = if rng_burst.random_range(0.0..1.0) < 0.75 {
                        rng_burst.random_range(30..2700i64)
                    } else {
                        rng_burst.random_range(3600..22 * 3600i64)
                    };
                    let ts = (exp_ts + delay).min(window.end.0 - 1);
                    intents.push(Intent {
                        ts,
                        phase: 3,
                        counter,
                        kind: EventKind::Follow,
                        actor: j,
                        target: Some(rb.user),
                        text: None,
                        origin: Origin::Law,
                    });
                    counter += 1;
                    scheduled += 1;
                }
            }
        }

        // Spillover: latent users just outside the cohort radius discover
        // the target through ambient channels; they arrive with no edges
        // into the ego-network.
        let mut spill = 0u32;
        if rb.coupled && !rb.spill_pool.is_empty() {
            let want = poisson_draw(
                &mut rng_burst,
                cfg.spillover_per_follow * f64::from(scheduled),
            )
            .min(rb.spill_pool.len() as u64) as usize;
            for &j in rb.spill_pool.iter().take(want) {
                if edge_set.contains(&(j, rb.user)) || !scheduled_follow.insert((j, rb.user)) {
                    continue;
                }
                let delay = if rng_burst.random_range(0.0..1.0) < 0.6 {
                    rng_burst.random_range(120..7200i64)
                } else {
                    rng_burst.random_range(7200..30 * 3600i64)
                };
                let ts = (trigger_ts + delay).min(window.end.0 - 1);
                intents.push(Intent {
                    ts,
                    phase: 3,
                    counter,
                    kind: EventKind::Follow,
                    actor: j,
                    target: Some(rb.user),
                    text: None,
                    origin: Origin::Spillover,
                });
                counter += 1;
                spill += 1;
            }
        }

        gt_bursts.push(GtBurst {
            id: rb.id,
            user: user_name(rb.user),
            hour: rb.hour,
            trigger_ts,
            magnitude: retweeters.len() as u32,
            coupled: rb.coupled,
            hot_token: rb.hot,
            n_exposed: exposed.len() as u32,
            n_cohort: rb.cohort.len() as u32,
            scheduled_follows: scheduled,
            spillover_follows: spill,
        });
        let _ = rb.radius;
    }

    // Phase 8: background retweet diffusion and exposure-driven follows.
    let mut rng_exp = StdRng::seed_from_u64(mix(cfg.seed, 7));
    let exp_delay = Exp::new(1.0 / (4.0 * 3600.0)).expect("positive rate");
    for &(author, tweet_ts) in &tweet_refs {
        let lam = cfg.retweet_rate_base * (1.0 + degrees[author as usize] as f64).sqrt();
        let n_rt = poisson_draw(&mut rng_exp, lam).min(4);
        if n_rt == 0 {
            continue;
        }
        let flist = &followers[author as usize];
        if flist.is_empty() {
            continue;
        }
        for _ in 0..n_rt {
            let r = flist[rng_exp.random_range(0..flist.len())];
            let delay = (exp_delay.sample(&mut rng_exp) as i64).clamp(30, 20 * 3600);
            let rt_ts = tweet_ts + delay;
            if rt_ts >= window.end.0 {
                continue;
            }
            intents.push(Intent {
                ts: rt_ts,
                phase: 4,
                counter,
                kind: EventKind::Retweet,
                actor: r,
                target: Some(author),
                text: None,
                origin: Origin::Background,
            });
            counter += 1;
            for &j in &followers[r as usize] {
                if j == author
                    || edge_set.contains(&(j, author))
                    || scheduled_follow.contains(&(j, author))
                    || !first_exposure.insert((j, author))
                {
                    continue;
                }
                if rng_exp.random_range(0.0..1.0) < cfg.exposure_follow_prob {
                    scheduled_follow.insert((j, author));
                    let ts = (rt_ts + rng_exp.random_range(1800..22 * 3600i64))
                        .min(window.end.0 - 1);
                    intents.push(Intent {
                        ts,
                        phase: 4,
                        counter,
                        kind: EventKind::Follow,
                        actor: j,
                        target: Some(author),
                        text: None,
                        origin: Origin::ExposureScheduled,
                    });
                    counter += 1;
                }
            }
        }
    }

    // Phase 9: background follow churn, rate scaling with indegree.
    let mut rng_bg = StdRng::seed_from_u64(mix(cfg.seed, 8));
    for u in 0..n as u32 {
        let rate = cfg.base_follow_rate
            * (1.0 + degrees[u as usize] as f64).powf(cfg.degree_rate_exponent);
        let total = poisson_draw(&mut rng_bg, rate * profile_sum * f64::from(cfg.n_days));
        for _ in 0..total {
            let mut a = rng_bg.random_range(0..cfg.n_users - 1);
            if a >= u {
                a += 1;
            }
            intents.push(Intent {
                ts: draw_event_ts(&mut rng_bg),
                phase: 5,
                counter,
                kind: EventKind::Follow,
                actor: a,
                target: Some(u),
                text: None,
                origin: Origin::Background,
            });
            counter += 1;
        }
    }

    // Phase 10: unfollow intents, one per `deletion_ratio` follows; the
    // victim edge is chosen among live edges at replay time.
    let n_follow_intents = intents
        .iter()
        .filter(|i| i.kind == EventKind::Follow)
        .count();
    let mut rng_unf = StdRng::seed_from_u64(mix(cfg.seed, 9));
    let n_unfollows = poisson_draw(
        &mut rng_unf,
        cfg.deletion_ratio * n_follow_intents as f64,
    );
    for _ in 0..n_unfollows {
        intents.push(Intent {
            ts: draw_event_ts(&mut rng_unf),
            phase: 6,
            counter,
            kind: EventKind::Unfollow,
            actor: 0,
            target: None,
            text: None,
            origin: Origin::Background,
        });
        counter += 1;
    }

    // Replay in time order against a live-edge mirror, dropping anything
    // that would not re-ingest.
    intents.sort_by_key(|i| (i.ts, i.phase, i.counter));
    let mut rng_replay = StdRng::seed_from_u64(mix(cfg.seed, 10));
    let mut live_vec: Vec<(u32, u32)> = Vec::with_capacity(edge_set.len());
    let mut live_idx: HashMap<(u32, u32), usize> = HashMap::with_capacity(edge_set.len() * 2);
    let mut snapshot: Vec<(String, String)> = Vec::with_capacity(edge_set.len());
    for u in 0..n as u32 {
        for &f in &followers[u as usize] {
            live_idx.insert((f, u), live_vec.len());
            live_vec.push((f, u));
            snapshot.push((user_name(f), user_name(u)));
        }
    }
    snapshot.sort_unstable();

    let mut events: Vec<RawEvent> = Vec::with_capacity(intents.len());
    let mut counts = GtCounts::default();
    let mut tweet_seq = 0u64;
    let mut seq = 0u64;
    for intent in &intents {
        let raw = match intent.kind {
            EventKind::Follow => {
                let t = intent.target.expect("follow intent has target");
                if intent.actor == t || live_idx.contains_key(&(intent.actor, t)) {
                    continue;
                }
                live_idx.insert((intent.actor, t), live_vec.len());
                live_vec.push((intent.actor, t));
                counts.follows += 1;
                if matches!(intent.origin, Origin::ExposureScheduled | Origin::Law) {
                    counts.exposure_driven_follows += 1;
                }
                RawEvent {
                    ts: intent.ts,
                    seq,
                    kind: EventKind::Follow,
                    actor: user_name(intent.actor),
                    target: Some(user_name(t)),
                    tweet_id: None,
                    text: None,
                }
            }
            EventKind::Unfollow => {
                if live_vec.is_empty() {
                    continue;
                }
                let pick = rng_replay.random_range(0..live_vec.len());
                let (a, b) = live_vec[pick];
                let last = live_vec.len() - 1;
                live_vec.swap(pick, last);
                live_idx.insert(live_vec[pick], pick);
                live_vec.pop();
                live_idx.remove(&(a, b));
                counts.unfollows += 1;
                RawEvent {
                    ts: intent.ts,
                    seq,
                    kind: EventKind::Unfollow,
                    actor: user_name(a),
                    target: Some(user_name(b)),
                    tweet_id: None,
                    text: None,
                }
            }
            EventKind::Tweet => {
                counts.tweets += 1;
                tweet_seq += 1;
                RawEvent {
                    ts: intent.ts,
                    seq,
                    kind: EventKind::Tweet,
                    actor: user_name(intent.actor),
                    target: None,
                    tweet_id: Some(format!("tw{tweet_seq:07}")),
                    text: intent.text.clone(),
                }
            }
            EventKind::Retweet => {
                counts.retweets += 1;
                RawEvent {
                    ts: intent.ts,
                    seq,
                    kind: EventKind::Retweet,
                    actor: user_name(intent.actor),
                    target: intent.target.map(user_name),
                    tweet_id: None,
                    text: intent.text.clone(),
                }
            }
        };
        seq += 1;
        events.push(raw);
    }

    // Interest coordinates stand in for the per-user topic profile.
    let mixtures: Vec<Vec<f64>> = space.pos.iter().map(|&(x, y)| vec![x, y]).collect();

    Ok(SynthOutput {
        snapshot,
        events,
        truth: GroundTruth {
            seed: cfg.seed,
            config_digest: cfg.digest(),
            window_start: window.start.0,
            window_end: window.end.0,
            law: cfg.law,
            counts,
            bursts: gt_bursts,
            exposures: gt_exposures,
            mixtures,
        },
    })
}

/// Tokens drawn from unit cells near the author's interest point, plus one
/// common token.
fn tweet_text(rng: &mut StdRng, space: &InterestSpace, author: u32, cfg: &SynthConfig) -> String {
    let (px, py) = space.pos[author as usize];
    let side = f64::from(cfg.n_topics);
    let cells = cfg.n_topics;
    let mut words: Vec<String> = Vec::with_capacity(cfg.tokens_per_tweet as usize + 1);
    for _ in 0..cfg.tokens_per_tweet {
        let x = (px + cfg.tweet_topic_spread * normal(rng)).rem_euclid(side) as u32;
        let y = (py + cfg.tweet_topic_spread * normal(rng)).rem_euclid(side) as u32;
        let topic = x.min(cells - 1) * cells + y.min(cells - 1);
        words.push(format!("t{topic}w{}", rng.random_range(0..cfg.tokens_per_topic)));
    }
    if cfg.common_tokens > 0 {
        words.push(format!("c{}", rng.random_range(0..cfg.common_tokens)));
    }
    words.join(" ")
}

/// Serialize output files: `snapshot.csv`, `events.jsonl`,
/// `ground_truth.jsonl`.
pub fn write_output(out: &SynthOutput, dir: &Path) -> Result<(), SynthError> {
    std::fs::create_dir_all(dir)?;
    let mut snap = BufWriter::new(std::fs::File::create(dir.join("snapshot.csv"))?);
    for (a, b) in &out.snapshot {
        writeln!(snap, "{a},{b}")?;
    }
    snap.flush()?;
    let mut ev = BufWriter::new(std::fs::File::create(dir.join("events.jsonl"))?);
    for e in &out.events {
        serde_json::to_writer(&mut ev, e).map_err(std::io::Error::other)?;
        ev.write_all(b"\n")?;
    }
    ev.flush()?;
    write_ground_truth(&out.truth, &dir.join("ground_truth.jsonl"))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum GtRecord {
    Meta {
        seed: u64,
        config_digest: String,
        window_start: i64,
        window_end: i64,
        c: f64,
        alpha: f64,
        follows: u64,
        unfollows: u64,
        tweets: u64,
        retweets: u64,
        exposure_driven_follows: u64,
    },
    Burst(GtBurst),
    Exposure(GtExposure),
    Mixture { user: u32, weights: Vec<f64> },
}

pub fn write_ground_truth(gt: &GroundTruth, path: &Path) -> Result<(), SynthError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let mut emit = |rec: &GtRecord| -> Result<(), SynthError> {
        serde_json::to_writer(&mut w, rec).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
        Ok(())
    };
    emit(&GtRecord::Meta {
        seed: gt.seed,
        config_digest: gt.config_digest.clone(),
        window_start: gt.window_start,
        window_end: gt.window_end,
        c: gt.law.c,
        alpha: gt.law.alpha,
        follows: gt.counts.follows,
        unfollows: gt.counts.unfollows,
        tweets: gt.counts.tweets,
        retweets: gt.counts.retweets,
        exposure_driven_follows: gt.counts.exposure_driven_follows,
    })?;
    for b in &gt.bursts {
        emit(&GtRecord::Burst(b.clone()))?;
    }
    for e in &gt.exposures {
        emit(&GtRecord::Exposure(*e))?;
    }
    for (u, m) in gt.mixtures.iter().enumerate() {
        emit(&GtRecord::Mixture {
            user: u as u32,
            weights: m.clone(),
        })?;
    }
    Ok(())
}

/// Pipeline findings to compare against the ground truth.
pub struct PipelineFindings<'a> {
    pub seed: u64,
    pub graph: &'a crate::store::TemporalGraph,
    /// Detected bursts across all users and kinds.
    pub bursts: &'a [crate::burst::Burst],
    pub cobursts: &'a [crate::burst::CoBurst],
    pub fitted: Option<crate::model::ModelParams>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Scorecard {
    pub n_planted: usize,
    pub n_detected_retweet_bursts: usize,
    /// Planted bursts matched by a detected retweet burst.
    pub detector_recall: f64,
    /// Detected retweet bursts matching a planted one.
    pub detector_precision: f64,
    /// Pipeline label equals the planted coupling flag.
    pub label_agreement: f64,
    pub coupled_detected_rate: f64,
    pub uncoupled_leak_rate: f64,
    pub c_rel_err: Option<f64>,
    pub alpha_rel_err: Option<f64>,
}

/// Score the pipeline against the generator's ground truth. Seeds must
/// match: comparing runs from different seeds is a caller bug.
pub fn truth_report(
    gt: &GroundTruth,
    findings: &PipelineFindings,
) -> Result<Scorecard, SynthError> {
    if gt.seed != findings.seed {
        return Err(SynthError::InvalidConfig(format!(
            "ground truth seed {} does not match pipeline seed {}",
            gt.seed, findings.seed
        )));
    }
    let g = findings.graph;
    let window = g.window();
    let detected_rt: Vec<&crate::burst::Burst> = findings
        .bursts
        .iter()
        .filter(|b| b.kind == crate::event::SeriesKind::RetweetsReceived)
        .collect();
    let follow_coburst: HashSet<(crate::UserId, usize)> = findings
        .cobursts
        .iter()
        .filter(|cb| cb.kind == crate::burst::CoBurstKind::RetweetFollow)
        .map(|cb| (cb.trigger.user, cb.trigger.hour_start))
        .collect();

    let mut matched_planted = 0usize;
    let mut matched_detected: HashSet<(u32, usize)> = HashSet::new();
    let mut label_hits = 0usize;
    let mut coupled_detected = 0usize;
    let mut coupled_total = 0usize;
    let mut uncoupled_leaks = 0usize;
    for b in &gt.bursts {
        let Some(user) = g.lookup(&b.user) else {
            continue;
        };
        let Some(hour) = window.hour_of(crate::Timestamp(b.trigger_ts)) else {
            continue;
        };
        let hit = detected_rt
            .iter()
            .find(|d| d.user == user && d.hour_start <= hour && hour <= d.hour_end);
        if let Some(d) = hit {
            matched_planted += 1;
            matched_detected.insert((user.0, d.hour_start));
        }
        let label = hit
            .map(|d| follow_coburst.contains(&(user, d.hour_start)))
            .unwrap_or(false);
        if label == b.coupled {
            label_hits += 1;
        }
        if b.coupled {
            coupled_total += 1;
            coupled_detected += usize::from(label);
        } else {
            uncoupled_leaks += usize::from(label);
        }
    }
    let n_planted = gt.bursts.len();
    let uncoupled_total = n_planted - coupled_total;
    let (c_rel_err, alpha_rel_err) = match findings.fitted {
        Some(p) => (
            Some((p.c - gt.law.c).abs() / gt.law.c),
            Some((p.alpha - gt.law.alpha).abs() / gt.law.alpha.abs().max(1e-12)),
        ),
        None => (None, None),
    };
    Ok(Scorecard {
        n_planted,
        n_detected_retweet_bursts: detected_rt.len(),
        detector_recall: if n_planted > 0 {
            matched_planted as f64 / n_planted as f64
        } else {
            1.0
        },
        detector_precision: if detected_rt.is_empty() {
            1.0
        } else {
            matched_detected.len() as f64 / detected_rt.len() as f64
        },
        label_agreement: if n_planted > 0 {
            label_hits as f64 / n_planted as f64
        } else {
            1.0
        },
        coupled_detected_rate: if coupled_total > 0 {
            coupled_detected as f64 / coupled_total as f64
        } else {
            1.0
        },
        uncoupled_leak_rate: if uncoupled_total > 0 {
            uncoupled_leaks as f64 / uncoupled_total as f64
        } else {
            0.0
        },
        c_rel_err,
        alpha_rel_err,
    })
}

pub fn read_ground_truth(path: &Path) -> Result<GroundTruth, SynthError> {
    let data = std::fs::read_to_string(path)?;
    let mut gt = GroundTruth {
        seed: 0,
        config_digest: String::new(),
        window_start: 0,
        window_end: 0,
        law: LawParams { c: 0.0, alpha: 0.0 },
        counts: GtCounts::default(),
        bursts: Vec::new(),
        exposures: Vec::new(),
        mixtures: Vec::new(),
    };
    for line in data.lines() {
        if line.is_empty() {
            continue;
        }
        let rec: GtRecord = serde_json::from_str(line).map_err(std::io::Error::other)?;
        match rec {
            GtRecord::Meta {
                seed,
                config_digest,
                window_start,
                window_end,
                c,
                alpha,
                follows,
                unfollows,
                tweets,
                retweets,
                exposure_driven_follows,
            } => {
                gt.seed = seed;
                gt.config_digest = config_digest;
                gt.window_start = window_start;
                gt.window_end = window_end;
                gt.law = LawParams { c, alpha };
                gt.counts = GtCounts {
                    follows,
                    unfollows,
                    tweets,
                    retweets,
                    exposure_driven_follows,
                };
            }
            GtRecord::Burst(b) => gt.bursts.push(b),
            GtRecord::Exposure(e) => gt.exposures.push(e),
            GtRecord::Mixture { user, weights } => {
                let u = user as usize;
                if gt.mixtures.len() <= u {
                    gt.mixtures.resize(u + 1, Vec::new());
                }
                gt.mixtures[u] = weights;
            }
        }
    }
    Ok(gt)
}
