//! Follower ego-network metrics around bursts: similarity, coherence, weakly
//! connected components, edge density, day-offset curves normalized at the
//! burst, rate accelerations, and the randomized-recipient control.

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde::Serialize;
use thiserror::Error;

use crate::burst::CoBurst;
use crate::event::{Event, EventKind, Timestamp, UserId};
use crate::store::TemporalGraph;
use crate::textsim::{cosine, TfIdfTable};

#[derive(Debug, Error)]
pub enum EgonetError {
    #[error("no co-burst had a usable metric value at offset 0")]
    NoUsableBursts,
    #[error("baseline rate is zero; acceleration undefined")]
    ZeroBaseline,
}

/// Induced subgraph on a user's followers at one instant. The center is not
/// a member; edges point follower -> followee among members.
#[derive(Debug, Clone)]
pub struct EgoSnapshot {
    pub center: UserId,
    pub t: Timestamp,
    /// Ascending by id.
    pub members: Vec<UserId>,
    pub edges: Vec<(UserId, UserId)>,
}

pub fn ego_snapshot(g: &TemporalGraph, center: UserId, t: Timestamp) -> EgoSnapshot {
    let members = g.followers_at(center, t);
    let mut in_ego = vec![false; g.n_users()];
    for &m in &members {
        in_ego[m.index()] = true;
    }
    let mut edges = Vec::new();
    for &b in &members {
        for a in g.followers_at(b, t) {
            if in_ego[a.index()] {
                edges.push((a, b));
            }
        }
    }
    EgoSnapshot {
        center,
        t,
        members,
        edges,
    }
}

/// Number of weakly connected components (edges treated as undirected).
pub fn wcc_count(s: &EgoSnapshot) -> usize {
    let k = s.members.len();
    if k == 0 {
        return 0;
    }
    let index = |u: UserId| s.members.binary_search(&u).expect("edge endpoint is a member");
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in &s.edges {
        let (ra, rb) = (find(&mut parent, index(a)), find(&mut parent, index(b)));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    (0..k).filter(|&i| find(&mut parent, i) == i).count()
}

/// Fraction of the `k(k-1)` possible directed edges that exist; undefined
/// for fewer than two members.
pub fn edge_density(s: &EgoSnapshot) -> Option<f64> {
    let k = s.members.len();
    if k < 2 {
        return None;
    }
    Some(s.edges.len() as f64 / (k * (k - 1)) as f64)
}

/// Mean similarity between the center and its members; members with a zero
/// vector are excluded. Undefined when no usable member remains.
pub fn follower_similarity(s: &EgoSnapshot, table: &TfIdfTable) -> Option<f64> {
    let center = table.get(s.center);
    if center.is_zero() {
        return None;
    }
    let sims: Vec<f64> = s
        .members
        .iter()
        .filter(|&&m| !table.get(m).is_zero())
        .map(|&m| cosine(center, table.get(m)))
        .collect();
    if sims.is_empty() {
        return None;
    }
    Some(sims.iter().sum::<f64>() / sims.len() as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct CoherenceConfig {
    /// Exact pairwise mean up to this many usable members.
    pub exact_cap: usize,
    /// Above the cap, estimate from this many uniformly sampled pairs.
    pub sample_pairs: usize,
    pub seed: u64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            exact_cap: 500,
            sample_pairs: 10_000,
            seed: 0,
        }
    }
}

/// Mean pairwise similarity among the members; undefined below two usable
/// members.
pub fn follower_coherence(
    s: &EgoSnapshot,
    table: &TfIdfTable,
    cfg: &CoherenceConfig,
) -> Option<f64> {
    let usable: Vec<UserId> = s
        .members
        .iter()
        .copied()
        .filter(|&m| !table.get(m).is_zero())
        .collect();
    let k = usable.len();
    if k < 2 {
        return None;
    }
    if k <= cfg.exact_cap {
        let mut sum = 0.0;
        let mut n = 0u64;
        for i in 0..k {
            for j in i + 1..k {
                sum += cosine(table.get(usable[i]), table.get(usable[j]));
                n += 1;
            }
        }
        Some(sum / n as f64)
    } else {
        let mut rng = StdRng::seed_from_u64(cfg.seed ^ s.center.0 as u64);
        let mut sum = 0.0;
        for _ in 0..cfg.sample_pairs {
            let i = rng.random_range(0..k);
            let mut j = rng.random_range(0..k - 1);
            if j >= i {
                j += 1;
            }
            sum += cosine(table.get(usable[i]), table.get(usable[j]));
        }
        Some(sum / cfg.sample_pairs as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EgoMetric {
    FollowerSimilarity,
    FollowerCoherence,
    WccCount,
    EdgeDensity,
}

impl EgoMetric {
    pub const ALL: [EgoMetric; 4] = [
        EgoMetric::FollowerSimilarity,
        EgoMetric::FollowerCoherence,
        EgoMetric::WccCount,
        EgoMetric::EdgeDensity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EgoMetric::FollowerSimilarity => "follower_similarity",
            EgoMetric::FollowerCoherence => "follower_coherence",
            EgoMetric::WccCount => "wcc_count",
            EgoMetric::EdgeDensity => "edge_density",
        }
    }
}

/// Standard evaluator for an ego metric at `(user, t)`.
pub fn eval_ego_metric(
    g: &TemporalGraph,
    table: &TfIdfTable,
    metric: EgoMetric,
    coherence: &CoherenceConfig,
    user: UserId,
    t: Timestamp,
) -> Option<f64> {
    let snap = ego_snapshot(g, user, t);
    match metric {
        EgoMetric::FollowerSimilarity => follower_similarity(&snap, table),
        EgoMetric::FollowerCoherence => follower_coherence(&snap, table, coherence),
        EgoMetric::WccCount => Some(wcc_count(&snap) as f64),
        EgoMetric::EdgeDensity => edge_density(&snap),
    }
}

/// Mean metric value per day offset, each burst normalized by its value at
/// the burst.
#[derive(Debug, Clone, Serialize)]
pub struct MetricCurve {
    pub metric: String,
    pub offsets_days: Vec<i32>,
    /// Mean relative value per offset; meaningful where `counts > 0`.
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
    /// Bursts with no usable value at offset 0.
    pub skipped: usize,
}

/// Anchor instant of a co-burst: the last second of the response interval,
/// so offset 0 reflects the network with the burst's arrivals applied.
pub fn coburst_anchor(g: &TemporalGraph, cb: &CoBurst) -> Timestamp {
    g.window().hour_end(cb.response.hour_end)
}

/// Evaluate `metric_at` for every co-burst at 24 h multiples around its
/// anchor, normalize by the value at offset 0, and average per offset.
/// Offsets falling outside the observation window do not contribute.
pub fn metric_curves<F>(
    g: &TemporalGraph,
    cobursts: &[CoBurst],
    name: &str,
    offsets_days: &[i32],
    metric_at: F,
) -> Result<MetricCurve, EgonetError>
where
    F: Fn(UserId, Timestamp) -> Option<f64>,
{
    let mut sums = vec![0.0; offsets_days.len()];
    let mut counts = vec![0usize; offsets_days.len()];
    let mut skipped = 0usize;
    let window = g.window();
    for cb in cobursts {
        let user = cb.trigger.user;
        let anchor = coburst_anchor(g, cb);
        let v0 = match metric_at(user, anchor) {
            Some(v) if v != 0.0 => v,
            _ => {
                skipped += 1;
                continue;
            }
        };
        for (k, &d) in offsets_days.iter().enumerate() {
            let t = Timestamp(anchor.0 + i64::from(d) * 86_400);
            if !window.contains(t) {
                continue;
            }
            if let Some(v) = metric_at(user, t) {
                sums[k] += v / v0;
                counts[k] += 1;
            }
        }
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(EgonetError::NoUsableBursts);
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
        .collect();
    Ok(MetricCurve {
        metric: name.to_string(),
        offsets_days: offsets_days.to_vec(),
        values,
        counts,
        skipped,
    })
}

/// How much faster the metric changes inside burst windows than over the
/// whole observation window, in percent. The burst window spans the trigger
/// start through the response end. Negative baselines (a decreasing metric)
/// report with a negative sign: "the decrease is N% faster".
pub fn rate_acceleration<F>(
    g: &TemporalGraph,
    cobursts: &[CoBurst],
    metric_at: F,
) -> Result<f64, EgonetError>
where
    F: Fn(UserId, Timestamp) -> Option<f64>,
{
    let window = g.window();
    let total_hours = window.hours() as f64;
    let mut in_rates = Vec::new();
    let mut base_rates = Vec::new();
    for cb in cobursts {
        let user = cb.trigger.user;
        let t_a = window.hour_start(cb.trigger.hour_start);
        let t_b = window.hour_end(cb.response.hour_end);
        let hours = (cb.response.hour_end + 1 - cb.trigger.hour_start) as f64;
        let (Some(va), Some(vb)) = (metric_at(user, t_a), metric_at(user, t_b)) else {
            continue;
        };
        let (Some(w0), Some(w1)) = (
            metric_at(user, window.start),
            metric_at(user, Timestamp(window.end.0 - 1)),
        ) else {
            continue;
        };
        in_rates.push((vb - va) / hours);
        base_rates.push((w1 - w0) / total_hours);
    }
    if in_rates.is_empty() {
        return Err(EgonetError::NoUsableBursts);
    }
    let mean_in = in_rates.iter().sum::<f64>() / in_rates.len() as f64;
    let mean_base = base_rates.iter().sum::<f64>() / base_rates.len() as f64;
    if mean_base == 0.0 {
        return Err(EgonetError::ZeroBaseline);
    }
    let pct = (mean_in / mean_base - 1.0) * 100.0;
    Ok(if mean_base < 0.0 { -pct } else { pct })
}

/// Replace the target of every follow/unfollow with a uniformly random other
/// user, preserving actors, timestamps and kinds. Re-ingesting the result
/// generally requires [`crate::store::ConflictPolicy::Skip`].
pub fn shuffled_control(events: &[Event], n_users: u32, seed: u64) -> Vec<Event> {
    assert!(n_users >= 2, "need at least two users to reassign targets");
    let mut rng = StdRng::seed_from_u64(seed);
    events
        .iter()
        .map(|ev| {
            let mut ev = ev.clone();
            if matches!(ev.kind, EventKind::Follow | EventKind::Unfollow) {
                let mut t = rng.random_range(0..n_users - 1);
                if t >= ev.actor.0 {
                    t += 1;
                }
                ev.target = Some(UserId(t));
            }
            ev
        })
        .collect()
}
