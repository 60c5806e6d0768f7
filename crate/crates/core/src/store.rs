//! Event-log ingest and the time-travel follower graph.
//!
//! The snapshot file fixes the edge set at the window start; follow/unfollow
//! events are replayed into per-edge validity intervals so that
//! `followers_at(u, t)` answers exactly "who followed `u` at instant `t`".
//! An event with `ts <= t` counts as applied at `t`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{Event, EventKind, HourlySeries, SeriesKind, TimeWindow, Timestamp, UserId};

/// Wire form of one event-log line (JSON-lines, string user ids).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawEvent {
    pub ts: i64,
    pub seq: u64,
    pub kind: EventKind,
    pub actor: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tweet_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// What to do with a follow of an already-live edge or an unfollow of a
/// non-existent one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConflictPolicy {
    /// Reject the log with an error naming the line.
    #[default]
    Reject,
    /// Drop the offending event and count it.
    Skip,
}

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Explicit observation window. When absent the window is inferred from
    /// the event timestamps, aligned outward to whole hours.
    pub window: Option<TimeWindow>,
    pub on_conflict: ConflictPolicy,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {msg}")]
    Malformed {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("{path}:{line}: events not strictly ordered by (ts, seq)")]
    OutOfOrder { path: String, line: usize },
    #[error("{path}:{line}: event at ts {ts} outside window [{lo}, {hi})")]
    OutOfWindow {
        path: String,
        line: usize,
        ts: i64,
        lo: i64,
        hi: i64,
    },
    #[error("{path}:{line}: duplicate follow {follower} -> {followee}")]
    DuplicateFollow {
        path: String,
        line: usize,
        follower: String,
        followee: String,
    },
    #[error("{path}:{line}: unfollow of non-existent edge {follower} -> {followee}")]
    PhantomUnfollow {
        path: String,
        line: usize,
        follower: String,
        followee: String,
    },
}

/// Per-kind event tallies plus events dropped under [`ConflictPolicy::Skip`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EventCounts {
    pub follows: u64,
    pub unfollows: u64,
    pub tweets: u64,
    pub retweets: u64,
    pub skipped_duplicate_follows: u64,
    pub skipped_phantom_unfollows: u64,
}

/// One validity interval of a directed edge, in the in-edge list of the
/// followee. `start == i64::MIN` marks a snapshot edge; `end == i64::MAX`
/// marks an edge still live at the window end. Live at `t` iff
/// `start <= t < end`.
#[derive(Debug, Clone, Copy)]
struct EdgeInterval {
    follower: u32,
    start: i64,
    end: i64,
}

/// Immutable after ingest; all queries are pure.
#[derive(Debug)]
pub struct TemporalGraph {
    names: Vec<String>,
    ids: HashMap<String, u32>,
    window: TimeWindow,
    initial_edge_count: usize,
    in_intervals: Vec<Vec<EdgeInterval>>,
    /// (actor, target, ts) of every applied Follow event, sorted.
    follow_events: Vec<(u32, u32, i64)>,
    events: Vec<Event>,
    /// Indices into `events` with `target == u`, ascending.
    by_target: Vec<Vec<u32>>,
    /// Indices of Tweet events with `actor == u`, ascending.
    tweets_by_actor: Vec<Vec<u32>>,
    counts: EventCounts,
}

impl TemporalGraph {
    /// Parse, validate and index a snapshot plus event log.
    pub fn ingest(
        snapshot_path: &Path,
        events_path: &Path,
        opts: &IngestOptions,
    ) -> Result<TemporalGraph, StoreError> {
        let snapshot = read_snapshot(snapshot_path)?;
        let events = read_event_log(events_path)?;
        let events_name = events_path.display().to_string();
        Self::build(snapshot, events, &events_name, opts)
    }

    /// Build from already-parsed records. `source` names the event log in
    /// diagnostics; raw events must appear in log order.
    pub fn build(
        snapshot: Vec<(String, String)>,
        raw_events: Vec<RawEvent>,
        source: &str,
        opts: &IngestOptions,
    ) -> Result<TemporalGraph, StoreError> {
        let mut names: Vec<String> = Vec::new();
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut intern = |name: &str| -> u32 {
            if let Some(&id) = ids.get(name) {
                return id;
            }
            let id = names.len() as u32;
            names.push(name.to_string());
            ids.insert(name.to_string(), id);
            id
        };

        // Snapshot edges, deduplicated; (follower, followee).
        let mut initial: Vec<(u32, u32)> = Vec::with_capacity(snapshot.len());
        for (line_no, (follower, followee)) in snapshot.iter().enumerate() {
            if follower.is_empty() || followee.is_empty() || follower == followee {
                return Err(StoreError::Malformed {
                    path: "snapshot".into(),
                    line: line_no + 1,
                    msg: format!("bad edge {follower:?} -> {followee:?}"),
                });
            }
            initial.push((intern(follower), intern(followee)));
        }
        initial.sort_unstable();
        initial.dedup();

        // Validate event shape and ordering, intern users.
        let mut events: Vec<Event> = Vec::with_capacity(raw_events.len());
        let mut prev: Option<(i64, u64)> = None;
        for (i, raw) in raw_events.iter().enumerate() {
            let line = i + 1;
            let key = (raw.ts, raw.seq);
            if let Some(p) = prev {
                if key <= p {
                    return Err(StoreError::OutOfOrder {
                        path: source.into(),
                        line,
                    });
                }
            }
            prev = Some(key);
            let has_target = raw.target.is_some();
            if (raw.kind == EventKind::Tweet) == has_target {
                return Err(StoreError::Malformed {
                    path: source.into(),
                    line,
                    msg: format!("kind {} with target={has_target}", raw.kind.as_str()),
                });
            }
            if raw.actor.is_empty() {
                return Err(StoreError::Malformed {
                    path: source.into(),
                    line,
                    msg: "empty actor id".into(),
                });
            }
            if raw.target.as_deref() == Some(raw.actor.as_str()) {
                return Err(StoreError::Malformed {
                    path: source.into(),
                    line,
                    msg: format!("self-targeted {} by {}", raw.kind.as_str(), raw.actor),
                });
            }
            if let Some(w) = opts.window {
                if !w.contains(Timestamp(raw.ts)) {
                    return Err(StoreError::OutOfWindow {
                        path: source.into(),
                        line,
                        ts: raw.ts,
                        lo: w.start.0,
                        hi: w.end.0,
                    });
                }
            }
            events.push(Event {
                ts: Timestamp(raw.ts),
                seq: raw.seq,
                kind: raw.kind,
                actor: UserId(intern(&raw.actor)),
                target: raw.target.as_deref().map(|t| UserId(intern(t))),
                tweet_id: raw.tweet_id.clone(),
                text: raw.text.clone(),
            });
        }

        let window = opts.window.unwrap_or_else(|| infer_window(&events));

        let n = names.len();
        let mut in_intervals: Vec<Vec<EdgeInterval>> = vec![Vec::new(); n];
        // (follower, followee) -> index of the open interval in the followee list.
        let mut open: HashMap<(u32, u32), usize> = HashMap::with_capacity(initial.len());
        for &(follower, followee) in &initial {
            let list = &mut in_intervals[followee as usize];
            open.insert((follower, followee), list.len());
            list.push(EdgeInterval {
                follower,
                start: i64::MIN,
                end: i64::MAX,
            });
        }

        let mut counts = EventCounts::default();
        let mut follow_events: Vec<(u32, u32, i64)> = Vec::new();
        let mut kept: Vec<Event> = Vec::with_capacity(events.len());
        for (i, ev) in events.into_iter().enumerate() {
            let line = i + 1;
            match ev.kind {
                EventKind::Follow => {
                    let follower = ev.actor.0;
                    let followee = ev.target.expect("validated").0;
                    if open.contains_key(&(follower, followee)) {
                        match opts.on_conflict {
                            ConflictPolicy::Reject => {
                                return Err(StoreError::DuplicateFollow {
                                    path: source.into(),
                                    line,
                                    follower: names[follower as usize].clone(),
                                    followee: names[followee as usize].clone(),
                                });
                            }
                            ConflictPolicy::Skip => {
                                counts.skipped_duplicate_follows += 1;
                                continue;
                            }
                        }
                    }
                    let list = &mut in_intervals[followee as usize];
                    open.insert((follower, followee), list.len());
                    list.push(EdgeInterval {
                        follower,
                        start: ev.ts.0,
                        end: i64::MAX,
                    });
                    follow_events.push((follower, followee, ev.ts.0));
                    counts.follows += 1;
                }
                EventKind::Unfollow => {
                    let follower = ev.actor.0;
                    let followee = ev.target.expect("validated").0;
                    match open.remove(&(follower, followee)) {
                        Some(idx) => {
                            in_intervals[followee as usize][idx].end = ev.ts.0;
                            counts.unfollows += 1;
                        }
                        None => match opts.on_conflict {
                            ConflictPolicy::Reject => {
                                return Err(StoreError::PhantomUnfollow {
                                    path: source.into(),
                                    line,
                                    follower: names[follower as usize].clone(),
                                    followee: names[followee as usize].clone(),
                                });
                            }
                            ConflictPolicy::Skip => {
                                counts.skipped_phantom_unfollows += 1;
                                continue;
                            }
                        },
                    }
                }
                EventKind::Tweet => counts.tweets += 1,
                EventKind::Retweet => counts.retweets += 1,
            }
            kept.push(ev);
        }
        follow_events.sort_unstable();

        let mut by_target: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut tweets_by_actor: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (i, ev) in kept.iter().enumerate() {
            if let Some(t) = ev.target {
                by_target[t.index()].push(i as u32);
            }
            if ev.kind == EventKind::Tweet {
                tweets_by_actor[ev.actor.index()].push(i as u32);
            }
        }

        Ok(TemporalGraph {
            names,
            ids,
            window,
            initial_edge_count: initial.len(),
            in_intervals,
            follow_events,
            events: kept,
            by_target,
            tweets_by_actor,
            counts,
        })
    }

    pub fn n_users(&self) -> usize {
        self.names.len()
    }

    pub fn users(&self) -> impl Iterator<Item = UserId> + '_ {
        (0..self.names.len() as u32).map(UserId)
    }

    pub fn user_name(&self, u: UserId) -> &str {
        &self.names[u.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<UserId> {
        self.ids.get(name).copied().map(UserId)
    }

    pub fn window(&self) -> TimeWindow {
        self.window
    }

    pub fn counts(&self) -> &EventCounts {
        &self.counts
    }

    pub fn initial_edge_count(&self) -> usize {
        self.initial_edge_count
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Live in-neighbors of `u` at `t`, ascending by id. Unknown or
    /// follower-less users yield an empty set.
    pub fn followers_at(&self, u: UserId, t: Timestamp) -> Vec<UserId> {
        let mut out: Vec<UserId> = self.in_intervals[u.index()]
            .iter()
            .filter(|iv| iv.start <= t.0 && t.0 < iv.end)
            .map(|iv| UserId(iv.follower))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn indegree_at(&self, u: UserId, t: Timestamp) -> usize {
        self.followers_at(u, t).len()
    }

    /// Whether the edge `follower -> followee` is live at `t`.
    pub fn edge_live_at(&self, follower: UserId, followee: UserId, t: Timestamp) -> bool {
        self.in_intervals[followee.index()]
            .iter()
            .any(|iv| iv.follower == follower.0 && iv.start <= t.0 && t.0 < iv.end)
    }

    /// Followers-of-followers of `u` at `t`, minus the followers themselves
    /// and `u`. Ascending by id.
    pub fn two_hop_at(&self, u: UserId, t: Timestamp) -> Vec<UserId> {
        let one_hop = self.followers_at(u, t);
        let mut seen = vec![false; self.n_users()];
        for &v in &one_hop {
            for iv in &self.in_intervals[v.index()] {
                if iv.start <= t.0 && t.0 < iv.end {
                    seen[iv.follower as usize] = true;
                }
            }
        }
        seen[u.index()] = false;
        for &v in &one_hop {
            seen[v.index()] = false;
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| UserId(i as u32))
            .collect()
    }

    /// Hourly counts of `kind` for `u` over the observation window.
    pub fn hourly_series(&self, u: UserId, kind: SeriesKind) -> HourlySeries {
        let mut counts = vec![0u32; self.window.hours()];
        let mut bump = |ts: Timestamp| {
            if let Some(h) = self.window.hour_of(ts) {
                counts[h] += 1;
            }
        };
        match kind {
            SeriesKind::TweetsAuthored => {
                for &i in &self.tweets_by_actor[u.index()] {
                    bump(self.events[i as usize].ts);
                }
            }
            SeriesKind::FollowsReceived | SeriesKind::UnfollowsReceived
            | SeriesKind::RetweetsReceived => {
                let want = match kind {
                    SeriesKind::FollowsReceived => EventKind::Follow,
                    SeriesKind::UnfollowsReceived => EventKind::Unfollow,
                    _ => EventKind::Retweet,
                };
                for &i in &self.by_target[u.index()] {
                    let ev = &self.events[i as usize];
                    if ev.kind == want {
                        bump(ev.ts);
                    }
                }
            }
        }
        HourlySeries {
            user: u,
            kind,
            counts,
            t0: self.window.start,
        }
    }

    /// Whether a Follow event `actor -> target` lands in `(after, after + horizon_secs]`.
    pub fn followed_within(
        &self,
        actor: UserId,
        target: UserId,
        after: Timestamp,
        horizon_secs: i64,
    ) -> bool {
        let lo = self
            .follow_events
            .partition_point(|&(a, b, ts)| (a, b, ts) <= (actor.0, target.0, after.0));
        self.follow_events[lo..]
            .iter()
            .take_while(|&&(a, b, _)| (a, b) == (actor.0, target.0))
            .any(|&(_, _, ts)| ts <= after.0 + horizon_secs)
    }

    /// `(ts, retweeter)` pairs of Retweet events targeting `author` with
    /// `t0 <= ts < t1`, in log order.
    pub fn retweets_of_in(
        &self,
        author: UserId,
        t0: Timestamp,
        t1: Timestamp,
    ) -> Vec<(Timestamp, UserId)> {
        self.by_target[author.index()]
            .iter()
            .map(|&i| &self.events[i as usize])
            .filter(|ev| ev.kind == EventKind::Retweet && ev.ts >= t0 && ev.ts < t1)
            .map(|ev| (ev.ts, ev.actor))
            .collect()
    }

    /// Tweet events authored by `u`, in log order.
    pub fn tweets_of(&self, u: UserId) -> impl Iterator<Item = &Event> + '_ {
        self.tweets_by_actor[u.index()]
            .iter()
            .map(move |&i| &self.events[i as usize])
    }

    /// Convert an interned event back to its wire form.
    pub fn raw_event(&self, ev: &Event) -> RawEvent {
        RawEvent {
            ts: ev.ts.0,
            seq: ev.seq,
            kind: ev.kind,
            actor: self.user_name(ev.actor).to_string(),
            target: ev.target.map(|t| self.user_name(t).to_string()),
            tweet_id: ev.tweet_id.clone(),
            text: ev.text.clone(),
        }
    }

    /// Sum of live in-degrees over all users at `t`.
    pub fn total_live_edges(&self, t: Timestamp) -> usize {
        self.in_intervals
            .iter()
            .map(|ivs| {
                ivs.iter()
                    .filter(|iv| iv.start <= t.0 && t.0 < iv.end)
                    .count()
            })
            .sum()
    }
}

fn infer_window(events: &[Event]) -> TimeWindow {
    let (min, max) = events.iter().fold((i64::MAX, i64::MIN), |(lo, hi), ev| {
        (lo.min(ev.ts.0), hi.max(ev.ts.0))
    });
    if min > max {
        return TimeWindow::new(0, 0);
    }
    let start = min.div_euclid(3600) * 3600;
    let end = (max + 1).div_euclid(3600) * 3600 + i64::from((max + 1).rem_euclid(3600) != 0) * 3600;
    TimeWindow::new(start, end)
}

/// Read a `follower_id,followee_id` snapshot file.
pub fn read_snapshot(path: &Path) -> Result<Vec<(String, String)>, StoreError> {
    let file = File::open(path).map_err(|e| StoreError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| StoreError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        if line.is_empty() {
            continue;
        }
        let Some((a, b)) = line.split_once(',') else {
            return Err(StoreError::Malformed {
                path: path.display().to_string(),
                line: i + 1,
                msg: "expected follower_id,followee_id".into(),
            });
        };
        out.push((a.to_string(), b.to_string()));
    }
    Ok(out)
}

/// Read a JSON-lines event log.
pub fn read_event_log(path: &Path) -> Result<Vec<RawEvent>, StoreError> {
    let file = File::open(path).map_err(|e| StoreError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| StoreError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        if line.is_empty() {
            continue;
        }
        let raw: RawEvent =
            serde_json::from_str(&line).map_err(|e| StoreError::Malformed {
                path: path.display().to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        out.push(raw);
    }
    Ok(out)
}
