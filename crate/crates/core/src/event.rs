//! Core domain types shared across the crate: users, timestamps, events,
//! observation windows, and per-user hourly count series.

use serde::{Deserialize, Serialize};

pub const SECONDS_PER_HOUR: i64 = 3600;

/// Interned handle for a user. The string identifier from the input files is
/// kept in the [`crate::store::TemporalGraph`] user table; everything else
/// works with this compact index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UserId(pub u32);

impl UserId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Seconds since the Unix epoch, UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub fn seconds(self) -> i64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Follow,
    Unfollow,
    Tweet,
    Retweet,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Follow => "follow",
            EventKind::Unfollow => "unfollow",
            EventKind::Tweet => "tweet",
            EventKind::Retweet => "retweet",
        }
    }
}

/// One timestamped action from the log, with user ids already interned.
///
/// Invariants enforced at ingest: `target` is present iff the kind is not
/// `Tweet`, `actor != target`, and `(ts, seq)` is strictly increasing across
/// the log.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub ts: Timestamp,
    pub seq: u64,
    pub kind: EventKind,
    pub actor: UserId,
    /// Followee for Follow/Unfollow, original author for Retweet.
    pub target: Option<UserId>,
    pub tweet_id: Option<String>,
    pub text: Option<String>,
}

/// Half-open observation window `[start, end)`, aligned to whole hours.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: Timestamp,
    pub end: Timestamp,
}

impl TimeWindow {
    pub fn new(start: i64, end: i64) -> Self {
        TimeWindow {
            start: Timestamp(start),
            end: Timestamp(end),
        }
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        t >= self.start && t < self.end
    }

    /// Number of hour buckets, `ceil(len / 3600)`.
    pub fn hours(&self) -> usize {
        let len = (self.end.0 - self.start.0).max(0);
        (len as usize).div_ceil(SECONDS_PER_HOUR as usize)
    }

    /// Bucket index of a timestamp relative to the window start.
    pub fn hour_of(&self, t: Timestamp) -> Option<usize> {
        if !self.contains(t) {
            return None;
        }
        Some(((t.0 - self.start.0) / SECONDS_PER_HOUR) as usize)
    }

    /// Timestamp of the first second of bucket `hour`.
    pub fn hour_start(&self, hour: usize) -> Timestamp {
        Timestamp(self.start.0 + hour as i64 * SECONDS_PER_HOUR)
    }

    /// Timestamp of the last second of bucket `hour`.
    pub fn hour_end(&self, hour: usize) -> Timestamp {
        Timestamp(self.start.0 + (hour as i64 + 1) * SECONDS_PER_HOUR - 1)
    }
}

/// Which per-user arrival series an hourly count vector describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Follow events targeting the user.
    FollowsReceived,
    /// Unfollow events targeting the user.
    UnfollowsReceived,
    /// Tweet events authored by the user (retweets excluded).
    TweetsAuthored,
    /// Retweet events whose target (original author) is the user.
    RetweetsReceived,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 4] = [
        SeriesKind::FollowsReceived,
        SeriesKind::UnfollowsReceived,
        SeriesKind::TweetsAuthored,
        SeriesKind::RetweetsReceived,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesKind::FollowsReceived => "follows_received",
            SeriesKind::UnfollowsReceived => "unfollows_received",
            SeriesKind::TweetsAuthored => "tweets_authored",
            SeriesKind::RetweetsReceived => "retweets_received",
        }
    }
}

/// Hourly event counts for one user and one series kind.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    pub user: UserId,
    pub kind: SeriesKind,
    /// Counts per hour bucket; length equals `window.hours()`.
    pub counts: Vec<u32>,
    /// Start of bucket 0.
    pub t0: Timestamp,
}

impl HourlySeries {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    pub fn max(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}
