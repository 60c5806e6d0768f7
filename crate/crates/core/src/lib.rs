//! Burst analytics for a co-evolving follower graph.
//!
//! The pipeline ingests a follower-graph snapshot plus a timestamped event
//! log (follows, unfollows, tweets, retweets), detects per-user bursts in
//! the deseasonalized hourly arrival series, relates retweet bursts to
//! follow bursts through ego-network and text-similarity measurements, fits
//! an exponential follow-probability law over standardized tweet similarity,
//! and evaluates how well the exposure-weighted predictor ranks retweet
//! bursts that go on to trigger follow bursts.
//!
//! A deterministic synthetic generator ([`synthgen`]) produces desk-scale
//! datasets with known ground truth so every stage is testable end to end.

pub mod burst;
pub mod egonet;
pub mod eval;
pub mod event;
pub mod model;
pub mod pipeline;
pub mod store;
pub mod synthgen;
pub mod textsim;
pub mod tokens;

pub use event::{Event, EventKind, HourlySeries, SeriesKind, TimeWindow, Timestamp, UserId};
pub use store::TemporalGraph;
