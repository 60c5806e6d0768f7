//! Per-user burst detection on hourly arrival series.
//!
//! An hour's expectation is the weighted mean of the counts at the same hour
//! of day within +-48 h (lags +-24 h and +-48 h, the hour itself excluded),
//! with weights `w(dt) = exp(-lambda * |dt| / 24)`. The residual
//! `f(t) = x(t) - E[x | hour-of-day]` is compared against its own standard
//! deviation; hours above the threshold merge into burst intervals, and
//! trigger/response intervals at most one hour apart pair into co-bursts.

use serde::Serialize;
use thiserror::Error;

use crate::event::{HourlySeries, SeriesKind, UserId};

/// Same-hour-of-day lags used for the expectation, in hours.
const NEIGHBOR_LAGS: [i64; 4] = [-48, -24, 24, 48];

#[derive(Debug, Error)]
pub enum BurstError {
    #[error("series has {hours} hours; decay fit needs at least 72")]
    SeriesTooShort { hours: usize },
}

/// Residual series after removing the daily cycle.
#[derive(Debug, Clone)]
pub struct DeseasonalizedSeries {
    /// Residual per hour; meaningful only where `defined`.
    pub residuals: Vec<f64>,
    /// True where at least one same-hour neighbor exists.
    pub defined: Vec<bool>,
    /// Population standard deviation of the defined residuals.
    pub sigma: f64,
    /// Decay parameter of the neighbor weights.
    pub lambda: f64,
}

/// A maximal run of consecutive above-threshold hours.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Burst {
    pub user: UserId,
    pub kind: SeriesKind,
    pub hour_start: usize,
    pub hour_end: usize,
    /// Hour of the largest residual within the interval.
    pub peak_hour: usize,
    /// Peak residual in units of the series sigma.
    pub magnitude_sigma: f64,
    /// Raw count at the peak hour.
    pub raw_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoBurstKind {
    RetweetFollow,
    TweetUnfollow,
}

impl CoBurstKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoBurstKind::RetweetFollow => "retweet_follow",
            CoBurstKind::TweetUnfollow => "tweet_unfollow",
        }
    }
}

/// A trigger burst paired with a response burst starting at most one hour
/// after the trigger interval ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoBurst {
    pub kind: CoBurstKind,
    pub trigger: Burst,
    pub response: Burst,
    pub lag_hours: u8,
}

#[derive(Debug, Clone, Copy)]
pub struct DetectConfig {
    pub threshold_sigma: f64,
    /// Minimum raw count at a flagged hour; guards sparse series.
    pub min_count: u32,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            threshold_sigma: 2.0,
            min_count: 5,
        }
    }
}

/// Sum of squared leave-self-out residuals at a given decay.
fn objective(x: &[f64], lambda: f64) -> f64 {
    let d = deseasonalize_f64(x, lambda);
    d.residuals
        .iter()
        .zip(&d.defined)
        .filter(|&(_, &def)| def)
        .map(|(&f, _)| f * f)
        .sum()
}

/// Fit the weight decay by minimizing the squared prediction residuals,
/// golden-section search on `[0, 5]`. Flat objectives (constant or all-zero
/// series) resolve to `lambda = 0`.
pub fn fit_decay(series: &HourlySeries) -> Result<f64, BurstError> {
    let hours = series.counts.len();
    if hours < 72 {
        return Err(BurstError::SeriesTooShort { hours });
    }
    if series.counts.iter().all(|&c| c == 0) {
        return Ok(0.0);
    }
    let x: Vec<f64> = series.counts.iter().map(|&c| f64::from(c)).collect();

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 5.0f64);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = objective(&x, a);
    let mut fb = objective(&x, b);
    while hi - lo > 1e-4 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = objective(&x, a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = objective(&x, b);
        }
    }
    let best = 0.5 * (lo + hi);
    let j_best = objective(&x, best);
    let j_zero = objective(&x, 0.0);
    if j_zero <= j_best * (1.0 + 1e-12) + 1e-12 {
        Ok(0.0)
    } else {
        Ok(best)
    }
}

/// Remove the daily cycle from an hourly count series.
pub fn deseasonalize(series: &HourlySeries, lambda: f64) -> DeseasonalizedSeries {
    let x: Vec<f64> = series.counts.iter().map(|&c| f64::from(c)).collect();
    deseasonalize_f64(&x, lambda)
}

fn deseasonalize_f64(x: &[f64], lambda: f64) -> DeseasonalizedSeries {
    let n = x.len();
    let mut residuals = vec![0.0; n];
    let mut defined = vec![false; n];
    for i in 0..n {
        let mut num = 0.0;
        let mut den = 0.0;
        for lag in NEIGHBOR_LAGS {
            let j = i as i64 + lag;
            if j < 0 || j >= n as i64 {
                continue;
            }
            let w = (-lambda * lag.abs() as f64 / 24.0).exp();
            num += x[j as usize] * w;
            den += w;
        }
        if den > 0.0 {
            residuals[i] = x[i] - num / den;
            defined[i] = true;
        }
    }
    let sigma = population_std(
        residuals
            .iter()
            .zip(&defined)
            .filter(|&(_, &d)| d)
            .map(|(&f, _)| f),
    );
    DeseasonalizedSeries {
        residuals,
        defined,
        sigma,
        lambda,
    }
}

fn population_std(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    if v.is_empty() {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / v.len() as f64;
    var.sqrt()
}

/// Flag hours with `residual > threshold * sigma` and raw count at least
/// `min_count`, then merge consecutive flagged hours into intervals.
/// A constant series (sigma = 0) yields no bursts.
pub fn detect_bursts(
    series: &HourlySeries,
    d: &DeseasonalizedSeries,
    cfg: &DetectConfig,
) -> Vec<Burst> {
    if d.sigma <= 0.0 {
        return Vec::new();
    }
    let flagged: Vec<usize> = (0..series.counts.len())
        .filter(|&i| {
            d.defined[i]
                && d.residuals[i] > cfg.threshold_sigma * d.sigma
                && series.counts[i] >= cfg.min_count
        })
        .collect();
    let mut bursts = Vec::new();
    let mut run_start = 0usize;
    for (k, &h) in flagged.iter().enumerate() {
        let run_ends = k + 1 == flagged.len() || flagged[k + 1] != h + 1;
        if run_ends {
            let hours = &flagged[run_start..=k];
            let &peak = hours
                .iter()
                .max_by(|&&a, &&b| d.residuals[a].total_cmp(&d.residuals[b]))
                .expect("non-empty run");
            bursts.push(Burst {
                user: series.user,
                kind: series.kind,
                hour_start: hours[0],
                hour_end: *hours.last().expect("non-empty run"),
                peak_hour: peak,
                magnitude_sigma: d.residuals[peak] / d.sigma,
                raw_count: series.counts[peak],
            });
            run_start = k + 1;
        }
    }
    bursts
}

/// Fit, deseasonalize and detect in one step. Series whose maximum hourly
/// count is below `min_count` cannot contain a burst and short-circuit.
pub fn detect_series_bursts(
    series: &HourlySeries,
    cfg: &DetectConfig,
) -> Result<Vec<Burst>, BurstError> {
    if series.max() < cfg.min_count {
        return Ok(Vec::new());
    }
    let lambda = fit_decay(series)?;
    let d = deseasonalize(series, lambda);
    Ok(detect_bursts(series, &d, cfg))
}

/// Pair trigger and response bursts of one user: retweets-received bursts
/// with follows-received bursts, and tweets-authored bursts with
/// unfollows-received bursts. A response pairs with the nearest trigger whose
/// interval ends at most one hour before the response starts.
pub fn pair_cobursts(
    retweets_received: &[Burst],
    follows_received: &[Burst],
    tweets_authored: &[Burst],
    unfollows_received: &[Burst],
) -> Vec<CoBurst> {
    let mut out = pair_kind(
        retweets_received,
        follows_received,
        CoBurstKind::RetweetFollow,
    );
    out.extend(pair_kind(
        tweets_authored,
        unfollows_received,
        CoBurstKind::TweetUnfollow,
    ));
    out
}

fn pair_kind(triggers: &[Burst], responses: &[Burst], kind: CoBurstKind) -> Vec<CoBurst> {
    let mut out = Vec::new();
    for resp in responses {
        let eligible = triggers
            .iter()
            .filter(|t| t.hour_start <= resp.hour_start && resp.hour_start <= t.hour_end + 1)
            .max_by_key(|t| t.hour_start);
        if let Some(trig) = eligible {
            debug_assert_eq!(trig.user, resp.user);
            let lag = u8::from(resp.hour_start > trig.hour_end);
            out.push(CoBurst {
                kind,
                trigger: trig.clone(),
                response: resp.clone(),
                lag_hours: lag,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Timestamp;
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    fn series(counts: Vec<u32>) -> HourlySeries {
        HourlySeries {
            user: UserId(0),
            kind: SeriesKind::FollowsReceived,
            counts,
            t0: Timestamp(0),
        }
    }

    /// Literal re-statement of the expectation formula: scan every other hour
    /// and keep those within 48 h at the same hour of day.
    #[allow(clippy::needless_range_loop)]
    fn oracle_deseasonalize(x: &[f64], lambda: f64) -> (Vec<f64>, Vec<bool>) {
        let n = x.len();
        let mut f = vec![0.0; n];
        let mut defined = vec![false; n];
        for i in 0..n {
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let dt = (i as i64 - j as i64).abs();
                if dt <= 48 && i % 24 == j % 24 {
                    let w = (-lambda * dt as f64 / 24.0).exp();
                    num += x[j] * w;
                    den += w;
                }
            }
            if den > 0.0 {
                f[i] = x[i] - num / den;
                defined[i] = true;
            }
        }
        (f, defined)
    }

    #[test]
    fn constant_series_has_zero_residuals_and_no_bursts() {
        let s = series(vec![7; 240]);
        let lambda = fit_decay(&s).unwrap();
        assert_eq!(lambda, 0.0);
        let d = deseasonalize(&s, lambda);
        for (i, (&f, &def)) in d.residuals.iter().zip(&d.defined).enumerate() {
            assert!(def, "hour {i} should have neighbors");
            assert!(f.abs() < 1e-12);
        }
        assert_eq!(d.sigma, 0.0);
        assert!(detect_bursts(&s, &d, &DetectConfig::default()).is_empty());
    }

    #[test]
    fn equal_neighbor_spike_residual_is_exact() {
        let mut counts = vec![10u32; 240];
        counts[60] = 50;
        let s = series(counts);
        let d = deseasonalize(&s, 0.7);
        assert!((d.residuals[60] - 40.0).abs() < 1e-12);
    }

    #[test]
    fn matches_direct_summation_oracle() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.random_range(30..400usize);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..40.0)).collect();
            let lambda = rng.random_range(0.0..3.0);
            let got = deseasonalize_f64(&x, lambda);
            let (want_f, want_def) = oracle_deseasonalize(&x, lambda);
            assert_eq!(got.defined, want_def);
            for i in 0..n {
                if want_def[i] {
                    assert!(
                        (got.residuals[i] - want_f[i]).abs() < 1e-9,
                        "hour {i}: {} vs {}",
                        got.residuals[i],
                        want_f[i]
                    );
                }
            }
        }
    }

    #[test]
    fn masked_hours_without_neighbors() {
        // 30 hours: hours 0..6 have a +24 neighbor; hours 6..24 have none.
        let s = series((0..30).map(|i| i as u32 % 9).collect());
        let d = deseasonalize(&s, 0.5);
        for i in 0..30 {
            let expect = i + 24 < 30 || i >= 24;
            assert_eq!(d.defined[i], expect, "hour {i}");
        }
    }

    #[test]
    fn shift_invariance_and_scale_equivariance() {
        let mut rng = StdRng::seed_from_u64(9);
        let base: Vec<u32> = (0..240).map(|_| rng.random_range(0..30u32)).collect();
        let d0 = deseasonalize(&series(base.clone()), 0.8);
        let shifted = deseasonalize(&series(base.iter().map(|&c| c + 11).collect()), 0.8);
        let scaled = deseasonalize(&series(base.iter().map(|&c| c * 3).collect()), 0.8);
        for i in 0..240 {
            if d0.defined[i] {
                assert!((d0.residuals[i] - shifted.residuals[i]).abs() < 1e-9);
                assert!((3.0 * d0.residuals[i] - scaled.residuals[i]).abs() < 1e-9);
            }
        }
        assert!((3.0 * d0.sigma - scaled.sigma).abs() < 1e-9);
        // Burst sets agree since thresholds are in sigma units (min_count 0).
        let cfg = DetectConfig {
            threshold_sigma: 2.0,
            min_count: 0,
        };
        let b0 = detect_bursts(&series(base.clone()), &d0, &cfg);
        let b3 = detect_bursts(
            &series(base.iter().map(|&c| c * 3).collect()),
            &scaled,
            &cfg,
        );
        let hours = |bs: &[Burst]| -> Vec<(usize, usize)> {
            bs.iter().map(|b| (b.hour_start, b.hour_end)).collect()
        };
        assert_eq!(hours(&b0), hours(&b3));
    }

    #[test]
    fn pure_diurnal_signal_is_removed() {
        let profile: Vec<u32> = (0..24).map(|h| 5 + (h % 7) * 4).collect();
        let counts: Vec<u32> = (0..24 * 14).map(|i| profile[i % 24]).collect();
        let d = deseasonalize(&series(counts), 1.3);
        for i in 0..d.residuals.len() {
            if d.defined[i] {
                assert!(d.residuals[i].abs() < 1e-9, "hour {i}");
            }
        }
    }

    #[test]
    fn planted_spikes_are_flagged_and_merged() {
        let mut rng = StdRng::seed_from_u64(21);
        let profile: Vec<f64> = (0..24).map(|h| 2.0 + 1.5 * (h as f64 / 4.0).sin()).collect();
        let mut counts: Vec<u32> = (0..720)
            .map(|i| {
                let lam = profile[i % 24];
                // Small Poisson-ish noise around the profile.
                let noise: f64 = rng.random_range(-1.0..1.0) + rng.random_range(-1.0..1.0);
                (lam + noise).round().max(0.0) as u32
            })
            .collect();
        for h in [100, 101, 400] {
            counts[h] += 30;
        }
        let s = series(counts);
        let bursts = detect_series_bursts(&s, &DetectConfig::default()).unwrap();
        assert_eq!(bursts.len(), 2, "{bursts:?}");
        assert_eq!((bursts[0].hour_start, bursts[0].hour_end), (100, 101));
        assert_eq!((bursts[1].hour_start, bursts[1].hour_end), (400, 400));
        assert!(bursts[0].magnitude_sigma > 4.0);
    }

    #[test]
    fn tighter_threshold_flags_a_subset() {
        let mut rng = StdRng::seed_from_u64(5);
        let counts: Vec<u32> = (0..720)
            .map(|_| {
                let base = rng.random_range(0..14u32);
                if rng.random_range(0.0..1.0) < 0.02 {
                    base + rng.random_range(10..40u32)
                } else {
                    base
                }
            })
            .collect();
        let s = series(counts);
        let lambda = fit_decay(&s).unwrap();
        let d = deseasonalize(&s, lambda);
        let expand = |bs: Vec<Burst>| -> Vec<usize> {
            bs.iter().flat_map(|b| b.hour_start..=b.hour_end).collect()
        };
        let loose = expand(detect_bursts(
            &s,
            &d,
            &DetectConfig {
                threshold_sigma: 2.0,
                min_count: 5,
            },
        ));
        let tight = expand(detect_bursts(
            &s,
            &d,
            &DetectConfig {
                threshold_sigma: 3.0,
                min_count: 5,
            },
        ));
        assert!(!loose.is_empty());
        for h in &tight {
            assert!(loose.contains(h));
        }
    }

    #[test]
    fn decay_recovery_on_same_hour_ar_process() {
        // Per hour-of-day lane: AR(1) signal (phi = 0.8) plus observation
        // noise at variance ratio 0.62. For that process the decay
        // minimizing the population leave-one-out objective is 0.502
        // (solved from the lane covariances), so the fit should average
        // close to 0.5.
        use rand_distr::{Distribution, StandardNormal};
        let lambda_star = 0.5f64;
        let (phi, noise_sd) = (0.8f64, 0.62f64.sqrt());
        let signal_sd = 9.0f64;
        let days = 120;
        let mut sum = 0.0;
        let trials = 100;
        for trial in 0..trials {
            let mut rng = StdRng::seed_from_u64(1000 + trial);
            let mut counts = vec![0u32; days * 24];
            for h in 0..24 {
                let mut v: f64 = <StandardNormal as Distribution<f64>>::sample(
                    &StandardNormal,
                    &mut rng,
                );
                for d in 0..days {
                    let eps: f64 = <StandardNormal as Distribution<f64>>::sample(
                        &StandardNormal,
                        &mut rng,
                    );
                    v = phi * v + eps * (1.0 - phi * phi).sqrt();
                    let eta: f64 = <StandardNormal as Distribution<f64>>::sample(
                        &StandardNormal,
                        &mut rng,
                    );
                    let x = 60.0 + signal_sd * (v + noise_sd * eta);
                    counts[d * 24 + h] = x.round().max(0.0) as u32;
                }
            }
            let lambda = fit_decay(&series(counts)).unwrap();
            sum += lambda;
        }
        let mean = sum / trials as f64;
        assert!(
            (mean - lambda_star).abs() < 0.15,
            "mean recovered lambda {mean}"
        );
    }

    #[test]
    fn short_series_is_an_error() {
        let s = series(vec![1; 71]);
        assert!(matches!(
            fit_decay(&s),
            Err(BurstError::SeriesTooShort { hours: 71 })
        ));
    }

    fn burst_at(start: usize, end: usize) -> Burst {
        Burst {
            user: UserId(0),
            kind: SeriesKind::RetweetsReceived,
            hour_start: start,
            hour_end: end,
            peak_hour: start,
            magnitude_sigma: 5.0,
            raw_count: 20,
        }
    }

    #[test]
    fn pairing_lag_rules() {
        let trig = [burst_at(30, 30)];
        let resp = [burst_at(31, 31)];
        let pairs = pair_kind(&trig, &resp, CoBurstKind::RetweetFollow);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].lag_hours, 1);

        let too_late = [burst_at(33, 33)];
        assert!(pair_kind(&trig, &too_late, CoBurstKind::RetweetFollow).is_empty());

        // Two candidate triggers: the nearest (latest start) wins.
        let trigs = [burst_at(29, 29), burst_at(30, 30)];
        let resp = [burst_at(30, 30)];
        let pairs = pair_kind(&trigs, &resp, CoBurstKind::RetweetFollow);
        assert_eq!(pairs[0].trigger.hour_start, 30);
        assert_eq!(pairs[0].lag_hours, 0);
    }

    #[test]
    fn pairing_spans_merged_intervals() {
        // Trigger spans 10..=12; responses starting anywhere in 10..=13 pair.
        let trig = [burst_at(10, 12)];
        for (h, expect_lag) in [(10usize, 0u8), (12, 0), (13, 1)] {
            let resp = [burst_at(h, h)];
            let pairs = pair_kind(&trig, &resp, CoBurstKind::TweetUnfollow);
            assert_eq!(pairs.len(), 1, "response at {h}");
            assert_eq!(pairs[0].lag_hours, expect_lag);
        }
        let resp = [burst_at(14, 14)];
        assert!(pair_kind(&trig, &resp, CoBurstKind::TweetUnfollow).is_empty());
    }
}
