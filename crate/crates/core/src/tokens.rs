//! Which tokens in burst-triggering tweets shift the odds of a follow burst.
//!
//! Each retweet burst contributes its triggering tweet once. Tokens are
//! filtered by support and a Pearson chi-squared test, then ranked by the
//! probability ratio `R = P(follow burst | token) / P(follow burst | no token)`.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::textsim::tokenize;

/// 95% chi-squared quantile at one degree of freedom.
const CHI2_95: f64 = 3.841_458_820_694_124;
const CHI2_90: f64 = 2.705_543_454_095_404;
const CHI2_99: f64 = 6.634_896_601_021_213;

/// 2x2 contingency summary for one token over burst-triggering tweets.
#[derive(Debug, Clone, Serialize)]
pub struct TokenStat {
    pub token: String,
    /// Token present, follow burst occurred.
    pub a: u64,
    /// Token present, no follow burst.
    pub b: u64,
    /// Token absent, follow burst occurred.
    pub c: u64,
    /// Token absent, no follow burst.
    pub d: u64,
    pub chi2: f64,
    /// `P(burst | present) / P(burst | absent)`; infinite when no absent
    /// tweet ever bursts.
    pub ratio: f64,
}

impl TokenStat {
    pub fn support(&self) -> u64 {
        self.a + self.b
    }
}

/// Pearson chi-squared statistic of a 2x2 table, no continuity correction.
pub fn chi2_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let n = a + b + c + d;
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    if denom == 0.0 {
        return 0.0;
    }
    n * (a * d - b * c).powi(2) / denom
}

fn chi2_threshold(confidence: f64) -> f64 {
    if (confidence - 0.90).abs() < 1e-9 {
        CHI2_90
    } else if (confidence - 0.99).abs() < 1e-9 {
        CHI2_99
    } else {
        CHI2_95
    }
}

/// Tokenize each triggering tweet, build per-token contingency counts over
/// `(text, caused_follow_burst)` pairs, and keep tokens with at least
/// `min_support` occurrences that pass the chi-squared test. Sorted by
/// descending ratio, ties by token for determinism.
pub fn token_analysis(
    bursts: &[(String, bool)],
    min_support: u64,
    confidence: f64,
) -> Vec<TokenStat> {
    let threshold = chi2_threshold(confidence);
    let total = bursts.len() as u64;
    let total_pos = bursts.iter().filter(|(_, l)| *l).count() as u64;
    let mut present_pos: HashMap<String, u64> = HashMap::new();
    let mut present_all: HashMap<String, u64> = HashMap::new();
    let mut seen = HashSet::new();
    for (text, label) in bursts {
        seen.clear();
        for tok in tokenize(text) {
            if !seen.insert(tok.clone()) {
                continue; // one vote per tweet
            }
            *present_all.entry(tok.clone()).or_insert(0) += 1;
            if *label {
                *present_pos.entry(tok).or_insert(0) += 1;
            }
        }
    }
    let mut out: Vec<TokenStat> = present_all
        .into_iter()
        .filter(|&(_, n_present)| n_present >= min_support)
        .filter_map(|(token, n_present)| {
            let a = present_pos.get(&token).copied().unwrap_or(0);
            let b = n_present - a;
            let c = total_pos - a;
            let d = (total - n_present) - c;
            let chi2 = chi2_2x2(a as f64, b as f64, c as f64, d as f64);
            if chi2 <= threshold {
                return None;
            }
            let p_present = a as f64 / n_present as f64;
            let absent = c + d;
            let p_absent = if absent > 0 { c as f64 / absent as f64 } else { 0.0 };
            let ratio = if p_absent > 0.0 {
                p_present / p_absent
            } else {
                f64::INFINITY
            };
            Some(TokenStat {
                token,
                a,
                b,
                c,
                d,
                chi2,
                ratio,
            })
        })
        .collect();
    out.sort_by(|x, y| {
        y.ratio
            .total_cmp(&x.ratio)
            .then_with(|| x.token.cmp(&y.token))
    });
    out
}
