//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line. Most criteria run against a shared 10k-user, 30-day
//! synthetic dataset with planted ground truth.

use std::collections::HashSet;
use std::sync::OnceLock;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use burstnet_core::burst::{deseasonalize, Burst, CoBurst, CoBurstKind, DetectConfig};
use burstnet_core::egonet::{
    edge_density, eval_ego_metric, metric_curves, shuffled_control, wcc_count,
    CoherenceConfig, EgoMetric, EgoSnapshot,
};
use burstnet_core::eval::{
    average_precision, descriptive_stats, follow_is_exposure_driven,
    Method,
};
use burstnet_core::event::{EventKind, HourlySeries, SeriesKind, Timestamp, UserId};
use burstnet_core::model::{exposure_set, fit, p_hat, simulate_observations, ModelParams};
use burstnet_core::pipeline::{
    all_cobursts, detect_all_bursts, follow_burst_hours, full_experiment, labeled_retweet_bursts,
    ExperimentOutput, ExperimentPlan,
};
use burstnet_core::store::{ConflictPolicy, IngestOptions, RawEvent, TemporalGraph};
use burstnet_core::synthgen::{
    generate, truth_report, write_output, GroundTruth, PipelineFindings, SynthConfig,
};
use burstnet_core::textsim::{build_corpus, similarity_stats, tfidf, y_score, TfIdfTable};
use burstnet_core::tokens::{chi2_2x2, token_analysis};

const STANDARD_USERS: u32 = 10_000;
const STANDARD_DAYS: u32 = 30;
const STANDARD_SEED: u64 = 2024;

struct StandardRun {
    cfg: SynthConfig,
    truth: GroundTruth,
    graph: TemporalGraph,
    table: TfIdfTable,
    bursts: Vec<Burst>,
    cobursts: Vec<CoBurst>,
    experiment: ExperimentOutput,
}

static RUN: OnceLock<StandardRun> = OnceLock::new();

fn standard() -> &'static StandardRun {
    RUN.get_or_init(|| {
        let cfg = SynthConfig::standard(STANDARD_USERS, STANDARD_DAYS, STANDARD_SEED);
        let out = generate(&cfg).expect("standard config generates");
        let graph = TemporalGraph::build(
            out.snapshot.clone(),
            out.events.clone(),
            "standard",
            &IngestOptions {
                window: Some(cfg.window()),
                ..Default::default()
            },
        )
        .expect("standard output ingests strictly");
        let corpus = build_corpus(&graph, false);
        let table = tfidf(&corpus).expect("corpus has enough documents");
        let bursts = detect_all_bursts(&graph, &DetectConfig::default()).expect("series length");
        let cobursts = all_cobursts(&bursts);
        let fb_hours = follow_burst_hours(&bursts);
        let experiment = full_experiment(
            &graph,
            &table,
            fb_hours,
            &labeled_retweet_bursts(&graph, &bursts, &cobursts),
            &ExperimentPlan {
                seed: STANDARD_SEED,
                ..Default::default()
            },
        )
        .expect("experiment runs");
        StandardRun {
            cfg,
            truth: out.truth,
            graph,
            table,
            bursts,
            cobursts,
            experiment,
        }
    })
}

fn pass(n: u32, name: &str) {
    println!("ACCEPTANCE criterion {n} ({name}): PASS");
}

// ---------------------------------------------------------------------
// Criterion 1: oracle equivalence on random small instances.
// ---------------------------------------------------------------------

fn random_snapshot(rng: &mut StdRng, max_k: usize) -> EgoSnapshot {
    let k = rng.random_range(0..max_k);
    let members: Vec<UserId> = (0..k as u32).map(UserId).collect();
    let mut edges = Vec::new();
    for i in 0..k {
        for j in 0..k {
            if i != j && rng.random_range(0.0..1.0) < 0.08 {
                edges.push((UserId(i as u32), UserId(j as u32)));
            }
        }
    }
    EgoSnapshot {
        center: UserId(u32::MAX),
        t: Timestamp(0),
        members,
        edges,
    }
}

fn oracle_wcc(s: &EgoSnapshot) -> usize {
    use std::collections::{HashMap, VecDeque};
    let mut adj: HashMap<UserId, Vec<UserId>> = HashMap::new();
    for &(a, b) in &s.edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut seen: HashSet<UserId> = HashSet::new();
    let mut comps = 0;
    for &m in &s.members {
        if seen.contains(&m) {
            continue;
        }
        comps += 1;
        let mut q = VecDeque::from([m]);
        seen.insert(m);
        while let Some(x) = q.pop_front() {
            for &y in adj.get(&x).into_iter().flatten() {
                if seen.insert(y) {
                    q.push_back(y);
                }
            }
        }
    }
    comps
}

/// Random temporal follow graph over `n` users plus some retweet events.
fn random_temporal_instance(
    rng: &mut StdRng,
) -> (TemporalGraph, Vec<(String, String)>, Vec<RawEvent>) {
    let n = rng.random_range(5..18u32);
    let mut snapshot = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_range(0.0..1.0) < 0.18 {
                snapshot.push((format!("u{a}"), format!("u{b}")));
            }
        }
    }
    let mut events = Vec::new();
    let mut ts = 0i64;
    for k in 0..rng.random_range(5..40usize) {
        ts += rng.random_range(1..200i64);
        let actor = rng.random_range(0..n);
        let mut target = rng.random_range(0..n - 1);
        if target >= actor {
            target += 1;
        }
        events.push(RawEvent {
            ts,
            seq: k as u64,
            kind: EventKind::Retweet,
            actor: format!("u{actor}"),
            target: Some(format!("u{target}")),
            tweet_id: None,
            text: None,
        });
    }
    let g = TemporalGraph::build(
        snapshot.clone(),
        events.clone(),
        "inst",
        &IngestOptions::default(),
    )
    .unwrap();
    (g, snapshot, events)
}

#[test]
fn criterion_1_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);

    // wcc_count and edge_density vs brute force.
    for _ in 0..250 {
        let s = random_snapshot(&mut rng, 50);
        assert_eq!(wcc_count(&s), oracle_wcc(&s));
        let k = s.members.len();
        let want = if k < 2 {
            None
        } else {
            Some(s.edges.len() as f64 / (k * (k - 1)) as f64)
        };
        match (edge_density(&s), want) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-9),
            (None, None) => {}
            other => panic!("density disagreement: {other:?}"),
        }
    }

    // two_hop_at and exposure_set vs brute-force enumeration.
    for _ in 0..250 {
        let (g, snapshot, events) = random_temporal_instance(&mut rng);
        let followers = |u: &str| -> Vec<String> {
            snapshot
                .iter()
                .filter(|(_, b)| b == u)
                .map(|(a, _)| a.clone())
                .collect()
        };
        let uname = format!("u{}", rng.random_range(0..5u32));
        let Some(u) = g.lookup(&uname) else { continue };
        let t0 = Timestamp(rng.random_range(0..2000i64));
        let t1 = Timestamp(t0.0 + rng.random_range(1..2000i64));

        let n1 = followers(&uname);
        let mut n2: Vec<String> = Vec::new();
        for v in &n1 {
            for w in followers(v) {
                if w != uname && !n1.contains(&w) && !n2.contains(&w) {
                    n2.push(w);
                }
            }
        }
        n2.sort();
        let mut got: Vec<String> = g
            .two_hop_at(u, t0)
            .iter()
            .map(|&x| g.user_name(x).to_string())
            .collect();
        got.sort();
        assert_eq!(got, n2, "two-hop mismatch for {uname}");

        let es = exposure_set(&g, u, (t0, t1));
        let mut got: Vec<String> = es
            .users
            .iter()
            .map(|&x| g.user_name(x).to_string())
            .collect();
        got.sort();
        let mut want: Vec<String> = n2
            .iter()
            .filter(|j| {
                let followed: Vec<String> = snapshot
                    .iter()
                    .filter(|(a, _)| &a == j)
                    .map(|(_, b)| b.clone())
                    .collect();
                events.iter().any(|e| {
                    e.ts >= t0.0
                        && e.ts < t1.0
                        && e.target.as_deref() == Some(uname.as_str())
                        && followed.contains(&e.actor)
                })
            })
            .cloned()
            .collect();
        want.sort();
        assert_eq!(got, want, "exposure mismatch for {uname}");
    }

    // deseasonalize vs the direct double-loop statement of the formula.
    #[allow(clippy::needless_range_loop)]
    for _ in 0..200 {
        let n = rng.random_range(30..300usize);
        let counts: Vec<u32> = (0..n).map(|_| rng.random_range(0..40u32)).collect();
        let lambda = rng.random_range(0.0..3.0);
        let series = HourlySeries {
            user: UserId(0),
            kind: SeriesKind::FollowsReceived,
            counts: counts.clone(),
            t0: Timestamp(0),
        };
        let d = deseasonalize(&series, lambda);
        for i in 0..n {
            let mut num = 0.0;
            let mut den = 0.0;
            for j in 0..n {
                if j != i && (i as i64 - j as i64).abs() <= 48 && i % 24 == j % 24 {
                    let w = (-lambda * (i as i64 - j as i64).abs() as f64 / 24.0).exp();
                    num += f64::from(counts[j]) * w;
                    den += w;
                }
            }
            if den > 0.0 {
                assert!(d.defined[i]);
                assert!((d.residuals[i] - (f64::from(counts[i]) - num / den)).abs() < 1e-9);
            } else {
                assert!(!d.defined[i]);
            }
        }
    }

    // average_precision vs exhaustive PR integration.
    let mut checked = 0;
    for len in 1..=10usize {
        for mask in 0..(1u32 << len) {
            let labels: Vec<bool> = (0..len).map(|k| mask & (1 << k) != 0).collect();
            let n_pos = labels.iter().filter(|&&l| l).count();
            let ap = average_precision(&labels);
            if n_pos == 0 {
                assert_eq!(ap, None);
                continue;
            }
            let mut hits = 0usize;
            let mut prev_recall = 0.0;
            let mut area = 0.0;
            for (k, &l) in labels.iter().enumerate() {
                hits += usize::from(l);
                let recall = hits as f64 / n_pos as f64;
                area += (recall - prev_recall) * (hits as f64 / (k + 1) as f64);
                prev_recall = recall;
            }
            assert!((ap.unwrap() - area).abs() < 1e-12);
            checked += 1;
        }
    }
    assert!(checked > 200);

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "oracle suite took {elapsed:.1}s");
    pass(1, "oracle equivalence");
}

// ---------------------------------------------------------------------
// Criterion 2: Y standardization over each user's own followers.
// ---------------------------------------------------------------------

#[test]
fn criterion_2_standardization_invariant() {
    let run = standard();
    let g = &run.graph;
    let t = Timestamp(g.window().end.0 - 1);
    let mut checked = 0;
    for u in g.users() {
        if checked >= 100 {
            break;
        }
        let Ok(stats) = similarity_stats(g, u, t, &run.table) else {
            continue;
        };
        if stats.is_degenerate() || stats.n_followers < 5 {
            continue;
        }
        let vi = run.table.get(u);
        let ys: Vec<f64> = g
            .followers_at(u, t)
            .into_iter()
            .filter_map(|k| {
                let s = burstnet_core::textsim::cosine(vi, run.table.get(k));
                y_score(s, &stats).ok()
            })
            .collect();
        assert_eq!(ys.len(), stats.n_followers);
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        let std = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / ys.len() as f64).sqrt();
        assert!(mean.abs() < 1e-9, "user {u:?} mean {mean}");
        assert!((std - 1.0).abs() < 1e-9, "user {u:?} std {std}");
        checked += 1;
    }
    assert!(checked == 100, "only {checked} users were checkable");
    pass(2, "Y standardization");
}

// ---------------------------------------------------------------------
// Criterion 3: simulate-and-refit recovery of the law constants.
// ---------------------------------------------------------------------

#[test]
fn criterion_3_fit_recovery() {
    let started = Instant::now();
    let truth = ModelParams::reference();
    let obs = simulate_observations(truth.c, truth.alpha, 1_000_000, 23);
    let fitted = fit(&obs, 72).expect("fit converges");
    let c_err = (fitted.c - truth.c).abs() / truth.c;
    let a_err = (fitted.alpha - truth.alpha).abs() / truth.alpha;
    assert!(c_err < 0.05, "C relative error {c_err:.4}");
    assert!(a_err < 0.05, "alpha relative error {a_err:.4}");
    // Sanity anchors for the law itself.
    assert!((p_hat(&truth, 0.0) - 3.32e-4).abs() < 1e-12);
    assert!((p_hat(&truth, 1.0) - 6.325e-4).abs() < 5e-7);
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "fit recovery took {elapsed:.1}s");
    pass(3, "fit recovery");
}

// ---------------------------------------------------------------------
// Criterion 4: detector recall and false-positive rate.
// ---------------------------------------------------------------------

#[test]
fn criterion_4_detector_quality() {
    let run = standard();
    let findings = PipelineFindings {
        seed: STANDARD_SEED,
        graph: &run.graph,
        bursts: &run.bursts,
        cobursts: &run.cobursts,
        fitted: None,
    };
    let card = truth_report(&run.truth, &findings).expect("seeds match");
    assert!(
        card.detector_recall >= 0.9,
        "planted recall {:.3}",
        card.detector_recall
    );

    // False positives: flagged hours not attributable to a planted burst or
    // its follow response, over all series hours of all users.
    let planted: Vec<(UserId, u32)> = run
        .truth
        .bursts
        .iter()
        .filter_map(|b| run.graph.lookup(&b.user).map(|u| (u, b.hour)))
        .collect();
    let near_plant = |b: &Burst| -> bool {
        planted.iter().any(|&(u, h)| {
            u == b.user
                && (b.hour_start as i64 - i64::from(h)).abs() <= 26
                && (i64::from(h) - b.hour_end as i64) <= 26
        })
    };
    let flagged_hours: usize = run
        .bursts
        .iter()
        .filter(|b| !near_plant(b))
        .map(|b| b.hour_end - b.hour_start + 1)
        .sum();
    let total_hours = run.graph.n_users() * run.graph.window().hours() * 4;
    let fp_rate = flagged_hours as f64 / total_hours as f64;
    assert!(fp_rate < 0.01, "false-positive rate {fp_rate:.5}");

    // Null config: no plants at all; anything flagged is a false positive.
    let null_cfg = SynthConfig::null_model(3000, 10, 555);
    let out = generate(&null_cfg).unwrap();
    let g = TemporalGraph::build(
        out.snapshot,
        out.events,
        "null",
        &IngestOptions {
            window: Some(null_cfg.window()),
            ..Default::default()
        },
    )
    .unwrap();
    let bursts = detect_all_bursts(&g, &DetectConfig::default()).unwrap();
    let flagged: usize = bursts.iter().map(|b| b.hour_end - b.hour_start + 1).sum();
    let total = g.n_users() * g.window().hours() * 4;
    let null_rate = flagged as f64 / total as f64;
    assert!(null_rate < 0.01, "null flag rate {null_rate:.5}");
    pass(4, "detector quality");
}

// ---------------------------------------------------------------------
// Criterion 5: prediction experiment ordering.
// ---------------------------------------------------------------------

#[test]
fn criterion_5_experiment_ordering() {
    let started = Instant::now();
    let run = standard();
    let ap = |m: Method| -> f64 {
        run.experiment
            .results
            .iter()
            .find(|r| r.method == m)
            .expect("method present")
            .average_precision
    };
    let (model, expo, rts, fol, rnd) = (
        ap(Method::Model),
        ap(Method::RetweetExposures),
        ap(Method::RetweetCount),
        ap(Method::FollowerCount),
        ap(Method::Random),
    );
    println!(
        "AP: model={model:.4} exposures={expo:.4} retweets={rts:.4} followers={fol:.4} \
         random={rnd:.4} (positive rate {:.3}, n_test {})",
        run.experiment.positive_rate, run.experiment.n_test
    );
    assert!(model > expo, "model {model:.4} <= exposures {expo:.4}");
    assert!(expo > rts, "exposures {expo:.4} <= retweets {rts:.4}");
    assert!(rts > fol, "retweets {rts:.4} <= followers {fol:.4}");
    assert!(
        (fol - rnd).abs() < 0.05,
        "followers {fol:.4} not close to random {rnd:.4}"
    );
    assert!(
        (rnd - 0.21).abs() <= 0.02,
        "random {rnd:.4} not within 0.02 of 0.21"
    );
    let best_baseline = expo.max(rts).max(fol).max(rnd);
    assert!(
        model >= best_baseline + 0.05,
        "model {model:.4} lacks a 0.05 margin over {best_baseline:.4}"
    );
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "experiment took {elapsed:.1}s");
    pass(5, "experiment ordering");
}

// ---------------------------------------------------------------------
// Criterion 6: ego-curve directions and the shuffled-recipient control.
// ---------------------------------------------------------------------

#[test]
fn criterion_6_ego_curves() {
    let run = standard();
    let g = &run.graph;
    let rf: Vec<CoBurst> = run
        .cobursts
        .iter()
        .filter(|cb| cb.kind == CoBurstKind::RetweetFollow)
        .take(60)
        .cloned()
        .collect();
    assert!(rf.len() >= 20, "only {} retweet-follow co-bursts", rf.len());
    let coherence = CoherenceConfig::default();
    let offsets = [-1, 0, 1];
    let curve_for = |metric: EgoMetric, table: &TfIdfTable, graph: &TemporalGraph| {
        metric_curves(graph, &rf, metric.as_str(), &offsets, |u, t| {
            eval_ego_metric(graph, table, metric, &coherence, u, t)
        })
        .expect("usable bursts")
    };
    let sim = curve_for(EgoMetric::FollowerSimilarity, &run.table, g);
    let coh = curve_for(EgoMetric::FollowerCoherence, &run.table, g);
    let wcc = curve_for(EgoMetric::WccCount, &run.table, g);
    println!(
        "similarity curve {:?}; coherence {:?}; wcc {:?}",
        sim.values, coh.values, wcc.values
    );
    assert!(sim.values[0] < 1.0, "similarity at -1d: {}", sim.values[0]);
    assert!(sim.values[2] >= 1.0, "similarity at +1d: {}", sim.values[2]);
    assert!(coh.values[0] < 1.0, "coherence at -1d: {}", coh.values[0]);
    assert!(coh.values[2] >= 1.0, "coherence at +1d: {}", coh.values[2]);
    assert!(
        wcc.values[2] > wcc.values[0],
        "wcc did not increase across the burst: {:?}",
        wcc.values
    );

    // Shuffled-recipient control: same anchors, destination-randomized
    // graph; the similarity trend must sit strictly below the real one.
    let shuffled = shuffled_control(g.events(), g.n_users() as u32, STANDARD_SEED);
    let raw: Vec<RawEvent> = shuffled.iter().map(|ev| g.raw_event(ev)).collect();
    let shuffled_graph = TemporalGraph::build(
        run.snapshot_named(),
        raw,
        "shuffled",
        &IngestOptions {
            window: Some(run.cfg.window()),
            on_conflict: ConflictPolicy::Skip,
        },
    )
    .expect("shuffled log ingests with skip policy");
    let corpus = build_corpus(&shuffled_graph, false);
    let shuffled_table = tfidf(&corpus).expect("documents");
    // Re-anchor the co-bursts onto the shuffled graph's user ids.
    let rf_shuffled: Vec<CoBurst> = rf
        .iter()
        .filter_map(|cb| {
            let name = g.user_name(cb.trigger.user);
            let u = shuffled_graph.lookup(name)?;
            let mut cb = cb.clone();
            cb.trigger.user = u;
            cb.response.user = u;
            Some(cb)
        })
        .collect();
    let sim_shuffled = metric_curves(
        &shuffled_graph,
        &rf_shuffled,
        "follower_similarity",
        &offsets,
        |u, t| {
            eval_ego_metric(
                &shuffled_graph,
                &shuffled_table,
                EgoMetric::FollowerSimilarity,
                &coherence,
                u,
                t,
            )
        },
    )
    .expect("usable bursts");
    let trend_real = sim.values[2] - sim.values[0];
    let trend_shuffled = sim_shuffled.values[2] - sim_shuffled.values[0];
    println!("similarity trend real {trend_real:.4} vs shuffled {trend_shuffled:.4}");
    assert!(
        trend_shuffled < trend_real,
        "shuffled trend {trend_shuffled:.4} not below real {trend_real:.4}"
    );
    pass(6, "ego-curve directions");
}

// ---------------------------------------------------------------------
// Criterion 7: token recovery and the chi-squared hand value.
// ---------------------------------------------------------------------

#[test]
fn criterion_7_token_recovery() {
    let chi2 = chi2_2x2(30.0, 10.0, 20.0, 40.0);
    assert!(
        (chi2 - 16.666_666_666_666_668).abs() < 1e-9,
        "chi2 = {chi2}"
    );

    // 3x planted effect over >= 5000 bursts.
    let mut rng = StdRng::seed_from_u64(707);
    let vocab: Vec<String> = (0..30).map(|i| format!("w{i}")).collect();
    let mut bursts = Vec::new();
    for _ in 0..6000 {
        let hot = rng.random_range(0.0..1.0) < 0.3;
        let p = if hot { 0.36 } else { 0.12 };
        let label = rng.random_range(0.0..1.0) < p;
        let mut words: Vec<String> = (0..8)
            .map(|_| vocab[rng.random_range(0..vocab.len())].clone())
            .collect();
        if hot {
            words.push("surge".to_string());
        }
        bursts.push((words.join(" "), label));
    }
    let stats = token_analysis(&bursts, 10, 0.95);
    assert!(!stats.is_empty());
    assert_eq!(stats[0].token, "surge", "top token {:?}", stats[0]);
    assert!(
        stats[0].ratio >= 2.5 && stats[0].ratio <= 3.5,
        "ratio {:.3}",
        stats[0].ratio
    );
    pass(7, "token recovery");
}

// ---------------------------------------------------------------------
// Criterion 8: descriptive statistics against the generator targets.
// ---------------------------------------------------------------------

#[test]
fn criterion_8_descriptive_statistics() {
    let run = standard();
    let stats = descriptive_stats(&run.graph);
    println!(
        "deletion ratio {:.4}; exposure fraction {:.4}; top-quintile {:.4}",
        stats.deletion_creation_ratio, stats.exposure_driven_follow_frac, stats.top_quintile_share
    );
    let rel = |x: f64, target: f64| (x - target).abs() / target;
    assert!(
        rel(stats.deletion_creation_ratio, 1.0 / 3.0) < 0.10,
        "deletion:creation {:.4}",
        stats.deletion_creation_ratio
    );
    assert!(
        rel(stats.exposure_driven_follow_frac, 0.21) < 0.10,
        "exposure fraction {:.4}",
        stats.exposure_driven_follow_frac
    );
    assert!(
        rel(stats.top_quintile_share, 0.594) < 0.10,
        "top-quintile share {:.4}",
        stats.top_quintile_share
    );

    // Degree-activity curve: received events rise with initial indegree.
    let populated: Vec<&burstnet_core::eval::DegreeBin> = stats
        .degree_bins
        .iter()
        .filter(|b| b.n_users >= 50)
        .collect();
    assert!(populated.len() >= 3);
    let first = populated.first().unwrap();
    let last = populated.last().unwrap();
    assert!(last.mean_follows > first.mean_follows);

    // Dual-path exposure fraction: a streaming replay with eagerly marked
    // exposures must agree exactly with the post-hoc path query.
    let g = &run.graph;
    let mut live: HashSet<(UserId, UserId)> = HashSet::new();
    for u in g.users() {
        for f in g.followers_at(u, Timestamp(g.window().start.0 - 1)) {
            live.insert((f, u));
        }
    }
    let mut exposure_until: std::collections::HashMap<(UserId, UserId), i64> =
        std::collections::HashMap::new();
    let mut in_neighbors: std::collections::HashMap<UserId, HashSet<UserId>> =
        std::collections::HashMap::new();
    for &(f, u) in &live {
        in_neighbors.entry(u).or_default().insert(f);
    }
    let mut streaming = 0u64;
    let mut posthoc = 0u64;
    let mut follows = 0u64;
    let horizon = burstnet_core::eval::EXPOSURE_RECENCY_HOURS * 3600;
    for ev in g.events() {
        match ev.kind {
            EventKind::Retweet => {
                let author = ev.target.expect("retweet");
                if let Some(fs) = in_neighbors.get(&ev.actor) {
                    for &j in fs {
                        if j != author {
                            let e = exposure_until.entry((j, author)).or_insert(i64::MIN);
                            *e = (*e).max(ev.ts.0 + horizon);
                        }
                    }
                }
            }
            EventKind::Follow => {
                let target = ev.target.expect("follow");
                follows += 1;
                if exposure_until
                    .get(&(ev.actor, target))
                    .is_some_and(|&until| ev.ts.0 <= until)
                {
                    streaming += 1;
                }
                if follow_is_exposure_driven(g, ev.actor, target, ev.ts) {
                    posthoc += 1;
                }
                in_neighbors.entry(target).or_default().insert(ev.actor);
            }
            EventKind::Unfollow => {
                let target = ev.target.expect("unfollow");
                if let Some(set) = in_neighbors.get_mut(&target) {
                    set.remove(&ev.actor);
                }
            }
            EventKind::Tweet => {}
        }
    }
    assert_eq!(streaming, posthoc, "dual-path exposure counts disagree");
    let frac = posthoc as f64 / follows as f64;
    assert!((frac - stats.exposure_driven_follow_frac).abs() < 1e-12);
    pass(8, "descriptive statistics");
}

// ---------------------------------------------------------------------
// Criterion 9: determinism and end-to-end runtime.
// ---------------------------------------------------------------------

fn pipeline_fingerprint(seed: u64, dir: &std::path::Path) -> (String, f64) {
    let started = Instant::now();
    let cfg = SynthConfig::standard(STANDARD_USERS, STANDARD_DAYS, seed);
    let out = generate(&cfg).unwrap();
    write_output(&out, dir).unwrap();
    let g = TemporalGraph::ingest(
        &dir.join("snapshot.csv"),
        &dir.join("events.jsonl"),
        &IngestOptions {
            window: Some(cfg.window()),
            ..Default::default()
        },
    )
    .unwrap();
    let corpus = build_corpus(&g, false);
    let table = tfidf(&corpus).unwrap();
    let bursts = detect_all_bursts(&g, &DetectConfig::default()).unwrap();
    let cobursts = all_cobursts(&bursts);
    let labeled = labeled_retweet_bursts(&g, &bursts, &cobursts);
    let fb = follow_burst_hours(&bursts);
    let experiment = full_experiment(
        &g,
        &table,
        fb,
        &labeled,
        &ExperimentPlan {
            seed,
            ..Default::default()
        },
    )
    .unwrap();
    let elapsed = started.elapsed().as_secs_f64();

    let mut fp = String::new();
    fp.push_str(&std::fs::read_to_string(dir.join("snapshot.csv")).unwrap());
    fp.push_str(&std::fs::read_to_string(dir.join("events.jsonl")).unwrap());
    for b in &bursts {
        fp.push_str(&format!(
            "{:?}|{}|{}|{}|{:.9}|{}\n",
            b.user,
            b.kind.as_str(),
            b.hour_start,
            b.hour_end,
            b.magnitude_sigma,
            b.raw_count
        ));
    }
    fp.push_str(&format!(
        "params {:.12e} {:.9}\n",
        experiment.params.c, experiment.params.alpha
    ));
    for r in &experiment.results {
        fp.push_str(&format!(
            "{} {:.12}\n",
            r.method.as_str(),
            r.average_precision
        ));
    }
    (fp, elapsed)
}

#[test]
fn criterion_9_determinism_and_performance() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let (fp1, t1) = pipeline_fingerprint(4242, d1.path());
    let (fp2, t2) = pipeline_fingerprint(4242, d2.path());
    println!("pipeline runs: {t1:.1}s and {t2:.1}s");
    assert_eq!(fp1, fp2, "pipeline outputs differ between reruns");
    assert!(t1 < 60.0, "first run took {t1:.1}s");
    assert!(t2 < 60.0, "second run took {t2:.1}s");
    pass(9, "determinism and performance");
}

// ---------------------------------------------------------------------
// Helpers on the standard run.
// ---------------------------------------------------------------------

impl StandardRun {
    /// The initial edge set, recovered by querying just before the window.
    fn snapshot_named(&self) -> Vec<(String, String)> {
        let g = &self.graph;
        let start = Timestamp(g.window().start.0 - 1);
        let mut out = Vec::new();
        for u in g.users() {
            for f in g.followers_at(u, start) {
                out.push((g.user_name(f).to_string(), g.user_name(u).to_string()));
            }
        }
        out.sort();
        out
    }
}
