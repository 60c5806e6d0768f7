//! `burstnet` command-line interface: reproducible pipelines over the
//! burst-detection, similarity, and prediction library.

mod manifest;

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use burstnet_core::burst::{CoBurst, CoBurstKind, DetectConfig};
use burstnet_core::egonet::{
    eval_ego_metric, metric_curves, rate_acceleration, shuffled_control, CoherenceConfig,
    EgoMetric,
};
use burstnet_core::eval::{descriptive_stats, FollowerBaseline};
use burstnet_core::event::{EventKind, Timestamp};
use burstnet_core::model::{
    burst_score, collect_observations, exposure_set, fit, ModelParams, ObservationConfig,
};
use burstnet_core::pipeline::{
    all_cobursts, detect_all_bursts, follow_burst_hours, full_experiment, labeled_retweet_bursts,
    magnitude_correlation, ExperimentPlan,
};
use burstnet_core::store::{ConflictPolicy, IngestOptions, TemporalGraph};
use burstnet_core::synthgen::{self, SynthConfig};
use burstnet_core::textsim::{build_corpus, tfidf, TfIdfTable};
use burstnet_core::tokens::token_analysis;
use manifest::ManifestBuilder;

#[derive(Parser)]
#[command(name = "burstnet", version, about = "Burst analytics for co-evolving follower graphs")]
struct Cli {
    /// Worker threads (default: all cores; BURSTNET_THREADS as fallback).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Initial edge snapshot, `follower_id,followee_id` per line.
    #[arg(long)]
    snapshot: PathBuf,
    /// Event log, one JSON object per line.
    #[arg(long)]
    events: PathBuf,
    /// Keep going past duplicate follows and phantom unfollows.
    #[arg(long)]
    skip_conflicts: bool,
}

#[derive(Args, Clone)]
struct DetectArgs {
    /// Burst threshold in residual standard deviations.
    #[arg(long, default_value_t = 2.0)]
    threshold: f64,
    /// Minimum raw events in a burst hour.
    #[arg(long, default_value_t = 5)]
    min_count: u32,
}

impl DetectArgs {
    fn config(&self) -> DetectConfig {
        DetectConfig {
            threshold_sigma: self.threshold,
            min_count: self.min_count,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with ground truth.
    Generate {
        /// Generator config (JSON) for full control, including the planted
        /// burst list. Without it the standard scenario is built from
        /// --users/--days.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Users in the standard scenario (ignored with --config).
        #[arg(long, default_value_t = 2000)]
        users: u32,
        /// Days in the standard scenario (ignored with --config).
        #[arg(long, default_value_t = 14)]
        days: u32,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config seed when set.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Validate inputs and report event counts.
    Ingest {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dataset-level descriptive statistics.
    Summary {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect per-user bursts on all four series.
    DetectBursts {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detect: DetectArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pair trigger and response bursts.
    Cobursts {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detect: DetectArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// TF-IDF cosine similarity for explicit user pairs.
    Similarity {
        #[command(flatten)]
        input: InputArgs,
        /// Pairs file, `user_a,user_b` per line.
        #[arg(long)]
        pairs: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also cache the TF-IDF vectors in sparse text form.
        #[arg(long)]
        vectors_out: Option<PathBuf>,
    },
    /// Ego-network metric curves around co-bursts.
    EgoCurves {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detect: DetectArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Metric rate accelerations during co-bursts.
    Acceleration {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detect: DetectArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomize follow/unfollow recipients, preserving actors and times.
    ShuffleControl {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the follow-probability law from two-hop observations.
    Fit {
        #[command(flatten)]
        input: InputArgs,
        /// Positive-label horizon after each tweet.
        #[arg(long, default_value_t = 72)]
        window_hours: u32,
        /// Sampled (user, tweet) pairs.
        #[arg(long, default_value_t = 3000)]
        max_pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score detected retweet bursts with fitted parameters.
    Predict {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detect: DetectArgs,
        /// Params JSON produced by `fit`.
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train/test prediction experiment against the baselines.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detect: DetectArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Positive-label horizon for the law fit.
        #[arg(long, default_value_t = 72)]
        window_hours: u32,
        /// Rank the follower baseline by prior follow bursts instead of
        /// the follower count at burst start.
        #[arg(long)]
        follower_baseline_prev_bursts: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tokens that shift the odds of a follow burst.
    Tokens {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detect: DetectArgs,
        #[arg(long, default_value_t = 10)]
        min_support: u64,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score the pipeline against generator ground truth.
    TruthReport {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        detect: DetectArgs,
        /// `ground_truth.jsonl` from `generate`.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.or_else(|| {
        std::env::var("BURSTNET_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn ingest(input: &InputArgs) -> Result<TemporalGraph> {
    let opts = IngestOptions {
        window: None,
        on_conflict: if input.skip_conflicts {
            ConflictPolicy::Skip
        } else {
            ConflictPolicy::Reject
        },
    };
    let g = TemporalGraph::ingest(&input.snapshot, &input.events, &opts)?;
    Ok(g)
}

fn out_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn csv_writer(dir: &Path, name: &str) -> Result<BufWriter<std::fs::File>> {
    let path = dir.join(name);
    let file =
        std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn manifest_for(
    name: &str,
    seed: u64,
    input: Option<&InputArgs>,
    config: Option<&Path>,
) -> Result<ManifestBuilder> {
    let mut m = ManifestBuilder::new(name, seed);
    if let Some(input) = input {
        m.input(&input.snapshot)?;
        m.input(&input.events)?;
    }
    if let Some(cfg) = config {
        m.config(cfg)?;
    }
    Ok(m)
}

fn tables(g: &TemporalGraph) -> Result<TfIdfTable> {
    let corpus = build_corpus(g, false);
    Ok(tfidf(&corpus)?)
}

/// Detected co-bursts grouped by kind, in deterministic order.
fn detected_cobursts(
    g: &TemporalGraph,
    detect: &DetectConfig,
) -> Result<(Vec<burstnet_core::burst::Burst>, Vec<CoBurst>)> {
    let bursts = detect_all_bursts(g, detect)?;
    let cobursts = all_cobursts(&bursts);
    Ok((bursts, cobursts))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Generate {
            config,
            users,
            days,
            out,
            seed,
        } => {
            let mut cfg: SynthConfig = match &config {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text)
                        .with_context(|| format!("parsing {}", path.display()))?
                }
                None => SynthConfig::standard(users, days, seed.unwrap_or(1)),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let manifest = manifest_for("generate", cfg.seed, None, config.as_deref())?;
            out_dir(&out)?;
            let output = synthgen::generate(&cfg)?;
            synthgen::write_output(&output, &out)?;
            println!(
                "generated {} users, {} events ({} planted bursts) into {}",
                cfg.n_users,
                output.events.len(),
                output.truth.bursts.len(),
                out.display()
            );
            manifest.write(&out)
        }
        Command::Ingest { input, out } => {
            let manifest = manifest_for("ingest", 0, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let counts = serde_json::json!({
                "users": g.n_users(),
                "initial_edges": g.initial_edge_count(),
                "window_start": g.window().start.0,
                "window_end": g.window().end.0,
                "counts": g.counts(),
            });
            std::fs::write(
                out.join("counts.json"),
                serde_json::to_string_pretty(&counts)? + "\n",
            )?;
            println!("{}", serde_json::to_string(&counts)?);
            manifest.write(&out)
        }
        Command::Summary { input, out } => {
            let manifest = manifest_for("summary", 0, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let stats = descriptive_stats(&g);
            let mut w = csv_writer(&out, "summary.csv")?;
            writeln!(w, "metric,value")?;
            writeln!(w, "n_users,{}", stats.n_users)?;
            writeln!(w, "initial_edges,{}", stats.initial_edges)?;
            writeln!(w, "follows,{}", stats.follows)?;
            writeln!(w, "unfollows,{}", stats.unfollows)?;
            writeln!(w, "tweets,{}", stats.tweets)?;
            writeln!(w, "retweets,{}", stats.retweets)?;
            writeln!(w, "churn_added_frac,{:.6}", stats.churn_added_frac)?;
            writeln!(w, "churn_removed_frac,{:.6}", stats.churn_removed_frac)?;
            writeln!(w, "churn_total_frac,{:.6}", stats.churn_total_frac)?;
            writeln!(
                w,
                "deletion_creation_ratio,{:.6}",
                stats.deletion_creation_ratio
            )?;
            writeln!(w, "top_quintile_share,{:.6}", stats.top_quintile_share)?;
            writeln!(
                w,
                "exposure_driven_follow_frac,{:.6}",
                stats.exposure_driven_follow_frac
            )?;
            w.flush()?;
            let mut w = csv_writer(&out, "degree_activity.csv")?;
            writeln!(
                w,
                "degree_lo,degree_hi,n_users,mean_follows,mean_unfollows,mean_tweets,mean_retweets"
            )?;
            for b in &stats.degree_bins {
                writeln!(
                    w,
                    "{},{},{},{:.6},{:.6},{:.6},{:.6}",
                    b.degree_lo,
                    b.degree_hi,
                    b.n_users,
                    b.mean_follows,
                    b.mean_unfollows,
                    b.mean_tweets,
                    b.mean_retweets
                )?;
            }
            w.flush()?;
            let mut w = csv_writer(&out, "unfollows_by_tweets.csv")?;
            writeln!(w, "tweets_lo,tweets_hi,n_users,mean_unfollows")?;
            for b in &stats.unfollows_by_tweets {
                let hi = if b.tweets_hi == usize::MAX {
                    "inf".to_string()
                } else {
                    b.tweets_hi.to_string()
                };
                writeln!(w, "{},{hi},{},{:.6}", b.tweets_lo, b.n_users, b.mean_unfollows)?;
            }
            w.flush()?;
            manifest.write(&out)
        }
        Command::DetectBursts { input, detect, out } => {
            let manifest = manifest_for("detect-bursts", 0, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let bursts = detect_all_bursts(&g, &detect.config())?;
            let mut w = csv_writer(&out, "bursts.csv")?;
            writeln!(w, "user,kind,hour,magnitude_sigma,raw_count")?;
            for b in &bursts {
                writeln!(
                    w,
                    "{},{},{},{:.4},{}",
                    g.user_name(b.user),
                    b.kind.as_str(),
                    b.peak_hour,
                    b.magnitude_sigma,
                    b.raw_count
                )?;
            }
            w.flush()?;
            println!("{} bursts", bursts.len());
            manifest.write(&out)
        }
        Command::Cobursts { input, detect, out } => {
            let manifest = manifest_for("cobursts", 0, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let (_, cobursts) = detected_cobursts(&g, &detect.config())?;
            let mut w = csv_writer(&out, "cobursts.csv")?;
            writeln!(
                w,
                "type,user,trigger_hour,trigger_end,response_hour,response_end,lag_hours,\
                 trigger_sigma,response_sigma"
            )?;
            for cb in &cobursts {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{:.4},{:.4}",
                    cb.kind.as_str(),
                    g.user_name(cb.trigger.user),
                    cb.trigger.hour_start,
                    cb.trigger.hour_end,
                    cb.response.hour_start,
                    cb.response.hour_end,
                    cb.lag_hours,
                    cb.trigger.magnitude_sigma,
                    cb.response.magnitude_sigma
                )?;
            }
            w.flush()?;
            println!("{} co-bursts", cobursts.len());
            manifest.write(&out)
        }
        Command::Similarity {
            input,
            pairs,
            out,
            vectors_out,
        } => {
            let mut manifest = manifest_for("similarity", 0, Some(&input), None)?;
            manifest.input(&pairs)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let corpus = build_corpus(&g, false);
            let table = tfidf(&corpus)?;
            let text = std::fs::read_to_string(&pairs)
                .with_context(|| format!("reading {}", pairs.display()))?;
            let mut w = csv_writer(&out, "similarity.csv")?;
            writeln!(w, "user_a,user_b,similarity")?;
            for (no, line) in text.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let Some((a, b)) = line.split_once(',') else {
                    bail!("{}:{}: expected user_a,user_b", pairs.display(), no + 1);
                };
                let (Some(ua), Some(ub)) = (g.lookup(a), g.lookup(b)) else {
                    bail!("{}:{}: unknown user in pair {a},{b}", pairs.display(), no + 1);
                };
                writeln!(w, "{a},{b},{:.6}", table.similarity(ua, ub))?;
            }
            w.flush()?;
            if let Some(path) = vectors_out {
                let mut w = BufWriter::new(std::fs::File::create(&path)?);
                for u in g.users() {
                    let v = table.get(u);
                    if v.is_zero() {
                        continue;
                    }
                    let entries: Vec<String> = v
                        .weights
                        .iter()
                        .map(|&(t, wgt)| {
                            format!("{}:{wgt:.6}", corpus.vocab[t as usize])
                        })
                        .collect();
                    writeln!(w, "{}\t{}", g.user_name(u), entries.join(","))?;
                }
                w.flush()?;
            }
            manifest.write(&out)
        }
        Command::EgoCurves { input, detect, out } => {
            let manifest = manifest_for("ego-curves", 0, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let table = tables(&g)?;
            let (_, cobursts) = detected_cobursts(&g, &detect.config())?;
            let coherence = CoherenceConfig::default();
            let offsets: Vec<i32> = (-4..=4).collect();
            let mut w = csv_writer(&out, "ego_curves.csv")?;
            writeln!(w, "burst_type,metric,offset_days,mean_relative_value,n")?;
            for kind in [CoBurstKind::RetweetFollow, CoBurstKind::TweetUnfollow] {
                let subset: Vec<CoBurst> = cobursts
                    .iter()
                    .filter(|cb| cb.kind == kind)
                    .cloned()
                    .collect();
                if subset.is_empty() {
                    continue;
                }
                for metric in EgoMetric::ALL {
                    let curve = match metric_curves(
                        &g,
                        &subset,
                        metric.as_str(),
                        &offsets,
                        |u, t| eval_ego_metric(&g, &table, metric, &coherence, u, t),
                    ) {
                        Ok(c) => c,
                        Err(e) => {
                            eprintln!("skipping {} {}: {e}", kind.as_str(), metric.as_str());
                            continue;
                        }
                    };
                    for (k, &d) in curve.offsets_days.iter().enumerate() {
                        if curve.counts[k] == 0 {
                            continue;
                        }
                        writeln!(
                            w,
                            "{},{},{},{:.6},{}",
                            kind.as_str(),
                            metric.as_str(),
                            d,
                            curve.values[k],
                            curve.counts[k]
                        )?;
                    }
                }
            }
            w.flush()?;
            manifest.write(&out)
        }
        Command::Acceleration { input, detect, out } => {
            let manifest = manifest_for("acceleration", 0, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let table = tables(&g)?;
            let (_, cobursts) = detected_cobursts(&g, &detect.config())?;
            let coherence = CoherenceConfig::default();
            let mut w = csv_writer(&out, "acceleration.csv")?;
            writeln!(w, "burst_type,metric,acceleration_pct,n_bursts")?;
            for kind in [CoBurstKind::RetweetFollow, CoBurstKind::TweetUnfollow] {
                let subset: Vec<CoBurst> = cobursts
                    .iter()
                    .filter(|cb| cb.kind == kind)
                    .cloned()
                    .collect();
                if subset.is_empty() {
                    continue;
                }
                for metric in EgoMetric::ALL {
                    match rate_acceleration(&g, &subset, |u, t| {
                        eval_ego_metric(&g, &table, metric, &coherence, u, t)
                    }) {
                        Ok(pct) => writeln!(
                            w,
                            "{},{},{:.4},{}",
                            kind.as_str(),
                            metric.as_str(),
                            pct,
                            subset.len()
                        )?,
                        Err(e) => {
                            eprintln!("skipping {} {}: {e}", kind.as_str(), metric.as_str())
                        }
                    }
                }
            }
            w.flush()?;
            // Burst-magnitude pairing across users, with its correlation.
            let (pairs, corr) = magnitude_correlation(&g)?;
            let mut w = csv_writer(&out, "magnitude_pairs.csv")?;
            writeln!(w, "user,hour,retweet_sigma,next_hour_follow_sigma")?;
            for p in &pairs {
                writeln!(
                    w,
                    "{},{},{:.4},{:.4}",
                    g.user_name(p.user),
                    p.hour,
                    p.retweet_sigma,
                    p.follow_sigma
                )?;
            }
            w.flush()?;
            if let Some(r) = corr {
                println!("magnitude correlation: {r:.4} over {} pairs", pairs.len());
            }
            manifest.write(&out)
        }
        Command::ShuffleControl { input, seed, out } => {
            let manifest = manifest_for("shuffle-control", seed, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let shuffled = shuffled_control(g.events(), g.n_users() as u32, seed);
            let mut w = csv_writer(&out, "shuffled_events.jsonl")?;
            for ev in &shuffled {
                serde_json::to_writer(&mut w, &g.raw_event(ev))?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
            manifest.write(&out)
        }
        Command::Fit {
            input,
            window_hours,
            max_pairs,
            seed,
            out,
        } => {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let manifest = manifest_for("fit", seed, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let table = tables(&g)?;
            let mut pairs: Vec<(burstnet_core::UserId, Timestamp)> = g
                .events()
                .iter()
                .filter(|ev| ev.kind == EventKind::Tweet)
                .map(|ev| (ev.actor, ev.ts))
                .collect();
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            pairs.shuffle(&mut rng);
            pairs.truncate(max_pairs);
            pairs.sort_unstable_by_key(|&(u, t)| (u, t));
            let obs = collect_observations(
                &g,
                &table,
                &pairs,
                &ObservationConfig {
                    window_hours,
                    seed,
                    ..Default::default()
                },
            );
            let params = fit(&obs.obs, window_hours)?;
            let json = serde_json::json!({
                "C": params.c,
                "alpha": params.alpha,
                "n_obs": obs.obs.len(),
                "window_hours": window_hours,
                "skipped_undefined_y": obs.skipped_undefined,
            });
            std::fs::write(
                out.join("params.json"),
                serde_json::to_string_pretty(&json)? + "\n",
            )?;
            println!("{json}");
            manifest.write(&out)
        }
        Command::Predict {
            input,
            detect,
            params,
            out,
        } => {
            let mut manifest = manifest_for("predict", 0, Some(&input), None)?;
            manifest.input(&params)?;
            let text = std::fs::read_to_string(&params)
                .with_context(|| format!("reading {}", params.display()))?;
            let raw: serde_json::Value = serde_json::from_str(&text)?;
            let model = ModelParams {
                c: raw["C"].as_f64().context("params missing C")?,
                alpha: raw["alpha"].as_f64().context("params missing alpha")?,
                fit_window_hours: raw["window_hours"].as_u64().unwrap_or(72) as u32,
            };
            let g = ingest(&input)?;
            out_dir(&out)?;
            let table = tables(&g)?;
            let (bursts, cobursts) = detected_cobursts(&g, &detect.config())?;
            let labeled = labeled_retweet_bursts(&g, &bursts, &cobursts);
            let mut w = csv_writer(&out, "predictions.csv")?;
            writeln!(w, "user,t0,t1,score")?;
            for b in &labeled {
                let es = exposure_set(&g, b.user, (b.t0, b.t1));
                let score = burst_score(&model, &g, &table, &es);
                match score {
                    Some(s) => writeln!(
                        w,
                        "{},{},{},{:.6}",
                        g.user_name(b.user),
                        b.t0.0,
                        b.t1.0,
                        s
                    )?,
                    None => writeln!(
                        w,
                        "{},{},{},NA",
                        g.user_name(b.user),
                        b.t0.0,
                        b.t1.0
                    )?,
                }
            }
            w.flush()?;
            manifest.write(&out)
        }
        Command::Evaluate {
            input,
            detect,
            seed,
            window_hours,
            follower_baseline_prev_bursts,
            out,
        } => {
            let manifest = manifest_for("evaluate", seed, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let table = tables(&g)?;
            let (bursts, cobursts) = detected_cobursts(&g, &detect.config())?;
            let labeled = labeled_retweet_bursts(&g, &bursts, &cobursts);
            let fb_hours = follow_burst_hours(&bursts);
            let plan = ExperimentPlan {
                seed,
                fit_window_hours: window_hours,
                follower_baseline: if follower_baseline_prev_bursts {
                    FollowerBaseline::PreviousFollowBursts
                } else {
                    FollowerBaseline::CountAtBurstStart
                },
            };
            let result = full_experiment(&g, &table, fb_hours, &labeled, &plan)?;
            let mut w = csv_writer(&out, "evaluate.csv")?;
            writeln!(w, "method,auc")?;
            for r in &result.results {
                writeln!(w, "{},{:.6}", r.method.as_str(), r.average_precision)?;
            }
            w.flush()?;
            let mut w = csv_writer(&out, "pr_curves.csv")?;
            writeln!(w, "method,rank,recall,precision")?;
            for r in &result.results {
                for (k, &(recall, precision)) in r.curve.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{:.6},{:.6}",
                        r.method.as_str(),
                        k + 1,
                        recall,
                        precision
                    )?;
                }
            }
            w.flush()?;
            let json = serde_json::json!({
                "fitted": { "C": result.params.c, "alpha": result.params.alpha },
                "n_train": result.n_train,
                "n_test": result.n_test,
                "n_observations": result.n_observations,
                "positive_rate": result.positive_rate,
            });
            std::fs::write(
                out.join("experiment.json"),
                serde_json::to_string_pretty(&json)? + "\n",
            )?;
            for r in &result.results {
                println!("{:<20} AUC = {:.4}", r.method.as_str(), r.average_precision);
            }
            manifest.write(&out)
        }
        Command::Tokens {
            input,
            detect,
            min_support,
            confidence,
            out,
        } => {
            let manifest = manifest_for("tokens", 0, Some(&input), None)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let (bursts, cobursts) = detected_cobursts(&g, &detect.config())?;
            let labeled = labeled_retweet_bursts(&g, &bursts, &cobursts);
            // Each retweet burst contributes the text its cascade carried.
            let mut samples: Vec<(String, bool)> = Vec::new();
            let mut missing = 0usize;
            for b in &labeled {
                let text = g
                    .retweets_of_in(b.user, b.t0, b.t1)
                    .iter()
                    .find_map(|&(ts, actor)| {
                        g.events()
                            .iter()
                            .find(|ev| {
                                ev.kind == EventKind::Retweet
                                    && ev.actor == actor
                                    && ev.ts == ts
                                    && ev.target == Some(b.user)
                            })
                            .and_then(|ev| ev.text.clone())
                    });
                match text {
                    Some(t) => samples.push((t, b.label)),
                    None => missing += 1,
                }
            }
            let stats = token_analysis(&samples, min_support, confidence);
            let mut w = csv_writer(&out, "tokens.csv")?;
            writeln!(w, "token,ratio,chi2,support")?;
            for s in &stats {
                writeln!(w, "{},{:.4},{:.4},{}", s.token, s.ratio, s.chi2, s.support())?;
            }
            w.flush()?;
            if missing > 0 {
                eprintln!("{missing} bursts had no cascade text");
            }
            println!("{} significant tokens", stats.len());
            manifest.write(&out)
        }
        Command::TruthReport {
            input,
            detect,
            truth,
            seed,
            out,
        } => {
            let mut manifest = manifest_for("truth-report", seed, Some(&input), None)?;
            manifest.input(&truth)?;
            let gt = synthgen::read_ground_truth(&truth)?;
            let g = ingest(&input)?;
            out_dir(&out)?;
            let table = tables(&g)?;
            let (bursts, cobursts) = detected_cobursts(&g, &detect.config())?;
            let labeled = labeled_retweet_bursts(&g, &bursts, &cobursts);
            let fitted = if labeled.len() >= 20 {
                let fb_hours = follow_burst_hours(&bursts);
                full_experiment(
                    &g,
                    &table,
                    fb_hours,
                    &labeled,
                    &ExperimentPlan {
                        seed,
                        ..Default::default()
                    },
                )
                .ok()
                .map(|r| r.params)
            } else {
                None
            };
            let findings = synthgen::PipelineFindings {
                seed,
                graph: &g,
                bursts: &bursts,
                cobursts: &cobursts,
                fitted,
            };
            let card = synthgen::truth_report(&gt, &findings)?;
            std::fs::write(
                out.join("truth_report.json"),
                serde_json::to_string_pretty(&card)? + "\n",
            )?;
            println!("{}", serde_json::to_string(&card)?);
            manifest.write(&out)
        }
    }
}
