//! Experiment suites over the simulator, summary tables and significance tests.

pub mod stats;

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::fusion::MergeStrategy;
use crate::sim::{trial_seed, Presence, Scenario, ScenarioConfig, SimError};
use stats::{mean, paired_bootstrap, quantile, unpaired_bootstrap, wilson, BootstrapTest};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown metric `{0}` (accuracy, top2, time, error, queries)")]
    UnknownMetric(String),
    #[error("at least one trial is required")]
    NoTrials,
    #[error("table holds conditions {0:?}; pick one")]
    AmbiguousCondition(Vec<String>),
    #[error("condition `{0}` not found")]
    MissingCondition(String),
    #[error("sweep axes differ: {0:?} vs {1:?}")]
    MismatchedAxes(Vec<String>, Vec<String>),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ExperimentError {
    /// Errors caused by bad input rather than a failing run.
    pub fn is_config(&self) -> bool {
        match self {
            ExperimentError::Sim(e) => e.is_config(),
            ExperimentError::Csv(_) | ExperimentError::Io(_) => false,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    H1AspOnly,
    H1Combined,
    MergeComparison,
    H2EntropySweep,
    H3Existence,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::H1AspOnly,
        Suite::H1Combined,
        Suite::MergeComparison,
        Suite::H2EntropySweep,
        Suite::H3Existence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::H1AspOnly => "h1_asp_only",
            Suite::H1Combined => "h1_combined",
            Suite::MergeComparison => "merge_comparison",
            Suite::H2EntropySweep => "h2_entropy_sweep",
            Suite::H3Existence => "h3_existence",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| ExperimentError::UnknownSuite(s.to_string()))
    }
}

fn fixed<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{x:.6}"))
}

fn opt_fixed<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) if v.is_finite() => fixed(v, s),
        _ => s.serialize_str(""),
    }
}

/// One trial of one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub suite: String,
    pub condition: String,
    /// Sweep axis value (knowledge percent or entropy gate).
    pub x: String,
    pub trial: u64,
    pub seed: u64,
    pub present: bool,
    pub outcome: String,
    pub correct: bool,
    /// True room among the two most probable (prior-only suite).
    pub top2: Option<bool>,
    #[serde(serialize_with = "opt_fixed")]
    pub error: Option<f64>,
    #[serde(serialize_with = "opt_fixed")]
    pub guess_error: Option<f64>,
    pub elapsed: u32,
    pub queries: u32,
    pub steps: u32,
    #[serde(serialize_with = "fixed")]
    pub p_not_exist: f64,
    pub time_limit: u32,
    pub config_hash: String,
}

/// Aggregates of one (condition, x) sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub suite: String,
    pub condition: String,
    pub x: String,
    pub n: usize,
    #[serde(serialize_with = "fixed")]
    pub accuracy: f64,
    #[serde(serialize_with = "fixed")]
    pub accuracy_ci_low: f64,
    #[serde(serialize_with = "fixed")]
    pub accuracy_ci_high: f64,
    #[serde(serialize_with = "opt_fixed")]
    pub top2_accuracy: Option<f64>,
    #[serde(serialize_with = "fixed")]
    pub mean_time: f64,
    #[serde(serialize_with = "fixed")]
    pub median_time: f64,
    /// Share of trials finishing within 75% of the time limit.
    #[serde(serialize_with = "fixed")]
    pub within_75: f64,
    #[serde(serialize_with = "opt_fixed")]
    pub absent_mean_time: Option<f64>,
    #[serde(serialize_with = "opt_fixed")]
    pub mean_error: Option<f64>,
    #[serde(serialize_with = "opt_fixed")]
    pub error_q50: Option<f64>,
    #[serde(serialize_with = "opt_fixed")]
    pub error_q80: Option<f64>,
    #[serde(serialize_with = "fixed")]
    pub mean_queries: f64,
    pub config_hash: String,
}

/// A sweep point: condition label, axis value and the config it runs.
struct Point {
    condition: String,
    x: String,
    cfg: ScenarioConfig,
}

fn axis(v: f64) -> String {
    format!("{v}")
}

fn points(suite: Suite, base: &ScenarioConfig) -> Vec<Point> {
    let e = base.experiments.clone();
    let mut out = Vec::new();
    let mut push = |condition: &str, x: String, f: &dyn Fn(&mut ScenarioConfig)| {
        let mut cfg = base.clone();
        f(&mut cfg);
        out.push(Point {
            condition: condition.to_string(),
            x,
            cfg,
        });
    };
    let no_help = |c: &mut ScenarioConfig| {
        c.human.enabled = false;
        c.trial.existence_tracking = false;
        c.trial.presence = Presence::Present;
        c.trial.inject_every = 0;
    };
    match suite {
        Suite::H1AspOnly => {
            for &k in &e.knowledge_levels {
                push("asp_only", axis(k as f64), &|c| {
                    no_help(c);
                    c.trial.knowledge = k;
                });
            }
        }
        Suite::H1Combined => {
            let conditions = [
                ("combined", MergeStrategy::Bayesian),
                ("pomdp_only", MergeStrategy::None),
            ];
            for (name, merge) in conditions {
                for &k in &e.knowledge_levels {
                    push(name, axis(k as f64), &|c| {
                        no_help(c);
                        c.trial.knowledge = k;
                        c.trial.merge = merge;
                    });
                }
            }
        }
        Suite::MergeComparison => {
            let strategies = [
                MergeStrategy::Bayesian,
                MergeStrategy::TrustFactor {
                    weight: e.trust_weight,
                },
                MergeStrategy::DirichletWeight,
                MergeStrategy::None,
            ];
            for merge in strategies {
                push(&merge.name(), axis(e.merge_knowledge as f64), &|c| {
                    no_help(c);
                    c.trial.knowledge = e.merge_knowledge;
                    c.trial.merge = merge;
                    c.trial.inject_every = e.merge_inject_every;
                    c.trial.inject_count = e.merge_inject_count;
                });
            }
        }
        Suite::H2EntropySweep => {
            for &g in &e.h2_gates {
                push("bayesian", axis(g), &|c| {
                    no_help(c);
                    c.human.enabled = true;
                    c.trial.merge = MergeStrategy::Bayesian;
                    c.trial.knowledge = e.h2_knowledge;
                    c.thresholds.entropy_gate = g;
                });
            }
        }
        Suite::H3Existence => {
            for (name, tracking) in [("tracking", true), ("baseline", false)] {
                push(name, axis(e.h3_knowledge as f64), &|c| {
                    no_help(c);
                    c.trial.knowledge = e.h3_knowledge;
                    c.trial.presence = Presence::Mixed;
                    c.trial.existence_tracking = tracking;
                });
            }
        }
    }
    out
}

fn run_point(
    suite: Suite,
    point: &Point,
    trials: u64,
    base_seed: u64,
) -> Result<Vec<TrialRow>, ExperimentError> {
    let scenario = Scenario::new(point.cfg.clone())?;
    let hash = point.cfg.hash();
    let limit = point.cfg.time.limit;
    let rows: Result<Vec<TrialRow>, SimError> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(base_seed, i);
            let mut row = TrialRow {
                suite: suite.name().into(),
                condition: point.condition.clone(),
                x: point.x.clone(),
                trial: i,
                seed,
                present: true,
                outcome: String::new(),
                correct: false,
                top2: None,
                error: None,
                guess_error: None,
                elapsed: 0,
                queries: 0,
                steps: 0,
                p_not_exist: 0.0,
                time_limit: limit,
                config_hash: hash.clone(),
            };
            if suite == Suite::H1AspOnly {
                let rank = prior_rank(&scenario, seed)?;
                row.outcome = "prior".into();
                row.correct = rank == 0;
                row.top2 = Some(rank < 2);
                return Ok(row);
            }
            let (r, _) = scenario.run_trial(i, seed, false)?;
            row.present = r.present;
            row.outcome = r.outcome.name().into();
            row.correct = r.correct;
            row.error = r.error;
            row.guess_error = r.guess_error;
            row.elapsed = r.elapsed;
            row.queries = r.queries;
            row.steps = r.steps;
            row.p_not_exist = r.p_not_exist;
            Ok(row)
        })
        .collect();
    Ok(rows?)
}

/// Position of the target's room when rooms are ordered by the KB prior
/// (0 = most probable; ties go to the lower room index).
pub fn prior_rank(scenario: &Scenario, seed: u64) -> Result<usize, SimError> {
    let start = scenario.start(seed)?;
    let cell = start
        .world
        .target_cell()
        .ok_or_else(|| SimError::Runtime("prior ranking needs a present target".into()))?;
    let truth = scenario.model().room_of(cell);
    let p = start.prior.expectation();
    Ok((0..p.len())
        .filter(|&k| p[k] > p[truth] || (p[k] == p[truth] && k < truth))
        .count())
}

/// Runs a suite and hands each finished sweep point to `sink` before starting
/// the next, so an interrupted run leaves complete points behind.
pub fn run_suite_with(
    suite: Suite,
    cfg: &ScenarioConfig,
    trials: u64,
    seed: u64,
    mut sink: impl FnMut(&[TrialRow]) -> Result<(), ExperimentError>,
) -> Result<Vec<TrialRow>, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    cfg.validate()?;
    let mut all = Vec::new();
    for point in points(suite, cfg) {
        let rows = run_point(suite, &point, trials, seed)?;
        sink(&rows)?;
        all.extend(rows);
    }
    Ok(all)
}

pub fn run_suite(
    suite: Suite,
    cfg: &ScenarioConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<TrialRow>, ExperimentError> {
    run_suite_with(suite, cfg, trials, seed, |_| Ok(()))
}

/// Groups rows by (condition, x) in first-seen order.
fn groups(rows: &[TrialRow]) -> Vec<((String, String), Vec<&TrialRow>)> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut map: BTreeMap<(String, String), Vec<&TrialRow>> = BTreeMap::new();
    for r in rows {
        let key = (r.condition.clone(), r.x.clone());
        if !map.contains_key(&key) {
            order.push(key.clone());
        }
        map.entry(key).or_default().push(r);
    }
    order
        .into_iter()
        .map(|k| {
            let v = map.remove(&k).unwrap_or_default();
            (k, v)
        })
        .collect()
}

pub fn summarize(rows: &[TrialRow]) -> Vec<SummaryRow> {
    groups(rows)
        .into_iter()
        .map(|((condition, x), g)| {
            let n = g.len();
            let k = g.iter().filter(|r| r.correct).count();
            let (lo, hi) = wilson(k, n);
            let times: Vec<f64> = g.iter().map(|r| r.elapsed as f64).collect();
            let absent: Vec<f64> = g
                .iter()
                .filter(|r| !r.present)
                .map(|r| r.elapsed as f64)
                .collect();
            let errors: Vec<f64> = g.iter().filter_map(|r| r.guess_error).collect();
            let top2: Vec<bool> = g.iter().filter_map(|r| r.top2).collect();
            let opt = |v: f64| v.is_finite().then_some(v);
            SummaryRow {
                suite: g[0].suite.clone(),
                condition,
                x,
                n,
                accuracy: k as f64 / n as f64,
                accuracy_ci_low: lo,
                accuracy_ci_high: hi,
                top2_accuracy: (!top2.is_empty())
                    .then(|| top2.iter().filter(|&&b| b).count() as f64 / top2.len() as f64),
                mean_time: mean(&times),
                median_time: quantile(&times, 0.5),
                within_75: g
                    .iter()
                    .filter(|r| r.elapsed as f64 <= 0.75 * r.time_limit as f64)
                    .count() as f64
                    / n as f64,
                absent_mean_time: opt(mean(&absent)),
                mean_error: opt(mean(&errors)),
                error_q50: opt(quantile(&errors, 0.5)),
                error_q80: opt(quantile(&errors, 0.8)),
                mean_queries: g.iter().map(|r| r.queries as f64).sum::<f64>() / n as f64,
                config_hash: g[0].config_hash.clone(),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(input: impl Read) -> Result<Vec<TrialRow>, ExperimentError> {
    let mut r = csv::Reader::from_reader(input);
    let rows: Result<Vec<TrialRow>, csv::Error> = r.deserialize().collect();
    Ok(rows?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Accuracy,
    Top2,
    Time,
    Error,
    Queries,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        Ok(match s {
            "accuracy" => Metric::Accuracy,
            "top2" => Metric::Top2,
            "time" => Metric::Time,
            "error" => Metric::Error,
            "queries" => Metric::Queries,
            _ => return Err(ExperimentError::UnknownMetric(s.to_string())),
        })
    }

    fn value(&self, r: &TrialRow) -> Option<f64> {
        let b = |x: bool| if x { 1.0 } else { 0.0 };
        match self {
            Metric::Accuracy => Some(b(r.correct)),
            Metric::Top2 => r.top2.map(b),
            Metric::Time => Some(r.elapsed as f64),
            Metric::Error => r.guess_error,
            Metric::Queries => Some(r.queries as f64),
        }
    }
}

/// Significance of the metric difference A − B at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub x: String,
    pub n_a: usize,
    pub n_b: usize,
    #[serde(serialize_with = "fixed")]
    pub mean_a: f64,
    #[serde(serialize_with = "fixed")]
    pub mean_b: f64,
    #[serde(serialize_with = "fixed")]
    pub diff: f64,
    #[serde(serialize_with = "fixed")]
    pub ci_low: f64,
    #[serde(serialize_with = "fixed")]
    pub ci_high: f64,
    #[serde(serialize_with = "fixed")]
    pub p_value: f64,
    pub paired: bool,
}

fn select<'a>(
    rows: &'a [TrialRow],
    condition: Option<&str>,
) -> Result<Vec<&'a TrialRow>, ExperimentError> {
    let mut names: Vec<String> = rows.iter().map(|r| r.condition.clone()).collect();
    names.dedup();
    names.sort();
    names.dedup();
    match condition {
        Some(c) if names.iter().any(|n| n == c) => {
            Ok(rows.iter().filter(|r| r.condition == c).collect())
        }
        Some(c) => Err(ExperimentError::MissingCondition(c.to_string())),
        None if names.len() <= 1 => Ok(rows.iter().collect()),
        None => Err(ExperimentError::AmbiguousCondition(names)),
    }
}

/// Two-sided bootstrap test per sweep point. Points whose trials share seeds
/// are compared pairwise.
pub fn compare(
    a: &[TrialRow],
    b: &[TrialRow],
    metric: Metric,
    condition_a: Option<&str>,
    condition_b: Option<&str>,
    resamples: usize,
) -> Result<Vec<CompareRow>, ExperimentError> {
    let a = select(a, condition_a)?;
    let b = select(b, condition_b)?;
    let axes = |rows: &[&TrialRow]| {
        let mut xs: Vec<String> = Vec::new();
        for r in rows {
            if !xs.contains(&r.x) {
                xs.push(r.x.clone());
            }
        }
        xs
    };
    let (xa, xb) = (axes(&a), axes(&b));
    if xa != xb {
        return Err(ExperimentError::MismatchedAxes(xa, xb));
    }
    let mut out = Vec::new();
    for (i, x) in xa.iter().enumerate() {
        let pa: Vec<&TrialRow> = a.iter().copied().filter(|r| &r.x == x).collect();
        let pb: Vec<&TrialRow> = b.iter().copied().filter(|r| &r.x == x).collect();
        let seeds = |p: &[&TrialRow]| p.iter().map(|r| r.seed).collect::<Vec<_>>();
        let paired = seeds(&pa) == seeds(&pb);
        let seed = 0x5EED ^ i as u64;
        let (va, vb, test): (Vec<f64>, Vec<f64>, BootstrapTest) = if paired {
            let (va, vb): (Vec<f64>, Vec<f64>) = pa
                .iter()
                .zip(&pb)
                .filter_map(|(ra, rb)| Some((metric.value(ra)?, metric.value(rb)?)))
                .unzip();
            let t = paired_bootstrap(&va, &vb, resamples, seed);
            (va, vb, t)
        } else {
            let va: Vec<f64> = pa.iter().filter_map(|r| metric.value(r)).collect();
            let vb: Vec<f64> = pb.iter().filter_map(|r| metric.value(r)).collect();
            let t = unpaired_bootstrap(&va, &vb, resamples, seed);
            (va, vb, t)
        };
        out.push(CompareRow {
            x: x.clone(),
            n_a: va.len(),
            n_b: vb.len(),
            mean_a: mean(&va),
            mean_b: mean(&vb),
            diff: test.diff,
            ci_low: test.ci_low,
            ci_high: test.ci_high,
            p_value: test.p_value,
            paired,
        });
    }
    Ok(out)
}
