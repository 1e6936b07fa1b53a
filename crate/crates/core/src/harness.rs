//! Monte Carlo experiment runner.
//!
//! For each sweep point and realization index the runner draws a channel,
//! runs the genetic search (plus any configured baselines) and reduces the
//! per-realization outcomes in realization order. Realizations run in
//! parallel on a dedicated pool; the ordered reduction keeps every reported
//! number independent of the worker count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::channel::{build_los, ChannelRealization};
use crate::codebook::build_dft_codebook;
use crate::config::{scenario_pairs, Baseline, ExperimentConfig, SweepPoint};
use crate::error::{Error, Result};
use crate::metrics::{delay_factor, Objective, Score};
use crate::model::SystemConfig;
use crate::rng::{stream_rng, Stream};
use crate::search::{exhaustive_search, ga_run_with, random_search, GaTrajectory, SelectionEvaluator};

/// Relative tolerance for "GA found the exhaustive optimum".
pub const ATTAINMENT_TOL: f64 = 1e-9;

/// Fraction of the final raw score used for the fast-convergence statistic.
pub const NEAR_FINAL_TOL: f64 = 0.05;

/// Iteration at which a run is considered converged.
///
/// With `alpha > 0` this is the first `K` maximising `(1 - alpha K)` times the
/// Queen's throughput. With `alpha = 0` it is the first `K` whose raw score is
/// within relative `tol` of the run's final raw score.
pub fn convergence_iteration(traj: &GaTrajectory, alpha: f64, tol: f64) -> usize {
    assert!(!traj.is_empty(), "empty trajectory");
    if alpha > 0.0 {
        let mut best_k = 1;
        let mut best = f64::NEG_INFINITY;
        for rec in &traj.records {
            let w = (1.0 - alpha * rec.iteration as f64) * rec.raw_throughput;
            if w > best {
                best = w;
                best_k = rec.iteration;
            }
        }
        best_k
    } else {
        let target = traj.last().raw_score;
        traj.records
            .iter()
            .find(|r| r.raw_score.reaches(&target, tol))
            .map_or(traj.len(), |r| r.iteration)
    }
}

/// Empirical CDF as `(value, fraction of samples <= value)` at each distinct value.
pub fn rate_cdf(samples: &[f64]) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("CDF of an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidArgument("CDF sample contains NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 = frac,
            _ => out.push((x, frac)),
        }
    }
    Ok(out)
}

/// Compensated (Neumaier) sum.
pub fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    stable_sum(values.iter().copied()) / values.len() as f64
}

/// Standard error of the mean (sample standard deviation over `sqrt(n)`).
pub fn standard_error(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let var = stable_sum(values.iter().map(|x| (x - m) * (x - m))) / (n - 1) as f64;
    (var / n as f64).sqrt()
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `100 * curve / max(curve)`; all zeros when the curve never rises above zero.
pub fn relative_percent(curve: &[f64]) -> Vec<f64> {
    let max = curve.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return vec![0.0; curve.len()];
    }
    curve
        .iter()
        .map(|&x| if x == max { 100.0 } else { 100.0 * x / max })
        .collect()
}

/// Everything one realization contributes to the aggregates.
#[derive(Clone, Debug)]
pub struct RealizationOutcome {
    pub index: u64,
    /// Queen's undelayed throughput for `K = 1..=N_it`.
    pub raw_curve: Vec<f64>,
    /// Delay-weighted throughput for `K = 1..=N_it`.
    pub weighted_curve: Vec<f64>,
    /// Operating point `K*` under the configured delay cost.
    pub convergence_iteration: usize,
    /// First attainment of the final raw score (the `alpha = 0` rule).
    pub convergence_iteration_undelayed: usize,
    /// First `K` within 5% of the final raw score.
    pub near_final_iteration: usize,
    /// Delay-weighted throughput at `K*`.
    pub final_throughput: f64,
    pub final_raw_score: Score,
    /// Per-user rates of the Queen at `K*`.
    pub rates: Vec<f64>,
    pub served: usize,
    pub evaluations: usize,
    pub exhaustive: Option<Score>,
    pub random: Option<Score>,
}

fn run_realization(
    cfg: &SystemConfig,
    objective: &Objective,
    ec: &ExperimentConfig,
    los: &crate::model::ComplexMatrix,
    codebook: &crate::codebook::Codebook,
    index: u64,
) -> Result<(RealizationOutcome, GaTrajectory)> {
    let channel = ChannelRealization::generate_with_los(cfg, los, cfg.seed, index)?;
    let evaluator = SelectionEvaluator::new(cfg, codebook, &channel.h, *objective)?;
    let mut rng = stream_rng(cfg.seed, index, Stream::Search);
    let traj = ga_run_with(cfg, &evaluator, &mut rng)?;

    let k_star = convergence_iteration(&traj, cfg.alpha, 0.0);
    let rec = traj.at(k_star);
    let rates = evaluator.rates(&rec.queen);
    let served = evaluator.served(&rates);
    let final_throughput = delay_factor(cfg.alpha, k_star)? * rec.raw_throughput;

    let exhaustive = if ec.baselines.contains(&Baseline::Exhaustive) {
        Some(exhaustive_search(&evaluator, ec.exhaustive_cap)?.score)
    } else {
        None
    };
    let random = if ec.baselines.contains(&Baseline::Random) {
        let mut brng = stream_rng(cfg.seed, index, Stream::Baseline);
        let budget = cfg.population * cfg.max_iterations;
        Some(random_search(&evaluator, budget, &mut brng)?.score)
    } else {
        None
    };

    let outcome = RealizationOutcome {
        index,
        raw_curve: traj.records.iter().map(|r| r.raw_throughput).collect(),
        weighted_curve: traj.records.iter().map(|r| r.weighted_throughput).collect(),
        convergence_iteration: k_star,
        convergence_iteration_undelayed: convergence_iteration(&traj, 0.0, 0.0),
        near_final_iteration: convergence_iteration(&traj, 0.0, NEAR_FINAL_TOL),
        final_throughput,
        final_raw_score: traj.last().raw_score,
        rates,
        served,
        evaluations: traj.last().evaluations_used,
        exhaustive,
        random,
    };
    Ok((outcome, traj))
}

/// GA versus baselines at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineSummary {
    pub ga_mean_raw_score: f64,
    pub exhaustive_mean_score: Option<f64>,
    /// Fraction of realizations where the GA matched the exhaustive optimum.
    pub attainment_fraction: Option<f64>,
    /// Mean of `(optimum - ga) / optimum`.
    pub mean_relative_gap: Option<f64>,
    pub random_mean_score: Option<f64>,
}

/// Aggregated statistics of one sweep point.
#[derive(Clone, Debug)]
pub struct PointResult {
    pub label: String,
    pub config: SystemConfig,
    pub mean_weighted_curve: Vec<f64>,
    pub mean_raw_curve: Vec<f64>,
    /// Mean weighted curve relative to its maximum, in percent.
    pub nu_percent: Vec<f64>,
    pub mean_final_throughput: f64,
    pub final_throughput_std_error: f64,
    pub avg_convergence_iteration: f64,
    pub avg_convergence_iteration_undelayed: f64,
    pub median_near_final_iteration: f64,
    pub empirical_outage_prob: f64,
    pub avg_served_users: f64,
    pub evaluations: usize,
    pub rate_samples: Vec<f64>,
    pub example: Option<GaTrajectory>,
    pub baselines: Option<BaselineSummary>,
    pub outcomes: Vec<RealizationOutcome>,
    pub wall_seconds: f64,
    /// Set when the point could not be simulated; the statistics are then NaN.
    pub error: Option<String>,
}

impl PointResult {
    fn failed(point: &SweepPoint, error: String, wall_seconds: f64) -> Self {
        Self {
            label: point.label.clone(),
            config: point.config.clone(),
            mean_weighted_curve: Vec::new(),
            mean_raw_curve: Vec::new(),
            nu_percent: Vec::new(),
            mean_final_throughput: f64::NAN,
            final_throughput_std_error: f64::NAN,
            avg_convergence_iteration: f64::NAN,
            avg_convergence_iteration_undelayed: f64::NAN,
            median_near_final_iteration: f64::NAN,
            empirical_outage_prob: f64::NAN,
            avg_served_users: f64::NAN,
            evaluations: 0,
            rate_samples: Vec::new(),
            example: None,
            baselines: None,
            outcomes: Vec::new(),
            wall_seconds,
            error: Some(error),
        }
    }

    pub fn final_throughputs(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.final_throughput).collect()
    }

    pub fn convergence_iterations(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.convergence_iteration as f64).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub points: Vec<PointResult>,
    pub version: &'static str,
    pub wall_seconds: f64,
}

impl ExperimentResult {
    pub fn is_complete(&self) -> bool {
        self.points.iter().all(|p| p.error.is_none())
    }

    pub fn failures(&self) -> Vec<(&str, &str)> {
        self.points
            .iter()
            .filter_map(|p| p.error.as_deref().map(|e| (p.label.as_str(), e)))
            .collect()
    }
}

fn mean_curve(outcomes: &[RealizationOutcome], pick: impl Fn(&RealizationOutcome) -> &[f64]) -> Vec<f64> {
    let len = outcomes.first().map_or(0, |o| pick(o).len());
    (0..len)
        .map(|k| stable_sum(outcomes.iter().map(|o| pick(o)[k])) / outcomes.len() as f64)
        .collect()
}

fn run_point(ec: &ExperimentConfig, point: &SweepPoint) -> Result<PointResult> {
    let start = Instant::now();
    let cfg = &point.config;
    cfg.validate()?;
    let objective = ec.objective_for(cfg);
    let los = build_los(cfg)?;
    let codebook = build_dft_codebook(cfg.antennas, cfg.codebook_size)?;

    let results: Vec<Result<(RealizationOutcome, Option<GaTrajectory>)>> = (0..cfg.realizations as u64)
        .into_par_iter()
        .map(|index| {
            run_realization(cfg, &objective, ec, &los, &codebook, index)
                .map(|(o, t)| (o, (index == 0).then_some(t)))
        })
        .collect();

    let mut outcomes = Vec::with_capacity(results.len());
    let mut example = None;
    for r in results {
        let (o, t) = r?;
        if t.is_some() {
            example = t;
        }
        outcomes.push(o);
    }

    let mean_weighted_curve = mean_curve(&outcomes, |o| &o.weighted_curve);
    let mean_raw_curve = mean_curve(&outcomes, |o| &o.raw_curve);
    let nu_percent = relative_percent(&mean_weighted_curve);
    let finals: Vec<f64> = outcomes.iter().map(|o| o.final_throughput).collect();
    let conv: Vec<f64> = outcomes.iter().map(|o| o.convergence_iteration as f64).collect();
    let conv0: Vec<f64> = outcomes
        .iter()
        .map(|o| o.convergence_iteration_undelayed as f64)
        .collect();
    let near: Vec<f64> = outcomes.iter().map(|o| o.near_final_iteration as f64).collect();
    let served: Vec<f64> = outcomes.iter().map(|o| o.served as f64).collect();
    let avg_served_users = mean(&served);
    let users = cfg.users as f64;
    let outage_flags = stable_sum(outcomes.iter().map(|o| (o.rates.len() - o.served) as f64));
    let empirical_outage_prob = outage_flags / (users * outcomes.len() as f64);

    let baselines = if ec.baselines.is_empty() {
        None
    } else {
        let ga: Vec<f64> = outcomes.iter().map(|o| o.final_raw_score.primary).collect();
        let ex: Option<Vec<Score>> = outcomes.iter().map(|o| o.exhaustive).collect();
        let rnd: Option<Vec<f64>> = outcomes.iter().map(|o| o.random.map(|s| s.primary)).collect();
        let (exhaustive_mean_score, attainment_fraction, mean_relative_gap) = match &ex {
            Some(ex) => {
                let hits = outcomes
                    .iter()
                    .zip(ex)
                    .filter(|(o, e)| attains(&o.final_raw_score, e))
                    .count();
                let gaps: Vec<f64> = outcomes
                    .iter()
                    .zip(ex)
                    .map(|(o, e)| relative_gap(&o.final_raw_score, e))
                    .collect();
                let opt: Vec<f64> = ex.iter().map(|s| s.primary).collect();
                (
                    Some(mean(&opt)),
                    Some(hits as f64 / outcomes.len() as f64),
                    Some(mean(&gaps)),
                )
            }
            None => (None, None, None),
        };
        Some(BaselineSummary {
            ga_mean_raw_score: mean(&ga),
            exhaustive_mean_score,
            attainment_fraction,
            mean_relative_gap,
            random_mean_score: rnd.map(|r| mean(&r)),
        })
    };

    Ok(PointResult {
        label: point.label.clone(),
        config: cfg.clone(),
        mean_weighted_curve,
        mean_raw_curve,
        nu_percent,
        mean_final_throughput: mean(&finals),
        final_throughput_std_error: standard_error(&finals),
        avg_convergence_iteration: mean(&conv),
        avg_convergence_iteration_undelayed: mean(&conv0),
        median_near_final_iteration: median(&near),
        empirical_outage_prob,
        avg_served_users,
        evaluations: cfg.population * cfg.max_iterations,
        rate_samples: outcomes.iter().flat_map(|o| o.rates.iter().copied()).collect(),
        example,
        baselines,
        outcomes,
        wall_seconds: start.elapsed().as_secs_f64(),
        error: None,
    })
}

/// Whether `ga` matches `optimum` within [`ATTAINMENT_TOL`] (relative).
pub fn attains(ga: &Score, optimum: &Score) -> bool {
    let close = |a: f64, b: f64| a >= b - ATTAINMENT_TOL * b.abs().max(f64::MIN_POSITIVE);
    if ga.primary > optimum.primary {
        return true;
    }
    if optimum.secondary == 0.0 && ga.secondary == 0.0 {
        return close(ga.primary, optimum.primary);
    }
    ga.primary == optimum.primary && close(ga.secondary, optimum.secondary)
}

/// `(optimum - ga) / optimum` on the primary score; zero when the optimum is zero.
pub fn relative_gap(ga: &Score, optimum: &Score) -> f64 {
    if optimum.primary == 0.0 {
        0.0
    } else {
        ((optimum.primary - ga.primary) / optimum.primary).max(0.0)
    }
}

/// Runs every sweep point of `ec` on the current rayon pool.
///
/// A point that fails is reported with its error and NaN statistics; the
/// remaining points still run.
pub fn run_experiment(ec: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let mut points = Vec::new();
    for point in ec.points()? {
        let t0 = Instant::now();
        match run_point(ec, &point) {
            Ok(p) => points.push(p),
            Err(e) => points.push(PointResult::failed(
                &point,
                e.to_string(),
                t0.elapsed().as_secs_f64(),
            )),
        }
    }
    Ok(ExperimentResult {
        config: ec.clone(),
        points,
        version: env!("CARGO_PKG_VERSION"),
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs `ec` on a pool of `workers` threads (all cores when `None`).
pub fn run_experiment_with_workers(ec: &ExperimentConfig, workers: Option<usize>) -> Result<ExperimentResult> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {}", e)))?;
    pool.install(|| run_experiment(ec))
}

pub const CURVE_FILE: &str = "curve.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRACE_FILE: &str = "example_trace.csv";
pub const CDF_FILE: &str = "rate_cdf.csv";
pub const BASELINE_FILE: &str = "baselines.csv";
pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn write_file(dir: &Path, name: &str, body: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path)?;
    f.write_all(body.as_bytes())?;
    f.flush()?;
    written.push(path);
    Ok(())
}

fn json_value(raw: &str) -> Value {
    if let Ok(u) = raw.parse::<u64>() {
        return Value::from(u);
    }
    match raw.parse::<f64>() {
        Ok(x) if x.is_finite() => Value::from(x),
        _ => Value::from(raw),
    }
}

fn pairs_json(pairs: Vec<(&'static str, String)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.to_string(), json_value(&v));
    }
    Value::Object(m)
}

/// Provenance sidecar contents.
pub fn provenance_json(result: &ExperimentResult, command: &str, workers: Option<usize>, files: &[PathBuf]) -> Value {
    let points: Vec<Value> = result
        .points
        .iter()
        .map(|p| {
            json!({
                "sweep_value": p.label,
                "config": pairs_json(scenario_pairs(&p.config)),
                "status": if p.error.is_some() { "failed" } else { "ok" },
                "error": p.error,
                "wall_seconds": p.wall_seconds,
            })
        })
        .collect();
    let names: Vec<String> = files
        .iter()
        .filter_map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    json!({
        "tool": "beamsel",
        "version": result.version,
        "command": command,
        "seed": result.config.base.seed,
        "workers": workers,
        "config": pairs_json(result.config.to_pairs()),
        "config_text": result.config.to_config_text(),
        "complete": result.is_complete(),
        "points": points,
        "files": names,
        "wall_seconds": result.wall_seconds,
    })
}

/// Curve CSV: one row per sweep point and iteration.
pub fn curve_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("sweep_value,K,mean_weighted_throughput,mean_raw_throughput,nu_percent\n");
    for p in &result.points {
        for (i, ((w, r), nu)) in p
            .mean_weighted_curve
            .iter()
            .zip(&p.mean_raw_curve)
            .zip(&p.nu_percent)
            .enumerate()
        {
            s.push_str(&format!("{},{},{},{},{}\n", csv_field(&p.label), i + 1, w, r, nu));
        }
    }
    s
}

pub fn summary_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(
        "sweep_value,mean_final_throughput_bpcu,avg_convergence_iteration,empirical_outage_prob,avg_served_users,evaluations,wall_seconds\n",
    );
    for p in &result.points {
        let wall = if result.config.record_timing {
            p.wall_seconds.to_string()
        } else {
            String::new()
        };
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            csv_field(&p.label),
            p.mean_final_throughput,
            p.avg_convergence_iteration,
            p.empirical_outage_prob,
            p.avg_served_users,
            p.evaluations,
            wall
        ));
    }
    s
}

/// Single-realization trace (realization 0) with its own relative throughput.
pub fn trace_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("sweep_value,K,queen,raw_throughput,weighted_throughput,nu_percent\n");
    for p in &result.points {
        if let Some(t) = &p.example {
            let weighted: Vec<f64> = t.records.iter().map(|r| r.weighted_throughput).collect();
            let nu = relative_percent(&weighted);
            for (rec, nu) in t.records.iter().zip(nu) {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    csv_field(&p.label),
                    rec.iteration,
                    rec.queen,
                    rec.raw_throughput,
                    rec.weighted_throughput,
                    nu
                ));
            }
        }
    }
    s
}

pub fn cdf_csv(result: &ExperimentResult) -> String {
    let mut s = String::from("sweep_value,rate,cumulative_fraction\n");
    for p in &result.points {
        if let Ok(cdf) = rate_cdf(&p.rate_samples) {
            for (x, f) in cdf {
                s.push_str(&format!("{},{},{}\n", csv_field(&p.label), x, f));
            }
        }
    }
    s
}

pub fn baseline_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(
        "sweep_value,ga_mean_raw_score,exhaustive_mean_score,attainment_fraction,mean_relative_gap,random_mean_score\n",
    );
    for p in &result.points {
        if let Some(b) = &p.baselines {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                csv_field(&p.label),
                b.ga_mean_raw_score,
                opt(b.exhaustive_mean_score),
                opt(b.attainment_fraction),
                opt(b.mean_relative_gap),
                opt(b.random_mean_score)
            ));
        }
    }
    s
}

/// Iterations-to-convergence per sweep point under the configured delay
/// cost and without delay.
pub fn convergence_csv(result: &ExperimentResult) -> String {
    let mut s = String::from(
        "sweep_value,alpha,avg_convergence_iteration,avg_convergence_iteration_alpha0,median_k95\n",
    );
    for p in &result.points {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            csv_field(&p.label),
            p.config.alpha,
            p.avg_convergence_iteration,
            p.avg_convergence_iteration_undelayed,
            p.median_near_final_iteration
        ));
    }
    s
}

/// Writes the CSV files and the provenance sidecar into `dir`.
pub fn write_results(
    result: &ExperimentResult,
    dir: &Path,
    command: &str,
    workers: Option<usize>,
    include_convergence: bool,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    write_file(dir, CURVE_FILE, &curve_csv(result), &mut written)?;
    write_file(dir, SUMMARY_FILE, &summary_csv(result), &mut written)?;
    write_file(dir, TRACE_FILE, &trace_csv(result), &mut written)?;
    write_file(dir, CDF_FILE, &cdf_csv(result), &mut written)?;
    if !result.config.baselines.is_empty() {
        write_file(dir, BASELINE_FILE, &baseline_csv(result), &mut written)?;
    }
    if include_convergence {
        write_file(dir, CONVERGENCE_FILE, &convergence_csv(result), &mut written)?;
    }
    let mut names = written.clone();
    names.push(dir.join(PROVENANCE_FILE));
    let prov = provenance_json(result, command, workers, &names);
    write_file(
        dir,
        PROVENANCE_FILE,
        &(serde_json::to_string_pretty(&prov)? + "\n"),
        &mut written,
    )?;
    Ok(written)
}
