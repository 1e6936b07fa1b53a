//! Command implementations behind the `beamsel` binary.
//!
//! Each command returns a [`Report`] holding the text to print and the exit
//! status, so the commands can be driven from tests without a subprocess.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::config::{load_config, parse_override, Baseline, ExperimentConfig};
use crate::error::{Error, Result};
use crate::harness::{run_experiment_with_workers, write_results, ExperimentResult};
use crate::search::ordered_selection_count;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
    Convergence,
    OracleCheck,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Sweep => "sweep",
            Command::Convergence => "convergence",
            Command::OracleCheck => "oracle-check",
            Command::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CliInvocation {
    pub command: Command,
    pub config_path: PathBuf,
    /// `KEY=VALUE` overrides, applied in order after parsing.
    pub overrides: Vec<String>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    /// Oracle check only: number of trials (defaults to `realizations`).
    pub trials: Option<usize>,
    /// Oracle check only: required fraction of trials reaching the optimum.
    pub min_attainment: f64,
}

impl CliInvocation {
    pub fn new(command: Command, config_path: impl Into<PathBuf>) -> Self {
        Self {
            command,
            config_path: config_path.into(),
            overrides: Vec::new(),
            out_dir: PathBuf::from("out"),
            seed: None,
            workers: None,
            trials: None,
            min_attainment: 0.95,
        }
    }

    /// Parses the config, applies `--set` and `--seed`, then validates.
    pub fn load(&self) -> Result<ExperimentConfig> {
        if !self.config_path.exists() {
            return Err(Error::InvalidArgument(format!(
                "config file {} does not exist",
                self.config_path.display()
            )));
        }
        let mut overrides = self
            .overrides
            .iter()
            .map(|s| parse_override(s))
            .collect::<Result<Vec<_>>>()?;
        if let Some(seed) = self.seed {
            overrides.push(("seed".into(), seed.to_string()));
        }
        if let (Command::OracleCheck, Some(trials)) = (self.command, self.trials) {
            if trials == 0 {
                return Err(Error::InvalidArgument("trials must be at least 1".into()));
            }
            overrides.push(("realizations".into(), trials.to_string()));
        }
        load_config(&self.config_path, &overrides)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub exit_code: i32,
    pub text: String,
    pub files: Vec<PathBuf>,
}

pub fn execute(inv: &CliInvocation) -> Result<Report> {
    match inv.command {
        Command::Validate => command_validate(inv),
        Command::Run | Command::Sweep | Command::Convergence => command_run(inv),
        Command::OracleCheck => command_oracle_check(inv),
    }
}

/// Like [`execute`] but folds errors into a failing report.
pub fn execute_to_report(inv: &CliInvocation) -> Report {
    execute(inv).unwrap_or_else(|e| Report {
        exit_code: 2,
        text: format!("error: {}\n", e),
        files: Vec::new(),
    })
}

fn command_validate(inv: &CliInvocation) -> Result<Report> {
    match inv.load() {
        Ok(ec) => {
            let points = ec.points()?.len();
            Ok(Report {
                exit_code: 0,
                text: format!("ok: {} ({} point(s))\n", inv.config_path.display(), points),
                files: Vec::new(),
            })
        }
        Err(Error::InvalidConfig(violations)) => {
            let mut text = format!("invalid: {}\n", inv.config_path.display());
            for v in violations {
                let _ = writeln!(text, "  - {}", v);
            }
            Ok(Report {
                exit_code: 1,
                text,
                files: Vec::new(),
            })
        }
        Err(e) => Err(e),
    }
}

pub fn summary_table(result: &ExperimentResult) -> String {
    let key = result
        .config
        .sweep
        .as_ref()
        .map_or("point", |s| s.key.as_str())
        .to_string();
    let mut t = format!(
        "{:>10} {:>12} {:>10} {:>10} {:>8} {:>10}\n",
        key, "throughput", "conv_iter", "outage", "served", "k95_med"
    );
    for p in &result.points {
        match &p.error {
            None => {
                let _ = writeln!(
                    t,
                    "{:>10} {:>12.4} {:>10.2} {:>10.4} {:>8.3} {:>10.1}",
                    p.label,
                    p.mean_final_throughput,
                    p.avg_convergence_iteration,
                    p.empirical_outage_prob,
                    p.avg_served_users,
                    p.median_near_final_iteration
                );
            }
            Some(e) => {
                let _ = writeln!(t, "{:>10} FAILED: {}", p.label, e);
            }
        }
    }
    t
}

fn command_run(inv: &CliInvocation) -> Result<Report> {
    let mut ec = inv.load()?;
    match inv.command {
        Command::Run => ec.sweep = None,
        Command::Sweep if ec.sweep.is_none() => {
            return Err(Error::InvalidArgument(
                "sweep needs a `sweep=KEY:v1,v2,...` entry in the config or via --set".into(),
            ))
        }
        _ => {}
    }
    let result = run_experiment_with_workers(&ec, inv.workers)?;
    let files = write_results(
        &result,
        &inv.out_dir,
        inv.command.name(),
        inv.workers,
        inv.command == Command::Convergence,
    )?;
    let mut text = summary_table(&result);
    if inv.command == Command::Convergence {
        let _ = writeln!(text, "\niterations to convergence (alpha as configured / alpha = 0):");
        for p in &result.points {
            let _ = writeln!(
                text,
                "{:>10} alpha={:<8} {:>8.2} {:>8.2}",
                p.label, p.config.alpha, p.avg_convergence_iteration, p.avg_convergence_iteration_undelayed
            );
        }
    }
    let _ = writeln!(text, "wrote {} file(s) to {}", files.len(), inv.out_dir.display());
    Ok(Report {
        exit_code: if result.is_complete() { 0 } else { 1 },
        text,
        files,
    })
}

/// Fraction of trials attaining the optimum and the mean relative gap.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSummary {
    pub trials: usize,
    pub attainment: f64,
    pub mean_gap: f64,
}

fn command_oracle_check(inv: &CliInvocation) -> Result<Report> {
    let mut ec = inv.load()?;
    for point in ec.points()? {
        let c = &point.config;
        let size = ordered_selection_count(c.users, c.codebook_size);
        if size > ec.exhaustive_cap as f64 {
            return Err(Error::SearchSpaceTooLarge {
                size,
                cap: ec.exhaustive_cap,
            });
        }
    }
    if !ec.baselines.contains(&Baseline::Exhaustive) {
        ec.baselines.push(Baseline::Exhaustive);
    }
    let result = run_experiment_with_workers(&ec, inv.workers)?;
    let files = write_results(&result, &inv.out_dir, inv.command.name(), inv.workers, false)?;

    let mut ok = result.is_complete();
    let mut text = String::from("sweep_value trials attainment mean_gap verdict\n");
    for s in oracle_summaries(&result) {
        let (label, summary) = s;
        let pass = summary.attainment >= inv.min_attainment;
        ok &= pass;
        let _ = writeln!(
            text,
            "{} {} {:.4} {:.6} {}",
            label,
            summary.trials,
            summary.attainment,
            summary.mean_gap,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    let _ = writeln!(text, "threshold: attainment >= {}", inv.min_attainment);
    Ok(Report {
        exit_code: if ok { 0 } else { 1 },
        text,
        files,
    })
}

pub fn oracle_summaries(result: &ExperimentResult) -> Vec<(String, OracleSummary)> {
    result
        .points
        .iter()
        .filter_map(|p| {
            let b = p.baselines.as_ref()?;
            Some((
                p.label.clone(),
                OracleSummary {
                    trials: p.outcomes.len(),
                    attainment: b.attainment_fraction?,
                    mean_gap: b.mean_relative_gap?,
                },
            ))
        })
        .collect()
}

/// Shipped recipe configs, relative to the repository root.
pub const RECIPES: [&str; 7] = [
    "fig3.cfg",
    "fig4.cfg",
    "fig5.cfg",
    "fig6.cfg",
    "fig7.cfg",
    "table1.cfg",
    "table3.cfg",
];

pub fn recipe_path(root: &Path, name: &str) -> PathBuf {
    root.join("recipes").join(name)
}
