//! Experiment harness behind the `odyn` binary: input loading, synthetic
//! generators, experiment orchestration, and CSV/JSON report rows.
//!
//! Everything here is deterministic per (config, seed); wall-clock columns
//! are the only exception and can be zeroed with the no-timing switch.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use odyn_core::budgeted::{baseline_score, baseline_top_opinion, exhaustive_opt, greedy_select};
use odyn_core::equilibrium::solve_equilibrium;
use odyn_core::unbudgeted::{maximize_unbudgeted, minimize_unbudgeted, SolverOptions};
use odyn_core::{BoxBounds, Direction, Error, Graph, OpinionProfile, Result};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const POWERLAW_X_MIN: f64 = 0.01;

// ------------------------------------------------------------ generators ----

/// Opinion generator family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Uniform,
    /// Density ∝ x^(-slope) on [`POWERLAW_X_MIN`], 1], sampled by inverse
    /// transform; requires slope > 1 so the density is normalizable.
    Powerlaw(f64),
}

/// I.i.d. innate opinions in [0, 1], deterministic per seed.
pub fn gen_opinions(n: usize, dist: Dist, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Contract("cannot generate an empty opinion vector".into()));
    }
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    match dist {
        Dist::Uniform => Ok((0..n).map(|_| r.random_range(0.0..=1.0)).collect()),
        Dist::Powerlaw(slope) => {
            if slope <= 1.0 {
                return Err(Error::Contract(format!(
                    "power-law slope must exceed 1 (got {slope}): the density x^-slope \
                     is not normalizable on (0, 1]"
                )));
            }
            // Inverse transform for density ∝ x^-slope on [x_min, 1]; at
            // slope 2 this is x = x_min / (1 - U(1 - x_min)).
            let a = POWERLAW_X_MIN.powf(1.0 - slope);
            Ok((0..n)
                .map(|_| {
                    let u: f64 = r.random_range(0.0..=1.0);
                    (a + u * (1.0 - a)).powf(1.0 / (1.0 - slope))
                })
                .collect())
        }
    }
}

/// I.i.d. resistances uniform on [0.001, 1], deterministic per seed.
pub fn gen_resistance(n: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Contract("cannot generate an empty resistance vector".into()));
    }
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| r.random_range(0.001..=1.0)).collect())
}

// --------------------------------------------------------------- loading ----

/// Where one per-node input vector comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueSource {
    File(PathBuf),
    Generate(Dist),
}

impl FromStr for ValueSource {
    type Err = Error;

    /// `gen`/`uniform` select the uniform generator, `powerlaw` (optionally
    /// `powerlaw:SLOPE`) the power law; anything else is a file path.
    fn from_str(text: &str) -> Result<Self> {
        match text {
            "gen" | "uniform" => Ok(ValueSource::Generate(Dist::Uniform)),
            "powerlaw" => Ok(ValueSource::Generate(Dist::Powerlaw(2.0))),
            _ => {
                if let Some(rest) = text.strip_prefix("powerlaw:") {
                    let slope = rest.parse::<f64>().map_err(|_| {
                        Error::Invalid(format!("bad power-law slope {rest:?}"))
                    })?;
                    Ok(ValueSource::Generate(Dist::Powerlaw(slope)))
                } else {
                    Ok(ValueSource::File(PathBuf::from(text)))
                }
            }
        }
    }
}

/// Which column of a values file to take.
#[derive(Debug, Clone, Copy)]
pub enum Column {
    Opinions,
    Resistance,
}

/// Parse a per-node values file: either two columns `node value` or a full
/// three-column `node s alpha` profile, auto-detected by column count; node
/// ids must cover 0..n exactly once.
pub fn parse_values(text: &str, take: Column) -> Result<Vec<f64>> {
    let mut width = None;
    let mut rows: Vec<(usize, f64)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let w = fields.len();
        if w != 2 && w != 3 {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected 2 or 3 columns, found {w}"),
            });
        }
        match width {
            None => width = Some(w),
            Some(prev) if prev != w => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: format!("row has {w} columns but earlier rows have {prev}"),
                })
            }
            _ => {}
        }
        let node: usize = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad node id {:?}", fields[0]),
        })?;
        let col = match (take, w) {
            (Column::Opinions, _) | (Column::Resistance, 2) => 1,
            (Column::Resistance, _) => 2,
        };
        let value: f64 = fields[col].parse().map_err(|_| Error::Parse {
            line: lineno,
            msg: format!("bad value {:?}", fields[col]),
        })?;
        rows.push((node, value));
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, msg: "file contains no data rows".into() });
    }
    let n = 1 + rows.iter().map(|&(v, _)| v).max().unwrap();
    let mut out = vec![f64::NAN; n];
    let mut seen = vec![false; n];
    for (node, value) in rows {
        if seen[node] {
            return Err(Error::Invalid(format!("node {node} appears more than once")));
        }
        seen[node] = true;
        out[node] = value;
    }
    if let Some(missing) = seen.iter().position(|&v| !v) {
        return Err(Error::Invalid(format!("node {missing} is missing a value")));
    }
    Ok(out)
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

// ---------------------------------------------------------- configuration ----

/// One experiment: a graph plus per-node inputs and reporting options.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub graph_path: PathBuf,
    pub opinions: ValueSource,
    pub resistance: ValueSource,
    pub seed: u64,
    pub trials: usize,
    /// Map file-loaded opinions from [-1, 1] to [0, 1] via (v+1)/2.
    pub normalize_signed: bool,
    /// Zero the wall-time column so output is byte-identical across runs.
    pub no_timing: bool,
}

impl ExperimentConfig {
    /// Dataset label for report rows: the graph file stem.
    pub fn dataset(&self) -> String {
        self.graph_path
            .file_stem()
            .map(|v| v.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.graph_path.display().to_string())
    }

    pub fn load_graph(&self) -> Result<Graph> {
        Graph::parse_edge_list(&read_to_string(&self.graph_path)?)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        if self.normalize_signed && !matches!(self.opinions, ValueSource::File(_)) {
            return Err(Error::Invalid(
                "--normalize-signed applies to file-loaded opinions only".into(),
            ));
        }
        if matches!(self.resistance, ValueSource::Generate(Dist::Powerlaw(_))) {
            return Err(Error::Invalid(
                "resistance can only be generated uniformly on [0.001, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Materialize (s, α) for one trial. File inputs are identical across
    /// trials; generated inputs draw fresh per-trial streams.
    fn realize(&self, g: &Graph, trial: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = g.node_count();
        let seed = self.trial_seed(trial);
        let s = match &self.opinions {
            ValueSource::File(path) => {
                let mut v = parse_values(&read_to_string(path)?, Column::Opinions)?;
                check_node_count(v.len(), n, "opinions")?;
                if self.normalize_signed {
                    for val in &mut v {
                        *val = (*val + 1.0) / 2.0;
                    }
                }
                v
            }
            // Opinion and resistance generators get distinct streams so a
            // shared seed never yields correlated vectors.
            ValueSource::Generate(dist) => gen_opinions(n, *dist, seed)?,
        };
        let alpha = match &self.resistance {
            ValueSource::File(path) => {
                let v = parse_values(&read_to_string(path)?, Column::Resistance)?;
                check_node_count(v.len(), n, "resistance")?;
                v
            }
            ValueSource::Generate(_) => gen_resistance(n, seed ^ 0xA5A5_A5A5_A5A5_A5A5)?,
        };
        Ok((s, alpha))
    }

    fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

fn check_node_count(got: usize, expected: usize, what: &str) -> Result<()> {
    if got != expected {
        return Err(Error::Invalid(format!(
            "{what} file provides {got} nodes but the graph has {expected}"
        )));
    }
    Ok(())
}

// ------------------------------------------------------------ report rows ----

/// Row for the equilibrium and unbudgeted modes.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub mode: String,
    pub trial: String,
    pub seed: u64,
    pub sum_s: f64,
    pub sum_z: f64,
    pub sum_z_opt: f64,
    pub iterations: u64,
    pub wall_time_ms: u64,
}

/// Row for the budgeted mode: one per (method, k, trial).
#[derive(Debug, Clone, Serialize)]
pub struct BudgetRow {
    pub dataset: String,
    pub method: String,
    pub k: usize,
    pub trial: String,
    pub seed: u64,
    pub objective: f64,
    pub wall_time_ms: u64,
}

pub const SUMMARY_HEADER: &str =
    "dataset,mode,trial,seed,sum_s,sum_z,sum_z_opt,iterations,wall_time_ms";
pub const BUDGET_HEADER: &str = "dataset,method,k,trial,seed,objective,wall_time_ms";

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.dataset, r.mode, r.trial, r.seed, r.sum_s, r.sum_z, r.sum_z_opt, r.iterations,
            r.wall_time_ms
        )
        .unwrap();
    }
    out
}

pub fn budget_csv(rows: &[BudgetRow]) -> String {
    let mut out = String::from(BUDGET_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.dataset, r.method, r.k, r.trial, r.seed, r.objective, r.wall_time_ms
        )
        .unwrap();
    }
    out
}

fn elapsed_ms(start: Instant, no_timing: bool) -> u64 {
    if no_timing {
        0
    } else {
        start.elapsed().as_millis() as u64
    }
}

// ------------------------------------------------------------ experiments ----

/// Equilibrium mode: solve once per trial; `sum_z_opt` repeats `sum_z`.
pub fn run_equilibrium(cfg: &ExperimentConfig) -> Result<Vec<SummaryRow>> {
    cfg.validate()?;
    let g = cfg.load_graph()?;
    let dataset = cfg.dataset();
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let (s, alpha) = cfg.realize(&g, trial)?;
        let start = Instant::now();
        let p = OpinionProfile::new(s, alpha)?;
        let r = solve_equilibrium(&g, &p)?;
        rows.push(SummaryRow {
            dataset: dataset.clone(),
            mode: "equilibrium".into(),
            trial: trial.to_string(),
            seed: cfg.trial_seed(trial),
            sum_s: odyn_core::linalg::pairwise_sum(p.s()),
            sum_z: r.objective,
            sum_z_opt: r.objective,
            iterations: r.iterations as u64,
            wall_time_ms: elapsed_ms(start, cfg.no_timing),
        });
    }
    append_average(&mut rows, cfg.seed);
    Ok(rows)
}

/// Unbudgeted mode: per-trial status-quo objective plus the optimized one.
pub fn run_unbudgeted(
    cfg: &ExperimentConfig,
    direction: Direction,
    bounds: &BoxBounds,
) -> Result<Vec<SummaryRow>> {
    cfg.validate()?;
    let g = cfg.load_graph()?;
    let dataset = cfg.dataset();
    let mode = match direction {
        Direction::Minimize => "unbudgeted-min",
        Direction::Maximize => "unbudgeted-max",
    };
    let opts = SolverOptions::default();
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let (s, alpha) = cfg.realize(&g, trial)?;
        let start = Instant::now();
        let p = OpinionProfile::new(s.clone(), alpha)?;
        let status_quo = solve_equilibrium(&g, &p)?.objective;
        let plan = match direction {
            Direction::Minimize => minimize_unbudgeted(&g, &s, bounds, &opts)?,
            Direction::Maximize => maximize_unbudgeted(&g, &s, bounds, &opts)?,
        };
        rows.push(SummaryRow {
            dataset: dataset.clone(),
            mode: mode.into(),
            trial: trial.to_string(),
            seed: cfg.trial_seed(trial),
            sum_s: odyn_core::linalg::pairwise_sum(&s),
            sum_z: status_quo,
            sum_z_opt: plan.objective,
            iterations: plan.solver_trace.as_ref().map_or(0, |t| t.iterations as u64),
            wall_time_ms: elapsed_ms(start, cfg.no_timing),
        });
    }
    append_average(&mut rows, cfg.seed);
    Ok(rows)
}

/// After per-trial rows, append their arithmetic mean as a trailing `avg`
/// row (only when there is more than one trial).
fn append_average(rows: &mut Vec<SummaryRow>, seed: u64) {
    if rows.len() < 2 {
        return;
    }
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&SummaryRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let avg = SummaryRow {
        dataset: rows[0].dataset.clone(),
        mode: rows[0].mode.clone(),
        trial: "avg".into(),
        seed,
        sum_s: mean(&|r| r.sum_s),
        sum_z: mean(&|r| r.sum_z),
        sum_z_opt: mean(&|r| r.sum_z_opt),
        iterations: (mean(&|r| r.iterations as f64)).round() as u64,
        wall_time_ms: (mean(&|r| r.wall_time_ms as f64)).round() as u64,
    };
    rows.push(avg);
}

/// Budgeted intervention method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetMethod {
    Greedy,
    /// Top-k innate opinions, targeted resistance 1 (or the box upper bound).
    Baseline1,
    /// Degree/neighborhood score, same targeting rule.
    Baseline2,
    Exhaustive,
}

impl BudgetMethod {
    pub fn label(&self) -> &'static str {
        match self {
            BudgetMethod::Greedy => "greedy",
            BudgetMethod::Baseline1 => "baseline1",
            BudgetMethod::Baseline2 => "baseline2",
            BudgetMethod::Exhaustive => "exhaustive",
        }
    }
}

/// Budgeted mode: one row per (k, trial) for the chosen method, sorted by
/// (dataset, method, k, trial).
pub fn run_budgeted(
    cfg: &ExperimentConfig,
    method: BudgetMethod,
    k_list: &[usize],
    direction: Direction,
    bounds: &BoxBounds,
    baselines_capped: bool,
) -> Result<Vec<BudgetRow>> {
    cfg.validate()?;
    if k_list.is_empty() {
        return Err(Error::Invalid("budget list must not be empty".into()));
    }
    let g = cfg.load_graph()?;
    let dataset = cfg.dataset();
    let mut rows = Vec::new();
    for trial in 0..cfg.trials {
        let (s, alpha) = cfg.realize(&g, trial)?;
        let p = OpinionProfile::new(s, alpha)?;
        for &k in k_list {
            let start = Instant::now();
            let objective = match method {
                BudgetMethod::Greedy => greedy_select(&g, &p, bounds, k, direction)?.objective,
                BudgetMethod::Exhaustive => exhaustive_opt(&g, &p, bounds, k, direction)?.objective,
                BudgetMethod::Baseline1 | BudgetMethod::Baseline2 => {
                    let targets = match method {
                        BudgetMethod::Baseline1 => baseline_top_opinion(&p, k)?,
                        _ => baseline_score(&g, &p, k)?,
                    };
                    let assigned = if baselines_capped { bounds.upper() } else { 1.0 };
                    let mut alpha = p.alpha().to_vec();
                    for &t in &targets {
                        alpha[t] = assigned;
                    }
                    solve_equilibrium(&g, &p.with_alpha(alpha)?)?.objective
                }
            };
            rows.push(BudgetRow {
                dataset: dataset.clone(),
                method: method.label().into(),
                k,
                trial: trial.to_string(),
                seed: cfg.trial_seed(trial),
                objective,
                wall_time_ms: elapsed_ms(start, cfg.no_timing),
            });
        }
    }
    rows.sort_by(|a, b| {
        (&a.dataset, &a.method, a.k, &a.trial).cmp(&(&b.dataset, &b.method, b.k, &b.trial))
    });
    Ok(rows)
}
