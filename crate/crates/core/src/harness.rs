//! Experiment orchestration: seeded trials, the two aggregate metrics,
//! parameter sweeps, and CSV emission.
//!
//! Trials are embarrassingly parallel: each one derives its own seed from
//! the base seed with a counter-based SplitMix64 mix, owns its RNGs, and
//! shares only the immutable field tables. With the `parallel` feature
//! (default) `run_trials` fans out over rayon; `run_trials_sequential` is
//! always available and produces the identical result vector.
//!
//! Within a sweep, every scheme sees the same generated graph sequence per
//! axis value, so scheme comparisons are paired.

use thiserror::Error;

use crate::baselines::{route_intra_layer, route_pt2pt, route_steiner};
use crate::codeassign::{assign_codes, CodeAssignError};
use crate::gf::{Field, FieldError, FieldSpec};
use crate::netgraph::{GenParams, GraphError, LayeredDag};
use crate::pushback::{run_pushback, Criterion, PushbackError, Schedule};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no trial results to aggregate")]
    EmptyResults,
    #[error("total min-cut is zero")]
    ZeroTotalMinCut,
    #[error("trial has no receivers")]
    NoReceivers,
    #[error("sweep axis varies generation parameters but the topology is fixed")]
    AxisNeedsGeneration,
    #[error("generation failed in trial {trial} (seed {seed}): {source}")]
    Generation {
        trial: usize,
        seed: u64,
        source: GraphError,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Pushback(#[from] PushbackError),
    #[error(transparent)]
    CodeAssign(#[from] CodeAssignError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Pushback,
    Pt2pt,
    Steiner,
    IntraLayer,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::Pushback => "pushback",
            Scheme::Pt2pt => "pt2pt",
            Scheme::Steiner => "steiner",
            Scheme::IntraLayer => "intralayer",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pushback" => Ok(Scheme::Pushback),
            "pt2pt" => Ok(Scheme::Pt2pt),
            "steiner" => Ok(Scheme::Steiner),
            "intralayer" => Ok(Scheme::IntraLayer),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minreq" => Ok(Criterion::MinReq),
            "mincut" => Ok(Criterion::MinCut),
            other => Err(format!("unknown criterion `{other}`")),
        }
    }
}

impl std::str::FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sequential" => Ok(Schedule::Sequential),
            "flooding" => Ok(Schedule::Flooding),
            other => Err(format!("unknown schedule `{other}`")),
        }
    }
}

/// Where trial graphs come from: fresh random networks per trial, or one
/// fixed network (e.g. loaded from a file) reused across trials.
#[derive(Debug, Clone)]
pub enum Topology {
    Generated(GenParams),
    Fixed(LayeredDag),
}

#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub topology: Topology,
    pub scheme: Scheme,
    pub criterion: Criterion,
    pub schedule: Schedule,
    pub field: FieldSpec,
    pub trials: usize,
    pub base_seed: u64,
}

/// One trial's outcome: per receiver the capped min-cut (the demand) and the
/// achieved layer count, plus the trial seed for replay.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialResult {
    pub pairs: Vec<(u32, u32)>,
    pub seed: u64,
}

/// SplitMix64 output mix.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based per-trial seed: trial `t` of a run with `base_seed` uses
/// the SplitMix64 stream value at counter `t`. Independent of the scheme, so
/// paired comparisons see identical graphs.
pub fn trial_seed(base_seed: u64, t: usize) -> u64 {
    splitmix64(base_seed.wrapping_add((t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

fn coding_seed(seed: u64, scheme: Scheme, criterion: Criterion) -> u64 {
    let salt = match (scheme, criterion) {
        (Scheme::Pushback, Criterion::MinReq) => 0xC0DE_0001,
        (Scheme::Pushback, Criterion::MinCut) => 0xC0DE_0002,
        _ => 0xC0DE_00FF,
    };
    splitmix64(seed ^ salt)
}

/// Run one trial. Deterministic given `(cfg, t)`.
pub fn run_trial(cfg: &TrialConfig, t: usize) -> Result<TrialResult, HarnessError> {
    let field = Field::new(cfg.field)?;
    run_trial_with(cfg, &field, t)
}

fn run_trial_with(cfg: &TrialConfig, field: &Field, t: usize) -> Result<TrialResult, HarnessError> {
    let seed = trial_seed(cfg.base_seed, t);
    let generated;
    let g: &LayeredDag = match &cfg.topology {
        Topology::Fixed(g) => g,
        Topology::Generated(params) => {
            let mut graph_rng = ChaCha8Rng::seed_from_u64(seed);
            generated = LayeredDag::generate_random(*params, &mut graph_rng).map_err(|source| {
                HarnessError::Generation {
                    trial: t,
                    seed,
                    source,
                }
            })?;
            &generated
        }
    };
    if g.receivers().is_empty() {
        return Err(HarnessError::NoReceivers);
    }

    let pairs = match cfg.scheme {
        Scheme::Pushback => {
            let req = run_pushback(g, cfg.criterion, cfg.schedule)?;
            let mut rng = ChaCha8Rng::seed_from_u64(coding_seed(seed, cfg.scheme, cfg.criterion));
            let asg = assign_codes(g, &req, field, &mut rng)?;
            g.receivers()
                .iter()
                .map(|&r| (req.min_cut[r].min(g.layers()), asg.m_star[r]))
                .collect()
        }
        Scheme::Pt2pt | Scheme::Steiner | Scheme::IntraLayer => {
            let result = match cfg.scheme {
                Scheme::Pt2pt => route_pt2pt(g),
                Scheme::Steiner => route_steiner(g),
                _ => route_intra_layer(g),
            };
            result
                .achieved
                .iter()
                .map(|&(r, a)| {
                    let cut = g.min_cut(r).expect("receiver is not the source");
                    (cut.min(g.layers()), a)
                })
                .collect()
        }
    };
    Ok(TrialResult { pairs, seed })
}

/// All trials of a config, in trial order. Parallel when the `parallel`
/// feature is enabled.
#[cfg(feature = "parallel")]
pub fn run_trials(cfg: &TrialConfig) -> Result<Vec<TrialResult>, HarnessError> {
    use rayon::prelude::*;
    let field = Field::new(cfg.field)?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial_with(cfg, &field, t))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_trials(cfg: &TrialConfig) -> Result<Vec<TrialResult>, HarnessError> {
    run_trials_sequential(cfg)
}

/// Single-threaded trial loop; result-identical to `run_trials`.
pub fn run_trials_sequential(cfg: &TrialConfig) -> Result<Vec<TrialResult>, HarnessError> {
    let field = Field::new(cfg.field)?;
    (0..cfg.trials)
        .map(|t| run_trial_with(cfg, &field, t))
        .collect()
}

/// Mean over trials of the per-trial fraction of receivers whose achieved
/// layer count equals their (capped) min-cut, in percent.
pub fn pct_happy(results: &[TrialResult]) -> Result<f64, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut sum = 0.0;
    for r in results {
        if r.pairs.is_empty() {
            return Err(HarnessError::NoReceivers);
        }
        let happy = r.pairs.iter().filter(|&&(cut, a)| a == cut).count();
        sum += happy as f64 / r.pairs.len() as f64;
    }
    Ok(100.0 * sum / results.len() as f64)
}

/// Ratio of sums across all trials: total achieved rate over total (capped)
/// min-cut, in percent. Not the mean of per-trial ratios.
pub fn pct_rate(results: &[TrialResult]) -> Result<f64, HarnessError> {
    if results.is_empty() {
        return Err(HarnessError::EmptyResults);
    }
    let mut achieved = 0u64;
    let mut demanded = 0u64;
    for r in results {
        for &(cut, a) in &r.pairs {
            achieved += a as u64;
            demanded += cut as u64;
        }
    }
    if demanded == 0 {
        return Err(HarnessError::ZeroTotalMinCut);
    }
    Ok(100.0 * achieved as f64 / demanded as f64)
}

/// A swept experiment axis and its values.
#[derive(Debug, Clone)]
pub enum SweepAxis {
    Field(Vec<FieldSpec>),
    Receivers(Vec<usize>),
    Nodes(Vec<usize>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Field(_) => "field",
            SweepAxis::Receivers(_) => "receivers",
            SweepAxis::Nodes(_) => "nodes",
        }
    }
}

pub const CSV_HEADER: &str =
    "axis,value,scheme,criterion,schedule,field,trials,pct_happy,pct_rate,base_seed";

#[derive(Debug, Clone)]
pub struct CsvRow {
    pub axis: String,
    pub value: String,
    pub scheme: Scheme,
    pub criterion: Option<Criterion>,
    pub schedule: Option<Schedule>,
    pub field: Option<FieldSpec>,
    pub trials: usize,
    pub pct_happy: f64,
    pub pct_rate: f64,
    pub base_seed: u64,
}

impl CsvRow {
    pub fn csv_line(&self) -> String {
        let opt = |s: Option<String>| s.unwrap_or_else(|| "-".to_string());
        format!(
            "{},{},{},{},{},{},{},{:.2},{:.2},{}",
            self.axis,
            self.value,
            self.scheme,
            opt(self.criterion.map(|c| c.to_string())),
            opt(self.schedule.map(|s| s.to_string())),
            opt(self.field.map(|f| f.to_string())),
            self.trials,
            self.pct_happy,
            self.pct_rate,
            self.base_seed,
        )
    }
}

/// Render a full CSV document (header plus rows, newline-terminated).
pub fn to_csv(rows: &[CsvRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

fn aggregate_row(cfg: &TrialConfig, axis: &str, value: &str) -> Result<CsvRow, HarnessError> {
    let results = run_trials(cfg)?;
    let (criterion, schedule, field) = match cfg.scheme {
        Scheme::Pushback => (Some(cfg.criterion), Some(cfg.schedule), Some(cfg.field)),
        _ => (None, None, None),
    };
    Ok(CsvRow {
        axis: axis.to_string(),
        value: value.to_string(),
        scheme: cfg.scheme,
        criterion,
        schedule,
        field,
        trials: cfg.trials,
        pct_happy: pct_happy(&results)?,
        pct_rate: pct_rate(&results)?,
        base_seed: cfg.base_seed,
    })
}

/// One aggregate row for a single configuration (the `run` entry point).
pub fn run_aggregate(cfg: &TrialConfig) -> Result<CsvRow, HarnessError> {
    aggregate_row(cfg, "-", "-")
}

const SWEEP_ROSTER: [(Scheme, Option<Criterion>); 5] = [
    (Scheme::Pushback, Some(Criterion::MinReq)),
    (Scheme::Pushback, Some(Criterion::MinCut)),
    (Scheme::Pt2pt, None),
    (Scheme::Steiner, None),
    (Scheme::IntraLayer, None),
];

/// Run the full scheme roster over every axis value. All schemes within one
/// axis value share the graph sequence derived from `base.base_seed`.
pub fn run_sweep(base: &TrialConfig, axis: &SweepAxis) -> Result<Vec<CsvRow>, HarnessError> {
    let mut rows = Vec::new();
    let values: Vec<(String, TrialConfig)> = match axis {
        SweepAxis::Field(specs) => specs
            .iter()
            .map(|&spec| {
                let mut cfg = base.clone();
                cfg.field = spec;
                (spec.to_string(), cfg)
            })
            .collect(),
        SweepAxis::Receivers(counts) => {
            let params = generated_params(base)?;
            counts
                .iter()
                .map(|&k| {
                    let mut p = params;
                    p.receiver_count = k;
                    let mut cfg = base.clone();
                    cfg.topology = Topology::Generated(p);
                    (k.to_string(), cfg)
                })
                .collect()
        }
        SweepAxis::Nodes(counts) => {
            let params = generated_params(base)?;
            counts
                .iter()
                .map(|&n| {
                    let mut p = params;
                    p.node_count = n;
                    let mut cfg = base.clone();
                    cfg.topology = Topology::Generated(p);
                    (n.to_string(), cfg)
                })
                .collect()
        }
    };

    for (value, value_cfg) in values {
        for (scheme, criterion) in SWEEP_ROSTER {
            let mut cfg = value_cfg.clone();
            cfg.scheme = scheme;
            if let Some(c) = criterion {
                cfg.criterion = c;
            }
            rows.push(aggregate_row(&cfg, axis.name(), &value)?);
        }
    }
    Ok(rows)
}

fn generated_params(cfg: &TrialConfig) -> Result<GenParams, HarnessError> {
    match &cfg.topology {
        Topology::Generated(p) => Ok(*p),
        Topology::Fixed(_) => Err(HarnessError::AxisNeedsGeneration),
    }
}
