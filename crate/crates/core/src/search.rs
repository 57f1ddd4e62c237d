//! Sequential backward and forward generation, plain and with accumulated
//! evidence.
//!
//! Every variant runs to completion without a stopping rule: backward runs
//! go from the full set down to the empty set, forward runs the other way.
//! The best post-step subset along the path is returned.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::relevance::{
    check_lambda, estimated_relevance, removal_merit, AccumulationMode, AccumulatorTable, WeightingFn,
};

pub const DEFAULT_LAMBDA: f64 = 2.0 / 3.0;

/// Anything that can score a feature subset, e.g. a wrapper scorer bound to
/// a dataset or a closure in tests.
pub trait SubsetObjective: Sync {
    fn n_features(&self) -> usize;
    fn score(&self, mask: &FeatureMask) -> Result<f64>;
}

/// Adapts a plain scoring function, counting calls.
pub struct FnObjective<F> {
    n: usize,
    f: F,
    calls: AtomicU64,
}

impl<F> FnObjective<F>
where
    F: Fn(&FeatureMask) -> f64 + Sync,
{
    pub fn new(n: usize, f: F) -> Self {
        FnObjective {
            n,
            f,
            calls: AtomicU64::new(0),
        }
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<F> SubsetObjective for FnObjective<F>
where
    F: Fn(&FeatureMask) -> f64 + Sync,
{
    fn n_features(&self) -> usize {
        self.n
    }

    fn score(&self, mask: &FeatureMask) -> Result<f64> {
        mask.check_width(self.n)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok((self.f)(mask))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Backward,
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Sbg,
    SbgPlus,
    Sfg,
    SfgPlus,
}

impl Algorithm {
    pub fn direction(self) -> Direction {
        match self {
            Algorithm::Sbg | Algorithm::SbgPlus => Direction::Backward,
            Algorithm::Sfg | Algorithm::SfgPlus => Direction::Forward,
        }
    }

    pub fn is_accumulated(self) -> bool {
        matches!(self, Algorithm::SbgPlus | Algorithm::SfgPlus)
    }

    /// The (plain, accumulated) pair searching in `direction`.
    pub fn pair(direction: Direction) -> (Algorithm, Algorithm) {
        match direction {
            Direction::Backward => (Algorithm::Sbg, Algorithm::SbgPlus),
            Direction::Forward => (Algorithm::Sfg, Algorithm::SfgPlus),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Sbg => "sbg",
            Algorithm::SbgPlus => "sbg+",
            Algorithm::Sfg => "sfg",
            Algorithm::SfgPlus => "sfg+",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sbg" => Ok(Algorithm::Sbg),
            "sbg+" | "sbgplus" => Ok(Algorithm::SbgPlus),
            "sfg" => Ok(Algorithm::Sfg),
            "sfg+" | "sfgplus" => Ok(Algorithm::SfgPlus),
            other => Err(Error::validation(format!(
                "unknown algorithm {other:?} (expected sbg, sbg+, sfg or sfg+)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    /// Weight of the accumulated evidence; ignored by the plain variants.
    pub lambda: f64,
    pub weighting: WeightingFn,
    pub accumulation_mode: AccumulationMode,
}

impl SearchConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SearchConfig {
            algorithm,
            lambda: DEFAULT_LAMBDA,
            weighting: WeightingFn::Unit,
            accumulation_mode: AccumulationMode::PerSubset,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Feature removed (backward) or added (forward) to form `mask`.
    pub feature: usize,
    pub mask: FeatureMask,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub pre_mask: FeatureMask,
    /// One evaluation per candidate feature, ascending feature order.
    pub evaluations: Vec<Evaluation>,
    pub chosen: usize,
    pub post_mask: FeatureMask,
    pub post_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchTrace {
    pub algorithm: Algorithm,
    pub steps: Vec<StepRecord>,
    pub call_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub best_mask: FeatureMask,
    /// `None` only for a one-feature backward run, whose sole non-empty
    /// subset (the full set) is never evaluated.
    pub best_score: Option<f64>,
    pub trace: SearchTrace,
}

pub fn run_sbg(objective: &impl SubsetObjective) -> Result<SelectionResult> {
    run_search(objective, &SearchConfig::new(Algorithm::Sbg))
}

pub fn run_sbg_plus(objective: &impl SubsetObjective, config: &SearchConfig) -> Result<SelectionResult> {
    run_search(objective, &SearchConfig { algorithm: Algorithm::SbgPlus, ..*config })
}

pub fn run_sfg(objective: &impl SubsetObjective) -> Result<SelectionResult> {
    run_search(objective, &SearchConfig::new(Algorithm::Sfg))
}

pub fn run_sfg_plus(objective: &impl SubsetObjective, config: &SearchConfig) -> Result<SelectionResult> {
    run_search(objective, &SearchConfig { algorithm: Algorithm::SfgPlus, ..*config })
}

/// Runs `config.algorithm` to completion and returns the best subset on
/// its path.
///
/// Each step scores every one-feature move from the current subset. The
/// accumulated variants then fold that step's evaluations into the
/// accumulators and pick the move with the best mixed criterion; plain
/// variants pick the best evaluation. Ties go to the lowest feature index.
pub fn run_search(objective: &impl SubsetObjective, config: &SearchConfig) -> Result<SelectionResult> {
    config.validate()?;
    let n = objective.n_features();
    if n == 0 {
        return Err(Error::validation("cannot search over zero features"));
    }
    let direction = config.algorithm.direction();
    let mut current = match direction {
        Direction::Backward => FeatureMask::full(n),
        Direction::Forward => FeatureMask::empty(n),
    };
    let mut table = config.algorithm.is_accumulated().then(|| AccumulatorTable::new(n));
    let mut current_score: Option<f64> = None;
    let mut steps = Vec::with_capacity(n);
    let mut call_count = 0u64;

    for step in 1..=n {
        let with_step = |e: Error| Error::Step {
            step,
            source: Box::new(e),
        };
        let candidates: Vec<usize> = match direction {
            Direction::Backward => current.iter().collect(),
            Direction::Forward => current.iter_absent().collect(),
        };
        let evaluations = candidates
            .par_iter()
            .map(|&x| {
                let mask = match direction {
                    Direction::Backward => current.without(x),
                    Direction::Forward => current.with(x),
                };
                objective.score(&mask).map(|score| Evaluation { feature: x, mask, score })
            })
            .collect::<Result<Vec<_>>>()
            .map_err(with_step)?;
        call_count += evaluations.len() as u64;

        let criteria: Vec<f64> = match table.as_mut() {
            None => evaluations.iter().map(|e| e.score).collect(),
            Some(table) => {
                update_accumulators(table, config, direction, &current, &evaluations, current_score)
                    .map_err(with_step)?;
                evaluations
                    .iter()
                    .map(|e| step_criterion(table, config, direction, e))
                    .collect::<Result<_>>()
                    .map_err(with_step)?
            }
        };

        let mut pick = 0;
        for (i, c) in criteria.iter().enumerate() {
            if *c > criteria[pick] {
                pick = i;
            }
        }
        let chosen = &evaluations[pick];
        log::debug!(
            "{} step {step}: {} feature {} -> {} features, score {}",
            config.algorithm,
            match direction {
                Direction::Backward => "removed",
                Direction::Forward => "added",
            },
            chosen.feature,
            chosen.mask.len(),
            chosen.score
        );
        let record = StepRecord {
            pre_mask: current.clone(),
            chosen: chosen.feature,
            post_mask: chosen.mask.clone(),
            post_score: chosen.score,
            evaluations,
        };
        current = record.post_mask.clone();
        current_score = Some(record.post_score);
        steps.push(record);
    }

    let trace = SearchTrace {
        algorithm: config.algorithm,
        steps,
        call_count,
    };
    let (best_mask, best_score) = best_of_trace(&trace);
    Ok(SelectionResult {
        best_mask,
        best_score,
        trace,
    })
}

fn update_accumulators(
    table: &mut AccumulatorTable,
    config: &SearchConfig,
    direction: Direction,
    current: &FeatureMask,
    evaluations: &[Evaluation],
    current_score: Option<f64>,
) -> Result<()> {
    match config.accumulation_mode {
        AccumulationMode::PerSubset => {
            for e in evaluations {
                table.accumulate(&e.mask, e.score, config.weighting)?;
            }
            Ok(())
        }
        AccumulationMode::LiteralAlg2 => {
            let moves: Vec<(usize, f64)> = evaluations.iter().map(|e| (e.feature, e.score)).collect();
            match direction {
                Direction::Backward => table.literal_backward_step(current, &moves, current_score),
                Direction::Forward => table.literal_forward_step(current, &moves, current_score),
            }
        }
    }
}

fn step_criterion(
    table: &AccumulatorTable,
    config: &SearchConfig,
    direction: Direction,
    e: &Evaluation,
) -> Result<f64> {
    match (direction, config.accumulation_mode) {
        (Direction::Backward, AccumulationMode::PerSubset) => {
            removal_merit(table, e.feature, config.lambda, e.score)
        }
        _ => estimated_relevance(table, e.feature, config.lambda, e.score),
    }
}

/// Highest-scoring non-empty post-step subset; score ties go to the
/// smaller subset.
fn best_of_trace(trace: &SearchTrace) -> (FeatureMask, Option<f64>) {
    let mut best: Option<&StepRecord> = None;
    for s in trace.steps.iter().filter(|s| !s.post_mask.is_empty()) {
        best = match best {
            Some(b) if s.post_score < b.post_score => Some(b),
            Some(b) if s.post_score == b.post_score && s.post_mask.len() >= b.post_mask.len() => Some(b),
            _ => Some(s),
        };
    }
    match best {
        Some(s) => (s.post_mask.clone(), Some(s.post_score)),
        None => {
            let width = trace.steps.first().map_or(0, |s| s.pre_mask.width());
            (FeatureMask::full(width), None)
        }
    }
}

/// One CSV row per evaluation:
/// `step,candidate_feature,mask_bitstring,score,chosen_flag`.
pub fn write_trace<W: Write>(trace: &SearchTrace, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["step", "candidate_feature", "mask_bitstring", "score", "chosen_flag"])?;
    for (i, step) in trace.steps.iter().enumerate() {
        for e in &step.evaluations {
            wtr.write_record([
                (i + 1).to_string(),
                e.feature.to_string(),
                e.mask.to_bitstring(),
                e.score.to_string(),
                u8::from(e.feature == step.chosen).to_string(),
            ])?;
        }
    }
    wtr.flush().map_err(|e| Error::io("<trace output>", e))?;
    Ok(())
}
