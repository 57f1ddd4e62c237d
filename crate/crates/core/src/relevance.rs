//! Evidence accumulators, the combined step score, and the exhaustive
//! relevance oracle.
//!
//! For a feature `x`, the exact relevance is the mean evaluation of all
//! subsets containing `x` minus the mean over subsets lacking it. A search
//! only sees the subsets it evaluates, so [`AccumulatorTable`] keeps running
//! weighted averages of exactly those evaluations, and the step criterion
//! mixes them with the evaluation of the move itself.

use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mask::FeatureMask;

pub const DEFAULT_ENUMERATION_GUARD: usize = 20;

/// Weight `w_x(X)` given to the evaluation of subset `X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightingFn {
    /// `w = 1`
    #[default]
    Unit,
    /// `w = |X| / n`
    SizeFraction,
    /// `w = J(X)`
    ScoreWeighted,
}

impl WeightingFn {
    pub fn weight(&self, mask: &FeatureMask, score: f64) -> f64 {
        match self {
            WeightingFn::Unit => 1.0,
            WeightingFn::SizeFraction => mask.len() as f64 / mask.width() as f64,
            WeightingFn::ScoreWeighted => score,
        }
    }
}

impl fmt::Display for WeightingFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightingFn::Unit => "unit",
            WeightingFn::SizeFraction => "size",
            WeightingFn::ScoreWeighted => "score",
        })
    }
}

impl FromStr for WeightingFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" => Ok(WeightingFn::Unit),
            "size" => Ok(WeightingFn::SizeFraction),
            "score" => Ok(WeightingFn::ScoreWeighted),
            other => Err(Error::validation(format!(
                "unknown weighting {other:?} (expected unit, size or score)"
            ))),
        }
    }
}

/// How a search step feeds its evaluations into the accumulators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AccumulationMode {
    /// Every evaluated subset updates every feature: the plus side of its
    /// members, the minus side of the rest.
    #[default]
    PerSubset,
    /// Step-level update transcribed from the SBG⁺ pseudocode, with unit
    /// weights and one count per feature per step.
    LiteralAlg2,
}

impl fmt::Display for AccumulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccumulationMode::PerSubset => "per_subset",
            AccumulationMode::LiteralAlg2 => "literal_alg2",
        })
    }
}

impl FromStr for AccumulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_subset" | "per-subset" => Ok(AccumulationMode::PerSubset),
            "literal_alg2" | "literal-alg2" | "literal" => Ok(AccumulationMode::LiteralAlg2),
            other => Err(Error::validation(format!(
                "unknown accumulation mode {other:?} (expected per_subset or literal_alg2)"
            ))),
        }
    }
}

fn check_score(score: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&score) {
        return Err(Error::validation(format!("subset score {score} outside [0, 1]")));
    }
    Ok(())
}

pub fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::validation(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    Ok(())
}

/// Per-feature weighted sums of the evaluations seen so far, split by
/// whether the evaluated subset contained the feature.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatorTable {
    plus_sum: Vec<f64>,
    plus_weight: Vec<f64>,
    plus_count: Vec<u64>,
    minus_sum: Vec<f64>,
    minus_weight: Vec<f64>,
    minus_count: Vec<u64>,
}

impl AccumulatorTable {
    pub fn new(width: usize) -> Self {
        AccumulatorTable {
            plus_sum: vec![0.0; width],
            plus_weight: vec![0.0; width],
            plus_count: vec![0; width],
            minus_sum: vec![0.0; width],
            minus_weight: vec![0.0; width],
            minus_count: vec![0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.plus_sum.len()
    }

    pub fn plus_sum(&self, x: usize) -> f64 {
        self.plus_sum[x]
    }

    pub fn plus_weight(&self, x: usize) -> f64 {
        self.plus_weight[x]
    }

    pub fn plus_count(&self, x: usize) -> u64 {
        self.plus_count[x]
    }

    pub fn minus_sum(&self, x: usize) -> f64 {
        self.minus_sum[x]
    }

    pub fn minus_weight(&self, x: usize) -> f64 {
        self.minus_weight[x]
    }

    pub fn minus_count(&self, x: usize) -> u64 {
        self.minus_count[x]
    }

    /// Weighted mean evaluation of seen subsets containing `x`; `None`
    /// while no weight has been accumulated.
    pub fn plus_average(&self, x: usize) -> Option<f64> {
        (self.plus_weight[x] > 0.0).then(|| self.plus_sum[x] / self.plus_weight[x])
    }

    pub fn minus_average(&self, x: usize) -> Option<f64> {
        (self.minus_weight[x] > 0.0).then(|| self.minus_sum[x] / self.minus_weight[x])
    }

    fn add_plus(&mut self, x: usize, value: f64, weight: f64) {
        self.plus_sum[x] += value * weight;
        self.plus_weight[x] += weight;
        self.plus_count[x] += 1;
    }

    fn add_minus(&mut self, x: usize, value: f64, weight: f64) {
        self.minus_sum[x] += value * weight;
        self.minus_weight[x] += weight;
        self.minus_count[x] += 1;
    }

    /// Records one evaluated subset against every feature.
    pub fn accumulate(&mut self, mask: &FeatureMask, score: f64, weighting: WeightingFn) -> Result<()> {
        mask.check_width(self.width())?;
        check_score(score)?;
        let w = weighting.weight(mask, score);
        for x in 0..self.width() {
            if mask.contains(x) {
                self.add_plus(x, score, w);
            } else {
                self.add_minus(x, score, w);
            }
        }
        Ok(())
    }

    /// SBG⁺ pseudocode update after a backward step from `current`.
    ///
    /// `removals` holds `(y, J(current \ {y}))` for every `y` in `current`.
    /// A member `x` gets the sum of the other removals' evaluations on its
    /// plus side; a non-member gets `J(current)` on its minus side. Both
    /// sides count one observation per step.
    pub fn literal_backward_step(
        &mut self,
        current: &FeatureMask,
        removals: &[(usize, f64)],
        current_score: Option<f64>,
    ) -> Result<()> {
        current.check_width(self.width())?;
        for &(_, s) in removals {
            check_score(s)?;
        }
        let total: f64 = removals.iter().map(|&(_, s)| s).sum();
        for x in 0..self.width() {
            if current.contains(x) {
                let own = removals
                    .iter()
                    .find(|&&(y, _)| y == x)
                    .map(|&(_, s)| s)
                    .ok_or_else(|| Error::validation(format!("missing removal evaluation for feature {x}")))?;
                self.add_plus(x, total - own, 1.0);
            } else {
                let js = current_score.ok_or_else(|| {
                    Error::validation("literal update needs J(current) once features are absent")
                })?;
                check_score(js)?;
                self.add_minus(x, js, 1.0);
            }
        }
        Ok(())
    }

    /// Forward mirror of [`literal_backward_step`](Self::literal_backward_step):
    /// `additions` holds `(y, J(current ∪ {y}))` for every `y` outside
    /// `current`; a non-member collects the other additions on its minus
    /// side, a member collects `J(current)` on its plus side.
    pub fn literal_forward_step(
        &mut self,
        current: &FeatureMask,
        additions: &[(usize, f64)],
        current_score: Option<f64>,
    ) -> Result<()> {
        current.check_width(self.width())?;
        for &(_, s) in additions {
            check_score(s)?;
        }
        let total: f64 = additions.iter().map(|&(_, s)| s).sum();
        for x in 0..self.width() {
            if current.contains(x) {
                let js = current_score.ok_or_else(|| {
                    Error::validation("literal update needs J(current) once features are present")
                })?;
                check_score(js)?;
                self.add_plus(x, js, 1.0);
            } else {
                let own = additions
                    .iter()
                    .find(|&&(y, _)| y == x)
                    .map(|&(_, s)| s)
                    .ok_or_else(|| Error::validation(format!("missing addition evaluation for feature {x}")))?;
                self.add_minus(x, total - own, 1.0);
            }
        }
        Ok(())
    }
}

fn mix(lambda: f64, favour: f64, against: f64, j_hat: f64) -> f64 {
    lambda / 2.0 * (favour - against + 1.0) + (1.0 - lambda) * j_hat
}

/// `(λ/2)(avg⁺ − avg⁻ + 1) + (1 − λ)·ĵ` for feature `x`.
///
/// `j_hat` is the evaluation of the move under consideration. A side with
/// no accumulated weight takes `j_hat` as its average.
pub fn estimated_relevance(table: &AccumulatorTable, x: usize, lambda: f64, j_hat: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let plus = table.plus_average(x).unwrap_or(j_hat);
    let minus = table.minus_average(x).unwrap_or(j_hat);
    Ok(mix(lambda, plus, minus, j_hat))
}

/// Step criterion for removing `x`: the same mixture with the evidence
/// read for the absence of `x`, `(λ/2)(avg⁻ − avg⁺ + 1) + (1 − λ)·ĵ`.
pub fn removal_merit(table: &AccumulatorTable, x: usize, lambda: f64, j_hat: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let plus = table.plus_average(x).unwrap_or(j_hat);
    let minus = table.minus_average(x).unwrap_or(j_hat);
    Ok(mix(lambda, minus, plus, j_hat))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureRelevance {
    /// Mean evaluation over subsets containing the feature.
    pub plus: f64,
    /// Mean evaluation over subsets lacking it.
    pub minus: f64,
    /// `plus - minus`.
    pub relevance: f64,
    /// Mean gain `J(X ∪ {x}) - J(X)` over subsets `X` lacking the feature.
    pub relevance_compact: f64,
    /// Weighted mean gain, weights `w_x(X)`.
    pub relevance_weighted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactOracleResult {
    pub weighting: WeightingFn,
    pub features: Vec<FeatureRelevance>,
}

/// Exhaustive relevance of every feature from a full table of subset
/// scores, where `scores[bits]` is `J` of the subset with bit `i` ↦ feature `i`.
pub fn exact_relevance_from_table(scores: &[f64], n: usize, weighting: WeightingFn) -> Result<ExactOracleResult> {
    if n == 0 || n >= 64 || scores.len() != 1usize << n {
        return Err(Error::validation(format!(
            "score table of length {} does not cover 2^{n} subsets",
            scores.len()
        )));
    }
    let half = (1u64 << (n - 1)) as f64;
    let features = (0..n)
        .into_par_iter()
        .map(|x| {
            let bit = 1usize << x;
            let (mut plus, mut minus, mut gain) = (0.0, 0.0, 0.0);
            let (mut weighted_gain, mut total_weight) = (0.0, 0.0);
            for without in (0..scores.len()).filter(|m| m & bit == 0) {
                let with = without | bit;
                plus += scores[with];
                minus += scores[without];
                let delta = scores[with] - scores[without];
                gain += delta;
                let w = weighting.weight(&FeatureMask::from_bits(n, without as u64), scores[without]);
                weighted_gain += delta * w;
                total_weight += w;
            }
            FeatureRelevance {
                plus: plus / half,
                minus: minus / half,
                relevance: plus / half - minus / half,
                relevance_compact: gain / half,
                relevance_weighted: if total_weight > 0.0 {
                    weighted_gain / total_weight
                } else {
                    0.0
                },
            }
        })
        .collect();
    Ok(ExactOracleResult { weighting, features })
}

/// Enumerates all `2^n` subsets through `score_fn` and computes the exact
/// relevance of every feature. Refuses `n > guard`.
pub fn exact_relevance<F>(score_fn: F, n: usize, weighting: WeightingFn, guard: usize) -> Result<ExactOracleResult>
where
    F: Fn(&FeatureMask) -> Result<f64> + Sync,
{
    if n > guard || n >= 64 {
        return Err(Error::EnumerationGuard { n, guard });
    }
    if n == 0 {
        return Err(Error::validation("need at least one feature"));
    }
    let scores = (0..1u64 << n)
        .into_par_iter()
        .map(|bits| score_fn(&FeatureMask::from_bits(n, bits)))
        .collect::<Result<Vec<f64>>>()?;
    exact_relevance_from_table(&scores, n, weighting)
}

/// Reads a truth table of `bitstring,score` lines covering every subset of
/// one feature count. Blank lines and `#` comments are skipped.
pub fn read_truth_table<R: BufRead>(reader: R, guard: usize) -> Result<(usize, Vec<f64>)> {
    let mut width = None;
    let mut scores: Vec<Option<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<truth table>", e))?;
        let row = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            row,
            column: None,
            message,
        };
        let (bits, score) = line
            .split_once(',')
            .ok_or_else(|| parse_err(format!("expected `bitstring,score`, got {line:?}")))?;
        let mask = FeatureMask::parse_bitstring(bits).map_err(|e| parse_err(e.to_string()))?;
        let n = *width.get_or_insert(mask.width());
        if mask.width() != n {
            return Err(parse_err(format!("bitstring {bits:?} has width {}, expected {n}", mask.width())));
        }
        if n == 0 || n > guard || n >= 64 {
            return Err(Error::EnumerationGuard { n, guard });
        }
        if scores.is_empty() {
            scores = vec![None; 1 << n];
        }
        let score: f64 = score
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(format!("invalid score {score:?}")))?;
        let slot = &mut scores[mask.to_bits().expect("width checked") as usize];
        if slot.is_some() {
            return Err(parse_err(format!("duplicate subset {bits}")));
        }
        *slot = Some(score);
    }
    let n = width.ok_or_else(|| Error::validation("truth table is empty"))?;
    let scores = scores
        .into_iter()
        .enumerate()
        .map(|(bits, s)| {
            s.ok_or_else(|| {
                Error::validation(format!(
                    "truth table is missing subset {}",
                    FeatureMask::from_bits(n, bits as u64)
                ))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((n, scores))
}
