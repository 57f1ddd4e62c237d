//! Paired outer-5x2cv comparison of a plain search and its accumulated
//! counterpart.
//!
//! Each of the ten outer orientations trains on one half of the samples
//! and tests on the other. Both algorithms search the training half with
//! one shared scorer, so they see the same rows, the same inner split plan
//! and the same memoized scores; each returned subset is then refit on the
//! whole training half and scored on the test half.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::dataset::{generate_synthetic, load_csv, make_5x2_plan, Dataset, LabelColumn, RowAudit, SyntheticSpec};
use crate::error::{Error, Result};
use crate::inducers::{InducerKind, SubsetScorer};
use crate::prefilter::{bss_wss_rank, select_top_k};
use crate::relevance::{check_lambda, AccumulationMode, WeightingFn};
use crate::search::{run_search, Algorithm, Direction, SearchConfig, DEFAULT_LAMBDA};

/// Samples each class needs so that every outer training half can still
/// carry a stratified inner 5x2 plan.
const MIN_CLASS_SIZE: usize = 4;

pub const REPORT_HEADER: [&str; 8] = [
    "fold",
    "repetition",
    "orientation",
    "algorithm",
    "test_error",
    "subset_size",
    "subset_members",
    "warning",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// CSV dataset; when absent the synthetic spec is used.
    pub data: Option<PathBuf>,
    pub label_column: LabelColumn,
    pub synthetic: SyntheticSpec,
    pub inducer: InducerKind,
    pub prefilter_k: Option<usize>,
    /// Rank genes once on all samples instead of per training half.
    pub global_prefilter: bool,
    pub lambda: f64,
    pub weighting: WeightingFn,
    pub accumulation_mode: AccumulationMode,
    pub direction: Direction,
    pub outer_seed: u64,
    pub inner_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: None,
            label_column: LabelColumn::Last,
            synthetic: SyntheticSpec {
                n_samples: 120,
                n_informative: 3,
                n_noise: 9,
                class_separation: 3.0,
                seed: 0,
            },
            inducer: InducerKind::OneNn,
            prefilter_k: None,
            global_prefilter: false,
            lambda: DEFAULT_LAMBDA,
            weighting: WeightingFn::Unit,
            accumulation_mode: AccumulationMode::PerSubset,
            direction: Direction::Backward,
            outer_seed: 0,
            inner_seed: 0,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::validation(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::validation(format!("invalid value {value:?} for {key} (expected true/false)"))),
    }
}

impl ExperimentConfig {
    /// Sets one field by its config-file key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "data" => self.data = Some(PathBuf::from(value)),
            "label_column" => self.label_column = value.parse().expect("infallible"),
            "synth_samples" => self.synthetic.n_samples = parse_value(key, value)?,
            "synth_informative" => self.synthetic.n_informative = parse_value(key, value)?,
            "synth_noise" => self.synthetic.n_noise = parse_value(key, value)?,
            "synth_separation" => self.synthetic.class_separation = parse_value(key, value)?,
            "synth_seed" => self.synthetic.seed = parse_value(key, value)?,
            "inducer" => {
                let gamma = match self.inducer {
                    InducerKind::Lda { gamma } => Some(gamma),
                    InducerKind::OneNn => None,
                };
                self.inducer = value.parse()?;
                if let (InducerKind::Lda { gamma: g }, Some(old)) = (&mut self.inducer, gamma) {
                    *g = old;
                }
            }
            "lda_gamma" => {
                let gamma = parse_value(key, value)?;
                if let InducerKind::Lda { gamma: g } = &mut self.inducer {
                    *g = gamma;
                } else {
                    return Err(Error::validation("lda_gamma given but the inducer is not lda"));
                }
            }
            "prefilter_k" => self.prefilter_k = Some(parse_value(key, value)?),
            "global_prefilter" => self.global_prefilter = parse_bool(key, value)?,
            "lambda" => self.lambda = parse_value(key, value)?,
            "weighting" => self.weighting = value.parse()?,
            "accumulation_mode" | "accumulation" => self.accumulation_mode = value.parse()?,
            "direction" => {
                self.direction = match value {
                    "backward" => Direction::Backward,
                    "forward" => Direction::Forward,
                    _ => return Err(Error::validation(format!("invalid direction {value:?} (backward or forward)"))),
                }
            }
            "outer_seed" => self.outer_seed = parse_value(key, value)?,
            "inner_seed" => self.inner_seed = parse_value(key, value)?,
            other => return Err(Error::validation(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` document. Blank lines and `#` comments
    /// are ignored; an `lda_gamma` is applied after `inducer`.
    pub fn apply_document(&mut self, text: &str) -> Result<()> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                row: i + 1,
                column: None,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        pairs.sort_by_key(|(k, _)| k == "lda_gamma");
        for (k, v) in pairs {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = ExperimentConfig::default();
        cfg.apply_document(&text)?;
        Ok(cfg)
    }

    pub fn algorithms(&self) -> (Algorithm, Algorithm) {
        Algorithm::pair(self.direction)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        self.inducer.validate()?;
        if self.prefilter_k == Some(0) {
            return Err(Error::validation("prefilter_k must be positive"));
        }
        if self.global_prefilter && self.prefilter_k.is_none() {
            return Err(Error::validation("global_prefilter requires prefilter_k"));
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.data {
            Some(path) => load_csv(path, &self.label_column),
            None => generate_synthetic(&self.synthetic),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// 1..=10
    pub fold: usize,
    /// 1..=5
    pub repetition: usize,
    /// 1: fold A trains, 2: fold B trains.
    pub orientation: usize,
    pub algorithm: Algorithm,
    pub test_error: f64,
    pub subset_size: usize,
    pub subset_members: Vec<String>,
    /// Set when the final refit failed and the fold was charged error 1.
    pub warning: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub mean_test_error: f64,
    pub mean_subset_size: f64,
}

/// Accumulated minus plain, per fold.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDifference {
    pub fold: usize,
    pub test_error: f64,
    pub subset_size: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<AlgorithmSummary>,
    pub differences: Vec<PairedDifference>,
}

impl ExperimentReport {
    fn assemble(rows: Vec<ReportRow>, (plain, plus): (Algorithm, Algorithm)) -> Self {
        let summary = |algorithm: Algorithm| {
            let mine: Vec<&ReportRow> = rows.iter().filter(|r| r.algorithm == algorithm).collect();
            let n = mine.len() as f64;
            AlgorithmSummary {
                algorithm,
                mean_test_error: mine.iter().map(|r| r.test_error).sum::<f64>() / n,
                mean_subset_size: mine.iter().map(|r| r.subset_size as f64).sum::<f64>() / n,
            }
        };
        let summaries = vec![summary(plain), summary(plus)];
        let differences = rows
            .iter()
            .filter(|r| r.algorithm == plain)
            .filter_map(|a| {
                let b = rows.iter().find(|r| r.fold == a.fold && r.algorithm == plus)?;
                Some(PairedDifference {
                    fold: a.fold,
                    test_error: b.test_error - a.test_error,
                    subset_size: b.subset_size as f64 - a.subset_size as f64,
                })
            })
            .collect();
        ExperimentReport {
            rows,
            summaries,
            differences,
        }
    }

    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.summaries.iter().find(|s| s.algorithm == algorithm)
    }

    pub fn rows_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.algorithm == algorithm)
    }
}

/// Original rows read during one outer fold, by phase.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldAudit {
    pub fold: usize,
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub prefilter_rows: Vec<usize>,
    pub search_rows: Vec<usize>,
    pub inner_seed: u64,
}

impl FoldAudit {
    /// Test rows read before the final refit.
    pub fn leaked_rows(&self) -> Vec<usize> {
        self.prefilter_rows
            .iter()
            .chain(&self.search_rows)
            .filter(|r| self.test_rows.binary_search(r).is_ok())
            .copied()
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let dataset = config.load_dataset()?;
    run_experiment_on(&dataset, config)
}

pub fn run_experiment_on(dataset: &Dataset, config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_folds(dataset, config).map(|(report, _)| report)
}

/// Like [`run_experiment_on`], also recording which rows each phase read.
pub fn audit_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<FoldAudit>)> {
    run_folds(dataset, config)
}

fn run_folds(dataset: &Dataset, config: &ExperimentConfig) -> Result<(ExperimentReport, Vec<FoldAudit>)> {
    config.validate()?;
    let n = dataset.n_features();
    if let Some(k) = config.prefilter_k {
        if k > n {
            return Err(Error::validation(format!("prefilter_k = {k} exceeds {n} features")));
        }
    }
    for (k, &c) in dataset.class_counts().iter().enumerate() {
        if c < MIN_CLASS_SIZE {
            return Err(Error::validation(format!(
                "class {:?} has {c} sample(s); the nested 5x2 design needs at least {MIN_CLASS_SIZE}",
                dataset.classes()[k]
            )));
        }
    }
    // the caller's dataset may carry its own audit; folds attach fresh ones
    let dataset = dataset.clone().without_audit();
    let plan = make_5x2_plan(&dataset, config.outer_seed)?;
    let folds: Vec<(usize, &[usize], &[usize])> = plan
        .fold_pairs()
        .enumerate()
        .map(|(f, (train, test))| (f, train, test))
        .collect();

    let outcomes = folds
        .par_iter()
        .map(|&(f, train, test)| run_fold(&dataset, config, f, train, test))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(20);
    let mut audits = Vec::with_capacity(10);
    for (fold_rows, audit) in outcomes {
        rows.extend(fold_rows);
        audits.push(audit);
    }
    Ok((ExperimentReport::assemble(rows, config.algorithms()), audits))
}

fn run_fold(
    dataset: &Dataset,
    config: &ExperimentConfig,
    f: usize,
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<(Vec<ReportRow>, FoldAudit)> {
    let total_rows = dataset.origin().iter().max().map_or(0, |m| m + 1);
    let train = dataset.select_rows(train_idx);
    let test = dataset.select_rows(test_idx);

    let prefilter_audit = Arc::new(RowAudit::new(total_rows));
    let (train, test, columns) = match config.prefilter_k {
        Some(k) => {
            let source = if config.global_prefilter { dataset } else { &train };
            let ranking = bss_wss_rank(&source.clone().with_audit(prefilter_audit.clone()))?;
            let (reduced, map) = select_top_k(&train, &ranking, k)?;
            let reduced_test = test.select_columns(&map);
            (reduced, reduced_test, map)
        }
        None => (train, test, (0..dataset.n_features()).collect()),
    };

    let search_audit = Arc::new(RowAudit::new(total_rows));
    let searched = train.clone().with_audit(search_audit.clone());
    let inner_seed = derive_seed(config.inner_seed, f as u64);
    let scorer = SubsetScorer::new(config.inducer, inner_seed).bind(&searched)?;

    let (plain, plus) = config.algorithms();
    let mut rows = Vec::with_capacity(2);
    for algorithm in [plain, plus] {
        let search_config = SearchConfig {
            algorithm,
            lambda: config.lambda,
            weighting: config.weighting,
            accumulation_mode: config.accumulation_mode,
        };
        let result = run_search(&scorer, &search_config)?;
        let mask = &result.best_mask;
        let (test_error, warning) = match config.inducer.fit_predict(&train, mask, &test) {
            Ok(pred) => {
                let wrong = pred.iter().zip(test.labels()).filter(|(p, y)| p != y).count();
                (wrong as f64 / test.n_samples() as f64, false)
            }
            Err(Error::Singular(msg)) => {
                log::warn!("fold {}: {algorithm} final refit failed: {msg}", f + 1);
                (1.0, true)
            }
            Err(e) => return Err(e),
        };
        rows.push(ReportRow {
            fold: f + 1,
            repetition: f / 2 + 1,
            orientation: f % 2 + 1,
            algorithm,
            test_error,
            subset_size: mask.len(),
            subset_members: mask.iter().map(|j| dataset.feature_names()[columns[j]].clone()).collect(),
            warning,
        });
    }

    let mut train_rows = train.origin().to_vec();
    train_rows.sort_unstable();
    let mut test_rows = test.origin().to_vec();
    test_rows.sort_unstable();
    let audit = FoldAudit {
        fold: f + 1,
        train_rows,
        test_rows,
        prefilter_rows: prefilter_audit.touched(),
        search_rows: search_audit.touched(),
        inner_seed,
    };
    Ok((rows, audit))
}

/// Writes the per-fold rows, a blank line, then the aggregate block.
pub fn write_report<W: Write>(report: &ExperimentReport, mut writer: W) -> Result<()> {
    {
        let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(&mut writer);
        wtr.write_record(REPORT_HEADER)?;
        for r in &report.rows {
            wtr.write_record([
                r.fold.to_string(),
                r.repetition.to_string(),
                r.orientation.to_string(),
                r.algorithm.to_string(),
                r.test_error.to_string(),
                r.subset_size.to_string(),
                r.subset_members.join(";"),
                if r.warning { "singular_refit".into() } else { String::new() },
            ])?;
        }
        wtr.flush().map_err(|e| Error::io("<report output>", e))?;
    }
    writeln!(writer).map_err(|e| Error::io("<report output>", e))?;
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(&mut writer);
    wtr.write_record(["aggregate", "algorithm", "mean_test_error", "mean_subset_size"])?;
    for s in &report.summaries {
        wtr.write_record([
            "mean".to_string(),
            s.algorithm.to_string(),
            s.mean_test_error.to_string(),
            s.mean_subset_size.to_string(),
        ])?;
    }
    for d in &report.differences {
        wtr.write_record([
            "paired_difference".to_string(),
            d.fold.to_string(),
            d.test_error.to_string(),
            d.subset_size.to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io("<report output>", e))?;
    Ok(())
}

pub fn save_report(report: &ExperimentReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_report(report, std::io::BufWriter::new(file))
}

/// Parses a report written by [`write_report`].
pub fn read_report<R: BufRead>(reader: R) -> Result<ExperimentReport> {
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut differences = Vec::new();
    let mut in_aggregates = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<report input>", e))?;
        let row = i + 1;
        let bad = |message: String| Error::Parse {
            row,
            column: None,
            message,
        };
        if i == 0 {
            continue;
        }
        if line.trim().is_empty() {
            in_aggregates = true;
            continue;
        }
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(line.as_bytes());
        let rec = rdr
            .records()
            .next()
            .ok_or_else(|| bad("empty record".into()))??;
        let num = |j: usize| -> Result<f64> {
            rec.get(j)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| bad(format!("bad number in column {}", j + 1)))
        };
        let int = |j: usize| -> Result<usize> {
            rec.get(j)
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| bad(format!("bad integer in column {}", j + 1)))
        };
        if !in_aggregates {
            if rec.len() != REPORT_HEADER.len() {
                return Err(bad(format!("expected {} cells", REPORT_HEADER.len())));
            }
            rows.push(ReportRow {
                fold: int(0)?,
                repetition: int(1)?,
                orientation: int(2)?,
                algorithm: rec[3].parse()?,
                test_error: num(4)?,
                subset_size: int(5)?,
                subset_members: rec[6].split(';').filter(|s| !s.is_empty()).map(String::from).collect(),
                warning: !rec[7].is_empty(),
            });
        } else {
            match &rec[0] {
                "aggregate" => {}
                "mean" => summaries.push(AlgorithmSummary {
                    algorithm: rec[1].parse()?,
                    mean_test_error: num(2)?,
                    mean_subset_size: num(3)?,
                }),
                "paired_difference" => differences.push(PairedDifference {
                    fold: int(1)?,
                    test_error: num(2)?,
                    subset_size: num(3)?,
                }),
                other => return Err(bad(format!("unknown aggregate row {other:?}"))),
            }
        }
    }
    Ok(ExperimentReport {
        rows,
        summaries,
        differences,
    })
}

/// Table-style summary: mean test error in percent with one decimal and
/// mean subset size, one line per algorithm.
pub fn format_summary(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<10} {:>16} {:>12}", "algorithm", "test error (%)", "subset size");
    for s in &report.summaries {
        let _ = writeln!(
            out,
            "{:<10} {:>16.1} {:>12.1}",
            s.algorithm.to_string(),
            100.0 * s.mean_test_error,
            s.mean_subset_size
        );
    }
    let warnings = report.rows.iter().filter(|r| r.warning).count();
    if warnings > 0 {
        let _ = writeln!(out, "warning: {warnings} fold(s) had a singular final refit (charged 100% error)");
    }
    out
}
