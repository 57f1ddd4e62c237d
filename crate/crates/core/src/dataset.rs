//! Sample matrices, CSV ingestion, the synthetic generator and stratified
//! 5x2 split plans.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Number of repetitions in a 5x2 cross-validation plan.
pub const REPETITIONS: usize = 5;

/// Records which original sample rows were read through [`Dataset::row`].
///
/// Attached to a dataset (and inherited by every row or column subset of
/// it) to audit which samples a computation actually touched.
#[derive(Debug)]
pub struct RowAudit {
    touched: Vec<AtomicBool>,
}

impl RowAudit {
    pub fn new(n_rows: usize) -> Self {
        RowAudit {
            touched: (0..n_rows).map(|_| AtomicBool::new(false)).collect(),
        }
    }

    fn record(&self, origin: usize) {
        if let Some(flag) = self.touched.get(origin) {
            flag.store(true, Ordering::Relaxed);
        }
    }

    /// Original row indices read so far, ascending.
    pub fn touched(&self) -> Vec<usize> {
        self.touched
            .iter()
            .enumerate()
            .filter(|(_, f)| f.load(Ordering::Relaxed))
            .map(|(i, _)| i)
            .collect()
    }
}

/// A samples × features matrix with one class label per sample.
///
/// Labels are stored as indices into a lexicographically sorted class
/// vocabulary; row and column subsets keep the parent's vocabulary so class
/// indices stay comparable across train and test halves.
#[derive(Clone)]
pub struct Dataset {
    values: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    classes: Vec<String>,
    feature_names: Vec<String>,
    origin: Vec<usize>,
    audit: Option<Arc<RowAudit>>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<String>, feature_names: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::validation(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let n_features = feature_names.len();
        let mut values = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::validation(format!(
                    "row {i} has {} values, expected {n_features}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::validation(format!("non-finite value at row {i}, column {j}")));
            }
            values.extend_from_slice(row);
        }
        let classes: Vec<String> = labels.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let labels = labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label drawn from vocabulary"))
            .collect();
        let ds = Dataset {
            values,
            n_features,
            labels,
            classes,
            feature_names,
            origin: (0..rows.len()).collect(),
            audit: None,
        };
        ds.check_classes()?;
        Ok(ds)
    }

    fn check_classes(&self) -> Result<()> {
        if self.n_features == 0 {
            return Err(Error::validation("dataset has no feature columns"));
        }
        if self.classes.len() < 2 {
            return Err(Error::validation(format!(
                "need at least 2 distinct class labels, found {}",
                self.classes.len()
            )));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Class index of every sample.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Sorted class vocabulary.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn label_name(&self, i: usize) -> &str {
        &self.classes[self.labels[i]]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Index of each row in the dataset it was originally loaded or generated as.
    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Feature values of sample `i`. Reads are recorded by an attached audit.
    pub fn row(&self, i: usize) -> &[f64] {
        if let Some(audit) = &self.audit {
            audit.record(self.origin[i]);
        }
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn with_audit(mut self, audit: Arc<RowAudit>) -> Self {
        self.audit = Some(audit);
        self
    }

    pub fn without_audit(mut self) -> Self {
        self.audit = None;
        self
    }

    /// Samples at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            values.extend_from_slice(&self.values[i * self.n_features..(i + 1) * self.n_features]);
        }
        Dataset {
            values,
            n_features: self.n_features,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            feature_names: self.feature_names.clone(),
            origin: indices.iter().map(|&i| self.origin[i]).collect(),
            audit: self.audit.clone(),
        }
    }

    /// Feature columns at `columns`, in that order.
    pub fn select_columns(&self, columns: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(self.n_samples() * columns.len());
        for i in 0..self.n_samples() {
            let row = &self.values[i * self.n_features..(i + 1) * self.n_features];
            values.extend(columns.iter().map(|&j| row[j]));
        }
        Dataset {
            values,
            n_features: columns.len(),
            labels: self.labels.clone(),
            classes: self.classes.clone(),
            feature_names: columns.iter().map(|&j| self.feature_names[j].clone()).collect(),
            origin: self.origin.clone(),
            audit: self.audit.clone(),
        }
    }
}

impl PartialEq for Dataset {
    /// Content equality: values, label names and feature names.
    fn eq(&self, other: &Self) -> bool {
        self.n_features == other.n_features
            && self.values == other.values
            && self.feature_names == other.feature_names
            && self.labels.len() == other.labels.len()
            && (0..self.labels.len()).all(|i| self.label_name(i) == other.label_name(i))
    }
}

impl fmt::Debug for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dataset")
            .field("n_samples", &self.n_samples())
            .field("n_features", &self.n_features)
            .field("classes", &self.classes)
            .finish()
    }
}

/// Which CSV column holds the class labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "last" => LabelColumn::Last,
            _ => match s.parse::<usize>() {
                Ok(i) => LabelColumn::Index(i),
                Err(_) => LabelColumn::Name(s.to_string()),
            },
        })
    }
}

fn parse_finite(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label)
}

/// Parses a comma-separated dataset.
///
/// The first line is a header iff one of its feature cells is not a finite
/// number. Without a header, features are named `f0..f{n-1}`.
pub fn read_csv<R: Read>(reader: R, label: &LabelColumn) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(records.len() + 1);
        records.push((line, rec));
    }
    let Some((_, first)) = records.first() else {
        return Err(Error::validation("empty CSV input"));
    };
    let width = first.len();
    if width < 2 {
        return Err(Error::Parse {
            row: 1,
            column: None,
            message: "need at least one feature column and a label column".into(),
        });
    }

    let label_idx = match label {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) if *i < width => *i,
        LabelColumn::Index(i) => {
            return Err(Error::validation(format!("label column {i} out of range ({width} columns)")))
        }
        LabelColumn::Name(name) => first.iter().position(|c| c.trim() == name).ok_or_else(|| {
            Error::validation(format!("label column {name:?} not found in header"))
        })?,
    };
    let has_header = matches!(label, LabelColumn::Name(_))
        || first
            .iter()
            .enumerate()
            .any(|(j, c)| j != label_idx && parse_finite(c).is_none());

    let feature_cols: Vec<usize> = (0..width).filter(|&j| j != label_idx).collect();
    let feature_names = if has_header {
        feature_cols.iter().map(|&j| first[j].trim().to_string()).collect()
    } else {
        (0..feature_cols.len()).map(|j| format!("f{j}")).collect()
    };

    let body = if has_header { &records[1..] } else { &records[..] };
    let mut rows = Vec::with_capacity(body.len());
    let mut labels = Vec::with_capacity(body.len());
    for (line, rec) in body {
        if rec.len() != width {
            return Err(Error::Parse {
                row: *line,
                column: None,
                message: format!("expected {width} cells, found {}", rec.len()),
            });
        }
        let mut row = Vec::with_capacity(feature_cols.len());
        for &j in &feature_cols {
            let v = parse_finite(&rec[j]).ok_or_else(|| Error::Parse {
                row: *line,
                column: Some(j + 1),
                message: format!("not a finite number: {:?}", &rec[j]),
            })?;
            row.push(v);
        }
        rows.push(row);
        labels.push(rec[label_idx].trim().to_string());
    }
    Dataset::new(rows, labels, feature_names)
}

/// Writes features followed by a `class` column. Values use the shortest
/// representation that parses back to the same `f64`.
pub fn write_csv<W: Write>(dataset: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut label_name = String::from("class");
    while dataset.feature_names.contains(&label_name) {
        label_name.push('_');
    }
    let mut header: Vec<&str> = dataset.feature_names.iter().map(String::as_str).collect();
    header.push(&label_name);
    wtr.write_record(&header)?;
    for i in 0..dataset.n_samples() {
        let row = &dataset.values[i * dataset.n_features..(i + 1) * dataset.n_features];
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(dataset.label_name(i).to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

pub fn save_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(dataset, std::io::BufWriter::new(file))
}

/// Two-class Gaussian fixture with planted informative features.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub n_samples: usize,
    pub n_informative: usize,
    pub n_noise: usize,
    pub class_separation: f64,
    pub seed: u64,
}

/// Generates the synthetic dataset described by `spec`.
///
/// Samples alternate between classes `c0` and `c1`. Every value is drawn
/// from a unit-variance normal; informative columns (`0..n_informative`)
/// have their mean shifted by `class_separation` for class `c1`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    let n_features = spec.n_informative + spec.n_noise;
    if n_features == 0 {
        return Err(Error::validation("synthetic spec has zero features"));
    }
    if spec.n_samples < 4 {
        return Err(Error::validation("synthetic spec needs at least 4 samples (2 per class)"));
    }
    if !(spec.class_separation.is_finite() && spec.class_separation >= 0.0) {
        return Err(Error::validation("class_separation must be a finite non-negative number"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(spec.n_samples);
    let mut labels = Vec::with_capacity(spec.n_samples);
    for i in 0..spec.n_samples {
        let class = i % 2;
        let row = (0..n_features)
            .map(|j| {
                let z: f64 = StandardNormal.sample(&mut rng);
                if j < spec.n_informative && class == 1 {
                    z + spec.class_separation
                } else {
                    z
                }
            })
            .collect();
        rows.push(row);
        labels.push(format!("c{class}"));
    }
    let names = (0..n_features).map(|j| format!("f{j}")).collect();
    Dataset::new(rows, labels, names)
}

/// Five stratified two-fold partitions of the sample indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub repetitions: Vec<(Vec<usize>, Vec<usize>)>,
    pub seed: u64,
}

impl SplitPlan {
    /// The ten `(train, test)` orientations: for each repetition, fold A
    /// trains and fold B tests, then the reverse.
    pub fn fold_pairs(&self) -> impl Iterator<Item = (&[usize], &[usize])> {
        self.repetitions.iter().flat_map(|(a, b)| {
            [(a.as_slice(), b.as_slice()), (b.as_slice(), a.as_slice())]
        })
    }
}

/// Builds a stratified 5x2 plan.
///
/// For each repetition and each class, that class's indices are shuffled
/// and dealt alternately to fold A and fold B; the fold receiving an odd
/// class's extra sample alternates from one odd class to the next.
pub fn make_5x2_plan(dataset: &Dataset, seed: u64) -> Result<SplitPlan> {
    let counts = dataset.class_counts();
    if let Some(k) = counts.iter().position(|&c| c < 2) {
        return Err(Error::validation(format!(
            "class {:?} has {} sample(s); stratified 2-fold needs at least 2",
            dataset.classes[k], counts[k]
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); counts.len()];
    for (i, &l) in dataset.labels.iter().enumerate() {
        by_class[l].push(i);
    }

    let mut repetitions = Vec::with_capacity(REPETITIONS);
    for rep in 0..REPETITIONS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(rep as u64 + 1);
        let (mut fold_a, mut fold_b) = (Vec::new(), Vec::new());
        let mut offset = rep % 2;
        for members in &by_class {
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            for (pos, &i) in shuffled.iter().enumerate() {
                if (pos + offset) % 2 == 0 {
                    fold_a.push(i);
                } else {
                    fold_b.push(i);
                }
            }
            if shuffled.len() % 2 == 1 {
                offset ^= 1;
            }
        }
        fold_a.sort_unstable();
        fold_b.sort_unstable();
        repetitions.push((fold_a, fold_b));
    }
    Ok(SplitPlan { repetitions, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labelled(labels: &[&str]) -> Dataset {
        let rows = (0..labels.len()).map(|i| vec![i as f64]).collect();
        Dataset::new(rows, labels.iter().map(|s| s.to_string()).collect(), vec!["x".into()]).unwrap()
    }

    #[test]
    fn loads_headed_csv() {
        let ds = read_csv("g1,g2,class\n1,2,A\n3,4,A\n5,6,B\n".as_bytes(), &LabelColumn::Last).unwrap();
        assert_eq!((ds.n_samples(), ds.n_features()), (3, 2));
        assert_eq!(ds.feature_names(), ["g1", "g2"]);
        assert_eq!(ds.row(2), [5.0, 6.0]);
        let labels: Vec<&str> = (0..3).map(|i| ds.label_name(i)).collect();
        assert_eq!(labels, ["A", "A", "B"]);
        // a singleton class loads, but cannot be split
        assert!(make_5x2_plan(&ds, 0).is_err());
    }

    #[test]
    fn headerless_csv_gets_generated_names() {
        let ds = read_csv("1,2,A\n3,4,A\n5,6,B\n7,8,B\n".as_bytes(), &LabelColumn::Last).unwrap();
        assert_eq!(ds.n_samples(), 4);
        assert_eq!(ds.feature_names(), ["f0", "f1"]);
    }

    #[test]
    fn label_column_by_name_or_index() {
        let text = "class,g1\nA,1\nA,2\nB,3\nB,4\n";
        let by_name = read_csv(text.as_bytes(), &"class".parse().unwrap()).unwrap();
        let by_index = read_csv(text.as_bytes(), &LabelColumn::Index(0)).unwrap();
        assert_eq!(by_name, by_index);
        assert_eq!(by_name.feature_names(), ["g1"]);
    }

    #[test]
    fn single_class_is_rejected() {
        let err = read_csv("g1,class\n1,A\n2,A\n3,A\n".as_bytes(), &LabelColumn::Last).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn short_row_names_its_line() {
        let err = read_csv("g1,g2,class\n1,2,A\n3,B\n".as_bytes(), &LabelColumn::Last).unwrap_err();
        match err {
            Error::Parse { row, column: None, .. } => assert_eq!(row, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let err = read_csv("g1,g2,class\n1,2,A\n3,x,B\n".as_bytes(), &LabelColumn::Last).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => assert_eq!((row, column), (3, Some(2))),
            other => panic!("unexpected {other}"),
        }
        let err = read_csv("g1,class\n1,A\nNaN,B\n".as_bytes(), &LabelColumn::Last).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }));
    }

    #[test]
    fn synthetic_shape_and_balance() {
        let spec = SyntheticSpec {
            n_samples: 100,
            n_informative: 3,
            n_noise: 17,
            class_separation: 2.0,
            seed: 42,
        };
        let ds = generate_synthetic(&spec).unwrap();
        assert_eq!((ds.n_samples(), ds.n_features()), (100, 20));
        assert_eq!(ds.class_counts(), vec![50, 50]);
        assert_eq!(generate_synthetic(&spec).unwrap().values, ds.values);

        let odd = generate_synthetic(&SyntheticSpec { n_samples: 7, ..spec.clone() }).unwrap();
        assert_eq!(odd.class_counts(), vec![4, 3]);
    }

    #[test]
    fn synthetic_rejects_zero_features() {
        let spec = SyntheticSpec {
            n_samples: 10,
            n_informative: 0,
            n_noise: 0,
            class_separation: 1.0,
            seed: 0,
        };
        assert!(matches!(generate_synthetic(&spec), Err(Error::Validation(_))));
    }

    #[test]
    fn synthetic_informative_columns_carry_the_shift() {
        let spec = SyntheticSpec {
            n_samples: 2000,
            n_informative: 1,
            n_noise: 1,
            class_separation: 2.0,
            seed: 3,
        };
        let ds = generate_synthetic(&spec).unwrap();
        let gap = |j: usize| {
            let mut sums = [0.0; 2];
            for i in 0..ds.n_samples() {
                sums[ds.labels()[i]] += ds.row(i)[j];
            }
            (sums[1] - sums[0]) / 1000.0
        };
        assert!((gap(0) - 2.0).abs() < 0.2);
        assert!(gap(1).abs() < 0.2);
    }

    #[test]
    fn balanced_pairs_split_evenly() {
        let ds = labelled(&["A", "A", "B", "B"]);
        for seed in 0..20 {
            let plan = make_5x2_plan(&ds, seed).unwrap();
            for (a, b) in &plan.repetitions {
                for fold in [a, b] {
                    let mut c = [0; 2];
                    fold.iter().for_each(|&i| c[ds.labels()[i]] += 1);
                    assert_eq!(c, [1, 1]);
                }
            }
        }
    }

    #[test]
    fn odd_class_counts_split_within_one() {
        let ds = labelled(&["A", "A", "A", "B", "B"]);
        for seed in 0..20 {
            let plan = make_5x2_plan(&ds, seed).unwrap();
            for (a, b) in &plan.repetitions {
                let count = |fold: &Vec<usize>| {
                    let mut c = [0; 2];
                    fold.iter().for_each(|&i| c[ds.labels()[i]] += 1);
                    c
                };
                let mut got = [count(a), count(b)];
                got.sort();
                assert_eq!(got, [[1, 1], [2, 1]]);
            }
        }
    }

    #[test]
    fn plan_is_deterministic_and_pairs_cover_ten_orientations() {
        let ds = labelled(&["A", "B", "A", "B", "A", "B", "C", "C"]);
        let p1 = make_5x2_plan(&ds, 9).unwrap();
        assert_eq!(p1, make_5x2_plan(&ds, 9).unwrap());
        assert_eq!(p1.fold_pairs().count(), 10);
    }

    #[test]
    fn plan_rejects_singleton_class() {
        let ds = labelled(&["A", "A", "B"]);
        assert!(make_5x2_plan(&ds, 0).is_err());
    }

    #[test]
    fn audit_follows_subsets() {
        let ds = labelled(&["A", "A", "B", "B", "A", "B"]);
        let audit = Arc::new(RowAudit::new(6));
        let sub = ds.with_audit(audit.clone()).select_rows(&[4, 1]).select_columns(&[0]);
        let _ = sub.row(0);
        assert_eq!(audit.touched(), vec![4]);
    }

    proptest! {
        #[test]
        fn stratification_invariant(
            counts in proptest::collection::vec(2usize..9, 2..5),
            seed in any::<u64>(),
        ) {
            let labels: Vec<String> = counts
                .iter()
                .enumerate()
                .flat_map(|(k, &c)| std::iter::repeat_n(format!("k{k}"), c))
                .collect();
            let rows = (0..labels.len()).map(|i| vec![i as f64]).collect();
            let ds = Dataset::new(rows, labels, vec!["x".into()]).unwrap();
            let plan = make_5x2_plan(&ds, seed).unwrap();
            for (a, b) in &plan.repetitions {
                let mut all: Vec<usize> = a.iter().chain(b).copied().collect();
                all.sort();
                prop_assert_eq!(all, (0..ds.n_samples()).collect::<Vec<_>>());
                for k in 0..counts.len() {
                    let ca = a.iter().filter(|&&i| ds.labels()[i] == k).count();
                    let cb = b.iter().filter(|&&i| ds.labels()[i] == k).count();
                    prop_assert!(ca.abs_diff(cb) <= 1);
                }
            }
        }

        #[test]
        fn csv_round_trip(
            values in proptest::collection::vec(-1e6f64..1e6, 12),
            tiny in -1e-300f64..1e-300,
        ) {
            let mut rows: Vec<Vec<f64>> = values.chunks(3).map(|c| c.to_vec()).collect();
            rows[0][0] = tiny;
            let labels = ["a", "b", "a", "b"].iter().map(|s| s.to_string()).collect();
            let names = vec!["g1".into(), "g two".into(), "g,3".into()];
            let ds = Dataset::new(rows, labels, names).unwrap();
            let mut buf = Vec::new();
            write_csv(&ds, &mut buf).unwrap();
            let back = read_csv(buf.as_slice(), &LabelColumn::Last).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
