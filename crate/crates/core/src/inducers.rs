//! Built-in classifiers and the resampled subset scorer.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;

use crate::dataset::{make_5x2_plan, Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::mask::FeatureMask;
use crate::search::SubsetObjective;

pub const DEFAULT_LDA_GAMMA: f64 = 1e-6;

/// Relative pivot threshold below which the shrunk covariance is treated
/// as singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InducerKind {
    /// 1-nearest-neighbour, Euclidean distance.
    OneNn,
    /// Linear discriminant analysis with covariance shrinkage
    /// `S + gamma * mean(diag(S)) * I`.
    Lda { gamma: f64 },
}

impl InducerKind {
    pub fn lda() -> Self {
        InducerKind::Lda {
            gamma: DEFAULT_LDA_GAMMA,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            InducerKind::Lda { gamma } if !(gamma.is_finite() && *gamma >= 0.0) => Err(
                Error::validation(format!("LDA shrinkage must be a finite value >= 0, got {gamma}")),
            ),
            _ => Ok(()),
        }
    }

    /// Trains on `train` restricted to `mask` and predicts a class index for
    /// every row of `test`.
    pub fn fit_predict(&self, train: &Dataset, mask: &FeatureMask, test: &Dataset) -> Result<Vec<usize>> {
        mask.check_width(train.n_features())?;
        let queries: Vec<&[f64]> = (0..test.n_samples()).map(|i| test.row(i)).collect();
        match *self {
            InducerKind::OneNn => queries.iter().map(|q| predict_1nn(train, mask, q)).collect(),
            InducerKind::Lda { gamma } => fit_predict_lda(train, mask, &queries, gamma),
        }
    }
}

impl fmt::Display for InducerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InducerKind::OneNn => f.write_str("1nn"),
            InducerKind::Lda { .. } => f.write_str("lda"),
        }
    }
}

impl FromStr for InducerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1nn" => Ok(InducerKind::OneNn),
            "lda" => Ok(InducerKind::lda()),
            other => Err(Error::validation(format!("unknown inducer {other:?} (expected 1nn or lda)"))),
        }
    }
}

/// Class predicted when no feature is available: the most frequent class
/// in `train`, ties going to the lowest class index.
fn majority_class(train: &Dataset) -> Result<usize> {
    if train.n_samples() == 0 {
        return Err(Error::validation("empty training set"));
    }
    let counts = train.class_counts();
    let mut best = 0;
    for (k, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = k;
        }
    }
    Ok(best)
}

/// Label of the training sample nearest to `query` over the masked columns.
///
/// `query` is a full-width feature row. Distance ties go to the lowest
/// training index; an empty mask predicts the majority class.
pub fn predict_1nn(train: &Dataset, mask: &FeatureMask, query: &[f64]) -> Result<usize> {
    if train.n_samples() == 0 {
        return Err(Error::validation("empty training set"));
    }
    if mask.is_empty() {
        return majority_class(train);
    }
    let cols: Vec<usize> = mask.iter().collect();
    let mut best = (f64::INFINITY, 0);
    for i in 0..train.n_samples() {
        let row = train.row(i);
        let d: f64 = cols.iter().map(|&j| (row[j] - query[j]).powi(2)).sum();
        if d < best.0 {
            best = (d, i);
        }
    }
    Ok(train.labels()[best.1])
}

/// Lower-triangular Cholesky factor of a dense `p × p` matrix, or `None`
/// when a pivot falls below the relative tolerance.
fn cholesky(a: &[f64], p: usize) -> Option<Vec<f64>> {
    let scale = (0..p).map(|i| a[i * p + i]).fold(0.0_f64, f64::max);
    if scale <= 0.0 {
        return None;
    }
    let mut l = vec![0.0; p * p];
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= l[j * p + k] * l[j * p + k];
        }
        if d <= PIVOT_TOLERANCE * scale {
            return None;
        }
        let d = d.sqrt();
        l[j * p + j] = d;
        for i in j + 1..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= l[i * p + k] * l[j * p + k];
            }
            l[i * p + j] = s / d;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b`.
fn cholesky_solve(l: &[f64], p: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|k| l[i * p + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * p + i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| l[k * p + i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i * p + i];
    }
    x
}

/// Linear discriminant analysis over the masked columns.
///
/// Uses the pooled within-class covariance (divisor `N - K`), shrunk
/// towards `gamma * mean(diag(S)) * I`, and empirical class priors. Each
/// query goes to the class with the largest discriminant; ties go to the
/// lowest class index.
pub fn fit_predict_lda(train: &Dataset, mask: &FeatureMask, queries: &[&[f64]], gamma: f64) -> Result<Vec<usize>> {
    mask.check_width(train.n_features())?;
    let present: Vec<usize> = train
        .class_counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, _)| k)
        .collect();
    if present.len() < 2 {
        return Err(Error::validation("LDA needs at least 2 classes in the training set"));
    }
    if mask.is_empty() {
        let k = majority_class(train)?;
        return Ok(vec![k; queries.len()]);
    }

    let cols: Vec<usize> = mask.iter().collect();
    let p = cols.len();
    let n = train.n_samples();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let r = train.row(i);
            cols.iter().map(|&j| r[j]).collect()
        })
        .collect();

    let n_classes = train.n_classes();
    let mut means = vec![vec![0.0; p]; n_classes];
    let counts = train.class_counts();
    for (i, row) in rows.iter().enumerate() {
        let k = train.labels()[i];
        for (m, v) in means[k].iter_mut().zip(row) {
            *m += v;
        }
    }
    for &k in &present {
        means[k].iter_mut().for_each(|m| *m /= counts[k] as f64);
    }

    let mut cov = vec![0.0; p * p];
    for (i, row) in rows.iter().enumerate() {
        let mu = &means[train.labels()[i]];
        let centred: Vec<f64> = row.iter().zip(mu).map(|(x, m)| x - m).collect();
        for a in 0..p {
            for b in 0..=a {
                cov[a * p + b] += centred[a] * centred[b];
            }
        }
    }
    let dof = n.saturating_sub(present.len()).max(1) as f64;
    for a in 0..p {
        for b in 0..=a {
            let v = cov[a * p + b] / dof;
            cov[a * p + b] = v;
            cov[b * p + a] = v;
        }
    }
    let ridge = gamma * (0..p).map(|a| cov[a * p + a]).sum::<f64>() / p as f64;
    for a in 0..p {
        cov[a * p + a] += ridge;
    }
    let chol = cholesky(&cov, p).ok_or_else(|| {
        Error::Singular(format!("pooled covariance over {p} feature(s) is not positive definite"))
    })?;

    // discriminant_k(x) = xᵀ S⁻¹ μ_k − ½ μ_kᵀ S⁻¹ μ_k + ln π_k
    let discriminants: Vec<(usize, Vec<f64>, f64)> = present
        .iter()
        .map(|&k| {
            let w = cholesky_solve(&chol, p, &means[k]);
            let quad: f64 = w.iter().zip(&means[k]).map(|(a, b)| a * b).sum();
            let prior = counts[k] as f64 / n as f64;
            (k, w, -0.5 * quad + prior.ln())
        })
        .collect();

    Ok(queries
        .iter()
        .map(|q| {
            let mut best = (f64::NEG_INFINITY, present[0]);
            for (k, w, bias) in &discriminants {
                let score: f64 = cols.iter().zip(w).map(|(&j, wj)| q[j] * wj).sum::<f64>() + bias;
                if score > best.0 {
                    best = (score, *k);
                }
            }
            best.1
        })
        .collect())
}

/// Logical scorer invocations, memo hits included.
#[derive(Debug, Default)]
pub struct CallCounter(AtomicU64);

impl CallCounter {
    pub fn increment(&self) {
        self.0.fetch_add(1, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// Wrapper evaluation `J(X)`: mean accuracy of an inducer over a fixed
/// stratified 5x2 plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsetScorer {
    pub inducer: InducerKind,
    pub inner_plan_seed: u64,
}

impl SubsetScorer {
    pub fn new(inducer: InducerKind, inner_plan_seed: u64) -> Self {
        SubsetScorer {
            inducer,
            inner_plan_seed,
        }
    }

    /// Fixes the dataset and the inner split plan, returning a scorer with
    /// its own memo table and call counter.
    pub fn bind<'a>(&self, dataset: &'a Dataset) -> Result<BoundScorer<'a>> {
        self.inducer.validate()?;
        let plan = make_5x2_plan(dataset, self.inner_plan_seed)?;
        let folds = plan
            .fold_pairs()
            .map(|(train, test)| (dataset.select_rows(train), dataset.select_rows(test)))
            .collect();
        Ok(BoundScorer {
            inducer: self.inducer,
            dataset,
            plan,
            folds,
            memo: DashMap::new(),
            counter: CallCounter::default(),
        })
    }
}

pub struct BoundScorer<'a> {
    inducer: InducerKind,
    dataset: &'a Dataset,
    plan: SplitPlan,
    folds: Vec<(Dataset, Dataset)>,
    memo: DashMap<FeatureMask, f64>,
    counter: CallCounter,
}

impl BoundScorer<'_> {
    pub fn dataset(&self) -> &Dataset {
        self.dataset
    }

    pub fn plan(&self) -> &SplitPlan {
        &self.plan
    }

    pub fn calls(&self) -> u64 {
        self.counter.get()
    }

    /// Mean accuracy over the ten fold orientations. A fold whose LDA fit is
    /// singular contributes accuracy 0.
    pub fn score_subset(&self, mask: &FeatureMask) -> Result<f64> {
        mask.check_width(self.dataset.n_features())?;
        self.counter.increment();
        if let Some(v) = self.memo.get(mask) {
            return Ok(*v);
        }
        let mut total = 0.0;
        for (train, test) in &self.folds {
            let accuracy = match self.inducer.fit_predict(train, mask, test) {
                Ok(pred) => {
                    let hits = pred.iter().zip(test.labels()).filter(|(p, y)| p == y).count();
                    hits as f64 / test.n_samples() as f64
                }
                Err(Error::Singular(_)) => 0.0,
                Err(e) => return Err(e),
            };
            total += accuracy;
        }
        let score = total / self.folds.len() as f64;
        self.memo.insert(mask.clone(), score);
        Ok(score)
    }
}

impl SubsetObjective for BoundScorer<'_> {
    fn n_features(&self) -> usize {
        self.dataset.n_features()
    }

    fn score(&self, mask: &FeatureMask) -> Result<f64> {
        self.score_subset(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticSpec};
    use proptest::prelude::*;

    fn ds(rows: &[&[f64]], labels: &[&str]) -> Dataset {
        let p = rows[0].len();
        Dataset::new(
            rows.iter().map(|r| r.to_vec()).collect(),
            labels.iter().map(|s| s.to_string()).collect(),
            (0..p).map(|j| format!("f{j}")).collect(),
        )
        .unwrap()
    }

    fn full(d: &Dataset) -> FeatureMask {
        FeatureMask::full(d.n_features())
    }

    #[test]
    fn one_nn_picks_nearest() {
        let train = ds(&[&[0.0], &[1.0]], &["A", "B"]);
        assert_eq!(predict_1nn(&train, &full(&train), &[0.1]).unwrap(), 0);
    }

    #[test]
    fn one_nn_tie_goes_to_lowest_index() {
        let train = ds(&[&[0.0], &[2.0]], &["A", "B"]);
        assert_eq!(predict_1nn(&train, &full(&train), &[1.0]).unwrap(), 0);
        let train = ds(&[&[2.0], &[0.0]], &["B", "A"]);
        assert_eq!(train.classes()[predict_1nn(&train, &full(&train), &[1.0]).unwrap()], "B");
    }

    #[test]
    fn empty_mask_predicts_majority() {
        let train = ds(&[&[0.0], &[5.0], &[9.0]], &["A", "A", "B"]);
        let empty = FeatureMask::empty(1);
        assert_eq!(predict_1nn(&train, &empty, &[9.0]).unwrap(), 0);
        // tie on majority → first class in label order
        let train = ds(&[&[0.0], &[5.0], &[9.0], &[1.0]], &["B", "A", "B", "A"]);
        assert_eq!(train.classes()[predict_1nn(&train, &empty, &[9.0]).unwrap()], "A");
    }

    #[test]
    fn one_nn_recalls_its_training_set() {
        let d = generate_synthetic(&SyntheticSpec {
            n_samples: 40,
            n_informative: 2,
            n_noise: 3,
            class_separation: 1.0,
            seed: 5,
        })
        .unwrap();
        let pred = InducerKind::OneNn.fit_predict(&d, &full(&d), &d).unwrap();
        assert_eq!(pred, d.labels());
    }

    #[test]
    fn lda_one_dimensional_example() {
        let train = ds(&[&[-1.0], &[-1.1], &[1.0], &[1.2]], &["A", "A", "B", "B"]);
        let queries: Vec<&[f64]> = vec![&[-0.9], &[1.1]];
        let got = fit_predict_lda(&train, &full(&train), &queries, 0.0).unwrap();
        assert_eq!(got, vec![0, 1]);

        // hand-computed discriminants with pooled variance (0.005 + 0.02) / 2
        let var: f64 = 0.0125;
        let (ma, mb) = (-1.05, 1.1);
        let disc = |x: f64, m: f64| x * m / var - 0.5 * m * m / var + 0.5f64.ln();
        for (x, want) in [(-0.9, 0), (1.1, 1), (0.02, 0), (0.03, 1)] {
            let hand = if disc(x, ma) >= disc(x, mb) { 0 } else { 1 };
            assert_eq!(hand, want);
            let row = [x];
            let q: Vec<&[f64]> = vec![&row];
            assert_eq!(fit_predict_lda(&train, &full(&train), &q, 0.0).unwrap()[0], want, "x = {x}");
        }
    }

    #[test]
    fn lda_constant_duplicates_need_shrinkage() {
        let train = ds(
            &[&[-1.0, 3.0, 3.0], &[-1.2, 3.0, 3.0], &[1.0, 3.0, 3.0], &[1.3, 3.0, 3.0]],
            &["A", "A", "B", "B"],
        );
        let mask = full(&train);
        let queries: Vec<&[f64]> = vec![&[-0.8, 3.0, 3.0], &[0.9, 3.0, 3.0]];
        assert!(matches!(fit_predict_lda(&train, &mask, &queries, 0.0), Err(Error::Singular(_))));
        assert_eq!(fit_predict_lda(&train, &mask, &queries, 1e-6).unwrap(), vec![0, 1]);
    }

    #[test]
    fn lda_exact_duplicate_column_is_singular() {
        let train = ds(
            &[&[-1.0, -1.0], &[-1.2, -1.2], &[1.0, 1.0], &[1.3, 1.3], &[0.9, 0.9], &[-0.7, -0.7]],
            &["A", "A", "B", "B", "B", "A"],
        );
        let queries: Vec<&[f64]> = vec![&[-0.8, -0.8]];
        assert!(matches!(fit_predict_lda(&train, &full(&train), &queries, 0.0), Err(Error::Singular(_))));
        assert_eq!(fit_predict_lda(&train, &full(&train), &queries, 1e-6).unwrap(), vec![0]);
    }

    #[test]
    fn lda_two_dimensional_matches_direct_solve() {
        // S⁻¹ by the 2×2 adjugate, independent of the Cholesky path
        let train = ds(
            &[&[0.0, 1.0], &[1.0, 0.5], &[0.5, 0.0], &[2.0, 2.0], &[3.0, 2.5], &[2.5, 3.5]],
            &["A", "A", "A", "B", "B", "B"],
        );
        let gamma = 1e-6;
        let rows: Vec<[f64; 2]> = (0..6).map(|i| [train.row(i)[0], train.row(i)[1]]).collect();
        let mean = |r: &[[f64; 2]]| {
            let n = r.len() as f64;
            [r.iter().map(|x| x[0]).sum::<f64>() / n, r.iter().map(|x| x[1]).sum::<f64>() / n]
        };
        let (ma, mb) = (mean(&rows[..3]), mean(&rows[3..]));
        let mut s = [[0.0; 2]; 2];
        for (i, r) in rows.iter().enumerate() {
            let m = if i < 3 { ma } else { mb };
            for a in 0..2 {
                for b in 0..2 {
                    s[a][b] += (r[a] - m[a]) * (r[b] - m[b]) / 4.0;
                }
            }
        }
        let ridge = gamma * (s[0][0] + s[1][1]) / 2.0;
        s[0][0] += ridge;
        s[1][1] += ridge;
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let inv = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
        let disc = |x: [f64; 2], m: [f64; 2]| {
            let w = [inv[0][0] * m[0] + inv[0][1] * m[1], inv[1][0] * m[0] + inv[1][1] * m[1]];
            x[0] * w[0] + x[1] * w[1] - 0.5 * (m[0] * w[0] + m[1] * w[1])
        };
        for q in [[1.0, 1.0], [1.6, 1.4], [2.0, 0.0], [0.0, 3.0], [1.4, 1.6]] {
            let want = if disc(q, ma) >= disc(q, mb) { 0 } else { 1 };
            let got = fit_predict_lda(&train, &full(&train), &[&q[..]], gamma).unwrap()[0];
            assert_eq!(got, want, "query {q:?}");
        }
    }

    #[test]
    fn rejects_negative_gamma() {
        assert!(InducerKind::Lda { gamma: -1.0 }.validate().is_err());
        assert!("svm".parse::<InducerKind>().is_err());
        assert_eq!("LDA".parse::<InducerKind>().unwrap(), InducerKind::lda());
    }

    fn separated() -> Dataset {
        generate_synthetic(&SyntheticSpec {
            n_samples: 60,
            n_informative: 3,
            n_noise: 5,
            class_separation: 6.0,
            seed: 11,
        })
        .unwrap()
    }

    #[test]
    fn informative_mask_scores_high() {
        let d = separated();
        let scorer = SubsetScorer::new(InducerKind::OneNn, 0).bind(&d).unwrap();
        let informative = FeatureMask::from_indices(8, [0, 1, 2]).unwrap();
        let score = scorer.score_subset(&informative).unwrap();
        assert!(score >= 0.95, "score {score}");
        assert_eq!(score, reference_score(&d, &informative, 0));
    }

    /// Brute-force 1NN accuracy over the same plan, written without the
    /// scorer's fold datasets or memo.
    fn reference_score(d: &Dataset, mask: &FeatureMask, seed: u64) -> f64 {
        let plan = make_5x2_plan(d, seed).unwrap();
        let mut accs = Vec::new();
        for (train, test) in plan.fold_pairs() {
            let mut hits = 0;
            for &t in test {
                let mut best = (f64::INFINITY, usize::MAX);
                for &r in train {
                    let dist: f64 = mask.iter().map(|j| (d.row(r)[j] - d.row(t)[j]).powi(2)).sum();
                    if dist < best.0 {
                        best = (dist, r);
                    }
                }
                hits += usize::from(d.labels()[best.1] == d.labels()[t]);
            }
            accs.push(hits as f64 / test.len() as f64);
        }
        accs.iter().sum::<f64>() / accs.len() as f64
    }

    #[test]
    fn empty_mask_scores_one_half_on_balanced_data() {
        let d = separated();
        let scorer = SubsetScorer::new(InducerKind::OneNn, 3).bind(&d).unwrap();
        assert_eq!(scorer.score_subset(&FeatureMask::empty(8)).unwrap(), 0.5);
    }

    #[test]
    fn repeated_masks_are_memoized_but_counted() {
        let d = separated();
        let scorer = SubsetScorer::new(InducerKind::lda(), 1).bind(&d).unwrap();
        let m = FeatureMask::from_indices(8, [0, 4]).unwrap();
        let a = scorer.score_subset(&m).unwrap();
        let b = scorer.score_subset(&m).unwrap();
        assert_eq!(a, b);
        assert_eq!(scorer.calls(), 2);
        assert!(scorer.score_subset(&FeatureMask::empty(7)).is_err());
    }

    #[test]
    fn singular_folds_score_zero() {
        // two identical constant columns: every LDA fold is singular at gamma = 0
        let rows: Vec<Vec<f64>> = (0..8).map(|_| vec![1.0, 1.0]).collect();
        let labels = ["A", "B"].iter().cycle().take(8).map(|s| s.to_string()).collect();
        let d = Dataset::new(rows, labels, vec!["a".into(), "b".into()]).unwrap();
        let scorer = SubsetScorer::new(InducerKind::Lda { gamma: 0.0 }, 0).bind(&d).unwrap();
        assert_eq!(scorer.score_subset(&FeatureMask::full(2)).unwrap(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn score_is_a_probability(seed in 0u64..1000, bits in 0u64..256) {
            let d = generate_synthetic(&SyntheticSpec {
                n_samples: 20, n_informative: 2, n_noise: 6, class_separation: 1.0, seed,
            }).unwrap();
            for inducer in [InducerKind::OneNn, InducerKind::lda()] {
                let s = SubsetScorer::new(inducer, seed).bind(&d).unwrap()
                    .score_subset(&FeatureMask::from_bits(8, bits)).unwrap();
                prop_assert!((0.0..=1.0).contains(&s));
            }
        }

        #[test]
        fn column_permutation_equivariance(seed in 0u64..1000, bits in 1u64..64, rot in 1usize..6) {
            let d = generate_synthetic(&SyntheticSpec {
                n_samples: 24, n_informative: 2, n_noise: 4, class_separation: 1.5, seed,
            }).unwrap();
            let mask = FeatureMask::from_bits(6, bits);
            // new column c holds old column perm[c]
            let perm: Vec<usize> = (0..6).map(|c| (c + rot) % 6).collect();
            let permuted = d.select_columns(&perm);
            let pmask = FeatureMask::from_indices(6, (0..6).filter(|&c| mask.contains(perm[c]))).unwrap();
            let a = SubsetScorer::new(InducerKind::OneNn, 2).bind(&d).unwrap().score_subset(&mask).unwrap();
            let b = SubsetScorer::new(InducerKind::OneNn, 2).bind(&permuted).unwrap().score_subset(&pmask).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn lda_affine_invariance(seed in 0u64..1000, scale in 0.01f64..100.0, shift in -50f64..50.0, flip in any::<bool>()) {
            let d = generate_synthetic(&SyntheticSpec {
                n_samples: 30, n_informative: 2, n_noise: 1, class_separation: 1.0, seed,
            }).unwrap();
            let a = if flip { -scale } else { scale };
            let rows: Vec<Vec<f64>> = (0..d.n_samples())
                .map(|i| { let mut r = d.row(i).to_vec(); r[1] = a * r[1] + shift; r })
                .collect();
            let labels = (0..d.n_samples()).map(|i| d.label_name(i).to_string()).collect();
            let t = Dataset::new(rows, labels, d.feature_names().to_vec()).unwrap();
            let train_idx: Vec<usize> = (0..20).collect();
            let test_idx: Vec<usize> = (20..30).collect();
            let mask = FeatureMask::full(3);
            let lda = InducerKind::Lda { gamma: 0.0 };
            let p1 = lda.fit_predict(&d.select_rows(&train_idx), &mask, &d.select_rows(&test_idx)).unwrap();
            let p2 = lda.fit_predict(&t.select_rows(&train_idx), &mask, &t.select_rows(&test_idx)).unwrap();
            prop_assert_eq!(p1, p2);
        }
    }
}
