//! Training over all classes, quadratic feature extraction, classification,
//! λ selection by cross-validation, the repeated-split evaluation protocol and
//! the binary model format.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datasets::{self, SplitSpec};
use crate::error::{QmlError, Result};
use crate::qml::{self, ClassProblem, SolverConfig, TrainedQuadraticMatrix};
use crate::symmat::{quadratic_form_unchecked, SymmetricMatrix};

/// `n` samples of dimension `m` with labels in `1..=C`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: DMatrix<f64>,
    labels: Vec<usize>,
    class_count: usize,
}

impl Dataset {
    /// Every class in `1..=class_count` must own at least one sample.
    pub fn new(samples: DMatrix<f64>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        let ds = Self::new_partial(samples, labels, class_count)?;
        for c in 1..=class_count {
            if !ds.labels.contains(&c) {
                return Err(QmlError::InvalidDataset(format!(
                    "class {c} has no samples"
                )));
            }
        }
        Ok(ds)
    }

    /// Like [`Dataset::new`] but classes may be absent, as in a test split.
    pub fn new_partial(
        samples: DMatrix<f64>,
        labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        if samples.nrows() != labels.len() {
            return Err(QmlError::InvalidDataset(format!(
                "{} samples but {} labels",
                samples.nrows(),
                labels.len()
            )));
        }
        if samples.ncols() == 0 {
            return Err(QmlError::InvalidDataset("samples have dimension 0".into()));
        }
        if class_count == 0 {
            return Err(QmlError::InvalidDataset(
                "class count must be positive".into(),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l > class_count) {
            return Err(QmlError::InvalidDataset(format!(
                "label {bad} outside 1..={class_count}"
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(QmlError::InvalidDataset(
                "samples contain non-finite entries".into(),
            ));
        }
        Ok(Self {
            samples,
            labels,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sample(&self, i: usize) -> Vec<f64> {
        self.samples.row(i).iter().copied().collect()
    }

    /// Indices of the samples labelled `class`, ascending.
    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == class)
            .collect()
    }

    /// Rows `indices` in the given order, keeping the class count.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new_partial(
            self.samples.select_rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
            self.class_count,
        )
    }
}

fn check_class(ds: &Dataset, class: usize) -> Result<()> {
    if class == 0 || class > ds.class_count() {
        return Err(QmlError::invalid(format!(
            "class {class} outside 1..={}",
            ds.class_count()
        )));
    }
    Ok(())
}

/// Intra samples in dataset order; the extra-class scatter is accumulated
/// over rows in a canonical (sorted) order so it does not depend on how the
/// other classes' samples are arranged.
pub fn build_class_problem(ds: &Dataset, class: usize, lambda: f64) -> Result<ClassProblem> {
    check_class(ds, class)?;
    let intra_idx = ds.class_indices(class);
    if intra_idx.is_empty() {
        return Err(QmlError::invalid(format!("class {class} has no samples")));
    }
    let mut extra_rows: Vec<Vec<f64>> = (0..ds.len())
        .filter(|&i| ds.labels[i] != class)
        .map(|i| ds.sample(i))
        .collect();
    extra_rows.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let m = ds.dim();
    let extra = DMatrix::from_row_iterator(extra_rows.len(), m, extra_rows.into_iter().flatten());
    ClassProblem::from_samples(ds.samples.select_rows(&intra_idx), &extra, lambda, 1.0)
}

/// Solver diagnostics kept alongside each learned matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveSummary {
    pub class: usize,
    pub iterations: usize,
    pub dual_objective: f64,
    pub primal_objective: f64,
    pub duality_gap: f64,
    pub converged: bool,
}

impl SolveSummary {
    fn from_result(class: usize, r: &TrainedQuadraticMatrix) -> Self {
        Self {
            class,
            iterations: r.iterations,
            dual_objective: r.dual_objective,
            primal_objective: r.primal_objective,
            duality_gap: r.duality_gap,
            converged: r.converged,
        }
    }
}

/// The learned matrices `P_1..P_C` with the training feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSet {
    /// `matrices[c - 1]` belongs to class `c`.
    pub matrices: Vec<SymmetricMatrix>,
    pub lambda: f64,
    /// `C × n`; column `i` is the feature vector of training sample `i`.
    pub training_features: DMatrix<f64>,
    pub training_labels: Vec<usize>,
    /// Per-class solver diagnostics; empty for a model read from disk.
    pub summaries: Vec<SolveSummary>,
}

impl ModelSet {
    pub fn class_count(&self) -> usize {
        self.matrices.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }
}

/// Feature vector `(xᵀP_1x, …, xᵀP_Cx)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self(self.0.iter().map(|v| v * alpha).collect())
    }
}

/// Solves the `C` per-class problems (in parallel on the current rayon pool)
/// and computes the training features.
pub fn train_model_set(ds: &Dataset, lambda: f64, cfg: &SolverConfig) -> Result<ModelSet> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(QmlError::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    cfg.validate()?;
    let results: Vec<Result<TrainedQuadraticMatrix>> = (1..=ds.class_count())
        .into_par_iter()
        .map(|c| {
            let prob = build_class_problem(ds, c, lambda)?;
            qml::solve_dual(&prob, cfg).map_err(|e| match e {
                QmlError::Infeasible(reason) => QmlError::ClassInfeasible { class: c, reason },
                other => other,
            })
        })
        .collect();

    let mut matrices = Vec::with_capacity(ds.class_count());
    let mut summaries = Vec::with_capacity(ds.class_count());
    for (idx, r) in results.into_iter().enumerate() {
        let r = r?;
        summaries.push(SolveSummary::from_result(idx + 1, &r));
        matrices.push(r.p);
    }
    let training_features = feature_matrix(&matrices, ds.samples());
    Ok(ModelSet {
        matrices,
        lambda,
        training_features,
        training_labels: ds.labels().to_vec(),
        summaries,
    })
}

fn feature_matrix(matrices: &[SymmetricMatrix], samples: &DMatrix<f64>) -> DMatrix<f64> {
    let n = samples.nrows();
    let mut f = DMatrix::zeros(matrices.len(), n);
    for i in 0..n {
        let x: Vec<f64> = samples.row(i).iter().copied().collect();
        for (c, p) in matrices.iter().enumerate() {
            f[(c, i)] = quadratic_form_unchecked(p.as_matrix(), &x);
        }
    }
    f
}

pub fn extract_features(model: &ModelSet, x: &[f64]) -> Result<FeatureVector> {
    if x.len() != model.dim() {
        return Err(QmlError::invalid(format!(
            "sample has dimension {}, model expects {}",
            x.len(),
            model.dim()
        )));
    }
    Ok(FeatureVector(
        model
            .matrices
            .iter()
            .map(|p| quadratic_form_unchecked(p.as_matrix(), x))
            .collect(),
    ))
}

/// Index (1-based) of the largest component; ties go to the smaller index.
pub fn classify_max(f: &FeatureVector) -> usize {
    let mut best = 0;
    for (j, &v) in f.0.iter().enumerate() {
        if v > f.0[best] {
            best = j;
        }
    }
    best + 1
}

fn norm(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Label of the training sample whose feature column has the largest cosine
/// similarity with `f`; ties go to the smaller training index.
pub fn classify_nn_cosine(f: &FeatureVector, model: &ModelSet) -> Result<usize> {
    if f.0.len() != model.class_count() {
        return Err(QmlError::invalid(
            "feature vector length differs from class count",
        ));
    }
    let f_norm = norm(f.0.iter().copied());
    if f_norm == 0.0 || !f_norm.is_finite() {
        return Err(QmlError::DegenerateFeature);
    }
    let mut best: Option<(f64, usize)> = None;
    for (i, col) in model.training_features.column_iter().enumerate() {
        let c_norm = norm(col.iter().copied());
        if c_norm == 0.0 {
            continue;
        }
        let cos = f.0.iter().zip(col.iter()).map(|(a, b)| a * b).sum::<f64>() / (f_norm * c_norm);
        if best.is_none_or(|(b, _)| cos > b) {
            best = Some((cos, i));
        }
    }
    let (_, i) = best.ok_or(QmlError::DegenerateFeature)?;
    Ok(model.training_labels[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassificationRule {
    Max,
    NnCosine,
}

impl ClassificationRule {
    pub fn name(self) -> &'static str {
        match self {
            ClassificationRule::Max => "max",
            ClassificationRule::NnCosine => "nn_cosine",
        }
    }
}

pub fn classify(model: &ModelSet, x: &[f64], rule: ClassificationRule) -> Result<usize> {
    let f = extract_features(model, x)?;
    match rule {
        ClassificationRule::Max => Ok(classify_max(&f)),
        ClassificationRule::NnCosine => classify_nn_cosine(&f, model),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub error_rate: f64,
    pub misclassified: usize,
    pub total: usize,
    /// Samples the rule could not label (zero feature vector under cosine
    /// NN). They count as misclassified and are absent from `confusion`.
    pub rejected: usize,
    /// `confusion[true - 1][predicted - 1]`.
    pub confusion: Vec<Vec<usize>>,
}

pub fn evaluate(model: &ModelSet, test: &Dataset, rule: ClassificationRule) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(QmlError::invalid("test set is empty"));
    }
    if test.dim() != model.dim() {
        return Err(QmlError::invalid("test set dimension differs from model"));
    }
    let c = model.class_count();
    if test.class_count() > c {
        return Err(QmlError::invalid(
            "test set has more classes than the model",
        ));
    }
    let predictions: Vec<Result<usize>> = (0..test.len())
        .into_par_iter()
        .map(|i| classify(model, &test.sample(i), rule))
        .collect();
    let mut confusion = vec![vec![0usize; c]; c];
    let mut wrong = 0;
    let mut rejected = 0;
    for (i, pred) in predictions.into_iter().enumerate() {
        let pred = match pred {
            Ok(p) => p,
            Err(QmlError::DegenerateFeature) => {
                rejected += 1;
                wrong += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let truth = test.labels()[i];
        confusion[truth - 1][pred - 1] += 1;
        if pred != truth {
            wrong += 1;
        }
    }
    Ok(Evaluation {
        error_rate: wrong as f64 / test.len() as f64,
        misclassified: wrong,
        total: test.len(),
        rejected,
        confusion,
    })
}

/// Average validation error of one λ.
#[derive(Debug, Clone, PartialEq)]
pub struct CvEntry {
    pub lambda: f64,
    pub mean_error: f64,
    pub fold_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub selected_lambda: f64,
    pub table: Vec<CvEntry>,
}

/// Stratified fold assignment; `None` marks samples of classes smaller than
/// `folds`, which only ever train.
pub fn stratified_folds(ds: &Dataset, folds: usize, seed: u64) -> Vec<Option<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![None; ds.len()];
    let mut offset = 0;
    for c in 1..=ds.class_count() {
        let mut idx = ds.class_indices(c);
        if idx.len() < folds {
            continue;
        }
        idx.shuffle(&mut rng);
        for (j, &i) in idx.iter().enumerate() {
            assignment[i] = Some((offset + j) % folds);
        }
        offset = (offset + idx.len()) % folds;
    }
    assignment
}

/// k-fold cross-validation of the cosine-NN error over `grid`; the λ with the
/// lowest mean error wins, ties going to the smaller λ.
pub fn cross_validate_lambda(
    ds: &Dataset,
    grid: &[f64],
    folds: usize,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<CvReport> {
    if grid.is_empty() {
        return Err(QmlError::invalid("lambda grid is empty"));
    }
    if let Some(bad) = grid.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(QmlError::invalid(format!(
            "lambda grid value {bad} is not positive"
        )));
    }
    if folds < 2 {
        return Err(QmlError::invalid("cross-validation needs at least 2 folds"));
    }
    let assignment = stratified_folds(ds, folds, seed);
    let splits: Vec<(Dataset, Dataset)> = (0..folds)
        .filter_map(|k| {
            let val: Vec<usize> = (0..ds.len())
                .filter(|&i| assignment[i] == Some(k))
                .collect();
            if val.is_empty() {
                return None;
            }
            let train: Vec<usize> = (0..ds.len())
                .filter(|&i| assignment[i] != Some(k))
                .collect();
            Some((train, val))
        })
        .map(|(train, val)| Ok((ds.subset(&train)?, ds.subset(&val)?)))
        .collect::<Result<_>>()?;
    if splits.is_empty() {
        return Err(QmlError::invalid(
            "no class has enough samples to form a validation fold",
        ));
    }

    let mut table = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let fold_errors = splits
            .par_iter()
            .map(|(train, val)| {
                let model = train_model_set(train, lambda, cfg)?;
                Ok(evaluate(&model, val, ClassificationRule::NnCosine)?.error_rate)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mean_error = fold_errors.iter().sum::<f64>() / fold_errors.len() as f64;
        table.push(CvEntry {
            lambda,
            mean_error,
            fold_errors,
        });
    }
    let best = table
        .iter()
        .min_by(|a, b| {
            a.mean_error
                .total_cmp(&b.mean_error)
                .then(a.lambda.total_cmp(&b.lambda))
        })
        .expect("grid is non-empty");
    Ok(CvReport {
        selected_lambda: best.lambda,
        table,
    })
}

/// How the protocol picks λ for each repetition.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    CrossValidated { grid: Vec<f64>, folds: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub split: SplitSpec,
    pub lambda: LambdaChoice,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub lambda: f64,
    pub error_max: f64,
    pub error_nn_cosine: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolReport {
    pub repetitions: Vec<RepetitionResult>,
    pub mean_error_max: f64,
    pub std_error_max: f64,
    pub mean_error_nn_cosine: f64,
    pub std_error_nn_cosine: f64,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Repeated random splits: train on `per_class_train` samples per class,
/// test on the rest, report both classification rules.
pub fn run_protocol(ds: &Dataset, cfg: &ProtocolConfig) -> Result<ProtocolReport> {
    if cfg.split.repetitions == 0 {
        return Err(QmlError::invalid("protocol needs at least one repetition"));
    }
    let repetitions = (0..cfg.split.repetitions)
        .into_par_iter()
        .map(|r| {
            let (train, test) = datasets::split_random(ds, &cfg.split, r)?;
            let lambda = match &cfg.lambda {
                LambdaChoice::Fixed(l) => *l,
                LambdaChoice::CrossValidated { grid, folds } => {
                    let cv_seed = cfg.split.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ r as u64;
                    cross_validate_lambda(&train, grid, *folds, &cfg.solver, cv_seed)?
                        .selected_lambda
                }
            };
            let model = train_model_set(&train, lambda, &cfg.solver)?;
            Ok(RepetitionResult {
                repetition: r,
                lambda,
                error_max: evaluate(&model, &test, ClassificationRule::Max)?.error_rate,
                error_nn_cosine: evaluate(&model, &test, ClassificationRule::NnCosine)?.error_rate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mean_max, std_max) =
        mean_std(&repetitions.iter().map(|r| r.error_max).collect::<Vec<_>>());
    let (mean_nn, std_nn) = mean_std(
        &repetitions
            .iter()
            .map(|r| r.error_nn_cosine)
            .collect::<Vec<_>>(),
    );
    Ok(ProtocolReport {
        repetitions,
        mean_error_max: mean_max,
        std_error_max: std_max,
        mean_error_nn_cosine: mean_nn,
        std_error_nn_cosine: std_nn,
    })
}

// ---------------------------------------------------------------------------
// Model file format (little-endian):
//   "DQML" | version u32 | m u32 | C u32 | λ f64 | C·m·m f64 (row-major)
//   | n u32 | C·n f64 features (row-major) | n u32 labels | CRC32 u32
// ---------------------------------------------------------------------------

pub const MODEL_MAGIC: &[u8; 4] = b"DQML";
pub const MODEL_VERSION: u32 = 1;

pub fn encode_model(model: &ModelSet) -> Result<Vec<u8>> {
    let c = model.class_count();
    let m = model.dim();
    let n = model.training_labels.len();
    if model.training_features.nrows() != c || model.training_features.ncols() != n {
        return Err(QmlError::invalid(
            "training feature matrix has the wrong shape",
        ));
    }
    let to_u32 = |v: usize, what: &str| {
        u32::try_from(v).map_err(|_| QmlError::invalid(format!("{what} does not fit in u32")))
    };
    let mut buf = Vec::with_capacity(24 + 8 * (c * m * m + c * n) + 4 * n + 4);
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    buf.extend_from_slice(&to_u32(m, "dimension")?.to_le_bytes());
    buf.extend_from_slice(&to_u32(c, "class count")?.to_le_bytes());
    buf.extend_from_slice(&model.lambda.to_le_bytes());
    for p in &model.matrices {
        if p.dim() != m {
            return Err(QmlError::invalid("class matrices differ in dimension"));
        }
        for v in p.to_row_major() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf.extend_from_slice(&to_u32(n, "sample count")?.to_le_bytes());
    for row in 0..c {
        for col in 0..n {
            buf.extend_from_slice(&model.training_features[(row, col)].to_le_bytes());
        }
    }
    for &l in &model.training_labels {
        buf.extend_from_slice(&to_u32(l, "label")?.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    Ok(buf)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self.bytes.get(self.pos..end).ok_or(QmlError::Truncated)?;
        self.pos = end;
        Ok(chunk.try_into().expect("slice has length N"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take::<4>()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take::<8>()?))
    }
}

pub fn decode_model(bytes: &[u8]) -> Result<ModelSet> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != MODEL_MAGIC {
        return Err(QmlError::Format("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != MODEL_VERSION {
        return Err(QmlError::Version {
            found: version,
            supported: MODEL_VERSION,
        });
    }
    // The checksum covers everything before the final four bytes.
    if bytes.len() < 4 {
        return Err(QmlError::Truncated);
    }
    let m = r.u32()? as usize;
    let c = r.u32()? as usize;
    let lambda = r.f64()?;
    if m == 0 || c == 0 {
        return Err(QmlError::Format("zero dimension or class count".into()));
    }
    let header_len = 24;
    let matrices_len = c
        .checked_mul(m)
        .and_then(|v| v.checked_mul(m))
        .and_then(|v| v.checked_mul(8))
        .ok_or_else(|| QmlError::Format("matrix block size overflows".into()))?;
    if bytes.len() < header_len + matrices_len + 4 {
        return Err(QmlError::Truncated);
    }
    let mut matrices = Vec::with_capacity(c);
    for _ in 0..c {
        let mut entries = Vec::with_capacity(m * m);
        for _ in 0..m * m {
            entries.push(r.f64()?);
        }
        matrices.push(entries);
    }
    let n = r.u32()? as usize;
    let expected = header_len + matrices_len + 4 + 8 * c * n + 4 * n + 4;
    if bytes.len() < expected {
        return Err(QmlError::Truncated);
    }
    if bytes.len() > expected {
        return Err(QmlError::Format(format!(
            "{} trailing bytes after checksum",
            bytes.len() - expected
        )));
    }
    let stored = u32::from_le_bytes(bytes[expected - 4..].try_into().expect("4 bytes"));
    let computed = crc32fast::hash(&bytes[..expected - 4]);
    if stored != computed {
        return Err(QmlError::Checksum { stored, computed });
    }

    let mut features = DMatrix::zeros(c, n);
    for row in 0..c {
        for col in 0..n {
            features[(row, col)] = r.f64()?;
        }
    }
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let l = r.u32()? as usize;
        if l == 0 || l > c {
            return Err(QmlError::Format(format!(
                "training label {l} outside 1..={c}"
            )));
        }
        labels.push(l);
    }
    let matrices = matrices
        .into_iter()
        .map(|e| SymmetricMatrix::from_row_slice(m, &e))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| QmlError::Format(format!("stored matrix is invalid: {e}")))?;
    Ok(ModelSet {
        matrices,
        lambda,
        training_features: features,
        training_labels: labels,
        summaries: Vec::new(),
    })
}

pub fn save_model(model: &ModelSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_model(model)?;
    fs::write(path, bytes).map_err(|e| QmlError::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| QmlError::io(path, e))?;
    decode_model(&bytes)
}
