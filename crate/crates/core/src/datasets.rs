//! Data ingestion and synthesis.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use image::imageops::{self, FilterType};
use image::{ImageBuffer, Luma};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{QmlError, Result};
use crate::pipeline::Dataset;

/// Side length of ingested raster images.
pub const RASTER_SIDE: u32 = 32;

/// Random train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    /// Training samples drawn per class.
    pub per_class_train: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(per_class_train: usize, seed: u64) -> Self {
        Self {
            per_class_train,
            repetitions: 30,
            seed,
        }
    }
}

/// Isotropic Gaussian classes around well-separated means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub class_count: usize,
    pub dim: usize,
    pub per_class: usize,
    /// Distance of each class mean from the origin.
    pub separation: f64,
    pub sigma: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.class_count == 0 || self.dim == 0 || self.per_class == 0 {
            return Err(QmlError::invalid(
                "classes, dimension and per-class count must be positive",
            ));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(QmlError::invalid("separation must be non-negative"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(QmlError::invalid("sigma must be positive"));
        }
        Ok(())
    }
}

/// Dataset read from CSV plus the original label of each class.
#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub dataset: Dataset,
    /// `original_labels[c - 1]` is the file's label for class `c`.
    pub original_labels: Vec<i64>,
}

/// Reads `label,v1,...,vm` rows. Labels are renumbered `1..=C` in order of
/// first appearance.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<CsvLoad> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| QmlError::io(path, e))?;
    parse_csv(&text, has_header)
}

pub fn parse_csv(text: &str, has_header: bool) -> Result<CsvLoad> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut original_labels: Vec<i64> = Vec::new();
    let mut relabel: HashMap<i64, usize> = HashMap::new();
    let mut dim = None;
    let row_offset = usize::from(has_header) + 1;

    for (idx, record) in reader.records().enumerate() {
        let row = idx + row_offset;
        let record = record.map_err(|e| QmlError::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() < 2 {
            return Err(QmlError::Parse {
                row,
                message: "expected a label and at least one value".into(),
            });
        }
        let raw_label: i64 = record[0].parse().map_err(|_| QmlError::Parse {
            row,
            message: format!("label {:?} is not an integer", &record[0]),
        })?;
        if raw_label <= 0 {
            return Err(QmlError::Parse {
                row,
                message: format!("label {raw_label} is not positive"),
            });
        }
        let m = record.len() - 1;
        match dim {
            None => dim = Some(m),
            Some(d) if d != m => {
                return Err(QmlError::Parse {
                    row,
                    message: format!("row has {m} values, expected {d}"),
                })
            }
            _ => {}
        }
        for (col, cell) in record.iter().skip(1).enumerate() {
            let v: f64 = cell.parse().map_err(|_| QmlError::Parse {
                row,
                message: format!("column {} value {cell:?} is not numeric", col + 2),
            })?;
            if !v.is_finite() {
                return Err(QmlError::Parse {
                    row,
                    message: format!("column {} value is not finite", col + 2),
                });
            }
            values.push(v);
        }
        let next = relabel.len() + 1;
        let class = *relabel.entry(raw_label).or_insert_with(|| {
            original_labels.push(raw_label);
            next
        });
        labels.push(class);
    }
    let Some(m) = dim else {
        return Err(QmlError::Parse {
            row: row_offset,
            message: "file contains no data rows".into(),
        });
    };
    let n = labels.len();
    let dataset = Dataset::new(
        DMatrix::from_row_slice(n, m, &values),
        labels,
        original_labels.len(),
    )?;
    Ok(CsvLoad {
        dataset,
        original_labels,
    })
}

/// `label,v1,...,vm` with labels `1..=C` and shortest round-trip float formatting.
pub fn to_csv(ds: &Dataset) -> String {
    let mut out = String::new();
    for i in 0..ds.len() {
        write!(out, "{}", ds.labels()[i]).expect("write to String");
        for v in ds.samples().row(i).iter() {
            write!(out, ",{v}").expect("write to String");
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv(ds)).map_err(|e| QmlError::io(path, e))
}

/// Sidecar text next to a dataset file: sizes, per-class counts, label map, seed.
pub fn metadata_text(ds: &Dataset, original_labels: &[String], seed: Option<u64>) -> String {
    let mut out = String::new();
    writeln!(out, "samples {}", ds.len()).unwrap();
    writeln!(out, "dim {}", ds.dim()).unwrap();
    writeln!(out, "classes {}", ds.class_count()).unwrap();
    for c in 1..=ds.class_count() {
        let name = original_labels
            .get(c - 1)
            .map(String::as_str)
            .unwrap_or("-");
        writeln!(
            out,
            "class {c} original {name} count {}",
            ds.class_indices(c).len()
        )
        .unwrap();
    }
    match seed {
        Some(s) => writeln!(out, "seed {s}").unwrap(),
        None => writeln!(out, "seed none").unwrap(),
    }
    out
}

/// `data.csv` → `data.csv.meta`.
pub fn metadata_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Raster directory ingestion result.
#[derive(Debug, Clone)]
pub struct RasterLoad {
    pub dataset: Dataset,
    /// Subdirectory name of each class, sorted.
    pub class_names: Vec<String>,
    /// Files that failed to decode and were skipped.
    pub skipped: Vec<PathBuf>,
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(dir)
        .map_err(|e| QmlError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| QmlError::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    entries.sort();
    Ok(entries)
}

/// Decodes an 8-bit grayscale image and resamples it to 32×32 with a bilinear
/// filter; returns row-major pixels scaled to `[0, 1]`.
pub fn raster_to_vector(path: &Path) -> Result<Vec<f64>> {
    let img = image::open(path)
        .map_err(|e| QmlError::InvalidDataset(format!("{}: {e}", path.display())))?
        .to_luma8();
    let (w, h) = img.dimensions();
    if w == 0 || h == 0 {
        return Err(QmlError::InvalidDataset(format!(
            "{}: empty image",
            path.display()
        )));
    }
    if (w, h) == (RASTER_SIDE, RASTER_SIDE) {
        return Ok(img.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect());
    }
    // float buffers are clamped to [0, 1] by the resampler, so scale first
    let float: ImageBuffer<Luma<f32>, Vec<f32>> = ImageBuffer::from_fn(w, h, |x, y| {
        Luma([f32::from(img.get_pixel(x, y).0[0]) / 255.0])
    });
    let resized = imageops::resize(&float, RASTER_SIDE, RASTER_SIDE, FilterType::Triangle);
    Ok(resized
        .pixels()
        .map(|p| f64::from(p.0[0]).clamp(0.0, 1.0))
        .collect())
}

/// Reads `root/<class-name>/<image files>`; classes are numbered in sorted
/// name order, files are read in sorted path order.
pub fn load_raster_dir(root: impl AsRef<Path>) -> Result<RasterLoad> {
    let root = root.as_ref();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut class_names = Vec::new();
    let mut skipped = Vec::new();

    for dir in read_dir_sorted(root)?.into_iter().filter(|p| p.is_dir()) {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let class = class_names.len() + 1;
        let mut count = 0;
        for file in read_dir_sorted(&dir)?.into_iter().filter(|p| p.is_file()) {
            match raster_to_vector(&file) {
                Ok(v) => {
                    rows.push(v);
                    labels.push(class);
                    count += 1;
                }
                Err(e) => {
                    log::warn!("skipping {}: {e}", file.display());
                    skipped.push(file);
                }
            }
        }
        if count == 0 {
            return Err(QmlError::InvalidDataset(format!(
                "class directory {} has no readable images",
                dir.display()
            )));
        }
        class_names.push(name);
    }
    if class_names.is_empty() {
        return Err(QmlError::InvalidDataset(format!(
            "{} has no class subdirectories",
            root.display()
        )));
    }
    let m = (RASTER_SIDE * RASTER_SIDE) as usize;
    let samples = DMatrix::from_row_iterator(rows.len(), m, rows.into_iter().flatten());
    Ok(RasterLoad {
        dataset: Dataset::new(samples, labels, class_names.len())?,
        class_names,
        skipped,
    })
}

/// Class `k` (0-based) is centred at `separation·e_k`; classes beyond the
/// dimension get seeded random unit directions. Samples are class-major.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let means: Vec<DVector<f64>> = (0..spec.class_count)
        .map(|k| {
            if k < spec.dim {
                let mut e = DVector::zeros(spec.dim);
                e[k] = spec.separation;
                e
            } else {
                let dir = loop {
                    let v = DVector::from_fn(spec.dim, |_, _| StandardNormal.sample(&mut rng));
                    let n: f64 = v.norm();
                    if n > 1e-9 {
                        break v / n;
                    }
                };
                dir * spec.separation
            }
        })
        .collect();

    let noise = Normal::new(0.0, spec.sigma).map_err(|e| QmlError::invalid(e.to_string()))?;
    let n = spec.class_count * spec.per_class;
    let mut samples = DMatrix::zeros(n, spec.dim);
    let mut labels = Vec::with_capacity(n);
    for (k, mean) in means.iter().enumerate() {
        for j in 0..spec.per_class {
            let row = k * spec.per_class + j;
            for d in 0..spec.dim {
                samples[(row, d)] = mean[d] + noise.sample(&mut rng);
            }
            labels.push(k + 1);
        }
    }
    Dataset::new(samples, labels, spec.class_count)
}

/// Train/test indices for repetition `r`, each ascending.
pub fn split_indices(ds: &Dataset, spec: &SplitSpec, r: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.per_class_train == 0 {
        return Err(QmlError::invalid("per_class_train must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(r as u64);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in 1..=ds.class_count() {
        let mut idx = ds.class_indices(c);
        if idx.len() <= spec.per_class_train {
            return Err(QmlError::invalid(format!(
                "class {c} has {} samples, needs more than {}",
                idx.len(),
                spec.per_class_train
            )));
        }
        idx.shuffle(&mut rng);
        train.extend_from_slice(&idx[..spec.per_class_train]);
        test.extend_from_slice(&idx[spec.per_class_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Per class, `per_class_train` random samples train and the rest test.
/// The split depends only on `(spec.seed, r)`.
pub fn split_random(ds: &Dataset, spec: &SplitSpec, r: usize) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds, spec, r)?;
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}
