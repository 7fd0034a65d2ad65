use std::path::Path;

use anyhow::Context;
use dqml::datasets;
use dqml::pipeline::Dataset;

/// Dataset plus the name of each class as it appeared in the source.
pub struct Loaded {
    pub dataset: Dataset,
    pub class_names: Vec<String>,
}

/// A directory is read as per-class image folders, anything else as CSV.
pub fn load(path: &Path, header: bool) -> anyhow::Result<Loaded> {
    if path.is_dir() {
        let load = datasets::load_raster_dir(path)?;
        for skipped in &load.skipped {
            eprintln!("warning: skipped unreadable image {}", skipped.display());
        }
        Ok(Loaded {
            dataset: load.dataset,
            class_names: load.class_names,
        })
    } else {
        let load = datasets::load_csv(path, header)
            .with_context(|| format!("cannot load {}", path.display()))?;
        Ok(Loaded {
            dataset: load.dataset,
            class_names: load.original_labels.iter().map(i64::to_string).collect(),
        })
    }
}

/// Loads samples to be scored by an existing model. Labels are kept as
/// written in the file, so they must already be `1..=C` for that model.
pub fn load_for_model(path: &Path, header: bool, class_count: usize) -> anyhow::Result<Dataset> {
    let loaded = load(path, header)?;
    let ds = loaded.dataset;
    if path.is_dir() {
        return Ok(ds);
    }
    let mut labels = Vec::with_capacity(ds.len());
    for (i, &internal) in ds.labels().iter().enumerate() {
        let name = &loaded.class_names[internal - 1];
        let label: usize = name
            .parse()
            .ok()
            .filter(|l| (1..=class_count).contains(l))
            .with_context(|| format!("row {}: label {name} is outside 1..={class_count}", i + 1))?;
        labels.push(label);
    }
    Ok(Dataset::new_partial(
        ds.samples().clone(),
        labels,
        class_count,
    )?)
}
