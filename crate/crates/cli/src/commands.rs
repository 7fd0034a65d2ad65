use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};

use anyhow::Context;
use dqml::datasets::{self, SplitSpec, SynthSpec};
use dqml::pipeline::{self, ClassificationRule, LambdaChoice, ModelSet, ProtocolConfig};
use serde::Serialize;

use crate::data;
use crate::{ClassifyArgs, EvalArgs, FeaturesArgs, RuleArg, SynthArgs, TrainArgs};

fn rules(arg: RuleArg) -> Vec<ClassificationRule> {
    match arg {
        RuleArg::Max => vec![ClassificationRule::Max],
        RuleArg::NnCosine => vec![ClassificationRule::NnCosine],
        RuleArg::Both => vec![ClassificationRule::Max, ClassificationRule::NnCosine],
    }
}

fn print_json(value: &impl Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(value)?);
    Ok(())
}

pub fn synth(a: &SynthArgs) -> anyhow::Result<u8> {
    let spec = SynthSpec {
        class_count: a.classes as usize,
        dim: a.dim as usize,
        per_class: a.per_class as usize,
        separation: a.sep,
        sigma: a.sigma,
        seed: a.seed,
    };
    let ds = datasets::generate_synthetic(&spec)?;
    datasets::write_csv(&ds, &a.output)?;
    let names: Vec<String> = (1..=ds.class_count()).map(|c| c.to_string()).collect();
    let meta = datasets::metadata_path(&a.output);
    fs::write(&meta, datasets::metadata_text(&ds, &names, Some(a.seed)))
        .with_context(|| format!("cannot write {}", meta.display()))?;
    eprintln!(
        "wrote {} samples ({} classes, dimension {}) to {}",
        ds.len(),
        ds.class_count(),
        ds.dim(),
        a.output.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct ClassLine {
    class: usize,
    iterations: usize,
    dual_objective: f64,
    primal_objective: f64,
    gap: f64,
    converged: bool,
}

#[derive(Serialize)]
struct CvLine {
    lambda: f64,
    mean_error: f64,
}

#[derive(Serialize)]
struct LambdaLine {
    selected_lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cv: Option<Vec<CvLine>>,
}

pub fn train(a: &TrainArgs) -> anyhow::Result<u8> {
    let loaded = data::load(&a.data.data, a.data.header)?;
    let ds = loaded.dataset;
    let expected: Vec<String> = (1..=ds.class_count()).map(|c| c.to_string()).collect();
    if !a.data.data.is_dir() && loaded.class_names != expected {
        eprintln!(
            "warning: labels {:?} are stored as classes 1..={}",
            loaded.class_names,
            ds.class_count()
        );
    }
    let cfg = a.solver.config()?;

    let (lambda, cv) = match (&a.lambda.lambda, &a.lambda.cv_grid) {
        (Some(l), _) => (*l, None),
        (None, Some(grid)) => {
            let report = pipeline::cross_validate_lambda(&ds, &grid.0, a.folds, &cfg, a.seed)?;
            let table = report
                .table
                .iter()
                .map(|e| CvLine {
                    lambda: e.lambda,
                    mean_error: e.mean_error,
                })
                .collect();
            (report.selected_lambda, Some(table))
        }
        (None, None) => unreachable!("clap requires --lambda or --cv-grid"),
    };

    let model = pipeline::train_model_set(&ds, lambda, &cfg)?;
    pipeline::save_model(&model, &a.output)?;
    for s in &model.summaries {
        print_json(&ClassLine {
            class: s.class,
            iterations: s.iterations,
            dual_objective: s.dual_objective,
            primal_objective: s.primal_objective,
            gap: s.duality_gap,
            converged: s.converged,
        })?;
    }
    print_json(&LambdaLine {
        selected_lambda: lambda,
        cv,
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct RuleResult {
    rule: &'static str,
    error_rate: f64,
    misclassified: usize,
    rejected: usize,
    total: usize,
    confusion: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct RepetitionLine {
    repetition: usize,
    lambda: f64,
    error_max: f64,
    error_nn_cosine: f64,
}

#[derive(Serialize)]
struct ProtocolSummary {
    repetitions: Vec<RepetitionLine>,
    mean_error_max: f64,
    std_error_max: f64,
    mean_error_nn_cosine: f64,
    std_error_nn_cosine: f64,
}

pub fn eval(a: &EvalArgs) -> anyhow::Result<u8> {
    if a.protocol {
        return protocol(a);
    }
    let path = a
        .model
        .as_ref()
        .expect("clap requires --model without --protocol");
    let model = pipeline::load_model(path)?;
    let test = data::load_for_model(&a.data.data, a.data.header, model.class_count())?;
    let mut results = Vec::new();
    for rule in rules(a.rule) {
        let ev = pipeline::evaluate(&model, &test, rule)?;
        results.push(RuleResult {
            rule: rule.name(),
            error_rate: ev.error_rate,
            misclassified: ev.misclassified,
            rejected: ev.rejected,
            total: ev.total,
            confusion: ev.confusion,
        });
    }
    if a.json {
        for r in &results {
            print_json(r)?;
        }
        return Ok(0);
    }
    let mut out = String::new();
    writeln!(
        out,
        "{:<10} {:>8} {:>8} {:>8}",
        "rule", "error%", "wrong", "total"
    )?;
    for r in &results {
        writeln!(
            out,
            "{:<10} {:>8.2} {:>8} {:>8}",
            r.rule,
            100.0 * r.error_rate,
            r.misclassified,
            r.total
        )?;
    }
    print!("{out}");
    Ok(0)
}

fn protocol(a: &EvalArgs) -> anyhow::Result<u8> {
    let ds = data::load(&a.data.data, a.data.header)?.dataset;
    let per_class_train = a.m_train.expect("clap requires --m-train with --protocol");
    let cfg = ProtocolConfig {
        split: SplitSpec {
            per_class_train,
            repetitions: a.reps,
            seed: a.seed,
        },
        lambda: match a.lambda {
            Some(l) => LambdaChoice::Fixed(l),
            None => LambdaChoice::CrossValidated {
                grid: a.cv_grid.0.clone(),
                folds: a.folds,
            },
        },
        solver: a.solver.config()?,
    };
    let report = pipeline::run_protocol(&ds, &cfg)?;
    if a.json {
        return print_json(&ProtocolSummary {
            repetitions: report
                .repetitions
                .iter()
                .map(|r| RepetitionLine {
                    repetition: r.repetition,
                    lambda: r.lambda,
                    error_max: r.error_max,
                    error_nn_cosine: r.error_nn_cosine,
                })
                .collect(),
            mean_error_max: report.mean_error_max,
            std_error_max: report.std_error_max,
            mean_error_nn_cosine: report.mean_error_nn_cosine,
            std_error_nn_cosine: report.std_error_nn_cosine,
        })
        .map(|_| 0);
    }
    let mut out = String::new();
    writeln!(
        out,
        "{} repetitions, {} training samples per class",
        report.repetitions.len(),
        per_class_train
    )?;
    writeln!(out, "{:<10} {:>16}", "rule", "error% (mean ± std)")?;
    for rule in rules(a.rule) {
        let (mean, std) = match rule {
            ClassificationRule::Max => (report.mean_error_max, report.std_error_max),
            ClassificationRule::NnCosine => {
                (report.mean_error_nn_cosine, report.std_error_nn_cosine)
            }
        };
        writeln!(
            out,
            "{:<10} {:>7.2} ± {:.2}",
            rule.name(),
            100.0 * mean,
            100.0 * std
        )?;
    }
    print!("{out}");
    Ok(0)
}

fn load_pair(
    model: &std::path::Path,
    a: &crate::DataArgs,
) -> anyhow::Result<(ModelSet, pipeline::Dataset)> {
    let model = pipeline::load_model(model)?;
    let ds = data::load_for_model(&a.data, a.header, model.class_count())?;
    Ok((model, ds))
}

pub fn features(a: &FeaturesArgs) -> anyhow::Result<u8> {
    let (model, ds) = load_pair(&a.model, &a.data)?;
    let mut out = String::new();
    for i in 0..ds.len() {
        let f = pipeline::extract_features(&model, &ds.sample(i))?;
        write!(out, "{}", ds.labels()[i])?;
        for v in f.values() {
            write!(out, ",{v}")?;
        }
        out.push('\n');
    }
    match &a.output {
        Some(path) => {
            fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?
        }
        None => io::stdout().lock().write_all(out.as_bytes())?,
    }
    Ok(0)
}

pub fn classify(a: &ClassifyArgs) -> anyhow::Result<u8> {
    let (model, ds) = load_pair(&a.model, &a.data)?;
    let rules = rules(a.rule);
    let mut out = String::new();
    writeln!(
        out,
        "index,label,{}",
        rules.iter().map(|r| r.name()).collect::<Vec<_>>().join(",")
    )?;
    for i in 0..ds.len() {
        write!(out, "{},{}", i, ds.labels()[i])?;
        let x = ds.sample(i);
        for &rule in &rules {
            match pipeline::classify(&model, &x, rule) {
                Ok(c) => write!(out, ",{c}")?,
                Err(dqml::QmlError::DegenerateFeature) => out.push_str(",-"),
                Err(e) => return Err(e.into()),
            }
        }
        out.push('\n');
    }
    print!("{out}");
    Ok(0)
}
