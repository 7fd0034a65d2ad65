use std::fmt::Write as _;

use anyhow::bail;
use dqml::oracle::{self, PenaltyConfig, RandomInstanceSpec};
use dqml::pipeline;
use dqml::qml::{self, ClassProblem, DualVariables, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{data, DiagnoseArgs, EXIT_DIAGNOSTIC};

const FD_STEP: f64 = 1e-6;
const FD_TOL: f64 = 1e-5;
const FD_POINTS: usize = 10;
const GAP_TOL: f64 = 1e-5;
const KKT_TOL: f64 = 1e-4;
const PSD_TOL: f64 = 1e-8;
const PENALTY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
struct CheckRow {
    instance: String,
    check: &'static str,
    value: f64,
    tolerance: f64,
    passed: bool,
}

fn row(instance: &str, check: &'static str, value: f64, tolerance: f64, passed: bool) -> CheckRow {
    CheckRow {
        instance: instance.to_string(),
        check,
        value,
        tolerance,
        passed,
    }
}

struct Options {
    cfg: SolverConfig,
    grid_step: Option<f64>,
    penalty: bool,
    perturb_grad: bool,
}

fn gradient_error(prob: &ClassProblem, rng: &mut ChaCha8Rng, perturb: bool) -> anyhow::Result<f64> {
    let mut worst = 0.0_f64;
    for _ in 0..FD_POINTS {
        let u: Vec<f64> = (0..prob.n_intra())
            .map(|_| rng.random_range(0.01..2.0))
            .collect();
        let mut g = qml::dual_gradient(&DualVariables::new(u.clone())?, prob)?;
        let fd = oracle::central_difference_gradient(
            |p| qml::dual_objective(&DualVariables::new(p.to_vec())?, prob),
            &u,
            FD_STEP,
        )?;
        let scale = g.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        if perturb {
            g[0] += 1e-3 * scale;
        }
        let err = g
            .iter()
            .zip(&fd)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        worst = worst.max(err / scale);
    }
    Ok(worst)
}

fn check_instance(
    name: &str,
    prob: &ClassProblem,
    seed: u64,
    opts: &Options,
) -> anyhow::Result<Vec<CheckRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let fd = gradient_error(prob, &mut rng, opts.perturb_grad)?;
    rows.push(row(name, "gradient", fd, FD_TOL, fd <= FD_TOL));

    let res = qml::solve_dual(prob, &opts.cfg)?;
    rows.push(row(
        name,
        "converged",
        res.projected_gradient_norm,
        opts.cfg.grad_tol,
        res.converged,
    ));
    let gap = res.duality_gap.abs() / res.primal_objective.abs().max(1.0);
    rows.push(row(name, "duality_gap", gap, GAP_TOL, gap <= GAP_TOL));
    let kkt = qml::kkt_report(&res, prob)?;
    rows.push(row(
        name,
        "feasibility",
        kkt.max_feasibility_violation,
        KKT_TOL,
        kkt.max_feasibility_violation <= KKT_TOL,
    ));
    rows.push(row(
        name,
        "slackness",
        kkt.max_slackness_residual,
        KKT_TOL,
        kkt.max_slackness_residual <= KKT_TOL,
    ));
    rows.push(row(
        name,
        "min_eigenvalue",
        kkt.min_eigenvalue,
        -PSD_TOL,
        kkt.min_eigenvalue >= -PSD_TOL,
    ));

    if let Some(step) = opts.grid_step {
        let grid = oracle::solve_primal_grid(prob, oracle::default_grid_half_width(prob), step)?;
        let diff = (grid.objective - res.primal_objective).abs();
        rows.push(row(
            name,
            "grid_oracle",
            diff,
            2.0 * step,
            diff <= 2.0 * step,
        ));
    }
    if opts.penalty {
        let pen = oracle::solve_primal_penalty(prob, &PenaltyConfig::default())?;
        let rel = oracle::relative_gap(pen.objective, res.primal_objective);
        rows.push(row(
            name,
            "penalty_oracle",
            rel,
            PENALTY_TOL,
            rel <= PENALTY_TOL,
        ));
    }
    Ok(rows)
}

fn random_problems(a: &DiagnoseArgs, count: usize) -> anyhow::Result<Vec<(String, ClassProblem)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let dim = a.dim as usize;
    (0..count)
        .map(|k| {
            let prob = if dim == 2 {
                let lambda = a.lambda.unwrap_or([0.1, 1.0][k % 2]);
                oracle::random_planar_problem(&mut rng, lambda)?
            } else {
                let spec = RandomInstanceSpec {
                    dim,
                    n_intra: rng.random_range(1..=8),
                    n_extra: rng.random_range(0..=30),
                    lambda: a.lambda.unwrap_or([0.1, 1.0, 10.0][k % 3]),
                    bound: 1.0,
                };
                oracle::random_class_problem(&spec, &mut rng)?
            };
            Ok((format!("random-{k}"), prob))
        })
        .collect()
}

fn dataset_problems(a: &DiagnoseArgs) -> anyhow::Result<Vec<(String, ClassProblem)>> {
    let path = a
        .data
        .as_ref()
        .expect("clap requires --data without --random-instances");
    let ds = data::load(path, a.header)?.dataset;
    let lambda = a.lambda.unwrap_or(1.0);
    (1..=ds.class_count())
        .map(|c| {
            Ok((
                format!("class-{c}"),
                pipeline::build_class_problem(&ds, c, lambda)?,
            ))
        })
        .collect()
}

pub fn run(a: &DiagnoseArgs) -> anyhow::Result<u8> {
    let problems = match a.random_instances {
        Some(n) => random_problems(a, n)?,
        None => dataset_problems(a)?,
    };
    let dim = problems.first().map_or(a.dim as usize, |(_, p)| p.dim());
    if a.grid_oracle && dim != 2 {
        bail!("the grid oracle needs dimension 2, got {dim}");
    }
    let opts = Options {
        cfg: a.solver.config()?,
        grid_step: (dim == 2).then_some(a.step),
        penalty: a.penalty_oracle,
        perturb_grad: a.perturb_grad,
    };

    let rows: Vec<CheckRow> = problems
        .par_iter()
        .enumerate()
        .map(|(k, (name, prob))| check_instance(name, prob, a.seed ^ (k as u64 + 1), &opts))
        .collect::<anyhow::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let failures: Vec<&CheckRow> = rows.iter().filter(|r| !r.passed).collect();
    if a.json {
        for r in &rows {
            println!("{}", serde_json::to_string(r)?);
        }
    } else {
        let mut out = String::new();
        writeln!(
            out,
            "{} problems, {} checks, {} failed",
            problems.len(),
            rows.len(),
            failures.len()
        )?;
        let worst = |check: &str| {
            rows.iter()
                .filter(|r| r.check == check)
                .map(|r| r.value)
                .fold(None, |acc: Option<f64>, v| {
                    Some(acc.map_or(v, |a| a.max(v)))
                })
        };
        for check in [
            "gradient",
            "duality_gap",
            "feasibility",
            "slackness",
            "grid_oracle",
            "penalty_oracle",
        ] {
            if let Some(v) = worst(check) {
                writeln!(out, "  worst {check:<15} {v:.3e}")?;
            }
        }
        if !failures.is_empty() {
            writeln!(out, "violations:")?;
            writeln!(
                out,
                "  {:<12} {:<15} {:>12} {:>12}",
                "instance", "check", "value", "tolerance"
            )?;
            for r in &failures {
                writeln!(
                    out,
                    "  {:<12} {:<15} {:>12.4e} {:>12.4e}",
                    r.instance, r.check, r.value, r.tolerance
                )?;
            }
        }
        print!("{out}");
    }
    Ok(if failures.is_empty() {
        0
    } else {
        EXIT_DIAGNOSTIC
    })
}
