//! Reference solvers that attack the primal problem directly, for certifying
//! the dual solver: exhaustive grid search over 2×2 matrices and a quadratic
//! penalty method with projection onto the PSD cone. Also hosts the random
//! instance generator and finite-difference helper used by the diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{QmlError, Result};
use crate::qml::{self, ClassProblem};
use crate::symmat::{self, SymmetricMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Grid,
    Penalty,
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub p: SymmetricMatrix,
    pub objective: f64,
    pub method: OracleMethod,
    /// Grid step for [`OracleMethod::Grid`], final penalty weight otherwise.
    pub resolution_or_final_penalty: f64,
    /// Largest constraint violation after each penalty stage (empty for the grid).
    pub stage_violations: Vec<f64>,
}

/// `3·b·maxᵢ 1/‖xᵢ‖²`: the single-constraint optimum has norm `b/‖x‖²`.
pub fn default_grid_half_width(prob: &ClassProblem) -> f64 {
    let min_sq = (0..prob.n_intra())
        .map(|i| prob.intra_samples().row(i).norm_squared())
        .fold(f64::INFINITY, f64::min);
    3.0 * prob.bound() / min_sq
}

fn min_eig_2x2(a: f64, c: f64, d: f64) -> f64 {
    let mean = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    mean - (half * half + c * c).sqrt()
}

/// Exhaustive search over `P = [[a, c], [c, d]]` with `a, d ∈ [0, w]` and
/// `c ∈ [−w, w]` on a lattice of spacing `step`.
pub fn solve_primal_grid(prob: &ClassProblem, half_width: f64, step: f64) -> Result<OracleResult> {
    if prob.dim() != 2 {
        return Err(QmlError::invalid("grid oracle only handles dimension 2"));
    }
    if !(step > 0.0 && half_width >= step && half_width.is_finite()) {
        return Err(QmlError::invalid(
            "grid needs step > 0 and half_width >= step",
        ));
    }
    prob.check_feasible()?;

    let n_steps = (half_width / step + 1e-9).floor() as i64;
    if n_steps > 20_000 {
        return Err(QmlError::invalid("grid is too fine"));
    }
    let o = prob.extra_scatter();
    let (o11, o12, o22) = (o.get(0, 0), o.get(0, 1), o.get(1, 1));
    let bound = prob.bound();
    let lam = prob.lambda();
    let xs: Vec<(f64, f64)> = (0..prob.n_intra())
        .map(|i| {
            let r = prob.intra_samples().row(i);
            (r[0], r[1])
        })
        .collect();

    let mut best: Option<(f64, f64, f64, f64)> = None;
    for ia in 0..=n_steps {
        let a = ia as f64 * step;
        for id in 0..=n_steps {
            let d = id as f64 * step;
            // |c| ≤ √(ad) is necessary for PSD; widen by one cell and let the
            // eigenvalue test decide.
            let c_lim = ((a * d).sqrt() / step).floor() as i64 + 1;
            let c_lim = c_lim.min(n_steps);
            for ic in -c_lim..=c_lim {
                let c = ic as f64 * step;
                if min_eig_2x2(a, c, d) < -1e-9 {
                    continue;
                }
                let feasible = xs
                    .iter()
                    .all(|&(x1, x2)| a * x1 * x1 + 2.0 * c * x1 * x2 + d * x2 * x2 >= bound);
                if !feasible {
                    continue;
                }
                let obj =
                    0.5 * (a * a + d * d + 2.0 * c * c) + lam * (a * o11 + 2.0 * c * o12 + d * o22);
                if best.is_none_or(|(b, ..)| obj < b) {
                    best = Some((obj, a, c, d));
                }
            }
        }
    }
    let (objective, a, c, d) = best.ok_or(QmlError::GridTooCoarse)?;
    Ok(OracleResult {
        p: SymmetricMatrix::from_row_slice(2, &[a, c, c, d])?,
        objective,
        method: OracleMethod::Grid,
        resolution_or_final_penalty: step,
        stage_violations: Vec::new(),
    })
}

/// Settings for the quadratic-penalty reference solver.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyConfig {
    /// Strictly increasing penalty weights ρ.
    pub schedule: Vec<f64>,
    /// Inner loop stops when `L·‖P_{k+1} − P_k‖_F` falls below this.
    pub inner_tol: f64,
    pub max_inner_steps: usize,
    /// After the schedule, ρ keeps growing tenfold while the largest
    /// constraint violation exceeds `violation_target · b` ...
    pub violation_target: f64,
    /// ... up to this weight.
    pub max_penalty: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        Self {
            schedule: vec![1.0, 10.0, 100.0, 1e3, 1e4, 1e5, 1e6],
            inner_tol: 1e-10,
            max_inner_steps: 20_000,
            violation_target: 1e-5,
            max_penalty: 1e10,
        }
    }
}

impl PenaltyConfig {
    fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(QmlError::invalid("penalty schedule is empty"));
        }
        if self.schedule.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(QmlError::invalid("penalty weights must be positive"));
        }
        if self.schedule.windows(2).any(|w| w[1] <= w[0]) {
            return Err(QmlError::invalid("penalty schedule must be increasing"));
        }
        if !(self.inner_tol > 0.0 && self.inner_tol.is_finite()) || self.max_inner_steps == 0 {
            return Err(QmlError::invalid(
                "inner_tol and max_inner_steps must be positive",
            ));
        }
        if !(self.violation_target > 0.0 && self.max_penalty > 0.0) {
            return Err(QmlError::invalid(
                "violation_target and max_penalty must be positive",
            ));
        }
        Ok(())
    }
}

/// Largest eigenvalue of `G_ij = (xᵢ·xⱼ)²` by power iteration: the curvature
/// of `Σ (xᵢᵀPxᵢ)²` in the Frobenius geometry.
fn penalty_curvature(prob: &ClassProblem) -> f64 {
    let x = prob.intra_samples();
    let gram = x * x.transpose();
    let g = gram.map(|v| v * v);
    let n = g.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut est = 0.0;
    for _ in 0..200 {
        let w = &g * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - est).abs() <= 1e-12 * next.abs() {
            est = next;
            break;
        }
        est = next;
    }
    // Power iteration underestimates; pad slightly.
    est * 1.01
}

/// Which smooth term accompanies the penalty.
#[derive(Clone, Copy)]
enum BaseObjective {
    /// `½‖P‖² + λ tr(PO)`.
    Regularized,
    /// `tr(PO)`, the unregularized criterion.
    Linear,
}

struct PenaltyProblem<'a> {
    prob: &'a ClassProblem,
    base: BaseObjective,
    samples: Vec<Vec<f64>>,
}

impl<'a> PenaltyProblem<'a> {
    fn new(prob: &'a ClassProblem, base: BaseObjective) -> Self {
        let samples = (0..prob.n_intra()).map(|i| prob.intra_sample(i)).collect();
        Self {
            prob,
            base,
            samples,
        }
    }

    fn base_value(&self, p: &DMatrix<f64>) -> f64 {
        let lin = p.dot(self.prob.extra_scatter().as_matrix());
        match self.base {
            BaseObjective::Regularized => 0.5 * p.norm_squared() + self.prob.lambda() * lin,
            BaseObjective::Linear => lin,
        }
    }

    fn shortfalls(&self, p: &DMatrix<f64>) -> Vec<f64> {
        self.samples
            .iter()
            .map(|x| (self.prob.bound() - symmat::quadratic_form_unchecked(p, x)).max(0.0))
            .collect()
    }

    fn value(&self, p: &DMatrix<f64>, rho: f64) -> f64 {
        self.base_value(p) + rho * self.shortfalls(p).iter().map(|s| s * s).sum::<f64>()
    }

    fn gradient(&self, p: &DMatrix<f64>, rho: f64) -> DMatrix<f64> {
        let o = self.prob.extra_scatter().as_matrix();
        let mut g = match self.base {
            BaseObjective::Regularized => p + o * self.prob.lambda(),
            BaseObjective::Linear => o.clone(),
        };
        for (x, s) in self.samples.iter().zip(self.shortfalls(p)) {
            if s > 0.0 {
                let v = DVector::from_column_slice(x);
                g.ger(-2.0 * rho * s, &v, &v, 1.0);
            }
        }
        g
    }
}

fn project_psd(p: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = SymmetricMatrix::symmetrize(p)?;
    Ok(symmat::positive_part(&sym)?.into_matrix())
}

/// Accelerated projected gradient over the penalty schedule, warm-started
/// from one stage to the next.
fn run_penalty(problem: &PenaltyProblem<'_>, cfg: &PenaltyConfig) -> Result<OracleResult> {
    cfg.validate()?;
    problem.prob.check_feasible()?;
    let m = problem.prob.dim();
    let curvature = penalty_curvature(problem.prob);
    let base_l = match problem.base {
        BaseObjective::Regularized => 1.0,
        BaseObjective::Linear => 0.0,
    };

    let mut p = DMatrix::<f64>::zeros(m, m);
    let mut stage_violations = Vec::with_capacity(cfg.schedule.len());
    let mut rho_iter = cfg.schedule.clone().into_iter();
    let mut rho = rho_iter.next().expect("validated non-empty");
    loop {
        let lipschitz = base_l + 2.0 * rho * curvature;
        let step = 1.0 / lipschitz;
        let mut y = p.clone();
        let mut t = 1.0_f64;
        let mut f_prev = problem.value(&p, rho);
        for _ in 0..cfg.max_inner_steps {
            let g = problem.gradient(&y, rho);
            let next = project_psd(&y - g * step)?;
            let f_next = problem.value(&next, rho);
            if !f_next.is_finite() {
                return Err(QmlError::NumericalFailure(
                    "penalty objective diverged".into(),
                ));
            }
            if f_next < -1e12 || next.norm() > 1e12 {
                return Err(QmlError::Unbounded(format!(
                    "penalty iterate escaped to objective {f_next:e}"
                )));
            }
            let moved = (&next - &p).norm();
            if f_next > f_prev {
                // Momentum overshot: restart from the last iterate.
                y = p.clone();
                t = 1.0;
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = &next + (&next - &p) * ((t - 1.0) / t_next);
            t = t_next;
            p = next;
            f_prev = f_next;
            if moved * lipschitz <= cfg.inner_tol {
                break;
            }
        }
        let violation = problem.shortfalls(&p).into_iter().fold(0.0, f64::max);
        stage_violations.push(violation);
        rho = match rho_iter.next() {
            Some(next) => next,
            None if violation > cfg.violation_target * problem.prob.bound()
                && rho * 10.0 <= cfg.max_penalty =>
            {
                rho * 10.0
            }
            None => break,
        };
    }

    let p = SymmetricMatrix::symmetrize(p)?;
    Ok(OracleResult {
        objective: problem.base_value(p.as_matrix()),
        p,
        method: OracleMethod::Penalty,
        resolution_or_final_penalty: rho,
        stage_violations,
    })
}

/// Minimizes `½‖P‖² + λ tr(PO) + ρ Σ (b − xᵢᵀPxᵢ)₊²` over the PSD cone for each
/// ρ in the schedule. The reported objective omits the penalty term.
pub fn solve_primal_penalty(prob: &ClassProblem, cfg: &PenaltyConfig) -> Result<OracleResult> {
    run_penalty(&PenaltyProblem::new(prob, BaseObjective::Regularized), cfg)
}

/// Same scheme applied to the unregularized criterion `Σ_{x∈E} xᵀPx = tr(PO)`
/// (λ is ignored).
pub fn solve_unregularized(prob: &ClassProblem, cfg: &PenaltyConfig) -> Result<OracleResult> {
    run_penalty(&PenaltyProblem::new(prob, BaseObjective::Linear), cfg)
}

/// Central differences of `f` at `u` with step `h` along each coordinate.
pub fn central_difference_gradient<F>(f: F, u: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut point = u.to_vec();
    let mut grad = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        let orig = point[i];
        point[i] = orig + h;
        let plus = f(&point)?;
        point[i] = orig - h;
        let minus = f(&point)?;
        point[i] = orig;
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// Shape of a random test problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomInstanceSpec {
    pub dim: usize,
    pub n_intra: usize,
    pub n_extra: usize,
    pub lambda: f64,
    pub bound: f64,
}

/// Gaussian samples with entries `N(0, 1/m)`, so every sample has norm close to 1.
/// Intra samples are redrawn until their norm exceeds 0.1.
pub fn random_class_problem<R: Rng + ?Sized>(
    spec: &RandomInstanceSpec,
    rng: &mut R,
) -> Result<ClassProblem> {
    if spec.dim == 0 || spec.n_intra == 0 {
        return Err(QmlError::invalid(
            "random instance needs dim >= 1 and n_intra >= 1",
        ));
    }
    let scale = 1.0 / (spec.dim as f64).sqrt();
    let draw = |rng: &mut R| -> Vec<f64> {
        (0..spec.dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z * scale
            })
            .collect()
    };
    let mut intra = DMatrix::zeros(spec.n_intra, spec.dim);
    for i in 0..spec.n_intra {
        let row = loop {
            let r = draw(rng);
            if r.iter().map(|v| v * v).sum::<f64>().sqrt() > 0.1 {
                break r;
            }
        };
        for (j, v) in row.into_iter().enumerate() {
            intra[(i, j)] = v;
        }
    }
    let mut extra = DMatrix::zeros(spec.n_extra, spec.dim);
    for i in 0..spec.n_extra {
        for (j, v) in draw(rng).into_iter().enumerate() {
            extra[(i, j)] = v;
        }
    }
    ClassProblem::from_samples(intra, &extra, spec.lambda, spec.bound)
}

/// Planar instance sized for the grid oracle: one to three intra samples with
/// norms in [0.8, 1.25] at random angles and up to four extra samples with
/// entries `N(0, 0.35²)`. Keeps `‖P*‖` and `λ‖O‖` of order one for `λ ≤ 1`,
/// where a lattice of step `h` is within about `2h` of the optimum.
pub fn random_planar_problem<R: Rng + ?Sized>(rng: &mut R, lambda: f64) -> Result<ClassProblem> {
    let n_intra = rng.random_range(1..=3);
    let mut intra = DMatrix::zeros(n_intra, 2);
    for i in 0..n_intra {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::PI);
        let r: f64 = rng.random_range(0.8..1.25);
        intra[(i, 0)] = r * theta.cos();
        intra[(i, 1)] = r * theta.sin();
    }
    let n_extra = rng.random_range(0..=4);
    let mut extra = DMatrix::zeros(n_extra, 2);
    for v in extra.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v = 0.35 * z;
    }
    ClassProblem::from_samples(intra, &extra, lambda, 1.0)
}

/// Relative objective difference against a dual-solver result.
pub fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Primal objective of an oracle matrix under the regularized criterion.
pub fn regularized_objective(p: &SymmetricMatrix, prob: &ClassProblem) -> Result<f64> {
    qml::primal_objective(p, prob)
}
