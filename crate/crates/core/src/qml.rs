//! Per-class quadratic matrix learning through the Lagrange dual.
//!
//! The primal problem for one class is
//!
//! ```text
//! min_P  ½‖P‖_F² + λ·tr(P O)   s.t.  xᵢᵀ P xᵢ ≥ b  for every intra-class xᵢ,   P ⪰ 0
//! ```
//!
//! where `O` is the scatter of the extra-class samples. Eliminating the PSD
//! multiplier in closed form leaves a concave maximization over `u ≥ 0` only:
//!
//! ```text
//! max_u  −½‖M(u)₋‖_F² + b·Σuᵢ,     M(u) = λO − Σ uᵢ xᵢxᵢᵀ
//! ```
//!
//! with gradient `b + xᵢᵀ M(u)₋ xᵢ` and primal recovery `P = −M(u)₋`. A single
//! eigendecomposition of `M(u)` yields the objective, every gradient
//! component and the primal matrix.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{QmlError, Result};
use crate::symmat::{self, eigen_call_count, EigenDecomposition, SymmetricMatrix, PSD_TOL};

/// Intra-class samples with norm at or below this make the problem infeasible.
pub const ZERO_SAMPLE_TOL: f64 = 1e-12;

/// Curvature constant of the extrapolation phase of the line search.
const CURVATURE_C: f64 = 0.9;

/// Scatter matrix `Σ xⱼxⱼᵀ` over the rows of `samples` (k×m, k may be 0).
pub fn build_scatter(samples: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    if samples.ncols() == 0 {
        return Err(QmlError::invalid("scatter needs dimension >= 1"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(QmlError::invalid("samples contain non-finite entries"));
    }
    Ok(SymmetricMatrix::symmetrize_unchecked(
        samples.transpose() * samples,
    ))
}

/// One class's instance of the learning problem.
#[derive(Debug, Clone)]
pub struct ClassProblem {
    intra: DMatrix<f64>,
    extra_scatter: SymmetricMatrix,
    lambda: f64,
    bound: f64,
}

impl ClassProblem {
    /// `intra` holds one intra-class sample per row. Zero rows are accepted
    /// here and rejected by the solvers, which report them as infeasible.
    pub fn new(
        intra: DMatrix<f64>,
        extra_scatter: SymmetricMatrix,
        lambda: f64,
        bound: f64,
    ) -> Result<Self> {
        if intra.nrows() == 0 {
            return Err(QmlError::invalid(
                "class needs at least one intra-class sample",
            ));
        }
        if intra.ncols() != extra_scatter.dim() {
            return Err(QmlError::invalid(format!(
                "intra samples have dimension {}, scatter has {}",
                intra.ncols(),
                extra_scatter.dim()
            )));
        }
        if intra.iter().any(|v| !v.is_finite()) {
            return Err(QmlError::invalid(
                "intra samples contain non-finite entries",
            ));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(QmlError::invalid(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(QmlError::invalid(format!(
                "bound must be positive, got {bound}"
            )));
        }
        let scale = symmat::frobenius_norm(&extra_scatter);
        if scale > 0.0 && symmat::min_eigenvalue(&extra_scatter)? < -1e-8 * scale {
            return Err(QmlError::invalid("extra-class scatter is not PSD"));
        }
        Ok(Self {
            intra,
            extra_scatter,
            lambda,
            bound,
        })
    }

    /// Builds the problem from raw extra-class samples (rows) instead of their scatter.
    pub fn from_samples(
        intra: DMatrix<f64>,
        extra: &DMatrix<f64>,
        lambda: f64,
        bound: f64,
    ) -> Result<Self> {
        if extra.ncols() != intra.ncols() {
            return Err(QmlError::invalid(
                "intra and extra samples differ in dimension",
            ));
        }
        let scatter = build_scatter(extra)?;
        Self::new(intra, scatter, lambda, bound)
    }

    pub fn dim(&self) -> usize {
        self.intra.ncols()
    }

    pub fn n_intra(&self) -> usize {
        self.intra.nrows()
    }

    pub fn intra_samples(&self) -> &DMatrix<f64> {
        &self.intra
    }

    pub fn intra_sample(&self, i: usize) -> Vec<f64> {
        self.intra.row(i).iter().copied().collect()
    }

    pub fn extra_scatter(&self) -> &SymmetricMatrix {
        &self.extra_scatter
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Same data with a different weight and bound.
    pub fn with_params(&self, lambda: f64, bound: f64) -> Result<Self> {
        Self::new(
            self.intra.clone(),
            self.extra_scatter.clone(),
            lambda,
            bound,
        )
    }

    /// Fails when some intra sample is (numerically) zero: `0 ≥ b` cannot hold.
    pub fn check_feasible(&self) -> Result<()> {
        for i in 0..self.n_intra() {
            if self.intra.row(i).norm() <= ZERO_SAMPLE_TOL {
                return Err(QmlError::Infeasible(format!(
                    "intra-class sample {i} is zero, constraint 0 >= {} cannot hold",
                    self.bound
                )));
            }
        }
        Ok(())
    }

    /// Largest `(b − xᵢᵀPxᵢ)₊` over the intra samples.
    pub fn max_constraint_violation(&self, p: &SymmetricMatrix) -> f64 {
        (0..self.n_intra())
            .map(|i| {
                let x = self.intra_sample(i);
                (self.bound - symmat::quadratic_form_unchecked(p.as_matrix(), &x)).max(0.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Dual multipliers `u ≥ 0`, one per intra-class constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVariables(Vec<f64>);

impl DualVariables {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if let Some(bad) = u.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(QmlError::invalid(format!(
                "dual variables must be finite and non-negative, got {bad}"
            )));
        }
        Ok(Self(u))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Settings for the projected limited-memory quasi-Newton solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once the projected gradient's infinity norm falls to this level.
    pub grad_tol: f64,
    /// Number of stored curvature pairs.
    pub memory: usize,
    pub line_search_shrink: f64,
    pub armijo_c: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            grad_tol: 1e-7,
            memory: 10,
            line_search_shrink: 0.5,
            armijo_c: 1e-4,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(QmlError::invalid("max_iterations must be positive"));
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return Err(QmlError::invalid("grad_tol must be positive"));
        }
        if self.memory == 0 {
            return Err(QmlError::invalid("memory must be positive"));
        }
        if !(self.line_search_shrink > 0.0 && self.line_search_shrink < 1.0) {
            return Err(QmlError::invalid("line_search_shrink must lie in (0, 1)"));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(QmlError::invalid("armijo_c must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// A solved class matrix plus the diagnostics of the run that produced it.
#[derive(Debug, Clone)]
pub struct TrainedQuadraticMatrix {
    pub p: SymmetricMatrix,
    pub u_star: DualVariables,
    /// Dual objective in the maximization convention.
    pub dual_objective: f64,
    pub primal_objective: f64,
    /// `primal_objective − dual_objective`.
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Infinity norm of the projected gradient at `u_star`.
    pub projected_gradient_norm: f64,
    /// Objective/gradient evaluations, line-search trials included.
    pub evaluations: usize,
    /// Eigendecompositions performed by the solve, read from the thread-local counter.
    pub eigendecompositions: u64,
    /// Dual objective after each accepted step, starting with the value at `u = 0`.
    pub objective_trace: Vec<f64>,
}

impl TrainedQuadraticMatrix {
    /// Diagnostics for an arbitrary feasible `u`, without running the solver.
    pub fn from_dual(u: DualVariables, prob: &ClassProblem) -> Result<Self> {
        let before = eigen_call_count();
        let eval = DualEvaluation::new(&u, prob)?;
        let p = eval.primal();
        let primal = primal_objective(&p, prob)?;
        Ok(Self {
            projected_gradient_norm: projected_gradient_inf_norm(u.as_slice(), &eval.gradient),
            dual_objective: eval.objective,
            primal_objective: primal,
            duality_gap: primal - eval.objective,
            p,
            u_star: u,
            iterations: 0,
            converged: false,
            evaluations: 1,
            eigendecompositions: eigen_call_count() - before,
            objective_trace: vec![eval.objective],
        })
    }
}

fn check_dual_len(u: &DualVariables, prob: &ClassProblem) -> Result<()> {
    if u.len() != prob.n_intra() {
        return Err(QmlError::invalid(format!(
            "{} dual variables for {} intra-class samples",
            u.len(),
            prob.n_intra()
        )));
    }
    Ok(())
}

/// `M(u) = λ·O − Σ uᵢ xᵢxᵢᵀ`.
pub fn assemble_m(u: &DualVariables, prob: &ClassProblem) -> Result<SymmetricMatrix> {
    check_dual_len(u, prob)?;
    Ok(assemble_m_unchecked(u.as_slice(), prob))
}

fn assemble_m_unchecked(u: &[f64], prob: &ClassProblem) -> SymmetricMatrix {
    let x = &prob.intra;
    let mut weighted = x.clone();
    for (i, &ui) in u.iter().enumerate() {
        weighted.row_mut(i).scale_mut(ui);
    }
    let m = prob.extra_scatter.as_matrix() * prob.lambda - x.transpose() * weighted;
    SymmetricMatrix::symmetrize_unchecked(m)
}

/// Everything derived from one eigendecomposition of `M(u)`.
struct DualEvaluation {
    eig: EigenDecomposition,
    objective: f64,
    gradient: Vec<f64>,
}

impl DualEvaluation {
    fn new(u: &DualVariables, prob: &ClassProblem) -> Result<Self> {
        check_dual_len(u, prob)?;
        Self::at(u.as_slice(), prob)
    }

    fn at(u: &[f64], prob: &ClassProblem) -> Result<Self> {
        let m = assemble_m_unchecked(u, prob);
        let eig = symmat::eigen_decompose(&m)?;
        let lam = eig.clamped_eigenvalues();
        let neg = eig.negative_indices();

        let objective = -0.5 * eig.negative_part_norm_sq() + prob.bound * u.iter().sum::<f64>();

        // xᵢᵀ M₋ xᵢ = Σ_k λ_k (v_kᵀ xᵢ)² over the negative eigenpairs.
        let mut gradient = vec![prob.bound; u.len()];
        if !neg.is_empty() {
            let v_neg = eig.eigenvectors.select_columns(&neg);
            let proj = &prob.intra * v_neg;
            for (i, g) in gradient.iter_mut().enumerate() {
                let row = proj.row(i);
                *g += neg
                    .iter()
                    .enumerate()
                    .map(|(c, &k)| lam[k] * row[c] * row[c])
                    .sum::<f64>();
            }
        }
        if !objective.is_finite() || gradient.iter().any(|g| !g.is_finite()) {
            return Err(QmlError::NumericalFailure(
                "dual objective or gradient is not finite".into(),
            ));
        }
        Ok(Self {
            eig,
            objective,
            gradient,
        })
    }

    fn primal(&self) -> SymmetricMatrix {
        self.eig.negative_part().scale(-1.0)
    }
}

/// `−½‖M(u)₋‖_F² + b·Σuᵢ`.
pub fn dual_objective(u: &DualVariables, prob: &ClassProblem) -> Result<f64> {
    Ok(DualEvaluation::new(u, prob)?.objective)
}

/// Gradient of [`dual_objective`]: `b + xᵢᵀ M(u)₋ xᵢ`.
pub fn dual_gradient(u: &DualVariables, prob: &ClassProblem) -> Result<Vec<f64>> {
    Ok(DualEvaluation::new(u, prob)?.gradient)
}

/// Primal matrix `P = K* − λO + Σ uᵢxᵢxᵢᵀ` with `K* = M(u)₊`, i.e. `P = −M(u)₋`.
pub fn recover_primal(u: &DualVariables, prob: &ClassProblem) -> Result<SymmetricMatrix> {
    Ok(DualEvaluation::new(u, prob)?.primal())
}

/// `½‖P‖_F² + λ·tr(P O)`.
pub fn primal_objective(p: &SymmetricMatrix, prob: &ClassProblem) -> Result<f64> {
    let fro = symmat::frobenius_norm(p);
    Ok(0.5 * fro * fro + prob.lambda * symmat::trace_product(p, &prob.extra_scatter)?)
}

/// Projected gradient of the maximization: components pinned at `u = 0`
/// whose gradient pushes further into the bound are zeroed.
fn projected_gradient_inf_norm(u: &[f64], ascent_grad: &[f64]) -> f64 {
    u.iter()
        .zip(ascent_grad)
        .map(|(&ui, &g)| if ui <= 0.0 && g < 0.0 { 0.0 } else { g.abs() })
        .fold(0.0, f64::max)
}

struct CurvaturePair {
    s: DVector<f64>,
    y: DVector<f64>,
    rho: f64,
}

/// Two-loop recursion restricted to the coordinates in `free`.
fn lbfgs_direction(
    grad: &DVector<f64>,
    free: &[bool],
    history: &VecDeque<CurvaturePair>,
) -> DVector<f64> {
    let mask = |v: &DVector<f64>| {
        DVector::from_iterator(
            v.len(),
            v.iter().zip(free).map(|(&x, &f)| if f { x } else { 0.0 }),
        )
    };
    let mut q = mask(grad);
    let mut alphas = Vec::with_capacity(history.len());
    let pairs: Vec<(DVector<f64>, DVector<f64>)> =
        history.iter().map(|p| (mask(&p.s), mask(&p.y))).collect();

    for ((s, y), pair) in pairs.iter().zip(history).rev() {
        let a = pair.rho * s.dot(&q);
        q.axpy(-a, y, 1.0);
        alphas.push(a);
    }
    alphas.reverse();

    let gamma = pairs
        .last()
        .map(|(s, y)| {
            let yy = y.dot(y);
            if yy > 0.0 {
                s.dot(y) / yy
            } else {
                1.0
            }
        })
        .filter(|g| g.is_finite() && *g > 0.0)
        .unwrap_or(1.0);
    let mut r = q * gamma;
    for (((s, y), pair), a) in pairs.iter().zip(history).zip(&alphas) {
        let beta = pair.rho * y.dot(&r);
        r.axpy(a - beta, s, 1.0);
    }
    -mask(&r)
}

fn project(v: &DVector<f64>) -> DVector<f64> {
    v.map(|x| x.max(0.0))
}

/// Maximizes the dual over `u ≥ 0` with a projected limited-memory quasi-Newton
/// method and Armijo backtracking along the projection arc, starting from `u = 0`.
///
/// Running out of iterations is not an error: the best iterate comes back with
/// `converged = false`.
pub fn solve_dual(prob: &ClassProblem, cfg: &SolverConfig) -> Result<TrainedQuadraticMatrix> {
    cfg.validate()?;
    prob.check_feasible()?;
    let eig_before = eigen_call_count();
    let n = prob.n_intra();

    // Work with the negated objective f = −dual.
    let mut u = DVector::<f64>::zeros(n);
    let mut eval = DualEvaluation::at(u.as_slice(), prob)?;
    let mut evaluations = 1usize;
    let neg_grad = |e: &DualEvaluation| DVector::from_iterator(n, e.gradient.iter().map(|g| -g));
    let mut f = -eval.objective;
    let mut g = neg_grad(&eval);

    let mut history: VecDeque<CurvaturePair> = VecDeque::with_capacity(cfg.memory);
    let mut trace = vec![eval.objective];
    let mut iterations = 0usize;
    let mut converged = false;

    loop {
        let pg_norm = projected_gradient_inf_norm(u.as_slice(), &eval.gradient);
        if pg_norm <= cfg.grad_tol {
            converged = true;
            break;
        }
        if iterations >= cfg.max_iterations {
            break;
        }

        let free: Vec<bool> = u
            .iter()
            .zip(g.iter())
            .map(|(&ui, &gi)| ui > 0.0 || gi < 0.0)
            .collect();
        let steepest = DVector::from_iterator(
            n,
            g.iter()
                .zip(&free)
                .map(|(&gi, &fr)| if fr { -gi } else { 0.0 }),
        );

        let mut accepted = None;
        // Quasi-Newton direction first, steepest descent as the fallback.
        let mut tried_steepest = history.is_empty();
        let mut direction = if history.is_empty() {
            steepest.clone()
        } else {
            let d = lbfgs_direction(&g, &free, &history);
            if g.dot(&d) < 0.0 {
                d
            } else {
                tried_steepest = true;
                history.clear();
                steepest.clone()
            }
        };

        loop {
            let mut alpha = 1.0;
            let mut backtracked = false;
            for _ in 0..60 {
                let trial = project(&(&u + &direction * alpha));
                let step = &trial - &u;
                if step.amax() == 0.0 {
                    break;
                }
                let trial_eval = DualEvaluation::at(trial.as_slice(), prob)?;
                evaluations += 1;
                let f_trial = -trial_eval.objective;
                if f_trial <= f + cfg.armijo_c * g.dot(&step) {
                    accepted = Some((trial, trial_eval, f_trial));
                    break;
                }
                alpha *= cfg.line_search_shrink;
                backtracked = true;
            }
            // Where the dual is locally linear (M ⪰ 0) the gradient does not
            // change, no curvature pair is stored and a stale scaling can pin
            // the step length. Extrapolate until the slope flattens.
            if !backtracked {
                for _ in 0..60 {
                    let Some((ref prev, ref e, f_acc)) = accepted else {
                        break;
                    };
                    if direction.dot(&neg_grad(e)) >= CURVATURE_C * g.dot(&direction) {
                        break;
                    }
                    alpha /= cfg.line_search_shrink;
                    let trial = project(&(&u + &direction * alpha));
                    if trial == *prev {
                        break;
                    }
                    let step = &trial - &u;
                    let trial_eval = DualEvaluation::at(trial.as_slice(), prob)?;
                    evaluations += 1;
                    let f_trial = -trial_eval.objective;
                    if f_trial > f + cfg.armijo_c * g.dot(&step) || f_trial > f_acc {
                        break;
                    }
                    accepted = Some((trial, trial_eval, f_trial));
                }
            }
            if accepted.is_some() || tried_steepest {
                break;
            }
            history.clear();
            direction = steepest.clone();
            tried_steepest = true;
        }

        let Some((u_new, eval_new, _)) = accepted else {
            log::debug!(
                "line search failed at iteration {iterations}, projected gradient {pg_norm:e}"
            );
            break;
        };

        let g_new = neg_grad(&eval_new);
        let s = &u_new - &u;
        let y = &g_new - &g;
        let sy = s.dot(&y);
        if sy > 1e-12 * s.norm() * y.norm() && sy > 0.0 {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back(CurvaturePair {
                s,
                y,
                rho: 1.0 / sy,
            });
        }

        u = u_new;
        eval = eval_new;
        f = -eval.objective;
        g = g_new;
        iterations += 1;
        trace.push(eval.objective);
    }

    let p = eval.primal();
    let primal = primal_objective(&p, prob)?;
    let u_star = DualVariables::new(u.iter().copied().collect())?;
    Ok(TrainedQuadraticMatrix {
        projected_gradient_norm: projected_gradient_inf_norm(u_star.as_slice(), &eval.gradient),
        dual_objective: eval.objective,
        primal_objective: primal,
        duality_gap: primal - eval.objective,
        p,
        u_star,
        iterations,
        converged,
        evaluations,
        eigendecompositions: eigen_call_count() - eig_before,
        objective_trace: trace,
    })
}

/// Residuals of the optimality conditions at a solver result.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// `maxᵢ (b − xᵢᵀPxᵢ)₊`.
    pub max_feasibility_violation: f64,
    /// `maxᵢ |uᵢ (xᵢᵀPxᵢ − b)|`.
    pub max_slackness_residual: f64,
    pub min_eigenvalue: f64,
    pub duality_gap: f64,
    pub projected_gradient_norm: f64,
}

impl KktReport {
    /// All residuals at or below `tol` and `P` PSD.
    pub fn is_optimal(&self, tol: f64) -> bool {
        self.max_feasibility_violation <= tol
            && self.max_slackness_residual <= tol
            && self.min_eigenvalue >= -PSD_TOL
            && self.duality_gap.abs() <= tol
    }
}

pub fn kkt_report(result: &TrainedQuadraticMatrix, prob: &ClassProblem) -> Result<KktReport> {
    check_dual_len(&result.u_star, prob)?;
    if result.p.dim() != prob.dim() {
        return Err(QmlError::invalid("result and problem differ in dimension"));
    }
    let mut violation = 0.0_f64;
    let mut slackness = 0.0_f64;
    for (i, &ui) in result.u_star.as_slice().iter().enumerate() {
        let x = prob.intra_sample(i);
        let q = symmat::quadratic_form_unchecked(result.p.as_matrix(), &x);
        violation = violation.max(prob.bound - q);
        slackness = slackness.max((ui * (q - prob.bound)).abs());
    }
    Ok(KktReport {
        max_feasibility_violation: violation.max(0.0),
        max_slackness_residual: slackness,
        min_eigenvalue: symmat::min_eigenvalue(&result.p)?,
        duality_gap: result.duality_gap,
        projected_gradient_norm: result.projected_gradient_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_constraint(lambda: f64, bound: f64) -> ClassProblem {
        ClassProblem::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            SymmetricMatrix::zeros(2),
            lambda,
            bound,
        )
        .unwrap()
    }

    fn u(v: &[f64]) -> DualVariables {
        DualVariables::new(v.to_vec()).unwrap()
    }

    #[test]
    fn scatter_examples() {
        let s = build_scatter(&DMatrix::from_row_slice(1, 2, &[1.0, 0.0])).unwrap();
        assert_eq!(s.to_row_major(), vec![1.0, 0.0, 0.0, 0.0]);
        let s = build_scatter(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!(s, SymmetricMatrix::identity(2));
        let s = build_scatter(&DMatrix::zeros(0, 3)).unwrap();
        assert_eq!(s, SymmetricMatrix::zeros(3));
        assert!(build_scatter(&DMatrix::from_row_slice(1, 2, &[f64::INFINITY, 0.0])).is_err());
    }

    #[test]
    fn problem_validation() {
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let o = SymmetricMatrix::zeros(2);
        assert!(ClassProblem::new(x.clone(), o.clone(), 0.0, 1.0).is_err());
        assert!(ClassProblem::new(x.clone(), o.clone(), 1.0, -1.0).is_err());
        assert!(ClassProblem::new(DMatrix::zeros(0, 2), o.clone(), 1.0, 1.0).is_err());
        assert!(ClassProblem::new(x.clone(), SymmetricMatrix::zeros(3), 1.0, 1.0).is_err());
        let not_psd = SymmetricMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(ClassProblem::new(x, not_psd, 1.0, 1.0).is_err());
    }

    #[test]
    fn dual_variables_reject_negative() {
        assert!(DualVariables::new(vec![0.0, -1e-3]).is_err());
        assert!(DualVariables::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn assemble_m_examples() {
        let prob = ClassProblem::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            SymmetricMatrix::identity(2),
            3.0,
            1.0,
        )
        .unwrap();
        let m0 = assemble_m(&DualVariables::zeros(1), &prob).unwrap();
        assert_eq!(m0, SymmetricMatrix::identity(2).scale(3.0));

        let prob = single_constraint(1.0, 1.0);
        let m = assemble_m(&u(&[2.0]), &prob).unwrap();
        assert_eq!(m.to_row_major(), vec![-2.0, 0.0, 0.0, 0.0]);

        let prob = ClassProblem::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            SymmetricMatrix::identity(2),
            1.0,
            1.0,
        )
        .unwrap();
        let m = assemble_m(&u(&[1.0]), &prob).unwrap();
        assert_eq!(m, SymmetricMatrix::from_diagonal(&[0.0, 1.0]));
        assert!(assemble_m(&u(&[1.0, 2.0]), &prob).is_err());
    }

    #[test]
    fn dual_objective_closed_form() {
        let prob = single_constraint(1.0, 1.0);
        for t in [0.0, 0.25, 1.0, 1.7, 3.0] {
            let got = dual_objective(&u(&[t]), &prob).unwrap();
            let want = -t * t / 2.0 + t;
            assert!((got - want).abs() < 1e-12, "t={t}: {got} vs {want}");
        }
    }

    #[test]
    fn dual_objective_zero_at_origin() {
        let prob = ClassProblem::from_samples(
            DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, -1.0]),
            &DMatrix::from_row_slice(2, 3, &[0.5, 0.5, 0.5, -1.0, 0.0, 2.0]),
            0.7,
            1.0,
        )
        .unwrap();
        assert_eq!(
            dual_objective(&DualVariables::zeros(2), &prob).unwrap(),
            0.0
        );
        assert_eq!(
            dual_gradient(&DualVariables::zeros(2), &prob).unwrap(),
            vec![1.0, 1.0]
        );
        let p = recover_primal(&DualVariables::zeros(2), &prob).unwrap();
        assert_eq!(symmat::frobenius_norm(&p), 0.0);
    }

    #[test]
    fn dual_gradient_closed_form() {
        let prob = single_constraint(1.0, 1.0);
        for t in [0.3, 1.0, 2.5] {
            let g = dual_gradient(&u(&[t]), &prob).unwrap();
            assert!((g[0] - (1.0 - t)).abs() < 1e-12);
        }
    }

    #[test]
    fn recover_primal_single_constraint() {
        let prob = single_constraint(1.0, 1.0);
        let p = recover_primal(&u(&[1.0]), &prob).unwrap();
        assert!(p.max_abs_diff(&SymmetricMatrix::from_diagonal(&[1.0, 0.0])) < 1e-14);
        assert!((p.quadratic_form(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn primal_objective_examples() {
        let prob = single_constraint(2.5, 1.0);
        assert_eq!(
            primal_objective(&SymmetricMatrix::zeros(2), &prob).unwrap(),
            0.0
        );
        let p = SymmetricMatrix::from_diagonal(&[1.0, 0.0]);
        assert_eq!(primal_objective(&p, &prob).unwrap(), 0.5);
        let prob = ClassProblem::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            SymmetricMatrix::identity(2),
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(
            primal_objective(&SymmetricMatrix::identity(2), &prob).unwrap(),
            3.0
        );
        assert!(primal_objective(&SymmetricMatrix::identity(3), &prob).is_err());
    }

    #[test]
    fn solve_single_constraint() {
        let prob = single_constraint(1.0, 1.0);
        let res = solve_dual(&prob, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert!((res.u_star.as_slice()[0] - 1.0).abs() < 1e-6);
        assert!(
            res.p
                .max_abs_diff(&SymmetricMatrix::from_diagonal(&[1.0, 0.0]))
                < 1e-6
        );
        assert!((res.dual_objective - 0.5).abs() < 1e-6);
        assert!(res.duality_gap.abs() < 1e-6);

        let kkt = kkt_report(&res, &prob).unwrap();
        assert!(kkt.max_feasibility_violation < 1e-6);
        assert!(kkt.max_slackness_residual <= 1e-8 || kkt.max_slackness_residual < 1e-6);
    }

    #[test]
    fn solve_two_axis_samples() {
        let prob = ClassProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            SymmetricMatrix::zeros(2),
            1.0,
            1.0,
        )
        .unwrap();
        let res = solve_dual(&prob, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        assert!(res.p.max_abs_diff(&SymmetricMatrix::identity(2)) < 1e-6);
        assert!((res.primal_objective - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_sample_is_infeasible() {
        let prob = ClassProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            SymmetricMatrix::zeros(2),
            1.0,
            1.0,
        )
        .unwrap();
        let err = solve_dual(&prob, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, QmlError::Infeasible(_)));
    }

    #[test]
    fn origin_is_flagged_non_optimal() {
        let prob = single_constraint(1.0, 1.0);
        let at_zero = TrainedQuadraticMatrix::from_dual(DualVariables::zeros(1), &prob).unwrap();
        let kkt = kkt_report(&at_zero, &prob).unwrap();
        assert_eq!(kkt.max_feasibility_violation, 1.0);
        assert_eq!(kkt.projected_gradient_norm, 1.0);
        assert!(!kkt.is_optimal(1e-4));
    }

    #[test]
    fn duplicate_samples_are_legal() {
        let prob = ClassProblem::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]),
            SymmetricMatrix::zeros(2),
            1.0,
            1.0,
        )
        .unwrap();
        let res = solve_dual(&prob, &SolverConfig::default()).unwrap();
        assert!(res.converged);
        let total: f64 = res.u_star.as_slice().iter().sum();
        assert!((total - 1.0).abs() < 1e-6);
        assert!(
            res.p
                .max_abs_diff(&SymmetricMatrix::from_diagonal(&[1.0, 0.0]))
                < 1e-6
        );
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let prob = ClassProblem::from_samples(
            DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.1, 1.0, 0.3, -0.4, 0.0, 1.0]),
            &DMatrix::from_row_slice(2, 3, &[0.5, 0.5, 0.5, -1.0, 0.0, 2.0]),
            1.0,
            1.0,
        )
        .unwrap();
        let cfg = SolverConfig {
            max_iterations: 1,
            grad_tol: 1e-14,
            ..SolverConfig::default()
        };
        let res = solve_dual(&prob, &cfg).unwrap();
        assert!(!res.converged);
        assert_eq!(res.iterations, 1);
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            line_search_shrink: 1.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(SolverConfig {
            memory: 0,
            ..SolverConfig::default()
        }
        .validate()
        .is_err());
    }
}
