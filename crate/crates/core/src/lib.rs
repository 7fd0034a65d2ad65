//! Quadratic matrix learning.
//!
//! For every class a PSD matrix `P_c` is learned so that the quadratic
//! projections `xᵀ P_c x` are at least `b` on the class's own samples while the
//! summed projections of all other samples stay small. The matrices are found
//! by maximizing the Lagrange dual over non-negative multipliers with a
//! projected quasi-Newton method; each evaluation costs one eigendecomposition.
//! The learned matrices turn a sample into a `C`-dimensional feature vector
//! that is classified by its largest component or by cosine nearest neighbour.
//!
//! Modules:
//! - [`symmat`]: symmetric matrices, eigendecomposition, PSD cone parts.
//! - [`qml`]: the per-class problem, dual objective/gradient and solver.
//! - [`oracle`]: independent primal reference solvers used for verification.
//! - [`pipeline`]: training over all classes, features, classifiers, CV, model files.
//! - [`datasets`]: CSV/raster ingestion, synthetic data, random splits.

pub mod datasets;
pub mod error;
pub mod oracle;
pub mod pipeline;
pub mod qml;
pub mod symmat;

pub use datasets::{SplitSpec, SynthSpec};
pub use error::{QmlError, Result};
pub use pipeline::{ClassificationRule, Dataset, FeatureVector, ModelSet};
pub use qml::{
    solve_dual, ClassProblem, DualVariables, KktReport, SolverConfig, TrainedQuadraticMatrix,
};
pub use symmat::{EigenDecomposition, SymmetricMatrix};
