//! Dense symmetric matrices and the spectral operations the dual solver needs:
//! eigendecomposition, positive/negative parts, Frobenius geometry.

use std::cell::Cell;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{QmlError, Result};

/// Absolute tolerance on the minimum eigenvalue used to certify a matrix as PSD.
pub const PSD_TOL: f64 = 1e-8;

/// Eigenvalues with magnitude at or below this fraction of the spectral radius
/// belong to neither the positive nor the negative part.
pub const EIGEN_ZERO_RTOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;

thread_local! {
    static EIGEN_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of eigendecompositions performed on the current thread so far.
///
/// The counter is per thread so concurrent solves do not disturb each other's
/// accounting; take the difference of two readings around a computation.
pub fn eigen_call_count() -> u64 {
    EIGEN_CALLS.with(|c| c.get())
}

/// A dense real symmetric matrix, stored in full.
#[derive(Clone, PartialEq)]
pub struct SymmetricMatrix {
    data: DMatrix<f64>,
}

impl fmt::Debug for SymmetricMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymmetricMatrix{}", self.data)
    }
}

impl SymmetricMatrix {
    /// Validates squareness, finiteness and symmetry.
    pub fn from_matrix(data: DMatrix<f64>) -> Result<Self> {
        let m = data.nrows();
        if m == 0 {
            return Err(QmlError::invalid(
                "symmetric matrix must have dimension >= 1",
            ));
        }
        if data.ncols() != m {
            return Err(QmlError::invalid(format!(
                "matrix is {}x{}, expected square",
                m,
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(QmlError::invalid("matrix has non-finite entries"));
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let (a, b) = (data[(i, j)], data[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                    return Err(QmlError::invalid(format!(
                        "matrix is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { data })
    }

    /// Row-major constructor, validated like [`SymmetricMatrix::from_matrix`].
    pub fn from_row_slice(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(QmlError::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::from_matrix(DMatrix::from_row_slice(dim, dim, entries))
    }

    /// Builds `(A + Aᵀ)/2`, absorbing floating-point asymmetry.
    pub fn symmetrize(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != data.ncols() || data.nrows() == 0 {
            return Err(QmlError::invalid(
                "symmetrize requires a non-empty square matrix",
            ));
        }
        let sym = (&data + data.transpose()) * 0.5;
        Ok(Self { data: sym })
    }

    pub(crate) fn symmetrize_unchecked(data: DMatrix<f64>) -> Self {
        let sym = (&data + data.transpose()) * 0.5;
        Self { data: sym }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            data: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self {
            data: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        assert!(!diag.is_empty(), "dimension must be positive");
        Self {
            data: DMatrix::from_diagonal(&DVector::from_row_slice(diag)),
        }
    }

    /// The rank-one matrix `x xᵀ`.
    pub fn outer(x: &[f64]) -> Self {
        assert!(!x.is_empty(), "dimension must be positive");
        let v = DVector::from_row_slice(x);
        Self {
            data: &v * v.transpose(),
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<f64> {
        let m = self.dim();
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                out.push(self.data[(i, j)]);
            }
        }
        out
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            data: &self.data * alpha,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self {
            data: &self.data + &other.data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_dim(self, other)?;
        Ok(Self {
            data: &self.data - &other.data,
        })
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(QmlError::invalid(format!(
                "vector has length {}, matrix has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(quadratic_form_unchecked(&self.data, x))
    }

    /// Largest absolute entry difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn quadratic_form_unchecked(a: &DMatrix<f64>, x: &[f64]) -> f64 {
    let m = a.nrows();
    let mut acc = 0.0;
    for j in 0..m {
        let col = a.column(j);
        let mut inner = 0.0;
        for i in 0..m {
            inner += col[i] * x[i];
        }
        acc += inner * x[j];
    }
    acc
}

fn check_same_dim(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(QmlError::invalid(format!(
            "dimension mismatch: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// `A = V diag(λ) Vᵀ` with eigenvalues sorted in descending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Threshold below which an eigenvalue counts as zero.
    pub fn zero_threshold(&self) -> f64 {
        let spectral_radius = self
            .eigenvalues
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        EIGEN_ZERO_RTOL * spectral_radius
    }

    /// Eigenvalues with the near-zero ones clamped to exactly zero.
    pub fn clamped_eigenvalues(&self) -> DVector<f64> {
        let thr = self.zero_threshold();
        self.eigenvalues
            .map(|v| if v.abs() <= thr { 0.0 } else { v })
    }

    /// Reassembles `V diag(f(λ)) Vᵀ` over the clamped spectrum.
    fn reassemble(&self, keep: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let lam = self.clamped_eigenvalues();
        let m = self.dim();
        let mut out = DMatrix::zeros(m, m);
        for k in 0..m {
            let w = keep(lam[k]);
            if w == 0.0 {
                continue;
            }
            let v = self.eigenvectors.column(k);
            out.ger(w, &v, &v, 1.0);
        }
        SymmetricMatrix::symmetrize_unchecked(out)
    }

    pub fn positive_part(&self) -> SymmetricMatrix {
        self.reassemble(|l| l.max(0.0))
    }

    pub fn negative_part(&self) -> SymmetricMatrix {
        self.reassemble(|l| l.min(0.0))
    }

    /// `‖A₋‖_F²`, the sum of squared negative eigenvalues, without reassembly.
    pub fn negative_part_norm_sq(&self) -> f64 {
        self.clamped_eigenvalues()
            .iter()
            .filter(|&&l| l < 0.0)
            .map(|l| l * l)
            .sum()
    }

    /// Indices of the strictly negative (post-clamping) eigenvalues.
    pub fn negative_indices(&self) -> Vec<usize> {
        self.clamped_eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l < 0.0)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let d = DMatrix::from_diagonal(&self.eigenvalues);
        &self.eigenvectors * d * self.eigenvectors.transpose()
    }
}

/// Full symmetric eigendecomposition, eigenvalues descending.
pub fn eigen_decompose(a: &SymmetricMatrix) -> Result<EigenDecomposition> {
    if a.dim() == 0 {
        return Err(QmlError::invalid("cannot decompose an empty matrix"));
    }
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(QmlError::invalid("matrix has non-finite entries"));
    }
    EIGEN_CALLS.with(|c| c.set(c.get() + 1));

    let eig = nalgebra::SymmetricEigen::new(a.data.clone());
    let m = a.dim();
    let mut order: Vec<usize> = (0..m).collect();
    // Stable sort keeps the output deterministic for repeated eigenvalues.
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));

    let eigenvalues = DVector::from_iterator(m, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = DMatrix::zeros(m, m);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(QmlError::NumericalFailure(
            "eigendecomposition produced non-finite values".into(),
        ));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `A₊`: the projection of `A` onto the PSD cone.
pub fn positive_part(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    Ok(eigen_decompose(a)?.positive_part())
}

/// `A₋ = A − A₊`, built from the non-positive eigenpairs.
pub fn negative_part(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    Ok(eigen_decompose(a)?.negative_part())
}

/// Frobenius inner product `Σ A_ij B_ij` (= `tr(AB)` for symmetric arguments).
pub fn trace_product(a: &SymmetricMatrix, b: &SymmetricMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(a.data.dot(&b.data))
}

pub fn frobenius_norm(a: &SymmetricMatrix) -> f64 {
    a.data.norm()
}

pub fn min_eigenvalue(a: &SymmetricMatrix) -> Result<f64> {
    let eig = eigen_decompose(a)?;
    Ok(eig.eigenvalues[eig.dim() - 1])
}

/// PSD certificate at the absolute tolerance [`PSD_TOL`].
pub fn is_psd(a: &SymmetricMatrix) -> Result<bool> {
    Ok(min_eigenvalue(a)? >= -PSD_TOL)
}
