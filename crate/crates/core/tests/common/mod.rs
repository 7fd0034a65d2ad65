#![allow(dead_code)]

use dqml::qml::ClassProblem;
use dqml::symmat::SymmetricMatrix;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Symmetric matrix with N(0,1) entries, optionally rank-deficient.
pub fn random_symmetric<R: Rng>(rng: &mut R, m: usize) -> SymmetricMatrix {
    let kind = rng.random_range(0..3);
    let a = match kind {
        // full rank, indefinite
        0 => DMatrix::from_fn(m, m, |_, _| gaussian(rng)),
        // low-rank indefinite: B D Bᵀ with few columns
        _ => {
            let r = rng.random_range(1..=m.max(2) / 2);
            let b = DMatrix::from_fn(m, r, |_, _| gaussian(rng));
            let d = DMatrix::from_fn(r, r, |i, j| if i == j { gaussian(rng) } else { 0.0 });
            &b * d * b.transpose()
        }
    };
    SymmetricMatrix::symmetrize(a).unwrap()
}

pub fn grid_instance<R: Rng>(rng: &mut R, lambda: f64) -> ClassProblem {
    dqml::oracle::random_planar_problem(rng, lambda).unwrap()
}

/// Image-like instance: non-negative, strongly correlated samples around a
/// shared base intensity, scaled so that ‖x‖ is of order one.
pub fn image_like_instance<R: Rng>(
    rng: &mut R,
    m: usize,
    n_intra: usize,
    n_extra: usize,
    lambda: f64,
) -> ClassProblem {
    let base: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let scale = 1.0 / (m as f64).sqrt();
    let draw = |n: usize, rng: &mut R| {
        DMatrix::from_fn(n, m, |_, j| {
            (base[j] + 0.2 * gaussian(rng)).max(0.0) * scale
        })
    };
    let intra = draw(n_intra, rng);
    let extra = draw(n_extra, rng);
    ClassProblem::from_samples(intra, &extra, lambda, 1.0).unwrap()
}

pub fn rel_diff(a: &SymmetricMatrix, b: &SymmetricMatrix) -> f64 {
    let diff = (a.as_matrix() - b.as_matrix()).norm();
    diff / a.as_matrix().norm().max(b.as_matrix().norm()).max(1e-300)
}
