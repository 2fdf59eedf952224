//! Shared helpers for the integration tests.

#![allow(dead_code)]

pub mod oracles;
pub mod synthetic;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use catent_core::tensor::{Matrix, WordVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability vector; each entry is zero with probability `p_zero`.
pub fn random_probability(rng: &mut ChaCha8Rng, dim: usize, p_zero: f64) -> WordVector {
    loop {
        let raw: Vec<f64> = (0..dim)
            .map(|_| {
                if rng.random_bool(p_zero) {
                    0.0
                } else {
                    rng.random::<f64>() + 1e-3
                }
            })
            .collect();
        let s: f64 = raw.iter().sum();
        if s > 0.0 {
            return WordVector::unlabelled(raw.into_iter().map(|x| x / s).collect()).unwrap();
        }
    }
}

pub fn random_nonnegative(rng: &mut ChaCha8Rng, dim: usize, p_zero: f64) -> WordVector {
    let raw = (0..dim)
        .map(|_| if rng.random_bool(p_zero) { 0.0 } else { rng.random::<f64>() })
        .collect();
    WordVector::unlabelled(raw).unwrap()
}

/// `G Gᵀ / Tr` with a Gaussian `dim × rank` factor.
pub fn random_density_matrix(rng: &mut ChaCha8Rng, dim: usize, rank: usize) -> Matrix {
    let mut g = Matrix::zeros(dim, rank);
    for i in 0..dim {
        for j in 0..rank {
            g[(i, j)] = rng.sample::<f64, _>(rand_distr::StandardNormal);
        }
    }
    let p = g.matmul(&g.transpose()).unwrap();
    let tr = p.trace();
    p.scale(1.0 / tr)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
