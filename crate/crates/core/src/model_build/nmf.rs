//! Lee–Seung multiplicative updates for `min ‖X − WH‖_F²` with `W, H ≥ 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmfConfig {
    pub k: usize,
    pub max_iter: usize,
    /// Stop once the relative objective improvement falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl NmfConfig {
    pub fn new(k: usize) -> Self {
        NmfConfig {
            k,
            max_iter: 300,
            tol: 1e-6,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NmfModel {
    pub w: Matrix,
    pub h: Matrix,
    /// Squared Frobenius error at initialization and after every iteration.
    pub objective_trace: Vec<f64>,
}

impl NmfModel {
    pub fn reconstruction(&self) -> Matrix {
        self.w.matmul(&self.h).expect("factor shapes agree")
    }

    pub fn residual(&self, x: &Matrix) -> f64 {
        squared_error(x, &self.reconstruction()).sqrt()
    }

    /// True when no recorded objective exceeds its predecessor by more than
    /// `slack` relative to the initial objective.
    pub fn is_monotone(&self, slack: f64) -> bool {
        let scale = self.objective_trace.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
        self.objective_trace
            .windows(2)
            .all(|p| p[1] <= p[0] + slack * scale)
    }
}

fn squared_error(x: &Matrix, y: &Matrix) -> f64 {
    x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// `target ← target ⊙ num / den`, keeping entries whose denominator vanishes.
fn multiplicative_step(target: &mut Matrix, num: &Matrix, den: &Matrix) {
    for i in 0..target.rows() {
        for j in 0..target.cols() {
            let d = den[(i, j)];
            if d > 0.0 {
                target[(i, j)] *= num[(i, j)] / d;
            }
        }
    }
}

pub fn nmf(x: &Matrix, cfg: &NmfConfig) -> Result<NmfModel> {
    let (rows, cols) = (x.rows(), x.cols());
    if cfg.k == 0 || cfg.k > rows.min(cols) {
        return Err(Error::InvalidArgument(format!(
            "rank {} outside 1..={}",
            cfg.k,
            rows.min(cols)
        )));
    }
    if let Some((index, &value)) = x.as_slice().iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::NegativeEntry { index, value });
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument("input has non-finite entries".into()));
    }

    let mean = x.as_slice().iter().sum::<f64>() / (rows * cols) as f64;
    let scale = (mean / cfg.k as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut init = |r: usize, c: usize| {
        let data = (0..r * c)
            .map(|_| scale * (1.0 - rng.random::<f64>()))
            .collect();
        Matrix::from_vec(r, c, data).expect("shape")
    };
    let mut w = init(rows, cfg.k);
    let mut h = init(cfg.k, cols);

    let mut trace = vec![squared_error(x, &w.matmul(&h)?)];
    for _ in 0..cfg.max_iter {
        let wt = w.transpose();
        let num_h = wt.matmul(x)?;
        let den_h = wt.matmul(&w)?.matmul(&h)?;
        multiplicative_step(&mut h, &num_h, &den_h);

        let ht = h.transpose();
        let num_w = x.matmul(&ht)?;
        let den_w = w.matmul(&h.matmul(&ht)?)?;
        multiplicative_step(&mut w, &num_w, &den_w);

        let obj = squared_error(x, &w.matmul(&h)?);
        let prev = *trace.last().expect("trace starts non-empty");
        trace.push(obj);
        if obj == 0.0 || (prev > 0.0 && (prev - obj) / prev < cfg.tol) {
            break;
        }
    }
    Ok(NmfModel {
        w,
        h,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    #[test]
    fn rank_one_is_recovered() {
        let u = [1.0, 2.0, 0.5, 3.0];
        let v = [0.2, 1.0, 4.0];
        let mut x = Matrix::zeros(4, 3);
        for i in 0..4 {
            for j in 0..3 {
                x[(i, j)] = u[i] * v[j];
            }
        }
        let model = nmf(&x, &NmfConfig::new(1)).unwrap();
        assert!(model.residual(&x) < 1e-6 * x.frobenius_norm());
    }

    #[test]
    fn objective_never_increases() {
        let x = random(50, 40, 3);
        let model = nmf(&x, &NmfConfig::new(5).with_seed(9)).unwrap();
        assert!(model.is_monotone(1e-9));
        assert!(model.w.as_slice().iter().all(|&v| v >= 0.0));
        assert!(model.h.as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn full_rank_does_not_worsen() {
        let x = random(6, 4, 1);
        let model = nmf(&x, &NmfConfig::new(4)).unwrap();
        assert!(model.objective_trace.last().unwrap() <= &model.objective_trace[0]);
    }

    #[test]
    fn seeds_are_deterministic() {
        let x = random(8, 7, 2);
        let cfg = NmfConfig::new(3).with_seed(4);
        assert_eq!(nmf(&x, &cfg).unwrap(), nmf(&x, &cfg).unwrap());
    }

    #[test]
    fn invalid_inputs() {
        let x = random(3, 3, 0);
        assert!(nmf(&x, &NmfConfig::new(0)).is_err());
        assert!(nmf(&x, &NmfConfig::new(4)).is_err());
        let mut neg = x.clone();
        neg[(1, 1)] = -1.0;
        assert!(matches!(nmf(&neg, &NmfConfig::new(1)), Err(Error::NegativeEntry { .. })));
    }
}
