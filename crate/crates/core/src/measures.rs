//! Entropy-based entailment measures over probability vectors and density
//! matrices. All logarithms are natural.
//!
//! A divergence that is infinite because of a support violation is reported
//! as [`Divergence::Infinite`] and never leaks into arithmetic as a float.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{DensityMatrix, Matrix, SymMatrix, WordVector, DEFAULT_EIG_TOL};

/// Default residual bound for deciding support inclusion.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-8;

/// Default mixing weight for the α-skew divergence.
pub const DEFAULT_ALPHA: f64 = 0.99;

const NORMALIZATION_SLACK: f64 = 1e-9;
const NEGATIVE_SLACK: f64 = 1e-9;

/// Tolerances shared by the measures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative cutoff below which a probability or eigenvalue counts as zero.
    pub eig: f64,
    /// Projection residual allowed when testing support inclusion.
    pub support: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eig: DEFAULT_EIG_TOL,
            support: DEFAULT_SUPPORT_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn is_finite(self) -> bool {
        matches!(self, Divergence::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(x) => Some(x),
            Divergence::Infinite => None,
        }
    }
}

/// `1 / (1 + divergence)`, zero with `diverged` set when the divergence is infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Representativeness {
    pub value: f64,
    pub diverged: bool,
}

impl Representativeness {
    pub fn from_divergence(d: Divergence) -> Self {
        match d {
            Divergence::Finite(x) => Representativeness {
                value: 1.0 / (1.0 + x),
                diverged: false,
            },
            Divergence::Infinite => Representativeness {
                value: 0.0,
                diverged: true,
            },
        }
    }
}

fn check_probabilistic(v: &WordVector) -> Result<()> {
    if let Some((index, &value)) = v.entries().iter().enumerate().find(|(_, &x)| x < 0.0) {
        return Err(Error::NegativeEntry { index, value });
    }
    let s = v.sum();
    if (s - 1.0).abs() > NORMALIZATION_SLACK {
        return Err(Error::Unnormalized(s));
    }
    Ok(())
}

fn check_pair(v: &WordVector, w: &WordVector) -> Result<()> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            got: w.dim(),
        });
    }
    check_probabilistic(v)?;
    check_probabilistic(w)
}

fn zero_cut(p: &[f64], tol: f64) -> f64 {
    tol * p.iter().fold(0.0f64, |m, &x| m.max(x))
}

/// `−Σ pᵢ ln pᵢ` with `0 ln 0 = 0`.
pub fn shannon_entropy(v: &WordVector) -> Result<f64> {
    check_probabilistic(v)?;
    Ok(-v
        .entries()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>())
}

pub fn kl_divergence(v: &WordVector, w: &WordVector) -> Result<Divergence> {
    kl_divergence_with(v, w, DEFAULT_EIG_TOL)
}

/// `Σ pⱼ (ln pⱼ − ln qⱼ)`; infinite when some `pⱼ` is above the zero cutoff
/// while `qⱼ` is at or below it. Cutoffs are `tol` times the largest entry.
pub fn kl_divergence_with(v: &WordVector, w: &WordVector, tol: f64) -> Result<Divergence> {
    check_pair(v, w)?;
    let (p, q) = (v.entries(), w.entries());
    let p_cut = zero_cut(p, tol);
    let q_cut = zero_cut(q, tol);
    let mut acc = 0.0;
    for (&pj, &qj) in p.iter().zip(q) {
        if pj <= p_cut {
            continue;
        }
        if qj <= q_cut {
            return Ok(Divergence::Infinite);
        }
        acc += pj * (pj.ln() - qj.ln());
    }
    Ok(Divergence::Finite(acc.max(0.0)))
}

pub fn representativeness_kl(v: &WordVector, w: &WordVector) -> Result<Representativeness> {
    Ok(Representativeness::from_divergence(kl_divergence(v, w)?))
}

pub fn representativeness_kl_with(
    v: &WordVector,
    w: &WordVector,
    tol: f64,
) -> Result<Representativeness> {
    Ok(Representativeness::from_divergence(kl_divergence_with(v, w, tol)?))
}

fn mixture(v: &WordVector, w: &WordVector, weight_w: f64) -> Result<WordVector> {
    WordVector::unlabelled(
        v.entries()
            .iter()
            .zip(w.entries())
            .map(|(a, b)| (1.0 - weight_w) * a + weight_w * b)
            .collect(),
    )
}

/// `½ [KL(v‖m) + KL(w‖m)]` with `m = (v + w)/2`.
pub fn jensen_shannon(v: &WordVector, w: &WordVector) -> Result<f64> {
    check_pair(v, w)?;
    let m = mixture(v, w, 0.5)?;
    let a = kl_terms(v.entries(), m.entries());
    let b = kl_terms(w.entries(), m.entries());
    Ok((0.5 * (a + b)).max(0.0))
}

/// KL summed over the support of `p`, assuming `q` covers it.
fn kl_terms(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pj, _)| pj > 0.0)
        .map(|(&pj, &qj)| pj * (pj.ln() - qj.ln()))
        .sum()
}

/// `KL(v ‖ α w + (1 − α) v)`, finite for every `α ∈ (0, 1)`.
pub fn alpha_skew(v: &WordVector, w: &WordVector, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    check_pair(v, w)?;
    let m = mixture(v, w, alpha)?;
    Ok(kl_terms(v.entries(), m.entries()).max(0.0))
}

/// `−Σ λᵢ ln λᵢ` over the spectrum.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let spectrum = rho.spectrum();
    Ok(-spectrum
        .eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| l * l.ln())
        .sum::<f64>())
}

fn check_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: sigma.dim(),
        });
    }
    Ok(())
}

fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    // Tr(AB) for symmetric B is the entrywise inner product.
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| x * y)
        .sum()
}

/// `Tr ρ (ln ρ − ln σ)` with both logarithms restricted to their supports.
fn relative_entropy_on_support(rho: &DensityMatrix, sigma: &DensityMatrix, tol: f64) -> Result<f64> {
    let log_rho = rho.spectrum().log_on_support(tol)?;
    let log_sigma = sigma.spectrum().log_on_support(tol)?;
    let diff = log_rho.sub(&log_sigma)?;
    Ok(trace_product(rho.matrix(), &diff))
}

pub fn quantum_relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Divergence> {
    quantum_relative_entropy_with(rho, sigma, Tolerances::default())
}

/// Density-matrix relative entropy.
///
/// Support inclusion is decided geometrically first; a violation yields
/// [`Divergence::Infinite`]. Results in `[−1e-9, 0)` are clamped to zero.
pub fn quantum_relative_entropy_with(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: Tolerances,
) -> Result<Divergence> {
    check_same_dim(rho, sigma)?;
    if !support_inclusion_with(rho, sigma, tol)? {
        return Ok(Divergence::Infinite);
    }
    let d = relative_entropy_on_support(rho, sigma, tol.eig)?;
    if d < -NEGATIVE_SLACK {
        return Err(Error::Degenerate(format!(
            "relative entropy evaluated to {d:e}"
        )));
    }
    Ok(Divergence::Finite(d.max(0.0)))
}

pub fn representativeness_vn(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Representativeness> {
    Ok(Representativeness::from_divergence(quantum_relative_entropy(
        rho, sigma,
    )?))
}

pub fn representativeness_vn_with(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: Tolerances,
) -> Result<Representativeness> {
    Ok(Representativeness::from_divergence(
        quantum_relative_entropy_with(rho, sigma, tol)?,
    ))
}

/// `½ [N(ρ‖μ) + N(σ‖μ)]` with `μ = (ρ + σ)/2`.
pub fn quantum_js(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    quantum_js_with(rho, sigma, DEFAULT_EIG_TOL)
}

pub fn quantum_js_with(rho: &DensityMatrix, sigma: &DensityMatrix, tol: f64) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let mid = SymMatrix::new(rho.matrix().add(sigma.matrix())?.scale(0.5))?;
    let mu = DensityMatrix::from_psd("", mid.into_matrix(), 0.0)?;
    let a = relative_entropy_on_support(rho, &mu, tol)?;
    let b = relative_entropy_on_support(sigma, &mu, tol)?;
    Ok((0.5 * (a + b)).max(0.0))
}

pub fn support_inclusion(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<bool> {
    support_inclusion_with(rho, sigma, Tolerances::default())
}

/// True when every support eigenvector of `ρ` projects onto the support of
/// `σ` with residual norm at most `tol.support`.
pub fn support_inclusion_with(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    tol: Tolerances,
) -> Result<bool> {
    check_same_dim(rho, sigma)?;
    let inner = rho.support_basis(tol.eig);
    let outer = sigma.support_basis(tol.eig);
    Ok(inner.iter().all(|u| projection_residual(u, &outer) <= tol.support))
}

/// Norm of `u` minus its projection onto the span of orthonormal `basis`.
pub fn projection_residual(u: &[f64], basis: &[Vec<f64>]) -> f64 {
    let mut r = u.to_vec();
    for b in basis {
        let c: f64 = b.iter().zip(u).map(|(x, y)| x * y).sum();
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri -= c * bi;
        }
    }
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Classical support inclusion of probability vectors under the same
/// relative zero cutoff the divergences use.
pub fn vector_support_inclusion(v: &WordVector, w: &WordVector, tol: f64) -> bool {
    let p_cut = zero_cut(v.entries(), tol);
    let q_cut = zero_cut(w.entries(), tol);
    v.entries()
        .iter()
        .zip(w.entries())
        .all(|(&p, &q)| p <= p_cut || q > q_cut)
}
